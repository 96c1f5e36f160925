//! Symmetric target densities and the regularity conditions the bounds rely on.
//!
//! A [`TargetDensity`] carries an unnormalized log density, its gradient, the
//! drift floor `b` (a lower bound on `-∇log π(x)` for `x ≥ 1`) and the
//! normalizing constant. The Langevin diffusion for the density moves with
//! drift `½∇log π`.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Density of the tail truncation rule: integration of `π` toward ±∞ stops
/// once the unnormalized density falls below this fraction of its value at
/// the inner endpoint.
pub const TAIL_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DensityKind {
    /// `π(x) ∝ exp(-|x|^β)`, `β > 1`.
    ExponentialPower { beta: f64 },
    CustomLogDensity,
}

#[derive(Clone)]
pub struct TargetDensity {
    kind: DensityKind,
    log_fn: Option<ScalarFn>,
    grad_fn: Option<ScalarFn>,
    b: f64,
    z_const: f64,
}

impl fmt::Debug for TargetDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetDensity")
            .field("kind", &self.kind)
            .field("b", &self.b)
            .field("z_const", &self.z_const)
            .finish()
    }
}

/// Builds the exponential-power family `π(x) ∝ exp(-|x|^β)`.
///
/// The drift floor is `b = β` (the gradient magnitude `β x^{β-1}` is
/// non-decreasing on `[1, ∞)`) and the normalizer is `2 Γ(1 + 1/β)`.
pub fn make_exponential_power(beta: f64) -> Result<TargetDensity> {
    if !beta.is_finite() || beta <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "exponential-power exponent must satisfy beta > 1, got {beta}"
        )));
    }
    Ok(TargetDensity {
        kind: DensityKind::ExponentialPower { beta },
        log_fn: None,
        grad_fn: None,
        b: beta,
        z_const: 2.0 * gamma(1.0 + 1.0 / beta),
    })
}

impl TargetDensity {
    /// A user-supplied symmetric log density with a declared drift floor.
    /// The normalizer is computed once by quadrature; the declared floor is
    /// *not* verified here, see [`check_a1`].
    pub fn custom<L, G>(log_density_unnorm: L, grad_log_density: G, b: f64) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "drift floor b must be positive, got {b}"
            )));
        }
        let mut d = TargetDensity {
            kind: DensityKind::CustomLogDensity,
            log_fn: Some(Arc::new(log_density_unnorm)),
            grad_fn: Some(Arc::new(grad_log_density)),
            b,
            z_const: 1.0,
        };
        d.z_const = d.normalizer()?;
        Ok(d)
    }

    /// A custom density from tabulated `(x, log π̃(x))` pairs, interpolated by
    /// a natural cubic spline. If every sample has `x ≥ 0` the table is
    /// mirrored, so only the right half-line needs to be supplied. The drift
    /// is a central finite difference of the interpolant.
    pub fn from_samples(samples: &[(f64, f64)], b: f64) -> Result<Self> {
        let mut pts = samples.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mirror = pts.first().map_or(false, |p| p.0 >= 0.0);
        if mirror {
            // Fit across the origin so x = 0 is an interior knot.
            let reflected: Vec<(f64, f64)> =
                pts.iter().rev().filter(|p| p.0 > 0.0).map(|p| (-p.0, p.1)).collect();
            pts.splice(0..0, reflected);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let spline = Arc::new(CubicSpline::new(xs, ys)?);
        let eval: ScalarFn = if mirror {
            let s = spline.clone();
            Arc::new(move |x: f64| s.eval(x.abs()))
        } else {
            let s = spline.clone();
            Arc::new(move |x: f64| s.eval(x))
        };
        let h = 1e-5;
        let e2 = eval.clone();
        let grad = move |x: f64| (e2(x + h) - e2(x - h)) / (2.0 * h);
        let e3 = eval.clone();
        Self::custom(move |x| e3(x), grad, b)
    }

    /// Reads a two-column CSV of `x, log π̃(x)`. Lines that do not parse as two
    /// numbers (headers, comments) are skipped.
    pub fn from_csv(path: &Path, b: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut samples = Vec::new();
        for line in text.lines() {
            let mut cols = line.split(',').map(str::trim);
            let (Some(a), Some(c)) = (cols.next(), cols.next()) else {
                continue;
            };
            if let (Ok(x), Ok(v)) = (a.parse::<f64>(), c.parse::<f64>()) {
                samples.push((x, v));
            }
        }
        if samples.len() < 3 {
            return Err(Error::Config(format!(
                "{}: need at least 3 numeric (x, log density) rows",
                path.display()
            )));
        }
        Self::from_samples(&samples, b)
    }

    fn normalizer(&self) -> Result<f64> {
        let f = |x: f64| self.unnormalized(x);
        let tol = Tolerance::default();
        let mut total = integrate(f, -1.0, 1.0, tol)?.value;
        let mut x = 1.0;
        for _ in 0..60 {
            let inc = integrate(f, x, 2.0 * x, tol)?.value + integrate(f, -2.0 * x, -x, tol)?.value;
            total += inc;
            x *= 2.0;
            if inc.abs() < 1e-14 * total.abs() {
                if !(total.is_finite() && total > 0.0) {
                    break;
                }
                return Ok(total);
            }
        }
        Err(Error::NumericDomain(
            "normalizing integral did not converge; density may not be integrable".into(),
        ))
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn beta(&self) -> Option<f64> {
        match self.kind {
            DensityKind::ExponentialPower { beta } => Some(beta),
            DensityKind::CustomLogDensity => None,
        }
    }

    /// Drift floor of the density.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn z_const(&self) -> f64 {
        self.z_const
    }

    pub fn log_density_unnorm(&self, x: f64) -> f64 {
        match self.kind {
            DensityKind::ExponentialPower { beta } => -x.abs().powf(beta),
            DensityKind::CustomLogDensity => (self.log_fn.as_ref().expect("custom log density"))(x),
        }
    }

    #[inline]
    pub fn grad_log_density(&self, x: f64) -> f64 {
        match self.kind {
            DensityKind::ExponentialPower { beta } => {
                if beta == 2.0 {
                    -2.0 * x
                } else {
                    let mag = beta * x.abs().powf(beta - 1.0);
                    if x < 0.0 {
                        mag
                    } else {
                        -mag
                    }
                }
            }
            DensityKind::CustomLogDensity => (self.grad_fn.as_ref().expect("custom gradient"))(x),
        }
    }

    /// Langevin drift `½∇log π(x)`.
    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        0.5 * self.grad_log_density(x)
    }

    pub fn unnormalized(&self, x: f64) -> f64 {
        self.log_density_unnorm(x).exp()
    }

    /// Normalized density `π(x)`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.unnormalized(x) / self.z_const
    }
}

/// Probability mass `π[lo, hi]`. Either limit may be infinite.
pub fn mass_interval(d: &TargetDensity, lo: f64, hi: f64) -> Result<f64> {
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "mass_interval needs lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let tol = Tolerance {
        abs_tol: 1e-14 * d.z_const,
        ..Tolerance::default()
    };
    let f = |x: f64| {
        let v = d.unnormalized(x);
        if v.is_finite() {
            v
        } else {
            f64::NAN
        }
    };
    // ∫_a^∞ of the density; by symmetry ∫_{-∞}^a equals ∫_{-a}^∞.
    let right_tail = |a: f64| integrate_to_infinity(f, a, 1.0, TAIL_CUTOFF, tol).map(|e| e.value);
    let raw = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => integrate(f, lo, hi, tol)?.value,
        (true, false) => right_tail(lo)?,
        (false, true) => right_tail(-hi)?,
        (false, false) => 2.0 * right_tail(0.0)?,
    };
    if !raw.is_finite() {
        return Err(Error::NumericDomain(format!(
            "non-finite mass on [{lo}, {hi}]"
        )));
    }
    Ok((raw / d.z_const).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A1Condition {
    /// `π(-x) = π(x)`.
    Symmetry,
    /// `-∇log π(x) ≥ 0` for `x ≥ 0`.
    Sign,
    /// `-∇log π(x) ≥ b` for `x ≥ 1`.
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: A1Condition,
    pub passed: bool,
    /// Grid point with the most negative margin, when a grid was evaluated.
    pub worst_x: Option<f64>,
    /// Smallest margin seen (negative means violated).
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub analytic: bool,
    pub conditions: Vec<ConditionResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionResult> {
        self.conditions.iter().filter(|c| !c.passed)
    }
}

pub const DEFAULT_A1_GRID_MAX: f64 = 50.0;
pub const DEFAULT_A1_GRID_N: usize = 5001;

/// Checks the symmetry, sign and drift-floor conditions on a uniform grid over
/// `[0, grid_max]` plus the point `x = 1`. Exponential-power densities pass
/// analytically.
pub fn check_a1(d: &TargetDensity, grid_max: f64, grid_n: usize) -> Result<CheckReport> {
    if let DensityKind::ExponentialPower { .. } = d.kind {
        let conditions = [A1Condition::Symmetry, A1Condition::Sign, A1Condition::Floor]
            .into_iter()
            .map(|condition| ConditionResult {
                condition,
                passed: true,
                worst_x: None,
                worst_margin: 0.0,
            })
            .collect();
        return Ok(CheckReport {
            analytic: true,
            conditions,
        });
    }
    if !(grid_max >= 1.0) || grid_n < 2 {
        return Err(Error::InvalidParameter(format!(
            "check_a1 needs grid_max >= 1 and grid_n >= 2, got {grid_max}, {grid_n}"
        )));
    }
    let mut grid: Vec<f64> = (0..grid_n)
        .map(|i| grid_max * i as f64 / (grid_n - 1) as f64)
        .collect();
    grid.push(1.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    struct Worst {
        x: Option<f64>,
        margin: f64,
    }
    let track = |w: &mut Worst, x: f64, margin: f64| {
        if w.x.is_none() || margin < w.margin {
            w.x = Some(x);
            w.margin = margin;
        }
    };
    let mut sym = Worst { x: None, margin: 0.0 };
    let mut sign = Worst { x: None, margin: 0.0 };
    let mut floor = Worst { x: None, margin: 0.0 };
    for &x in &grid {
        let lp = d.log_density_unnorm(x);
        let lm = d.log_density_unnorm(-x);
        let sym_tol = 1e-9 * (1.0 + lp.abs());
        let sym_margin = if lp.is_finite() && lm.is_finite() {
            sym_tol - (lp - lm).abs()
        } else {
            f64::NEG_INFINITY
        };
        track(&mut sym, x, sym_margin);
        let neg_grad = -d.grad_log_density(x);
        let sign_margin = if neg_grad.is_finite() { neg_grad + 1e-12 } else { f64::NEG_INFINITY };
        track(&mut sign, x, sign_margin);
        if x >= 1.0 {
            let floor_margin = if neg_grad.is_finite() {
                neg_grad - d.b * (1.0 - 1e-9)
            } else {
                f64::NEG_INFINITY
            };
            track(&mut floor, x, floor_margin);
        }
    }
    let finish = |condition, w: Worst| ConditionResult {
        condition,
        passed: w.margin >= 0.0,
        worst_x: w.x,
        worst_margin: w.margin,
    };
    Ok(CheckReport {
        analytic: false,
        conditions: vec![
            finish(A1Condition::Symmetry, sym),
            finish(A1Condition::Sign, sign),
            finish(A1Condition::Floor, floor),
        ],
    })
}

/// Density specification as it appears in run-configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    ExpPower { beta: f64 },
    Custom { b: f64, samples: String },
}

impl DensitySpec {
    pub fn build(&self) -> Result<TargetDensity> {
        match self {
            DensitySpec::ExpPower { beta } => make_exponential_power(*beta),
            DensitySpec::Custom { b, samples } => TargetDensity::from_csv(Path::new(samples), *b),
        }
    }
}
