//! Inverse problems on the bounds: the smallest time at which a bound drops
//! below a target accuracy, the `s` that makes that time smallest, and sweeps
//! over one parameter.
//!
//! Every bound here is `C(s) s^{-t}`, so the time to reach `ε` is available in
//! closed form: `t(s) = log(C(s)/ε) / log s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{coefficient, BoundMode};
use crate::error::{Error, Result};
use crate::pgf::{feasible_s_range, FeasibleSRange};
use crate::target::{make_exponential_power, TargetDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SPolicy {
    Fixed(f64),
    Optimize,
}

#[derive(Debug, Clone)]
pub struct PlanRequest {
    pub density: TargetDensity,
    pub y: f64,
    pub epsilon: f64,
    pub mode: BoundMode,
    pub s_policy: SPolicy,
}

impl PlanRequest {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !self.y.is_finite() || (self.mode == BoundMode::TotalVariation && self.y < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "start y must be finite (and >= 1 for total variation), got {}",
                self.y
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub mode: BoundMode,
    pub s_star: f64,
    /// `C(s_star)`: the bound at `t = 0` before capping.
    pub coefficient: f64,
    pub t_min_real: f64,
    pub t_min_int: u64,
    pub bound_at_t_min_int: f64,
    pub feasible_range: FeasibleSRange,
}

fn time_to_reach(c: f64, epsilon: f64, s: f64) -> f64 {
    (c / epsilon).ln() / s.ln()
}

/// Smallest real and integer times at which the bound is at most `epsilon`.
/// Both are clamped at 0; an integral `t_real` is its own `t_int`.
pub fn minimal_t(req: &PlanRequest, s: f64) -> Result<(f64, u64)> {
    req.validate()?;
    let c = coefficient(&req.density, req.y, s, req.mode)?;
    let t_real = time_to_reach(c, req.epsilon, s).max(0.0);
    Ok((t_real, t_real.ceil() as u64))
}

/// Golden-section tolerance (relative, on `s`).
const S_TOL: f64 = 1e-10;
/// Distance kept from the singular ends of the feasible range.
const EDGE: f64 = 1e-9;
const COARSE_GRID: usize = 64;
const DENSE_GRID: usize = 2048;

fn is_unimodal(values: &[f64]) -> bool {
    let mut rising = false;
    for w in values.windows(2) {
        if w[1] > w[0] {
            rising = true;
        } else if rising && w[1] < w[0] {
            return false;
        }
    }
    true
}

/// Minimizes `t(s)` over the feasible range. The search runs in
/// `u = log(s - 1)`; a coarse grid brackets the minimum, falling back to a
/// dense grid when the sampled objective is not unimodal, and golden-section
/// search refines inside the bracket.
pub fn optimize_s(req: &PlanRequest) -> Result<PlanResult> {
    req.validate()?;
    let range = feasible_s_range(req.density.b())?;
    let s_min = 1.0 + EDGE;
    let s_max = range.s_hi - EDGE;
    let objective = |u: f64| {
        let s = 1.0 + u.exp();
        match coefficient(&req.density, req.y, s, req.mode) {
            Ok(c) => time_to_reach(c, req.epsilon, s),
            Err(_) => f64::INFINITY,
        }
    };
    let u_lo = (s_min - 1.0).ln();
    let u_hi = (s_max - 1.0).ln();
    let grid = |n: usize| -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let u = u_lo + (u_hi - u_lo) * i as f64 / (n - 1) as f64;
                (u, objective(u))
            })
            .collect()
    };
    let mut samples = grid(COARSE_GRID);
    let values: Vec<f64> = samples.iter().map(|p| p.1).collect();
    if !is_unimodal(&values) {
        samples = grid(DENSE_GRID);
    }
    let best = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::NumericDomain("empty search grid".into()))?;
    let mut a = samples[best.saturating_sub(1)].0;
    let mut b = samples[(best + 1).min(samples.len() - 1)].0;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    // Stop when the bracket in s is below S_TOL relative.
    while (b.exp() - a.exp()) > S_TOL * (1.0 + a.exp()) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        }
    }
    let mut u_star = 0.5 * (a + b);
    if objective(samples[best].0) < objective(u_star) {
        u_star = samples[best].0;
    }
    let s_star = 1.0 + u_star.exp();
    finish(req, s_star, range)
}

fn finish(req: &PlanRequest, s: f64, range: FeasibleSRange) -> Result<PlanResult> {
    let c = coefficient(&req.density, req.y, s, req.mode)?;
    let t_real = time_to_reach(c, req.epsilon, s).max(0.0);
    let t_int = t_real.ceil() as u64;
    Ok(PlanResult {
        mode: req.mode,
        s_star: s,
        coefficient: c,
        t_min_real: t_real,
        t_min_int: t_int,
        bound_at_t_min_int: (c * s.powf(-(t_int as f64))).min(1.0),
        feasible_range: range,
    })
}

/// Runs the request under its `s` policy.
pub fn plan(req: &PlanRequest) -> Result<PlanResult> {
    req.validate()?;
    match req.s_policy {
        SPolicy::Fixed(s) => {
            let range = feasible_s_range(req.density.b())?;
            finish(req, s, range)
        }
        SPolicy::Optimize => optimize_s(req),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Y,
    Beta,
    Epsilon,
    T,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Y => "y",
            SweepAxis::Beta => "beta",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::T => "t",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "y" => Ok(SweepAxis::Y),
            "beta" => Ok(SweepAxis::Beta),
            "epsilon" | "eps" => Ok(SweepAxis::Epsilon),
            "t" => Ok(SweepAxis::T),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub s_star: f64,
    pub t_real: f64,
    pub t_int: u64,
    pub bound: f64,
    /// `"ok"` or the error message for this row.
    pub status: String,
}

fn sweep_row(req: &PlanRequest, axis: SweepAxis, value: f64) -> Result<SweepRow> {
    let mut r = req.clone();
    match axis {
        SweepAxis::Y => r.y = value,
        SweepAxis::Epsilon => r.epsilon = value,
        SweepAxis::Beta => {
            if req.density.beta().is_none() {
                return Err(Error::InvalidParameter(
                    "beta sweeps need an exponential-power density".into(),
                ));
            }
            r.density = make_exponential_power(value)?;
        }
        SweepAxis::T => {
            if !(value >= 0.0) {
                return Err(Error::InvalidParameter(format!("t must be >= 0, got {value}")));
            }
        }
    }
    let p = plan(&r)?;
    let bound = match axis {
        SweepAxis::T => (p.coefficient * p.s_star.powf(-value)).min(1.0),
        _ => p.bound_at_t_min_int,
    };
    Ok(SweepRow {
        axis,
        value,
        s_star: p.s_star,
        t_real: p.t_min_real,
        t_int: p.t_min_int,
        bound,
        status: "ok".into(),
    })
}

/// One row per grid value, in grid order. Row failures are recorded in the
/// row's `status` instead of aborting the sweep.
pub fn sweep(req: &PlanRequest, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    Ok(grid
        .par_iter()
        .map(|&value| {
            sweep_row(req, axis, value).unwrap_or_else(|e| SweepRow {
                axis,
                value,
                s_star: f64::NAN,
                t_real: f64::NAN,
                t_int: 0,
                bound: f64::NAN,
                status: e.to_string(),
            })
        })
        .collect())
}
