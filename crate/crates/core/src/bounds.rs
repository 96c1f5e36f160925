//! Hitting-time tail bounds and total-variation convergence bounds.
//!
//! Both bounds have the form `C · s^{-t}` where `C` does not depend on `t`.
//! For the hitting time `C = B(max(1,|y|), s, b)`. For total variation from
//! `y ≥ 1`, averaging the coupling bound over a stationary start gives
//! `C = 2 π[0,y] B(y,s,b) + 2 ∫_y^∞ π(z) B(z,s,b) dz`. The same `C` serves
//! the reflected process `|X_t|` and the full diffusion coupled by mirrored
//! noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pgf::{bound_b, components, PgfComponents};
use crate::quadrature::{integrate_to_infinity, Tolerance};
use crate::target::{mass_interval, TargetDensity, TAIL_CUTOFF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    HittingTail,
    TotalVariation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Reflected,
    Unreflected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingBoundResult {
    pub y_input: f64,
    pub y_eff: f64,
    pub s: f64,
    pub b: f64,
    pub t: f64,
    /// `min(1, raw)`
    pub bound: f64,
    /// `s^{-t} B(y_eff, s, b)` before capping.
    pub raw: f64,
    pub capped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvBoundResult {
    pub y: f64,
    pub s: f64,
    pub b: f64,
    pub t: f64,
    pub process: Process,
    pub head_term: f64,
    pub tail_term: f64,
    pub quad_abs_err: f64,
    pub total: f64,
    /// `head_term + tail_term` before capping.
    pub raw_total: f64,
    pub capped: bool,
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || t.is_infinite() {
        return Err(Error::InvalidParameter(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `P(H_y ≥ t) ≤ min(1, s^{-t} B(max(1,|y|), s, b))` for any real start `y`.
pub fn hitting_tail_bound(d: &TargetDensity, y: f64, s: f64, t: f64) -> Result<HittingBoundResult> {
    check_t(t)?;
    if !y.is_finite() {
        return Err(Error::InvalidParameter(format!("start must be finite, got {y}")));
    }
    let comp = components(s, d.b())?;
    let y_eff = y.abs().max(1.0);
    let raw = s.powf(-t) * bound_b(y_eff, &comp)?;
    Ok(HittingBoundResult {
        y_input: y,
        y_eff,
        s,
        b: d.b(),
        t,
        bound: raw.min(1.0),
        raw,
        capped: raw > 1.0,
    })
}

/// `t`-independent pieces of the total-variation bound.
#[derive(Debug, Clone, Copy)]
struct TvCoefficients {
    head: f64,
    tail: f64,
    tail_err: f64,
}

/// Offsets beyond `y` at which the tail integrand's log must keep falling.
const DIVERGENCE_PROBES: [f64; 3] = [10.0, 20.0, 40.0];

fn tv_coefficients(d: &TargetDensity, y: f64, comp: &PgfComponents) -> Result<TvCoefficients> {
    let head = 2.0 * mass_interval(d, 0.0, y)? * bound_b(y, comp)?;

    // log of the unnormalized integrand without the constant e^{-alpha}.
    let alpha = comp.alpha;
    let log_integrand = |z: f64| d.log_density_unnorm(z) + alpha * z;
    let probes: Vec<f64> = DIVERGENCE_PROBES.iter().map(|o| log_integrand(y + o)).collect();
    for w in probes.windows(2) {
        if !(w[0] - w[1] >= 1.0) {
            return Err(Error::TailDivergence(format!(
                "log pi(z) + alpha z does not fall by 1 nat between probes at y + {:?}: {:?}",
                DIVERGENCE_PROBES, probes
            )));
        }
    }

    let anchor = log_integrand(y);
    if !anchor.is_finite() {
        return Err(Error::NumericDomain(format!("log density not finite at y = {y}")));
    }
    let scaled = |z: f64| (log_integrand(z) - anchor).exp();
    let tol = Tolerance {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let est = integrate_to_infinity(scaled, y, 1.0, TAIL_CUTOFF, tol)?;
    // B(z) = e^{(z-1) alpha} / cos c / (2 - ratio)
    let k = 1.0 / comp.c.cos() / (2.0 - comp.ratio);
    let factor = 2.0 * k * (anchor - alpha).exp() / d.z_const();
    Ok(TvCoefficients {
        head,
        tail: factor * est.value,
        tail_err: factor * est.abs_err,
    })
}

/// Total-variation bound for the reflected diffusion `|X_t|` started at `y ≥ 1`.
pub fn tv_bound(d: &TargetDensity, y: f64, s: f64, t: f64) -> Result<TvBoundResult> {
    check_t(t)?;
    if !(y >= 1.0) || !y.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "total-variation bound needs a start y >= 1, got {y}"
        )));
    }
    let comp = components(s, d.b())?;
    let coef = tv_coefficients(d, y, &comp)?;
    let decay = s.powf(-t);
    let head_term = coef.head * decay;
    let tail_term = coef.tail * decay;
    let raw_total = head_term + tail_term;
    Ok(TvBoundResult {
        y,
        s,
        b: d.b(),
        t,
        process: Process::Reflected,
        head_term,
        tail_term,
        quad_abs_err: coef.tail_err * decay,
        total: raw_total.min(1.0),
        raw_total,
        capped: raw_total > 1.0,
    })
}

/// Total-variation bound for the full (unreflected) diffusion. Numerically
/// identical to [`tv_bound`].
pub fn tv_bound_unreflected(d: &TargetDensity, y: f64, s: f64, t: f64) -> Result<TvBoundResult> {
    Ok(TvBoundResult {
        process: Process::Unreflected,
        ..tv_bound(d, y, s, t)?
    })
}

/// The uncapped coefficient `C(s)` with `bound(t) = C(s) s^{-t}`.
pub fn coefficient(d: &TargetDensity, y: f64, s: f64, mode: BoundMode) -> Result<f64> {
    match mode {
        BoundMode::HittingTail => Ok(hitting_tail_bound(d, y, s, 0.0)?.raw),
        BoundMode::TotalVariation => Ok(tv_bound(d, y, s, 0.0)?.raw_total),
    }
}

/// Uncapped bound value for either mode.
pub fn raw_bound(d: &TargetDensity, y: f64, s: f64, t: f64, mode: BoundMode) -> Result<f64> {
    match mode {
        BoundMode::HittingTail => Ok(hitting_tail_bound(d, y, s, t)?.raw),
        BoundMode::TotalVariation => Ok(tv_bound(d, y, s, t)?.raw_total),
    }
}
