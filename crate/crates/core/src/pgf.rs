//! Probability generating functions of the building-block passage times and
//! the closed-form bound `B(y, s, b)` on `E[s^H_y]`.
//!
//! The hitting time of 0 from `y ≥ 1` is dominated by a renewal structure:
//! a drifted passage from `y` down to 1, then a Geometric(½) number of
//! excursions (Brownian exit of `[0, 2]` from 1 ending at 2, followed by a
//! drifted passage from 2 back to 1), and a final Brownian exit ending at 0.
//! [`assemble_b`] multiplies the pgfs of those pieces; [`bound_b`] is the
//! collapsed closed form. The two must agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `π/2`: the Brownian exit pgf `1/cos(√(2 log s))` blows up there.
const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;

/// Cached quantities shared by every pgf formula at a given `(s, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgfComponents {
    pub s: f64,
    pub b: f64,
    pub log_s: f64,
    /// `√(2 log s)`
    pub c: f64,
    /// `b - √(b² - 2 log s)`
    pub alpha: f64,
    /// `e^alpha / cos c`
    pub ratio: f64,
}

/// Which clause of the feasibility condition ends the `s` range first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperConstraint {
    RatioEqualsTwo,
    SEqualsExpHalfBSq,
    CosVanishes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSRange {
    /// Open lower endpoint, always 1.
    pub s_lo: f64,
    /// Open upper endpoint.
    pub s_hi: f64,
    pub constraint_binding_at_hi: UpperConstraint,
}

impl FeasibleSRange {
    pub fn contains(&self, s: f64) -> bool {
        s > self.s_lo && s < self.s_hi
    }
}

/// Raw `(alpha, c, ratio)` without any feasibility checks; NaN where undefined.
fn raw_parts(s: f64, b: f64) -> (f64, f64, f64) {
    let log_s = s.ln();
    let c = (2.0 * log_s).sqrt();
    let alpha = b - (b * b - 2.0 * log_s).sqrt();
    (alpha, c, alpha.exp() / c.cos())
}

/// Computes the pgf components, rejecting any `s` outside the feasible range
/// and naming the clause that fails.
pub fn components(s: f64, b: f64) -> Result<PgfComponents> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParameter(format!("drift floor b must be positive, got {b}")));
    }
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::OutOfDomain(format!("s must exceed 1, got {s}")));
    }
    let log_s = s.ln();
    let disc = b * b - 2.0 * log_s;
    if !(disc > 0.0) {
        return Err(Error::AlphaComplex {
            s,
            b,
            limit: (0.5 * b * b).exp(),
        });
    }
    let c = (2.0 * log_s).sqrt();
    let cos_c = c.cos();
    if !(c < HALF_PI && cos_c > 0.0) {
        return Err(Error::CosineDomain { s, c });
    }
    let alpha = b - disc.sqrt();
    let ratio = alpha.exp() / cos_c;
    if !(ratio > 1.0 && ratio < 2.0) {
        return Err(Error::A2Ratio { s, ratio });
    }
    Ok(PgfComponents {
        s,
        b,
        log_s,
        c,
        alpha,
        ratio,
    })
}

/// `E[s^T]` for the exit time of standard Brownian motion from `(-1, 1)`
/// started at `x`: `cos(x c) / cos(c)`.
pub fn pgf_bm_exit(x: f64, comp: &PgfComponents) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::OutOfDomain(format!("Brownian exit start must lie in [-1, 1], got {x}")));
    }
    if x.abs() == 1.0 {
        return Ok(1.0);
    }
    Ok((x * comp.c).cos() / comp.c.cos())
}

/// pgf of a Geometric(½) count on `{0, 1, 2, …}`: `1 / (2 - r)`.
pub fn pgf_geometric_half(r: f64) -> Result<f64> {
    if !(r < 2.0) {
        return Err(Error::DivergentPgf(r));
    }
    Ok(1.0 / (2.0 - r))
}

/// `E[s^T]` for Brownian motion with drift `-b` to descend a distance `a`:
/// `exp(a · alpha)`.
pub fn pgf_drift_passage(a: f64, comp: &PgfComponents) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::OutOfDomain(format!("passage distance must be non-negative, got {a}")));
    }
    Ok((a * comp.alpha).exp())
}

/// Closed-form `B(y, s, b) = exp((y-1) alpha) / cos c / (2 - ratio)` for `y ≥ 1`.
///
/// Callers with arbitrary start points clamp to `max(1, |y|)` first.
pub fn bound_b(y: f64, comp: &PgfComponents) -> Result<f64> {
    if !(y >= 1.0) {
        return Err(Error::OutOfDomain(format!(
            "B(y, s, b) needs y >= 1 (clamp with max(1, |y|)), got {y}"
        )));
    }
    Ok(((y - 1.0) * comp.alpha).exp() / comp.c.cos() / (2.0 - comp.ratio))
}

/// `B` assembled from the renewal decomposition:
/// `M_{y→1} · M_G(M*_0 · M_{2→1}) · M*_0`.
pub fn assemble_b(y: f64, comp: &PgfComponents) -> Result<f64> {
    if !(y >= 1.0) {
        return Err(Error::OutOfDomain(format!("assemble_b needs y >= 1, got {y}")));
    }
    let exit_half = pgf_bm_exit(0.0, comp)?;
    let descend_to_one = pgf_drift_passage(y - 1.0, comp)?;
    let excursion = exit_half * pgf_drift_passage(1.0, comp)?;
    Ok(descend_to_one * pgf_geometric_half(excursion)? * exit_half)
}

/// Bisection tolerance on `s` for the feasible-range endpoint.
const S_REL_TOL: f64 = 1e-12;

/// The open interval of `s` satisfying every feasibility clause for drift
/// floor `b`. `ratio(s)` increases from 1 as `s` leaves 1, so the endpoint is
/// either where it reaches 2 or the smaller of `exp(b²/2)` and `exp(π²/8)`.
pub fn feasible_s_range(b: f64) -> Result<FeasibleSRange> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidParameter(format!("drift floor b must be positive, got {b}")));
    }
    let s_alpha = (0.5 * b * b).exp();
    let s_cos = (HALF_PI * HALF_PI / 2.0).exp();
    let (cap, cap_kind) = if s_alpha <= s_cos {
        (s_alpha, UpperConstraint::SEqualsExpHalfBSq)
    } else {
        (s_cos, UpperConstraint::CosVanishes)
    };
    let ratio_ok = |s: f64| {
        let (_, _, r) = raw_parts(s, b);
        r.is_finite() && r > 0.0 && r < 2.0
    };
    let mut lo = 1.0 + S_REL_TOL;
    let mut hi = cap * (1.0 - S_REL_TOL);
    if ratio_ok(hi) {
        return Ok(FeasibleSRange {
            s_lo: 1.0,
            s_hi: cap,
            constraint_binding_at_hi: cap_kind,
        });
    }
    while (hi - lo) > S_REL_TOL * lo {
        let mid = 0.5 * (lo + hi);
        if ratio_ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FeasibleSRange {
        s_lo: 1.0,
        s_hi: hi,
        constraint_binding_at_hi: UpperConstraint::RatioEqualsTwo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn infeasible_s_names_the_clause() {
        assert!(matches!(components(1.0, 2.0), Err(Error::OutOfDomain(_))));
        assert!(matches!(components(0.5, 2.0), Err(Error::OutOfDomain(_))));
        assert!(matches!(components(1.4, 0.5), Err(Error::AlphaComplex { .. })));
        // b large enough that alpha stays real but c passes pi/2: s > exp(pi^2/8) ≈ 3.43.
        assert!(matches!(components(3.5, 10.0), Err(Error::CosineDomain { .. })));
        // b = 2, s = 2: ratio is above 2.
        assert!(matches!(components(2.0, 2.0), Err(Error::A2Ratio { .. })));
    }

    #[test]
    fn bm_exit_boundary_and_domain() {
        let comp = components(1.4, 2.0).unwrap();
        assert_eq!(pgf_bm_exit(1.0, &comp).unwrap(), 1.0);
        assert_eq!(pgf_bm_exit(-1.0, &comp).unwrap(), 1.0);
        assert!(pgf_bm_exit(1.5, &comp).is_err());
        assert!(close(pgf_bm_exit(0.3, &comp).unwrap(), pgf_bm_exit(-0.3, &comp).unwrap(), 1e-15));
    }

    #[test]
    fn geometric_pgf() {
        assert_eq!(pgf_geometric_half(1.0).unwrap(), 1.0);
        let near = pgf_geometric_half(2.0 - 1e-9).unwrap();
        assert!(near.is_finite() && close(near, 1e9, 1e-6));
        assert!(matches!(pgf_geometric_half(2.0), Err(Error::DivergentPgf(_))));
    }

    #[test]
    fn drift_passage_domain() {
        let comp = components(1.4, 2.0).unwrap();
        assert_eq!(pgf_drift_passage(0.0, &comp).unwrap(), 1.0);
        assert!(pgf_drift_passage(-0.1, &comp).is_err());
    }

    #[test]
    fn bound_needs_clamped_start() {
        let comp = components(1.4, 2.0).unwrap();
        assert!(bound_b(0.5, &comp).is_err());
        assert!(assemble_b(0.5, &comp).is_err());
    }

    #[test]
    fn assemble_at_one_is_geometric_times_exit() {
        let comp = components(1.3, 1.1).unwrap();
        let expect = pgf_geometric_half(comp.ratio).unwrap() / comp.c.cos();
        assert!(close(assemble_b(1.0, &comp).unwrap(), expect, 1e-14));
    }

    #[test]
    fn feasible_range_small_b_capped_by_alpha() {
        let r = feasible_s_range(0.5).unwrap();
        assert_eq!(r.constraint_binding_at_hi, UpperConstraint::SEqualsExpHalfBSq);
        assert!(close(r.s_hi, (0.125f64).exp(), 1e-15));
    }

    #[test]
    fn feasible_range_ratio_binds_for_b2() {
        let r = feasible_s_range(2.0).unwrap();
        assert_eq!(r.constraint_binding_at_hi, UpperConstraint::RatioEqualsTwo);
        assert!(r.contains(1.4));
        let (_, _, ratio) = raw_parts(r.s_hi, 2.0);
        assert!((ratio - 2.0).abs() < 1e-9);
        assert!(components(r.s_hi * (1.0 - 1e-9), 2.0).is_ok());
        assert!(components(r.s_hi * (1.0 + 1e-9), 2.0).is_err());
    }
}
