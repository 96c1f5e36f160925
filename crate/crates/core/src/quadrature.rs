//! Adaptive Gauss–Kronrod (10/21 point) integration on finite intervals and
//! a semi-infinite tail driver that grows the domain until the integrand is
//! negligible.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerances for [`integrate`]. A result is accepted once the summed error
/// estimate is below `max(abs_tol, rel_tol * |integral|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    if !kronrod.is_finite() || !fc.is_finite() {
        return Err(Error::NumericDomain(format!(
            "non-finite integrand on [{lo}, {hi}]"
        )));
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    // QUADPACK error scaling.
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Globally adaptive integration of `f` over `[lo, hi]` (bisecting the piece
/// with the largest error estimate).
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Estimate> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NumericDomain(format!(
            "finite limits required, got [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(Estimate {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let (value, err) = gk21(&f, lo, hi)?;
    let mut pieces = vec![Piece { lo, hi, value, err }];
    loop {
        let total: f64 = pieces.iter().map(|p| p.value).sum();
        let total_err: f64 = pieces.iter().map(|p| p.err).sum();
        if total_err <= tol.abs_tol.max(tol.rel_tol * total.abs()) {
            return Ok(Estimate {
                value: total,
                abs_err: total_err,
            });
        }
        if pieces.len() >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence on [{lo}, {hi}] after {} subintervals (err {total_err:e}, value {total:e})",
                pieces.len()
            )));
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .expect("at least one piece");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if mid <= p.lo || mid >= p.hi {
            // Interval can no longer be split in double precision.
            return Ok(Estimate {
                value: total,
                abs_err: total_err,
            });
        }
        let (v1, e1) = gk21(&f, p.lo, mid)?;
        let (v2, e2) = gk21(&f, mid, p.hi)?;
        pieces.push(Piece {
            lo: p.lo,
            hi: mid,
            value: v1,
            err: e1,
        });
        pieces.push(Piece {
            lo: mid,
            hi: p.hi,
            value: v2,
            err: e2,
        });
    }
}

/// Integrates a non-negative, eventually decaying `f` over `[lo, ∞)`.
///
/// The domain is covered by segments of doubling width starting at `step`.
/// Integration stops at the first segment end where `f` has fallen below
/// `cutoff` times the largest integrand value seen so far.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    step: f64,
    cutoff: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    let mut scale = f(lo).abs();
    let mut a = lo;
    let mut width = step;
    let mut value = 0.0;
    let mut abs_err = 0.0;
    for _ in 0..64 {
        let b = a + width;
        let seg = integrate(&f, a, b, tol)?;
        value += seg.value;
        abs_err += seg.abs_err;
        let fb = f(b).abs();
        if !fb.is_finite() {
            return Err(Error::NumericDomain(format!("non-finite integrand at {b}")));
        }
        // Track the peak so a rising integrand cannot trigger early exit.
        let probe = f(0.5 * (a + b)).abs();
        scale = scale.max(probe).max(fb);
        if fb <= cutoff * scale && fb <= f(a).abs() {
            return Ok(Estimate { value, abs_err });
        }
        a = b;
        width *= 2.0;
    }
    Err(Error::Quadrature(format!(
        "integrand not negligible by x = {a}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| x * x * x - 2.0 * x, -1.0, 3.0, Tolerance::default()).unwrap();
        // ∫ x^3 - 2x from -1 to 3 = (81 - 1)/4 - (9 - 1) = 12
        assert!((est.value - 12.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_tail() {
        let est = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1.0, 1e-18, Tolerance::default())
            .unwrap();
        let exact = 0.5 * std::f64::consts::PI.sqrt();
        assert!((est.value - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn peaked_integrand_refines() {
        // Narrow bump well inside the interval.
        let f = |x: f64| (-(x - 0.3).powi(2) / 1e-4).exp();
        let est = integrate(f, 0.0, 1.0, Tolerance::default()).unwrap();
        let exact = (std::f64::consts::PI * 1e-4).sqrt();
        assert!((est.value - exact).abs() / exact < 1e-10, "{est:?}");
    }

    #[test]
    fn nan_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, Tolerance::default()).is_err());
    }
}
