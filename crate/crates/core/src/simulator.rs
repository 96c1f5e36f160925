//! Monte Carlo checks of the analytic bounds.
//!
//! Paths are simulated with Euler–Maruyama. Each path owns a ChaCha8 stream
//! selected by `(seed, path index)`, and per-path results are collected in
//! index order, so outputs do not depend on how many worker threads run.
//!
//! Level crossings between grid points are caught with the Brownian-bridge
//! crossing probability: for a step from `u > 0` to `v > 0` with increment
//! variance `σ² dt`, the bridge dips below 0 with probability
//! `exp(-2 u v / (σ² dt))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::pgf::{bound_b, components};
use crate::quadrature::{integrate, Tolerance};
use crate::target::{mass_interval, TargetDensity};

/// Bridge probabilities below `exp(-BRIDGE_ARG_MAX)` are treated as zero.
const BRIDGE_ARG_MAX: f64 = 45.0;
/// Share of blown-up paths above which a run fails.
const MAX_FLAGGED_FRACTION: f64 = 0.01;
/// Tail mass left outside the simulation window and the sampler support.
const SUPPORT_TAIL_MASS: f64 = 1e-15;
const SAMPLER_GRID: usize = 16384;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub bridge_correction: bool,
    /// Survival is always recorded at `1, 2, …, ⌊horizon⌋`; these are added.
    pub extra_times: Vec<f64>,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 50.0,
            n_paths: 100_000,
            seed: 42,
            bridge_correction: true,
            extra_times: Vec::new(),
            threads: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must be finite and at least dt {}",
                self.horizon, self.dt
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
        }
        Ok(())
    }

    fn n_steps(&self) -> u64 {
        (self.horizon / self.dt - 1e-9).ceil() as u64
    }

    fn record_times(&self) -> Vec<f64> {
        let mut times: Vec<f64> = (1..=self.horizon.floor() as u64).map(|t| t as f64).collect();
        times.extend(
            self.extra_times
                .iter()
                .copied()
                .filter(|t| *t >= 0.0 && *t <= self.horizon),
        );
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }

    /// Maps `f` over path indices `0..n_paths`, preserving index order.
    fn map_paths<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        let run = || (0..self.n_paths as u64).into_par_iter().map(&f).collect::<Vec<T>>();
        if self.threads == 0 {
            Ok(run())
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.threads)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(run))
        }
    }
}

/// Random stream for one path: the run seed picks the key, the path index the stream.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSurvival {
    pub times: Vec<f64>,
    pub survival: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Paths still running at the horizon; counted as survivors.
    pub n_censored: usize,
    /// Paths that entered the estimate.
    pub n_used: usize,
    /// Paths excluded because they blew up or left the clamp window.
    pub n_flagged: usize,
}

impl EmpiricalSurvival {
    /// CSV with columns `t,survival,std_err,n_censored`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,survival,std_err,n_censored\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::report::num(self.times[i]),
                crate::report::num(self.survival[i]),
                crate::report::num(self.std_err[i]),
                self.n_censored
            ));
        }
        out
    }

    pub fn at(&self, t: f64) -> Option<(f64, f64)> {
        self.times
            .iter()
            .position(|&x| x == t)
            .map(|i| (self.survival[i], self.std_err[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Hit(f64),
    Censored,
    Flagged,
}

fn survival_from(outcomes: &[Outcome], times: Vec<f64>) -> Result<EmpiricalSurvival> {
    let n_paths = outcomes.len();
    let n_flagged = outcomes.iter().filter(|o| **o == Outcome::Flagged).count();
    if n_flagged as f64 > MAX_FLAGGED_FRACTION * n_paths as f64 {
        return Err(Error::FlaggedPaths {
            flagged: n_flagged,
            n_paths,
        });
    }
    let n_censored = outcomes.iter().filter(|o| **o == Outcome::Censored).count();
    let mut hits: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Hit(t) => Some(*t),
            _ => None,
        })
        .collect();
    hits.sort_by(f64::total_cmp);
    let n = (n_paths - n_flagged) as f64;
    let mut survival = Vec::with_capacity(times.len());
    let mut std_err = Vec::with_capacity(times.len());
    for &t in &times {
        // hits strictly before t
        let before = hits.partition_point(|&h| h < t);
        let p = if n > 0.0 { (n - before as f64) / n } else { f64::NAN };
        survival.push(p);
        std_err.push((p * (1.0 - p) / n).sqrt());
    }
    Ok(EmpiricalSurvival {
        times,
        survival,
        std_err,
        n_censored,
        n_used: n_paths - n_flagged,
        n_flagged,
    })
}

#[inline]
fn bridge_hits<R: Rng>(rng: &mut R, u: f64, v: f64, var: f64) -> bool {
    let arg = 2.0 * u * v / var;
    arg < BRIDGE_ARG_MAX && rng.gen::<f64>() < (-arg).exp()
}

/// Smallest `x ≥ 1` with `π[x, ∞) < SUPPORT_TAIL_MASS` (to about 1e-3 relative).
fn tail_quantile(d: &TargetDensity) -> Result<f64> {
    let tail = |x: f64| mass_interval(d, x, f64::INFINITY);
    let mut hi = 1.0;
    while tail(hi)? >= SUPPORT_TAIL_MASS {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NumericDomain("density support does not close".into()));
        }
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if tail(mid)? >= SUPPORT_TAIL_MASS {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Paths leaving `[-clamp, clamp]` are flagged rather than clipped.
fn clamp_window(d: &TargetDensity, y: f64) -> Result<f64> {
    Ok(10.0 * y.abs().max(tail_quantile(d)?))
}

#[derive(Debug, Clone, Copy)]
struct HitParams {
    dt: f64,
    n_steps: u64,
    bridge: bool,
    clamp: f64,
}

/// Runs one path to the first time it reaches 0. With `reflected` the
/// process tracked is `|X_t|`: it starts at `|y|` and, when `y < 0`, sees the
/// noise with flipped sign, so its hitting time equals the unreflected one.
fn hitting_path<R: Rng>(d: &TargetDensity, y: f64, p: HitParams, reflected: bool, rng: &mut R) -> Outcome {
    let (mut x, noise_sign) = if reflected && y < 0.0 { (-y, -1.0) } else { (y, 1.0) };
    if x == 0.0 {
        return Outcome::Hit(0.0);
    }
    let sd = p.dt.sqrt();
    for k in 0..p.n_steps {
        let xi: f64 = rng.sample(StandardNormal);
        let next = x + d.drift(x) * p.dt + noise_sign * sd * xi;
        let t0 = k as f64 * p.dt;
        if !next.is_finite() || next.abs() > p.clamp {
            return Outcome::Flagged;
        }
        if next == 0.0 || (next > 0.0) != (x > 0.0) {
            return Outcome::Hit(t0 + p.dt * x / (x - next));
        }
        if p.bridge && bridge_hits(rng, x, next, p.dt) {
            return Outcome::Hit(t0 + 0.5 * p.dt);
        }
        x = next;
    }
    Outcome::Censored
}

fn hitting_run(d: &TargetDensity, y: f64, cfg: &SimConfig, reflected: bool) -> Result<EmpiricalSurvival> {
    cfg.validate()?;
    if !y.is_finite() {
        return Err(Error::InvalidParameter(format!("start must be finite, got {y}")));
    }
    let p = HitParams {
        dt: cfg.dt,
        n_steps: cfg.n_steps(),
        bridge: cfg.bridge_correction,
        clamp: clamp_window(d, y)?,
    };
    let outcomes = cfg.map_paths(|i| {
        let mut rng = path_rng(cfg.seed, i);
        hitting_path(d, y, p, reflected, &mut rng)
    })?;
    survival_from(&outcomes, cfg.record_times())
}

/// Empirical survival `P(H_y ≥ t)` of the Langevin diffusion's first hitting
/// time of 0.
pub fn simulate_hitting(d: &TargetDensity, y: f64, cfg: &SimConfig) -> Result<EmpiricalSurvival> {
    hitting_run(d, y, cfg, false)
}

/// Same as [`simulate_hitting`] but tracks the reflected process `|X_t|`.
pub fn simulate_hitting_reflected(d: &TargetDensity, y: f64, cfg: &SimConfig) -> Result<EmpiricalSurvival> {
    hitting_run(d, y, cfg, true)
}

/// Monte Carlo estimate of a pgf `E[s^T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgfEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub n_paths: usize,
}

fn pgf_estimate(s: f64, times: &[Option<f64>]) -> Result<PgfEstimate> {
    let unfinished = times.iter().filter(|t| t.is_none()).count();
    if unfinished > 0 {
        return Err(Error::HorizonTooShort {
            unfinished,
            n_paths: times.len(),
        });
    }
    let log_s = s.ln();
    let values: Vec<f64> = times.iter().map(|t| (t.unwrap_or(0.0) * log_s).exp()).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(PgfEstimate {
        estimate: mean,
        std_err: (var / n).sqrt(),
        n_paths: values.len(),
    })
}

/// Estimates `E[s^T]` for the exit time of standard Brownian motion from
/// `(-1, 1)` started at `x0`.
pub fn simulate_bm_exit_pgf(s: f64, x0: f64, cfg: &SimConfig) -> Result<PgfEstimate> {
    cfg.validate()?;
    if !(x0.abs() < 1.0) {
        return Err(Error::OutOfDomain(format!("start must lie in (-1, 1), got {x0}")));
    }
    let c = (2.0 * s.ln()).sqrt();
    if !(s > 1.0) || !(c < std::f64::consts::FRAC_PI_2) {
        return Err(Error::CosineDomain { s, c });
    }
    let dt = cfg.dt;
    let sd = dt.sqrt();
    let n_steps = cfg.n_steps();
    let times = cfg.map_paths(|i| {
        let mut rng = path_rng(cfg.seed, i);
        let mut x = x0;
        for k in 0..n_steps {
            let xi: f64 = rng.sample(StandardNormal);
            let next = x + sd * xi;
            let t0 = k as f64 * dt;
            if next >= 1.0 {
                return Some(t0 + dt * (1.0 - x) / (next - x));
            }
            if next <= -1.0 {
                return Some(t0 + dt * (x + 1.0) / (x - next));
            }
            if cfg.bridge_correction {
                let up = 2.0 * (1.0 - x) * (1.0 - next) / dt;
                let down = 2.0 * (1.0 + x) * (1.0 + next) / dt;
                if up < BRIDGE_ARG_MAX || down < BRIDGE_ARG_MAX {
                    let p_stay = (1.0 - (-up).exp()) * (1.0 - (-down).exp());
                    if rng.gen::<f64>() >= p_stay {
                        return Some(t0 + 0.5 * dt);
                    }
                }
            }
            x = next;
        }
        None
    })?;
    pgf_estimate(s, &times)
}

/// Estimates `E[s^T]` for Brownian motion with drift `-b` started at `a ≥ 0`
/// to reach 0.
pub fn simulate_drift_passage_pgf(s: f64, a: f64, b: f64, cfg: &SimConfig) -> Result<PgfEstimate> {
    cfg.validate()?;
    if !(a >= 0.0) {
        return Err(Error::OutOfDomain(format!("passage distance must be non-negative, got {a}")));
    }
    if !(s > 1.0) || !(2.0 * s.ln() < b * b) {
        return Err(Error::AlphaComplex {
            s,
            b,
            limit: (0.5 * b * b).exp(),
        });
    }
    let dt = cfg.dt;
    let sd = dt.sqrt();
    let n_steps = cfg.n_steps();
    let times = cfg.map_paths(|i| {
        if a == 0.0 {
            return Some(0.0);
        }
        let mut rng = path_rng(cfg.seed, i);
        let mut x = a;
        for k in 0..n_steps {
            let xi: f64 = rng.sample(StandardNormal);
            let next = x - b * dt + sd * xi;
            let t0 = k as f64 * dt;
            if next <= 0.0 {
                return Some(t0 + dt * x / (x - next));
            }
            if cfg.bridge_correction && bridge_hits(&mut rng, x, next, dt) {
                return Some(t0 + 0.5 * dt);
            }
            x = next;
        }
        None
    })?;
    pgf_estimate(s, &times)
}

/// Draws from `π` by inverting its CDF, tabulated on a uniform grid over the
/// region holding all but `2e-15` of the mass and interpolated with a
/// monotone cubic.
#[derive(Debug, Clone)]
pub struct StationarySampler {
    inverse_cdf: MonotoneCubic,
    support: f64,
}

impl StationarySampler {
    pub fn new(d: &TargetDensity) -> Result<Self> {
        let support = tail_quantile(d)?;
        let h = 2.0 * support / (SAMPLER_GRID - 1) as f64;
        let xs: Vec<f64> = (0..SAMPLER_GRID).map(|i| -support + h * i as f64).collect();
        let tol = Tolerance::default();
        let mut cdf = Vec::with_capacity(SAMPLER_GRID);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in xs.windows(2) {
            acc += integrate(|x| d.unnormalized(x), w[0], w[1], tol)?.value;
            cdf.push(acc);
        }
        let total = acc;
        let mut knots_u = Vec::with_capacity(SAMPLER_GRID);
        let mut knots_x = Vec::with_capacity(SAMPLER_GRID);
        for (x, c) in xs.into_iter().zip(cdf) {
            let u = c / total;
            if knots_u.last().map_or(true, |&last| u > last) {
                knots_u.push(u);
                knots_x.push(x);
            }
        }
        Ok(Self {
            inverse_cdf: MonotoneCubic::new(knots_u, knots_x)?,
            support,
        })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.inverse_cdf.eval(u)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }

    /// Half-width of the tabulated support.
    pub fn support(&self) -> f64 {
        self.support
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingRunStats {
    pub coupling_times: EmpiricalSurvival,
    /// Steps where the `|X|` vs `|X̂|` ordering set at time 0 was breached by
    /// more than `3√dt`.
    pub ordering_violations: u64,
    pub max_violation_magnitude: f64,
    /// Pre-meeting steps examined for ordering violations.
    pub steps_checked: u64,
    /// Stationary starting points `X̃_0` of the non-flagged paths, in path order.
    pub partner_starts: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct PairOutcome {
    outcome: Outcome,
    violations: u64,
    max_violation: f64,
    steps: u64,
}

/// Evolves `X` from `y` and `X̃` from `z` with mirrored noise until they meet.
/// After the meeting the second copy follows `X`, so only the pre-meeting
/// segment needs checking.
fn anticoupled_path<R: Rng>(d: &TargetDensity, y: f64, z: f64, p: HitParams, rng: &mut R) -> PairOutcome {
    let mut out = PairOutcome {
        outcome: Outcome::Censored,
        violations: 0,
        max_violation: 0.0,
        steps: 0,
    };
    let (mut x, mut w) = (y, z);
    if x == w {
        out.outcome = Outcome::Hit(0.0);
        return out;
    }
    let x_outside = x.abs() >= w.abs();
    let sd = p.dt.sqrt();
    let tol = 3.0 * sd;
    for k in 0..p.n_steps {
        let xi: f64 = rng.sample(StandardNormal);
        let xn = x + d.drift(x) * p.dt + sd * xi;
        let wn = w + d.drift(w) * p.dt - sd * xi;
        let t0 = k as f64 * p.dt;
        if !(xn.is_finite() && wn.is_finite()) || xn.abs() > p.clamp || wn.abs() > p.clamp {
            out.outcome = Outcome::Flagged;
            return out;
        }
        let gap = x - w;
        let gap_n = xn - wn;
        if gap_n == 0.0 || (gap_n > 0.0) != (gap > 0.0) {
            out.outcome = Outcome::Hit(t0 + p.dt * gap / (gap - gap_n));
            return out;
        }
        // The gap has increment variance 4 dt.
        if p.bridge && bridge_hits(rng, gap.abs(), gap_n.abs(), 4.0 * p.dt) {
            out.outcome = Outcome::Hit(t0 + 0.5 * p.dt);
            return out;
        }
        out.steps += 1;
        let breach = if x_outside { wn.abs() - xn.abs() } else { xn.abs() - wn.abs() };
        if breach > tol {
            out.violations += 1;
            out.max_violation = out.max_violation.max(breach);
        }
        x = xn;
        w = wn;
    }
    out
}

/// Runs the mirrored-noise coupling from `y` against a stationary partner and
/// records the meeting time of every path.
pub fn simulate_anticoupled_pair(d: &TargetDensity, y: f64, cfg: &SimConfig) -> Result<CouplingRunStats> {
    cfg.validate()?;
    if !y.is_finite() {
        return Err(Error::InvalidParameter(format!("start must be finite, got {y}")));
    }
    let sampler = StationarySampler::new(d)?;
    let p = HitParams {
        dt: cfg.dt,
        n_steps: cfg.n_steps(),
        bridge: cfg.bridge_correction,
        clamp: 10.0 * y.abs().max(sampler.support()),
    };
    let results = cfg.map_paths(|i| {
        let mut rng = path_rng(cfg.seed, i);
        let z = sampler.sample(&mut rng);
        (z, anticoupled_path(d, y, z, p, &mut rng))
    })?;
    let outcomes: Vec<Outcome> = results.iter().map(|(_, r)| r.outcome).collect();
    let coupling_times = survival_from(&outcomes, cfg.record_times())?;
    Ok(CouplingRunStats {
        coupling_times,
        ordering_violations: results.iter().map(|(_, r)| r.violations).sum(),
        max_violation_magnitude: results.iter().map(|(_, r)| r.max_violation).fold(0.0, f64::max),
        steps_checked: results.iter().map(|(_, r)| r.steps).sum(),
        partner_starts: results
            .iter()
            .filter(|(_, r)| r.outcome != Outcome::Flagged)
            .map(|(z, _)| *z)
            .collect(),
    })
}

/// For each time, the average over partner starts `z` of
/// `min(1, s^{-t} B(max(1, |y|, |z|), s, b))`: the hitting bound for the
/// larger of the two starting points, averaged path by path.
pub fn pathwise_hitting_bound(
    d: &TargetDensity,
    y: f64,
    s: f64,
    partner_starts: &[f64],
    times: &[f64],
) -> Result<Vec<f64>> {
    let comp = components(s, d.b())?;
    let coefs = partner_starts
        .iter()
        .map(|z| bound_b(y.abs().max(z.abs()).max(1.0), &comp))
        .collect::<Result<Vec<f64>>>()?;
    let n = coefs.len().max(1) as f64;
    Ok(times
        .iter()
        .map(|&t| {
            let decay = s.powf(-t);
            coefs.iter().map(|c| (c * decay).min(1.0)).sum::<f64>() / n
        })
        .collect())
}
