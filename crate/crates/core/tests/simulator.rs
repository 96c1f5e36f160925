use langevin_bounds::bounds::hitting_tail_bound;
use langevin_bounds::simulator::{
    pathwise_hitting_bound, simulate_anticoupled_pair, simulate_drift_passage_pgf, simulate_hitting,
    simulate_hitting_reflected, SimConfig, StationarySampler,
};
use langevin_bounds::target::{make_exponential_power, mass_interval};

fn cfg(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> SimConfig {
    SimConfig {
        dt,
        horizon,
        n_paths,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn reflection_does_not_change_hitting_times() {
    let d = make_exponential_power(2.0).unwrap();
    let c = cfg(1e-3, 8.0, 400, 3);
    for y in [2.0, -2.0, 0.5] {
        let a = simulate_hitting(&d, y, &c).unwrap();
        let b = simulate_hitting_reflected(&d, y, &c).unwrap();
        assert_eq!(a, b, "y={y}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let d = make_exponential_power(1.5).unwrap();
    let one = simulate_hitting(&d, 3.0, &SimConfig { threads: 1, ..cfg(1e-3, 6.0, 300, 11) }).unwrap();
    let four = simulate_hitting(&d, 3.0, &SimConfig { threads: 4, ..cfg(1e-3, 6.0, 300, 11) }).unwrap();
    assert_eq!(one, four);
    let one = simulate_anticoupled_pair(&d, 3.0, &SimConfig { threads: 1, ..cfg(1e-3, 6.0, 200, 11) }).unwrap();
    let three = simulate_anticoupled_pair(&d, 3.0, &SimConfig { threads: 3, ..cfg(1e-3, 6.0, 200, 11) }).unwrap();
    assert_eq!(one, three);
}

#[test]
fn seeds_change_output() {
    let d = make_exponential_power(2.0).unwrap();
    let a = simulate_hitting(&d, 2.0, &cfg(1e-3, 4.0, 200, 1)).unwrap();
    let b = simulate_hitting(&d, 2.0, &cfg(1e-3, 4.0, 200, 2)).unwrap();
    assert_ne!(a.survival, b.survival);
}

#[test]
fn step_refinement_is_stable() {
    let d = make_exponential_power(2.0).unwrap();
    let coarse = simulate_hitting(&d, 2.0, &cfg(2e-3, 5.0, 4000, 21)).unwrap();
    let fine = simulate_hitting(&d, 2.0, &cfg(1e-3, 5.0, 4000, 21)).unwrap();
    for t in [1.0, 2.0, 3.0] {
        let (p, e) = coarse.at(t).unwrap();
        let (q, f) = fine.at(t).unwrap();
        let z = (p - q).abs() / (e * e + f * f).sqrt().max(1e-12);
        assert!(z < 4.0, "t={t}: {p} vs {q}");
    }
}

#[test]
fn hitting_bound_dominates_simulation() {
    let d = make_exponential_power(2.0).unwrap();
    let sim = simulate_hitting(&d, 2.0, &cfg(1e-3, 20.0, 2000, 5)).unwrap();
    for (i, &t) in sim.times.iter().enumerate() {
        let bound = hitting_tail_bound(&d, 2.0, 1.4, t).unwrap().bound;
        assert!(sim.survival[i] <= bound + 3.0 * sim.std_err[i] + 1e-12, "t={t}");
    }
}

#[test]
fn anticoupling_keeps_order_and_is_dominated() {
    let d = make_exponential_power(2.0).unwrap();
    let fine = simulate_anticoupled_pair(&d, 2.0, &cfg(1e-4, 3.0, 200, 8)).unwrap();
    let coarse = simulate_anticoupled_pair(&d, 2.0, &cfg(1e-3, 3.0, 200, 8)).unwrap();
    let rate = fine.ordering_violations as f64 / fine.steps_checked.max(1) as f64;
    assert!(rate < 1e-4, "rate {rate}");
    assert!(fine.max_violation_magnitude <= coarse.max_violation_magnitude + 1e-12);

    let pair = simulate_anticoupled_pair(&d, 2.0, &cfg(1e-3, 12.0, 1500, 9)).unwrap();
    let surv = &pair.coupling_times;
    let bound = pathwise_hitting_bound(&d, 2.0, 1.4, &pair.partner_starts, &surv.times).unwrap();
    for i in 0..surv.times.len() {
        assert!(surv.survival[i] <= bound[i] + 3.0 * surv.std_err[i] + 1e-12, "t={}", surv.times[i]);
    }
}

#[test]
fn drift_passage_pgf_matches_closed_form() {
    // exp(2 α(1.4, 2)) from a 30-digit reference.
    let exact = 1.421_846_529_950_141_2;
    let est = simulate_drift_passage_pgf(1.4, 2.0, 2.0, &cfg(1e-3, 60.0, 6000, 17)).unwrap();
    let z = (est.estimate - exact) / est.std_err;
    assert!(z.abs() < 4.0, "{} ± {}", est.estimate, est.std_err);
}

#[test]
fn stationary_sampler_reproduces_mass() {
    let d = make_exponential_power(1.3).unwrap();
    let sampler = StationarySampler::new(&d).unwrap();
    for x in [-2.0f64, -0.5, 0.0, 0.7, 3.0] {
        let cdf = 0.5 + mass_interval(&d, 0.0, x.max(0.0)).unwrap() - mass_interval(&d, x.min(0.0), 0.0).unwrap();
        assert!((sampler.quantile(cdf) - x).abs() < 1e-3, "x={x}");
    }
}

#[test]
fn csv_output_shape() {
    let d = make_exponential_power(2.0).unwrap();
    let sim = simulate_hitting(&d, 2.0, &SimConfig { extra_times: vec![0.5], ..cfg(1e-3, 3.0, 50, 1) }).unwrap();
    let csv = sim.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,survival,std_err,n_censored"));
    assert_eq!(lines.count(), sim.times.len());
    assert!(sim.times.windows(2).all(|w| w[0] < w[1]));
    assert!(sim.times.contains(&0.5));
}
