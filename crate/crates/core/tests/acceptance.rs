//! Exit criteria. Each test prints one `AC<n> PASS|FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them.

use langevin_bounds::bounds::{hitting_tail_bound, tv_bound, tv_bound_unreflected, BoundMode};
use langevin_bounds::cli;
use langevin_bounds::pgf::{assemble_b, bound_b, components, feasible_s_range, pgf_bm_exit, pgf_drift_passage};
use langevin_bounds::planner::{minimal_t, plan, PlanRequest, SPolicy};
use langevin_bounds::simulator::{
    simulate_anticoupled_pair, simulate_bm_exit_pgf, simulate_drift_passage_pgf, simulate_hitting, SimConfig,
};
use langevin_bounds::target::make_exponential_power;
use statrs::function::erf::{erf, erfc};

fn report(id: u32, ok: bool, detail: &str) {
    println!("AC{id} {}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "AC{id} failed: {detail}");
}

fn request(beta: f64, y: f64, s: f64, mode: BoundMode) -> PlanRequest {
    PlanRequest {
        density: make_exponential_power(beta).unwrap(),
        y,
        epsilon: 0.01,
        mode,
        s_policy: SPolicy::Fixed(s),
    }
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["langevin-bounds"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap() + &String::from_utf8(err).unwrap())
}

#[test]
fn ac1_hitting_example_gaussian() {
    let (code, out) = run_cli(&["plan", "--beta", "2", "--y", "2", "--s", "1.4", "--epsilon", "0.01", "--mode", "hitting"]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    let t_int = json["t_min_int"].as_u64().unwrap();
    let d = make_exponential_power(2.0).unwrap();
    let at20 = hitting_tail_bound(&d, 2.0, 1.4, 20.0).unwrap().bound;
    let at19 = hitting_tail_bound(&d, 2.0, 1.4, 19.0).unwrap().bound;
    let ok = code == 0 && t_int == 20 && at20 > 0.0080 && at20 < 0.0090 && at19 > 0.01;
    report(1, ok, &format!("t_int={t_int}, bound(20)={at20:.6}, bound(19)={at19:.6}"));
}

#[test]
fn ac2_hitting_example_heavy() {
    let req = request(1.1, 10.0, 1.3, BoundMode::HittingTail);
    let (_, t_int) = minimal_t(&req, 1.3).unwrap();
    let d = &req.density;
    let at34 = hitting_tail_bound(d, 10.0, 1.3, 34.0).unwrap().bound;
    let at33 = hitting_tail_bound(d, 10.0, 1.3, 33.0).unwrap().bound;
    let (code, out) = run_cli(&["plan", "--beta", "1.1", "--y", "10", "--s", "1.3", "--epsilon", "0.01", "--mode", "hitting"]);
    let cli_t: serde_json::Value = serde_json::from_str(&out).unwrap();
    let ok = code == 0 && t_int == 34 && cli_t["t_min_int"] == 34 && at34 < 0.01 && 0.01 <= at33;
    report(2, ok, &format!("t_int={t_int}, bound(34)={at34:.6}, bound(33)={at33:.6}"));
}

#[test]
fn ac3_total_variation_examples() {
    let mut details = Vec::new();
    let mut ok = true;
    for (beta, y, s, expect) in [(2.0, 2.0, 1.4, 20u64), (1.1, 10.0, 1.3, 34)] {
        let req = request(beta, y, s, BoundMode::TotalVariation);
        let p = plan(&req).unwrap();
        ok &= p.t_min_int == expect;
        for t in [0.0, expect as f64 - 1.0, expect as f64, 50.0] {
            let r = tv_bound(&req.density, y, s, t).unwrap();
            let u = tv_bound_unreflected(&req.density, y, s, t).unwrap();
            ok &= r.total == u.total && r.head_term == u.head_term && r.tail_term == u.tail_term;
        }
        let mode_args = ["plan", "--beta", &beta.to_string(), "--y", &y.to_string(), "--s", &s.to_string(), "--mode", "tv"];
        let (code, out) = run_cli(&mode_args);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        ok &= code == 0 && v["t_min_int"].as_u64() == Some(expect);
        details.push(format!("beta={beta}: t_int={}", p.t_min_int));
    }
    // Gaussian tail integral against the completed-square erfc form:
    // ∫_y^∞ e^{-z²} e^{(z-1)α} dz = e^{α²/4 - α} (√π/2) erfc(y - α/2).
    let d = make_exponential_power(2.0).unwrap();
    let comp = components(1.4, 2.0).unwrap();
    let a = comp.alpha;
    let k = 1.0 / comp.c.cos() / (2.0 - comp.ratio);
    let pi_sqrt = std::f64::consts::PI.sqrt();
    let mut worst = 0.0f64;
    for t in [0.0, 19.0, 20.0] {
        let r = tv_bound(&d, 2.0, 1.4, t).unwrap();
        let closed = 2.0 * k / pi_sqrt * (a * a / 4.0 - a).exp() * pi_sqrt / 2.0 * erfc(2.0 - a / 2.0) * 1.4f64.powf(-t);
        worst = worst.max((r.tail_term - closed).abs() / closed);
        let head = 2.0 * 0.5 * erf(2.0) * bound_b(2.0, &comp).unwrap() * 1.4f64.powf(-t);
        worst = worst.max((r.head_term - head).abs() / head);
    }
    ok &= worst < 1e-9;
    details.push(format!("erfc rel err={worst:.2e}"));
    report(3, ok, &details.join(", "));
}

#[test]
fn ac4_product_decomposition_identity() {
    let mut worst = 0.0f64;
    let mut count = 0;
    for b in [1.1, 2.0, 3.0] {
        let range = feasible_s_range(b).unwrap();
        for k in 1..=5 {
            let s = 1.0 + (range.s_hi - 1.0) * k as f64 / 6.0;
            let comp = components(s, b).unwrap();
            for y in [1.0, 1.5, 2.0, 5.0, 10.0] {
                let direct = bound_b(y, &comp).unwrap();
                let assembled = assemble_b(y, &comp).unwrap();
                worst = worst.max((direct - assembled).abs() / direct);
                count += 1;
            }
        }
    }
    report(4, count == 75 && worst <= 1e-12, &format!("{count} grid points, max rel diff {worst:.2e}"));
}

#[test]
fn ac5_pgf_formulas_match_monte_carlo() {
    let cfg = SimConfig {
        dt: 1e-4,
        horizon: 50.0,
        n_paths: 200_000,
        seed: 2024,
        ..SimConfig::default()
    };
    let comp = components(1.4, 2.0).unwrap();
    let exit = simulate_bm_exit_pgf(1.4, 0.0, &cfg).unwrap();
    let exit_ref = pgf_bm_exit(0.0, &comp).unwrap();
    let passage = simulate_drift_passage_pgf(1.4, 1.0, 2.0, &cfg).unwrap();
    let passage_ref = pgf_drift_passage(1.0, &comp).unwrap();
    let z_exit = (exit.estimate - exit_ref) / exit.std_err;
    let z_pass = (passage.estimate - passage_ref) / passage.std_err;
    report(
        5,
        z_exit.abs() <= 3.0 && z_pass.abs() <= 3.0,
        &format!(
            "exit {:.5}±{:.5} vs {exit_ref:.5} (z={z_exit:.2}); passage {:.5}±{:.5} vs {passage_ref:.5} (z={z_pass:.2})",
            exit.estimate, exit.std_err, passage.estimate, passage.std_err
        ),
    );
}

#[test]
fn ac6_bounds_dominate_simulation() {
    let d = make_exponential_power(2.0).unwrap();
    let hit_cfg = SimConfig {
        dt: 1e-3,
        horizon: 40.0,
        n_paths: 100_000,
        seed: 42,
        bridge_correction: true,
        ..SimConfig::default()
    };
    let hit = simulate_hitting(&d, 2.0, &hit_cfg).unwrap();
    let mut ok = hit.times.len() == 40;
    let mut worst_hit = f64::NEG_INFINITY;
    for (i, &t) in hit.times.iter().enumerate() {
        let bound = hitting_tail_bound(&d, 2.0, 1.4, t).unwrap().bound;
        let slack = hit.survival[i] - 3.0 * hit.std_err[i] - bound;
        worst_hit = worst_hit.max(slack);
        ok &= slack <= 0.0;
    }
    let pair_cfg = SimConfig {
        n_paths: 50_000,
        seed: 7,
        ..hit_cfg
    };
    let pair = simulate_anticoupled_pair(&d, 2.0, &pair_cfg).unwrap();
    let ct = &pair.coupling_times;
    let mut worst_pair = f64::NEG_INFINITY;
    for (i, &t) in ct.times.iter().enumerate() {
        let bound = tv_bound(&d, 2.0, 1.4, t).unwrap().total;
        let slack = ct.survival[i] - 3.0 * ct.std_err[i] - bound;
        worst_pair = worst_pair.max(slack);
        ok &= slack <= 0.0;
    }
    let (p20, _) = hit.at(20.0).unwrap();
    let (c20, _) = ct.at(20.0).unwrap();
    report(
        6,
        ok,
        &format!(
            "P(H>=20)={p20:.2e}, P(tau>=20)={c20:.2e}; max(emp - 3se - bound): hitting {worst_hit:.3e}, coupling {worst_pair:.3e}"
        ),
    );
}

#[test]
fn ac7_limits_and_identities() {
    let mut ok = true;
    let mut notes = Vec::new();
    // s → 1⁺
    let comp = components(1.0 + 1e-8, 2.0).unwrap();
    for y in [1.0, 2.0, 5.0, 10.0] {
        ok &= bound_b(y, &comp).unwrap() - 1.0 < 1e-3;
    }
    ok &= (pgf_bm_exit(0.0, &comp).unwrap() - 1.0).abs() < 1e-7;
    ok &= comp.alpha < 1e-7 && comp.c < 2e-4 && comp.ratio - 1.0 < 1e-7;
    notes.push(format!("B(10) at s=1+1e-8: {:.3e} above 1", bound_b(10.0, &comp).unwrap() - 1.0));

    // Symmetry of hitting survival in y ↔ -y.
    let d = make_exponential_power(2.0).unwrap();
    let cfg = SimConfig {
        horizon: 20.0,
        n_paths: 20_000,
        seed: 11,
        ..SimConfig::default()
    };
    let up = simulate_hitting(&d, 2.0, &cfg).unwrap();
    let down = simulate_hitting(&d, -2.0, &cfg).unwrap();
    let mut worst_z = 0.0f64;
    for i in 0..up.times.len() {
        let pooled = (up.std_err[i].powi(2) + down.std_err[i].powi(2)).sqrt();
        let diff = (up.survival[i] - down.survival[i]).abs();
        if pooled > 0.0 {
            worst_z = worst_z.max(diff / pooled);
        } else {
            ok &= diff == 0.0;
        }
    }
    ok &= worst_z <= 3.0;
    notes.push(format!("symmetry max z={worst_z:.2}"));

    // Monotone in y (B) and in ε (minimal t).
    for b in [1.1, 2.0, 3.0] {
        let range = feasible_s_range(b).unwrap();
        let comp = components(1.0 + 0.5 * (range.s_hi - 1.0), b).unwrap();
        let ys = [1.0, 1.5, 2.0, 5.0, 10.0];
        let vals: Vec<f64> = ys.iter().map(|&y| bound_b(y, &comp).unwrap()).collect();
        ok &= vals.windows(2).all(|w| w[1] > w[0]);
    }
    let mut req = request(2.0, 2.0, 1.4, BoundMode::HittingTail);
    let mut prev = 0u64;
    for eps in [0.5, 0.1, 0.01, 0.001] {
        req.epsilon = eps;
        let (_, t) = minimal_t(&req, 1.4).unwrap();
        ok &= t >= prev;
        prev = t;
    }
    notes.push(format!("t_int at eps=0.001: {prev}"));
    report(7, ok, &notes.join(", "));
}

#[test]
fn ac8_validate_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let (code, text) = run_cli(&[
            "validate", "--beta", "2", "--y", "2", "--s", "1.4", "--seed", "42", "--n-paths", "4000",
            "--pgf-paths", "2000", "--horizon", "40", "--threads", threads,
            "--out-dir", out_dir.to_str().unwrap(),
        ]);
        assert!(code == 0 || code == 4, "{text}");
        out_dir
    };
    let a = run("1", "a");
    let b = run("4", "b");
    let mut ok = true;
    for f in ["hitting_survival.csv", "coupling_survival.csv", "checks.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        ok &= !x.is_empty() && x == y;
    }
    report(8, ok, "validate CSVs byte-identical with 1 and 4 worker threads");
}
