//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Criterion 7 gates on the implicit angle scheme and prints
//! projected Euler alongside. Criterion 8 simulates 2e5 paths to t = 40 and
//! takes a while on a single core.

use std::time::Instant;

use rayon::prelude::*;

use jacobi_core::harness::{run_ldp_experiment, ExperimentConfig};
use jacobi_core::inference::{girsanov_loglik, mle_b, nu_hat, EstimatorMode};
use jacobi_core::sim::{simulate_jacobi_with, JacobiSimConfig, Scheme};
use jacobi_core::verify::{run_checks, CheckResult};
use jacobi_core::SeriesControl;

struct Outcome {
    pass: bool,
    detail: String,
}

fn checks(names: &[&str]) -> Outcome {
    let only: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let results = run_checks(&only, None, &SeriesControl::default()).expect("known check names");
    summarize(&results)
}

fn summarize(results: &[CheckResult]) -> Outcome {
    let detail = results
        .iter()
        .map(|r| match r.value {
            Some(v) => format!("{} {:.2e} (tol {:.0e}){}", r.name, v, r.tol, if r.pass { "" } else { " FAILED" }),
            None => format!("{} error: {}", r.name, r.detail),
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass: results.iter().all(|r| r.pass), detail }
}

fn special_functions() -> Outcome {
    let start = Instant::now();
    let mut out = checks(&["recurrence_vs_2f1", "orthonormality"]);
    let secs = start.elapsed().as_secs_f64();
    out.pass &= secs < 1.0;
    out.detail += &format!("; runtime {secs:.3} s (limit 1 s)");
    out
}

fn estimates_for(scheme: Scheme) -> Vec<(f64, jacobi_core::sim::Trajectory)> {
    (0..200u64)
        .into_par_iter()
        .map(|i| {
            let mut cfg = JacobiSimConfig::new(-2.0, 0.0, 0.0, 50.0, 1e-3, 2024);
            cfg.stream = i;
            cfg.scheme = scheme;
            let p = simulate_jacobi_with(&cfg).expect("simulation");
            (mle_b(&p, EstimatorMode::Pathwise).expect("nondegenerate").estimate, p)
        })
        .collect()
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn estimator_consistency() -> Outcome {
    let b = -2.0;
    // projected Euler overshoots near the boundaries at this step size and inflates
    // 1/(1 - y^2) terms, so the gate uses the implicit angle scheme; Euler is reported only
    let runs = estimates_for(Scheme::ImplicitAngle);
    let (mut worst_identity, mut worst_argmax) = (0.0f64, 0.0f64);
    for (bh, p) in &runs {
        let bh = *bh;
        let nu = nu_hat(p).expect("nondegenerate").estimate;
        worst_identity = worst_identity.max((nu + bh + 1.0).abs());
        // the log-likelihood is an exact quadratic in b; locate its vertex from three values
        let ll = |x: f64| girsanov_loglik(p, x, b, EstimatorMode::Pathwise).expect("nondegenerate");
        let (x1, x2, x3) = (bh - 1.0, bh, bh + 1.0);
        let (f1, f2, f3) = (ll(x1), ll(x2), ll(x3));
        let vertex = x2 - 0.5 * ((x2 - x1).powi(2) * (f2 - f3) - (x2 - x3).powi(2) * (f2 - f1))
            / ((x2 - x1) * (f2 - f3) - (x2 - x3) * (f2 - f1));
        worst_argmax = worst_argmax.max((vertex - bh).abs());
    }
    let estimates: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (mean, se) = mean_and_se(&estimates);
    let z = (mean - b).abs() / se;
    let euler: Vec<f64> = estimates_for(Scheme::EulerProjected).into_iter().map(|r| r.0).collect();
    let (euler_mean, euler_se) = mean_and_se(&euler);
    Outcome {
        pass: z < 3.0 && worst_identity < 1e-12 && worst_argmax < 1e-10,
        detail: format!(
            "implicit angle: mean b_hat {mean:.4} (SE {se:.4}, {z:.2} SE from -2); max |nu_hat + b_hat + 1| {worst_identity:.1e}; max |argmax - b_hat| {worst_argmax:.1e}; projected Euler (not gated): mean {euler_mean:.4} (SE {euler_se:.4})"
        ),
    }
}

fn mc_ldp() -> Outcome {
    let cfg = ExperimentConfig::new(-3.0, vec![-2.0], vec![10.0, 20.0, 40.0], 200_000, 1e-3, 20240601);
    let r = run_ldp_experiment(&cfg).expect("experiment runs");
    let fit = &r.slopes[0];
    let cells = r.cells.iter().map(|c| format!("t={} count={}", c.t, c.count)).collect::<Vec<_>>().join(", ");
    let pass = r.zero_cells() == 0 && fit.rel_error.is_some_and(|e| e < 0.2);
    Outcome {
        pass,
        detail: format!(
            "P(b_hat >= -2): {cells}; slope {:?} +- {:?} vs -0.25; {:.0} s",
            fit.slope,
            fit.slope_se,
            r.wall_clock_s
        ),
    }
}

fn determinism() -> Outcome {
    let pool = |k: usize| rayon::ThreadPoolBuilder::new().num_threads(k).build().expect("pool");
    let dir = tempfile::tempdir().expect("temp dir");
    let write_batch = |tag: &str| -> Vec<Vec<u8>> {
        (0..8u64)
            .into_par_iter()
            .map(|i| {
                let mut cfg = JacobiSimConfig::new(-2.0, 0.3, 0.1, 5.0, 1e-3, 77);
                cfg.stream = i;
                let path = dir.path().join(format!("{tag}_{i}.csv"));
                simulate_jacobi_with(&cfg).expect("simulation").save(&path).expect("save");
                let mut bytes = std::fs::read(&path).expect("read back");
                bytes.extend(std::fs::read(jacobi_core::sim::Trajectory::sidecar_path(&path)).expect("sidecar"));
                bytes
            })
            .collect()
    };
    let files_1 = pool(1).install(|| write_batch("one"));
    let files_4 = pool(4).install(|| write_batch("four"));
    let cfg = ExperimentConfig::new(-3.0, vec![-2.5, -2.0], vec![2.0, 4.0], 2000, 1e-2, 5);
    let run = |k: usize| pool(k).install(|| run_ldp_experiment(&cfg).expect("experiment"));
    let (a, b) = (run(1), run(4));
    let (mut ja, mut jb) = (Vec::new(), Vec::new());
    a.write_jsonl(&mut ja).expect("jsonl");
    b.write_jsonl(&mut jb).expect("jsonl");
    Outcome {
        pass: files_1 == files_4 && a.counts() == b.counts() && ja == jb,
        detail: format!("8 trajectory files and {} MC cells compared across 1 and 4 threads", a.cells.len()),
    }
}

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("special functions", Box::new(special_functions)),
        ("eigenrelation", Box::new(|| checks(&["generator_residual"]))),
        ("Poisson kernel", Box::new(|| checks(&["bilinear_vs_f4", "bailey_vs_f4"]))),
        ("Laplace identities", Box::new(|| checks(&["laplace"]))),
        ("density routes", Box::new(|| checks(&["routes", "kernel"]))),
        ("rate identities", Box::new(|| checks(&["rates", "duality"]))),
        ("estimator consistency", Box::new(estimator_consistency)),
        ("Monte Carlo large deviations", Box::new(mc_ldp)),
        ("cumulant convergence", Box::new(|| checks(&["cgf"]))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {} {name}: {} | {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
