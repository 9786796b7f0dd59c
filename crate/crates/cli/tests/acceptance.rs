//! One line per acceptance criterion. Runtime budgets are checked here,
//! outside the deterministic suite output.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hypersurf::verification::{self, CriterionOutcome, DEFAULT_SEED};

fn timed(budget: Option<Duration>, f: impl FnOnce() -> CriterionOutcome) -> (CriterionOutcome, Duration) {
    let t = Instant::now();
    let mut c = f();
    let dt = t.elapsed();
    if let Some(b) = budget {
        if dt > b {
            c.passed = false;
            c.failures.push(format!("runtime {dt:?} over the {b:?} budget"));
        }
    }
    (c, dt)
}

fn run_verify(dir: &Path) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_hypersurf"))
        .args(["verify-all", "--seed", &DEFAULT_SEED.to_string(), "--out"])
        .arg(dir)
        .output()
        .expect("the binary runs");
    let mut bytes = out.stdout.clone();
    for name in ["verify.json", "verify.csv"] {
        bytes.extend(std::fs::read(dir.join(name)).unwrap_or_default());
    }
    (out.status.success(), bytes)
}

fn main() {
    let seed = DEFAULT_SEED;
    let mut results = Vec::new();
    results.push(timed(Some(Duration::from_secs(1)), || verification::curvature_oracles(seed)));
    results.push(timed(Some(Duration::from_secs(10)), || verification::identity_residuals(seed)));
    results.push(timed(None, || verification::model_transform(seed)));
    results.push(timed(Some(Duration::from_secs(60)), verification::ma_convergence));

    let cont = verification::degenerate_continuation();
    let rows = cont.as_ref().map_err(Clone::clone).and_then(verification::stage_estimates);
    results.push(timed(None, || verification::continuation_stability(&cont)));
    results.push(timed(None, || verification::estimate_boundedness(&rows)));
    results.push(timed(None, verification::maximum_principle_margin));
    results.push(timed(None, || verification::scalar_curvature_margin(&rows)));
    results.push(timed(None, || verification::kappa1_gradient_check(seed)));

    results.push(timed(None, || {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (ok_a, bytes_a) = run_verify(a.path());
        let (ok_b, bytes_b) = run_verify(b.path());
        let mut c = verification::determinism(&String::from_utf8_lossy(&bytes_a), &String::from_utf8_lossy(&bytes_b));
        if !(ok_a && ok_b) {
            c.passed = false;
            c.failures.push("verify-all did not exit 0".into());
        }
        c
    }));

    for (c, dt) in &results {
        println!("{}  ({:.2?})", c.line(), dt);
    }
    let failed: Vec<&CriterionOutcome> = results.iter().map(|(c, _)| c).filter(|c| !c.passed).collect();
    for c in &failed {
        for f in &c.failures {
            eprintln!("criterion {:2}: {f}", c.id);
        }
    }
    println!("{} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
