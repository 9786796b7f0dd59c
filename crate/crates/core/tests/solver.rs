use hypersurf::expr::{c, x, AnalyticExpr};
use hypersurf::solver::{continuation, halving_shifts, lift, newton_solve, stage_report, Boundary, MAProblem};

fn cap() -> AnalyticExpr {
    2.0 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt()
}

fn cap_problem(k: AnalyticExpr) -> MAProblem {
    MAProblem { k_field: k, ..MAProblem::sphere_cap_study() }
}

#[test]
fn manufactured_cap_converges_at_second_order() {
    let p = cap_problem(c(4.0));
    let errs: Vec<f64> = [0.05, 0.025, 0.0125]
        .iter()
        .map(|&dx| newton_solve(&p, dx, 0.0, None, 1e-10).unwrap().sup_error(&cap()).unwrap())
        .collect();
    eprintln!("{errs:?}");
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((3.4..=4.6).contains(&r), "ratio {r}");
    }
}

#[test]
fn lifted_boundary_gives_another_cap() {
    let p = MAProblem::new(0.6, c(4.0), Boundary::Constant(3.1));
    let sol = newton_solve(&p, 0.025, 0.0, None, 1e-10).unwrap();
    let rep = stage_report(&p, &sol).unwrap();
    eprintln!("{rep:?}");
    let lifted = lift(&sol, 0.1);
    assert!((lifted.u[lifted.grid.n * lifted.grid.n / 2] - sol.u[sol.grid.n * sol.grid.n / 2] - 0.1).abs() < 1e-15);
}

#[test]
fn degenerate_continuation() {
    let k = 4.0 * (x(0) * x(0) + x(1) * x(1));
    let p = MAProblem::new(0.6, k, Boundary::Constant(2.8));
    let t = std::time::Instant::now();
    let cont = continuation(&p, 0.025, &halving_shifts(10), 1e-10).unwrap();
    eprintln!("{:?}", t.elapsed());
    assert_eq!(cont.failed_stage, None);
    for r in &cont.reports {
        eprintln!("{} {} {} {} {}", r.shift, r.iterations, r.max_h_mean, r.min_k_ext, r.curvature_constant);
    }
}

#[test]
fn shift_zero_agrees_with_direct_solve() {
    let p = cap_problem(c(4.0));
    let cont = continuation(&p, 0.05, &[0.5, 0.0], 1e-12).unwrap();
    let direct = newton_solve(&p, 0.05, 0.0, None, 1e-12).unwrap();
    let last = cont.stages.last().unwrap();
    let d = last.u.iter().zip(&direct.u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    assert!(d < 1e-10, "{d}");
}
