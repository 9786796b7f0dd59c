use hypersurf::verification::*;

fn assert_pass(c: &CriterionOutcome) {
    eprintln!("{}", c.line());
    for (k, v) in &c.metrics {
        eprintln!("    {k} = {v:e}");
    }
    assert!(c.passed, "{}", c.line());
}

#[test]
fn closed_form_checks_pass() {
    assert_pass(&curvature_oracles(DEFAULT_SEED));
    assert_pass(&identity_residuals(DEFAULT_SEED));
    assert_pass(&model_transform(DEFAULT_SEED));
    assert_pass(&maximum_principle_margin());
    assert_pass(&kappa1_gradient_check(DEFAULT_SEED));
}

#[test]
fn continuation_checks_pass() {
    let cont = degenerate_continuation();
    assert_pass(&continuation_stability(&cont));
    let rows = cont.as_ref().map_err(Clone::clone).and_then(stage_estimates);
    if let Ok(r) = &rows {
        for s in r {
            eprintln!("{s:?}");
        }
    }
    assert_pass(&estimate_boundedness(&rows));
    assert_pass(&scalar_curvature_margin(&rows));
}

#[test]
fn determinism_detects_differences() {
    assert!(determinism("abc", "abc").passed);
    assert!(!determinism("abc", "abd").passed);
}
