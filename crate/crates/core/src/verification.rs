//! The acceptance suite: ten numbered checks over the whole toolkit, each
//! reduced to a pass flag and a set of named metrics.
//!
//! Every randomized draw comes from a `ChaCha8Rng` seeded by the caller, so
//! a given seed always produces the same [`SuiteReport`].

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ball::{self, BallPatch};
use crate::error::{Error, Result};
use crate::estimates::{self, SampleSet};
use crate::expr::{c, x, AnalyticExpr};
use crate::families::{ball_builtins, halfspace_builtins, Family, Model, SurfaceSpec};
use crate::fd::Stencil;
use crate::fit::GridHeight;
use crate::halfspace::{self, Domain, HalfspaceGraph, Height};
use crate::solver::{self, Boundary, Continuation, MAProblem};
use crate::transform::{self, CayleyMap};

pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u8, name: &str) -> CriterionOutcome {
        CriterionOutcome { id, name: name.to_string(), passed: true, metrics: BTreeMap::new(), failures: Vec::new() }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    /// Records `value` under `key` and fails the criterion unless `ok`.
    fn check(&mut self, key: &str, value: f64, ok: bool) {
        self.metric(key, value);
        if !ok {
            self.fail(format!("{key} = {value:e}"));
        }
    }

    fn fail(&mut self, msg: String) {
        self.passed = false;
        self.failures.push(msg);
    }

    /// Folds an evaluation error into a failure.
    fn guard<T>(&mut self, what: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(format!("{what}: {e}"));
                None
            }
        }
    }

    /// One-line summary, e.g. `criterion 4 [PASS] ma_convergence`.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("criterion {:>2} [{tag}] {}", self.id, self.name);
        if !self.failures.is_empty() {
            s.push_str(": ");
            s.push_str(&self.failures.join("; "));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Closed-form principal curvatures on caps, horospheres and tilted planes.
pub fn curvature_oracles(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(1, "curvature_oracles");
    let mut r = rng(seed, 1);
    let dx = 0.01;
    let (mut jet_err, mut fd_err): (f64, f64) = (0.0, 0.0);
    for (h, rad) in [(2.0, 1.0), (3.0, 1.0), (2.0, 0.5), (1.5, 1.0)] {
        let spec = SurfaceSpec::family(Model::Halfspace, Family::SphereCap { h, r: rad });
        let Some(g) = out.guard("sphere cap", spec.halfspace()) else { continue };
        for _ in 0..10 {
            let p = g.domain.sample(&mut r, 0.9);
            let Some(rep) = out.guard("cap curvature", halfspace::curvature_report(&g, &p)) else { continue };
            jet_err = jet_err.max(max_abs(&rep.kappa.iter().map(|k| k - h / rad).collect::<Vec<_>>()));
            let Some(fd) = out.guard("cap fd curvature", halfspace::curvature_report_fd(&g, &p, dx, Stencil::Fourth))
            else {
                continue;
            };
            fd_err = fd_err.max(max_abs(&fd.kappa.iter().map(|k| k - h / rad).collect::<Vec<_>>()));
        }
    }
    out.check("cap_jet_error", jet_err, jet_err <= 1e-9);
    out.check("cap_fd_error", fd_err, fd_err <= 4.0 * dx * dx);

    let horo = HalfspaceGraph::analytic(2, c(2.0), Domain::disc(2, 1.0));
    let mut horo_err: f64 = 0.0;
    for _ in 0..10 {
        let p = horo.domain.sample(&mut r, 0.9);
        if let Some(rep) = out.guard("horosphere", halfspace::curvature_report(&horo, &p)) {
            horo_err = horo_err.max(max_abs(&rep.kappa.iter().map(|k| k + 1.0).collect::<Vec<_>>()));
        }
    }
    out.check("horosphere_error", horo_err, horo_err <= 1e-12);

    let mut plane_err: f64 = 0.0;
    for m in [0.5, 1.0, 2.0] {
        let spec = SurfaceSpec::family(Model::Halfspace, Family::Plane { m: vec![m, 0.0], c: 2.0 });
        let Some(g) = out.guard("plane", spec.halfspace()) else { continue };
        let want = -1.0 / (1.0 + m * m).sqrt();
        for _ in 0..10 {
            let p = g.domain.sample(&mut r, 0.9);
            if let Some(rep) = out.guard("plane curvature", halfspace::curvature_report(&g, &p)) {
                plane_err = plane_err.max(max_abs(&rep.kappa.iter().map(|k| k - want).collect::<Vec<_>>()));
            }
        }
    }
    out.check("plane_error", plane_err, plane_err <= 1e-10);
    out
}

/// Test function for the Hessian comparison identities.
pub fn probe() -> AnalyticExpr {
    1.0 + x(0) * x(0) + 0.3 * x(1) + 0.2 * x(0) * x(1) * x(1)
}

fn absorb(worst: &mut BTreeMap<String, f64>, prefix: &str, m: &BTreeMap<String, f64>) {
    for (k, v) in m {
        let e = worst.entry(format!("{prefix}{k}")).or_insert(0.0);
        *e = e.max(v.abs());
    }
}

/// Identity residuals at seeded points on every built-in family, plus the
/// injected-perturbation negative controls.
pub fn identity_residuals(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(2, "identity_residuals");
    let mut r = rng(seed, 2);
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    let v = probe();
    for b in halfspace_builtins() {
        let Some(g) = out.guard(&b.id, b.spec.halfspace()) else { continue };
        for _ in 0..100 {
            let p = g.domain.sample(&mut r, 0.9);
            if let Some(m) = out.guard(&b.id, halfspace::comparison_residuals(&g, &p, &v)) {
                absorb(&mut worst, "", &m);
            }
            if let Some(rh) = out.guard(&b.id, halfspace::rho_hessian(&g, &p)) {
                absorb(&mut worst, "", &BTreeMap::from([("rho_hessian_formula".to_string(), rh.formula_residual)]));
            }
            if let Some(id) = out.guard(&b.id, estimates::identity_suite(&g, &p)) {
                absorb(&mut worst, "", &id.residuals);
            }
        }
    }
    for (id, patch) in ball_builtins() {
        let isothermal = ball::conformal_check(&patch, &[0.0, 0.0]).is_ok();
        for _ in 0..100 {
            let p = patch.param_domain.sample(&mut r, 0.9);
            if let Some(m) = out.guard(&id, ball::curvature_crosscheck(&patch, &p)) {
                absorb(&mut worst, "", &m);
            }
            if let Some((c1, c2)) = out.guard(&id, ball::codazzi_residual(&patch, &p)) {
                absorb(&mut worst, "", &BTreeMap::from([("codazzi".to_string(), c1.abs().max(c2.abs()))]));
            }
            if isothermal {
                if let Some(m) = out.guard(&id, ball::conformal_check(&patch, &p)) {
                    absorb(&mut worst, "", &m);
                }
            }
            if let Some(s) = out.guard(&id, ball::support_quantities(&patch, &p)) {
                absorb(&mut worst, "", &s.residuals);
            }
        }
    }
    for (k, v) in &worst {
        out.check(&format!("max_{k}"), *v, *v <= 1e-8);
    }

    // Negative controls must be visible.
    let cap = SurfaceSpec::family(Model::Halfspace, Family::SphereCap { h: 2.0, r: 1.0 }).halfspace().unwrap();
    if let Some(m) = out.guard(
        "perturbed christoffel control",
        halfspace::comparison_residuals_perturbed(&cap, &[0.2, 0.1], &v, 1e-2),
    ) {
        let worst = max_abs(m.values());
        out.check("control_christoffel", worst, worst > 1e-3);
    }
    let sphere = BallPatch::stereographic_sphere([0.0; 3], 0.5, 1.0);
    if let Some((c1, c2)) = out.guard("codazzi control", ball::codazzi_residual_injected(&sphere, &[0.2, 0.1], 1e-2)) {
        let worst = c1.abs().max(c2.abs());
        out.check("control_codazzi", worst, worst > 1e-3);
    }
    let monge = BallPatch::monge_sphere([0.0, 0.0, 0.2], 0.5, 0.3);
    match ball::conformal_check(&monge, &[0.1, 0.2]) {
        Err(Error::Precondition(_)) => out.metric("control_non_isothermal_rejected", 1.0),
        other => out.fail(format!("non-isothermal chart accepted: {other:?}")),
    }
    out
}

fn unit_vec(r: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|c| c / n);
        }
    }
}

fn ball_point(r: &mut ChaCha8Rng, max_radius: f64) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 {
            return v.map(|c| c * max_radius);
        }
    }
}

/// Round trips, isometry residuals, curvature transport and distances.
pub fn model_transform(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(3, "model_transform");
    let mut r = rng(seed, 3);
    let fwd = CayleyMap::ball_to_halfspace();
    let back = fwd.inverse();
    let mut trip: f64 = 0.0;
    for _ in 0..1000 {
        let p = ball_point(&mut r, 0.95);
        let q = fwd.map_point(p).and_then(|q| back.map_point(q));
        if let Some(q) = out.guard("round trip", q) {
            trip = trip.max(max_abs(&[q[0] - p[0], q[1] - p[1], q[2] - p[2]]));
        }
    }
    out.check("round_trip", trip, trip <= 1e-12);

    let (mut iso, mut control): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..100 {
        let p = ball_point(&mut r, 0.8);
        let (v1, v2) = (unit_vec(&mut r), unit_vec(&mut r));
        if let Some(e) = out.guard("isometry", fwd.isometry_residual(p, v1, v2)) {
            iso = iso.max(e);
        }
        // The same pair pushed through a map that is not an isometry.
        let w = unit_vec(&mut r);
        if let Some(e) = out.guard("isometry control", fwd.isometry_residual_scaled(p, w, w, 1.1)) {
            control = control.min(e);
        }
    }
    out.check("isometry", iso, iso <= 1e-10);
    out.check("control_scaled_isometry", control, control > 1e-3);

    let mut kappa_err: f64 = 0.0;
    for (id, patch) in ball_builtins() {
        for _ in 0..3 {
            let p = patch.param_domain.sample(&mut r, 0.5);
            if let Some((n, _)) = out.guard(&id, transform::normalize_neighborhood(&patch, &p, 2.0)) {
                for (a, b) in n.kappa_ball.iter().zip(&n.kappa_halfspace) {
                    kappa_err = kappa_err.max((a - b).abs());
                }
            }
        }
    }
    out.check("normalization_kappa", kappa_err, kappa_err <= 1e-7);

    let d_ball = transform::ball_distance([0.0; 3], [0.0, 0.0, 0.5]);
    let img = fwd.map_point([0.0; 3]).and_then(|a| Ok((a, fwd.map_point([0.0, 0.0, 0.5])?)));
    if let Some((a, b)) = out.guard("distance images", img) {
        let d_hs = transform::halfspace_distance(a, b);
        let e = (d_ball - 3f64.ln()).abs().max((d_hs - 3f64.ln()).abs());
        out.check("distance_log3", e, e <= 1e-12);
    }
    out
}

/// Second-order convergence of the manufactured sphere-cap solve.
pub fn ma_convergence() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(4, "ma_convergence");
    let prob = MAProblem::sphere_cap_study();
    let reference = prob.reference.clone().expect("the cap study carries its exact solution");
    let mut errs = Vec::new();
    for dx in [0.05, 0.025, 0.0125] {
        let sol = solver::newton_solve(&prob, dx, 0.0, None, 1e-10);
        let Some(sol) = out.guard(&format!("solve at dx = {dx}"), sol) else { return out };
        let Some(e) = out.guard("sup error", sol.sup_error(&reference)) else { return out };
        out.metric(&format!("sup_error_dx_{dx}"), e);
        errs.push(e);
    }
    for (i, w) in errs.windows(2).enumerate() {
        let ratio = w[0] / w[1];
        out.check(&format!("ratio_{}", i + 1), ratio, (3.4..=4.6).contains(&ratio));
    }
    out
}

/// The degenerate problem `K = 4|x|²` on the disc of radius 0.6 with
/// constant boundary height 2.8.
pub fn degenerate_problem() -> MAProblem {
    MAProblem::new(0.6, 4.0 * (x(0) * x(0) + x(1) * x(1)), Boundary::Constant(2.8))
}

pub const CONTINUATION_DX: f64 = 0.025;

/// Shift continuation `K + 2^{-k}`, `k = 0..=10`, on [`degenerate_problem`].
pub fn degenerate_continuation() -> Result<Continuation> {
    solver::continuation(&degenerate_problem(), CONTINUATION_DX, &solver::halving_shifts(10), 1e-10)
}

pub fn continuation_stability(cont: &Result<Continuation>) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(5, "degenerate_continuation");
    let cont = match cont {
        Ok(c) => c,
        Err(e) => {
            out.fail(format!("continuation: {e}"));
            return out;
        }
    };
    out.metric("stages", cont.reports.len() as f64);
    if let Some(k) = cont.failed_stage {
        out.fail(format!("stage {k} did not converge: {}", cont.failure.clone().unwrap_or_default()));
        return out;
    }
    for (i, rep) in cont.reports.iter().enumerate() {
        out.metric(&format!("max_h_mean_stage_{i:02}"), rep.max_h_mean);
    }
    let tail: Vec<f64> = cont.reports.iter().rev().take(3).map(|r| r.max_h_mean).collect();
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / lo;
    out.check("last_three_relative_spread", spread, tail.len() == 3 && spread < 0.1);
    out
}

/// Per-stage estimate quantities along the continuation family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageEstimates {
    pub shift: f64,
    pub sup_k2_sigma: f64,
    pub sup_k_grad_h: f64,
    pub calabi_margin: f64,
    pub minimal_c2: f64,
    pub unusable_fits: usize,
}

/// Samples for solver grids: rings out to two thirds of the disc radius.
pub fn stage_samples(radius: f64) -> SampleSet {
    SampleSet::disc([0.0, 0.0], 2.0 * radius / 3.0, 4)
}

pub fn stage_estimates(cont: &Continuation) -> Result<Vec<StageEstimates>> {
    let radius = cont.stages.first().map(|s| s.grid.radius).unwrap_or(0.0);
    let samples = stage_samples(radius);
    let mut rows = Vec::new();
    for (sol, rep) in cont.stages.iter().zip(&cont.reports) {
        let gh = GridHeight::new(sol);
        let mut unusable = 0;
        for p in &samples.points {
            if !gh.fit(p)?.1.usable {
                unusable += 1;
            }
        }
        let graph = HalfspaceGraph {
            dim: 2,
            height: Height::Source(Arc::new(gh)),
            domain: Domain::disc(2, radius),
            orientation: halfspace::Orientation::Downward,
        };
        let pq = estimates::pogorelov_quantities(&graph, &samples)?;
        rows.push(StageEstimates {
            shift: rep.shift,
            sup_k2_sigma: pq.sup_k2_sigma,
            sup_k_grad_h: pq.sup_k_grad_h,
            calabi_margin: estimates::calabi_margin(&graph, &samples)?,
            minimal_c2: estimates::minimal_c2(&graph, &samples, 1.0)?,
            unusable_fits: unusable,
        });
    }
    Ok(rows)
}

fn bounded(out: &mut CriterionOutcome, key: &str, seq: &[f64]) {
    let t = estimates::tail_check(seq);
    out.metric(&format!("{key}_median"), t.median);
    out.check(&format!("{key}_max_last_three"), t.max_last_three, t.passes && t.max_last_three.is_finite());
}

pub fn estimate_boundedness(rows: &Result<Vec<StageEstimates>>) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(6, "estimate_boundedness");
    let Some(rows) = out.guard("stage estimates", rows.clone()) else { return out };
    if rows.is_empty() {
        out.fail("no continuation stages".into());
        return out;
    }
    bounded(&mut out, "sup_k2_sigma", &rows.iter().map(|r| r.sup_k2_sigma).collect::<Vec<_>>());
    bounded(&mut out, "sup_k_grad_h_mean", &rows.iter().map(|r| r.sup_k_grad_h).collect::<Vec<_>>());
    bounded(&mut out, "calabi_margin", &rows.iter().map(|r| r.calabi_margin).collect::<Vec<_>>());
    out.metric("unusable_fits", rows.iter().map(|r| r.unusable_fits).sum::<usize>() as f64);
    out
}

/// Ball spheres near the origin used for the maximum-principle margin.
pub fn small_ball_spheres() -> Vec<(String, BallPatch)> {
    vec![
        ("origin_a0.05".to_string(), BallPatch::stereographic_sphere([0.0; 3], 0.05, 1.0)),
        ("center_z-0.02_a0.04".to_string(), BallPatch::stereographic_sphere([0.0, 0.0, -0.02], 0.04, 1.0)),
        ("center_0.01_0.01_-0.03_a0.03".to_string(), BallPatch::stereographic_sphere([0.01, 0.01, -0.03], 0.03, 1.0)),
    ]
}

pub fn maximum_principle_margin() -> CriterionOutcome {
    let mut out = CriterionOutcome::new(7, "maximum_principle_margin");
    for (id, patch) in small_ball_spheres() {
        let Some(rep) = out.guard(&id, estimates::mean_bound_margin(&patch, 2.0, 41)) else { continue };
        out.check(&format!("{id}_x_norm_sq"), rep.x_norm_sq, rep.hypothesis_holds);
        out.check(&format!("{id}_four_c"), rep.four_c, rep.coefficient_condition);
        out.check(&format!("{id}_margin"), rep.margin, rep.margin <= 1e-8);
    }
    let t = estimates::threshold(2.0);
    out.check("threshold_alpha_2", t, t == 0.04);
    out
}

pub fn scalar_curvature_margin(rows: &Result<Vec<StageEstimates>>) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(8, "scalar_curvature_margin");
    let samples = SampleSet::disc([0.0, 0.0], 0.5, 4);
    let cap = SurfaceSpec::family(Model::Halfspace, Family::SphereCap { h: 2.0, r: 1.0 }).halfspace();
    let horo = SurfaceSpec::family(Model::Halfspace, Family::Horosphere { c: 2.0 }).halfspace();
    for (key, g, want) in [("sphere_cap_2_1", cap, -56.0), ("horosphere_2", horo, -2.0)] {
        let m = g.and_then(|g| estimates::ndim_margin(&g, &samples, 1.0, 1.0));
        if let Some(m) = out.guard(key, m) {
            out.check(&format!("{key}_margin"), m, m <= 0.0 && (m - want).abs() <= 1e-8);
        }
    }
    if let Some(rows) = out.guard("stage estimates", rows.clone()) {
        bounded(&mut out, "minimal_c2", &rows.iter().map(|r| r.minimal_c2).collect::<Vec<_>>());
    }
    out
}

pub fn kappa1_gradient_check(seed: u64) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(9, "kappa1_gradient");
    let mut r = rng(seed, 9);
    let spec = SurfaceSpec::family(Model::Halfspace, Family::PerturbedCap { h: 2.0, r: 1.0, amplitude: 0.02 });
    let Some(g) = out.guard("perturbed cap", spec.halfspace()) else { return out };
    let (mut worst, mut checked, mut skipped): (f64, usize, usize) = (0.0, 0, 0);
    while checked < 50 && skipped < 1000 {
        let p = g.domain.sample(&mut r, 0.9);
        match estimates::kappa1_gradient(&g, &p, 1e-10) {
            Ok(k) => {
                worst = worst.max((k.grad_formula - k.grad_direct).abs());
                checked += 1;
            }
            // Near-umbilic draws close to the coordinate axes.
            Err(Error::Degenerate(_)) => skipped += 1,
            Err(e) => {
                out.fail(format!("{p:?}: {e}"));
                skipped += 1;
            }
        }
    }
    out.metric("points", checked as f64);
    out.metric("near_umbilic_skipped", skipped as f64);
    out.check("two_route_difference", worst, checked == 50 && worst <= 1e-7);

    let cap = SurfaceSpec::family(Model::Halfspace, Family::SphereCap { h: 2.0, r: 1.0 }).halfspace().unwrap();
    let plane = HalfspaceGraph::analytic(2, x(0) + 2.0, Domain::disc(2, 1.0));
    for (key, g) in [("umbilic_cap_rejected", cap), ("umbilic_plane_rejected", plane)] {
        match estimates::kappa1_gradient(&g, &[0.1, 0.2], 1e-8) {
            Err(Error::Degenerate(_)) => out.metric(key, 1.0),
            other => out.fail(format!("{key}: {other:?}")),
        }
    }
    out
}

/// Criteria 1 to 9. The determinism criterion compares two full runs and
/// is added by [`run_suite`].
pub fn run_checks(seed: u64) -> Vec<CriterionOutcome> {
    let cont = degenerate_continuation();
    let rows = cont.as_ref().map_err(Clone::clone).and_then(stage_estimates);
    vec![
        curvature_oracles(seed),
        identity_residuals(seed),
        model_transform(seed),
        ma_convergence(),
        continuation_stability(&cont),
        estimate_boundedness(&rows),
        maximum_principle_margin(),
        scalar_curvature_margin(&rows),
        kappa1_gradient_check(seed),
    ]
}

/// Determinism check over two serialized runs.
pub fn determinism(first: &str, second: &str) -> CriterionOutcome {
    let mut out = CriterionOutcome::new(10, "determinism");
    out.metric("bytes", first.len() as f64);
    if first != second {
        let at = first.bytes().zip(second.bytes()).position(|(a, b)| a != b).unwrap_or(first.len().min(second.len()));
        out.fail(format!("runs differ from byte {at}"));
    }
    out
}

/// The whole suite. Criteria 1-9 run twice with the same seed and their
/// serialized outcomes are compared for criterion 10.
pub fn run_suite(seed: u64) -> SuiteReport {
    let first = run_checks(seed);
    let second = run_checks(seed);
    let a = serde_json::to_string(&first).expect("outcomes serialize");
    let b = serde_json::to_string(&second).expect("outcomes serialize");
    let mut criteria = first;
    criteria.push(determinism(&a, &b));
    SuiteReport { seed, criteria }
}
