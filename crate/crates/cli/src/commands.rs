use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use hypersurf::ball::{self, BallPatch};
use hypersurf::estimates::{self, EstimateRow, IdentityReport, SampleSet, ESTIMATE_COLUMNS};
use hypersurf::families::{Surface, SurfaceSpec};
use hypersurf::halfspace::{self, CurvatureReport, Domain, HalfspaceGraph};
use hypersurf::solver::{self, MAProblem, StageReport};
use hypersurf::transform::{self, Normalization};
use hypersurf::verification::{self, StageEstimates};

use crate::output::{f, headers, Sink};
use crate::{CliError, Common};

const RESIDUAL_TOL: f64 = 1e-8;
const SLACK_TOL: f64 = -1e-10;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("malformed spec {}: {e}", path.display())))
}

fn surface(c: &Common) -> Result<(SurfaceSpec, Surface), CliError> {
    let path = c.spec.as_deref().ok_or_else(|| CliError::Usage("--spec is required".into()))?;
    let spec: SurfaceSpec = read_json(path)?;
    let built = spec.build().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((spec, built))
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(vec![e.to_string()])
}

fn points_or(spec: &SurfaceSpec, dim: usize) -> Vec<Vec<f64>> {
    if spec.points.is_empty() { vec![vec![0.0; dim]] } else { spec.points.clone() }
}

fn check_points(points: &[Vec<f64>], dim: usize) -> Result<(), CliError> {
    match points.iter().find(|p| p.len() != dim) {
        Some(p) => Err(CliError::Usage(format!("point {p:?} does not have {dim} coordinates"))),
        None => Ok(()),
    }
}

fn coord_headers(dim: usize, prefix: &str) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

#[derive(Serialize)]
struct BallCurvature {
    point: Vec<f64>,
    forms: ball::BallForms,
    kappa: Vec<f64>,
}

/// CSV columns: `x1..xn, u, w, nu_vertical, kappa_1..n, k_ext, h_mean,
/// h_trace, r_scalar, k_intrinsic` for graphs, and `s, t, e, f, g, l, m, n,
/// kappa_1, kappa_2, k_intrinsic, h_mean` for ball patches.
pub fn curvature(c: &Common) -> Result<(), CliError> {
    let (spec, built) = surface(c)?;
    let sink = Sink::new(c.out.as_deref())?;
    match built {
        Surface::Halfspace(g) => {
            let points = points_or(&spec, g.dim);
            check_points(&points, g.dim)?;
            let reports: Vec<CurvatureReport> = points
                .iter()
                .map(|p| halfspace::curvature_report(&g, p))
                .collect::<Result<_, _>>()
                .map_err(failed)?;
            let mut head = coord_headers(g.dim, "x");
            head.extend(headers(&["u", "w", "nu_vertical"]));
            head.extend(coord_headers(g.dim, "kappa_"));
            head.extend(headers(&["k_ext", "h_mean", "h_trace", "r_scalar", "k_intrinsic"]));
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    let mut row: Vec<String> = r.point.iter().copied().map(f).collect();
                    row.extend([f(r.u), f(r.w), f(r.nu_vertical)]);
                    row.extend(r.kappa.iter().copied().map(f));
                    row.extend([f(r.k_ext), f(r.h_mean), f(r.h_trace), f(r.r_scalar)]);
                    row.push(r.k_intrinsic.map(f).unwrap_or_default());
                    row
                })
                .collect();
            sink.csv("curvature.csv", &head, &rows)?;
            if c.out.is_some() {
                sink.json("curvature.json", &reports)?;
            }
        }
        Surface::Ball(patch) => {
            let points = points_or(&spec, 2);
            check_points(&points, 2)?;
            let mut out = Vec::new();
            for p in &points {
                let forms = ball::ball_forms(&patch, p).map_err(failed)?;
                let kappa = halfspace::generalized_eigenvalues(
                    &[vec![forms.l, forms.m], vec![forms.m, forms.n]],
                    &[vec![forms.e, forms.f], vec![forms.f, forms.g]],
                )
                .map_err(failed)?;
                out.push(BallCurvature { point: p.clone(), forms, kappa });
            }
            let head = headers(&["s", "t", "e", "f", "g", "l", "m", "n", "kappa_1", "kappa_2", "k_intrinsic", "h_mean"]);
            let rows: Vec<Vec<String>> = out
                .iter()
                .map(|b| {
                    let fm = &b.forms;
                    vec![
                        f(b.point[0]),
                        f(b.point[1]),
                        f(fm.e),
                        f(fm.f),
                        f(fm.g),
                        f(fm.l),
                        f(fm.m),
                        f(fm.n),
                        f(b.kappa[0]),
                        f(b.kappa[1]),
                        f(fm.k_intrinsic),
                        f(fm.h_mean),
                    ]
                })
                .collect();
            sink.csv("curvature.csv", &head, &rows)?;
            if c.out.is_some() {
                sink.json("curvature.json", &out)?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PointIdentities {
    point: Vec<f64>,
    residuals: BTreeMap<String, f64>,
    /// Slacks of the inequality chain; only checked where every principal
    /// curvature is positive.
    slacks: BTreeMap<String, f64>,
    convex: bool,
}

#[derive(Serialize)]
struct IdentityFile {
    seed: u64,
    points: Vec<PointIdentities>,
    worst_residuals: BTreeMap<String, f64>,
    passed: bool,
}

fn sample_points(domain: &Domain, spec: &SurfaceSpec, seed: u64) -> Vec<Vec<f64>> {
    if !spec.points.is_empty() {
        return spec.points.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..20).map(|_| domain.sample(&mut rng, 0.9)).collect()
}

fn halfspace_identities(g: &HalfspaceGraph, p: &[f64]) -> hypersurf::Result<PointIdentities> {
    let mut residuals = halfspace::comparison_residuals(g, p, &verification::probe())?;
    let mut slacks = BTreeMap::new();
    let mut convex = false;
    if g.dim == 2 {
        let rh = halfspace::rho_hessian(g, p)?;
        residuals.insert("rho_hessian_formula".into(), rh.formula_residual);
        residuals.insert("det_identity".into(), rh.det_identity_residual);
        // Indefinite ρ Hessians have no identity suite.
        if let Ok(IdentityReport { residuals: r, slacks: s }) = estimates::identity_suite(g, p) {
            residuals.extend(r);
            slacks = s;
        }
        convex = halfspace::curvature_report(g, p)?.kappa.iter().all(|k| *k > 0.0);
    }
    Ok(PointIdentities { point: p.to_vec(), residuals, slacks, convex })
}

fn ball_identities(patch: &BallPatch, p: &[f64]) -> hypersurf::Result<PointIdentities> {
    let mut residuals = ball::curvature_crosscheck(patch, p)?;
    let (c1, c2) = ball::codazzi_residual(patch, p)?;
    residuals.insert("codazzi_1".into(), c1.abs());
    residuals.insert("codazzi_2".into(), c2.abs());
    if let Ok(m) = ball::conformal_check(patch, p) {
        residuals.extend(m);
    }
    let sq = ball::support_quantities(patch, p)?;
    residuals.extend(sq.residuals);
    let slacks = BTreeMap::from([("cauchy_schwarz".to_string(), sq.cauchy_schwarz_slack)]);
    Ok(PointIdentities { point: p.to_vec(), residuals, slacks, convex: true })
}

/// CSV columns: `point, x1, x2, kind, key, value` (one identity per row).
pub fn identities(c: &Common) -> Result<(), CliError> {
    let (spec, built) = surface(c)?;
    let sink = Sink::new(c.out.as_deref())?;
    let (points, dim) = match &built {
        Surface::Halfspace(g) => (sample_points(&g.domain, &spec, c.seed), g.dim),
        Surface::Ball(b) => (sample_points(&b.param_domain, &spec, c.seed), 2),
    };
    check_points(&points, dim)?;
    let mut rows_out = Vec::new();
    for p in &points {
        let r = match &built {
            Surface::Halfspace(g) => halfspace_identities(g, p),
            Surface::Ball(b) => ball_identities(b, p),
        };
        rows_out.push(r.map_err(failed)?);
    }
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    for pi in &rows_out {
        for (k, v) in &pi.residuals {
            let e = worst.entry(k.clone()).or_insert(0.0);
            *e = e.max(*v);
            if !(*v <= RESIDUAL_TOL) {
                failures.push(format!("residual {k} = {v:e} at {:?}", pi.point));
            }
        }
        if pi.convex {
            for (k, v) in &pi.slacks {
                if !(*v >= SLACK_TOL) {
                    failures.push(format!("slack {k} = {v:e} at {:?}", pi.point));
                }
            }
        }
    }
    let mut head = headers(&["point"]);
    head.extend(coord_headers(dim, "x"));
    head.extend(headers(&["kind", "key", "value"]));
    let mut rows = Vec::new();
    for (i, pi) in rows_out.iter().enumerate() {
        for (kind, map) in [("residual", &pi.residuals), ("slack", &pi.slacks)] {
            for (k, v) in map {
                let mut row = vec![i.to_string()];
                row.extend(pi.point.iter().copied().map(f));
                row.extend([kind.to_string(), k.clone(), f(*v)]);
                rows.push(row);
            }
        }
    }
    sink.csv("identities.csv", &head, &rows)?;
    let file = IdentityFile { seed: c.seed, points: rows_out, worst_residuals: worst, passed: failures.is_empty() };
    if c.out.is_some() {
        sink.json("identities.json", &file)?;
    }
    if c.check && !failures.is_empty() {
        return Err(CliError::Failed(failures));
    }
    Ok(())
}

#[derive(Serialize)]
struct TransformRecord {
    param: Vec<f64>,
    normalization: Normalization,
    /// Curvature of the normalized graph at the origin of its domain.
    graph_curvature: CurvatureReport,
    kappa_difference: f64,
}

/// CSV columns: `s, t, radius, u0, kappa_ball_1, kappa_ball_2,
/// kappa_halfspace_1, kappa_halfspace_2, kappa_difference`.
pub fn transform(c: &Common, target_height: f64) -> Result<(), CliError> {
    let (spec, built) = surface(c)?;
    let Surface::Ball(patch) = built else {
        return Err(CliError::Usage("transform needs a ball-model surface".into()));
    };
    if !(target_height > 0.0) {
        return Err(CliError::Usage(format!("--target-height must be positive, got {target_height}")));
    }
    let sink = Sink::new(c.out.as_deref())?;
    let points = points_or(&spec, 2);
    check_points(&points, 2)?;
    let mut recs = Vec::new();
    for p in &points {
        let (n, graph) = transform::normalize_neighborhood(&patch, p, target_height).map_err(failed)?;
        let graph_curvature = halfspace::curvature_report(&graph, &[0.0, 0.0]).map_err(failed)?;
        let kappa_difference =
            n.kappa_ball.iter().zip(&n.kappa_halfspace).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        recs.push(TransformRecord { param: p.clone(), normalization: n, graph_curvature, kappa_difference });
    }
    let head = headers(&[
        "s",
        "t",
        "radius",
        "u0",
        "kappa_ball_1",
        "kappa_ball_2",
        "kappa_halfspace_1",
        "kappa_halfspace_2",
        "kappa_difference",
    ]);
    let rows: Vec<Vec<String>> = recs
        .iter()
        .map(|r| {
            let n = &r.normalization;
            vec![
                f(r.param[0]),
                f(r.param[1]),
                f(n.radius),
                f(n.u0),
                f(n.kappa_ball[0]),
                f(n.kappa_ball[1]),
                f(n.kappa_halfspace[0]),
                f(n.kappa_halfspace[1]),
                f(r.kappa_difference),
            ]
        })
        .collect();
    sink.csv("transform.csv", &head, &rows)?;
    if c.out.is_some() {
        sink.json("transform.json", &recs)?;
    }
    let bad: Vec<String> = recs
        .iter()
        .filter(|r| !(r.kappa_difference <= 1e-7))
        .map(|r| format!("curvature changed by {:e} at {:?}", r.kappa_difference, r.param))
        .collect();
    if c.check && !bad.is_empty() {
        return Err(CliError::Failed(bad));
    }
    Ok(())
}

/// Input of `solve`: the problem plus grid settings.
#[derive(Debug, Clone, Deserialize)]
struct SolveSpec {
    #[serde(flatten)]
    problem: MAProblem,
    #[serde(default = "default_dx")]
    dx: f64,
    #[serde(default = "default_tol")]
    tol: f64,
    /// Continuation shifts; empty for a single solve.
    #[serde(default)]
    shifts: Vec<f64>,
}

fn default_dx() -> f64 {
    verification::CONTINUATION_DX
}

fn default_tol() -> f64 {
    1e-10
}

impl SolveSpec {
    fn resolve(mut self, c: &Common) -> Result<SolveSpec, CliError> {
        if let Some(dx) = c.dx {
            self.dx = dx;
        }
        if let Some(t) = c.tol {
            self.tol = t;
        }
        if !(self.dx > 0.0 && self.dx < self.problem.radius) || !(self.tol > 0.0) || !(self.problem.radius > 0.0) {
            return Err(CliError::Usage(format!(
                "need 0 < dx < radius and tol > 0, got dx = {}, tol = {}, radius = {}",
                self.dx, self.tol, self.problem.radius
            )));
        }
        Ok(self)
    }

    /// The degenerate continuation family used when no spec is given.
    fn default_family() -> SolveSpec {
        SolveSpec {
            problem: verification::degenerate_problem(),
            dx: verification::CONTINUATION_DX,
            tol: 1e-10,
            shifts: solver::halving_shifts(10),
        }
    }
}

const STAGE_COLUMNS: [&str; 9] = [
    "shift",
    "iterations",
    "residual",
    "max_h_mean",
    "max_h_trace",
    "min_k_ext",
    "max_k_ext",
    "curvature_constant",
    "converged",
];

fn stage_row(r: &StageReport, converged: bool) -> Vec<String> {
    vec![
        f(r.shift),
        r.iterations.to_string(),
        f(r.residual),
        f(r.max_h_mean),
        f(r.max_h_trace),
        f(r.min_k_ext),
        f(r.max_k_ext),
        f(r.curvature_constant),
        converged.to_string(),
    ]
}

#[derive(Serialize)]
struct SolveReport {
    dx: f64,
    tol: f64,
    stages: Vec<StageReport>,
    newton_iterations: Vec<usize>,
    failed_stage: Option<usize>,
    failure: Option<String>,
    sup_error: Option<f64>,
    h_mean_tail: Option<estimates::TailCheck>,
}

/// Writes `solution.csv` (`x1, x2, u` at active nodes of the last
/// converged stage), `stages.csv` and `solve.json`.
pub fn solve(c: &Common) -> Result<(), CliError> {
    let spec = match &c.spec {
        Some(p) => read_json::<SolveSpec>(p)?,
        None => return Err(CliError::Usage("--spec is required".into())),
    }
    .resolve(c)?;
    let sink = Sink::new(c.out.as_deref())?;
    let prob = &spec.problem;
    let (stages, reports, failed_stage, failure) = if spec.shifts.is_empty() {
        let sol = solver::newton_solve(prob, spec.dx, 0.0, None, spec.tol).map_err(failed)?;
        let rep = solver::stage_report(prob, &sol).map_err(failed)?;
        (vec![sol], vec![rep], None, None)
    } else {
        let cont = solver::continuation(prob, spec.dx, &spec.shifts, spec.tol).map_err(failed)?;
        (cont.stages, cont.reports, cont.failed_stage, cont.failure)
    };
    let last = stages.last().ok_or_else(|| failed("no stage converged"))?;
    let sup_error = match &prob.reference {
        Some(r) => Some(last.sup_error(r).map_err(failed)?),
        None => None,
    };
    let h_mean_tail = (reports.len() >= 3)
        .then(|| estimates::tail_check(&reports.iter().map(|r| r.max_h_mean).collect::<Vec<_>>()));
    let rows: Vec<Vec<String>> = last.rows().iter().map(|r| r.iter().copied().map(f).collect()).collect();
    sink.csv("solution.csv", &headers(&["x1", "x2", "u"]), &rows)?;
    let stage_rows: Vec<Vec<String>> = reports.iter().map(|r| stage_row(r, true)).collect();
    sink.csv("stages.csv", &headers(&STAGE_COLUMNS), &stage_rows)?;
    let report = SolveReport {
        dx: spec.dx,
        tol: spec.tol,
        newton_iterations: stages.iter().map(|s| s.newton_stats.iterations).collect(),
        stages: reports,
        failed_stage,
        failure: failure.clone(),
        sup_error,
        h_mean_tail,
    };
    sink.json("solve.json", &report)?;
    let mut failures = Vec::new();
    if let Some(k) = failed_stage {
        failures.push(format!("stage {k} did not converge: {}", failure.unwrap_or_default()));
    }
    if c.check {
        if let Some(t) = &report.h_mean_tail {
            if !t.passes {
                failures.push(format!("max H_mean tail {} exceeds twice the median {}", t.max_last_three, t.median));
            }
        }
    }
    if failures.is_empty() { Ok(()) } else { Err(CliError::Failed(failures)) }
}

#[derive(Serialize)]
struct SurfaceEstimates {
    rows: Vec<EstimateRow>,
    skipped: Vec<(Vec<f64>, String)>,
    sup: BTreeMap<String, f64>,
    calabi_margin: Result<f64, String>,
    pogorelov: Result<estimates::Pogorelov, String>,
    scalar_curvature_margin: Result<f64, String>,
    minimal_c2: Result<f64, String>,
}

#[derive(Serialize)]
struct FamilyEstimates {
    dx: f64,
    stages: Vec<StageEstimates>,
    tail_checks: BTreeMap<String, estimates::TailCheck>,
}

fn sup_of(rows: &[EstimateRow]) -> BTreeMap<String, f64> {
    let mut sup = BTreeMap::new();
    let mut put = |k: &str, v: Option<f64>| {
        if let Some(v) = v {
            let e = sup.entry(k.to_string()).or_insert(f64::NEG_INFINITY);
            *e = e.max(v);
        }
    };
    for r in rows {
        put("k_ext", Some(r.k_ext));
        put("h_mean", Some(r.h_mean));
        put("h_trace", Some(r.h_trace));
        put("sigma", Some(r.sigma));
        put("l_sigma", Some(r.l_sigma));
        put("k2_sigma", Some(r.k2_sigma));
        put("k_grad_h_mean", Some(r.k_grad_h_mean));
        put("kappa1", r.kappa1);
        put("grad_kappa1", r.grad_kappa1);
        put("r_scalar", Some(r.r_scalar));
        put("lap_r", Some(r.lap_r));
    }
    sup
}

fn graph_estimates(c: &Common, g: &HalfspaceGraph) -> Result<(), CliError> {
    if g.dim != 2 {
        return Err(CliError::Usage("estimates on graphs need n = 2".into()));
    }
    let sink = Sink::new(c.out.as_deref())?;
    let samples = SampleSet::for_domain(&g.domain, 0.8, 4);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for p in &samples.points {
        match estimates::estimate_row(g, p, 1e-10) {
            Ok(r) => rows.push(r),
            Err(e) => skipped.push((p.clone(), e.to_string())),
        }
    }
    let s = |r: hypersurf::Result<f64>| r.map_err(|e| e.to_string());
    let rep = SurfaceEstimates {
        sup: sup_of(&rows),
        calabi_margin: s(estimates::calabi_margin(g, &samples)),
        pogorelov: estimates::pogorelov_quantities(g, &samples).map_err(|e| e.to_string()),
        scalar_curvature_margin: s(estimates::ndim_margin(g, &samples, 1.0, 1.0)),
        minimal_c2: s(estimates::minimal_c2(g, &samples, 1.0)),
        rows,
        skipped,
    };
    let csv_rows: Vec<Vec<String>> = rep.rows.iter().map(EstimateRow::csv_fields).collect();
    sink.csv("estimates.csv", &headers(&ESTIMATE_COLUMNS), &csv_rows)?;
    sink.json("estimates.json", &rep)?;
    Ok(())
}

fn ball_estimates(c: &Common, patch: &BallPatch) -> Result<(), CliError> {
    let sink = Sink::new(c.out.as_deref())?;
    let rep = estimates::mean_bound_margin(patch, 2.0, 41).map_err(failed)?;
    sink.json("mean_bound.json", &rep)?;
    let mut failures = Vec::new();
    if c.check && rep.coefficient_condition && !(rep.margin <= 1e-8) {
        failures.push(format!("margin {} is positive at {:?}", rep.margin, rep.q_param));
    }
    if failures.is_empty() { Ok(()) } else { Err(CliError::Failed(failures)) }
}

const FAMILY_COLUMNS: [&str; 6] =
    ["shift", "sup_k2_sigma", "sup_k_grad_h_mean", "calabi_margin", "minimal_c2", "unusable_fits"];

fn family_estimates(c: &Common, spec: SolveSpec) -> Result<(), CliError> {
    let sink = Sink::new(c.out.as_deref())?;
    let shifts = if spec.shifts.is_empty() { solver::halving_shifts(10) } else { spec.shifts.clone() };
    let cont = solver::continuation(&spec.problem, spec.dx, &shifts, spec.tol).map_err(failed)?;
    let stages = verification::stage_estimates(&cont).map_err(failed)?;
    let mut tail_checks = BTreeMap::new();
    tail_checks.insert(
        "sup_k2_sigma".to_string(),
        estimates::tail_check(&stages.iter().map(|s| s.sup_k2_sigma).collect::<Vec<_>>()),
    );
    tail_checks.insert(
        "sup_k_grad_h_mean".to_string(),
        estimates::tail_check(&stages.iter().map(|s| s.sup_k_grad_h).collect::<Vec<_>>()),
    );
    tail_checks.insert(
        "calabi_margin".to_string(),
        estimates::tail_check(&stages.iter().map(|s| s.calabi_margin).collect::<Vec<_>>()),
    );
    tail_checks
        .insert("minimal_c2".to_string(), estimates::tail_check(&stages.iter().map(|s| s.minimal_c2).collect::<Vec<_>>()));
    let rows: Vec<Vec<String>> = stages
        .iter()
        .map(|s| {
            vec![
                f(s.shift),
                f(s.sup_k2_sigma),
                f(s.sup_k_grad_h),
                f(s.calabi_margin),
                f(s.minimal_c2),
                s.unusable_fits.to_string(),
            ]
        })
        .collect();
    sink.csv("estimates.csv", &headers(&FAMILY_COLUMNS), &rows)?;
    let mut failures = Vec::new();
    if let Some(k) = cont.failed_stage {
        failures.push(format!("stage {k} did not converge: {}", cont.failure.clone().unwrap_or_default()));
    }
    if c.check {
        for (k, t) in &tail_checks {
            if !t.passes {
                failures.push(format!("{k}: last-three max {} exceeds twice the median {}", t.max_last_three, t.median));
            }
        }
    }
    sink.json("estimates.json", &FamilyEstimates { dx: spec.dx, stages, tail_checks })?;
    if failures.is_empty() { Ok(()) } else { Err(CliError::Failed(failures)) }
}

/// A surface spec gives per-point tables; a problem spec (with `k_field`),
/// or no spec at all, runs the continuation family.
pub fn estimates(c: &Common) -> Result<(), CliError> {
    let Some(path) = &c.spec else {
        return family_estimates(c, SolveSpec::default_family().resolve(c)?);
    };
    let value: serde_json::Value = read_json(path)?;
    if value.get("k_field").is_some() {
        let spec: SolveSpec = serde_json::from_value(value).map_err(|e| CliError::Usage(format!("malformed spec: {e}")))?;
        return family_estimates(c, spec.resolve(c)?);
    }
    let spec: SurfaceSpec = serde_json::from_value(value).map_err(|e| CliError::Usage(format!("malformed spec: {e}")))?;
    match spec.build().map_err(|e| CliError::Usage(e.to_string()))? {
        Surface::Halfspace(g) => graph_estimates(c, &g),
        Surface::Ball(b) => ball_estimates(c, &b),
    }
}

/// Prints one line per criterion; with `--out`, writes `verify.json` and
/// `verify.csv` (`id, name, passed`).
pub fn verify_all(c: &Common) -> Result<(), CliError> {
    let sink = Sink::new(c.out.as_deref())?;
    let report = verification::run_suite(c.seed);
    for cr in &report.criteria {
        println!("{}", cr.line());
    }
    if c.out.is_some() {
        sink.json("verify.json", &report)?;
        let rows: Vec<Vec<String>> = report
            .criteria
            .iter()
            .map(|cr| vec![cr.id.to_string(), cr.name.clone(), cr.passed.to_string()])
            .collect();
        sink.csv("verify.csv", &headers(&["id", "name", "passed"]), &rows)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed(report.criteria.iter().filter(|c| !c.passed).map(|c| c.line()).collect()))
    }
}
