//! Damped Newton solver for `det ρ_ij = K (1 + |∇u|²)²` on a disc, with
//! `ρ = -(u² + |x|²)/2`, on a uniform masked grid.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::AnalyticExpr;
use crate::fd::Stencil;
use crate::halfspace::{report_from_derivs, Orientation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Constant(f64),
    /// Trace of a reference height on the boundary nodes.
    Trace(AnalyticExpr),
}

/// How cut nodes next to the circle carry the boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRows {
    /// `u = g(node)`; needs `g` defined off the circle and consistent with
    /// the solution there (a manufactured trace).
    Nodal,
    /// Quadratic extrapolation along a grid line to the circle.
    #[default]
    Extrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MAProblem {
    pub radius: f64,
    pub k_field: AnalyticExpr,
    pub boundary: Boundary,
    #[serde(default)]
    pub boundary_rows: BoundaryRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<AnalyticExpr>,
}

impl MAProblem {
    pub fn new(radius: f64, k_field: AnalyticExpr, boundary: Boundary) -> MAProblem {
        MAProblem { radius, k_field, boundary, boundary_rows: BoundaryRows::Extrapolated, reference: None }
    }

    /// Cap `u = 2 + √(1 - |x|²)` with `K ≡ 4` on the disc of radius 0.6,
    /// nodal boundary data and the cap as reference.
    pub fn sphere_cap_study() -> MAProblem {
        let cap = 2.0 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt();
        MAProblem {
            radius: 0.6,
            k_field: AnalyticExpr::Const(4.0),
            boundary: Boundary::Trace(cap.clone()),
            boundary_rows: BoundaryRows::Nodal,
            reference: Some(cap),
        }
    }

    fn boundary_value(&self, x: [f64; 2]) -> Result<f64> {
        match &self.boundary {
            Boundary::Constant(c) => Ok(*c),
            Boundary::Trace(e) => e.value_at(&x),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::Invalid(format!("disc radius must be positive, got {}", self.radius)));
        }
        if let Boundary::Constant(c) = self.boundary {
            if !(c > 0.0) {
                return Err(Error::Invalid(format!("boundary height must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Inactive,
    Boundary,
    Interior,
}

/// Tensor grid over `[-ℓ, ℓ]²`, masked to the disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub radius: f64,
    pub dx: f64,
    pub n: usize,
    pub kind: Vec<NodeKind>,
}

impl Grid {
    pub fn new(radius: f64, dx: f64) -> Result<Grid> {
        if !(dx > 0.0) || dx > radius {
            return Err(Error::Invalid(format!("grid spacing {dx} is not in (0, {radius}]")));
        }
        let half = (radius / dx).round() as usize;
        if half > 400 {
            return Err(Error::Invalid(format!("grid spacing {dx} gives too many nodes")));
        }
        let n = 2 * half + 1;
        let mut g = Grid { radius, dx, n, kind: vec![NodeKind::Inactive; n * n] };
        let r2 = radius * radius * (1.0 + 1e-12);
        for j in 0..n {
            for i in 0..n {
                let [x, y] = g.coord(i, j);
                if x * x + y * y <= r2 {
                    g.kind[j * n + i] = NodeKind::Boundary;
                }
            }
        }
        let active = g.kind.clone();
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let ok = (-1..=1).all(|dj: i64| {
                    (-1..=1).all(|di: i64| {
                        active[(j as i64 + dj) as usize * n + (i as i64 + di) as usize] != NodeKind::Inactive
                    })
                });
                if ok {
                    g.kind[j * n + i] = NodeKind::Interior;
                }
            }
        }
        Ok(g)
    }

    pub fn coord(&self, i: usize, j: usize) -> [f64; 2] {
        let half = (self.n / 2) as f64;
        [(i as f64 - half) * self.dx, (j as f64 - half) * self.dx]
    }

    pub fn node_coord(&self, k: usize) -> [f64; 2] {
        self.coord(k % self.n, k / self.n)
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kind.len()).filter(|&k| self.kind[k] != NodeKind::Inactive)
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.kind.len()).filter(|&k| self.kind[k] == NodeKind::Interior)
    }

    /// Whether the `(2w+1)²` block around `k` is active.
    pub fn block_active(&self, k: usize, w: usize) -> bool {
        let (i, j) = ((k % self.n) as i64, (k / self.n) as i64);
        let (w, n) = (w as i64, self.n as i64);
        (-w..=w).all(|dj| {
            (-w..=w).all(|di| {
                let (a, b) = (i + di, j + dj);
                a >= 0 && b >= 0 && a < n && b < n && self.kind[(b * n + a) as usize] != NodeKind::Inactive
            })
        })
    }
}

/// Centred differences at an interior node.
#[derive(Debug, Clone, Copy)]
struct Local {
    u: f64,
    ux: f64,
    uy: f64,
    uxx: f64,
    uyy: f64,
    uxy: f64,
}

fn local(grid: &Grid, u: &[f64], k: usize) -> Local {
    let n = grid.n;
    let h = grid.dx;
    let (e, w, nn, s) = (u[k + 1], u[k - 1], u[k + n], u[k - n]);
    Local {
        u: u[k],
        ux: (e - w) / (2.0 * h),
        uy: (nn - s) / (2.0 * h),
        uxx: (e - 2.0 * u[k] + w) / (h * h),
        uyy: (nn - 2.0 * u[k] + s) / (h * h),
        uxy: (u[k + n + 1] - u[k - n + 1] - u[k + n - 1] + u[k - n - 1]) / (4.0 * h * h),
    }
}

fn rho_hess(l: &Local) -> (f64, f64, f64) {
    (
        -(l.u * l.uxx + l.ux * l.ux + 1.0),
        -(l.u * l.uyy + l.uy * l.uy + 1.0),
        -(l.u * l.uxy + l.ux * l.uy),
    )
}

fn definite(r11: f64, r22: f64, r12: f64) -> bool {
    r11 > 0.0 && r22 > 0.0 && r11 * r22 - r12 * r12 > 0.0
}

struct Discrete {
    grid: Grid,
    k_eff: Vec<f64>,
    bvals: Vec<f64>,
    /// Boundary rows: quadratic extrapolation from `B` and two inward nodes
    /// on a grid line to the circle point `q`, set equal to `g(q)`.
    bc: Vec<[(usize, f64); 3]>,
    /// Unknown index of each active node.
    index: Vec<usize>,
    nodes: Vec<usize>,
}

impl Discrete {
    fn new(prob: &MAProblem, dx: f64, shift: f64) -> Result<Discrete> {
        prob.validate()?;
        if !(shift >= 0.0) {
            return Err(Error::Invalid(format!("shift must be nonnegative, got {shift}")));
        }
        let grid = Grid::new(prob.radius, dx)?;
        let mut k_eff = vec![0.0; grid.kind.len()];
        let mut bvals = vec![0.0; grid.kind.len()];
        let mut index = vec![usize::MAX; grid.kind.len()];
        let mut bc = vec![[(0, 0.0); 3]; grid.kind.len()];
        let nodes: Vec<usize> = grid.active().collect();
        for (m, &k) in nodes.iter().enumerate() {
            index[k] = m;
            let x = grid.node_coord(k);
            match grid.kind[k] {
                NodeKind::Interior => {
                    let kv = prob.k_field.value_at(&x)?;
                    if kv < 0.0 {
                        return Err(Error::Invalid(format!("K is negative at {x:?}")));
                    }
                    k_eff[k] = kv + shift;
                    if !(k_eff[k] > 0.0) {
                        return Err(Error::Precondition(format!("K + shift vanishes at {x:?}")));
                    }
                }
                NodeKind::Boundary => {
                    let ax = if x[0].abs() >= x[1].abs() { 0 } else { 1 };
                    let (along, across) = (x[ax], x[1 - ax]);
                    if along == 0.0 || prob.boundary_rows == BoundaryRows::Nodal {
                        bc[k] = [(k, 1.0), (k, 0.0), (k, 0.0)];
                        bvals[k] = prob.boundary_value(x)?;
                    } else {
                        let theta = (prob.radius * prob.radius - across * across).max(0.0).sqrt() - along.abs();
                        let mut q = x;
                        q[ax] += along.signum() * theta;
                        let stride = if ax == 0 { 1 } else { grid.n } as i64;
                        let step = along.signum() as i64 * stride;
                        let (i1, i2) = ((k as i64 - step) as usize, (k as i64 - 2 * step) as usize);
                        let t = theta / dx;
                        bc[k] = if grid.kind.get(i2).is_some_and(|&kd| kd != NodeKind::Inactive) {
                            [(k, (t + 1.0) * (t + 2.0) / 2.0), (i1, -t * (t + 2.0)), (i2, t * (t + 1.0) / 2.0)]
                        } else {
                            [(k, 1.0 + t), (i1, -t), (i1, 0.0)]
                        };
                        bvals[k] = prob.boundary_value(q)?;
                    }
                    if !(bvals[k] > 0.0) {
                        return Err(Error::Invalid(format!("boundary height is not positive at {x:?}")));
                    }
                }
                NodeKind::Inactive => {}
            }
        }
        Ok(Discrete { grid, k_eff, bvals, bc, index, nodes })
    }

    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut f = vec![0.0; self.nodes.len()];
        for (m, &k) in self.nodes.iter().enumerate() {
            f[m] = match self.grid.kind[k] {
                NodeKind::Boundary => {
                    self.bc[k].iter().map(|&(i, w)| w * u[i]).sum::<f64>() - self.bvals[k]
                }
                _ => {
                    let l = local(&self.grid, u, k);
                    let (r11, r22, r12) = rho_hess(&l);
                    if !definite(r11, r22, r12) || !(l.u > 0.0) {
                        return Err(Error::Definiteness { node: k });
                    }
                    let p2 = 1.0 + l.ux * l.ux + l.uy * l.uy;
                    (r11 * r22 - r12 * r12).ln() - (self.k_eff[k] * p2 * p2).ln()
                }
            };
        }
        Ok(f)
    }

    fn jacobian(&self, u: &[f64]) -> Vec<Triplet<usize, usize, f64>> {
        let n = self.grid.n;
        let h = self.grid.dx;
        let mut t = Vec::with_capacity(self.nodes.len() * 9);
        for (m, &k) in self.nodes.iter().enumerate() {
            if self.grid.kind[k] == NodeKind::Boundary {
                for &(i, w) in &self.bc[k] {
                    if w != 0.0 {
                        t.push(Triplet::new(m, self.index[i], w));
                    }
                }
                continue;
            }
            let l = local(&self.grid, u, k);
            let (r11, r22, r12) = rho_hess(&l);
            let det = r11 * r22 - r12 * r12;
            let (f11, f22, f12) = (r22 / det, r11 / det, -2.0 * r12 / det);
            let p2 = 1.0 + l.ux * l.ux + l.uy * l.uy;
            let a_c = -f11 * l.uxx - f22 * l.uyy - f12 * l.uxy;
            let a_xx = -f11 * l.u;
            let a_yy = -f22 * l.u;
            let a_xy = -f12 * l.u;
            let a_x = -2.0 * f11 * l.ux - f12 * l.uy - 4.0 * l.ux / p2;
            let a_y = -2.0 * f22 * l.uy - f12 * l.ux - 4.0 * l.uy / p2;
            let h2 = h * h;
            let entries = [
                (k, a_c - 2.0 * a_xx / h2 - 2.0 * a_yy / h2),
                (k + 1, a_xx / h2 + a_x / (2.0 * h)),
                (k - 1, a_xx / h2 - a_x / (2.0 * h)),
                (k + n, a_yy / h2 + a_y / (2.0 * h)),
                (k - n, a_yy / h2 - a_y / (2.0 * h)),
                (k + n + 1, a_xy / (4.0 * h2)),
                (k + n - 1, -a_xy / (4.0 * h2)),
                (k - n + 1, -a_xy / (4.0 * h2)),
                (k - n - 1, a_xy / (4.0 * h2)),
            ];
            for (node, v) in entries {
                t.push(Triplet::new(m, self.index[node], v));
            }
        }
        t
    }

    fn solve_linear(&self, trips: &[Triplet<usize, usize, f64>], rhs: &[f64]) -> Result<Vec<f64>> {
        let dim = self.nodes.len();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, trips)
            .map_err(|e| Error::Linear(format!("{e:?}")))?;
        let lu = a.sp_lu().map_err(|e| Error::Linear(format!("{e:?}")))?;
        let mut b = Mat::<f64>::from_fn(dim, 1, |i, _| rhs[i]);
        lu.solve_in_place(b.as_mut());
        let out: Vec<f64> = (0..dim).map(|i| b[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Linear("singular Jacobian".into()));
        }
        Ok(out)
    }

    /// Solves `Δρ = 2√K_eff` with the boundary trace of `ρ` and maps back
    /// to `u = √(-2ρ - |x|²)`.
    fn poisson_start(&self, boundary: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n;
        let h2 = self.grid.dx * self.grid.dx;
        let mut trips = Vec::new();
        let mut rhs = vec![0.0; self.nodes.len()];
        for (m, &k) in self.nodes.iter().enumerate() {
            let x = self.grid.node_coord(k);
            let r2 = x[0] * x[0] + x[1] * x[1];
            if self.grid.kind[k] == NodeKind::Boundary {
                trips.push(Triplet::new(m, m, 1.0));
                rhs[m] = -(boundary[k] * boundary[k] + r2) / 2.0;
            } else {
                trips.push(Triplet::new(m, m, -4.0 / h2));
                for nb in [k + 1, k - 1, k + n, k - n] {
                    trips.push(Triplet::new(m, self.index[nb], 1.0 / h2));
                }
                rhs[m] = 2.0 * self.k_eff[k].sqrt();
            }
        }
        let rho = self.solve_linear(&trips, &rhs)?;
        let mut u = vec![0.0; self.grid.kind.len()];
        for (m, &k) in self.nodes.iter().enumerate() {
            let x = self.grid.node_coord(k);
            let v = -2.0 * rho[m] - x[0] * x[0] - x[1] * x[1];
            if !(v > 0.0) {
                return Err(Error::BadInitialization(format!("initial height is not positive at node {k}")));
            }
            u[k] = if self.grid.kind[k] == NodeKind::Boundary { boundary[k] } else { v.sqrt() };
        }
        Ok(u)
    }

    /// Sphere cap `h + √(r² - |x|²)` with `h/r = √K̄` (mean of `K_eff`) and
    /// mean boundary height; it has a positive definite `Hess ρ` throughout.
    fn cap_start(&self) -> Result<Vec<f64>> {
        let inner: Vec<usize> = self.grid.interior().collect();
        let kbar = inner.iter().map(|&k| self.k_eff[k]).sum::<f64>() / inner.len().max(1) as f64;
        let kappa = kbar.sqrt();
        let bnodes: Vec<usize> = self.nodes.iter().copied().filter(|&k| self.grid.kind[k] == NodeKind::Boundary).collect();
        let bbar = bnodes.iter().map(|&k| self.bvals[k]).sum::<f64>() / bnodes.len() as f64;
        let ell = bnodes
            .iter()
            .map(|&k| {
                let x = self.grid.node_coord(k);
                (x[0] * x[0] + x[1] * x[1]).sqrt()
            })
            .sum::<f64>()
            / bnodes.len() as f64;
        let height = |r: f64| kappa * r + (r * r - ell * ell).max(0.0).sqrt();
        if !(kappa > 0.0) || height(ell) > bbar {
            return Err(Error::BadInitialization("no cap fits the boundary data".into()));
        }
        let (mut lo, mut hi) = (ell, ell + bbar);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if height(mid) < bbar { lo = mid } else { hi = mid }
        }
        let r = 0.5 * (lo + hi).max(self.grid.radius * (1.0 + 1e-9));
        let r = r.max(self.grid.radius * 1.0000001);
        let h = kappa * r;
        let mut u = vec![0.0; self.grid.kind.len()];
        for &k in &self.nodes {
            let x = self.grid.node_coord(k);
            u[k] = h + (r * r - x[0] * x[0] - x[1] * x[1]).sqrt();
        }
        Ok(u)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
    pub damping: Vec<f64>,
    /// Set when the supplied start was outside the definiteness cone and
    /// was replaced by the Poisson start.
    pub reinitialized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularization {
    CurvatureShift,
    GeometricLift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub grid: Grid,
    /// Heights on the full tensor grid; zero at inactive nodes.
    pub u: Vec<f64>,
    pub eps: f64,
    pub regularization: Regularization,
    pub newton_stats: NewtonStats,
}

impl GridSolution {
    pub fn sup_error(&self, reference: &AnalyticExpr) -> Result<f64> {
        let mut e: f64 = 0.0;
        for k in self.grid.active() {
            e = e.max((self.u[k] - reference.value_at(&self.grid.node_coord(k))?).abs());
        }
        Ok(e)
    }

    /// Rows `(x1, x2, u)` over active nodes.
    pub fn rows(&self) -> Vec<[f64; 3]> {
        self.grid
            .active()
            .map(|k| {
                let x = self.grid.node_coord(k);
                [x[0], x[1], self.u[k]]
            })
            .collect()
    }
}

pub fn residual(prob: &MAProblem, dx: f64, shift: f64, u: &[f64]) -> Result<Vec<f64>> {
    Discrete::new(prob, dx, shift)?.residual(u)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton iteration from `u0` (full-grid heights), or from the
/// Poisson start when `u0` is `None` or not admissible.
pub fn newton_solve(prob: &MAProblem, dx: f64, shift: f64, u0: Option<&[f64]>, tol: f64) -> Result<GridSolution> {
    let disc = Discrete::new(prob, dx, shift)?;
    let grid = disc.grid.clone();
    let mut stats = NewtonStats::default();

    let boundary: Vec<f64> = match u0 {
        Some(v) if v.len() == grid.kind.len() => {
            if grid.active().any(|k| !(v[k] > 0.0)) {
                return Err(Error::Precondition("initial height must be positive".into()));
            }
            grid.active()
                .fold(vec![0.0; grid.kind.len()], |mut b, k| {
                    b[k] = if grid.kind[k] == NodeKind::Boundary { disc.bvals[k] } else { v[k] };
                    b
                })
        }
        Some(v) => return Err(Error::DimMismatch { expected: grid.kind.len(), got: v.len() }),
        None => disc.bvals.clone(),
    };
    let mut u = boundary.clone();
    let mut f = match (u0, disc.residual(&u)) {
        (Some(_), Ok(f)) => f,
        _ => {
            stats.reinitialized = u0.is_some();
            let poisson = disc.poisson_start(&disc.bvals).and_then(|p| disc.residual(&p).map(|f| (p, f)));
            let (start, f) = match poisson {
                Ok(pf) => pf,
                Err(_) => {
                    let cap = disc.cap_start()?;
                    let f = disc
                        .residual(&cap)
                        .map_err(|e| Error::BadInitialization(format!("cap start failed: {e}")))?;
                    (cap, f)
                }
            };
            u = start;
            f
        }
    };

    let mut best = (l2(&f), u.clone());
    for it in 0..100 {
        stats.iterations = it;
        stats.residual = sup(&f);
        if stats.residual <= tol {
            return Ok(GridSolution { grid, u, eps: shift, regularization: Regularization::CurvatureShift, newton_stats: stats });
        }
        let trips = disc.jacobian(&u);
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = disc.solve_linear(&trips, &rhs)?;
        let norm0 = l2(&f);
        let mut t = 1.0;
        loop {
            let mut trial = u.clone();
            for (m, &k) in disc.nodes.iter().enumerate() {
                trial[k] += t * step[m];
            }
            if let Ok(ft) = disc.residual(&trial) {
                if l2(&ft) <= (1.0 - 1e-4 * t) * norm0 || sup(&ft) <= tol {
                    u = trial;
                    f = ft;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::Nonconvergence {
                    reason: "damping underflow".into(),
                    residual: best.0,
                    iterations: it,
                    best: Some(best.1),
                });
            }
        }
        stats.damping.push(t);
        let n2 = l2(&f);
        if n2 < best.0 {
            best = (n2, u.clone());
        }
    }
    Err(Error::Nonconvergence {
        reason: "iteration limit".into(),
        residual: sup(&f),
        iterations: 100,
        best: Some(best.1),
    })
}

/// Per-stage curvature summary recomputed from the discrete solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub shift: f64,
    pub iterations: usize,
    pub residual: f64,
    pub max_h_mean: f64,
    pub max_h_trace: f64,
    pub min_k_ext: f64,
    pub max_k_ext: f64,
    /// `sup |K_ext - K_eff| / Δx²` over nodes with a five-point block.
    pub curvature_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continuation {
    pub stages: Vec<GridSolution>,
    pub reports: Vec<StageReport>,
    /// Index of the first stage that did not converge.
    pub failed_stage: Option<usize>,
    pub failure: Option<String>,
}

pub fn continuation(prob: &MAProblem, dx: f64, shifts: &[f64], tol: f64) -> Result<Continuation> {
    if shifts.is_empty() || shifts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Invalid("shifts must be a nonempty strictly decreasing sequence".into()));
    }
    let mut out = Continuation { stages: Vec::new(), reports: Vec::new(), failed_stage: None, failure: None };
    for (i, &s) in shifts.iter().enumerate() {
        let warm = out.stages.last().map(|g: &GridSolution| g.u.clone());
        match newton_solve(prob, dx, s, warm.as_deref(), tol) {
            Ok(sol) => {
                out.reports.push(stage_report(prob, &sol)?);
                out.stages.push(sol);
            }
            Err(e) => {
                out.failed_stage = Some(i);
                out.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(out)
}

/// Derivatives of `u` at node `k` up to second order.
pub fn node_derivs(grid: &Grid, u: &[f64], k: usize, stencil: Stencil) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let n = grid.n;
    let h = grid.dx;
    let four = stencil == Stencil::Fourth && grid.block_active(k, 2);
    let at = |di: i64, dj: i64| u[(k as i64 + dj * n as i64 + di) as usize];
    let d1 = |dir: (i64, i64)| {
        if four {
            (-at(2 * dir.0, 2 * dir.1) + 8.0 * at(dir.0, dir.1) - 8.0 * at(-dir.0, -dir.1) + at(-2 * dir.0, -2 * dir.1))
                / (12.0 * h)
        } else {
            (at(dir.0, dir.1) - at(-dir.0, -dir.1)) / (2.0 * h)
        }
    };
    let d2 = |dir: (i64, i64)| {
        if four {
            (-at(2 * dir.0, 2 * dir.1) + 16.0 * at(dir.0, dir.1) - 30.0 * u[k] + 16.0 * at(-dir.0, -dir.1)
                - at(-2 * dir.0, -2 * dir.1))
                / (12.0 * h * h)
        } else {
            (at(dir.0, dir.1) - 2.0 * u[k] + at(-dir.0, -dir.1)) / (h * h)
        }
    };
    let uxy = if four {
        let c = |a: i64, b: i64| at(a, b) - at(a, -b) - at(-a, b) + at(-a, -b);
        let w = [8.0 / 12.0, -1.0 / 12.0];
        let mut acc = 0.0;
        for a in 1..=2 {
            for b in 1..=2 {
                acc += w[a - 1] * w[b - 1] * c(a as i64, b as i64);
            }
        }
        acc / (h * h)
    } else {
        (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h)
    };
    let g = vec![d1((1, 0)), d1((0, 1))];
    let hs = vec![vec![d2((1, 0)), uxy], vec![uxy, d2((0, 1))]];
    (u[k], g, hs)
}

pub fn stage_report(prob: &MAProblem, sol: &GridSolution) -> Result<StageReport> {
    let grid = &sol.grid;
    let mut rep = StageReport {
        shift: sol.eps,
        iterations: sol.newton_stats.iterations,
        residual: sol.newton_stats.residual,
        max_h_mean: f64::NEG_INFINITY,
        max_h_trace: f64::NEG_INFINITY,
        min_k_ext: f64::INFINITY,
        max_k_ext: f64::NEG_INFINITY,
        curvature_constant: 0.0,
    };
    for k in grid.interior() {
        let x = grid.node_coord(k);
        let (v, gr, hs) = node_derivs(grid, &sol.u, k, Stencil::Second);
        let r = report_from_derivs(&x, v, &gr, &hs, Orientation::Downward)?;
        rep.max_h_mean = rep.max_h_mean.max(r.h_mean);
        rep.max_h_trace = rep.max_h_trace.max(r.h_trace);
        rep.min_k_ext = rep.min_k_ext.min(r.k_ext);
        rep.max_k_ext = rep.max_k_ext.max(r.k_ext);
        if grid.block_active(k, 2) {
            let (v, gr, hs) = node_derivs(grid, &sol.u, k, Stencil::Fourth);
            let r = report_from_derivs(&x, v, &gr, &hs, Orientation::Downward)?;
            let keff = prob.k_field.value_at(&x)? + if sol.regularization == Regularization::CurvatureShift { sol.eps } else { 0.0 };
            rep.curvature_constant = rep.curvature_constant.max((r.k_ext - keff).abs() / (grid.dx * grid.dx));
        }
    }
    Ok(rep)
}

/// Geometric lift `u ↦ u + ε` of a solved surface.
pub fn lift(sol: &GridSolution, eps: f64) -> GridSolution {
    let mut out = sol.clone();
    for k in sol.grid.active() {
        out.u[k] += eps;
    }
    out.eps = eps;
    out.regularization = Regularization::GeometricLift;
    out
}

/// Powers `2⁰, 2⁻¹, .., 2⁻ᵐ`.
pub fn halving_shifts(m: usize) -> Vec<f64> {
    (0..=m).map(|k| 0.5f64.powi(k as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::c;

    fn cap_problem() -> MAProblem {
        MAProblem::sphere_cap_study()
    }

    #[test]
    fn exact_cap_residual_is_second_order() {
        let p = cap_problem();
        let r = |dx: f64| {
            let g = Grid::new(0.6, dx).unwrap();
            let cap = p.reference.clone().unwrap();
            let u: Vec<f64> = (0..g.kind.len())
                .map(|k| if g.kind[k] == NodeKind::Inactive { 0.0 } else { cap.value_at(&g.node_coord(k)).unwrap() })
                .collect();
            sup(&residual(&p, dx, 0.0, &u).unwrap())
        };
        let ratio = r(0.05) / r(0.025);
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn flat_start_is_not_definite() {
        let p = MAProblem::new(0.5, c(1.0), Boundary::Constant(2.0));
        let g = Grid::new(0.5, 0.1).unwrap();
        let u = vec![2.0; g.kind.len()];
        assert!(matches!(residual(&p, 0.1, 0.0, &u), Err(Error::Definiteness { .. })));
    }

    #[test]
    fn cap_solve_converges() {
        let p = cap_problem();
        let flat = Grid::new(0.6, 0.05).unwrap();
        let u0 = vec![2.8; flat.kind.len()];
        let sol = newton_solve(&p, 0.05, 0.0, Some(&u0), 1e-10).unwrap();
        assert!(sol.newton_stats.reinitialized);
        assert!(sol.sup_error(p.reference.as_ref().unwrap()).unwrap() < 1e-3);
    }
}

#[cfg(test)]
mod jac_tests {
    use super::*;
    use crate::expr::{c, AnalyticExpr};

    #[test]
    fn newton_direction_matches_linearization() {
        let cap = 2.3 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt();
        let p = MAProblem::new(0.6, c(4.0), Boundary::Trace(cap));
        let d = Discrete::new(&p, 0.05, 0.0).unwrap();
        let u = d.cap_start().unwrap();
        let f = d.residual(&u).unwrap();
        let step = d.solve_linear(&d.jacobian(&u), &f.iter().map(|v| -v).collect::<Vec<_>>()).unwrap();
        let eps = 1e-6;
        let mut t = u.clone();
        for (m, &k) in d.nodes.iter().enumerate() { t[k] += eps * step[m]; }
        let ft = d.residual(&t).unwrap();
        let worst = (0..f.len()).map(|m| ((ft[m] - f[m]) / eps + f[m]).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-4, "{worst}");
    }
}
