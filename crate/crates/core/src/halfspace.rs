//! Graphs `x_{n+1} = u(x)` in the upper half-space model.
//!
//! With the downward normal `ν = (∇u, -1)/w`, `w = √(1+|∇u|²)`:
//!
//! * `g_ij = (δ_ij + u_i u_j)/u²`
//! * `h_ij = -(δ_ij + u_i u_j + u u_ij)/(u² w)`
//!
//! and the Euclidean counterparts are `g̃ = u² g`, `h̃_ij = -u_ij/w`. The
//! upward normal flips the sign of both second fundamental forms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::AnalyticExpr;
use crate::fd::{self, Stencil};
use crate::jet::Jet;
use crate::jetmat::{self, JetMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[default]
    Downward,
    Upward,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Downward => 1.0,
            Orientation::Upward => -1.0,
        }
    }

    pub fn flip(self) -> Orientation {
        match self {
            Orientation::Downward => Orientation::Upward,
            Orientation::Upward => Orientation::Downward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Disc { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn disc(dim: usize, radius: f64) -> Domain {
        Domain::Disc { center: vec![0.0; dim], radius }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Disc { center, .. } => center.len(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Disc { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                r2 <= radius * radius * (1.0 + 1e-12)
            }
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b),
        }
    }

    /// Uniform sample from the domain shrunk by `shrink` (in `(0, 1]`).
    pub fn sample<R: rand::Rng>(&self, rng: &mut R, shrink: f64) -> Vec<f64> {
        match self {
            Domain::Disc { center, radius } => loop {
                let p: Vec<f64> = center.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
                let r2: f64 = p.iter().map(|v| v * v).sum();
                if r2 <= 1.0 {
                    return p.iter().zip(center).map(|(v, c)| c + v * radius * shrink).collect();
                }
            },
            Domain::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| {
                    let mid = 0.5 * (a + b);
                    let half = 0.5 * (b - a) * shrink;
                    rng.random_range(mid - half..=mid + half)
                })
                .collect(),
        }
    }
}

/// Height data that is not a closed-form expression.
pub trait HeightSource: Send + Sync {
    fn dim(&self) -> usize;
    fn jet(&self, x: &[f64], order: usize) -> Result<Jet>;
    fn describe(&self) -> String;
}

#[derive(Clone)]
pub enum Height {
    Analytic(AnalyticExpr),
    Source(Arc<dyn HeightSource>),
}

impl fmt::Debug for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Analytic(e) => write!(f, "Analytic({e})"),
            Height::Source(s) => write!(f, "Source({})", s.describe()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HalfspaceGraph {
    pub dim: usize,
    pub height: Height,
    pub domain: Domain,
    pub orientation: Orientation,
}

impl HalfspaceGraph {
    pub fn analytic(dim: usize, u: AnalyticExpr, domain: Domain) -> HalfspaceGraph {
        HalfspaceGraph { dim, height: Height::Analytic(u), domain, orientation: Orientation::Downward }
    }

    pub fn with_orientation(mut self, o: Orientation) -> HalfspaceGraph {
        self.orientation = o;
        self
    }

    /// Jet of `u` at `x`, checking the domain and positivity.
    pub fn u_jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch { expected: self.dim, got: x.len() });
        }
        let j = match &self.height {
            Height::Analytic(e) => e.lift(x, order)?,
            Height::Source(s) => s.jet(x, order)?,
        };
        if !(j.value() > 0.0) {
            return Err(Error::InvalidGraph(format!("u = {} <= 0 at {:?}", j.value(), x)));
        }
        Ok(j)
    }

    pub fn u(&self, x: &[f64]) -> Result<f64> {
        Ok(self.u_jet(x, 0)?.value())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Forms {
    pub u: f64,
    pub w: f64,
    pub nu_vertical: f64,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub g_euc: Vec<Vec<f64>>,
    pub h_euc: Vec<Vec<f64>>,
    /// `max |h - (h̃/u + ν^{n+1} g̃/u²)|` with `h` taken from the ambient
    /// covariant derivative.
    pub second_form_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub u: f64,
    pub w: f64,
    pub nu_vertical: f64,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub g_euc: Vec<Vec<f64>>,
    pub h_euc: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
    pub kappa_euc: Vec<f64>,
    pub k_ext: f64,
    pub h_trace: f64,
    pub h_mean: f64,
    pub r_scalar: f64,
    pub k_intrinsic: Option<f64>,
}

fn forms_from_derivs(u: f64, grad: &[f64], hess: &[Vec<f64>], s: f64) -> Forms {
    let n = grad.len();
    let w = (1.0 + grad.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let nu = -s / w;
    let mut g = vec![vec![0.0; n]; n];
    let mut h = vec![vec![0.0; n]; n];
    let mut ge = vec![vec![0.0; n]; n];
    let mut he = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { 1.0 } else { 0.0 };
            ge[i][j] = d + grad[i] * grad[j];
            g[i][j] = ge[i][j] / (u * u);
            h[i][j] = -s * (ge[i][j] + u * hess[i][j]) / (u * u * w);
            he[i][j] = -s * hess[i][j] / w;
        }
    }

    // Second fundamental form from D_{X_i} X_j against n = u ν, using the
    // ambient Christoffels Γ^k_ab = (-δ_bk δ_a,top - δ_ak δ_b,top + δ_ab δ_k,top)/x_top.
    let top = n;
    let tangent = |i: usize| {
        let mut t = vec![0.0; n + 1];
        t[i] = 1.0;
        t[top] = grad[i];
        t
    };
    let mut normal: Vec<f64> = grad.iter().map(|v| s * u * v / w).collect();
    normal.push(-s * u / w);
    let mut resid: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let (xi, xj) = (tangent(i), tangent(j));
            let mut d = vec![0.0; n + 1];
            d[top] = hess[i][j];
            for (k, dk) in d.iter_mut().enumerate() {
                let mut acc = 0.0;
                for a in 0..=n {
                    for b in 0..=n {
                        let gam = (-((b == k && a == top) as i32 as f64) - ((a == k && b == top) as i32 as f64)
                            + ((a == b && k == top) as i32 as f64))
                            / u;
                        acc += gam * xi[a] * xj[b];
                    }
                }
                *dk += acc;
            }
            let h_cov: f64 = d.iter().zip(&normal).map(|(a, b)| a * b).sum::<f64>() / (u * u);
            let rhs = he[i][j] / u + nu * ge[i][j] / (u * u);
            resid = resid.max((h_cov - rhs).abs()).max((h_cov - h[i][j]).abs());
        }
    }

    Forms { u, w, nu_vertical: nu, g, h, g_euc: ge, h_euc: he, second_form_residual: resid }
}

fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| m[i][j])
}

/// Eigenvalues of `h v = κ g v`, ascending, via `L⁻¹ h L⁻ᵀ` with `g = L Lᵀ`.
pub fn generalized_eigenvalues(h: &[Vec<f64>], g: &[Vec<f64>]) -> Result<Vec<f64>> {
    let gm = to_dmatrix(g);
    let hm = to_dmatrix(h);
    let chol = gm
        .cholesky()
        .ok_or_else(|| Error::Degenerate("first fundamental form is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("singular Cholesky factor".into()))?;
    let c = &linv * hm * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn det(m: &[Vec<f64>]) -> f64 {
    to_dmatrix(m).determinant()
}

/// Curvature report from the 2-jet data of `u` at `x`.
pub fn report_from_derivs(
    x: &[f64],
    u: f64,
    grad: &[f64],
    hess: &[Vec<f64>],
    orientation: Orientation,
) -> Result<CurvatureReport> {
    if !(u > 0.0) {
        return Err(Error::InvalidGraph(format!("u = {u} <= 0 at {x:?}")));
    }
    let f = forms_from_derivs(u, grad, hess, orientation.sign());
    let kappa = generalized_eigenvalues(&f.h, &f.g)?;
    let kappa_euc = generalized_eigenvalues(&f.h_euc, &f.g_euc)?;
    let n = grad.len();
    let h_trace: f64 = kappa.iter().sum();
    let r_scalar = h_trace * h_trace - kappa.iter().map(|k| k * k).sum::<f64>();
    let k_ext = det(&f.h) / det(&f.g);
    Ok(CurvatureReport {
        point: x.to_vec(),
        u,
        w: f.w,
        nu_vertical: f.nu_vertical,
        g: f.g,
        h: f.h,
        g_euc: f.g_euc,
        h_euc: f.h_euc,
        kappa,
        kappa_euc,
        k_ext,
        h_trace,
        h_mean: h_trace / n as f64,
        r_scalar,
        k_intrinsic: if n == 2 { Some(-1.0 + k_ext) } else { None },
    })
}

fn second_order(j: &Jet) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let n = j.dim();
    let grad = j.grad();
    let hess = (0..n).map(|a| (0..n).map(|b| j.der(&[a, b])).collect()).collect();
    (j.value(), grad, hess)
}

pub fn fundamental_forms(graph: &HalfspaceGraph, x: &[f64]) -> Result<Forms> {
    let j = graph.u_jet(x, 2)?;
    let (u, grad, hess) = second_order(&j);
    Ok(forms_from_derivs(u, &grad, &hess, graph.orientation.sign()))
}

pub fn curvature_report(graph: &HalfspaceGraph, x: &[f64]) -> Result<CurvatureReport> {
    let j = graph.u_jet(x, 2)?;
    let (u, grad, hess) = second_order(&j);
    report_from_derivs(x, u, &grad, &hess, graph.orientation)
}

/// Same report with `∇u`, `∇²u` from centred differences of step `dx`.
pub fn curvature_report_fd(graph: &HalfspaceGraph, x: &[f64], dx: f64, stencil: Stencil) -> Result<CurvatureReport> {
    let f = |p: &[f64]| graph.u(p);
    let (u, grad, hess) = fd::second_order_data(&f, x, dx, stencil)?;
    report_from_derivs(x, u, &grad, &hess, graph.orientation)
}

/// Induced hyperbolic geometry carried as jets, `order(u) - 2` deep.
pub struct JetGeometry {
    pub u: Jet,
    pub grad: Vec<Jet>,
    pub w: Jet,
    pub g: JetMatrix,
    pub ginv: JetMatrix,
    pub h: JetMatrix,
    /// Shape operator `g⁻¹h`.
    pub shape: JetMatrix,
    pub h_trace: Jet,
    pub h_mean: Jet,
    pub k_ext: Jet,
    pub r_scalar: Jet,
}

pub fn jet_geometry(u: &Jet, orientation: Orientation) -> Result<JetGeometry> {
    if u.order() < 2 {
        return Err(Error::OutOfOrder { requested: 2, order: u.order() });
    }
    let n = u.dim();
    let s = orientation.sign();
    let p = u.order() - 2;
    let grad: Vec<Jet> = (0..n).map(|i| u.deriv(i)).collect();
    let uu = u.truncate(p);
    let mut w2 = Jet::constant(n, p, 1.0);
    for gi in &grad {
        w2 += &gi.truncate(p).square();
    }
    let w = w2.sqrt()?;
    let u2inv = uu.square().recip()?;
    let coef = -s * (&u2inv * &w.recip()?);
    let mut g = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for i in 0..n {
        let mut grow = Vec::with_capacity(n);
        let mut hrow = Vec::with_capacity(n);
        for j in 0..n {
            let mut ge = (&grad[i] * &grad[j]).truncate(p);
            if i == j {
                ge += 1.0;
            }
            let uij = grad[i].deriv(j);
            grow.push(&ge * &u2inv);
            hrow.push(&(&ge + &(&uu * &uij)) * &coef);
        }
        g.push(grow);
        h.push(hrow);
    }
    let ginv = jetmat::inverse(&g)?;
    let shape = jetmat::matmul(&ginv, &h);
    let h_trace = jetmat::trace(&shape);
    let a2 = jetmat::trace(&jetmat::matmul(&shape, &shape));
    let r_scalar = h_trace.square() - a2;
    let k_ext = jetmat::det(&h)?.try_div(&jetmat::det(&g)?)?;
    let h_mean = &h_trace * (1.0 / n as f64);
    Ok(JetGeometry { u: uu, grad, w, g, ginv, h, shape, h_trace, h_mean, k_ext, r_scalar })
}

/// Hyperbolic/Euclidean comparison identities at `x`, keyed by identity.
pub fn comparison_residuals(graph: &HalfspaceGraph, x: &[f64], v: &AnalyticExpr) -> Result<BTreeMap<String, f64>> {
    comparison_residuals_perturbed(graph, x, v, 0.0)
}

/// As [`comparison_residuals`], with `delta` added to every hyperbolic
/// Christoffel symbol on the left-hand sides (a negative control).
pub fn comparison_residuals_perturbed(
    graph: &HalfspaceGraph,
    x: &[f64],
    v: &AnalyticExpr,
    delta: f64,
) -> Result<BTreeMap<String, f64>> {
    let n = graph.dim;
    let uj = graph.u_jet(x, 2)?;
    let vj = v.lift(x, 2)?;
    let s = graph.orientation.sign();
    let (u, ug, uh) = second_order(&uj);
    let (vv, vg, vh) = second_order(&vj);
    let forms = forms_from_derivs(u, &ug, &uh, s);
    let nu = forms.nu_vertical;

    // Hyperbolic Christoffels straight from g = g̃/u² and its derivatives.
    let geo = jet_geometry(&graph.u_jet(x, 3)?, graph.orientation)?;
    let ginv = jetmat::values(&geo.ginv);
    let dg = |i: usize, j: usize, k: usize| geo.g[i][j].der(&[k]);
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += 0.5 * ginv[k][l] * (dg(j, l, i) + dg(i, l, j) - dg(i, j, l));
                }
                gamma[k][i][j] = acc + delta;
            }
        }
    }

    let ge = &forms.g_euc;
    let geinv = to_dmatrix(ge).try_inverse().ok_or_else(|| Error::Degenerate("singular g̃".into()))?;
    let gei = |k: usize, l: usize| geinv[(k, l)];
    // Euclidean Christoffels of a graph: Γ̃^k_ij = g̃^{kl} u_l u_ij.
    let gamma_e = |k: usize, i: usize, j: usize| (0..n).map(|l| gei(k, l) * ug[l]).sum::<f64>() * uh[i][j];
    let quad = |a: &[f64], b: &[f64]| {
        let mut acc = 0.0;
        for k in 0..n {
            for l in 0..n {
                acc += gei(k, l) * a[k] * b[l];
            }
        }
        acc
    };
    let hyp_hess = |f0: &[f64], f2: &[Vec<f64>], i: usize, j: usize| {
        f2[i][j] - (0..n).map(|k| gamma[k][i][j] * f0[k]).sum::<f64>()
    };
    let euc_hess = |f0: &[f64], f2: &[Vec<f64>], i: usize, j: usize| {
        f2[i][j] - (0..n).map(|k| gamma_e(k, i, j) * f0[k]).sum::<f64>()
    };

    // 1/u and v/u through jets.
    let inv_u = uj.recip()?;
    let (_, iug, iuh) = second_order(&inv_u);
    let vu = vj.try_div(&uj)?;
    let (_, vug, vuh) = second_order(&vu);

    let grad_e_u2 = quad(&ug, &ug);
    let mut r = BTreeMap::new();
    let mut put = |name: &str, val: f64| {
        let e = r.entry(name.to_string()).or_insert(0.0f64);
        *e = e.max(val.abs());
    };
    put("second_form_comparison", forms.second_form_residual);

    let kappa = generalized_eigenvalues(&forms.h, &forms.g)?;
    let kappa_e = generalized_eigenvalues(&forms.h_euc, &forms.g_euc)?;
    for (k, ke) in kappa.iter().zip(&kappa_e) {
        put("principal_curvature_comparison", k - (u * ke + nu));
    }

    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let dkj = if k == j { 1.0 } else { 0.0 };
                let dik = if i == k { 1.0 } else { 0.0 };
                let gl: f64 = (0..n).map(|l| gei(k, l) * ug[l]).sum();
                let rhs = gamma_e(k, i, j) - (ug[i] * dkj + ug[j] * dik - gl * ge[i][j]) / u;
                put("christoffel_comparison", gamma[k][i][j] - rhs);
            }

            let lhs = hyp_hess(&vg, &vh, i, j);
            let rhs = euc_hess(&vg, &vh, i, j) + (ug[i] * vg[j] + ug[j] * vg[i] - quad(&ug, &vg) * ge[i][j]) / u;
            put("hessian_comparison", lhs - rhs);

            let lhs = hyp_hess(&ug, &uh, i, j);
            let rhs = euc_hess(&ug, &uh, i, j) + 2.0 * ug[i] * ug[j] / u - grad_e_u2 * ge[i][j] / u;
            put("height_hessian", lhs - rhs);

            let lhs_inv = hyp_hess(&iug, &iuh, i, j);
            let rhs = -euc_hess(&ug, &uh, i, j) / (u * u) + grad_e_u2 * ge[i][j] / (u * u * u);
            put("inverse_height_hessian", lhs_inv - rhs);

            let lhs = hyp_hess(&vug, &vuh, i, j);
            let rhs = vv * lhs_inv + euc_hess(&vg, &vh, i, j) / u - quad(&ug, &vg) * ge[i][j] / (u * u);
            put("quotient_hessian", lhs - rhs);

            put("euclidean_height_hessian", euc_hess(&ug, &uh, i, j) - forms.h_euc[i][j] * nu);

            let first = -nu * forms.h_euc[i][j] / (u * u) + (1.0 - nu * nu) * ge[i][j] / (u * u * u);
            let second = (forms.g[i][j] - nu * forms.h[i][j]) / u;
            put("inverse_height_forms", lhs_inv - first);
            put("inverse_height_forms", lhs_inv - second);
        }
    }
    put("euclidean_height_hessian", grad_e_u2 - (1.0 - nu * nu));
    Ok(r)
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoHessian {
    pub rho: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
    pub det: f64,
    pub k_ext: f64,
    pub w: f64,
    /// `|det ρ_ij - K_ext (1+|∇u|²)²|`.
    pub det_identity_residual: f64,
    /// `max |ρ_ij + (u u_ij + u_i u_j + δ_ij)|`.
    pub formula_residual: f64,
}

/// `ρ = -(|x|²+u²)/2` and its derivatives, for surfaces in `H³`.
pub fn rho_hessian(graph: &HalfspaceGraph, x: &[f64]) -> Result<RhoHessian> {
    if graph.dim != 2 {
        return Err(Error::Precondition(format!("rho Hessian identities need n = 2, got {}", graph.dim)));
    }
    let uj = graph.u_jet(x, 2)?;
    let rho = rho_jet(&uj, x);
    let (rv, rg, rh) = second_order(&rho);
    let (u, ug, uh) = second_order(&uj);
    let rep = report_from_derivs(x, u, &ug, &uh, Orientation::Downward)?;
    let d = rh[0][0] * rh[1][1] - rh[0][1] * rh[1][0];
    let mut formula: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            formula = formula.max((rh[i][j] + u * uh[i][j] + ug[i] * ug[j] + delta).abs());
        }
    }
    let w4 = rep.w.powi(4);
    Ok(RhoHessian {
        rho: rv,
        grad: rg,
        hess: rh,
        det: d,
        k_ext: rep.k_ext,
        w: rep.w,
        det_identity_residual: (d - rep.k_ext * w4).abs(),
        formula_residual: formula,
    })
}

/// `ρ = -(|x|² + u²)/2` as a jet of the same order as `u`, expanded at `x`.
pub fn rho_jet(u: &Jet, x: &[f64]) -> Jet {
    let mut acc = u.square();
    for (i, xi) in x.iter().enumerate() {
        acc += &Jet::variable(x.len(), u.order(), i, *xi).square();
    }
    acc * -0.5
}
