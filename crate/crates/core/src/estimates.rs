//! Estimate-side quantities: σ, Lσ, the Pogorelov quantities, the gradient
//! of the smaller principal curvature, the ball-model maximum-principle
//! margin and the scalar-curvature margin.
//!
//! Everything is built on `ρ = -(|x|² + u²)/2`, whose Hessian is positive
//! definite on the branch this module works on.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ball::BallPatch;
use crate::error::{Error, Result};
use crate::halfspace::{jet_geometry, rho_jet, Domain, HalfspaceGraph, JetGeometry};
use crate::jet::Jet;
use crate::jetmat::{self, JetMatrix};

struct RhoJets {
    /// `+1`, or `-1` when the Hessian was mirrored.
    sign: f64,
    hess: JetMatrix,
    inv: JetMatrix,
    third: Vec<Vec<Vec<Jet>>>,
}

fn rho_jets(u: &Jet, x: &[f64]) -> Result<RhoJets> {
    if u.dim() != 2 {
        return Err(Error::Precondition(format!("σ needs n = 2, got {}", u.dim())));
    }
    if u.order() < 3 {
        return Err(Error::OutOfOrder { requested: 3, order: u.order() });
    }
    let rho = rho_jet(u, x);
    let p = u.order() - 3;
    let hess: JetMatrix = (0..2).map(|i| (0..2).map(|j| rho.deriv(i).deriv(j)).collect()).collect();
    let hv = jetmat::values(&hess);
    let det = hv[0][0] * hv[1][1] - hv[0][1] * hv[1][0];
    if !(det > 0.0) {
        return Err(Error::Branch(format!("Hess ρ is not definite at {x:?}: {hv:?}")));
    }
    // A negative-definite Hessian (horosphere-type graphs seen from the
    // other side) is read through the mirror -ρ so that σ stays a sum of
    // squares.
    let sign = if hv[0][0] > 0.0 { 1.0 } else { -1.0 };
    let hess: JetMatrix = hess.into_iter().map(|r| r.into_iter().map(|e| e * sign).collect()).collect();
    let inv: JetMatrix = jetmat::inverse(&hess)?
        .into_iter()
        .map(|r| r.into_iter().map(|e| e.truncate(p)).collect())
        .collect();
    let third = (0..2)
        .map(|i| (0..2).map(|j| (0..2).map(|k| hess[i][j].deriv(k)).collect()).collect())
        .collect();
    Ok(RhoJets { sign, hess, inv, third })
}

/// `σ = ρ^{kl} ρ^{pq} ρ^{rs} ρ_kpr ρ_lqs` as a jet of order `order(u) - 3`.
pub fn sigma_jet(u: &Jet, x: &[f64]) -> Result<Jet> {
    let r = rho_jets(u, x)?;
    let mut acc = Jet::constant(2, u.order() - 3, 0.0);
    for k in 0..2 {
        for l in 0..2 {
            for p in 0..2 {
                for q in 0..2 {
                    let a = &r.inv[k][l] * &r.inv[p][q];
                    for s1 in 0..2 {
                        for s2 in 0..2 {
                            let t = &(&a * &r.inv[s1][s2]) * &(&r.third[k][p][s1] * &r.third[l][q][s2]);
                            acc += &t;
                        }
                    }
                }
            }
        }
    }
    Ok(acc)
}

pub fn sigma(graph: &HalfspaceGraph, x: &[f64]) -> Result<f64> {
    Ok(sigma_jet(&graph.u_jet(x, 3)?, x)?.value())
}

/// `Lσ = ρ^{ij} σ_ij + 4 u_i σ_i / ((1 + |∇u|²) u)` from a jet of order 5.
pub fn l_sigma_from_jet(u: &Jet, x: &[f64]) -> Result<f64> {
    if u.order() < 5 {
        return Err(Error::OutOfOrder { requested: 5, order: u.order() });
    }
    let s = sigma_jet(u, x)?;
    let r = rho_jets(u, x)?;
    let inv = jetmat::values(&r.inv);
    let ug = u.grad();
    let w2 = 1.0 + ug.iter().map(|v| v * v).sum::<f64>();
    let mut out = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            out += inv[i][j] * s.der(&[i, j]);
        }
        out += 4.0 * ug[i] * s.der(&[i]) / (w2 * u.value());
    }
    Ok(out)
}

pub fn l_sigma(graph: &HalfspaceGraph, x: &[f64]) -> Result<f64> {
    l_sigma_from_jet(&graph.u_jet(x, 5)?, x)
}

/// `√(g^{ij} f_i f_j)` for a jet `f` and the induced metric.
fn grad_norm(f: &Jet, geo: &JetGeometry) -> f64 {
    let ginv = jetmat::values(&geo.ginv);
    let g = f.grad();
    let mut s = 0.0;
    for i in 0..g.len() {
        for j in 0..g.len() {
            s += ginv[i][j] * g[i] * g[j];
        }
    }
    s.max(0.0).sqrt()
}

/// One row of the per-point estimate table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub x: Vec<f64>,
    pub k_ext: f64,
    pub h_mean: f64,
    pub h_trace: f64,
    pub sigma: f64,
    pub l_sigma: f64,
    pub k2_sigma: f64,
    pub k_grad_h_mean: f64,
    pub kappa1: Option<f64>,
    pub grad_kappa1: Option<f64>,
    pub r_scalar: f64,
    pub lap_r: f64,
}

/// Columns of [`EstimateRow`] in CSV order.
pub const ESTIMATE_COLUMNS: [&str; 13] = [
    "x1", "x2", "k_ext", "h_mean", "h_trace", "sigma", "l_sigma", "k2_sigma", "k_grad_h_mean", "kappa1",
    "grad_kappa1", "r_scalar", "lap_r",
];

impl EstimateRow {
    pub fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|f| f.to_string()).unwrap_or_default();
        vec![
            self.x[0].to_string(),
            self.x[1].to_string(),
            self.k_ext.to_string(),
            self.h_mean.to_string(),
            self.h_trace.to_string(),
            self.sigma.to_string(),
            self.l_sigma.to_string(),
            self.k2_sigma.to_string(),
            self.k_grad_h_mean.to_string(),
            opt(self.kappa1),
            opt(self.grad_kappa1),
            self.r_scalar.to_string(),
            self.lap_r.to_string(),
        ]
    }
}

pub fn estimate_row(graph: &HalfspaceGraph, x: &[f64], c0: f64) -> Result<EstimateRow> {
    let u = graph.u_jet(x, 5)?;
    let geo = jet_geometry(&u, graph.orientation)?;
    let s = sigma_jet(&u, x)?.value();
    let ls = l_sigma_from_jet(&u, x)?;
    let k = geo.k_ext.value();
    let lap_r = jetmat::laplace_beltrami(&geo.r_scalar, &geo.g)?.value();
    let (kappa1, grad_kappa1) = match kappa1_from_geometry(&geo, c0) {
        Ok(kg) => (Some(kg.kappa1), Some(kg.grad_formula)),
        Err(Error::Degenerate(_)) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(EstimateRow {
        x: x.to_vec(),
        k_ext: k,
        h_mean: geo.h_mean.value(),
        h_trace: geo.h_trace.value(),
        sigma: s,
        l_sigma: ls,
        k2_sigma: k * k * s,
        k_grad_h_mean: k * grad_norm(&geo.h_mean, &geo),
        kappa1,
        grad_kappa1,
        r_scalar: geo.r_scalar.value(),
        lap_r,
    })
}

/// Points the global estimates are sampled on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
}

impl SampleSet {
    /// Centre plus `rings` rings of `8k` points each, out to `radius`.
    pub fn disc(center: [f64; 2], radius: f64, rings: usize) -> SampleSet {
        let mut points = vec![center.to_vec()];
        for k in 1..=rings {
            let r = radius * k as f64 / rings as f64;
            let m = 8 * k;
            for j in 0..m {
                let t = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                points.push(vec![center[0] + r * t.cos(), center[1] + r * t.sin()]);
            }
        }
        SampleSet { points }
    }

    /// A disc set filling a fraction of a graph's domain.
    pub fn for_domain(domain: &Domain, fraction: f64, rings: usize) -> SampleSet {
        match domain {
            Domain::Disc { center, radius } => {
                SampleSet::disc([center[0], center[1]], radius * fraction, rings)
            }
            Domain::Box { lo, hi } => {
                let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
                let r = ((hi[0] - lo[0]).min(hi[1] - lo[1])) / 2.0;
                SampleSet::disc(c, r * fraction, rings)
            }
        }
    }
}

fn check_vicinity(graph: &HalfspaceGraph, x: &[f64]) -> Result<()> {
    let u = graph.u_jet(x, 1)?;
    let g = u.grad();
    let slope = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    if u.value() < 1.0 {
        return Err(Error::Precondition(format!("u = {} < 1 at {x:?}", u.value())));
    }
    if slope >= 1.0 {
        return Err(Error::Precondition(format!("|∇u| = {slope} >= 1 at {x:?}")));
    }
    Ok(())
}

/// `sup K⁴ (σ²/2 - Lσ)` over the samples.
pub fn calabi_margin(graph: &HalfspaceGraph, samples: &SampleSet) -> Result<f64> {
    let mut sup = f64::NEG_INFINITY;
    for x in &samples.points {
        check_vicinity(graph, x)?;
        let u = graph.u_jet(x, 5)?;
        let geo = jet_geometry(&u.truncate(2), graph.orientation)?;
        let k = geo.k_ext.value();
        let s = sigma_jet(&u, x)?.value();
        let ls = l_sigma_from_jet(&u, x)?;
        sup = sup.max(k.powi(4) * (0.5 * s * s - ls));
    }
    Ok(sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pogorelov {
    pub sup_k2_sigma: f64,
    pub sup_k_grad_h: f64,
}

/// `sup K²σ` and `sup K|∇H|_g` (mean curvature) over the samples.
pub fn pogorelov_quantities(graph: &HalfspaceGraph, samples: &SampleSet) -> Result<Pogorelov> {
    let mut out = Pogorelov { sup_k2_sigma: f64::NEG_INFINITY, sup_k_grad_h: f64::NEG_INFINITY };
    for x in &samples.points {
        check_vicinity(graph, x)?;
        let u = graph.u_jet(x, 3)?;
        let geo = jet_geometry(&u, graph.orientation)?;
        let k = geo.k_ext.value();
        let s = sigma_jet(&u, x)?.value();
        out.sup_k2_sigma = out.sup_k2_sigma.max(k * k * s);
        out.sup_k_grad_h = out.sup_k_grad_h.max(k * grad_norm(&geo.h_mean, &geo));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kappa1Gradient {
    pub kappa1: f64,
    /// `|∇κ₁|_g` from the closed-form gradient.
    pub grad_formula: f64,
    /// `|∇κ₁|_g` from differentiating the κ₁ jet.
    pub grad_direct: f64,
}

fn kappa1_from_geometry(geo: &JetGeometry, c0: f64) -> Result<Kappa1Gradient> {
    let a = &geo.shape;
    if a.len() != 2 {
        return Err(Error::Precondition("κ₁ gradient needs n = 2".into()));
    }
    let half = &(&a[0][0] - &a[1][1]) * 0.5;
    // H² - K without the cancellation of the direct difference.
    let disc = &half.square() + &(&a[0][1] * &a[1][0]);
    if !(disc.value() >= c0) || !(disc.value() > 0.0) {
        return Err(Error::Degenerate(format!("H² - K = {} is below {c0}: umbilic point", disc.value())));
    }
    let h = &geo.h_mean;
    let k = &geo.k_ext;
    let root = disc.sqrt()?;
    let kappa1 = h - &root;
    let grad_direct = grad_norm(&kappa1, geo);

    let (hv, kv, rv) = (h.value(), k.value(), root.value());
    let gh = h.grad();
    let gk = k.grad();
    let grad: Vec<f64> = (0..2).map(|i| -kv * gh[i] / (rv * (hv + rv)) + gk[i] / (2.0 * rv)).collect();
    let ginv = jetmat::values(&geo.ginv);
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            s += ginv[i][j] * grad[i] * grad[j];
        }
    }
    Ok(Kappa1Gradient { kappa1: kappa1.value(), grad_formula: s.max(0.0).sqrt(), grad_direct })
}

/// `κ₁ = H - √(H² - K)` and `|∇κ₁|`, where `H² - K ≥ c0` is required.
pub fn kappa1_gradient(graph: &HalfspaceGraph, x: &[f64], c0: f64) -> Result<Kappa1Gradient> {
    let geo = jet_geometry(&graph.u_jet(x, 3)?, graph.orientation)?;
    kappa1_from_geometry(&geo, c0)
}

/// `sup (H_trace² - C₁|Δ_g R| - C₂(R² + R))` over the samples.
pub fn ndim_margin(graph: &HalfspaceGraph, samples: &SampleSet, c1: f64, c2: f64) -> Result<f64> {
    let mut sup = f64::NEG_INFINITY;
    for x in &samples.points {
        let (h2, lap, r) = scalar_terms(graph, x)?;
        sup = sup.max(h2 - c1 * lap.abs() - c2 * (r * r + r));
    }
    Ok(sup)
}

fn scalar_terms(graph: &HalfspaceGraph, x: &[f64]) -> Result<(f64, f64, f64)> {
    if graph.dim < 2 {
        return Err(Error::Precondition("the scalar-curvature margin needs n >= 2".into()));
    }
    let geo = jet_geometry(&graph.u_jet(x, 4)?, graph.orientation)?;
    let lap = jetmat::laplace_beltrami(&geo.r_scalar, &geo.g)?.value();
    Ok((geo.h_trace.value().powi(2), lap, geo.r_scalar.value()))
}

/// Smallest `C₂` with `C₁ = c1` that makes the scalar-curvature margin
/// nonpositive on the samples; infinite when `R² + R ≤ 0` where the rest
/// of the margin is positive.
pub fn minimal_c2(graph: &HalfspaceGraph, samples: &SampleSet, c1: f64) -> Result<f64> {
    let mut c2: f64 = 0.0;
    for x in &samples.points {
        let (h2, lap, r) = scalar_terms(graph, x)?;
        let top = h2 - c1 * lap.abs();
        if top <= 0.0 {
            continue;
        }
        let q = r * r + r;
        if q <= 0.0 {
            return Ok(f64::INFINITY);
        }
        c2 = c2.max(top / q);
    }
    Ok(c2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanBoundReport {
    pub alpha: f64,
    /// Parameter point of the located maximum of `e^{αρ} H`.
    pub q_param: [f64; 2],
    pub q_point: [f64; 3],
    pub x_norm_sq: f64,
    /// `c(α, |x|²)`.
    pub coefficient: f64,
    pub four_c: f64,
    /// `Δ_g K + H² - 4K(K+1)` at the maximum (intrinsic `K`).
    pub margin: f64,
    /// `(α - 1)/(6α² + α - 1)`.
    pub threshold: f64,
    /// `|x|² < 1/100` at the maximum.
    pub hypothesis_holds: bool,
    /// `4c ≤ -1` at the maximum.
    pub coefficient_condition: bool,
}

pub fn threshold(alpha: f64) -> f64 {
    (alpha - 1.0) / (6.0 * alpha * alpha + alpha - 1.0)
}

pub fn coefficient(alpha: f64, x2: f64) -> f64 {
    1.0 - alpha * (1.0 + x2) / (1.0 - x2) + 6.0 * alpha * alpha * x2 / ((1.0 - x2) * (1.0 - x2))
}

fn test_function(patch: &BallPatch, alpha: f64, p: &[f64], order: usize) -> Result<Jet> {
    let geo = patch.geometry(p, order + 2)?;
    let r2 = crate::ball::dot(&geo.x, &geo.x);
    let rho = 2.0 * (1.0 - &r2).recip()?;
    Ok((rho * alpha).exp().truncate(geo.h_mean.order()) * &geo.h_mean)
}

/// Locates the maximum of `f = e^{αρ} H`, `ρ = 2/(1-|x|²)`, over an
/// `n × n` sample grid of the parameter box, refines it by Newton steps on
/// `∇f`, and evaluates the margin there.
pub fn mean_bound_margin(patch: &BallPatch, alpha: f64, n: usize) -> Result<MeanBoundReport> {
    let (lo, hi) = match &patch.param_domain {
        Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
        Domain::Disc { center, radius } => (
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
        ),
    };
    let n = n.max(3);
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let mut vals = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let p = [
                lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64,
                lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64,
            ];
            vals.push((i, j, p, test_function(patch, alpha, &p, 0)?.value()));
        }
    }
    let fmax = vals.iter().map(|v| v.3).fold(f64::NEG_INFINITY, f64::max);
    // Ties (up to roundoff) go to the sample nearest the box centre.
    let tol = 1e-12 * fmax.abs().max(1e-300);
    let dist = |p: &[f64; 2]| (p[0] - mid[0]).powi(2) + (p[1] - mid[1]).powi(2);
    let best = vals
        .iter()
        .filter(|v| v.3 >= fmax - tol)
        .min_by(|a, b| dist(&a.2).partial_cmp(&dist(&b.2)).unwrap())
        .unwrap();
    let (bi, bj) = (best.0, best.1);
    if bi == 0 || bj == 0 || bi == n - 1 || bj == n - 1 {
        return Err(Error::BoundaryMax);
    }
    let tied = vals.iter().filter(|v| v.3 >= fmax - tol).count();
    let mut q = best.2;
    if tied < vals.len() {
        let cell = [(hi[0] - lo[0]) / (n - 1) as f64, (hi[1] - lo[1]) / (n - 1) as f64];
        for _ in 0..30 {
            let f = test_function(patch, alpha, &q, 2)?;
            let (g0, g1) = (f.der(&[0]), f.der(&[1]));
            let (a, b, c) = (f.der(&[0, 0]), f.der(&[0, 1]), f.der(&[1, 1]));
            let det = a * c - b * b;
            if !(det > 0.0 && a < 0.0) {
                break;
            }
            let step = [(c * g0 - b * g1) / det, (-b * g0 + a * g1) / det];
            let next = [q[0] - step[0], q[1] - step[1]];
            if (next[0] - best.2[0]).abs() > cell[0] || (next[1] - best.2[1]).abs() > cell[1] {
                break;
            }
            q = next;
            if step[0].abs().max(step[1].abs()) < 1e-12 {
                break;
            }
        }
    }

    let geo = patch.geometry(&q, 4)?;
    let metric: JetMatrix = vec![vec![geo.e.clone(), geo.f.clone()], vec![geo.f.clone(), geo.g.clone()]];
    let lap_k = jetmat::laplace_beltrami(&geo.k_intrinsic, &metric)?.value();
    let k = geo.k_intrinsic.value();
    let h = geo.h_mean.value();
    let xq = [geo.x[0].value(), geo.x[1].value(), geo.x[2].value()];
    let x2 = xq.iter().map(|v| v * v).sum::<f64>();
    let c = coefficient(alpha, x2);
    Ok(MeanBoundReport {
        alpha,
        q_param: q,
        q_point: xq,
        x_norm_sq: x2,
        coefficient: c,
        four_c: 4.0 * c,
        margin: lap_k + h * h - 4.0 * k * (k + 1.0),
        threshold: threshold(alpha),
        hypothesis_holds: x2 < 0.01,
        coefficient_condition: 4.0 * c <= -1.0,
    })
}

/// Residuals of the `ρ` identities and slacks of the inequality chain that
/// bounds `1/ρ_ii` by mean curvature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub residuals: BTreeMap<String, f64>,
    pub slacks: BTreeMap<String, f64>,
}

pub fn identity_suite(graph: &HalfspaceGraph, x: &[f64]) -> Result<IdentityReport> {
    if graph.dim != 2 {
        return Err(Error::Precondition(format!("the ρ identities need n = 2, got {}", graph.dim)));
    }
    let u = graph.u_jet(x, 3)?;
    let r = rho_jets(&u, x)?;
    let geo = jet_geometry(&u, graph.orientation)?;
    // Raw (unmirrored) Hessian; the mirror cancels in ρ^{ij} ρ_ijk.
    let hv: Vec<Vec<f64>> = jetmat::values(&r.hess).into_iter().map(|row| row.into_iter().map(|v| v * r.sign).collect()).collect();
    let inv = jetmat::values(&r.inv);
    let uv = u.value();
    let w = geo.w.value();
    let k = geo.k_ext.value();
    let hm = geo.h_mean.value();
    let h = jetmat::values(&geo.h);

    let mut residuals = BTreeMap::new();
    let mut slacks = BTreeMap::new();

    // ρ_ij = u² w h_ij.
    let mut form: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            form = form.max((uv * uv * w * h[i][j] - hv[i][j]).abs());
        }
    }
    residuals.insert("rho_hessian_form".to_string(), form);

    // ρ^{ij} ρ_ijk = (log m)_k, m = K (1 + |∇u|²)².
    let w2 = geo.w.square();
    let m = &geo.k_ext * &w2.square();
    let logm = m.ln()?;
    for kk in 0..2 {
        let mut lhs = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                lhs += inv[i][j] * r.third[i][j][kk].value();
            }
        }
        residuals.insert(format!("log_det_derivative_{}", kk + 1), (lhs - logm.der(&[kk])).abs());
    }

    let det = hv[0][0] * hv[1][1] - hv[0][1] * hv[1][0];
    residuals.insert("det_identity".to_string(), (det - k * w.powi(4)).abs());

    // Frame where Hess ρ is diagonal.
    let tr = hv[0][0] + hv[1][1];
    let half = ((hv[0][0] - hv[1][1]) / 2.0).hypot(hv[0][1]);
    let d = [tr / 2.0 - half, tr / 2.0 + half];
    residuals.insert("diagonal_det".to_string(), (d[0] * d[1] - w.powi(4) * k).abs());
    let h_tilde = uv * uv / 2.0 * (h[0][0] + h[1][1]);
    residuals.insert("diagonal_trace".to_string(), (d[0] + d[1] - 2.0 * w * h_tilde).abs());

    slacks.insert("mean_below_coordinate_mean".to_string(), 2.0 * h_tilde - 2.0 * hm);
    slacks.insert("mean_above_scaled_coordinate_mean".to_string(), 2.0 * hm - 2.0 * h_tilde / (w * w));
    let mut diag = f64::INFINITY;
    let mut inverse_bound = f64::INFINITY;
    for &di in &d {
        diag = diag.min(di).min(2.0 * w * h_tilde - di);
        inverse_bound = inverse_bound.min(2.0 * hm / (k * w) - 1.0 / di);
    }
    diag = diag.min(2.0 * w.powi(3) * hm - 2.0 * w * h_tilde);
    slacks.insert("diagonal_bounds".to_string(), diag);
    slacks.insert("inverse_diagonal_bound".to_string(), inverse_bound);
    Ok(IdentityReport { residuals, slacks })
}

/// Median of a sequence (mean of the middle pair for even lengths).
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) }
}

/// Boundedness regression: `max(last three) ≤ 2 × median(all)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    pub max_last_three: f64,
    pub median: f64,
    pub passes: bool,
}

pub fn tail_check(v: &[f64]) -> TailCheck {
    let tail = &v[v.len().saturating_sub(3)..];
    let max_last_three = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let median = median(v);
    TailCheck { max_last_three, median, passes: max_last_three <= 2.0 * median }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{c, x, AnalyticExpr};
    use crate::halfspace::Domain;

    fn cap() -> HalfspaceGraph {
        HalfspaceGraph::analytic(2, 2.0 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt(), Domain::disc(2, 0.7))
    }

    #[test]
    fn sigma_vanishes_on_symmetric_and_flat_cases() {
        assert!(sigma(&cap(), &[0.0, 0.0]).unwrap().abs() < 1e-14);
        let flat = HalfspaceGraph::analytic(2, c(2.0), Domain::disc(2, 1.0));
        assert_eq!(sigma(&flat, &[0.1, 0.0]).unwrap(), 0.0);
        assert_eq!(l_sigma(&flat, &[0.1, 0.0]).unwrap(), 0.0);
        let saddle = HalfspaceGraph::analytic(2, 2.0 + x(0) * x(0) - x(1) * x(1), Domain::disc(2, 1.0));
        assert!(matches!(sigma(&saddle, &[0.0, 0.0]), Err(Error::Branch(_))));
    }

    #[test]
    fn sphere_values() {
        let g = cap();
        let samples = SampleSet::disc([0.0, 0.0], 0.3, 2);
        assert!((ndim_margin(&g, &samples, 1.0, 1.0).unwrap() + 56.0).abs() < 1e-8);
        let p = pogorelov_quantities(&g, &samples).unwrap();
        assert!(p.sup_k_grad_h.abs() < 1e-9);
        assert!(matches!(kappa1_gradient(&g, &[0.1, 0.1], 1e-8), Err(Error::Degenerate(_))));
    }

    #[test]
    fn kappa1_routes_agree() {
        let u = 2.0 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt() + 0.02 * (x(0) * x(0) * x(1) * x(1));
        let g = HalfspaceGraph::analytic(2, u, Domain::disc(2, 0.7));
        let k = kappa1_gradient(&g, &[0.2, 0.1], 1e-12).unwrap();
        assert!((k.grad_formula - k.grad_direct).abs() < 1e-7 * k.grad_direct.max(1.0));
    }

    #[test]
    fn coefficient_example() {
        assert!((4.0 * coefficient(2.0, 0.01) + 3.18).abs() < 0.01);
        assert!((threshold(2.0) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn small_sphere_margin() {
        let patch = BallPatch::stereographic_sphere([0.0; 3], 0.05, 1.0);
        let rep = mean_bound_margin(&patch, 2.0, 21).unwrap();
        assert!(rep.hypothesis_holds && rep.coefficient_condition);
        assert!(rep.margin <= 1e-8);
    }

    #[test]
    fn identities_on_cap() {
        let rep = identity_suite(&cap(), &[0.4, 0.2]).unwrap();
        for (k, v) in &rep.residuals {
            assert!(*v <= 1e-9, "{k} {v}");
        }
        for (k, v) in &rep.slacks {
            assert!(*v >= -1e-10, "{k} {v}");
        }
    }
}
