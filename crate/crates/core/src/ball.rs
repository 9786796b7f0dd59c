//! Parametrized surfaces in the Poincaré ball `|x| < 1` with metric
//! `λ² |dx|²`, `λ = 2/(1-|x|²)`.
//!
//! The Levi-Civita connection of a conformal metric `e^{2φ}δ` is
//! `D_a b = ∂_a b + a(b·∇φ) + b(a·∇φ) - (a·b)∇φ`, and here `∇φ = λ x`.
//! The hyperbolic unit normal is the Euclidean unit normal divided by `λ`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::AnalyticExpr;
use crate::halfspace::Domain;
use crate::jet::Jet;
use crate::jetmat::{self, JetMatrix};

pub type V3 = [Jet; 3];

pub fn dot(a: &V3, b: &V3) -> Jet {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

pub fn cross(a: &V3, b: &V3) -> V3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn scale(a: &V3, s: &Jet) -> V3 {
    [&a[0] * s, &a[1] * s, &a[2] * s]
}

fn add(a: &V3, b: &V3) -> V3 {
    [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
}

fn sub(a: &V3, b: &V3) -> V3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn d(a: &V3, i: usize) -> V3 {
    [a[0].deriv(i), a[1].deriv(i), a[2].deriv(i)]
}

/// Ambient connection term `a(b·∇φ) + b(a·∇φ) - (a·b)∇φ`.
fn gamma_bar(a: &V3, b: &V3, grad_phi: &V3) -> V3 {
    let ab = dot(a, b);
    let bp = dot(b, grad_phi);
    let ap = dot(a, grad_phi);
    sub(&add(&scale(a, &bp), &scale(b, &ap)), &scale(grad_phi, &ab))
}

#[derive(Debug, Clone)]
pub struct BallPatch {
    pub chart: [AnalyticExpr; 3],
    pub param_domain: Domain,
    /// `+1` when `X_s × X_t` is the inner normal, `-1` otherwise.
    pub normal_sign: f64,
}

/// Geometry of a patch as jets in the chart parameters.
pub struct BallGeometry {
    pub x: V3,
    pub xu: V3,
    pub xv: V3,
    pub lambda: Jet,
    /// Euclidean unit normal (inner).
    pub n_euc: V3,
    pub e: Jet,
    pub f: Jet,
    pub g: Jet,
    pub l: Jet,
    pub m: Jet,
    pub n: Jet,
    pub k_intrinsic: Jet,
    pub h_mean: Jet,
}

#[derive(Debug, Clone, Serialize)]
pub struct BallForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub k_intrinsic: f64,
    pub h_mean: f64,
    pub rho: f64,
    /// `[ρ_u, ρ_v, ρ_uu, ρ_uv, ρ_vv]`.
    pub rho_derivs: [f64; 5],
}

impl BallPatch {
    /// Stereographic chart of the sphere `|x - center| = a`; isothermal,
    /// with `X_s × X_t` pointing to the centre.
    pub fn stereographic_sphere(center: [f64; 3], a: f64, half_width: f64) -> BallPatch {
        use crate::expr::{c, x};
        let q = 1.0 + x(0) * x(0) + x(1) * x(1);
        let chart = [
            center[0] + a * 2.0 * x(0) / q.clone(),
            center[1] + a * 2.0 * x(1) / q.clone(),
            center[2] + a * (x(0) * x(0) + x(1) * x(1) - c(1.0)) / q,
        ];
        BallPatch {
            chart,
            param_domain: Domain::Box { lo: vec![-half_width; 2], hi: vec![half_width; 2] },
            normal_sign: 1.0,
        }
    }

    /// Monge chart `(s, t, c₃ - √(a² - s² - t²))` of the lower hemisphere of
    /// `|x - c| = a`; not isothermal.
    pub fn monge_sphere(center: [f64; 3], a: f64, half_width: f64) -> BallPatch {
        use crate::expr::x;
        let chart = [
            center[0] + x(0),
            center[1] + x(1),
            center[2] - (a * a - x(0) * x(0) - x(1) * x(1)).sqrt(),
        ];
        BallPatch {
            chart,
            param_domain: Domain::Box { lo: vec![-half_width; 2], hi: vec![half_width; 2] },
            normal_sign: 1.0,
        }
    }

    pub fn chart_jets(&self, p: &[f64], order: usize) -> Result<V3> {
        if p.len() != 2 {
            return Err(Error::DimMismatch { expected: 2, got: p.len() });
        }
        let seed = Jet::seed(p, order);
        let x = [self.chart[0].eval(&seed)?, self.chart[1].eval(&seed)?, self.chart[2].eval(&seed)?];
        let r2 = x.iter().map(|c| c.value() * c.value()).sum::<f64>();
        if r2 >= 1.0 {
            return Err(Error::Domain {
                node: format!("chart at {p:?}"),
                reason: format!("|X|² = {r2} is not inside the unit ball"),
            });
        }
        Ok(x)
    }

    /// Full jet geometry, `order` is the chart order (at least 2).
    pub fn geometry(&self, p: &[f64], order: usize) -> Result<BallGeometry> {
        let x = self.chart_jets(p, order)?;
        geometry_from_chart(x, self.normal_sign, 0.0)
    }
}

fn geometry_from_chart(x: V3, normal_sign: f64, inject_l: f64) -> Result<BallGeometry> {
    let r2 = dot(&x, &x);
    let lambda = (2.0 * (1.0 - &r2).recip()?).truncate(x[0].order());
    let xu = d(&x, 0);
    let xv = d(&x, 1);
    let cr = cross(&xu, &xv);
    let cr_norm = dot(&cr, &cr);
    if !(cr_norm.value() > 1e-300) {
        return Err(Error::Degenerate("X_s × X_t vanishes: chart is not immersed".into()));
    }
    let inv = cr_norm.sqrt()?.recip()? * normal_sign;
    let n_euc = scale(&cr, &inv);
    let l2 = lambda.square();
    let e = &l2 * &dot(&xu, &xu);
    let f = &l2 * &dot(&xu, &xv);
    let g = &l2 * &dot(&xv, &xv);
    let grad_phi = scale(&x, &lambda);
    let second = |a: &V3, b: &V3, ab: &V3| {
        let full = add(ab, &gamma_bar(a, b, &grad_phi));
        &lambda * &dot(&full, &n_euc)
    };
    let mut l = second(&xu, &xu, &d(&xu, 0));
    if inject_l != 0.0 {
        // L + δ(1 + v - v₀) shifts both L and L_v.
        let v = Jet::variable(2, l.order(), 1, 0.0);
        l = l + inject_l * (1.0 + &v);
    }
    let m = second(&xu, &xv, &d(&xu, 1));
    let n = second(&xv, &xv, &d(&xv, 1));
    let det1 = &e * &g - &f * &f;
    let det2 = &l * &n - &m * &m;
    let idet = det1.recip()?;
    let k_intrinsic = &det2 * &idet - 1.0;
    let h_mean = (&(&g * &l) - &(2.0 * (&f * &m)) + &(&e * &n)) * &idet * 0.5;
    Ok(BallGeometry { x, xu, xv, lambda, n_euc, e, f, g, l, m, n, k_intrinsic, h_mean })
}

/// First and second fundamental forms and curvatures at `p`.
pub fn ball_forms(patch: &BallPatch, p: &[f64]) -> Result<BallForms> {
    let geo = patch.geometry(p, 2)?;
    let rho = &geo.lambda;
    Ok(BallForms {
        e: geo.e.value(),
        f: geo.f.value(),
        g: geo.g.value(),
        l: geo.l.value(),
        m: geo.m.value(),
        n: geo.n.value(),
        k_intrinsic: geo.k_intrinsic.value(),
        h_mean: geo.h_mean.value(),
        rho: rho.value(),
        rho_derivs: [rho.der(&[0]), rho.der(&[1]), rho.der(&[0, 0]), rho.der(&[0, 1]), rho.der(&[1, 1])],
    })
}

/// Induced Christoffels `Γ^k_ij` from jets of `E, F, G` (one order consumed).
pub fn christoffels(e: &Jet, f: &Jet, g: &Jet) -> Result<[[[Jet; 2]; 2]; 2]> {
    let metric: JetMatrix = vec![vec![e.clone(), f.clone()], vec![f.clone(), g.clone()]];
    let inv = jetmat::inverse(&metric)?;
    let p = e.order() - 1;
    let dm = |i: usize, j: usize, k: usize| metric[i][j].deriv(k);
    let zero = Jet::constant(2, p, 0.0);
    let mut out: [[[Jet; 2]; 2]; 2] = std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| zero.clone())));
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = zero.clone();
                for l in 0..2 {
                    let t = dm(j, l, i) + dm(i, l, j) - dm(i, j, l);
                    acc += &(&inv[k][l].truncate(p) * &t);
                }
                out[k][i][j] = acc * 0.5;
            }
        }
    }
    Ok(out)
}

fn codazzi_from(geo: &BallGeometry) -> Result<(f64, f64)> {
    let gam = christoffels(&geo.e, &geo.f, &geo.g)?;
    let gv = |k: usize, i: usize, j: usize| gam[k][i][j].value();
    let (l, m, n) = (geo.l.value(), geo.m.value(), geo.n.value());
    let r1 = geo.l.der(&[1]) - geo.m.der(&[0])
        - (l * gv(0, 0, 1) + m * (gv(1, 0, 1) - gv(0, 0, 0)) - n * gv(1, 0, 0));
    let r2 = geo.m.der(&[1]) - geo.n.der(&[0])
        - (l * gv(0, 1, 1) + m * (gv(1, 1, 1) - gv(0, 0, 1)) - n * gv(1, 0, 1));
    Ok((r1, r2))
}

/// Mainardi-Codazzi residuals `(r₁, r₂)` at `p`.
pub fn codazzi_residual(patch: &BallPatch, p: &[f64]) -> Result<(f64, f64)> {
    codazzi_from(&patch.geometry(p, 3)?)
}

/// Codazzi residuals after replacing `L` by `L + δ(1 + v - v₀)`.
pub fn codazzi_residual_injected(patch: &BallPatch, p: &[f64], delta: f64) -> Result<(f64, f64)> {
    let x = patch.chart_jets(p, 3)?;
    codazzi_from(&geometry_from_chart(x, patch.normal_sign, delta)?)
}

/// Gaussian curvature of `E du² + 2F du dv + G dv²` by the Brioschi formula.
fn brioschi(e: &Jet, f: &Jet, g: &Jet) -> f64 {
    let de = |v: &[usize]| e.der(v);
    let df = |v: &[usize]| f.der(v);
    let dg = |v: &[usize]| g.der(v);
    let (ev, fv, gv) = (e.value(), f.value(), g.value());
    let a = nalgebra::Matrix3::new(
        -de(&[1, 1]) / 2.0 + df(&[0, 1]) - dg(&[0, 0]) / 2.0,
        de(&[0]) / 2.0,
        df(&[0]) - de(&[1]) / 2.0,
        df(&[1]) - dg(&[0]) / 2.0,
        ev,
        fv,
        dg(&[1]) / 2.0,
        fv,
        gv,
    );
    let b = nalgebra::Matrix3::new(0.0, de(&[1]) / 2.0, dg(&[0]) / 2.0, de(&[1]) / 2.0, ev, fv, dg(&[0]) / 2.0, fv, gv);
    let w = ev * gv - fv * fv;
    (a.determinant() - b.determinant()) / (w * w)
}

/// Two-route checks of the curvature formulas: `K` against the Brioschi
/// curvature of the first fundamental form, and `L, M, N` (hence `H`)
/// against the Weingarten form `-⟨X_i, D_{X_j} N⟩`.
pub fn curvature_crosscheck(patch: &BallPatch, p: &[f64]) -> Result<BTreeMap<String, f64>> {
    let geo = patch.geometry(p, 3)?;
    let k_gauss = brioschi(&geo.e, &geo.f, &geo.g);
    let mut out = BTreeMap::new();
    out.insert("brioschi_gauss".to_string(), (geo.k_intrinsic.value() - k_gauss).abs());

    let nh = scale(&geo.n_euc, &geo.lambda.truncate(geo.n_euc[0].order()).recip()?);
    let grad_phi = scale(&geo.x, &geo.lambda);
    let l2 = geo.lambda.square();
    let dn = |t: &V3, i: usize| add(&d(&nh, i), &gamma_bar(t, &nh, &grad_phi));
    let weingarten = |a: &V3, b: &V3, i: usize| -(&l2 * &dot(a, &dn(b, i))).value();
    let lw = weingarten(&geo.xu, &geo.xu, 0);
    let mw = weingarten(&geo.xv, &geo.xu, 0);
    let mw2 = weingarten(&geo.xu, &geo.xv, 1);
    let nw = weingarten(&geo.xv, &geo.xv, 1);
    let (e, f, g) = (geo.e.value(), geo.f.value(), geo.g.value());
    let hw = 0.5 * (g * lw - 2.0 * f * mw + e * nw) / (e * g - f * f);
    let sff = [(geo.l.value() - lw), (geo.m.value() - mw), (geo.m.value() - mw2), (geo.n.value() - nw)]
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    out.insert("weingarten_mean".to_string(), (geo.h_mean.value() - hw).abs().max(sff));
    Ok(out)
}

/// Conformal-coordinate identities; requires `E = G`, `F = 0` at `p`.
pub fn conformal_check(patch: &BallPatch, p: &[f64]) -> Result<BTreeMap<String, f64>> {
    let geo = patch.geometry(p, 3)?;
    let (e, f, g) = (geo.e.value(), geo.f.value(), geo.g.value());
    let scale_ref = e.abs().max(g.abs());
    if (e - g).abs() > 1e-10 * scale_ref || f.abs() > 1e-10 * scale_ref {
        return Err(Error::Precondition(format!(
            "chart is not isothermal at {p:?}: E = {e}, F = {f}, G = {g}"
        )));
    }
    let h = geo.e.ln()? * 0.5;
    let e2h = e;
    let (l, m, n) = (geo.l.value(), geo.m.value(), geo.n.value());
    let k = geo.k_intrinsic.value();
    let hm = geo.h_mean.value();
    let lap_h = h.der(&[0, 0]) + h.der(&[1, 1]);
    let (h1, h2) = (h.der(&[0]), h.der(&[1]));
    let mut out = BTreeMap::new();
    out.insert("conformal_gauss".to_string(), (k - (-1.0 + (l * n - m * m) / (e2h * e2h))).abs());
    out.insert("conformal_mean".to_string(), (hm - (l + n) / (2.0 * e2h)).abs());
    out.insert("conformal_laplacian".to_string(), (k + lap_h / e2h).abs());
    let c1 = geo.l.der(&[1]) - geo.m.der(&[0]);
    let c2 = geo.m.der(&[1]) - geo.n.der(&[0]);
    out.insert(
        "conformal_codazzi_1".to_string(),
        (c1 - h2 * (l + n)).abs().max((c1 - 2.0 * hm * e2h * h2).abs()),
    );
    out.insert(
        "conformal_codazzi_2".to_string(),
        (c2 + h1 * (l + n)).abs().max((c2 + 2.0 * hm * e2h * h1).abs()),
    );
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportQuantities {
    pub residuals: BTreeMap<String, f64>,
    /// `⟨r, r⟩ - |∇ρ|²_g`, nonnegative by Cauchy-Schwarz.
    pub cauchy_schwarz_slack: f64,
    pub rho_u: f64,
    pub rho_v: f64,
}

/// `ρ = 2/(1-|x|²)` along the patch, its derivatives, and the position-field
/// formulas for them.
pub fn support_quantities(patch: &BallPatch, p: &[f64]) -> Result<SupportQuantities> {
    let geo = patch.geometry(p, 3)?;
    let rho = &geo.lambda;
    let lam = geo.lambda.value();
    let lam2 = lam * lam;
    let val = |v: &V3| [v[0].value(), v[1].value(), v[2].value()];
    let dotf = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let x = val(&geo.x);
    let xu = val(&geo.xu);
    let xv = val(&geo.xv);
    let nh: [f64; 3] = val(&geo.n_euc).map(|c| c / lam);
    let r_xu = lam2 * dotf(x, xu);
    let r_xv = lam2 * dotf(x, xv);
    let r_n = lam2 * dotf(x, nh);
    let r_r = lam2 * dotf(x, x);
    let x2 = dotf(x, x);
    let cosh = (1.0 + x2) / (1.0 - x2);

    let gam = christoffels(&geo.e, &geo.f, &geo.g)?;
    let gv = |k: usize, i: usize, j: usize| gam[k][i][j].value();
    let (e, f, g) = (geo.e.value(), geo.f.value(), geo.g.value());
    let (l, m, n) = (geo.l.value(), geo.m.value(), geo.n.value());

    let mut res = BTreeMap::new();
    let ru = rho.der(&[0]);
    let rv = rho.der(&[1]);
    res.insert("support_gradient".to_string(), (ru - r_xu).abs().max((rv - r_xv).abs()));
    let f56 = cosh * e + gv(0, 0, 0) * r_xu + gv(1, 0, 0) * r_xv + l * r_n;
    let f57 = cosh * f + gv(0, 0, 1) * r_xu + gv(1, 0, 1) * r_xv + m * r_n;
    let f58 = cosh * g + gv(0, 1, 1) * r_xu + gv(1, 1, 1) * r_xv + n * r_n;
    res.insert("support_hessian_uu".to_string(), (rho.der(&[0, 0]) - f56).abs());
    res.insert("support_hessian_uv".to_string(), (rho.der(&[0, 1]) - f57).abs());
    res.insert("support_hessian_vv".to_string(), (rho.der(&[1, 1]) - f58).abs());
    res.insert("r_norm".to_string(), (r_r - 4.0 * x2 / ((1.0 - x2) * (1.0 - x2))).abs());

    let det = e * g - f * f;
    let grad2 = (g * ru * ru - 2.0 * f * ru * rv + e * rv * rv) / det;
    Ok(SupportQuantities { residuals: res, cauchy_schwarz_slack: r_r - grad2, rho_u: ru, rho_v: rv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_forms() {
        let patch = BallPatch::stereographic_sphere([0.0; 3], 0.5, 1.5);
        for p in [[0.0, 0.0], [0.3, -0.7], [1.2, 0.4]] {
            let f = ball_forms(&patch, &p).unwrap();
            assert!((f.h_mean - 1.25).abs() < 1e-12, "{}", f.h_mean);
            assert!((f.k_intrinsic - 9.0 / 16.0).abs() < 1e-12);
            assert!((f.e - f.g).abs() < 1e-12 * f.e);
            assert!(f.f.abs() < 1e-12 * f.e);
        }
    }

    #[test]
    fn origin_spheres_closed_form() {
        for a in [0.2, 0.4, 0.5, 0.7] {
            let patch = BallPatch::stereographic_sphere([0.0; 3], a, 1.0);
            let f = ball_forms(&patch, &[0.2, 0.1]).unwrap();
            let r = ((1.0 + a) / (1.0 - a)).ln();
            assert!((f.h_mean - (1.0 + a * a) / (2.0 * a)).abs() < 1e-11);
            assert!((f.k_intrinsic - 1.0 / r.sinh().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn codazzi_and_negative_control() {
        let patch = BallPatch::stereographic_sphere([0.1, 0.0, 0.2], 0.3, 1.0);
        let (r1, r2) = codazzi_residual(&patch, &[0.3, 0.2]).unwrap();
        assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10);
        let (r1, _) = codazzi_residual_injected(&patch, &[0.3, 0.2], 0.1).unwrap();
        assert!(r1.abs() > 1e-3);
    }

    #[test]
    fn non_isothermal_chart_is_rejected() {
        let patch = BallPatch::monge_sphere([0.0, 0.0, 0.0], 0.5, 0.2);
        assert!(matches!(conformal_check(&patch, &[0.1, 0.05]), Err(Error::Precondition(_))));
    }
}
