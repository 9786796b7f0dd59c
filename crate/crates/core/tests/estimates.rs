use hypersurf::ball::BallPatch;
use hypersurf::error::Error;
use hypersurf::estimates::*;
use hypersurf::expr::{c, x, AnalyticExpr};
use hypersurf::fd::richardson_partial;
use hypersurf::halfspace::{Domain, HalfspaceGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cap_expr() -> AnalyticExpr {
    2.0 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt()
}

fn cap() -> HalfspaceGraph {
    HalfspaceGraph::analytic(2, cap_expr(), Domain::disc(2, 0.9))
}

fn perturbed() -> HalfspaceGraph {
    HalfspaceGraph::analytic(2, cap_expr() + 0.02 * (x(0) * x(0) * x(1) * x(1)), Domain::disc(2, 0.9))
}

fn horosphere() -> HalfspaceGraph {
    HalfspaceGraph::analytic(2, c(2.0), Domain::disc(2, 1.0))
}

fn rho_of(g: &HalfspaceGraph) -> impl Fn(&[f64]) -> hypersurf::Result<f64> + '_ {
    move |p: &[f64]| {
        let u = g.u(p)?;
        Ok(-(p[0] * p[0] + p[1] * p[1] + u * u) / 2.0)
    }
}

fn alpha(idx: &[usize]) -> Vec<usize> {
    let mut a = vec![0; 2];
    for &i in idx {
        a[i] += 1;
    }
    a
}

/// σ by an explicit loop over all 2⁶ index tuples with every derivative of ρ
/// taken by extrapolated finite differences.
fn sigma_dense_fd(g: &HalfspaceGraph, p: &[f64]) -> f64 {
    let rho = rho_of(g);
    let d = |idx: &[usize]| richardson_partial(&rho, p, &alpha(idx), 0.04).unwrap();
    let hess = [[d(&[0, 0]), d(&[0, 1])], [d(&[0, 1]), d(&[1, 1])]];
    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    let inv = [[hess[1][1] / det, -hess[0][1] / det], [-hess[1][0] / det, hess[0][0] / det]];
    let mut third = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                third[i][j][k] = d(&[i, j, k]);
            }
        }
    }
    let mut s = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            for pp in 0..2 {
                for q in 0..2 {
                    for r in 0..2 {
                        for t in 0..2 {
                            s += inv[k][l] * inv[pp][q] * inv[r][t] * third[k][pp][r] * third[l][q][t];
                        }
                    }
                }
            }
        }
    }
    s
}

#[test]
fn sigma_matches_dense_loop_oracle() {
    for p in [[0.3, 0.1], [-0.2, 0.25]] {
        let jet = sigma(&cap(), &p).unwrap();
        let fd = sigma_dense_fd(&cap(), &p);
        assert!((jet - fd).abs() <= 1e-6 * jet.abs(), "{jet} {fd}");
        let jet = sigma(&perturbed(), &p).unwrap();
        let fd = sigma_dense_fd(&perturbed(), &p);
        assert!((jet - fd).abs() <= 1e-6 * jet.abs(), "{jet} {fd}");
    }
}

#[test]
fn trivial_sigma_values() {
    assert_eq!(sigma(&cap(), &[0.0, 0.0]).unwrap().abs(), 0.0);
    assert_eq!(sigma(&horosphere(), &[0.2, -0.1]).unwrap(), 0.0);
    assert_eq!(l_sigma(&horosphere(), &[0.2, -0.1]).unwrap(), 0.0);
}

fn l_sigma_fd(g: &HalfspaceGraph, p: &[f64]) -> f64 {
    let s = |q: &[f64]| sigma(g, q);
    let u = g.u_jet(p, 3).unwrap();
    let grad = u.grad();
    let hu = [[u.der(&[0, 0]), u.der(&[0, 1])], [u.der(&[0, 1]), u.der(&[1, 1])]];
    let hess: Vec<Vec<f64>> = (0..2)
        .map(|i| (0..2).map(|j| -(u.value() * hu[i][j] + grad[i] * grad[j] + if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    let inv = [[hess[1][1] / det, -hess[0][1] / det], [-hess[1][0] / det, hess[0][0] / det]];
    let w2 = 1.0 + grad[0] * grad[0] + grad[1] * grad[1];
    let mut out = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            out += inv[i][j] * richardson_partial(&s, p, &alpha(&[i, j]), 0.04).unwrap();
        }
        out += 4.0 * grad[i] * richardson_partial(&s, p, &alpha(&[i]), 0.04).unwrap() / (w2 * u.value());
    }
    out
}

#[test]
fn l_sigma_matches_finite_differences_of_sigma() {
    for g in [cap(), perturbed()] {
        for p in [[0.0, 0.0], [0.2, 0.2]] {
            let jet = l_sigma(&g, &p).unwrap();
            let fd = l_sigma_fd(&g, &p);
            assert!((jet - fd).abs() <= 1e-5 * jet.abs().max(1e-12), "{p:?} {jet} {fd}");
        }
    }
}

#[test]
fn sigma_needs_order_three_and_a_definite_hessian() {
    let saddle = HalfspaceGraph::analytic(2, 2.0 + x(0) * x(0) - x(1) * x(1), Domain::disc(2, 1.0));
    assert!(matches!(sigma(&saddle, &[0.0, 0.0]), Err(Error::Branch(_))));
    let u = cap().u_jet(&[0.1, 0.0], 2).unwrap();
    assert!(matches!(sigma_jet(&u, &[0.1, 0.0]), Err(Error::OutOfOrder { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_rotation_invariant(theta in 0.0..std::f64::consts::TAU, r in 0.0..0.5f64, phi in 0.0..std::f64::consts::TAU) {
        let (ct, st) = (theta.cos(), theta.sin());
        let base = cap_expr() + 0.02 * (x(0) * x(0) * x(1) * x(1)) + 0.01 * x(0) * x(0) * x(0);
        // u_R(y) = u(R y).
        let rotated = base.substitute(&[ct * x(0) - st * x(1), st * x(0) + ct * x(1)]);
        let g = HalfspaceGraph::analytic(2, base, Domain::disc(2, 0.9));
        let gr = HalfspaceGraph::analytic(2, rotated, Domain::disc(2, 0.9));
        let y = [r * phi.cos(), r * phi.sin()];
        let ry = [ct * y[0] - st * y[1], st * y[0] + ct * y[1]];
        let a = sigma(&g, &ry).unwrap();
        let b = sigma(&gr, &y).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{} {}", a, b);
    }

    #[test]
    fn sigma_is_nonnegative(r in 0.0..0.6f64, phi in 0.0..std::f64::consts::TAU, amp in -0.05..0.05f64) {
        let g = HalfspaceGraph::analytic(2, cap_expr() + amp * (x(0) * x(0) * x(1) * x(1)), Domain::disc(2, 0.9));
        let s = sigma(&g, &[r * phi.cos(), r * phi.sin()]).unwrap();
        prop_assert!(s >= 0.0);
    }
}

#[test]
fn kappa1_formula_matches_direct_differentiation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = perturbed();
    let mut checked = 0;
    while checked < 50 {
        let p = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        // Points near the axes are almost umbilic.
        match kappa1_gradient(&g, &p, 1e-10) {
            Ok(k) => {
                assert!((k.grad_formula - k.grad_direct).abs() <= 1e-7, "{p:?} {k:?}");
                checked += 1;
            }
            Err(Error::Degenerate(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    let k = kappa1_gradient(&g, &[0.2, 0.1], 1e-12).unwrap();
    assert!((k.grad_formula - k.grad_direct).abs() <= 1e-7);
    assert!(k.kappa1 < 2.0 + 1e-12);
}

#[test]
fn umbilic_surfaces_are_rejected() {
    assert!(matches!(kappa1_gradient(&cap(), &[0.1, 0.3], 1e-8), Err(Error::Degenerate(_))));
    let plane = HalfspaceGraph::analytic(2, x(0) + 2.0, Domain::disc(2, 1.0));
    assert!(matches!(kappa1_gradient(&plane, &[0.1, 0.3], 1e-8), Err(Error::Degenerate(_))));
}

#[test]
fn scalar_curvature_margin_closed_forms() {
    let s = SampleSet::disc([0.0, 0.0], 0.4, 3);
    let m = ndim_margin(&cap(), &s, 1.0, 1.0).unwrap();
    assert!((m + 56.0).abs() < 1e-8, "{m}");
    let m = ndim_margin(&horosphere(), &s, 1.0, 1.0).unwrap();
    assert!((m + 2.0).abs() < 1e-12, "{m}");
    assert!((minimal_c2(&cap(), &s, 1.0).unwrap() - 16.0 / 72.0).abs() < 1e-10);
    let c2 = minimal_c2(&perturbed(), &s, 0.0).unwrap();
    assert!(c2 > 0.0 && c2 < 1.0, "{c2}");
}

#[test]
fn calabi_margin_on_fixed_families() {
    let coarse = SampleSet::disc([0.0, 0.0], 0.3, 3);
    let fine = SampleSet::disc([0.0, 0.0], 0.3, 6);
    assert!(calabi_margin(&horosphere(), &coarse).unwrap() <= 0.0);
    let a = calabi_margin(&cap(), &coarse).unwrap();
    let b = calabi_margin(&cap(), &fine).unwrap();
    assert!(a.is_finite() && (a - b).abs() <= 0.05 * b.abs(), "{a} {b}");

    let low = HalfspaceGraph::analytic(2, -0.5 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt(), Domain::disc(2, 0.9));
    assert!(matches!(calabi_margin(&low, &coarse), Err(Error::Precondition(_))));
}

#[test]
fn pogorelov_on_fixed_families() {
    let s = SampleSet::disc([0.0, 0.0], 0.4, 3);
    let p = pogorelov_quantities(&cap(), &s).unwrap();
    assert!(p.sup_k_grad_h < 1e-9 && p.sup_k2_sigma.is_finite() && p.sup_k2_sigma > 0.0);
    let p = pogorelov_quantities(&horosphere(), &s).unwrap();
    assert_eq!((p.sup_k2_sigma, p.sup_k_grad_h), (0.0, 0.0));
}

#[test]
fn identity_suite_on_caps() {
    let at0 = identity_suite(&cap(), &[0.0, 0.0]).unwrap();
    assert_eq!(at0.residuals["log_det_derivative_1"], 0.0);
    assert_eq!(at0.residuals["log_det_derivative_2"], 0.0);
    let rep = identity_suite(&cap(), &[0.4, 0.2]).unwrap();
    assert!(rep.residuals.values().all(|v| *v <= 1e-9), "{rep:?}");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = [rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6)];
        let rep = identity_suite(&perturbed(), &p).unwrap();
        assert!(rep.slacks["inverse_diagonal_bound"] >= 0.0, "{p:?} {rep:?}");
        assert!(rep.slacks.values().all(|v| *v >= -1e-10), "{p:?} {rep:?}");
        assert!(rep.residuals.values().all(|v| *v <= 1e-8), "{p:?} {rep:?}");
    }
}

#[test]
fn mean_bound_margin_on_small_spheres() {
    assert_eq!(threshold(2.0), 0.04);
    assert!((4.0 * coefficient(2.0, 0.01) + 3.18).abs() < 5e-3);
    for (center, a) in [([0.0; 3], 0.05), ([0.0, 0.0, -0.02], 0.04), ([0.01, 0.01, -0.03], 0.03)] {
        let patch = BallPatch::stereographic_sphere(center, a, 1.0);
        let rep = mean_bound_margin(&patch, 2.0, 41).unwrap();
        assert!(rep.hypothesis_holds, "{rep:?}");
        assert!(rep.coefficient_condition, "{rep:?}");
        assert!(rep.margin <= 1e-8, "{rep:?}");
    }
}

#[test]
fn boundary_maximum_is_reported() {
    // Off-centre sphere whose farthest point leaves the sampled box.
    let patch = BallPatch::stereographic_sphere([0.3, 0.0, 0.0], 0.05, 0.3);
    assert!(matches!(mean_bound_margin(&patch, 2.0, 21), Err(Error::BoundaryMax)));
}

#[test]
fn tail_check_thresholds() {
    assert!(tail_check(&[1.0, 1.1, 1.2, 1.1, 1.0]).passes);
    assert!(!tail_check(&[1.0, 1.0, 1.0, 1.0, 5.0]).passes);
    assert_eq!(median(&[3.0, 1.0, 2.0, 4.0]), 2.5);
}
