use hypersurf::expr::{c, x, AnalyticExpr};
use hypersurf::fd::Stencil;
use hypersurf::halfspace::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn horosphere_forms() {
    let g = HalfspaceGraph::analytic(2, c(2.0), Domain::disc(2, 1.0));
    let f = fundamental_forms(&g, &[0.3, -0.2]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let d = if i == j { 1.0 } else { 0.0 };
            assert!(close(f.g[i][j], d / 4.0, 1e-15));
            assert!(close(f.h[i][j], -d / 4.0, 1e-15));
        }
    }
    let rep = curvature_report(&g, &[0.3, -0.2]).unwrap();
    assert_eq!(rep.kappa, vec![-1.0, -1.0]);
    assert_eq!(rep.k_intrinsic, Some(0.0));
}

#[test]
fn cap_top_values() {
    let g = HalfspaceGraph::analytic(2, 2.0 + (1.0 - AnalyticExpr::norm_sq(2)).sqrt(), Domain::disc(2, 0.7));
    let rep = curvature_report(&g, &[0.0, 0.0]).unwrap();
    for k in &rep.kappa {
        assert!(close(*k, 2.0, 1e-14));
    }
    assert!(close(rep.k_ext, 4.0, 1e-13));
    assert!(close(rep.r_scalar, 8.0, 1e-13));
    assert!(close(rep.h_trace, 4.0, 1e-14) && close(rep.h_mean, 2.0, 1e-14));
    let rho = rho_hessian(&g, &[0.0, 0.0]).unwrap();
    assert!(close(rho.hess[0][0], 2.0, 1e-14) && close(rho.hess[1][1], 2.0, 1e-14));
    assert!(rho.det_identity_residual < 1e-13);
}

#[test]
fn tilted_plane() {
    let g = HalfspaceGraph::analytic(2, x(0) + 2.0, Domain::disc(2, 1.0));
    let rep = curvature_report(&g, &[0.1, 0.4]).unwrap();
    for k in &rep.kappa {
        assert!(close(*k, -1.0 / 2f64.sqrt(), 1e-14));
    }
    assert!(close(rep.nu_vertical, -1.0 / 2f64.sqrt(), 1e-15));
}

#[test]
fn finite_difference_route_converges() {
    let g = HalfspaceGraph::analytic(2, 2.0 + (0.25 - AnalyticExpr::norm_sq(2)).sqrt(), Domain::disc(2, 0.35));
    let p = [0.2, 0.1];
    let e = |dx: f64, s| {
        let r = curvature_report_fd(&g, &p, dx, s).unwrap();
        r.kappa.iter().fold(0.0f64, |a, k| a.max((k - 4.0).abs()))
    };
    assert!(e(0.01, Stencil::Fourth) <= 4e-4);
    let ratio = e(0.01, Stencil::Second) / e(0.005, Stencil::Second);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");
}

#[test]
fn non_positive_height_is_rejected() {
    let g = HalfspaceGraph::analytic(2, x(0), Domain::disc(2, 1.0));
    assert!(curvature_report(&g, &[-0.1, 0.0]).is_err());
}
