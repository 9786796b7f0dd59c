use std::sync::Arc;

use hypersurf::expr::{AnalyticExpr, c, x};
use hypersurf::halfspace::{curvature_report, Domain, HalfspaceGraph};
use hypersurf::jet::{layout, Jet};
use hypersurf::transform::CayleyMap;
use proptest::prelude::*;

fn jet_strategy(order: usize) -> impl Strategy<Value = Jet> {
    let len = layout(2, order).len();
    (1.0..3.0f64, prop::collection::vec(-1.0..1.0f64, len - 1)).prop_map(move |(v, rest)| {
        let mut c = vec![v];
        c.extend(rest);
        Jet::from_coeffs(2, order, c).unwrap()
    })
}

fn expr_strategy() -> impl Strategy<Value = AnalyticExpr> {
    let leaf = prop_oneof![(-4.0..4.0f64).prop_map(c), (0usize..2).prop_map(x)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| AnalyticExpr::Add(Arc::new(a), Arc::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            inner.clone().prop_map(|a| -a),
            inner.clone().prop_map(AnalyticExpr::sqrt),
            inner.clone().prop_map(AnalyticExpr::exp),
            inner.clone().prop_map(AnalyticExpr::ln),
            (inner, -3i32..4).prop_map(|(a, n)| a.powi(n)),
        ]
    })
}

proptest! {
    #[test]
    fn leibniz_rule(a in jet_strategy(4), b in jet_strategy(4), i in 0usize..2) {
        let lhs = (&a * &b).deriv(i);
        let rhs = &a.deriv(i) * &b + &a * &b.deriv(i);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10, "{:?} {:?}", lhs, rhs);
    }

    #[test]
    fn sqrt_squares_back(a in jet_strategy(5)) {
        let back = a.sqrt().unwrap().square();
        prop_assert!(back.max_abs_diff(&a) <= 1e-9 * a.coeffs().iter().fold(1.0f64, |m, v| m.max(v.abs())));
    }

    #[test]
    fn reciprocal_inverts(a in jet_strategy(4)) {
        let one = &a * &a.recip().unwrap();
        prop_assert!(one.max_abs_diff(&Jet::constant(2, 4, 1.0)) <= 1e-9);
    }

    #[test]
    fn s_expressions_round_trip(e in expr_strategy()) {
        let text = e.to_string();
        let parsed: AnalyticExpr = text.parse().unwrap();
        prop_assert_eq!(parsed.to_string(), text);
    }

    #[test]
    fn orientation_flip_negates_curvatures(h in 1.5..4.0f64, r in 0.3..1.0f64, t in 0.0..0.6f64, phi in 0.0..std::f64::consts::TAU) {
        let u = h + (r * r - AnalyticExpr::norm_sq(2)).sqrt() + 0.05 * x(0) * x(1);
        let g = HalfspaceGraph::analytic(2, u, Domain::disc(2, 0.7 * r));
        let p = [0.7 * r * t * phi.cos(), 0.7 * r * t * phi.sin()];
        let down = curvature_report(&g, &p).unwrap();
        let up = curvature_report(&g.clone().with_orientation(g.orientation.flip()), &p).unwrap();
        for (a, b) in down.kappa.iter().zip(up.kappa.iter().rev()) {
            prop_assert!((a + b).abs() <= 1e-12);
        }
        prop_assert!((down.k_ext - up.k_ext).abs() <= 1e-10);
        prop_assert!((down.h_mean + up.h_mean).abs() <= 1e-12);
    }

    #[test]
    fn cayley_map_is_an_isometry(
        p in prop::array::uniform3(-0.5..0.5f64),
        v1 in prop::array::uniform3(-1.0..1.0f64),
        v2 in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let m = CayleyMap::ball_to_halfspace();
        prop_assert!(m.isometry_residual(p, v1, v2).unwrap() <= 1e-10);
        let q = m.map_point(p).unwrap();
        prop_assert!(q[2] > 0.0);
        prop_assert!(m.inverse().isometry_residual(q, v1, v2).unwrap() <= 1e-10 * (1.0 / (q[2] * q[2])).max(1.0));
        let back = m.inverse().map_point(q).unwrap();
        for k in 0..3 {
            prop_assert!((back[k] - p[k]).abs() <= 1e-13);
        }
    }
}
