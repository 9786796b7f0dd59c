//! The isometry between the Poincaré ball and the upper half-space, and the
//! normalization that makes a neighbourhood of a surface point a graph.
//!
//! The map used is `ψ(p) = (2x, 2y, 1-|p|²)/(x² + y² + (z+1)²)`, the
//! Cayley-type map `φ` followed by the reflection `z ↦ -z`. `ψ` is an
//! involution, so both directions share one formula. Without the reflection
//! the map pairs the ball with the lower half-space.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::ball::{self, BallPatch};
use crate::error::{Error, Result};
use crate::halfspace::{generalized_eigenvalues, Domain, HalfspaceGraph, Height, HeightSource, Orientation};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    BallToHalfspace,
    HalfspaceToBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyMap {
    pub direction: Direction,
    pub reflection_applied: bool,
}

impl CayleyMap {
    pub fn ball_to_halfspace() -> CayleyMap {
        CayleyMap { direction: Direction::BallToHalfspace, reflection_applied: true }
    }

    pub fn halfspace_to_ball() -> CayleyMap {
        CayleyMap { direction: Direction::HalfspaceToBall, reflection_applied: true }
    }

    pub fn inverse(self) -> CayleyMap {
        let direction = match self.direction {
            Direction::BallToHalfspace => Direction::HalfspaceToBall,
            Direction::HalfspaceToBall => Direction::BallToHalfspace,
        };
        CayleyMap { direction, ..self }
    }

    fn half_sign(self) -> f64 {
        if self.reflection_applied { 1.0 } else { -1.0 }
    }

    fn check_source(self, p: &[f64; 3]) -> Result<()> {
        match self.direction {
            Direction::BallToHalfspace => {
                let r2 = p.iter().map(|v| v * v).sum::<f64>();
                if !(r2 < 1.0) {
                    return Err(Error::MapDomain(format!("{p:?} is not inside the unit ball")));
                }
            }
            Direction::HalfspaceToBall => {
                if !(self.half_sign() * p[2] > 0.0) {
                    return Err(Error::MapDomain(format!("{p:?} is not in the open half-space")));
                }
            }
        }
        Ok(())
    }

    pub fn map_point(self, p: [f64; 3]) -> Result<[f64; 3]> {
        self.check_source(&p)?;
        let j: [Jet; 3] = std::array::from_fn(|i| Jet::constant(1, 0, p[i]));
        let out = self.map_jets(&j)?;
        Ok(std::array::from_fn(|i| out[i].value()))
    }

    /// The map applied to jets of a point (for differentials and charts).
    pub fn map_jets(self, p: &[Jet; 3]) -> Result<[Jet; 3]> {
        let s = self.half_sign();
        // Work in the upper half-space convention; the unreflected map is
        // R∘ψ (ball → lower half-space) and ψ∘R (lower half-space → ball).
        let q = match self.direction {
            Direction::BallToHalfspace => p.clone(),
            Direction::HalfspaceToBall => [p[0].clone(), p[1].clone(), &p[2] * s],
        };
        let mut out = psi(&q)?;
        if self.direction == Direction::BallToHalfspace {
            out[2] = &out[2] * s;
        }
        Ok(out)
    }

    /// `|⟨dψ v₁, dψ v₂⟩_target - ⟨v₁, v₂⟩_source|`.
    pub fn isometry_residual(self, p: [f64; 3], v1: [f64; 3], v2: [f64; 3]) -> Result<f64> {
        self.isometry_residual_scaled(p, v1, v2, 1.0)
    }

    /// Negative-control form: the map is precomposed with `p ↦ scale·p`,
    /// which is not an isometry unless `scale = 1`.
    pub fn isometry_residual_scaled(self, p: [f64; 3], v1: [f64; 3], v2: [f64; 3], scale: f64) -> Result<f64> {
        let target = scale_point(p, scale);
        self.check_source(&target)?;
        let seed = Jet::seed(&p, 1);
        let scaled: [Jet; 3] = std::array::from_fn(|i| &seed[i] * scale);
        let img = self.map_jets(&scaled)?;
        let push = |v: [f64; 3]| -> [f64; 3] {
            std::array::from_fn(|i| (0..3).map(|k| img[i].der(&[k]) * v[k]).sum())
        };
        let (w1, w2) = (push(v1), push(v2));
        let q: [f64; 3] = std::array::from_fn(|i| img[i].value());
        let src = metric_factor_source(self, &p) * dot3(v1, v2);
        let tgt = metric_factor_target(self, &q) * dot3(w1, w2);
        Ok((tgt - src).abs())
    }
}

fn scale_point(p: [f64; 3], s: f64) -> [f64; 3] {
    [p[0] * s, p[1] * s, p[2] * s]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn ball_factor(p: &[f64; 3]) -> f64 {
    let l = 2.0 / (1.0 - dot3(*p, *p));
    l * l
}

fn metric_factor_source(m: CayleyMap, p: &[f64; 3]) -> f64 {
    match m.direction {
        Direction::BallToHalfspace => ball_factor(p),
        Direction::HalfspaceToBall => 1.0 / (p[2] * p[2]),
    }
}

fn metric_factor_target(m: CayleyMap, q: &[f64; 3]) -> f64 {
    match m.direction {
        Direction::BallToHalfspace => 1.0 / (q[2] * q[2]),
        Direction::HalfspaceToBall => ball_factor(q),
    }
}

/// `ψ(p) = (2x, 2y, 1-|p|²)/(x² + y² + (z+1)²)`.
fn psi(p: &[Jet; 3]) -> Result<[Jet; 3]> {
    let den = p[0].square() + p[1].square() + (&p[2] + 1.0).square();
    if den.value().abs() < 1e-300 {
        return Err(Error::Pole);
    }
    let inv = den.recip()?;
    let r2 = p[0].square() + p[1].square() + p[2].square();
    Ok([2.0 * (&p[0] * &inv), 2.0 * (&p[1] * &inv), (1.0 - r2) * &inv])
}

pub fn ball_distance(x: [f64; 3], y: [f64; 3]) -> f64 {
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let num = dot3(d, d).sqrt();
    2.0 * (num / ((1.0 - dot3(x, x)) * (1.0 - dot3(y, y))).sqrt()).asinh()
}

pub fn halfspace_distance(p: [f64; 3], q: [f64; 3]) -> f64 {
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    2.0 * (dot3(d, d).sqrt() / (2.0 * (p[2] * q[2]).sqrt())).asinh()
}

/// Möbius addition `a ⊕ x` in the ball, on jets.
fn mobius_add(a: [f64; 3], x: &[Jet; 3]) -> Result<[Jet; 3]> {
    let a2 = dot3(a, a);
    let ax = &x[0] * a[0] + &x[1] * a[1] + &x[2] * a[2];
    let x2 = x[0].square() + x[1].square() + x[2].square();
    let ca = 1.0 + 2.0 * &ax + &x2;
    let den = 1.0 + 2.0 * &ax + a2 * &x2;
    let inv = den.recip().map_err(|_| Error::Pole)?;
    Ok(std::array::from_fn(|i| (&ca * a[i] + &x[i] * (1.0 - a2)) * &inv))
}

fn mobius_add_f(a: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let j: [Jet; 3] = std::array::from_fn(|i| Jet::constant(1, 0, x[i]));
    let out = mobius_add(a, &j).expect("Möbius addition inside the ball");
    std::array::from_fn(|i| out[i].value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicPoint {
    pub point: [f64; 3],
    /// Set when the point is within `1e-12` of the ideal boundary.
    pub precision_warning: bool,
}

/// Unit-speed ball geodesic from `p` with initial direction `dir`.
pub fn geodesic(p: [f64; 3], dir: [f64; 3], t: f64) -> Result<GeodesicPoint> {
    if !(dot3(p, p) < 1.0) {
        return Err(Error::MapDomain(format!("{p:?} is not inside the unit ball")));
    }
    let n = dot3(dir, dir).sqrt();
    if !(n > 0.0) {
        return Err(Error::Invalid("geodesic direction is zero".into()));
    }
    let r = (t / 2.0).tanh();
    let v = [dir[0] / n * r, dir[1] / n * r, dir[2] / n * r];
    let point = mobius_add_f(p, v);
    let precision_warning = 1.0 - dot3(point, point).sqrt() < 1e-12;
    Ok(GeodesicPoint { point, precision_warning })
}

/// Ball isometry followed by `ψ` that brings a surface point to `(0, 0, T)`
/// with its inner normal pointing straight down.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NormalizationMotion {
    /// Surface point moved to the ball origin by `x ↦ (-P) ⊕ x`.
    pub base_point: [f64; 3],
    /// Rotation (row-major) taking the inner normal to `+e₃`.
    pub rotation: [[f64; 3]; 3],
    /// Hyperbolic length of the translation along the z-axis.
    pub geodesic_shift: f64,
    /// Euclidean offset `s` with `x ↦ (0, 0, -s) ⊕ x`.
    pub axis_offset: f64,
    pub target_height: f64,
    pub map: CayleyMap,
}

impl NormalizationMotion {
    /// `ψ ∘ T_(0,0,-s) ∘ Rot ∘ T_(-P)`, on jets.
    pub fn apply_jets(&self, p: &[Jet; 3]) -> Result<[Jet; 3]> {
        let bp = self.base_point;
        let t1 = mobius_add([-bp[0], -bp[1], -bp[2]], p)?;
        let r = self.rotation;
        let t2: [Jet; 3] = std::array::from_fn(|i| &(&(&t1[0] * r[i][0]) + &(&t1[1] * r[i][1])) + &(&t1[2] * r[i][2]));
        let t3 = mobius_add([0.0, 0.0, -self.axis_offset], &t2)?;
        self.map.map_jets(&t3)
    }

    pub fn apply(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        let j: [Jet; 3] = std::array::from_fn(|i| Jet::constant(1, 0, p[i]));
        let out = self.apply_jets(&j)?;
        Ok(std::array::from_fn(|i| out[i].value()))
    }

    pub fn ball_motion(&self, p: [f64; 3]) -> [f64; 3] {
        let bp = self.base_point;
        let t1 = mobius_add_f([-bp[0], -bp[1], -bp[2]], p);
        let r = self.rotation;
        let t2 = std::array::from_fn(|i| r[i][0] * t1[0] + r[i][1] * t1[1] + r[i][2] * t1[2]);
        mobius_add_f([0.0, 0.0, -self.axis_offset], t2)
    }
}

/// Rotation taking the unit vector `n` to `+e₃`.
fn rotation_to_e3(n: Vector3<f64>) -> Matrix3<f64> {
    let e3 = Vector3::z();
    let c = n.dot(&e3);
    if c > 1.0 - 1e-15 {
        return Matrix3::identity();
    }
    if c < -1.0 + 1e-15 {
        return Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0));
    }
    let axis = n.cross(&e3).normalize();
    let angle = c.clamp(-1.0, 1.0).acos();
    *nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis), angle).matrix()
}

pub fn motion_for(patch: &BallPatch, p: &[f64], target_height: f64) -> Result<NormalizationMotion> {
    if !(target_height > 0.0) {
        return Err(Error::Invalid(format!("target height must be positive, got {target_height}")));
    }
    let geo = match patch.geometry(p, 2) {
        Ok(g) => g,
        Err(Error::Degenerate(_)) => return Err(Error::NonGraphical { admissible_radius: 0.0 }),
        Err(e) => return Err(e),
    };
    let base = [geo.x[0].value(), geo.x[1].value(), geo.x[2].value()];
    let n = Vector3::new(geo.n_euc[0].value(), geo.n_euc[1].value(), geo.n_euc[2].value());
    let rot = rotation_to_e3(n);
    let s = (target_height - 1.0) / (target_height + 1.0);
    Ok(NormalizationMotion {
        base_point: base,
        rotation: std::array::from_fn(|i| std::array::from_fn(|j| rot[(i, j)])),
        geodesic_shift: 2.0 * s.abs().atanh(),
        axis_offset: s,
        target_height,
        map: CayleyMap::ball_to_halfspace(),
    })
}

/// Height of the transported surface, obtained by inverting the horizontal
/// part of `motion ∘ chart` with Newton's method and jet series reversion.
pub struct TransportedHeight {
    patch: BallPatch,
    motion: NormalizationMotion,
    base_param: [f64; 2],
}

impl TransportedHeight {
    fn image_jets(&self, q: [f64; 2], order: usize) -> Result<[Jet; 3]> {
        let x = self.patch.chart_jets(&q, order)?;
        self.motion.apply_jets(&x)
    }

    /// Parameter `q` with horizontal image `y`.
    pub fn solve_param(&self, y: [f64; 2]) -> Result<[f64; 2]> {
        let mut q = self.base_param;
        for _ in 0..60 {
            let img = self.image_jets(q, 1)?;
            let f = [img[0].value() - y[0], img[1].value() - y[1]];
            if f[0].abs().max(f[1].abs()) < 1e-15 {
                return Ok(q);
            }
            let (a, b, c, d) = (img[0].der(&[0]), img[0].der(&[1]), img[1].der(&[0]), img[1].der(&[1]));
            let det = a * d - b * c;
            if det.abs() < 1e-14 {
                return Err(Error::InvalidGraph("horizontal projection is singular".into()));
            }
            let step = [(d * f[0] - b * f[1]) / det, (-c * f[0] + a * f[1]) / det];
            q = [q[0] - step[0], q[1] - step[1]];
            if step[0].abs().max(step[1].abs()) < 1e-15 {
                return Ok(q);
            }
        }
        let img = self.image_jets(q, 0)?;
        let res = (img[0].value() - y[0]).abs().max((img[1].value() - y[1]).abs());
        if res < 1e-12 {
            Ok(q)
        } else {
            Err(Error::InvalidGraph(format!("could not invert the horizontal projection at {y:?}")))
        }
    }

    /// Euclidean unit normal of the transported surface at parameter `q`.
    fn vertical_normal(&self, q: [f64; 2]) -> Result<f64> {
        let img = self.image_jets(q, 1)?;
        let tu = Vector3::new(img[0].der(&[0]), img[1].der(&[0]), img[2].der(&[0]));
        let tv = Vector3::new(img[0].der(&[1]), img[1].der(&[1]), img[2].der(&[1]));
        let c = tu.cross(&tv);
        Ok(c[2] / c.norm())
    }
}

impl HeightSource for TransportedHeight {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, y: &[f64], order: usize) -> Result<Jet> {
        let q = self.solve_param([y[0], y[1]])?;
        let img = self.image_jets(q, order)?;
        // Series reversion: G(y) = q + ..., with F(G(y)) = y.
        let (a, b, c, d) = (img[0].der(&[0]), img[0].der(&[1]), img[1].der(&[0]), img[1].der(&[1]));
        let det = a * d - b * c;
        let ji = [[d / det, -b / det], [-c / det, a / det]];
        let ys = Jet::seed(y, order);
        let mut g: Vec<Jet> = (0..2)
            .map(|i| {
                let lin = &(&ys[0] - y[0]) * ji[i][0] + &(&ys[1] - y[1]) * ji[i][1];
                lin + q[i]
            })
            .collect();
        for _ in 0..=order {
            let f0 = img[0].compose(&g);
            let f1 = img[1].compose(&g);
            let r0 = &f0 - &ys[0];
            let r1 = &f1 - &ys[1];
            g = (0..2)
                .map(|i| &g[i] - &(&(&r0 * ji[i][0]) + &(&r1 * ji[i][1])))
                .collect();
        }
        Ok(img[2].compose(&g))
    }

    fn describe(&self) -> String {
        format!("transported patch at {:?}", self.base_param)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Normalization {
    pub motion: NormalizationMotion,
    pub radius: f64,
    pub u0: f64,
    pub grad0: [f64; 2],
    pub kappa_ball: Vec<f64>,
    pub kappa_halfspace: Vec<f64>,
    pub min_nu_vertical_sq: f64,
    pub admissibility_bound: f64,
}

/// Steps 1-3 of the normalization: the motion, the graph over a disc of
/// admissible radius, and the curvature comparison at the base point.
pub fn normalize_neighborhood(
    patch: &BallPatch,
    p: &[f64],
    target_height: f64,
) -> Result<(Normalization, HalfspaceGraph)> {
    normalize_with_radius(patch, p, target_height, 0.5 * target_height)
}

pub fn normalize_with_radius(
    patch: &BallPatch,
    p: &[f64],
    target_height: f64,
    initial_radius: f64,
) -> Result<(Normalization, HalfspaceGraph)> {
    let motion = motion_for(patch, p, target_height)?;
    let source = TransportedHeight { patch: patch.clone(), motion: motion.clone(), base_param: [p[0], p[1]] };
    let source = Arc::new(source);

    let mut radius = initial_radius;
    let mut accepted = None;
    for _ in 0..40 {
        if let Some(stats) = admissible(&source, radius) {
            accepted = Some(stats);
            break;
        }
        radius *= 0.5;
    }
    let (min_nu2, bound) = accepted.ok_or(Error::NonGraphical { admissible_radius: radius })?;

    let graph = HalfspaceGraph {
        dim: 2,
        height: Height::Source(source.clone()),
        domain: Domain::disc(2, radius),
        orientation: Orientation::Downward,
    };
    let uj = graph.u_jet(&[0.0, 0.0], 2)?;
    let hs = crate::halfspace::curvature_report(&graph, &[0.0, 0.0])?;
    let forms = ball::ball_forms(patch, p)?;
    let kappa_ball = generalized_eigenvalues(
        &[vec![forms.l, forms.m], vec![forms.m, forms.n]],
        &[vec![forms.e, forms.f], vec![forms.f, forms.g]],
    )?;
    Ok((
        Normalization {
            motion,
            radius,
            u0: uj.value(),
            grad0: [uj.der(&[0]), uj.der(&[1])],
            kappa_ball,
            kappa_halfspace: hs.kappa,
            min_nu_vertical_sq: min_nu2,
            admissibility_bound: bound,
        },
        graph,
    ))
}

/// Graph test on a ring sample of the disc of radius `r`. Returns
/// `(min (ν^{n+1})², 1 - (min u / (4 max u))²)` when the disc passes.
fn admissible(src: &TransportedHeight, r: f64) -> Option<(f64, f64)> {
    let mut min_u = f64::INFINITY;
    let mut max_u: f64 = 0.0;
    let mut min_nu2 = f64::INFINITY;
    let rings = [0.0, 0.25, 0.5, 0.75, 1.0];
    for (k, frac) in rings.iter().enumerate() {
        let count = if k == 0 { 1 } else { 16 };
        for j in 0..count {
            let th = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
            let y = [r * frac * th.cos(), r * frac * th.sin()];
            let q = src.solve_param(y).ok()?;
            if !src.patch.param_domain.contains(&q) {
                return None;
            }
            let img = src.image_jets(q, 0).ok()?;
            let u = img[2].value();
            if !(u > 0.0) {
                return None;
            }
            min_u = min_u.min(u);
            max_u = max_u.max(u);
            let nu = src.vertical_normal(q).ok()?;
            min_nu2 = min_nu2.min(nu * nu);
        }
    }
    let bound = 1.0 - (min_u / (4.0 * max_u)).powi(2);
    if min_nu2 > bound {
        Some((min_nu2, bound))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_and_axis_images() {
        let m = CayleyMap::ball_to_halfspace();
        assert_eq!(m.map_point([0.0; 3]).unwrap(), [0.0, 0.0, 1.0]);
        let q = m.map_point([0.0, 0.0, 0.5]).unwrap();
        assert!((q[2] - 1.0 / 3.0).abs() < 1e-15);
        let unreflected = CayleyMap { reflection_applied: false, ..m };
        assert_eq!(unreflected.map_point([0.0; 3]).unwrap(), [0.0, 0.0, -1.0]);
        assert!(matches!(m.map_point([0.0, 0.0, 1.0]), Err(Error::MapDomain(_))));
        assert!(matches!(m.inverse().map_point([0.0, 0.0, -1.0]), Err(Error::MapDomain(_))));
    }

    #[test]
    fn distances_agree() {
        let d = ball_distance([0.0; 3], [0.0, 0.0, 0.5]);
        assert!((d - 3f64.ln()).abs() < 1e-15);
        let dh = halfspace_distance([0.0, 0.0, 1.0], [0.0, 0.0, 1.0 / 3.0]);
        assert!((dh - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn radial_geodesic() {
        let g = geodesic([0.0; 3], [0.0, 0.0, 1.0], 3f64.ln()).unwrap();
        assert!((g.point[2] - 0.5).abs() < 1e-15);
        let out = geodesic([0.0; 3], [1.0, 0.0, 0.0], 0.7).unwrap().point;
        assert!(ball_distance([0.0; 3], out) - 0.7 < 1e-14);
    }

    #[test]
    fn sphere_normalization() {
        let patch = BallPatch::stereographic_sphere([0.0; 3], 0.5, 1.0);
        let (n, graph) = normalize_neighborhood(&patch, &[0.3, -0.2], 2.0).unwrap();
        assert!((n.u0 - 2.0).abs() < 1e-12);
        assert!(n.grad0[0].abs() < 1e-10 && n.grad0[1].abs() < 1e-10);
        for k in &n.kappa_halfspace {
            assert!((k - 1.25).abs() < 1e-9, "{k}");
        }
        let rep = crate::halfspace::curvature_report(&graph, &[0.1 * n.radius, 0.0]).unwrap();
        assert!((rep.kappa[0] - 1.25).abs() < 1e-9);
    }
}
