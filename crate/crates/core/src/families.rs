//! Named closed-form surfaces and the JSON surface-spec record.

use serde::{Deserialize, Serialize};

use crate::ball::BallPatch;
use crate::error::{Error, Result};
use crate::expr::{c, x, AnalyticExpr};
use crate::halfspace::{Domain, HalfspaceGraph, Orientation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Halfspace,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Geodesic sphere cap `u = h + √(r² - |x|²)`; principal curvatures `h/r`.
    SphereCap { h: f64, r: f64 },
    /// `u ≡ c`.
    Horosphere { c: f64 },
    /// Equidistant surface `u = m·x + c`.
    Plane { m: Vec<f64>, c: f64 },
    /// Ball-model sphere `|x - center| = a`.
    BallSphere { a: f64, center: [f64; 3] },
    /// Sphere cap plus `amplitude · x₁² x₂²`.
    PerturbedCap { h: f64, r: f64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    #[serde(default)]
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    /// Height expression for a half-space graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<AnalyticExpr>,
    /// Chart expressions in `x1 = s`, `x2 = t` for a ball patch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<[AnalyticExpr; 3]>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(default)]
    pub orientation: Orientation,
    /// Chart normal sign for raw ball charts.
    #[serde(default = "default_sign")]
    pub normal_sign: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
}

fn default_dim() -> usize {
    2
}

fn default_sign() -> f64 {
    1.0
}

pub enum Surface {
    Halfspace(HalfspaceGraph),
    Ball(BallPatch),
}

impl SurfaceSpec {
    pub fn family(model: Model, family: Family) -> SurfaceSpec {
        SurfaceSpec {
            model,
            family: Some(family),
            expr: None,
            chart: None,
            dim: 2,
            domain: None,
            orientation: Orientation::Downward,
            normal_sign: 1.0,
            points: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<Surface> {
        let sources = self.family.is_some() as u8 + self.expr.is_some() as u8 + self.chart.is_some() as u8;
        if sources != 1 {
            return Err(Error::Invalid("a surface spec needs exactly one of `family`, `expr`, `chart`".into()));
        }
        match self.model {
            Model::Halfspace => self.build_halfspace().map(Surface::Halfspace),
            Model::Ball => self.build_ball().map(Surface::Ball),
        }
    }

    pub fn halfspace(&self) -> Result<HalfspaceGraph> {
        match self.build()? {
            Surface::Halfspace(g) => Ok(g),
            Surface::Ball(_) => Err(Error::Invalid("expected a half-space surface".into())),
        }
    }

    pub fn ball(&self) -> Result<BallPatch> {
        match self.build()? {
            Surface::Ball(b) => Ok(b),
            Surface::Halfspace(_) => Err(Error::Invalid("expected a ball surface".into())),
        }
    }

    fn build_halfspace(&self) -> Result<HalfspaceGraph> {
        let n = self.dim;
        if !(1..=crate::jet::MAX_DIM).contains(&n) {
            return Err(Error::Invalid(format!("dim {n} out of range")));
        }
        let (u, default_domain) = if let Some(e) = &self.expr {
            (e.clone(), Domain::disc(n, 0.5))
        } else {
            halfspace_family(self.family.as_ref().unwrap(), n)?
        };
        let domain = self.domain.clone().unwrap_or(default_domain);
        if domain.dim() != n {
            return Err(Error::Invalid(format!("domain has dimension {}, surface has {n}", domain.dim())));
        }
        Ok(HalfspaceGraph::analytic(n, u, domain).with_orientation(self.orientation))
    }

    fn build_ball(&self) -> Result<BallPatch> {
        if let Some(ch) = &self.chart {
            let domain = self
                .domain
                .clone()
                .unwrap_or(Domain::Box { lo: vec![-0.5; 2], hi: vec![0.5; 2] });
            return Ok(BallPatch { chart: ch.clone(), param_domain: domain, normal_sign: self.normal_sign });
        }
        match self.family.as_ref().unwrap() {
            Family::BallSphere { a, center } => {
                let cn = center.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(*a > 0.0) || cn + a > 1.0 {
                    return Err(Error::Invalid(format!("ball_sphere needs a > 0 and |center| + a <= 1, got a = {a}, |center| = {cn}")));
                }
                let mut p = BallPatch::stereographic_sphere(*center, *a, 1.0);
                if let Some(d) = &self.domain {
                    p.param_domain = d.clone();
                }
                Ok(p)
            }
            other => Err(Error::Invalid(format!("family {other:?} is a half-space family"))),
        }
    }
}

fn halfspace_family(f: &Family, n: usize) -> Result<(AnalyticExpr, Domain)> {
    let r2 = AnalyticExpr::norm_sq(n);
    Ok(match f {
        Family::SphereCap { h, r } => {
            if !(*h > *r && *r > 0.0) {
                return Err(Error::Invalid(format!("sphere_cap needs h > r > 0, got h = {h}, r = {r}")));
            }
            (*h + (r * r - r2).sqrt(), Domain::disc(n, 0.7 * r))
        }
        Family::PerturbedCap { h, r, amplitude } => {
            if !(*h > *r && *r > 0.0) || n < 2 {
                return Err(Error::Invalid(format!("perturbed_cap needs h > r > 0 and n >= 2, got h = {h}, r = {r}")));
            }
            if amplitude.abs() > 0.25 * r {
                return Err(Error::Invalid(format!("perturbed_cap amplitude {amplitude} is too large")));
            }
            let bump = *amplitude * (x(0) * x(0) * x(1) * x(1));
            (*h + (r * r - r2).sqrt() + bump, Domain::disc(n, 0.7 * r))
        }
        Family::Horosphere { c: height } => {
            if !(*height > 0.0) {
                return Err(Error::Invalid(format!("horosphere needs c > 0, got {height}")));
            }
            (c(*height), Domain::disc(n, 1.0))
        }
        Family::Plane { m, c: height } => {
            if m.len() != n {
                return Err(Error::Invalid(format!("plane slope has {} components, dim is {n}", m.len())));
            }
            if !(*height > 0.0) {
                return Err(Error::Invalid(format!("plane needs c > 0, got {height}")));
            }
            let mut u = c(*height);
            for (i, mi) in m.iter().enumerate() {
                if *mi != 0.0 {
                    u = u + *mi * x(i);
                }
            }
            let slope = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            let radius = if slope > 0.0 { (0.5 * height / slope).min(1.0) } else { 1.0 };
            (u, Domain::disc(n, radius))
        }
        Family::BallSphere { .. } => {
            return Err(Error::Invalid("ball_sphere is a ball-model family".into()));
        }
    })
}

/// A labelled built-in surface.
pub struct Builtin {
    pub id: String,
    pub spec: SurfaceSpec,
}

fn hs(id: &str, f: Family) -> Builtin {
    Builtin { id: id.to_string(), spec: SurfaceSpec::family(Model::Halfspace, f) }
}

/// Half-space families used by the verification suite.
pub fn halfspace_builtins() -> Vec<Builtin> {
    vec![
        hs("sphere_cap_2_1", Family::SphereCap { h: 2.0, r: 1.0 }),
        hs("sphere_cap_3_1", Family::SphereCap { h: 3.0, r: 1.0 }),
        hs("sphere_cap_2_0.5", Family::SphereCap { h: 2.0, r: 0.5 }),
        hs("sphere_cap_1.5_1", Family::SphereCap { h: 1.5, r: 1.0 }),
        hs("horosphere_2", Family::Horosphere { c: 2.0 }),
        hs("plane_0.5", Family::Plane { m: vec![0.5, 0.0], c: 2.0 }),
        hs("plane_1", Family::Plane { m: vec![1.0, 0.0], c: 2.0 }),
        hs("plane_2", Family::Plane { m: vec![2.0, 0.0], c: 2.0 }),
        hs("perturbed_cap", Family::PerturbedCap { h: 2.0, r: 1.0, amplitude: 0.02 }),
    ]
}

/// Ball-model patches used by the verification suite.
pub fn ball_builtins() -> Vec<(String, BallPatch)> {
    let ellipsoid = [
        0.3 * x(0),
        0.2 * x(1),
        0.1 + 0.05 * (x(0) * x(0) - x(1) * x(1)),
    ];
    vec![
        ("ball_sphere_0.5".to_string(), BallPatch::stereographic_sphere([0.0; 3], 0.5, 1.0)),
        ("ball_sphere_offcenter".to_string(), BallPatch::stereographic_sphere([0.2, 0.0, 0.0], 0.3, 1.0)),
        ("horosphere_patch".to_string(), BallPatch::stereographic_sphere([0.0, 0.0, 0.5], 0.5, 1.0)),
        (
            "saddle_patch".to_string(),
            BallPatch {
                chart: ellipsoid,
                param_domain: Domain::Box { lo: vec![-0.5; 2], hi: vec![0.5; 2] },
                normal_sign: 1.0,
            },
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_round_trip() {
        let s = r#"{"model":"halfspace","family":{"sphere_cap":{"h":2,"r":1}},"points":[[0,0]]}"#;
        let spec: SurfaceSpec = serde_json::from_str(s).unwrap();
        assert_eq!(spec.family, Some(Family::SphereCap { h: 2.0, r: 1.0 }));
        let again: SurfaceSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, again);
        assert!(spec.halfspace().is_ok());
    }

    #[test]
    fn parameter_validation() {
        let bad = SurfaceSpec::family(Model::Halfspace, Family::SphereCap { h: 1.0, r: 2.0 });
        assert!(matches!(bad.build(), Err(Error::Invalid(_))));
        let bad = SurfaceSpec::family(Model::Ball, Family::BallSphere { a: 0.8, center: [0.5, 0.0, 0.0] });
        assert!(bad.build().is_err());
        let mut both = SurfaceSpec::family(Model::Halfspace, Family::Horosphere { c: 1.0 });
        both.expr = Some(c(1.0));
        assert!(both.build().is_err());
    }

    #[test]
    fn raw_expression_spec() {
        let s = r#"{"expr":"(add 2 (sqrt (sub 1 (add (mul x1 x1) (mul x2 x2)))))"}"#;
        let g: SurfaceSpec = serde_json::from_str(s).unwrap();
        let graph = g.halfspace().unwrap();
        assert_eq!(graph.u(&[0.0, 0.0]).unwrap(), 3.0);
    }
}
