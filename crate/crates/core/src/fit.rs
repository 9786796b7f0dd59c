//! Local least-squares quintic fits that turn solver grids into heights
//! with jets up to order five.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::halfspace::HeightSource;
use crate::jet::{layout, Jet};
use crate::solver::{Grid, GridSolution, NodeKind};

const FIT_ORDER: usize = 5;

/// Grid heights read through a quintic fit over the `(2w+1)²` node block
/// around the nearest node.
#[derive(Debug, Clone)]
pub struct GridHeight {
    grid: Grid,
    u: Vec<f64>,
    half_width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitQuality {
    /// RMS of the least-squares residual over the block.
    pub rms_residual: f64,
    /// `Δx² max|∂⁴u| / 12`, the local truncation scale of the solver stencil.
    pub discretization_estimate: f64,
    /// `rms_residual ≤ 10 × discretization_estimate`.
    pub usable: bool,
}

impl GridHeight {
    pub fn new(sol: &GridSolution) -> GridHeight {
        GridHeight { grid: sol.grid.clone(), u: sol.u.clone(), half_width: 3 }
    }

    pub fn with_half_width(mut self, w: usize) -> GridHeight {
        self.half_width = w.max(3);
        self
    }

    fn nearest(&self, x: &[f64]) -> Result<usize> {
        let half = (self.grid.n / 2) as f64;
        let i = (x[0] / self.grid.dx + half).round();
        let j = (x[1] / self.grid.dx + half).round();
        let n = self.grid.n as f64;
        if !(i >= 0.0 && j >= 0.0 && i < n && j < n) {
            return Err(Error::InvalidGraph(format!("{x:?} is outside the grid")));
        }
        let k = j as usize * self.grid.n + i as usize;
        if !self.grid.block_active(k, self.half_width) {
            return Err(Error::InvalidGraph(format!("{x:?} is too close to the boundary for a quintic fit")));
        }
        Ok(k)
    }

    /// Derivatives `∂^α u(x)` for `|α| ≤ 5` and the fit quality.
    pub fn fit(&self, x: &[f64]) -> Result<(Vec<f64>, FitQuality)> {
        if x.len() != 2 {
            return Err(Error::DimMismatch { expected: 2, got: x.len() });
        }
        let k0 = self.nearest(x)?;
        let lay = layout(2, FIT_ORDER);
        let alphas = lay.alphas();
        let w = self.half_width as i64;
        let h = self.grid.dx;
        let n = self.grid.n as i64;
        let rows = ((2 * w + 1) * (2 * w + 1)) as usize;
        let mut a = DMatrix::<f64>::zeros(rows, alphas.len());
        let mut b = DVector::<f64>::zeros(rows);
        let mut r = 0;
        for dj in -w..=w {
            for di in -w..=w {
                let k = (k0 as i64 + dj * n + di) as usize;
                debug_assert!(self.grid.kind[k] != NodeKind::Inactive);
                let p = self.grid.node_coord(k);
                let (sx, sy) = ((p[0] - x[0]) / h, (p[1] - x[1]) / h);
                for (c, al) in alphas.iter().enumerate() {
                    a[(r, c)] = sx.powi(al[0] as i32) * sy.powi(al[1] as i32);
                }
                b[r] = self.u[k];
                r += 1;
            }
        }
        let coef = a
            .clone()
            .svd(true, true)
            .solve(&b, 1e-13)
            .map_err(|e| Error::Linear(e.to_string()))?;
        let resid = &a * &coef - &b;
        let rms = (resid.norm_squared() / rows as f64).sqrt();
        let mut derivs = vec![0.0; alphas.len()];
        let mut d4: f64 = 0.0;
        for (c, al) in alphas.iter().enumerate() {
            let ord = (al[0] + al[1]) as i32;
            let fact = factorial(al[0] as usize) * factorial(al[1] as usize);
            derivs[c] = coef[c] * fact / h.powi(ord);
            if ord == 4 {
                d4 = d4.max(derivs[c].abs());
            }
        }
        let est = h * h * d4 / 12.0;
        // Both scales can sit at roundoff for polynomial data.
        let usable = rms <= 10.0 * est.max(1e-13 * b.amax());
        Ok((derivs, FitQuality { rms_residual: rms, discretization_estimate: est, usable }))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl HeightSource for GridHeight {
    fn dim(&self) -> usize {
        2
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        if order > FIT_ORDER {
            return Err(Error::OutOfOrder { requested: order, order: FIT_ORDER });
        }
        let (d, _) = self.fit(x)?;
        let len = layout(2, order).len();
        Jet::from_coeffs(2, order, d[..len].to_vec())
    }

    fn describe(&self) -> String {
        format!("quintic fit of a {}x{} grid, spacing {}", self.grid.n, self.grid.n, self.grid.dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{Grid, GridSolution, NewtonStats, Regularization};

    #[test]
    fn reproduces_quintic_polynomials() {
        let grid = Grid::new(0.6, 0.05).unwrap();
        let f = |p: [f64; 2]| 3.0 + p[0] * p[0] * p[1] - 0.5 * p[1].powi(5) + p[0].powi(3) * p[1].powi(2);
        let u = (0..grid.kind.len()).map(|k| f(grid.node_coord(k))).collect();
        let sol = GridSolution {
            grid,
            u,
            eps: 0.0,
            regularization: Regularization::CurvatureShift,
            newton_stats: NewtonStats::default(),
        };
        let gh = GridHeight::new(&sol);
        let x = [0.07, -0.12];
        let j = gh.jet(&x, 5).unwrap();
        assert!((j.value() - f(x)).abs() < 1e-11);
        assert!((j.der(&[0, 0, 1]) - (2.0 + 12.0 * x[0] * x[1])).abs() < 1e-7);
        assert!((j.der(&[1, 1, 1, 1, 1]) + 60.0).abs() < 1e-5);
        assert!(gh.fit(&x).unwrap().1.usable);
        assert!(gh.jet(&[0.55, 0.0], 2).is_err());
    }
}
