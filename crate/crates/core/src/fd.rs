//! Finite-difference derivative estimates used as independent oracles.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Three-point centred differences, error `O(h²)`.
    Second,
    /// Five-point centred differences, error `O(h⁴)`.
    Fourth,
}

fn weights(stencil: Stencil, deriv: usize) -> &'static [(i32, f64)] {
    match (stencil, deriv) {
        (_, 0) => &[(0, 1.0)],
        (Stencil::Second, 1) => &[(-1, -0.5), (1, 0.5)],
        (Stencil::Second, 2) => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        (Stencil::Fourth, 1) => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        (Stencil::Fourth, 2) => &[
            (-2, -1.0 / 12.0),
            (-1, 16.0 / 12.0),
            (0, -30.0 / 12.0),
            (1, 16.0 / 12.0),
            (2, -1.0 / 12.0),
        ],
        (Stencil::Second, 3) => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        (Stencil::Second, 4) => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => panic!("no stencil for derivative order {deriv}"),
    }
}

/// Tensor-product difference for `∂^α f(x)`. Each axis uses the 1D stencil
/// of its own order; orders 3 and 4 fall back to second-order stencils.
pub fn partial<F>(f: &F, x: &[f64], alpha: &[usize], h: f64, stencil: Stencil) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let axes: Vec<&[(i32, f64)]> = alpha
        .iter()
        .map(|&a| if a > 2 { weights(Stencil::Second, a) } else { weights(stencil, a) })
        .collect();
    let mut total = 0.0;
    let mut idx = vec![0usize; x.len()];
    let mut p = x.to_vec();
    loop {
        let mut w = 1.0;
        for (d, ax) in axes.iter().enumerate() {
            let (off, wt) = ax[idx[d]];
            p[d] = x[d] + off as f64 * h;
            w *= wt;
        }
        total += w * f(&p)?;
        let mut d = 0;
        loop {
            if d == x.len() {
                let order: usize = alpha.iter().sum();
                return Ok(total / h.powi(order as i32));
            }
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Value, gradient and Hessian by centred differences.
pub fn second_order_data<F>(f: &F, x: &[f64], h: f64, stencil: Stencil) -> Result<(f64, Vec<f64>, Vec<Vec<f64>>)>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = x.len();
    let v = f(x)?;
    let mut grad = vec![0.0; n];
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut a = vec![0; n];
        a[i] = 1;
        grad[i] = partial(f, x, &a, h, stencil)?;
        for j in i..n {
            let mut a = vec![0; n];
            a[i] += 1;
            a[j] += 1;
            hess[i][j] = partial(f, x, &a, h, stencil)?;
            hess[j][i] = hess[i][j];
        }
    }
    Ok((v, grad, hess))
}

/// Second-order centred difference refined by Richardson extrapolation over
/// `h, h/2, h/4`, cancelling the `h²` and `h⁴` error terms.
pub fn richardson_partial<F>(f: &F, x: &[f64], alpha: &[usize], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let d0 = partial(f, x, alpha, h, Stencil::Second)?;
    let d1 = partial(f, x, alpha, h / 2.0, Stencil::Second)?;
    let d2 = partial(f, x, alpha, h / 4.0, Stencil::Second)?;
    let e1 = (4.0 * d1 - d0) / 3.0;
    let e2 = (4.0 * d2 - d1) / 3.0;
    Ok((16.0 * e2 - e1) / 15.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_polynomials() {
        let f = |p: &[f64]| Ok(p[0].powi(3) * p[1] + p[1].powi(2));
        let x = [0.7, -0.4];
        let d = partial(&f, &x, &[1, 1], 0.01, Stencil::Fourth).unwrap();
        assert!((d - 3.0 * 0.49).abs() < 1e-9);
        let d = partial(&f, &x, &[3, 0], 0.01, Stencil::Second).unwrap();
        assert!((d - 6.0 * -0.4).abs() < 1e-8);
        let d = richardson_partial(&f, &x, &[2, 1], 0.1).unwrap();
        assert!((d - 6.0 * 0.7).abs() < 1e-9);
    }

    #[test]
    fn fourth_order_beats_second() {
        let f = |p: &[f64]| Ok(p[0].exp());
        let e2 = (partial(&f, &[0.0], &[2], 0.1, Stencil::Second).unwrap() - 1.0).abs();
        let e4 = (partial(&f, &[0.0], &[2], 0.1, Stencil::Fourth).unwrap() - 1.0).abs();
        assert!(e4 < e2 / 50.0);
    }
}
