//! Small dense matrices whose entries are jets.

use crate::error::{Error, Result};
use crate::jet::Jet;

pub type JetMatrix = Vec<Vec<Jet>>;

pub fn values(m: &JetMatrix) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(Jet::value).collect()).collect()
}

pub fn matmul(a: &JetMatrix, b: &JetMatrix) -> JetMatrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = &a[i][0] * &b[0][j];
                    for l in 1..k {
                        s += &(&a[i][l] * &b[l][j]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn trace(a: &JetMatrix) -> Jet {
    let mut t = a[0][0].clone();
    for i in 1..a.len() {
        t += &a[i][i];
    }
    t
}

pub fn det(a: &JetMatrix) -> Result<Jet> {
    match a.len() {
        1 => Ok(a[0][0].clone()),
        2 => Ok(&a[0][0] * &a[1][1] - &a[0][1] * &a[1][0]),
        3 => {
            let m = |i: usize, j: usize, k: usize, l: usize| &a[i][k] * &a[j][l] - &a[i][l] * &a[j][k];
            Ok(&a[0][0] * m(1, 2, 1, 2) - &a[0][1] * m(1, 2, 0, 2) + &a[0][2] * m(1, 2, 0, 1))
        }
        _ => {
            let (u, sign) = eliminate(a)?;
            let mut d = u[0][0].clone() * sign;
            for (i, row) in u.iter().enumerate().skip(1) {
                d = d * &row[i];
            }
            Ok(d)
        }
    }
}

fn eliminate(a: &JetMatrix) -> Result<(JetMatrix, f64)> {
    let n = a.len();
    let mut u = a.clone();
    let mut sign = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| u[i][col].value().abs().total_cmp(&u[j][col].value().abs()))
            .unwrap();
        if u[piv][col].value() == 0.0 {
            return Err(Error::Degenerate("singular jet matrix".into()));
        }
        if piv != col {
            u.swap(piv, col);
            sign = -sign;
        }
        let inv = u[col][col].recip()?;
        for r in col + 1..n {
            let f = &u[r][col] * &inv;
            for c in col..n {
                let t = &f * &u[col][c];
                u[r][c] -= &t;
            }
        }
    }
    Ok((u, sign))
}

/// Inverse by Gauss-Jordan elimination with partial pivoting on the values.
pub fn inverse(a: &JetMatrix) -> Result<JetMatrix> {
    let n = a.len();
    let proto = &a[0][0];
    if n == 2 {
        let d = det(a)?;
        let id = d.recip().map_err(|_| Error::Degenerate("singular jet matrix".into()))?;
        return Ok(vec![
            vec![&a[1][1] * &id, -(&a[0][1] * &id)],
            vec![-(&a[1][0] * &id), &a[0][0] * &id],
        ]);
    }
    let mut m = a.clone();
    let mut inv: JetMatrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Jet::constant(proto.dim(), proto.order(), if i == j { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].value().abs().total_cmp(&m[j][col].value().abs()))
            .unwrap();
        if m[piv][col].value() == 0.0 {
            return Err(Error::Degenerate("singular jet matrix".into()));
        }
        m.swap(piv, col);
        inv.swap(piv, col);
        let p = m[col][col].recip()?;
        for c in 0..n {
            m[col][c] = &m[col][c] * &p;
            inv[col][c] = &inv[col][c] * &p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col].clone();
            for c in 0..n {
                let t = &f * &m[col][c];
                m[r][c] -= &t;
                let t = &f * &inv[col][c];
                inv[r][c] -= &t;
            }
        }
    }
    Ok(inv)
}

/// `Δ_g f = (1/√det g) ∂_i(√det g · g^{ij} ∂_j f)` in a chart.
pub fn laplace_beltrami(f: &Jet, g: &JetMatrix) -> Result<Jet> {
    let n = g.len();
    let ginv = inverse(g)?;
    let sq = det(g)?.sqrt()?;
    let mut total: Option<Jet> = None;
    for i in 0..n {
        let mut flux = &(&ginv[i][0] * &f.deriv(0)) * &sq;
        for j in 1..n {
            flux += &(&(&ginv[i][j] * &f.deriv(j)) * &sq);
        }
        let d = flux.deriv(i);
        total = Some(match total {
            None => d,
            Some(t) => t + d,
        });
    }
    total.unwrap().try_div(&sq)
}

/// `g^{ij} a_i b_j` for gradient jets `a`, `b`.
pub fn contract(ginv: &JetMatrix, a: &[Jet], b: &[Jet]) -> Jet {
    let n = a.len();
    let mut s = &(&ginv[0][0] * &a[0]) * &b[0];
    for i in 0..n {
        for j in 0..n {
            if i == 0 && j == 0 {
                continue;
            }
            s += &(&(&ginv[i][j] * &a[i]) * &b[j]);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m3(p: &[f64]) -> JetMatrix {
        let x = Jet::seed(p, 2);
        vec![
            vec![2.0 + &x[0], x[1].clone(), Jet::constant(3, 2, 0.1)],
            vec![x[1].clone(), 3.0 + &x[2], x[0].clone()],
            vec![Jet::constant(3, 2, 0.1), x[0].clone(), 1.5 + x[1].square()],
        ]
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = m3(&[0.2, -0.1, 0.3]);
        let p = matmul(&a, &inverse(&a).unwrap());
        for (i, row) in p.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((e.value() - target).abs() < 1e-13);
                assert!(e.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn det_matches_elimination() {
        let a = m3(&[0.2, -0.1, 0.3]);
        let (u, s) = eliminate(&a).unwrap();
        let by_elim = u[0][0].clone() * s * &u[1][1] * &u[2][2];
        assert!(det(&a).unwrap().max_abs_diff(&by_elim) < 1e-12);
    }

    #[test]
    fn flat_laplacian() {
        let x = Jet::seed(&[0.3, 0.4], 3);
        let f = &x[0].square() * &x[1];
        let one = Jet::constant(2, 3, 1.0);
        let zero = Jet::constant(2, 3, 0.0);
        let g = vec![vec![one.clone(), zero.clone()], vec![zero, one]];
        let l = laplace_beltrami(&f, &g).unwrap();
        assert!((l.value() - 2.0 * 0.4).abs() < 1e-14);
    }
}
