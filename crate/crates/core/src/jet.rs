//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] stores every partial derivative `∂^α f(p)` with `|α| ≤ order`
//! at a fixed point `p`. Coefficients are derivative values, not Taylor
//! coefficients, so `u_ij` reads directly as `jet.der(&[i, j])`.
//!
//! Multi-indices are laid out by total degree and then lexicographically
//! (largest leading exponent first). The layout of a lower order is a
//! prefix of every higher one, which makes truncation a slice.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 6;
pub const MAX_ORDER: usize = 5;

pub type MultiIndex = [u8; MAX_DIM];

pub struct Layout {
    dim: usize,
    order: usize,
    alphas: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// `(out, a, b, binomial)` such that `out[α] += C(α, β) a[β] b[α-β]`.
    products: Vec<(u32, u32, u32, f64)>,
    /// `shift[i][k]` is the slot of `alphas[k] + e_i`, for `|alphas[k]| < order`.
    shift: Vec<Vec<usize>>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let mut alphas = Vec::new();
        for deg in 0..=order {
            let mut cur = [0u8; MAX_DIM];
            push_degree(dim, 0, deg, &mut cur, &mut alphas);
        }
        let lookup: HashMap<MultiIndex, usize> =
            alphas.iter().enumerate().map(|(k, a)| (*a, k)).collect();

        let mut products = Vec::new();
        for (k, alpha) in alphas.iter().enumerate() {
            for (kb, beta) in alphas.iter().enumerate() {
                if (0..dim).any(|i| beta[i] > alpha[i]) {
                    continue;
                }
                let mut gamma = [0u8; MAX_DIM];
                let mut coef = 1.0;
                for i in 0..dim {
                    gamma[i] = alpha[i] - beta[i];
                    coef *= binomial(alpha[i] as usize, beta[i] as usize);
                }
                products.push((k as u32, kb as u32, lookup[&gamma] as u32, coef));
            }
        }

        let mut shift = vec![Vec::new(); dim];
        for (i, row) in shift.iter_mut().enumerate() {
            for alpha in &alphas {
                if degree(alpha) < order {
                    let mut up = *alpha;
                    up[i] += 1;
                    row.push(lookup[&up]);
                }
            }
        }

        Layout { dim, order, alphas, lookup, products, shift }
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[MultiIndex] {
        &self.alphas
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

fn push_degree(dim: usize, i: usize, left: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
    if i + 1 == dim {
        cur[i] = left as u8;
        out.push(*cur);
        cur[i] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e as u8;
        push_degree(dim, i + 1, left - e, cur, out);
    }
    cur[i] = 0;
}

fn degree(alpha: &MultiIndex) -> usize {
    alpha.iter().map(|&a| a as usize).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for j in 0..k {
        r = r * (n - j) as f64 / (j + 1) as f64;
    }
    r
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Shared layout for `(dim, order)`. Panics outside `1..=MAX_DIM`, `0..=MAX_ORDER`.
pub fn layout(dim: usize, order: usize) -> &'static Layout {
    static CACHE: [[OnceLock<Layout>; MAX_ORDER + 1]; MAX_DIM + 1] =
        [const { [const { OnceLock::new() }; MAX_ORDER + 1] }; MAX_DIM + 1];
    assert!((1..=MAX_DIM).contains(&dim), "jet dimension {dim} out of range");
    assert!(order <= MAX_ORDER, "jet order {order} out of range");
    CACHE[dim][order].get_or_init(|| Layout::build(dim, order))
}

#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        let layout = layout(dim, order);
        let mut c = vec![0.0; layout.len()];
        c[0] = value;
        Jet { layout, c }
    }

    /// The coordinate function `x_i` expanded at a point where it equals `value`.
    pub fn variable(dim: usize, order: usize, i: usize, value: f64) -> Jet {
        assert!(i < dim);
        let mut j = Jet::constant(dim, order, value);
        if order > 0 {
            let mut e = [0u8; MAX_DIM];
            e[i] = 1;
            let k = j.layout.lookup[&e];
            j.c[k] = 1.0;
        }
        j
    }

    /// Coordinate jets `x_1, .., x_n` at `point`.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        (0..point.len())
            .map(|i| Jet::variable(point.len(), order, i, point[i]))
            .collect()
    }

    pub fn from_coeffs(dim: usize, order: usize, c: Vec<f64>) -> Result<Jet> {
        let layout = layout(dim, order);
        if c.len() != layout.len() {
            return Err(Error::DimMismatch { expected: layout.len(), got: c.len() });
        }
        Ok(Jet { layout, c })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `∂^α` at the expansion point.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64> {
        if alpha.len() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: alpha.len() });
        }
        let requested: usize = alpha.iter().sum();
        if requested > self.order() {
            return Err(Error::OutOfOrder { requested, order: self.order() });
        }
        let mut key = [0u8; MAX_DIM];
        for (k, &a) in alpha.iter().enumerate() {
            key[k] = a as u8;
        }
        Ok(self.c[self.layout.lookup[&key]])
    }

    /// Derivative along the listed variables, e.g. `der(&[0, 1])` is `∂₁∂₂`.
    /// Panics if more derivatives are requested than the jet carries.
    pub fn der(&self, vars: &[usize]) -> f64 {
        assert!(vars.len() <= self.order(), "jet of order {} asked for {} derivatives", self.order(), vars.len());
        let mut key = [0u8; MAX_DIM];
        for &v in vars {
            key[v] += 1;
        }
        self.c[self.layout.lookup[&key]]
    }

    pub fn grad(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.der(&[i])).collect()
    }

    /// The jet of `∂_i f`, one order lower.
    pub fn deriv(&self, i: usize) -> Jet {
        assert!(self.order() > 0, "cannot differentiate an order-0 jet");
        let low = layout(self.dim(), self.order() - 1);
        let c = self.layout.shift[i][..low.len()].iter().map(|&k| self.c[k]).collect();
        Jet { layout: low, c }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        let low = layout(self.dim(), order);
        Jet { layout: low, c: self.c[..low.len()].to_vec() }
    }

    pub fn with_value(mut self, v: f64) -> Jet {
        self.c[0] = v;
        self
    }

    fn check_dim(&self, other: &Jet) {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        self.check_dim(other);
        let lay = if self.order() <= other.order() { self.layout } else { other.layout };
        let mut c = vec![0.0; lay.len()];
        for &(k, a, b, coef) in &lay.products {
            c[k as usize] += coef * self.c[a as usize] * other.c[b as usize];
        }
        Jet { layout: lay, c }
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.check_dim(other);
        let lay = if self.order() <= other.order() { self.layout } else { other.layout };
        let c = (0..lay.len()).map(|k| f(self.c[k], other.c[k])).collect();
        Jet { layout: lay, c }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet { layout: self.layout, c: self.c.iter().map(|&x| f(x)).collect() }
    }

    /// `f ∘ self` given `derivs[k] = f^(k)(self.value())` for `k ≤ order`.
    pub fn compose_univariate(&self, derivs: &[f64]) -> Jet {
        let p = self.order();
        debug_assert!(derivs.len() > p);
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut r = Jet::constant(self.dim(), p, derivs[p] / factorial(p));
        for k in (0..p).rev() {
            r = r.mul_jet(&h);
            r.c[0] += derivs[k] / factorial(k);
        }
        r
    }

    /// `self ∘ (inner_1, .., inner_m)`, where each `inner_k` takes the value
    /// at which `self` was expanded in its `k`-th variable.
    pub fn compose(&self, inner: &[Jet]) -> Jet {
        assert_eq!(inner.len(), self.dim(), "compose needs one inner jet per variable");
        let n = inner[0].dim();
        let p = inner.iter().map(|j| j.order()).min().unwrap().min(self.order());
        let hs: Vec<Jet> = inner
            .iter()
            .map(|j| {
                let mut h = j.truncate(p);
                h.c[0] = 0.0;
                h
            })
            .collect();
        let pows: Vec<Vec<Jet>> = hs
            .iter()
            .map(|h| {
                let mut v = vec![Jet::constant(n, p, 1.0)];
                for k in 1..=p {
                    let next = v[k - 1].mul_jet(h);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Jet::constant(n, p, 0.0);
        for (k, alpha) in layout(self.dim(), p).alphas.iter().enumerate() {
            let coef = self.c[k];
            if coef == 0.0 {
                continue;
            }
            let mut term = Jet::constant(n, p, 1.0);
            let mut fact = 1.0;
            for (v, &a) in alpha.iter().take(self.dim()).enumerate() {
                if a > 0 {
                    term = term.mul_jet(&pows[v][a as usize]);
                    fact *= factorial(a as usize);
                }
            }
            out += &(term * (coef / fact));
        }
        out
    }

    pub fn recip(&self) -> Result<Jet> {
        let y = self.value();
        if y == 0.0 || !y.is_finite() {
            return Err(domain("recip", "zero constant term"));
        }
        let d: Vec<f64> = (0..=self.order())
            .map(|k| sign(k) * factorial(k) / y.powi(k as i32 + 1))
            .collect();
        Ok(self.compose_univariate(&d))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let y = self.value();
        if y == 0.0 && self.order() == 0 {
            return Ok(self.clone());
        }
        if !(y > 0.0) {
            return Err(domain("sqrt", "nonpositive constant term"));
        }
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = 1.0;
        for k in 0..=self.order() {
            d.push(coef * y.powf(0.5 - k as f64));
            coef *= 0.5 - k as f64;
        }
        Ok(self.compose_univariate(&d))
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose_univariate(&vec![e; self.order() + 1])
    }

    pub fn ln(&self) -> Result<Jet> {
        let y = self.value();
        if !(y > 0.0) {
            return Err(domain("log", "nonpositive constant term"));
        }
        let d: Vec<f64> = (0..=self.order())
            .map(|k| if k == 0 { y.ln() } else { -sign(k) * factorial(k - 1) / y.powi(k as i32) })
            .collect();
        Ok(self.compose_univariate(&d))
    }

    pub fn powi(&self, n: i32) -> Result<Jet> {
        let y = self.value();
        if n < 0 && y == 0.0 {
            return Err(domain("pow", "negative power of a zero constant term"));
        }
        if n >= 0 {
            let mut r = Jet::constant(self.dim(), self.order(), 1.0);
            for _ in 0..n {
                r = r.mul_jet(self);
            }
            return Ok(r);
        }
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut coef = 1.0;
        for k in 0..=self.order() {
            d.push(coef * y.powi(n - k as i32));
            coef *= (n - k as i32) as f64;
        }
        Ok(self.compose_univariate(&d))
    }

    pub fn square(&self) -> Jet {
        self.mul_jet(self)
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        let n = self.c.len().min(other.c.len());
        (0..n).map(|k| (self.c[k] - other.c[k]).abs()).fold(0.0, f64::max)
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 { 1.0 } else { -1.0 }
}

fn domain(node: &str, reason: &str) -> Error {
    Error::Domain { node: node.to_string(), reason: reason.to_string() }
}

/// Pairwise jet operation with explicit error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Exp,
    Log,
}

/// Applies `op`; unary operations ignore `b`.
pub fn combine(a: &Jet, b: &Jet, op: JetOp) -> Result<Jet> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), got: b.dim() });
    }
    match op {
        JetOp::Add => Ok(a + b),
        JetOp::Sub => Ok(a - b),
        JetOp::Mul => Ok(a * b),
        JetOp::Div => a.try_div(b),
        JetOp::Sqrt => a.sqrt(),
        JetOp::Exp => Ok(a.exp()),
        JetOp::Log => a.ln(),
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(dim={}, order={}, {:?})", self.dim(), self.order(), self.c)
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.c == other.c
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.mul_jet(b));

macro_rules! scalar_op {
    ($tr:ident, $m:ident, $jet_first:expr, $scalar_first:expr) => {
        impl $tr<f64> for &Jet {
            type Output = Jet;
            fn $m(self, s: f64) -> Jet {
                let f: fn(&Jet, f64) -> Jet = $jet_first;
                f(self, s)
            }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, s: f64) -> Jet {
                (&self).$m(s)
            }
        }
        impl $tr<&Jet> for f64 {
            type Output = Jet;
            fn $m(self, j: &Jet) -> Jet {
                let f: fn(f64, &Jet) -> Jet = $scalar_first;
                f(self, j)
            }
        }
        impl $tr<Jet> for f64 {
            type Output = Jet;
            fn $m(self, j: Jet) -> Jet {
                self.$m(&j)
            }
        }
    };
}

scalar_op!(
    Add,
    add,
    |j, s| {
        let mut r = j.clone();
        r.c[0] += s;
        r
    },
    |s, j| {
        let mut r = j.clone();
        r.c[0] += s;
        r
    }
);
scalar_op!(
    Sub,
    sub,
    |j, s| {
        let mut r = j.clone();
        r.c[0] -= s;
        r
    },
    |s, j| {
        let mut r = j.map(|x| -x);
        r.c[0] += s;
        r
    }
);
scalar_op!(Mul, mul, |j, s| j.map(|x| x * s), |s, j| j.map(|x| x * s));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|x| -x)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|x| -x)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self = &*self - rhs;
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, s: f64) {
        for x in &mut self.c {
            *x *= s;
        }
    }
}

impl AddAssign<f64> for Jet {
    fn add_assign(&mut self, s: f64) {
        self.c[0] += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_sizes_and_prefix() {
        assert_eq!(layout(2, 5).len(), 21);
        assert_eq!(layout(3, 5).len(), 56);
        let hi = layout(3, 4);
        let lo = layout(3, 2);
        assert_eq!(&hi.alphas()[..lo.len()], lo.alphas());
    }

    #[test]
    fn product_of_coordinates() {
        let x = Jet::seed(&[1.0, 2.0], 2);
        let p = &x[0] * &x[1];
        assert_eq!(p.value(), 2.0);
        assert_eq!(p.der(&[0]), 2.0);
        assert_eq!(p.der(&[1]), 1.0);
        assert_eq!(p.der(&[0, 1]), 1.0);
        assert_eq!(p.der(&[0, 0]), 0.0);
        assert_eq!(p.der(&[1, 1]), 0.0);
    }

    #[test]
    fn partial_errors_out_of_order() {
        let x = Jet::variable(1, 2, 0, 0.0);
        assert!(matches!(x.partial(&[3]), Err(Error::OutOfOrder { requested: 3, order: 2 })));
        assert_eq!(Jet::constant(2, 3, 7.0).partial(&[1, 2]).unwrap(), 0.0);
        assert_eq!(x.square().partial(&[2]).unwrap(), 2.0);
    }

    #[test]
    fn exp_at_zero() {
        let e = Jet::variable(1, 5, 0, 0.0).exp();
        for k in 0..=5 {
            assert!((e.partial(&[k]).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let x = Jet::variable(1, 4, 0, 0.0);
        let s = (1.0 + &x).square().sqrt().unwrap();
        let expect = [1.0, 1.0, 0.0, 0.0, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((s.partial(&[k]).unwrap() - e).abs() < 1e-14);
        }
    }

    #[test]
    fn geometric_series() {
        let x = Jet::variable(1, 3, 0, 0.0);
        let one = Jet::constant(1, 3, 1.0);
        let q = one.try_div(&(1.0 - &x)).unwrap();
        for (k, e) in [1.0, 1.0, 2.0, 6.0].iter().enumerate() {
            assert!((q.partial(&[k]).unwrap() - e).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        let z = Jet::constant(2, 2, 0.0);
        assert!(z.recip().is_err());
        assert!(z.sqrt().is_err());
        assert!((z.clone() - 1.0).ln().is_err());
        assert!(z.powi(-2).is_err());
        assert!(combine(&z, &Jet::constant(3, 2, 1.0), JetOp::Add).is_err());
    }

    #[test]
    fn deriv_shifts() {
        let x = Jet::seed(&[0.5, -0.25], 4);
        let f = x[0].square() * &x[1];
        let fx = f.deriv(0);
        assert_eq!(fx.order(), 3);
        assert!((fx.value() - 2.0 * 0.5 * -0.25).abs() < 1e-15);
        assert!((fx.der(&[0, 1]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn compose_matches_direct() {
        let x = Jet::seed(&[0.3, 0.2], 4);
        let y = Jet::seed(&[0.3 * 0.2, 0.3 + 0.2], 4);
        let f = (&y[0] * &y[1]).exp();
        let inner = vec![&x[0] * &x[1], &x[0] + &x[1]];
        let direct = (&inner[0] * &inner[1]).exp();
        assert!(f.compose(&inner).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn negative_power() {
        let x = Jet::variable(1, 4, 0, 2.0);
        let p = x.powi(-2).unwrap();
        let r = x.recip().unwrap().square();
        assert!(p.max_abs_diff(&r) < 1e-14);
    }

    #[test]
    fn mixed_orders_truncate() {
        let a = Jet::variable(2, 5, 0, 1.0);
        let b = Jet::variable(2, 2, 1, 1.0);
        assert_eq!((&a * &b).order(), 2);
        assert_eq!((&a + &b).order(), 2);
    }
}
