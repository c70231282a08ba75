//! Exact truncated power series over the rationals, matrices of them, and the
//! formal recoupling iteration producing the series of `τ(G, x)` at `x = 0`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest order accepted by [`tau_series`].
pub const MAX_ORDER: usize = 40;
/// Sweep cap of the formal recoupling iteration.
pub const MAX_SWEEPS: usize = 200;

/// `c_0 + c_1 x + … + c_N x^N + O(x^{N+1})` with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    coeffs: Vec<BigRational>,
}

impl TruncatedSeries {
    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn constant(order: usize, c: i64) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigRational::from_integer(c.into());
        s
    }

    /// The formal variable `x`.
    pub fn variable(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = BigRational::one();
        }
        s
    }

    /// From integer coefficients; missing ones are zero, extra ones dropped.
    pub fn from_integers(order: usize, coeffs: &[i64]) -> Self {
        let mut s = Self::zero(order);
        for (slot, &c) in s.coeffs.iter_mut().zip(coeffs) {
            *slot = BigRational::from_integer(c.into());
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn invert(&self) -> Result<Self> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let inv0 = c0.recip();
        let n = self.order();
        let mut out = Self::zero(n);
        out.coeffs[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &out.coeffs[k - j];
                }
            }
            out.coeffs[k] = -(acc * &inv0);
        }
        Ok(out)
    }

    /// Integer coefficients, or `None` if some denominator is not 1.
    pub fn to_integers(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    /// Partial sum `Σ c_k x^k` in floating point.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    fn check_order(&self, other: &Self) {
        assert_eq!(self.order(), other.order(), "series orders differ");
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_order(rhs);
        TruncatedSeries {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_order(rhs);
        TruncatedSeries {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.check_order(rhs);
        let n = self.order();
        let mut out = TruncatedSeries::zero(n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let sep = if first { "" } else { " " };
            match k {
                0 => write!(f, "{sep}{sign}{mag}")?,
                1 => write!(f, "{sep}{sign}{mag}x")?,
                _ => write!(f, "{sep}{sign}{mag}x^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.order() + 1)
    }
}

/// Square matrix of series of a common order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SeriesMatrix {
    order: usize,
    rows: Vec<Vec<TruncatedSeries>>,
}

impl SeriesMatrix {
    pub fn from_fn(dim: usize, order: usize, mut f: impl FnMut(usize, usize) -> TruncatedSeries) -> Self {
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let s = f(i, j);
                        assert_eq!(s.order(), order, "entry order mismatch");
                        s
                    })
                    .collect()
            })
            .collect();
        SeriesMatrix { order, rows }
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        Self::from_fn(dim, order, |i, j| TruncatedSeries::constant(order, (i == j) as i64))
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedSeries {
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: TruncatedSeries) {
        self.rows[i][j] = s;
    }

    pub fn principal(&self, indices: &[usize]) -> SeriesMatrix {
        SeriesMatrix {
            order: self.order,
            rows: indices
                .iter()
                .map(|&i| indices.iter().map(|&j| self.rows[i][j].clone()).collect())
                .collect(),
        }
    }

    /// Gaussian elimination over the series ring, pivoting on entries with a
    /// nonzero constant term. Returns the reduced rows applied to `rhs` and
    /// the determinant.
    fn eliminate(&self, mut rhs: Vec<Vec<TruncatedSeries>>) -> Result<(Vec<Vec<TruncatedSeries>>, TruncatedSeries)> {
        let n = self.dim();
        let mut a = self.rows.clone();
        let mut det = TruncatedSeries::constant(self.order, 1);
        for k in 0..n {
            let p = (k..n)
                .find(|&i| !a[i][k].coeffs[0].is_zero())
                .ok_or(Error::ZeroConstantTerm)?;
            if p != k {
                a.swap(p, k);
                rhs.swap(p, k);
                det = -&det;
            }
            det = &det * &a[k][k];
            let inv = a[k][k].invert()?;
            for j in k..n {
                a[k][j] = &a[k][j] * &inv;
            }
            for s in rhs[k].iter_mut() {
                *s = &*s * &inv;
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let factor = a[i][k].clone();
                for j in k..n {
                    let t = &factor * &a[k][j];
                    a[i][j] = &a[i][j] - &t;
                }
                for c in 0..rhs[i].len() {
                    let t = &factor * &rhs[k][c];
                    rhs[i][c] = &rhs[i][c] - &t;
                }
            }
        }
        Ok((rhs, det))
    }

    /// Inverse; the constant-term matrix must be invertible.
    pub fn inverse(&self) -> Result<SeriesMatrix> {
        let (rows, _) = self.eliminate(Self::identity(self.dim(), self.order).rows)?;
        Ok(SeriesMatrix { order: self.order, rows })
    }

    pub fn determinant(&self) -> Result<TruncatedSeries> {
        Ok(self.eliminate(vec![Vec::new(); self.dim()])?.1)
    }

    /// Solve `self · X = columns` for the given right-hand side columns.
    pub fn solve(&self, columns: &[Vec<TruncatedSeries>]) -> Result<Vec<Vec<TruncatedSeries>>> {
        let n = self.dim();
        let rhs = (0..n).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
        let (rows, _) = self.eliminate(rhs)?;
        Ok((0..columns.len()).map(|c| (0..n).map(|i| rows[i][c].clone()).collect()).collect())
    }
}

/// Integer series used by the recoupling sweeps. Every matrix met there has
/// the identity as constant term, so elimination only ever divides by series
/// with constant term ±1 and the arithmetic stays within the integers.
mod integral {
    use num_bigint::BigInt;
    use num_traits::{One, Signed, Zero};

    pub type Coeffs = Vec<BigInt>;

    pub fn mul(a: &[BigInt], b: &[BigInt]) -> Coeffs {
        let n = a.len();
        let mut out = vec![BigInt::zero(); n];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b[..n - i].iter().enumerate() {
                if !bj.is_zero() {
                    out[i + j] += ai * bj;
                }
            }
        }
        out
    }

    pub fn sub_assign(a: &mut [BigInt], b: &[BigInt]) {
        for (x, y) in a.iter_mut().zip(b) {
            *x -= y;
        }
    }

    /// Inverse of a series whose constant term is ±1.
    pub fn unit_inverse(a: &[BigInt]) -> Option<Coeffs> {
        if !a[0].abs().is_one() {
            return None;
        }
        let c0 = a[0].clone();
        let mut out = vec![BigInt::zero(); a.len()];
        out[0] = c0.clone();
        for k in 1..a.len() {
            let mut acc = BigInt::zero();
            for j in 1..=k {
                if !a[j].is_zero() {
                    acc += &a[j] * &out[k - j];
                }
            }
            out[k] = -(acc * &c0);
        }
        Some(out)
    }

    /// Solve `m · s = rhs` by elimination with unit pivots.
    pub fn solve(mut m: Vec<Vec<Coeffs>>, mut rhs: Vec<Coeffs>) -> Option<Vec<Coeffs>> {
        let n = m.len();
        for k in 0..n {
            let p = (k..n).find(|&i| m[i][k][0].abs().is_one())?;
            m.swap(p, k);
            rhs.swap(p, k);
            let inv = unit_inverse(&m[k][k])?;
            for j in k + 1..n {
                m[k][j] = mul(&m[k][j], &inv);
            }
            rhs[k] = mul(&rhs[k], &inv);
            for i in k + 1..n {
                if m[i][k].iter().all(Zero::is_zero) {
                    continue;
                }
                let factor = std::mem::take(&mut m[i][k]);
                for j in k + 1..n {
                    let t = mul(&factor, &m[k][j]);
                    sub_assign(&mut m[i][j], &t);
                }
                let t = mul(&factor, &rhs[k]);
                sub_assign(&mut rhs[i], &t);
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                let t = mul(&m[k][j], &rhs[j]);
                sub_assign(&mut rhs[k], &t);
            }
        }
        Some(rhs)
    }
}

/// Result of [`tau_series`].
#[derive(Debug, Clone)]
pub struct TauSeries {
    pub series: TruncatedSeries,
    pub coefficients: Vec<BigInt>,
    pub sweeps: usize,
}

/// Series of `τ(G, x)` to the given order by formal recoupling from the
/// all-`x` matrix, iterated until one full sweep leaves every coefficient up
/// to `order` unchanged.
pub fn tau_series(g: &Graph, order: usize) -> Result<TauSeries> {
    if order > MAX_ORDER {
        return Err(Error::Refused(format!("order {order} exceeds {MAX_ORDER}")));
    }
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::Parameter("graph has no vertices".into()));
    }
    let mut m: Vec<Vec<integral::Coeffs>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut c = vec![BigInt::zero(); order + 1];
                    if i == j {
                        c[0] = BigInt::one();
                    } else if order >= 1 {
                        c[1] = BigInt::one();
                    }
                    c
                })
                .collect()
        })
        .collect();
    let non_edges = g.non_edges();
    let mut sweeps = 0;
    loop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoStabilization(sweeps));
        }
        let mut changed = false;
        for &(v, w) in &non_edges {
            // conditional covariance of v and w given the rest, set to zero:
            // z_vw = M[v, C] M[C, C]⁻¹ M[C, w]
            let rest: Vec<usize> = (0..n).filter(|&i| i != v && i != w).collect();
            let mut z = vec![BigInt::zero(); order + 1];
            if !rest.is_empty() {
                let block = rest.iter().map(|&i| rest.iter().map(|&j| m[i][j].clone()).collect()).collect();
                let column = rest.iter().map(|&c| m[c][w].clone()).collect();
                let solved = integral::solve(block, column)
                    .ok_or_else(|| Error::Integrity("non-unit pivot in series elimination".into()))?;
                for (&c, s) in rest.iter().zip(&solved) {
                    let t = integral::mul(&m[v][c], s);
                    for (a, b) in z.iter_mut().zip(t) {
                        *a += b;
                    }
                }
            }
            if z != m[v][w] {
                changed = true;
                m[v][w] = z.clone();
                m[w][v] = z;
            }
        }
        if !changed {
            break;
        }
        sweeps += 1;
    }
    let m = SeriesMatrix::from_fn(n, order, |i, j| TruncatedSeries {
        coeffs: m[i][j].iter().cloned().map(BigRational::from_integer).collect(),
    });
    let series = m.determinant()?;
    let coefficients = series
        .to_integers()
        .ok_or_else(|| Error::Integrity(format!("non-integer coefficient in {series:?}")))?;
    Ok(TauSeries {
        series,
        coefficients,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};

    fn ints(s: &TauSeries) -> Vec<i64> {
        s.coefficients.iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn geometric_series() {
        let one_minus_x = TruncatedSeries::from_integers(6, &[1, -1]);
        let inv = one_minus_x.invert().unwrap();
        assert_eq!(inv, TruncatedSeries::from_integers(6, &[1; 7]));
        let s = TruncatedSeries::from_integers(6, &[1, 0, -1]);
        assert_eq!(&s * &s.invert().unwrap(), TruncatedSeries::constant(6, 1));
        assert_eq!(TruncatedSeries::variable(4).invert(), Err(Error::ZeroConstantTerm));
    }

    #[test]
    fn two_by_two_inverse() {
        // (I + xA)⁻¹ for the adjacency of K2 is (1/(1−x²)) [[1, −x], [−x, 1]]
        let order = 7;
        let m = SeriesMatrix::from_fn(2, order, |i, j| {
            if i == j {
                TruncatedSeries::constant(order, 1)
            } else {
                TruncatedSeries::variable(order)
            }
        });
        let inv = m.inverse().unwrap();
        assert_eq!(*inv.get(0, 0), TruncatedSeries::from_integers(order, &[1, 0, 1, 0, 1, 0, 1, 0]));
        assert_eq!(*inv.get(0, 1), TruncatedSeries::from_integers(order, &[0, -1, 0, -1, 0, -1, 0, -1]));
        assert_eq!(m.determinant().unwrap(), TruncatedSeries::from_integers(order, &[1, 0, -1]));
    }

    #[test]
    fn small_graphs() {
        let k2 = generate(&GraphFamily::Path(2), None).unwrap();
        assert_eq!(ints(&tau_series(&k2, 6).unwrap()), vec![1, 0, -1, 0, 0, 0, 0]);
        let p3 = generate(&GraphFamily::Path(3), None).unwrap();
        assert_eq!(ints(&tau_series(&p3, 6).unwrap()), vec![1, 0, -2, 0, 1, 0, 0]);
    }

    #[test]
    fn four_cycle_matches_closed_form() {
        // s solves s² + s = 2x²; τ(C4) = 1 − 2s + 2s³ − s⁴
        let order = 14;
        let two_x2 = TruncatedSeries::from_integers(order, &[0, 0, 2]);
        let mut s = TruncatedSeries::zero(order);
        for _ in 0..order {
            s = &two_x2 - &(&s * &s);
        }
        let s2 = &s * &s;
        let s3 = &s2 * &s;
        let s4 = &s2 * &s2;
        let one = TruncatedSeries::constant(order, 1);
        let two = BigRational::from_integer(2.into());
        let expected = &(&(&one - &s.scale(&two)) + &s3.scale(&two)) - &s4;
        let c4 = generate(&GraphFamily::Cycle(4), None).unwrap();
        assert_eq!(tau_series(&c4, order).unwrap().series, expected);
        assert_eq!(ints(&tau_series(&c4, 4).unwrap()), vec![1, 0, -4, 0, 8]);
    }

    #[test]
    fn low_coefficients_and_parity() {
        for (f, seed) in [
            (GraphFamily::Cycle(5), None),
            (GraphFamily::Book(3), None),
            (GraphFamily::CompleteBipartite(2, 3), None),
            (GraphFamily::ErdosRenyi(7, 0.4), Some(5)),
        ] {
            let g = generate(&f, seed).unwrap();
            let c = ints(&tau_series(&g, 8).unwrap());
            assert_eq!(&c[..3], &[1, 0, -(g.edge_count() as i64)]);
            if g.is_bipartite() {
                assert!(c.iter().skip(1).step_by(2).all(|&v| v == 0), "{f:?}: {c:?}");
            }
        }
    }

    #[test]
    fn complete_graphs_are_polynomials() {
        // τ(K_n) = (1 − x)^{n−1}(1 + (n−1)x), which K_n reaches with no sweep
        let s = tau_series(&generate(&GraphFamily::Complete(5), None).unwrap(), 8).unwrap();
        assert_eq!(s.sweeps, 0);
        assert_eq!(ints(&s), vec![1, 0, -10, 20, -15, 4, 0, 0, 0]);
    }

    #[test]
    fn order_guard() {
        let k2 = generate(&GraphFamily::Path(2), None).unwrap();
        assert!(matches!(tau_series(&k2, 41), Err(Error::Refused(_))));
    }

    #[test]
    fn display() {
        let s = TruncatedSeries::from_integers(3, &[1, 0, -2]);
        assert_eq!(format!("{s:?}"), "1 -2x^2 + O(x^4)");
    }
}
