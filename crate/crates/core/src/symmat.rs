//! Dense symmetric matrices backed by a single stored triangle.
//!
//! Positive-definiteness is decided by Cholesky factorization with a
//! scale-aware pivot floor; determinants are produced in log space.

use std::fmt;

use crate::error::{Error, Result};

/// A pivot is rejected when it does not exceed this fraction of the largest
/// diagonal entry.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// `det` refuses to exponentiate log-determinants beyond this magnitude.
pub const LOGDET_EXP_LIMIT: f64 = 700.0;

#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    // lower triangle, row by row: (i, j) with j <= i at i*(i+1)/2 + j
    data: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from a function evaluated on the lower triangle (`j <= i`).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.data[packed(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from full rows; the rows must be square and symmetric to `1e-12`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Parameter("matrix must be square and non-empty".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::Parameter(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| rows[i][j]))
    }

    /// Matrix with unit diagonal and constant off-diagonal `x`.
    pub fn constant_correlation(dim: usize, x: f64) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { x })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[packed(i, j)] = value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn principal(&self, indices: &[usize]) -> SymMatrix {
        SymMatrix::from_fn(indices.len(), |i, j| self.get(indices[i], indices[j]))
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// `self + other`, panicking on dimension mismatch.
    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Entrywise (Schur) product.
    pub fn hadamard(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Dense product `self * other` (not symmetric in general).
    pub fn product(&self, other: &SymMatrix) -> Vec<Vec<f64>> {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        Cholesky::factor(self)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    pub fn logdet(&self) -> Result<f64> {
        Ok(self.cholesky()?.logdet())
    }

    /// Determinant of a positive definite matrix, refused when it would
    /// overflow or underflow.
    pub fn det(&self) -> Result<f64> {
        let ld = self.logdet()?;
        if ld.abs() >= LOGDET_EXP_LIMIT {
            return Err(Error::Refused(format!("log-determinant {ld} out of range")));
        }
        Ok(ld.exp())
    }

    pub fn inverse(&self) -> Result<SymMatrix> {
        Ok(self.cholesky()?.inverse())
    }

    /// Eliminate the block `eliminated` and return
    /// `m[R,R] - m[R,S] m[S,S]^{-1} m[S,R]` on the remaining indices `R`
    /// (in increasing order).
    pub fn schur_complement(&self, eliminated: &[usize]) -> Result<SymMatrix> {
        let mut mask = vec![false; self.dim];
        for &s in eliminated {
            if s >= self.dim || mask[s] {
                return Err(Error::Parameter(format!("bad block index {s}")));
            }
            mask[s] = true;
        }
        let rest: Vec<usize> = (0..self.dim).filter(|&i| !mask[i]).collect();
        if eliminated.is_empty() || rest.is_empty() {
            return Err(Error::Parameter(
                "eliminated block must be a proper non-empty subset".into(),
            ));
        }
        let factor = self.principal(eliminated).cholesky()?;
        let cross: Vec<Vec<f64>> = rest
            .iter()
            .map(|&r| eliminated.iter().map(|&s| self.get(r, s)).collect())
            .collect();
        let solved: Vec<Vec<f64>> = cross.iter().map(|c| factor.solve(c)).collect();
        Ok(SymMatrix::from_fn(rest.len(), |i, j| {
            let dot: f64 = cross[i].iter().zip(&solved[j]).map(|(a, b)| a * b).sum();
            self.get(rest[i], rest[j]) - dot
        }))
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({})", self.dim)?;
        for row in self.to_rows() {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = m`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &SymMatrix) -> Result<Self> {
        let n = m.dim;
        let scale = (0..n).map(|i| m.get(i, i).abs()).fold(0.0, f64::max);
        let floor = PIVOT_TOLERANCE * scale;
        let mut l = vec![0.0; m.data.len()];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = m.get(i, j);
                let (ri, rj) = (i * (i + 1) / 2, j * (j + 1) / 2);
                for k in 0..j {
                    sum -= l[ri + k] * l[rj + k];
                }
                if i == j {
                    if !(sum > floor) {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    l[ri + i] = sum.sqrt();
                } else {
                    l[ri + j] = sum / l[rj + j];
                }
            }
        }
        Ok(Cholesky { dim: n, l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)` of `L` (zero above the diagonal).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.l[packed(i, j)]
        }
    }

    /// Diagonal of `L`.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.l[packed(i, i)]).collect()
    }

    pub fn logdet(&self) -> f64 {
        2.0 * self.pivots().iter().map(|p| p.ln()).sum::<f64>()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = b.to_vec();
        for i in 0..n {
            let ri = i * (i + 1) / 2;
            for k in 0..i {
                y[i] -= self.l[ri + k] * y[k];
            }
            y[i] /= self.l[ri + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[packed(k, i)] * y[k];
            }
            y[i] /= self.l[packed(i, i)];
        }
        y
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim;
        // columns of L^{-1}, then M^{-1} = L^{-T} L^{-1}
        let mut linv = vec![0.0; self.l.len()];
        for j in 0..n {
            linv[packed(j, j)] = 1.0 / self.l[packed(j, j)];
            for i in j + 1..n {
                let ri = i * (i + 1) / 2;
                let mut sum = 0.0;
                for k in j..i {
                    sum -= self.l[ri + k] * linv[packed(k, j)];
                }
                linv[ri + j] = sum / self.l[ri + i];
            }
        }
        SymMatrix::from_fn(n, |i, j| {
            // sum over k >= i (i >= j) of linv[k][i] * linv[k][j]
            (i..n).map(|k| linv[packed(k, i)] * linv[packed(k, j)]).sum()
        })
    }
}
