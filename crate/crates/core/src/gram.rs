//! LDLᵗ factorization of Gram matrices, grown one point at a time.
//!
//! The factor is stored row by row. Bordering `F_n → F_{n+1}` appends one
//! row and one pivot and never touches the existing rows, so rows are shared
//! behind `Arc` and [`GramFactorization::border_extend`] is a cheap
//! persistent update. No pivoting is performed: the filtration order is
//! the factorization order.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::point_config::GramMatrix;

/// Default relative pivot tolerance.
pub const DEFAULT_EPS_PD: f64 = 1e-12;

/// `K_F = L D Lᵗ` with unit lower-triangular `L`.
#[derive(Clone, Debug)]
pub struct GramFactorization {
    /// Row `i` holds `L[i][0..i]`.
    rows: Vec<Arc<[f64]>>,
    pivots: Vec<f64>,
    log_det: f64,
    max_diag: f64,
    eps_pd: f64,
}

impl GramFactorization {
    /// The factorization of the empty 0×0 matrix.
    pub fn empty(eps_pd: f64) -> Self {
        Self {
            rows: Vec::new(),
            pivots: Vec::new(),
            log_det: 0.0,
            max_diag: 0.0,
            eps_pd,
        }
    }

    /// Factorizes a full Gram matrix by bordering its leading blocks.
    pub fn factorize(gram: &GramMatrix, eps_pd: f64) -> Result<Self> {
        Self::factorize_matrix(gram.entries(), eps_pd)
    }

    pub fn factorize_matrix(a: &DMatrix<f64>, eps_pd: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
        }
        let mut fact = Self::empty(eps_pd);
        // relative tolerance uses the largest diagonal of the whole matrix
        fact.max_diag = a.diagonal().iter().copied().fold(0.0, f64::max);
        let mut col = Vec::with_capacity(n);
        for i in 0..n {
            col.clear();
            col.extend((0..i).map(|j| a[(i, j)]));
            fact.push(&col, a[(i, i)])?;
        }
        Ok(fact)
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn eps_pd(&self) -> f64 {
        self.eps_pd
    }

    pub fn max_diag(&self) -> f64 {
        self.max_diag
    }

    /// Strict lower part of row `i` of `L`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Entry `L[i][j]` including the unit diagonal.
    pub fn l(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.rows[i][j],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        }
    }

    /// Grows the factorization in place by one point.
    ///
    /// `column` is `(k(x_i, x_new))_{i<n}` and `corner` is `k(x_new, x_new)`.
    /// Returns the new pivot, the Schur complement `corner − bᵗK⁻¹b`. On
    /// failure the factorization is left unchanged.
    pub fn push(&mut self, column: &[f64], corner: f64) -> Result<f64> {
        let n = self.dim();
        if column.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: column.len() });
        }
        let max_diag = self.max_diag.max(corner);
        // y = L⁻¹ b, then the new row is D⁻¹ y
        let y = self.forward(column);
        let mut row = Vec::with_capacity(n);
        let mut schur = 0.0;
        for (j, &yj) in y.iter().enumerate() {
            let lj = yj / self.pivots[j];
            schur += yj * lj;
            row.push(lj);
        }
        let pivot = corner - schur;
        if !(pivot > self.eps_pd * max_diag) {
            return Err(Error::NotPositiveDefinite { pivot: n + 1, value: pivot });
        }
        self.rows.push(row.into());
        self.pivots.push(pivot);
        self.log_det += pivot.ln();
        self.max_diag = max_diag;
        Ok(pivot)
    }

    /// Persistent bordering: the factorization of `[[K, b], [bᵗ, corner]]`.
    pub fn border_extend(&self, column: &[f64], corner: f64) -> Result<Self> {
        let mut next = self.clone();
        next.push(column, corner)?;
        Ok(next)
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(b.len());
        for (i, &bi) in b.iter().enumerate() {
            let s = dot(&self.rows[i], &y);
            y.push(bi - s);
        }
        y
    }

    /// Solves `Lᵗ x = z` in place.
    pub fn backward_in_place(&self, z: &mut [f64]) {
        for i in (0..z.len()).rev() {
            let xi = z[i];
            if xi != 0.0 {
                for (zj, lij) in z[..i].iter_mut().zip(self.rows[i].iter()) {
                    *zj -= lij * xi;
                }
            }
        }
    }

    /// Solves `K v = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rhs.len(),
            });
        }
        let mut z = self.forward(rhs);
        for (zi, d) in z.iter_mut().zip(&self.pivots) {
            *zi /= d;
        }
        self.backward_in_place(&mut z);
        Ok(z)
    }

    /// `(L⁻¹ e_i)`, which vanishes above position `i`.
    pub fn unit_forward(&self, i: usize) -> Vec<f64> {
        let n = self.dim();
        let mut g = vec![0.0; n];
        if i >= n {
            return g;
        }
        g[i] = 1.0;
        for j in i + 1..n {
            g[j] = -dot(&self.rows[j][i..j], &g[i..j]);
        }
        g
    }

    /// `(K⁻¹)_{ij}`.
    pub fn inverse_entry(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.dim();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, dim: n });
            }
        }
        Ok(self.solve(&unit(n, j))?[i])
    }

    /// `vᵗ K⁻¹ v = Σ_j (L⁻¹v)_j² / d_j`, nonnegative by construction.
    pub fn inverse_quadratic(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let y = self.forward(v);
        Ok(y.iter().zip(&self.pivots).map(|(y, d)| y * y / d).sum())
    }

    /// `L D Lᵗ`, for audits.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            let m = i.min(j);
            (0..=m).map(|k| self.l(i, k) * self.pivots[k] * self.l(j, k)).sum()
        })
    }
}

/// Free-function forms of the factorization operations.
pub fn factorize(gram: &GramMatrix, eps_pd: f64) -> Result<GramFactorization> {
    GramFactorization::factorize(gram, eps_pd)
}

pub fn log_det(fact: &GramFactorization) -> f64 {
    fact.log_det()
}

pub fn solve(fact: &GramFactorization, rhs: &[f64]) -> Result<Vec<f64>> {
    fact.solve(rhs)
}

pub fn border_extend(
    fact: &GramFactorization,
    new_column: &[f64],
    corner: f64,
) -> Result<GramFactorization> {
    fact.border_extend(new_column, corner)
}

pub fn inverse_entry(fact: &GramFactorization, i: usize, j: usize) -> Result<f64> {
    fact.inverse_entry(i, j)
}

pub(crate) fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without reassociating
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_gram(xs: &[f64]) -> GramMatrix {
        let n = xs.len();
        GramMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| xs[i].min(xs[j]))).unwrap()
    }

    #[test]
    fn min_kernel_pivots() {
        let f = factorize(&min_gram(&[1.0, 2.0, 3.0]), DEFAULT_EPS_PD).unwrap();
        assert_eq!(f.pivots(), &[1.0, 1.0, 1.0]);
        assert_eq!(f.log_det(), 0.0);
    }

    #[test]
    fn singular_rejected() {
        let g = GramMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let err = factorize(&g, DEFAULT_EPS_PD).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { pivot: 2, .. }));
    }

    #[test]
    fn identity() {
        let g = GramMatrix::from_matrix(DMatrix::identity(4, 4)).unwrap();
        let f = factorize(&g, DEFAULT_EPS_PD).unwrap();
        assert_eq!(f.pivots(), &[1.0; 4]);
        assert_eq!(f.log_det(), 0.0);
        for k in 0..4 {
            assert_eq!(f.solve(&unit(4, k)).unwrap(), unit(4, k));
        }
        let ext = f.border_extend(&[0.0; 4], 1.0).unwrap();
        assert_eq!(ext.pivots()[4], 1.0);
        // the original is untouched
        assert_eq!(f.dim(), 4);
    }

    #[test]
    fn solve_and_inverse_entries() {
        let f = factorize(&min_gram(&[1.0, 2.0, 3.0]), DEFAULT_EPS_PD).unwrap();
        assert_eq!(f.solve(&[1.0, 0.0, 0.0]).unwrap(), vec![2.0, -1.0, 0.0]);
        assert_eq!(f.solve(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert_eq!(f.inverse_entry(0, 0).unwrap(), 2.0);
        assert_eq!(f.inverse_entry(2, 2).unwrap(), 1.0);
        assert_eq!(f.inverse_entry(0, 2).unwrap(), 0.0);
        assert!(f.solve(&[1.0]).is_err());
        assert!(f.inverse_entry(3, 0).is_err());
    }

    #[test]
    fn border_min_kernel() {
        let f = factorize(&min_gram(&[1.0, 2.0]), DEFAULT_EPS_PD).unwrap();
        let g = border_extend(&f, &[1.0, 2.0], 3.0).unwrap();
        assert_eq!(g.pivots()[2], 1.0);
        let one = factorize(&min_gram(&[1.0]), DEFAULT_EPS_PD).unwrap();
        let err = one.border_extend(&[1.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { pivot: 2, .. }));
    }

    #[test]
    fn reconstruct_matches() {
        let xs = [0.4, 1.1, 1.15, 3.0, 7.5];
        let g = min_gram(&xs);
        let f = factorize(&g, DEFAULT_EPS_PD).unwrap();
        let r = f.reconstruct();
        for i in 0..5 {
            for j in 0..5 {
                assert!((r[(i, j)] - g.get(i, j)).abs() <= 1e-12 * g.max_diagonal());
            }
        }
    }

    #[test]
    fn unit_forward_matches_inverse_diagonal() {
        let xs = [0.5, 1.25, 2.0, 4.5];
        let f = factorize(&min_gram(&xs), DEFAULT_EPS_PD).unwrap();
        for i in 0..4 {
            let g = f.unit_forward(i);
            let zeta: f64 = g.iter().zip(f.pivots()).map(|(g, d)| g * g / d).sum();
            let direct = f.inverse_entry(i, i).unwrap();
            assert!((zeta - direct).abs() <= 1e-12 * direct);
        }
    }
}
