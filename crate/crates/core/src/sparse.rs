//! Sparse symmetric matrices (CSR) and an envelope LDL^T factorization.
//!
//! The assembled Laplacians are banded under the lexicographic node
//! ordering, with a profile that follows the local column height of the
//! domain, so an envelope (skyline) factorization fills in only inside the
//! band it is given and needs no ordering or symbolic analysis machinery.

use crate::error::TowerError;
use alloc::vec;
use alloc::vec::Vec;

/// Symmetric sparse matrix in CSR layout with both triangles stored and
/// column indices sorted within each row.
#[derive(Clone, Debug)]
pub struct SparseSymmetricOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseSymmetricOperator {
    /// Build from per-row (column, value) lists; columns must be sorted.
    pub fn from_rows(n: usize, rows: Vec<Vec<(u32, f64)>>) -> SparseSymmetricOperator {
        debug_assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for &(c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseSymmetricOperator { n, row_ptr, col_idx, values, symmetric: true }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| (self.col_idx[k], self.values[k]))
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.row(i).find(|&(c, _)| c as usize == i).map_or(0.0, |(_, v)| v)
    }

    /// y = A x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[i] = acc;
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }

    /// max_i sum_j |a_ij|; an upper bound for the spectral radius.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Envelope LDL^T factorization of `A - sigma I`.
///
/// Rows store their sub-diagonal profile contiguously from the first
/// structural nonzero to the diagonal; the factorization fills only inside
/// that profile. Indefinite shifts are allowed (pivots may be negative);
/// a pivot of negligible magnitude reports breakdown so callers can retry
/// with a perturbed shift.
pub struct LdltFactor {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    low: Vec<f64>,
    diag: Vec<f64>,
    shift: f64,
}

/// Relative pivot threshold: pivots smaller than this times the largest
/// shifted diagonal magnitude count as breakdown.
const PIVOT_REL_TOL: f64 = 1e-14;

impl LdltFactor {
    pub fn new(a: &SparseSymmetricOperator, sigma: f64) -> Result<LdltFactor, TowerError> {
        let n = a.dim();
        // profile: first structural nonzero column per row (symmetric
        // pattern, so this is also the envelope of the factor)
        let mut first = Vec::with_capacity(n);
        for i in 0..n {
            let f = a.row(i).next().map_or(i, |(c, _)| (c as usize).min(i));
            first.push(f);
        }
        // profile must be monotone for envelope addressing to cover fill-in
        for i in 1..n {
            if first[i] > i {
                first[i] = i;
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0usize);
        for i in 0..n {
            start.push(start[i] + (i - first[i]));
        }
        let mut low = vec![0.0f64; start[n]];
        let mut diag = vec![0.0f64; n];

        let mut scale = 0.0f64;
        for i in 0..n {
            scale = scale.max((a.diagonal(i) - sigma).abs());
        }
        if scale == 0.0 {
            scale = 1.0;
        }

        // scatter A's lower triangle into the envelope
        for i in 0..n {
            for (c, v) in a.row(i) {
                let j = c as usize;
                if j < i {
                    debug_assert!(j >= first[i]);
                    low[start[i] + (j - first[i])] = v;
                } else if j == i {
                    diag[i] = v - sigma;
                }
            }
        }

        // row-oriented envelope factorization
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut sum = low[start[i] + (j - fi)];
                let ri = start[i] + (lo - fi);
                let rj = start[j] + (lo - fj);
                let len = j - lo;
                for k in 0..len {
                    sum -= low[ri + k] * low[rj + k] * diag[lo + k];
                }
                low[start[i] + (j - fi)] = sum / diag[j];
            }
            let mut dsum = diag[i];
            let ri = start[i];
            for k in 0..(i - fi) {
                let l = low[ri + k];
                dsum -= l * l * diag[fi + k];
            }
            if dsum.abs() < PIVOT_REL_TOL * scale {
                return Err(TowerError::PivotBreakdown { attempts: 0 });
            }
            diag[i] = dsum;
        }

        Ok(LdltFactor { n, first, start, low, diag, shift: sigma })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// All pivots positive, i.e. `A - sigma I` is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.diag.iter().all(|&d| d > 0.0)
    }

    /// Number of negative pivots = number of eigenvalues below the shift
    /// (Sylvester inertia).
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    /// Solve (A - sigma I) x = b in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        // forward: L y = b
        for i in 0..self.n {
            let fi = self.first[i];
            let ri = self.start[i];
            let mut sum = x[i];
            for k in 0..(i - fi) {
                sum -= self.low[ri + k] * x[fi + k];
            }
            x[i] = sum;
        }
        // diagonal
        for i in 0..self.n {
            x[i] /= self.diag[i];
        }
        // backward: L^T x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let ri = self.start[i];
            let xi = x[i];
            for k in 0..(i - fi) {
                x[fi + k] -= self.low[ri + k] * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
