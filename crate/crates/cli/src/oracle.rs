//! Dense cross-checks for small instances, backed by nalgebra.

use nalgebra::DMatrix;
use spectral_tower_core::lanczos::SymmetricAction;

/// Instances above this size are refused for dense work.
pub const DENSE_CAP: usize = 3000;

/// Materialize a matrix-free symmetric action column by column.
pub fn materialize(op: &dyn SymmetricAction) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0f64; n];
    let mut col = vec![0.0f64; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// All singular values of a dense matrix, non-increasing.
pub fn dense_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}
