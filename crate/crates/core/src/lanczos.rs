//! Lanczos iteration with full reorthogonalization for symmetric
//! (possibly matrix-free) operators, plus the symmetric tridiagonal
//! eigensolvers it needs.
//!
//! One engine serves every spectral computation in the crate: dominant
//! eigenvalues of shift-inverted Laplacians, operator norms of resolvent
//! differences, and singular values of resolvent power differences. The
//! start vector is seeded, every arithmetic step is deterministic, and a
//! breakdown (invariant subspace exhausted) splices in a fresh seeded
//! vector so that degenerate eigenvalues are still found.

use crate::error::TowerError;
use crate::rng;
use alloc::vec;
use alloc::vec::Vec;

/// A symmetric linear action on vectors.
pub trait SymmetricAction {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

impl SymmetricAction for crate::sparse::SparseSymmetricOperator {
    fn dim(&self) -> usize {
        self.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply(x, y);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Count eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below `lambda` via the Sturm sequence of the LDL^T pivots.
pub fn sturm_count(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let mut count = 0usize;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if q.abs() < 1e-300 {
            if q >= 0.0 { 1e-300 } else { -1e-300 }
        } else {
            q
        };
        q = (diag[i] - lambda) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of the symmetric tridiagonal (diag, off), ascending,
/// by bisection on Gershgorin bounds. A fixed iteration count keeps the
/// result deterministic and commuting with power-of-two rescaling.
pub fn tridiag_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let e_left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let e_right = if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - e_left - e_right);
        hi = hi.max(diag[i] + e_left + e_right);
    }
    let span = (hi - lo).max(hi.abs().max(lo.abs()) * 1e-15);
    lo -= 0.0625 * span;
    hi += 0.0625 * span;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..110 {
            let mid = 0.5 * (a + b);
            if sturm_count(diag, off, mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by the implicit
/// QL method with Wilkinson shifts (the classical tql2 routine). Returns
/// eigenvalues ascending and the orthonormal eigenvector matrix stored
/// column-wise: `vectors[k][i]` is component `i` of eigenvector `k`.
pub fn tridiag_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>), TowerError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    // z: row-major accumulation of rotations, starts as identity
    let mut z = vec![vec![0.0f64; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            // find a negligible off-diagonal
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(TowerError::NoConvergence { what: "tridiagonal QL", iterations: 50 });
            }
            // Wilkinson shift
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    // sort ascending, carrying eigenvectors
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let vectors: Vec<Vec<f64>> = order.iter().map(|&k| (0..n).map(|i| z[i][k]).collect()).collect();
    Ok((values, vectors))
}

/// A Ritz pair of the operated-on matrix: eigenvalue estimate, assembled
/// eigenvector (unit Euclidean norm), and the Lanczos residual bound
/// `beta * |last component|`.
pub struct RitzPair {
    pub theta: f64,
    pub vector: Vec<f64>,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Number of dominant-|theta| pairs wanted.
    pub want: usize,
    /// Convergence is gated on this many of the most dominant pairs
    /// (0 means all `want`). The remaining pairs are returned with
    /// whatever accuracy they reached, bounds attached.
    pub strict_top: usize,
    /// Relative residual-bound tolerance on each gated pair.
    pub rel_tol: f64,
    /// Cap on the total Krylov dimension.
    pub max_iter: usize,
    pub seed: u64,
    /// Fresh seeded restarts allowed after breakdown.
    pub max_restarts: u32,
    /// Fresh seeded restarts forced after convergence, to probe the
    /// orthogonal complement for degenerate copies.
    pub forced_restarts: u32,
    pub check_every: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            want: 1,
            strict_top: 0,
            rel_tol: 1e-12,
            max_iter: 300,
            seed: 0x5eed,
            max_restarts: 4,
            forced_restarts: 0,
            check_every: 4,
        }
    }
}

/// Run Lanczos with full reorthogonalization and return the `want`
/// dominant-|theta| Ritz pairs, sorted by |theta| descending.
///
/// Breakdown splices a fresh seeded vector with a zero off-diagonal
/// coupling, so the tridiagonal matrix becomes block diagonal and later
/// blocks explore the orthogonal complement (catching multiplicities).
pub fn dominant_eigenpairs(
    op: &dyn SymmetricAction,
    opts: &LanczosOptions,
) -> Result<Vec<RitzPair>, TowerError> {
    let n = op.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let want = opts.want.min(n);
    let strict = if opts.strict_top == 0 { want } else { opts.strict_top.min(want) };
    let cap = opts.max_iter.min(n).max(want);
    let mut rng = rng::seeded(opts.seed);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut offs: Vec<f64> = Vec::new(); // couplings between consecutive basis vectors
    let mut beta_last = 0.0f64;
    let mut restarts = 0u32;
    let mut forced_done = 0u32;
    let mut op_scale = 0.0f64;
    let mut prev_vals: Vec<f64> = Vec::new();
    let mut block_start = 0usize;

    let mut v = rng::unit_vector(&mut rng, n);
    let mut pending_off = None::<f64>; // coupling from previous step, if any

    // fresh seeded direction orthogonal to the whole basis, or None when
    // the space is numerically exhausted
    let splice = |rng: &mut rand_chacha::ChaCha8Rng, basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        let mut fresh = rng::unit_vector(rng, n);
        for _ in 0..2 {
            for q in basis {
                let c = dot(&fresh, q);
                for (fi, qi) in fresh.iter_mut().zip(q) {
                    *fi -= c * qi;
                }
            }
        }
        let fnorm = norm2(&fresh);
        if fnorm <= 1e-10 {
            return None;
        }
        for x in fresh.iter_mut() {
            *x /= fnorm;
        }
        Some(fresh)
    };

    loop {
        if basis.len() == cap {
            break;
        }
        basis.push(v.clone());
        if let Some(b) = pending_off.take() {
            offs.push(b);
        }
        let j = basis.len() - 1;
        let mut w = op.apply_vec(&v);
        let alpha = dot(&w, &v);
        alphas.push(alpha);
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let beta = norm2(&w);
        beta_last = beta;
        op_scale = op_scale.max(alpha.abs() + beta + if j > 0 { offs[j - 1].abs() } else { 0.0 });

        let exhausted = beta <= 1e-14 * op_scale.max(f64::MIN_POSITIVE);
        if exhausted {
            if basis.len() >= n || restarts >= opts.max_restarts {
                break;
            }
            restarts += 1;
            match splice(&mut rng, &basis) {
                Some(fresh) => {
                    v = fresh;
                    pending_off = Some(0.0);
                    beta_last = 0.0;
                    block_start = basis.len();
                    continue;
                }
                None => break,
            }
        }
        for x in w.iter_mut() {
            *x /= beta;
        }
        v = w;
        pending_off = Some(beta);

        // cheap stability monitor before the full check; a fresh block
        // gets a few iterations of grace to surface degenerate copies
        let m = basis.len();
        let at_cap = m == cap;
        let in_grace = m < block_start + 10;
        if m >= want && (m.is_multiple_of(opts.check_every) || at_cap) && (!in_grace || at_cap) {
            let vals = tridiag_eigenvalues(&alphas, &offs);
            let mut idx: Vec<usize> = (0..vals.len()).collect();
            idx.sort_by(|&a, &b| vals[b].abs().partial_cmp(&vals[a].abs()).unwrap());
            let top: Vec<f64> = idx.iter().take(strict).map(|&i| vals[i]).collect();
            let stable = prev_vals.len() == top.len()
                && prev_vals
                    .iter()
                    .zip(&top)
                    .all(|(&a, &b)| (a - b).abs() <= 0.5 * opts.rel_tol * b.abs().max(op_scale * 1e-3));
            prev_vals = top;
            if (stable || at_cap)
                && converged(&alphas, &offs, beta_last, strict, opts.rel_tol).unwrap_or(false)
            {
                if forced_done < opts.forced_restarts && basis.len() + 12 <= cap {
                    // probe the orthogonal complement for degenerate copies
                    forced_done += 1;
                    match splice(&mut rng, &basis) {
                        Some(fresh) => {
                            v = fresh;
                            pending_off = Some(0.0);
                            beta_last = 0.0;
                            prev_vals.clear();
                            block_start = basis.len();
                            continue;
                        }
                        None => break,
                    }
                }
                break;
            }
        }
    }

    extract(op, &basis, &alphas, &offs, beta_last, want)
}

fn converged(
    alphas: &[f64],
    offs: &[f64],
    beta_last: f64,
    want: usize,
    rel_tol: f64,
) -> Result<bool, TowerError> {
    let (vals, vecs) = tridiag_eigen(alphas, offs)?;
    let m = vals.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| vals[b].abs().partial_cmp(&vals[a].abs()).unwrap());
    let theta_top = vals[idx[0]].abs();
    Ok(idx.iter().take(want).all(|&i| {
        let bound = beta_last * vecs[i][m - 1].abs();
        // per-pair relative, with a floor so that exhausted directions
        // (theta at noise level) still count as converged
        bound <= rel_tol * vals[i].abs().max(1e-3 * theta_top)
    }))
}

fn extract(
    op: &dyn SymmetricAction,
    basis: &[Vec<f64>],
    alphas: &[f64],
    offs: &[f64],
    beta_last: f64,
    want: usize,
) -> Result<Vec<RitzPair>, TowerError> {
    let m = alphas.len();
    if m == 0 {
        return Err(TowerError::NoConvergence { what: "Lanczos", iterations: 0 });
    }
    let n = op.dim();
    let (vals, vecs) = tridiag_eigen(alphas, offs)?;
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| vals[b].abs().partial_cmp(&vals[a].abs()).unwrap());
    let mut out = Vec::with_capacity(want.min(m));
    for &i in idx.iter().take(want) {
        let mut vec = vec![0.0f64; n];
        for (s, q) in vecs[i].iter().zip(basis) {
            for (vi, qi) in vec.iter_mut().zip(q) {
                *vi += s * qi;
            }
        }
        let nn = norm2(&vec);
        if nn > 0.0 {
            for x in vec.iter_mut() {
                *x /= nn;
            }
        }
        out.push(RitzPair { theta: vals[i], vector: vec, bound: beta_last * vecs[i][m - 1].abs() });
    }
    Ok(out)
}
