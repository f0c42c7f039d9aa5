//! Eigenpair computation and tracking, resolvent application, and
//! operator-norm / singular-value / trace-norm estimation for resolvent
//! (power) differences.
//!
//! Eigenvalues are obtained by shift-invert Lanczos: factor `A - sigma I`
//! once, iterate with its inverse, and map Ritz values back through
//! `lambda = sigma + 1/theta`. A shift at or below zero serves the lowest
//! eigenvalues of the positive definite Laplacians; a shift inside the
//! spectrum targets the tracked eigenbranch directly. All vectors carry
//! unit Euclidean norm; on a uniform grid that equals the grid L2
//! normalization up to the constant factor `h^{d/2}`, which cancels in
//! every overlap, distance and mass fraction used here.

use crate::error::TowerError;
use crate::lanczos::{self, dominant_eigenpairs, LanczosOptions, SymmetricAction};
use crate::sparse::{LdltFactor, SparseSymmetricOperator};
use alloc::vec;
use alloc::vec::Vec;

/// An eigenvalue with its unit-norm eigenvector and solve diagnostics.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// ||A v - lambda v|| for the unit vector v.
    pub residual: f64,
    /// Distance to the nearest other computed Ritz value.
    pub multiplicity_gap: f64,
}

/// Leading singular values of a compact-like symmetric operator with a
/// certified crude tail bound.
#[derive(Clone, Debug)]
pub struct SingularSpectrum {
    /// Non-increasing, non-negative.
    pub values: Vec<f64>,
    /// Upper bound on the sum of all remaining singular values.
    pub tail_bound: f64,
    pub k: usize,
}

impl SingularSpectrum {
    pub fn partial_sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Shift-invert action (A - sigma I)^{-1} backed by an envelope LDL^T.
pub struct ShiftInvert<'a> {
    factor: &'a LdltFactor,
}

impl SymmetricAction for ShiftInvert<'_> {
    fn dim(&self) -> usize {
        self.factor.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        self.factor.solve_in_place(y);
    }
}

/// Factor `A - sigma I`, retrying with multiplicatively perturbed shifts
/// when a pivot breaks down (shift too close to an eigenvalue). Returns
/// the factorization and the shift actually used.
pub fn factor_with_retry(
    a: &SparseSymmetricOperator,
    sigma: f64,
    max_attempts: u32,
) -> Result<(LdltFactor, f64), TowerError> {
    let mut attempt = 0u32;
    loop {
        let s = sigma * (1.0 - attempt as f64 * 0.015625); // sigma (1 - k/64)
        match LdltFactor::new(a, s) {
            Ok(f) => return Ok((f, s)),
            Err(TowerError::PivotBreakdown { .. }) => {
                attempt += 1;
                if attempt >= max_attempts || sigma == 0.0 {
                    return Err(TowerError::PivotBreakdown { attempts: attempt });
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// How a shift-invert eigenpair search is run.
#[derive(Clone, Copy, Debug)]
pub struct EigenSearch {
    /// Pairs to compute.
    pub count: usize,
    /// Minimum number of pairs that must verify to `tol`; unverified
    /// extras (slowly resolving copies of clustered foreign eigenvalues)
    /// are dropped rather than failing the search.
    pub strict: usize,
    /// Extra orthogonal-complement probes for degenerate copies.
    pub forced_restarts: u32,
    /// Relative tolerance: kept pairs satisfy
    /// `||A v - lambda v|| <= tol * (||A||_inf + |sigma|)`.
    pub tol: f64,
    pub seed: u64,
}

impl EigenSearch {
    pub fn new(count: usize, tol: f64, seed: u64) -> EigenSearch {
        EigenSearch { count, strict: count, forced_restarts: 0, tol, seed }
    }
}

/// Eigenpairs of `a` nearest the shift, sorted by eigenvalue ascending.
pub fn eigenpairs_near(
    a: &SparseSymmetricOperator,
    sigma: f64,
    search: &EigenSearch,
) -> Result<Vec<EigenPair>, TowerError> {
    let n = a.dim();
    if n == 0 || search.count == 0 {
        return Ok(Vec::new());
    }
    let count = search.count.min(n);
    let strict = search.strict.min(count).max(1);
    let (factor, used_shift) = factor_with_retry(a, sigma, 4)?;
    let op = ShiftInvert { factor: &factor };
    let opts = LanczosOptions {
        want: count,
        strict_top: strict,
        forced_restarts: search.forced_restarts,
        rel_tol: search.tol * 0.1,
        max_iter: (16 * count + 80).min(n),
        seed: search.seed,
        ..Default::default()
    };
    let ritz = dominant_eigenpairs(&op, &opts)?;
    let scale = a.inf_norm() + used_shift.abs();
    let theta_top = ritz.first().map_or(0.0, |p| p.theta.abs());
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(ritz.len());
    for p in ritz {
        // negligible theta = spectrum far from the shift, not a usable pair
        if p.theta.abs() <= 1e-13 * theta_top {
            continue;
        }
        let lambda = used_shift + 1.0 / p.theta;
        let av = a.apply_vec(&p.vector);
        let res = lanczos::norm2(
            &av.iter().zip(&p.vector).map(|(ai, vi)| ai - lambda * vi).collect::<Vec<f64>>(),
        );
        if res > search.tol * scale {
            continue;
        }
        pairs.push(EigenPair {
            value: lambda,
            vector: p.vector,
            residual: res,
            multiplicity_gap: f64::INFINITY,
        });
    }
    if pairs.len() < strict {
        return Err(TowerError::NoConvergence {
            what: "shift-invert Lanczos",
            iterations: opts.max_iter,
        });
    }
    pairs.sort_by(|x, y| x.value.partial_cmp(&y.value).unwrap());
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    for (i, p) in pairs.iter_mut().enumerate() {
        p.multiplicity_gap = values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| (v - p.value).abs())
            .fold(f64::INFINITY, f64::min);
    }
    Ok(pairs)
}

/// The `m` smallest eigenpairs of a positive definite operator, via
/// shift-invert at zero (a plain factorization of A).
pub fn lowest_eigenpairs(
    a: &SparseSymmetricOperator,
    m: usize,
    tol: f64,
    seed: u64,
) -> Result<Vec<EigenPair>, TowerError> {
    if m == 0 {
        return Err(TowerError::InvalidParameter("need m >= 1"));
    }
    let factor = LdltFactor::new(a, 0.0)?;
    if !factor.is_positive_definite() {
        return Err(TowerError::InvalidParameter("operator is not positive definite"));
    }
    drop(factor);
    let want = (m + 2).min(a.dim());
    let search = EigenSearch {
        count: want,
        strict: m.min(a.dim()),
        forced_restarts: 1,
        tol,
        seed,
    };
    let mut pairs = eigenpairs_near(a, 0.0, &search)?;
    pairs.truncate(m);
    if pairs.len() < m.min(a.dim()) {
        return Err(TowerError::NoConvergence { what: "lowest eigenpairs", iterations: 0 });
    }
    Ok(pairs)
}

/// Select, among eigenpairs with value inside `window`, the one whose
/// eigenvector overlaps the reference most. Returns the pair and the
/// overlap; the vector is sign-aligned with the reference.
///
/// `shift` places the spectral transformation; pass the best available
/// branch estimate so the branch dominates the inverted spectrum even
/// when foreign eigenvalues crowd the far end of the window. `None`
/// centers the shift in the window.
pub fn track_eigenpair(
    a: &SparseSymmetricOperator,
    reference: &[f64],
    window: (f64, f64),
    shift: Option<f64>,
    count: usize,
    tol: f64,
    seed: u64,
) -> Result<(EigenPair, f64), TowerError> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(TowerError::InvalidParameter("empty search window"));
    }
    let sigma = shift.unwrap_or(0.5 * (lo + hi));
    let search = EigenSearch { count, strict: 1, forced_restarts: 0, tol, seed };
    let pairs = eigenpairs_near(a, sigma, &search)?;
    let in_window: Vec<&EigenPair> =
        pairs.iter().filter(|p| p.value >= lo && p.value <= hi).collect();
    if in_window.is_empty() {
        return Err(TowerError::EmptyWindow);
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in in_window.iter().enumerate() {
        let ov = lanczos::dot(&p.vector, reference).abs();
        if best.is_none_or(|(_, b)| ov > b) {
            best = Some((i, ov));
        }
    }
    let (i, overlap) = best.unwrap();
    if overlap < 0.5 {
        return Err(TowerError::BranchLost { best_overlap: overlap });
    }
    let mut pair = in_window[i].clone();
    if lanczos::dot(&pair.vector, reference) < 0.0 {
        for x in pair.vector.iter_mut() {
            *x = -*x;
        }
    }
    Ok((pair, overlap))
}

/// Exact count of eigenvalues strictly below `x`, by Sylvester inertia
/// of a single factorization of `A - x I`. A pivot breakdown (x exactly
/// hits an eigenvalue of a leading minor) retries with `x` nudged by one
/// part in 2^40.
pub fn eigenvalue_count_below(a: &SparseSymmetricOperator, x: f64) -> Result<usize, TowerError> {
    let mut attempt = 0u32;
    loop {
        let nudged = x * (1.0 + attempt as f64 * 9.094947017729282e-13); // k / 2^40
        match LdltFactor::new(a, nudged) {
            Ok(f) => return Ok(f.negative_pivots()),
            Err(TowerError::PivotBreakdown { .. }) if attempt < 4 && x != 0.0 => attempt += 1,
            Err(e) => return Err(e),
        }
    }
}

/// Exact count of eigenvalues in the open interval (lo, hi).
pub fn eigenvalue_count_in(
    a: &SparseSymmetricOperator,
    lo: f64,
    hi: f64,
) -> Result<usize, TowerError> {
    if !(lo < hi) {
        return Err(TowerError::InvalidParameter("empty interval"));
    }
    Ok(eigenvalue_count_below(a, hi)? - eigenvalue_count_below(a, lo)?)
}

/// Minimal distance from `lambda` to the other computed eigenvalues: the
/// single nearest value is treated as `lambda` itself and skipped, so a
/// degenerate copy at the same position yields a zero gap.
pub fn simplicity_gap(pairs: &[EigenPair], lambda: f64) -> f64 {
    let mut dists: Vec<f64> = pairs.iter().map(|p| (p.value - lambda).abs()).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if dists.len() < 2 {
        return f64::INFINITY;
    }
    dists[1]
}

/// Cached resolvent (A + I)^{-1} with one conditional refinement step so
/// that applications keep a relative residual at the 1e-12 level.
pub struct ResolventOp<'a> {
    a: &'a SparseSymmetricOperator,
    factor: LdltFactor,
}

impl<'a> ResolventOp<'a> {
    pub fn new(a: &'a SparseSymmetricOperator) -> Result<ResolventOp<'a>, TowerError> {
        let factor = LdltFactor::new(a, -1.0)?;
        Ok(ResolventOp { a, factor })
    }

    pub fn operator(&self) -> &SparseSymmetricOperator {
        self.a
    }

    fn shifted_apply(&self, x: &[f64], y: &mut [f64]) {
        self.a.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += xi;
        }
    }
}

impl SymmetricAction for ResolventOp<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
        self.factor.solve_in_place(y);
        // one refinement pass when the direct solve is not at noise level
        let bnorm = lanczos::norm2(x);
        if bnorm == 0.0 {
            return;
        }
        let mut r = vec![0.0; x.len()];
        self.shifted_apply(y, &mut r);
        for (ri, xi) in r.iter_mut().zip(x) {
            *ri = xi - *ri;
        }
        if lanczos::norm2(&r) > 1e-13 * bnorm {
            self.factor.solve_in_place(&mut r);
            for (yi, ri) in y.iter_mut().zip(&r) {
                *yi += ri;
            }
        }
    }
}

/// Solve (A + I) x = b through a cached factorization.
pub fn apply_resolvent(r: &ResolventOp<'_>, b: &[f64]) -> Vec<f64> {
    r.apply_vec(b)
}

/// Matrix-free symmetric difference
/// `v -> R_big^ell v - E R_small^ell E^T v`
/// for nested grids, where `E` is the zero-extension along `embed_map`.
pub struct ResolventPowerDifference<'a> {
    big: &'a ResolventOp<'a>,
    small: &'a ResolventOp<'a>,
    embed_map: &'a [usize],
    ell: u32,
}

impl<'a> ResolventPowerDifference<'a> {
    pub fn new(
        big: &'a ResolventOp<'a>,
        small: &'a ResolventOp<'a>,
        embed_map: &'a [usize],
        ell: u32,
    ) -> Result<ResolventPowerDifference<'a>, TowerError> {
        if ell < 1 {
            return Err(TowerError::InvalidParameter("power must be >= 1"));
        }
        if embed_map.len() != small.dim() || embed_map.iter().any(|&j| j >= big.dim()) {
            return Err(TowerError::NotNested);
        }
        Ok(ResolventPowerDifference { big, small, embed_map, ell })
    }

    /// E R_small^k E^T x on the big grid.
    fn small_power(&self, x: &[f64], k: u32) -> Vec<f64> {
        let mut s: Vec<f64> = self.embed_map.iter().map(|&j| x[j]).collect();
        for _ in 0..k {
            s = self.small.apply_vec(&s);
        }
        let mut out = vec![0.0; self.big.dim()];
        for (i, &j) in self.embed_map.iter().enumerate() {
            out[j] = s[i];
        }
        out
    }

    fn big_power(&self, x: &[f64], k: u32) -> Vec<f64> {
        let mut y = x.to_vec();
        for _ in 0..k {
            y = self.big.apply_vec(&y);
        }
        y
    }
}

impl SymmetricAction for ResolventPowerDifference<'_> {
    fn dim(&self) -> usize {
        self.big.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let a = self.big_power(x, self.ell);
        let b = self.small_power(x, self.ell);
        for i in 0..y.len() {
            y[i] = a[i] - b[i];
        }
    }
}

/// Largest |eigenvalue| of a symmetric operator by seeded Lanczos.
pub fn operator_norm(d: &dyn SymmetricAction, tol: f64, seed: u64) -> Result<f64, TowerError> {
    if d.dim() == 0 {
        return Ok(0.0);
    }
    let opts = LanczosOptions {
        want: 1,
        rel_tol: tol,
        max_iter: d.dim().min(200),
        seed,
        ..Default::default()
    };
    let pairs = dominant_eigenpairs(d, &opts)?;
    Ok(pairs.first().map_or(0.0, |p| p.theta.abs()))
}

/// The `k` largest singular values of a symmetric compact-like operator
/// (|eigenvalues|, via Lanczos with restarts) together with the crude
/// tail bound `(n - k) * s_k`.
pub fn singular_values(
    d: &dyn SymmetricAction,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<SingularSpectrum, TowerError> {
    let n = d.dim();
    if k > n {
        return Err(TowerError::InvalidParameter("more singular values than dimensions"));
    }
    if k == 0 || n == 0 {
        return Ok(SingularSpectrum { values: Vec::new(), tail_bound: 0.0, k: 0 });
    }
    let opts = LanczosOptions {
        want: k,
        rel_tol: tol,
        max_iter: (4 * k + 60).min(n),
        seed,
        ..Default::default()
    };
    let pairs = dominant_eigenpairs(d, &opts)?;
    let mut values: Vec<f64> = pairs.iter().map(|p| p.theta.abs()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values.truncate(k);
    let s_last = values.last().copied().unwrap_or(0.0);
    let tail_bound = (n - values.len()) as f64 * s_last;
    let k = values.len();
    Ok(SingularSpectrum { values, tail_bound, k })
}

/// Partial trace norm (sum of the `k` largest singular values) of the
/// resolvent power difference, with its tail bound.
pub fn power_difference_trace_norm(
    big: &ResolventOp<'_>,
    small: &ResolventOp<'_>,
    embed_map: &[usize],
    ell: u32,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<(f64, f64), TowerError> {
    let d = ResolventPowerDifference::new(big, small, embed_map, ell)?;
    let s = singular_values(&d, k.min(d.dim()), tol, seed)?;
    Ok((s.partial_sum(), s.tail_bound))
}

/// Check the algebraic telescoping identity
/// `A^l - B^l = sum_{k=1..l} A^{l-k} (A - B) B^{k-1}`
/// with `A = R_big` and `B = E R_small E^T`, on seeded probe vectors.
/// Returns the maximal relative discrepancy.
pub fn telescoping_residual(
    big: &ResolventOp<'_>,
    small: &ResolventOp<'_>,
    embed_map: &[usize],
    ell: u32,
    probes: usize,
    seed: u64,
) -> Result<f64, TowerError> {
    let d_ell = ResolventPowerDifference::new(big, small, embed_map, ell)?;
    let d_one = ResolventPowerDifference::new(big, small, embed_map, 1)?;
    let n = big.dim();
    let mut rng = crate::rng::seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let v = crate::rng::unit_vector(&mut rng, n);
        let lhs = d_ell.apply_vec(&v);
        let mut rhs = vec![0.0; n];
        let mut b_pow = v.clone(); // B^{k-1} v
        for k in 1..=ell {
            let term = d_one.apply_vec(&b_pow);
            let term = d_ell.big_power(&term, ell - k);
            for (r, t) in rhs.iter_mut().zip(&term) {
                *r += t;
            }
            if k < ell {
                b_pow = d_one.small_power(&b_pow, 1);
            }
        }
        let diff =
            lanczos::norm2(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<f64>>());
        let denom = lanczos::norm2(&lhs);
        let rel = if diff == 0.0 { 0.0 } else { diff / denom.max(f64::MIN_POSITIVE) };
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// `sum_m (1 + lambda_m)^{-ell}` over a computed spectrum, optionally
/// closed with the planar Weyl-counting tail
/// `integral_m^inf (1 + 4 pi t / area)^{-ell} dt`.
///
/// With a tail model the power must satisfy `ell >= 2`, otherwise the
/// continuum sum diverges.
pub fn weyl_trace_estimate(
    eigenvalues: &[f64],
    ell: u32,
    tail_area: Option<f64>,
) -> Result<f64, TowerError> {
    if ell < 1 {
        return Err(TowerError::InvalidParameter("power must be >= 1"));
    }
    let mut sum = 0.0;
    for &lam in eigenvalues {
        sum += libm::pow(1.0 + lam, -(ell as f64));
    }
    if let Some(area) = tail_area {
        if ell < 2 {
            return Err(TowerError::InvalidParameter("tail model needs power >= 2"));
        }
        if !(area > 0.0) {
            return Err(TowerError::InvalidParameter("tail model needs a positive area"));
        }
        let m = eigenvalues.len() as f64;
        let density = 4.0 * core::f64::consts::PI / area;
        // integral of (1 + density t)^{1-ell} from m to infinity
        sum += libm::pow(1.0 + density * m, 1.0 - ell as f64) / (density * (ell as f64 - 1.0));
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Dyadic;
    use crate::geometry::TowerSpec;
    use crate::grid::GridDomain;

    const PI: f64 = core::f64::consts::PI;

    fn cube(a: i64) -> TowerSpec {
        TowerSpec::from_halfwidths(&[Dyadic::from_int(a)], &[]).unwrap()
    }

    fn two_cubes(delta: Dyadic) -> TowerSpec {
        TowerSpec::from_halfwidths(&[Dyadic::from_int(1), Dyadic::new(17, 3)], &[delta]).unwrap()
    }

    fn sq(x: f64) -> f64 {
        x * x
    }

    #[test]
    fn single_cube_low_spectrum_matches_separable_form() {
        // discrete eigenvalues of the unit-half-width square at spacing h:
        // (4/h^2) (sin^2(k pi h / 4) + sin^2(l pi h / 4))
        let h = Dyadic::new(1, 3);
        let (_, a) = GridDomain::assemble(&cube(1), 1, 0, h).unwrap();
        let pairs = lowest_eigenpairs(&a, 3, 1e-11, 11).unwrap();
        let hf = h.to_f64();
        let discrete = |k: f64, l: f64| {
            (4.0 / (hf * hf))
                * (sq(libm::sin(k * PI * hf / 4.0)) + sq(libm::sin(l * PI * hf / 4.0)))
        };
        assert!((pairs[0].value - discrete(1.0, 1.0)).abs() < 1e-9);
        assert!((pairs[1].value - discrete(1.0, 2.0)).abs() < 1e-9);
        assert!((pairs[2].value - discrete(2.0, 1.0)).abs() < 1e-9);
        // the second/third are a symmetric double: zero gap between them
        assert!(pairs[1].multiplicity_gap < 1e-9);
        assert!(pairs[0].multiplicity_gap > 1.0);
        for p in &pairs {
            assert!((lanczos::norm2(&p.vector) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalue_scales_with_halfwidth() {
        let ha = Dyadic::new(1, 3);
        let (_, a1) = GridDomain::assemble(&cube(1), 1, 0, ha).unwrap();
        let (_, a2) = GridDomain::assemble(&cube(2), 1, 0, ha.double()).unwrap();
        let l1 = lowest_eigenpairs(&a1, 1, 1e-11, 3).unwrap()[0].value;
        let l2 = lowest_eigenpairs(&a2, 1, 1e-11, 3).unwrap()[0].value;
        // matrices are exactly 1/4 of each other: bit-level quarter
        assert_eq!(l2, 0.25 * l1);
    }

    #[test]
    fn tracking_on_disconnected_domain_returns_reference_branch() {
        let spec = two_cubes(Dyadic::new(1, 2));
        let h = Dyadic::new(1, 3);
        let (g1, a1) = GridDomain::assemble(&spec, 1, 0, h).unwrap();
        let (g2, a2) = GridDomain::assemble(&spec, 2, 0, h).unwrap();
        let ground = lowest_eigenpairs(&a1, 1, 1e-11, 5).unwrap().remove(0);
        let reference = GridDomain::embed(&g1, &g2, &ground.vector).unwrap();
        let window = (ground.value - 0.5, ground.value + 0.5);
        let (pair, overlap) = track_eigenpair(&a2, &reference, window, None, 10, 1e-10, 7).unwrap();
        // exact invariant subspace: same eigenvalue, overlap 1
        assert!((pair.value - ground.value).abs() < 1e-9);
        assert!(overlap > 1.0 - 1e-9);
        let d: Vec<f64> = pair.vector.iter().zip(&reference).map(|(a, b)| a - b).collect();
        assert!(lanczos::norm2(&d) < 1e-6);
    }

    #[test]
    fn track_reports_branch_lost_for_orthogonal_reference() {
        let spec = two_cubes(Dyadic::new(1, 2));
        let h = Dyadic::new(1, 3);
        let (g2, a2) = GridDomain::assemble(&spec, 2, 0, h).unwrap();
        // a reference concentrated on one node has tiny overlap with every
        // smooth low eigenvector
        let mut reference = vec![0.0; g2.len()];
        reference[0] = 1.0;
        let window = (4.4, 5.4);
        match track_eigenpair(&a2, &reference, window, None, 8, 1e-10, 7) {
            Err(TowerError::BranchLost { best_overlap }) => assert!(best_overlap < 0.5),
            other => panic!("expected branch-lost, got {:?}", other.map(|(p, o)| (p.value, o))),
        }
    }

    #[test]
    fn simplicity_gap_rules() {
        let mk = |v: f64| EigenPair {
            value: v,
            vector: vec![1.0],
            residual: 0.0,
            multiplicity_gap: f64::INFINITY,
        };
        let pairs = [mk(1.0), mk(2.5), mk(4.0)];
        assert!((simplicity_gap(&pairs, 1.0) - 1.5).abs() < 1e-15);
        let double = [mk(2.5), mk(2.5), mk(4.0)];
        assert!(simplicity_gap(&double, 2.5) < 1e-15);
    }

    #[test]
    fn resolvent_solves_to_tight_residual() {
        let spec = cube(1);
        let (_, a) = GridDomain::assemble(&spec, 1, 0, Dyadic::new(1, 4)).unwrap();
        let r = ResolventOp::new(&a).unwrap();
        let b = crate::rng::unit_vector(&mut crate::rng::seeded(13), a.dim());
        let x = apply_resolvent(&r, &b);
        let mut res = a.apply_vec(&x);
        for i in 0..res.len() {
            res[i] += x[i] - b[i];
        }
        assert!(lanczos::norm2(&res) < 1e-12);
        // zero in, zero out
        assert!(apply_resolvent(&r, &vec![0.0; a.dim()]).iter().all(|&v| v == 0.0));
        // eigenvector maps to itself / (1 + lambda)
        let p = lowest_eigenpairs(&a, 1, 1e-11, 2).unwrap().remove(0);
        let y = apply_resolvent(&r, &p.vector);
        for (yi, vi) in y.iter().zip(&p.vector) {
            assert!((yi - vi / (1.0 + p.value)).abs() < 1e-11);
        }
    }

    #[test]
    fn difference_of_identical_domains_is_zero() {
        let spec = two_cubes(Dyadic::new(1, 2));
        let h = Dyadic::new(1, 3);
        let (g, a) = GridDomain::assemble(&spec, 2, 0, h).unwrap();
        let big = ResolventOp::new(&a).unwrap();
        let small = ResolventOp::new(&a).unwrap();
        let map = GridDomain::embed_map(&g, &g).unwrap();
        let norm = operator_norm(
            &ResolventPowerDifference::new(&big, &small, &map, 1).unwrap(),
            1e-10,
            17,
        )
        .unwrap();
        assert!(norm < 1e-13);
        let (tn, tail) = power_difference_trace_norm(&big, &small, &map, 2, 6, 1e-8, 17).unwrap();
        assert!(tn < 1e-12 && tail < 1e-12);
    }

    #[test]
    fn difference_is_symmetric_on_probes() {
        let spec = two_cubes(Dyadic::new(1, 2));
        let h = Dyadic::new(1, 3);
        let (g0, a0) = GridDomain::assemble(&spec, 2, 0, h).unwrap();
        let (g1, a1) = GridDomain::assemble(&spec, 2, 1, h).unwrap();
        let big = ResolventOp::new(&a1).unwrap();
        let small = ResolventOp::new(&a0).unwrap();
        let map = GridDomain::embed_map(&g0, &g1).unwrap();
        let d = ResolventPowerDifference::new(&big, &small, &map, 1).unwrap();
        let mut rng = crate::rng::seeded(23);
        for _ in 0..3 {
            let u = crate::rng::unit_vector(&mut rng, g1.len());
            let v = crate::rng::unit_vector(&mut rng, g1.len());
            let du = d.apply_vec(&u);
            let dv = d.apply_vec(&v);
            assert!((lanczos::dot(&du, &v) - lanczos::dot(&u, &dv)).abs() < 1e-12);
        }
    }

    #[test]
    fn telescoping_identity_holds() {
        let spec = two_cubes(Dyadic::new(1, 2));
        let h = Dyadic::new(1, 3);
        let (g0, a0) = GridDomain::assemble(&spec, 2, 0, h).unwrap();
        let (g1, a1) = GridDomain::assemble(&spec, 2, 1, h).unwrap();
        let big = ResolventOp::new(&a1).unwrap();
        let small = ResolventOp::new(&a0).unwrap();
        let map = GridDomain::embed_map(&g0, &g1).unwrap();
        // power one: identically zero by construction
        assert_eq!(telescoping_residual(&big, &small, &map, 1, 4, 31).unwrap(), 0.0);
        for ell in [2u32, 3] {
            let r = telescoping_residual(&big, &small, &map, ell, 10, 31).unwrap();
            assert!(r < 1e-12, "ell={ell}: {r}");
        }
    }

    #[test]
    fn weyl_estimate_paths() {
        // spectrum {1, 3}, ell = 2: 1/4 + 1/16
        let s = weyl_trace_estimate(&[1.0, 3.0], 2, None).unwrap();
        assert!((s - 0.3125).abs() < 1e-15);
        assert!(weyl_trace_estimate(&[], 2, None).unwrap() == 0.0);
        assert!(weyl_trace_estimate(&[1.0], 1, Some(4.0)).is_err());
        // model spectrum lambda_m = m (area = 4 pi): the exact sum of
        // (1 + m)^{-2} is pi^2/6 - 1, and the tail-closed estimate
        // converges to it as more eigenvalues are listed explicitly
        let area = 4.0 * PI;
        let exact = PI * PI / 6.0 - 1.0;
        let explicit = |m: usize| (1..=m).map(|k| k as f64).collect::<Vec<f64>>();
        let e10 = weyl_trace_estimate(&explicit(10), 2, Some(area)).unwrap();
        let e100 = weyl_trace_estimate(&explicit(100), 2, Some(area)).unwrap();
        assert!((e10 - exact).abs() < 0.02 * exact);
        assert!((e100 - exact).abs() < (e10 - exact).abs());
    }
}
