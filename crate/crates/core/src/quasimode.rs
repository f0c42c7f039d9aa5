//! Plane-wave quasimodes cut off inside large inscribed squares.
//!
//! For any target `lambda >= 0` the function
//! `u(x) = cos(k . (x - c)) chi(|x1 - c1|/R) chi(|x2 - c2|/R)` with
//! `|k|^2 = lambda` and the C^1 profile `chi(t) = cos^2(pi t / 2)` is
//! supported in the square of half-width R around c. Its Laplacian
//! residual at `lambda` decays like 1/R for `lambda > 0` (the gradient
//! cross term dominates) and like 1/R^2 at `lambda = 0` (pure profile
//! curvature), so growing squares drive the residual to zero at every
//! non-negative target: the scan below measures that decay.

use crate::dyadic::Dyadic;
use crate::error::TowerError;
use crate::grid::GridDomain;
use crate::lanczos::norm2;
use crate::sparse::SparseSymmetricOperator;
use crate::TowerSpec;
use alloc::vec::Vec;

/// Nodes per wavelength below which the grid cannot carry the wave.
pub const MIN_NODES_PER_WAVELENGTH: f64 = 10.0;

/// A localized plane-wave trial function for a spectral target.
#[derive(Clone, Debug)]
pub struct QuasiMode {
    /// Spectral target, `|k|^2 = lambda`.
    pub lambda: f64,
    /// Wave vector.
    pub k: (f64, f64),
    /// Center of the supporting square.
    pub center: (Dyadic, Dyadic),
    /// Half-width of the supporting square.
    pub radius: Dyadic,
}

impl QuasiMode {
    /// Build a quasimode with wave direction `theta` for target `lambda`.
    pub fn new(
        lambda: f64,
        theta: f64,
        center: (Dyadic, Dyadic),
        radius: Dyadic,
    ) -> Result<QuasiMode, TowerError> {
        if !(lambda >= 0.0) {
            return Err(TowerError::InvalidParameter("spectral target must be non-negative"));
        }
        if !radius.is_positive() {
            return Err(TowerError::InvalidParameter("support radius must be positive"));
        }
        let kk = libm::sqrt(lambda);
        let k = (kk * libm::cos(theta), kk * libm::sin(theta));
        Ok(QuasiMode { lambda, k, center, radius })
    }
}

/// Center and half-width of the largest square inscribed in the first
/// `n` squares of the tower: the last square itself.
pub fn largest_inscribed_cube(spec: &TowerSpec, n: usize) -> Result<(Dyadic, Dyadic), TowerError> {
    if n < 1 || n > spec.count() {
        return Err(TowerError::InvalidParameter("truncation count out of range"));
    }
    Ok((spec.center(n - 1), spec.halfwidth(n - 1)))
}

fn support_inside_some_cube(g: &GridDomain, q: &QuasiMode) -> bool {
    let spec = g.spec();
    let (cx, cy) = q.center;
    (0..spec.count()).any(|n| {
        let a = spec.halfwidth(n);
        (cx - spec.center(n)).abs() + q.radius <= a && cy.abs() + q.radius <= a
    })
}

/// Sample the quasimode on the grid, normalized to unit Euclidean norm.
/// The support square must lie inside the domain.
pub fn build_quasimode(g: &GridDomain, q: &QuasiMode) -> Result<Vec<f64>, TowerError> {
    if !support_inside_some_cube(g, q) {
        return Err(TowerError::InvalidParameter("quasimode support leaves the domain"));
    }
    let (cx, cy) = (q.center.0.to_f64(), q.center.1.to_f64());
    let r = q.radius.to_f64();
    let chi = |t: f64| {
        if t < 1.0 {
            let c = libm::cos(core::f64::consts::PI * t / 2.0);
            c * c
        } else {
            0.0
        }
    };
    let mut u: Vec<f64> = (0..g.len())
        .map(|i| {
            let (x, y) = g.coords(i);
            let (dx, dy) = (x - cx, y - cy);
            let (tx, ty) = (dx.abs() / r, dy.abs() / r);
            if tx < 1.0 && ty < 1.0 {
                libm::cos(q.k.0 * dx + q.k.1 * dy) * chi(tx) * chi(ty)
            } else {
                0.0
            }
        })
        .collect();
    let n = norm2(&u);
    if n == 0.0 {
        return Err(TowerError::InvalidParameter("quasimode vanishes on every node"));
    }
    for x in u.iter_mut() {
        *x /= n;
    }
    Ok(u)
}

/// ||(A - lambda) u|| for a unit-norm trial vector.
pub fn residual(a: &SparseSymmetricOperator, u: &[f64], lambda: f64) -> f64 {
    let au = a.apply_vec(u);
    norm2(&au.iter().zip(u).map(|(ai, ui)| ai - lambda * ui).collect::<Vec<f64>>())
}

/// How the scan picks the grid spacing for each truncation.
#[derive(Clone, Copy, Debug)]
pub enum SpacingPolicy {
    /// One spacing for every radius.
    Fixed(Dyadic),
    /// Largest power-of-two spacing with at least `nodes` per wavelength
    /// (capped by `h_max`); falls back to `h_max` at `lambda = 0`.
    PerWavelength { nodes: u32, h_max: Dyadic },
}

#[derive(Clone, Debug)]
pub struct ScanRow {
    pub radius: f64,
    pub h: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Least-squares slope of log residual against log radius; absent
    /// with fewer than two rows.
    pub slope: Option<f64>,
}

fn policy_spacing(policy: SpacingPolicy, lambda: f64) -> Dyadic {
    match policy {
        SpacingPolicy::Fixed(h) => h,
        SpacingPolicy::PerWavelength { nodes, h_max } => {
            if lambda <= 0.0 {
                return h_max;
            }
            let wavelength = 2.0 * core::f64::consts::PI / libm::sqrt(lambda);
            let target = wavelength / nodes as f64;
            let mut h = h_max;
            while h.to_f64() > target {
                h = h.half();
            }
            h
        }
    }
}

/// Resolution gate: at least `MIN_NODES_PER_WAVELENGTH` nodes per
/// wavelength, else report the spacing that would satisfy it.
fn check_resolution(h: Dyadic, lambda: f64) -> Result<(), TowerError> {
    if lambda <= 0.0 {
        return Ok(());
    }
    let wavelength = 2.0 * core::f64::consts::PI / libm::sqrt(lambda);
    if wavelength / h.to_f64() >= MIN_NODES_PER_WAVELENGTH {
        return Ok(());
    }
    let mut required = h;
    while wavelength / required.to_f64() < MIN_NODES_PER_WAVELENGTH {
        required = required.half();
    }
    Err(TowerError::UnderResolved { required_h: required })
}

/// Assemble each listed truncation, place the quasimode in its largest
/// inscribed square, and record the residual decay against the radius.
pub fn residual_scan(
    spec: &TowerSpec,
    lambda: f64,
    theta: f64,
    truncations: &[usize],
    policy: SpacingPolicy,
) -> Result<ScanResult, TowerError> {
    if !(lambda >= 0.0) {
        return Err(TowerError::InvalidParameter("spectral target must be non-negative"));
    }
    let mut rows = Vec::with_capacity(truncations.len());
    for &n in truncations {
        let (center, radius) = largest_inscribed_cube(spec, n)?;
        let h = policy_spacing(policy, lambda);
        check_resolution(h, lambda)?;
        let (g, a) = GridDomain::assemble(spec, n, n.saturating_sub(1), h)?;
        let q = QuasiMode::new(lambda, theta, (center, Dyadic::ZERO), radius)?;
        let u = build_quasimode(&g, &q)?;
        rows.push(ScanRow {
            radius: radius.to_f64(),
            h: h.to_f64(),
            residual: residual(&a, &u, lambda),
        });
    }
    let slope = fit_slope(&rows);
    Ok(ScanResult { rows, slope })
}

/// Least-squares slope of log residual against log radius.
pub fn fit_slope(rows: &[ScanRow]) -> Option<f64> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.residual > 0.0)
        .map(|r| (libm::log(r.radius), libm::log(r.residual)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::lowest_eigenpairs;

    const PI: f64 = core::f64::consts::PI;

    fn dy(n: i64) -> Dyadic {
        Dyadic::from_int(n)
    }

    fn growing_tower() -> TowerSpec {
        TowerSpec::from_halfwidths(&[dy(4), dy(8), dy(16)], &[Dyadic::new(1, 2); 2]).unwrap()
    }

    #[test]
    fn inscribed_cube_is_last_square() {
        let t =
            TowerSpec::from_halfwidths(&[dy(1), dy(2), dy(3)], &[Dyadic::new(1, 2); 2]).unwrap();
        assert_eq!(largest_inscribed_cube(&t, 3).unwrap(), (dy(9), dy(3)));
        assert_eq!(largest_inscribed_cube(&t, 1).unwrap(), (dy(1), dy(1)));
        let mut prev = Dyadic::ZERO;
        for n in 1..=3 {
            let (_, r) = largest_inscribed_cube(&t, n).unwrap();
            assert!(r > prev);
            prev = r;
        }
        assert!(largest_inscribed_cube(&t, 0).is_err());
    }

    #[test]
    fn zero_target_is_a_pure_bump() {
        let spec = TowerSpec::from_halfwidths(&[dy(2)], &[]).unwrap();
        let h = Dyadic::new(1, 2);
        let (g, _) = GridDomain::assemble(&spec, 1, 0, h).unwrap();
        let q = QuasiMode::new(0.0, 0.0, (dy(2), Dyadic::ZERO), dy(2)).unwrap();
        let u = build_quasimode(&g, &q).unwrap();
        // positive bump, maximal at the center node
        let cix = dy(2).div_exact(&h).unwrap() as i32;
        let c = g.index_of(cix, 0).unwrap();
        assert!(u.iter().all(|&v| v >= 0.0));
        assert!(u.iter().all(|&v| v <= u[c] + 1e-15));
        assert!((norm2(&u) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn support_violation_is_rejected() {
        let spec = TowerSpec::from_halfwidths(&[dy(2)], &[]).unwrap();
        let (g, _) = GridDomain::assemble(&spec, 1, 0, Dyadic::new(1, 2)).unwrap();
        let q = QuasiMode::new(0.0, 0.0, (dy(3), Dyadic::ZERO), dy(2)).unwrap();
        assert!(build_quasimode(&g, &q).is_err());
    }

    #[test]
    fn exact_eigenvector_has_solver_level_residual() {
        let spec = TowerSpec::from_halfwidths(&[dy(1)], &[]).unwrap();
        let (_, a) = GridDomain::assemble(&spec, 1, 0, Dyadic::new(1, 4)).unwrap();
        let p = lowest_eigenpairs(&a, 1, 1e-11, 3).unwrap().remove(0);
        assert!(residual(&a, &p.vector, p.value) < 1e-8);
    }

    #[test]
    fn mismatched_target_keeps_residual_large() {
        // |k|^2 != lambda: residual bounded below by roughly the mismatch
        let spec = TowerSpec::from_halfwidths(&[dy(8)], &[]).unwrap();
        let (g, a) = GridDomain::assemble(&spec, 1, 0, Dyadic::new(1, 3)).unwrap();
        let q = QuasiMode::new(PI * PI / 2.0, 0.0, (dy(8), Dyadic::ZERO), dy(8)).unwrap();
        let u = build_quasimode(&g, &q).unwrap();
        let matched = residual(&a, &u, q.lambda);
        let shift = 3.0;
        let mismatched = residual(&a, &u, q.lambda + shift);
        // triangle inequality: ||(A - lambda - s) u|| >= s - ||(A - lambda) u||
        assert!(mismatched >= shift - matched - 1e-12);
        assert!(mismatched > matched);
    }

    #[test]
    fn residual_decays_with_radius() {
        let spec = growing_tower();
        let policy = SpacingPolicy::Fixed(Dyadic::new(1, 3));
        let scan = residual_scan(&spec, PI * PI / 2.0, 0.0, &[1, 2, 3], policy).unwrap();
        assert_eq!(scan.rows.len(), 3);
        assert!(scan.rows[0].residual > scan.rows[1].residual);
        assert!(scan.rows[1].residual > scan.rows[2].residual);
        let slope = scan.slope.unwrap();
        assert!(slope < -0.8 && slope > -1.2, "slope {slope}");
    }

    #[test]
    fn under_resolution_reports_required_spacing() {
        let spec = growing_tower();
        // lambda = 100: wavelength ~ 0.63, so h = 1/4 is far too coarse
        let policy = SpacingPolicy::Fixed(Dyadic::new(1, 2));
        match residual_scan(&spec, 100.0, 0.0, &[1], policy) {
            Err(TowerError::UnderResolved { required_h }) => {
                assert!(required_h <= Dyadic::new(1, 4));
            }
            other => panic!("expected under-resolved, got {other:?}"),
        }
    }

    #[test]
    fn single_row_scan_has_no_slope() {
        let spec = growing_tower();
        let policy = SpacingPolicy::Fixed(Dyadic::new(1, 2));
        let scan = residual_scan(&spec, 0.0, 0.0, &[2], policy).unwrap();
        assert_eq!(scan.rows.len(), 1);
        assert!(scan.slope.is_none());
    }
}
