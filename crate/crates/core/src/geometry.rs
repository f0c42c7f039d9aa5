//! Tower-of-squares geometry with exact dyadic coordinates.
//!
//! A tower of `N` squares on the x-axis: square `n` has half-width `a_n`
//! and center `(x_n, 0)` with `x_1 = a_1` and `x_{n+1} = x_n + a_n +
//! a_{n+1}`, so consecutive squares touch in exactly one shared face.
//! Window `n` is the open square of half-width `delta_n` centered at the
//! shared face point `(x_n + a_n, 0)`; opening it joins squares `n` and
//! `n+1` across the face.

use crate::dyadic::Dyadic;
use crate::error::TowerError;
use alloc::vec::Vec;

/// Immutable tower geometry: half-widths, window half-widths, derived
/// centers, and the accumulated rescale factor.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerSpec {
    dim: u32,
    halfwidths: Vec<Dyadic>,
    windows: Vec<Dyadic>,
    centers: Vec<Dyadic>,
    /// Minimal growth per square: `a_{n+1} >= a_n + growth_unit`. Starts
    /// at 1 and scales with `rescale`.
    growth_unit: Dyadic,
}

impl TowerSpec {
    /// Build a tower from half-widths and window half-widths, deriving the
    /// centers from the touching-faces recurrence. `windows` must be one
    /// entry shorter than `halfwidths`.
    pub fn from_halfwidths(halfwidths: &[Dyadic], windows: &[Dyadic]) -> Result<TowerSpec, TowerError> {
        Self::with_growth_unit(halfwidths, windows, Dyadic::ONE)
    }

    fn with_growth_unit(
        halfwidths: &[Dyadic],
        windows: &[Dyadic],
        growth_unit: Dyadic,
    ) -> Result<TowerSpec, TowerError> {
        if halfwidths.is_empty() {
            return Err(TowerError::Validation { index: 0, reason: "no squares" });
        }
        if windows.len() + 1 != halfwidths.len() {
            return Err(TowerError::Validation {
                index: windows.len(),
                reason: "need exactly one window between consecutive squares",
            });
        }
        let mut centers = Vec::with_capacity(halfwidths.len());
        for (n, &a) in halfwidths.iter().enumerate() {
            if !a.is_positive() {
                return Err(TowerError::Validation { index: n, reason: "half-width must be positive" });
            }
            if n == 0 {
                centers.push(a);
            } else {
                if a < halfwidths[n - 1] + growth_unit {
                    return Err(TowerError::Validation {
                        index: n,
                        reason: "half-widths must grow by at least the growth unit",
                    });
                }
                centers.push(centers[n - 1] + halfwidths[n - 1] + a);
            }
        }
        for (n, &d) in windows.iter().enumerate() {
            if !d.is_positive() {
                return Err(TowerError::Validation { index: n, reason: "window half-width must be positive" });
            }
            if d >= halfwidths[n].min(halfwidths[n + 1]) {
                return Err(TowerError::Validation {
                    index: n,
                    reason: "window must be narrower than both adjacent squares",
                });
            }
            if d > halfwidths[0] {
                return Err(TowerError::Validation {
                    index: n,
                    reason: "window wider than the first half-width",
                });
            }
        }
        Ok(TowerSpec {
            dim: 2,
            halfwidths: halfwidths.to_vec(),
            windows: windows.to_vec(),
            centers,
            growth_unit,
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Number of squares.
    pub fn count(&self) -> usize {
        self.halfwidths.len()
    }

    pub fn halfwidth(&self, n: usize) -> Dyadic {
        self.halfwidths[n]
    }

    pub fn halfwidths(&self) -> &[Dyadic] {
        &self.halfwidths
    }

    pub fn window(&self, n: usize) -> Dyadic {
        self.windows[n]
    }

    pub fn windows(&self) -> &[Dyadic] {
        &self.windows
    }

    pub fn center(&self, n: usize) -> Dyadic {
        self.centers[n]
    }

    pub fn growth_unit(&self) -> Dyadic {
        self.growth_unit
    }

    /// Center of window `n`: the shared face point `(x_n + a_n, 0)`.
    pub fn window_center_x(&self, n: usize) -> Dyadic {
        self.centers[n] + self.halfwidths[n]
    }

    /// Keep the first `n` squares and the first `n - 1` windows.
    pub fn truncate(&self, n: usize) -> Result<TowerSpec, TowerError> {
        if n < 1 || n > self.count() {
            return Err(TowerError::InvalidParameter("truncation count out of range"));
        }
        Ok(TowerSpec {
            dim: self.dim,
            halfwidths: self.halfwidths[..n].to_vec(),
            windows: self.windows[..n - 1].to_vec(),
            centers: self.centers[..n].to_vec(),
            growth_unit: self.growth_unit,
        })
    }

    /// Multiply every length by `alpha`. The growth invariant becomes
    /// `a_{n+1} >= a_n + alpha * (previous growth unit)`, recorded in the
    /// returned spec.
    pub fn rescale(&self, alpha: Dyadic) -> Result<TowerSpec, TowerError> {
        if !alpha.is_positive() {
            return Err(TowerError::InvalidParameter("rescale factor must be positive"));
        }
        let scaled: Vec<Dyadic> = self.halfwidths.iter().map(|&a| a * alpha).collect();
        let windows: Vec<Dyadic> = self.windows.iter().map(|&d| d * alpha).collect();
        TowerSpec::with_growth_unit(&scaled, &windows, self.growth_unit * alpha)
    }

    /// Append one square (and the window joining it to the current last
    /// square) to the tower.
    pub fn extended(&self, a_next: Dyadic, delta: Dyadic) -> Result<TowerSpec, TowerError> {
        let mut halfwidths = self.halfwidths.clone();
        halfwidths.push(a_next);
        let mut windows = self.windows.clone();
        windows.push(delta);
        TowerSpec::with_growth_unit(&halfwidths, &windows, self.growth_unit)
    }

    fn in_cube(&self, n: usize, x: Dyadic, y: Dyadic) -> bool {
        (x - self.centers[n]).abs() < self.halfwidths[n] && y.abs() < self.halfwidths[n]
    }

    fn in_window(&self, n: usize, x: Dyadic, y: Dyadic) -> bool {
        (x - self.window_center_x(n)).abs() < self.windows[n] && y.abs() < self.windows[n]
    }

    /// Membership in the open set formed by all squares plus the first
    /// `open_windows` window squares. Points on a shared face belong to
    /// the set only when covered by an open window.
    pub fn contains(&self, open_windows: usize, p: (Dyadic, Dyadic)) -> bool {
        debug_assert!(open_windows <= self.windows.len());
        let (x, y) = p;
        (0..self.count()).any(|n| self.in_cube(n, x, y))
            || (0..open_windows).any(|n| self.in_window(n, x, y))
    }

    /// Every breakpoint the grid must align with: cube faces and extents,
    /// window edges and extents.
    pub fn breakpoints(&self) -> Vec<Dyadic> {
        let mut out = Vec::new();
        for n in 0..self.count() {
            out.push(self.centers[n] - self.halfwidths[n]);
            out.push(self.centers[n] + self.halfwidths[n]);
            out.push(self.halfwidths[n]);
        }
        for n in 0..self.windows.len() {
            out.push(self.window_center_x(n) - self.windows[n]);
            out.push(self.window_center_x(n) + self.windows[n]);
            out.push(self.windows[n]);
        }
        out
    }
}

/// A measurable sub-region of a tower: used for localization masses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// The open square `n` alone.
    Cube(usize),
    /// The open window square `n` alone.
    Window(usize),
    /// First `n` squares plus the first `n - 1` windows.
    TruncatedTower(usize),
    /// All squares and all windows of the owning spec.
    FullTower,
}

impl Region {
    pub fn contains(&self, spec: &TowerSpec, p: (Dyadic, Dyadic)) -> bool {
        let (x, y) = p;
        match *self {
            Region::Cube(n) => spec.in_cube(n, x, y),
            Region::Window(n) => spec.in_window(n, x, y),
            Region::TruncatedTower(n) => {
                (0..n).any(|c| spec.in_cube(c, x, y))
                    || (0..n.saturating_sub(1)).any(|w| spec.in_window(w, x, y))
            }
            Region::FullTower => spec.contains(spec.windows.len(), p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(n: i64) -> Dyadic {
        Dyadic::from_int(n)
    }

    #[test]
    fn centers_follow_recurrence() {
        let t = TowerSpec::from_halfwidths(&[dy(1), dy(2)], &[Dyadic::new(1, 2)]).unwrap();
        assert_eq!(t.center(0), dy(1));
        assert_eq!(t.center(1), dy(4));
        let t = TowerSpec::from_halfwidths(&[dy(1), dy(2), dy(3)], &[Dyadic::new(1, 2); 2]).unwrap();
        assert_eq!(t.center(2), dy(9));
    }

    #[test]
    fn growth_violation_names_index() {
        let err = TowerSpec::from_halfwidths(&[dy(1), Dyadic::new(3, 1)], &[Dyadic::new(1, 2)]);
        assert_eq!(
            err,
            Err(TowerError::Validation {
                index: 1,
                reason: "half-widths must grow by at least the growth unit"
            })
        );
    }

    #[test]
    fn window_bounds_checked() {
        assert!(TowerSpec::from_halfwidths(&[dy(1), dy(2)], &[dy(1)]).is_err());
        assert!(TowerSpec::from_halfwidths(&[dy(2), dy(3)], &[Dyadic::new(5, 1)]).is_err());
        assert!(TowerSpec::from_halfwidths(&[dy(1), dy(2)], &[Dyadic::ZERO]).is_err());
    }

    #[test]
    fn truncate_cases() {
        let t = TowerSpec::from_halfwidths(&[dy(1), dy(2), dy(3)], &[Dyadic::new(1, 2); 2]).unwrap();
        let t1 = t.truncate(1).unwrap();
        assert_eq!(t1.count(), 1);
        assert!(t1.windows().is_empty());
        assert_eq!(t.truncate(3).unwrap(), t);
        assert!(t.truncate(0).is_err());
        assert!(t.truncate(4).is_err());
    }

    #[test]
    fn contains_face_point_needs_open_window() {
        let t = TowerSpec::from_halfwidths(&[dy(1), dy(2)], &[Dyadic::new(1, 2)]).unwrap();
        let face = (dy(2), Dyadic::ZERO); // x_1 + a_1
        assert!(t.contains(0, (dy(1), Dyadic::ZERO)));
        assert!(!t.contains(0, face));
        assert!(t.contains(1, face));
        // monotone in the number of open windows
        for p in [(dy(1), Dyadic::ZERO), face, (dy(4), dy(1))] {
            assert!(!t.contains(0, p) || t.contains(1, p));
        }
    }

    #[test]
    fn rescale_scales_lengths_and_growth() {
        let t = TowerSpec::from_halfwidths(&[dy(1), dy(2)], &[Dyadic::new(1, 2)]).unwrap();
        let s = t.rescale(dy(2)).unwrap();
        assert_eq!(s.halfwidth(0), dy(2));
        assert_eq!(s.halfwidth(1), dy(4));
        assert_eq!(s.center(1), dy(8));
        assert_eq!(s.growth_unit(), dy(2));
        assert_eq!(t.rescale(Dyadic::ONE).unwrap(), t);
        assert!(t.rescale(Dyadic::ZERO).is_err());
        // rescale then truncate == truncate then rescale
        let t3 = TowerSpec::from_halfwidths(&[dy(1), dy(2), dy(3)], &[Dyadic::new(1, 2); 2]).unwrap();
        assert_eq!(
            t3.rescale(dy(2)).unwrap().truncate(2).unwrap(),
            t3.truncate(2).unwrap().rescale(dy(2)).unwrap()
        );
    }

    #[test]
    fn region_membership() {
        let t = TowerSpec::from_halfwidths(&[dy(1), dy(2)], &[Dyadic::new(1, 2)]).unwrap();
        let in_cube1 = (dy(1), Dyadic::ZERO);
        let in_cube2 = (dy(4), dy(1));
        let in_window = (dy(2), Dyadic::ZERO);
        assert!(Region::Cube(0).contains(&t, in_cube1));
        assert!(!Region::Cube(0).contains(&t, in_cube2));
        assert!(Region::Window(0).contains(&t, in_window));
        assert!(Region::TruncatedTower(1).contains(&t, in_cube1));
        assert!(!Region::TruncatedTower(1).contains(&t, in_window));
        assert!(Region::FullTower.contains(&t, in_window));
        assert!(Region::FullTower.contains(&t, in_cube2));
    }
}
