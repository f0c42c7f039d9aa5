//! Crate-wide error type.

use crate::dyadic::Dyadic;
use alloc::string::String;
use core::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum TowerError {
    /// Geometry validation failed; carries the offending entry index.
    Validation { index: usize, reason: &'static str },
    /// A geometry breakpoint is not an integer multiple of the grid spacing.
    Alignment { breakpoint: Dyadic, h: Dyadic },
    /// An opened window is narrower than the grid spacing and has no wall
    /// node; refine `h` to at most the carried value.
    WindowUnresolved { index: usize, required_h: Dyadic },
    /// Node-set containment between two grids does not hold.
    NotNested,
    /// A parameter violated its documented precondition.
    InvalidParameter(&'static str),
    /// Triangular factorization hit a negligible pivot (shift too close to
    /// an eigenvalue); retried shifts also failed.
    PivotBreakdown { attempts: u32 },
    /// An iterative solve did not reach its tolerance within the cap.
    NoConvergence { what: &'static str, iterations: usize },
    /// No eigenvalue was found inside the requested search window.
    EmptyWindow,
    /// All candidate eigenvectors have overlap below 0.5 with the
    /// reference; the eigenbranch cannot be identified.
    BranchLost { best_overlap: f64 },
    /// No candidate half-width in the scan range kept the analytic cube
    /// spectrum away from the tracked eigenvalue.
    NoCandidateHalfwidth { step: usize },
    /// The assembled disjoint-union operator has a foreign eigenvalue
    /// inside the certified simplicity interval around the tracked value.
    SimplicityGap { step: usize, needed: f64 },
    /// A window search exhausted its refinement budget.
    StepFailed { step: usize, refinements: u32, detail: String },
    /// Quasimode wavelength is not resolved by the grid.
    UnderResolved { required_h: Dyadic },
}

impl fmt::Display for TowerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerError::Validation { index, reason } => {
                write!(f, "invalid tower at entry {index}: {reason}")
            }
            TowerError::Alignment { breakpoint, h } => {
                write!(f, "breakpoint {breakpoint} is not a multiple of h = {h}")
            }
            TowerError::WindowUnresolved { index, required_h } => {
                write!(f, "window {index} is narrower than the grid; refine h to {required_h}")
            }
            TowerError::NotNested => write!(f, "grid node sets are not nested"),
            TowerError::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            TowerError::PivotBreakdown { attempts } => {
                write!(f, "factorization pivot breakdown after {attempts} shift retries")
            }
            TowerError::NoConvergence { what, iterations } => {
                write!(f, "{what} did not converge within {iterations} iterations")
            }
            TowerError::EmptyWindow => write!(f, "no eigenvalue in the search window"),
            TowerError::BranchLost { best_overlap } => {
                write!(f, "eigenbranch lost: best overlap {best_overlap:.4} < 0.5")
            }
            TowerError::NoCandidateHalfwidth { step } => {
                write!(f, "no admissible half-width candidate at step {step}; widen the scan range")
            }
            TowerError::SimplicityGap { step, needed } => {
                write!(f, "step {step}: disjoint-union gap below the simplicity threshold {needed:.4}")
            }
            TowerError::StepFailed { step, refinements, detail } => {
                write!(f, "step {step} failed after {refinements} refinements: {detail}")
            }
            TowerError::UnderResolved { required_h } => {
                write!(f, "wavelength under-resolved; need h <= {required_h}")
            }
        }
    }
}
