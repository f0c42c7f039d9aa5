pub mod construct;
pub mod quasimode;
pub mod resolvent;
pub mod spectrum;

use crate::{EXIT_INPUT, EXIT_NUMERICAL};
use spectral_tower_core::TowerError;

/// Exit-code contract: 2 for input/validation trouble, 3 for numerical
/// or search failures.
pub fn exit_code_for(e: &TowerError) -> u8 {
    match e {
        TowerError::Validation { .. }
        | TowerError::Alignment { .. }
        | TowerError::WindowUnresolved { .. }
        | TowerError::NotNested
        | TowerError::InvalidParameter(_)
        | TowerError::UnderResolved { .. } => EXIT_INPUT,
        TowerError::PivotBreakdown { .. }
        | TowerError::NoConvergence { .. }
        | TowerError::EmptyWindow
        | TowerError::BranchLost { .. }
        | TowerError::NoCandidateHalfwidth { .. }
        | TowerError::SimplicityGap { .. }
        | TowerError::StepFailed { .. } => EXIT_NUMERICAL,
    }
}
