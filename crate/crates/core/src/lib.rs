//! Numerical core for an electrostatically actuated clamped MEMS plate:
//! the transformed-domain potential solve, the fourth-order semilinear plate
//! dynamics, stationary-branch continuation with pull-in detection, and a
//! suite of verification instruments.

pub mod branch;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod grid;
pub mod linalg;
pub mod params;
pub mod plate;
pub mod profile;
pub mod quad;
pub mod transform;
pub mod verify;

pub use branch::{continue_branch, continue_branch_on, linearized_spectrum, newton_solve, BranchPoint, BranchResult};
pub use elliptic::{compute_f_v, g_eps, g_small_gap, solve_dirichlet, solve_potential, trace_eta_derivative};
pub use error::{Error, Result};
pub use field::{Field2d, PotentialField, ScalarField2D};
pub use grid::RadialGrid;
pub use params::ModelParams;
pub use plate::{assemble_a, rhs_h, simulate, step, ClampedOperator, SimStatus, SimTolerances, SimTrace};
pub use profile::PlateProfile;
pub use transform::{assemble_coefficients, ellipticity_spectrum, map_to_physical, TransformedCoeffs};
pub use verify::{auxiliary_u, clamped_eigenpair, mixed_derivative_identity_check, trace_corpus_report, trace_inequality_check, AuxiliaryU, EigenPair};
