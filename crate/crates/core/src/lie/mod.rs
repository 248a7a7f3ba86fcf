//! Lie-bracket controllability tools for control-affine systems.

pub mod bracket;
pub mod field;
pub mod fixtures;
pub mod larc;
pub mod numeric;

pub use bracket::FormalBracket;
pub use field::{ConstantField, FieldSet, GenericField, LinearField, VectorField};
pub use larc::{
    bad_bracket_check, find_admissible_weight, larc_rank, weight_neutralization, BadBracketStatus, LarcOptions,
    LarcReport, WeightCheck,
};
pub use numeric::{
    lie_bracket, nested_bracket, nested_bracket_checked, numeric_jacobian, BracketField, BracketOptions, DiffScheme,
    FdScheme, JacobianOptions,
};
