//! Dynamic-soaring flight simulation with a real-time extremum-seeking roll
//! controller, plus numeric Lie-bracket tools for checking small-time local
//! controllability of control-affine systems.

pub mod chen_fliess;
pub mod commands;
pub mod dynamics;
pub mod error;
pub mod esc;
pub mod jet;
pub mod lie;
pub mod scenario;
pub mod sim;
pub mod windfield;

pub use error::{Result, SoaringError};
