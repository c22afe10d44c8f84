//! Fidelity, angle and Bures distance between quantum channels, the
//! semidefinite programs behind them, and lower bounds on the number of
//! channel uses needed for perfect discrimination.

pub mod channel_fidelity;
pub mod channel_fisher;
pub mod channels;
pub mod cli;
pub mod discrimination;
pub mod document;
pub mod error;
pub mod matlin;
pub mod oracles;
pub mod sampling;
pub mod sdp_core;
pub mod tensor_symmetry;
pub mod unitary_geometry;

pub use error::{Error, Result};
