//! Independent reference solvers. None of them use the memory-kernel
//! reduction the engine is built on, so agreement with them validates the
//! boundary treatment rather than restating it.

mod bigbox;
mod keldysh;
mod transfer;

pub use bigbox::{crank_nicolson_bigbox, BigBoxConfig};
pub use keldysh::keldysh_direct;
pub use transfer::{transfer_matrix_coefficients, transfer_matrix_transmission};
