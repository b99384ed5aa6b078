//! Balanced truncation for second-order linear systems
//! `M x'' + E x' + K x = B_u u`, `y = C_p x + C_v x'`, including the
//! frequency- and time-limited variants.

pub mod balancing;
pub mod error;
pub mod gramians;
pub mod io;
pub mod linalg;
pub mod lyapunov;
pub mod matfun;
pub mod pipeline;
pub mod system;

pub use error::{Error, Result};
