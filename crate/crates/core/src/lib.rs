pub mod error;
pub mod fibercorrect;
pub mod freegroup;
pub mod gog;
pub mod intlin;
pub mod minkowski;
pub mod pipeline;
pub mod torus;
pub mod whitehead;

pub use error::{Error, Result};
pub use intlin::BigMatrix;
pub use num_bigint::BigInt;
