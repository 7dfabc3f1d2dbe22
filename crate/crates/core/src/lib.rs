pub mod angular;
pub mod design;
pub mod error;
pub mod fixtures;
pub mod halfint;
pub mod majorana;
pub mod metrology;
pub mod multipole;
pub mod sampling;
pub mod search;
pub mod spinstate;

pub use error::{Error, Result};
pub use halfint::HalfInt;
pub use nalgebra;
