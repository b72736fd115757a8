pub mod design;
pub mod dynamics;
pub mod error;
mod extended;
pub mod linalg;
pub mod jordan;
pub mod model;
pub mod perturbation;

pub use error::{Error, Result};
