pub mod error;
pub mod bc;
pub mod coupling;
pub mod experiments;
pub mod forms;
pub mod mesh;
pub mod overlay;

pub use error::{Error, Result};
