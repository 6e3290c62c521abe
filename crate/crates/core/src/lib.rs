pub mod circle;
pub mod collar;
pub mod error;
pub mod periods;
pub mod report;
pub mod spectral;
pub mod surface;
pub mod textio;
pub mod theta;

pub use error::{Error, Result};
