pub mod cones;
pub mod constab;
pub mod det;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod tolerance;
pub mod unistab;

pub use error::{Error, Result};
pub use tolerance::ToleranceProfile;
