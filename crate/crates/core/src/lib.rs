pub mod error;
pub mod geometry;
pub mod poly;
pub mod basis;
pub mod quadrature;
pub mod mesh;
pub mod problem;
pub mod spaces;
pub mod linalg;
pub mod dpg;
pub mod lifts;
pub mod estimator;
pub mod driver;

pub use error::{Error, Result};
