pub mod catalog;
pub mod classify;
pub mod curvature;
pub mod deriv;
pub mod error;
pub mod expr;
pub mod finsler;
pub mod geometry;
pub mod grid;
pub mod jet;
pub mod linalg;
pub mod ode;
pub mod phi;
pub mod quad;
pub mod report;
pub mod scurv;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
