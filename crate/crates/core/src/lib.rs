pub mod diffpoly;
pub mod error;
pub mod hodge;
pub mod hierarchy;
pub mod ilw;
pub mod linalg;
pub mod localfunc;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
