pub mod cli;
pub mod editdist;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod policies;
pub mod space;
pub mod states;
pub mod traces;

pub use error::{Error, Result};
