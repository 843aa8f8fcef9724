pub mod certify;
pub mod cli;
pub mod error;
pub mod expr;
pub mod heights;
pub mod mobius;
pub mod numth;
pub mod orbits;
pub mod poly;
pub mod real;
pub mod roots;
pub mod search;

pub use error::{Error, Result};
