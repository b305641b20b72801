pub mod cli;
pub mod codec;
pub mod corpus;
pub mod depth;
pub mod entropy;
pub mod error;
pub mod evosim;
pub mod kestimate;
pub mod ncd;

pub use error::{Error, Result};
