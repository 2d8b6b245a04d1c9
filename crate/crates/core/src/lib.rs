pub mod error;
pub mod cayley;
pub mod floyd;
pub mod groups;
pub mod paths;
pub mod qclab;
pub mod relative;
pub mod runner;
pub mod scenario;

pub use error::{Error, Result};
