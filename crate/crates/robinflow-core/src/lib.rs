pub mod acceptance;
pub mod boundary;
pub mod cli;
pub mod disc;
pub mod error;
pub mod flowengine;
pub mod kernel;
pub mod oracle;
pub mod quad;
pub mod robinflow;
pub mod specfun;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::RobinSymbol;
