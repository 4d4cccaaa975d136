//! Exact computations around circular units in cyclotomic `Z_p`-extensions.

pub mod arith;
pub mod certifier;
pub mod cyclotomic;
pub mod error;
pub mod fields;
pub mod howell;
pub mod iwasawa;
pub mod modules;
pub mod padic;
pub mod prospector;

pub use error::{Error, Result};
