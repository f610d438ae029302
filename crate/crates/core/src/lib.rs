pub mod chen;
pub mod dedekind;
pub mod error;
pub mod forms;
pub mod membrane;
pub mod ncring;
pub mod quadfield;
pub mod quadrature;
pub mod report;
pub mod shuffle;
pub mod suites;
pub mod symbols;

pub use error::{Error, Result};
