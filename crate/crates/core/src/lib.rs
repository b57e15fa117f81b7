//! Approximate restricted shortest paths: shortest paths subject to a
//! delay budget, with `(1, 1+ε)` or `(1+ε, 1+ε)` bicriteria guarantees.

pub mod allpairs;
pub mod dense;
pub mod dp;
pub mod error;
pub mod gap;
pub mod generate;
pub mod graph;
pub mod io;
pub mod ldd;
pub mod oracle;
pub mod sparse;

pub use error::{Result, RspError};
