//! Dense emulation of block-encoding algorithms.
//!
//! Every block encoding is carried as the explicit top-left block of its
//! unitary plus a resource ledger, so pipelines can be run end to end and
//! checked against classical reference computations in [`oracles`].

pub mod algorithms;
pub mod cost;
pub mod encoding;
pub mod error;
pub mod linalg;
pub mod matrix_io;
pub mod oracles;
pub mod par;
pub mod poly;
pub mod random;
pub mod report;
pub mod state_prep;

pub use encoding::{BlockEncoding, ResourceCost};
pub use error::{Error, Result, Warning};
pub use linalg::{CMatrix, CVector, C64};
