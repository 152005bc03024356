//! Exact strong shift equivalence and Cuntz-Krieger Morita certificates.
//!
//! * [`exactmat`]: big-integer matrices, Smith form, characteristic polynomials.
//! * [`sftgraph`]: edge graphs and edge transition matrices.
//! * [`ckterm`]: normal forms in the algebraic part of a Cuntz-Krieger algebra.
//! * [`elemeq`], [`ssechain`]: elementary equivalence and bounded chain search.
//! * [`invariants`]: conjugacy invariants used as screens.
//! * [`morita`]: building, checking and inverting bimodule certificates.

pub mod ckterm;
pub mod elemeq;
pub mod error;
pub mod exactmat;
pub mod invariants;
pub mod morita;
pub mod sftgraph;
pub mod ssechain;

pub use error::{Error, Result};
pub use exactmat::Matrix;
