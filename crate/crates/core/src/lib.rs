//! Exact, finite-instance machinery for high-arity PAC learning.
//!
//! Everything here works over finite ground sets with exact rational
//! probabilities: configuration spaces and pullbacks ([`universe`]),
//! k-ary hypotheses as lookup tables ([`hypotheses`]), loss functions and
//! total loss ([`losses`]), Natarajan and VCN_k dimensions ([`dimensions`]),
//! Haussler centers and cover bounds ([`packing`]), exact and Monte Carlo
//! k-PAC simulation ([`pacsim`]) and the partization operation
//! ([`partization`]).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and report
//! rendering live in the `vcnk-lab` companion crate.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod audit;
pub mod dimensions;
pub mod error;
pub mod hypotheses;
pub mod losses;
pub mod pacsim;
pub mod packing;
pub mod partization;
pub mod rational;
pub mod universe;

pub use audit::{AuditReport, Quantity, Verdict};
pub use dimensions::Dimension;
pub use error::{Error, Result};
pub use hypotheses::{Hypothesis, HypothesisClass, Space};
pub use losses::Loss;
pub use rational::Rational;
pub use universe::{ConfigPoint, Limits, ProbTemplate, Universe};
