//! Performance bounds for slotted random access with access class barring.
//!
//! A burst of devices contends for a small set of preambles; a slot resolves
//! a device iff it picked a preamble nobody else picked. This crate provides
//! three views of that system:
//!
//! * an exact transient analysis of the backlog chain ([`oracle`]),
//! * Chernoff/MGF tail bounds on backlog and burst resolution time that stay
//!   cheap where the exact analysis is not ([`bounds`]),
//! * a reproducible Monte Carlo simulator, including operation under an
//!   estimated backlog ([`sim`]).
//!
//! The building blocks (contention kernel, admission thinning, barring
//! policies) live in [`prob`] and [`scenario`].

pub mod bounds;
pub mod error;
pub mod logexp;
pub mod oracle;
pub mod pmf;
pub mod prob;
pub mod scenario;
pub mod sim;

#[cfg(any(test, feature = "reference"))]
pub mod reference;

pub use error::{Error, Result};
