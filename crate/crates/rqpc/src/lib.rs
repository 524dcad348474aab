//! Planning and simulation toolkit for memoryless quantum communication
//! networks built on redundant quantum parity codes.
//!
//! The crate has three layers:
//!
//! - [`analytic`]: closed-form failure probabilities, link budgets, chain
//!   rate/fidelity estimates, and the `(m, n)` code optimizer.
//! - [`statevec`], [`paritycode`], [`transfer`]: an exact small-register
//!   state-vector engine used to verify the encoding, matter-photon
//!   transfer, heralded-loss recovery, and error-correction protocols,
//!   branch by measurement branch.
//! - [`netsim`]: seeded Monte Carlo simulation of multi-hop chains and
//!   butterfly entanglement distribution, cross-checked against the
//!   analytic layer and (at tiny scale) against full state-vector runs.
//!
//! Monte Carlo trials draw from counter-based per-trial random streams
//! ([`rng::trial_rng`]) and reduce in index order, so a given seed produces
//! bit-identical statistics at any thread count. The `parallel` feature
//! (default) runs the inner loops on rayon; without it everything runs
//! sequentially through the same code paths.

pub mod analytic;
pub mod error;
pub mod exec;
pub mod netsim;
pub mod paritycode;
pub mod rng;
pub mod statevec;
pub mod transfer;
pub mod verify;

pub use analytic::{CodeParams, LinkBudget};
pub use error::{Error, Result};
pub use exec::ExecMode;
