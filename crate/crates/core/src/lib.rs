//! Throughput evaluation and resource allocation for a relay-enabled
//! backscatter link.
//!
//! A hybrid access point (HAP) first powers an IoT node that backscatters its
//! data to both the HAP and a destination (`M` subframes), then acts as a
//! decode-and-forward relay for the remaining `N` subframes, re-encoding the
//! decoded block through a linear mapping matrix. This crate provides:
//!
//! - [`model`]: configuration, channel gains, energy accounting and the
//!   feasibility predicates of the joint allocation problem.
//! - [`throughput`]: closed-form rate expressions and the upper-bound
//!   comparator used by earlier equal/continuous-time schemes.
//! - [`linmap`]: mapping-matrix construction, numeric log-det rates and a
//!   brute-force eigenvalue search.
//! - [`kernel`]: a small log-barrier interior-point solver and a monotone
//!   bisection routine.
//! - [`allocator`]: the three-step mixed-integer solver (SCA, bisection,
//!   integer conversion and power re-optimization).
//! - [`oracle`]: exhaustive search over the subframe split.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
// NaN must fail domain checks, hence `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod allocator;
pub mod error;
pub mod kernel;
pub mod linmap;
pub mod model;
pub mod oracle;
pub mod throughput;

mod math;

pub use allocator::{allocate, SolverOptions, SolverReport};
pub use error::{AllocError, ModelError};
pub use model::{channel_gains, Allocation, ChannelState, NetworkConfig};
pub use throughput::{rate_sum, RateBreakdown};
