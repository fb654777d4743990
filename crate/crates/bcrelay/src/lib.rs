//! File formats, comparison schemes and figure sweeps on top of
//! [`bcrelay_core`].
//!
//! - [`config`]: JSON scenario files.
//! - [`schemes`]: the proposed allocator and its baselines.
//! - [`sweep`]: presets, parameter sweeps and the CSV format.
//! - [`audit`]: re-derives every CSV row from its own columns.
//! - [`plot`]: SVG line plots and heatmaps.
//! - [`validate`]: randomized invariant suites.

pub mod audit;
pub mod config;
pub mod plot;
pub mod schemes;
pub mod sweep;
pub mod validate;

pub use bcrelay_core as core;
