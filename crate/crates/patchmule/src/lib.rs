//! patchmule: a patch-based simulator and analyzer for opportunistic
//! data-mule networks.
//!
//! A fleet of collared animals roams a reserve, opportunistically flooding
//! collected data to peers and to a mobile base station driving a fixed
//! route. Instead of tracking every animal, the map is split into patches
//! (the Voronoi cells of the water sources) and each patch's population and
//! data ages are modelled jointly, which keeps the cost independent of the
//! herd size. The crate provides three coupled tools:
//!
//! * [`ssa`]: exact event-driven simulation of the patch model, with
//!   unit-rate age drift between events, exponential waiting times and
//!   min/zero resets on base contacts, peer contacts and migrations
//!   ([`model`]).
//! * [`meanfield`]: the deterministic ODE counterpart, derived mechanically
//!   from the per-variable evolution matrices and integrated with
//!   fixed-step RK4; it approximates the ensemble average over infinitely
//!   many runs.
//! * [`geometry`]: a continuous-space micro-simulation (movement modes,
//!   daily thirst trips, rectangular base route) that calibrates the
//!   patch-level contact and migration rates from first principles.
//!
//! [`metrics`] scores runs by the delivery rate `R = 1 - sum N_i A_i / (N t)`
//! and compares stochastic ensembles against the mean-field prediction;
//! [`cli`] wires everything into a batch command-line tool.
//!
//! Everything is deterministic in the seed: one master seed fans out to
//! per-run ChaCha8 streams, so ensembles parallelize without losing
//! reproducibility.
//!
//! See the crate examples for runnable tours of each capability:
//!
//! ```bash
//! cargo run --release --example single_patch_ages
//! cargo run --release --example derive_ode
//! cargo run --release --example ensemble_convergence
//! cargo run --release --example calibrate_world
//! cargo run --release --example distance_stationarity
//! cargo run --release --example radio_range_sweep
//! ```

// Validation uses `!(x > 0.0)` style checks on purpose: they reject NaN
// along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod layout;
pub mod meanfield;
pub mod metrics;
pub mod model;
pub mod ssa;
pub mod trajectory;

pub use error::{Error, Result};
pub use layout::StateLayout;
pub use model::{
    enumerate_events, even_split, total_rate, EventInstance, EventKind, PatchModel,
    RateParameters, SystemState,
};
pub use ssa::{
    child_seed, next_event, run_ensemble, simulate, Placement, SimulationConfig, RNG_ALGORITHM,
};
pub use trajectory::{uniform_grid, Trajectory};
