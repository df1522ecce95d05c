//! Energy-aware ON/OFF scheduling for mobile-network cells.
//!
//! `greencells` models a radio network as a set of base-station cells that
//! contribute capacity to geographic pixels, replays (or synthesizes) traffic
//! demand over time, and scores ON/OFF schedules by accumulated energy plus a
//! coverage penalty. On top of the simulator it provides receding-horizon
//! strategy synthesis: every control period a near-optimal short-horizon
//! schedule is computed from Monte-Carlo rollouts and only its first action is
//! executed. Large networks can be split into small geographic partitions that
//! are synthesized independently and merged.
//!
//! The crate is organized around the simulation loop:
//!
//! - [`network`]: immutable topology: cells, frequency layers, pixels, and
//!   the cell→pixel capacity contributions.
//! - [`traffic`]: time-indexed demand traces, uniform spreading onto pixels,
//!   stochastic perturbation, and a synthetic diurnal generator.
//! - [`reward`]: energy + coverage-penalty accounting.
//! - [`action`]: per-cell ON/OFF vectors with the coverage-layer constraint.
//! - [`sim`]: discrete-time simulation under a pluggable [`sim::Controller`].
//! - [`synthesis`]: short-horizon optimizers (exhaustive, hill-climb,
//!   cross-entropy), the receding-horizon controller, and an exact
//!   brute-force oracle for small instances.
//! - [`partition`]: geographic clustering into bounded subgames and the
//!   distributed controller that merges per-partition strategies.
//! - [`baselines`]: reference controllers (always-ON, fixed night window).
//! - [`harness`]: scenario generation and experiment driving with CSV
//!   outputs; backs the `greencells` command-line tool.
//!
//! See the crate `examples/` directory for one runnable program per major
//! capability.

pub mod action;
pub mod baselines;
pub mod harness;
pub mod network;
pub mod partition;
pub mod reward;
pub mod rng;
pub mod sim;
pub mod synthesis;
pub mod traffic;

pub use action::ActionVector;
pub use network::{Cell, LayerCode, Network, Pixel, ScenarioDoc};
pub use reward::{RewardBreakdown, RewardParams};
pub use sim::{Controller, RunOutput, SimConfig, SimState};
pub use synthesis::{OptimizerKind, Strategy, SynthesisConfig};
pub use traffic::{DemandModel, DemandTrace, NoiseKind};
