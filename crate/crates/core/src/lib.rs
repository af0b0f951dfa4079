//! Kinematics, reactive behaviors and a deterministic simulation loop for
//! decentralized swarms of heavy articulated vehicles (HAVs): an
//! Ackermann-steered truck towing one or more on-axle hitched trailers.
//!
//! The crate is `no_std` and only needs `alloc`. All trigonometry goes
//! through [`libm`], so results are bit-identical across platforms.
//!
//! Layout:
//!
//! * [`kinematics`]: vehicle description, forward integration, jackknife and
//!   collision predicates, derived safety bounds.
//! * [`dubins`]: shortest forward-only paths between poses.
//! * [`behavior`]: the reaction stack turning goals, neighbours and trailer
//!   articulation into a steering command.
//! * [`scenario`]: randomized scenario generation and goal tests.
//! * [`simulator`]: the synchronous two-phase experiment loop.
//! * [`analysis`]: close-miss classification, vehicle metrics, aggregation.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod angle;
pub mod behavior;
pub mod dubins;
pub mod geometry;
pub mod kinematics;
pub mod scenario;
pub mod simulator;

pub use analysis::{aggregate, classify_close_miss, CloseMiss, Histogram, SummaryReport};
pub use behavior::{decide, MovementVector, Neighbor, WeightParams};
pub use dubins::{DubinsPath, DubinsWord, Turn};
pub use geometry::Vec2;
pub use kinematics::{ConfigError, Control, HavConfig, HavState, Pose};
pub use scenario::{Scenario, ScenarioError, ScenarioParams};
pub use simulator::{run, run_batch, ExperimentRecord, RunOutput, SimEvent, Termination};
