//! Off-board control stack for small-size robot soccer.
//!
//! - [`geometry`]: planar primitives and the field model
//! - [`kinematics`]: four-omniwheel inverse/forward kinematics
//! - [`planner`]: probabilistic roadmap + Dijkstra, with per-tick plan maintenance
//! - [`trajectory`]: ball motion regression and goalkeeper line logic
//! - [`formation`]: formation files and role home positions
//! - [`sim`]: deterministic field simulator and camera emulation
//! - [`team`]: world model, behaviours and the control tick
//! - [`wire`]: JSON datagram and WebSocket message formats
//! - [`config`]: stack configuration file
//! - [`demo`]: scripted sim + controller scenarios

pub mod config;
pub mod demo;
pub mod formation;
pub mod geometry;
pub mod kinematics;
pub mod planner;
pub mod sim;
pub mod team;
pub mod trajectory;
pub mod viz;
pub mod wire;

pub use geometry::{Disc, FieldModel, Pose2, Vec2};
pub use kinematics::{BodyVelocity, DriveGeometry, WheelSpeeds};
pub use planner::{Plan, PlanAction, PlannerParams, Roadmap};
pub use sim::{SimConfig, SimState, Simulator, Team, VisionFrame};
pub use trajectory::{BallMotion, BallTrack, GoalkeeperLine};
