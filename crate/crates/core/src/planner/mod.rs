//! Probabilistic-roadmap path planning.
//!
//! A plan is built from scratch every time: sample collision-free milestones,
//! link every node to its `k` nearest neighbours where the link is clear, and
//! search the graph with Dijkstra. [`maintain_plan`] decides each tick whether a
//! plan is needed at all.

mod dijkstra;
mod policy;
mod roadmap;
mod sampling;

pub use dijkstra::{dijkstra, path_weight};
pub use policy::{maintain_plan, plan, plan_detailed, PlanAction, PlanOutcome};
pub use roadmap::{build_roadmap, Roadmap, GOAL_INDEX, START_INDEX};
pub use sampling::{point_clear, sample_milestones, segment_clear};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Vec2, ROBOT_RADIUS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("could not place milestone {slot} in free space after {attempts} attempts")]
    FreeSpaceExhausted { slot: usize, attempts: usize },
    #[error("start or goal is inside an inflated obstacle")]
    StartOrGoalBlocked,
    #[error("invalid planner parameters: {0}")]
    BadParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub n_samples: usize,
    pub k_neighbors: usize,
    /// Added to each obstacle's radius for every collision check. Obstacles are
    /// robot-sized discs, so the default (own radius plus 2 cm) keeps robot
    /// bodies 2 cm apart along planned segments.
    pub clearance: f64,
    pub max_resample_attempts: usize,
    pub rng_seed: u64,
    /// A waypoint counts as reached once the robot is this close.
    pub waypoint_capture_radius: f64,
    /// An active plan whose target moved further than this is discarded.
    pub retarget_tolerance: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            n_samples: 10,
            k_neighbors: 5,
            clearance: ROBOT_RADIUS + 0.02,
            max_resample_attempts: 100,
            rng_seed: 0,
            waypoint_capture_radius: 0.05,
            retarget_tolerance: 0.25,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), PlannerError> {
        if self.n_samples < 1 {
            return Err(PlannerError::BadParams("n_samples must be at least 1"));
        }
        if self.k_neighbors < 1 {
            return Err(PlannerError::BadParams("k_neighbors must be at least 1"));
        }
        if !(self.clearance > 0.0 && self.clearance.is_finite()) {
            return Err(PlannerError::BadParams("clearance must be positive"));
        }
        if self.max_resample_attempts < 1 {
            return Err(PlannerError::BadParams("max_resample_attempts must be at least 1"));
        }
        if !(self.waypoint_capture_radius >= 0.0) {
            return Err(PlannerError::BadParams("waypoint_capture_radius must be non-negative"));
        }
        Ok(())
    }
}

/// A waypoint sequence from the robot toward `target`. The start position is
/// not included; the last waypoint is the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub waypoints: Vec<Vec2>,
    pub created_at: f64,
    pub target: Vec2,
}

impl Plan {
    pub fn next_waypoint(&self) -> Option<Vec2> {
        self.waypoints.first().copied()
    }

    /// Drop leading waypoints that `current` has already reached.
    pub fn advance(&mut self, current: Vec2, capture_radius: f64) {
        let reached = self
            .waypoints
            .iter()
            .take_while(|w| w.distance(current) <= capture_radius)
            .count();
        self.waypoints.drain(..reached);
    }

    pub fn is_exhausted(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Polyline length from `from` through every waypoint.
    pub fn length_from(&self, from: Vec2) -> f64 {
        let mut prev = from;
        let mut total = 0.0;
        for w in &self.waypoints {
            total += prev.distance(*w);
            prev = *w;
        }
        total
    }
}
