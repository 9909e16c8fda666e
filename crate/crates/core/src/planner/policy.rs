use serde::{Deserialize, Serialize};

use super::dijkstra::dijkstra;
use super::{
    build_roadmap, sample_milestones, segment_clear, Plan, PlannerError, PlannerParams, Roadmap,
    GOAL_INDEX, START_INDEX,
};
use crate::geometry::{Disc, FieldModel, Vec2};

/// What the robot should do this tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PlanAction {
    /// Direct line to the target is clear; any active plan is dropped.
    GoDirect,
    /// Keep the active plan; its first waypoint is the next one to drive to.
    FollowExisting(Plan),
    Replan(Plan),
    Unreachable,
}

impl PlanAction {
    /// The point to steer toward, if any.
    pub fn steering_target(&self, target: Vec2) -> Option<Vec2> {
        match self {
            PlanAction::GoDirect => Some(target),
            PlanAction::FollowExisting(p) | PlanAction::Replan(p) => p.next_waypoint(),
            PlanAction::Unreachable => None,
        }
    }

    pub fn plan(&self) -> Option<&Plan> {
        match self {
            PlanAction::FollowExisting(p) | PlanAction::Replan(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_plan(self) -> Option<Plan> {
        match self {
            PlanAction::FollowExisting(p) | PlanAction::Replan(p) => Some(p),
            _ => None,
        }
    }
}

/// Everything one planning call produced, for visualisation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub roadmap: Roadmap,
    /// Node indices from start to goal, when a path exists.
    pub path: Option<Vec<usize>>,
    pub plan: Option<Plan>,
}

pub fn plan_detailed(
    start: Vec2,
    target: Vec2,
    obstacles: &[Disc],
    field: &FieldModel,
    params: &PlannerParams,
) -> Result<PlanOutcome, PlannerError> {
    params.validate()?;
    let milestones = sample_milestones(params, field, obstacles)?;
    let mut roadmap = build_roadmap(start, target, &milestones, obstacles, params)?;
    // A clear straight line is always the shortest path, even when the goal is
    // not among the start's nearest neighbours.
    let path = if segment_clear(start, target, obstacles, params.clearance) {
        roadmap.link(START_INDEX, GOAL_INDEX);
        Some(vec![START_INDEX, GOAL_INDEX])
    } else {
        dijkstra(&roadmap, START_INDEX, GOAL_INDEX)
    };
    let plan = path.as_ref().map(|indices| {
        let mut waypoints: Vec<Vec2> = Vec::with_capacity(indices.len());
        for &i in &indices[1..] {
            let p = roadmap.nodes[i];
            if waypoints.last() != Some(&p) && p != start {
                waypoints.push(p);
            }
        }
        if waypoints.is_empty() {
            waypoints.push(target);
        }
        Plan {
            waypoints,
            created_at: 0.0,
            target,
        }
    });
    Ok(PlanOutcome {
        roadmap,
        path,
        plan,
    })
}

/// Sample, link and search. `Ok(None)` means this sample set has no path.
pub fn plan(
    start: Vec2,
    target: Vec2,
    obstacles: &[Disc],
    field: &FieldModel,
    params: &PlannerParams,
) -> Result<Option<Plan>, PlannerError> {
    plan_detailed(start, target, obstacles, field, params).map(|o| o.plan)
}

/// Per-tick plan maintenance:
///
/// 1. direct line clear: drop any plan and drive straight at the target;
/// 2. otherwise, if the active plan's next waypoint is still reachable in a
///    straight line, keep following it;
/// 3. otherwise plan afresh.
///
/// A plan that is exhausted or was made for a target more than
/// `retarget_tolerance` away counts as absent.
#[allow(clippy::too_many_arguments)]
pub fn maintain_plan(
    current: Vec2,
    target: Vec2,
    active: Option<&Plan>,
    obstacles: &[Disc],
    field: &FieldModel,
    params: &PlannerParams,
    now: f64,
) -> PlanAction {
    if segment_clear(current, target, obstacles, params.clearance) {
        return PlanAction::GoDirect;
    }
    if let Some(active) = active {
        if active.target.distance(target) <= params.retarget_tolerance {
            let mut remaining = active.clone();
            remaining.advance(current, params.waypoint_capture_radius);
            if let Some(next) = remaining.next_waypoint() {
                if segment_clear(current, next, obstacles, params.clearance) {
                    return PlanAction::FollowExisting(remaining);
                }
            }
        }
    }
    match plan(current, target, obstacles, field, params) {
        Ok(Some(mut fresh)) => {
            fresh.created_at = now;
            PlanAction::Replan(fresh)
        }
        Ok(None) | Err(_) => PlanAction::Unreachable,
    }
}
