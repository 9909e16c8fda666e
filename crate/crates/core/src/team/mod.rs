//! The team controller: world model, behaviours and the control tick.

mod behaviour;
mod control;
mod world;

pub use behaviour::{
    behaviour_target, intercept_point, Behaviour, FormationContext, UnknownBehaviour,
};
pub use control::{escape_waypoint, free_target, planner_seed, steer, ControlParams};
pub use world::{StaleFrame, TrackedRobot, WorldModel};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::formation::FormationLibrary;
use crate::geometry::{FieldModel, Pose2, Vec2};
use crate::kinematics::{clamp_command, BodyVelocity};
use crate::planner::{maintain_plan, Plan, PlanAction, PlannerParams};
use crate::sim::{Team, VisionFrame};
use crate::trajectory::{is_goal_bound, BallMotion, GoalkeeperLine, DEFAULT_WINDOW};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotCommand {
    pub robot_id: u32,
    pub v: BodyVelocity,
    pub stamp: f64,
    pub sequence: u64,
}

/// How the last tick decided to move a robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Steering {
    Hold,
    Direct,
    FollowPlan,
    Replanned,
    Escape,
    Unreachable,
    Teleop,
    Failsafe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSnapshot {
    pub id: u32,
    pub pose: Option<Pose2>,
    pub behaviour: Behaviour,
    pub target: Option<Vec2>,
    pub steering: Steering,
    pub plan: Option<Vec<Vec2>>,
    pub command: BodyVelocity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpponentSnapshot {
    pub id: u32,
    pub pose: Pose2,
}

/// Everything the telemetry stream reports after a tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSnapshot {
    pub tick: u64,
    pub t: Option<f64>,
    pub frame: Option<u64>,
    pub ball: Option<Vec2>,
    pub ball_motion: Option<BallMotion>,
    pub goal_bound: bool,
    pub formation: String,
    pub robots: Vec<RobotSnapshot>,
    pub opponents: Vec<OpponentSnapshot>,
    pub frames_ingested: u64,
    pub dropped_frames: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TeleopInput {
    v: BodyVelocity,
    received_at: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct RobotTickState {
    target: Option<Vec2>,
    steering: Steering,
    command: BodyVelocity,
}

/// Owns the world model and per-robot state; [`TeamController::tick`] turns
/// the current world into one command per robot.
#[derive(Debug, Clone)]
pub struct TeamController {
    world: WorldModel,
    params: ControlParams,
    seed: u64,
    default_behaviour: Behaviour,
    behaviours: BTreeMap<u32, Behaviour>,
    plans: BTreeMap<u32, Plan>,
    sequences: BTreeMap<u32, u64>,
    teleop: BTreeMap<u32, TeleopInput>,
    formations: FormationLibrary,
    last: BTreeMap<u32, RobotTickState>,
    tick: u64,
    ticks_without_frame: u32,
}

impl TeamController {
    pub fn new(field: FieldModel, team: Team, params: ControlParams, seed: u64) -> Self {
        let mut world = WorldModel::new(field, team, DEFAULT_WINDOW);
        world.lookahead = params.obstacle_lookahead;
        TeamController {
            world,
            params,
            seed,
            default_behaviour: Behaviour::Idle,
            behaviours: BTreeMap::new(),
            plans: BTreeMap::new(),
            sequences: BTreeMap::new(),
            teleop: BTreeMap::new(),
            formations: FormationLibrary::builtin(),
            last: BTreeMap::new(),
            tick: 0,
            ticks_without_frame: u32::MAX,
        }
    }

    pub fn with_formations(mut self, lib: FormationLibrary) -> Self {
        self.formations = lib;
        self
    }

    pub fn world(&self) -> &WorldModel {
        &self.world
    }

    pub fn params(&self) -> &ControlParams {
        &self.params
    }

    pub fn formations(&self) -> &FormationLibrary {
        &self.formations
    }

    pub fn behaviour(&self, id: u32) -> &Behaviour {
        self.behaviours.get(&id).unwrap_or(&self.default_behaviour)
    }

    /// How robot `id` was steered on the last tick.
    pub fn steering(&self, id: u32) -> Option<Steering> {
        self.last.get(&id).map(|s| s.steering)
    }

    pub fn active_plan(&self, id: u32) -> Option<&Plan> {
        self.plans.get(&id)
    }

    /// Behaviour for robots with no explicit assignment.
    pub fn set_default_behaviour(&mut self, b: Behaviour) {
        self.default_behaviour = b;
    }

    pub fn set_behaviour(&mut self, id: u32, b: Behaviour) {
        if b != Behaviour::Teleop {
            self.teleop.remove(&id);
        }
        self.plans.remove(&id);
        self.behaviours.insert(id, b);
    }

    /// Store a teleop command and hand the robot over to teleop.
    pub fn set_teleop(&mut self, id: u32, v: BodyVelocity) {
        let received_at = self.world.now().unwrap_or(0.0);
        self.teleop.insert(id, TeleopInput { v, received_at });
        if self.behaviour(id) != &Behaviour::Teleop {
            self.set_behaviour(id, Behaviour::Teleop);
        }
    }

    /// Activate a named formation; `false` when no such formation exists.
    pub fn set_formation(&mut self, name: &str) -> bool {
        self.formations.set_active(name)
    }

    pub fn ingest(&mut self, f: VisionFrame) -> Result<(), StaleFrame> {
        self.world.ingest_frame(f)?;
        self.ticks_without_frame = 0;
        Ok(())
    }

    /// Robots that get a command this tick: everyone visible plus everyone with
    /// an explicit behaviour.
    fn roster(&self) -> BTreeSet<u32> {
        self.world
            .ours
            .keys()
            .chain(self.behaviours.keys())
            .copied()
            .collect()
    }

    pub fn tick(&mut self) -> Vec<RobotCommand> {
        let fresh = self.ticks_without_frame <= self.params.max_reused_ticks;
        self.ticks_without_frame = self.ticks_without_frame.saturating_add(1);
        let stamp = self.world.now().unwrap_or(0.0);
        let roster = self.roster();
        let mut out = Vec::with_capacity(roster.len());
        for id in roster {
            let state = if fresh {
                self.decide(id)
            } else {
                self.plans.remove(&id);
                RobotTickState {
                    target: None,
                    steering: Steering::Failsafe,
                    command: BodyVelocity::ZERO,
                }
            };
            let seq = self.sequences.entry(id).or_insert(0);
            *seq += 1;
            out.push(RobotCommand {
                robot_id: id,
                v: state.command,
                stamp,
                sequence: *seq,
            });
            self.last.insert(id, state);
        }
        self.tick += 1;
        out
    }

    fn decide(&mut self, id: u32) -> RobotTickState {
        let idle = |steering| RobotTickState {
            target: None,
            steering,
            command: BodyVelocity::ZERO,
        };
        let Some(me) = self.world.robot(id).copied() else {
            self.plans.remove(&id);
            return idle(Steering::Failsafe);
        };
        let behaviour = self.behaviour(id).clone();
        if behaviour == Behaviour::Teleop {
            self.plans.remove(&id);
            let now = self.world.now().unwrap_or(0.0);
            let command = match self.teleop.get(&id) {
                Some(t) if now - t.received_at <= self.params.teleop_timeout => {
                    clamp_command(&t.v, &self.params.limits)
                }
                _ => BodyVelocity::ZERO,
            };
            return RobotTickState {
                target: None,
                steering: Steering::Teleop,
                command,
            };
        }

        let ctx = FormationContext::for_world(self.formations.active(), &self.world);
        let target = behaviour_target(
            &behaviour,
            id,
            &self.world,
            Some(&ctx),
            self.params.limits.v_max,
            self.params.min_ball_speed,
        );
        let Some(target) = target else {
            self.plans.remove(&id);
            return idle(Steering::Hold);
        };

        let pos = me.pose.position;
        let obstacles = self.world.obstacles_for(id);
        let planner = PlannerParams {
            rng_seed: planner_seed(self.seed, id, self.tick),
            ..self.params.planner
        };
        let face = self
            .world
            .ball
            .filter(|_| pos.distance(target) <= self.params.face_ball_radius);

        if pos.distance(target) <= self.params.deadband {
            self.plans.remove(&id);
            let command = steer(&me.pose, target, 0.0, target, face, &self.params);
            return RobotTickState {
                target: Some(target),
                steering: Steering::Hold,
                command,
            };
        }

        let goal = free_target(target, obstacles, planner.clearance);
        let (waypoint, steering) = match escape_waypoint(pos, obstacles, planner.clearance) {
            Some(w) => {
                self.plans.remove(&id);
                (Some(w), Steering::Escape)
            }
            None => {
                let now = self.world.now().unwrap_or(0.0);
                let action = maintain_plan(
                    pos,
                    goal,
                    self.plans.get(&id),
                    obstacles,
                    &self.world.field,
                    &planner,
                    now,
                );
                let w = action.steering_target(goal);
                let steering = match &action {
                    PlanAction::GoDirect => Steering::Direct,
                    PlanAction::FollowExisting(_) => Steering::FollowPlan,
                    PlanAction::Replan(_) => Steering::Replanned,
                    PlanAction::Unreachable => Steering::Unreachable,
                };
                match action.into_plan() {
                    Some(p) => self.plans.insert(id, p),
                    None => self.plans.remove(&id),
                };
                (w, steering)
            }
        };
        let command = match waypoint {
            Some(w) => {
                let beyond = match self.plans.get(&id) {
                    Some(p) if steering != Steering::Escape => p.length_from(w),
                    _ => 0.0,
                };
                steer(&me.pose, w, beyond, goal, face, &self.params)
            }
            None => BodyVelocity::ZERO,
        };
        RobotTickState {
            target: Some(goal),
            steering,
            command,
        }
    }

    pub fn snapshot(&self) -> TeamSnapshot {
        let wm = &self.world;
        let line = GoalkeeperLine::for_field(&wm.field);
        let goal_bound = wm.ball_motion.as_ref().is_some_and(|m| {
            is_goal_bound(m, &line, wm.field.goal_width / 2.0, self.params.min_ball_speed)
        });
        let robots = self
            .roster()
            .into_iter()
            .map(|id| {
                let last = self.last.get(&id);
                RobotSnapshot {
                    id,
                    pose: wm.robot(id).map(|r| r.pose),
                    behaviour: self.behaviour(id).clone(),
                    target: last.and_then(|s| s.target),
                    steering: last.map_or(Steering::Hold, |s| s.steering),
                    plan: self.plans.get(&id).map(|p| p.waypoints.clone()),
                    command: last.map_or(BodyVelocity::ZERO, |s| s.command),
                }
            })
            .collect();
        TeamSnapshot {
            tick: self.tick,
            t: wm.now(),
            frame: wm.latest_frame.as_ref().map(|f| f.frame_number),
            ball: wm.ball,
            ball_motion: wm.ball_motion,
            goal_bound,
            formation: self.formations.active().name.clone(),
            robots,
            opponents: wm
                .theirs
                .values()
                .map(|r| OpponentSnapshot { id: r.id, pose: r.pose })
                .collect(),
            frames_ingested: wm.frames_ingested,
            dropped_frames: wm.dropped_frames,
        }
    }
}
