//! Scripted scenarios that run the simulator and the team controller together.
//!
//! The two sides only talk through channels carrying the same JSON messages
//! they would exchange over UDP: vision frames one way, command datagrams the
//! other. They run in lockstep, one control tick per camera frame, so a run is
//! a pure function of its seed and configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{DefaultHasher, Hasher};
use std::str::FromStr;
use std::sync::mpsc;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formation::{assign_roles, home_position, FormationLibrary};
use crate::geometry::{Pose2, Vec2, BALL_RADIUS, ROBOT_RADIUS};
use crate::sim::{GoalSide, SimConfig, SimError, SimState, Simulator, Team};
use crate::team::{Behaviour, ControlParams, Steering, TeamController};
use crate::wire::{decode_command, decode_vision, encode_command, encode_vision};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Follow,
    Intercept,
    Goalkeeper,
    Formation,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Follow,
        Scenario::Intercept,
        Scenario::Goalkeeper,
        Scenario::Formation,
    ];
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown scenario {0:?} (expected follow, intercept, goalkeeper or formation)")]
pub struct UnknownScenario(pub String);

impl FromStr for Scenario {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "follow" => Ok(Scenario::Follow),
            "intercept" => Ok(Scenario::Intercept),
            "goalkeeper" => Ok(Scenario::Goalkeeper),
            "formation" => Ok(Scenario::Formation),
            _ => Err(UnknownScenario(s.into())),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Follow => "follow",
            Scenario::Intercept => "intercept",
            Scenario::Goalkeeper => "goalkeeper",
            Scenario::Formation => "formation",
        })
    }
}

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("controller link failed: {0}")]
    Link(String),
}

/// Sim and controller settings shared by every scenario.
#[derive(Debug, Clone)]
pub struct DemoSetup {
    pub sim: SimConfig,
    pub control: ControlParams,
    pub formations: FormationLibrary,
    pub planner_seed: u64,
    /// Overrides the scenario's own duration, seconds.
    pub duration: Option<f64>,
}

impl Default for DemoSetup {
    fn default() -> Self {
        DemoSetup {
            sim: SimConfig::default(),
            control: ControlParams::default(),
            formations: FormationLibrary::builtin(),
            planner_seed: 0,
            duration: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub at: f64,
    pub origin: Vec2,
    pub velocity: Vec2,
    /// Where the unobstructed ball would cross the goal line.
    pub aim: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoMetrics {
    pub scenario: Scenario,
    pub seed: u64,
    pub frames: u64,
    pub sim_time: f64,
    /// First time the acting robot's body came within `reach_distance` of the
    /// ball's surface.
    pub time_to_ball: Option<f64>,
    pub reach_distance: f64,
    /// Smallest gap between two robot bodies over the run (negative means
    /// contact).
    pub min_clearance: Option<f64>,
    pub shot: Option<Shot>,
    /// The shot scores when no robot is on the field.
    pub shot_on_target: Option<bool>,
    pub save: Option<bool>,
    pub goal: Option<GoalSide>,
    pub formation_error_mean: Option<f64>,
    pub formation_error_max: Option<f64>,
    pub steering: BTreeMap<Steering, u64>,
    /// Hash of every frame's ground truth; equal digests mean equal runs.
    pub trace_digest: String,
}

#[derive(Debug, Clone)]
pub struct DemoRun {
    pub metrics: DemoMetrics,
    pub final_state: SimState,
}

/// Body-surface gap at which a robot counts as having reached the ball.
pub const REACH_DISTANCE: f64 = 0.1;

struct Script {
    state: SimState,
    behaviours: Vec<(u32, Behaviour)>,
    default_behaviour: Behaviour,
    duration: f64,
    shot: Option<Shot>,
    actor: Option<u32>,
}

fn jitter(rng: &mut ChaCha8Rng, amp: f64) -> f64 {
    rng.random_range(-amp..=amp)
}

fn script(scenario: Scenario, seed: u64, cfg: &SimConfig) -> Script {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SimState::empty();
    match scenario {
        Scenario::Follow => {
            state.place_robot(Team::Yellow, 0, Pose2::new(Vec2::new(-2.0, 0.0), 0.0));
            let blockers = [(-1.0, 0.0), (-1.1, 0.65), (-0.4, -0.6)];
            for (i, (x, y)) in blockers.into_iter().enumerate() {
                let p = Vec2::new(x + jitter(&mut rng, 0.1), y + jitter(&mut rng, 0.1));
                state.place_robot(Team::Blue, i as u32, Pose2::new(p, std::f64::consts::PI));
            }
            Script {
                state,
                behaviours: vec![(0, Behaviour::FollowBall)],
                default_behaviour: Behaviour::Idle,
                duration: 5.0,
                shot: None,
                actor: Some(0),
            }
        }
        Scenario::Intercept => {
            state.place_robot(Team::Yellow, 0, Pose2::new(Vec2::new(-1.0, -1.5), 0.0));
            state.place_robot(Team::Blue, 0, Pose2::new(Vec2::new(-0.3, -0.6), 0.0));
            let origin = Vec2::new(-2.5 + jitter(&mut rng, 0.3), 1.0 + jitter(&mut rng, 0.3));
            let heading = -0.45 + jitter(&mut rng, 0.15);
            let speed = rng.random_range(1.2..=1.6);
            state.ball.p = origin;
            let velocity = Vec2::from_angle(heading) * speed;
            Script {
                state,
                behaviours: vec![(0, Behaviour::InterceptBall)],
                default_behaviour: Behaviour::Idle,
                duration: 5.0,
                shot: Some(Shot {
                    at: 0.0,
                    origin,
                    velocity,
                    aim: origin + velocity,
                }),
                actor: Some(0),
            }
        }
        Scenario::Goalkeeper => {
            let line_x = -cfg.field.defense_line_x;
            state.place_robot(Team::Yellow, 0, Pose2::new(Vec2::new(line_x, 0.0), 0.0));
            let origin = Vec2::new(rng.random_range(-3.0..=-1.5), rng.random_range(-1.5..=1.5));
            let half = cfg.field.goal_width / 2.0;
            let aim = Vec2::new(-cfg.field.half_length(), rng.random_range(-0.8 * half..=0.8 * half));
            let speed = rng.random_range(1.5..=2.0);
            state.ball.p = origin;
            Script {
                state,
                behaviours: vec![(0, Behaviour::Goalkeeper)],
                default_behaviour: Behaviour::Idle,
                duration: 4.5,
                shot: Some(Shot {
                    at: 0.5,
                    origin,
                    velocity: (aim - origin).normalized() * speed,
                    aim,
                }),
                actor: None,
            }
        }
        Scenario::Formation => {
            let cfg5 = SimConfig {
                n_robots_per_team: 5,
                ..*cfg
            };
            state = SimState::kickoff(&cfg5);
            let origin = Vec2::ZERO;
            let heading = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let velocity = Vec2::from_angle(heading) * rng.random_range(0.8..=1.5);
            Script {
                state,
                behaviours: Vec::new(),
                default_behaviour: Behaviour::HoldFormation(None),
                duration: 6.0,
                shot: Some(Shot {
                    at: 0.0,
                    origin,
                    velocity,
                    aim: origin + velocity,
                }),
                actor: None,
            }
        }
    }
}

fn body_gap_to_ball(state: &SimState, team: Team, id: u32) -> Option<f64> {
    let r = state.robot(team, id)?;
    Some(r.pose.position.distance(state.ball.p) - ROBOT_RADIUS - BALL_RADIUS)
}

fn min_robot_gap(state: &SimState) -> Option<f64> {
    let rs = &state.robots;
    let mut best: Option<f64> = None;
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            let g = rs[i].pose.position.distance(rs[j].pose.position) - 2.0 * ROBOT_RADIUS;
            best = Some(best.map_or(g, |b| b.min(g)));
        }
    }
    best
}

fn digest(h: &mut DefaultHasher, s: &SimState) {
    h.write_u64(s.tick);
    for r in &s.robots {
        h.write_u64(r.pose.position.x.to_bits());
        h.write_u64(r.pose.position.y.to_bits());
        h.write_u64(r.pose.heading().to_bits());
    }
    h.write_u64(s.ball.p.x.to_bits());
    h.write_u64(s.ball.p.y.to_bits());
}

/// Would `shot` score on an empty field?
fn shot_scores(shot: &Shot, cfg: &SimConfig, duration: f64) -> Result<bool, SimError> {
    let mut state = SimState::empty();
    state.ball.p = shot.origin;
    state.ball.v = shot.velocity;
    let mut sim = Simulator::new(*cfg, state)?;
    let steps = (duration / cfg.physics_dt).ceil() as u64;
    for _ in 0..steps {
        sim.step();
        if sim.state().goal.is_some() {
            break;
        }
    }
    Ok(sim.state().goal == Some(GoalSide::Negative))
}

pub fn run_demo(scenario: Scenario, seed: u64, setup: &DemoSetup) -> Result<DemoRun, DemoError> {
    let cfg = SimConfig {
        rng_seed: seed,
        controlled_team: Team::Yellow,
        ..setup.sim
    };
    let script = script(scenario, seed, &cfg);
    let duration = setup.duration.unwrap_or(script.duration);
    let mut sim = Simulator::new(cfg, script.state.clone())?;

    let mut controller = TeamController::new(
        cfg.field,
        Team::Yellow,
        setup.control,
        setup.planner_seed ^ seed,
    )
    .with_formations(setup.formations.clone());
    controller.set_default_behaviour(script.default_behaviour.clone());
    for (id, b) in &script.behaviours {
        controller.set_behaviour(*id, b.clone());
    }

    let frames = (duration * cfg.vision_rate).round() as u64;
    let (vision_tx, vision_rx) = mpsc::channel::<String>();
    let (command_tx, command_rx) = mpsc::channel::<Vec<String>>();

    let mut hasher = DefaultHasher::new();
    let mut time_to_ball = None;
    let mut min_clearance = min_robot_gap(sim.state());
    let mut shot_pending = script.shot.filter(|s| s.at > 0.0);
    if let Some(s) = script.shot.filter(|s| s.at <= 0.0) {
        sim.state_mut().ball.v = s.velocity;
    }

    let (controller, steering) = thread::scope(|scope| -> Result<_, DemoError> {
        let team = scope.spawn(move || {
            let mut steering: BTreeMap<Steering, u64> = BTreeMap::new();
            for msg in vision_rx {
                if let Ok(frame) = decode_vision(msg.as_bytes()) {
                    let _ = controller.ingest(frame);
                }
                let cmds = controller.tick();
                for c in &cmds {
                    if let Some(s) = controller.steering(c.robot_id) {
                        *steering.entry(s).or_default() += 1;
                    }
                }
                if command_tx.send(cmds.iter().map(encode_command).collect()).is_err() {
                    break;
                }
            }
            (controller, steering)
        });

        let mut frame = sim.vision();
        for _ in 0..frames {
            vision_tx
                .send(encode_vision(&frame))
                .map_err(|e| DemoError::Link(e.to_string()))?;
            let batch = command_rx
                .recv()
                .map_err(|e| DemoError::Link(e.to_string()))?;
            for datagram in batch {
                let c = decode_command(datagram.as_bytes())
                    .map_err(|e| DemoError::Link(e.to_string()))?;
                // Commands for robots the field does not have are dropped, as
                // the real radio link would.
                let _ = sim.command(Team::Yellow, c.robot_id, &c.v);
            }
            frame = sim.advance_frame();
            if let Some(s) = shot_pending {
                if sim.state().time + 1e-9 >= s.at {
                    let st = sim.state_mut();
                    st.ball.p = s.origin;
                    st.ball.v = s.velocity;
                    shot_pending = None;
                }
            }
            let st = sim.state();
            digest(&mut hasher, st);
            if let Some(g) = min_robot_gap(st) {
                min_clearance = Some(min_clearance.map_or(g, |m: f64| m.min(g)));
            }
            if time_to_ball.is_none() {
                if let Some(id) = script.actor {
                    if body_gap_to_ball(st, Team::Yellow, id).is_some_and(|g| g < REACH_DISTANCE) {
                        time_to_ball = Some(st.time);
                    }
                }
            }
        }
        drop(vision_tx);
        team.join()
            .map_err(|_| DemoError::Link("controller thread panicked".into()))
    })?;

    let st = sim.state().clone();
    let (shot_on_target, save) = match (scenario, script.shot) {
        (Scenario::Goalkeeper, Some(shot)) => {
            let on = shot_scores(&shot, &cfg, duration)?;
            (Some(on), Some(st.goal != Some(GoalSide::Negative)))
        }
        _ => (None, None),
    };
    let (formation_error_mean, formation_error_max) = if scenario == Scenario::Formation {
        let f = controller.formations().active();
        let ids: Vec<u32> = st
            .robots
            .iter()
            .filter(|r| r.team == Team::Yellow)
            .map(|r| r.id)
            .collect();
        let roles = assign_roles(f, &ids);
        let errors: Vec<f64> = roles
            .iter()
            .filter_map(|(&id, role)| {
                let home = home_position(role, st.ball.p, &cfg.field);
                Some(st.robot(Team::Yellow, id)?.pose.position.distance(home))
            })
            .collect();
        let n = errors.len().max(1) as f64;
        (
            Some(errors.iter().sum::<f64>() / n),
            errors.iter().copied().reduce(f64::max),
        )
    } else {
        (None, None)
    };

    Ok(DemoRun {
        metrics: DemoMetrics {
            scenario,
            seed,
            frames,
            sim_time: st.time,
            time_to_ball,
            reach_distance: REACH_DISTANCE,
            min_clearance,
            shot: script.shot,
            shot_on_target,
            save,
            goal: st.goal,
            formation_error_mean,
            formation_error_max,
            steering,
            trace_digest: format!("{:016x}", hasher.finish()),
        },
        final_state: st,
    })
}
