//! Deterministic 2D field simulator standing in for the real robots, ball and
//! overhead camera.
//!
//! Robots are kinematic: the commanded body velocity is mapped to wheel speeds,
//! each wheel follows its target through a first-order lag, and the resulting
//! wheel speeds are mapped back to a body velocity. The ball rolls with
//! constant deceleration and is pushed (perfectly inelastically along the
//! contact normal) by robots that touch it.

use nalgebra::Matrix3x4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FieldModel, Pose2, Vec2, BALL_RADIUS, ROBOT_RADIUS};
use crate::kinematics::{
    apply_pseudo_inverse, clamp_command, inverse_kinematics, BodyVelocity, DriveGeometry,
    VelocityLimits, WheelSpeeds, DEFAULT_TRACKING_TAU,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("unknown robot {team:?} {id}")]
    UnknownRobot { team: Team, id: u32 },
    #[error("invalid simulator configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Yellow,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub field: FieldModel,
    pub n_robots_per_team: usize,
    /// Camera frame rate in Hz.
    pub vision_rate: f64,
    pub physics_dt: f64,
    /// Rolling friction of the ball, m/s².
    pub ball_deceleration: f64,
    pub rng_seed: u64,
    /// Standard deviation of the Gaussian noise added to reported positions.
    pub vision_noise_sigma: f64,
    /// Commands older than this decay to zero.
    pub command_timeout: f64,
    /// Wheel velocity-loop time constant.
    pub tracking_tau: f64,
    pub drive: DriveGeometry,
    pub limits: VelocityLimits,
    /// Per-wheel speed limit in rad/s.
    pub wheel_speed_max: f64,
    /// Team whose robots the command port drives.
    pub controlled_team: Team,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            field: FieldModel::division_b(),
            n_robots_per_team: 6,
            vision_rate: 60.0,
            physics_dt: 1.0 / 240.0,
            ball_deceleration: 0.3,
            rng_seed: 0,
            vision_noise_sigma: 0.0,
            command_timeout: 0.2,
            tracking_tau: DEFAULT_TRACKING_TAU,
            drive: DriveGeometry::default(),
            limits: VelocityLimits::default(),
            wheel_speed_max: 150.0,
            controlled_team: Team::Yellow,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.field
            .validate()
            .map_err(|e| SimError::BadConfig(e.to_string()))?;
        self.drive
            .validate()
            .map_err(|e| SimError::BadConfig(e.to_string()))?;
        let positive = [
            ("vision_rate", self.vision_rate),
            ("physics_dt", self.physics_dt),
            ("command_timeout", self.command_timeout),
            ("tracking_tau", self.tracking_tau),
            ("wheel_speed_max", self.wheel_speed_max),
            ("v_max", self.limits.v_max),
            ("omega_max", self.limits.omega_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::BadConfig(format!("{name} must be positive")));
            }
        }
        if !(self.ball_deceleration >= 0.0) || !(self.vision_noise_sigma >= 0.0) {
            return Err(SimError::BadConfig("deceleration and noise must be non-negative".into()));
        }
        let period = 1.0 / self.vision_rate;
        let ticks = (period / self.physics_dt).round();
        if ticks < 1.0 || (ticks * self.physics_dt - period).abs() > 1e-9 {
            return Err(SimError::BadConfig(
                "physics_dt must divide the vision period".into(),
            ));
        }
        Ok(())
    }

    pub fn ticks_per_frame(&self) -> u64 {
        ((1.0 / self.vision_rate) / self.physics_dt).round().max(1.0) as u64
    }

    pub fn vision_period(&self) -> f64 {
        1.0 / self.vision_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRobot {
    pub team: Team,
    pub id: u32,
    pub pose: Pose2,
    pub commanded: BodyVelocity,
    /// Wheel speeds after the velocity-loop lag.
    pub wheels: WheelSpeeds,
    /// Body velocity realised by `wheels`.
    pub tracked: BodyVelocity,
    /// Sim time at which `commanded` was last set.
    pub command_stamp: f64,
}

impl SimRobot {
    pub fn world_velocity(&self) -> Vec2 {
        self.pose.body_to_world(self.tracked.linear())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimBall {
    pub p: Vec2,
    pub v: Vec2,
}

/// Which goal the ball entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoalSide {
    /// The −x goal, defended by the team attacking +x.
    Negative,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub tick: u64,
    pub time: f64,
    pub robots: Vec<SimRobot>,
    pub ball: SimBall,
    /// First goal scored, if any. The ball stops once inside a goal.
    pub goal: Option<GoalSide>,
}

impl SimState {
    /// Both teams in their own halves, ball on the centre spot.
    pub fn kickoff(cfg: &SimConfig) -> Self {
        let f = &cfg.field;
        let n = cfg.n_robots_per_team;
        let mut robots = Vec::with_capacity(2 * n);
        for team in [Team::Yellow, Team::Blue] {
            let sign = if team == Team::Yellow { -1.0 } else { 1.0 };
            for i in 0..n {
                let column = (i / 3) as f64;
                let row = (i % 3) as f64 - 1.0;
                let x = sign * (f.half_length() * 0.25 + column * 0.6);
                let y = row * f.half_width() * 0.5;
                robots.push(SimRobot {
                    team,
                    id: i as u32,
                    pose: Pose2::new(
                        Vec2::new(x, y),
                        if team == Team::Yellow { 0.0 } else { std::f64::consts::PI },
                    ),
                    commanded: BodyVelocity::ZERO,
                    wheels: WheelSpeeds::default(),
                    tracked: BodyVelocity::ZERO,
                    command_stamp: 0.0,
                });
            }
        }
        SimState {
            tick: 0,
            time: 0.0,
            robots,
            ball: SimBall::default(),
            goal: None,
        }
    }

    /// An empty field with only the ball.
    pub fn empty() -> Self {
        SimState {
            tick: 0,
            time: 0.0,
            robots: Vec::new(),
            ball: SimBall::default(),
            goal: None,
        }
    }

    pub fn robot(&self, team: Team, id: u32) -> Option<&SimRobot> {
        self.robots.iter().find(|r| r.team == team && r.id == id)
    }

    pub fn robot_mut(&mut self, team: Team, id: u32) -> Option<&mut SimRobot> {
        self.robots.iter_mut().find(|r| r.team == team && r.id == id)
    }

    /// Add a robot at rest, replacing any robot with the same identity.
    pub fn place_robot(&mut self, team: Team, id: u32, pose: Pose2) {
        self.robots.retain(|r| !(r.team == team && r.id == id));
        self.robots.push(SimRobot {
            team,
            id,
            pose,
            commanded: BodyVelocity::ZERO,
            wheels: WheelSpeeds::default(),
            tracked: BodyVelocity::ZERO,
            command_stamp: self.time,
        });
    }
}

/// Store a clamped command for one robot and restart its timeout.
pub fn apply_command(
    state: &mut SimState,
    team: Team,
    id: u32,
    v: &BodyVelocity,
    cfg: &SimConfig,
) -> Result<(), SimError> {
    let now = state.time;
    let robot = state
        .robot_mut(team, id)
        .ok_or(SimError::UnknownRobot { team, id })?;
    robot.commanded = clamp_command(v, &cfg.limits);
    robot.command_stamp = now;
    Ok(())
}

/// Advance the world by one physics step of `cfg.physics_dt`.
pub fn step(state: &SimState, cfg: &SimConfig) -> SimState {
    let pinv = cfg
        .drive
        .pseudo_inverse()
        .expect("validated drive geometry has a pseudoinverse");
    let mut next = state.clone();
    step_in_place(&mut next, cfg, &pinv);
    next
}

fn step_in_place(s: &mut SimState, cfg: &SimConfig, pinv: &Matrix3x4<f64>) {
    let dt = cfg.physics_dt;
    let field = &cfg.field;
    let lag = 1.0 - (-dt / cfg.tracking_tau).exp();

    for r in &mut s.robots {
        if s.time - r.command_stamp > cfg.command_timeout {
            r.commanded = BodyVelocity::ZERO;
        }
        let target = inverse_kinematics(&r.commanded, &cfg.drive)
            .unwrap_or_default()
            .clamped(cfg.wheel_speed_max);
        for (w, t) in r.wheels.0.iter_mut().zip(target.0) {
            *w += (t - *w) * lag;
        }
        r.tracked = apply_pseudo_inverse(pinv, &r.wheels);
        let heading = r.pose.heading();
        let mid = heading + 0.5 * r.tracked.omega * dt;
        let dp = r.tracked.linear().rotated(mid) * dt;
        let hx = field.half_length() - ROBOT_RADIUS;
        let hy = field.half_width() - ROBOT_RADIUS;
        let p = r.pose.position + dp;
        r.pose = Pose2::new(
            Vec2::new(p.x.clamp(-hx, hx), p.y.clamp(-hy, hy)),
            heading + r.tracked.omega * dt,
        );
    }

    if s.goal.is_none() {
        roll_ball(&mut s.ball, cfg.ball_deceleration, dt);
        for r in &s.robots {
            push_ball(&mut s.ball, r);
        }
        s.goal = resolve_boundary(&mut s.ball, field);
    }

    s.tick += 1;
    s.time = s.tick as f64 * dt;
}

fn roll_ball(ball: &mut SimBall, decel: f64, dt: f64) {
    let speed = ball.v.norm();
    if speed == 0.0 {
        return;
    }
    let dir = ball.v / speed;
    if decel > 0.0 && speed <= decel * dt {
        ball.p += dir * (speed * speed / (2.0 * decel));
        ball.v = Vec2::ZERO;
    } else {
        let after = speed - decel * dt;
        ball.p += dir * (0.5 * (speed + after) * dt);
        ball.v = dir * after;
    }
}

fn push_ball(ball: &mut SimBall, r: &SimRobot) {
    let contact = ROBOT_RADIUS + BALL_RADIUS;
    let d = ball.p - r.pose.position;
    let dist = d.norm();
    if dist >= contact {
        return;
    }
    let n = if dist > 0.0 { d / dist } else { Vec2::from_angle(r.pose.heading()) };
    ball.p = r.pose.position + n * contact;
    let closing = r.world_velocity().dot(n) - ball.v.dot(n);
    if closing > 0.0 {
        ball.v += n * closing;
    }
}

fn resolve_boundary(ball: &mut SimBall, field: &FieldModel) -> Option<GoalSide> {
    let hx = field.half_length();
    let hy = field.half_width();
    if ball.p.x.abs() >= hx && ball.p.y.abs() <= field.goal_width / 2.0 {
        ball.v = Vec2::ZERO;
        return Some(if ball.p.x < 0.0 { GoalSide::Negative } else { GoalSide::Positive });
    }
    let lx = hx - BALL_RADIUS;
    let ly = hy - BALL_RADIUS;
    let in_mouth = ball.p.y.abs() <= field.goal_width / 2.0;
    if ball.p.x.abs() > lx && !in_mouth {
        ball.p.x = ball.p.x.clamp(-lx, lx);
        if ball.v.x * ball.p.x > 0.0 {
            ball.v.x = 0.0;
        }
    }
    if ball.p.y.abs() > ly {
        ball.p.y = ball.p.y.clamp(-ly, ly);
        if ball.v.y * ball.p.y > 0.0 {
            ball.v.y = 0.0;
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallDetection {
    pub p: Vec2,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotDetection {
    pub id: u32,
    pub pose: Pose2,
}

/// One camera snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisionFrame {
    pub frame_number: u64,
    pub t_capture: f64,
    pub balls: Vec<BallDetection>,
    pub robots_yellow: Vec<RobotDetection>,
    pub robots_blue: Vec<RobotDetection>,
}

impl VisionFrame {
    pub fn ball(&self) -> Option<Vec2> {
        self.balls.first().map(|b| b.p)
    }

    pub fn team(&self, team: Team) -> &[RobotDetection] {
        match team {
            Team::Yellow => &self.robots_yellow,
            Team::Blue => &self.robots_blue,
        }
    }
}

/// Snapshot of `state` as the camera would report it. Noise is drawn from a
/// generator keyed on (seed, frame number), so the frame depends only on its
/// inputs.
pub fn emit_vision(state: &SimState, cfg: &SimConfig) -> VisionFrame {
    let frame_number = state.tick / cfg.ticks_per_frame();
    let mut noise = VisionNoise::new(cfg, frame_number);
    let mut frame = VisionFrame {
        frame_number,
        t_capture: state.time,
        balls: vec![BallDetection {
            p: noise.apply(state.ball.p),
            confidence: 1.0,
        }],
        robots_yellow: Vec::new(),
        robots_blue: Vec::new(),
    };
    for r in &state.robots {
        let det = RobotDetection {
            id: r.id,
            pose: Pose2::new(noise.apply(r.pose.position), r.pose.heading()),
        };
        match r.team {
            Team::Yellow => frame.robots_yellow.push(det),
            Team::Blue => frame.robots_blue.push(det),
        }
    }
    frame
}

struct VisionNoise {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl VisionNoise {
    fn new(cfg: &SimConfig, frame_number: u64) -> Self {
        let key = cfg.rng_seed ^ frame_number.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let normal = (cfg.vision_noise_sigma > 0.0)
            .then(|| Normal::new(0.0, cfg.vision_noise_sigma).expect("finite sigma"));
        VisionNoise {
            rng: ChaCha8Rng::seed_from_u64(key),
            normal,
        }
    }

    fn apply(&mut self, p: Vec2) -> Vec2 {
        match &self.normal {
            Some(n) => Vec2::new(p.x + n.sample(&mut self.rng), p.y + n.sample(&mut self.rng)),
            None => p,
        }
    }
}

/// Owns a simulation and advances it one camera frame at a time.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    state: SimState,
    pinv: Matrix3x4<f64>,
}

impl Simulator {
    pub fn new(cfg: SimConfig, state: SimState) -> Result<Self, SimError> {
        cfg.validate()?;
        let pinv = cfg
            .drive
            .pseudo_inverse()
            .map_err(|e| SimError::BadConfig(e.to_string()))?;
        Ok(Simulator { cfg, state, pinv })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut SimState {
        &mut self.state
    }

    pub fn command(&mut self, team: Team, id: u32, v: &BodyVelocity) -> Result<(), SimError> {
        apply_command(&mut self.state, team, id, v, &self.cfg)
    }

    pub fn step(&mut self) {
        step_in_place(&mut self.state, &self.cfg, &self.pinv);
    }

    /// Step through one vision period and return the frame captured at its end.
    pub fn advance_frame(&mut self) -> VisionFrame {
        for _ in 0..self.cfg.ticks_per_frame() {
            self.step();
        }
        emit_vision(&self.state, &self.cfg)
    }

    pub fn vision(&self) -> VisionFrame {
        emit_vision(&self.state, &self.cfg)
    }
}
