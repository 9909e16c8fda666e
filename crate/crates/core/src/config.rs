//! Stack configuration.
//!
//! One flat namespace of dotted keys. Values are layered: built-in defaults,
//! then a `key = value` file, then `OMNISSL_*` environment variables, then
//! command-line flags. Every layer goes through [`StackConfig::set`].
//!
//! Environment names map to keys by lowercasing and turning the first `_`
//! after the prefix into a dot: `OMNISSL_PLANNER_SAMPLES` sets
//! `planner.samples`, `OMNISSL_CONTROL_KP_THETA` sets `control.kp_theta`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::formation::{parse_formation_file, FormationLibrary};
use crate::geometry::FieldModel;
use crate::kinematics::DriveGeometry;
use crate::sim::{SimConfig, Team};
use crate::team::{Behaviour, ControlParams};
use crate::wire::{DEFAULT_COMMAND_PORT, DEFAULT_TELEMETRY_PORT, DEFAULT_VISION_PORT};

pub const ENV_PREFIX: &str = "OMNISSL_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{path}:{line}: {reason}")]
    File {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("environment variable {var}: {source}")]
    Env {
        var: String,
        #[source]
        source: Box<ConfigError>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackConfig {
    pub field: FieldModel,
    pub drive: DriveGeometry,
    pub control: ControlParams,
    pub sim: SimConfig,
    pub team: Team,
    pub host: String,
    pub vision_port: u16,
    pub command_port: u16,
    pub telemetry_port: u16,
    pub sim_seed: u64,
    pub planner_seed: u64,
    pub formation_file: Option<PathBuf>,
    pub formation_active: Option<String>,
    pub default_behaviour: Behaviour,
    pub behaviours: BTreeMap<u32, Behaviour>,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig {
            field: FieldModel::division_b(),
            drive: DriveGeometry::default(),
            control: ControlParams::default(),
            sim: SimConfig::default(),
            team: Team::Yellow,
            host: "127.0.0.1".into(),
            vision_port: DEFAULT_VISION_PORT,
            command_port: DEFAULT_COMMAND_PORT,
            telemetry_port: DEFAULT_TELEMETRY_PORT,
            sim_seed: 0,
            planner_seed: 0,
            formation_file: None,
            formation_active: None,
            default_behaviour: Behaviour::Idle,
            behaviours: BTreeMap::new(),
        }
    }
}

/// Every fixed key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("field.preset", "divb (9 x 6 m) or practice (5 x 2.75 m); resets all field.* values"),
    ("field.length", "field extent along x, m"),
    ("field.width", "field extent along y, m"),
    ("field.goal_width", "goal mouth width, m"),
    ("field.defense_line_x", "|x| of the goalkeeper line, m"),
    ("field.boundary_margin", "strip along the boundary without milestones, m"),
    ("drive.wheel_radius", "wheel radius, m"),
    ("drive.wheel_offset", "centre-to-wheel distance, m"),
    ("drive.wheel_angles", "four wheel directions in degrees, comma separated"),
    ("planner.samples", "milestones per plan"),
    ("planner.k", "nearest neighbours linked per node"),
    ("planner.clearance", "margin added to every obstacle radius, m"),
    ("planner.max_resample_attempts", "draws per milestone before giving up"),
    ("planner.capture_radius", "distance at which a waypoint counts as reached, m"),
    ("planner.retarget_tolerance", "target drift that invalidates a plan, m"),
    ("control.kp", "translational gain, 1/s"),
    ("control.kp_theta", "heading gain, 1/s"),
    ("control.deadband", "position deadband, m"),
    ("control.v_max", "translational speed limit, m/s"),
    ("control.omega_max", "spin rate limit, rad/s"),
    ("control.face_ball_radius", "face the ball when this close to the target, m"),
    ("control.min_ball_speed", "slower ball fits count as resting, m/s"),
    ("control.max_reused_ticks", "ticks allowed on an old frame before failsafe"),
    ("control.teleop_timeout", "teleop input lifetime, s"),
    ("sim.robots_per_team", "robots per team at kickoff"),
    ("sim.vision_rate", "camera rate, Hz"),
    ("sim.physics_rate", "physics rate, Hz (a multiple of the camera rate)"),
    ("sim.ball_deceleration", "ball rolling friction, m/s^2"),
    ("sim.noise", "vision noise standard deviation, m"),
    ("sim.tracking_tau", "wheel velocity-loop time constant, s"),
    ("sim.command_timeout", "commands older than this decay to zero, s"),
    ("sim.wheel_speed_max", "wheel speed limit, rad/s"),
    ("team.color", "our team: yellow or blue"),
    ("net.host", "address vision and command sockets use"),
    ("net.vision_port", "UDP vision port"),
    ("net.command_port", "UDP command port"),
    ("net.telemetry_port", "WebSocket telemetry/teleop port"),
    ("seed.sim", "simulator seed"),
    ("seed.planner", "planner seed"),
    ("formation.file", "formation file; empty for the built-in set"),
    ("formation.active", "formation to start with; empty for the first in the file"),
    ("behaviour.default", "behaviour for robots without an assignment"),
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn bad(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

impl StackConfig {
    /// Set one key from its text form. Per-robot behaviours use
    /// `behaviour.<id>`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "field.preset" => {
                self.field = match v.to_ascii_lowercase().as_str() {
                    "divb" | "division_b" => FieldModel::division_b(),
                    "practice" => FieldModel::practice(),
                    _ => return Err(bad(key, v, "expected divb or practice")),
                }
            }
            "field.length" => self.field.length = parse(key, v)?,
            "field.width" => self.field.width = parse(key, v)?,
            "field.goal_width" => self.field.goal_width = parse(key, v)?,
            "field.defense_line_x" => self.field.defense_line_x = parse(key, v)?,
            "field.boundary_margin" => self.field.boundary_margin = parse(key, v)?,
            "drive.wheel_radius" => self.drive.wheel_radius = parse(key, v)?,
            "drive.wheel_offset" => self.drive.wheel_offset = parse(key, v)?,
            "drive.wheel_angles" => {
                let parts = v
                    .split(',')
                    .map(|s| parse::<f64>(key, s))
                    .collect::<Result<Vec<_>, _>>()?;
                let deg: [f64; 4] = parts
                    .try_into()
                    .map_err(|_| bad(key, v, "expected four angles"))?;
                self.drive.wheel_angles = deg.map(f64::to_radians);
            }
            "planner.samples" => self.control.planner.n_samples = parse(key, v)?,
            "planner.k" => self.control.planner.k_neighbors = parse(key, v)?,
            "planner.clearance" => self.control.planner.clearance = parse(key, v)?,
            "planner.max_resample_attempts" => {
                self.control.planner.max_resample_attempts = parse(key, v)?
            }
            "planner.capture_radius" => self.control.planner.waypoint_capture_radius = parse(key, v)?,
            "planner.retarget_tolerance" => self.control.planner.retarget_tolerance = parse(key, v)?,
            "control.kp" => self.control.kp = parse(key, v)?,
            "control.kp_theta" => self.control.kp_theta = parse(key, v)?,
            "control.deadband" => self.control.deadband = parse(key, v)?,
            "control.v_max" => self.control.limits.v_max = parse(key, v)?,
            "control.omega_max" => self.control.limits.omega_max = parse(key, v)?,
            "control.face_ball_radius" => self.control.face_ball_radius = parse(key, v)?,
            "control.min_ball_speed" => self.control.min_ball_speed = parse(key, v)?,
            "control.max_reused_ticks" => self.control.max_reused_ticks = parse(key, v)?,
            "control.teleop_timeout" => self.control.teleop_timeout = parse(key, v)?,
            "sim.robots_per_team" => self.sim.n_robots_per_team = parse(key, v)?,
            "sim.vision_rate" => self.sim.vision_rate = parse(key, v)?,
            "sim.physics_rate" => {
                let hz: f64 = parse(key, v)?;
                if !(hz > 0.0) {
                    return Err(bad(key, v, "must be positive"));
                }
                self.sim.physics_dt = 1.0 / hz;
            }
            "sim.ball_deceleration" => self.sim.ball_deceleration = parse(key, v)?,
            "sim.noise" => self.sim.vision_noise_sigma = parse(key, v)?,
            "sim.tracking_tau" => self.sim.tracking_tau = parse(key, v)?,
            "sim.command_timeout" => self.sim.command_timeout = parse(key, v)?,
            "sim.wheel_speed_max" => self.sim.wheel_speed_max = parse(key, v)?,
            "team.color" => {
                self.team = match v.to_ascii_lowercase().as_str() {
                    "yellow" => Team::Yellow,
                    "blue" => Team::Blue,
                    _ => return Err(bad(key, v, "expected yellow or blue")),
                }
            }
            "net.host" => {
                if v.is_empty() {
                    return Err(bad(key, v, "empty host"));
                }
                self.host = v.into()
            }
            "net.vision_port" => self.vision_port = parse(key, v)?,
            "net.command_port" => self.command_port = parse(key, v)?,
            "net.telemetry_port" => self.telemetry_port = parse(key, v)?,
            "seed.sim" => self.sim_seed = parse(key, v)?,
            "seed.planner" => self.planner_seed = parse(key, v)?,
            "formation.file" => self.formation_file = (!v.is_empty()).then(|| PathBuf::from(v)),
            "formation.active" => self.formation_active = (!v.is_empty()).then(|| v.to_string()),
            "behaviour.default" => {
                self.default_behaviour = v.parse().map_err(|e: crate::team::UnknownBehaviour| {
                    bad(key, v, &e.to_string())
                })?
            }
            _ => match key.strip_prefix("behaviour.") {
                Some(id) => {
                    let id: u32 = parse(key, id)?;
                    let b = v
                        .parse()
                        .map_err(|e: crate::team::UnknownBehaviour| bad(key, v, &e.to_string()))?;
                    self.behaviours.insert(id, b);
                }
                None => return Err(ConfigError::UnknownKey(key.into())),
            },
        }
        Ok(())
    }

    /// Text form of a fixed key's current value.
    pub fn get(&self, key: &str) -> Option<String> {
        let deg = |a: f64| {
            let d = a.to_degrees();
            if (d - d.round()).abs() < 1e-9 {
                format!("{}", d.round())
            } else {
                format!("{d}")
            }
        };
        Some(match key {
            "field.preset" => {
                if self.field == FieldModel::division_b() {
                    "divb".into()
                } else if self.field == FieldModel::practice() {
                    "practice".into()
                } else {
                    "custom".into()
                }
            }
            "field.length" => self.field.length.to_string(),
            "field.width" => self.field.width.to_string(),
            "field.goal_width" => self.field.goal_width.to_string(),
            "field.defense_line_x" => self.field.defense_line_x.to_string(),
            "field.boundary_margin" => self.field.boundary_margin.to_string(),
            "drive.wheel_radius" => self.drive.wheel_radius.to_string(),
            "drive.wheel_offset" => self.drive.wheel_offset.to_string(),
            "drive.wheel_angles" => self.drive.wheel_angles.map(deg).join(","),
            "planner.samples" => self.control.planner.n_samples.to_string(),
            "planner.k" => self.control.planner.k_neighbors.to_string(),
            "planner.clearance" => self.control.planner.clearance.to_string(),
            "planner.max_resample_attempts" => self.control.planner.max_resample_attempts.to_string(),
            "planner.capture_radius" => self.control.planner.waypoint_capture_radius.to_string(),
            "planner.retarget_tolerance" => self.control.planner.retarget_tolerance.to_string(),
            "control.kp" => self.control.kp.to_string(),
            "control.kp_theta" => self.control.kp_theta.to_string(),
            "control.deadband" => self.control.deadband.to_string(),
            "control.v_max" => self.control.limits.v_max.to_string(),
            "control.omega_max" => self.control.limits.omega_max.to_string(),
            "control.face_ball_radius" => self.control.face_ball_radius.to_string(),
            "control.min_ball_speed" => self.control.min_ball_speed.to_string(),
            "control.max_reused_ticks" => self.control.max_reused_ticks.to_string(),
            "control.teleop_timeout" => self.control.teleop_timeout.to_string(),
            "sim.robots_per_team" => self.sim.n_robots_per_team.to_string(),
            "sim.vision_rate" => self.sim.vision_rate.to_string(),
            "sim.physics_rate" => (1.0 / self.sim.physics_dt).round().to_string(),
            "sim.ball_deceleration" => self.sim.ball_deceleration.to_string(),
            "sim.noise" => self.sim.vision_noise_sigma.to_string(),
            "sim.tracking_tau" => self.sim.tracking_tau.to_string(),
            "sim.command_timeout" => self.sim.command_timeout.to_string(),
            "sim.wheel_speed_max" => self.sim.wheel_speed_max.to_string(),
            "team.color" => match self.team {
                Team::Yellow => "yellow".into(),
                Team::Blue => "blue".into(),
            },
            "net.host" => self.host.clone(),
            "net.vision_port" => self.vision_port.to_string(),
            "net.command_port" => self.command_port.to_string(),
            "net.telemetry_port" => self.telemetry_port.to_string(),
            "seed.sim" => self.sim_seed.to_string(),
            "seed.planner" => self.planner_seed.to_string(),
            "formation.file" => self
                .formation_file
                .as_ref()
                .map_or_else(String::new, |p| p.display().to_string()),
            "formation.active" => self.formation_active.clone().unwrap_or_default(),
            "behaviour.default" => self.default_behaviour.to_string(),
            _ => {
                let id: u32 = key.strip_prefix("behaviour.")?.parse().ok()?;
                self.behaviours.get(&id)?.to_string()
            }
        })
    }

    /// Apply `key = value` lines. `#` starts a comment; blank lines are skipped.
    pub fn apply_str(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let file_err = |reason: String| ConfigError::File {
                path: origin.into(),
                line: i + 1,
                reason,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| file_err("expected key = value".into()))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| file_err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_str(&text, &path.display().to_string())
    }

    /// Apply every `OMNISSL_*` variable in `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut relevant: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                let rest = k.as_ref().strip_prefix(ENV_PREFIX)?;
                Some((rest.to_string(), v.as_ref().to_string()))
            })
            .collect();
        relevant.sort();
        for (rest, value) in relevant {
            let var = format!("{ENV_PREFIX}{rest}");
            let lower = rest.to_ascii_lowercase();
            let key = match lower.split_once('_') {
                Some((section, name)) => format!("{section}.{name}"),
                None => lower,
            };
            self.set(&key, &value).map_err(|e| ConfigError::Env {
                var,
                source: Box::new(e),
            })?;
        }
        Ok(())
    }

    /// Every fixed key and its value, in file syntax.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (key, doc) in KEYS {
            out.push_str(&format!("# {doc}\n{key} = {}\n", self.get(key).unwrap_or_default()));
        }
        for (id, b) in &self.behaviours {
            out.push_str(&format!("behaviour.{id} = {b}\n"));
        }
        out
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            field: self.field,
            drive: self.drive,
            limits: self.control.limits,
            rng_seed: self.sim_seed,
            controlled_team: self.team,
            ..self.sim
        }
    }

    pub fn control_params(&self) -> ControlParams {
        self.control
    }

    /// The configured formation file, or the built-in set, with the requested
    /// formation active.
    pub fn formations(&self) -> Result<FormationLibrary, ConfigError> {
        let mut lib = match &self.formation_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                parse_formation_file(&text).map_err(|e| ConfigError::File {
                    path: path.display().to_string(),
                    line: e.line,
                    reason: e.reason,
                })?
            }
            None => FormationLibrary::builtin(),
        };
        if let Some(name) = &self.formation_active {
            if !lib.set_active(name) {
                return Err(ConfigError::Invalid(format!("no formation named {name:?}")));
            }
        }
        Ok(lib)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.sim_config().validate().map_err(|e| invalid(&e))?;
        self.control.planner.validate().map_err(|e| invalid(&e))?;
        let gains = [
            ("control.kp", self.control.kp),
            ("control.kp_theta", self.control.kp_theta),
        ];
        for (k, g) in gains {
            if !(g > 0.0 && g.is_finite()) {
                return Err(ConfigError::Invalid(format!("{k} must be positive")));
            }
        }
        if !(self.control.deadband >= 0.0) {
            return Err(ConfigError::Invalid("control.deadband must be non-negative".into()));
        }
        Ok(())
    }
}
