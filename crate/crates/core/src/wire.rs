//! JSON wire formats. Every message carries `"v": 1`; a missing `v` is read as
//! version 1 and unknown fields are ignored.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::{Pose2, Vec2};
use crate::kinematics::BodyVelocity;
use crate::planner::{PlanOutcome, PlannerError};
use crate::sim::{BallDetection, RobotDetection, VisionFrame};
use crate::team::{RobotCommand, TeamSnapshot};

pub const VERSION: u32 = 1;
pub const DEFAULT_VISION_PORT: u16 = 10020;
pub const DEFAULT_COMMAND_PORT: u16 = 10021;
pub const DEFAULT_TELEMETRY_PORT: u16 = 8080;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed message: {0}")]
    Json(#[from] serde_json::Error),
}

/// The schema version marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct V1;

impl Serialize for V1 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(VERSION)
    }
}

impl<'de> Deserialize<'de> for V1 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u32::deserialize(d)?;
        if v == VERSION {
            Ok(V1)
        } else {
            Err(serde::de::Error::custom(format!("unsupported schema version {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirePoint {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireRobot {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireVision {
    #[serde(default)]
    pub v: V1,
    pub frame: u64,
    pub t: f64,
    #[serde(default)]
    pub ball: Option<WirePoint>,
    #[serde(default)]
    pub yellow: Vec<WireRobot>,
    #[serde(default)]
    pub blue: Vec<WireRobot>,
}

fn robots_to_wire(rs: &[RobotDetection]) -> Vec<WireRobot> {
    rs.iter()
        .map(|r| WireRobot {
            id: r.id,
            x: r.pose.position.x,
            y: r.pose.position.y,
            theta: r.pose.heading(),
        })
        .collect()
}

fn robots_from_wire(rs: &[WireRobot]) -> Vec<RobotDetection> {
    rs.iter()
        .map(|r| RobotDetection {
            id: r.id,
            pose: Pose2::new(Vec2::new(r.x, r.y), r.theta),
        })
        .collect()
}

impl From<&VisionFrame> for WireVision {
    fn from(f: &VisionFrame) -> Self {
        WireVision {
            v: V1,
            frame: f.frame_number,
            t: f.t_capture,
            ball: f.ball().map(|p| WirePoint { x: p.x, y: p.y }),
            yellow: robots_to_wire(&f.robots_yellow),
            blue: robots_to_wire(&f.robots_blue),
        }
    }
}

impl From<&WireVision> for VisionFrame {
    fn from(w: &WireVision) -> Self {
        VisionFrame {
            frame_number: w.frame,
            t_capture: w.t,
            balls: w
                .ball
                .iter()
                .map(|b| BallDetection {
                    p: Vec2::new(b.x, b.y),
                    confidence: 1.0,
                })
                .collect(),
            robots_yellow: robots_from_wire(&w.yellow),
            robots_blue: robots_from_wire(&w.blue),
        }
    }
}

pub fn encode_vision(f: &VisionFrame) -> String {
    serde_json::to_string(&WireVision::from(f)).expect("vision frames serialize")
}

pub fn decode_vision(s: &[u8]) -> Result<VisionFrame, WireError> {
    let w: WireVision = serde_json::from_slice(s)?;
    Ok(VisionFrame::from(&w))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireCommand {
    #[serde(default)]
    pub v: V1,
    pub id: u32,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
    pub seq: u64,
    pub t: f64,
}

impl From<&RobotCommand> for WireCommand {
    fn from(c: &RobotCommand) -> Self {
        WireCommand {
            v: V1,
            id: c.robot_id,
            vx: c.v.vx,
            vy: c.v.vy,
            omega: c.v.omega,
            seq: c.sequence,
            t: c.stamp,
        }
    }
}

impl From<&WireCommand> for RobotCommand {
    fn from(w: &WireCommand) -> Self {
        RobotCommand {
            robot_id: w.id,
            v: BodyVelocity::new(w.vx, w.vy, w.omega),
            stamp: w.t,
            sequence: w.seq,
        }
    }
}

pub fn encode_command(c: &RobotCommand) -> String {
    serde_json::to_string(&WireCommand::from(c)).expect("commands serialize")
}

pub fn decode_command(s: &[u8]) -> Result<RobotCommand, WireError> {
    let w: WireCommand = serde_json::from_slice(s)?;
    Ok(RobotCommand::from(&w))
}

/// Messages a console sends to the team server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Teleop {
        #[serde(default)]
        v: V1,
        id: u32,
        vx: f64,
        vy: f64,
        omega: f64,
    },
    Behaviour {
        #[serde(default)]
        v: V1,
        id: u32,
        name: String,
    },
    Formation {
        #[serde(default)]
        v: V1,
        name: String,
    },
}

pub fn decode_client(s: &str) -> Result<ClientMessage, WireError> {
    Ok(serde_json::from_str(s)?)
}

/// Messages the team server pushes to consoles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    Snapshot {
        #[serde(default)]
        v: V1,
        #[serde(flatten)]
        snapshot: Box<TeamSnapshot>,
    },
    Error {
        #[serde(default)]
        v: V1,
        message: String,
    },
}

impl ServerMessage {
    pub fn snapshot(s: TeamSnapshot) -> Self {
        ServerMessage::Snapshot {
            v: V1,
            snapshot: Box::new(s),
        }
    }

    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error {
            v: V1,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

/// Result of a one-shot planning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    #[serde(default)]
    pub v: V1,
    pub seed: u64,
    /// `"ok"` or `"unreachable"`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub nodes: Vec<Vec2>,
    pub edges: Vec<(usize, usize)>,
    pub path: Vec<usize>,
    pub waypoints: Vec<Vec2>,
}

impl PlanReport {
    pub fn from_outcome(seed: u64, start: Vec2, outcome: &PlanOutcome) -> Self {
        let (status, reason) = match &outcome.plan {
            Some(_) => ("ok", None),
            None => ("unreachable", Some("no path through the sampled roadmap".to_string())),
        };
        let waypoints = outcome.plan.as_ref().map_or_else(Vec::new, |p| {
            std::iter::once(start).chain(p.waypoints.iter().copied()).collect()
        });
        PlanReport {
            v: V1,
            seed,
            status: status.into(),
            reason,
            nodes: outcome.roadmap.nodes.clone(),
            edges: outcome.roadmap.edges().map(|(u, v, _)| (u, v)).collect(),
            path: outcome.path.clone().unwrap_or_default(),
            waypoints,
        }
    }

    /// A planner that refused to run (blocked endpoints, no free space).
    pub fn from_error(seed: u64, e: &PlannerError) -> Self {
        PlanReport {
            v: V1,
            seed,
            status: "unreachable".into(),
            reason: Some(e.to_string()),
            nodes: Vec::new(),
            edges: Vec::new(),
            path: Vec::new(),
            waypoints: Vec::new(),
        }
    }
}
