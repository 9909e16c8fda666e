use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::world::WorldModel;
use crate::formation::{assign_roles, home_position, Formation, Role};
use crate::geometry::Vec2;
use crate::trajectory::{keeper_target, BallMotion, GoalkeeperLine};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Behaviour {
    Idle,
    FollowBall,
    InterceptBall,
    Goalkeeper,
    /// Hold a formation home position. `None` takes whatever role the
    /// formation assigns to this robot.
    HoldFormation(Option<String>),
    Teleop,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown behaviour {0:?}")]
pub struct UnknownBehaviour(pub String);

impl FromStr for Behaviour {
    type Err = UnknownBehaviour;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "idle" => Behaviour::Idle,
            "follow" => Behaviour::FollowBall,
            "intercept" => Behaviour::InterceptBall,
            "goalkeeper" => Behaviour::Goalkeeper,
            "formation" => Behaviour::HoldFormation(None),
            "teleop" => Behaviour::Teleop,
            _ => match s.strip_prefix("formation:") {
                Some(role) if !role.is_empty() => Behaviour::HoldFormation(Some(role.to_string())),
                _ => return Err(UnknownBehaviour(s.to_string())),
            },
        })
    }
}

impl fmt::Display for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behaviour::Idle => f.write_str("idle"),
            Behaviour::FollowBall => f.write_str("follow"),
            Behaviour::InterceptBall => f.write_str("intercept"),
            Behaviour::Goalkeeper => f.write_str("goalkeeper"),
            Behaviour::HoldFormation(None) => f.write_str("formation"),
            Behaviour::HoldFormation(Some(role)) => write!(f, "formation:{role}"),
            Behaviour::Teleop => f.write_str("teleop"),
        }
    }
}

impl From<Behaviour> for String {
    fn from(b: Behaviour) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for Behaviour {
    type Error = UnknownBehaviour;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Formation roles as currently handed out to our robots.
#[derive(Debug, Clone)]
pub struct FormationContext<'f> {
    pub formation: &'f Formation,
    pub assignments: BTreeMap<u32, &'f Role>,
}

impl<'f> FormationContext<'f> {
    /// Roles for every robot the world model sees, in id order.
    pub fn for_world(formation: &'f Formation, wm: &WorldModel) -> Self {
        let ids: Vec<u32> = wm.ours.keys().copied().collect();
        FormationContext {
            formation,
            assignments: assign_roles(formation, &ids),
        }
    }

    pub fn role_for(&self, id: u32, requested: Option<&str>) -> Option<&'f Role> {
        match requested {
            Some(name) => self.formation.role(name),
            None => self.assignments.get(&id).copied(),
        }
    }
}

/// Earliest point on the ball's predicted path that a robot starting at `robot`
/// and travelling straight at `speed` can reach no later than the ball.
/// Returns the meeting time from `m.t0` and the point, or `None` if the robot
/// can never catch up.
pub fn intercept_point(m: &BallMotion, robot: Vec2, speed: f64) -> Option<(f64, Vec2)> {
    let d = m.p0 - robot;
    let a = m.v.norm_squared() - speed * speed;
    let b = 2.0 * d.dot(m.v);
    let c = d.norm_squared();
    if c == 0.0 {
        return Some((0.0, m.p0));
    }
    let s = if a.abs() < 1e-12 {
        // Equal speeds: the quadratic degenerates to b·s + c ≤ 0.
        if b >= 0.0 {
            return None;
        }
        -c / b
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let r1 = (-b - sq) / (2.0 * a);
        let r2 = (-b + sq) / (2.0 * a);
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        if a < 0.0 {
            // Feasible outside (lo, hi); c > 0 puts lo below zero.
            hi
        } else if lo >= 0.0 {
            lo
        } else {
            return None;
        }
    };
    (s >= 0.0 && s.is_finite()).then(|| (s, m.p0 + m.v * s))
}

/// Where `b` wants robot `id` to go. `None` for behaviours with no target and
/// when the inputs the behaviour needs (the robot, the ball, a role) are absent.
pub fn behaviour_target(
    b: &Behaviour,
    id: u32,
    wm: &WorldModel,
    formation: Option<&FormationContext<'_>>,
    robot_speed: f64,
    min_ball_speed: f64,
) -> Option<Vec2> {
    let me = wm.robot(id)?;
    let moving = wm.ball_motion.as_ref().filter(|m| m.speed >= min_ball_speed);
    match b {
        Behaviour::Idle | Behaviour::Teleop => None,
        Behaviour::FollowBall => wm.ball,
        Behaviour::InterceptBall => {
            let ball = wm.ball?;
            Some(
                moving
                    .and_then(|m| intercept_point(m, me.pose.position, robot_speed))
                    .map_or(ball, |(_, p)| p),
            )
        }
        Behaviour::Goalkeeper => {
            let ball = wm.ball.unwrap_or(Vec2::ZERO);
            Some(keeper_target(moving, ball, &GoalkeeperLine::for_field(&wm.field)))
        }
        Behaviour::HoldFormation(requested) => {
            let role = formation?.role_for(id, requested.as_deref())?;
            Some(home_position(role, wm.ball.unwrap_or(Vec2::ZERO), &wm.field))
        }
    }
}
