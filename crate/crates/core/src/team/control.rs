use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, point_disc_distance, Disc, Pose2, Vec2};
use crate::kinematics::{clamp_command, BodyVelocity, VelocityLimits};
use crate::planner::{point_clear, PlannerParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    /// Translational gain, 1/s.
    pub kp: f64,
    /// Heading gain, 1/s.
    pub kp_theta: f64,
    /// No translation once this close to the target.
    pub deadband: f64,
    pub limits: VelocityLimits,
    pub planner: PlannerParams,
    /// Within this distance of its target a robot turns to face the ball.
    pub face_ball_radius: f64,
    /// Ball fits slower than this are treated as a resting ball.
    pub min_ball_speed: f64,
    /// Ticks that may run on the previous frame before commands go to zero.
    pub max_reused_ticks: u32,
    /// Teleop input older than this (seconds of vision time) is ignored.
    pub teleop_timeout: f64,
    /// Moving robots also block the spot they will reach this far ahead, s.
    pub obstacle_lookahead: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        ControlParams {
            kp: 2.0,
            kp_theta: 4.0,
            deadband: 0.02,
            limits: VelocityLimits::default(),
            planner: PlannerParams::default(),
            face_ball_radius: 1.0,
            min_ball_speed: crate::trajectory::DEFAULT_MIN_SPEED,
            max_reused_ticks: 1,
            teleop_timeout: 0.5,
            obstacle_lookahead: 0.3,
        }
    }
}

/// Proportional steering toward `waypoint`. The speed is `kp` times the path
/// length still to go, `beyond` being the part after `waypoint`, so a robot
/// only slows down near the end of its path. Translation stops inside the
/// deadband around `target`; the heading faces `face` when given, otherwise the
/// direction of travel.
pub fn steer(
    pose: &Pose2,
    waypoint: Vec2,
    beyond: f64,
    target: Vec2,
    face: Option<Vec2>,
    params: &ControlParams,
) -> BodyVelocity {
    let pos = pose.position;
    let to_waypoint = waypoint - pos;
    let v_world = if pos.distance(target) <= params.deadband {
        Vec2::ZERO
    } else {
        let d = to_waypoint.norm();
        if d > 0.0 {
            to_waypoint * (params.kp * (d + beyond.max(0.0)) / d)
        } else {
            Vec2::ZERO
        }
    };
    let desired = match face {
        Some(f) if f.distance(pos) > 1e-9 => Some((f - pos).angle()),
        _ if v_world.norm() > 0.0 => Some(v_world.angle()),
        _ => None,
    };
    let omega = desired.map_or(0.0, |h| params.kp_theta * normalize_angle(h - pose.heading()));
    let body = pose.world_to_body(v_world);
    clamp_command(&BodyVelocity::new(body.x, body.y, omega), &params.limits)
}

/// Move `target` out of any inflated obstacle it sits in, radially away from
/// that obstacle's centre. Gives up after a few rounds and returns the last
/// candidate.
pub fn free_target(target: Vec2, obstacles: &[Disc], clearance: f64) -> Vec2 {
    let mut t = target;
    for _ in 0..4 {
        let Some(d) = obstacles
            .iter()
            .find(|d| point_disc_distance(t, &d.inflated(clearance)) <= 0.0)
        else {
            return t;
        };
        let away = (t - d.center).normalized();
        let dir = if away.norm() > 0.0 { away } else { Vec2::new(-1.0, 0.0) };
        t = d.center + dir * (d.radius() + clearance + 0.01);
    }
    t
}

/// A point just outside the nearest inflated obstacle when `pos` is inside
/// one, so a robot that has been pushed too close can back away.
pub fn escape_waypoint(pos: Vec2, obstacles: &[Disc], clearance: f64) -> Option<Vec2> {
    if point_clear(pos, obstacles, clearance) {
        return None;
    }
    let nearest = obstacles
        .iter()
        .min_by(|a, b| point_disc_distance(pos, a).total_cmp(&point_disc_distance(pos, b)))?;
    let away = (pos - nearest.center).normalized();
    let dir = if away.norm() > 0.0 { away } else { Vec2::new(-1.0, 0.0) };
    Some(nearest.center + dir * (nearest.radius() + clearance + 0.05))
}

/// Per-robot planner seed for one tick.
pub fn planner_seed(seed: u64, id: u32, tick: u64) -> u64 {
    let mut z = seed
        ^ (u64::from(id)).wrapping_mul(0xD1B5_4A32_D192_ED03)
        ^ tick.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturated_toward_target() {
        let pose = Pose2::new(Vec2::ZERO, 0.0);
        let t = Vec2::new(2.0, 0.0);
        let v = steer(&pose, t, 0.0, t, None, &ControlParams::default());
        assert_eq!(v, BodyVelocity::new(2.0, 0.0, 0.0));
    }

    #[test]
    fn deadband_stops_translation() {
        let pose = Pose2::new(Vec2::new(1.0, 1.0), 0.3);
        let t = Vec2::new(1.01, 1.0);
        let v = steer(&pose, t, 0.0, t, None, &ControlParams::default());
        assert_eq!((v.vx, v.vy, v.omega), (0.0, 0.0, 0.0));
    }

    #[test]
    fn body_frame_command_points_at_waypoint() {
        let pose = Pose2::new(Vec2::new(0.5, -0.5), 2.0);
        let w = Vec2::new(0.6, -0.3);
        let v = steer(&pose, w, 2.0, Vec2::new(3.0, 0.0), None, &ControlParams::default());
        let world = pose.body_to_world(Vec2::new(v.vx, v.vy));
        let expected = (w - pose.position).normalized();
        assert!(world.normalized().distance(expected) < 1e-12);
    }

    #[test]
    fn speed_follows_remaining_path() {
        let pose = Pose2::new(Vec2::ZERO, 0.0);
        let params = ControlParams::default();
        let near = steer(&pose, Vec2::new(0.1, 0.0), 0.0, Vec2::new(0.1, 0.0), None, &params);
        assert!((near.vx - 0.2).abs() < 1e-12);
        let via = steer(&pose, Vec2::new(0.1, 0.0), 1.0, Vec2::new(0.5, 1.0), None, &params);
        assert!((via.vx - 2.0).abs() < 1e-12 && via.vy.abs() < 1e-12);
    }

    #[test]
    fn faces_ball_when_asked() {
        let pose = Pose2::new(Vec2::ZERO, 0.0);
        let v = steer(&pose, Vec2::ZERO, 0.0, Vec2::ZERO, Some(Vec2::new(0.0, 1.0)), &ControlParams::default());
        assert!((v.omega - 6.0).abs() < 1e-12);
    }

    #[test]
    fn free_target_leaves_inflated_disc() {
        let obs = [Disc::robot(Vec2::ZERO)];
        let c = 0.11;
        let t = free_target(Vec2::new(0.05, 0.0), &obs, c);
        assert!(point_clear(t, &obs, c));
        assert!((t.y).abs() < 1e-12 && t.x > 0.0);
        assert_eq!(free_target(Vec2::new(1.0, 0.0), &obs, c), Vec2::new(1.0, 0.0));
    }

    #[test]
    fn escape_only_when_inside() {
        let obs = [Disc::robot(Vec2::ZERO)];
        assert_eq!(escape_waypoint(Vec2::new(1.0, 0.0), &obs, 0.11), None);
        let w = escape_waypoint(Vec2::new(0.0, 0.15), &obs, 0.11).unwrap();
        assert!(w.y > 0.2 && point_clear(w, &obs, 0.11));
    }

    #[test]
    fn seeds_differ_per_robot_and_tick() {
        let a = planner_seed(1, 0, 0);
        assert_ne!(a, planner_seed(1, 1, 0));
        assert_ne!(a, planner_seed(1, 0, 1));
        assert_eq!(a, planner_seed(1, 0, 0));
    }
}
