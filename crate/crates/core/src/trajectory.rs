//! Ball motion estimated by linear regression over the last few vision frames,
//! and its use by the goalkeeper.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FieldModel, Vec2};

pub const DEFAULT_WINDOW: usize = 6;
pub const DEFAULT_MIN_SPEED: f64 = 0.1;
/// Below this |vx| the ball is treated as moving parallel to the keeper line.
const PARALLEL_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("all observation timestamps are equal")]
    DegenerateTimestamps,
    #[error("observation at t={t} does not follow t={last}")]
    NonMonotonic { t: f64, last: f64 },
    #[error("non-finite observation")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallObservation {
    pub t: f64,
    pub p: Vec2,
}

/// Sliding window of the most recent observations, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallTrack {
    capacity: usize,
    window: VecDeque<BallObservation>,
}

impl Default for BallTrack {
    fn default() -> Self {
        BallTrack::new(DEFAULT_WINDOW)
    }
}

impl BallTrack {
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        BallTrack {
            capacity,
            window: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn latest(&self) -> Option<&BallObservation> {
        self.window.back()
    }

    pub fn observations(&self) -> impl Iterator<Item = &BallObservation> {
        self.window.iter()
    }

    pub fn clear(&mut self) {
        self.window.clear();
    }

    /// Append an observation, evicting the oldest when full. Timestamps must
    /// strictly increase.
    pub fn push(&mut self, obs: BallObservation) -> Result<(), TrajectoryError> {
        if !obs.t.is_finite() || !obs.p.is_finite() {
            return Err(TrajectoryError::NonFinite);
        }
        if let Some(last) = self.window.back() {
            if obs.t <= last.t {
                return Err(TrajectoryError::NonMonotonic { t: obs.t, last: last.t });
            }
        }
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(obs);
        Ok(())
    }
}

/// Constant-velocity ball motion anchored at `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallMotion {
    pub p0: Vec2,
    pub v: Vec2,
    pub t0: f64,
    pub speed: f64,
    pub rms_residual: f64,
}

impl BallMotion {
    pub fn position_at(&self, t: f64) -> Vec2 {
        self.p0 + self.v * (t - self.t0)
    }
}

pub fn fit(track: &BallTrack) -> Result<Option<BallMotion>, TrajectoryError> {
    let obs: Vec<BallObservation> = track.observations().copied().collect();
    fit_observations(&obs)
}

/// Ordinary least squares of x(t) and y(t), each fitted independently.
/// `t0` is the latest timestamp and `p0` the fitted position there.
pub fn fit_observations(obs: &[BallObservation]) -> Result<Option<BallMotion>, TrajectoryError> {
    if obs.len() < 2 {
        return Ok(None);
    }
    let n = obs.len() as f64;
    let t_mean = obs.iter().map(|o| o.t).sum::<f64>() / n;
    let p_mean = obs.iter().fold(Vec2::ZERO, |acc, o| acc + o.p) / n;
    let mut stt = 0.0;
    let mut stp = Vec2::ZERO;
    for o in obs {
        let dt = o.t - t_mean;
        stt += dt * dt;
        stp += (o.p - p_mean) * dt;
    }
    if stt == 0.0 {
        return Err(TrajectoryError::DegenerateTimestamps);
    }
    let v = stp / stt;
    let t0 = obs.iter().map(|o| o.t).fold(f64::NEG_INFINITY, f64::max);
    let p0 = p_mean + v * (t0 - t_mean);
    let sq: f64 = obs
        .iter()
        .map(|o| (o.p - (p0 + v * (o.t - t0))).norm_squared())
        .sum();
    Ok(Some(BallMotion {
        p0,
        v,
        t0,
        speed: v.norm(),
        rms_residual: (sq / n).sqrt(),
    }))
}

/// The vertical segment in front of the own goal along which the keeper moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalkeeperLine {
    pub x_line: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GoalkeeperLine {
    /// Keeper line for the own (−x) goal, spanning the goal mouth.
    pub fn for_field(field: &FieldModel) -> Self {
        GoalkeeperLine {
            x_line: -field.defense_line_x,
            y_min: -field.goal_width / 2.0,
            y_max: field.goal_width / 2.0,
        }
    }

    pub fn clamp_y(&self, y: f64) -> f64 {
        y.clamp(self.y_min, self.y_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCrossing {
    pub y: f64,
    pub t_hit: f64,
    pub in_segment: bool,
}

/// Where and when the predicted ball crosses the keeper line. `None` when the
/// ball moves parallel to it or away from it.
pub fn intersect_vertical_line(m: &BallMotion, line: &GoalkeeperLine) -> Option<LineCrossing> {
    if m.v.x.abs() <= PARALLEL_EPS {
        return None;
    }
    let dt = (line.x_line - m.p0.x) / m.v.x;
    if dt < 0.0 {
        return None;
    }
    let y = m.p0.y + m.v.y * dt;
    Some(LineCrossing {
        y,
        t_hit: m.t0 + dt,
        in_segment: (line.y_min..=line.y_max).contains(&y),
    })
}

/// The ball is fast enough and will cross the keeper line inside the goal mouth.
pub fn is_goal_bound(
    m: &BallMotion,
    line: &GoalkeeperLine,
    goal_half_width: f64,
    min_speed: f64,
) -> bool {
    if m.speed < min_speed {
        return false;
    }
    matches!(intersect_vertical_line(m, line), Some(c) if c.t_hit >= m.t0 && c.y.abs() <= goal_half_width)
}

/// Point on the keeper line to hold: the predicted crossing when the ball is
/// approaching, otherwise level with the ball. Always clamped to the line.
pub fn keeper_target(m: Option<&BallMotion>, ball_now: Vec2, line: &GoalkeeperLine) -> Vec2 {
    let y = m
        .and_then(|m| intersect_vertical_line(m, line))
        .map_or(ball_now.y, |c| c.y);
    Vec2::new(line.x_line, line.clamp_y(y))
}
