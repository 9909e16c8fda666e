use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Disc, FieldModel, Pose2, Vec2};
use crate::sim::{Team, VisionFrame};
use crate::trajectory::{fit, BallMotion, BallObservation, BallTrack};

/// Robots slower than this are not projected forward.
const MOVING_SPEED: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("stale frame {got} (latest {latest})")]
pub struct StaleFrame {
    pub got: u64,
    pub latest: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedRobot {
    pub team: Team,
    pub id: u32,
    pub pose: Pose2,
    /// Finite-difference velocity between the last two sightings.
    pub velocity: Vec2,
    pub last_seen: f64,
}

/// Everything the controller knows about the field, rebuilt from vision.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldModel {
    pub field: FieldModel,
    pub our_team: Team,
    pub latest_frame: Option<VisionFrame>,
    pub ball: Option<Vec2>,
    pub ball_track: BallTrack,
    pub ball_motion: Option<BallMotion>,
    pub ours: BTreeMap<u32, TrackedRobot>,
    pub theirs: BTreeMap<u32, TrackedRobot>,
    /// Per own robot: every other visible robot as a disc, plus a second disc
    /// where each moving robot will be `lookahead` seconds from now.
    pub obstacles: BTreeMap<u32, Vec<Disc>>,
    pub lookahead: f64,
    pub frames_ingested: u64,
    pub dropped_frames: u64,
}

impl WorldModel {
    pub fn new(field: FieldModel, our_team: Team, window: usize) -> Self {
        WorldModel {
            field,
            our_team,
            latest_frame: None,
            ball: None,
            ball_track: BallTrack::new(window),
            ball_motion: None,
            ours: BTreeMap::new(),
            theirs: BTreeMap::new(),
            obstacles: BTreeMap::new(),
            lookahead: 0.0,
            frames_ingested: 0,
            dropped_frames: 0,
        }
    }

    pub fn now(&self) -> Option<f64> {
        self.latest_frame.as_ref().map(|f| f.t_capture)
    }

    pub fn robot(&self, id: u32) -> Option<&TrackedRobot> {
        self.ours.get(&id)
    }

    /// Obstacles for `id`; every visible robot except `id` itself.
    pub fn obstacles_for(&self, id: u32) -> &[Disc] {
        self.obstacles.get(&id).map_or(&[], Vec::as_slice)
    }

    /// Fold a new frame into the model. Frames that do not advance the frame
    /// number are dropped and counted.
    pub fn ingest_frame(&mut self, f: VisionFrame) -> Result<(), StaleFrame> {
        if let Some(latest) = &self.latest_frame {
            if f.frame_number <= latest.frame_number {
                self.dropped_frames += 1;
                return Err(StaleFrame {
                    got: f.frame_number,
                    latest: latest.frame_number,
                });
            }
        }
        let t = f.t_capture;
        let their_team = match self.our_team {
            Team::Yellow => Team::Blue,
            Team::Blue => Team::Yellow,
        };
        self.ours = update_tracks(&self.ours, f.team(self.our_team), self.our_team, t);
        self.theirs = update_tracks(&self.theirs, f.team(their_team), their_team, t);

        self.ball = f.ball();
        if let Some(p) = self.ball {
            let obs = BallObservation { t, p };
            if self.ball_track.push(obs).is_err() {
                self.ball_track.clear();
                let _ = self.ball_track.push(obs);
            }
        }
        self.ball_motion = fit(&self.ball_track).ok().flatten();

        self.obstacles = self
            .ours
            .keys()
            .map(|&id| {
                let mut discs = Vec::new();
                for r in self.ours.values().filter(|r| r.id != id).chain(self.theirs.values()) {
                    discs.push(Disc::robot(r.pose.position));
                    if self.lookahead > 0.0 && r.velocity.norm() > MOVING_SPEED {
                        discs.push(Disc::robot(r.pose.position + r.velocity * self.lookahead));
                    }
                }
                (id, discs)
            })
            .collect();
        self.latest_frame = Some(f);
        self.frames_ingested += 1;
        Ok(())
    }
}

fn update_tracks(
    previous: &BTreeMap<u32, TrackedRobot>,
    seen: &[crate::sim::RobotDetection],
    team: Team,
    t: f64,
) -> BTreeMap<u32, TrackedRobot> {
    seen.iter()
        .map(|d| {
            let velocity = previous
                .get(&d.id)
                .filter(|p| t > p.last_seen)
                .map_or(Vec2::ZERO, |p| {
                    (d.pose.position - p.pose.position) / (t - p.last_seen)
                });
            (
                d.id,
                TrackedRobot {
                    team,
                    id: d.id,
                    pose: d.pose,
                    velocity,
                    last_seen: t,
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{BallDetection, RobotDetection};

    fn frame(n: u64, t: f64, ball: Vec2) -> VisionFrame {
        VisionFrame {
            frame_number: n,
            t_capture: t,
            balls: vec![BallDetection { p: ball, confidence: 1.0 }],
            robots_yellow: vec![
                RobotDetection { id: 0, pose: Pose2::new(Vec2::new(-1.0, 0.0), 0.0) },
                RobotDetection { id: 1, pose: Pose2::new(Vec2::new(-1.0, 1.0), 0.0) },
            ],
            robots_blue: vec![RobotDetection { id: 0, pose: Pose2::new(Vec2::new(1.0, 0.0), 0.0) }],
        }
    }

    #[test]
    fn first_frame_initialises_without_fit() {
        let mut wm = WorldModel::new(FieldModel::division_b(), Team::Yellow, 6);
        wm.ingest_frame(frame(1, 0.0, Vec2::ZERO)).unwrap();
        assert_eq!(wm.ball, Some(Vec2::ZERO));
        assert_eq!(wm.ball_track.len(), 1);
        assert!(wm.ball_motion.is_none());
        assert_eq!(wm.ours.len(), 2);
        assert_eq!(wm.theirs.len(), 1);
    }

    #[test]
    fn out_of_order_frame_dropped() {
        let mut wm = WorldModel::new(FieldModel::division_b(), Team::Yellow, 6);
        wm.ingest_frame(frame(5, 0.1, Vec2::ZERO)).unwrap();
        let before = wm.clone();
        let e = wm.ingest_frame(frame(4, 0.2, Vec2::new(1.0, 1.0))).unwrap_err();
        assert_eq!(e, StaleFrame { got: 4, latest: 5 });
        assert_eq!(wm.dropped_frames, 1);
        assert_eq!(wm.ball, before.ball);
        assert_eq!(wm.ball_track, before.ball_track);
        assert_eq!(wm.latest_frame, before.latest_frame);
    }

    #[test]
    fn obstacles_exclude_self() {
        let mut wm = WorldModel::new(FieldModel::division_b(), Team::Yellow, 6);
        wm.ingest_frame(frame(1, 0.0, Vec2::ZERO)).unwrap();
        for (&id, discs) in &wm.obstacles {
            let me = wm.ours[&id].pose.position;
            assert_eq!(discs.len(), 2);
            assert!(discs.iter().all(|d| d.center != me));
        }
    }

    #[test]
    fn moving_robots_projected_forward() {
        let mut wm = WorldModel::new(FieldModel::division_b(), Team::Yellow, 6);
        wm.lookahead = 0.5;
        wm.ingest_frame(frame(1, 0.0, Vec2::ZERO)).unwrap();
        let mut f = frame(2, 0.5, Vec2::ZERO);
        f.robots_yellow[1].pose = Pose2::new(Vec2::new(-0.5, 1.0), 0.0);
        wm.ingest_frame(f).unwrap();
        let centers: Vec<Vec2> = wm.obstacles_for(0).iter().map(|d| d.center).collect();
        assert_eq!(
            centers,
            vec![Vec2::new(-0.5, 1.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)]
        );
        assert_eq!(wm.obstacles_for(1).len(), 2);
    }

    #[test]
    fn linear_ball_fit_from_frames() {
        let mut wm = WorldModel::new(FieldModel::division_b(), Team::Yellow, 6);
        for n in 0..6u64 {
            let t = n as f64 / 60.0;
            wm.ingest_frame(frame(n + 1, t, Vec2::new(0.5 - 1.2 * t, 0.3 * t))).unwrap();
        }
        let m = wm.ball_motion.unwrap();
        assert!((m.v.x + 1.2).abs() < 1e-9 && (m.v.y - 0.3).abs() < 1e-9);
    }

    #[test]
    fn robot_velocity_by_finite_difference() {
        let mut wm = WorldModel::new(FieldModel::division_b(), Team::Yellow, 6);
        wm.ingest_frame(frame(1, 0.0, Vec2::ZERO)).unwrap();
        let mut f = frame(2, 0.5, Vec2::ZERO);
        f.robots_yellow[0].pose = Pose2::new(Vec2::new(-0.5, 0.0), 0.0);
        wm.ingest_frame(f).unwrap();
        assert_eq!(wm.ours[&0].velocity, Vec2::new(1.0, 0.0));
        assert_eq!(wm.ours[&1].velocity, Vec2::ZERO);
    }
}
