mod common;

use common::{corridor_world, grid_reachable, CORRIDOR_WALL};
use omnissl::formation::parse_formation_file;
use omnissl::geometry::ROBOT_RADIUS;
use omnissl::sim::{SimConfig, SimState};
use omnissl::team::{Behaviour, ControlParams, TeamController};
use omnissl::{BodyVelocity, FieldModel, Pose2, Simulator, Team, Vec2};

struct Outcome {
    reached: bool,
    min_gap: f64,
}

/// Robot 0 starts left of a static wall of blue robots and holds a formation
/// spot on the far side.
fn corridor_run(seed: u64) -> Option<Outcome> {
    let field = FieldModel::division_b();
    let control = ControlParams::default();
    let (wall, start, target) = corridor_world(seed, CORRIDOR_WALL);
    if !grid_reachable(&field, &wall, control.planner.clearance, start, target) {
        return None;
    }
    let cfg = SimConfig {
        rng_seed: seed,
        ..SimConfig::default()
    };
    let mut state = SimState::empty();
    state.ball.p = Vec2::new(3.5, 2.5);
    state.place_robot(Team::Yellow, 0, Pose2::new(start, 0.0));
    for (i, d) in wall.iter().enumerate() {
        state.place_robot(Team::Blue, i as u32, Pose2::new(d.center, 0.0));
    }
    let mut sim = Simulator::new(cfg, state).unwrap();
    let spot = format!(
        "formation spot\nrole here anchor {} {} weight 0 0\n",
        target.x, target.y
    );
    let mut ctl = TeamController::new(field, Team::Yellow, control, seed)
        .with_formations(parse_formation_file(&spot).unwrap());
    ctl.set_behaviour(0, Behaviour::HoldFormation(Some("here".into())));

    let mut min_gap = f64::INFINITY;
    for _ in 0..(15.0 * cfg.vision_rate) as usize {
        ctl.ingest(sim.advance_frame()).unwrap();
        for c in ctl.tick() {
            sim.command(Team::Yellow, c.robot_id, &c.v).unwrap();
        }
        let me = sim.state().robot(Team::Yellow, 0).unwrap().pose.position;
        for d in &wall {
            min_gap = min_gap.min(me.distance(d.center) - 2.0 * ROBOT_RADIUS);
        }
        if me.distance(target) < 0.1 {
            return Some(Outcome {
                reached: true,
                min_gap,
            });
        }
    }
    Some(Outcome {
        reached: false,
        min_gap,
    })
}

#[test]
fn reaches_target_through_static_corridors() {
    let runs: Vec<Outcome> = (0..100).filter_map(corridor_run).collect();
    assert_eq!(runs.len(), 100);
    let reached = runs.iter().filter(|o| o.reached).count();
    let min_gap = runs.iter().map(|o| o.min_gap).fold(f64::INFINITY, f64::min);
    assert!(reached >= 95, "reached {reached}/100");
    assert!(min_gap > 0.0, "contact: {min_gap}");
}

#[test]
fn teleop_moves_sim_robot_forward_every_tick() {
    let cfg = SimConfig::default();
    let mut state = SimState::empty();
    state.place_robot(Team::Yellow, 2, Pose2::new(Vec2::new(-1.0, 0.0), 0.0));
    let mut sim = Simulator::new(cfg, state).unwrap();
    let mut ctl = TeamController::new(cfg.field, Team::Yellow, ControlParams::default(), 0);
    ctl.ingest(sim.advance_frame()).unwrap();
    ctl.set_teleop(2, BodyVelocity::new(1.0, 0.0, 0.0));
    let mut xs = Vec::new();
    for _ in 0..30 {
        for c in ctl.tick() {
            sim.command(Team::Yellow, c.robot_id, &c.v).unwrap();
        }
        ctl.set_teleop(2, BodyVelocity::new(1.0, 0.0, 0.0));
        ctl.ingest(sim.advance_frame()).unwrap();
        xs.push(sim.state().robot(Team::Yellow, 2).unwrap().pose.position.x);
    }
    assert!(xs[1] > xs[0], "no movement within two ticks: {xs:?}");
    assert!(xs.windows(2).all(|w| w[1] > w[0]), "{xs:?}");
}

#[test]
fn closed_loop_replays_bit_exactly() {
    let run = || {
        let cfg = SimConfig {
            rng_seed: 11,
            vision_noise_sigma: 0.002,
            ..SimConfig::default()
        };
        let mut sim = Simulator::new(cfg, SimState::kickoff(&cfg)).unwrap();
        sim.state_mut().ball.v = Vec2::new(-1.2, 0.4);
        let mut ctl = TeamController::new(cfg.field, Team::Yellow, ControlParams::default(), 5);
        ctl.set_default_behaviour(Behaviour::HoldFormation(None));
        ctl.set_behaviour(1, Behaviour::InterceptBall);
        let mut commands = Vec::new();
        for _ in 0..240 {
            ctl.ingest(sim.advance_frame()).unwrap();
            for c in ctl.tick() {
                sim.command(Team::Yellow, c.robot_id, &c.v).unwrap();
                commands.push(c);
            }
        }
        (sim.state().clone(), commands, ctl.snapshot())
    };
    assert_eq!(run(), run());
}
