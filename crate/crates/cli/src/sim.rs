use std::io::ErrorKind;
use std::net::UdpSocket;
use std::sync::atomic::Ordering;
use std::time::{Duration, Instant};

use anyhow::Context;
use omnissl::config::StackConfig;
use omnissl::sim::{GoalSide, SimState};
use omnissl::wire::{decode_command, encode_vision};
use omnissl::{Simulator, Team};
use serde::Serialize;

use crate::args::{Cli, SimArgs};
use crate::{print_json, shutdown_flag, Outcome};

#[derive(Debug, Serialize)]
struct RobotSummary {
    team: Team,
    id: u32,
    x: f64,
    y: f64,
    theta: f64,
}

#[derive(Debug, Serialize)]
struct SimSummary {
    seed: u64,
    frames: u64,
    ticks: u64,
    time: f64,
    commands_applied: u64,
    commands_rejected: u64,
    ball: [f64; 2],
    goal: Option<GoalSide>,
    robots: Vec<RobotSummary>,
}

fn summary(state: &SimState, seed: u64, frames: u64, applied: u64, rejected: u64) -> SimSummary {
    SimSummary {
        seed,
        frames,
        ticks: state.tick,
        time: state.time,
        commands_applied: applied,
        commands_rejected: rejected,
        ball: [state.ball.p.x, state.ball.p.y],
        goal: state.goal,
        robots: state
            .robots
            .iter()
            .map(|r| RobotSummary {
                team: r.team,
                id: r.id,
                x: r.pose.position.x,
                y: r.pose.position.y,
                theta: r.pose.heading(),
            })
            .collect(),
    }
}

pub fn run(_cli: &Cli, args: &SimArgs, cfg: StackConfig) -> Outcome {
    let sim_cfg = cfg.sim_config();
    let commands = UdpSocket::bind((cfg.host.as_str(), cfg.command_port))
        .with_context(|| format!("binding command port {}:{}", cfg.host, cfg.command_port))?;
    commands.set_nonblocking(true).context("command socket")?;
    let vision = UdpSocket::bind((cfg.host.as_str(), 0)).context("binding vision sender")?;
    let vision_to = (cfg.host.as_str(), cfg.vision_port);
    log::info!(
        "sim: commands on {}:{}, vision to {}:{}",
        cfg.host,
        cfg.command_port,
        cfg.host,
        cfg.vision_port
    );

    let mut sim = Simulator::new(sim_cfg, SimState::kickoff(&sim_cfg)).context("simulator")?;
    let stop = shutdown_flag();
    let period = Duration::from_secs_f64(sim_cfg.vision_period());
    let frame_limit = args
        .duration
        .map(|d| (d * sim_cfg.vision_rate).round() as u64);
    let started = Instant::now();
    let (mut frames, mut applied, mut rejected) = (0u64, 0u64, 0u64);
    let mut buf = [0u8; 65536];

    while !stop.load(Ordering::SeqCst) && frame_limit.is_none_or(|n| frames < n) {
        loop {
            match commands.recv_from(&mut buf) {
                Ok((n, _)) => match decode_command(&buf[..n]) {
                    Ok(c) => match sim.command(sim_cfg.controlled_team, c.robot_id, &c.v) {
                        Ok(()) => applied += 1,
                        Err(e) => {
                            rejected += 1;
                            log::warn!("command for robot {}: {e}", c.robot_id);
                        }
                    },
                    Err(e) => {
                        rejected += 1;
                        log::warn!("bad command datagram: {e}");
                    }
                },
                Err(e) if e.kind() == ErrorKind::WouldBlock => break,
                Err(e) => {
                    log::debug!("command socket: {e}");
                    break;
                }
            }
        }
        let frame = sim.advance_frame();
        frames += 1;
        if let Err(e) = vision.send_to(encode_vision(&frame).as_bytes(), vision_to) {
            log::debug!("vision send: {e}");
        }
        if !args.headless {
            let due = period * frames as u32;
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                std::thread::sleep(wait);
            }
        }
    }

    print_json(&summary(sim.state(), cfg.sim_seed, frames, applied, rejected))?;
    Ok(())
}
