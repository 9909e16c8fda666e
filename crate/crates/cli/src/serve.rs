use std::collections::BTreeMap;
use std::io::ErrorKind;
use std::net::{TcpListener, TcpStream, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::Context;
use omnissl::config::StackConfig;
use omnissl::team::{Behaviour, TeamController};
use omnissl::wire::{decode_client, decode_vision, encode_command, ClientMessage, ServerMessage};
use omnissl::{BodyVelocity, VisionFrame};
use serde::Serialize;
use tungstenite::{Message, WebSocket};

use crate::args::{Cli, ServeArgs};
use crate::{print_json, shutdown_flag, Failure, Outcome};

const POLL: Duration = Duration::from_millis(10);

enum ClientEvent {
    Joined(u64, Sender<String>),
    Message(u64, ClientMessage),
    Malformed(u64, String),
    Left(u64),
}

#[derive(Debug, Default, Serialize)]
struct ServeSummary {
    ticks: u64,
    frames_ingested: u64,
    dropped_frames: u64,
    undecodable_datagrams: u64,
    commands_sent: u64,
    clients_seen: u64,
    client_messages: u64,
    tick_ms_median: f64,
    tick_ms_max: f64,
    frame_rate: f64,
}

fn vision_loop(socket: UdpSocket, frames: Sender<VisionFrame>, stop: Arc<AtomicBool>, bad: Sender<()>) {
    let mut buf = vec![0u8; 65536];
    while !stop.load(Ordering::SeqCst) {
        match socket.recv_from(&mut buf) {
            Ok((n, _)) => match decode_vision(&buf[..n]) {
                Ok(f) => {
                    if frames.send(f).is_err() {
                        return;
                    }
                }
                Err(e) => {
                    log::warn!("bad vision datagram: {e}");
                    let _ = bad.send(());
                }
            },
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(e) => log::debug!("vision socket: {e}"),
        }
    }
}

fn client_loop(mut ws: WebSocket<TcpStream>, id: u64, events: Sender<ClientEvent>, stop: Arc<AtomicBool>) {
    let (tx, outbox) = mpsc::channel::<String>();
    if events.send(ClientEvent::Joined(id, tx)).is_err() {
        return;
    }
    while !stop.load(Ordering::SeqCst) {
        match ws.read() {
            Ok(Message::Text(text)) => {
                let event = match decode_client(text.as_str()) {
                    Ok(m) => ClientEvent::Message(id, m),
                    Err(e) => ClientEvent::Malformed(id, e.to_string()),
                };
                if events.send(event).is_err() {
                    break;
                }
            }
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(e) => {
                log::debug!("client {id}: {e}");
                break;
            }
        }
        let mut failed = false;
        while let Ok(text) = outbox.try_recv() {
            if ws.send(Message::text(text)).is_err() {
                failed = true;
                break;
            }
        }
        if failed {
            break;
        }
    }
    let _ = ws.close(None);
    let _ = ws.flush();
    let _ = events.send(ClientEvent::Left(id));
}

fn accept_loop(listener: TcpListener, events: Sender<ClientEvent>, stop: Arc<AtomicBool>) {
    let mut next_id = 0;
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                let _ = stream.set_nonblocking(false);
                let ws = match tungstenite::accept(stream) {
                    Ok(ws) => ws,
                    Err(e) => {
                        log::warn!("handshake with {peer}: {e}");
                        continue;
                    }
                };
                let _ = ws.get_ref().set_read_timeout(Some(POLL));
                log::info!("console {next_id} connected from {peer}");
                let (events, stop) = (events.clone(), Arc::clone(&stop));
                let id = next_id;
                thread::spawn(move || client_loop(ws, id, events, stop));
                next_id += 1;
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(e) => log::warn!("accept: {e}"),
        }
    }
}

/// Apply one console message; the error text goes back to that console.
fn handle(ctl: &mut TeamController, msg: ClientMessage) -> Result<(), String> {
    match msg {
        ClientMessage::Teleop { id, vx, vy, omega, .. } => {
            let v = BodyVelocity::new(vx, vy, omega);
            if !v.is_finite() {
                return Err("teleop velocity must be finite".into());
            }
            ctl.set_teleop(id, v);
        }
        ClientMessage::Behaviour { id, name, .. } => {
            let b: Behaviour = name.parse().map_err(|e| format!("{e}"))?;
            ctl.set_behaviour(id, b);
        }
        ClientMessage::Formation { name, .. } => {
            if !ctl.set_formation(&name) {
                return Err(format!("no formation named {name:?}"));
            }
        }
    }
    Ok(())
}

pub fn controller_from(cfg: &StackConfig) -> Result<TeamController, Failure> {
    let formations = cfg.formations().map_err(|e| Failure::Usage(e.into()))?;
    let mut ctl = TeamController::new(cfg.field, cfg.team, cfg.control_params(), cfg.planner_seed)
        .with_formations(formations);
    ctl.set_default_behaviour(cfg.default_behaviour.clone());
    for (&id, b) in &cfg.behaviours {
        ctl.set_behaviour(id, b.clone());
    }
    Ok(ctl)
}

pub fn run(cli: &Cli, args: &ServeArgs, cfg: StackConfig) -> Outcome {
    let mut ctl = controller_from(&cfg)?;
    let host = cfg.host.as_str();
    let vision = UdpSocket::bind((host, cfg.vision_port))
        .with_context(|| format!("binding vision port {host}:{}", cfg.vision_port))?;
    vision.set_read_timeout(Some(POLL)).context("vision socket")?;
    let commands = UdpSocket::bind((host, 0)).context("binding command sender")?;
    let command_to = (host, cfg.command_port);
    let listener = TcpListener::bind((host, cfg.telemetry_port))
        .with_context(|| format!("binding telemetry port {host}:{}", cfg.telemetry_port))?;
    listener.set_nonblocking(true).context("telemetry socket")?;
    log::info!(
        "serve: vision on {host}:{}, commands to {host}:{}, consoles on ws://{host}:{}",
        cfg.vision_port,
        cfg.command_port,
        cfg.telemetry_port
    );

    let stop = shutdown_flag();
    let (frame_tx, frames) = mpsc::channel();
    let (bad_tx, bad) = mpsc::channel();
    let (event_tx, events) = mpsc::channel();
    let workers = [
        {
            let stop = Arc::clone(&stop);
            thread::spawn(move || vision_loop(vision, frame_tx, stop, bad_tx))
        },
        {
            let stop = Arc::clone(&stop);
            thread::spawn(move || accept_loop(listener, event_tx, stop))
        },
    ];

    let summary = control_loop(&mut ctl, args, &cfg, &commands, command_to, &frames, &bad, &events, &stop);
    stop.store(true, Ordering::SeqCst);
    for w in workers {
        let _ = w.join();
    }
    if cli.json {
        print_json(&summary)?;
    } else {
        println!(
            "serve: {} frames, {} ticks, {} commands, median tick {:.3} ms",
            summary.frames_ingested, summary.ticks, summary.commands_sent, summary.tick_ms_median
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn control_loop(
    ctl: &mut TeamController,
    args: &ServeArgs,
    cfg: &StackConfig,
    commands: &UdpSocket,
    command_to: (&str, u16),
    frames: &Receiver<VisionFrame>,
    bad: &Receiver<()>,
    events: &Receiver<ClientEvent>,
    stop: &AtomicBool,
) -> ServeSummary {
    let period = Duration::from_secs_f64(1.0 / cfg.sim.vision_rate);
    let started = Instant::now();
    let mut consoles: BTreeMap<u64, Sender<String>> = BTreeMap::new();
    let mut s = ServeSummary::default();
    let mut tick_times = Vec::new();

    while !stop.load(Ordering::SeqCst)
        && args.duration.is_none_or(|d| started.elapsed().as_secs_f64() < d)
        && args.frames.is_none_or(|n| s.frames_ingested < n)
    {
        // No frame within a period still ticks.
        match frames.recv_timeout(period) {
            Ok(f) => match ctl.ingest(f) {
                Ok(()) => s.frames_ingested += 1,
                Err(e) => {
                    log::debug!("{e}");
                    s.dropped_frames += 1;
                    continue;
                }
            },
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => break,
        }
        s.undecodable_datagrams += bad.try_iter().count() as u64;

        for event in events.try_iter() {
            match event {
                ClientEvent::Joined(id, tx) => {
                    s.clients_seen += 1;
                    consoles.insert(id, tx);
                }
                ClientEvent::Left(id) => {
                    consoles.remove(&id);
                }
                ClientEvent::Message(id, msg) => {
                    s.client_messages += 1;
                    if let Err(reason) = handle(ctl, msg) {
                        if let Some(tx) = consoles.get(&id) {
                            let _ = tx.send(ServerMessage::error(reason).to_json());
                        }
                    }
                }
                ClientEvent::Malformed(id, reason) => {
                    if let Some(tx) = consoles.get(&id) {
                        let _ = tx.send(ServerMessage::error(reason).to_json());
                    }
                }
            }
        }

        let t0 = Instant::now();
        let out = ctl.tick();
        tick_times.push(t0.elapsed());
        s.ticks += 1;
        for c in &out {
            match commands.send_to(encode_command(c).as_bytes(), command_to) {
                Ok(_) => s.commands_sent += 1,
                Err(e) => log::debug!("command send: {e}"),
            }
        }
        if !consoles.is_empty() {
            let snapshot = ServerMessage::snapshot(ctl.snapshot()).to_json();
            consoles.retain(|_, tx| tx.send(snapshot.clone()).is_ok());
        }
    }

    tick_times.sort();
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    s.tick_ms_median = tick_times.get(tick_times.len() / 2).copied().map_or(0.0, ms);
    s.tick_ms_max = tick_times.last().copied().map_or(0.0, ms);
    let wall = started.elapsed().as_secs_f64();
    s.frame_rate = if wall > 0.0 { s.frames_ingested as f64 / wall } else { 0.0 };
    s
}
