use std::fs;
use std::net::UdpSocket;
use std::path::Path;
use std::process::{Command, Output};

use omnissl::planner::point_clear;
use omnissl::{Disc, Vec2};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_omnissl"));
    for (k, _) in std::env::vars() {
        if k.starts_with("OMNISSL_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_line(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text:?}"))
}

fn free_udp_port() -> u16 {
    UdpSocket::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

#[test]
fn help_everywhere_exits_zero() {
    for sub in [&[][..], &["sim"], &["serve"], &["plan"], &["demo"], &["config"]] {
        let mut args: Vec<&str> = sub.to_vec();
        args.push("--help");
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["demo", "bogus"]).status.code(), Some(1));
    assert_eq!(run(&["sim", "--command-port", "70000"]).status.code(), Some(1));
    assert_eq!(run(&["--set", "planner.k=zero", "config"]).status.code(), Some(1));
    assert_eq!(run(&["--set", "no.such=1", "config"]).status.code(), Some(1));
    let out = bin().env("OMNISSL_PLANNER_BOGUS", "1").arg("config").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn demo_goalkeeper_saves_seed_one() {
    let out = run(&["demo", "goalkeeper", "--seed", "1", "--json"]);
    assert!(out.status.success());
    let m = json_line(&out);
    assert_eq!(m["shot_on_target"], true);
    assert_eq!(m["save"], true);
}

#[test]
fn demo_follow_reaches_ball_without_contact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metrics.json");
    let out = run(&["demo", "follow", "--json", "-vv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let m = json_line(&out);
    assert!(m["time_to_ball"].as_f64().unwrap() < 5.0);
    assert!(m["min_clearance"].as_f64().unwrap() > 0.0);
    let written: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, m);
}

#[test]
fn sim_headless_is_deterministic() {
    let port = free_udp_port().to_string();
    let args = [
        "sim", "--preset", "divB", "--seed", "42", "--duration", "10", "--headless",
        "--command-port", &port,
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let s = json_line(&a);
    assert_eq!(s["frames"], 600);
    assert_eq!(s["seed"], 42);
    assert_eq!(s["robots"].as_array().unwrap().len(), 12);
}

#[test]
fn sim_port_in_use_is_runtime_error() {
    let taken = UdpSocket::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = run(&["sim", "--headless", "--duration", "0.1", "--command-port", &port]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("binding command port"));
}

/// Each layer overrides the one before: defaults, file, environment, flags.
#[test]
fn config_precedence_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("stack.conf");
    fs::write(&file, "# test layer\nseed.sim = 3\n").unwrap();
    for use_file in [false, true] {
        for use_env in [false, true] {
            for use_flag in [false, true] {
                let mut c = bin();
                c.args(["demo", "follow", "--duration", "0.05", "--json"]);
                if use_file {
                    c.args(["--config", file.to_str().unwrap()]);
                }
                if use_env {
                    c.env("OMNISSL_SEED_SIM", "5");
                }
                if use_flag {
                    c.args(["--seed", "7"]);
                }
                let out = c.output().unwrap();
                assert!(out.status.success());
                let expected = if use_flag {
                    7
                } else if use_env {
                    5
                } else if use_file {
                    3
                } else {
                    0
                };
                assert_eq!(
                    json_line(&out)["seed"],
                    expected,
                    "file={use_file} env={use_env} flag={use_flag}"
                );
            }
        }
    }
}

#[test]
fn set_flag_beats_environment_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("stack.conf");
    fs::write(&file, "planner.samples = 11\n").unwrap();
    let out = bin()
        .env("OMNISSL_PLANNER_SAMPLES", "12")
        .args(["--config", file.to_str().unwrap(), "--set", "planner.samples=13", "config", "--json"])
        .output()
        .unwrap();
    assert_eq!(json_line(&out)["planner.samples"], "13");
    let out = bin()
        .env("OMNISSL_PLANNER_SAMPLES", "12")
        .args(["--config", file.to_str().unwrap(), "config", "--json"])
        .output()
        .unwrap();
    assert_eq!(json_line(&out)["planner.samples"], "12");
}

#[test]
fn bad_config_file_names_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.conf");
    fs::write(&file, "control.kp = 2\ncontrol.kp_theta\n").unwrap();
    let out = run(&["--config", file.to_str().unwrap(), "config"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

fn plan_world(dir: &Path, world: &Value, extra: &[&str]) -> (Output, String, Value) {
    let world_path = dir.join("world.json");
    let svg = dir.join("plan.svg");
    let report = dir.join("plan.json");
    fs::write(&world_path, world.to_string()).unwrap();
    let mut args = vec![
        "plan",
        "--world",
        world_path.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    let svg_text = fs::read_to_string(&svg).unwrap_or_default();
    let report: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    (out, svg_text, report)
}

fn path_points(svg: &str) -> usize {
    let line = svg.lines().find(|l| l.contains("class=\"path\"")).unwrap();
    let points = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    points.split(' ').count()
}

#[test]
fn plan_empty_world_is_one_segment() {
    let dir = tempfile::tempdir().unwrap();
    let world = serde_json::json!({ "start": {"x": -2.0, "y": 0.0}, "ball": {"x": 2.0, "y": 1.0} });
    let (out, svg, report) = plan_world(dir.path(), &world, &[]);
    assert!(out.status.success());
    assert_eq!(report["status"], "ok");
    assert_eq!(report["waypoints"].as_array().unwrap().len(), 2);
    assert_eq!(path_points(&svg), 2);
}

#[test]
fn plan_crowded_world_draws_roadmap() {
    let dir = tempfile::tempdir().unwrap();
    let world = serde_json::json!({
        "start": {"x": -2.5, "y": -0.5},
        "ball": {"x": 1.5, "y": 0.5},
        "robots": [
            {"x": -1.0, "y": -0.2}, {"x": -0.4, "y": 0.4}, {"x": 0.2, "y": 0.0},
            {"x": 0.6, "y": 0.7}, {"x": -0.2, "y": -0.8}
        ]
    });
    let (out, svg, report) = plan_world(dir.path(), &world, &["--samples", "20", "--seed", "4"]);
    assert!(out.status.success());
    assert_eq!(svg.matches("class=\"milestone\"").count(), 20);
    assert!(svg.matches("class=\"link\"").count() > 0);
    assert!(svg.contains("stroke-width=\"1\"") && svg.contains("stroke-width=\"5\""));
    assert_eq!(report["seed"], 4);
    assert_eq!(report["nodes"].as_array().unwrap().len(), 22);
    if report["status"] == "ok" {
        assert_eq!(path_points(&svg), report["waypoints"].as_array().unwrap().len());
    }
}

#[test]
fn plan_corridor_path_keeps_clearance() {
    let dir = tempfile::tempdir().unwrap();
    let mut robots = Vec::new();
    let mut discs = Vec::new();
    for i in 0..9 {
        let y = -1.5 + 0.09 + 0.18 * i as f64;
        if y > 0.0 {
            break;
        }
        robots.push(serde_json::json!({"x": 0.0, "y": y}));
        discs.push(Disc::robot(Vec2::new(0.0, y)));
    }
    for i in 0..6 {
        let y = 0.5 + 0.09 + 0.18 * i as f64;
        robots.push(serde_json::json!({"x": 0.0, "y": y}));
        discs.push(Disc::robot(Vec2::new(0.0, y)));
    }
    let world = serde_json::json!({
        "start": {"x": -2.0, "y": 0.3}, "target": {"x": 2.0, "y": 0.1}, "robots": robots
    });
    let (out, _, report) = plan_world(dir.path(), &world, &["--samples", "40", "--seed", "2"]);
    assert!(out.status.success());
    assert_eq!(report["status"], "ok");
    let pts: Vec<Vec2> = report["waypoints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| Vec2::new(p["x"].as_f64().unwrap(), p["y"].as_f64().unwrap()))
        .collect();
    let clearance = 0.11;
    for w in pts.windows(2) {
        for i in 0..=100_000 {
            let p = w[0].lerp(w[1], i as f64 / 100_000.0);
            assert!(point_clear(p, &discs, clearance), "{p:?}");
            for d in &discs {
                let r = d.radius() + clearance;
                assert!((p - d.center).norm_squared() > r * r);
            }
        }
    }
}

#[test]
fn plan_unreachable_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let ring: Vec<Value> = (0..24)
        .map(|i| {
            let a = i as f64 * std::f64::consts::TAU / 24.0;
            serde_json::json!({"x": 2.0 + 0.6 * a.cos(), "y": 0.6 * a.sin()})
        })
        .collect();
    let world = serde_json::json!({
        "start": {"x": -2.0, "y": 0.0}, "target": {"x": 2.0, "y": 0.0}, "robots": ring
    });
    let (out, _, report) = plan_world(dir.path(), &world, &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report["status"], "unreachable");
    assert_eq!(json_line(&out), report);
}

#[test]
fn plan_rejects_malformed_world() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("world.json");
    fs::write(&path, "{\"start\": 3}").unwrap();
    assert_eq!(run(&["plan", "--world", path.to_str().unwrap()]).status.code(), Some(1));
    let missing = dir.path().join("nope.json");
    assert_eq!(run(&["plan", "--world", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn config_keys_listing() {
    let out = run(&["config", "--keys", "--json"]);
    let keys = json_line(&out);
    assert!(keys.as_array().unwrap().iter().any(|k| k["key"] == "planner.samples"));
}
