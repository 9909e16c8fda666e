use anyhow::{anyhow, Context};
use omnissl::config::StackConfig;
use omnissl::planner::plan_detailed;
use omnissl::viz::plan_svg;
use omnissl::wire::PlanReport;
use omnissl::{Disc, Vec2};
use serde::Deserialize;

use crate::args::{Cli, PlanArgs};
use crate::{print_json, Failure, Outcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleSpec {
    x: f64,
    y: f64,
    r: f64,
}

/// Input of `omnissl plan`. `robots` become robot-sized discs; `target`
/// defaults to the ball.
#[derive(Debug, Deserialize)]
struct World {
    start: Vec2,
    #[serde(default)]
    target: Option<Vec2>,
    #[serde(default)]
    ball: Option<Vec2>,
    #[serde(default)]
    robots: Vec<Vec2>,
    #[serde(default)]
    obstacles: Vec<ObstacleSpec>,
}

impl World {
    fn discs(&self) -> anyhow::Result<Vec<Disc>> {
        let mut out: Vec<Disc> = self.robots.iter().map(|&p| Disc::robot(p)).collect();
        for o in &self.obstacles {
            out.push(Disc::new(Vec2::new(o.x, o.y), o.r).map_err(|e| anyhow!("obstacle: {e}"))?);
        }
        Ok(out)
    }
}

pub fn run(cli: &Cli, args: &PlanArgs, cfg: StackConfig) -> Outcome {
    let usage = |e: anyhow::Error| Failure::Usage(e);
    let text = std::fs::read_to_string(&args.world)
        .with_context(|| format!("reading {}", args.world.display()))?;
    let world: World = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.world.display()))
        .map_err(usage)?;
    let target = world
        .target
        .or(world.ball)
        .ok_or_else(|| usage(anyhow!("world needs a target or a ball")))?;
    let obstacles = world.discs().map_err(usage)?;
    let params = omnissl::PlannerParams {
        rng_seed: cfg.planner_seed,
        ..cfg.control.planner
    };

    let outcome = plan_detailed(world.start, target, &obstacles, &cfg.field, &params);
    let report = match &outcome {
        Ok(o) => PlanReport::from_outcome(params.rng_seed, world.start, o),
        Err(e) => PlanReport::from_error(params.rng_seed, e),
    };
    if let Some(path) = &args.svg {
        let svg = plan_svg(&cfg.field, &obstacles, world.start, target, outcome.as_ref().ok());
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).context("encoding report")?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.json {
        print_json(&report)?;
    } else {
        match report.status.as_str() {
            "ok" => println!(
                "plan: {} waypoints, {} nodes, {} links",
                report.waypoints.len().saturating_sub(1),
                report.nodes.len(),
                report.edges.len()
            ),
            _ => println!("plan: unreachable ({})", report.reason.as_deref().unwrap_or("")),
        }
    }
    Ok(())
}
