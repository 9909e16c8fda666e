use anyhow::{anyhow, Context};
use omnissl::config::StackConfig;
use omnissl::demo::{run_demo, DemoSetup, Scenario};

use crate::args::{Cli, DemoArgs};
use crate::{print_json, Failure, Outcome};

pub fn run(cli: &Cli, args: &DemoArgs, cfg: StackConfig) -> Outcome {
    let scenario: Scenario = args
        .scenario
        .parse()
        .map_err(|e| Failure::Usage(anyhow!("{e}")))?;
    if let Some(d) = args.duration {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Failure::Usage(anyhow!("--duration must be positive")));
        }
    }
    let setup = DemoSetup {
        sim: cfg.sim_config(),
        control: cfg.control_params(),
        formations: cfg.formations().map_err(|e| Failure::Usage(e.into()))?,
        planner_seed: cfg.planner_seed,
        duration: args.duration,
    };
    let run = run_demo(scenario, cfg.sim_seed, &setup).context("demo")?;
    let m = &run.metrics;
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(m).context("encoding metrics")?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.json {
        print_json(m)?;
    } else {
        let opt = |v: Option<f64>, unit: &str| v.map_or("-".to_string(), |x| format!("{x:.3} {unit}"));
        println!("demo {} seed {}: {} frames, {:.2} s", m.scenario, m.seed, m.frames, m.sim_time);
        println!("  time to ball   {}", opt(m.time_to_ball, "s"));
        println!("  min clearance  {}", opt(m.min_clearance, "m"));
        if let Some(save) = m.save {
            println!("  keeper save    {save}");
        }
        if let Some(e) = m.formation_error_mean {
            println!("  formation err  {e:.3} m mean, {} max", opt(m.formation_error_max, "m"));
        }
    }
    Ok(())
}
