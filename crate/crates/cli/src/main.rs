//! `omnissl`: run the simulator, the team server, one-shot plans and scripted
//! demos from a single binary.

mod args;
mod demo;
mod layers;
mod plan;
mod serve;
mod sim;

use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::Parser;

use args::{Cli, Command};

/// Exit status classes: bad invocation or configuration versus a failure
/// while running.
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

pub type Outcome = Result<(), Failure>;

/// Set once SIGINT or SIGTERM arrives; long-running loops poll it.
pub fn shutdown_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let f = Arc::clone(&flag);
    if let Err(e) = ctrlc::set_handler(move || f.store(true, Ordering::SeqCst)) {
        log::warn!("no signal handler: {e}");
    }
    flag
}

/// Write `value` as one line of JSON on stdout.
pub fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new()
        .filter_level(match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            2 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        })
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .init();

    let result = layers::load(&cli).and_then(|cfg| match &cli.command {
        Command::Sim(a) => sim::run(&cli, a, cfg),
        Command::Serve(a) => serve::run(&cli, a, cfg),
        Command::Plan(a) => plan::run(&cli, a, cfg),
        Command::Demo(a) => demo::run(&cli, a, cfg),
        Command::Config(a) => layers::show(&cli, a, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
