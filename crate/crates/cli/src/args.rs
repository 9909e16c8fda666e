use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "omnissl",
    version,
    about = "Small-size robot soccer stack: simulator, team server, planner and demos",
    after_help = "Configuration layers, later wins: built-in defaults, --config file, \
                  OMNISSL_<SECTION>_<NAME> environment variables, --set, subcommand flags.\n\
                  Run `omnissl config --keys` for every key.\n\
                  Exit codes: 0 ok, 1 usage or configuration error, 2 runtime failure."
)]
pub struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE", env = "OMNISSL_CONFIG")]
    pub config: Option<PathBuf>,

    /// Set any configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    /// More log output on stderr; repeat for more.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the field simulator on the vision and command UDP ports.
    Sim(SimArgs),
    /// Run the team controller: vision in, commands out, WebSocket telemetry.
    Serve(ServeArgs),
    /// Plan once through a world file and write the roadmap as SVG and JSON.
    Plan(PlanArgs),
    /// Run a scripted scenario with simulator and controller in one process.
    Demo(DemoArgs),
    /// Print the effective configuration.
    Config(ConfigArgs),
}

#[derive(Debug, Args, Default)]
pub struct FieldFlags {
    /// Field preset: divb or practice.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct NetFlags {
    /// Address for the vision and command sockets.
    #[arg(long)]
    pub host: Option<String>,
    /// UDP port for vision frames
    #[arg(long, value_name = "PORT")]
    pub vision_port: Option<u16>,
    /// UDP port for robot commands
    #[arg(long, value_name = "PORT")]
    pub command_port: Option<u16>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub field: FieldFlags,
    #[command(flatten)]
    pub net: NetFlags,
    /// Simulator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop after this much simulated time, seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Do not pace frames to the wall clock.
    #[arg(long)]
    pub headless: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub field: FieldFlags,
    #[command(flatten)]
    pub net: NetFlags,
    /// WebSocket telemetry and teleop port.
    #[arg(long, value_name = "PORT")]
    pub telemetry_port: Option<u16>,
    /// Planner seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Startup behaviour for one robot, e.g. `0=goalkeeper`; repeatable.
    #[arg(long = "behaviour", value_name = "ID=NAME")]
    pub behaviours: Vec<String>,
    /// Formation file.
    #[arg(long, value_name = "FILE")]
    pub formation: Option<PathBuf>,
    /// Stop after this many wall-clock seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Stop after ingesting this many vision frames.
    #[arg(long)]
    pub frames: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// World JSON: start, target or ball, robots and obstacles.
    #[arg(long, value_name = "FILE")]
    pub world: PathBuf,
    /// Write the roadmap and path here as SVG.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
    /// Write the plan report here as JSON.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Milestones to sample.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Nearest neighbours per node.
    #[arg(long)]
    pub k: Option<usize>,
    /// Planner seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub field: FieldFlags,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// follow, intercept, goalkeeper or formation.
    pub scenario: String,
    /// Scenario and simulator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the scenario length, seconds of simulated time.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Formation file.
    #[arg(long, value_name = "FILE")]
    pub formation: Option<PathBuf>,
    /// Write the metrics JSON here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// List every key with its description instead.
    #[arg(long)]
    pub keys: bool,
}

fn push<T: ToString>(out: &mut Vec<(String, String)>, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        out.push((key.to_string(), v.to_string()));
    }
}

impl FieldFlags {
    fn overrides(&self, out: &mut Vec<(String, String)>) {
        push(out, "field.preset", &self.preset);
    }
}

impl NetFlags {
    fn overrides(&self, out: &mut Vec<(String, String)>) {
        push(out, "net.host", &self.host);
        push(out, "net.vision_port", &self.vision_port);
        push(out, "net.command_port", &self.command_port);
    }
}

impl Command {
    /// Configuration keys set by this subcommand's own flags.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        match self {
            Command::Sim(a) => {
                a.field.overrides(&mut out);
                a.net.overrides(&mut out);
                push(&mut out, "seed.sim", &a.seed);
            }
            Command::Serve(a) => {
                a.field.overrides(&mut out);
                a.net.overrides(&mut out);
                push(&mut out, "net.telemetry_port", &a.telemetry_port);
                push(&mut out, "seed.planner", &a.seed);
                push(&mut out, "formation.file", &a.formation.as_ref().map(|p| p.display()));
            }
            Command::Plan(a) => {
                a.field.overrides(&mut out);
                push(&mut out, "planner.samples", &a.samples);
                push(&mut out, "planner.k", &a.k);
                push(&mut out, "seed.planner", &a.seed);
            }
            Command::Demo(a) => {
                push(&mut out, "seed.sim", &a.seed);
                push(&mut out, "formation.file", &a.formation.as_ref().map(|p| p.display()));
            }
            Command::Config(_) => {}
        }
        out
    }
}
