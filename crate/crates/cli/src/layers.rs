use anyhow::anyhow;
use omnissl::config::{StackConfig, KEYS};

use crate::args::{Cli, Command, ConfigArgs};
use crate::{print_json, Failure, Outcome};

/// Defaults, then the config file, then `OMNISSL_*` variables, then `--set`
/// pairs, then the subcommand's own flags.
pub fn load(cli: &Cli) -> Result<StackConfig, Failure> {
    let usage = |e: anyhow::Error| Failure::Usage(e);
    let mut cfg = StackConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path).map_err(|e| usage(e.into()))?;
    }
    cfg.apply_env(std::env::vars().filter(|(k, _)| k != "OMNISSL_CONFIG"))
        .map_err(|e| usage(e.into()))?;
    for pair in &cli.set {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(anyhow!("--set expects KEY=VALUE, got {pair:?}")))?;
        cfg.set(k.trim(), v).map_err(|e| usage(e.into()))?;
    }
    for (k, v) in cli.command.overrides() {
        cfg.set(&k, &v).map_err(|e| usage(e.into()))?;
    }
    if let Command::Serve(a) = &cli.command {
        for pair in &a.behaviours {
            let (id, name) = pair
                .split_once('=')
                .ok_or_else(|| usage(anyhow!("--behaviour expects ID=NAME, got {pair:?}")))?;
            cfg.set(&format!("behaviour.{}", id.trim()), name)
                .map_err(|e| usage(e.into()))?;
        }
    }
    cfg.validate().map_err(|e| usage(e.into()))?;
    Ok(cfg)
}

pub fn show(cli: &Cli, args: &ConfigArgs, cfg: &StackConfig) -> Outcome {
    if args.keys {
        if cli.json {
            let keys: Vec<_> = KEYS
                .iter()
                .map(|(k, d)| serde_json::json!({ "key": k, "description": d }))
                .collect();
            print_json(&keys)?;
        } else {
            for (k, d) in KEYS {
                println!("{k:<32} {d}");
            }
            println!("{:<32} behaviour for robot <id>", "behaviour.<id>");
        }
        return Ok(());
    }
    if cli.json {
        let mut map = serde_json::Map::new();
        for (k, _) in KEYS {
            map.insert(k.to_string(), cfg.get(k).unwrap_or_default().into());
        }
        for (id, b) in &cfg.behaviours {
            map.insert(format!("behaviour.{id}"), b.to_string().into());
        }
        print_json(&map)?;
    } else {
        print!("{}", cfg.to_file_string());
    }
    Ok(())
}
