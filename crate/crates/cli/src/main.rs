mod args;
mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::{resolve, RunManifest};

const THREADS_VAR: &str = "JUMPVEX_THREADS";
const MANIFEST: &str = "manifest.json";
const DEFAULT_OUT_DIR: &str = "jumpvex-out";

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let line = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {line}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> Result<u8> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(0);
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(anyhow!("{}", first.trim_start_matches("error: ")));
        }
    };
    configure_threads()?;
    let started = Instant::now();

    if let Some(path) = &cli.replay {
        if cli.command.is_some() {
            bail!("--replay cannot be combined with a command");
        }
        let manifest = RunManifest::load(path)?;
        let out_dir = cli.out_dir.clone().unwrap_or_else(|| manifest.out_dir.clone());
        let outcome = run::execute(&manifest.config)?;
        write_outputs(&out_dir, &outcome.files)?;
        print!("{}", outcome.stdout);
        return Ok(outcome.exit_code);
    }

    let command = cli
        .command
        .ok_or_else(|| anyhow!("no command given; run with --help for usage"))?;
    let config = resolve(&command)?;
    let out_dir = match (&cli.out_dir, &command) {
        (Some(dir), _) => dir.clone(),
        (None, Command::Truncate(t)) => t
            .out
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
        (None, _) => PathBuf::from(DEFAULT_OUT_DIR),
    };
    let outcome = run::execute(&config)?;
    write_outputs(&out_dir, &outcome.files)?;
    let manifest = RunManifest {
        command: config.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config,
        out_dir: out_dir.clone(),
        outputs: outcome.files.iter().map(|(name, _)| name.clone()).collect(),
        threads: rayon::current_num_threads(),
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(out_dir.join(MANIFEST), text).context("writing manifest")?;
    print!("{}", outcome.stdout);
    Ok(outcome.exit_code)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("{THREADS_VAR} must be a positive integer, got '{value}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, contents) in files {
        if name == MANIFEST {
            bail!("output name collides with the manifest");
        }
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
