use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use evac_core::render::{FrameFormat, FrameRecorder};
use evac_core::report::{emit_stats, StatsFormat};
use evac_core::scenario::{
    emit_scenario, parse_scenario, preset, Scenario, ScenarioSpec, PRESET_NAMES,
};
use evac_core::sim::{replicate, run_observed};

#[derive(Parser)]
#[command(name = "evac", version, about = "Building evacuation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded simulation and print its metrics.
    Run {
        /// Scenario file, or a bundled preset name (caseA .. caseG).
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory to write grid frames into.
        #[arg(long)]
        frames: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        frame_every: u64,
        #[arg(long, value_enum, default_value_t = FrameKind::Text)]
        frame_format: FrameKind,
    },
    /// Run independent replications and print confidence intervals.
    Replicate {
        scenario: String,
        #[arg(short = 'n', long)]
        replications: Option<usize>,
        #[arg(long)]
        master_seed: Option<u64>,
        /// Write the table to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TableKind::Csv)]
        format: TableKind,
    },
    /// Check a scenario file and report the first problem.
    Validate { scenario: String },
    /// Print a bundled preset in scenario file format.
    Preset { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum FrameKind {
    Text,
    Pgm,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Csv,
    Table,
}

enum Failure {
    Invalid(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load(source: &str) -> Result<ScenarioSpec, Failure> {
    if let Some(spec) = preset(source) {
        return Ok(spec);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(Failure::Invalid(format!(
            "{source}: no such file or preset (presets: {})",
            PRESET_NAMES.join(", ")
        )));
    }
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {source}"))
        .map_err(Failure::Runtime)?;
    parse_scenario(&text).map_err(|e| Failure::Invalid(format!("{source}: {e}")))
}

fn build(spec: &ScenarioSpec) -> Result<Scenario, Failure> {
    spec.build().map_err(|e| Failure::Invalid(e.to_string()))
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            scenario,
            seed,
            frames,
            frame_every,
            frame_format,
        } => {
            let spec = load(&scenario)?;
            let sc = build(&spec)?;
            let seed = seed.unwrap_or(spec.sim.seed);
            let format = match frame_format {
                FrameKind::Text => FrameFormat::Text,
                FrameKind::Pgm => FrameFormat::Graymap,
            };
            let mut rec = FrameRecorder::new(frame_every.max(1), format);
            let r = if frames.is_some() {
                run_observed(&sc, seed, &mut rec)
            } else {
                run_observed(&sc, seed, &mut ())
            }
            .map_err(|e| Failure::Runtime(e.into()))?;
            if let Some(dir) = frames {
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                for f in &rec.frames {
                    let path = dir.join(format!("frame_{:05}.{}", f.tick, f.format.extension()));
                    fs::write(&path, &f.bytes)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
            println!("case {}", spec.name);
            println!("seed {seed}");
            println!("ticks {}", r.ticks);
            println!("tet_s {}", r.tet_seconds);
            println!("met_s {}", r.met_seconds);
            println!("md_m {}", r.md_meters);
            for (e, n) in &r.exit_counts {
                println!("{e} {n}");
            }
            println!("not_evacuated {}", r.trapped_count);
            Ok(())
        }
        Command::Replicate {
            scenario,
            replications,
            master_seed,
            out,
            format,
        } => {
            let spec = load(&scenario)?;
            let sc = build(&spec)?;
            let n = replications.unwrap_or(spec.sim.replications);
            if n < 2 {
                return Err(Failure::Invalid(format!("-n must be at least 2, got {n}")));
            }
            let stats = replicate(&sc, master_seed.unwrap_or(spec.sim.seed), n)
                .map_err(|e| Failure::Runtime(e.into()))?;
            let format = match format {
                TableKind::Csv => StatsFormat::Csv,
                TableKind::Table => StatsFormat::Table,
            };
            let text = emit_stats(&[stats], format).map_err(|e| Failure::Runtime(e.into()))?;
            match out {
                Some(path) => {
                    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?
                }
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Validate { scenario } => {
            let spec = load(&scenario)?;
            let sc = build(&spec)?;
            println!(
                "ok: {} ({}x{} cells, {} agents, {} exits)",
                spec.name,
                sc.grid.width(),
                sc.grid.height(),
                spec.population,
                sc.exits.len()
            );
            Ok(())
        }
        Command::Preset { name } => {
            let spec = preset(&name).ok_or_else(|| {
                Failure::Invalid(format!(
                    "unknown preset {name} (presets: {})",
                    PRESET_NAMES.join(", ")
                ))
            })?;
            print!("{}", emit_scenario(&spec));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
