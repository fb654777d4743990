use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bcrelay::audit::{audit_rows, row_config};
use bcrelay::config::load_config;
use bcrelay::plot::{emit_plot, PlotField, PlotStyle};
use bcrelay::sweep::{read_csv, run_sweep, write_csv, Preset, SweepSpec, STATUS_INFEASIBLE};
use bcrelay::validate::run_all;
use bcrelay_core::{allocate, channel_gains, NetworkConfig, SolverOptions};
use clap::{Parser, Subcommand};

/// Throughput allocation for relay-assisted backscatter links.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one scenario and print the report as JSON.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a figure preset or a custom sweep and write CSV.
    Sweep {
        #[arg(long, default_value = "fig3-alpha1")]
        preset: String,
        /// Sweep description for the `custom` preset.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Base scenario; presets apply their own overrides on top.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Re-derive every row after the sweep and fail on mismatch.
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a sweep CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        style: PlotStyle,
        #[arg(long, value_enum, default_value = "throughput")]
        field: PlotField,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized invariant suites.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn base_config(path: &Option<PathBuf>) -> Result<NetworkConfig> {
    path.as_deref().map_or_else(|| Ok(NetworkConfig::baseline()), load_config)
}

fn load_spec(preset: &str, spec: Option<&Path>) -> Result<SweepSpec> {
    if let Some(p) = spec {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        return serde_json::from_str(&text).context("parsing sweep spec");
    }
    let preset: Preset = preset.parse().map_err(anyhow::Error::msg)?;
    Ok(SweepSpec::preset(preset))
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let opts = SolverOptions::default();
    match cli.cmd {
        Cmd::Solve { config, out } => {
            let cfg = base_config(&config)?;
            let chan = channel_gains(&cfg)?;
            let mut w = output(&out)?;
            match allocate(&chan, &cfg, &opts) {
                Ok(r) => {
                    serde_json::to_writer_pretty(&mut w, &r)?;
                    writeln!(w)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("infeasible: {e}");
                    Ok(ExitCode::from(2))
                }
            }
        }
        Cmd::Sweep {
            preset,
            spec,
            config,
            audit,
            out,
        } => {
            let spec = load_spec(&preset, spec.as_deref())?;
            let base = base_config(&config)?;
            let rows = run_sweep(&spec, &base, &opts)?;
            write_csv(&rows, output(&out)?)?;
            if audit {
                let (fails, checked) = audit_rows(&rows, |r| row_config(&spec, &base, r));
                for f in &fails {
                    eprintln!("audit: line {}: {}", f.line, f.reason);
                }
                eprintln!("audit: {checked} rows checked, {} failures", fails.len());
                if !fails.is_empty() {
                    return Ok(ExitCode::FAILURE);
                }
            }
            if rows.iter().any(|r| r.status == STATUS_INFEASIBLE) {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Plot {
            csv,
            style,
            field,
            out,
        } => {
            let file = File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let rows = read_csv(file)?;
            let svg = emit_plot(&rows, style, field)?;
            output(&out)?.write_all(svg.as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Validate { seed } => {
            let mut ok = true;
            for s in run_all(seed) {
                let verdict = if s.passed() { "pass" } else { "FAIL" };
                println!("{verdict} {} ({} cases)", s.name, s.cases);
                for f in s.failures.iter().take(5) {
                    println!("  {f}");
                }
                ok &= s.passed();
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
