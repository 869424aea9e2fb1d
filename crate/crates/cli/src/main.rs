use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cohtx::link::TxScheme;
use cohtx::SystemConfig;
use cohtx_cli::{run_experiment, CliError, Experiment, ExperimentSpec, Format, SweepAxis};

/// Runs a named experiment and writes its result table.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    /// JSON system config; reference defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// `name=v1,v2,...`; repeatable.
    #[arg(long, value_parser = parse_axis)]
    sweep: Vec<SweepAxis>,
    /// Symbols per polarization for link experiments.
    #[arg(long)]
    symbols: Option<usize>,
    /// Samples per CCDF curve.
    #[arg(long)]
    samples: Option<usize>,
    /// PAPR window in samples.
    #[arg(long)]
    window: Option<usize>,
    /// jfs_cd, cascade_ideal, cascade_fir or post_comp.
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<TxScheme>,
    /// Clipping ratio in dB.
    #[arg(long)]
    cr: Option<f64>,
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_scheme(s: &str) -> Result<TxScheme, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown scheme `{s}`"))
}

fn build(args: Args) -> Result<ExperimentSpec, CliError> {
    let mut config = match &args.config {
        Some(path) => cohtx_cli::load_config(path)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let mut spec = ExperimentSpec::new(args.experiment, config, args.out);
    spec.format = args.format;
    spec.sweep = args.sweep;
    if let Some(n) = args.symbols {
        spec.n_symbols = n;
    }
    if let Some(n) = args.samples {
        spec.ccdf_samples = n;
    }
    if let Some(w) = args.window {
        spec.papr_window = w;
    }
    if let Some(s) = args.scheme {
        spec.scheme = s;
    }
    spec.clip_cr_db = args.cr;
    Ok(spec)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = build(args).and_then(|spec| run_experiment(&spec));
    match result {
        Ok(outcome) if outcome.passed() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("invariant violated: {f}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
