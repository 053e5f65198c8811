use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use satqkd::cli::load_config;
use satqkd::output::fmt_f64;
use satqkd::{emit, run_sweep, SimError};
use satqkd_core::atmosphere::Weather;

#[derive(Parser)]
#[command(
    name = "satqkd",
    version,
    about = "HD-QKD key rates over simulated satellite links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep named in the config (`sweep` key).
    Sweep(RunArgs),
    /// Transmittance distribution tables over `zenith_grid`.
    Pdt(RunArgs),
    /// Key-rate distribution tables.
    Pdr(RunArgs),
    /// Noise tolerance per protocol and dimension.
    Tolerance(RunArgs),
    /// List the weather presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Config keys as `--key value`, e.g. `--d-list 2,32 --seed 7`.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY VALUE"
    )]
    overrides: Vec<String>,
}

fn run(args: &RunArgs, sweep: Option<&str>) -> Result<(), SimError> {
    let cfg = load_config(args.config.as_deref(), &args.overrides, sweep)?;
    let output = run_sweep(&cfg)?;
    emit(&output, cfg.format, cfg.output_path.as_deref())
}

fn presets() -> Result<(), SimError> {
    let mut out = std::io::stdout().lock();
    let mut text = String::from("preset,cn2,n0\n");
    for w in Weather::ALL {
        text.push_str(&format!(
            "{},{},{}\n",
            w.name(),
            fmt_f64(w.cn2()),
            fmt_f64(w.n0())
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|source| SimError::Io {
            path: "<stdout>".into(),
            source,
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => run(a, None),
        Command::Pdt(a) => run(a, Some("pdt")),
        Command::Pdr(a) => run(a, Some("pdr")),
        Command::Tolerance(a) => run(a, Some("tolerance")),
        Command::Presets => presets(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("satqkd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
