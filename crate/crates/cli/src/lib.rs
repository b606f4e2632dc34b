//! Command-line front end: experiment configuration, canned figure recipes
//! and CSV output.

pub mod config;
pub mod output;
pub mod recipes;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use config::{ExperimentSpec, MetricKind, Scenario, SnrGrid};
pub use recipes::{run_experiment, Row};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {field}: {message}")]
    Usage { field: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] cdd_core::Error),
    #[error("verification failed")]
    PropertyFailure,
}

impl CliError {
    pub fn usage(field: &str, message: String) -> Self {
        Self::Usage { field: field.to_string(), message }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage { .. } => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

/// Ergodic sum-rates of cyclic delay diversity in the multi-user uplink.
#[derive(Debug, Parser)]
#[command(name = "cdd", version)]
pub struct Args {
    /// custom, figure2, figure3 or figure4.
    #[arg(long)]
    pub scenario: Option<String>,
    /// `key = value` file; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `start:stop:step` or a comma list, in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub trials: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Comma list for the custom scenario.
    #[arg(long)]
    pub metrics: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, allow_hyphen_values = true)]
    pub workers: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub users: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tx_antennas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rx_antennas: Option<String>,
    /// Also write a gnuplot script for the CSV.
    #[arg(long)]
    pub plot_script: Option<PathBuf>,
    /// Run the built-in property checks instead of an experiment.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, hide = true)]
    pub corrupt_permutation: bool,
}

impl Args {
    fn overrides(&self) -> Vec<(String, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        [
            ("scenario", self.scenario.clone()),
            ("snr_db", self.snr_db.clone()),
            ("trials", self.trials.clone()),
            ("seed", self.seed.clone()),
            ("metrics", self.metrics.clone()),
            ("out", path(&self.out)),
            ("workers", self.workers.clone()),
            ("users", self.users.clone()),
            ("tx_antennas", self.tx_antennas.clone()),
            ("rx_antennas", self.rx_antennas.clone()),
            ("plot_script", path(&self.plot_script)),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
    }

    /// Defaults, then the config file, then flags.
    pub fn to_spec(&self) -> Result<ExperimentSpec, CliError> {
        let mut spec = ExperimentSpec::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))?;
            spec.apply(&config::parse_pairs(&text)?)?;
        }
        spec.apply(&self.overrides())?;
        spec.validate()?;
        Ok(spec)
    }
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(pool.install(f))
}

fn run_verify(args: &Args, spec: &ExperimentSpec) -> Result<(), CliError> {
    let defaults = cdd_core::VerifyOptions::default();
    let opts = cdd_core::VerifyOptions {
        seed: spec.seed.unwrap_or(defaults.seed),
        trials: spec.trials.unwrap_or(defaults.trials),
        corrupt_permutation: args.corrupt_permutation,
    };
    let report = in_pool(spec.workers, || cdd_core::run_verify(&opts))??;
    print!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::PropertyFailure)
    }
}

fn run_args(args: &Args) -> Result<(), CliError> {
    let spec = args.to_spec()?;
    if args.verify {
        return run_verify(args, &spec);
    }
    let rows = in_pool(spec.workers, || run_experiment(&spec))??;
    output::write_csv_file(&spec.out, &rows)?;
    if let Some(path) = &spec.plot_script {
        std::fs::write(path, output::plot_script(&spec.out, &rows))
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    println!("{}: {} rows -> {}", spec.scenario, rows.len(), spec.out.display());
    Ok(())
}

/// Parses `argv`, runs, and returns the process exit code:
/// 0 on success, 1 on runtime or property failure, 2 on usage errors.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_args(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(extra: &[&str]) -> Args {
        Args::try_parse_from(std::iter::once("cdd").chain(extra.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(&path, "users = 3\ntrials = 50\nseed = 4\n").unwrap();
        let args = parse(&["--config", path.to_str().unwrap(), "--trials", "80", "--snr-db", "-10:0:5"]);
        let spec = args.to_spec().unwrap();
        assert_eq!((spec.users, spec.trials(), spec.seed()), (3, 80, 4));
        assert_eq!(spec.snr_grid().points(), &[-10.0, -5.0, 0.0]);
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(main_with_args(["cdd", "--users", "zero"]), 2);
        assert_eq!(main_with_args(["cdd", "--scenario", "figure9"]), 2);
        assert_eq!(main_with_args(["cdd", "--no-such-flag"]), 2);
        assert_eq!(main_with_args(["cdd", "--config", "/nonexistent/file"]), 2);
    }
}
