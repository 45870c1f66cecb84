use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use selstbc_cli::check;
use selstbc_cli::compare::{compare_report, CompareOptions};
use selstbc_cli::config::{parse_settings, RunSettings, RunSpec};
use selstbc_cli::presets::Preset;
use selstbc_cli::sweep::{read_csv, run_sweep, write_csv, SweepOptions};
use selstbc_cli::{CliError, CliResult};

/// Outage and error-rate sweeps for TAS/STBC and joint TRAS/STBC with
/// feedback errors.
#[derive(Parser)]
#[command(name = "selstbc", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analytic sweep.
    Analyze(RunArgs),
    /// Analytic sweep plus Monte Carlo columns.
    Simulate(RunArgs),
    /// Analytic sweep plus the high-SNR asymptote.
    Asymptote(RunArgs),
    /// Sweep for one of the figure presets (fig2 ... fig7).
    Figure {
        name: String,
        /// Add Monte Carlo columns.
        #[arg(long)]
        simulate: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Agreement and gap report for a sweep CSV.
    Compare {
        csv: PathBuf,
        /// Metric levels for the gap table (repeatable).
        #[arg(long = "level", default_values_t = vec![1e-5])]
        levels: Vec<f64>,
        #[arg(long, default_value = "es")]
        snr_axis: String,
    },
    /// Run the acceptance criteria; exit code 3 when any fails.
    Check {
        /// Criterion numbers to run (repeatable); all by default.
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// Key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// joint or tas.
    #[arg(long)]
    scheme: Option<String>,
    /// Transmit antennas (repeatable).
    #[arg(long, value_delimiter = ',')]
    nt: Vec<String>,
    /// Selected antennas; must match the code.
    #[arg(long)]
    ns: Option<String>,
    /// Receive antennas (repeatable).
    #[arg(long, value_delimiter = ',')]
    nr: Vec<String>,
    /// Nakagami m (decimal or a/b); m >= 1/2 and m·g must be an integer.
    #[arg(long)]
    m: Option<String>,
    /// g2 or g3.
    #[arg(long)]
    code: Option<String>,
    /// STBC rate R_s (default 1 for g2, 1/2 for g3).
    #[arg(long)]
    code_rate: Option<String>,
    /// bpsk|cbfsk|ncbfsk|dbpsk|qpsk|mpsk:M|mpam:M|mqam:M
    #[arg(long = "mod")]
    modulation: Option<String>,
    /// Spectral efficiency R for outage sweeps.
    #[arg(long)]
    rate: Option<String>,
    /// Feedback bit error probability (repeatable).
    #[arg(long, value_delimiter = ',')]
    pe: Vec<String>,
    /// start:step:stop in dB, inclusive.
    #[arg(long)]
    snr: Option<String>,
    /// es (Es/N0, default) or eb (Eb/N0).
    #[arg(long)]
    snr_axis: Option<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<String>,
    /// Base seed; each point derives its own.
    #[arg(long)]
    seed: Option<String>,
    /// paper or bit-exact feedback draws.
    #[arg(long)]
    feedback_mode: Option<String>,
    /// model or physical receive selection under wrong feedback.
    #[arg(long)]
    receive_mode: Option<String>,
    /// natural or perm=w0,w1,...
    #[arg(long)]
    mapping: Option<String>,
    /// paper or bit-exact wrong-subset weights.
    #[arg(long)]
    mixing: Option<String>,
    /// Also fill the asymptote column.
    #[arg(long)]
    asymptote: bool,
    /// CSV destination (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn settings(&self) -> CliResult<RunSettings> {
        let mut s = RunSettings::default();
        let mut errs = Vec::new();
        let mut put = |key: &str, v: &str| {
            if let Err(e) = s.set(key, v) {
                errs.push(format!("--{key}: {e}"));
            }
        };
        let singles = [
            ("scheme", &self.scheme),
            ("ns", &self.ns),
            ("m", &self.m),
            ("code", &self.code),
            ("code-rate", &self.code_rate),
            ("mod", &self.modulation),
            ("rate", &self.rate),
            ("snr", &self.snr),
            ("snr-axis", &self.snr_axis),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("feedback-mode", &self.feedback_mode),
            ("receive-mode", &self.receive_mode),
            ("mapping", &self.mapping),
            ("mixing", &self.mixing),
        ];
        for (k, v) in singles {
            if let Some(v) = v {
                put(k, v);
            }
        }
        for (k, list) in [("nt", &self.nt), ("nr", &self.nr), ("pe", &self.pe)] {
            for v in list {
                put(k, v);
            }
        }
        if !errs.is_empty() {
            return Err(CliError::Config(errs));
        }
        s.out = self.out.clone();
        Ok(s)
    }

    fn resolve(&self, base: RunSettings) -> CliResult<RunSpec> {
        let file = match &self.config {
            Some(p) => parse_settings(&std::fs::read_to_string(p)?)?,
            None => RunSettings::default(),
        };
        base.overlay(file).overlay(self.settings()?).validate()
    }
}

fn emit(spec: &RunSpec, opts: SweepOptions) -> CliResult<()> {
    let rows = run_sweep(spec, opts)?;
    match &spec.out {
        Some(p) => write_csv(&rows, BufWriter::new(File::create(p)?)),
        None => write_csv(&rows, io::stdout().lock()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Cmd::Analyze(a) => {
            let opts = SweepOptions { simulate: false, asymptote: a.asymptote };
            emit(&a.resolve(RunSettings::default())?, opts)
        }
        Cmd::Simulate(a) => {
            let opts = SweepOptions { simulate: true, asymptote: a.asymptote };
            emit(&a.resolve(RunSettings::default())?, opts)
        }
        Cmd::Asymptote(a) => emit(&a.resolve(RunSettings::default())?, SweepOptions { simulate: false, asymptote: true }),
        Cmd::Figure { name, simulate, run } => {
            let preset: Preset = name.parse()?;
            let opts = SweepOptions { simulate, asymptote: run.asymptote };
            emit(&run.resolve(preset.settings())?, opts)
        }
        Cmd::Compare { csv, levels, snr_axis } => {
            let rows = read_csv(File::open(&csv)?)?;
            let opts = CompareOptions {
                levels,
                snr_axis: snr_axis.parse().map_err(CliError::config)?,
            };
            let report = compare_report(&rows, &opts)?;
            write!(io::stdout().lock(), "{report}")?;
            Ok(())
        }
        Cmd::Check { criteria } => {
            let exe = std::env::current_exe()?;
            let mut failed = Vec::new();
            for r in check::run(&criteria, &exe) {
                println!("{r}");
                if !r.passed {
                    failed.push(r.id.to_string());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Check(format!("criteria {} failed", failed.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selstbc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
