use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use odia_core::codebook::{grassmannian_codebook, packing_quality, random_codebook, save_codebook};
use odia_core::harness::output::render;
use odia_core::harness::presets::{preset, preset_summary, PRESETS};
use odia_core::harness::{grid_search_se_odia, run_study, run_sweep, ExperimentConfig, OutputFormat, StudyKind};
use odia_core::{CodebookKind, Error, Rng};

#[derive(Parser, Debug)]
#[command(
    name = "odia",
    version,
    about = "Monte Carlo simulator for opportunistic downlink interference alignment"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Trials (or samples for tail/chi2) per point; overrides the config.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Worker threads; 0 uses every core. Never changes results.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the sweep described by a config file or preset name.
    Run { config: String },
    /// Codebook utilities.
    Codebook {
        #[command(subcommand)]
        command: CodebookCommand,
    },
    /// Statistical checks of the scheduler and feedback models.
    Validate { study: Study, config: String },
    /// Search the SE-ODIA threshold grid of a config.
    Gridsearch { config: String },
    /// Shipped presets.
    Presets {
        #[command(subcommand)]
        command: PresetsCommand,
    },
}

#[derive(Subcommand, Debug)]
enum CodebookCommand {
    /// Generate a codebook and write it in the plain-text format.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum, default_value_t = Kind::Grassmannian)]
        kind: Kind,
        #[arg(long, default_value_t = odia_core::codebook::DEFAULT_GRASSMANNIAN_ITERATIONS)]
        iters: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Random,
    Grassmannian,
}

#[derive(Subcommand, Debug)]
enum PresetsCommand {
    /// Name and summary of every preset.
    List,
    /// Print one preset.
    Show { name: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Study {
    Tail,
    Chi2,
    Decay,
    Eligibility,
}

impl From<Study> for StudyKind {
    fn from(s: Study) -> Self {
        match s {
            Study::Tail => StudyKind::Tail,
            Study::Chi2 => StudyKind::Chi2,
            Study::Decay => StudyKind::Decay,
            Study::Eligibility => StudyKind::Eligibility,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

/// Key that `--trials` overrides for each command.
fn trials_key(command: &Command) -> &'static str {
    match command {
        Command::Gridsearch { .. } => "gridsearch.trials",
        Command::Validate {
            study: Study::Tail | Study::Chi2,
            ..
        } => "validate.samples",
        Command::Validate {
            study: Study::Eligibility,
            ..
        } => "validate.trials",
        _ => "trials",
    }
}

fn load_config(source: &str, global: &GlobalArgs, trials_key: &str) -> Result<ExperimentConfig, Error> {
    let mut overrides: Vec<(&str, String)> = Vec::new();
    if let Some(seed) = global.seed {
        overrides.push(("seed", seed.to_string()));
    }
    if let Some(trials) = global.trials {
        overrides.push((trials_key, trials.to_string()));
    }
    if let Some(workers) = global.workers {
        overrides.push(("workers", workers.to_string()));
    }
    let path = Path::new(source);
    if path.is_file() {
        return ExperimentConfig::load(path, &overrides);
    }
    match preset(source) {
        Some(text) => ExperimentConfig::from_text_with(text, |name| std::env::var(name).ok(), &overrides),
        None => Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such config file or preset"),
        }),
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| Error::Io {
                    path: parent.to_path_buf(),
                    source: e,
                })?;
            }
            std::fs::write(path, text).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let global = &cli.global;
    let format = OutputFormat::from(global.format);
    let key = trials_key(&cli.command);
    match &cli.command {
        Command::Run { config } => {
            let cfg = load_config(config, global, key)?;
            let result = run_sweep(&cfg)?;
            if result.points.iter().any(|p| p.baseline_zero_forcing) {
                eprintln!("note: max_snr and min_inr rows use zero-forcing precoding on their own effective channels");
            }
            write_output(&render(&result, format)?, global.out.as_deref())
        }
        Command::Codebook {
            command: CodebookCommand::Gen { dim, size, kind, iters },
        } => {
            let out = global
                .out
                .as_deref()
                .ok_or_else(|| Error::Config("codebook gen needs --out".into()))?;
            if *dim == 0 || *size == 0 {
                return Err(Error::Config("codebook dimension and size must be positive".into()));
            }
            let mut rng = Rng::new(global.seed.unwrap_or(1));
            let cb = match kind {
                Kind::Random => random_codebook(&mut rng, *dim, *size),
                Kind::Grassmannian => grassmannian_codebook(&mut rng, *dim, *size, *iters).0,
            };
            save_codebook(&cb, out)?;
            let q = packing_quality(&cb);
            eprintln!(
                "{} codebook: dim {dim}, size {size}, min chordal^2 {:.6}, bound {:.6}",
                if cb.kind() == CodebookKind::Random {
                    "random"
                } else {
                    "grassmannian"
                },
                q.min_pairwise_chordal_sq,
                q.bound()
            );
            Ok(())
        }
        Command::Validate { study, config } => {
            let cfg = load_config(config, global, key)?;
            let report = run_study((*study).into(), &cfg)?;
            let text = match format {
                OutputFormat::Csv => report.to_csv(),
                OutputFormat::Json => report.to_json()? + "\n",
            };
            write_output(&text, global.out.as_deref())
        }
        Command::Gridsearch { config } => {
            let cfg = load_config(config, global, key)?;
            let r = grid_search_se_odia(
                &cfg.network,
                &cfg.grid,
                cfg.tuning_trials,
                cfg.master_seed,
                cfg.outage_policy,
                cfg.workers,
            )?;
            eprintln!(
                "best: eta_I = {}, eta_D = {}, alpha = {} (mean sum-rate {})",
                r.best.eta_i, r.best.eta_d, r.best.alpha, r.best_mean_sum_rate
            );
            let text = match format {
                OutputFormat::Csv => r.to_csv(),
                OutputFormat::Json => r.to_json()? + "\n",
            };
            write_output(&text, global.out.as_deref())
        }
        Command::Presets { command } => match command {
            PresetsCommand::List => {
                let text: String = PRESETS
                    .iter()
                    .map(|(name, body)| format!("{name:<8} {}\n", preset_summary(body)))
                    .collect();
                write_output(&text, global.out.as_deref())
            }
            PresetsCommand::Show { name } => {
                let text = preset(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
                write_output(text, global.out.as_deref())
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
