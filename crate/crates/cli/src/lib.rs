//! `mtbi` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 internal error. Failures print one JSON error record to stderr.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mtbi_core::pipeline::DictionaryMode;
use mtbi_core::synthetic::PhantomSpec;
use mtbi_core::MetricId;

use crate::commands::{unix_now, Outputs};
use crate::config::{Approach, RunConfig};
pub use crate::error::{CliError, EXIT_DATA, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "mtbi",
    version,
    about = "MTBI vs control classification from diffusion MRI maps"
)]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "MTBI_THREADS")]
    pub threads: Option<usize>,

    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dataset manifest and every file it references.
    Validate {
        /// Manifest CSV.
        #[arg(long)]
        dataset: PathBuf,
        /// Metrics that must be present (default: all seven).
        #[arg(long, value_delimiter = ',')]
        metrics: Vec<MetricId>,
    },
    /// Generate a synthetic dataset with known class effects.
    Phantom(PhantomArgs),
    /// Write feature tables for the configured approach.
    Features(RunArgs),
    /// Greedy feature selection with cross-validated SVM; writes the trace
    /// and a final model.
    Select(RunArgs),
    /// Per-subject visual-word histograms for plotting.
    Histograms {
        #[command(flatten)]
        run: RunArgs,
        /// Subjects to include (default: all).
        #[arg(long, value_delimiter = ',')]
        subjects: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    MeanDifference,
    Texture,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Phantom spec file (TOML, or JSON if the name ends in `.json`).
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = 20)]
    pub n_per_class: usize,
    /// Class mean separation in voxel-noise standard deviations.
    #[arg(long, default_value_t = 1.5)]
    pub effect: f64,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    LeakageSafe,
    PaperFast,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run config (TOML). Flags below override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub approach: Option<Approach>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, value_enum)]
    pub dictionary_mode: Option<ModeArg>,
    #[arg(long)]
    pub max_features: Option<usize>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(d) = &self.dataset {
            cfg.dataset = Some(d.clone());
        }
        if let Some(a) = self.approach {
            cfg.approach = a;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.folds {
            cfg.cv.folds = k;
        }
        if let Some(m) = self.dictionary_mode {
            cfg.dictionary_mode = match m {
                ModeArg::LeakageSafe => DictionaryMode::LeakageSafe,
                ModeArg::PaperFast => DictionaryMode::PaperFast,
            };
        }
        if self.max_features.is_some() {
            cfg.cv.max_features = self.max_features;
        }
        Ok(cfg)
    }
}

fn load_spec(args: &PhantomArgs) -> Result<PhantomSpec, CliError> {
    let mut spec = match (&args.spec, args.preset) {
        (Some(path), _) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            let parsed = if path.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text).map_err(|e| e.to_string())
            } else {
                toml::from_str(&text).map_err(|e| e.to_string())
            };
            parsed.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(Preset::MeanDifference)) => PhantomSpec::mean_difference(args.n_per_class, args.effect, 0),
        (None, Some(Preset::Texture)) => PhantomSpec::texture(args.n_per_class, 0),
        (None, None) => return Err(CliError::usage("give --spec or --preset")),
    };
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    Ok(spec)
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string(value).expect("serializable"));
}

fn run_config_command(
    args: &RunArgs,
    name: &str,
    body: impl FnOnce(&RunConfig, &mut Outputs) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let started = unix_now();
    let cfg = args.resolve()?;
    let mut out = Outputs::new(&cfg.output)?;
    body(&cfg, &mut out)?;
    let manifest = out.finish(name, Some(cfg.digest()), cfg.seed, started)?;
    log::info!("wrote {}", manifest.display());
    Ok(())
}

/// Runs one parsed command on a pool of the requested size.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Validate { dataset, metrics } => {
            let required = if metrics.is_empty() {
                MetricId::ALL.to_vec()
            } else {
                metrics.clone()
            };
            let m = commands::validate(dataset, &required)?;
            print_json(&serde_json::json!({ "status": "ok", "subjects": m.subjects.len() }));
            Ok(())
        }
        Command::Phantom(args) => {
            let spec = load_spec(args)?;
            let manifest = commands::phantom(&spec, &args.out)?;
            print_json(&serde_json::json!({ "status": "ok", "manifest": manifest }));
            Ok(())
        }
        Command::Features(args) => run_config_command(args, "features", |cfg, out| {
            let p = commands::features(cfg, out)?;
            print_json(&serde_json::json!({ "status": "ok", "subjects": p.dataset.len(), "folds": p.plan.k }));
            Ok(())
        }),
        Command::Select(args) => run_config_command(args, "select", |cfg, out| {
            for s in commands::select(cfg, out)? {
                print_json(&s);
            }
            Ok(())
        }),
        Command::Histograms { run, subjects } => run_config_command(run, "histograms", |cfg, out| {
            let n = commands::histograms(cfg, subjects, out)?;
            print_json(&serde_json::json!({ "status": "ok", "subjects": n }));
            Ok(())
        }),
    })
}

/// Parses `args`, runs, and returns the process exit code. Error records go
/// to stderr as single JSON lines.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let err = CliError::usage(e.to_string());
            eprintln!("{}", serde_json::to_string(&err.record()).expect("serializable"));
            return err.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli))).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(CliError::Internal(msg))
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.record()).expect("serializable"));
            e.exit_code()
        }
    }
}
