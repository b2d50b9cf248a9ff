//! Command-line surface. `run` does all the work so it can be driven from
//! tests; the `chf` binary only forwards arguments and the exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::editdist::pairwise_distances;
use crate::error::{Error, Result};
use crate::eval::{
    folds_csv, hint_quality, hyper_search, quality_csv, summary_csv, synthetic_corpus, to_csv,
    Corpus, LogRange, Scheme, SyntheticConfig,
};
use crate::model;
use crate::policies::{hint, FitOptions, Model, Policy};
use crate::space::{CorrectedSpace, Correction};
use crate::states::State;
use crate::traces::{Dataset, TracePairs};

#[derive(Debug, Parser)]
#[command(
    name = "chf",
    version,
    about = "Next-step edit hints from student traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairwise edit distances between the prepared trace states, as CSV.
    Dist {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a model and write it to a file.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hint for one state, as JSON.
    Hint {
        /// Model file written by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// The state: characters of a string, a JSON array of symbols, or a
        /// bracketed tree such as `a(b,c)`.
        #[arg(long)]
        state: String,
        #[arg(long)]
        policy: Option<Policy>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Leave-one-out prediction errors, tutor-hint agreement and optional
    /// kernel search.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Directory for the report files.
        #[arg(long)]
        out_dir: PathBuf,
        /// Run a random kernel search before evaluating.
        #[arg(long)]
        search: bool,
    },
    /// Two-dimensional coordinates of every prepared state, as CSV.
    Mds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic corpus of noisy goal-directed string traces.
    Synth {
        #[arg(long, default_value_t = 20)]
        traces: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Dataset JSON.
    #[arg(long)]
    data: PathBuf,
    /// Run configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Eigenvalue correction: clip, flip, shift or off.
    #[arg(long)]
    correction: Option<Correction>,
    /// RBF length scale.
    #[arg(long)]
    length_scale: Option<f64>,
    /// Observation noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
    /// Sparsification budget; 0 disables sparsification.
    #[arg(long)]
    m_max: Option<usize>,
    /// Pair each final state with itself.
    #[arg(long)]
    final_self_pairs: Option<bool>,
    /// Drop states that do not approach the final state.
    #[arg(long)]
    goal_filter: Option<bool>,
    /// Seed for the random policy and the kernel search.
    #[arg(long)]
    seed: Option<u64>,
    /// Length-scale search range as `lo,hi`.
    #[arg(long, value_parser = parse_range)]
    psi_range: Option<LogRange>,
    /// Noise search range as `lo,hi`.
    #[arg(long, value_parser = parse_range)]
    sigma_range: Option<LogRange>,
    /// Number of kernel settings tried by the search.
    #[arg(long)]
    repeats: Option<usize>,
}

fn parse_range(s: &str) -> std::result::Result<LogRange, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    LogRange::new(lo, hi).map_err(|e| e.to_string())
}

/// Settings shared by every command, readable from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub fit: FitOptions,
    pub policy: Policy,
    pub seed: u64,
    pub psi_range: LogRange,
    pub sigma_range: LogRange,
    pub repeats: usize,
    /// Schemes reported by `eval`.
    pub schemes: Vec<Scheme>,
    /// Policies scored against tutor hints by `eval`.
    pub policies: Vec<Policy>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fit: FitOptions::default(),
            policy: Policy::Chf,
            seed: 0,
            psi_range: LogRange { lo: 0.1, hi: 10.0 },
            sigma_range: LogRange { lo: 1e-3, hi: 1.0 },
            repeats: 10,
            schemes: Scheme::ALL.to_vec(),
            policies: Policy::ALL.to_vec(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.fit.validate()?;
        Ok(cfg)
    }

    fn from_common(c: &Common) -> Result<Self> {
        let mut cfg = match &c.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = c.correction {
            cfg.fit.correction = v;
        }
        if let Some(v) = c.length_scale {
            cfg.fit.kernel.length_scale = v;
        }
        if let Some(v) = c.noise {
            cfg.fit.kernel.noise_std = v;
        }
        if let Some(v) = c.m_max {
            cfg.fit.m_max = (v > 0).then_some(v);
        }
        if let Some(v) = c.final_self_pairs {
            cfg.fit.final_self_pairs = v;
        }
        if let Some(v) = c.goal_filter {
            cfg.fit.goal_filter = v;
        }
        if let Some(v) = c.seed {
            cfg.seed = v;
        }
        if let Some(v) = c.psi_range {
            cfg.psi_range = v;
        }
        if let Some(v) = c.sigma_range {
            cfg.sigma_range = v;
        }
        if let Some(v) = c.repeats {
            cfg.repeats = v;
        }
        cfg.fit.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

#[derive(Serialize)]
struct MdsRow<'a> {
    state: &'a str,
    trace: &'a str,
    step: usize,
    x: f64,
    y: f64,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Dist { common, out: path } => {
            let cfg = RunConfig::from_common(&common)?;
            let data = Dataset::load(&common.data)?;
            let pairs = TracePairs::build(&cfg.fit.prepare(&data)?, false);
            let d = pairwise_distances(&pairs.states, &cfg.fit.cost)?;
            let ids = pairs.state_ids();
            let mut w = csv::Writer::from_writer(Vec::new());
            let header: Vec<&str> = std::iter::once("")
                .chain(ids.iter().map(String::as_str))
                .collect();
            w.write_record(&header).map_err(csv_error)?;
            for (i, id) in ids.iter().enumerate() {
                let row: Vec<String> = std::iter::once(id.clone())
                    .chain(d.row(i).iter().map(f64::to_string))
                    .collect();
                w.write_record(&row).map_err(csv_error)?;
            }
            let csv = String::from_utf8(
                w.into_inner()
                    .map_err(|e| csv_error(e.into_error().into()))?,
            )
            .expect("CSV of UTF-8 fields is UTF-8");
            emit(&csv, path.as_deref(), out)
        }
        Command::Fit { common, out: path } => {
            let cfg = RunConfig::from_common(&common)?;
            let data = Dataset::load(&common.data)?;
            let m = Model::fit(&data, &cfg.fit)?;
            model::save(&m, &data.digest(), &path)
        }
        Command::Hint {
            model: path,
            state,
            policy,
            seed,
            config,
        } => {
            let cfg = match &config {
                Some(p) => RunConfig::load(p)?,
                None => RunConfig::default(),
            };
            let loaded = model::load(&path)?;
            let x = State::parse(loaded.model.kind(), &state)?;
            let r = hint(
                &loaded.model,
                policy.unwrap_or(cfg.policy),
                &x,
                seed.unwrap_or(cfg.seed),
            )?;
            let mut text = r.to_json();
            text.push('\n');
            emit(&text, None, out)
        }
        Command::Eval {
            common,
            out_dir,
            search,
        } => {
            let mut cfg = RunConfig::from_common(&common)?;
            let data = Dataset::load(&common.data)?;
            std::fs::create_dir_all(&out_dir)?;
            let corpus = Corpus::new(&data, &cfg.fit)?;
            if search {
                let r = hyper_search(
                    &corpus,
                    cfg.psi_range,
                    cfg.sigma_range,
                    cfg.repeats,
                    cfg.seed,
                )?;
                std::fs::write(out_dir.join("search.json"), r.to_json() + "\n")?;
                cfg.fit.kernel = r.best;
            }
            let reports: Vec<_> = cfg
                .schemes
                .iter()
                .map(|&s| corpus.loo_rmse_with(s, cfg.fit.kernel))
                .collect();
            let json = serde_json::to_string_pretty(&reports)?;
            std::fs::write(out_dir.join("rmse.json"), json + "\n")?;
            std::fs::write(out_dir.join("rmse_folds.csv"), folds_csv(&reports))?;
            std::fs::write(out_dir.join("rmse_summary.csv"), summary_csv(&reports))?;
            if !data.tutor_hints.is_empty() {
                let quality: Vec<_> = cfg
                    .policies
                    .iter()
                    .map(|&p| hint_quality(&data, p, &cfg.fit, cfg.seed))
                    .collect::<Result<_>>()?;
                std::fs::write(
                    out_dir.join("quality.json"),
                    serde_json::to_string_pretty(&quality)? + "\n",
                )?;
                std::fs::write(out_dir.join("quality_states.csv"), quality_csv(&quality))?;
            }
            Ok(())
        }
        Command::Mds { common, out: path } => {
            let cfg = RunConfig::from_common(&common)?;
            let data = Dataset::load(&common.data)?;
            let pairs = TracePairs::build(&cfg.fit.prepare(&data)?, false);
            if pairs.states.is_empty() {
                return Err(Error::Data("the dataset has no successful traces".into()));
            }
            let d = pairwise_distances(&pairs.states, &cfg.fit.cost)?;
            let space = CorrectedSpace::from_distances(&d, cfg.fit.correction)?;
            let coords = space.coordinates(2);
            let ids = pairs.state_ids();
            let csv = to_csv(coords.iter().enumerate().map(|(i, c)| {
                let t = pairs.trace_of[i];
                MdsRow {
                    state: &ids[i],
                    trace: &pairs.trace_ids[t],
                    step: i - pairs.trace_ranges[t].start,
                    x: c.first().copied().unwrap_or(0.0),
                    y: c.get(1).copied().unwrap_or(0.0),
                }
            }));
            emit(&csv, path.as_deref(), out)
        }
        Command::Synth {
            traces,
            seed,
            out: path,
        } => {
            let data = synthetic_corpus(&SyntheticConfig {
                traces,
                seed,
                ..SyntheticConfig::default()
            })?;
            emit(&(data.to_json() + "\n"), path.as_deref(), out)
        }
    }
}
