//! Command-line front end: `classify`, `synth`, `experiment`, `solve` and
//! `replay`.
//!
//! Every command that writes files also writes a JSON [`RunManifest`] holding
//! the fully resolved arguments; `replay` re-runs a manifest and reproduces
//! the same bytes. Exit codes: 0 success, 1 usage or input error, 2 infeasible
//! model.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    harden, transduce_detailed, ClassifierError, EpsilonPolicy, LandmarkPolicy, Mode, ModeConfig,
    Reference,
};
use crate::data::{
    gen_gaussian, gen_halfspace, gen_ring, load_csv, sample_labeled, write_csv, CsvOptions,
    DataError, Dataset,
};
use crate::eval::{
    aggregate, precision_recall, run_sweep, write_aggregate_csv, write_records_csv, EvalError,
    SweepConfig,
};
use crate::features::KernelSpec;
use crate::lp::{self, certify, parse_dump, LpError, LpStatus, SolverOptions};
use crate::numfmt::sig9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("infeasible: phase-one residual {residual}; increase epsilon (--kappa or --epsilon)")]
    Infeasible { residual: f64 },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Classifier(ClassifierError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Infeasible { .. } => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::Infeasible { residual } => CliError::Infeasible { residual },
            other => CliError::Classifier(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "maxprob",
    version,
    about = "Maximal-probability one-class transduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Label every point of a dataset from a labeled class sample.
    Classify(ClassifyArgs),
    /// Write a synthetic dataset with a truth column.
    Synth(SynthArgs),
    /// Sweep labeled-sample sizes over repeated random splits.
    Experiment(ExperimentArgs),
    /// Solve an LP dump and print the solution with its certificate.
    Solve(SolveArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InputArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// The first row is a header.
    #[arg(long)]
    pub has_header: bool,
    /// Zero-based column holding class membership.
    #[arg(long)]
    pub label_col: Option<usize>,
    /// Label value marking a member (default: any nonzero label).
    #[arg(long)]
    pub positive_label: Option<f64>,
}

impl InputArgs {
    fn load(&self) -> Result<Dataset, CliError> {
        let options = CsvOptions {
            has_header: self.has_header,
            label_column: self.label_col,
            positive_label: self.positive_label,
        };
        load_csv(&self.input, &options).map_err(|e| match e {
            DataError::Io(source) => CliError::Io {
                path: self.input.clone(),
                source,
            },
            other => other.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Linear,
    SecondOrder,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelArg {
    Rbf,
    Poly,
    Linear,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Linear)]
    pub mode: ModeArg,
    /// Kernel for `--mode kernel`.
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    pub kernel: KernelArg,
    /// RBF width: `exp(-gamma ‖x - y‖²)`.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Polynomial degree: `(x · y + coef0)^degree`.
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 1.0)]
    pub coef0: f64,
    /// Number of random landmarks (default: every point).
    #[arg(long)]
    pub landmarks: Option<usize>,
    /// Seed for landmark selection (default: `--seed`).
    #[arg(long)]
    pub landmark_seed: Option<u64>,
    /// Per-row epsilon as this many standard errors of the sample mean.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Fixed per-row epsilon; overrides `--kappa`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Hard-label threshold.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Leave labeled points free instead of forcing them to 1.
    #[arg(long)]
    pub no_pin: bool,
    /// Standardize coordinates before building the LP.
    #[arg(long)]
    pub standardize: bool,
}

impl ModelArgs {
    pub fn to_config(&self, seed: u64) -> Result<ModeConfig, CliError> {
        let mode = match self.mode {
            ModeArg::Linear => Mode::Linear,
            ModeArg::SecondOrder => Mode::SecondOrder,
            ModeArg::Kernel => {
                let kernel = match self.kernel {
                    KernelArg::Rbf => KernelSpec::Rbf { gamma: self.gamma },
                    KernelArg::Poly => KernelSpec::Polynomial {
                        degree: self.degree,
                        offset: self.coef0,
                    },
                    KernelArg::Linear => KernelSpec::Linear,
                };
                let landmarks = match self.landmarks {
                    Some(count) => LandmarkPolicy::Random {
                        count,
                        seed: self.landmark_seed.unwrap_or(seed),
                    },
                    None => LandmarkPolicy::All,
                };
                Mode::Kernel { kernel, landmarks }
            }
        };
        let epsilon = match self.epsilon {
            Some(epsilon) => EpsilonPolicy::Fixed { epsilon },
            None => EpsilonPolicy::StandardError { kappa: self.kappa },
        };
        let config = ModeConfig::new(mode)
            .with_epsilon(epsilon)
            .with_threshold(self.threshold)
            .with_pin_labeled(!self.no_pin)
            .with_standardize(self.standardize);
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// File of labeled point indices (whitespace or comma separated, `#` comments).
    #[arg(long, conflicts_with = "l")]
    pub labels: Option<PathBuf>,
    /// Draw this many labeled points from the truth class.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-point output CSV `index,fuzzy,label`.
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the assembled LP as a dump readable by `solve`.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
    /// Manifest path (default: `<output>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Halfspace,
    Gaussian,
    Ring,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    /// Number of class points.
    #[arg(long)]
    pub class: usize,
    /// Number of non-class points.
    #[arg(long)]
    pub other: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample sizes as `start:stop:step` (inclusive) or a comma list.
    #[arg(long, default_value = "25:500:25")]
    pub sizes: String,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Size of the labeling pool (default: a third of the dataset, rounded up).
    #[arg(long)]
    pub train_size: Option<usize>,
    /// Size of the evaluation set (default: every point outside the pool).
    #[arg(long)]
    pub eval_size: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "MAXPROB_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Record solve wall time (makes records non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub aggregate: PathBuf,
    /// Manifest path (default: `<records>.manifest.json`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SolveArgs {
    /// LP dump file.
    #[arg(long)]
    pub input: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = SolverOptions::default().max_iterations)]
    pub max_iterations: usize,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

/// Everything needed to re-run a command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub invocation: Command,
    /// Resolved classifier configuration, including solver tolerances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ModeConfig>,
    /// Resolved sweep settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    fn new(invocation: Command, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            invocation,
            config: None,
            sweep: None,
            outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| io_err(path, source))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|source| io_err(path, source))
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn manifest_path(explicit: &Option<PathBuf>, output: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| io_err(path, source))
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Classify(a) => classify(a),
        Command::Synth(a) => synth(a),
        Command::Experiment(a) => experiment(a),
        Command::Solve(a) => solve(a),
        Command::Replay(a) => {
            let manifest = RunManifest::load(&a.manifest)?;
            if let Command::Replay(_) = manifest.invocation {
                return Err(CliError::Usage("manifest cannot replay a replay".into()));
            }
            execute(&manifest.invocation)
        }
    }
}

fn read_index_file(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| io_err(path, source))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            let idx = tok.parse().map_err(|_| {
                CliError::Usage(format!("{}:{}: bad index {tok:?}", path.display(), n + 1))
            })?;
            out.push(idx);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no labeled indices",
            path.display()
        )));
    }
    Ok(out)
}

fn classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let dataset = args.input.load()?;
    let config = args.model.to_config(args.seed)?;
    let labeled = match (&args.labels, args.l) {
        (Some(path), _) => read_index_file(path)?,
        (None, Some(l)) => {
            let pool = dataset
                .class_indices()
                .ok_or_else(|| CliError::Usage("--l needs a truth column (--label-col)".into()))?;
            sample_labeled(&pool, l, args.seed)?
        }
        (None, None) => return Err(CliError::Usage("give --labels or --l".into())),
    };

    let t = transduce_detailed(&dataset, Reference::Labeled(&labeled), &config)?;
    let hard = harden(&t.labeling, config.threshold);

    let mut w = create(&args.output)?;
    let written: std::io::Result<()> = (|| {
        writeln!(w, "index,fuzzy,label")?;
        for (i, (&v, &h)) in t.labeling.values.iter().zip(&hard).enumerate() {
            writeln!(w, "{i},{},{}", sig9(v), u8::from(h))?;
        }
        w.flush()
    })();
    written.map_err(|source| io_err(&args.output, source))?;

    let mut outputs = vec![args.output.clone()];
    if let Some(path) = &args.dump_lp {
        std::fs::write(path, lp::write_dump(&t.built.problem))
            .map_err(|source| io_err(path, source))?;
        outputs.push(path.clone());
    }

    let members = hard.iter().filter(|&&h| h).count();
    eprintln!(
        "objective {}  members {members}/{}  iterations {}",
        sig9(t.labeling.objective),
        dataset.len(),
        t.solution.iterations
    );
    if let Some(truth) = dataset.truth() {
        let pr = precision_recall(&hard, truth, None)?;
        eprintln!(
            "precision {}  recall {}",
            sig9(pr.precision),
            sig9(pr.recall)
        );
    }

    let mut manifest = RunManifest::new(Command::Classify(args.clone()), outputs);
    manifest.config = Some(config);
    manifest.write(&manifest_path(&args.manifest, &args.output))
}

fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let dataset = match args.generator {
        Generator::Halfspace => gen_halfspace(args.seed, args.class, args.other, args.dim)?,
        Generator::Gaussian => gen_gaussian(args.seed, args.class, args.other, args.dim)?,
        Generator::Ring => gen_ring(args.seed, args.class, args.other, args.dim)?,
    };
    let w = create(&args.output)?;
    write_csv(&dataset, w)?;
    let manifest = RunManifest::new(Command::Synth(args.clone()), vec![args.output.clone()]);
    manifest.write(&manifest_path(&args.manifest, &args.output))
}

/// `start:stop:step` (stop inclusive) or `a,b,c`.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad --sizes {spec:?}"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let sizes: Vec<usize> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step == 0 || start > stop {
            return Err(bad());
        }
        (start..=stop).step_by(step).collect()
    } else {
        spec.split(',').map(num).collect::<Result<_, _>>()?
    };
    if sizes.is_empty() || sizes.contains(&0) || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad());
    }
    Ok(sizes)
}

fn experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let dataset = args.input.load()?;
    if dataset.truth().is_none() {
        return Err(CliError::Usage(
            "experiment needs a truth column (--label-col)".into(),
        ));
    }
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    let config = SweepConfig {
        sizes: parse_sizes(&args.sizes)?,
        repetitions: args.reps,
        base_seed: args.seed,
        classifier: args.model.to_config(args.seed)?,
        train_size: args.train_size.unwrap_or(dataset.len().div_ceil(3)),
        eval_size: args.eval_size,
        record_timing: args.timing,
    };
    let records = run_sweep(&dataset, &config, args.threads)?;
    let rows = aggregate(&records)?;

    write_records_csv(&records, create(&args.records)?)
        .map_err(|source| io_err(&args.records, source))?;
    write_aggregate_csv(&rows, create(&args.aggregate)?)
        .map_err(|source| io_err(&args.aggregate, source))?;

    let failed = records.iter().filter(|r| !r.is_ok()).count();
    eprintln!(
        "{} runs over {} sizes, {failed} failed",
        records.len(),
        config.sizes.len()
    );

    let mut manifest = RunManifest::new(
        Command::Experiment(args.clone()),
        vec![args.records.clone(), args.aggregate.clone()],
    );
    manifest.sweep = Some(config);
    manifest.write(&manifest_path(&args.manifest, &args.records))
}

fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(&args.input).map_err(|source| io_err(&args.input, source))?;
    let problem = parse_dump(&text)?;
    let options = SolverOptions {
        max_iterations: args.max_iterations,
        ..SolverOptions::default()
    };
    let solution = lp::solve(&problem, &options);

    let mut report = String::new();
    let join = |v: &[f64]| v.iter().map(|&x| sig9(x)).collect::<Vec<_>>().join(" ");
    report.push_str(&format!("status {}\n", solution.status));
    report.push_str(&format!("iterations {}\n", solution.iterations));
    if solution.is_optimal() {
        let cert = certify(&problem, &solution, &options);
        report.push_str(&format!("objective {}\n", sig9(solution.objective_value)));
        report.push_str(&format!("values {}\n", join(&solution.values)));
        report.push_str(&format!("row_duals {}\n", join(&solution.row_duals)));
        report.push_str(&format!("fractional {}\n", cert.fractional_count));
        for check in cert.checks() {
            report.push_str(&format!(
                "check {} {} {}\n",
                check.name,
                if check.passed { "pass" } else { "fail" },
                sig9(check.worst)
            ));
        }
    } else if solution.status == LpStatus::Infeasible {
        report.push_str(&format!("residual {}\n", sig9(solution.infeasibility)));
    }

    match &args.output {
        Some(path) => {
            std::fs::write(path, &report).map_err(|source| io_err(path, source))?;
            let manifest = RunManifest::new(Command::Solve(args.clone()), vec![path.clone()]);
            manifest.write(&manifest_path(&args.manifest, path))?;
        }
        None => print!("{report}"),
    }
    match solution.status {
        LpStatus::Optimal => Ok(()),
        LpStatus::Infeasible => Err(CliError::Infeasible {
            residual: solution.infeasibility,
        }),
        other => Err(CliError::Usage(format!("solver stopped: {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_sizes("25:100:25").unwrap(), vec![25, 50, 75, 100]);
        assert_eq!(parse_sizes("50:100:50").unwrap(), vec![50, 100]);
        assert_eq!(parse_sizes("5,7").unwrap(), vec![5, 7]);
        assert_eq!(parse_sizes("25:500:25").unwrap().len(), 20);
        for bad in ["", "0:10:5", "10:5:1", "1:2", "7,5", "a:b:c", "1:5:0"] {
            assert!(parse_sizes(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn model_args_resolve() {
        let cli = Cli::try_parse_from([
            "maxprob",
            "classify",
            "--input",
            "d.csv",
            "--output",
            "o.csv",
            "--l",
            "5",
            "--mode",
            "kernel",
            "--landmarks",
            "20",
            "--epsilon",
            "0.01",
        ])
        .unwrap();
        let Command::Classify(a) = cli.command else {
            panic!("wrong subcommand")
        };
        let cfg = a.model.to_config(9).unwrap();
        assert_eq!(cfg.epsilon, EpsilonPolicy::Fixed { epsilon: 0.01 });
        assert_eq!(
            cfg.mode,
            Mode::Kernel {
                kernel: KernelSpec::Rbf { gamma: 1.0 },
                landmarks: LandmarkPolicy::Random { count: 20, seed: 9 },
            }
        );
    }

    #[test]
    fn manifest_round_trips() {
        let cli = Cli::try_parse_from([
            "maxprob", "synth", "ring", "--class", "4", "--other", "6", "--output", "r.csv",
        ])
        .unwrap();
        let m = RunManifest::new(cli.command, vec!["r.csv".into()]);
        let text = serde_json::to_string(&m).unwrap();
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!(text.contains("\"command\":\"synth\""));
    }

    #[test]
    fn default_manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(&None, Path::new("out/x.csv")),
            PathBuf::from("out/x.csv.manifest.json")
        );
    }
}
