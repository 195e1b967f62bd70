//! Command-line surface: `compare`, `calibrate`, `evaluate` and `synth`.
//!
//! Exit status is 0 on success, 1 on a validation or I/O failure and 2 on
//! a usage error. Data goes to the output stream, diagnostics to the error
//! stream.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::num::NonZeroU32;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzyface::formats::{face_to_json, load_face, to_json, FormatError, Manifest, ManifestPair, ModelFile};
use fuzzyface::synthbench::{Label, ScoredPair};
use fuzzyface::{
    compare, generate_population, AlphaMode, Calibration, Config, EvalReport, Kernel, PopulationConfig, Report, Sample,
};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] fuzzyface::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "fuzzyface", version, about = "Fuzzy-entropy face similarity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare two face files and print the match report.
    Compare(CompareArgs),
    /// Train the mixing constant K over the genuine pairs of a manifest, in order.
    Calibrate(CalibrateArgs),
    /// Score every manifest pair and write an evaluation report.
    Evaluate(EvaluateArgs),
    /// Write a synthetic population and its all-pairs manifest.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Bell,
    Triangle,
    Trapezoid,
}

impl From<KernelArg> for Kernel {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Bell => Kernel::default_bell(),
            KernelArg::Triangle => Kernel::default_triangle(),
            KernelArg::Trapezoid => Kernel::default_trapezoid(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlphaModeArg {
    Literal,
    Complement,
}

impl From<AlphaModeArg> for AlphaMode {
    fn from(m: AlphaModeArg) -> Self {
        match m {
            AlphaModeArg::Literal => AlphaMode::Literal,
            AlphaModeArg::Complement => AlphaMode::Complement,
        }
    }
}

#[derive(Debug, Args)]
struct ScoringArgs {
    /// Silhouette overlap mode.
    #[arg(long, value_enum)]
    alpha_mode: Option<AlphaModeArg>,
    /// Membership kernel applied to each feature entropy.
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Raster pixels per canvas pixel (default: longer side >= 512 px).
    #[arg(long = "raster", value_name = "N")]
    raster: Option<NonZeroU32>,
}

impl ScoringArgs {
    /// Flags override the model's settings, which override the defaults.
    fn config(&self, model: Option<&ModelFile>, k: Option<f64>) -> Config {
        let base = Config::default();
        let k = k.or(model.map(|m| m.k)).unwrap_or(base.k);
        let alpha_mode = self.alpha_mode.map(AlphaMode::from).or(model.map(|m| m.alpha_mode)).unwrap_or(base.alpha_mode);
        let kernel = self.kernel.map(Kernel::from).or(model.map(|m| m.kernel)).unwrap_or(base.kernel);
        base.with_k(k)
            .with_alpha_mode(alpha_mode)
            .with_kernel(kernel)
            .with_resolution_scale(self.raster)
    }
}

#[derive(Debug, Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Mixing constant K in [0, 1].
    #[arg(long, conflicts_with = "model")]
    k: Option<f64>,
    /// Calibrated model file supplying K.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Print the report as JSON (default).
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Print the report as a table.
    #[arg(long)]
    text: bool,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    manifest: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    manifest: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Accept threshold on delta, in [0, 100].
    #[arg(long)]
    threshold: f64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Also write (pair, label, delta) rows as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    identities: usize,
    #[arg(long)]
    captures: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = PopulationConfig::default().identity_sigma)]
    identity_sigma: f64,
    #[arg(long, default_value_t = PopulationConfig::default().capture_sigma)]
    capture_sigma: f64,
    #[arg(long, default_value_t = PopulationConfig::default().outline_sigma)]
    outline_sigma: f64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Compare(args) => cmd_compare(args, out),
        Command::Calibrate(args) => cmd_calibrate(args, err),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn cmd_compare(args: CompareArgs, out: &mut dyn Write) -> CliResult<()> {
    let model = args.model.as_deref().map(ModelFile::load).transpose()?;
    let config = args.scoring.config(model.as_ref(), args.k);
    let a = load_face(&args.a)?;
    let b = load_face(&args.b)?;
    let report = compare(&a, &b, &config)?;
    let text = if args.text { render_text(&report) } else { to_json(&report) };
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))?;
    Ok(())
}

fn render_text(r: &Report) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "{} vs {}", r.a_id, r.b_id);
    let _ = writeln!(s, "{:<18} {:>12} {:>12} {:>10} {:>10}", "feature", "a", "b", "H", "mu");
    for f in &r.features {
        let _ = writeln!(
            s,
            "{:<18} {:>12.4} {:>12.4} {:>10.6} {:>10.6}",
            f.name, f.a, f.b, f.entropy, f.membership
        );
    }
    let _ = writeln!(s, "n      {}", r.n);
    let _ = writeln!(s, "beta   {:.6}", r.beta);
    let _ = writeln!(s, "alpha  {:.6} ({})", r.alpha, r.alpha_mode);
    let _ = writeln!(s, "K      {:.6}", r.k);
    let _ = writeln!(s, "delta  {:.4}", r.delta);
    s
}

fn cmd_calibrate(args: CalibrateArgs, err: &mut dyn Write) -> CliResult<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let config = args.scoring.config(None, None);
    let genuine: Vec<&ManifestPair> = manifest.pairs.iter().filter(|p| p.label == Label::Genuine).collect();
    let ignored = manifest.pairs.len() - genuine.len();
    if ignored > 0 {
        let _ = writeln!(err, "warning: ignoring {ignored} impostor pair(s)");
    }
    if genuine.is_empty() {
        return Err(CliError::Invalid("no genuine pairs in manifest".into()));
    }
    let mut state = Calibration::new();
    for pair in genuine {
        let report = compare(&load_face(&pair.a)?, &load_face(&pair.b)?, &config)?;
        state.update(Sample::new(report.beta, report.alpha)?);
    }
    if state.skipped > 0 {
        let _ = writeln!(err, "warning: skipped {} degenerate pair(s) with beta <= alpha", state.skipped);
    }
    if !state.initialized {
        return Err(CliError::Invalid("every genuine pair was degenerate (beta <= alpha)".into()));
    }
    let model = ModelFile::from_state(&state, config.alpha_mode, config.kernel)?;
    write_atomic(&args.output, to_json(&model).as_bytes())
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let manifest = Manifest::load(&args.manifest)?;
    let model = ModelFile::load(&args.model)?;
    let config = args.scoring.config(Some(&model), None);
    let mut pairs = Vec::with_capacity(manifest.pairs.len());
    for pair in &manifest.pairs {
        let a = load_face(&pair.a)?;
        let b = load_face(&pair.b)?;
        let report = compare(&a, &b, &config)?;
        pairs.push(ScoredPair {
            a: a.id().to_string(),
            b: b.id().to_string(),
            label: pair.label,
            delta: report.delta,
        });
    }
    let report = EvalReport::from_pairs(pairs, args.threshold)?;
    if let Some(csv_path) = &args.csv {
        write_atomic(csv_path, &scores_csv(&report)?)?;
    }
    write_atomic(&args.output, to_json(&report).as_bytes())
}

fn scores_csv(report: &EvalReport) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Invalid(format!("csv: {e}"));
    w.write_record(["pair", "label", "delta"]).map_err(csv_err)?;
    for p in &report.pairs {
        w.write_record([format!("{}:{}", p.a, p.b), p.label.to_string(), p.delta.to_string()])
            .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Invalid(format!("csv: {e}")))
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    let config = PopulationConfig {
        identity_count: args.identities,
        captures_per_identity: args.captures,
        identity_sigma: args.identity_sigma,
        capture_sigma: args.capture_sigma,
        outline_sigma: args.outline_sigma,
        seed: args.seed,
    };
    let population = generate_population(&config)?;
    let faces_dir = args.output.join("faces");
    fs::create_dir_all(&faces_dir).map_err(io_err(&faces_dir))?;
    let mut rel = Vec::with_capacity(population.len());
    for lf in &population {
        let name = format!("{}.json", lf.face.id());
        write_atomic(&faces_dir.join(&name), face_to_json(&lf.face).as_bytes())?;
        rel.push(Path::new("faces").join(name));
    }
    let mut pairs = Vec::new();
    for i in 0..population.len() {
        for j in (i + 1)..population.len() {
            pairs.push(ManifestPair {
                a: rel[i].clone(),
                b: rel[j].clone(),
                label: if population[i].identity == population[j].identity {
                    Label::Genuine
                } else {
                    Label::Impostor
                },
            });
        }
    }
    write_atomic(&args.output.join("manifest.json"), to_json(&Manifest::new(pairs)).as_bytes())
}
