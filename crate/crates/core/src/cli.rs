//! Command-line driver. `run` returns the process exit code: 0 ok, 1 partial
//! (some records failed), 2 input error, 3 internal error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::applications::{
    rank_poses, score_mutation_pool, single_point_mutants, success_rate, PoseCandidate, PoseRanking, PreferenceMode,
    DOCKING_SUCCESS_RMSD,
};
use crate::calibrate::{fit_calibration, Calibration, CalibrationFile, Loss};
use crate::cycle::{dg_estimate, DesignScope, EnergyEstimate, Estimator};
use crate::error::Error;
use crate::eval::{
    csv_reader, load_dataset, run_benchmark, score_records, BenchmarkConfig, BenchmarkReport, Dataset, MetricsReport,
    StructureStore,
};
use crate::fixtures::write_fixture_set;
use crate::scorer::{OrderPolicy, ScorerHandle};
use crate::structure::{read_pdb_file, PartitionSpec, SiteRef};

pub const TOOL: &str = "bacycle";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bacycle",
    version,
    about = "Binding ΔΔG / ΔG estimates from inverse-folding likelihoods"
)]
pub struct Cli {
    /// Print errors as plain text instead of JSON.
    #[arg(long, global = true)]
    pub human_errors: bool,

    /// Worker threads (0 = all cores). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ΔΔG for every record of a batch CSV.
    Ddg(DdgArgs),
    /// Approximate ΔG of a complex.
    Dg(DgArgs),
    /// Cross-validated benchmark on a labeled dataset.
    Benchmark(BenchmarkArgs),
    /// Fit kT and bias to labels.
    Calibrate(CalibrateArgs),
    /// Rank docking poses by estimated ΔG.
    Rank(RankArgs),
    /// Preference and normalized perplexity of single-point mutants.
    Prefer(PreferArgs),
    /// Write synthetic structures, datasets and an archive.
    ExportFixtures(ExportArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScorerArgs {
    /// Log-probability archive (JSONL); the builtin scorer is used otherwise.
    #[arg(long)]
    pub archive: Option<PathBuf>,

    /// Number of decoding orders averaged per sequence.
    #[arg(long, default_value_t = 1)]
    pub orders: usize,

    /// Seed for decoding orders and fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Use every order the archive holds for a task.
    #[arg(long, requires = "archive", conflicts_with = "orders")]
    pub archived_orders: bool,
}

impl ScorerArgs {
    fn scorer(&self) -> Result<ScorerHandle, CliError> {
        match &self.archive {
            Some(p) => ScorerHandle::load_archive(p).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
            None => Ok(ScorerHandle::builtin()),
        }
    }

    fn policy(&self) -> Result<OrderPolicy, CliError> {
        if self.archived_orders {
            return Ok(OrderPolicy::Archived);
        }
        if self.orders == 1 {
            return Ok(OrderPolicy::Canonical);
        }
        OrderPolicy::random(self.orders, self.seed).map_err(CliError::from)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibArgs {
    /// Energy scale in kcal/mol [default: 1].
    #[arg(long = "kt")]
    pub kt: Option<f64>,

    /// Additive offset in kcal/mol [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub bias: Option<f64>,

    /// Calibration JSON written by `calibrate` (`{"kT":..,"bias":..}`).
    #[arg(long, conflicts_with_all = ["kt", "bias"])]
    pub calibration: Option<PathBuf>,
}

impl CalibArgs {
    fn resolve(&self) -> Result<Calibration, CliError> {
        if let Some(p) = &self.calibration {
            let file = CalibrationFile::load(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
            return Ok(file.calibration()?);
        }
        if self.kt.is_none() && self.bias.is_none() {
            return Ok(Calibration::default());
        }
        Ok(Calibration::new(self.kt.unwrap_or(1.0), self.bias.unwrap_or(0.0))?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DdgArgs {
    /// Batch CSV: complex_id, pdb_path, group_a, group_b, mutations[, ddg_label].
    #[arg(long)]
    pub input: PathBuf,

    /// Prediction CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Estimator::Cycle)]
    pub estimator: Estimator,

    /// Exit 0 even when some records fail.
    #[arg(long)]
    pub allow_partial: bool,

    #[command(flatten)]
    pub scorer: ScorerArgs,

    #[command(flatten)]
    pub calib: CalibArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DgArgs {
    #[arg(long)]
    pub pdb: PathBuf,

    #[arg(long)]
    pub group_a: String,

    #[arg(long)]
    pub group_b: String,

    #[arg(long, value_enum, default_value_t = DesignScope::All)]
    pub scope: DesignScope,

    /// Result JSON (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub scorer: ScorerArgs,

    #[command(flatten)]
    pub calib: CalibArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchmarkArgs {
    /// Labeled dataset CSV.
    #[arg(long)]
    pub dataset: PathBuf,

    #[arg(long, value_enum, default_value_t = Estimator::Cycle)]
    pub estimator: Estimator,

    #[arg(long, default_value_t = 3)]
    pub folds: usize,

    /// Skip fitting: kT = 1, bias = 0.
    #[arg(long)]
    pub unsupervised: bool,

    #[arg(long, value_enum, default_value_t = Loss::L1)]
    pub loss: Loss,

    /// Report JSON (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// One CSV row per fold plus mean and pooled rows.
    #[arg(long)]
    pub folds_csv: Option<PathBuf>,

    /// Per-prediction CSV (scatter data).
    #[arg(long)]
    pub predictions: Option<PathBuf>,

    /// Per-complex correlation CSV (violin data).
    #[arg(long)]
    pub groups: Option<PathBuf>,

    #[arg(long)]
    pub allow_partial: bool,

    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(id = "source", required = true, multiple = false, args = ["dataset", "pairs"])]
pub struct CalibrateArgs {
    /// Labeled dataset CSV, scored before fitting.
    #[arg(long)]
    pub dataset: Option<PathBuf>,

    /// CSV with columns `r` and `ddg_label`.
    #[arg(long)]
    pub pairs: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Estimator::Cycle)]
    pub estimator: Estimator,

    #[arg(long, value_enum, default_value_t = Loss::L1)]
    pub loss: Loss,

    /// Calibration JSON (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long)]
    pub allow_partial: bool,

    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    /// Pose manifest CSV: pose_id, pdb_path[, ref_path][, task_id].
    #[arg(long)]
    pub manifest: PathBuf,

    #[arg(long)]
    pub group_a: String,

    #[arg(long)]
    pub group_b: String,

    #[arg(long, value_enum, default_value_t = DesignScope::All)]
    pub scope: DesignScope,

    /// Ranking CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Summary JSON: selected pose per task and success rate.
    #[arg(long)]
    pub summary: Option<PathBuf>,

    #[command(flatten)]
    pub scorer: ScorerArgs,

    #[command(flatten)]
    pub calib: CalibArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PreferArgs {
    #[arg(long)]
    pub pdb: PathBuf,

    #[arg(long)]
    pub group_a: String,

    #[arg(long)]
    pub group_b: String,

    /// Design sites, e.g. `H:31,H:32,H:33`; the pool is every single-point
    /// mutant at these sites.
    #[arg(long)]
    pub sites: String,

    #[arg(long, value_enum, default_value_t = PreferenceMode::Bound)]
    pub mode: PreferenceMode,

    /// Leave the wild type out of the perplexity mean.
    #[arg(long)]
    pub exclude_wild_type: bool,

    /// Pool CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExportArgs {
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure reported on stderr with its exit code.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<RecordError>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecordError {
    pub index: usize,
    pub line: usize,
    pub complex_id: String,
    pub reason: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            kind: "input",
            code: EXIT_INPUT,
            message: message.into(),
            failures: Vec::new(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: "internal",
            code: EXIT_INTERNAL,
            message: message.into(),
            failures: Vec::new(),
        }
    }

    fn records(failures: Vec<RecordError>, total: usize, input_class: bool) -> Self {
        let first = &failures[0];
        let message = format!(
            "{} of {total} records failed; first: record {} (line {}, complex {}): {}",
            failures.len(),
            first.index,
            first.line,
            first.complex_id,
            first.reason
        );
        Self {
            kind: if input_class { "input" } else { "partial" },
            code: if input_class { EXIT_INPUT } else { EXIT_PARTIAL },
            message,
            failures,
        }
    }

    pub fn emit(&self, human: bool) {
        let mut err = std::io::stderr().lock();
        if human {
            let _ = writeln!(err, "error: {}", self.message);
            for f in self.failures.iter().skip(1) {
                let _ = writeln!(
                    err,
                    "  record {} (line {}, complex {}): {}",
                    f.index, f.line, f.complex_id, f.reason
                );
            }
        } else {
            let _ = writeln!(err, "{}", serde_json::json!({ "error": self }));
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if is_input_error(&e) {
            Self::input(e.to_string())
        } else {
            Self {
                kind: "failure",
                code: EXIT_PARTIAL,
                message: e.to_string(),
                failures: Vec::new(),
            }
        }
    }
}

/// Errors caused by the supplied inputs (files, syntax, inconsistent records).
pub fn is_input_error(e: &Error) -> bool {
    !matches!(e, Error::Unscorable(_) | Error::DegenerateFit(_) | Error::Undefined(_))
}

#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a T,
}

fn echo_line<T: Serialize>(command: &'static str, config: &T) -> String {
    let echo = Echo {
        tool: TOOL,
        version: VERSION,
        command,
        config,
    };
    format!("# {}\n", serde_json::to_string(&echo).expect("config serializes"))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::internal(e.to_string()))
        }
    }
}

/// JSON document with the tool/version/config echo under `"run"`.
fn json_output<T: Serialize, C: Serialize>(command: &'static str, config: &C, body: &T) -> String {
    let mut value = serde_json::to_value(body).expect("output serializes");
    let echo = serde_json::to_value(Echo {
        tool: TOOL,
        version: VERSION,
        command,
        config,
    })
    .expect("config serializes");
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("run".into(), echo);
    }
    let mut s = serde_json::to_string_pretty(&value).expect("output serializes");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::internal(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Shortest text that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn load_records(path: &Path, require_label: bool) -> Result<Dataset, CliError> {
    load_dataset(path, require_label).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn rejected_errors(ds: &Dataset) -> Vec<RecordError> {
    ds.rejected
        .iter()
        .map(|r| RecordError {
            index: usize::MAX,
            line: r.line,
            complex_id: String::new(),
            reason: r.reason.clone(),
        })
        .collect()
}

fn store_for(ds: &Dataset) -> StructureStore {
    StructureStore::load_all(ds.records.iter().map(|r| r.pdb_path.as_path()))
}

pub fn run(cli: Cli) -> i32 {
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            log::debug!("thread pool already initialised: {e}");
        }
    }
    let result = match &cli.command {
        Command::Ddg(a) => cmd_ddg(a),
        Command::Dg(a) => cmd_dg(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Calibrate(a) => cmd_calibrate(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Prefer(a) => cmd_prefer(a),
        Command::ExportFixtures(a) => cmd_export(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            e.emit(cli.human_errors);
            e.code
        }
    }
}

/// Outcome of a batch: either all good, or the error to report after the
/// outputs were written.
type Outcome = Result<i32, CliError>;

fn batch_outcome(failures: Vec<(RecordError, bool)>, total: usize, allow_partial: bool) -> Outcome {
    if failures.is_empty() || allow_partial {
        if !failures.is_empty() {
            log::warn!("{} of {total} records failed", failures.len());
        }
        return Ok(EXIT_OK);
    }
    let input_class = failures.iter().any(|f| f.1);
    Err(CliError::records(
        failures.into_iter().map(|f| f.0).collect(),
        total,
        input_class,
    ))
}

const TERM_COLUMNS: [&str; 6] = [
    "bound_mut",
    "part_a_mut",
    "part_b_mut",
    "bound_wt",
    "part_a_wt",
    "part_b_wt",
];

fn term_cells(est: &EnergyEstimate) -> Vec<String> {
    let t = &est.terms;
    [
        t.bound_mut,
        t.part_a_mut,
        t.part_b_mut,
        t.bound_wt,
        t.part_a_wt,
        t.part_b_wt,
    ]
    .iter()
    .map(|x| fmt_opt(x.reported()))
    .collect()
}

fn cmd_ddg(args: &DdgArgs) -> Outcome {
    let calib = args.calib.resolve()?;
    let scorer = args.scorer.scorer()?;
    let policy = args.scorer.policy()?;
    let ds = load_records(&args.input, false)?;
    let store = store_for(&ds);
    let results = score_records(&ds.records, &store, &scorer, args.estimator, &policy);

    let mut failures: Vec<(RecordError, bool)> = rejected_errors(&ds).into_iter().map(|r| (r, true)).collect();
    let mut rows = Vec::with_capacity(ds.records.len());
    for (rec, res) in ds.records.iter().zip(&results) {
        let mut row = vec![
            rec.index.to_string(),
            rec.line.to_string(),
            rec.complex_id.clone(),
            rec.mutations.to_string(),
        ];
        match res {
            Ok(est) => {
                row.push(num(est.r));
                row.push(num(calib.apply(est.r)));
                row.extend(term_cells(est));
                row.push(fmt_opt(rec.ddg_label));
                row.push(String::new());
            }
            Err(e) => {
                row.extend(std::iter::repeat_n(String::new(), 2 + TERM_COLUMNS.len()));
                row.push(fmt_opt(rec.ddg_label));
                row.push(e.to_string());
                failures.push((
                    RecordError {
                        index: rec.index,
                        line: rec.line,
                        complex_id: rec.complex_id.clone(),
                        reason: e.to_string(),
                    },
                    is_input_error(e),
                ));
            }
        }
        rows.push(row);
    }
    let mut header = vec!["index", "line", "complex_id", "mutations", "r", "ddg_pred"];
    header.extend(TERM_COLUMNS);
    header.extend(["ddg_label", "error"]);
    #[derive(Serialize)]
    struct Config<'a> {
        args: &'a DdgArgs,
        kt: f64,
        bias: f64,
        orders: OrderPolicy,
        scorer: &'static str,
    }
    let config = Config {
        args,
        kt: calib.kt(),
        bias: calib.bias(),
        orders: policy,
        scorer: scorer.kind(),
    };
    let text = echo_line("ddg", &config) + &csv_text(&header, rows)?;
    write_output(args.out.as_deref(), &text)?;
    batch_outcome(failures, ds.records.len() + ds.rejected.len(), args.allow_partial)
}

fn parse_partition(a: &str, b: &str) -> Result<PartitionSpec, CliError> {
    PartitionSpec::parse(a, b).map_err(CliError::from)
}

fn read_model(path: &Path) -> Result<Arc<crate::structure::StructureModel>, CliError> {
    read_pdb_file(path)
        .map(Arc::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn cmd_dg(args: &DgArgs) -> Outcome {
    let calib = args.calib.resolve()?;
    let scorer = args.scorer.scorer()?;
    let policy = args.scorer.policy()?;
    let partition = parse_partition(&args.group_a, &args.group_b)?;
    let model = read_model(&args.pdb)?;
    let est = dg_estimate(&model, &partition, &scorer, &calib, &policy, args.scope)?;
    #[derive(Serialize)]
    struct Out<'a> {
        complex: &'a str,
        r: f64,
        dg: f64,
        approximate: bool,
        terms: crate::cycle::CycleTerms,
        kt: f64,
        bias: f64,
    }
    let out = Out {
        complex: model.id(),
        r: est.r,
        dg: est.energy,
        approximate: est.approximate,
        terms: est.terms,
        kt: calib.kt(),
        bias: calib.bias(),
    };
    write_output(args.out.as_deref(), &json_output("dg", args, &out))?;
    Ok(EXIT_OK)
}

fn metrics_row(label: &str, m: &MetricsReport, cal: Option<&CalibrationFile>) -> Vec<String> {
    let mut row = vec![
        label.to_string(),
        m.n.to_string(),
        cal.map(|c| num(c.kt)).unwrap_or_default(),
        cal.map(|c| num(c.bias)).unwrap_or_default(),
    ];
    row.extend(m.values().iter().map(|v| fmt_opt(*v)));
    row.push(m.groups.to_string());
    row.push(m.excluded_groups.to_string());
    row
}

#[derive(Serialize)]
struct BenchmarkOut<'a> {
    #[serde(flatten)]
    report: &'a BenchmarkReport,
    rejected_lines: &'a [crate::eval::Rejected],
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Outcome {
    let scorer = args.scorer.scorer()?;
    let config = BenchmarkConfig {
        estimator: args.estimator,
        n_folds: args.folds,
        seed: args.scorer.seed,
        supervised: !args.unsupervised,
        loss: args.loss,
        orders: args.scorer.policy()?,
    };
    if args.folds < 2 {
        return Err(CliError::input("--folds must be at least 2"));
    }
    let ds = load_records(&args.dataset, true)?;
    let store = store_for(&ds);
    let report = run_benchmark(&ds.records, &store, &scorer, &config)?;

    let out = BenchmarkOut {
        report: &report,
        rejected_lines: &ds.rejected,
    };
    write_output(args.out.as_deref(), &json_output("benchmark", args, &out))?;

    if let Some(p) = &args.folds_csv {
        let mut header = vec!["fold", "n", "kT", "bias"];
        header.extend(MetricsReport::COLUMNS);
        header.extend(["groups", "excluded_groups"]);
        let mut rows: Vec<Vec<String>> = report
            .folds
            .iter()
            .map(|f| metrics_row(&f.fold.to_string(), &f.metrics, Some(&f.calibration)))
            .collect();
        rows.push(metrics_row("mean", &report.mean, None));
        rows.push(metrics_row("pooled", &report.pooled, None));
        let text = echo_line("benchmark", args) + &csv_text(&header, rows)?;
        write_output(Some(p), &text)?;
    }
    if let Some(p) = &args.predictions {
        let rows = report.predictions.iter().map(|x| {
            vec![
                x.index.to_string(),
                x.complex_id.clone(),
                x.fold.to_string(),
                num(x.r),
                num(x.ddg_pred),
                num(x.label),
            ]
        });
        let text = echo_line("benchmark", args)
            + &csv_text(&["index", "complex_id", "fold", "r", "ddg_pred", "ddg_label"], rows)?;
        write_output(Some(p), &text)?;
    }
    if let Some(p) = &args.groups {
        let rows = report.groups.iter().map(|g| {
            vec![
                g.complex_id.clone(),
                g.n.to_string(),
                fmt_opt(g.pearson),
                fmt_opt(g.spearman),
            ]
        });
        let text = echo_line("benchmark", args) + &csv_text(&["complex_id", "n", "pearson", "spearman"], rows)?;
        write_output(Some(p), &text)?;
    }

    let mut failures: Vec<(RecordError, bool)> = rejected_errors(&ds).into_iter().map(|r| (r, true)).collect();
    for f in &report.excluded {
        failures.push((
            RecordError {
                index: f.index,
                line: f.line,
                complex_id: f.complex_id.clone(),
                reason: f.reason.clone(),
            },
            true,
        ));
    }
    batch_outcome(failures, ds.records.len() + ds.rejected.len(), args.allow_partial)
}

fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let bad = |m: String| CliError::input(format!("{}: {m}", path.display()));
    let file = fs::File::open(path).map_err(|e| bad(e.to_string()))?;
    let mut rdr = csv_reader(file);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let (ri, yi) = (col("r")?, col("ddg_label")?);
    let mut pairs = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64, CliError> {
            let s = row.get(i).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("line {line}: bad number `{s}`")))
        };
        pairs.push((num(ri)?, num(yi)?));
    }
    Ok(pairs)
}

fn cmd_calibrate(args: &CalibrateArgs) -> Outcome {
    let mut failures = Vec::new();
    let mut total = 0;
    let pairs = if let Some(p) = &args.pairs {
        read_pairs(p)?
    } else {
        let path = args.dataset.as_ref().expect("clap enforces a source");
        let scorer = args.scorer.scorer()?;
        let policy = args.scorer.policy()?;
        let ds = load_records(path, true)?;
        let store = store_for(&ds);
        total = ds.records.len() + ds.rejected.len();
        failures.extend(rejected_errors(&ds).into_iter().map(|r| (r, true)));
        let results = score_records(&ds.records, &store, &scorer, args.estimator, &policy);
        let mut pairs = Vec::new();
        for (rec, res) in ds.records.iter().zip(results) {
            match res {
                Ok(est) => pairs.push((est.r, rec.ddg_label.expect("labels required"))),
                Err(e) => failures.push((
                    RecordError {
                        index: rec.index,
                        line: rec.line,
                        complex_id: rec.complex_id.clone(),
                        reason: e.to_string(),
                    },
                    is_input_error(&e),
                )),
            }
        }
        pairs
    };
    let fit = fit_calibration(&pairs, args.loss)?;
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        file: CalibrationFile,
        n: usize,
        loss: Loss,
    }
    let out = Out {
        file: CalibrationFile::from_fit(&fit),
        n: pairs.len(),
        loss: args.loss,
    };
    write_output(args.out.as_deref(), &json_output("calibrate", args, &out))?;
    batch_outcome(failures, total, args.allow_partial)
}

struct ManifestRow {
    task: String,
    pose_id: String,
    pdb: PathBuf,
    reference: Option<PathBuf>,
}

fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, CliError> {
    let bad = |m: String| CliError::input(format!("{}: {m}", path.display()));
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |s: &str| {
        let p = PathBuf::from(s);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    let file = fs::File::open(path).map_err(|e| bad(e.to_string()))?;
    let mut rdr = csv_reader(file);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("pose_id").ok_or_else(|| bad("missing column `pose_id`".into()))?;
    let pdb_col = col("pdb_path").ok_or_else(|| bad("missing column `pdb_path`".into()))?;
    let (ref_col, task_col) = (col("ref_path"), col("task_id"));
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let get = |c: Option<usize>| c.and_then(|i| row.get(i)).filter(|s| !s.is_empty());
        rows.push(ManifestRow {
            task: get(task_col).unwrap_or("task").to_string(),
            pose_id: get(Some(id_col)).unwrap_or("").to_string(),
            pdb: resolve(get(Some(pdb_col)).unwrap_or("")),
            reference: get(ref_col).map(resolve),
        });
    }
    if rows.is_empty() {
        return Err(bad("no poses".into()));
    }
    Ok(rows)
}

fn cmd_rank(args: &RankArgs) -> Outcome {
    let calib = args.calib.resolve()?;
    let scorer = args.scorer.scorer()?;
    let policy = args.scorer.policy()?;
    let partition = parse_partition(&args.group_a, &args.group_b)?;
    let manifest = read_manifest(&args.manifest)?;

    let mut refs: BTreeMap<PathBuf, Arc<crate::structure::StructureModel>> = BTreeMap::new();
    let mut tasks: BTreeMap<String, Vec<PoseCandidate>> = BTreeMap::new();
    for row in &manifest {
        let reference = match &row.reference {
            Some(p) => Some(match refs.get(p) {
                Some(m) => m.clone(),
                None => {
                    let m = read_model(p)?;
                    refs.insert(p.clone(), m.clone());
                    m
                }
            }),
            None => None,
        };
        tasks.entry(row.task.clone()).or_default().push(PoseCandidate {
            pose_id: row.pose_id.clone(),
            model: read_model(&row.pdb)?,
            reference,
        });
    }
    let mut rankings: Vec<(String, PoseRanking)> = Vec::with_capacity(tasks.len());
    for (task, candidates) in &tasks {
        rankings.push((
            task.clone(),
            rank_poses(candidates, &partition, &scorer, &calib, &policy, args.scope)?,
        ));
    }

    let mut rows = Vec::new();
    for (task, ranking) in &rankings {
        for (rank, p) in ranking.poses.iter().enumerate() {
            rows.push(vec![
                task.clone(),
                (rank + 1).to_string(),
                p.pose_id.clone(),
                p.sample_index.to_string(),
                num(p.r),
                num(p.dg),
                fmt_opt(p.rmsd),
            ]);
        }
    }
    let header = ["task_id", "rank", "pose_id", "sample_index", "r", "dg", "rmsd"];
    let text = echo_line("rank", args) + &csv_text(&header, rows)?;
    write_output(args.out.as_deref(), &text)?;

    let all: Vec<PoseRanking> = rankings.iter().map(|r| r.1.clone()).collect();
    if let Some(p) = &args.summary {
        #[derive(Serialize)]
        struct Selected<'a> {
            task_id: &'a str,
            pose_id: Option<&'a str>,
            dg: Option<f64>,
            rmsd: Option<f64>,
            excluded: usize,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            tasks: Vec<Selected<'a>>,
            success_rmsd: f64,
            success_rate: Option<f64>,
        }
        let summary = Summary {
            tasks: rankings
                .iter()
                .map(|(t, r)| Selected {
                    task_id: t,
                    pose_id: r.selected().map(|s| s.pose_id.as_str()),
                    dg: r.selected().map(|s| s.dg),
                    rmsd: r.selected().and_then(|s| s.rmsd),
                    excluded: r.excluded.len(),
                })
                .collect(),
            success_rmsd: DOCKING_SUCCESS_RMSD,
            success_rate: success_rate(&all, None, DOCKING_SUCCESS_RMSD),
        };
        write_output(Some(p), &json_output("rank", args, &summary))?;
    }
    let excluded: usize = rankings.iter().map(|r| r.1.excluded.len()).sum();
    if excluded > 0 {
        log::warn!("{excluded} poses excluded");
    }
    Ok(EXIT_OK)
}

fn cmd_prefer(args: &PreferArgs) -> Outcome {
    let scorer = args.scorer.scorer()?;
    let policy = args.scorer.policy()?;
    let partition = parse_partition(&args.group_a, &args.group_b)?;
    let model = read_model(&args.pdb)?;
    let sites: Vec<SiteRef> = args
        .sites
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: String| CliError::input(e)))
        .collect::<Result<_, _>>()?;
    let members = single_point_mutants(&model, &sites)?;
    let pool = score_mutation_pool(
        &model,
        &partition,
        &sites,
        &members,
        &scorer,
        &policy,
        args.mode,
        !args.exclude_wild_type,
    )?;
    let rows = pool.members.iter().map(|m| {
        vec![
            m.mutation.map_or_else(|| "WT".to_string(), |x| x.to_string()),
            num(m.loglik),
            num(m.perplexity),
            num(m.normalized_perplexity),
            num(m.preference),
        ]
    });
    let header = [
        "mutation",
        "loglik",
        "perplexity",
        "normalized_perplexity",
        "preference",
    ];
    let text = echo_line("prefer", args) + &csv_text(&header, rows)?;
    write_output(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn cmd_export(args: &ExportArgs) -> Outcome {
    let manifest = write_fixture_set(&args.out, args.seed)?;
    write_output(None, &json_output("export-fixtures", args, &manifest))?;
    Ok(EXIT_OK)
}
