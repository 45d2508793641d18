//! Command-line front end: configuration, the streaming pipeline driver, and
//! the run report.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analytics::{
    sentiment_breakdown, BusinessIndex, Engine, FeaturePartial, Partial, SentimentPartial, StarPartial, StarRatings,
    TipSentiment,
};
use crate::error::LoadError;
use crate::records::{
    ingest_batches, summarize, ErrorLog, IngestError, IngestStats, Record, RecordKind, DEFAULT_BATCH_LINES,
};
use crate::regionmap::{load_mapper, Region, RegionMapper, UnknownPolicy};
use crate::report::{
    breakdown_rows, emit_chart_series, write_table, CsvSpec, ReportError, StateCodeRow, TableRow, DEFAULT_NULL_MARKER,
};
use crate::sentiment::{load_lexicon, Lexicon};

pub const FEATURES_CSV: &str = "features.csv";
pub const FEATURES_SERIES_CSV: &str = "features_series.csv";
pub const TIP_SENTIMENT_CSV: &str = "tip_sentiment.csv";
pub const SENTIMENT_BREAKDOWN_CSV: &str = "sentiment_breakdown.csv";
pub const STAR_RATINGS_CSV: &str = "star_ratings.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const STATE_CODES_CSV: &str = "state_codes.csv";
pub const RUN_REPORT_JSON: &str = "run_report.json";
pub const RUN_REPORT_TXT: &str = "run_report.txt";
pub const PARSE_ERRORS_NDJSON: &str = "parse_errors.ndjson";

#[derive(Debug, Parser)]
#[command(
    name = "yelp-analytics",
    version,
    about = "Feature, tip-sentiment and star-rating analytics over Yelp NDJSON datasets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Count records per dataset file and list the state codes in use
    Summarize,
    /// Yearly new users, reviews, elite users, tips and check-ins
    Features,
    /// Daily tip sentiment per region
    Sentiment,
    /// Monthly star-rating counts per region
    Stars,
    /// Every analysis plus the dataset summary
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Summarize => "summarize",
            Command::Features => "features",
            Command::Sentiment => "sentiment",
            Command::Stars => "stars",
            Command::All => "all",
        }
    }

    fn plan(self) -> Plan {
        let all = self == Command::All;
        Plan {
            summary: all || self == Command::Summarize,
            features: all || self == Command::Features,
            sentiment: all || self == Command::Sentiment,
            stars: all || self == Command::Stars,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    summary: bool,
    features: bool,
    sentiment: bool,
    stars: bool,
}

impl Plan {
    fn needs(&self, kind: RecordKind) -> bool {
        self.summary
            || match kind {
                RecordKind::Business => self.sentiment || self.stars,
                RecordKind::Review => self.features || self.stars,
                RecordKind::Tip => self.features || self.sentiment,
                RecordKind::User | RecordKind::Checkin => self.features,
            }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Directory holding the five dataset files (`business.json` or
    /// `yelp_academic_dataset_business.json`, optionally `.gz`, and so on)
    #[arg(long, env = "YELP_DATASET_DIR", global = true)]
    pub dataset_dir: Option<PathBuf>,

    /// Region mapper file (abbrev<TAB>country<TAB>region); bundled mapper if omitted
    #[arg(long, env = "YELP_MAPPER", global = true)]
    pub mapper: Option<PathBuf>,

    /// Sentiment lexicon file (word<TAB>positive|negative); bundled lexicon if omitted
    #[arg(long, env = "YELP_LEXICON", global = true)]
    pub lexicon: Option<PathBuf>,

    /// Output directory, created if missing
    #[arg(long, env = "YELP_OUT", default_value = "out", global = true)]
    pub out: PathBuf,

    /// Worker threads [default: available cores]
    #[arg(long, env = "YELP_WORKERS", global = true)]
    pub workers: Option<usize>,

    /// What to do with state codes the mapper does not know: emit-as-unknown or drop
    #[arg(long, env = "YELP_UNKNOWN_POLICY", default_value = "emit-as-unknown", global = true)]
    pub unknown_policy: UnknownPolicy,

    /// Marker written for null cells
    #[arg(long, env = "YELP_NULL_MARKER", default_value = DEFAULT_NULL_MARKER, global = true)]
    pub null_marker: String,

    /// NDJSON log of malformed input lines [default: <out>/parse_errors.ndjson]
    #[arg(long, env = "YELP_ERROR_LOG", global = true)]
    pub error_log: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub dataset_dir: PathBuf,
    pub mapper_path: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub unknown_policy: UnknownPolicy,
    pub null_marker: String,
    pub error_log: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(dataset_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            dataset_dir: dataset_dir.into(),
            mapper_path: None,
            lexicon_path: None,
            output_dir: output_dir.into(),
            workers: default_workers(),
            unknown_policy: UnknownPolicy::default(),
            null_marker: DEFAULT_NULL_MARKER.to_string(),
            error_log: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

impl TryFrom<RunArgs> for RunConfig {
    type Error = CliError;

    fn try_from(args: RunArgs) -> Result<Self, CliError> {
        let dataset_dir = args
            .dataset_dir
            .ok_or_else(|| CliError::Config("--dataset-dir (or YELP_DATASET_DIR) is required".into()))?;
        Ok(RunConfig {
            dataset_dir,
            mapper_path: args.mapper,
            lexicon_path: args.lexicon,
            output_dir: args.out,
            workers: args.workers.unwrap_or_else(default_workers),
            unknown_policy: args.unknown_policy,
            null_marker: args.null_marker,
            error_log: args.error_log,
        })
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("configuration error: {}: {source}", path.display())]
    Load { path: PathBuf, source: LoadError },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for configuration problems found before any work, 1 for failures
    /// during the run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Load { .. } => 2,
            _ => 1,
        }
    }
}

/// Candidate file names for a dataset kind, in lookup order.
pub fn dataset_file_candidates(kind: RecordKind) -> Vec<String> {
    let k = kind.name();
    vec![
        format!("{k}.json"),
        format!("{k}.json.gz"),
        format!("yelp_academic_dataset_{k}.json"),
        format!("yelp_academic_dataset_{k}.json.gz"),
    ]
}

pub fn locate_dataset_file(dir: &Path, kind: RecordKind) -> Option<PathBuf> {
    dataset_file_candidates(kind)
        .into_iter()
        .map(|name| dir.join(name))
        .find(|p| p.is_file())
}

/// Everything checked and loaded before the first record is read.
struct Prepared {
    files: Vec<(RecordKind, PathBuf)>,
    mapper: RegionMapper,
    lexicon: Lexicon,
    null_marker: String,
    error_log: PathBuf,
}

impl Prepared {
    fn file(&self, kind: RecordKind) -> Option<&Path> {
        self.files.iter().find(|(k, _)| *k == kind).map(|(_, p)| p.as_path())
    }

    fn spec<R: TableRow>(&self) -> CsvSpec {
        CsvSpec::for_row::<R>()
            .with_null_marker(self.null_marker.clone())
            .expect("null marker validated")
    }
}

fn prepare(command: Command, config: &RunConfig) -> Result<Prepared, CliError> {
    let plan = command.plan();
    if config.workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    if !config.dataset_dir.is_dir() {
        return Err(CliError::Config(format!(
            "dataset directory {} does not exist",
            config.dataset_dir.display()
        )));
    }
    let mut files = Vec::new();
    for kind in RecordKind::ALL.into_iter().filter(|&k| plan.needs(k)) {
        match locate_dataset_file(&config.dataset_dir, kind) {
            Some(path) => files.push((kind, path)),
            None => {
                return Err(CliError::Config(format!(
                    "no {kind} file in {} (looked for {})",
                    config.dataset_dir.display(),
                    dataset_file_candidates(kind).join(", ")
                )))
            }
        }
    }
    let mapper = match &config.mapper_path {
        Some(p) => load_mapper(p).map_err(|source| CliError::Load {
            path: p.clone(),
            source,
        })?,
        None => RegionMapper::bundled(),
    }
    .with_policy(config.unknown_policy);
    let lexicon = match &config.lexicon_path {
        Some(p) => load_lexicon(p).map_err(|source| CliError::Load {
            path: p.clone(),
            source,
        })?,
        None => Lexicon::bundled(),
    };
    CsvSpec::for_row::<StateCodeRow>()
        .with_null_marker(config.null_marker.clone())
        .map_err(|e| CliError::Config(e.to_string()))?;
    if config.output_dir.exists() && !config.output_dir.is_dir() {
        return Err(CliError::Config(format!(
            "output path {} is not a directory",
            config.output_dir.display()
        )));
    }
    fs::create_dir_all(&config.output_dir).map_err(|source| CliError::Io {
        path: config.output_dir.clone(),
        source,
    })?;
    Ok(Prepared {
        files,
        mapper,
        lexicon,
        null_marker: config.null_marker.clone(),
        error_log: config
            .error_log
            .clone()
            .unwrap_or_else(|| config.output_dir.join(PARSE_ERRORS_NDJSON)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindIngest {
    pub kind: RecordKind,
    pub file: PathBuf,
    #[serde(flatten)]
    pub stats: IngestStats,
}

/// Where every parsed review or tip ended up. The four fields always satisfy
/// `parsed = counted + join_misses + unknown_dropped`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Reconciliation {
    pub parsed: u64,
    pub counted: u64,
    pub join_misses: u64,
    pub unknown_dropped: u64,
}

impl Reconciliation {
    pub fn balances(&self) -> bool {
        self.parsed == self.counted + self.join_misses + self.unknown_dropped
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub rows: usize,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub workers: usize,
    pub unknown_policy: UnknownPolicy,
    pub ingest: Vec<KindIngest>,
    pub stages: Vec<StageTime>,
    pub checkin_timestamps: u64,
    pub sentiment: Option<Reconciliation>,
    pub stars: Option<Reconciliation>,
    pub outputs: Vec<OutputFile>,
    pub parse_errors_logged: u64,
    pub error_log: PathBuf,
    pub total_seconds: f64,
}

impl RunReport {
    pub fn records(&self, kind: RecordKind) -> u64 {
        self.ingest
            .iter()
            .filter(|k| k.kind == kind)
            .map(|k| k.stats.records_ok)
            .sum()
    }

    pub fn malformed(&self) -> u64 {
        self.ingest.iter().map(|k| k.stats.records_malformed).sum()
    }

    pub fn stage_seconds(&self, stage: &str) -> Option<f64> {
        self.stages.iter().find(|s| s.stage == stage).map(|s| s.seconds)
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command: {}  workers: {}", self.command.name(), self.workers);
        let _ = writeln!(s, "\ningest:");
        for k in &self.ingest {
            let _ = writeln!(
                s,
                "  {:<9} {:>12} records {:>8} malformed {:>14} bytes {:>10.3} s",
                k.kind.name(),
                k.stats.records_ok,
                k.stats.records_malformed,
                k.stats.bytes_read,
                k.stats.wall_time
            );
        }
        let _ = writeln!(s, "\nstages:");
        for st in &self.stages {
            let _ = writeln!(s, "  {:<10} {:>10.3} s", st.stage, st.seconds);
        }
        for (name, rec) in [("tips", &self.sentiment), ("reviews", &self.stars)] {
            if let Some(r) = rec {
                let _ = writeln!(
                    s,
                    "\n{name}: {} parsed = {} counted + {} join misses + {} unknown-region drops",
                    r.parsed, r.counted, r.join_misses, r.unknown_dropped
                );
            }
        }
        let _ = writeln!(s, "\noutputs:");
        for o in &self.outputs {
            let _ = writeln!(s, "  {} ({} rows, {} bytes)", o.path.display(), o.rows, o.bytes);
        }
        let _ = writeln!(
            s,
            "\nmalformed lines logged: {} ({})",
            self.parse_errors_logged,
            self.error_log.display()
        );
        let _ = writeln!(s, "total: {:.3} s", self.total_seconds);
        s
    }
}

struct Emitter<'a> {
    prepared: &'a Prepared,
    out_dir: &'a Path,
    outputs: Vec<OutputFile>,
}

impl Emitter<'_> {
    fn table<R: TableRow>(&mut self, name: &str, rows: &[R]) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        let bytes = write_table(rows, &self.prepared.spec::<R>(), &path)?;
        self.outputs.push(OutputFile {
            path,
            rows: rows.len(),
            bytes,
        });
        Ok(())
    }
}

fn timed<T>(acc: &mut f64, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let v = f();
    *acc += t.elapsed().as_secs_f64();
    v
}

fn merge_into<P: Partial>(slot: &mut Option<P>, partial: P) {
    if let Some(current) = slot.take() {
        *slot = Some(current.merge(partial));
    }
}

/// Runs one subcommand end to end, writing CSV outputs and the run report
/// into the configured output directory.
pub fn run(command: Command, config: &RunConfig) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let plan = command.plan();
    let prepared = prepare(command, config)?;
    let engine = Engine::new(config.workers).map_err(|e| CliError::Config(e.to_string()))?;
    let mut errors = ErrorLog::create(&prepared.error_log).map_err(|source| CliError::Io {
        path: prepared.error_log.clone(),
        source,
    })?;

    let mut ingest = Vec::new();
    let mut read = |kind: RecordKind, on_batch: &mut dyn FnMut(Vec<Record>)| -> Result<(), CliError> {
        if let Some(path) = prepared.file(kind) {
            log::info!("reading {kind} records from {}", path.display());
            let stats = ingest_batches(
                path,
                kind,
                engine.pool(),
                DEFAULT_BATCH_LINES,
                &mut errors,
                &mut *on_batch,
            )?;
            ingest.push(KindIngest {
                kind,
                file: path.to_path_buf(),
                stats,
            });
        }
        Ok(())
    };

    let mut index = BusinessIndex::new();
    let mut index_time = 0.0;
    read(RecordKind::Business, &mut |batch| {
        timed(&mut index_time, || {
            for b in batch.into_iter().filter_map(Record::into_business) {
                index.insert(&b);
            }
        })
    })?;

    let lexicon = &prepared.lexicon;
    let tip_analysis = TipSentiment::new(lexicon, &index);
    let star_analysis = StarRatings::new(&index);
    let mut features: Option<FeaturePartial> = plan.features.then(FeaturePartial::default);
    let mut sentiment: Option<SentimentPartial> = plan.sentiment.then(SentimentPartial::default);
    let mut stars: Option<StarPartial> = plan.stars.then(StarPartial::default);
    let (mut t_features, mut t_sentiment, mut t_stars) = (0.0, 0.0, 0.0);
    let mut checkin_timestamps = 0u64;

    read(RecordKind::User, &mut |batch| {
        if features.is_some() {
            let users: Vec<_> = batch.into_iter().filter_map(Record::into_user).collect();
            timed(&mut t_features, || {
                merge_into(&mut features, engine.fold(&users, FeaturePartial::observe_user))
            });
        }
    })?;

    read(RecordKind::Review, &mut |batch| {
        let reviews: Vec<_> = batch.into_iter().filter_map(Record::into_review).collect();
        if features.is_some() {
            timed(&mut t_features, || {
                merge_into(&mut features, engine.fold(&reviews, FeaturePartial::observe_review))
            });
        }
        if stars.is_some() {
            timed(&mut t_stars, || {
                merge_into(&mut stars, star_analysis.accumulate(&reviews, &engine))
            });
        }
    })?;

    read(RecordKind::Tip, &mut |batch| {
        let tips: Vec<_> = batch.into_iter().filter_map(Record::into_tip).collect();
        if features.is_some() {
            timed(&mut t_features, || {
                merge_into(&mut features, engine.fold(&tips, FeaturePartial::observe_tip))
            });
        }
        if sentiment.is_some() {
            timed(&mut t_sentiment, || {
                merge_into(&mut sentiment, tip_analysis.accumulate(&tips, &engine))
            });
        }
    })?;

    read(RecordKind::Checkin, &mut |batch| {
        let checkins: Vec<_> = batch.into_iter().filter_map(Record::into_checkin).collect();
        checkin_timestamps += checkins.iter().map(|c| c.timestamps.len() as u64).sum::<u64>();
        if features.is_some() {
            timed(&mut t_features, || {
                merge_into(&mut features, engine.fold(&checkins, FeaturePartial::observe_checkin))
            });
        }
    })?;
    errors.flush().map_err(|source| CliError::Io {
        path: prepared.error_log.clone(),
        source,
    })?;

    let parsed = |kind| -> u64 {
        ingest
            .iter()
            .filter(|k: &&KindIngest| k.kind == kind)
            .map(|k| k.stats.records_ok)
            .sum()
    };
    let mut emit = Emitter {
        prepared: &prepared,
        out_dir: &config.output_dir,
        outputs: Vec::new(),
    };
    let mut t_emit = 0.0;
    let mut sentiment_rec = None;
    let mut stars_rec = None;

    if plan.summary {
        let stats: Vec<(RecordKind, IngestStats)> = ingest.iter().map(|k| (k.kind, k.stats.clone())).collect();
        let summary = summarize(&stats);
        let codes: Vec<StateCodeRow> = index
            .state_counts()
            .into_iter()
            .map(|(code, businesses)| {
                let (country, region) = match prepared.mapper.resolve(code) {
                    crate::regionmap::Resolution::Known(Region { country, region_name }) => {
                        (Some(country.clone()), Some(region_name.clone()))
                    }
                    crate::regionmap::Resolution::Unknown(_) => (None, None),
                };
                StateCodeRow {
                    code: code.to_string(),
                    businesses,
                    country,
                    region,
                }
            })
            .collect();
        timed(&mut t_emit, || -> Result<(), CliError> {
            emit.table(SUMMARY_CSV, &summary.kinds)?;
            emit.table(STATE_CODES_CSV, &codes)
        })?;
    }

    if let Some(partial) = features.take() {
        let rows = timed(&mut t_features, || partial.into_rows());
        let series = emit_chart_series(&rows);
        timed(&mut t_emit, || -> Result<(), CliError> {
            emit.table(FEATURES_CSV, &rows)?;
            emit.table(FEATURES_SERIES_CSV, &series)
        })?;
    }

    if let Some(partial) = sentiment.take() {
        let out = timed(&mut t_sentiment, || tip_analysis.finish(partial, &prepared.mapper));
        let breakdown = breakdown_rows(&sentiment_breakdown(&out.rows));
        sentiment_rec = Some(Reconciliation {
            parsed: parsed(RecordKind::Tip),
            counted: out.rows.iter().map(|r| r.count).sum(),
            join_misses: out.join_misses,
            unknown_dropped: out.unknown_dropped,
        });
        timed(&mut t_emit, || -> Result<(), CliError> {
            emit.table(TIP_SENTIMENT_CSV, &out.rows)?;
            emit.table(SENTIMENT_BREAKDOWN_CSV, &breakdown)
        })?;
    }

    if let Some(partial) = stars.take() {
        let out = timed(&mut t_stars, || star_analysis.finish(partial, &prepared.mapper));
        stars_rec = Some(Reconciliation {
            parsed: parsed(RecordKind::Review),
            counted: out.rows.iter().map(|r| r.count).sum(),
            join_misses: out.join_misses,
            unknown_dropped: out.unknown_dropped,
        });
        timed(&mut t_emit, || emit.table(STAR_RATINGS_CSV, &out.rows))?;
    }

    let mut stages = vec![StageTime {
        stage: "ingest".into(),
        seconds: ingest.iter().map(|k| k.stats.wall_time).sum::<f64>() + index_time,
    }];
    for (on, stage, seconds) in [
        (plan.features, "features", t_features),
        (plan.sentiment, "sentiment", t_sentiment),
        (plan.stars, "stars", t_stars),
    ] {
        if on {
            stages.push(StageTime {
                stage: stage.into(),
                seconds,
            });
        }
    }
    stages.push(StageTime {
        stage: "emit".into(),
        seconds: t_emit,
    });

    let mut report = RunReport {
        command,
        workers: engine.workers(),
        unknown_policy: config.unknown_policy,
        ingest,
        stages,
        checkin_timestamps,
        sentiment: sentiment_rec,
        stars: stars_rec,
        outputs: emit.outputs,
        parse_errors_logged: errors.written(),
        error_log: prepared.error_log.clone(),
        total_seconds: 0.0,
    };
    report.total_seconds = started.elapsed().as_secs_f64();
    write_report(&report, &config.output_dir)?;
    Ok(report)
}

fn write_report(report: &RunReport, out_dir: &Path) -> Result<(), CliError> {
    let json_path = out_dir.join(RUN_REPORT_JSON);
    let json = serde_json::to_string_pretty(report).expect("run report serializes");
    fs::write(&json_path, json + "\n").map_err(|source| CliError::Io {
        path: json_path,
        source,
    })?;
    let txt_path = out_dir.join(RUN_REPORT_TXT);
    fs::write(&txt_path, report.render_text()).map_err(|source| CliError::Io { path: txt_path, source })
}
