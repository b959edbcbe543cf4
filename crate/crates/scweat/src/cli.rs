//! Subcommands. Each one loads its inputs, computes everything in memory and
//! only then writes its files, so a failing run leaves no output behind.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rayon::ThreadPool;

use scweat_core::association::AssociationTest;
use scweat_core::clustering::{
    cluster_report, elbow_curve, elbow_k, gather_rows, kmeans_elkan, relative_drops, silhouette_score,
    ClusterReport, DEFAULT_COUNT, DEFAULT_D_MIN, DEFAULT_K, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use scweat_core::concept::{
    concept_bias_distribution, intersect_lists, top_scored, ConceptScorer, ConceptSeed, ConceptWordList,
    DEFAULT_TOP_N,
};
use scweat_core::frequency::gender_by_frequency;
use scweat_core::lexicon::{correlation_table, StrataConfig, Stratum, StratumKind, VadDim};
use scweat_core::pos::{pos_distribution, PosCounts};
use scweat_core::projection::{tsne, TsneConfig, MAX_POINTS};
use scweat_core::{AssociationRecord, AttributeSet, Direction, EmbeddingSpace, PConfig, PermutationMode};

use crate::error::{AppError, Result};
use crate::io;
use crate::output::{self, csv, opt, tsv, Provenance};
use crate::parallel::{self, Selection, WORKERS_ENV};

#[derive(Parser, Debug)]
#[command(name = "scweat", version, about = "Single-category word embedding association tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Effect size and p-value for a batch of words.
    Assoc(AssocArgs),
    /// Direction counts by frequency range and effect-size threshold.
    FreqTable(FreqTableArgs),
    /// Cluster the most frequent strongly associated words.
    Cluster(ClusterArgs),
    /// Inertia against cluster count for the strongly associated words.
    Elbow(ElbowArgs),
    /// Part-of-speech make-up of the strongly associated words.
    PosTable(PosTableArgs),
    /// Spearman correlation of effect size with valence, arousal and dominance.
    VadCorr(VadCorrArgs),
    /// Words nearest a concept and their association profile.
    Concept(ConceptArgs),
    /// Two-dimensional t-SNE layout of words with their effect sizes.
    Project(ProjectArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Base seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Defaults to the number of CPUs.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Leave the timestamp out of output headers.
    #[arg(long)]
    pub reproducible: bool,
    /// `key = value` file of flags; flags on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct EmbedArgs {
    /// Embedding file in the GloVe / fastText text format.
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    /// Load only the first N rows.
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SetArgs {
    /// First attribute set: a built-in name or a word-list file. Positive
    /// effect sizes mean association with this set.
    #[arg(long, default_value = "gender-female")]
    pub a: String,
    /// Second attribute set.
    #[arg(long, default_value = "gender-male")]
    pub b: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMode {
    Exact,
    MonteCarlo,
    None,
}

#[derive(Args, Debug, Clone)]
pub struct PArgs {
    /// How p-values are computed.
    #[arg(long, value_enum, default_value_t = PMode::Exact)]
    pub p_mode: PMode,
    /// Sampled partitions per word in monte-carlo mode.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

impl PArgs {
    fn config(&self, seed: u64) -> Result<PConfig> {
        let mode = match self.p_mode {
            PMode::Exact => Some(PermutationMode::Exact),
            PMode::MonteCarlo if self.samples == 0 => {
                return Err(AppError::config("--samples must be at least 1"));
            }
            PMode::MonteCarlo => Some(PermutationMode::MonteCarlo { samples: self.samples }),
            PMode::None => None,
        };
        Ok(PConfig { mode, seed })
    }
}

#[derive(Args, Debug, Clone)]
pub struct SelectArgs {
    /// Words kept per direction.
    #[arg(long, default_value_t = DEFAULT_COUNT)]
    pub count: usize,
    /// Minimum |effect size|.
    #[arg(long, default_value_t = DEFAULT_D_MIN)]
    pub d_min: f64,
    /// p-values must fall below this; ignored with `--p-mode none`.
    #[arg(long, default_value_t = 0.05)]
    pub p_max: f64,
    /// Which directions to process.
    #[arg(long, value_enum, default_value_t = Side::Both)]
    pub direction: Side,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
    Both,
}

impl Side {
    fn directions(self) -> &'static [Direction] {
        match self {
            Side::A => &[Direction::A],
            Side::B => &[Direction::B],
            Side::Both => &[Direction::A, Direction::B],
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct TsneArgs {
    #[arg(long, default_value_t = 30.0)]
    pub perplexity: f64,
    #[arg(long, default_value_t = 200.0)]
    pub learning_rate: f64,
}

#[derive(Args, Debug)]
pub struct AssocArgs {
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub sets: SetArgs,
    #[command(flatten)]
    pub p: PArgs,
    /// Words to test, one per line (`-` for standard input). Defaults to
    /// the whole loaded vocabulary.
    #[arg(long, value_name = "FILE")]
    pub words: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct FreqTableArgs {
    /// Records written by `assoc`.
    #[arg(long, value_name = "FILE", conflicts_with = "embeddings", required_unless_present = "embeddings")]
    pub records: Option<PathBuf>,
    /// Sweep the most frequent words of this embedding file instead.
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,
    #[command(flatten)]
    pub sets: SetArgs,
    #[command(flatten)]
    pub p: PArgs,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000,100000")]
    pub ranges: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.5,0.8")]
    pub thresholds: Vec<f64>,
    /// Count only words with a p-value below this.
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Also write the table in long form as TSV.
    #[arg(long, value_name = "FILE")]
    pub long: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub sets: SetArgs,
    #[command(flatten)]
    pub p: PArgs,
    #[command(flatten)]
    pub select: SelectArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Relative inertia change that ends the iteration.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Scale vectors to unit length before clustering.
    #[arg(long)]
    pub unit_length: bool,
    /// `cluster_id<TAB>label` file for the A-side clusters.
    #[arg(long, value_name = "FILE")]
    pub labels_a: Option<PathBuf>,
    /// `cluster_id<TAB>label` file for the B-side clusters.
    #[arg(long, value_name = "FILE")]
    pub labels_b: Option<PathBuf>,
    #[command(flatten)]
    pub tsne: TsneArgs,
    #[arg(long, default_value_t = 1000)]
    pub tsne_iterations: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ElbowArgs {
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub sets: SetArgs,
    #[command(flatten)]
    pub p: PArgs,
    #[command(flatten)]
    pub select: SelectArgs,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    #[arg(long, default_value_t = 20)]
    pub k_max: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long)]
    pub unit_length: bool,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct PosTableArgs {
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub sets: SetArgs,
    #[command(flatten)]
    pub p: PArgs,
    /// `word<TAB>tag` file with Penn Treebank tags.
    #[arg(long, value_name = "FILE")]
    pub pos_lexicon: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1000,2500,5000,10000")]
    pub cutoffs: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_D_MIN)]
    pub d_min: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_max: f64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct VadCorrArgs {
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub sets: SetArgs,
    /// `word<TAB>valence<TAB>arousal<TAB>dominance` file.
    #[arg(long, value_name = "FILE")]
    pub vad: PathBuf,
    /// `word<TAB>score` file, higher meaning more frequent.
    #[arg(long, value_name = "FILE")]
    pub frequency: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub ranges: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.5,0.8")]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Also write correlation against effect-size threshold as plot data.
    #[arg(long, value_name = "FILE")]
    pub fig6: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ConceptArgs {
    /// Embedding file; repeat to intersect neighbor lists across spaces.
    #[arg(long, value_name = "FILE", required = true)]
    pub embeddings: Vec<PathBuf>,
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,
    #[command(flatten)]
    pub sets: SetArgs,
    /// Seed words: `big-tech` or a word-list file.
    #[arg(long, default_value = "big-tech")]
    pub seeds: String,
    #[arg(long, default_value_t = DEFAULT_TOP_N)]
    pub top_n: usize,
    /// Drop seeds missing from a space instead of failing.
    #[arg(long)]
    pub drop_missing: bool,
    /// Evaluate this word list directly, skipping neighbor retrieval.
    #[arg(long, value_name = "FILE")]
    pub words: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.5,0.8")]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    pub sets: SetArgs,
    /// Project the N most frequent words.
    #[arg(long, default_value_t = 1000, conflicts_with = "words")]
    pub top: usize,
    /// Project these words instead.
    #[arg(long, value_name = "FILE")]
    pub words: Option<PathBuf>,
    #[command(flatten)]
    pub tsne: TsneArgs,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = MAX_POINTS)]
    pub max_points: usize,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

/// Settings left out of headers and the config hash: they choose where
/// output goes or how fast it is produced, never what it contains.
const UNRECORDED: [&str; 8] = ["config", "workers", "out", "out_dir", "long", "fig6", "reproducible", "help"];

/// A file to write once every computation has succeeded.
struct Artifact {
    path: PathBuf,
    header: String,
    body: Vec<u8>,
}

struct Ctx {
    command: String,
    settings: Vec<(String, String)>,
    run: RunArgs,
    pool: ThreadPool,
}

impl Ctx {
    fn provenance(&self, a: &str, b: &str) -> Provenance {
        Provenance {
            command: self.command.clone(),
            config: self.settings.clone(),
            seed: self.run.seed,
            sign: format!("positive effect_size = associated with {a}; negative = associated with {b}"),
            reproducible: self.run.reproducible,
        }
    }
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning {msg}");
}

/// Raw values of every recorded setting, sorted by name.
fn settings(sub: &clap::Command, m: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for arg in sub.get_arguments() {
        let id = arg.get_id().as_str();
        if UNRECORDED.contains(&id) || id == "version" {
            continue;
        }
        if let Ok(Some(vals)) = m.try_get_raw(id) {
            let vals: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
            out.push((id.to_string(), vals.join(",")));
        }
    }
    out.sort();
    out
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn load_space(path: &Path, limit: Option<usize>) -> Result<EmbeddingSpace> {
    let (space, report) = io::load_embeddings(path, &stem(path), limit)?;
    for w in report.warnings() {
        warn(format!("{w} file={}", path.display()));
    }
    Ok(space)
}

fn load_sets(sets: &SetArgs) -> Result<(AttributeSet, AttributeSet)> {
    Ok((io::load_attribute_set(&sets.a)?, io::load_attribute_set(&sets.b)?))
}

fn report_skips(skipped: &[scweat_core::association::SkippedWord]) {
    for s in skipped {
        warn(format!("kind=skipped-word word={:?} reason={:?}", s.word, s.reason.to_string()));
    }
}

fn label(side: Direction, a: &AttributeSet, b: &AttributeSet) -> String {
    match side {
        Direction::B => b.name().to_string(),
        _ => a.name().to_string(),
    }
}

fn fmt_pct(x: f64) -> String {
    format!("{x:.2}")
}

fn dat_value(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// Parses and runs one invocation; `args[0]` is the program name.
pub fn run(args: Vec<String>) -> ExitCode {
    let args = match crate::config::expand(args) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let mut cmd = Cli::command();
    let matches = match cmd.try_get_matches_from_mut(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = e.print();
                return ExitCode::from(crate::error::Kind::Config.exit_code());
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return fail(&AppError::config(first));
        }
    };
    match dispatch(&cmd, &matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &AppError) -> ExitCode {
    eprintln!("{}", e.line());
    ExitCode::from(e.kind.exit_code())
}

fn dispatch(cmd: &clap::Command, matches: &ArgMatches) -> Result<()> {
    let cli = Cli::from_arg_matches(matches).map_err(|e| AppError::config(e.to_string()))?;
    let (name, sub_matches) = matches.subcommand().ok_or_else(|| AppError::config("missing subcommand"))?;
    let sub = cmd
        .find_subcommand(name)
        .ok_or_else(|| AppError::config(format!("unknown subcommand `{name}`")))?;
    let run_args = match &cli.command {
        Command::Assoc(a) => &a.run,
        Command::FreqTable(a) => &a.run,
        Command::Cluster(a) => &a.run,
        Command::Elbow(a) => &a.run,
        Command::PosTable(a) => &a.run,
        Command::VadCorr(a) => &a.run,
        Command::Concept(a) => &a.run,
        Command::Project(a) => &a.run,
    };
    let ctx = Ctx {
        command: name.to_string(),
        settings: settings(sub, sub_matches),
        run: run_args.clone(),
        pool: parallel::pool(run_args.workers)?,
    };
    let artifacts = match &cli.command {
        Command::Assoc(a) => assoc(&ctx, a)?,
        Command::FreqTable(a) => freq_table(&ctx, a)?,
        Command::Cluster(a) => cluster(&ctx, a)?,
        Command::Elbow(a) => elbow(&ctx, a)?,
        Command::PosTable(a) => pos_table(&ctx, a)?,
        Command::VadCorr(a) => vad_corr(&ctx, a)?,
        Command::Concept(a) => concept(&ctx, a)?,
        Command::Project(a) => project(&ctx, a)?,
    };
    for a in &artifacts {
        output::emit(&a.path, &a.header, &a.body)?;
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| AppError::config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn assoc(ctx: &Ctx, args: &AssocArgs) -> Result<Vec<Artifact>> {
    let (a, b) = load_sets(&args.sets)?;
    let p = args.p.config(ctx.run.seed)?;
    let space = load_space(&args.embed.embeddings, args.embed.limit)?;
    let test = AssociationTest::new(&space, &a, &b)?;
    let words = match &args.words {
        Some(path) => io::load_word_list(path)?,
        None => space.words().to_vec(),
    };
    let batch = parallel::batch_associations(&ctx.pool, &space, &test, &words, &p)?;
    report_skips(&batch.skipped);
    let body = csv(
        &["word", "rank", "effect_size", "p_value"],
        batch.records.iter().map(|r| {
            [r.word.clone(), r.rank.to_string(), r.effect_size.to_string(), opt(r.p_value)]
        }),
    )?;
    Ok(vec![Artifact {
        path: args.out.clone(),
        header: ctx.provenance(a.name(), b.name()).header(),
        body,
    }])
}

fn freq_table(ctx: &Ctx, args: &FreqTableArgs) -> Result<Vec<Artifact>> {
    let (a, b) = load_sets(&args.sets)?;
    if args.ranges.is_empty() || args.thresholds.is_empty() {
        return Err(AppError::config("--ranges and --thresholds must be non-empty"));
    }
    if args.thresholds.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(AppError::config("thresholds must be finite and non-negative"));
    }
    let records = match (&args.records, &args.embeddings) {
        (Some(path), _) => {
            let r = io::load_records(path)?;
            if r.windows(2).any(|w| w[0].rank == w[1].rank) {
                return Err(AppError::data(format!("{}: repeated rank", path.display())));
            }
            r
        }
        (None, Some(path)) => {
            // p-values only matter when they filter
            let p = if args.p_max.is_some() {
                args.p.config(ctx.run.seed)?
            } else {
                PConfig { mode: None, seed: ctx.run.seed }
            };
            let sweep = args.ranges.iter().copied().max().unwrap_or(1);
            // attribute words may rank below the sweep, so the whole file is loaded
            let space = load_space(path, args.limit)?;
            let test = AssociationTest::new(&space, &a, &b)?;
            let words = space.top_n(sweep);
            let batch = parallel::batch_associations(&ctx.pool, &space, &test, words, &p)?;
            report_skips(&batch.skipped);
            batch.records
        }
        (None, None) => return Err(AppError::config("either --records or --embeddings is required")),
    };
    let table = gender_by_frequency(&records, &args.ranges, &args.thresholds, args.p_max);
    let (an, bn) = (a.name(), b.name());
    let mut columns = vec!["range".to_string(), "zero".to_string()];
    for t in &args.thresholds {
        columns.push(format!("{an}_{t}"));
        columns.push(format!("{an}_{t}_pct"));
        columns.push(format!("{bn}_{t}"));
        columns.push(format!("{bn}_{t}_pct"));
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut rows = Vec::new();
    let mut long = Vec::new();
    for row in &table.rows {
        let mut r = vec![row.range.to_string()];
        if !row.available {
            warn(format!("kind=range-unavailable range={} (input stops short)", row.range));
            r.extend(std::iter::repeat_n("NA".to_string(), columns.len() - 1));
            rows.push(r);
            continue;
        }
        r.push(row.zero.to_string());
        for c in &row.cells {
            for (dir, name) in [(Direction::A, an), (Direction::B, bn)] {
                r.push(c.count(dir).to_string());
                r.push(fmt_pct(c.pct_of_counted(dir)));
                long.push([
                    row.range.to_string(),
                    c.threshold.to_string(),
                    name.to_string(),
                    c.count(dir).to_string(),
                    fmt_pct(c.pct_of_counted(dir)),
                ]);
            }
        }
        rows.push(r);
    }
    let header = ctx.provenance(an, bn).header();
    let mut out = vec![Artifact {
        path: args.out.clone(),
        header: header.clone(),
        body: csv(&cols, rows)?,
    }];
    if let Some(path) = &args.long {
        out.push(Artifact {
            path: path.clone(),
            header,
            body: tsv(&["range", "threshold", "direction", "count", "pct"], long)?,
        });
    }
    Ok(out)
}

struct Picked {
    space: EmbeddingSpace,
    a: AttributeSet,
    b: AttributeSet,
    sides: Vec<(Direction, Vec<AssociationRecord>)>,
}

/// Loads the space, runs the selection scan and returns the chosen records
/// for each requested side.
fn select(
    ctx: &Ctx,
    embed: &EmbedArgs,
    sets: &SetArgs,
    p: &PArgs,
    sel: Selection,
    sides: &[Direction],
) -> Result<Picked> {
    let (a, b) = load_sets(sets)?;
    let pc = p.config(ctx.run.seed)?;
    if sel.count == 0 {
        return Err(AppError::config("--count must be at least 1"));
    }
    let space = load_space(&embed.embeddings, embed.limit)?;
    let test = AssociationTest::new(&space, &a, &b)?;
    let (ra, rb) = parallel::scan_biased(&ctx.pool, &space, &test, &pc, sel);
    let mut out = Vec::new();
    for &d in sides {
        let records = if d == Direction::B { rb.clone() } else { ra.clone() };
        if records.len() < sel.count {
            warn(format!(
                "kind=selection-short set={} found={} requested={}",
                label(d, &a, &b),
                records.len(),
                sel.count
            ));
        }
        out.push((d, records));
    }
    Ok(Picked { space, a, b, sides: out })
}

fn words_of(records: &[AssociationRecord]) -> Vec<String> {
    records.iter().map(|r| r.word.clone()).collect()
}

fn report_text(report: &ClusterReport, silhouette: Option<f64>, set: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set: {set}");
    let _ = writeln!(s, "silhouette: {}", dat_value(silhouette));
    for l in &report.listings {
        let _ = write!(s, "\ncluster {} ({} words)", l.cluster, l.words.len());
        if let Some(label) = &l.label {
            let _ = write!(s, ": {label}");
        }
        let _ = writeln!(s, "\n{}", l.words.join(", "));
    }
    if !report.empty.is_empty() {
        let ids: Vec<String> = report.empty.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "\nempty clusters: {}", ids.join(", "));
    }
    s
}

fn dat(columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut s = columns.join(" ");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(" "));
        s.push('\n');
    }
    s.into_bytes()
}

fn cluster(ctx: &Ctx, args: &ClusterArgs) -> Result<Vec<Artifact>> {
    let labels = |p: &Option<PathBuf>| -> Result<BTreeMap<usize, String>> {
        p.as_deref().map_or(Ok(BTreeMap::new()), io::load_cluster_labels)
    };
    let (labels_a, labels_b) = (labels(&args.labels_a)?, labels(&args.labels_b)?);
    let sel = Selection {
        count: args.select.count,
        d_min: args.select.d_min,
        p_max: args.select.p_max,
    };
    let Picked { space, a, b, sides: picked } =
        select(ctx, &args.embed, &args.sets, &args.p, sel, args.select.direction.directions())?;
    ensure_dir(&args.out_dir)?;
    let header = ctx.provenance(a.name(), b.name()).header();
    let mut out = Vec::new();
    for (d, records) in picked {
        let set = label(d, &a, &b);
        let words = words_of(&records);
        let data = gather_rows(&space, &words, args.unit_length)?;
        let model = kmeans_elkan(&data, space.dim(), args.k, ctx.run.seed, args.max_iter, args.tol)?;
        let labels = if d == Direction::B { &labels_b } else { &labels_a };
        let report = cluster_report(&model, &words)?.with_labels(labels);
        let silhouette = silhouette_score(&data, space.dim(), &model.assignments, model.k);
        let layout = tsne(
            &data,
            space.dim(),
            &TsneConfig {
                perplexity: args.tsne.perplexity,
                iterations: args.tsne_iterations,
                learning_rate: args.tsne.learning_rate,
                seed: ctx.run.seed,
                ..TsneConfig::default()
            },
        )?;
        let table = tsv(
            &["word", "cluster_id", "effect_size", "p_value"],
            records.iter().zip(&model.assignments).map(|(r, c)| {
                [r.word.clone(), c.to_string(), r.effect_size.to_string(), opt(r.p_value)]
            }),
        )?;
        out.push(Artifact {
            path: args.out_dir.join(format!("{set}_clusters.tsv")),
            header: header.clone(),
            body: table,
        });
        out.push(Artifact {
            path: args.out_dir.join(format!("{set}_report.txt")),
            header: header.clone(),
            body: report_text(&report, silhouette, &set).into_bytes(),
        });
        let points = layout
            .coords
            .iter()
            .zip(&model.assignments)
            .map(|(p, c)| vec![p[0].to_string(), p[1].to_string(), c.to_string()]);
        let mut h = header.clone();
        let _ = writeln!(h, "# kl_divergence: {}", layout.kl_divergence);
        out.push(Artifact {
            path: args.out_dir.join(format!("{set}_projection.dat")),
            header: h,
            body: dat(&["x", "y", "cluster"], points),
        });
    }
    Ok(out)
}

fn elbow(ctx: &Ctx, args: &ElbowArgs) -> Result<Vec<Artifact>> {
    if args.k_min == 0 || args.k_min > args.k_max {
        return Err(AppError::config("need 1 <= --k-min <= --k-max"));
    }
    let sel = Selection {
        count: args.select.count,
        d_min: args.select.d_min,
        p_max: args.select.p_max,
    };
    let Picked { space, a, b, sides: picked } =
        select(ctx, &args.embed, &args.sets, &args.p, sel, args.select.direction.directions())?;
    let ks: Vec<usize> = (args.k_min..=args.k_max).collect();
    let mut header = ctx.provenance(a.name(), b.name()).header();
    let mut rows = Vec::new();
    for (d, records) in picked {
        let set = label(d, &a, &b);
        let data = gather_rows(&space, &words_of(&records), args.unit_length)?;
        let curve = elbow_curve(&data, space.dim(), &ks, args.restarts, ctx.run.seed)?;
        let drops: BTreeMap<usize, f64> = relative_drops(&curve).into_iter().collect();
        let _ = writeln!(
            header,
            "# elbow_k {set}: {}",
            elbow_k(&curve).map_or_else(|| "NA".to_string(), |k| k.to_string())
        );
        for p in curve {
            rows.push([
                set.clone(),
                p.k.to_string(),
                p.inertia.to_string(),
                opt(drops.get(&p.k).copied()),
            ]);
        }
    }
    Ok(vec![Artifact {
        path: args.out.clone(),
        header,
        body: csv(&["direction", "k", "inertia", "relative_drop"], rows)?,
    }])
}

fn pos_row(set: &str, cutoff: usize, c: &PosCounts) -> Vec<String> {
    [
        c.total,
        c.nouns,
        c.verbs,
        c.adjectives,
        c.adverbs,
        c.other,
        c.singular_common,
        c.singular_proper,
        c.plural_common,
        c.plural_proper,
    ]
    .iter()
    .map(ToString::to_string)
    .fold(vec![set.to_string(), cutoff.to_string()], |mut v, x| {
        v.push(x);
        v
    })
}

fn pos_table(ctx: &Ctx, args: &PosTableArgs) -> Result<Vec<Artifact>> {
    let lexicon = io::load_pos_lexicon(&args.pos_lexicon)?;
    let count = args
        .cutoffs
        .iter()
        .copied()
        .max()
        .ok_or_else(|| AppError::config("--cutoffs must be non-empty"))?;
    let sel = Selection {
        count,
        d_min: args.d_min,
        p_max: args.p_max,
    };
    let Picked { a, b, sides: picked, .. } =
        select(ctx, &args.embed, &args.sets, &args.p, sel, Side::Both.directions())?;
    let list = |d: Direction| {
        picked
            .iter()
            .find(|(x, _)| *x == d)
            .map(|(_, r)| words_of(r))
            .unwrap_or_default()
    };
    let table = pos_distribution(&list(Direction::A), &list(Direction::B), &lexicon, &args.cutoffs);
    let mut rows = Vec::new();
    for (set, counts) in [(a.name(), &table.a), (b.name(), &table.b)] {
        for (&cutoff, c) in table.cutoffs.iter().zip(counts) {
            rows.push(pos_row(set, cutoff, c));
        }
    }
    Ok(vec![Artifact {
        path: args.out.clone(),
        header: ctx.provenance(a.name(), b.name()).header(),
        body: csv(
            &[
                "direction", "cutoff", "total", "nouns", "verbs", "adjectives", "adverbs", "other", "nn", "nnp",
                "nns", "nnps",
            ],
            rows,
        )?,
    }])
}

fn stratum_label(s: &Stratum) -> String {
    match s.kind {
        StratumKind::TopFrequency(n) => format!("top_{n}"),
        StratumKind::All => "all".to_string(),
        StratumKind::MinEffect(t) => format!("abs_d>={t}"),
    }
}

fn vad_corr(ctx: &Ctx, args: &VadCorrArgs) -> Result<Vec<Artifact>> {
    let (a, b) = load_sets(&args.sets)?;
    let vad = io::load_vad(&args.vad)?;
    let freq = io::load_frequency(&args.frequency)?;
    let space = load_space(&args.embed.embeddings, args.embed.limit)?;
    let test = AssociationTest::new(&space, &a, &b)?;
    let (rated, failed) = parallel::rate_lexicon(&ctx.pool, &space, &vad, &test);
    if failed > 0 {
        warn(format!("kind=undefined-effect count={failed} (lexicon words skipped)"));
    }
    let table = correlation_table(
        &rated,
        &freq,
        &StrataConfig {
            frequency_ranges: args.ranges.clone(),
            effect_thresholds: args.thresholds.clone(),
        },
    );
    let mut header = ctx.provenance(a.name(), b.name()).header();
    let _ = writeln!(header, "# intersection: {}", table.intersection);
    let vd = vad.dimension_correlation(VadDim::Valence, VadDim::Dominance).ok();
    let _ = writeln!(header, "# lexicon_rho_valence_dominance: {}", dat_value(vd));
    let rows = table.by_frequency.iter().chain(&table.by_effect).map(|s| {
        vec![
            stratum_label(s),
            s.n.to_string(),
            opt(s.rho(VadDim::Valence)),
            opt(s.rho(VadDim::Arousal)),
            opt(s.rho(VadDim::Dominance)),
        ]
    });
    let mut out = vec![Artifact {
        path: args.out.clone(),
        header: header.clone(),
        body: csv(&["stratum", "n", "rho_valence", "rho_arousal", "rho_dominance"], rows)?,
    }];
    if let Some(path) = &args.fig6 {
        let points = table.by_effect.iter().map(|s| {
            let t = match s.kind {
                StratumKind::MinEffect(t) => t,
                _ => unreachable!("effect strata only"),
            };
            let mut r = vec![t.to_string()];
            r.extend(VadDim::ALL.iter().map(|&d| dat_value(s.rho(d))));
            r
        });
        out.push(Artifact {
            path: path.clone(),
            header,
            body: dat(&["threshold", "rho_valence", "rho_arousal", "rho_dominance"], points),
        });
    }
    Ok(out)
}

fn load_seed(spec: &str) -> Result<ConceptSeed> {
    if spec == "big-tech" {
        return Ok(ConceptSeed::big_tech());
    }
    let path = Path::new(spec);
    Ok(ConceptSeed::new(stem(path), &io::load_word_list(path)?)?)
}

fn concept(ctx: &Ctx, args: &ConceptArgs) -> Result<Vec<Artifact>> {
    let (a, b) = load_sets(&args.sets)?;
    if args.top_n == 0 {
        return Err(AppError::config("--top-n must be at least 1"));
    }
    let given = args.words.as_deref().map(io::load_word_list).transpose()?;
    let seed = if given.is_none() { Some(load_seed(&args.seeds)?) } else { None };
    let spaces = args
        .embeddings
        .iter()
        .map(|p| load_space(p, args.limit))
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(&args.out_dir)?;
    let header = ctx.provenance(a.name(), b.name()).header();
    let mut out = Vec::new();
    let words = match (given, seed) {
        (Some(w), _) => w,
        (None, Some(seed)) => {
            let mut lists: Vec<ConceptWordList> = Vec::new();
            for (i, space) in spaces.iter().enumerate() {
                let resolved = seed.resolve(space, args.drop_missing)?;
                if resolved.words.len() < seed.words.len() {
                    warn(format!(
                        "kind=seeds-dropped space={} kept={} of {}",
                        space.name(),
                        resolved.words.len(),
                        seed.words.len()
                    ));
                }
                let scorer = ConceptScorer::new(space, &resolved)?;
                let scored = parallel::concept_scores(&ctx.pool, &scorer, space);
                let list = top_scored(&seed.name, scored, args.top_n);
                let body = tsv(
                    &["position", "word", "rank", "score"],
                    list.words.iter().enumerate().map(|(j, w)| {
                        [(j + 1).to_string(), w.word.clone(), w.rank.to_string(), w.score.to_string()]
                    }),
                )?;
                let mut h = header.clone();
                let _ = writeln!(h, "# space: {}", space.name());
                out.push(Artifact {
                    path: args.out_dir.join(format!("neighbors_{}.tsv", i + 1)),
                    header: h,
                    body,
                });
                lists.push(list);
            }
            if lists.len() == 1 {
                lists.remove(0).words.into_iter().map(|w| w.word).collect()
            } else {
                intersect_lists(&lists)?
            }
        }
        (None, None) => unreachable!("seed is loaded whenever no word list is given"),
    };
    if words.is_empty() {
        warn("kind=empty-intersection (no word is shared by every list)");
    }
    let mut h = header.clone();
    let _ = writeln!(h, "# words: {}", words.len());
    out.push(Artifact {
        path: args.out_dir.join("intersection.txt"),
        header: h,
        body: words.iter().fold(String::new(), |s, w| s + w + "\n").into_bytes(),
    });
    let (an, bn) = (a.name(), b.name());
    let mut rows = Vec::new();
    for (i, space) in spaces.iter().enumerate() {
        let test = AssociationTest::new(space, &a, &b)?;
        let dist = concept_bias_distribution(&words, space, &test, &args.thresholds)?;
        let mut points = Vec::new();
        for (j, band) in dist.bands.iter().enumerate() {
            rows.push([
                space.name().to_string(),
                band.threshold.to_string(),
                dist.total.to_string(),
                band.a.to_string(),
                fmt_pct(dist.pct(j, Direction::A)),
                band.b.to_string(),
                fmt_pct(dist.pct(j, Direction::B)),
            ]);
            points.push(vec![
                (j + 1).to_string(),
                band.threshold.to_string(),
                dist.pct(j, Direction::A).to_string(),
                dist.pct(j, Direction::B).to_string(),
            ]);
        }
        let mut h = header.clone();
        let _ = writeln!(h, "# space: {}", space.name());
        out.push(Artifact {
            path: args.out_dir.join(format!("fig5_{}.dat", i + 1)),
            header: h,
            body: dat(&["x", "threshold", &format!("{an}_pct"), &format!("{bn}_pct")], points),
        });
    }
    let a_cnt = an.to_string();
    let a_pct = format!("{an}_pct");
    let b_cnt = bn.to_string();
    let b_pct = format!("{bn}_pct");
    out.push(Artifact {
        path: args.out_dir.join("distribution.csv"),
        header,
        body: csv(&["space", "threshold", "total", &a_cnt, &a_pct, &b_cnt, &b_pct], rows)?,
    });
    Ok(out)
}

fn project(ctx: &Ctx, args: &ProjectArgs) -> Result<Vec<Artifact>> {
    let (a, b) = load_sets(&args.sets)?;
    if args.max_points > MAX_POINTS {
        return Err(AppError::config(format!("--max-points cannot exceed {MAX_POINTS}")));
    }
    let space = load_space(&args.embed.embeddings, args.embed.limit)?;
    let test = AssociationTest::new(&space, &a, &b)?;
    let words: Vec<String> = match &args.words {
        Some(path) => io::load_word_list(path)?,
        None => space.top_n(args.top).to_vec(),
    };
    if words.len() > args.max_points {
        return Err(AppError::capacity(format!(
            "{} words exceed the projection limit of {}",
            words.len(),
            args.max_points
        )));
    }
    let no_p = PConfig { mode: None, seed: ctx.run.seed };
    let batch = parallel::batch_associations(&ctx.pool, &space, &test, &words, &no_p)?;
    report_skips(&batch.skipped);
    let data = gather_rows(&space, &words_of(&batch.records), false)?;
    let layout = tsne(
        &data,
        space.dim(),
        &TsneConfig {
            perplexity: args.tsne.perplexity,
            iterations: args.iterations,
            learning_rate: args.tsne.learning_rate,
            seed: ctx.run.seed,
            max_points: args.max_points,
            ..TsneConfig::default()
        },
    )?;
    let mut header = ctx.provenance(a.name(), b.name()).header();
    let _ = writeln!(header, "# kl_divergence: {}", layout.kl_divergence);
    let points = layout.coords.iter().zip(&batch.records).map(|(p, r)| {
        vec![p[0].to_string(), p[1].to_string(), r.effect_size.to_string()]
    });
    Ok(vec![Artifact {
        path: args.out.clone(),
        header,
        body: dat(&["x", "y", "effect_size"], points),
    }])
}
