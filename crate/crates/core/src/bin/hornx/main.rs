// SPDX-License-Identifier: Apache-2.0

//! `hornx`: data pipeline, Horn learner and evaluation harness.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 teacher failure,
//! 3 query budget exhausted (the hypothesis is still written).

use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use horn_extract::eval::{disagreement, EvalError, RunManifest};
use horn_extract::learner::{learn, LearnError, LearnerConfig, Termination, TraceEvent};
use horn_extract::logic::{
    is_valid_name, parse_rules, render_rules, rule_file_names, HornTheory, IntersectionMode, VariableTable,
};
use horn_extract::oracles::{
    mq_exact, protocol, sample_size, Caching, Counting, EquivalenceOracle, ExactEquivalence, ExactTeacher, GenConfig,
    GenProbs, MembershipOracle, OracleConfig, OracleError, RemoteTeacher, SampleMode, SampledEquivalence,
};
use horn_extract::pipeline::{
    binarize, dualize, fit_schema, gen_training_set, read_interpretations, synth_hcc, target_from_rows,
    write_interpretations, write_training_set, BinarizationSchema, CutStrategy, DatasetMeta, GenDataConfig, RawDataset,
    SynthConfig,
};

#[derive(Parser)]
#[command(name = "hornx", version, about = "Extract Horn theories from black-box binary classifiers")]
struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit cut-points, binarize and dualize a raw CSV dataset.
    Binarize(BinarizeArgs),
    /// Build the target theory (row rules plus disjointness) from a dualized dataset.
    BuildTarget(BuildTargetArgs),
    /// Generate a balanced labelled training set from a target theory.
    GenData(GenDataArgs),
    /// Learn a Horn theory from a teacher.
    Learn(LearnArgs),
    /// Pairwise disagreement table between classifiers on one random sample.
    Eval(EvalArgs),
    /// Write a synthetic HCC-shaped dataset and its metadata.
    SynthHcc(SynthArgs),
    /// Serve an exact Horn theory over the line protocol.
    Serve(ServeArgs),
}

#[derive(Args)]
struct BinarizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    out_schema: PathBuf,
    #[arg(long)]
    out_data: PathBuf,
    /// `terciles`, or a JSON file mapping column names to `[c1, c2]`.
    #[arg(long, default_value = "terciles")]
    cuts: String,
}

#[derive(Args)]
struct BuildTargetArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Variable table output [default: next to --out, as <stem>.vars.json].
    #[arg(long)]
    out_vars: Option<PathBuf>,
}

#[derive(Args)]
struct GenProbArgs {
    /// Probability of drawing 0 for a variable.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p0: f64,
    /// Probability of drawing 1 for a variable.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p1: f64,
    /// Probability of drawing `?` for a variable.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    p_unknown: f64,
}

impl GenProbArgs {
    fn probs(&self) -> Result<GenProbs> {
        Ok(GenProbs::new(self.p0, self.p1, self.p_unknown)?)
    }
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long)]
    target: PathBuf,
    /// Variable table [default: <target stem>.vars.json if present, else inferred].
    #[arg(long)]
    vars: Option<PathBuf>,
    #[arg(long)]
    pos: usize,
    #[arg(long)]
    neg: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    probs: GenProbArgs,
    /// Allow a variable and its dual to be drawn both true.
    #[arg(long)]
    ignore_duals: bool,
    /// Failed draws tolerated per example before giving up.
    #[arg(long, default_value_t = 100_000)]
    max_attempts: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum EqKind {
    Sampled,
    Exact,
}

#[derive(Args)]
struct LearnArgs {
    /// `exact:target.rules`, `remote:host:port` or `remote:<command>`.
    #[arg(long)]
    teacher: String,
    /// Variable table (required for remote teachers).
    #[arg(long)]
    vars: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    eq_budget: u32,
    /// `power` or `binomial`.
    #[arg(long, default_value = "power")]
    sample_mode: SampleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per equivalence query, instead of the formula.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, value_enum, default_value = "sampled")]
    eq: EqKind,
    #[arg(long)]
    background: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// JSON-lines trace, one event per counterexample.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// `zero-fill` or `preserve-unknown`.
    #[arg(long, default_value = "zero-fill")]
    intersection: IntersectionMode,
    /// Route positive counterexamples through the refine/append step too.
    #[arg(long)]
    strict: bool,
    /// After every step, re-ask the teacher about each stored negative example.
    #[arg(long)]
    check_sound: bool,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[command(flatten)]
    probs: GenProbArgs,
    /// Never draw a variable and its dual both true in equivalence samples.
    #[arg(long)]
    respect_duals: bool,
    /// Reconnection attempts for remote teachers.
    #[arg(long, default_value_t = 3)]
    retries: u32,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Comma-separated `[name=]spec`; a spec is a rule file, `exact:file` or `remote:...`.
    #[arg(long)]
    classifiers: String,
    /// Variable table [default: that of the first rule file].
    #[arg(long)]
    vars: Option<PathBuf>,
    /// Sample size: an integer, or `<k>s` for k times the equivalence sample size.
    #[arg(long, default_value = "2s")]
    sample: String,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value = "power")]
    sample_mode: SampleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the labelled sample as CSV.
    #[arg(long)]
    save_sample: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[command(flatten)]
    probs: GenProbArgs,
    #[arg(long)]
    respect_duals: bool,
    #[arg(long, default_value_t = 3)]
    retries: u32,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    meta: PathBuf,
    #[arg(long, default_value_t = 165)]
    rows: usize,
    #[arg(long, default_value_t = 26)]
    quantitative: usize,
    #[arg(long, default_value_t = 23)]
    qualitative: usize,
    #[arg(long, default_value_t = 0.1022)]
    missing_rate: f64,
    /// Rows labelled 1 [default: 102/165 of --rows].
    #[arg(long)]
    positives: Option<usize>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    rules: PathBuf,
    #[arg(long)]
    vars: Option<PathBuf>,
    /// Listen on this TCP port (0 picks a free one); without it, serve stdin/stdout.
    #[arg(long)]
    port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Exit after the first connection closes.
    #[arg(long)]
    once: bool,
    #[arg(long, default_value = "exact")]
    model: String,
}

enum Outcome {
    Done,
    BudgetExhausted,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Binarize(a) => cmd_binarize(a),
        Command::BuildTarget(a) => cmd_build_target(a),
        Command::GenData(a) => cmd_gen_data(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Eval(a) => cmd_eval(a),
        Command::SynthHcc(a) => cmd_synth(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::BudgetExhausted) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_teacher_failure(&e) { 2 } else { 1 })
        }
    }
}

fn oracle_failure(e: &OracleError) -> bool {
    !matches!(e, OracleError::Config(_) | OracleError::Logic(_))
}

fn is_teacher_failure(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        if let Some(o) = e.downcast_ref::<OracleError>() {
            return oracle_failure(o);
        }
        match e.downcast_ref::<LearnError>() {
            Some(LearnError::Oracle(o)) => return oracle_failure(o),
            Some(LearnError::Unsound { .. }) => return true,
            _ => {}
        }
        matches!(e.downcast_ref::<EvalError>(), Some(EvalError::Oracle(o)) if oracle_failure(o))
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn sibling_vars(rules: &Path) -> PathBuf {
    rules.with_extension("vars.json")
}

/// The table for a rule file: `--vars`, else `<stem>.vars.json`, else the
/// names in the file (pairing `x` with `not_x`).
fn table_for(rules: &Path, vars: Option<&Path>) -> Result<VariableTable> {
    let explicit = vars.map(Path::to_path_buf);
    let sibling = sibling_vars(rules);
    match explicit.or_else(|| sibling.exists().then_some(sibling)) {
        Some(p) => VariableTable::from_json(&read(&p)?).with_context(|| format!("in {}", p.display())),
        None => {
            let names = rule_file_names(&read(rules)?).with_context(|| format!("in {}", rules.display()))?;
            Ok(VariableTable::infer_from_names(&names)?)
        }
    }
}

fn load_theory(path: &Path, table: &VariableTable) -> Result<HornTheory> {
    parse_rules(&read(path)?, table).with_context(|| format!("in {}", path.display()))
}

fn cmd_binarize(a: BinarizeArgs) -> Result<Outcome> {
    let meta = DatasetMeta::from_json(&read(&a.meta)?).with_context(|| format!("in {}", a.meta.display()))?;
    let file = fs::File::open(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let raw = RawDataset::read_csv(BufReader::new(file), meta).with_context(|| format!("in {}", a.input.display()))?;
    let strategy = if a.cuts == "terciles" {
        CutStrategy::Terciles
    } else {
        let text = read(Path::new(&a.cuts))?;
        let cuts = serde_json::from_str(&text).with_context(|| format!("in {}", a.cuts))?;
        CutStrategy::Explicit(cuts)
    };
    let schema = fit_schema(&raw, &strategy)?;
    let table = schema.table()?;
    let rows: Vec<_> = binarize(&raw, &schema)?.iter().map(dualize).collect();
    write(&a.out_schema, &(schema.to_json() + "\n"))?;
    let mut out = create(&a.out_data)?;
    write_interpretations(&mut out, &table, &rows)?;
    out.flush()?;
    info!("{} rows, {} variables after dualization", rows.len(), table.len());
    Ok(Outcome::Done)
}

fn cmd_build_target(a: BuildTargetArgs) -> Result<Outcome> {
    let schema =
        BinarizationSchema::from_json(&read(&a.schema)?).with_context(|| format!("in {}", a.schema.display()))?;
    let table = schema.table()?;
    let file = fs::File::open(&a.data).with_context(|| format!("cannot read {}", a.data.display()))?;
    let (header, rows) =
        read_interpretations(BufReader::new(file)).with_context(|| format!("in {}", a.data.display()))?;
    if header != table.names() {
        bail!("{} does not have the schema's columns", a.data.display());
    }
    let target = target_from_rows(&rows, schema.label(), &table)?;
    write(&a.out, &render_rules(&target, &table))?;
    let vars = a.out_vars.unwrap_or_else(|| sibling_vars(&a.out));
    write(&vars, &(table.to_json() + "\n"))?;
    info!("{} clauses over {} variables", target.len(), table.len());
    Ok(Outcome::Done)
}

fn cmd_gen_data(a: GenDataArgs) -> Result<Outcome> {
    let table = table_for(&a.target, a.vars.as_deref())?;
    let target = load_theory(&a.target, &table)?;
    let config = GenDataConfig {
        gen: GenConfig { probs: a.probs.probs()?, respect_duals: !a.ignore_duals },
        max_attempts: a.max_attempts,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let set = gen_training_set(&target, &table, a.pos, a.neg, &config, &mut rng)?;
    let mut out = create(&a.out)?;
    write_training_set(&mut out, &table, &set)?;
    out.flush()?;
    Ok(Outcome::Done)
}

enum Teacher {
    Exact(PathBuf),
    Tcp(String),
    Command(Vec<String>),
}

fn parse_teacher(spec: &str) -> Result<Teacher> {
    if let Some(path) = spec.strip_prefix("exact:") {
        return Ok(Teacher::Exact(path.into()));
    }
    let Some(rest) = spec.strip_prefix("remote:") else {
        bail!("teacher `{spec}` must start with `exact:` or `remote:`");
    };
    let is_addr = rest.rsplit_once(':').is_some_and(|(host, port)| {
        !host.is_empty() && !host.contains(char::is_whitespace) && port.parse::<u16>().is_ok()
    });
    if is_addr {
        return Ok(Teacher::Tcp(rest.into()));
    }
    let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    if words.is_empty() {
        bail!("empty remote teacher command");
    }
    Ok(Teacher::Command(words))
}

fn connect(teacher: &Teacher, n_vars: usize, retries: u32) -> Result<Box<dyn MembershipOracle>> {
    let remote = match teacher {
        Teacher::Exact(_) => unreachable!("exact teachers are built from their theory"),
        Teacher::Tcp(addr) => RemoteTeacher::tcp(addr, n_vars),
        Teacher::Command(words) => RemoteTeacher::spawn(words.clone(), n_vars),
    }?;
    info!("connected to remote model `{}`", remote.model());
    Ok(Box::new(Caching::new(remote.with_max_retries(retries))))
}

fn cmd_learn(a: LearnArgs) -> Result<Outcome> {
    let started = Instant::now();
    let spec = parse_teacher(&a.teacher)?;
    let (table, target) = match &spec {
        Teacher::Exact(path) => {
            let table = table_for(path, a.vars.as_deref())?;
            let target = load_theory(path, &table)?;
            (table, Some(target))
        }
        _ => {
            let vars = a.vars.as_deref().ok_or_else(|| anyhow!("remote teachers need --vars"))?;
            let table = VariableTable::from_json(&read(vars)?).with_context(|| format!("in {}", vars.display()))?;
            (table, None)
        }
    };
    let background = a.background.as_deref().map(|p| load_theory(p, &table)).transpose()?;
    let oracle = OracleConfig {
        epsilon: a.eps,
        delta: a.delta,
        sample_mode: a.sample_mode,
        eq_budget: a.eq_budget,
        rng_seed: a.seed,
        gen: GenConfig { probs: a.probs.probs()?, respect_duals: a.respect_duals },
        sample_override: a.samples,
        batch_size: a.batch_size,
    };
    oracle.validate()?;
    let config = LearnerConfig {
        eq_budget: a.eq_budget,
        background,
        intersection_mode: a.intersection,
        trace: a.check_sound,
        strict_paper_mode: a.strict,
    };

    let inner: Box<dyn MembershipOracle> = match (&spec, &target) {
        (Teacher::Exact(_), Some(t)) => Box::new(ExactTeacher::new(t.clone())),
        _ => connect(&spec, table.len(), a.retries)?,
    };
    let mut teacher = Counting::new(inner);
    let mut eq: Box<dyn EquivalenceOracle> = match (a.eq, &target) {
        (EqKind::Exact, Some(t)) => Box::new(ExactEquivalence::new(t.clone())),
        (EqKind::Exact, None) => bail!("--eq exact needs an exact teacher"),
        (EqKind::Sampled, _) => Box::new(SampledEquivalence::new(&oracle, table.clone())?),
    };
    info!("{} samples per equivalence query", oracle.samples_per_query(table.len()));

    let mut trace = a.trace.as_deref().map(create).transpose()?;
    let mut trace_err: Option<io::Error> = None;
    let on_event = |e: &TraceEvent| {
        if let (Some(w), None) = (trace.as_mut(), trace_err.as_ref()) {
            let line = serde_json::to_string(e).expect("trace event serializes");
            if let Err(err) = writeln!(w, "{line}") {
                trace_err = Some(err);
            }
        }
    };
    let result = learn(&mut teacher, eq.as_mut(), &table, &config, on_event)?;
    if let Some(err) = trace_err {
        return Err(err).context("cannot write trace");
    }
    if let Some(mut w) = trace {
        w.flush().context("cannot write trace")?;
    }
    write(&a.out, &render_rules(&result.hypothesis, &table))?;

    let stats = result.stats;
    eprintln!(
        "{}: {} clauses after {} equivalence and {} membership queries",
        match result.terminated_by {
            Termination::EquivalenceYes => "accepted",
            Termination::BudgetExhausted => "budget exhausted",
        },
        result.hypothesis.len(),
        stats.eq_count,
        stats.mq_count
    );
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("learn");
        m.config = json!({
            "teacher": a.teacher,
            "oracle": oracle,
            "eq": match a.eq { EqKind::Exact => "exact", EqKind::Sampled => "sampled" },
            "intersection_mode": a.intersection,
            "strict": a.strict,
            "background": a.background,
            "terminated_by": result.terminated_by,
        });
        m.seeds.insert("eq_sample".into(), a.seed);
        m.artifacts.insert("hypothesis".into(), a.out.display().to_string());
        if let Some(t) = &a.trace {
            m.artifacts.insert("trace".into(), t.display().to_string());
        }
        m.timings.insert("total".into(), started.elapsed().as_secs_f64());
        m.timings.insert("membership".into(), stats.mq_time.as_secs_f64());
        m.timings.insert("equivalence".into(), stats.eq_time.as_secs_f64());
        m.query_counts.insert("learner_membership".into(), stats.mq_count);
        m.query_counts.insert("equivalence".into(), stats.eq_count);
        m.query_counts.insert("rhs_cache_hits".into(), stats.cache_hits);
        m.query_counts.insert("teacher_total".into(), teacher.stats().mq_count);
        write(path, &m.to_json())?;
    }
    Ok(match result.terminated_by {
        Termination::EquivalenceYes => Outcome::Done,
        Termination::BudgetExhausted => Outcome::BudgetExhausted,
    })
}

struct ClassifierSpec {
    name: String,
    teacher: Teacher,
}

fn parse_classifiers(list: &str) -> Result<Vec<ClassifierSpec>> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, spec) = match item.split_once('=') {
            Some((n, s)) if is_valid_name(n) => (Some(n.to_string()), s),
            _ => (None, item),
        };
        let teacher = if spec.starts_with("exact:") || spec.starts_with("remote:") {
            parse_teacher(spec)?
        } else {
            Teacher::Exact(spec.into())
        };
        let name = name.unwrap_or_else(|| match &teacher {
            Teacher::Exact(p) => p.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned()),
            _ => "remote".into(),
        });
        out.push(ClassifierSpec { name, teacher });
    }
    if out.len() < 2 {
        bail!("--classifiers needs at least 2 entries, got {}", out.len());
    }
    Ok(out)
}

fn parse_sample(spec: &str, mode: SampleMode, eps: f64, delta: f64, n_vars: usize) -> Result<u64> {
    if let Some(k) = spec.strip_suffix('s') {
        let k: u64 = if k.is_empty() { 1 } else { k.parse().with_context(|| format!("bad --sample `{spec}`"))? };
        return Ok(sample_size(mode, eps, delta, n_vars).saturating_mul(k));
    }
    spec.parse().with_context(|| format!("bad --sample `{spec}` (expected N or <k>s)"))
}

fn cmd_eval(a: EvalArgs) -> Result<Outcome> {
    let started = Instant::now();
    let specs = parse_classifiers(&a.classifiers)?;
    let table = match (
        &a.vars,
        specs.iter().find_map(|s| match &s.teacher {
            Teacher::Exact(p) => Some(p),
            _ => None,
        }),
    ) {
        (Some(v), _) => VariableTable::from_json(&read(v)?).with_context(|| format!("in {}", v.display()))?,
        (None, Some(first)) => table_for(first, None)?,
        (None, None) => bail!("remote-only evaluation needs --vars"),
    };
    if !(a.eps > 0.0 && a.eps < 1.0 && a.delta > 0.0 && a.delta < 1.0) {
        bail!("--eps and --delta must lie in (0,1)");
    }
    let n = parse_sample(&a.sample, a.sample_mode, a.eps, a.delta, table.len())?;
    let gen = GenConfig { probs: a.probs.probs()?, respect_duals: a.respect_duals };

    let mut owned: Vec<(String, Box<dyn MembershipOracle>)> = Vec::new();
    for s in &specs {
        let teacher: Box<dyn MembershipOracle> = match &s.teacher {
            Teacher::Exact(p) => Box::new(ExactTeacher::new(load_theory(p, &table)?)),
            remote => connect(remote, table.len(), a.retries)?,
        };
        owned.push((s.name.clone(), teacher));
    }
    let mut borrowed: Vec<(String, &mut dyn MembershipOracle)> =
        owned.iter_mut().map(|(n, t)| (n.clone(), t.as_mut() as &mut dyn MembershipOracle)).collect();
    let (report, sample) = disagreement(&mut borrowed, &table, n, gen, a.seed, a.batch_size.max(1))?;

    write(&a.out, &report.to_json())?;
    if let Some(path) = &a.save_sample {
        let mut w = create(path)?;
        sample.write_csv(&mut w)?;
        w.flush()?;
    }
    print!("{}", report.render_table());
    if let Some(path) = &a.manifest {
        let mut m = RunManifest::new("eval");
        m.config = json!({
            "classifiers": a.classifiers,
            "sample": a.sample,
            "epsilon": a.eps,
            "delta": a.delta,
            "sample_mode": a.sample_mode,
            "gen": gen,
        });
        m.seeds.insert("sample".into(), a.seed);
        m.artifacts.insert("report".into(), a.out.display().to_string());
        if let Some(p) = &a.save_sample {
            m.artifacts.insert("sample".into(), p.display().to_string());
        }
        m.timings.insert("total".into(), started.elapsed().as_secs_f64());
        m.query_counts.insert("per_classifier".into(), n);
        write(path, &m.to_json())?;
    }
    Ok(Outcome::Done)
}

fn cmd_synth(a: SynthArgs) -> Result<Outcome> {
    let mut config = SynthConfig::with_shape(a.rows, a.quantitative, a.qualitative);
    config.missing_rate = a.missing_rate;
    if let Some(p) = a.positives {
        config.positives = p;
    }
    let data = synth_hcc(&config, a.seed)?;
    let mut out = create(&a.out)?;
    data.write_csv(&mut out)?;
    out.flush()?;
    write(&a.meta, &(data.meta.to_json() + "\n"))?;
    Ok(Outcome::Done)
}

fn cmd_serve(a: ServeArgs) -> Result<Outcome> {
    let table = table_for(&a.rules, a.vars.as_deref())?;
    let theory = load_theory(&a.rules, &table)?;
    let n = table.len();
    let Some(port) = a.port else {
        let stdin = io::stdin().lock();
        protocol::serve(stdin, io::stdout().lock(), n, &a.model, |i| mq_exact(&theory, i))?;
        return Ok(Outcome::Done);
    };
    let listener =
        TcpListener::bind((a.host.as_str(), port)).with_context(|| format!("cannot listen on {}:{port}", a.host))?;
    println!("listening on {}", listener.local_addr()?);
    io::stdout().flush()?;
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                warn!("accept failed: {e}");
                continue;
            }
        };
        stream.set_nodelay(true)?;
        let theory = theory.clone();
        let model = a.model.clone();
        let handle = thread::spawn(move || -> io::Result<u64> {
            let reader = BufReader::new(stream.try_clone()?);
            protocol::serve(reader, stream, n, &model, |i| mq_exact(&theory, i))
        });
        if a.once {
            match handle.join() {
                Ok(r) => {
                    r?;
                }
                Err(_) => bail!("connection handler panicked"),
            }
            break;
        }
    }
    Ok(Outcome::Done)
}
