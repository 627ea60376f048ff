//! Command-line entry point: `serve`, `simulate`, `analyze`, `import`,
//! `export` and `stats`.
//!
//! Exit codes: 0 on success, 1 on a runtime failure (message on stderr),
//! 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::anova::{backward_eliminate, records, sequential_anova, treatment_confint, ModelSpec};
use crate::content::{ContentTree, NodeId};
use crate::document::ContentDocument;
use crate::engine::AllocationPolicy;
use crate::item_bank::{Item, ItemBank};
use crate::service::{self, ServiceState, CONTENT_FILE};
use crate::trial_sim::{self, SimParams, DEFAULT_ALPHA};

#[derive(Debug, Parser)]
#[command(name = "tutorweb", version, about = "Adaptive quiz engine and crossover-trial tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP quiz service.
    Serve(ServeArgs),
    /// Simulate a crossover trial and write its exam scores.
    Simulate(SimulateArgs),
    /// Fit the crossover model to a trial data file.
    Analyze(AnalyzeArgs),
    /// Add a content document (or a bare list of items) to a data directory.
    Import(ImportArgs),
    /// Write the content store of a data directory as one document.
    Export(ExportArgs),
    /// Per-question difficulty and rank for one lecture.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "TUTORWEB_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "TUTORWEB_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Concentration of the allocation kernel.
    #[arg(long, default_value_t = 8.0)]
    pub k: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 184)]
    pub students: usize,
    #[arg(long, default_value_t = 4)]
    pub periods: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also run this many replications and print rejection rates.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Trial data file; a `<out>.manifest.json` is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 5.0)]
    pub baseline: f64,
    #[arg(long, default_value_t = 0.0)]
    pub treatment_effect: f64,
    #[arg(long, default_value_t = 1.5)]
    pub math_effect: f64,
    #[arg(long, default_value_t = 0.0)]
    pub interaction_effect: f64,
    #[arg(long, default_value_t = 1.0)]
    pub student_sd: f64,
    #[arg(long, default_value_t = 1.2)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 0.5)]
    pub strong_fraction: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Machine-readable results.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    #[arg(long, env = "TUTORWEB_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, env = "TUTORWEB_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, env = "TUTORWEB_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub lecture: String,
    #[arg(long, default_value_t = 8.0)]
    pub k: f64,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

type CmdResult = Result<(), String>;

fn execute(command: Command) -> CmdResult {
    match command {
        Command::Serve(a) => serve(a),
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Import(a) => import(a),
        Command::Export(a) => export(a),
        Command::Stats(a) => stats(a),
    }
}

fn policy(k: f64) -> Result<AllocationPolicy, String> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(format!("--k must be positive, got {k}"));
    }
    Ok(AllocationPolicy { k, ..AllocationPolicy::default() })
}

fn serve(a: ServeArgs) -> CmdResult {
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).try_init();
    let state = ServiceState::open(&a.data_dir, policy(a.k)?, a.seed).map_err(|e| e.to_string())?;
    tracing::info!(
        "loaded {} items, replayed {} log entries from {}",
        state.engine().bank().len(),
        state.log().len(),
        a.data_dir.display()
    );
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(service::serve(state.into_shared(), a.port)).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub params: SimParams,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let params = SimParams {
        n_students: a.students,
        n_periods: a.periods,
        baseline: a.baseline,
        treatment_effect: a.treatment_effect,
        math_effect: a.math_effect,
        interaction_effect: a.interaction_effect,
        student_sd: a.student_sd,
        noise_sd: a.noise_sd,
        strong_fraction: a.strong_fraction,
        seed: a.seed,
        ..SimParams::default()
    };
    params.validate().map_err(|e| e.to_string())?;
    let ids = params.student_ids();
    let assignment = trial_sim::assign_crossover(&ids, params.seed).map_err(|e| e.to_string())?;
    let data = trial_sim::simulate_exam_scores(&assignment, &params).map_err(|e| e.to_string())?;
    match &a.out {
        Some(out) => {
            records::save(out, &data).map_err(|e| format!("{}: {e}", out.display()))?;
            let manifest = RunManifest { seed: params.seed, params: params.clone() };
            let json = serde_json::to_vec_pretty(&manifest).map_err(|e| e.to_string())?;
            fs::write(manifest_path(out), json).map_err(|e| e.to_string())?;
            let (tw, wt) = assignment.group_sizes();
            println!("wrote {} records ({} TWTW, {} WTWT) to {}", data.len(), tw, wt, out.display());
        }
        None if a.reps.is_none() => {
            records::write_records(std::io::stdout().lock(), &data).map_err(|e| e.to_string())?;
        }
        None => {}
    }
    if let Some(reps) = a.reps {
        if reps == 0 {
            return Err("--reps must be at least 1".into());
        }
        let cal = trial_sim::calibrate(&params, reps, a.alpha).map_err(|e| e.to_string())?;
        println!("replications: {} (seeds {}..{})", cal.reps, params.seed, params.seed + reps as u64 - 1);
        println!("{:<16} {:>10}", "term", format!("P(p<{})", a.alpha));
        for (term, rate) in &cal.rejection_rates {
            println!("{term:<16} {rate:>10.4}");
        }
        println!("treatment removed: {}", cal.treatment_removed);
        println!("removed before interaction: {}", cal.order_violations);
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> CmdResult {
    let data = records::load(&a.input).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let dataset = records::to_dataset(&data).map_err(|e| e.to_string())?;
    let spec = ModelSpec::crossover();
    let table = sequential_anova(&dataset, &spec).map_err(|e| e.to_string())?;
    let elimination = backward_eliminate(&dataset, &spec, a.alpha).map_err(|e| e.to_string())?;
    let ci = treatment_confint(&dataset, &spec.without("treatment:math"), 0.95).ok();

    println!("observations: {}", table.n_obs);
    println!("{}", table.render());
    println!("backward elimination (alpha = {}):", a.alpha);
    if elimination.trace.is_empty() {
        println!("  nothing removed");
    }
    for (i, r) in elimination.trace.iter().enumerate() {
        println!("  {}. removed {:<16} p = {:.6}", i + 1, r.term, r.p);
    }
    println!("final model: {}", elimination.spec.names().join(" + "));
    println!("{}", elimination.table.render());
    match &ci {
        Some(ci) => println!(
            "{} estimate {:.4}, {:.0}% CI [{:.4}, {:.4}] on {} df",
            ci.contrast,
            ci.estimate,
            ci.level * 100.0,
            ci.lo,
            ci.hi,
            ci.df
        ),
        None => println!("treatment contrast not estimable"),
    }
    if let Some(out) = &a.out {
        let json = serde_json::json!({
            "table": table,
            "elimination": elimination,
            "treatment_ci": ci,
        });
        fs::write(out, serde_json::to_vec_pretty(&json).map_err(|e| e.to_string())?)
            .map_err(|e| format!("{}: {e}", out.display()))?;
    }
    Ok(())
}

/// An import file: a full document or just a list of items.
#[derive(Deserialize)]
#[serde(untagged)]
enum ImportFile {
    Document(ContentDocument),
    Items(Vec<Item>),
}

fn load_store(data_dir: &Path) -> Result<(ContentTree, ItemBank), String> {
    let mut content = ContentTree::new();
    let mut bank = ItemBank::new();
    let path = data_dir.join(CONTENT_FILE);
    if path.exists() {
        ContentDocument::load(&path)
            .and_then(|d| d.import_into(&mut content, &mut bank))
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok((content, bank))
}

fn import(a: ImportArgs) -> CmdResult {
    let bytes = fs::read(&a.input).map_err(|e| format!("{}: {e}", a.input.display()))?;
    let doc = match serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", a.input.display()))? {
        ImportFile::Document(d) => d,
        ImportFile::Items(items) => ContentDocument { tree: Vec::new(), items },
    };
    let (mut content, mut bank) = load_store(&a.data_dir)?;
    let summary = doc.import_into(&mut content, &mut bank).map_err(|e| e.to_string())?;
    fs::create_dir_all(&a.data_dir).map_err(|e| e.to_string())?;
    ContentDocument::export(&content, &bank).save(&a.data_dir.join(CONTENT_FILE)).map_err(|e| e.to_string())?;
    println!("imported {} nodes, {} items, {} course links", summary.nodes, summary.items, summary.links);
    Ok(())
}

fn export(a: ExportArgs) -> CmdResult {
    let (content, bank) = load_store(&a.data_dir)?;
    ContentDocument::export(&content, &bank).save(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))
}

fn stats(a: StatsArgs) -> CmdResult {
    let state = ServiceState::open(&a.data_dir, policy(a.k)?, 0).map_err(|e| e.to_string())?;
    let ranked = state.engine().ranked(&NodeId::from(a.lecture.as_str())).map_err(|e| e.to_string())?;
    println!(
        "{:>5} {:<20} {:>10} {:>9} {:>8} {:>10}",
        "rank", "question", "allocated", "answered", "correct", "difficulty"
    );
    for (i, r) in ranked.iter().enumerate() {
        println!(
            "{:>5} {:<20} {:>10} {:>9} {:>8} {:>10.4}",
            i + 1,
            r.id.to_string(),
            r.stats.times_allocated,
            r.stats.times_answered,
            r.stats.times_correct,
            r.difficulty.value()
        );
    }
    Ok(())
}
