//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad flags or input, 3 no convergence (no
//! outputs written), 1 failure writing outputs.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytics::{self, TauResult};
use crate::aprank::{self, ConvergenceConfig, ScoreState};
use crate::bipartite::{BipartiteNetwork, CitationGraph};
use crate::dataset::{self, Corpus, Format};
use crate::journals;
use crate::month::YearMonth;
use crate::ranking::{format_sig, RankingTable};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "scholarank",
    version,
    about = "Rank scientists and papers on the author-paper citation network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the ranking and write paper and author score tables.
    Rank(RunConfig),
    /// Time-weighted paper scores (score per month of age).
    Tap {
        #[command(flatten)]
        run: RunConfig,
        /// Observation month, YYYY-MM.
        #[arg(long, value_parser = parse_month)]
        observe: YearMonth,
    },
    /// Scatter table and Kendall tau between two rankings.
    Compare {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long, value_enum, required_unless_present = "table_a")]
        pair: Option<Pair>,
        /// Needed for `--pair ap-tap`.
        #[arg(long, value_parser = parse_month)]
        observe: Option<YearMonth>,
        /// Compare two existing `entity_id,score,rank` files instead.
        #[arg(long, requires = "table_b", conflicts_with = "pair")]
        table_a: Option<PathBuf>,
        #[arg(long, requires = "table_a")]
        table_b: Option<PathBuf>,
    },
    /// Per-journal average score, average rank and overall influence.
    Journals {
        #[command(flatten)]
        run: RunConfig,
        /// CSV `journal,ais,if5` joined onto the output.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Co-author comparison table and co-authorship graph of the top authors.
    Coauthor {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long = "top", default_value_t = 150)]
        top_k: usize,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        graph_format: GraphFormat,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Jsonl)]
    format: InputFormat,
    #[arg(long, default_value_t = aprank::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long = "max-iter", default_value_t = aprank::DEFAULT_MAX_ITERATIONS)]
    max_iter: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; output bytes do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Fixed timestamp for the run manifest.
    #[arg(long)]
    seed_manifest: Option<String>,
    /// Also write `convergence.csv` with `iteration,delta` per round.
    #[arg(long)]
    convergence_log: bool,
    /// Also write the cite and authorship relations as edge lists.
    #[arg(long)]
    dump_network: bool,
    /// Suppress warnings.
    #[arg(short, long)]
    quiet: bool,
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InputFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[allow(clippy::enum_variant_names)]
enum Pair {
    ApCcAuthors,
    ApCcPapers,
    ApTap,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Graphml,
}

fn parse_month(s: &str) -> Result<YearMonth, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } => EXIT_NO_CONVERGENCE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_OUTPUT,
        message: format!("{}: {e}", path.display()),
    }
}

type CliResult<T> = Result<T, Failure>;

impl RunConfig {
    fn validate(&self) -> CliResult<()> {
        self.convergence().validate()?;
        if self.threads == Some(0) {
            return Err(input_error("--threads must be at least 1"));
        }
        Ok(())
    }

    fn convergence(&self) -> ConvergenceConfig {
        ConvergenceConfig {
            delta_threshold: self.delta,
            max_iterations: self.max_iter,
        }
    }

    fn input(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| input_error("--input is required"))
    }

    fn warn(&self, msg: impl std::fmt::Display) {
        if !self.quiet {
            eprintln!("warning: {msg}");
        }
    }

    fn info(&self, msg: impl std::fmt::Display) {
        if self.verbose > 0 {
            eprintln!("{msg}");
        }
    }

    fn load(&self) -> CliResult<Corpus> {
        let format = match self.format {
            InputFormat::Jsonl => Format::Jsonl,
            InputFormat::Csv => Format::Csv,
        };
        let loaded = dataset::load_corpus(self.input()?, format)?;
        let r = &loaded.report;
        self.info(format_args!(
            "loaded {} papers by {} authors",
            r.papers, r.authors
        ));
        if r.dangling_refs > 0 {
            self.warn(format_args!(
                "dropped {} references to papers outside the corpus",
                r.dangling_refs
            ));
        }
        if r.deduplicated_refs > 0 {
            self.warn(format_args!(
                "collapsed {} repeated references",
                r.deduplicated_refs
            ));
        }
        if r.self_refs > 0 {
            self.warn(format_args!("dropped {} self-references", r.self_refs));
        }
        if r.duplicate_authors > 0 {
            self.warn(format_args!(
                "collapsed {} repeated author entries",
                r.duplicate_authors
            ));
        }
        Ok(loaded.corpus)
    }

    fn out_path(&self, name: &str) -> CliResult<PathBuf> {
        fs::create_dir_all(&self.out_dir).map_err(|e| output_error(&self.out_dir, e))?;
        Ok(self.out_dir.join(name))
    }

    fn write_file(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> crate::Result<()>,
    ) -> CliResult<PathBuf> {
        let path = self.out_path(name)?;
        let file = File::create(&path).map_err(|e| output_error(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(|e| output_error(&path, e))?;
        w.flush().map_err(|e| output_error(&path, e))?;
        self.info(format_args!("wrote {}", path.display()));
        Ok(path)
    }

    fn timestamp(&self) -> String {
        self.seed_manifest.clone().unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs().to_string())
                .unwrap_or_default()
        })
    }
}

/// Everything the ranking commands share: corpus, network and converged state.
struct Ranked {
    corpus: Corpus,
    net: BipartiteNetwork,
    state: ScoreState,
    log: Vec<(usize, f64)>,
}

fn rank_corpus(run: &RunConfig) -> CliResult<Ranked> {
    let corpus = run.load()?;
    let net = BipartiteNetwork::build(&corpus)?;
    let mut log = Vec::new();
    let state = aprank::ap_rank_observed(&net, &run.convergence(), |step| {
        log.push((step.iteration, step.delta));
    })?;
    run.info(format_args!(
        "converged after {} iterations (delta {:e})",
        state.iteration, state.delta
    ));
    Ok(Ranked {
        corpus,
        net,
        state,
        log,
    })
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    input: String,
    papers: usize,
    authors: usize,
    citation_edges: usize,
    iterations: usize,
    final_delta: f64,
    delta_threshold: f64,
    max_iterations: usize,
    timestamp: String,
}

fn write_manifest(run: &RunConfig, command: &str, ranked: &Ranked) -> CliResult<()> {
    let manifest = Manifest {
        command,
        input: run
            .input
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default(),
        papers: ranked.net.num_papers(),
        authors: ranked.net.num_authors(),
        citation_edges: ranked.corpus.citation_edges(),
        iterations: ranked.state.iteration,
        final_delta: ranked.state.delta,
        delta_threshold: run.delta,
        max_iterations: run.max_iter,
        timestamp: run.timestamp(),
    };
    run.write_file("manifest.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)
            .map_err(std::io::Error::from)
            .map_err(|e| Error::io("manifest.json", e))?;
        writeln!(w).map_err(|e| Error::io("manifest.json", e))
    })?;
    if run.convergence_log {
        run.write_file("convergence.csv", |w| {
            let io = |e| Error::io("convergence.csv", e);
            writeln!(w, "iteration,delta").map_err(io)?;
            for (t, d) in &ranked.log {
                let d = if d.is_finite() {
                    format!("{d:e}")
                } else {
                    String::new()
                };
                writeln!(w, "{t},{d}").map_err(io)?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn cmd_rank(run: &RunConfig) -> CliResult<()> {
    let ranked = rank_corpus(run)?;
    let papers = ranked.state.paper_table(&ranked.net)?;
    let authors = ranked.state.author_table(&ranked.net)?;
    run.write_file("papers_ap.csv", |w| papers.write_csv(w))?;
    run.write_file("authors_ap.csv", |w| authors.write_csv(w))?;
    if run.dump_network {
        run.write_file("cite_edges.csv", |w| ranked.net.write_cite_edges(w))?;
        run.write_file("authorship_edges.csv", |w| {
            ranked.net.write_authorship_edges(w)
        })?;
    }
    write_manifest(run, "rank", &ranked)
}

fn cmd_tap(run: &RunConfig, observe: YearMonth) -> CliResult<()> {
    let ranked = rank_corpus(run)?;
    let tap = aprank::tap_scores(&ranked.state, &ranked.net, &ranked.corpus, observe)?;
    run.write_file("papers_tap.csv", |w| tap.write_csv(w))?;
    write_manifest(run, "tap", &ranked)
}

fn print_tau(label: &str, tau: &TauResult) {
    println!(
        "{label}: tau={} concordant={} discordant={} pairs={}",
        format_sig(tau.tau, 6),
        tau.concordant,
        tau.discordant,
        tau.pairs
    );
}

fn read_table(path: &Path) -> CliResult<RankingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(RankingTable::read_csv(file)?)
}

fn cmd_compare(
    run: &RunConfig,
    pair: Option<Pair>,
    observe: Option<YearMonth>,
    tables: Option<(&Path, &Path)>,
) -> CliResult<()> {
    let (label, a, b) = match (tables, pair) {
        (Some((pa, pb)), _) => ("tables", read_table(pa)?, read_table(pb)?),
        (None, Some(pair)) => {
            if pair == Pair::ApTap && observe.is_none() {
                return Err(input_error("--pair ap-tap needs --observe YYYY-MM"));
            }
            let ranked = rank_corpus(run)?;
            match pair {
                Pair::ApCcAuthors => {
                    let graph = CitationGraph::build(&ranked.corpus);
                    (
                        "ap-cc-authors",
                        ranked.state.author_table(&ranked.net)?,
                        aprank::cc_author(&ranked.corpus, &graph),
                    )
                }
                Pair::ApCcPapers => {
                    let graph = CitationGraph::build(&ranked.corpus);
                    (
                        "ap-cc-papers",
                        ranked.state.paper_table(&ranked.net)?,
                        aprank::cc_paper(&graph),
                    )
                }
                Pair::ApTap => {
                    let observe = observe.expect("checked above");
                    (
                        "ap-tap",
                        ranked.state.paper_table(&ranked.net)?,
                        aprank::tap_scores(&ranked.state, &ranked.net, &ranked.corpus, observe)?,
                    )
                }
            }
        }
        (None, None) => return Err(input_error("give --pair or --table-a/--table-b")),
    };
    let tau = analytics::kendall_tau_tables(&a, &b)?;
    run.write_file(&format!("scatter_{label}.csv"), |w| {
        analytics::scatter_export(&a, &b, w).map(|_| ())
    })?;
    print_tau(label, &tau);
    Ok(())
}

fn cmd_journals(run: &RunConfig, metrics: Option<&Path>) -> CliResult<()> {
    let metrics = metrics.map(journals::load_journal_metrics).transpose()?;
    let ranked = rank_corpus(run)?;
    let ap = ranked.state.paper_table(&ranked.net)?;
    let report = journals::journal_summaries(&ranked.corpus, &ap, metrics.as_ref())?;
    if report.summaries.is_empty() {
        run.warn("no paper has a journal field; journal table is empty");
    } else if report.papers_without_journal > 0 {
        run.warn(format_args!(
            "{} papers have no journal field",
            report.papers_without_journal
        ));
    }
    for j in &report.unknown_metric_journals {
        run.warn(format_args!(
            "metrics given for journal {j} which has no papers"
        ));
    }
    run.write_file("journals.csv", |w| {
        journals::write_journal_csv(&report.summaries, w)
    })?;
    Ok(())
}

fn cmd_coauthor(run: &RunConfig, top_k: usize, graph_format: GraphFormat) -> CliResult<()> {
    if top_k == 0 {
        return Err(input_error("--top must be at least 1"));
    }
    let ranked = rank_corpus(run)?;
    let rows = analytics::coauthor_comparison(&ranked.corpus, &ranked.state.author_scores)?;
    let ap = ranked.state.author_table(&ranked.net)?;
    let cc = aprank::cc_author(&ranked.corpus, &CitationGraph::build(&ranked.corpus));
    let graph = analytics::coauthor_graph(&ranked.corpus, &ap, &cc, top_k)?;
    if let Some(k) = graph.clamped_from {
        run.warn(format_args!(
            "--top {k} exceeds the {} authors; using all",
            graph.nodes.len()
        ));
    }
    run.write_file("coauthors.csv", |w| {
        analytics::write_coauthor_comparison(&rows, w)
    })?;
    let io = |e| Error::io("coauthor graph", e);
    match graph_format {
        GraphFormat::Dot => {
            run.write_file("coauthor_graph.dot", |w| graph.write_dot(w).map_err(io))?
        }
        GraphFormat::Graphml => run.write_file("coauthor_graph.graphml", |w| {
            graph.write_graphml(w).map_err(io)
        })?,
    };
    Ok(())
}

fn dispatch(command: &Command) -> CliResult<()> {
    let run = match command {
        Command::Rank(run)
        | Command::Tap { run, .. }
        | Command::Compare { run, .. }
        | Command::Journals { run, .. }
        | Command::Coauthor { run, .. } => run,
    };
    run.validate()?;
    let needs_input = !matches!(
        command,
        Command::Compare {
            table_a: Some(_),
            ..
        }
    );
    if needs_input {
        run.input()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.threads.unwrap_or(0))
        .build()
        .map_err(|e| input_error(e.to_string()))?;
    pool.install(|| match command {
        Command::Rank(run) => cmd_rank(run),
        Command::Tap { run, observe } => cmd_tap(run, *observe),
        Command::Compare {
            run,
            pair,
            observe,
            table_a,
            table_b,
        } => {
            let tables = table_a.as_deref().zip(table_b.as_deref());
            cmd_compare(run, *pair, *observe, tables)
        }
        Command::Journals { run, metrics } => cmd_journals(run, metrics.as_deref()),
        Command::Coauthor {
            run,
            top_k,
            graph_format,
        } => cmd_coauthor(run, *top_k, *graph_format),
    })
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
