//! `outbreak`: command-line front end for outbreak-core.

mod output;

use std::fs::{self, File};
use std::io::BufReader;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use outbreak_core::analytics::{
    build_timeline, case_fatality_rate, epi_week, hcw_stats, read_event_rows, response_lag, super_spreaders,
    write_timeline_csv, EpiEvent, EventKind,
};
use outbreak_core::dataset::{load_dataset, Dataset};
use outbreak_core::ingest::{
    dedupe_reports, drop_period_summaries, filter_reports, parse_headline_corpus, read_media_counts, read_reports,
    write_reports_jsonl, QueryWindow, SearchField, TableSchema,
};
use outbreak_core::media::{
    align, bucket_counts, lookup_count, pearson, series_from_records, window_totals, Granularity, TimeSeries,
};
use outbreak_core::net::{export_graph, ExportFormat, TransmissionGraph};
use outbreak_core::registry::{CaseId, CaseRegistry};
use outbreak_core::sim::{ensemble, simulate, SimConfig};

use output::{emit, emit_json, emit_line};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (format-rev r1)");

#[derive(Parser)]
#[command(name = "outbreak", version = VERSION, about = "Outbreak report ingestion, networks, analytics and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and filter report tables or headline corpora
    Ingest(IngestArgs),
    /// Build and query the case registry
    #[command(subcommand)]
    Registry(RegistryCommand),
    /// Transmission network summary, chains and exports
    Net(NetArgs),
    /// Epidemiological measures
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Epi-week timeline from an event table
    Timeline(TimelineArgs),
    /// Media-attention counts and series
    #[command(subcommand)]
    Media(MediaCommand),
    /// Run one simulation or an ensemble
    Simulate(SimulateArgs),
    /// Export a network as DOT, GraphML or JSON
    Export(ExportArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output file; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum IngestSchema {
    MediaCounts,
    CaseSources,
    Reports,
    Headlines,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    schema: IngestSchema,
    /// Inclusive window START:END (ISO dates)
    #[arg(long, value_parser = parse_window)]
    window: Option<(NaiveDate, NaiveDate)>,
    #[arg(long, default_value = "ebola")]
    keyword: String,
    /// Fields searched for the keyword
    #[arg(long, value_delimiter = ',', default_values = ["post", "subject"])]
    fields: Vec<SearchField>,
    #[arg(long)]
    drop_summaries: bool,
    #[arg(long)]
    dedupe: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand)]
enum RegistryCommand {
    /// Build a registry from a dataset and save it as JSON lines
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Case counts by status and outcome
    Counts {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Records related to a case by name, village or hospital
    Backtrack {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "case")]
        case_id: String,
    },
}

#[derive(Args)]
struct NetArgs {
    /// Dataset (.jsonl) or graph document (.json)
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    export: Option<ExportFormat>,
    /// Print the transmission chain ending at this case
    #[arg(long, conflicts_with = "export")]
    chain: Option<String>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Case-fatality rate
    Cfr {
        #[arg(long)]
        deaths: u64,
        #[arg(long)]
        cases: u64,
        #[arg(long, default_value_t = 4)]
        decimals: u32,
    },
    /// Health-care worker cases, deaths and CFR
    Hcw {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Cases infecting at least K others
    Spreaders {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "5")]
        k: NonZeroUsize,
    },
    /// Epi week of a date
    EpiWeek {
        #[arg(long)]
        date: NaiveDate,
        #[arg(long)]
        anchor: NaiveDate,
    },
    /// Weeks and days between the first events of two kinds
    Lag {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        from: EventKind,
        #[arg(long)]
        to: EventKind,
        /// Defaults to the first outbreak report
        #[arg(long)]
        anchor: Option<NaiveDate>,
    },
}

#[derive(Args)]
struct TimelineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to the first outbreak report
    #[arg(long)]
    anchor: Option<NaiveDate>,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum MediaCommand {
    /// Count for one outlet and window from a media-counts table
    Lookup {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        outlet: String,
        #[arg(long, value_parser = parse_window)]
        window: (NaiveDate, NaiveDate),
    },
    /// Full-window count beside the sum of its sub-periods
    Reconcile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        outlet: String,
        #[arg(long, value_parser = parse_window)]
        window: (NaiveDate, NaiveDate),
    },
    /// Monthly series of an outlet's sub-period rows
    Series {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        outlet: String,
        #[arg(long, value_parser = parse_window)]
        window: (NaiveDate, NaiveDate),
        #[command(flatten)]
        out: OutArg,
    },
    /// Bucket a reports table into a weekly or monthly series
    Bucket {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: (NaiveDate, NaiveDate),
        #[arg(long, default_value = "ebola")]
        keyword: String,
        #[arg(long, default_value = "weekly")]
        granularity: Granularity,
        #[command(flatten)]
        out: OutArg,
    },
    /// Pearson correlation of two series files over their shared periods
    Correlate {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "monthly")]
        granularity: Granularity,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config: contacts, params, seed_person, interventions
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ensemble size; a single run when absent
    #[arg(long)]
    runs: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "dot")]
    format: ExportFormat,
    #[command(flatten)]
    out: OutArg,
}

fn parse_window(s: &str) -> Result<(NaiveDate, NaiveDate), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let date = |t: &str| NaiveDate::parse_from_str(t.trim(), "%Y-%m-%d").map_err(|e| format!("{t:?}: {e}"));
    Ok((date(a)?, date(b)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn dataset(path: &Path) -> Result<Dataset> {
    Ok(load_dataset(open(path)?)?)
}

fn graph(path: &Path) -> Result<TransmissionGraph> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(TransmissionGraph::from_json(&read_text(path)?)?)
    } else {
        Ok(dataset(path)?.graph)
    }
}

fn load_registry(path: &Path) -> Result<CaseRegistry> {
    Ok(CaseRegistry::load_jsonl(open(path)?)?)
}

fn events(path: &Path) -> Result<Vec<EpiEvent>> {
    Ok(read_event_rows(open(path)?)?.into_iter().map(|r| r.event).collect())
}

fn default_anchor(events: &[EpiEvent]) -> Result<NaiveDate> {
    events
        .iter()
        .filter(|e| e.kind == EventKind::OutbreakReport)
        .map(|e| e.date)
        .min()
        .context("MissingEventKind: no outbreak_report event to anchor on; pass --anchor")
}

fn ingest(args: IngestArgs) -> Result<()> {
    if let IngestSchema::Headlines = args.schema {
        let text = read_text(&args.input)?;
        let mut parsed = Vec::new();
        for (_, result) in parse_headline_corpus(&text) {
            parsed.push(result?);
        }
        let mut buf = Vec::new();
        for h in &parsed {
            serde_json::to_writer(&mut buf, h)?;
            buf.push(b'\n');
        }
        eprintln!("{} headlines", parsed.len());
        return emit(args.out.out.as_deref(), &buf);
    }
    let schema = match args.schema {
        IngestSchema::MediaCounts => {
            let records = read_media_counts(open(&args.input)?)?;
            eprintln!("{} rows", records.len());
            let mut buf = Vec::new();
            for r in &records {
                serde_json::to_writer(&mut buf, r)?;
                buf.push(b'\n');
            }
            return emit(args.out.out.as_deref(), &buf);
        }
        IngestSchema::CaseSources => TableSchema::CaseSources,
        IngestSchema::Reports => TableSchema::Reports,
        IngestSchema::Headlines => unreachable!("handled above"),
    };
    let mut reports = read_reports(open(&args.input)?, schema)?;
    if let Some((start, end)) = args.window {
        let window = QueryWindow::new(start, end, args.keyword.clone())?;
        reports = filter_reports(&reports, &window, &args.fields)?;
    }
    if args.drop_summaries {
        reports = drop_period_summaries(&reports);
    }
    if args.dedupe {
        reports = dedupe_reports(&reports);
    }
    eprintln!("{} reports", reports.len());
    let mut buf = Vec::new();
    write_reports_jsonl(&reports, &mut buf)?;
    emit(args.out.out.as_deref(), &buf)
}

fn registry(cmd: RegistryCommand) -> Result<()> {
    match cmd {
        RegistryCommand::Build { input, out } => {
            let ds = dataset(&input)?;
            let mut buf = Vec::new();
            ds.registry.save_jsonl(&mut buf)?;
            eprintln!("{} records", ds.registry.len());
            emit(out.out.as_deref(), &buf)
        }
        RegistryCommand::Counts { input } => emit_json(None, &load_registry(&input)?.status_counts()),
        RegistryCommand::Backtrack { input, case_id } => {
            let links = load_registry(&input)?.backtrack_links(&CaseId::from(case_id))?;
            for (id, kind) in links {
                emit_line(&format!("{id}\t{}", serde_json::to_value(kind)?.as_str().unwrap_or_default()));
            }
            Ok(())
        }
    }
}

#[derive(serde::Serialize)]
struct NetSummary {
    nodes: usize,
    infection_edges: usize,
    travel_events: usize,
    cluster_sizes: Vec<usize>,
    index_cases: Vec<CaseId>,
    cross_border: Vec<outbreak_core::net::CrossBorderEntry>,
}

fn net(args: NetArgs) -> Result<()> {
    let g = graph(&args.input)?;
    if let Some(format) = args.export {
        return emit(args.out.out.as_deref(), export_graph(&g, format).as_bytes());
    }
    if let Some(id) = args.chain {
        let chain = g.transmission_chain(&CaseId::from(id))?;
        let line: Vec<&str> = chain.iter().map(CaseId::as_str).collect();
        return emit(args.out.out.as_deref(), format!("{}\n", line.join(" -> ")).as_bytes());
    }
    let summary = NetSummary {
        nodes: g.node_count(),
        infection_edges: g.infection_edges().len(),
        travel_events: g.travel_events().len(),
        cluster_sizes: g.clusters().iter().map(Vec::len).collect(),
        index_cases: g.index_cases().into_iter().collect(),
        cross_border: g.cross_border_chains(),
    };
    emit_json(args.out.out.as_deref(), &summary)
}

fn analyze(cmd: AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::Cfr { deaths, cases, decimals } => {
            emit_line(&case_fatality_rate(deaths, cases)?.rounded(decimals));
            Ok(())
        }
        AnalyzeCommand::Hcw { input } => {
            let ds = dataset(&input)?;
            emit_json(None, &hcw_stats(&ds.registry, Some(&ds.graph)))
        }
        AnalyzeCommand::Spreaders { input, k } => {
            for (id, degree) in super_spreaders(&graph(&input)?, k) {
                emit_line(&format!("{id}\t{degree}"));
            }
            Ok(())
        }
        AnalyzeCommand::EpiWeek { date, anchor } => {
            emit_line(&epi_week(date, anchor)?.to_string());
            Ok(())
        }
        AnalyzeCommand::Lag { input, from, to, anchor } => {
            let events = events(&input)?;
            let anchor = match anchor {
                Some(a) => a,
                None => default_anchor(&events)?,
            };
            let timeline = build_timeline(&events, anchor)?;
            emit_json(None, &response_lag(&timeline, from, to)?)
        }
    }
}

fn timeline(args: TimelineArgs) -> Result<()> {
    let events = events(&args.input)?;
    let anchor = match args.anchor {
        Some(a) => a,
        None => default_anchor(&events)?,
    };
    let timeline = build_timeline(&events, anchor)?;
    match args.format {
        TableFormat::Csv => {
            let mut buf = Vec::new();
            write_timeline_csv(&timeline, &mut buf)?;
            emit(args.out.out.as_deref(), &buf)
        }
        TableFormat::Json => emit_json(args.out.out.as_deref(), &timeline),
    }
}

fn read_series(path: &Path, granularity: Granularity) -> Result<TimeSeries> {
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(TimeSeries::read_csv(open(path)?, label, granularity)?)
}

fn media(cmd: MediaCommand) -> Result<()> {
    match cmd {
        MediaCommand::Lookup { input, outlet, window: (start, end) } => {
            let records = read_media_counts(open(&input)?)?;
            emit_line(&lookup_count(&records, &outlet, start, end)?.to_string());
            Ok(())
        }
        MediaCommand::Reconcile { input, outlet, window: (start, end) } => {
            let records = read_media_counts(open(&input)?)?;
            emit_json(None, &window_totals(&records, &outlet, start, end)?)
        }
        MediaCommand::Series { input, outlet, window: (start, end), out } => {
            let records = read_media_counts(open(&input)?)?;
            let series = series_from_records(&records, &outlet, start, end)?;
            let mut buf = Vec::new();
            series.write_csv(&mut buf)?;
            emit(out.out.as_deref(), &buf)
        }
        MediaCommand::Bucket { input, window: (start, end), keyword, granularity, out } => {
            let window = QueryWindow::new(start, end, keyword)?;
            let reports = read_reports(open(&input)?, TableSchema::Reports)?;
            let hits = filter_reports(&reports, &window, &[SearchField::Post, SearchField::Subject])?;
            let series = bucket_counts(&hits, granularity, &window);
            let mut buf = Vec::new();
            series.write_csv(&mut buf)?;
            emit(out.out.as_deref(), &buf)
        }
        MediaCommand::Correlate { a, b, granularity } => {
            let (a, b) = align(&read_series(&a, granularity)?, &read_series(&b, granularity)?)?;
            emit_line(&format!("{:.6}", pearson(&a, &b)?));
            Ok(())
        }
    }
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let cfg: SimConfig = serde_json::from_str(&read_text(&args.input)?)
        .with_context(|| format!("InvalidParams: cannot parse {}", args.input.display()))?;
    let out = args.out.out.as_deref();
    match args.runs {
        None => {
            let r = simulate(&cfg.contacts, &cfg.params, &cfg.seed_person, &cfg.interventions, args.seed)?;
            emit_json(out, &r)
        }
        Some(runs) => {
            let s = ensemble(&cfg.contacts, &cfg.params, &cfg.seed_person, &cfg.interventions, runs, args.seed)?;
            emit_json(out, &s)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Registry(c) => registry(c),
        Command::Net(a) => net(a),
        Command::Analyze(c) => analyze(c),
        Command::Timeline(a) => timeline(a),
        Command::Media(c) => media(c),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Export(a) => {
            let g = graph(&a.input)?;
            emit(a.out.out.as_deref(), export_graph(&g, a.format).as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
