use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nileztn::evalkit::EvaluationReport;
use nileztn::intent::{extract_bandwidth, parse_nile, translate, ExemplarCorpus, IntentStore, NaturalIntent};
use nileztn::orchestrator::{Orchestrator, RunConfig};
use nileztn::Error;

#[derive(Parser)]
#[command(name = "nileztn", version, about = "Intent-driven bandwidth assurance on a simulated link")]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate an English intent to Nile and print its bandwidth goal.
    Translate(TranslateArgs),
    /// Generate the capacity trace and the predictor's training series.
    GenTrace(RunArgs),
    /// Train the BiLSTM + boosted-tree predictor.
    TrainPredictor(RunArgs),
    /// Train the ID and OOD agents and their early snapshots.
    TrainAgent(RunArgs),
    /// Run the four evaluation episodes.
    Run(RunArgs),
    /// Episodes, Monte Carlo comparison and the report.
    Evaluate(RunArgs),
    /// Monte Carlo optimum vs closed loop, per episode.
    Montecarlo(RunArgs),
    /// Every stage in order, plus the manifest.
    Pipeline(RunArgs),
}

#[derive(Args)]
struct TranslateArgs {
    /// English intent text.
    #[arg(long)]
    intent: String,
    /// Exemplar corpus file (defaults to the bundled corpus).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// File of active Nile intents, one per line. The new intent is checked
    /// against it and appended when it does not conflict.
    #[arg(long)]
    store: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; derives the trace, training and evaluation seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// ID intent text (overrides `intent_id` and sets its goal).
    #[arg(long)]
    intent: Option<String>,
    /// Exemplar corpus file (overrides `corpus`).
    #[arg(long)]
    corpus: Option<PathBuf>,
}

fn corpus_from(path: Option<&Path>) -> Result<ExemplarCorpus, Error> {
    match path {
        Some(p) => Ok(ExemplarCorpus::load(p)?),
        None => Ok(ExemplarCorpus::builtin()),
    }
}

fn cmd_translate(args: &TranslateArgs) -> Result<(), Error> {
    let corpus = corpus_from(args.corpus.as_deref())?;
    let nile = translate(&NaturalIntent::new("cli", &args.intent)?, &corpus)?;
    let goal = extract_bandwidth(&nile);

    if let Some(path) = &args.store {
        let mut store = IntentStore::new();
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for line in text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')) {
                store.admit(parse_nile(line)?).map_err(Error::Conflict)?;
            }
        }
        store.admit(nile.clone()).map_err(Error::Conflict)?;
        let mut f = fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        writeln!(f, "{}", nile.render()).map_err(|e| Error::io(path, e))?;
    }

    println!("{}", nile.render());
    println!("beta_target_kbps={}", goal.kbps());
    Ok(())
}

fn orchestrator(args: &RunArgs) -> Result<Orchestrator, Error> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_master_seed(seed);
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.to_string_lossy().into_owned();
    }
    if let Some(corpus) = &args.corpus {
        cfg.corpus = corpus.to_string_lossy().into_owned();
    }
    if let Some(text) = &args.intent {
        let corpus = corpus_from((!cfg.corpus.is_empty()).then(|| Path::new(&cfg.corpus)))?;
        let nile = translate(&NaturalIntent::new("id", text)?, &corpus)?;
        cfg.goal_id_kbps = extract_bandwidth(&nile).kbps();
        cfg.intent_id = text.clone();
    }
    Orchestrator::new(cfg)
}

fn print_report(report: &EvaluationReport) {
    for r in &report.satisfaction {
        println!("satisfaction {} {}: {}/{} ({:.3})", r.scenario, r.mode, r.met, r.total, r.fraction());
    }
    for r in &report.mos {
        println!("mos {} {}: {:.3}", r.scenario, r.mode, r.mos);
    }
    for r in &report.correlation {
        let c = &r.comparison;
        let pearson = c.correlation.map_or_else(|| "NA".into(), |v| format!("{v:.3}"));
        println!(
            "objective {}: montecarlo {:.2} kbps, closed loop {:.2} kbps, pearson {pearson}",
            r.scenario, c.montecarlo_mean, c.closedloop_mean
        );
    }
}

fn stage(args: &RunArgs, f: impl FnOnce(&mut Orchestrator) -> Result<(), Error>) -> Result<(), Error> {
    let mut o = orchestrator(args)?;
    f(&mut o)?;
    o.write_manifest()?;
    println!("outputs in {}", o.out_dir().display());
    Ok(())
}

fn dispatch(command: &Command) -> Result<(), Error> {
    match command {
        Command::Translate(a) => cmd_translate(a),
        Command::GenTrace(a) => stage(a, |o| o.gen_trace().map(drop)),
        Command::TrainPredictor(a) => stage(a, |o| o.train_predictor().map(drop)),
        Command::TrainAgent(a) => stage(a, |o| o.train_agents().map(drop)),
        Command::Run(a) => stage(a, |o| {
            for (scenario, mode, ep) in o.run()? {
                let met = ep.steps.iter().filter(|s| s.delta() == 1).count();
                println!("{scenario} {mode}: goal met on {met}/{} steps", ep.steps.len());
            }
            Ok(())
        }),
        Command::Evaluate(a) => stage(a, |o| o.evaluate().map(|r| print_report(&r))),
        Command::Montecarlo(a) => stage(a, |o| o.montecarlo().map(drop)),
        Command::Pipeline(a) => {
            let mut o = orchestrator(a)?;
            let report = o.pipeline()?;
            print_report(&report);
            println!("outputs in {}", o.out_dir().display());
            Ok(())
        }
    }
}

fn error_line(kind: &str, message: &str) {
    let escaped = message.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n");
    eprintln!("error: kind={kind} message=\"{escaped}\"");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            error_line("usage", e.kind().to_string().as_str());
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error_line(e.kind(), &e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
