use std::fs;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use schemamatch::ensemble::{Exclusions, rank_excluding};
use schemamatch::evaluation::{self, GroundTruth, write_ablation_csv};
use schemamatch::ingest::{dataset_name_from_path, load_dataset};
use schemamatch::model::{Dataset, KnownPair, MatcherConfig};
use schemamatch::schema::RuleSet;
use schemamatch::server::{AppState, serve};
use schemamatch::session::MatchSession;
use schemamatch::{Error, ScoreMatrix, score_all};

#[derive(Parser)]
#[command(name = "schemamatch", version, about = "Hybrid schema matcher for tabular datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every attribute pair and print the Top-N table.
    Match(MatchArgs),
    /// Score and evaluate against a ground-truth CSV.
    Evaluate(EvaluateArgs),
    /// Run the review service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Source dataset CSV.
    #[arg(long)]
    source: PathBuf,
    /// Destination dataset CSV.
    #[arg(long)]
    dest: PathBuf,
    /// Domain-knowledge rules as a JSON array of {source, dest} patterns.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Component weights dk,lin,uni,mul.
    #[arg(long, value_parser = parse_weights::<4>)]
    weights: Option<[f64; 4]>,
    /// Linguistic weights lev,monge_elkan,tfidf.
    #[arg(long = "lingweights", value_parser = parse_weights::<3>)]
    ling_weights: Option<[f64; 3]>,
    /// Candidates per source attribute.
    #[arg(long)]
    top: Option<usize>,
    /// Bins used when comparing numeric with categorical attributes.
    #[arg(long)]
    bins: Option<usize>,
    /// Seed for the random pivot.
    #[arg(long)]
    seed: Option<u64>,
    /// Known pair as SOURCE:DEST; repeatable.
    #[arg(long = "known", value_parser = parse_known)]
    known: Vec<KnownPair>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Ground truth CSV, used only by the review service.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Start the review service on the loaded datasets after matching.
    #[arg(long)]
    serve: bool,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Ground truth CSV with columns source_attr,dest_attr.
    #[arg(long)]
    truth: PathBuf,
    /// Also write ablation.csv.
    #[arg(long)]
    ablation: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Bind address.
    #[arg(long, default_value_t = IpAddr::V4(Ipv4Addr::LOCALHOST))]
    host: IpAddr,
}

fn parse_weights<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated values, got {}", v.len()))
}

fn parse_known(s: &str) -> Result<KnownPair, String> {
    match s.split_once(':') {
        Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok(KnownPair::user(a, b)),
        _ => Err(format!("expected SOURCE:DEST, got `{s}`")),
    }
}

struct Loaded {
    source: Dataset,
    dest: Dataset,
    rules: RuleSet,
    cfg: MatcherConfig,
    known: Vec<KnownPair>,
}

fn load(common: &CommonArgs) -> Result<Loaded, Error> {
    let source = load_dataset(&common.source, &dataset_name_from_path(&common.source))?;
    let dest = load_dataset(&common.dest, &dataset_name_from_path(&common.dest))?;
    let rules = match &common.rules {
        Some(p) => RuleSet::load(p)?,
        None => RuleSet::empty(),
    };
    let mut cfg = MatcherConfig::default();
    if let Some(w) = common.weights {
        cfg.weights = w;
    }
    if let Some(g) = common.ling_weights {
        cfg.ling_weights = g;
    }
    if let Some(t) = common.top {
        cfg.top_n = t;
    }
    if let Some(b) = common.bins {
        cfg.bins = b;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    for k in &common.known {
        k.validate(&source, &dest)?;
    }
    Ok(Loaded {
        source,
        dest,
        rules,
        cfg,
        known: common.known.clone(),
    })
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Error> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_outputs(out: &Path, matrix: &ScoreMatrix, l: &Loaded) -> Result<(), Error> {
    fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    write_file(&out.join("scores.csv"), matrix.to_csv_string())?;
    write_file(&out.join("scores.json"), matrix.to_json_string())?;
    let suggestions = rank_excluding(matrix, l.cfg.top_n, &Exclusions::from_known(&l.known));
    write_file(
        &out.join("suggestions.json"),
        serde_json::to_string_pretty(&suggestions)?,
    )?;
    print_table(matrix, &suggestions);
    Ok(())
}

fn print_table(matrix: &ScoreMatrix, suggestions: &[schemamatch::Suggestion]) {
    println!(
        "{:<24} {:>4} {:<24} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "source", "rank", "dest", "final", "dk", "lin", "uni", "mul"
    );
    for s in suggestions {
        for (i, c) in s.ranked.iter().enumerate() {
            let p = matrix.get(&s.source_attr, &c.dest_attr).expect("ranked pair is scored");
            println!(
                "{:<24} {:>4} {:<24} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
                s.source_attr,
                i + 1,
                c.dest_attr,
                p.final_score,
                p.dk,
                p.lin,
                p.uni,
                p.mul
            );
        }
    }
}

fn run_match(args: MatchArgs) -> Result<(), Error> {
    let l = load(&args.common)?;
    let matrix = score_all(&l.source, &l.dest, &l.rules, &l.known, &l.cfg)?;
    write_outputs(&args.common.out, &matrix, &l)?;
    if args.serve {
        let truth = args.truth.as_ref().map(GroundTruth::load).transpose()?;
        let session = MatchSession::new(
            uuid::Uuid::new_v4().simple().to_string(),
            l.source,
            l.dest,
            l.cfg,
            l.rules,
            l.known,
            truth,
        )?;
        let addr = SocketAddr::new(IpAddr::V4(Ipv4Addr::LOCALHOST), args.port);
        run_server(addr, Some(session))?;
    }
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let l = load(&args.common)?;
    let truth = GroundTruth::load(&args.truth)?;
    truth.validate(&l.source, &l.dest)?;
    let report = evaluation::evaluate(&l.source, &l.dest, &l.rules, &l.known, &truth, &l.cfg)?;
    let out = &args.common.out;
    fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    write_file(&out.join("eval_report.json"), report.to_json_string())?;
    println!(
        "precision {:.4} recall {:.4} f1 {:.4}",
        report.precision, report.recall, report.f1
    );
    for (n, acc) in &report.topn_accuracy {
        println!("top-{n} accuracy {acc:.4}");
    }
    for (name, secs) in &report.timings {
        println!("time {name} {secs:.3}s");
    }
    if args.ablation {
        let rows = evaluation::ablation(&l.source, &l.dest, &truth, &l.known, &l.cfg)?;
        let mut buf = Vec::new();
        write_ablation_csv(&rows, &mut buf)?;
        write_file(&out.join("ablation.csv"), buf)?;
    }
    Ok(())
}

fn run_server(addr: SocketAddr, session: Option<MatchSession>) -> Result<(), Error> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Io {
        path: "tokio runtime".into(),
        source: e,
    })?;
    runtime.block_on(async move {
        let state = AppState::new();
        if let Some(s) = session {
            let id = state.insert(s).await;
            println!("session {id}");
        }
        println!("serving on http://{addr}");
        serve(addr, state).await.map_err(|e| Error::Io {
            path: addr.to_string().into(),
            source: e,
        })
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Match(a) => run_match(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Serve(a) => run_server(SocketAddr::new(a.host, a.port), None),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
