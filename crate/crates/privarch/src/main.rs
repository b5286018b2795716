use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use privarch::report::CheckReport;
use privarch::view::LocationView;
use privarch::{explain, parse_options, SCHEMA_VERSION};
use privarch_core::adsl::{parse_architecture, parse_knowledge, parse_requirements, ParseErrors};
use privarch_core::checker::assess;
use privarch_core::engine::Config;
use privarch_core::model::{Architecture, RequirementSet};

#[derive(Parser)]
#[command(name = "privarch", version, about = "Privacy analysis of system architectures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ViewFormat {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate requirements against an architecture.
    ///
    /// Exits 0 when complete, 2 when contradictory, 3 when underspecified
    /// and 1 on input errors.
    Check {
        arch: PathBuf,
        reqs: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Index bound, overriding the file and PRIVARCH_N.
        #[arg(long)]
        n: Option<u32>,
        /// Also print the traces of satisfied requirements.
        #[arg(long)]
        traces: bool,
    },
    /// Print the derivation of a fact or K/X atom.
    Explain {
        arch: PathBuf,
        #[arg(long)]
        fact: String,
        /// Agent whose knowledge to search; inferred from the fact when omitted.
        #[arg(long)]
        agent: Option<String>,
        /// Requirements whose terms extend the term universe.
        #[arg(long)]
        reqs: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Export the location view of an architecture.
    View {
        arch: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: ViewFormat,
        #[arg(long)]
        n: Option<u32>,
    },
    /// Run the JSON/HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
}

/// Input errors, already reported.
struct Reported;

fn read(path: &Path) -> Result<String, Reported> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        Reported
    })
}

fn report_parse(e: ParseErrors) -> Reported {
    eprintln!("{e}");
    Reported
}

fn load(path: &Path, n: Option<u32>) -> Result<Architecture, Reported> {
    let text = read(path)?;
    let opts = parse_options(Some(&path.display().to_string()), n).map_err(|m| {
        eprintln!("error: {m}");
        Reported
    })?;
    parse_architecture(&text, &opts).map_err(report_parse)
}

fn load_reqs(path: &Path, arch: &Architecture) -> Result<RequirementSet, Reported> {
    let text = read(path)?;
    let opts = parse_options(Some(&path.display().to_string()), None).map_err(|m| {
        eprintln!("error: {m}");
        Reported
    })?;
    parse_requirements(&text, arch, &opts).map_err(report_parse)
}

fn engine_error(e: impl std::fmt::Display) -> Reported {
    eprintln!("error: {e}");
    Reported
}

fn run(cli: Cli) -> Result<u8, Reported> {
    match cli.command {
        Command::Check { arch, reqs, format, n, traces } => {
            let a = load(&arch, n)?;
            let r = load_reqs(&reqs, &a)?;
            let assessment = assess(&a, &r, &Config::default()).map_err(engine_error)?;
            let report = CheckReport::new(&a.name, &assessment);
            match format {
                Format::Text => print!("{}", report.to_text(traces)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize")),
            }
            Ok(report.exit_code())
        }
        Command::Explain { arch, fact, agent, reqs, format, n } => {
            let a = load(&arch, n)?;
            let extra = match &reqs {
                Some(p) => load_reqs(p, &a)?.terms(),
                None => Vec::new(),
            };
            let k = parse_knowledge(&fact, &a).map_err(report_parse)?;
            let agent = match agent {
                Some(name) => Some(a.agent(&name).cloned().ok_or_else(|| engine_error(format!("unknown agent `{name}`")))?),
                None => None,
            };
            let found = explain(&a, &extra, &k, agent.as_ref()).map_err(engine_error)?;
            match format {
                Format::Text => match &found {
                    Some((agent, tree)) => print!("derived by {agent}\n{}", tree.render()),
                    None => println!("not derivable"),
                },
                Format::Json => {
                    let doc = serde_json::json!({
                        "schema_version": SCHEMA_VERSION,
                        "fact": k.to_string(),
                        "derivable": found.is_some(),
                        "agent": found.as_ref().map(|(a, _)| a),
                        "tree": found.as_ref().map(|(_, t)| t),
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("trees serialize"));
                }
            }
            Ok(0)
        }
        Command::View { arch, format, n } => {
            let a = load(&arch, n)?;
            let view = LocationView::of(&a);
            match format {
                ViewFormat::Dot => print!("{}", view.to_dot()),
                ViewFormat::Json => println!("{}", view.to_json()),
            }
            Ok(0)
        }
        Command::Serve { port, bind } => serve(&bind, port).map(|()| 0).map_err(engine_error),
    }
}

fn serve(bind: &str, port: u16) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new().context("starting the runtime")?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((bind, port)).await.with_context(|| format!("binding {bind}:{port}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, privarch::service::router()).await.context("serving")
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Reported) => ExitCode::from(1),
    }
}
