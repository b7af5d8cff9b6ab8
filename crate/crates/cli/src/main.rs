//! `maxweights`: run scenarios, invariant suites and parameter sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxweights_core::harness::{
    corpus_names, corpus_scenario, extended_corpus, principal_forest, run_scenario, sparse_families,
    sweep_experiment, verify_suite, Report, ScenarioConfig, Suite, VerifyOptions, VerifyReport,
};
use maxweights_core::Error;

mod output;

use output::Sink;

const EXIT_SUITE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "maxweights", version, about = "Two-weight testing for multilinear fractional maximal operators on lattices")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (MAXWEIGHTS_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output files here instead of printing to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every step of a scenario and emit its report.
    Run {
        /// Config file or shipped scenario name.
        config: String,
    },
    /// Run invariant suites over a config or the default corpus.
    Verify {
        /// Comma-separated suites, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Config file, shipped scenario name, or `default` for the corpus.
        #[arg(default_value = "default")]
        config: String,
        #[arg(long, hide = true)]
        corrupt_sparse: bool,
    },
    /// Re-run a scenario over values of one numeric config field.
    Sweep {
        config: String,
        /// Dotted path such as `w.0.exponent`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Sparse families of a scenario, one per shifted grid.
    Sparse {
        config: String,
        /// One CSV row per cube.
        #[arg(long)]
        dump: bool,
    },
    /// Principal cubes of a scenario.
    Principal {
        config: String,
        #[arg(long)]
        dump: bool,
    },
    /// List the shipped scenarios.
    Corpus,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.global.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_resource() || matches!(e, Error::Io(_)) {
        EXIT_RESOURCE
    } else if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_SUITE
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let threads = match std::env::var("MAXWEIGHTS_THREADS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| format!("MAXWEIGHTS_THREADS = `{v}` is not a count"))?),
        Err(_) => flag,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Reads a config file, falling back to a shipped scenario of that name.
fn load_config(arg: &str, g: &Global) -> Result<ScenarioConfig, Error> {
    let path = Path::new(arg);
    let mut cfg = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: arg.into(),
            message: e.to_string(),
        })?;
        ScenarioConfig::from_json_str(&text)?
    } else if let Some(parsed) = corpus_scenario(arg) {
        parsed?
    } else {
        return Err(Error::Config {
            path: arg.into(),
            message: format!("no such file and no shipped scenario; shipped: {}", corpus_names().join(", ")),
        });
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn format_for(g: &Global, cfg: Option<&ScenarioConfig>) -> Format {
    g.format.unwrap_or(match cfg.map(|c| c.output.format) {
        Some(maxweights_core::harness::OutputFormat::Csv) => Format::Csv,
        _ => Format::Json,
    })
}

fn sink_for(g: &Global, cfg: Option<&ScenarioConfig>) -> Sink {
    let dir = g.out.clone().or_else(|| cfg.and_then(|c| c.output.dir.clone()).map(PathBuf::from));
    Sink::new(dir)
}

fn dispatch(cli: &Cli) -> Result<u8, Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { config } => {
            let cfg = load_config(config, g)?;
            let outcome = run_scenario(&cfg)?;
            let sink = sink_for(g, Some(&cfg));
            emit_report(&sink, format_for(g, Some(&cfg)), &outcome.report)?;
            if let Some(e) = outcome.failure {
                eprintln!("error: {e} (partial report written)");
                return Ok(EXIT_RESOURCE);
            }
            Ok(if report_checks_pass(&outcome.report) { 0 } else { EXIT_SUITE })
        }
        Command::Verify {
            suite,
            config,
            corrupt_sparse,
        } => {
            let suites = Suite::parse_list(suite)?;
            let configs = if config == "default" {
                let mut all = extended_corpus();
                if let Some(seed) = g.seed {
                    all.iter_mut().for_each(|c| c.seed = seed);
                }
                all
            } else {
                vec![load_config(config, g)?]
            };
            let opts = VerifyOptions {
                seed: g.seed.unwrap_or(0),
                corrupt_sparse: *corrupt_sparse,
            };
            let report = verify_suite(&configs, &suites, opts)?;
            emit_verify(&sink_for(g, None), format_for(g, None), &report)?;
            for s in &report.suites {
                eprintln!(
                    "{:<12} {} ({} cases, {} failures, {:.2}s)",
                    s.suite.name(),
                    if s.pass { "pass" } else { "FAIL" },
                    s.cases,
                    s.failures,
                    s.seconds
                );
                for c in &s.counterexamples {
                    eprintln!("    {c}");
                }
            }
            Ok(if report.pass { 0 } else { EXIT_SUITE })
        }
        Command::Sweep { config, param, values } => {
            let cfg = load_config(config, g)?;
            let table = sweep_experiment(&cfg, param, values)?;
            let sink = sink_for(g, Some(&cfg));
            match format_for(g, Some(&cfg)) {
                Format::Json => sink.write("sweep.json", &output::json(&table))?,
                Format::Csv => sink.write("sweep.csv", &output::csv(&table.header(), &table.records())?)?,
            }
            Ok(0)
        }
        Command::Sparse { config, dump } => {
            let cfg = load_config(config, g)?;
            let scn = cfg.scenario()?;
            let families = sparse_families(&cfg, &scn)?;
            let sink = sink_for(g, Some(&cfg));
            if *dump {
                let (header, rows) = output::sparse_rows(&cfg.lattice, &families);
                sink.write("sparse.csv", &output::csv(&header, &rows)?)?;
            } else {
                let summary: Vec<_> = families
                    .iter()
                    .map(|f| {
                        serde_json::json!({
                            "shift": f.shift.label(cfg.lattice.n), "a": f.a, "k_floor": f.k_floor,
                            "k_ceil": f.k_ceil, "entries": f.entries.len(),
                        })
                    })
                    .collect();
                sink.write("sparse.json", &output::json(&summary))?;
            }
            Ok(0)
        }
        Command::Principal { config, dump } => {
            let cfg = load_config(config, g)?;
            let scn = cfg.scenario()?;
            let (forest, _) = principal_forest(&cfg, &scn)?;
            let sink = sink_for(g, Some(&cfg));
            if *dump {
                let (header, rows) = output::principal_rows(&cfg.lattice, &forest);
                sink.write("principal.csv", &output::csv(&header, &rows)?)?;
            } else {
                let summary = serde_json::json!({
                    "root": forest.root.to_string(), "cubes": forest.cubes.len(),
                    "generations": forest.generations().len(),
                });
                sink.write("principal.json", &output::json(&summary))?;
            }
            Ok(0)
        }
        Command::Corpus => {
            let sink = sink_for(g, None);
            sink.write("corpus.txt", &(corpus_names().join("\n") + "\n"))?;
            Ok(0)
        }
    }
}

fn report_checks_pass(r: &Report) -> bool {
    r.ordering.iter().all(|c| c.pass)
        && r.sparse.iter().all(|s| s.validation.pass())
        && r.principal.as_ref().is_none_or(|p| p.carleson.pass)
        && r.sandwich.as_ref().is_none_or(|s| s.violations == 0)
}

fn emit_report(sink: &Sink, format: Format, report: &Report) -> Result<(), Error> {
    match format {
        Format::Json => sink.write("report.json", &output::json(report)),
        Format::Csv => {
            let rows: Vec<Vec<String>> = report.summary_rows().into_iter().map(|(k, v)| vec![k, v]).collect();
            sink.write("report.csv", &output::csv(&["key".into(), "value".into()], &rows)?)?;
            if sink.is_dir() {
                sink.write("report.json", &output::json(report))?;
            }
            Ok(())
        }
    }
}

fn emit_verify(sink: &Sink, format: Format, report: &VerifyReport) -> Result<(), Error> {
    match format {
        Format::Json => sink.write("verify.json", &output::json(report)),
        Format::Csv => {
            let header = ["suite", "pass", "cases", "failures", "seconds"].map(String::from);
            let rows: Vec<Vec<String>> = report
                .suites
                .iter()
                .map(|s| {
                    vec![
                        s.suite.name().into(),
                        s.pass.to_string(),
                        s.cases.to_string(),
                        s.failures.to_string(),
                        format!("{:.3}", s.seconds),
                    ]
                })
                .collect();
            sink.write("verify.csv", &output::csv(&header, &rows)?)
        }
    }
}
