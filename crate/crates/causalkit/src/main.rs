use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use causalkit::reproduce::{reproduce_all, Settings, Target};
use causalkit::{parse_dag, parse_scenario, read_csv, render, write_csv, Format};
use causalkit_core::adjust::AdjustmentQuery;
use causalkit_core::estimate::{Analysis, Method, OutcomeFamily};
use causalkit_core::scenario::Scenario;
use causalkit_core::{
    enumerate_paths, minimal_adjustment_sets, path_open, population_estimand, BootstrapSpec, CausalDag, NodeId,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Causal diagrams, simulation and risk-ratio estimation for binary data.
#[derive(Parser)]
#[command(name = "causalkit", version)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for simulation and the bootstrap; overrides scenario files.
    #[arg(long, global = true, env = "CAUSALKIT_SEED")]
    seed: Option<u64>,
    /// Sample size; overrides scenario files.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a DAG file.
    Dag {
        #[command(subcommand)]
        command: DagCommand,
    },
    /// Sample a scenario's model (after selection) to CSV.
    Simulate { scenario: PathBuf },
    /// Run every analysis of a scenario on one simulated dataset.
    Run { scenario: PathBuf },
    /// Estimate one risk ratio from a CSV file.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        treatment: String,
        #[arg(long)]
        outcome: String,
        #[arg(long, num_args = 0..)]
        adjust: Vec<String>,
        /// Treatment x adjuster interactions (G-computation).
        #[arg(long)]
        interactions: bool,
        /// Outcome-regression working model.
        #[arg(long, value_enum, default_value_t = FamilyArg::Poisson)]
        family: FamilyArg,
        #[arg(long, default_value_t = causalkit_core::bootstrap::DEFAULT_REPLICATES)]
        replicates: usize,
    },
    /// Exact population targets of a scenario's analyses.
    Oracle { scenario: PathBuf },
    /// Re-run a published table (table2..table8) or `all`.
    Reproduce {
        target: String,
        /// Run bootstrap replicates in parallel (same results as serial).
        #[arg(long)]
        parallel: bool,
    },
}

#[derive(Subcommand)]
enum DagCommand {
    /// Validate and summarise.
    Check { file: PathBuf },
    /// List the paths between two nodes with their status.
    Paths {
        file: PathBuf,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        #[arg(long, num_args = 0..)]
        given: Vec<String>,
    },
    /// Minimal adjustment sets for the treatment's effect on the outcome.
    Adjust {
        file: PathBuf,
        #[arg(long, num_args = 0..)]
        forced: Vec<String>,
        #[arg(long)]
        treatment: Option<String>,
        #[arg(long)]
        outcome: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Poisson,
    Binomial,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

/// Exit 2 for bad input, 1 for analyses that ran and failed.
enum Failure {
    Input(String),
    Analysis(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Output {
    text: String,
    failed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, failed: false }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_dag(path: &Path) -> Result<CausalDag, Failure> {
    parse_dag(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path, cli: &Cli) -> Result<Scenario, Failure> {
    let mut s = parse_scenario(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(n) = cli.n {
        s.sample_size = n;
    }
    Ok(s)
}

fn node_set(dag: &CausalDag, names: &[String]) -> Result<BTreeSet<NodeId>, Failure> {
    Ok(dag.require_all(names.iter().map(String::as_str))?)
}

fn endpoint(dag: &CausalDag, given: &Option<String>, fallback: Option<NodeId>, what: &str) -> Result<NodeId, Failure> {
    match given {
        Some(n) => Ok(dag.require(n)?),
        None => fallback.ok_or_else(|| Failure::Input(format!("no {what}: pass --{what} or declare one in the file"))),
    }
}

fn dag_command(cmd: &DagCommand, format: Format) -> Result<Output, Failure> {
    match cmd {
        DagCommand::Check { file } => {
            let dag = load_dag(file)?;
            let role = |v: Option<NodeId>| v.map(|v| dag.name(v).to_string());
            let text = match format {
                Format::Json => {
                    serde_json::to_string_pretty(&json!({
                        "nodes": dag.node_count(),
                        "edges": dag.edge_count(),
                        "treatment": role(dag.treatment()),
                        "outcome": role(dag.outcome()),
                    }))? + "\n"
                }
                _ => {
                    let mut s = format!("ok: {} nodes, {} edges\n", dag.node_count(), dag.edge_count());
                    if let Some(t) = role(dag.treatment()) {
                        writeln!(s, "treatment: {t}").unwrap();
                    }
                    if let Some(y) = role(dag.outcome()) {
                        writeln!(s, "outcome: {y}").unwrap();
                    }
                    s
                }
            };
            Ok(Output::ok(text))
        }
        DagCommand::Paths { file, from, to, given } => {
            let dag = load_dag(file)?;
            let x = endpoint(&dag, from, dag.treatment(), "from")?;
            let y = endpoint(&dag, to, dag.outcome(), "to")?;
            let z = node_set(&dag, given)?;
            let mut rows = Vec::new();
            for p in enumerate_paths(&dag, x, y)? {
                let open = path_open(&dag, &p, &z)?;
                let kinds: Vec<(String, String)> =
                    p.interior().map(|(v, k)| (dag.name(v).to_string(), k.to_string())).collect();
                let kind = if p.is_causal() {
                    "causal"
                } else if p.is_backdoor() {
                    "back-door"
                } else {
                    "non-causal"
                };
                rows.push((p.display(&dag).to_string(), open, kind, kinds));
            }
            let text = match format {
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(path, open, kind, nodes)| {
                            json!({"path": path, "open": open, "kind": kind,
                                   "nodes": nodes.iter().map(|(n, k)| json!({"node": n, "kind": k})).collect::<Vec<_>>()})
                        })
                        .collect();
                    serde_json::to_string_pretty(&v)? + "\n"
                }
                _ => {
                    let mut s = String::new();
                    for (path, open, kind, nodes) in &rows {
                        let detail: Vec<String> = nodes.iter().map(|(n, k)| format!("{n}: {k}")).collect();
                        let status = if *open { "OPEN  " } else { "CLOSED" };
                        write!(s, "{status}  {path}  [{kind}]").unwrap();
                        if !detail.is_empty() {
                            write!(s, "  ({})", detail.join(", ")).unwrap();
                        }
                        s.push('\n');
                    }
                    if rows.is_empty() {
                        s.push_str("no paths\n");
                    }
                    s
                }
            };
            Ok(Output::ok(text))
        }
        DagCommand::Adjust { file, forced, treatment, outcome } => {
            let dag = load_dag(file)?;
            let t = endpoint(&dag, treatment, dag.treatment(), "treatment")?;
            let y = endpoint(&dag, outcome, dag.outcome(), "outcome")?;
            let mut f = node_set(&dag, forced)?;
            f.extend(dag.nodes_with_role(causalkit_core::Role::Conditioned));
            let q = AdjustmentQuery::new(&dag, t, y, f);
            let sets = minimal_adjustment_sets(&dag, &q)?;
            let text = match format {
                Format::Json => {
                    let v: Vec<Vec<&str>> = sets.iter().map(|s| dag.sorted_names(s)).collect();
                    serde_json::to_string_pretty(&v)? + "\n"
                }
                _ if sets.is_empty() => "no valid adjustment set\n".into(),
                _ => sets.iter().map(|s| dag.format_set(s) + "\n").collect(),
            };
            Ok(Output::ok(text))
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Dag { command } => dag_command(command, cli.format),
        Command::Simulate { scenario } => {
            let s = load_scenario(scenario, cli)?;
            let d = s.data()?;
            let mut buf = Vec::new();
            write_csv(&d, &mut buf)?;
            Ok(Output::ok(String::from_utf8(buf)?))
        }
        Command::Run { scenario } => {
            let s = load_scenario(scenario, cli)?;
            let table = s.run()?;
            Ok(Output { text: render::result_table(&table, cli.format), failed: !table.all_ok() })
        }
        Command::Estimate { data, method, treatment, outcome, adjust, interactions, family, replicates } => {
            let file = std::fs::File::open(data).map_err(|e| Failure::Input(format!("{}: {e}", data.display())))?;
            let d = read_csv(std::io::BufReader::new(file))
                .map_err(|e| Failure::Input(format!("{}: {e}", data.display())))?;
            let adjust: Vec<&str> = adjust.iter().map(String::as_str).collect();
            let family = match family {
                FamilyArg::Poisson => OutcomeFamily::Poisson,
                FamilyArg::Binomial => OutcomeFamily::Binomial,
            };
            let a = Analysis::new(*method, treatment, outcome, &adjust)
                .with_interactions(*interactions)
                .with_family(family)
                .with_bootstrap(BootstrapSpec::new(*replicates, cli.seed.unwrap_or(0)));
            match a.run(&d) {
                Ok(e) => Ok(Output::ok(render::estimate(&e, cli.format))),
                Err(causalkit_core::EstimateError::Dataset(e)) => Err(Failure::Input(e.to_string())),
                Err(e) => Err(Failure::Analysis(e.to_string())),
            }
        }
        Command::Oracle { scenario } => {
            let s = load_scenario(scenario, cli)?;
            let mut failed = false;
            let mut rows = Vec::new();
            for (i, req) in s.analyses.iter().enumerate() {
                let v = population_estimand(&s.model, &req.analysis, s.selection.as_ref());
                failed |= v.is_err();
                rows.push((i, req.label().to_string(), req.analysis.adjust.clone(), v));
            }
            let text = match cli.format {
                Format::Json => {
                    let v: Vec<_> = rows
                        .iter()
                        .map(|(i, l, a, v)| match v {
                            Ok(x) => json!({"index": i, "label": l, "adjustment": a, "oracle": x}),
                            Err(e) => json!({"index": i, "label": l, "adjustment": a, "error": e.to_string()}),
                        })
                        .collect();
                    serde_json::to_string_pretty(&v)? + "\n"
                }
                Format::Csv => {
                    let mut s = String::from("model,adjustment,oracle\n");
                    for (_, l, a, v) in &rows {
                        let x = v.as_ref().map_or("error".into(), |x| format!("{x:.10}"));
                        writeln!(s, "{l},{},{x}", a.join(";")).unwrap();
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for (i, l, a, v) in &rows {
                        let adj = if a.is_empty() { "-".into() } else { a.join(", ") };
                        match v {
                            Ok(x) => writeln!(s, "{l:<20}  {adj:<40}  {x:.4}").unwrap(),
                            Err(e) => writeln!(s, "{l:<20}  {adj:<40}  analysis {i}: {e}").unwrap(),
                        }
                    }
                    s
                }
            };
            Ok(Output { text, failed })
        }
        Command::Reproduce { target, parallel } => {
            let targets: Vec<Target> = if target == "all" {
                Target::ALL.to_vec()
            } else {
                vec![target.parse::<Target>().map_err(Failure::Input)?]
            };
            let settings = Settings { seed: cli.seed, n: cli.n, parallel: *parallel };
            let tables = reproduce_all(&targets, &settings);
            Ok(Output { text: render::repro_tables(&tables, cli.format), failed: !tables.iter().all(|t| t.passed()) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &out.text) {
                        eprintln!("causalkit: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", out.text),
            }
            if out.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Input(m)) => {
            eprintln!("causalkit: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(m)) => {
            eprintln!("causalkit: {m}");
            ExitCode::from(1)
        }
    }
}
