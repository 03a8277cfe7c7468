//! Command-line front end for the petriproof toolkit.
//!
//! Exit codes: 0 on success, 1 on usage or environment errors, 2 when an
//! analysis reaches a negative verdict (solver returns sat where unsat was
//! expected, a deadlock is found, or a matrix check fails).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use petriproof_core::cpn::monitor::{run_with_monitor, stats_to_csv, MonitorKind};
use petriproof_core::cpn::{self, ChoicePolicy, CpnModel};
use petriproof_core::hlpn::Net;
use petriproof_core::incidence::matrices;
use petriproof_core::models::{self, catalog, default_registry, ModelId, COMPOSITE_NAMES, MODEL_NAMES};
use petriproof_core::pnet::{parse_model, print_raw, ParsedModel};
use petriproof_core::sim::{bounded_explore, replicate, SimConfig};
use petriproof_core::smtgen::{
    canonical_property_id, emit_property, emit_property_unbound, emit_rule, resolve_solver,
    run_solver, verify_all, SmtError, Verdict,
};

#[derive(Parser)]
#[command(
    name = "petriproof",
    version,
    about = "Petri-net modelling, simulation and formal verification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in model catalog
    List(ListArgs),
    /// Print the source of a built-in model
    Show(ShowArgs),
    /// Parse and compile a model, reporting its shape
    Validate(ValidateArgs),
    /// Compute the incidence matrices of a model
    Incidence(IncidenceArgs),
    /// Run replicated workflow simulations with confidence intervals
    Simulate(SimulateArgs),
    /// Execute a coloured model, optionally collecting marking statistics
    CpnRun(CpnRunArgs),
    /// Bounded search of a workflow model's reachability graph
    Explore(ExploreArgs),
    /// Emit an SMT-LIB script for a property or a rewrite rule
    SmtEmit(SmtEmitArgs),
    /// Check properties with an external SMT solver
    SmtCheck(SmtCheckArgs),
    /// Write a reproducible analysis bundle for a set of models
    Report(ReportArgs),
}

#[derive(Args)]
struct ListArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Include the fused composite models
    #[arg(long)]
    composites: bool,
}

#[derive(Args)]
struct ShowArgs {
    /// Model name or full identifier such as ecdsa-keygen/cpn/timed
    model: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Built-in model name or identifier
    model: Option<String>,
    /// Validate a .pnet file instead of a built-in model
    #[arg(long, conflicts_with = "model")]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct IncidenceArgs {
    /// Workflow model name, composite name, or full identifier
    model: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Compare against the bundled reference tables instead of printing
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Workflow model name or composite name
    model: String,
    #[arg(long, default_value_t = 1000)]
    firings: u64,
    #[arg(long, default_value_t = 30)]
    replications: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CpnRunArgs {
    /// Coloured model name or full identifier
    model: String,
    /// Run the timed variant
    #[arg(long)]
    timed: bool,
    /// Run the untimed variant (the default)
    #[arg(long, conflicts_with = "timed")]
    untimed: bool,
    #[arg(long, default_value_t = 500)]
    steps: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Random)]
    policy: PolicyArg,
    /// Collect marking statistics with the given observer
    #[arg(long, value_enum)]
    monitor: Option<MonitorArg>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExploreArgs {
    /// Workflow model name or composite name
    model: String,
    #[arg(long, default_value_t = 10_000)]
    max_states: usize,
}

#[derive(Args)]
struct SmtEmitArgs {
    /// Property identifier or alias, for example ecdsa-keygen
    property: Option<String>,
    /// Emit a rewrite-rule fragment such as R13 instead of a property
    #[arg(long, conflicts_with = "property")]
    rule: Option<String>,
    /// Emit the sanity variant with the ground bindings removed
    #[arg(long, conflicts_with = "rule")]
    negative: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SmtCheckArgs {
    /// Property identifier or alias
    property: Option<String>,
    /// Check all six properties
    #[arg(long, conflicts_with = "property")]
    all: bool,
    /// Solver executable; falls back to PETRIPROOF_SOLVER, then PATH
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Per-property solver timeout in seconds
    #[arg(long, default_value_t = 30)]
    smt_timeout: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Workflow model names; use --all for the whole catalog
    models: Vec<String>,
    #[arg(long)]
    all: bool,
    /// Directory the bundle is written into
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    firings: u64,
    #[arg(long, default_value_t = 30)]
    replications: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    solver: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    smt_timeout: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    /// Choose uniformly among enabled bindings with the seeded generator
    Random,
    /// Prefer untimed transitions over timed ones
    Priority,
}

impl From<PolicyArg> for ChoicePolicy {
    fn from(arg: PolicyArg) -> Self {
        match arg {
            PolicyArg::Random => ChoicePolicy::SeededRandom,
            PolicyArg::Priority => ChoicePolicy::Priority,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MonitorArg {
    /// Statistics over the sequence of observed markings
    Discrete,
    /// Statistics weighted by how long each marking persisted
    TimeAverage,
}

impl From<MonitorArg> for MonitorKind {
    fn from(arg: MonitorArg) -> Self {
        match arg {
            MonitorArg::Discrete => MonitorKind::Discrete,
            MonitorArg::TimeAverage => MonitorKind::TimeAverage,
        }
    }
}

/// Errors that abort a command before any analysis verdict is reached.
/// They all map to exit code 1.
#[derive(Debug, Error)]
enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

fn io_err(path: &Path, source: std::io::Error) -> AppError {
    AppError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Prints one line to stdout, exiting quietly when the consumer has closed
/// the pipe.
fn say(args: std::fmt::Arguments) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if out.write_fmt(args).and_then(|()| out.write_all(b"\n")).is_err() {
        std::process::exit(0);
    }
}

/// Prints one diagnostic line to stderr, ignoring write failures.
fn warn(args: std::fmt::Arguments) {
    use std::io::Write;
    let mut err = std::io::stderr().lock();
    let _ = err.write_fmt(args).and_then(|()| err.write_all(b"\n"));
}

macro_rules! say {
    ($($arg:tt)*) => { say(format_args!($($arg)*)) };
}

macro_rules! warn {
    ($($arg:tt)*) => { warn(format_args!($($arg)*)) };
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::List(args) => cmd_list(args),
        Command::Show(args) => cmd_show(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Incidence(args) => cmd_incidence(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::CpnRun(args) => cmd_cpn_run(args),
        Command::Explore(args) => cmd_explore(args),
        Command::SmtEmit(args) => cmd_smt_emit(args),
        Command::SmtCheck(args) => cmd_smt_check(args),
        Command::Report(args) => cmd_report(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            warn!("error: {err}");
            1
        }
    }
}

/// Writes `content` to `--out` when given, otherwise to stdout.
fn deliver(out: Option<&Path>, content: &str) -> Result<(), AppError> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| io_err(path, e)),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(content.as_bytes()).is_err() {
                std::process::exit(0);
            }
            Ok(())
        }
    }
}

/// Resolves a workflow-net argument: a catalog name, a composite name, or a
/// `<name>/hlpn` identifier.
fn workflow_net(arg: &str) -> Result<(String, Net), AppError> {
    let name = arg.strip_suffix("/hlpn").unwrap_or(arg);
    models::hlpn_net(name).map(|net| (name.to_string(), net)).map_err(|_| {
        usage(format!(
            "unknown workflow model `{arg}`; run `petriproof list --composites`"
        ))
    })
}

/// Resolves a coloured-model argument together with the timing flags.
fn coloured_model(
    arg: &str,
    timed_flag: bool,
    untimed_flag: bool,
) -> Result<(ModelId, CpnModel), AppError> {
    let unknown = || usage(format!("unknown coloured model `{arg}`"));
    let (name, timing) = match arg.split('/').collect::<Vec<_>>().as_slice() {
        [name] => (*name, None),
        [name, "cpn"] => (*name, None),
        [name, "cpn", "timed"] => (*name, Some(true)),
        [name, "cpn", "untimed"] => (*name, Some(false)),
        _ => return Err(unknown()),
    };
    let timed = match (timing, timed_flag, untimed_flag) {
        (Some(true), _, true) | (Some(false), true, _) => {
            return Err(usage(format!(
                "`{arg}` contradicts the explicit timing flag"
            )))
        }
        (Some(t), _, _) => t,
        (None, t, _) => t,
    };
    let model = models::cpn_model(name, timed).map_err(|_| unknown())?;
    Ok((ModelId::cpn(name, timed), model))
}

fn cmd_list(args: ListArgs) -> Result<i32, AppError> {
    let mut entries: Vec<(ModelId, bool)> =
        catalog().into_iter().map(|id| (id, false)).collect();
    if args.composites {
        for name in COMPOSITE_NAMES {
            entries.push((ModelId::hlpn(name), true));
        }
    }
    match args.format {
        Format::Csv => {
            for (id, _) in &entries {
                say!("{id}");
            }
        }
        Format::Json => {
            let docs: Vec<serde_json::Value> = entries
                .iter()
                .map(|(id, composite)| {
                    serde_json::json!({
                        "id": id.to_string(),
                        "name": id.name,
                        "layer": match id.layer {
                            models::Layer::Hlpn => "hlpn",
                            models::Layer::Cpn => "cpn",
                        },
                        "timed": id.timing == models::Timing::Timed,
                        "composite": composite,
                    })
                })
                .collect();
            say!("{}", serde_json::to_string_pretty(&docs).expect("plain data"));
        }
    }
    Ok(0)
}

fn cmd_show(args: ShowArgs) -> Result<i32, AppError> {
    let arg = args.model.as_str();
    if COMPOSITE_NAMES.contains(&arg) {
        let raw = models::composite_raw(arg).expect("known composite");
        return deliver(args.out.as_deref(), &print_raw(&raw)).map(|()| 0);
    }
    let id = match arg.split('/').collect::<Vec<_>>().as_slice() {
        [name] | [name, "hlpn"] => ModelId::hlpn(name),
        [name, "cpn"] | [name, "cpn", "untimed"] => ModelId::cpn(name, false),
        [name, "cpn", "timed"] => ModelId::cpn(name, true),
        _ => return Err(usage(format!("unknown model `{arg}`"))),
    };
    let src = models::source(&id).map_err(|e| usage(e.to_string()))?;
    deliver(args.out.as_deref(), src).map(|()| 0)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32, AppError> {
    let (label, parsed) = match (&args.model, &args.file) {
        (Some(arg), None) => {
            if COMPOSITE_NAMES.contains(&arg.as_str()) {
                let net = models::hlpn_net(arg).expect("known composite");
                (arg.clone(), Ok(ParsedModel::Hlpn(net)))
            } else {
                let id = match arg.split('/').collect::<Vec<_>>().as_slice() {
                    [name] | [name, "hlpn"] => ModelId::hlpn(name),
                    [name, "cpn"] | [name, "cpn", "untimed"] => ModelId::cpn(name, false),
                    [name, "cpn", "timed"] => ModelId::cpn(name, true),
                    _ => return Err(usage(format!("unknown model `{arg}`"))),
                };
                let parsed = models::instantiate(&id).map_err(|e| usage(e.to_string()))?;
                (arg.clone(), Ok(parsed))
            }
        }
        (None, Some(path)) => {
            let src = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let label = path.display().to_string();
            match parse_model(&src, default_registry()) {
                Ok(parsed) => (label, Ok(parsed)),
                Err(err) => (label, Err(err)),
            }
        }
        _ => return Err(usage("pass a model name or --file <path>")),
    };
    match parsed {
        Ok(ParsedModel::Hlpn(net)) => {
            say!(
                "{label}: valid workflow net, {} places, {} transitions",
                net.places().len(),
                net.transitions().len()
            );
            Ok(0)
        }
        Ok(ParsedModel::Cpn(model)) => {
            say!(
                "{label}: valid coloured net ({}), {} places, {} transitions",
                if model.timed { "timed" } else { "untimed" },
                model.places.len(),
                model.transitions.len()
            );
            Ok(0)
        }
        Err(err) => {
            warn!("{label}: invalid model: {err}");
            Ok(2)
        }
    }
}

fn cmd_incidence(args: IncidenceArgs) -> Result<i32, AppError> {
    let arg = args.model.as_str();
    // Coloured identifiers are accepted for inspection; everything else is
    // resolved as a workflow or composite net.
    let set = match arg.split('/').collect::<Vec<_>>().as_slice() {
        [name, "cpn"] | [name, "cpn", "untimed"] => {
            matrices(&models::cpn_model(name, false).map_err(|e| usage(e.to_string()))?)
        }
        [name, "cpn", "timed"] => {
            matrices(&models::cpn_model(name, true).map_err(|e| usage(e.to_string()))?)
        }
        _ => {
            let (_, net) = workflow_net(arg)?;
            matrices(&net)
        }
    };

    if args.check {
        let name = arg.strip_suffix("/hlpn").unwrap_or(arg);
        let reference = models::golden_incidence_csv(name).ok_or_else(|| {
            usage(format!("no bundled reference tables for `{arg}`"))
        })?;
        if set.to_csv() == reference {
            say!("{name}: incidence matrices match the bundled tables");
            return Ok(0);
        }
        warn!("{name}: incidence matrices differ from the bundled tables");
        return Ok(2);
    }

    let rendered = match args.format {
        Format::Csv => set.to_csv(),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&set.to_json_value()).expect("plain data")
        ),
    };
    deliver(args.out.as_deref(), &rendered).map(|()| 0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, AppError> {
    let (_, net) = workflow_net(&args.model)?;
    let config = SimConfig {
        firings: args.firings,
        replications: args.replications,
        seed: args.seed,
        alpha: args.alpha,
    };
    let report = match replicate(&net, config) {
        Ok(report) => report,
        Err(err) => return Err(usage(err.to_string())),
    };
    let rendered = match args.format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("plain data")
        ),
        Format::Csv => {
            let mut out = String::from("place,mean,ci_lo,ci_hi\n");
            for p in &report.places {
                out.push_str(&format!("{},{},{},{}\n", p.name, p.mean, p.ci_lo, p.ci_hi));
            }
            out
        }
    };
    deliver(args.out.as_deref(), &rendered).map(|()| 0)
}

fn cmd_cpn_run(args: CpnRunArgs) -> Result<i32, AppError> {
    let (id, model) = coloured_model(&args.model, args.timed, args.untimed)?;
    let policy: ChoicePolicy = args.policy.into();

    if let Some(monitor) = args.monitor {
        let run = match run_with_monitor(&model, args.steps, args.seed, policy, monitor.into()) {
            Ok(run) => run,
            Err(err) => {
                warn!("{id}: run failed: {err}");
                return Ok(2);
            }
        };
        let rendered = match args.format {
            Format::Csv => stats_to_csv(&run.stats),
            Format::Json => format!(
                "{}\n",
                serde_json::to_string_pretty(&serde_json::json!({
                    "model": id.to_string(),
                    "seed": args.seed,
                    "completed": run.completed,
                    "final_clock": run.final_state.clock,
                    "stats": run.stats.iter().map(|s| serde_json::json!({
                        "place": s.place,
                        "count": s.count,
                        "sum": s.sum,
                        "average": s.average,
                        "min": s.min,
                        "max": s.max,
                    })).collect::<Vec<_>>(),
                }))
                .expect("plain data")
            ),
        };
        return deliver(args.out.as_deref(), &rendered).map(|()| 0);
    }

    let run = match cpn::run(&model, args.steps, args.seed, policy) {
        Ok(run) => run,
        Err(err) => {
            warn!("{id}: run failed: {err}");
            return Ok(2);
        }
    };
    let rendered = match args.format {
        Format::Json => {
            let events: Vec<serde_json::Value> = run
                .events
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "transition": model.transitions[e.trans].name,
                        "clock": e.clock,
                    })
                })
                .collect();
            let marking: Vec<serde_json::Value> = model
                .places
                .iter()
                .enumerate()
                .map(|(p, place)| {
                    serde_json::json!({
                        "place": place.name,
                        "tokens": run.final_state.place_size(p),
                    })
                })
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&serde_json::json!({
                    "model": id.to_string(),
                    "seed": args.seed,
                    "completed": run.completed,
                    "final_clock": run.final_state.clock,
                    "events": events,
                    "final_marking": marking,
                }))
                .expect("plain data")
            )
        }
        Format::Csv => {
            let mut out = String::from("step,transition,clock\n");
            for (i, e) in run.events.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    i + 1,
                    model.transitions[e.trans].name,
                    e.clock
                ));
            }
            out
        }
    };
    deliver(args.out.as_deref(), &rendered).map(|()| 0)
}

fn cmd_explore(args: ExploreArgs) -> Result<i32, AppError> {
    let (name, net) = workflow_net(&args.model)?;
    let report = match bounded_explore(&net, args.max_states) {
        Ok(report) => report,
        Err(err) => {
            warn!("{name}: exploration failed: {err}");
            return Ok(2);
        }
    };
    let doc = serde_json::json!({
        "model": name,
        "states": report.states,
        "truncated": report.truncated,
        "completions": report.completions,
        "deadlocks": report.deadlocks.len(),
        "covered_places": report.covered_places,
        "uncovered_places": report.uncovered_places,
    });
    say!("{}", serde_json::to_string_pretty(&doc).expect("plain data"));
    if !report.deadlocks.is_empty() {
        warn!(
            "{name}: {} deadlocked markings reachable",
            report.deadlocks.len()
        );
        return Ok(2);
    }
    Ok(0)
}

fn cmd_smt_emit(args: SmtEmitArgs) -> Result<i32, AppError> {
    let script = if let Some(rule) = &args.rule {
        emit_rule(rule).map_err(|e| usage(e.to_string()))?
    } else if let Some(property) = &args.property {
        let id = canonical_property_id(property).map_err(|e| usage(e.to_string()))?;
        if args.negative {
            emit_property_unbound(id).map_err(|e| usage(e.to_string()))?
        } else {
            emit_property(id).map_err(|e| usage(e.to_string()))?
        }
    } else {
        return Err(usage("pass a property identifier or --rule <R#>"));
    };
    deliver(args.out.as_deref(), &script.render()).map(|()| 0)
}

fn cmd_smt_check(args: SmtCheckArgs) -> Result<i32, AppError> {
    let solver = resolve_solver(args.solver.as_deref()).ok_or_else(|| {
        usage("no SMT solver found: pass --solver or set PETRIPROOF_SOLVER")
    })?;

    let mut failures = 0usize;
    say!("property,verdict,seconds");
    if args.all {
        for row in verify_all(&solver, args.smt_timeout as f64) {
            match row.outcome {
                Ok(v) => {
                    say!("{},{},{:.3}", row.property, v.result, v.elapsed_seconds);
                    if v.result != Verdict::Unsat {
                        failures += 1;
                    }
                }
                Err(err) => {
                    say!("{},error,", row.property);
                    warn!("{}: {err}", row.property);
                    failures += 1;
                }
            }
        }
    } else {
        let property = args
            .property
            .as_deref()
            .ok_or_else(|| usage("pass a property identifier or --all"))?;
        let id = canonical_property_id(property).map_err(|e| usage(e.to_string()))?;
        let script = emit_property(id).expect("known property");
        match run_solver(&script, &solver, args.smt_timeout as f64) {
            Ok(v) => {
                say!("{id},{},{:.3}", v.result, v.elapsed_seconds);
                if v.result != Verdict::Unsat {
                    failures += 1;
                }
            }
            Err(SmtError::SolverNotFound(path)) => {
                return Err(usage(format!("solver not found at {path}")))
            }
            Err(err) => {
                say!("{id},error,");
                warn!("{id}: {err}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        warn!("{failures} properties did not come back unsat");
        Ok(2)
    } else {
        Ok(0)
    }
}

fn cmd_report(args: ReportArgs) -> Result<i32, AppError> {
    let names: Vec<String> = if args.all {
        MODEL_NAMES.iter().map(|n| n.to_string()).collect()
    } else {
        args.models.clone()
    };
    if names.is_empty() {
        return Err(usage("pass model names or --all"));
    }
    for name in &names {
        if !MODEL_NAMES.contains(&name.as_str()) {
            return Err(usage(format!("unknown model `{name}`")));
        }
    }
    fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;

    let write = |file: String, content: &str| -> Result<(), AppError> {
        let path = args.out.join(file);
        fs::write(&path, content).map_err(|e| io_err(&path, e))
    };

    for name in &names {
        let net = models::hlpn_net(name).expect("catalog model");
        write(format!("{name}.incidence.csv"), &matrices(&net).to_csv())?;

        let config = SimConfig {
            firings: args.firings,
            replications: args.replications,
            seed: args.seed,
            alpha: args.alpha,
        };
        let report = replicate(&net, config).map_err(|e| usage(e.to_string()))?;
        let json = format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("plain data")
        );
        write(format!("{name}.sim.json"), &json)?;

        for (timed, kind, suffix) in [
            (false, MonitorKind::Discrete, "cpn-untimed"),
            (true, MonitorKind::TimeAverage, "cpn-timed"),
        ] {
            let model = models::cpn_model(name, timed).expect("catalog model");
            let run = run_with_monitor(&model, args.firings, args.seed, ChoicePolicy::SeededRandom, kind)
                .map_err(|e| usage(format!("{name}: {e}")))?;
            write(format!("{name}.{suffix}.monitor.csv"), &stats_to_csv(&run.stats))?;
        }
    }

    let mut failures = 0usize;
    match resolve_solver(args.solver.as_deref()) {
        Some(solver) => {
            let mut table = String::from("property,verdict\n");
            for row in verify_all(&solver, args.smt_timeout as f64) {
                match row.outcome {
                    Ok(v) => {
                        table.push_str(&format!("{},{}\n", row.property, v.result));
                        if v.result != Verdict::Unsat {
                            failures += 1;
                        }
                    }
                    Err(err) => {
                        table.push_str(&format!("{},error\n", row.property));
                        warn!("{}: {err}", row.property);
                        failures += 1;
                    }
                }
            }
            write("smt-verdicts.csv".to_string(), &table)?;
        }
        None => {
            warn!("no SMT solver found; smt-verdicts.csv omitted from the bundle");
        }
    }

    say!("bundle written to {}", args.out.display());
    if failures > 0 {
        warn!("{failures} properties did not come back unsat");
        Ok(2)
    } else {
        Ok(0)
    }
}
