//! Command line front end: generate, solve, evaluate, check and batch-run
//! collective schedule instances.
//!
//! Every command prints its effective configuration (defaults included) as
//! `key=value` lines on stderr, so any output can be reproduced from the
//! transcript. Exit codes are a stable contract: 0 success (for checks,
//! axiom holds), 1 usage or input error, 2 capacity exceeded, 3 axiom
//! violated.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use collsched::axioms;
use collsched::costs;
use collsched::experiments::{run_experiment, ExperimentSpec};
use collsched::profiles::{self, LengthSpec};
use collsched::rng::derive_seed;
use collsched::rules::{cost as cost_rules, Rule};
use collsched::{Aggregation, CostKind, CostSpec, Error, Instance, JobId, Result, Schedule};

#[derive(Parser)]
#[command(
    name = "collsched",
    version,
    about = "Aggregate agents' preferred job orders into one shared schedule"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance in the native format
    Generate(GenerateArgs),
    /// Solve an instance under a rule or a cost objective
    Solve(SolveArgs),
    /// Price a given schedule on an instance
    Evaluate(EvaluateArgs),
    /// Check an axiom; exits 0 when it holds, 3 when violated
    Check(CheckArgs),
    /// Run a seeded batch experiment from a key=value spec file
    Experiment(ExperimentArgs),
    /// Export a sum objective as an LP-format integer program
    ExportIlp(ExportIlpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Plain => "plain",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Impartial,
    Mallows,
}

#[derive(Args)]
struct GenerateArgs {
    /// Preference culture
    #[arg(long, value_enum, default_value_t = Model::Impartial)]
    model: Model,
    /// Number of jobs
    #[arg(long)]
    m: usize,
    /// Number of agents
    #[arg(long)]
    n: u64,
    /// Mallows dispersion in (0, 1]; 1 degenerates to the impartial culture
    #[arg(long, default_value_t = 0.8)]
    phi: f64,
    /// Largest processing time; lengths are uniform on 1..=pmax
    #[arg(long, default_value_t = 10)]
    pmax: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file in the native format
    instance: PathBuf,
    /// Rule name: a cost spec like sum-t, max-u or l2-k, or pta-copeland,
    /// pta-minimax, psf, psf-square
    #[arg(long, conflicts_with_all = ["cost", "agg", "p"])]
    rule: Option<String>,
    /// Cost kind: K, S, T, U, L, E, D or SD
    #[arg(long)]
    cost: Option<String>,
    /// Aggregation: sum, max or lp
    #[arg(long, default_value = "sum")]
    agg: String,
    /// Norm exponent for --agg lp
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Instance file in the native format
    instance: PathBuf,
    /// Comma-separated job labels (or 1-based ids), first job first
    #[arg(long)]
    schedule: String,
    /// Cost kind: K, S, T, U, L, E, D or SD
    #[arg(long)]
    cost: String,
    /// Aggregation: sum, max or lp
    #[arg(long, default_value = "sum")]
    agg: String,
    /// Norm exponent for --agg lp
    #[arg(long, default_value_t = 2)]
    p: u32,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    /// Instance file; required for pareto and pta, unused by reinforcement
    instance: Option<PathBuf>,
    /// Axiom to check: pareto, pta or reinforcement
    #[arg(long)]
    axiom: String,
    /// Rule whose output is checked (for reinforcement, searched for
    /// counterexamples)
    #[arg(long)]
    rule: Option<String>,
    /// Explicit schedule to check instead of running a rule
    #[arg(long, conflicts_with = "rule")]
    schedule: Option<String>,
    /// Randomized trials for reinforcement
    #[arg(long, default_value_t = 500)]
    trials: u64,
    /// Reinforcement trials draw their job count from 2..=max-jobs
    #[arg(long, default_value_t = 5)]
    max_jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Spec file; see `ExperimentSpec` keys (m and n are required)
    spec: PathBuf,
    /// Directory for rows.csv, summary.csv, positions.csv and
    /// metadata.txt; defaults to $COLLSCHED_OUT or the current directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the instance pool; defaults to all cores
    #[arg(long)]
    jobs: Option<usize>,
    /// How the summary is printed on stdout
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ExportIlpArgs {
    /// Instance file in the native format
    instance: PathBuf,
    /// Cost kind: T, L, E or U (only these linearize)
    #[arg(long)]
    cost: String,
    /// Aggregation; only sum is exportable
    #[arg(long, default_value = "sum")]
    agg: String,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests land here too; only real usage
            // errors exit nonzero
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Capacity(_) => 2,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Check(args) => cmd_check(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::ExportIlp(args) => cmd_export_ilp(args),
    }
}

fn echo(pairs: &[(&str, String)]) {
    for (key, value) in pairs {
        eprintln!("{key}={value}");
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    profiles::parse_instance(&text)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Resolves `--cost`/`--agg`/`--p` into a cost spec; kind letters are
/// case-insensitive.
fn parse_cost_spec(cost: &str, agg: &str, p: u32) -> Result<CostSpec> {
    let kind = CostKind::parse_token(&cost.to_lowercase())?;
    let agg = match agg {
        "lp" => Aggregation::parse_token(&format!("l{p}"))?,
        other => Aggregation::parse_token(other)?,
    };
    CostSpec::new(kind, agg)
}

/// Reads a comma-separated schedule by job label, falling back to 1-based
/// ids for instances with custom labels.
fn parse_schedule_arg(instance: &Instance, text: &str) -> Result<Schedule> {
    let labels = instance.labels();
    let mut order = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        let index = labels
            .iter()
            .position(|label| label == token)
            .or_else(|| {
                let id: usize = token.parse().ok()?;
                (1..=labels.len()).contains(&id).then(|| id - 1)
            })
            .ok_or_else(|| Error::InvalidSpec(format!("unknown job `{token}`")))?;
        order.push(JobId(index as u32));
    }
    Schedule::new(order, instance.m())
}

/// Renders per-agent costs as `cost xweight` per distinct ranking.
fn agent_costs(instance: &Instance, kind: CostKind, schedule: &Schedule) -> Result<String> {
    let vector = costs::cost_vector(instance, kind, schedule)?;
    Ok(vector
        .entries
        .iter()
        .map(|(cost, weight)| format!("{cost} x{weight}"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

/// Schedule as 1-based ids, for contexts without an instance at hand.
fn bare_schedule(schedule: &Schedule) -> String {
    schedule
        .order()
        .iter()
        .map(|j| (j.index() + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let mut config = vec![
        ("command", "generate".to_string()),
        (
            "model",
            match args.model {
                Model::Impartial => "impartial".into(),
                Model::Mallows => "mallows".into(),
            },
        ),
        ("m", args.m.to_string()),
        ("n", args.n.to_string()),
    ];
    if args.model == Model::Mallows {
        config.push(("phi", args.phi.to_string()));
    }
    config.push(("pmax", args.pmax.to_string()));
    config.push(("seed", args.seed.to_string()));
    if let Some(out) = &args.out {
        config.push(("out", out.display().to_string()));
    }
    echo(&config);
    let profile = match args.model {
        Model::Impartial => profiles::generate_impartial(args.m, args.n, args.seed)?,
        Model::Mallows => {
            profiles::generate_mallows(args.m, args.n, args.phi, None, args.seed)?
        }
    };
    let instance = profiles::assign_lengths(
        profile,
        &LengthSpec::UniformRandom { p_max: args.pmax },
        derive_seed(args.seed, 1),
    )?;
    write_out(&args.out, &profiles::write_instance(&instance))?;
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    // either a named rule or a cost objective, not both, not neither
    let what = match (&args.rule, &args.cost) {
        (Some(name), None) => Rule::parse(name)?,
        (None, Some(cost)) => Rule::Cost(parse_cost_spec(cost, &args.agg, args.p)?),
        (None, None) => {
            return Err(Error::InvalidSpec(
                "pass --rule <name> or --cost <kind>".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --rule with --cost"),
    };
    echo(&[
        ("command", "solve".to_string()),
        ("instance", args.instance.display().to_string()),
        ("rule", what.to_string()),
        ("format", args.format.name().to_string()),
    ]);
    let instance = load_instance(&args.instance)?;
    let (schedule, objective, method, kind) = match &what {
        Rule::Cost(spec) => {
            let report = cost_rules::solve(&instance, *spec)?;
            (
                report.schedule,
                Some(report.objective),
                report.method.name().to_string(),
                Some(spec.kind),
            )
        }
        other => (other.apply(&instance)?, None, other.to_string(), None),
    };
    let rendered = instance.format_schedule(&schedule);
    let costs_line = match kind {
        Some(kind) => Some(agent_costs(&instance, kind, &schedule)?),
        None => None,
    };
    match args.format {
        Format::Plain => {
            println!("schedule: {rendered}");
            if let Some(objective) = objective {
                println!("objective: {objective}");
            }
            println!("method: {method}");
            if let Some(line) = costs_line {
                println!("agent costs: {line}");
            }
        }
        Format::Csv => {
            println!("field,value");
            println!("schedule,{}", quote(&rendered));
            if let Some(objective) = objective {
                println!("objective,{objective}");
            }
            println!("method,{method}");
            if let Some(line) = costs_line {
                println!("agent_costs,{}", quote(&line));
            }
        }
    }
    Ok(0)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<u8> {
    let spec = parse_cost_spec(&args.cost, &args.agg, args.p)?;
    echo(&[
        ("command", "evaluate".to_string()),
        ("instance", args.instance.display().to_string()),
        ("schedule", args.schedule.clone()),
        ("spec", spec.to_string()),
        ("format", args.format.name().to_string()),
    ]);
    let instance = load_instance(&args.instance)?;
    let schedule = parse_schedule_arg(&instance, &args.schedule)?;
    let objective = costs::aggregate(&instance, spec, &schedule)?;
    let rendered = instance.format_schedule(&schedule);
    let line = agent_costs(&instance, spec.kind, &schedule)?;
    match args.format {
        Format::Plain => {
            println!("schedule: {rendered}");
            println!("objective: {objective}");
            println!("agent costs: {line}");
        }
        Format::Csv => {
            println!("field,value");
            println!("schedule,{}", quote(&rendered));
            println!("objective,{objective}");
            println!("agent_costs,{}", quote(&line));
        }
    }
    Ok(0)
}

fn cmd_check(args: CheckArgs) -> Result<u8> {
    let mut config = vec![
        ("command", "check".to_string()),
        ("axiom", args.axiom.clone()),
    ];
    if let Some(instance) = &args.instance {
        config.push(("instance", instance.display().to_string()));
    }
    if let Some(rule) = &args.rule {
        config.push(("rule", rule.clone()));
    }
    if let Some(schedule) = &args.schedule {
        config.push(("schedule", schedule.clone()));
    }
    match args.axiom.as_str() {
        "pareto" | "pta" => {
            echo(&config);
            let path = args.instance.as_deref().ok_or_else(|| {
                Error::InvalidSpec("this axiom needs an instance file".into())
            })?;
            let instance = load_instance(path)?;
            let schedule = match (&args.rule, &args.schedule) {
                (Some(name), None) => Rule::parse(name)?.apply(&instance)?,
                (None, Some(text)) => parse_schedule_arg(&instance, text)?,
                _ => {
                    return Err(Error::InvalidSpec(
                        "pass --rule <name> or --schedule <order>".into(),
                    ))
                }
            };
            println!("axiom: {}", args.axiom);
            println!("schedule: {}", instance.format_schedule(&schedule));
            let witnesses = if args.axiom == "pareto" {
                axioms::check_pareto(&schedule, instance.profile())?.witnesses
            } else {
                axioms::check_pta_condorcet(&schedule, &instance)?.witnesses
            };
            if witnesses.is_empty() {
                println!("result: holds");
                Ok(0)
            } else {
                println!("result: violated");
                for (k, l) in witnesses {
                    println!(
                        "witness: {} before {}",
                        instance.labels()[k.index()],
                        instance.labels()[l.index()]
                    );
                }
                Ok(3)
            }
        }
        "reinforcement" => {
            config.push(("trials", args.trials.to_string()));
            config.push(("max_jobs", args.max_jobs.to_string()));
            config.push(("seed", args.seed.to_string()));
            echo(&config);
            let name = args.rule.as_deref().ok_or_else(|| {
                Error::InvalidSpec("reinforcement needs --rule <name>".into())
            })?;
            let rule = Rule::parse(name)?;
            let outcome = axioms::test_reinforcement(&rule, args.max_jobs, args.trials, args.seed)?;
            println!("axiom: reinforcement");
            println!("rule: {rule}");
            println!("trials: {}", outcome.trials);
            println!("coincided: {}", outcome.coincided);
            println!("skipped ties: {}", outcome.skipped_ties);
            if outcome.report.holds {
                println!("result: holds");
                Ok(0)
            } else {
                println!("result: violated");
                for witness in &outcome.report.witnesses {
                    println!(
                        "witness: trial {} agreed on {} but the union gives {}",
                        witness.trial,
                        bare_schedule(&witness.shared),
                        bare_schedule(&witness.union)
                    );
                }
                Ok(3)
            }
        }
        other => Err(Error::InvalidSpec(format!(
            "unknown axiom `{other}`, expected pareto, pta or reinforcement"
        ))),
    }
}

fn cmd_experiment(args: ExperimentArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.spec)?;
    let spec = ExperimentSpec::parse(&text)?;
    let dir = args
        .out
        .or_else(|| std::env::var_os("COLLSCHED_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut config = vec![
        ("command", "experiment".to_string()),
        ("spec_file", args.spec.display().to_string()),
        ("out", dir.display().to_string()),
        ("format", args.format.name().to_string()),
    ];
    if let Some(jobs) = args.jobs {
        config.push(("jobs", jobs.to_string()));
    }
    echo(&config);
    eprint!("{}", spec.echo());
    let output = match args.jobs {
        Some(0) => return Err(Error::InvalidSpec("--jobs must be at least 1".into())),
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidSpec(e.to_string()))?
            .install(|| run_experiment(&spec))?,
        None => run_experiment(&spec)?,
    };
    fs::create_dir_all(&dir)?;
    let files = [
        ("rows.csv", output.rows_csv()),
        ("summary.csv", output.summary_csv()),
        ("positions.csv", output.positions_csv()),
        ("metadata.txt", output.metadata()),
    ];
    for (name, contents) in &files {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        eprintln!("wrote={}", path.display());
    }
    match args.format {
        Format::Csv => print!("{}", output.summary_csv()),
        Format::Plain => {
            let s = &output.summary;
            println!("instances: {}", s.instances);
            let fields = [
                ("paradox sum-t", s.paradox_sum_t),
                ("paradox max-t", s.paradox_max_t),
                ("ratio copeland/sum-t", s.ratio_copeland_to_sum_t),
                ("ratio copeland/max-t", s.ratio_copeland_to_max_t),
                ("delta gini", s.delta_gini),
            ];
            for (label, value) in fields {
                if let Some(value) = value {
                    println!("{label}: {value:.6}");
                }
            }
            if !output.failures.is_empty() {
                println!("failed instances: {}", output.failures.len());
            }
        }
    }
    Ok(0)
}

fn cmd_export_ilp(args: ExportIlpArgs) -> Result<u8> {
    let spec = parse_cost_spec(&args.cost, &args.agg, 2)?;
    let mut config = vec![
        ("command", "export-ilp".to_string()),
        ("instance", args.instance.display().to_string()),
        ("spec", spec.to_string()),
    ];
    if let Some(out) = &args.out {
        config.push(("out", out.display().to_string()));
    }
    echo(&config);
    let instance = load_instance(&args.instance)?;
    write_out(&args.out, &cost_rules::export_ilp(&instance, spec)?)?;
    Ok(0)
}
