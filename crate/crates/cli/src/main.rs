use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use impsearch::belief::{fast_posterior, recursive_posterior, ExecutionTrace, Observation};
use impsearch::instances::{
    convert_orienteering, generate_random_at, load_document, load_orienteering, save_document, BetaTransform,
    BoundingBox, ConversionConfig, InstanceDocument,
};
use impsearch::model::{detection_probability, schedule_weight, validate};
use impsearch::simulator::run_trials;
use impsearch::{Deadline, Error, Instance};
use serde::Serialize;

mod io;
mod solvers;

use io::{load_schedule, print_json, visits_out, ResultOut, ViolationOut};
use solvers::{Discretization, SolverKind, SolverOptions};

pub const CSV_HEADER: [&str; 8] = [
    "instance",
    "solver",
    "C",
    "probability",
    "weight",
    "runtime_ms",
    "gap_to_best",
    "feasible",
];

/// Failure with the process exit code it maps to: 1 for a check that did
/// not pass, 2 for bad input, 3 for a solver that refused or ran out of time.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn failure(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    pub fn refused(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::LimitExceeded(_) | Error::TimedOut { .. } => CliError::refused(e.to_string()),
            Error::IndexOutOfRange { index, n } => {
                CliError::usage(format!("point {} out of range for an instance with {n} points", index + 1))
            }
            other => CliError::usage(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "impsearch", version, about = "Plan searches for a stationary target with an imperfect sensor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the result as JSON.
    Solve(SolveArgs),
    /// Run several solvers over a set of instances and write a CSV table.
    Compare(CompareArgs),
    /// Estimate the detection probability of a schedule by simulation.
    Simulate(SimulateArgs),
    /// Turn orienteering benchmark files into instances.
    Convert(ConvertArgs),
    /// Generate random instances.
    Gen(GenArgs),
    /// Posterior belief after a set of search reports.
    Posterior(PosteriorArgs),
    /// Check a schedule against an instance.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    solver: SolverKind,
    /// Visiting order for `ordered`, as 1-based point numbers.
    #[arg(long)]
    order: Option<String>,
    /// Ticks per unit time for the ordered DPs.
    #[arg(long = "C", conflicts_with = "epsilon")]
    c: Option<u64>,
    /// Pick C so that rounding adds at most this much time.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Accepted for symmetry with the other commands; the solvers are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the instance budget.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// Leave the runtime out so repeated runs print identical bytes.
    #[arg(long)]
    omit_runtime: bool,
    #[command(flatten)]
    options: SolverOptions,
}

#[derive(Args)]
struct CompareArgs {
    /// Glob pattern of instance JSON files.
    #[arg(long)]
    instances: String,
    /// Comma-separated solver names. `ordered` visits points in index order.
    #[arg(long, default_value = "greedy,tsp-dp,exact")]
    solvers: String,
    #[arg(long = "C-values", default_value = "10")]
    c_values: String,
    #[arg(long, default_value_t = 300.0)]
    time_limit_s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the runtime column empty so repeated runs are byte-identical.
    #[arg(long)]
    omit_runtime: bool,
    #[command(flatten)]
    options: SolverOptions,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Schedule file; if absent, the schedule comes from `--solver`.
    #[arg(long, conflicts_with = "solver")]
    schedule: Option<PathBuf>,
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    #[arg(long = "C", default_value_t = 10)]
    c: u64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    options: SolverOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BetaMode {
    Raw,
    Rescale,
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    cost_min: u32,
    #[arg(long, default_value_t = 3)]
    cost_max: u32,
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    #[arg(long, value_enum)]
    beta_mode: Option<BetaMode>,
    #[arg(long, default_value_t = 0.1)]
    beta_lo: f64,
    #[arg(long, default_value_t = 0.6)]
    beta_hi: f64,
}

impl GeneratorArgs {
    fn config(&self, default_mode: BetaMode) -> ConversionConfig {
        ConversionConfig {
            seed: self.seed,
            cost_range: (self.cost_min, self.cost_max),
            dirichlet_concentration: self.concentration,
            beta_transform: match self.beta_mode.unwrap_or(default_mode) {
                BetaMode::Raw => BetaTransform::Raw,
                BetaMode::Rescale => BetaTransform::Rescale {
                    lo: self.beta_lo,
                    hi: self.beta_hi,
                },
            },
            ..ConversionConfig::default()
        }
    }
}

#[derive(Args)]
struct ConvertArgs {
    /// Orienteering benchmark files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    instances_per_base: usize,
    /// Keep this many randomly chosen points of each file.
    #[arg(long)]
    max_points: Option<usize>,
    /// Replace the budget read from the file.
    #[arg(long)]
    budget: Option<f64>,
    /// Default beta mode is raw.
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Side of the square the points are drawn from.
    #[arg(long = "box", default_value_t = 10.0)]
    side: f64,
    #[arg(long, default_value_t = 3.0)]
    budget_factor: f64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Single output file; with `--count` above one use `--out-dir`.
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Default beta mode is rescale.
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PosteriorMethod {
    Fast,
    Recursive,
}

#[derive(Args)]
struct PosteriorArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Report counts per point, e.g. `a=0,0;b=1,0` (a: YES, b: NO).
    #[arg(long, conflicts_with = "observations")]
    trace: Option<String>,
    /// Report sequence, e.g. `1:no,2:yes`.
    #[arg(long)]
    observations: Option<String>,
    #[arg(long, value_enum, default_value_t = PosteriorMethod::Fast)]
    method: PosteriorMethod,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Extra budget allowed, e.g. a solver's declared slack.
    #[arg(long, default_value_t = 0.0)]
    slack: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Posterior(a) => cmd_posterior(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let doc = load_document(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    doc.to_instance()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("{what}: \"{s}\" is not valid")))
        })
        .collect()
}

fn cmd_solve(a: SolveArgs) -> Result<(), CliError> {
    // deterministic solvers; the seed only keeps scripts uniform
    let _ = a.seed;
    let mut instance = load_instance(&a.instance)?;
    if let Some(b) = a.budget {
        instance = instance.with_budget(b);
        instance.check()?;
    }
    let order = match (&a.order, a.solver) {
        (Some(text), _) => Some(
            parse_list::<usize>(text, "order")?
                .into_iter()
                .map(|p| p.checked_sub(1).ok_or_else(|| CliError::usage("point numbers start at 1")))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        (None, SolverKind::Ordered) => return Err(CliError::usage("solver ordered needs --order")),
        (None, _) => None,
    };
    let disc = match (a.c, a.epsilon) {
        (Some(c), _) => Discretization::Ticks(c),
        (None, Some(eps)) => Discretization::Epsilon(eps),
        (None, None) => Discretization::Ticks(10),
    };
    let deadline = a.time_limit_s.map_or(Deadline::none(), Deadline::after_secs);
    let outcome = solvers::run(a.solver, &instance, &a.options, disc, order.as_deref(), &deadline);
    let runtime = (!a.omit_runtime).then_some(outcome.runtime_ms);
    match outcome.result {
        Ok(r) => print_json(&ResultOut::new(&instance, &r, false, runtime)),
        Err(Error::TimedOut { best: Some(r) }) => {
            print_json(&ResultOut::new(&instance, &r, true, runtime))?;
            Err(CliError::refused("time limit exceeded; printed the best schedule found"))
        }
        Err(e) => Err(e.into()),
    }
}

struct Row {
    instance: String,
    solver: &'static str,
    c: u64,
    probability: Option<f64>,
    weight: Option<f64>,
    runtime_ms: f64,
    feasible: bool,
}

fn cmd_compare(a: CompareArgs) -> Result<(), CliError> {
    let solvers = SolverKind::parse_list(&a.solvers)?;
    let c_values: Vec<u64> = parse_list(&a.c_values, "C-values")?;
    if c_values.is_empty() || c_values.contains(&0) {
        return Err(CliError::usage("C-values must be positive integers"));
    }
    let mut paths: Vec<PathBuf> = glob::glob(&a.instances)
        .map_err(|e| CliError::usage(format!("bad glob: {e}")))?
        .filter_map(|p| p.ok())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::usage(format!("no files match {}", a.instances)));
    }
    // the seed does not influence the solvers; it is kept for reproducible scripts
    let _ = a.seed;

    let mut rows = Vec::new();
    for path in &paths {
        let instance = load_instance(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance").to_string();
        let mut cells: Vec<Row> = Vec::new();
        for &solver in &solvers {
            let runs: Vec<u64> = if solver.uses_c() { c_values.clone() } else { vec![c_values[0]] };
            for c in runs {
                let deadline = Deadline::after_secs(a.time_limit_s);
                let out = solvers::run(solver, &instance, &a.options, Discretization::Ticks(c), None, &deadline);
                let (probability, weight, feasible) = match out.result {
                    Ok(r) => (Some(r.probability), Some(r.total_weight), true),
                    Err(Error::TimedOut { best: Some(r) }) => (Some(r.probability), Some(r.total_weight), false),
                    Err(e) => {
                        eprintln!("{name}: {}: {e}", solver.name());
                        (None, None, false)
                    }
                };
                let row = |c| Row {
                    instance: name.clone(),
                    solver: solver.name(),
                    c,
                    probability,
                    weight,
                    runtime_ms: out.runtime_ms,
                    feasible,
                };
                if solver.uses_c() {
                    cells.push(row(c));
                } else {
                    // computed once, reported under every C
                    cells.extend(c_values.iter().map(|&c| row(c)));
                }
            }
        }
        rows.extend(cells);
    }
    write_compare_csv(&rows, a.out.as_deref(), a.omit_runtime)
}

fn write_compare_csv(rows: &[Row], out: Option<&Path>, omit_runtime: bool) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::failure(e.to_string());
    let sink: Box<dyn std::io::Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in rows {
        let best = rows
            .iter()
            .filter(|o| o.instance == r.instance)
            .filter_map(|o| o.probability)
            .fold(f64::NEG_INFINITY, f64::max);
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            r.instance.clone(),
            r.solver.to_string(),
            r.c.to_string(),
            opt(r.probability),
            opt(r.weight),
            if omit_runtime { String::new() } else { format!("{:.3}", r.runtime_ms) },
            opt(r.probability.map(|p| (best - p).max(0.0))),
            r.feasible.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::failure(e.to_string()))
}

#[derive(Serialize)]
struct SimulateOut {
    trials: u64,
    detections: u64,
    p_hat: f64,
    std_err: f64,
    analytic_probability: f64,
    schedule: Vec<io::VisitOut>,
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), CliError> {
    let instance = load_instance(&a.instance)?;
    let schedule = match (&a.schedule, a.solver) {
        (Some(path), _) => load_schedule(path, &instance)?.schedule,
        (None, Some(kind)) => {
            let out = solvers::run(kind, &instance, &a.options, Discretization::Ticks(a.c), None, &Deadline::none());
            out.result?.schedule
        }
        (None, None) => return Err(CliError::usage("give --schedule or --solver")),
    };
    let summary = run_trials(&instance, &schedule, a.trials, a.seed)?;
    print_json(&SimulateOut {
        trials: summary.stats.trials,
        detections: summary.stats.detections,
        p_hat: summary.stats.p_hat,
        std_err: summary.stats.std_err,
        analytic_probability: detection_probability(&instance, &schedule)?,
        schedule: visits_out(&schedule),
    })
}

fn cmd_convert(a: ConvertArgs) -> Result<(), CliError> {
    let config = ConversionConfig {
        instances_per_base: a.instances_per_base,
        max_points: a.max_points,
        ..a.generator.config(BetaMode::Raw)
    };
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::usage(format!("{}: {e}", a.out_dir.display())))?;
    for input in &a.inputs {
        let data = load_orienteering(input).map_err(|e| CliError::usage(format!("{}: {e}", input.display())))?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("base");
        let budget = a.budget.unwrap_or(data.budget);
        let instances = convert_orienteering(&data.records, budget, &config)?;
        let source = format!("orienteering:{}", input.file_name().and_then(|s| s.to_str()).unwrap_or(stem));
        for (k, inst) in instances.iter().enumerate() {
            let name = format!("{stem}-{:02}", k + 1);
            let doc = InstanceDocument::from_instance(inst, &name, config.provenance(&source));
            let path = a.out_dir.join(format!("{name}.json"));
            save_document(&doc, &path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), CliError> {
    let config = ConversionConfig {
        budget_factor: a.budget_factor,
        ..a.generator.config(BetaMode::Rescale)
    };
    let bbox = BoundingBox::square(a.side)?;
    if a.count > 1 && a.out_dir.is_none() {
        return Err(CliError::usage("--count above one needs --out-dir"));
    }
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
    }
    for k in 0..a.count {
        let inst = generate_random_at(a.n, bbox, &config, k as u64)?;
        let name = format!("random-n{}-s{}-{:02}", a.n, a.generator.seed, k + 1);
        let doc = InstanceDocument::from_instance(&inst, &name, config.provenance("random"));
        let target = match (&a.out, &a.out_dir) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(d)) => Some(d.join(format!("{name}.json"))),
            (None, None) => None,
        };
        match target {
            Some(path) => {
                save_document(&doc, &path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                println!("{}", path.display());
            }
            None => print!("{}", doc.to_canonical_string()?),
        }
    }
    Ok(())
}

/// Parses `a=1,0;b=0,2`.
fn parse_trace(text: &str, n: usize) -> Result<ExecutionTrace, CliError> {
    let mut yes = None;
    let mut no = None;
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("trace part \"{part}\" lacks '='")))?;
        let counts: Vec<u64> = parse_list(values, "trace counts")?;
        if counts.len() != n {
            return Err(CliError::usage(format!("trace \"{key}\" has {} counts, expected {n}", counts.len())));
        }
        match key.trim() {
            "a" => yes = Some(counts),
            "b" => no = Some(counts),
            other => return Err(CliError::usage(format!("unknown trace key \"{other}\""))),
        }
    }
    Ok(ExecutionTrace::new(yes.unwrap_or_else(|| vec![0; n]), no.unwrap_or_else(|| vec![0; n]))?)
}

/// Parses `1:no,2:yes`.
fn parse_observations(text: &str) -> Result<Vec<Observation>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (point, report) = item
                .split_once(':')
                .ok_or_else(|| CliError::usage(format!("observation \"{item}\" should look like 1:no")))?;
            let point: usize = point
                .trim()
                .parse()
                .ok()
                .and_then(|p: usize| p.checked_sub(1))
                .ok_or_else(|| CliError::usage(format!("bad point number in \"{item}\"")))?;
            match report.trim().to_ascii_lowercase().as_str() {
                "yes" | "1" => Ok(Observation::yes(point)),
                "no" | "0" => Ok(Observation::no(point)),
                _ => Err(CliError::usage(format!("bad report in \"{item}\""))),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct PosteriorOut {
    posterior: Vec<f64>,
    collapsed: bool,
}

fn cmd_posterior(a: PosteriorArgs) -> Result<(), CliError> {
    let instance = load_instance(&a.instance)?;
    let n = instance.len();
    let (trace, observations) = match (&a.trace, &a.observations) {
        (Some(t), _) => {
            let trace = parse_trace(t, n)?;
            let obs = trace.to_observations();
            (trace, obs)
        }
        (None, Some(o)) => {
            let obs = parse_observations(o)?;
            (ExecutionTrace::from_observations(n, &obs)?, obs)
        }
        (None, None) => (ExecutionTrace::zeros(n), Vec::new()),
    };
    let (alpha, beta) = (&instance.false_positive, &instance.false_negative);
    let belief = match a.method {
        PosteriorMethod::Fast => fast_posterior(&instance.priors, &trace, alpha, beta)?,
        PosteriorMethod::Recursive => recursive_posterior(&instance.priors, &observations, alpha, beta)?,
    };
    print_json(&PosteriorOut {
        posterior: belief.mass,
        collapsed: belief.collapsed,
    })
}

#[derive(Serialize)]
struct ValidateOut {
    feasible: bool,
    weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw_weight: Option<f64>,
    budget: f64,
    probability: f64,
    violations: Vec<ViolationOut>,
}

fn cmd_validate(a: ValidateArgs) -> Result<(), CliError> {
    let instance = load_instance(&a.instance)?;
    let loaded = load_schedule(&a.schedule, &instance)?;
    let violations = validate(&instance, &loaded.schedule, a.tolerance + a.slack);
    let in_range = !violations
        .iter()
        .any(|v| matches!(v, impsearch::Violation::IndexOutOfRange { .. }));
    let (weight, probability) = if in_range {
        (
            schedule_weight(&instance, &loaded.schedule)?,
            detection_probability(&instance, &loaded.schedule)?,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let out = ValidateOut {
        feasible: violations.is_empty(),
        weight,
        raw_weight: loaded.raw_weight,
        budget: instance.budget,
        probability,
        violations: violations.iter().map(ViolationOut::from).collect(),
    };
    print_json(&out)?;
    if out.feasible {
        Ok(())
    } else {
        Err(CliError::failure(format!("{} violation(s)", out.violations.len())))
    }
}
