mod commands;
mod encode;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use monoconv::duality::AdditiveWitness;
use monoconv::functions::FunctionTable;
use monoconv::hull::HullStrategy;
use monoconv::instances::{build_instance, AnyInstance, InstanceSpec};
use monoconv::io::{
    build_map, build_table, decode_all, parse_json, parse_rationals, parse_window, ConstrainedProblemFile,
    DualityProblemFile, FunctionFile, SetFile,
};
use monoconv::optimize::ConstrainedProblem;
use monoconv::{with_instance, Bounds, Structure};

use commands::{FunctionClass, Outcome};
use report::{usage, CliError, CliResult, Inputs, Report};

#[derive(Parser)]
#[command(name = "monoconv", version, about = "Exact convex analysis over commutative monoids and groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Replay the certificates of a stored report against the same inputs.
    #[arg(long, global = true, value_name = "REPORT")]
    verify: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct BoundArgs {
    /// Most terms in a searched combination.
    #[arg(long)]
    bounds_terms: Option<usize>,
    /// Largest coefficient in a searched combination.
    #[arg(long)]
    bounds_coeff: Option<u64>,
}

impl BoundArgs {
    fn get(&self, inputs: &mut Inputs) -> CliResult<Option<Bounds>> {
        match (self.bounds_terms, self.bounds_coeff) {
            (Some(t), Some(c)) => {
                inputs.arg("bounds", format!("{t}/{c}"));
                Ok(Some(Bounds::new(t, c)))
            }
            (None, None) => Ok(None),
            _ => usage("--bounds-terms and --bounds-coeff go together"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Auto,
    Finite,
    Lattice,
    Fixpoint,
}

impl From<Strategy> for HullStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Auto => HullStrategy::Auto,
            Strategy::Finite => HullStrategy::Finite,
            Strategy::Lattice => HullStrategy::Lattice,
            Strategy::Fixpoint => HullStrategy::Fixpoint,
        }
    }
}

#[derive(Args)]
struct SetArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    set: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: Strategy,
    /// Window as inline JSON or a path to a JSON file.
    #[arg(long)]
    window: Option<String>,
    #[command(flatten)]
    bounds: BoundArgs,
}

#[derive(Args)]
struct FunctionArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    function: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Convex hull of a finite set.
    Hull(SetArgs),
    /// Membership of a point in the hull of a finite set.
    Member {
        #[command(flatten)]
        set: SetArgs,
        /// Element as JSON.
        #[arg(long)]
        point: String,
    },
    /// Function-class checks on a tabulated function.
    Check {
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, value_enum)]
        class: FunctionClass,
        #[command(flatten)]
        bounds: BoundArgs,
        /// Multipliers for `homogeneous`; the largest is used for `sublinear`.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        /// Restrict convexity checks to left coefficients that are powers of this prime.
        #[arg(long)]
        p_power: Option<u64>,
    },
    /// Divisibility probe `nX = X` on a sample window.
    Probe {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        window: String,
    },
    /// Directional derivative along a division schedule.
    Deriv {
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        h: String,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<u64>,
        /// Use the form `f(nx + h) - n f(x)` for sublinear functions.
        #[arg(long)]
        sublinear: bool,
    },
    /// Subdifferential cut out by probe directions.
    Subdiff {
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long)]
        x: String,
        /// JSON array of directions, inline or as a file.
        #[arg(long)]
        probes: String,
    },
    /// Conjugate value at a linear functional, with an optional Fenchel-Young check.
    Conjugate {
        #[command(flatten)]
        function: FunctionArgs,
        /// JSON array of "p/q" coefficients.
        #[arg(long)]
        phi: String,
        #[arg(long)]
        x: Option<String>,
    },
    /// Primal and dual values of `min f(x) + g(Tx)`.
    Duality {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<u64>,
    },
    /// Affine map between `g∘T` and `f`, or a certificate that none exists.
    Sandwich {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Extension of an additive map from generators under a sublinear bound.
    Extend {
        #[command(flatten)]
        function: FunctionArgs,
        /// JSON array of `[element, "p/q"]` pairs.
        #[arg(long)]
        generators: String,
        #[arg(long)]
        bounds_coeff: u64,
    },
    /// Value function of a constrained problem and its laws.
    Value {
        #[arg(long)]
        problem: PathBuf,
        /// Check `v(pb) = p v(b)` for this multiplier.
        #[arg(long)]
        p: Option<u64>,
    },
    /// Best Lagrangian bound over a multiplier grid.
    Lagrange {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Subdifferential of a pointwise maximum against the hull of the active parts.
    Maxrule {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long = "function", required = true)]
        functions: Vec<PathBuf>,
        #[arg(long)]
        x: String,
        #[arg(long)]
        probes: String,
        #[arg(long, value_delimiter = ',', required = true)]
        schedule: Vec<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Hull(_) => "hull",
            Command::Member { .. } => "member",
            Command::Check { .. } => "check",
            Command::Probe { .. } => "probe",
            Command::Deriv { .. } => "deriv",
            Command::Subdiff { .. } => "subdiff",
            Command::Conjugate { .. } => "conjugate",
            Command::Duality { .. } => "duality",
            Command::Sandwich { .. } => "sandwich",
            Command::Extend { .. } => "extend",
            Command::Value { .. } => "value",
            Command::Lagrange { .. } => "lagrange",
            Command::Maxrule { .. } => "maxrule",
        }
    }
}

fn load_instance(inputs: &mut Inputs, path: &Path) -> CliResult<AnyInstance> {
    let spec: InstanceSpec = parse_json(&inputs.read("instance", path)?)?;
    Ok(build_instance(&spec)?)
}

fn elem<S: Structure>(s: &S, inputs: &mut Inputs, name: &str, raw: &str) -> CliResult<S::Elem> {
    Ok(s.decode(&inputs.json(name, raw)?)?)
}

fn elems<S: Structure>(s: &S, inputs: &mut Inputs, name: &str, raw: &str) -> CliResult<Vec<S::Elem>> {
    match inputs.json(name, raw)? {
        Value::Array(vs) => Ok(decode_all(s, &vs)?),
        _ => usage(format!("--{name} must be a JSON array")),
    }
}

fn table<S: Structure>(s: &Arc<S>, inputs: &mut Inputs, path: &Path) -> CliResult<FunctionTable<S>> {
    let file: FunctionFile = parse_json(&inputs.read("function", path)?)?;
    Ok(build_table(Arc::clone(s), &file)?)
}

fn schedule_arg(inputs: &mut Inputs, schedule: &[u64]) -> CliResult<()> {
    if schedule.contains(&0) {
        return usage("schedule entries must be positive");
    }
    inputs.arg("schedule", format!("{schedule:?}"));
    Ok(())
}

/// Commands that take an instance file directly.
fn run_on<S: Structure + 'static>(
    s: Arc<S>,
    cmd: &Command,
    inputs: &mut Inputs,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    match cmd {
        Command::Hull(a) | Command::Member { set: a, .. } => {
            let set: SetFile = parse_json(&inputs.read("set", &a.set)?)?;
            let set = decode_all(s.as_ref(), &set.elements)?;
            inputs.arg("strategy", format!("{:?}", HullStrategy::from(a.strategy)));
            let window = a.window.as_deref().map(|w| inputs.json("window", w)).transpose()?;
            let bounds = a.bounds.get(inputs)?;
            match cmd {
                Command::Member { point, .. } => {
                    let x = elem(s.as_ref(), inputs, "point", point)?;
                    commands::member(s.as_ref(), &set, &x, a.strategy.into(), window.as_ref(), bounds, stored)
                }
                _ => commands::hull(s.as_ref(), &set, a.strategy.into(), window.as_ref(), bounds),
            }
        }
        Command::Check { function, class, bounds, n, p_power } => {
            let f = table(&s, inputs, &function.function)?;
            inputs.arg("class", format!("{class:?}"));
            inputs.arg("n", format!("{n:?}"));
            inputs.arg("p_power", format!("{p_power:?}"));
            let bounds = bounds.get(inputs)?;
            commands::check(&f, *class, bounds, n, *p_power, stored)
        }
        Command::Probe { n, window, .. } => {
            inputs.arg("n", n);
            let w = parse_window::<S>(&inputs.json("window", window)?)?;
            commands::probe(s.as_ref(), *n, &w, stored)
        }
        Command::Deriv { function, x, h, schedule, sublinear } => {
            let f = table(&s, inputs, &function.function)?;
            let x = elem(s.as_ref(), inputs, "x", x)?;
            let h = elem(s.as_ref(), inputs, "h", h)?;
            schedule_arg(inputs, schedule)?;
            inputs.arg("sublinear", sublinear);
            commands::deriv(&f, &x, &h, schedule, *sublinear, stored)
        }
        Command::Subdiff { function, x, probes } => {
            let f = table(&s, inputs, &function.function)?;
            let x = elem(s.as_ref(), inputs, "x", x)?;
            let probes = elems(s.as_ref(), inputs, "probes", probes)?;
            commands::subdiff(&f, &x, &probes, stored)
        }
        Command::Conjugate { function, phi, x } => {
            let f = table(&s, inputs, &function.function)?;
            let phi = AdditiveWitness::new(encode::as_qs(&inputs.json("phi", phi)?)?);
            let x = x.as_deref().map(|x| elem(s.as_ref(), inputs, "x", x)).transpose()?;
            commands::conjugate_cmd(&f, &phi, x.as_ref(), stored)
        }
        Command::Extend { function, generators, bounds_coeff } => {
            let f = table(&s, inputs, &function.function)?;
            let raw = inputs.json("generators", generators)?;
            let gens = raw
                .as_array()
                .map(Vec::as_slice)
                .unwrap_or_default()
                .iter()
                .map(|p| {
                    let x = s.decode(p.get(0).unwrap_or(&Value::Null))?;
                    let v = encode::as_qs(&json!([p.get(1).cloned().unwrap_or(Value::Null)]))?;
                    Ok((x, v[0].clone()))
                })
                .collect::<monoconv::Result<Vec<_>>>()?;
            inputs.arg("bounds_coeff", bounds_coeff);
            commands::extend(&f, &gens, *bounds_coeff, stored)
        }
        Command::Maxrule { functions, x, probes, schedule, .. } => {
            let fs = functions.iter().map(|p| table(&s, inputs, p)).collect::<CliResult<Vec<_>>>()?;
            let x = elem(s.as_ref(), inputs, "x", x)?;
            let probes = elems(s.as_ref(), inputs, "probes", probes)?;
            schedule_arg(inputs, schedule)?;
            commands::maxrule(&fs, &x, &probes, schedule, stored)
        }
        _ => unreachable!("problem commands are dispatched separately"),
    }
}

fn run_constrained<S: Structure + 'static>(
    s: Arc<S>,
    cmd: &Command,
    file: &ConstrainedProblemFile,
    inputs: &mut Inputs,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let objective = build_table(Arc::clone(&s), &file.objective)?;
    let constraints = file.constraints.iter().map(|g| build_table(Arc::clone(&s), g)).collect::<monoconv::Result<_>>()?;
    let p = ConstrainedProblem::new(objective, constraints)?;
    match cmd {
        Command::Value { p: prime, .. } => {
            inputs.arg("p", format!("{prime:?}"));
            let grid = file.grid.iter().map(|b| parse_rationals(b)).collect::<monoconv::Result<Vec<_>>>()?;
            commands::value(&p, &grid, *prime, stored)
        }
        _ => {
            let Some(rhs) = &file.rhs else { return usage("the problem file needs `rhs`") };
            if file.multipliers.is_empty() {
                return usage("the problem file needs `multipliers`");
            }
            let lambdas = file.multipliers.iter().map(|l| parse_rationals(l)).collect::<monoconv::Result<Vec<_>>>()?;
            commands::lagrange(&p, &parse_rationals(rhs)?, &lambdas, stored)
        }
    }
}

fn run_duality<A: Structure + 'static, B: Structure + 'static>(
    a: Arc<A>,
    b: Arc<B>,
    cmd: &Command,
    file: &DualityProblemFile,
    stored: Option<&Value>,
) -> CliResult<Outcome> {
    let f = build_table(Arc::clone(&a), &file.f)?;
    let g = build_table(Arc::clone(&b), &file.g)?;
    let t = build_map(&a, &b, &file.map, f.window())?;
    match cmd {
        Command::Duality { schedule, .. } => {
            let dirs = decode_all(b.as_ref(), &file.core_directions)?;
            commands::duality(&f, &g, &t, &dirs, schedule, stored)
        }
        _ => commands::sandwich(&f, &g, &t, stored),
    }
}

macro_rules! with_pair {
    ($a:expr, $b:expr, ($x:ident, $y:ident) => $body:expr) => {
        match ($a, $b) {
            (AnyInstance::Lattice($x), AnyInstance::Lattice($y)) => $body,
            (AnyInstance::GeneralLattice($x), AnyInstance::GeneralLattice($y)) => $body,
            (AnyInstance::Dyadic($x), AnyInstance::Dyadic($y)) => $body,
            (AnyInstance::FiniteCyclic($x), AnyInstance::FiniteCyclic($y)) => $body,
            (AnyInstance::RationalsMod1($x), AnyInstance::RationalsMod1($y)) => $body,
            (AnyInstance::SetAlgebra($x), AnyInstance::SetAlgebra($y)) => $body,
            (AnyInstance::MeetSemilattice($x), AnyInstance::MeetSemilattice($y)) => $body,
            (AnyInstance::Arctan($x), AnyInstance::Arctan($y)) => $body,
            _ => usage("the codomain must be an instance of the same kind as the domain"),
        }
    };
}

/// Returns the outcome and whether the instance uses floating point.
fn dispatch(cmd: &Command, inputs: &mut Inputs, stored: Option<&Value>) -> CliResult<(Outcome, bool)> {
    let numeric = |i: &AnyInstance| matches!(i, AnyInstance::Arctan(_));
    match cmd {
        Command::Duality { problem, .. } | Command::Sandwich { problem } => {
            let file: DualityProblemFile = parse_json(&inputs.read("problem", problem)?)?;
            if let Command::Duality { schedule, .. } = cmd {
                schedule_arg(inputs, schedule)?;
            }
            let a = build_instance(&file.instance)?;
            let b = build_instance(file.codomain.as_ref().unwrap_or(&file.instance))?;
            let num = numeric(&a);
            let out = with_pair!(&a, &b, (x, y) => run_duality(Arc::new(x.clone()), Arc::new(y.clone()), cmd, &file, stored))?;
            Ok((out, num))
        }
        Command::Value { problem, .. } | Command::Lagrange { problem } => {
            let file: ConstrainedProblemFile = parse_json(&inputs.read("problem", problem)?)?;
            let inst = build_instance(&file.instance)?;
            let out = with_instance!(&inst, s => run_constrained(Arc::new(s.clone()), cmd, &file, inputs, stored))?;
            Ok((out, numeric(&inst)))
        }
        Command::Hull(SetArgs { instance, .. })
        | Command::Member { set: SetArgs { instance, .. }, .. }
        | Command::Check { function: FunctionArgs { instance, .. }, .. }
        | Command::Probe { instance, .. }
        | Command::Deriv { function: FunctionArgs { instance, .. }, .. }
        | Command::Subdiff { function: FunctionArgs { instance, .. }, .. }
        | Command::Conjugate { function: FunctionArgs { instance, .. }, .. }
        | Command::Extend { function: FunctionArgs { instance, .. }, .. }
        | Command::Maxrule { instance, .. } => {
            let inst = load_instance(inputs, instance)?;
            let out = with_instance!(&inst, s => run_on(Arc::new(s.clone()), cmd, inputs, stored))?;
            Ok((out, numeric(&inst)))
        }
    }
}

fn run(cli: &Cli) -> CliResult<String> {
    let name = cli.command.name();
    let stored: Option<Report> = match &cli.verify {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            Some(parse_json(&text)?)
        }
        None => None,
    };
    let mut inputs = Inputs::new(name);
    let (outcome, numeric) = dispatch(&cli.command, &mut inputs, stored.as_ref().map(|r| &r.certificates))?;
    let Outcome { mut verdict, certificates, truncation, replay } = outcome;
    if numeric {
        verdict["arithmetic"] = json!("binary64");
    }
    let report = Report { command: name.to_string(), inputs_digest: inputs.digest(), verdict, certificates, truncation };
    let Some(stored) = stored else { return Ok(report.to_text()) };

    let mut checks = vec![
        ("command matches".to_string(), stored.command == report.command),
        ("inputs digest matches".to_string(), stored.inputs_digest == report.inputs_digest),
    ];
    checks.extend(replay);
    checks.push(("recomputed report matches".to_string(), stored == report));
    let verified = checks.iter().all(|(_, ok)| *ok);
    let checks: Vec<Value> = checks.into_iter().map(|(name, ok)| json!({ "check": name, "ok": ok })).collect();
    let out = Report {
        command: format!("verify {name}"),
        inputs_digest: report.inputs_digest,
        verdict: json!({ "verified": verified, "checks": checks }),
        certificates: json!([]),
        truncation: Value::Null,
    };
    Ok(out.to_text())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => match &cli.output {
            Some(path) => match fs::write(path, text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    ExitCode::from(1)
                }
            },
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
