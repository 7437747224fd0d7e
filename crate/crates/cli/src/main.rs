use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subpb::experiment::{family_label, write_csv, CostModel, ReportRow, SweepConfig};
use subpb::instance::format_rational;
use subpb::partition::shortlist;
use subpb::rng::stream;
use subpb::{
    build_partition, evaluate, harmonic_scores, optimal_welfare, rank_group, sweep, ElicitationMethod, Error,
    EvalConfig, EvalMode, FamilyKind, GeneratorSpec, Instance, InstanceFile, KnapsackSolver,
};

#[derive(Parser)]
#[command(name = "subpb", version, about = "Submodular participatory budgeting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file.
    Gen(GenArgs),
    /// Evaluate one elicitation method on an instance.
    Eval(EvalArgs),
    /// Print the cost groups, harmonic scores or the optimum of an instance.
    Inspect(InspectArgs),
    /// Generate and evaluate a grid of instances.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: FamilyKind,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    /// uniform[:GRID], dyadic[:MAX_EXP] or fixed:c1,c2,...
    #[arg(long, default_value = "dyadic")]
    cost_model: CostModel,
    #[arg(long, env = "SUBPB_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Args)]
struct EvalOptions {
    #[arg(long, default_value_t = 0.5)]
    mix: f64,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, env = "SUBPB_SEED", default_value_t = 0)]
    seed: u64,
    /// dp or fptas:EPS
    #[arg(long, default_value = "dp")]
    solver: KnapsackSolver,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl EvalOptions {
    fn mode(&self) -> EvalMode {
        match self.mode {
            Mode::Exact => EvalMode::Exact,
            Mode::Mc => EvalMode::MonteCarlo { samples: self.samples },
        }
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    instance: PathBuf,
    /// marginal-rank, value-rank or threshold
    #[arg(long)]
    method: ElicitationMethod,
    #[command(flatten)]
    opts: EvalOptions,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Print t, l_t, u_t and the members of each cost group.
    #[arg(long)]
    group_table: bool,
    /// Print harmonic scores for one group (needs --method).
    #[arg(long, requires = "method")]
    scores: bool,
    /// Ranking method used for --scores.
    #[arg(long)]
    method: Option<ElicitationMethod>,
    /// Group to score; drawn uniformly from --seed when absent.
    #[arg(long)]
    group: Option<usize>,
    #[arg(long, env = "SUBPB_SEED", default_value_t = 0)]
    seed: u64,
    /// Print the welfare-optimal feasible set.
    #[arg(long)]
    opt: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated families; all four by default.
    #[arg(long, value_delimiter = ',')]
    families: Vec<FamilyKind>,
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Instances per (family, m, n) cell, seeded seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    /// Comma-separated methods; all three by default.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<ElicitationMethod>,
    #[arg(long, default_value = "dyadic")]
    cost_model: CostModel,
    #[command(flatten)]
    opts: EvalOptions,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Parse(String),
    Budget(String),
    Violated(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Budget(_) => 4,
            Failure::Violated(_) => 5,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(s) | Failure::Io(s) | Failure::Parse(s) => f.write_str(s),
            Failure::Budget(s) => write!(f, "{s}; rerun with --mode mc"),
            Failure::Violated(k) => write!(f, "welfare bound violated on {k} row(s)"),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::ExceedsExactBudget { .. } => Failure::Budget(err.to_string()),
            Error::InvalidMix(_) | Error::InvalidEpsilon(_) | Error::InvalidSpec(_) => Failure::Usage(err.to_string()),
            _ => Failure::Parse(err.to_string()),
        }
    }
}

fn io_failure(path: &Path, err: io::Error) -> Failure {
    Failure::Io(format!("{}: {err}", path.display()))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let file = InstanceFile::parse(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    file.into_instance()
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn emit_csv(rows: &[ReportRow], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
            write_csv(rows, io::BufWriter::new(file)).map_err(|e| io_failure(path, e))
        }
        None => write_csv(rows, io::stdout().lock()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn check_rows(rows: &[ReportRow]) -> Result<(), Failure> {
    let violated = rows.iter().filter(|r| r.bound_satisfied == Some(false)).count();
    if violated > 0 {
        return Err(Failure::Violated(violated));
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    if args.m == 0 || args.n == 0 {
        return Err(Failure::Usage("--m and --n must be positive".into()));
    }
    let spec = GeneratorSpec::new(args.family, args.m, args.n, args.cost_model, args.seed);
    let raw = subpb::experiment::generate_raw(&spec).map_err(|e| match e {
        Error::Parse(s) | Error::InvalidSpec(s) => Failure::Usage(s),
        other => other.into(),
    })?;
    let instance = subpb::validate_instance(raw.clone())?;
    let mut file = InstanceFile::from_raw(&raw);
    file.metadata.insert("generator".into(), spec.instance_id().into());
    fs::write(&args.out, file.to_json()).map_err(|e| io_failure(&args.out, e))?;
    println!("m = {}, n = {}", instance.m(), instance.n());
    for (i, voter) in instance.voters().iter().enumerate() {
        println!("voter {i}: {} curvature {:.6}", voter.kind(), voter.curvature());
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let instance = load(&args.instance)?;
    let config = EvalConfig {
        method: args.method,
        mix: args.opts.mix,
        mode: args.opts.mode(),
        solver: args.opts.solver,
    };
    let report = evaluate(&instance, &config, args.opts.seed)?;
    let id = args
        .instance
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let row = ReportRow::from_result(
        &id,
        &family_label(&instance),
        instance.m(),
        instance.n(),
        args.method,
        args.opts.mix,
        &Ok(report),
    );
    let rows = [row];
    emit_csv(&rows, args.opts.out.as_deref())?;
    check_rows(&rows)
}

fn cmd_inspect(args: InspectArgs) -> Result<(), Failure> {
    let instance = load(&args.instance)?;
    let partition = build_partition(&instance);
    let mut out = io::stdout().lock();
    let mut put = |line: String| writeln!(out, "{line}").map_err(|e| Failure::Io(e.to_string()));

    let show_table = args.group_table || !(args.scores || args.opt);
    put(format!(
        "m = {}, n = {}, T = {}",
        instance.m(),
        instance.n(),
        partition.top()
    ))?;
    if show_table {
        put("t\tl_t\tu_t\tmembers".into())?;
        for t in 0..partition.num_groups() {
            let members: Vec<String> = partition.group(t).iter().map(|a| a.to_string()).collect();
            put(format!(
                "{t}\t{}\t{}\t{}",
                format_rational(&partition.lower(t)),
                format_rational(&partition.upper(t)),
                members.join(",")
            ))?;
        }
    }
    if args.scores {
        let method = args.method.expect("clap enforces --method");
        let ranking = method
            .ranking()
            .ok_or_else(|| Failure::Usage("--scores needs a ranking method".into()))?;
        let t = match args.group {
            Some(t) if t < partition.num_groups() => t,
            Some(t) => {
                return Err(Failure::Usage(format!(
                    "--group {t} out of range 0..{}",
                    partition.num_groups()
                )))
            }
            None => {
                use rand::Rng;
                stream(args.seed, "inspect/group").gen_range(0..partition.num_groups())
            }
        };
        let profile = rank_group(&instance, &partition, ranking, t);
        let scores = harmonic_scores(&profile)?;
        let (plus, _) = shortlist(&partition, &scores, t);
        put(format!(
            "group {t} ({method}), shortlist cap {}",
            partition.shortlist_cap(t)
        ))?;
        for a in scores.ordered() {
            let mark = if plus.contains(&a) { "+" } else { "-" };
            put(format!("{a}\t{:.6}\t{mark}", scores.score(a).unwrap_or(0.0)))?;
        }
    }
    if args.opt {
        let best = optimal_welfare(&instance)?;
        let set: Vec<String> = best.set.iter().map(|a| a.to_string()).collect();
        put(format!("S* = {{{}}}", set.join(",")))?;
        put(format!("sw(S*) = {:.6}", best.welfare))?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    if args.m.contains(&0) || args.n.contains(&0) {
        return Err(Failure::Usage("--m and --n values must be positive".into()));
    }
    let families = if args.families.is_empty() {
        FamilyKind::ALL.to_vec()
    } else {
        args.families
    };
    let methods = if args.methods.is_empty() {
        ElicitationMethod::ALL.to_vec()
    } else {
        args.methods
    };
    let mut specs = Vec::new();
    for &family in &families {
        for &m in &args.m {
            for &n in &args.n {
                for r in 0..args.replicates {
                    let seed = args.opts.seed.wrapping_add(r);
                    specs.push(GeneratorSpec::new(family, m, n, args.cost_model.clone(), seed));
                }
            }
        }
    }
    let config = SweepConfig {
        mix: args.opts.mix,
        mode: args.opts.mode(),
        solver: args.opts.solver,
    };
    let rows = sweep(&specs, &methods, &config);
    emit_csv(&rows, args.opts.out.as_deref())?;
    let errors = rows.iter().filter(|r| r.is_error()).count();
    if errors > 0 {
        eprintln!("subpb: {errors} cell(s) failed; see the mode column");
    }
    check_rows(&rows)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("subpb: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
