use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use packcover::harness::{self, ConvergenceStatus, SweepConfig};
use packcover::instances::{from_json, generate, to_json, Family, GeneratorParams, Sense};
use packcover::lifts::{
    amplify_girth, parse_permutations, realize_fractional_solution, InstanceLift, PermSpec,
};
use packcover::lp_exact::{classify, compute_c, solve_lp, variable_range};
use packcover::minsum::{run_covering_with, run_packing_with, MinSumConfig};
use packcover::scalar::parse_scalar;
use packcover::tree_dp::{build_tree, opt_dp_root_set, tree_optima};
use packcover::{Error, FactorGraph, Instance, Rational};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "packcover",
    version,
    about = "Exact min-sum for zero-one packing and covering programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run min-sum for a fixed number of iterations.
    Minsum {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        iterations: usize,
        /// Write every message entry as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Optimal values on the computation tree of height 2t rooted at a variable.
    TreeDp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        root: usize,
        #[arg(long)]
        iterations: usize,
    },
    /// Solve the LP relaxation exactly.
    SolveLp {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Build a lift of the instance's factor graph.
    Lift(LiftArgs),
    /// Search for a lift realizing a fractional solution.
    Realize {
        #[arg(long)]
        instance: PathBuf,
        /// Comma-separated rationals, e.g. `1/2,1/2,1/2`.
        #[arg(long)]
        x: String,
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// Check the parity inequalities for t = 1..=t_max.
    Oscillation {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        t_max: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check convergence past the c-based iteration threshold.
    Convergence {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 3)]
        slack: usize,
    },
    /// Run a JSON-configured sweep and emit CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate an instance.
    Generate {
        #[arg(long)]
        family: Family,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file with generator parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct LiftArgs {
    #[command(subcommand)]
    action: Option<LiftAction>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    fold: Option<usize>,
    /// A permutation file, `all-swap` or `random:<seed>`.
    #[arg(long, default_value = "all-swap")]
    perms: String,
    /// Where to write the lifted instance; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LiftAction {
    /// Repeated girth doubling of the factor graph.
    Amplify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        target: usize,
    },
}

fn load(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn print_json(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("JSON value")
    );
}

fn minsum(path: &Path, iterations: usize, trace: Option<&Path>) -> Result<()> {
    let inst = load(path)?;
    let config = MinSumConfig {
        keep_history: trace.is_some(),
        ..MinSumConfig::default()
    };
    let (decision, state, fg) = match inst.sense() {
        Sense::Packing => {
            let (d, s) = run_packing_with(&inst, iterations, &config)?;
            (d, s, FactorGraph::new(&inst))
        }
        Sense::Covering => {
            let (d, s) = run_covering_with(&inst, iterations, &config)?;
            (d, s, FactorGraph::new(&inst.complement_reduction()?.0))
        }
    };
    if let Some(trace) = trace {
        let mut out =
            fs::File::create(trace).with_context(|| format!("creating {}", trace.display()))?;
        for record in state.trace_records(&fg) {
            writeln!(out, "{}", serde_json::to_string(&record)?)?;
        }
    }
    print_json(&json!({
        "iterations": decision.iterations,
        "sense": inst.sense(),
        "x_hat": decision.x_hat,
        "delta": decision.delta,
        "mu": decision.mu.iter().map(|t| strings(t)).collect::<Vec<_>>(),
        "objective": inst.objective_int(&decision.x_hat).to_string(),
        "valid": inst.validate_assignment(&decision.x_hat)?,
    }));
    Ok(())
}

/// Covering instances are answered on the complement and mapped back.
fn tree_dp(path: &Path, root: usize, iterations: usize) -> Result<()> {
    let inst = load(path)?;
    if root >= inst.n() {
        bail!("root {root} out of range for {} variables", inst.n());
    }
    let packing = match inst.sense() {
        Sense::Packing => inst.clone(),
        Sense::Covering => inst.complement_reduction()?.0,
    };
    let tree = build_tree(&FactorGraph::new(&packing), root, 2 * iterations)?;
    let mut optima = tree_optima(&tree);
    let mut root_set = opt_dp_root_set(&tree)?;
    if inst.sense() == Sense::Covering {
        let bound = i64::from(inst.bounds()[root]);
        optima.reverse();
        root_set = root_set.iter().rev().map(|b| bound - b).collect();
    }
    print_json(&json!({
        "root": root,
        "height": tree.height(),
        "nodes": tree.len(),
        "injective": tree.is_injective(),
        "optima": strings(&optima),
        "root_set": root_set,
    }));
    Ok(())
}

fn solve(path: &Path) -> Result<()> {
    let inst = load(path)?;
    let lp = solve_lp(&inst)?;
    let range = variable_range(&lp);
    let c = match compute_c(&lp, inst.w()) {
        Ok(c) => Value::String(c.to_string()),
        Err(Error::UndefinedC) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    print_json(&json!({
        "opt_value": lp.opt_value.to_string(),
        "witness": strings(&lp.witness),
        "classification": classify(&lp).name(),
        "x_min": strings(&range.x_min),
        "x_max": strings(&range.x_max),
        "vertices": lp.vertices.len(),
        "optimal_vertices": lp.opt_vertices.iter().map(|v| strings(v)).collect::<Vec<_>>(),
        "c": c,
    }));
    Ok(())
}

fn lift(args: LiftArgs) -> Result<()> {
    if let Some(LiftAction::Amplify { instance, target }) = args.action {
        let inst = load(&instance)?;
        let graph = FactorGraph::new(&inst).to_graph();
        let lift = amplify_girth(&graph, target)?;
        print_json(&json!({
            "base_girth": graph.girth(),
            "fold": lift.fold(),
            "girth": lift.lifted_graph().girth(),
        }));
        return Ok(());
    }
    let (Some(instance), Some(fold)) = (args.instance, args.fold) else {
        bail!("lift needs --instance and --fold (or the `amplify` subcommand)");
    };
    let inst = load(&instance)?;
    let spec = match args.perms.parse::<PermSpec>() {
        Ok(spec) => spec,
        Err(_) => {
            let text = fs::read_to_string(&args.perms)
                .with_context(|| format!("reading {}", args.perms))?;
            PermSpec::Explicit(parse_permutations(&text)?)
        }
    };
    let lift = InstanceLift::from_spec(&inst, fold, &spec)?;
    let lifted = to_json(&lift.lifted_instance());
    match args.output {
        Some(out) => {
            fs::write(&out, lifted).with_context(|| format!("writing {}", out.display()))?
        }
        None => println!("{lifted}"),
    }
    let graph = lift.lift().lifted_graph();
    eprintln!(
        "fold {fold}: {} vertices, girth {}, covering map {}",
        graph.vertex_count(),
        graph.girth().map_or("inf".to_string(), |g| g.to_string()),
        packcover::lifts::validate_covering_map(lift.lift().base(), fold, &graph)
    );
    Ok(())
}

fn realize(path: &Path, x: &str, m_max: Option<usize>) -> Result<()> {
    let inst = load(path)?;
    let x: Vec<Rational> = x
        .split(',')
        .map(|s| parse_scalar(s.trim()).with_context(|| format!("bad rational `{s}`")))
        .collect::<Result<_>>()?;
    let lcm = x.iter().fold(1usize, |acc, v| {
        let d = usize::try_from(v.denom().clone()).unwrap_or(usize::MAX);
        acc / gcd(acc, d) * d
    });
    let m_max = m_max.unwrap_or(8 * lcm);
    match realize_fractional_solution(&inst, &x, m_max)? {
        Some((lift, assignment)) => print_json(&json!({
            "found": true,
            "fold": lift.fold(),
            "perms": lift.lift().perms(),
            "assignment": assignment,
        })),
        None => print_json(&json!({ "found": false, "m_max": m_max })),
    }
    Ok(())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn oscillation(path: &Path, t_max: usize, csv: Option<&Path>) -> Result<()> {
    let inst = load(path)?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("instance");
    let report = harness::check_weak_oscillation_with(
        &inst,
        id,
        t_max,
        packcover::lp_exact::DEFAULT_BASIS_CAP,
    )?;
    if let Some(out) = csv {
        fs::write(out, harness::rows_to_csv(&report.rows))
            .with_context(|| format!("writing {}", out.display()))?;
    }
    print_json(&json!({
        "instance": report.instance_id,
        "classification": report.classification.name(),
        "lp_value": report.lp_value.to_string(),
        "checks": report.rows.len(),
        "violations": report.violations(),
        "rounding_violations": report.rounding_violations(),
        "cross_parity": report.cross_parity.iter().map(|f| json!({
            "r": f.r, "t": f.t, "s": f.s, "intersection": f.intersection, "holds": f.holds,
        })).collect::<Vec<_>>(),
        "agreement_violations": report.agreement_violations(),
    }));
    Ok(())
}

fn convergence(path: &Path, slack: usize) -> Result<bool> {
    let inst = load(path)?;
    let report = harness::check_convergence(&inst, slack)?;
    let (status, reason) = match &report.status {
        ConvergenceStatus::Converged => ("converged", None),
        ConvergenceStatus::Failed => ("failed", None),
        ConvergenceStatus::PreconditionViolated(why) => {
            ("precondition-violated", Some(why.clone()))
        }
    };
    print_json(&json!({
        "status": status,
        "reason": reason,
        "classification": report.classification.name(),
        "w_max": report.w_max.to_string(),
        "c": report.c.as_ref().map(ToString::to_string),
        "t_star": report.t_star,
        "x_star": report.x_star,
        "checks": report.checks.iter().map(|c| json!({"t": c.t, "x_hat": c.x_hat, "matches": c.matches})).collect::<Vec<_>>(),
    }));
    Ok(report.status != ConvergenceStatus::Failed)
}

fn sweep(config: &Path, csv: Option<&Path>) -> Result<bool> {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let config: SweepConfig = serde_json::from_str(&text).context("parsing sweep config")?;
    let report = harness::sweep(&config)?;
    for skipped in &report.skipped {
        eprintln!("skipped {}: {}", skipped.instance_id, skipped.reason);
    }
    match csv {
        Some(out) => {
            fs::write(out, &report.csv).with_context(|| format!("writing {}", out.display()))?
        }
        None => print!("{}", report.csv),
    }
    eprintln!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.violations == 0)
}

fn generate_instance(family: Family, seed: u64, params: Option<&Path>) -> Result<()> {
    let params: GeneratorParams = match params {
        Some(p) => {
            serde_json::from_str(&fs::read_to_string(p)?).context("parsing generator params")?
        }
        None => GeneratorParams::default(),
    };
    let inst: Instance = generate(family, &params, seed)?;
    println!("{}", to_json(&inst));
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Minsum {
            instance,
            iterations,
            trace,
        } => minsum(&instance, iterations, trace.as_deref())?,
        Command::TreeDp {
            instance,
            root,
            iterations,
        } => tree_dp(&instance, root, iterations)?,
        Command::SolveLp { instance } => solve(&instance)?,
        Command::Lift(args) => lift(args)?,
        Command::Realize { instance, x, m_max } => realize(&instance, &x, m_max)?,
        Command::Oscillation {
            instance,
            t_max,
            csv,
        } => oscillation(&instance, t_max, csv.as_deref())?,
        Command::Convergence { instance, slack } => return convergence(&instance, slack),
        Command::Sweep { config, csv } => return sweep(&config, csv.as_deref()),
        Command::Generate {
            family,
            seed,
            params,
        } => generate_instance(family, seed, params.as_deref())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
