use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cecd_core::analysis::analyze;
use cecd_core::dot::emit_dot;
use cecd_core::heuristic::{
    best_region_by_profile, build_knapsack_cfg, knapsack_brute_force, EvalParams, KnapsackInstance,
};
use cecd_core::interp::{run_with_env, Env, Outcome, RuntimeErrorKind};
use cecd_core::ir::{parse_expr, parse_program, Expr};
use cecd_core::pipeline::{optimize, OptOptions};
use cecd_core::Program;

#[derive(Parser)]
#[command(
    name = "cecd",
    version,
    about = "Conditional elimination through code duplication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every candidate condition and print the resulting program.
    Opt {
        file: PathBuf,
        /// Output file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Instructions of growth allowed per eliminated conditional.
        #[arg(long, default_value_t = 0)]
        k: u64,
        /// Only consider this condition.
        #[arg(long)]
        cond: Option<String>,
        /// Write before.dot and after.dot into this directory.
        #[arg(long, value_name = "DIR")]
        emit_dot: Option<PathBuf>,
        /// Write per-candidate statistics as JSON.
        #[arg(long, value_name = "FILE")]
        stats: Option<PathBuf>,
        /// Check each applied transformation on N random runs.
        #[arg(long, value_name = "N")]
        verify: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Leave dead original blocks in place and skip cleanup.
        #[arg(long)]
        keep_originals: bool,
    },
    /// Print the per-block data-flow table for a condition as JSON.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        cond: String,
    },
    /// Interpret a program.
    Run {
        file: PathBuf,
        /// Comma-separated input values.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        inputs: String,
        #[arg(long, default_value_t = 10_000)]
        fuel: u64,
        /// Initial binding, `name=value`. Repeatable.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
    },
    /// Check the knapsack reduction on one instance.
    KnapsackDemo {
        /// Items as `weight:value`, comma-separated.
        #[arg(long)]
        items: String,
        #[arg(long)]
        budget: u64,
    },
    /// Print a program as a Graphviz digraph.
    Dot {
        file: PathBuf,
        /// Annotate with the analysis of this condition.
        #[arg(long)]
        cond: Option<String>,
    },
}

enum Failure {
    Usage(String),
    Other(String),
    Verification,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Verification => 3,
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read_program(path: &Path) -> Result<Program> {
    let src = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_program(&src).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_cond(s: &str) -> Result<Expr> {
    parse_expr(s).map_err(|e| Failure::Usage(format!("bad condition `{s}`: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))
}

fn parse_inputs(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Failure::Usage(format!("bad input value `{t}`")))
        })
        .collect()
}

fn parse_env(set: &[String]) -> Result<Env> {
    set.iter()
        .map(|kv| {
            let bad = || Failure::Usage(format!("expected NAME=VALUE, got `{kv}`"));
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            Ok((k.trim().to_owned(), v.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_opt(
    file: &Path,
    output: Option<&Path>,
    k: u64,
    cond: Option<&str>,
    emit_dot_dir: Option<&Path>,
    stats: Option<&Path>,
    verify: Option<usize>,
    seed: u64,
    keep_originals: bool,
) -> Result<()> {
    let p = read_program(file)?;
    let opts = OptOptions {
        k,
        cond: cond.map(read_cond).transpose()?,
        verify,
        seed,
        keep_originals,
    };
    let res = optimize(&p, &opts).map_err(|e| Failure::Other(e.to_string()))?;

    let text = res.program.to_string();
    match output {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = stats {
        let json = serde_json::to_string_pretty(&res.stats).expect("stats serialize");
        write_file(path, &json)?;
    }
    if let Some(dir) = emit_dot_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Other(format!("cannot create {}: {e}", dir.display())))?;
        // Annotate with the first applied condition, if any.
        let applied = res
            .stats
            .iter()
            .find(|s| s.accepted)
            .map(|s| read_cond(&s.cond))
            .transpose()?;
        let before = applied.as_ref().map(|e| analyze(&p, e));
        let after = applied.as_ref().map(|e| analyze(&res.program, e));
        write_file(&dir.join("before.dot"), &emit_dot(&p, before.as_ref()))?;
        write_file(
            &dir.join("after.dot"),
            &emit_dot(&res.program, after.as_ref()),
        )?;
    }
    if res.verification_failed {
        eprintln!("warning: transformed program disagrees with the original on a verification run");
        return Err(Failure::Verification);
    }
    Ok(())
}

fn cmd_analyze(file: &Path, cond: &str) -> Result<()> {
    let p = read_program(file)?;
    let e = read_cond(cond)?;
    let rows = analyze(&p, &e).rows();
    println!(
        "{}",
        serde_json::to_string_pretty(&rows).expect("rows serialize")
    );
    Ok(())
}

fn cmd_run(file: &Path, inputs: &str, fuel: u64, set: &[String]) -> Result<()> {
    let p = read_program(file)?;
    let inputs = parse_inputs(inputs)?;
    let env = parse_env(set)?;
    let (trace, stats) = run_with_env(&p, &env, &inputs, fuel);
    for v in &trace.outputs {
        println!("{v}");
    }
    let outcome = match &trace.outcome {
        Outcome::Completed => "completed".to_owned(),
        Outcome::FuelExhausted => "fuel-exhausted".to_owned(),
        Outcome::RuntimeError(RuntimeErrorKind::InputExhausted) => {
            "error: input exhausted".to_owned()
        }
        Outcome::RuntimeError(RuntimeErrorKind::UndefinedVariable(v)) => {
            format!("error: undefined variable {v}")
        }
    };
    let evals: Vec<String> = stats
        .cond_evals
        .iter()
        .map(|(e, n)| format!("[{e}]={n}"))
        .collect();
    let evals = if evals.is_empty() {
        "none".to_owned()
    } else {
        evals.join(" ")
    };
    println!("# {outcome}; steps={}; evals {evals}", stats.steps);
    match trace.outcome {
        Outcome::RuntimeError(_) => Err(Failure::Other("runtime error".into())),
        _ => Ok(()),
    }
}

fn cmd_knapsack_demo(items: &str, budget: u64) -> Result<()> {
    let usage = |e: cecd_core::heuristic::HeuristicError| Failure::Usage(e.to_string());
    let inst = KnapsackInstance::parse(items, budget).map_err(usage)?;
    let (optimum, chosen) = knapsack_brute_force(&inst).map_err(usage)?;
    let (p, profile, e) = build_knapsack_cfg(&inst).map_err(usage)?;
    let (region, objective) =
        best_region_by_profile(&p, &e, &profile, EvalParams { k: budget }).map_err(usage)?;
    let chosen: Vec<String> = chosen.iter().map(usize::to_string).collect();
    println!("knapsack optimum: {optimum} (items {})", chosen.join(","));
    println!(
        "region objective: {objective} ({} blocks)",
        region.members.len()
    );
    if optimum == objective {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(Failure::Other("optima differ".into()))
    }
}

fn cmd_dot(file: &Path, cond: Option<&str>) -> Result<()> {
    let p = read_program(file)?;
    let res = cond.map(read_cond).transpose()?.map(|e| analyze(&p, &e));
    print!("{}", emit_dot(&p, res.as_ref()));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Opt {
            file,
            output,
            k,
            cond,
            emit_dot,
            stats,
            verify,
            seed,
            keep_originals,
        } => cmd_opt(
            file,
            output.as_deref(),
            *k,
            cond.as_deref(),
            emit_dot.as_deref(),
            stats.as_deref(),
            *verify,
            *seed,
            *keep_originals,
        ),
        Command::Analyze { file, cond } => cmd_analyze(file, cond),
        Command::Run {
            file,
            inputs,
            fuel,
            set,
        } => cmd_run(file, inputs, *fuel, set),
        Command::KnapsackDemo { items, budget } => cmd_knapsack_demo(items, *budget),
        Command::Dot { file, cond } => cmd_dot(file, cond.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Other(m) => eprintln!("error: {m}"),
                Failure::Verification => {}
            }
            ExitCode::from(f.exit_code())
        }
    }
}
