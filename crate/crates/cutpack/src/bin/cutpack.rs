//! Command-line front end: generate, solve, verify, cross-check, benchmark.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed input,
//! 3 internal invariant breach, 4 budget exhausted.

use clap::{Parser, Subcommand, ValueEnum};
use cutpack::gen::{clique_chain, random_instance, RandomParams};
use cutpack::instance::{integral_load, verify_integral_solution, Instance, IntegralCutFamily, Mode};
use cutpack::io::{read_instance, read_solution, write_json, InstanceFile, IoError, SolutionFile};
use cutpack::lp::LpError;
use cutpack::oracle::{brute_force_opt, OracleError};
use cutpack::pipeline::{integralized_capacities, resolve_mode, solve, PipelineError};
use cutpack::ratio::fmt_q;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_VERIFY: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "cutpack", version, about = "Multiway cut packing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Mcp,
    Cscp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    CliqueChain,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Gen {
        #[arg(long, value_enum, default_value = "random")]
        kind: Kind,
        /// number of vertices (random), or clique size (clique-chain)
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// number of commodities (random only)
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// max commodity size (random MCP only)
        #[arg(long, default_value_t = 3)]
        group_max: usize,
        /// max edge capacity (random only)
        #[arg(long, default_value_t = 3)]
        cap_max: i64,
        #[arg(long, value_enum, default_value = "mcp")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Solve an instance and write the solution as JSON.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Lam-2 blowup parameter D (even, >= 4)
        #[arg(long)]
        grid: Option<i64>,
    },
    /// Re-check a solution file against its instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// the solution to verify
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
    },
    /// Brute-force the exact optimum of a small instance.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        /// cap on explored search nodes
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Solve every instance in a directory; write a CSV of stats.
    Bench {
        /// directory of instance JSON files
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long)]
        grid: Option<i64>,
    },
}

fn requested_mode(arg: ModeArg) -> Option<Mode> {
    match arg {
        ModeArg::Auto => None,
        ModeArg::Mcp => Some(Mode::Mcp),
        ModeArg::Cscp => Some(Mode::Cscp),
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("cutpack: {message}");
    ExitCode::from(code)
}

fn io_exit(err: IoError) -> ExitCode {
    fail(EXIT_PARSE, err)
}

fn pipeline_exit(err: PipelineError) -> ExitCode {
    match err {
        // constraint generation failing to converge is an internal defect,
        // as are broken invariants in the laminar and rounding stages
        PipelineError::Lp(LpError::IterationCap(_)) => fail(EXIT_INTERNAL, err),
        PipelineError::Lp(LpError::BadOutcome(_)) => fail(EXIT_INTERNAL, err),
        PipelineError::Laminar(_) | PipelineError::Rounding(_) => fail(EXIT_INTERNAL, err),
    }
}

fn solution_file(instance: &Instance, outcome: &cutpack::pipeline::SolveOutcome) -> SolutionFile {
    let cuts: BTreeMap<usize, Vec<usize>> = outcome
        .assignment
        .assignment
        .iter()
        .enumerate()
        .map(|(id, set)| (id, set.iter().collect()))
        .collect();
    let loads = instance
        .graph()
        .edges()
        .iter()
        .zip(&outcome.report.loads)
        .map(|(e, &l)| (e.u, e.v, l))
        .collect();
    SolutionFile {
        lambda: fmt_q(&outcome.metric.lambda),
        cuts,
        loads,
        bound: outcome.guarantee.bound_name.to_string(),
        violations: outcome.violations.clone(),
    }
}

fn cmd_solve(input: &Path, output: &Path, mode: ModeArg, grid: Option<i64>) -> ExitCode {
    let instance = match read_instance(input) {
        Ok(i) => i,
        Err(e) => return io_exit(e),
    };
    let outcome = match solve(&instance, requested_mode(mode), grid) {
        Ok(o) => o,
        Err(e) => return pipeline_exit(e),
    };
    let file = solution_file(&instance, &outcome);
    if let Err(e) = write_json(output, &file) {
        return io_exit(e);
    }
    println!(
        "lambda = {}, max load = {}, bound = {}",
        file.lambda, outcome.report.max_load, file.bound
    );
    if file.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        for v in &file.violations {
            eprintln!("violation: {v}");
        }
        ExitCode::from(EXIT_VERIFY)
    }
}

fn cmd_verify(input: &Path, solution_path: &Path, mode: ModeArg) -> ExitCode {
    let instance = match read_instance(input) {
        Ok(i) => i,
        Err(e) => return io_exit(e),
    };
    let solution = match read_solution(solution_path) {
        Ok(s) => s,
        Err(e) => return io_exit(e),
    };
    let n = instance.graph().num_vertices();
    let assignment = match solution.assignment(n) {
        Ok(a) => a,
        Err(e) => return io_exit(e),
    };
    if assignment.len() != instance.terminals().len() {
        return fail(
            EXIT_PARSE,
            format!(
                "solution has {} cuts, instance has {} terminals",
                assignment.len(),
                instance.terminals().len()
            ),
        );
    }
    let lambda = match solution.lambda() {
        Ok(l) => l,
        Err(e) => return io_exit(e),
    };
    let family = IntegralCutFamily { assignment };
    let report = match verify_integral_solution(&family, &instance) {
        Ok(r) => r,
        Err(v) => return fail(EXIT_VERIFY, v),
    };
    let mode = resolve_mode(&instance, requested_mode(mode));
    let caps = integralized_capacities(&instance, &lambda);
    let guarantee = cutpack::oracle::check_guarantee(&family, &instance, &caps, mode);
    // the declared loads must match what the cuts actually place
    let actual = integral_load(family.assignment.iter(), instance.graph());
    for (e, (&(u, v, declared), &real)) in solution.loads.iter().zip(&actual).enumerate() {
        let edge = &instance.graph().edges()[e];
        if (u, v) != (edge.u, edge.v) || declared != real {
            return fail(
                EXIT_VERIFY,
                format!("edge {e}: declared load ({u},{v})={declared}, actual {real}"),
            );
        }
    }
    if !guarantee.violations.is_empty() {
        for (e, load, bound) in &guarantee.violations {
            eprintln!("edge {e}: load {load} exceeds bound {bound}");
        }
        return ExitCode::from(EXIT_VERIFY);
    }
    println!(
        "ok: max load {}, max relative load {}, bound {}",
        report.max_load,
        fmt_q(&report.max_relative_load),
        guarantee.bound_name
    );
    ExitCode::SUCCESS
}

fn cmd_oracle(input: &Path, budget: u64) -> ExitCode {
    let instance = match read_instance(input) {
        Ok(i) => i,
        Err(e) => return io_exit(e),
    };
    match brute_force_opt(&instance, budget) {
        Ok(result) => {
            println!("optimum = {}", fmt_q(&result.optimal_max_relative_load));
            ExitCode::SUCCESS
        }
        Err(e @ OracleError::BudgetExceeded { .. }) => fail(EXIT_BUDGET, e),
        Err(e @ OracleError::TooLarge(_)) => fail(EXIT_PARSE, e),
    }
}

fn cmd_gen(
    kind: Kind,
    n: usize,
    k: usize,
    group_max: usize,
    cap_max: i64,
    mode: ModeArg,
    seed: u64,
    output: &Path,
) -> ExitCode {
    let instance = match kind {
        Kind::CliqueChain => {
            if n < 4 || n % 2 != 0 {
                return fail(EXIT_PARSE, "clique-chain needs an even --n of at least 4");
            }
            clique_chain(n)
        }
        Kind::Random => {
            let mode = requested_mode(mode).unwrap_or(Mode::Mcp);
            let params =
                RandomParams { n, k, max_group: group_max, max_capacity: cap_max, mode };
            match random_instance(&params, seed) {
                Ok(i) => i,
                Err(e) => return fail(EXIT_PARSE, e),
            }
        }
    };
    match write_json(output, &InstanceFile::from_instance(&instance)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => io_exit(e),
    }
}

fn cmd_bench(dir: &Path, output: &Path, mode: ModeArg, grid: Option<i64>) -> ExitCode {
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => return fail(EXIT_PARSE, e),
    };
    paths.sort();
    let mut csv = String::from(
        "instance,n,m,k,lambda,max_load_ratio,bound_ratio,wall_ms\n",
    );
    for path in &paths {
        let instance = match read_instance(path) {
            Ok(i) => i,
            Err(e) => return io_exit(e),
        };
        let start = Instant::now();
        let outcome = match solve(&instance, requested_mode(mode), grid) {
            Ok(o) => o,
            Err(e) => return pipeline_exit(e),
        };
        let wall_ms = start.elapsed().as_millis();
        if !outcome.violations.is_empty() {
            return fail(
                EXIT_VERIFY,
                format!("{}: {}", path.display(), outcome.violations.join("; ")),
            );
        }
        // worst edge, relative to capacity and to the proven bound
        let graph = instance.graph();
        let max_load_ratio = outcome
            .report
            .loads
            .iter()
            .zip(graph.edges())
            .map(|(&l, e)| l as f64 / e.capacity as f64)
            .fold(0.0f64, f64::max);
        let bound: Box<dyn Fn(i64) -> i64> = match outcome.mode {
            Mode::Mcp => Box::new(|c| 8 * c + 4),
            Mode::Cscp => Box::new(|c| c + 2),
        };
        let bound_ratio = outcome
            .report
            .loads
            .iter()
            .zip(&outcome.integralized_capacities)
            .map(|(&l, &c)| l as f64 / bound(c) as f64)
            .fold(0.0f64, f64::max);
        csv.push_str(&format!(
            "{},{},{},{},{},{:.4},{:.4},{}\n",
            path.file_stem().unwrap_or_default().to_string_lossy(),
            graph.num_vertices(),
            graph.num_edges(),
            instance.num_commodities(),
            fmt_q(&outcome.metric.lambda),
            max_load_ratio,
            bound_ratio,
            wall_ms,
        ));
    }
    if let Err(e) = std::fs::write(output, csv) {
        return fail(EXIT_PARSE, e);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Gen { kind, n, k, group_max, cap_max, mode, seed, output } => {
            cmd_gen(kind, n, k, group_max, cap_max, mode, seed, &output)
        }
        Command::Solve { input, output, mode, grid } => cmd_solve(&input, &output, mode, grid),
        Command::Verify { input, output, mode } => cmd_verify(&input, &output, mode),
        Command::Oracle { input, budget } => cmd_oracle(&input, budget),
        Command::Bench { input, output, mode, grid } => cmd_bench(&input, &output, mode, grid),
    }
}
