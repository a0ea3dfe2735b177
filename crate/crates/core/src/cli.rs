//! Command-line surface: `solve`, `verify`, `gen` and `bench`.
//!
//! Exit codes of `solve`: 0 feasible solution found, 10 none found before the
//! cutoff, 20 a constraint is unsatisfiable on its own, 2 input error.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_bench, BenchOptions, InProcessExecutor, ProcessExecutor, RunConfig};
use crate::engine::solve;
use crate::error::ParseError;
use crate::gen::{generate_random_instance, GenParams};
use crate::opb::{parse_opb, parse_solution, v_lines, SolutionWriter, SolveStatus};
use crate::par::Execution;
use crate::verify::verify;

pub const EXIT_PARSE_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "decils", version, about = "Anytime local search for pseudo-Boolean optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an OPB instance and print competition output.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Write a random instance.
    Gen(GenArgs),
    /// Run every config over a directory of instances with several seeds.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SearchFlags {
    /// Wall-clock cutoff in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub cutoff: f64,
    /// Probability of repairing a random falsified constraint instead of the
    /// most-cared one.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Start from the all-false assignment.
    #[arg(long)]
    pub no_decimation: bool,
    /// Always repair a random falsified constraint (same as --p 1).
    #[arg(long)]
    pub no_care: bool,
    /// Best-of-k sampling in the greedy step.
    #[arg(long)]
    pub bms: Option<usize>,
    /// Cap on the objective constraint weight.
    #[arg(long, default_value_t = 1000)]
    pub gamma: i64,
    /// Hard constraint weight increment.
    #[arg(long, default_value_t = 1)]
    pub hard_inc: i64,
    /// Objective constraint weight increment.
    #[arg(long, default_value_t = 1)]
    pub obj_inc: i64,
    /// Stop after this many flips.
    #[arg(long)]
    pub max_flips: Option<u64>,
}

impl SearchFlags {
    pub fn to_config(&self, name: &str) -> Result<RunConfig, String> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(format!("--p must lie in [0, 1], got {}", self.p));
        }
        if self.cutoff.is_nan() || self.cutoff < 0.0 {
            return Err(format!("--cutoff must be non-negative, got {}", self.cutoff));
        }
        Ok(RunConfig {
            name: name.into(),
            cutoff: self.cutoff,
            p: self.p,
            no_decimation: self.no_decimation,
            no_care: self.no_care,
            bms: self.bms,
            gamma: self.gamma,
            hard_inc: self.hard_inc,
            obj_inc: self.obj_inc,
            max_flips: self.max_flips,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub search: SearchFlags,
    /// Write the initial assignment as a `v` line to this file.
    #[arg(long)]
    pub dump_initial: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 10)]
    pub vars: usize,
    #[arg(long, default_value_t = 15)]
    pub constraints: usize,
    #[arg(long, default_value_t = 2)]
    pub terms_min: usize,
    #[arg(long, default_value_t = 4)]
    pub terms_max: usize,
    #[arg(long, default_value_t = 1)]
    pub coeff_min: i64,
    #[arg(long, default_value_t = 5)]
    pub coeff_max: i64,
    #[arg(long, default_value_t = 0.5)]
    pub objective_density: f64,
    /// Make the instance feasible by construction.
    #[arg(long)]
    pub planted: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (standard output if absent).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    pub dir: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub seeds: u64,
    /// First seed; run k uses base + k.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Comma-separated presets: decils, alt1, alt2, lspbo.
    #[arg(long, default_value = "decils,alt1,alt2,lspbo")]
    pub configs: String,
    /// Concurrent solver runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Run solves inside this process instead of child processes.
    #[arg(long)]
    pub in_process: bool,
    /// Directory for runs.csv and summary.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchFlags,
}

/// Parses, solves and writes competition output to `out`, statistics to
/// `err`. Returns the exit code.
pub fn run_solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    let config = match args.search.to_config("solve") {
        Ok(c) => c,
        Err(msg) => {
            writeln!(err, "error: {msg}")?;
            return Ok(EXIT_PARSE_ERROR);
        }
    };
    let parsed = File::open(&args.instance)
        .map_err(ParseError::from)
        .and_then(parse_opb);
    let instance = match parsed {
        Ok(i) => i,
        Err(e) if e.is_trivially_unsat() => {
            writeln!(err, "{}: {e}", args.instance.display())?;
            SolutionWriter::new(&mut *out).finish(SolveStatus::Unsatisfiable, None)?;
            return Ok(SolveStatus::Unsatisfiable.exit_code());
        }
        Err(e) => {
            writeln!(err, "{}: {e}", args.instance.display())?;
            return Ok(EXIT_PARSE_ERROR);
        }
    };
    let params = config.solver_params(args.seed);
    let decision = instance.is_decision();
    let mut writer = SolutionWriter::new(&mut *out);
    let mut io_err = None;
    let result = solve(&instance, &params, |cost| {
        if !decision {
            if let Err(e) = writer.improvement(cost) {
                io_err.get_or_insert(e);
            }
        }
    });
    if let Some(e) = io_err {
        return Err(e);
    }
    if let Some(path) = &args.dump_initial {
        let mut f = File::create(path)?;
        for line in v_lines(&result.initial) {
            writeln!(f, "{line}")?;
        }
    }
    writer.finish(result.status, result.best.as_ref().map(|b| &b.0))?;
    let s = &result.stats;
    writeln!(err, "status={}", result.status.as_str())?;
    if let Some((_, cost)) = &result.best {
        writeln!(err, "best_cost={cost}")?;
    }
    writeln!(err, "flips={}", s.flips)?;
    writeln!(err, "local_optima={}", s.local_optima)?;
    writeln!(err, "decimation_forcings={}", s.decimation.hard_forcings)?;
    writeln!(err, "decimation_soft={}", s.decimation.soft_decisions)?;
    writeln!(err, "decimation_random={}", s.decimation.random_decisions)?;
    writeln!(err, "decimation_contradictions={}", s.decimation_contradictions)?;
    if let Some(t) = s.time_to_first_feasible {
        writeln!(err, "time_to_first_feasible_s={}", t.as_secs_f64())?;
    }
    writeln!(err, "elapsed_s={}", s.elapsed.as_secs_f64())?;
    Ok(result.status.exit_code())
}

/// `verify`: 0 when the solution is feasible at the reported cost, 1 when
/// it is not, 2 on input errors.
pub fn run_verify(instance: &PathBuf, solution: &PathBuf, out: &mut dyn Write) -> io::Result<i32> {
    let inst = match File::open(instance).map_err(ParseError::from).and_then(parse_opb) {
        Ok(i) => i,
        Err(e) => {
            writeln!(out, "{}: {e}", instance.display())?;
            return Ok(EXIT_PARSE_ERROR);
        }
    };
    let sol = match File::open(solution).map_err(ParseError::from).and_then(parse_solution) {
        Ok(s) => s,
        Err(e) => {
            writeln!(out, "{}: {e}", solution.display())?;
            return Ok(EXIT_PARSE_ERROR);
        }
    };
    let assignment = match sol.assignment(inst.num_vars) {
        Ok(a) => a,
        Err(var) => {
            writeln!(out, "solution does not assign x{var}")?;
            return Ok(1);
        }
    };
    let report = verify(&inst, &assignment);
    writeln!(out, "feasible={}", report.feasible)?;
    writeln!(out, "objective={}", report.objective)?;
    if !report.violated.is_empty() {
        let ids: Vec<String> = report.violated.iter().map(|c| c.to_string()).collect();
        writeln!(out, "violated={}", ids.join(","))?;
    }
    let cost_ok = match sol.last_cost() {
        Some(c) if c != report.objective => {
            writeln!(out, "reported cost {c} differs from objective {}", report.objective)?;
            false
        }
        _ => true,
    };
    Ok(if report.feasible && cost_ok { 0 } else { 1 })
}

fn run_gen(args: &GenArgs) -> io::Result<i32> {
    let (_, text) = generate_random_instance(&GenParams {
        num_vars: args.vars,
        num_constraints: args.constraints,
        terms_min: args.terms_min,
        terms_max: args.terms_max,
        coeff_min: args.coeff_min,
        coeff_max: args.coeff_max,
        objective_density: args.objective_density,
        planted: args.planted,
        seed: args.seed,
    });
    match &args.out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(0)
}

fn run_bench_cmd(args: &BenchArgs) -> io::Result<i32> {
    let mut configs = Vec::new();
    for name in args.configs.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some(preset) = RunConfig::preset(name) else {
            eprintln!("unknown config '{name}' (expected decils, alt1, alt2 or lspbo)");
            return Ok(EXIT_PARSE_ERROR);
        };
        let mut cfg = match args.search.to_config(name) {
            Ok(c) => c,
            Err(msg) => {
                eprintln!("error: {msg}");
                return Ok(EXIT_PARSE_ERROR);
            }
        };
        cfg.no_decimation |= preset.no_decimation;
        cfg.no_care |= preset.no_care;
        configs.push(cfg);
    }
    let options = BenchOptions {
        seeds: args.seeds,
        base_seed: args.seed,
        jobs: args.jobs.max(1),
        execution: Execution::default(),
    };
    let report = if args.in_process {
        run_bench(&args.dir, &configs, &options, &InProcessExecutor)?
    } else {
        let exe = std::env::current_exe()?;
        run_bench(&args.dir, &configs, &options, &ProcessExecutor::new(exe))?
    };
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("runs.csv"), report.runs_csv())?;
        std::fs::write(dir.join("summary.csv"), report.summary_csv())?;
    }
    print!("{}", report.text_table());
    Ok(0)
}

pub fn run(cli: Cli) -> io::Result<i32> {
    match cli.command {
        Command::Solve(args) => {
            let stdout = io::stdout();
            let stderr = io::stderr();
            run_solve(&args, &mut stdout.lock(), &mut stderr.lock())
        }
        Command::Verify { instance, solution } => {
            run_verify(&instance, &solution, &mut io::stdout().lock())
        }
        Command::Gen(args) => run_gen(&args),
        Command::Bench(args) => run_bench_cmd(&args),
    }
}
