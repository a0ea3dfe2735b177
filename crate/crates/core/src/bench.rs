//! Multi-seed benchmark harness.
//!
//! Every (instance, config, seed) triple is one run. Runs are aggregated per
//! (instance, config) into minimum, median and maximum best cost over the
//! seeds, and per instance into wins: a config wins an instance when its best
//! cost over all seeds is the best of all configs. Tied configs all get the
//! win.
//!
//! Runs CSV columns, in order:
//! `instance,config,seed,status,best_cost,time_to_first_feasible_s,flips,local_optima`.
//! Empty `best_cost` / `time_to_first_feasible_s` cells mean no feasible
//! solution; empty `flips` / `local_optima` mean the run produced no stats.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::engine::{solve, SolverParams};
use crate::opb::{parse_opb, parse_solution, SolveStatus};
use crate::par::{self, Execution};

/// Extra wall time a child gets past its cutoff before it is killed.
pub const KILL_GRACE: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub cutoff: f64,
    pub p: f64,
    pub no_decimation: bool,
    pub no_care: bool,
    pub bms: Option<usize>,
    pub gamma: i64,
    pub hard_inc: i64,
    pub obj_inc: i64,
    pub max_flips: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            name: "decils".into(),
            cutoff: 300.0,
            p: 0.5,
            no_decimation: false,
            no_care: false,
            bms: None,
            gamma: 1000,
            hard_inc: 1,
            obj_inc: 1,
            max_flips: None,
        }
    }
}

impl RunConfig {
    /// Named ablation presets: `decils` (both components), `alt1` (no
    /// decimation), `alt2` (no care), `lspbo` (neither).
    pub fn preset(name: &str) -> Option<RunConfig> {
        let (no_decimation, no_care) = match name {
            "decils" | "default" => (false, false),
            "alt1" => (true, false),
            "alt2" => (false, true),
            "lspbo" => (true, true),
            _ => return None,
        };
        Some(RunConfig {
            name: name.into(),
            no_decimation,
            no_care,
            ..RunConfig::default()
        })
    }

    /// Effective `p`: `--no-care` pins it to 1.
    pub fn effective_p(&self) -> f64 {
        if self.no_care {
            1.0
        } else {
            self.p
        }
    }

    pub fn solver_params(&self, seed: u64) -> SolverParams {
        SolverParams {
            cutoff: Duration::from_secs_f64(self.cutoff.max(0.0)),
            seed,
            p: self.effective_p(),
            decimation: !self.no_decimation,
            bms: self.bms,
            hard_weight_inc: self.hard_inc,
            objective_weight_inc: self.obj_inc,
            objective_weight_cap: self.gamma,
            max_flips: self.max_flips,
        }
    }

    /// `solve` arguments reproducing this config.
    pub fn cli_args(&self, seed: u64) -> Vec<String> {
        let mut args = vec![
            "--cutoff".to_string(),
            self.cutoff.to_string(),
            "--seed".into(),
            seed.to_string(),
            "--p".into(),
            self.p.to_string(),
            "--gamma".into(),
            self.gamma.to_string(),
            "--hard-inc".into(),
            self.hard_inc.to_string(),
            "--obj-inc".into(),
            self.obj_inc.to_string(),
        ];
        if self.no_decimation {
            args.push("--no-decimation".into());
        }
        if self.no_care {
            args.push("--no-care".into());
        }
        if let Some(k) = self.bms {
            args.extend(["--bms".into(), k.to_string()]);
        }
        if let Some(m) = self.max_flips {
            args.extend(["--max-flips".into(), m.to_string()]);
        }
        args
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub seed: u64,
    /// `SATISFIABLE`, `UNKNOWN`, `UNSATISFIABLE` or `ERROR`.
    pub status: String,
    pub best_cost: Option<i64>,
    pub time_to_first_feasible: Option<f64>,
    pub flips: Option<u64>,
    pub local_optima: Option<u64>,
}

impl RunRecord {
    fn error(instance: &str, config: &str, seed: u64) -> Self {
        RunRecord {
            instance: instance.into(),
            config: config.into(),
            seed,
            status: "ERROR".into(),
            best_cost: None,
            time_to_first_feasible: None,
            flips: None,
            local_optima: None,
        }
    }
}

/// Runs one solver invocation.
pub trait Executor: Sync {
    fn run(&self, instance: &Path, config: &RunConfig, seed: u64) -> RunRecord;
}

fn instance_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Runs each solve as a child process of `exe solve ...`.
pub struct ProcessExecutor {
    pub exe: PathBuf,
    pub grace: Duration,
}

impl ProcessExecutor {
    pub fn new(exe: impl Into<PathBuf>) -> Self {
        ProcessExecutor {
            exe: exe.into(),
            grace: KILL_GRACE,
        }
    }
}

/// Parses `key=value` statistics lines.
fn stat<T: std::str::FromStr>(stderr: &str, key: &str) -> Option<T> {
    stderr.lines().find_map(|l| {
        l.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .and_then(|v| v.trim().parse().ok())
    })
}

impl Executor for ProcessExecutor {
    fn run(&self, instance: &Path, config: &RunConfig, seed: u64) -> RunRecord {
        let name = instance_name(instance);
        let fail = || RunRecord::error(&name, &config.name, seed);
        let mut child = match Command::new(&self.exe)
            .arg("solve")
            .arg(instance)
            .args(config.cli_args(seed))
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
        {
            Ok(c) => c,
            Err(e) => {
                log::error!("cannot start {}: {e}", self.exe.display());
                return fail();
            }
        };
        let mut out_pipe = child.stdout.take().unwrap();
        let mut err_pipe = child.stderr.take().unwrap();
        let out_thread = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = out_pipe.read_to_string(&mut s);
            s
        });
        let err_thread = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = err_pipe.read_to_string(&mut s);
            s
        });
        let deadline = Instant::now() + Duration::from_secs_f64(config.cutoff.max(0.0)) + self.grace;
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) if Instant::now() >= deadline => {
                    log::warn!("{name} seed {seed}: killed after cutoff + grace");
                    let _ = child.kill();
                    let _ = child.wait();
                    break;
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(5)),
                Err(_) => return fail(),
            }
        }
        let stdout = out_thread.join().unwrap_or_default();
        let stderr = err_thread.join().unwrap_or_default();
        let Ok(sol) = parse_solution(stdout.as_bytes()) else {
            return fail();
        };
        let status = sol.status.clone().unwrap_or_else(|| "UNKNOWN".into());
        let best_cost = if status == "SATISFIABLE" {
            sol.last_cost().or_else(|| stat(&stderr, "best_cost"))
        } else {
            None
        };
        RunRecord {
            instance: name,
            config: config.name.clone(),
            seed,
            status,
            best_cost,
            time_to_first_feasible: stat(&stderr, "time_to_first_feasible_s"),
            flips: stat(&stderr, "flips"),
            local_optima: stat(&stderr, "local_optima"),
        }
    }
}

/// Runs each solve on the calling thread.
pub struct InProcessExecutor;

impl Executor for InProcessExecutor {
    fn run(&self, instance: &Path, config: &RunConfig, seed: u64) -> RunRecord {
        let name = instance_name(instance);
        let parsed = std::fs::File::open(instance)
            .map_err(crate::error::ParseError::from)
            .and_then(parse_opb);
        let inst = match parsed {
            Ok(i) => i,
            Err(e) if e.is_trivially_unsat() => {
                return RunRecord {
                    status: SolveStatus::Unsatisfiable.as_str().into(),
                    ..RunRecord::error(&name, &config.name, seed)
                }
            }
            Err(_) => return RunRecord::error(&name, &config.name, seed),
        };
        let r = solve(&inst, &config.solver_params(seed), |_| {});
        RunRecord {
            instance: name,
            config: config.name.clone(),
            seed,
            status: r.status.as_str().into(),
            best_cost: r.best.as_ref().map(|b| b.1),
            time_to_first_feasible: r.stats.time_to_first_feasible.map(|d| d.as_secs_f64()),
            flips: Some(r.stats.flips),
            local_optima: Some(r.stats.local_optima),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub seeds: u64,
    pub base_seed: u64,
    pub jobs: usize,
    pub execution: Execution,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            seeds: 30,
            base_seed: 1,
            jobs: 1,
            execution: Execution::default(),
        }
    }
}

/// Order statistics of one (instance, config) cell. `None` marks N/A.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub instance: String,
    pub config: String,
    pub runs: usize,
    pub min: Option<i64>,
    pub median: Option<i64>,
    pub max: Option<i64>,
    pub ttff_min: Option<f64>,
    pub ttff_median: Option<f64>,
    pub ttff_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<RunRecord>,
    pub cells: Vec<CellSummary>,
    /// Config name and number of instances won.
    pub wins: Vec<(String, usize)>,
}

/// Lower median of a sorted slice.
fn lower_median<T: Copy>(sorted: &[T]) -> Option<T> {
    (!sorted.is_empty()).then(|| sorted[(sorted.len() - 1) / 2])
}

/// Min, median and max cost over all runs, infeasible runs counting as
/// worse than any cost.
pub fn order_stats(costs: &[Option<i64>]) -> (Option<i64>, Option<i64>, Option<i64>) {
    let mut keyed: Vec<(bool, i64)> = costs.iter().map(|c| (c.is_none(), c.unwrap_or(0))).collect();
    keyed.sort_unstable();
    let pick = |k: Option<(bool, i64)>| k.and_then(|(na, v)| (!na).then_some(v));
    (
        pick(keyed.first().copied()),
        pick(lower_median(&keyed)),
        pick(keyed.last().copied()),
    )
}

fn summarize(instance: &str, config: &str, records: &[&RunRecord]) -> CellSummary {
    let costs: Vec<Option<i64>> = records.iter().map(|r| r.best_cost).collect();
    let (min, median, max) = order_stats(&costs);
    let mut ttff: Vec<f64> = records.iter().filter_map(|r| r.time_to_first_feasible).collect();
    ttff.sort_by(|a, b| a.total_cmp(b));
    CellSummary {
        instance: instance.into(),
        config: config.into(),
        runs: records.len(),
        min,
        median,
        max,
        ttff_min: ttff.first().copied(),
        ttff_median: lower_median(&ttff),
        ttff_max: ttff.last().copied(),
    }
}

/// Wins per config. `best[i][k]` is config `k`'s best cost on instance `i`.
pub fn count_wins(best: &[Vec<Option<i64>>], num_configs: usize) -> Vec<usize> {
    let mut wins = vec![0; num_configs];
    for row in best {
        let Some(top) = row.iter().flatten().min().copied() else {
            continue;
        };
        for (k, b) in row.iter().enumerate() {
            if *b == Some(top) {
                wins[k] += 1;
            }
        }
    }
    wins
}

/// Aggregates finished runs into a report.
pub fn aggregate(
    records: Vec<RunRecord>,
    instances: &[String],
    configs: &[RunConfig],
) -> BenchReport {
    let mut cells = Vec::new();
    let mut best = Vec::new();
    for inst in instances {
        let mut row = Vec::new();
        for cfg in configs {
            let rs: Vec<&RunRecord> = records
                .iter()
                .filter(|r| &r.instance == inst && r.config == cfg.name)
                .collect();
            let cell = summarize(inst, &cfg.name, &rs);
            row.push(cell.min);
            cells.push(cell);
        }
        best.push(row);
    }
    let wins = count_wins(&best, configs.len())
        .into_iter()
        .zip(configs)
        .map(|(w, c)| (c.name.clone(), w))
        .collect();
    BenchReport {
        records,
        cells,
        wins,
    }
}

/// Runs `seeds` seeds of every config on every `.opb` file in `dir`.
pub fn run_bench(
    dir: &Path,
    configs: &[RunConfig],
    options: &BenchOptions,
    executor: &dyn Executor,
) -> std::io::Result<BenchReport> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "opb"))
        .collect();
    files.sort();
    let mut jobs = Vec::new();
    for f in &files {
        for cfg in configs {
            for k in 0..options.seeds {
                jobs.push((f.clone(), cfg.clone(), options.base_seed + k));
            }
        }
    }
    let records = par::map_jobs(options.execution, options.jobs, &jobs, |(f, cfg, seed)| {
        executor.run(f, cfg, *seed)
    });
    let names: Vec<String> = files.iter().map(|f| instance_name(f)).collect();
    Ok(aggregate(records, &names, configs))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchReport {
    pub fn runs_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record([
            "instance",
            "config",
            "seed",
            "status",
            "best_cost",
            "time_to_first_feasible_s",
            "flips",
            "local_optima",
        ]);
        for r in &self.records {
            let _ = w.write_record([
                r.instance.clone(),
                r.config.clone(),
                r.seed.to_string(),
                r.status.clone(),
                opt(r.best_cost),
                opt(r.time_to_first_feasible),
                opt(r.flips),
                opt(r.local_optima),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }

    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record([
            "instance",
            "config",
            "runs",
            "min",
            "median",
            "max",
            "ttff_min_s",
            "ttff_median_s",
            "ttff_max_s",
        ]);
        for c in &self.cells {
            let na = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_else(|| "N/A".into());
            let _ = w.write_record([
                c.instance.clone(),
                c.config.clone(),
                c.runs.to_string(),
                na(c.min),
                na(c.median),
                na(c.max),
                opt(c.ttff_min),
                opt(c.ttff_median),
                opt(c.ttff_max),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }

    /// `min [+median-min, +max-min]`, or `N/A`.
    pub fn cell_text(c: &CellSummary) -> String {
        let Some(min) = c.min else {
            return "N/A".into();
        };
        let delta = |v: Option<i64>| v.map(|x| format!("+{}", x - min)).unwrap_or_else(|| "N/A".into());
        format!("{min} [{}, {}]", delta(c.median), delta(c.max))
    }

    pub fn text_table(&self) -> String {
        let configs: Vec<&str> = self.wins.iter().map(|(c, _)| c.as_str()).collect();
        let mut instances: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !instances.contains(&c.instance.as_str()) {
                instances.push(&c.instance);
            }
        }
        let mut rows: Vec<Vec<String>> = vec![std::iter::once("instance".to_string())
            .chain(configs.iter().map(|s| s.to_string()))
            .collect()];
        for inst in &instances {
            let mut row = vec![inst.to_string()];
            for cfg in &configs {
                let cell = self.cells.iter().find(|c| c.instance == *inst && c.config == *cfg);
                row.push(cell.map(Self::cell_text).unwrap_or_else(|| "N/A".into()));
            }
            rows.push(row);
        }
        rows.push(
            std::iter::once("#win".to_string())
                .chain(self.wins.iter().map(|(_, w)| w.to_string()))
                .collect(),
        );
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|k| rows.iter().map(|r| r[k].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (s, w))| if k == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        out.push_str("wins: a config wins an instance when its best cost over all seeds equals the best of all configs; ties credit every tied config\n");
        out
    }
}
