//! Monte Carlo sweeps comparing the ALPF solver, the water-filling oracle
//! and the fixed benchmark allocation.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::alpf::{self, AlpfOptions};
use crate::channel::{generate_seeded, trial_seed};
use crate::config::{self, parse_list, parse_value, Entry};
use crate::error::{Error, Result};
use crate::oracle;
use crate::scenario::Scenario;
use crate::tsr::{Allocation, SystemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Alpf,
    Oracle,
    Benchmark,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Alpf, Solver::Oracle, Solver::Benchmark];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Alpf => "alpf",
            Solver::Oracle => "oracle",
            Solver::Benchmark => "benchmark",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid("solvers", format!("unknown solver `{s}`")))
    }
}

/// Which scenario parameter varies across the sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    None,
    Phi(Vec<f64>),
    PSource(Vec<f64>),
    /// Sets `n_s = n_r = n_d`.
    Antennas(Vec<usize>),
    KSubcarriers(Vec<usize>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::None => "none",
            Sweep::Phi(_) => "phi",
            Sweep::PSource(_) => "p_source",
            Sweep::Antennas(_) => "antennas",
            Sweep::KSubcarriers(_) => "k_subcarriers",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::None => 1,
            Sweep::Phi(v) | Sweep::PSource(v) => v.len(),
            Sweep::Antennas(v) | Sweep::KSubcarriers(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Swept value at `idx` as a number, for reporting.
    pub fn value(&self, idx: usize) -> f64 {
        match self {
            Sweep::None => 0.0,
            Sweep::Phi(v) | Sweep::PSource(v) => v[idx],
            Sweep::Antennas(v) | Sweep::KSubcarriers(v) => v[idx] as f64,
        }
    }

    /// `base` with the swept parameter set to its `idx`-th value.
    pub fn apply(&self, base: &Scenario, idx: usize) -> Scenario {
        let mut s = base.clone();
        match self {
            Sweep::None => {}
            Sweep::Phi(v) => s.phi = v[idx],
            Sweep::PSource(v) => s.p_source = v[idx],
            Sweep::Antennas(v) => {
                s.n_s = v[idx];
                s.n_r = v[idx];
                s.n_d = v[idx];
            }
            Sweep::KSubcarriers(v) => s.k_subcarriers = v[idx],
        }
        s
    }

    fn parse(kind: &str, values: Option<&str>) -> Result<Self> {
        let need = || values.ok_or_else(|| Error::invalid("sweep_values", format!("required for sweep `{kind}`")));
        Ok(match kind {
            "none" => Sweep::None,
            "phi" => Sweep::Phi(parse_list("sweep_values", need()?)?),
            "p_source" => Sweep::PSource(parse_list("sweep_values", need()?)?),
            "antennas" => Sweep::Antennas(parse_list("sweep_values", need()?)?),
            "k_subcarriers" => Sweep::KSubcarriers(parse_list("sweep_values", need()?)?),
            other => return Err(Error::invalid("sweep", format!("unknown sweep `{other}`"))),
        })
    }

    fn values_string(&self) -> String {
        (0..self.len()).map(|i| self.value(i).to_string()).collect::<Vec<_>>().join(",")
    }
}

/// A full experiment description, loadable from a `key = value` file.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub sweep: Sweep,
    pub trials: usize,
    pub solvers: Vec<Solver>,
    pub output_path: Option<PathBuf>,
    pub master_seed: u64,
    /// Largest tolerated fraction of non-converged ALPF runs.
    pub max_nonconverged: f64,
    pub alpf: AlpfOptions,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            sweep: Sweep::None,
            trials: 200,
            solvers: vec![Solver::Alpf, Solver::Benchmark],
            output_path: None,
            master_seed: 0,
            max_nonconverged: 0.05,
            alpf: AlpfOptions::default(),
        }
    }
}

pub const SPEC_KEYS: &[&str] = &[
    "sweep",
    "sweep_values",
    "trials",
    "solvers",
    "output",
    "master_seed",
    "max_nonconverged",
    "eps",
    "max_outer_iters",
    "max_inner_iters",
];

impl ExperimentSpec {
    pub fn from_entries(entries: &[Entry], origin: &str) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        let get = |k: &str| entries.iter().find(|e| e.key == k).map(|e| e.value.as_str());
        for e in entries {
            if SPEC_KEYS.contains(&e.key.as_str()) {
                continue;
            }
            if !spec.scenario.set(&e.key, &e.value)? {
                return Err(Error::Config {
                    path: origin.to_string(),
                    line: e.line,
                    reason: format!("unknown key `{}`", e.key),
                });
            }
        }
        spec.sweep = Sweep::parse(get("sweep").unwrap_or("none"), get("sweep_values"))?;
        if let Some(v) = get("trials") {
            spec.trials = parse_value("trials", v)?;
        }
        if let Some(v) = get("solvers") {
            spec.solvers = parse_list::<String>("solvers", v)?
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()?;
        }
        spec.output_path = get("output").map(PathBuf::from);
        if let Some(v) = get("master_seed") {
            spec.master_seed = parse_value("master_seed", v)?;
        }
        if let Some(v) = get("max_nonconverged") {
            spec.max_nonconverged = parse_value("max_nonconverged", v)?;
        }
        if let Some(v) = get("eps") {
            spec.alpf.eps = parse_value("eps", v)?;
        }
        if let Some(v) = get("max_outer_iters") {
            spec.alpf.max_outer_iters = parse_value("max_outer_iters", v)?;
        }
        if let Some(v) = get("max_inner_iters") {
            spec.alpf.max_inner_iters = parse_value("max_inner_iters", v)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        Self::from_entries(&config::parse_str(text, "<string>")?, "<string>")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let entries = config::parse_file(path)?;
        Self::from_entries(&entries, &path.display().to_string())
    }

    /// Check everything that can be checked without running a trial.
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.solvers.is_empty() {
            return Err(Error::invalid("solvers", "at least one solver is required"));
        }
        if self.sweep.is_empty() {
            return Err(Error::invalid("sweep_values", "list is empty"));
        }
        for i in 0..self.sweep.len() {
            self.sweep
                .apply(&self.scenario, i)
                .validate()
                .map_err(|e| Error::invalid("sweep_values", format!("value {}: {e}", self.sweep.value(i))))?;
        }
        if !(0.0..=1.0).contains(&self.max_nonconverged) {
            return Err(Error::invalid("max_nonconverged", "must lie in [0, 1]"));
        }
        if !(self.alpf.eps > 0.0) {
            return Err(Error::invalid("eps", "must be positive"));
        }
        if self.alpf.max_outer_iters == 0 || self.alpf.max_inner_iters == 0 {
            return Err(Error::invalid("max_outer_iters", "iteration caps must be at least 1"));
        }
        Ok(())
    }

    /// Render as a spec file that [`ExperimentSpec::from_config_str`] accepts.
    pub fn to_config_string(&self) -> String {
        let mut out = self.scenario.to_config_string();
        out.push_str(&format!("sweep = {}\n", self.sweep.name()));
        if self.sweep != Sweep::None {
            out.push_str(&format!("sweep_values = {}\n", self.sweep.values_string()));
        }
        let solvers: Vec<_> = self.solvers.iter().map(|s| s.name()).collect();
        out.push_str(&format!(
            "trials = {}\nsolvers = {}\nmaster_seed = {}\nmax_nonconverged = {}\neps = {}\n\
             max_outer_iters = {}\nmax_inner_iters = {}\n",
            self.trials,
            solvers.join(","),
            self.master_seed,
            self.max_nonconverged,
            self.alpf.eps,
            self.alpf.max_outer_iters,
            self.alpf.max_inner_iters
        ));
        if let Some(p) = &self.output_path {
            out.push_str(&format!("output = {}\n", p.display()));
        }
        out
    }
}

/// One solver's result on one realization.
#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub solver: Solver,
    pub allocation: Allocation,
    /// End-to-end rate in bit/s.
    pub rate: f64,
    /// `(hop-1 SNR, hop-2 SNR)` for every pair.
    pub pair_snrs: Vec<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
    /// `||C||_inf` of the final ALPF iterate; zero for the other solvers.
    pub final_violation: f64,
}

/// Run one solver on a prepared instance.
pub fn run_solver(inst: &SystemInstance, solver: Solver, options: &AlpfOptions) -> Result<SolverOutcome> {
    let (allocation, iterations, converged, final_violation) = match solver {
        Solver::Alpf => {
            let (alloc, report) = alpf::optimize_instance(inst, options)?;
            (alloc, report.iterations, report.converged, report.final_violation)
        }
        Solver::Oracle => {
            let sol = oracle::solve(&inst.problem()?, oracle::DEFAULT_GRID_POINTS, oracle::DEFAULT_REFINE_TOL);
            let alloc = inst.allocation_from_pairs(sol.alpha_star, &sol.mu_star, &sol.mu_bar_star);
            (alloc, 0, true, 0.0)
        }
        Solver::Benchmark => (inst.benchmark()?, 0, true, 0.0),
    };
    let rate = inst.rate(&allocation)?;
    let pair_snrs = inst.pair_snrs(&allocation)?;
    Ok(SolverOutcome {
        solver,
        allocation,
        rate,
        pair_snrs,
        iterations,
        converged,
        final_violation,
    })
}

/// All solver outcomes of one Monte Carlo trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub sweep_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub outcomes: Vec<SolverOutcome>,
}

impl TrialRecord {
    pub fn outcome(&self, solver: Solver) -> Option<&SolverOutcome> {
        self.outcomes.iter().find(|o| o.solver == solver)
    }
}

/// Draw the realization for `seed` and run every solver in `solvers`.
pub fn run_trial(scenario: &Scenario, seed: u64, solvers: &[Solver], options: &AlpfOptions) -> Result<Vec<SolverOutcome>> {
    let real = generate_seeded(scenario, seed)?;
    let inst = SystemInstance::new(&real, scenario)?;
    solvers.iter().map(|&s| run_solver(&inst, s, options)).collect()
}

/// Aggregate over the trials of one sweep value and solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub solver: Solver,
    pub mean_rate: f64,
    pub std_error: f64,
    pub mean_alpha: f64,
    pub mean_iterations: f64,
    pub converged_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub sweep: String,
    pub rows: Vec<SweepRow>,
    /// Per-trial details in (sweep index, trial) order.
    pub trials: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn rows_for(&self, solver: Solver) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.solver == solver)
    }

    /// Fraction of ALPF runs that did not converge, or 0 without ALPF runs.
    pub fn nonconverged_fraction(&self) -> f64 {
        let runs: Vec<bool> = self
            .trials
            .iter()
            .filter_map(|t| t.outcome(Solver::Alpf).map(|o| o.converged))
            .collect();
        if runs.is_empty() {
            0.0
        } else {
            runs.iter().filter(|c| !**c).count() as f64 / runs.len() as f64
        }
    }
}

fn check_writable(path: &Path) -> Result<()> {
    OpenOptions::new()
        .append(true)
        .create(true)
        .open(path)
        .map(|_| ())
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run every (sweep value, trial) pair in parallel and aggregate in index
/// order, so the result does not depend on scheduling.
pub fn run(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    if let Some(p) = &spec.output_path {
        check_writable(p)?;
    }
    let jobs: Vec<(usize, usize)> = (0..spec.sweep.len())
        .flat_map(|i| (0..spec.trials).map(move |t| (i, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(i, t)| {
            let scenario = spec.sweep.apply(&spec.scenario, i);
            let seed = trial_seed(spec.master_seed, i as u64, t as u64);
            let outcomes = run_trial(&scenario, seed, &spec.solvers, &spec.alpf)?;
            Ok(TrialRecord {
                sweep_index: i,
                trial: t,
                seed,
                outcomes,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for i in 0..spec.sweep.len() {
        let block = &trials[i * spec.trials..(i + 1) * spec.trials];
        for &solver in &spec.solvers {
            let outs: Vec<&SolverOutcome> = block.iter().filter_map(|t| t.outcome(solver)).collect();
            let rates: Vec<f64> = outs.iter().map(|o| o.rate).collect();
            let (mean_rate, std_error) = mean_and_stderr(&rates);
            let n = outs.len() as f64;
            rows.push(SweepRow {
                value: spec.sweep.value(i),
                solver,
                mean_rate,
                std_error,
                mean_alpha: outs.iter().map(|o| o.allocation.alpha).sum::<f64>() / n,
                mean_iterations: outs.iter().map(|o| o.iterations as f64).sum::<f64>() / n,
                converged_fraction: outs.iter().filter(|o| o.converged).count() as f64 / n,
            });
        }
    }
    Ok(SweepResult {
        sweep: spec.sweep.name().to_string(),
        rows,
        trials,
    })
}

pub const CSV_HEADER: [&str; 8] = [
    "sweep",
    "value",
    "solver",
    "mean_rate_bps",
    "std_error",
    "mean_alpha",
    "mean_iterations",
    "converged_fraction",
];

/// Write one header line plus one line per row to `out`. Floats use the
/// shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            result.sweep.clone(),
            r.value.to_string(),
            r.solver.to_string(),
            r.mean_rate.to_string(),
            r.std_error.to_string(),
            r.mean_alpha.to_string(),
            r.mean_iterations.to_string(),
            r.converged_fraction.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// [`write_csv`] into a file.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    if result.rows.is_empty() {
        return Err(Error::EmptyResult);
    }
    let io_err = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv(result, BufWriter::new(file)).map_err(|e| io_err(e.into()))
}

/// Outcome of the built-in oracle-vs-ALPF check.
#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub trials: usize,
    pub converged: usize,
    /// Largest `(oracle - alpf) / oracle` over converged runs.
    pub worst_oracle_gap: f64,
    /// Largest `benchmark - alpf` in bit/s over converged runs.
    pub worst_benchmark_excess: f64,
    pub failures: Vec<String>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compare ALPF against the oracle and the benchmark on `trials` random
/// realizations cycling through small antenna, subcarrier and power settings.
pub fn selftest(trials: usize, master_seed: u64) -> Result<SelftestReport> {
    let options = AlpfOptions::default();
    let results = (0..trials)
        .into_par_iter()
        .map(|t| {
            let scenario = Scenario {
                k_subcarriers: 1 + t % 2,
                n_s: 1 + t % 3,
                n_r: 1 + t % 3,
                n_d: 1 + t % 3,
                p_source: [0.1, 1.0, 10.0][t / 6 % 3],
                ..Scenario::default()
            };
            let seed = trial_seed(master_seed, 0, t as u64);
            run_trial(&scenario, seed, &Solver::ALL, &options).map(|o| (t, o))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = SelftestReport {
        trials,
        converged: 0,
        worst_oracle_gap: 0.0,
        worst_benchmark_excess: f64::NEG_INFINITY,
        failures: Vec::new(),
    };
    for (t, outs) in results {
        let [a, o, b] = [&outs[0], &outs[1], &outs[2]];
        if !a.converged {
            continue;
        }
        report.converged += 1;
        let gap = (o.rate - a.rate) / o.rate;
        report.worst_oracle_gap = report.worst_oracle_gap.max(gap);
        report.worst_benchmark_excess = report.worst_benchmark_excess.max(b.rate - a.rate);
        if gap > 0.01 {
            report.failures.push(format!("trial {t}: alpf {} is {:.2}% below oracle {}", a.rate, 100.0 * gap, o.rate));
        }
        if a.rate < b.rate - 1e-9 {
            report.failures.push(format!("trial {t}: alpf {} below benchmark {}", a.rate, b.rate));
        }
        if a.final_violation > options.eps {
            report.failures.push(format!("trial {t}: violation {:e}", a.final_violation));
        }
    }
    if (report.converged as f64) < 0.95 * trials as f64 {
        report
            .failures
            .push(format!("only {}/{} runs converged", report.converged, trials));
    }
    Ok(report)
}
