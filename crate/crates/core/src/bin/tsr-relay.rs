use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tsr_relay::alpf::{self, AlpfOptions};
use tsr_relay::channel::generate_seeded;
use tsr_relay::experiment::{self, ExperimentSpec, Solver};
use tsr_relay::tsr::SystemInstance;
use tsr_relay::{Error, Scenario};

#[derive(Parser)]
#[command(name = "tsr-relay", version, about = "Energy-harvesting relay rate optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep described by a spec file and write CSV.
    Run {
        spec: PathBuf,
        /// Overrides the spec's `output`; without either, CSV goes to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Optimize one channel realization and print the allocation.
    Single {
        /// Scenario file (`key = value`); defaults are used otherwise.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Overrides the scenario's seed.
        #[arg(short, long)]
        seed: Option<u64>,
    },
    /// Check ALPF against the oracle and the benchmark on random instances.
    Selftest {
        #[arg(short, long, default_value_t = 50)]
        trials: usize,
        #[arg(short, long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Invalid(Error),
    Unmet(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

fn run_spec(spec_path: PathBuf, output: Option<PathBuf>) -> Result<(), Failure> {
    let mut spec = ExperimentSpec::from_file(&spec_path)?;
    if output.is_some() {
        spec.output_path = output;
    }
    let result = experiment::run(&spec)?;
    match &spec.output_path {
        Some(p) => {
            experiment::emit_csv(&result, p)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), p.display());
        }
        None => {
            if result.rows.is_empty() {
                return Err(Error::EmptyResult.into());
            }
            experiment::write_csv(&result, std::io::stdout().lock()).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e.into(),
            })?;
        }
    }
    let bad = result.nonconverged_fraction();
    if bad > spec.max_nonconverged {
        return Err(Failure::Unmet(format!(
            "{:.1}% of ALPF runs did not converge (limit {:.1}%)",
            100.0 * bad,
            100.0 * spec.max_nonconverged
        )));
    }
    Ok(())
}

fn single(config: Option<PathBuf>, seed: Option<u64>) -> Result<(), Failure> {
    let mut scenario = match config {
        Some(p) => Scenario::from_file(&p)?,
        None => Scenario::default(),
    };
    if let Some(s) = seed {
        scenario.seed = s;
    }
    let real = generate_seeded(&scenario, scenario.seed)?;
    let inst = SystemInstance::new(&real, &scenario)?;
    let (alloc, report) = alpf::optimize_instance(&inst, &AlpfOptions::default())?;
    let oracle = experiment::run_solver(&inst, Solver::Oracle, &AlpfOptions::default())?;
    let bench = experiment::run_solver(&inst, Solver::Benchmark, &AlpfOptions::default())?;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");

    println!("# scenario");
    print!("{}", scenario.to_config_string());
    println!("# allocation");
    println!("alpha = {}", alloc.alpha);
    println!("mu = {}", join(&alloc.mu));
    println!("mu_bar = {}", join(&alloc.mu_bar));
    println!(
        "pairing = {}",
        alloc.pairing.as_slice().iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
    );
    println!("relay_power_w = {}", inst.plan.relay_power(alloc.alpha)?);
    println!("energy_subcarrier = {}", inst.plan.chosen_subcarrier);
    println!("# convergence");
    println!("{report}");
    println!("# comparison");
    println!("rate_alpf_bps = {}", inst.rate(&alloc)?);
    println!("rate_oracle_bps = {}", oracle.rate);
    println!("rate_benchmark_bps = {}", bench.rate);
    if !report.converged {
        return Err(Failure::Unmet("ALPF did not converge".into()));
    }
    Ok(())
}

fn selftest(trials: usize, seed: u64) -> Result<(), Failure> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1").into());
    }
    let r = experiment::selftest(trials, seed)?;
    println!("trials = {}", r.trials);
    println!("converged = {}", r.converged);
    println!("worst_oracle_gap = {:e}", r.worst_oracle_gap);
    println!("worst_benchmark_excess_bps = {:e}", r.worst_benchmark_excess);
    for f in &r.failures {
        println!("failure: {f}");
    }
    if r.passed() {
        println!("selftest PASS");
        Ok(())
    } else {
        println!("selftest FAIL");
        Err(Failure::Unmet(format!("{} check(s) failed", r.failures.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { spec, output } => run_spec(spec, output),
        Command::Single { config, seed } => single(config, seed),
        Command::Selftest { trials, seed } => selftest(trials, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Unmet(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
