use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::error;

use pvlab::detection::{error_rates, plugin_rho, ErrorRateReport, TestKind, DEFAULT_C1};
use pvlab::harness::{run_sweep_with, write_records_csv, SweepConfig, SweepOptions};
use pvlab::io::{write_instance_csv, write_vector_csv};
use pvlab::lowdeg::advantage;
use pvlab::model_gen::{generate_instance, InstanceParams, Model};
use pvlab::spectral::{estimate_direction_with, recover, score};
use pvlab::{PvError, SeedSpec};

#[derive(Parser)]
#[command(name = "pvlab", version, about = "Planted sparse vectors in random subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Gaussian,
    Orth,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gaussian => Model::Gaussian,
            ModelArg::Orth => Model::Orthonormal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Spectral,
    L1l2,
    Reduction,
}

impl From<TestArg> for TestKind {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Spectral => TestKind::SpectralNorm,
            TestArg::L1l2 | TestArg::Reduction => TestKind::L1L2,
        }
    }
}

#[derive(clap::Args)]
struct InstanceArgs {
    #[arg(long = "N")]
    ambient_dim: usize,
    #[arg(long = "n")]
    subspace_dim: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    model: ModelArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

impl InstanceArgs {
    fn params(&self) -> InstanceParams {
        InstanceParams::new(
            self.ambient_dim,
            self.subspace_dim,
            self.rho,
            self.model.into(),
            SeedSpec::new(self.seed, self.stream),
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write its observed basis as CSV.
    Gen {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the spectral estimator on a generated instance.
    Estimate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Drop the centering term from the statistic.
        #[arg(long)]
        uncentered: bool,
        /// Write the raw estimate as CSV.
        #[arg(long)]
        dump_raw: Option<PathBuf>,
    },
    /// Estimate type I and type II error rates of a detection test.
    Detect {
        #[arg(long = "N")]
        ambient_dim: usize,
        #[arg(long = "n")]
        subspace_dim: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_C1)]
        c1: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, value_enum, default_value = "spectral")]
        test: TestArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append the report row to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also print the plug-in sparsity estimate from one planted draw.
        #[arg(long)]
        plugin_rho: bool,
    },
    /// Compute the low-degree advantage.
    Advantage {
        #[arg(long = "N")]
        ambient_dim: usize,
        #[arg(long = "n")]
        subspace_dim: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long = "D")]
        max_degree: usize,
        /// Print the per-degree CSV.
        #[arg(long)]
        breakdown: bool,
    },
    /// Run a parameter sweep from a JSON config.
    Sweep {
        config: PathBuf,
        /// Record per-unit wall-clock time.
        #[arg(long)]
        timing: bool,
    },
}

fn append_report(path: &PathBuf, report: &ErrorRateReport) -> pvlab::Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{}", ErrorRateReport::CSV_HEADER)?;
    }
    writeln!(f, "{}", report.csv_row())?;
    Ok(())
}

fn open_out(path: &Option<PathBuf>) -> pvlab::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> pvlab::Result<()> {
    match cli.command {
        Command::Gen { instance, out } => {
            let params = instance.params();
            let inst = generate_instance(params)?;
            let mut w = open_out(&out)?;
            write_instance_csv(&mut w, &inst.observed, params.rho, params.seed)?;
            w.flush()?;
        }
        Command::Estimate {
            instance,
            uncentered,
            dump_raw,
        } => {
            let params = instance.params();
            let inst = generate_instance(params)?;
            let est = estimate_direction_with(&inst.observed, !uncentered)?;
            let raw = score(&est.raw_estimate, &inst.truth.entries)?;
            let exact = match recover(&est.raw_estimate, params.rho, params.model) {
                Ok(r) => score(&r.recovered, &inst.truth.entries)?.exact_match,
                Err(PvError::ZeroVector) => false,
                Err(e) => return Err(e),
            };
            println!(
                "lambda={} gap={} l2_error={} entrywise_max_weighted={} exact_match={}",
                est.leading_value, est.gap, raw.l2_error, raw.entrywise_max_weighted, exact
            );
            if let Some(p) = dump_raw {
                let mut w = BufWriter::new(File::create(p)?);
                write_vector_csv(&mut w, "raw_estimate", &est.raw_estimate)?;
                w.flush()?;
            }
        }
        Command::Detect {
            ambient_dim,
            subspace_dim,
            rho,
            c1,
            trials,
            test,
            seed,
            csv,
            plugin_rho: want_plugin,
        } => {
            let report = error_rates(ambient_dim, subspace_dim, rho, c1, trials, test.into(), seed)?;
            println!("{}", ErrorRateReport::CSV_HEADER);
            println!("{}", report.csv_row());
            if want_plugin {
                let params =
                    InstanceParams::new(ambient_dim, subspace_dim, rho, Model::Gaussian, SeedSpec::new(seed, 0));
                let inst = generate_instance(params)?;
                let est = estimate_direction_with(&inst.observed, true)?;
                println!("plugin_rho={}", plugin_rho(&est.raw_estimate)?);
            }
            if let Some(p) = csv {
                append_report(&p, &report)?;
            }
        }
        Command::Advantage {
            ambient_dim,
            subspace_dim,
            rho,
            max_degree,
            breakdown,
        } => {
            let b = advantage(ambient_dim, subspace_dim, rho, max_degree)?;
            println!("adv={} adv_squared={} ln_adv={}", b.adv, b.adv_squared, b.ln_adv());
            if breakdown {
                println!("{}", pvlab::lowdeg::AdvantageBreakdown::CSV_HEADER);
                for t in &b.per_degree {
                    println!("{},{},{},{}", t.d, t.sphere_moment, t.alpha_sum, t.contribution);
                }
            }
        }
        Command::Sweep { config, timing } => {
            let cfg = SweepConfig::from_path(&config)?;
            let records = run_sweep_with(&cfg, SweepOptions { timing })?;
            let mut w = open_out(&cfg.out)?;
            write_records_csv(&mut w, &records)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("pvlab: {e}");
            match e {
                PvError::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
