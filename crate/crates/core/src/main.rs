use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use regclass::harness::{emit_plots, run_trial, seed_averages, write_records, PlotSpec, RegKind, SweepSpec};
use regclass::mathkit::EnvelopeSpec;
use regclass::theory::{predict_l1, predict_linf, predict_master, predict_ridge};
use regclass::{Error, ProblemConfig};

#[derive(Parser)]
#[command(name = "regclass", version, about = "Regularized least-squares classification: theory vs simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictReg {
    L2,
    L1,
    Linf,
    Master,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimReg {
    L2,
    L1,
    Linf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Envelope {
    Abs,
    Quad,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scalar program and print the predicted quantities.
    Predict {
        #[arg(long, value_enum)]
        reg: PredictReg,
        #[arg(long)]
        config: PathBuf,
        /// Penalty inside the Moreau envelope (master only).
        #[arg(long, value_enum, default_value = "abs")]
        envelope: Envelope,
    },
    /// Run one trial and print its CSV row.
    Simulate {
        #[arg(long, value_enum)]
        reg: SimReg,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a sweep; the CSV lands in DIR under the spec's output name.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render SVG plots from a sweep CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn predict(reg: PredictReg, cfg: &ProblemConfig, envelope: Envelope) -> regclass::Result<String> {
    let lines = match reg {
        PredictReg::L2 => {
            let s = predict_ridge(cfg)?;
            format!("alpha = {}\ngamma = {}\nobjective = {}\npredicted_error = {}\n", s.alpha, s.gamma, s.objective, s.predicted_error)
        }
        PredictReg::L1 => {
            let s = predict_l1(cfg)?;
            format!(
                "tau = {}\nbeta = {}\ngamma = {}\nsigma_tilde = {}\nobjective = {}\npredicted_error = {}\npredicted_sparsity = {}\ndegenerate = {}\n",
                s.tau, s.beta, s.gamma, s.sigma_tilde, s.objective, s.predicted_error, s.predicted_sparsity, s.degenerate
            )
        }
        PredictReg::Linf => {
            let s = predict_linf(cfg)?;
            format!(
                "tau = {}\ndelta = {}\ngamma = {}\nxi = {}\nobjective = {}\npredicted_error = {}\npredicted_bound_count = {}\n",
                s.tau, s.delta, s.gamma, s.xi, s.objective, s.predicted_error, 2 * s.predicted_bound_count
            )
        }
        PredictReg::Master => {
            let env = match envelope {
                Envelope::Abs => EnvelopeSpec::Absolute,
                Envelope::Quad => EnvelopeSpec::Quadratic,
            };
            let s = predict_master(cfg, &env)?;
            format!(
                "tau = {}\nbeta = {}\ngamma = {}\nxi = {}\nobjective = {}\npredicted_error = {}\ndegenerate = {}\n",
                s.tau, s.beta, s.gamma, s.xi, s.objective, s.predicted_error, s.degenerate
            )
        }
    };
    Ok(lines)
}

fn run(cli: Cli) -> regclass::Result<()> {
    match cli.command {
        Command::Predict { reg, config, envelope } => {
            let cfg = ProblemConfig::from_file(&config)?;
            print!("{}", predict(reg, &cfg, envelope)?);
        }
        Command::Simulate { reg, config, seed } => {
            let mut cfg = ProblemConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let reg = match reg {
                SimReg::L2 => RegKind::L2,
                SimReg::L1 => RegKind::L1,
                SimReg::Linf => RegKind::LInf,
            };
            let rec = run_trial(&cfg, reg)?;
            let bytes = write_records(Vec::new(), &[rec])?;
            print!("{}", String::from_utf8_lossy(&bytes));
        }
        Command::Sweep { spec, out } => {
            let mut spec = SweepSpec::from_file(&spec)?;
            std::fs::create_dir_all(&out)?;
            let name = spec.output.file_name().map(PathBuf::from).unwrap_or_else(|| "sweep.csv".into());
            spec.output = out.join(name);
            let total = spec.trial_count();
            let mut done = 0;
            let report = regclass::harness::run_sweep_with(&spec, |rec| {
                done += 1;
                eprintln!(
                    "[{done}/{total}] {} {} = {} seed {}: sim {:.4} pred {:.4} ({} ms)",
                    rec.regularizer,
                    spec.param,
                    spec.param.value_of(rec),
                    rec.seed,
                    rec.sim_error,
                    rec.pred_error,
                    rec.runtime_ms
                );
            })?;
            println!("regularizer,{},seeds,mean_sim_error,mean_pred_error", spec.param);
            for a in seed_averages(&report.records, spec.param) {
                println!("{},{},{},{},{}", a.regularizer, a.value, a.count, a.sim_error, a.pred_error);
            }
            println!("wrote {} rows to {}", report.records.len(), report.path.display());
            println!("excluded (solver not converged): {}", report.excluded);
        }
        Command::Plot { csv, out } => {
            std::fs::create_dir_all(&out)?;
            for f in emit_plots(&csv, &PlotSpec::new(out))? {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) | Error::NonFiniteIntegrand { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
