//! Experiment orchestration: single simulation-vs-theory trials, parameter
//! sweeps written to CSV, and static SVG plots of the sweeps.

mod plot;
mod sweep;
mod table;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

pub use plot::{emit_plots, PlotSpec};
pub use sweep::{run_sweep, run_sweep_with, seed_averages, trial_seed, SeedAverage, SweepParam, SweepReport, SweepSpec};
pub use table::{read_csv, read_records, read_records_file, write_records, CsvWriter, CSV_HEADER};

use crate::approx::{build_onebit_from_scores, linf_eta_solve, ridge_large_lambda};
use crate::classify::{compress_sign, error_exact_iso, sparsify_topk};
use crate::datagen::GmmInstance;
use crate::solvers::{solve_linf, solve_ridge, solve_warm_started, Regularizer, SolveOptions, Weights};
use crate::theory::{predict_l1, predict_linf, predict_ridge};
use crate::{Error, ProblemConfig, Result};

/// Penalty of a simulated trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegKind {
    L2,
    L1,
    LInf,
}

impl RegKind {
    pub const ALL: [RegKind; 3] = [RegKind::L2, RegKind::L1, RegKind::LInf];

    pub fn as_str(self) -> &'static str {
        match self {
            RegKind::L2 => "l2",
            RegKind::L1 => "l1",
            RegKind::LInf => "linf",
        }
    }
}

impl fmt::Display for RegKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(RegKind::L2),
            "l1" => Ok(RegKind::L1),
            "linf" => Ok(RegKind::LInf),
            _ => Err(Error::Parse(format!("unknown regularizer `{s}` (expected l2, l1 or linf)"))),
        }
    }
}

/// One row of the trial table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub regularizer: RegKind,
    pub n: usize,
    pub d: usize,
    pub c_nominal: f64,
    pub c_realized: f64,
    pub r: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub seed: u64,
    pub sim_error: f64,
    pub pred_error: f64,
    pub approx_error: Option<f64>,
    pub onebit_error: f64,
    pub sparsified_error: Option<f64>,
    pub nnz_empirical: Option<u64>,
    pub sparsity_pred: Option<u64>,
    pub bound_count_empirical: Option<u64>,
    pub bound_count_pred: Option<u64>,
    pub solver_converged: bool,
    pub runtime_ms: u64,
}

impl TrialRecord {
    /// Equality of everything except the wall-clock runtime.
    pub fn same_result(&self, other: &Self) -> bool {
        Self { runtime_ms: 0, ..self.clone() } == Self { runtime_ms: 0, ..other.clone() }
    }

    /// The nominal config behind the row.
    pub fn config(&self) -> ProblemConfig {
        ProblemConfig {
            n: self.n,
            d: self.d,
            c: self.c_nominal,
            r: self.r,
            sigma: self.sigma,
            lambda: self.lambda,
            seed: self.seed,
        }
    }
}

/// Error of `w` on the true mixture, with the zero classifier at chance.
fn error_or_chance(w: &Weights<f64>, inst: &GmmInstance<f64>) -> Result<f64> {
    if w.is_zero() {
        return Ok(0.5);
    }
    error_exact_iso(w, &inst.means, inst.config.sigma)
}

/// Samples an instance from `config`, trains the `reg` classifier and scores
/// it against the matching prediction. Theory is evaluated at the realized
/// corruption rate. A solver that hits its iteration cap is recorded with
/// `solver_converged = false`, not dropped.
pub fn run_trial(config: &ProblemConfig, reg: RegKind) -> Result<TrialRecord> {
    let start = Instant::now();
    let inst = GmmInstance::<f64>::sample(config)?;
    let theory_cfg = config.with_realized_c();
    let opts = SolveOptions::default();
    let (w, converged) = match reg {
        RegKind::L2 => (solve_ridge(inst.x.view(), inst.z.view(), config.lambda)?, true),
        RegKind::L1 => {
            let out = solve_warm_started(inst.x.view(), inst.z.view(), config.lambda, &Regularizer::L1, &opts)?;
            (out.weights, out.converged)
        }
        RegKind::LInf => {
            let out = solve_linf(inst.x.view(), inst.z.view(), config.lambda, &opts)?;
            (out.weights, out.converged)
        }
    };
    let sim_error = error_or_chance(&w, &inst)?;
    let onebit_error = if w.is_zero() { 0.5 } else { error_or_chance(&compress_sign(&w)?, &inst)? };
    let mut rec = TrialRecord {
        regularizer: reg,
        n: config.n,
        d: config.d,
        c_nominal: config.c,
        c_realized: inst.realized_c(),
        r: config.r,
        sigma: config.sigma,
        lambda: config.lambda,
        seed: config.seed,
        sim_error,
        pred_error: 0.5,
        approx_error: None,
        onebit_error,
        sparsified_error: None,
        nnz_empirical: None,
        sparsity_pred: None,
        bound_count_empirical: None,
        bound_count_pred: None,
        solver_converged: converged,
        runtime_ms: 0,
    };
    match reg {
        RegKind::L2 => {
            rec.pred_error = predict_ridge(&theory_cfg)?.predicted_error;
            rec.approx_error = Some(ridge_large_lambda(&theory_cfg)?.predicted_error);
        }
        RegKind::L1 => {
            let sol = predict_l1(&theory_cfg)?;
            rec.pred_error = sol.predicted_error;
            rec.sparsity_pred = Some(sol.predicted_sparsity);
            rec.nnz_empirical = Some(w.nnz() as u64);
            let k = (sol.predicted_sparsity as usize).min(config.d);
            rec.sparsified_error = Some(if k == 0 || w.is_zero() {
                0.5
            } else {
                error_or_chance(&sparsify_topk(&w, k)?, &inst)?
            });
        }
        RegKind::LInf => {
            let sol = predict_linf(&theory_cfg)?;
            rec.pred_error = sol.predicted_error;
            rec.bound_count_pred = Some(2 * sol.predicted_bound_count);
            rec.bound_count_empirical = Some(w.bound_count() as u64);
            if config.lambda > 0.0 {
                let eta = linf_eta_solve(&theory_cfg)?;
                let onebit = build_onebit_from_scores(&inst, eta.gamma, eta.beta)?;
                rec.approx_error = Some(error_or_chance(&onebit, &inst)?);
            }
        }
    }
    rec.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(rec)
}
