//! Geometric continuation in the competition rate `beta` with warm starts.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::reflection_residual;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::params::ProblemParams;
use crate::solver::{solve_system, BoundaryData, SolveReport, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BetaLadder {
    pub beta_0: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl Default for BetaLadder {
    /// `1, 10, ..., 10^6`.
    fn default() -> Self {
        Self {
            beta_0: 1.0,
            ratio: 10.0,
            steps: 7,
        }
    }
}

impl BetaLadder {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_0 > 0.0 && self.beta_0.is_finite()) || !(self.ratio > 1.0) || self.steps == 0 {
            return Err(Error::InvalidParameter(format!(
                "ladder needs beta_0 > 0, ratio > 1, steps >= 1; got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn betas(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|n| self.beta_0 * self.ratio.powi(n as i32))
            .collect()
    }
}

/// Indicators recorded after each ladder step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub beta: f64,
    pub report: SolveReport,
    /// Row-major `k x k`, `O_ij = int u_i^p u_j^q dx`, zero diagonal.
    pub overlap: Vec<f64>,
    /// `beta * O_ij`.
    pub scaled_overlap: Vec<f64>,
    /// Row-major `k x k`, `int u_i u_j dx`, zero diagonal.
    pub trace_product: Vec<f64>,
    /// Only for `k = 2`.
    pub reflection_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k: usize,
    pub steps: Vec<SweepStep>,
}

impl SweepRecord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Largest off-diagonal trace product at step `n`.
    pub fn max_trace_product(&self, n: usize) -> f64 {
        max_off_diagonal(&self.steps[n].trace_product, self.k)
    }

    pub fn max_scaled_overlap(&self, n: usize) -> f64 {
        max_off_diagonal(&self.steps[n].scaled_overlap, self.k)
    }
}

fn max_off_diagonal(m: &[f64], k: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j {
                best = best.max(m[i * k + j]);
            }
        }
    }
    best
}

/// Trapezoidal rule on the (possibly nonuniform) `x` nodes.
pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    x.windows(2)
        .zip(f.windows(2))
        .map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]))
        .sum()
}

/// Overlap and trace-product matrices of the traces of `field`.
pub fn trace_interactions(field: &Field) -> (Vec<f64>, Vec<f64>) {
    let k = field.k();
    let prm = &*field.params;
    let x = &field.grid.x_nodes;
    let traces: Vec<Vec<f64>> = (0..k).map(|c| field.trace(c)).collect();
    let mut overlap = vec![0.0; k * k];
    let mut product = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let o: Vec<f64> = traces[i]
                .iter()
                .zip(&traces[j])
                .map(|(a, b)| a.powf(prm.p) * b.powf(prm.q))
                .collect();
            let pr: Vec<f64> = traces[i].iter().zip(&traces[j]).map(|(a, b)| a * b).collect();
            overlap[i * k + j] = trapezoid(x, &o);
            product[i * k + j] = trapezoid(x, &pr);
        }
    }
    (overlap, product)
}

fn record_step(field: &Field, report: SolveReport) -> Result<SweepStep> {
    let (overlap, trace_product) = trace_interactions(field);
    let beta = field.params.beta;
    Ok(SweepStep {
        beta,
        report,
        scaled_overlap: overlap.iter().map(|o| beta * o).collect(),
        overlap,
        trace_product,
        reflection_residual: if field.k() == 2 {
            Some(reflection_residual(field)?)
        } else {
            None
        },
    })
}

/// Runs the ladder. The first rung is warm-started from the `beta = 0`
/// solution; every later rung from its predecessor.
pub fn continue_beta(
    params: &ProblemParams,
    grid: &Arc<Grid>,
    bdata: &BoundaryData,
    ladder: &BetaLadder,
    cfg: &SolverConfig,
) -> Result<(Field, SweepRecord)> {
    ladder.validate()?;
    let harmonic = Arc::new(params.with_beta(0.0));
    let zero = Field::zeros(Arc::clone(&harmonic), Arc::clone(grid));
    let (mut current, rep) = solve_system(&harmonic, grid, bdata, &zero, cfg)?;
    if !rep.converged {
        return Err(not_converged(0, 0.0, &rep));
    }
    let mut record = SweepRecord {
        k: params.k,
        steps: Vec::with_capacity(ladder.steps),
    };
    for (n, beta) in ladder.betas().into_iter().enumerate() {
        let step_params = Arc::new(params.with_beta(beta));
        let warm = current.with_params(Arc::clone(&step_params))?;
        let (next, rep) = solve_system(&step_params, grid, bdata, &warm, cfg)?;
        if !rep.converged {
            return Err(not_converged(n, beta, &rep));
        }
        record.steps.push(record_step(&next, rep)?);
        current = next;
    }
    Ok((current, record))
}

fn not_converged(step: usize, beta: f64, rep: &SolveReport) -> Error {
    Error::StepNotConverged {
        step,
        beta,
        residual: rep.final_residual,
        iterations: rep.iterations,
    }
}

/// True iff `max_{i != j} int u_i u_j dx <= eps` at the last step.
pub fn segregation_reached(record: &SweepRecord, eps: f64) -> bool {
    match record.steps.last() {
        Some(_) => record.max_trace_product(record.len() - 1) <= eps,
        None => false,
    }
}

/// Default segregation threshold `1e-3 * width * sup^2`.
pub fn default_segregation_eps(grid: &Grid, sup: f64) -> f64 {
    1e-3 * (grid.x_hi() - grid.x_lo()) * sup * sup
}
