//! Weighted eigenvalues on arcs of the half-circle and the two-set partition
//! exponents built from them (one space dimension).
//!
//! The angular operator is `-(sin^a u')' / sin^a`. On an arc it is
//! discretised by a conservative three-point scheme whose face weights are
//! exact integrals of `sin^a` and whose masses are exact dual-cell integrals,
//! giving a symmetric tridiagonal matrix after diagonal scaling. Its
//! eigenvalues are isolated by Sturm-sequence bisection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::quad::sin_pow_integral;

/// `gamma(t) = sqrt(D^2 + t) - D` with `D = (N - 2s) / 2`.
pub fn gamma_char(t: f64, s: f64, n: usize) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma_char needs t >= 0, got {t}")));
    }
    let d = 0.5 * (n as f64 - 2.0 * s);
    Ok((d * d + t).sqrt() - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndCondition {
    Natural,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub lo: EndCondition,
    pub hi: EndCondition,
}

impl ArcSpec {
    /// Natural conditions on equator endpoints, Dirichlet elsewhere.
    pub fn new(theta_lo: f64, theta_hi: f64) -> Result<Self> {
        let cond = |t: f64| {
            if t == 0.0 || t == PI {
                EndCondition::Natural
            } else {
                EndCondition::Dirichlet
            }
        };
        Self::with_conditions(theta_lo, theta_hi, cond(theta_lo), cond(theta_hi))
    }

    pub fn with_conditions(theta_lo: f64, theta_hi: f64, lo: EndCondition, hi: EndCondition) -> Result<Self> {
        if !(0.0 <= theta_lo && theta_lo < theta_hi && theta_hi <= PI) {
            return Err(Error::InvalidParameter(format!(
                "arc ({theta_lo}, {theta_hi}) is not a nonempty subarc of [0, pi]"
            )));
        }
        Ok(Self {
            theta_lo,
            theta_hi,
            lo,
            hi,
        })
    }
}

/// Symmetric tridiagonal `(diag, off)` of the scaled eigenproblem.
fn arc_matrix(arc: &ArcSpec, a: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (arc.theta_hi - arc.theta_lo) / n as f64;
    let node = |k: usize| if k == n { arc.theta_hi } else { arc.theta_lo + k as f64 * h };
    let face: Vec<f64> = (0..n)
        .map(|k| sin_pow_integral(a, node(k), node(k + 1)) / (h * h))
        .collect();
    let mass: Vec<f64> = (0..=n)
        .map(|k| {
            let lo = if k == 0 { node(0) } else { node(k) - 0.5 * h };
            let hi = if k == n { node(n) } else { node(k) + 0.5 * h };
            sin_pow_integral(a, lo, hi)
        })
        .collect();
    let first = usize::from(arc.lo == EndCondition::Dirichlet);
    let last = if arc.hi == EndCondition::Dirichlet { n - 1 } else { n };
    let mut diag = Vec::with_capacity(last + 1 - first);
    let mut off = Vec::with_capacity(last - first);
    for k in first..=last {
        let left = if k > 0 { face[k - 1] } else { 0.0 };
        let right = if k < n { face[k] } else { 0.0 };
        diag.push((left + right) / mass[k]);
        if k < last {
            off.push(-face[k] / (mass[k] * mass[k + 1]).sqrt());
        }
    }
    (diag, off)
}

/// Number of eigenvalues strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (k, d) in diag.iter().enumerate() {
        let e2 = if k == 0 { 0.0 } else { off[k - 1] * off[k - 1] };
        q = d - x - if k == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `m`-th smallest eigenvalue (0-based) by bisection.
fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], m: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..diag.len() {
        let r = if k > 0 { off[k - 1].abs() } else { 0.0 } + off.get(k).map_or(0.0, |e| e.abs());
        lo = lo.min(diag[k] - r);
        hi = hi.max(diag[k] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        if sturm_count(diag, off, mid) > m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 64 {
        return Err(Error::InvalidParameter(format!(
            "resolution {resolution} is below the minimum of 64"
        )));
    }
    Ok(())
}

/// Eigenvalue number `m` (0-based) of the weighted problem on `arc`, with
/// `resolution` uniform intervals.
pub fn arc_eigenvalues(arc: &ArcSpec, a: f64, resolution: usize, m: usize) -> Result<f64> {
    check_resolution(resolution)?;
    let (diag, off) = arc_matrix(arc, a, resolution);
    if m >= diag.len() {
        return Err(Error::InvalidParameter(format!("only {} eigenvalues", diag.len())));
    }
    Ok(tridiagonal_eigenvalue(&diag, &off, m).max(0.0))
}

/// First eigenvalue `lambda_1(arc)`.
pub fn arc_eigenvalue(arc: &ArcSpec, a: f64, resolution: usize) -> Result<f64> {
    arc_eigenvalues(arc, a, resolution, 0)
}

/// Second eigenvalue of the whole half-circle with natural conditions at both ends.
pub fn lambda2_halfsphere(a: f64, resolution: usize) -> Result<f64> {
    arc_eigenvalues(&ArcSpec::new(0.0, PI)?, a, resolution, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Target width of the final bracket in each angle.
    pub tolerance: f64,
    /// Points per direction of the initial scan.
    pub scan_points: usize,
    /// Angles are restricted to `[edge, PI - edge]`.
    pub edge: f64,
    pub max_rounds: usize,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            scan_points: 17,
            edge: 1e-6 * PI,
            max_rounds: 20,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub value: f64,
    /// Every evaluated `(angles, objective)` pair, in evaluation order.
    pub optimizer_trace: Vec<(Vec<f64>, f64)>,
    pub argmin: Vec<f64>,
    pub grid_resolution: usize,
}

impl ExponentResult {
    fn from_trace(optimizer_trace: Vec<(Vec<f64>, f64)>, grid_resolution: usize) -> Self {
        let (argmin, value) = optimizer_trace
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .cloned()
            .expect("nonempty trace");
        Self {
            value,
            optimizer_trace,
            argmin,
            grid_resolution,
        }
    }
}

fn gamma_of_arc(lo: f64, hi: f64, s: f64, resolution: usize) -> Result<f64> {
    let a = 1.0 - 2.0 * s;
    gamma_char(arc_eigenvalue(&ArcSpec::new(lo, hi)?, a, resolution)?, s, 1)
}

/// Golden-section search of `f` on `[lo, hi]`, recording every evaluation.
fn golden(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<()> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
    }
    f(0.5 * (lo + hi))?;
    Ok(())
}

fn validate(s: f64, cfg: &OptimizerConfig) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must lie in (0, 1)")));
    }
    if !(cfg.edge > 0.0 && cfg.edge < 0.25 * PI) || cfg.scan_points < 3 || !(cfg.tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!("bad optimizer settings {cfg:?}")));
    }
    Ok(())
}

fn scan(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// `mu(s)`: the best split of the half-circle into `(0, t)` and `(t, PI)`.
pub fn optimize_mu(s: f64, resolution: usize, cfg: &OptimizerConfig) -> Result<ExponentResult> {
    validate(s, cfg)?;
    check_resolution(resolution)?;
    let objective = |t: f64| -> Result<f64> {
        Ok(0.5 * (gamma_of_arc(0.0, t, s, resolution)? + gamma_of_arc(t, PI, s, resolution)?))
    };
    let (lo, hi) = (cfg.edge, PI - cfg.edge);
    let points = scan(lo, hi, cfg.scan_points);
    let values = par::map(&points, cfg.execution, |&t| objective(t));
    let mut trace = Vec::with_capacity(points.len() + 64);
    for (t, v) in points.iter().zip(values) {
        trace.push((vec![*t], v?));
    }
    let best = (0..points.len())
        .min_by(|&i, &j| trace[i].1.total_cmp(&trace[j].1))
        .unwrap();
    let b_lo = points[best.saturating_sub(1)];
    let b_hi = points[(best + 1).min(points.len() - 1)];
    golden(
        |t| {
            let v = objective(t)?;
            trace.push((vec![t], v));
            Ok(v)
        },
        b_lo,
        b_hi,
        cfg.tolerance,
    )?;
    Ok(ExponentResult::from_trace(trace, resolution))
}

/// `nu(s)`: arcs `(0, t1)` and `(t2, PI)` that may overlap away from the
/// equator.
pub fn optimize_nu(s: f64, resolution: usize, cfg: &OptimizerConfig) -> Result<ExponentResult> {
    validate(s, cfg)?;
    check_resolution(resolution)?;
    let objective = |t1: f64, t2: f64| -> Result<f64> {
        Ok(0.5 * (gamma_of_arc(0.0, t1, s, resolution)? + gamma_of_arc(t2, PI, s, resolution)?))
    };
    let (lo, hi) = (cfg.edge, PI - cfg.edge);
    let axis = scan(lo, hi, cfg.scan_points);
    let pairs: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&t1| axis.iter().map(move |&t2| (t1, t2)))
        .collect();
    let values = par::map(&pairs, cfg.execution, |&(t1, t2)| objective(t1, t2));
    let mut trace = Vec::with_capacity(pairs.len() + 256);
    for (&(t1, t2), v) in pairs.iter().zip(values) {
        trace.push((vec![t1, t2], v?));
    }
    let best = (0..pairs.len())
        .min_by(|&i, &j| trace[i].1.total_cmp(&trace[j].1))
        .unwrap();
    let (mut t1, mut t2) = pairs[best];
    let step = axis[1] - axis[0];
    let bracket = |t: f64| ((t - step).max(lo), (t + step).min(hi));
    for _ in 0..cfg.max_rounds {
        let before = (t1, t2);
        let (a, b) = bracket(t1);
        let mut local = Vec::new();
        golden(
            |x| {
                let v = objective(x, t2)?;
                local.push((vec![x, t2], v));
                Ok(v)
            },
            a,
            b,
            cfg.tolerance,
        )?;
        t1 = local.iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap().0[0];
        trace.append(&mut local);
        let (a, b) = bracket(t2);
        golden(
            |x| {
                let v = objective(t1, x)?;
                local.push((vec![t1, x], v));
                Ok(v)
            },
            a,
            b,
            cfg.tolerance,
        )?;
        t2 = local.iter().min_by(|p, q| p.1.total_cmp(&q.1)).unwrap().0[1];
        trace.append(&mut local);
        if (t1 - before.0).abs() < cfg.tolerance && (t2 - before.1).abs() < cfg.tolerance {
            break;
        }
    }
    Ok(ExponentResult::from_trace(trace, resolution))
}
