//! Finite-volume discretization of `L_a v_i = 0` with the nonlinear conormal
//! condition on `y = 0`, and its nonlinear Gauss-Seidel solver.
//!
//! Every node owns a control volume. Vertical faces carry the exact integral
//! of `y^a` over the face; horizontal faces use the harmonic mean of `y^a`
//! (equivalently a uniform difference in `z = y^(1-a)/(1-a)`), which makes the
//! scheme exact on `y^(2s)`. Defects are net fluxes per unit trace length, so
//! interior and boundary defects share units with the conormal derivative.
//!
//! The relaxation updates one vertical line at a time: the linear interior
//! part of the line is eliminated into a scalar equation for the bottom node,
//! which is strictly increasing in the bottom value and is solved by
//! safeguarded Newton with bisection. Lines of one colour do not couple, so a
//! red-black sweep updates them concurrently and stays deterministic.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::par::{self, Execution};
use crate::params::ProblemParams;

/// Dirichlet samples for the top and lateral boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    /// Column-major samples per component; only Dirichlet nodes are read.
    pub samples: Vec<Vec<f64>>,
    /// Provenance of the outer closure.
    pub tag: String,
}

impl BoundaryData {
    pub fn from_fn(grid: &Grid, k: usize, tag: &str, f: impl Fn(usize, f64, f64) -> f64) -> Result<Self> {
        let samples = (0..k)
            .map(|c| {
                let mut v = vec![0.0; grid.len()];
                for (i, &x) in grid.x_nodes.iter().enumerate() {
                    for (j, &y) in grid.y_nodes.iter().enumerate() {
                        if grid.is_dirichlet(i, j) {
                            v[grid.idx(i, j)] = f(c, x, y);
                        }
                    }
                }
                v
            })
            .collect();
        let bd = Self {
            samples,
            tag: tag.to_string(),
        };
        bd.validate(grid, k)?;
        Ok(bd)
    }

    pub fn constant(grid: &Grid, values: &[f64]) -> Result<Self> {
        Self::from_fn(grid, values.len(), "constant", |c, _, _| values[c])
    }

    /// Two densities with crossing linear data: `g_1 = (1 + x / X) / 2` and
    /// `g_2(x, y) = g_1(-x, y)` on a domain symmetric about `x = 0`.
    pub fn mirror_crossing(grid: &Grid) -> Result<Self> {
        let (lo, hi) = (grid.x_lo(), grid.x_hi());
        if (lo + hi).abs() > 1e-12 * (hi - lo) {
            return Err(Error::InvalidParameter(format!(
                "mirror_crossing needs a domain symmetric about x = 0, got [{lo}, {hi}]"
            )));
        }
        let half = hi;
        Self::from_fn(grid, 2, "mirror_crossing", |c, x, _| {
            let x = if c == 0 { x } else { -x };
            (0.5 * (1.0 + x / half)).clamp(0.0, 1.0)
        })
    }

    /// Reads the Dirichlet nodes of an existing field.
    pub fn from_field(field: &Field, tag: &str) -> Result<Self> {
        let bd = Self {
            samples: field.values.clone(),
            tag: tag.to_string(),
        };
        bd.validate(&field.grid, field.k())?;
        Ok(bd)
    }

    pub fn validate(&self, grid: &Grid, k: usize) -> Result<()> {
        if self.samples.len() != k || self.samples.iter().any(|s| s.len() != grid.len()) {
            return Err(Error::InvalidParameter(format!(
                "boundary data '{}' does not match k = {k} on a {}x{} grid",
                self.tag,
                grid.nx(),
                grid.ny()
            )));
        }
        for (c, s) in self.samples.iter().enumerate() {
            for i in 0..grid.nx() {
                for j in 0..grid.ny() {
                    let v = s[grid.idx(i, j)];
                    if grid.is_dirichlet(i, j) && !(v.is_finite() && v >= 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "boundary data '{}' component {c} at node ({i}, {j}) is {v}",
                            self.tag
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn impose(&self, grid: &Grid, values: &mut [Vec<f64>]) {
        for (c, v) in values.iter_mut().enumerate() {
            for i in 0..grid.nx() {
                for j in 0..grid.ny() {
                    if grid.is_dirichlet(i, j) {
                        let n = grid.idx(i, j);
                        v[n] = self.samples[c][n];
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    #[default]
    RedBlack,
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Sup-norm defect target.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Relaxation factor in `(0, 1]`.
    pub damping: f64,
    pub sweep_order: SweepOrder,
    pub execution: Execution,
    /// Sweeps between defect evaluations.
    pub check_every: usize,
    /// Also require the extrapolated value error `rho / (1 - rho) * |dv|`,
    /// with `dv` the change over one check window and `rho` the observed
    /// contraction between windows, to fall below this bound.
    pub increment_tolerance: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_sweeps: 100_000,
            damping: 1.0,
            sweep_order: SweepOrder::RedBlack,
            execution: Execution::Parallel,
            check_every: 10,
            increment_tolerance: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be > 0", self.tolerance)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!("damping {} must lie in (0, 1]", self.damping)));
        }
        if self.increment_tolerance.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::InvalidParameter("increment_tolerance must be > 0".into()));
        }
        if self.max_sweeps == 0 || self.check_every == 0 {
            return Err(Error::InvalidParameter("max_sweeps and check_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
}

/// Flux coefficients of one control volume.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    west: f64,
    east: f64,
    south: f64,
    north: f64,
    width: f64,
}

#[inline]
fn stencil(grid: &Grid, i: usize, j: usize) -> Stencil {
    let x = &grid.x_nodes;
    let width = grid.cell_width(i);
    let lat = grid.lateral_weight(j);
    Stencil {
        west: lat / (x[i] - x[i - 1]),
        east: lat / (x[i + 1] - x[i]),
        south: if j == 0 { 0.0 } else { width * grid.vertical_conductance(j - 1) },
        north: width * grid.vertical_conductance(j),
        width,
    }
}

/// Net flux of `y^a grad v` into the control volume of node `(i, j)`.
#[inline]
fn net_flux(grid: &Grid, v: &[f64], i: usize, j: usize) -> (f64, f64) {
    let st = stencil(grid, i, j);
    let c = v[grid.idx(i, j)];
    let mut n = st.west * (v[grid.idx(i - 1, j)] - c)
        + st.east * (v[grid.idx(i + 1, j)] - c)
        + st.north * (v[grid.idx(i, j + 1)] - c);
    if j > 0 {
        n += st.south * (v[grid.idx(i, j - 1)] - c);
    }
    (n, st.width)
}

/// Finite-volume residual of `div(y^a grad v_c)` per unit width at interior
/// nodes (`j >= 1`, off the Dirichlet boundary); zero elsewhere.
pub fn interior_defect(field: &Field, c: usize) -> Vec<f64> {
    let g = &*field.grid;
    let v = &field.values[c];
    let mut out = vec![0.0; g.len()];
    for i in 1..g.nx() - 1 {
        for j in 1..g.ny() - 1 {
            let (n, w) = net_flux(g, v, i, j);
            out[g.idx(i, j)] = n / w;
        }
    }
    out
}

/// Discrete conormal derivative `-lim y^a d_y v` at every bottom node. The
/// two corner nodes use the one-sided vertical flux.
pub fn conormal_trace(field: &Field, c: usize) -> Vec<f64> {
    conormal_of(&field.grid, &field.values[c])
}

pub(crate) fn conormal_of(g: &Grid, v: &[f64]) -> Vec<f64> {
    let nx = g.nx();
    (0..nx)
        .map(|i| {
            if i == 0 || i == nx - 1 {
                -g.vertical_conductance(0) * (v[g.idx(i, 1)] - v[g.idx(i, 0)])
            } else {
                let (n, w) = net_flux(g, v, i, 0);
                -n / w
            }
        })
        .collect()
}

/// `d_nu^a v_c - f_c + competition` at bottom nodes; zero at the two
/// Dirichlet corners.
pub fn boundary_defect(field: &Field, c: usize) -> Vec<f64> {
    let g = &*field.grid;
    let prm = &*field.params;
    let conormal = conormal_trace(field, c);
    (0..g.nx())
        .map(|i| {
            if i == 0 || i == g.nx() - 1 {
                return 0.0;
            }
            let t = field.trace_vector(i);
            conormal[i] - prm.reaction(c, g.x_nodes[i], &t) + prm.competition_term(c, &t)
        })
        .collect()
}

/// Bound on the rounding error committed when evaluating the net flux at
/// `(i, j)`, per unit width.
fn flux_rounding(grid: &Grid, v: &[f64], i: usize, j: usize) -> f64 {
    let st = stencil(grid, i, j);
    let c = v[grid.idx(i, j)].abs();
    let mut m = st.west * (v[grid.idx(i - 1, j)].abs() + c)
        + st.east * (v[grid.idx(i + 1, j)].abs() + c)
        + st.north * (v[grid.idx(i, j + 1)].abs() + c);
    if j > 0 {
        m += st.south * (v[grid.idx(i, j - 1)].abs() + c);
    }
    ROUNDING_FACTOR * f64::EPSILON * m / st.width
}

const ROUNDING_FACTOR: f64 = 64.0;

/// Sup-norm of the interior and boundary defects over all components, each
/// nodal defect reduced by the rounding error of its own evaluation. On
/// strongly graded meshes the bottom conductances are large enough that the
/// raw defect of the exact discrete solution is dominated by rounding.
pub fn residual(field: &Field) -> f64 {
    let g = &*field.grid;
    let prm = &*field.params;
    let mut worst: f64 = 0.0;
    for c in 0..field.k() {
        let v = &field.values[c];
        let interior = interior_defect(field, c);
        let boundary = boundary_defect(field, c);
        for i in 1..g.nx() - 1 {
            for j in 1..g.ny() - 1 {
                let d = interior[g.idx(i, j)];
                if d.is_nan() {
                    return f64::NAN;
                }
                worst = worst.max(d.abs() - flux_rounding(g, v, i, j));
            }
            let d = boundary[i];
            if d.is_nan() {
                return f64::NAN;
            }
            let t = field.trace_vector(i);
            let terms = prm.reaction(c, g.x_nodes[i], &t).abs() + prm.competition_term(c, &t).abs();
            let floor = flux_rounding(g, v, i, 0) + ROUNDING_FACTOR * f64::EPSILON * terms;
            worst = worst.max(d.abs() - floor);
        }
    }
    worst.max(0.0)
}

/// Nonnegative root of an increasing scalar map `g` given as `(value, slope)`.
/// Returns 0 when `g(0) >= 0`.
pub(crate) fn solve_monotone(mut g: impl FnMut(f64) -> (f64, f64), guess: f64) -> Result<f64> {
    let (g0, _) = g(0.0);
    if !g0.is_finite() {
        return Err(Error::NonFinite("bottom-node equation".into()));
    }
    if g0 >= 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = guess.max(1e-12);
    let mut expansions = 0;
    loop {
        let (gh, _) = g(hi);
        if !gh.is_finite() {
            return Err(Error::NonFinite("bottom-node equation".into()));
        }
        if gh > 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 {
            return Err(Error::NonFinite("no upper bracket for bottom-node equation".into()));
        }
    }
    let mut v = guess.clamp(lo, hi);
    if v <= lo || v >= hi {
        v = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let (gv, dg) = g(v);
        if gv == 0.0 {
            return Ok(v);
        }
        if gv < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let newton = if dg.is_finite() && dg > 0.0 { v - gv / dg } else { f64::NAN };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - v).abs() <= 1e-15 * v.abs().max(f64::MIN_POSITIVE) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

struct LineWork {
    p: Vec<f64>,
    q: Vec<f64>,
    diag: f64,
    rhs: f64,
    width: f64,
}

/// Eliminates the interior of column `i` of component `c`, leaving
/// `v_j = p_j + q_j v_{j-1}` and the reduced bottom equation
/// `diag * v_0 - rhs + width * (competition - f) = 0`.
fn eliminate_line(grid: &Grid, v: &[f64], i: usize) -> LineWork {
    let ny = grid.ny();
    let mut p = vec![0.0; ny];
    let mut q = vec![0.0; ny];
    // r_j = 1 - q_j, kept separately since q_j is close to 1 wherever the
    // vertical conductances dominate.
    let mut r = vec![1.0; ny];
    p[ny - 1] = v[grid.idx(i, ny - 1)];
    for j in (1..ny - 1).rev() {
        let st = stencil(grid, i, j);
        let rhs = st.west * v[grid.idx(i - 1, j)] + st.east * v[grid.idx(i + 1, j)];
        let lateral = st.west + st.east + st.north * r[j + 1];
        let den = lateral + st.south;
        p[j] = (rhs + st.north * p[j + 1]) / den;
        q[j] = st.south / den;
        r[j] = lateral / den;
    }
    let st = stencil(grid, i, 0);
    LineWork {
        diag: st.west + st.east + st.north * r[1],
        rhs: st.west * v[grid.idx(i - 1, 0)] + st.east * v[grid.idx(i + 1, 0)] + st.north * p[1],
        width: st.width,
        p,
        q,
    }
}

/// Relaxed values of column `i` for every component.
fn relax_column(grid: &Grid, prm: &ProblemParams, values: &[Vec<f64>], i: usize, damping: f64) -> Result<Vec<Vec<f64>>> {
    let k = prm.k;
    let ny = grid.ny();
    let x = grid.x_nodes[i];
    let lines: Vec<LineWork> = values.iter().map(|v| eliminate_line(grid, v, i)).collect();
    let mut t: Vec<f64> = values.iter().map(|v| v[grid.idx(i, 0)]).collect();

    let max_inner = if k == 1 { 1 } else { 60 };
    for _ in 0..max_inner {
        let mut change: f64 = 0.0;
        for c in 0..k {
            let lw = &lines[c];
            let partners = prm.partner_sum(c, &t);
            let coupling = lw.width * prm.beta * partners;
            let spec = &prm.reactions[c];
            let mut tv = t.clone();
            let g = |vb: f64| {
                tv[c] = vb;
                let f = spec.eval(x, &tv, c);
                let df = spec.d_own(x, &tv, c);
                let (vp, dvp) = if coupling == 0.0 {
                    (0.0, 0.0)
                } else {
                    (vb.powf(prm.p), prm.p * vb.powf(prm.p - 1.0))
                };
                (
                    lw.diag * vb + coupling * vp - lw.width * f - lw.rhs,
                    lw.diag + coupling * dvp - lw.width * df,
                )
            };
            let root = solve_monotone(g, t[c])?;
            change = change.max((root - t[c]).abs());
            t[c] = root;
        }
        if change <= 1e-15 * t.iter().fold(1.0f64, |m, v| m.max(v.abs())) {
            break;
        }
    }

    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let lw = &lines[c];
        let old = &values[c];
        let mut col = vec![0.0; ny];
        col[ny - 1] = old[grid.idx(i, ny - 1)];
        let mut below = t[c];
        for j in 0..ny - 1 {
            let solved = if j == 0 { t[c] } else { lw.p[j] + lw.q[j] * below };
            below = solved;
            let o = old[grid.idx(i, j)];
            let relaxed = (o + damping * (solved - o)).max(0.0);
            if !relaxed.is_finite() {
                return Err(Error::NonFinite(format!("column {i}, row {j}, component {c}")));
            }
            col[j] = relaxed;
        }
        out.push(col);
    }
    Ok(out)
}

fn write_column(grid: &Grid, values: &mut [Vec<f64>], i: usize, col: Vec<Vec<f64>>) {
    let ny = grid.ny();
    for (v, newc) in values.iter_mut().zip(col) {
        v[i * ny..(i + 1) * ny].copy_from_slice(&newc);
    }
}

fn sweep(grid: &Grid, prm: &ProblemParams, values: &mut [Vec<f64>], cfg: &SolverConfig) -> Result<()> {
    let nx = grid.nx();
    match cfg.sweep_order {
        SweepOrder::RedBlack => {
            for colour in 0..2 {
                let cols: Vec<usize> = (1..nx - 1).filter(|i| i % 2 == colour).collect();
                let snapshot: &[Vec<f64>] = values;
                let updated = par::map(&cols, cfg.execution, |&i| relax_column(grid, prm, snapshot, i, cfg.damping));
                for (&i, col) in cols.iter().zip(updated) {
                    write_column(grid, values, i, col?);
                }
            }
        }
        SweepOrder::Lexicographic => {
            for i in 1..nx - 1 {
                let col = relax_column(grid, prm, values, i, cfg.damping)?;
                write_column(grid, values, i, col);
            }
        }
    }
    Ok(())
}

/// Solves `(P_beta)` on `grid` with Dirichlet closure `bdata`, starting
/// from `init`. Non-convergence is reported, not raised; NaNs are raised.
pub fn solve_system(
    params: &Arc<ProblemParams>,
    grid: &Arc<Grid>,
    bdata: &BoundaryData,
    init: &Field,
    cfg: &SolverConfig,
) -> Result<(Field, SolveReport)> {
    params.validate()?;
    cfg.validate()?;
    bdata.validate(grid, params.k)?;
    if init.grid.nx() != grid.nx() || init.grid.ny() != grid.ny() || init.k() != params.k {
        return Err(Error::InvalidField("initial field does not match grid or k".into()));
    }
    let start = Instant::now();
    let mut values = init.values.clone();
    bdata.impose(grid, &mut values);

    let mut field = Field {
        params: Arc::clone(params),
        grid: Arc::clone(grid),
        values,
    };
    let mut res = residual(&field);
    let mut sweeps = 0;
    let mut previous = cfg.increment_tolerance.map(|_| field.values.clone());
    let mut last_change = f64::INFINITY;
    let mut estimate = f64::INFINITY;
    let settled = |res: f64, estimate: f64| {
        res <= cfg.tolerance && cfg.increment_tolerance.is_none_or(|t| estimate <= t)
    };
    while !settled(res, estimate) && sweeps < cfg.max_sweeps {
        if res.is_nan() {
            return Err(Error::NonFinite(format!("defect after {sweeps} sweeps")));
        }
        let burst = cfg.check_every.min(cfg.max_sweeps - sweeps);
        for _ in 0..burst {
            sweep(grid, params, &mut field.values, cfg)?;
        }
        sweeps += burst;
        res = residual(&field);
        if let Some(prev) = previous.as_mut() {
            let change = prev
                .iter()
                .flatten()
                .zip(field.values.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let rho = change / last_change;
            estimate = if change == 0.0 {
                0.0
            } else if rho < 1.0 {
                change * rho / (1.0 - rho)
            } else {
                f64::INFINITY
            };
            last_change = change;
            prev.clone_from(&field.values);
        }
    }
    if res.is_nan() {
        return Err(Error::NonFinite(format!("defect after {sweeps} sweeps")));
    }
    let report = SolveReport {
        iterations: sweeps,
        final_residual: res,
        converged: settled(res, estimate),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((field, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::default_grading;
    use crate::params::ReactionSpec;

    fn params(k: usize, s: f64, beta: f64) -> Arc<ProblemParams> {
        Arc::new(ProblemParams::symmetric(k, s, 1.0, beta).unwrap())
    }

    fn grid(s: f64, nx: usize, ny: usize) -> Arc<Grid> {
        let a = 1.0 - 2.0 * s;
        Arc::new(Grid::build(-1.0, 1.0, 1.0, nx, ny, default_grading(a), a).unwrap())
    }

    #[test]
    fn constants_and_linear_functions_have_zero_interior_defect() {
        for &s in &[0.25, 0.5, 0.75] {
            let g = grid(s, 9, 7);
            let p = params(1, s, 0.0);
            let c = Field::from_fn(p.clone(), g.clone(), |_, _, _| 3.0).unwrap();
            assert!(interior_defect(&c, 0).iter().all(|d| d.abs() < 1e-12));
            assert!(conormal_trace(&c, 0).iter().all(|d| d.abs() < 1e-12));
            let l = Field::from_fn(p, g, |_, x, _| x + 2.0).unwrap();
            assert!(interior_defect(&l, 0).iter().all(|d| d.abs() < 1e-12));
        }
    }

    #[test]
    fn calibration_profile_is_reproduced_exactly() {
        for &s in &[0.25, 0.5, 0.75] {
            let g = grid(s, 9, 9);
            let mut prm = ProblemParams::symmetric(1, s, 1.0, 0.0).unwrap();
            prm.reactions[0] = ReactionSpec::constant(-2.0 * s);
            let f = Field::from_fn(Arc::new(prm), g, |_, _, y| y.powf(2.0 * s)).unwrap();
            assert!(interior_defect(&f, 0).iter().all(|d| d.abs() < 1e-10));
            assert!(conormal_trace(&f, 0).iter().all(|d| (d + 2.0 * s).abs() < 1e-10));
            assert!(boundary_defect(&f, 0).iter().all(|d| d.abs() < 1e-10));
        }
    }

    #[test]
    fn conormal_of_y_at_half() {
        let g = grid(0.5, 5, 5);
        let f = Field::from_fn(params(1, 0.5, 0.0), g, |_, _, y| y).unwrap();
        assert!(conormal_trace(&f, 0).iter().all(|d| (d + 1.0).abs() < 1e-12));
    }

    #[test]
    fn constant_pair_boundary_defect() {
        let g = grid(0.5, 7, 5);
        let f = Field::from_fn(params(2, 0.5, 2.0), g, |_, _, _| 1.0).unwrap();
        for c in 0..2 {
            let d = boundary_defect(&f, c);
            assert!(d[1..6].iter().all(|v| (v - 2.0).abs() < 1e-12));
        }
    }

    #[test]
    fn scalar_solver_accepts_zero_and_finds_roots() {
        assert_eq!(solve_monotone(|v| (v + 1.0, 1.0), 0.3).unwrap(), 0.0);
        let r = solve_monotone(|v| (2.0 * v + 5.0 * v.sqrt() - 3.0, 2.0 + 2.5 / v.sqrt()), 0.0).unwrap();
        assert!((2.0 * r + 5.0 * r.sqrt() - 3.0).abs() < 1e-13);
        let big = solve_monotone(|v| (v + 1e9 * v * v - 1.0, 1.0 + 2e9 * v), 10.0).unwrap();
        assert!((big + 1e9 * big * big - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_data_is_solved_exactly() {
        let g = grid(0.5, 17, 9);
        let p = params(1, 0.5, 0.0);
        let bd = BoundaryData::constant(&g, &[2.5]).unwrap();
        let init = Field::zeros(p.clone(), g.clone());
        let cfg = SolverConfig {
            tolerance: 1e-12,
            ..Default::default()
        };
        let (f, rep) = solve_system(&p, &g, &bd, &init, &cfg).unwrap();
        assert!(rep.converged);
        assert!(f.values[0].iter().all(|v| (v - 2.5).abs() < 1e-10));
    }

    #[test]
    fn increment_stop_reaches_round_off() {
        let g = grid(0.75, 33, 17);
        let p = params(1, 0.75, 0.0);
        let bd = BoundaryData::constant(&g, &[0.7]).unwrap();
        let init = Field::zeros(p.clone(), g.clone());
        let cfg = SolverConfig {
            tolerance: 1e-11,
            increment_tolerance: Some(1e-14),
            ..Default::default()
        };
        let (f, rep) = solve_system(&p, &g, &bd, &init, &cfg).unwrap();
        assert!(rep.converged);
        assert!(f.values[0].iter().all(|v| (v - 0.7).abs() < 1e-13));
        let bad = SolverConfig {
            increment_tolerance: Some(0.0),
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn orders_agree() {
        let g = grid(0.4, 13, 9);
        let p = params(2, 0.4, 5.0);
        let bd = BoundaryData::mirror_crossing(&g).unwrap();
        let init = Field::zeros(p.clone(), g.clone());
        let rb = SolverConfig {
            tolerance: 1e-11,
            ..Default::default()
        };
        let lex = SolverConfig {
            sweep_order: SweepOrder::Lexicographic,
            ..rb
        };
        let (a, ra) = solve_system(&p, &g, &bd, &init, &rb).unwrap();
        let (b, rb) = solve_system(&p, &g, &bd, &init, &lex).unwrap();
        assert!(ra.converged && rb.converged);
        for c in 0..2 {
            for (x, y) in a.values[c].iter().zip(&b.values[c]) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
