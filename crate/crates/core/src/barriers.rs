//! Explicit barriers for the decay estimate under boundary absorption
//! `d_nu^a v <= -M v^p + h`, and the check of that estimate on computed
//! solutions.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::par::{self, Execution};
use crate::params::{ProblemParams, ReactionFamily, ReactionSpec};
use crate::quad::{integrate_de, sin_pow_integral};
use crate::solver::{solve_system, BoundaryData, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub m: f64,
    pub delta: f64,
    /// `1 / int_R (1 + t^2)^{-b/2} dt`.
    pub c: f64,
}

impl BarrierParams {
    pub fn new(a: f64, p: f64, m: f64, delta: f64) -> Result<Self> {
        if !(a > -1.0 && a < 1.0) || !(p > 0.0) || !(m > 0.0) || !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "barrier needs a in (-1,1), p > 0, M > 0, delta >= 0; got a={a}, p={p}, M={m}, delta={delta}"
            )));
        }
        let b = 1.0 + (1.0 - a) / p;
        // With t = tan(phi): int_R (1+t^2)^{-b/2} dt = int_0^pi sin^{b-2}.
        let c = 1.0 / sin_pow_integral(b - 2.0, 0.0, PI);
        Ok(Self { a, p, b, m, delta, c })
    }

    pub fn s(&self) -> f64 {
        0.5 * (1.0 - self.a)
    }

    /// Horizontal scale `M^{1/(2s)}`.
    pub fn stretch(&self) -> f64 {
        self.m.powf(1.0 / (2.0 * self.s()))
    }

    /// `delta * M^{-1/p}`.
    pub fn floor(&self) -> f64 {
        self.delta * self.m.powf(-1.0 / self.p)
    }
}

/// `f(x) = c int_{-inf}^x (1 + t^2)^{-b/2} dt`.
pub fn barrier_f(x: f64, bp: &BarrierParams) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if x > 0.0 {
        return 1.0 - barrier_f(-x, bp);
    }
    bp.c * sin_pow_integral(bp.b - 2.0, 0.0, x.atan() + FRAC_PI_2)
}

/// `g_M(x) = f(M^{1/(2s)} (x - 1)) + f(M^{1/(2s)} (-x - 1))`.
pub fn barrier_gm(x: f64, bp: &BarrierParams) -> f64 {
    let k = bp.stretch();
    barrier_f(k * (x - 1.0), bp) + barrier_f(k * (-x - 1.0), bp)
}

/// Mass-one extension `P_a^{-1} int_R y^{1-a} g(x - xi) / (xi^2 + y^2)^{1 - a/2} dxi`.
///
/// With `xi = y tan(phi)` this is `P_a^{-1} int cos^{-a}(phi) g(x - y tan phi) dphi`;
/// each half of the `phi` range is integrated in the distance `d` to its
/// endpoint, where `cos(phi) = sin(d)` and `tan(phi) = cot(d)` are exact.
/// `breaks` lists abscissae where `g` changes rapidly.
pub fn poisson_extension(
    g: impl Fn(f64) -> f64,
    x: f64,
    y: f64,
    a: f64,
    breaks: &[f64],
    target: f64,
) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::InvalidParameter(format!("y = {y} must be nonnegative")));
    }
    if y == 0.0 {
        return Ok(g(x));
    }
    let mass = sin_pow_integral(-a, 0.0, PI);
    let mut total = 0.0;
    for sign in [-1.0, 1.0] {
        // Argument x + sign * y * cot(d); breaks where sign * (b - x) > 0.
        let mut cuts: Vec<f64> = breaks
            .iter()
            .filter(|&&b| sign * (b - x) > 0.0)
            .map(|&b| (y / (sign * (b - x))).atan())
            .collect();
        cuts.push(0.0);
        cuts.push(FRAC_PI_2);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let integrand = |d: f64| {
            let sd = d.sin();
            if sd <= 0.0 {
                return 0.0;
            }
            sd.powf(-a) * g(x + sign * y * d.cos() / sd)
        };
        // Near d = 0 use d = u^{1/(1-a)}, which absorbs the factor d^{-a}.
        let e = 1.0 / (1.0 - a);
        let near_zero = |u: f64| {
            let d = u.powf(e);
            if d <= 0.0 {
                return 0.0;
            }
            let sd = d.sin();
            e * (sd / d).powf(-a) * g(x + sign * y * d.cos() / sd)
        };
        for w in cuts.windows(2) {
            total += if w[0] == 0.0 {
                integrate_de(near_zero, 0.0, w[1].powf(1.0 - a), target)?
            } else {
                integrate_de(integrand, w[0], w[1], target)?
            };
        }
    }
    Ok(total / mass)
}

/// `w_delta(x, y) = delta M^{-1/p} + (extension of g_M)(x, y)`.
pub fn supersolution_wdelta(x: f64, y: f64, bp: &BarrierParams) -> Result<f64> {
    let ext = poisson_extension(|t| barrier_gm(t, bp), x, y, bp.a, &[-1.0, 1.0], 1e-10)?;
    Ok(bp.floor() + ext)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayOutcome {
    pub pass: bool,
    /// `rhs - lhs`.
    pub margin: f64,
    /// `sup` of the trace over `|x| <= 1/2`.
    pub lhs: f64,
    /// `(1 + delta) M^{-1/p} sup_{half circle of radius 1} v`.
    pub rhs: f64,
}

/// Tests `sup_{|x|<=1/2} v(x,0) <= (1 + delta) M^{-1/p} sup_{|X|=1} v` on a
/// single-density field whose boundary law is `-M v^p + h`, `|h| <= delta`.
pub fn decay_check(field: &Field, delta: f64) -> Result<DecayOutcome> {
    if field.k() != 1 {
        return Err(Error::Precondition(format!("decay check needs k = 1, got {}", field.k())));
    }
    let spec = field.params.reactions[0];
    let (m, p, h) = match spec.family {
        ReactionFamily::Absorption {
            rate,
            exponent,
            source,
        } if spec.cutoff_theta == 0.0 => (rate, exponent, source),
        _ => {
            return Err(Error::Precondition(format!(
                "decay check needs an absorption boundary law, got {spec:?}"
            )))
        }
    };
    if h.abs() > delta {
        return Err(Error::Precondition(format!("|h| = {} exceeds delta = {delta}", h.abs())));
    }
    let grid = &*field.grid;
    if grid.x_lo() > -1.0 || grid.x_hi() < 1.0 || grid.height() < 1.0 {
        return Err(Error::RadiusOutOfDomain {
            center: 0.0,
            radius: 1.0,
        });
    }
    let lhs = (0..grid.nx())
        .filter(|&i| grid.x_nodes[i].abs() <= 0.5)
        .map(|i| field.at(0, i, 0))
        .fold(0.0, f64::max);
    let v = field.component(0);
    let samples = 4 * grid.nx().max(grid.ny());
    let outer = (0..=samples)
        .map(|k| {
            let t = PI * k as f64 / samples as f64;
            v.sample(t.cos(), t.sin())
        })
        .fold(0.0, f64::max);
    let rhs = (1.0 + delta) * m.powf(-1.0 / p) * outer;
    Ok(DecayOutcome {
        pass: lhs <= rhs,
        margin: rhs - lhs,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCase {
    pub m: f64,
    pub p: f64,
    pub s: f64,
}

/// `{10, 100, 1000} x {0.5, 1, 2} x {0.25, 0.5, 0.75}`.
pub fn decay_grid() -> Vec<DecayCase> {
    let mut out = Vec::with_capacity(27);
    for &m in &[10.0, 100.0, 1000.0] {
        for &p in &[0.5, 1.0, 2.0] {
            for &s in &[0.25, 0.5, 0.75] {
                out.push(DecayCase { m, p, s });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySetup {
    pub delta: f64,
    /// Constant source `h`, `|h| <= delta`.
    pub source: f64,
    pub nx: usize,
    pub ny: usize,
    pub dirichlet: f64,
}

impl Default for DecaySetup {
    fn default() -> Self {
        Self {
            delta: 0.1,
            source: 0.0,
            nx: 65,
            ny: 33,
            dirichlet: 1.0,
        }
    }
}

/// Solves `L_a v = 0` on `[-1, 1] x [0, 1]` with Dirichlet data on the top
/// and sides and `d_nu^a v = -M v^p + h` on the bottom.
pub fn solve_decay_problem(case: &DecayCase, setup: &DecaySetup, cfg: &SolverConfig) -> Result<Field> {
    let mut prm = ProblemParams::symmetric(1, case.s, case.p, 0.0)?;
    prm.reactions = vec![ReactionSpec::absorption(case.m, case.p, setup.source)];
    prm.validate()?;
    let prm = Arc::new(prm);
    let grid = Arc::new(Grid::build(
        -1.0,
        1.0,
        1.0,
        setup.nx,
        setup.ny,
        crate::grid::default_grading(prm.a()),
        prm.a(),
    )?);
    let bd = BoundaryData::constant(&grid, &[setup.dirichlet])?;
    let init = Field::from_fn(Arc::clone(&prm), Arc::clone(&grid), |_, _, _| setup.dirichlet)?;
    let (field, rep) = solve_system(&prm, &grid, &bd, &init, cfg)?;
    if !rep.converged {
        return Err(Error::StepNotConverged {
            step: 0,
            beta: 0.0,
            residual: rep.final_residual,
            iterations: rep.iterations,
        });
    }
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub case: DecayCase,
    pub outcome: DecayOutcome,
}

/// Runs [`decay_check`] on every case of `cases`, in parallel over cases.
pub fn decay_sweep(
    cases: &[DecayCase],
    setup: &DecaySetup,
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<Vec<DecayRow>> {
    let inner = SolverConfig {
        execution: if exec.is_parallel() {
            Execution::Sequential
        } else {
            cfg.execution
        },
        ..*cfg
    };
    par::map(cases, exec, |case| {
        let field = solve_decay_problem(case, setup, &inner)?;
        Ok(DecayRow {
            case: *case,
            outcome: decay_check(&field, setup.delta)?,
        })
    })
    .into_iter()
    .collect()
}
