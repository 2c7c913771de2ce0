//! Functionals used to characterise computed solutions: Hölder and Morrey
//! quotients, the two-phase monotonicity quotient, the energy/height pair,
//! the reflected differences, and free-boundary bookkeeping.
//!
//! Radial functionals integrate in polar coordinates about `(x0, 0)`. With
//! `N = 1` the weight `y^a = rho^a sin(theta)^a`, and the singular kernel
//! `|X - X0|^{-(N - 2s)} = rho^{-a}` cancels the radial part of the weight, so
//! the only singular factor left is `sin(theta)^a`, which is handled by the
//! endpoint-substituted angular rule. Integrands are evaluated from the
//! bilinear interpolant of the nodal values.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, GridFunction};
use crate::grid::Grid;
use crate::par::{self, Execution};
use crate::quad::{sin_weighted_rule, Rule};
use crate::solver::conormal_of;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub center: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    /// Largest relative decrease `(v_k - v_{k+1}) / v_k` between consecutive radii.
    pub fn max_relative_dip(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| if w[0] > 0.0 { (w[0] - w[1]) / w[0] } else { 0.0 })
            .fold(0.0, f64::max)
    }
}

/// Rectangle of nodes used by [`holder_quotient`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subdomain {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

/// Reflected differences `v_i - sum_{j != i} (a_ij / a_ji) v_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatField {
    pub components: Vec<GridFunction>,
}

pub fn hat_field(field: &Field) -> HatField {
    let prm = &*field.params;
    let k = field.k();
    let components = (0..k)
        .map(|i| {
            let mut values = field.values[i].clone();
            for j in (0..k).filter(|&j| j != i) {
                let r = prm.aij(i, j) / prm.aij(j, i);
                for (v, w) in values.iter_mut().zip(&field.values[j]) {
                    *v -= r * w;
                }
            }
            GridFunction {
                grid: Arc::clone(&field.grid),
                values,
            }
        })
        .collect();
    HatField { components }
}

// ---------------------------------------------------------------- Hölder

fn nodes_in(grid: &Grid, sub: &Subdomain) -> (Vec<usize>, Vec<usize>) {
    let xs = (0..grid.nx())
        .filter(|&i| grid.x_nodes[i] >= sub.x_lo && grid.x_nodes[i] <= sub.x_hi)
        .collect();
    let ys = (0..grid.ny())
        .filter(|&j| grid.y_nodes[j] >= sub.y_lo && grid.y_nodes[j] <= sub.y_hi)
        .collect();
    (xs, ys)
}

/// Sampled `C^{0,alpha}` seminorm of `v_i` over `sub`.
pub fn holder_quotient(field: &Field, i: usize, alpha: f64, sub: &Subdomain) -> Result<f64> {
    holder_quotient_of(&field.component(i), alpha, sub, false)
}

/// Sampled Hölder seminorm of a grid function. Pairs are all adjacent and
/// diagonal neighbours plus every pair of a decimated lattice (at most 32
/// nodes per direction); `all_pairs` enumerates every node pair instead.
pub fn holder_quotient_of(f: &GridFunction, alpha: f64, sub: &Subdomain, all_pairs: bool) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    let g = &*f.grid;
    let (xs, ys) = nodes_in(g, sub);
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Precondition(format!("subdomain {sub:?} contains no nodes")));
    }
    let quotient = |(i1, j1): (usize, usize), (i2, j2): (usize, usize)| {
        let d = (g.x_nodes[i1] - g.x_nodes[i2]).hypot(g.y_nodes[j1] - g.y_nodes[j2]);
        if d == 0.0 {
            0.0
        } else {
            (f.at(i1, j1) - f.at(i2, j2)).abs() / d.powf(alpha)
        }
    };

    let mut best: f64 = 0.0;
    let (ix0, ix1) = (xs[0], *xs.last().unwrap());
    let (jy0, jy1) = (ys[0], *ys.last().unwrap());
    for i in ix0..=ix1 {
        for j in jy0..=jy1 {
            if i < ix1 {
                best = best.max(quotient((i, j), (i + 1, j)));
                if j < jy1 {
                    best = best.max(quotient((i, j), (i + 1, j + 1)));
                }
                if j > jy0 {
                    best = best.max(quotient((i, j), (i + 1, j - 1)));
                }
            }
            if j < jy1 {
                best = best.max(quotient((i, j), (i, j + 1)));
            }
        }
    }

    let (sx, sy) = if all_pairs {
        (1, 1)
    } else {
        (xs.len().div_ceil(32).max(1), ys.len().div_ceil(32).max(1))
    };
    let lattice: Vec<(usize, usize)> = xs
        .iter()
        .step_by(sx)
        .flat_map(|&i| ys.iter().step_by(sy).map(move |&j| (i, j)))
        .collect();
    let rows = par::map(&(0..lattice.len()).collect::<Vec<_>>(), Execution::Parallel, |&a| {
        lattice[a + 1..]
            .iter()
            .map(|&b| quotient(lattice[a], b))
            .fold(0.0, f64::max)
    });
    Ok(rows.into_iter().fold(best, f64::max))
}

// ---------------------------------------------------------------- radial machinery

fn check_radii(grid: &Grid, center: f64, radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[0] < w[1])) || !(radii[0] > 0.0) {
        return Err(Error::Precondition("radii must be positive and strictly increasing".into()));
    }
    let room = (center - grid.x_lo()).min(grid.x_hi() - center).min(grid.height());
    let r = *radii.last().unwrap();
    if r > room * (1.0 + 1e-12) {
        return Err(Error::RadiusOutOfDomain { center, radius: r });
    }
    Ok(())
}

fn min_spacing(grid: &Grid) -> f64 {
    grid.x_nodes
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

fn angular_rule(grid: &Grid, r_max: f64, weight: f64) -> Rule {
    let h = min_spacing(grid);
    let mut panels = ((std::f64::consts::PI * r_max / (0.5 * h)).ceil() as usize).max(16);
    panels += panels % 2;
    sin_weighted_rule(weight, panels, 4)
}

/// `int_{B_r^+} rho^m sin(theta)^w G dA` for every `r` in `radii`, with `G`
/// evaluated at Cartesian points.
fn half_disc_integrals(
    grid: &Grid,
    center: f64,
    radii: &[f64],
    rho_power: f64,
    theta_weight: f64,
    integrand: &(dyn Fn(f64, f64) -> f64 + Sync),
) -> Vec<f64> {
    let r_max = *radii.last().unwrap();
    let theta = angular_rule(grid, r_max, theta_weight);
    let h = min_spacing(grid);
    let mut bounds = vec![0.0];
    bounds.extend_from_slice(radii);
    let annuli: Vec<(f64, f64)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
    let pieces = par::map(&annuli, Execution::Parallel, |&(r0, r1)| {
        let panels = (((r1 - r0) / (0.5 * h)).ceil() as usize).max(1);
        let rho = Rule::composite(4, panels, r0, r1);
        rho.nodes
            .iter()
            .zip(&rho.weights)
            .map(|(&r, &wr)| {
                let ang: f64 = theta
                    .nodes
                    .iter()
                    .zip(&theta.weights)
                    .map(|(&t, &wt)| wt * integrand(center + r * t.cos(), r * t.sin()))
                    .sum();
                wr * r.powf(1.0 + rho_power) * ang
            })
            .sum::<f64>()
    });
    let mut acc = 0.0;
    pieces
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn grad_sq(f: &GridFunction, x: f64, y: f64) -> f64 {
    let (_, g) = f.sample_with_gradient(x, y);
    g[0] * g[0] + g[1] * g[1]
}

/// `Phi(r) = r^{-(2 - 2 eps)} int_{B_r^+} sum_i |grad v_i|^2`, unweighted.
pub fn morrey_quotient(field: &Field, center: f64, radii: &[f64], eps: f64) -> Result<RadialProfile> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Precondition(format!("eps = {eps} must lie in (0, 1/2)")));
    }
    check_radii(&field.grid, center, radii)?;
    let comps: Vec<GridFunction> = (0..field.k()).map(|c| field.component(c)).collect();
    let integrand = |x: f64, y: f64| comps.iter().map(|f| grad_sq(f, x, y)).sum::<f64>();
    let ints = half_disc_integrals(&field.grid, center, radii, 0.0, 0.0, &integrand);
    Ok(RadialProfile {
        center,
        radii: radii.to_vec(),
        values: ints
            .iter()
            .zip(radii)
            .map(|(i, r)| i / r.powf(2.0 - 2.0 * eps))
            .collect(),
    })
}

/// Two-phase monotonicity quotient
/// `Phi(r) = prod_i r^{-2 mu} int_{B_r^+} y^a |grad z_i|^2 / |X - X0|^{1 - 2s}`.
pub fn acf_quotient(
    z1: &GridFunction,
    z2: &GridFunction,
    center: f64,
    mu: f64,
    radii: &[f64],
) -> Result<RadialProfile> {
    let grid = &*z1.grid;
    check_radii(grid, center, radii)?;
    let scale = z1.values.iter().chain(&z2.values).fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE).powi(2);
    let (t1, t2) = (z1.trace(), z2.trace());
    let offending: Vec<usize> = (0..grid.nx()).filter(|&i| (t1[i] * t2[i]).abs() > tol).collect();
    if !offending.is_empty() {
        return Err(Error::NotSegregated { nodes: offending });
    }
    for (n, z) in [z1, z2].into_iter().enumerate() {
        let v = z.sample(center, 0.0);
        if v.abs() > 1e-8 * scale.max(1.0) {
            return Err(Error::Precondition(format!(
                "z{} = {v:e} at the centre, expected 0",
                n + 1
            )));
        }
    }
    let a = grid.a;
    let i1 = half_disc_integrals(grid, center, radii, 0.0, a, &|x, y| grad_sq(z1, x, y));
    let i2 = half_disc_integrals(grid, center, radii, 0.0, a, &|x, y| grad_sq(z2, x, y));
    Ok(RadialProfile {
        center,
        radii: radii.to_vec(),
        values: radii
            .iter()
            .zip(i1.iter().zip(&i2))
            .map(|(r, (a1, a2))| a1 * a2 / r.powf(4.0 * mu))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyHeight {
    pub e: RadialProfile,
    pub h: RadialProfile,
    /// `H'(r) - 2 E(r) / r` with `H'` from finite differences on the radii.
    pub identity_defect: Vec<f64>,
}

/// Derivative of samples on a nonuniform grid: three-point centred
/// formula inside, three-point one-sided formulas at the ends.
pub fn nonuniform_derivative(r: &[f64], h: &[f64]) -> Vec<f64> {
    let n = r.len();
    assert!(n >= 3);
    let three = |x: [f64; 3], y: [f64; 3], at: f64| {
        // Derivative of the quadratic through the three samples.
        let (d0, d1, d2) = (
            (2.0 * at - x[1] - x[2]) / ((x[0] - x[1]) * (x[0] - x[2])),
            (2.0 * at - x[0] - x[2]) / ((x[1] - x[0]) * (x[1] - x[2])),
            (2.0 * at - x[0] - x[1]) / ((x[2] - x[0]) * (x[2] - x[1])),
        );
        d0 * y[0] + d1 * y[1] + d2 * y[2]
    };
    (0..n)
        .map(|k| {
            let m = k.clamp(1, n - 2);
            three([r[m - 1], r[m], r[m + 1]], [h[m - 1], h[m], h[m + 1]], r[k])
        })
        .collect()
}

/// Energy `E(r)` and height `H(r)` of component `i` about `(center, 0)`.
pub fn almgren_eh(field: &Field, i: usize, center: f64, radii: &[f64]) -> Result<EnergyHeight> {
    let grid = &*field.grid;
    check_radii(grid, center, radii)?;
    if radii.len() < 3 {
        return Err(Error::Precondition("at least three radii are needed".into()));
    }
    let prm = &*field.params;
    let a = grid.a;
    let v = field.component(i);

    let bulk = half_disc_integrals(grid, center, radii, a, a, &|x, y| grad_sq(&v, x, y));

    // Boundary term -f_i v_i + beta v_i^{p+1} sum_j a_ij v_j^q on the trace.
    let x = &grid.x_nodes;
    let phi: Vec<f64> = (0..grid.nx())
        .map(|n| {
            let t = field.trace_vector(n);
            -prm.reaction(i, x[n], &t) * t[i] + prm.competition_term(i, &t) * t[i]
        })
        .collect();
    let boundary: Vec<f64> = radii
        .iter()
        .map(|&r| integrate_piecewise_linear(x, &phi, center - r, center + r))
        .collect();

    let theta = angular_rule(grid, *radii.last().unwrap(), a);
    let heights: Vec<f64> = radii
        .iter()
        .map(|&r| {
            theta.integrate(|t| {
                let val = v.sample(center + r * t.cos(), r * t.sin());
                val * val
            })
        })
        .collect();

    let energies: Vec<f64> = radii
        .iter()
        .zip(bulk.iter().zip(&boundary))
        .map(|(r, (b, s))| r.powf(-a) * (b + s))
        .collect();
    let dh = nonuniform_derivative(radii, &heights);
    let identity_defect = dh
        .iter()
        .zip(energies.iter().zip(radii))
        .map(|(d, (e, r))| d - 2.0 * e / r)
        .collect();
    Ok(EnergyHeight {
        e: RadialProfile {
            center,
            radii: radii.to_vec(),
            values: energies,
        },
        h: RadialProfile {
            center,
            radii: radii.to_vec(),
            values: heights,
        },
        identity_defect,
    })
}

/// `int_lo^hi` of the piecewise-linear interpolant of `(x, f)`.
pub fn integrate_piecewise_linear(x: &[f64], f: &[f64], lo: f64, hi: f64) -> f64 {
    let interp = |t: f64| {
        let k = crate::grid::locate_interval(x, t);
        let s = (t - x[k]) / (x[k + 1] - x[k]);
        f[k] * (1.0 - s) + f[k + 1] * s
    };
    let mut pts = vec![lo];
    pts.extend(x.iter().copied().filter(|&t| t > lo && t < hi));
    pts.push(hi);
    pts.windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (interp(w[0]) + interp(w[1])))
        .sum()
}

// ---------------------------------------------------------------- limit system

/// `sup |d_nu^a (a21 v1 - a12 v2) - (a21 f1 - a12 f2)|` over the bottom
/// nodes that carry the conormal equation.
pub fn reflection_residual(field: &Field) -> Result<f64> {
    if field.k() != 2 {
        return Err(Error::Precondition(format!(
            "reflection law needs k = 2, got k = {}",
            field.k()
        )));
    }
    let prm = &*field.params;
    let grid = &*field.grid;
    let (a12, a21) = (prm.aij(0, 1), prm.aij(1, 0));
    let w: Vec<f64> = field.values[0]
        .iter()
        .zip(&field.values[1])
        .map(|(v1, v2)| a21 * v1 - a12 * v2)
        .collect();
    let conormal = conormal_of(grid, &w);
    let nx = grid.nx();
    Ok((1..nx - 1)
        .map(|n| {
            let t = field.trace_vector(n);
            let x = grid.x_nodes[n];
            (conormal[n] - (a21 * prm.reaction(0, x, &t) - a12 * prm.reaction(1, x, &t))).abs()
        })
        .fold(0.0, f64::max))
}

/// Worst violation per component of
/// `d v_i <= f_i`, `d v̂_i >= f̂_i` and `v_i (d v̂_i - f̂_i) = 0`.
pub fn segregation_system_residual(field: &Field) -> Vec<[f64; 3]> {
    let prm = &*field.params;
    let grid = &*field.grid;
    let k = field.k();
    let hats = hat_field(field);
    let nx = grid.nx();
    (0..k)
        .map(|i| {
            let dv = conormal_of(grid, &field.values[i]);
            let dhat = conormal_of(grid, &hats.components[i].values);
            let mut worst = [0.0f64; 3];
            for n in 1..nx - 1 {
                let t = field.trace_vector(n);
                let x = grid.x_nodes[n];
                let fi = prm.reaction(i, x, &t);
                let fhat = fi
                    - (0..k)
                        .filter(|&j| j != i)
                        .map(|j| prm.aij(i, j) / prm.aij(j, i) * prm.reaction(j, x, &t))
                        .sum::<f64>();
                worst[0] = worst[0].max(dv[n] - fi);
                worst[1] = worst[1].max(fhat - dhat[n]);
                worst[2] = worst[2].max((t[i] * (dhat[n] - fhat)).abs());
            }
            worst
        })
        .collect()
}

// ---------------------------------------------------------------- free boundary

/// Least-squares slope of `log osc_{[x0 - r, x0 + r]} trace` against `log r`.
pub fn fit_local_exponent(x: &[f64], trace: &[f64], x0: usize, radii: &[f64]) -> Result<f64> {
    let c = x[x0];
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .filter_map(|&r| {
            let window: Vec<f64> = x
                .iter()
                .zip(trace)
                .filter(|(xi, _)| (**xi - c).abs() <= r * (1.0 + 1e-12))
                .map(|(_, &u)| u)
                .collect();
            if window.len() < 2 || r <= 0.0 {
                return None;
            }
            let osc = window.iter().cloned().fold(f64::MIN, f64::max)
                - window.iter().cloned().fold(f64::MAX, f64::min);
            (osc > 0.0).then(|| (r.ln(), osc.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::Precondition(format!(
            "only {} usable radii for the exponent fit (need 3)",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// `10 * tolerance^{1/2}`.
pub fn default_free_boundary_threshold(tolerance: f64) -> f64 {
    10.0 * tolerance.sqrt()
}

/// Bottom nodes where every component is below `threshold`.
pub fn free_boundary(field: &Field, threshold: f64) -> Vec<usize> {
    (0..field.grid.nx())
        .filter(|&n| (0..field.k()).all(|c| field.at(c, n, 0) < threshold))
        .collect()
}

/// Splits sorted indices into runs of consecutive values.
pub fn clusters(indices: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &n in indices {
        match out.last_mut() {
            Some(run) if *run.last().unwrap() + 1 == n => run.push(n),
            _ => out.push(vec![n]),
        }
    }
    out
}

/// Interior bottom node where the largest density is smallest.
pub fn free_boundary_point(field: &Field) -> usize {
    let nx = field.grid.nx();
    (1..nx - 1)
        .min_by(|&m, &n| {
            let top = |i: usize| (0..field.k()).map(|c| field.at(c, i, 0)).fold(0.0, f64::max);
            top(m).total_cmp(&top(n))
        })
        .unwrap_or(0)
}

/// Free-boundary threshold used at finite `beta`: the default threshold, or
/// twice the smallest interface height if that is larger.
pub fn extraction_threshold(field: &Field, tolerance: f64) -> f64 {
    let n = free_boundary_point(field);
    let floor = (0..field.k()).map(|c| field.at(c, n, 0)).fold(0.0, f64::max);
    default_free_boundary_threshold(tolerance).max(2.0 * floor)
}

/// Number of components exceeding `threshold` somewhere within `r` of node `x0`.
pub fn multiplicity(field: &Field, x0: usize, threshold: f64, r: f64) -> usize {
    let x = &field.grid.x_nodes;
    let c = x[x0];
    (0..field.k())
        .filter(|&comp| {
            (0..x.len()).any(|n| (x[n] - c).abs() <= r && field.at(comp, n, 0) > threshold)
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ProblemParams, ReactionSpec};
    use std::f64::consts::PI;

    fn unit_grid(nx: usize, ny: usize, a: f64) -> Arc<Grid> {
        Arc::new(Grid::build(-1.0, 1.0, 1.0, nx, ny, 1.0, a).unwrap())
    }

    fn field_of(k: usize, s: f64, g: Arc<Grid>, f: impl Fn(usize, f64, f64) -> f64) -> Field {
        let p = Arc::new(ProblemParams::symmetric(k, s, 1.0, 0.0).unwrap());
        Field::from_fn(p, g, f).unwrap()
    }

    #[test]
    fn hat_field_examples() {
        let g = unit_grid(5, 4, 0.0);
        let one = field_of(1, 0.5, g.clone(), |_, x, _| x + 1.0);
        assert_eq!(hat_field(&one).components[0].values, one.values[0]);

        let two = field_of(2, 0.5, g.clone(), |c, x, _| if c == 0 { 2.0 + x } else { 1.0 });
        let h = hat_field(&two);
        for (v, (a, b)) in h.components[0].values.iter().zip(two.values[0].iter().zip(&two.values[1])) {
            assert!((v - (a - b)).abs() < 1e-15);
        }

        let p = ProblemParams::new(
            0.5,
            2,
            1.0,
            1.0,
            0.0,
            vec![0.0, 2.0, 1.0, 0.0],
            vec![ReactionSpec::zero(); 2],
        )
        .unwrap();
        let f = Field::from_fn(Arc::new(p), g, |_, _, _| 1.0).unwrap();
        let h = hat_field(&f);
        assert!(h.components[0].values.iter().all(|v| (v + 1.0).abs() < 1e-15));
        assert!(h.components[1].values.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn holder_examples() {
        let g = Arc::new(Grid::build(0.0, 1.0, 1.0, 11, 11, 1.0, 0.0).unwrap());
        let sub = Subdomain {
            x_lo: 0.0,
            x_hi: 1.0,
            y_lo: 0.0,
            y_hi: 1.0,
        };
        let c = field_of(1, 0.5, g.clone(), |_, _, _| 4.0);
        assert_eq!(holder_quotient(&c, 0, 0.5, &sub).unwrap(), 0.0);
        let lin = field_of(1, 0.5, g.clone(), |_, x, _| x);
        assert!((holder_quotient(&lin, 0, 1.0, &sub).unwrap() - 1.0).abs() < 1e-14);
        let empty = Subdomain { x_lo: 2.0, ..sub };
        assert!(holder_quotient(&lin, 0, 1.0, &empty).is_err());
    }

    #[test]
    fn holder_invariances() {
        let g = Arc::new(Grid::build(0.0, 1.0, 1.0, 17, 9, 1.0, 0.0).unwrap());
        let f = GridFunction::from_fn(g, |x, y| (3.0 * x).sin() + y * y);
        let sub = Subdomain {
            x_lo: 0.1,
            x_hi: 0.9,
            y_lo: 0.0,
            y_hi: 0.8,
        };
        let base = holder_quotient_of(&f, 0.7, &sub, false).unwrap();
        let shifted = holder_quotient_of(&f.map(|v| v + 5.0), 0.7, &sub, false).unwrap();
        let scaled = holder_quotient_of(&f.map(|v| 3.0 * v), 0.7, &sub, false).unwrap();
        assert!((base - shifted).abs() < 1e-12);
        assert!((scaled - 3.0 * base).abs() < 1e-12);
        let full = holder_quotient_of(&f, 0.7, &sub, true).unwrap();
        assert!(full >= base - 1e-15);
    }

    #[test]
    fn morrey_of_linear_function() {
        let g = unit_grid(41, 21, 0.0);
        let f = field_of(1, 0.5, g, |_, x, _| x + 2.0);
        let radii = [0.2, 0.4, 0.8];
        let eps = 0.1;
        let prof = morrey_quotient(&f, 0.0, &radii, eps).unwrap();
        for (r, v) in radii.iter().zip(&prof.values) {
            let exact = 0.5 * PI * r.powf(2.0 * eps);
            assert!((v - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
        }
        let c = field_of(1, 0.5, unit_grid(9, 5, 0.0), |_, _, _| 1.0);
        assert!(morrey_quotient(&c, 0.0, &radii, eps).unwrap().values.iter().all(|&v| v == 0.0));
        assert!(matches!(
            morrey_quotient(&c, 0.5, &radii, eps),
            Err(Error::RadiusOutOfDomain { .. })
        ));
    }

    #[test]
    fn acf_rejects_overlap_and_handles_zero() {
        let g = unit_grid(21, 11, 0.0);
        let z1 = GridFunction::from_fn(g.clone(), |x, _| x.max(0.0));
        let z0 = GridFunction::from_fn(g.clone(), |_, _| 0.0);
        let prof = acf_quotient(&z1, &z0, 0.0, 1.0, &[0.2, 0.5]).unwrap();
        assert!(prof.values.iter().all(|&v| v == 0.0));
        let wide = GridFunction::from_fn(g, |x, _| (x + 0.5).max(0.0));
        assert!(matches!(
            acf_quotient(&z1, &wide, 0.0, 1.0, &[0.2]),
            Err(Error::NotSegregated { .. }) | Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn energy_height_of_constant() {
        let g = unit_grid(21, 11, 0.0);
        let f = field_of(1, 0.5, g, |_, _, _| 2.0);
        let eh = almgren_eh(&f, 0, 0.0, &[0.2, 0.4, 0.6]).unwrap();
        assert!(eh.e.values.iter().all(|v| v.abs() < 1e-14));
        // H = c^2 |half circle| with unit weight: 4 pi.
        assert!(eh.h.values.iter().all(|v| (v - 4.0 * PI).abs() < 1e-10));
        assert!(eh.identity_defect.iter().all(|d| d.abs() < 1e-9));
    }

    #[test]
    fn energy_height_of_y() {
        // E = pi r^2 / 2 and H = pi r^2 / 2, so H' = 2 E / r.
        let g = unit_grid(41, 21, 0.0);
        let f = field_of(1, 0.5, g, |_, _, y| y);
        let radii = [0.2, 0.3, 0.45, 0.6];
        let eh = almgren_eh(&f, 0, 0.0, &radii).unwrap();
        for (k, r) in radii.iter().enumerate() {
            assert!((eh.e.values[k] - PI * r * r / 2.0).abs() < 1e-10);
            assert!((eh.h.values[k] - PI * r * r / 2.0).abs() < 1e-10);
            assert!(eh.identity_defect[k].abs() < 1e-9);
        }
    }

    #[test]
    fn exponent_fits() {
        let x: Vec<f64> = (0..=400).map(|n| -1.0 + n as f64 / 200.0).collect();
        let radii: Vec<f64> = (0..8).map(|m| 0.02 * 1.5f64.powi(m)).collect();
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let root: Vec<f64> = x.iter().map(|v| v.abs().sqrt()).collect();
        assert!((fit_local_exponent(&x, &abs, 200, &radii).unwrap() - 1.0).abs() < 0.02);
        assert!((fit_local_exponent(&x, &root, 200, &radii).unwrap() - 0.5).abs() < 0.02);
        assert!(fit_local_exponent(&x, &abs, 200, &radii[..2]).is_err());
    }

    #[test]
    fn free_boundary_and_multiplicity() {
        let g = unit_grid(21, 5, 0.0);
        let h = 0.1;
        let f = field_of(2, 0.5, g.clone(), |c, x, _| if c == 0 { x.max(0.0) } else { (-x).max(0.0) });
        let fb = free_boundary(&f, h);
        assert!(!fb.is_empty());
        assert!(fb.iter().all(|&n| g.x_nodes[n].abs() <= h + 1e-12));
        assert_eq!(clusters(&fb).len(), 1);
        assert_eq!(multiplicity(&f, 10, 1e-6, 0.15), 2);
        assert_eq!(multiplicity(&f, 18, 1e-6, 0.15), 1);

        let ones = field_of(2, 0.5, g.clone(), |_, _, _| 1.0);
        assert!(free_boundary(&ones, 0.5).is_empty());
        let zero = field_of(2, 0.5, g, |_, _, _| 0.0);
        assert_eq!(multiplicity(&zero, 10, 1e-6, 0.5), 0);
    }

    #[test]
    fn reflection_residual_requires_two() {
        let g = unit_grid(9, 5, 0.0);
        let f = field_of(3, 0.5, g.clone(), |_, _, _| 1.0);
        assert!(reflection_residual(&f).is_err());
        let f = field_of(2, 0.5, g, |_, _, _| 1.0);
        assert!(reflection_residual(&f).unwrap() < 1e-14);
    }

    #[test]
    fn segregation_residual_of_zero_field() {
        let g = unit_grid(9, 5, 0.0);
        let f = field_of(3, 0.5, g.clone(), |_, _, _| 0.0);
        assert!(segregation_system_residual(&f).iter().all(|r| r.iter().all(|&v| v == 0.0)));
        let mut p = ProblemParams::symmetric(2, 0.5, 1.0, 0.0).unwrap();
        p.reactions = vec![ReactionSpec::constant(3.0).with_cutoff(0.1); 2];
        let f = Field::from_fn(Arc::new(p), g, |_, _, _| 0.0).unwrap();
        assert!(segregation_system_residual(&f).iter().all(|r| r.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn piecewise_linear_integral() {
        let x = [0.0, 1.0, 2.0];
        let f = [0.0, 1.0, 0.0];
        assert!((integrate_piecewise_linear(&x, &f, 0.5, 1.5) - 0.75).abs() < 1e-15);
    }
}
