//! Quadrature helpers: Gauss-Legendre rules, exact-mean integrals of power
//! weights, and an error-checked wrapper over double-exponential integration.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order rule mapped onto `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn gauss(n: usize, lo: f64, hi: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        Self {
            nodes: x.iter().map(|t| c + h * t).collect(),
            weights: w.iter().map(|wi| h * wi).collect(),
        }
    }

    /// Composite Gauss rule with `panels` equal panels.
    pub fn composite(order: usize, panels: usize, lo: f64, hi: f64) -> Self {
        let mut rule = Self {
            nodes: Vec::with_capacity(order * panels),
            weights: Vec::with_capacity(order * panels),
        };
        let h = (hi - lo) / panels as f64;
        for k in 0..panels {
            let p = Self::gauss(order, lo + k as f64 * h, lo + (k + 1) as f64 * h);
            rule.nodes.extend(p.nodes);
            rule.weights.extend(p.weights);
        }
        rule
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `int_{y0}^{y1} y^e dy` for `0 <= y0 <= y1` and `e > -1`.
pub fn power_integral(e: f64, y0: f64, y1: f64) -> f64 {
    if (e + 1.0).abs() < f64::EPSILON {
        unreachable!("exponent -1 is outside the Muckenhoupt range");
    }
    (y1.powf(e + 1.0) - y0.powf(e + 1.0)) / (e + 1.0)
}

/// `int_lo^hi theta^w g(theta) dtheta` on `[lo, hi] ⊂ [0, PI/2]` through
/// `t = theta^(1+w)`, which absorbs the algebraic endpoint behaviour.
fn weighted_near_zero(w: f64, lo: f64, hi: f64, g: &impl Fn(f64) -> f64) -> f64 {
    let e = 1.0 + w;
    let (t0, t1) = (lo.powf(e), hi.powf(e));
    let panels = (((hi - lo) / 0.05).ceil() as usize).max(1);
    let step = (t1 - t0) / panels as f64;
    let mut edges: Vec<f64> = (0..=panels).map(|k| t0 + k as f64 * step).collect();
    edges[panels] = t1;
    if t0 == 0.0 {
        // `g(t^(1/e))` is not smooth at t = 0; grade geometrically towards it.
        let first = edges[1];
        let mut graded: Vec<f64> = (1..30).rev().map(|m| first * 0.25f64.powi(m)).collect();
        graded.insert(0, 0.0);
        edges.splice(0..1, graded);
    }
    let (x, wt) = gauss_legendre(8);
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (c, h) = (0.5 * (pair[0] + pair[1]), 0.5 * (pair[1] - pair[0]));
        for (xi, wi) in x.iter().zip(&wt) {
            let t = c + h * xi;
            total += h * wi * g(t.powf(1.0 / e));
        }
    }
    total / e
}

/// `int_lo^hi sin(theta)^w dtheta` for `0 <= lo < hi <= PI`, `w > -1`.
pub fn sin_pow_integral(w: f64, lo: f64, hi: f64) -> f64 {
    if w == 0.0 {
        return hi - lo;
    }
    let ratio = |th: f64| {
        if th == 0.0 {
            1.0
        } else {
            (th.sin() / th).powf(w)
        }
    };
    let mut total = 0.0;
    if lo < FRAC_PI_2 {
        total += weighted_near_zero(w, lo, hi.min(FRAC_PI_2), &ratio);
    }
    if hi > FRAC_PI_2 {
        let (a, b) = (PI - hi, PI - lo.max(FRAC_PI_2));
        total += weighted_near_zero(w, a.max(0.0), b, &ratio);
    }
    total
}

/// Quadrature rule for `int_0^PI sin(theta)^w g(theta) dtheta` with smooth `g`.
pub fn sin_weighted_rule(w: f64, panels: usize, order: usize) -> Rule {
    assert!(panels >= 2 && panels.is_multiple_of(2));
    let h = PI / panels as f64;
    let mut rule = Rule {
        nodes: Vec::new(),
        weights: Vec::new(),
    };
    for k in 0..panels {
        let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
        if k == 0 || k == panels - 1 {
            // Endpoint panel in the substituted variable.
            let e = 1.0 + w;
            let inner = Rule::gauss(order, 0.0, h.powf(e));
            for (&t, &wt) in inner.nodes.iter().zip(&inner.weights) {
                let d = t.powf(1.0 / e);
                let factor = if d == 0.0 { 1.0 } else { (d.sin() / d).powf(w) };
                let th = if k == 0 { d } else { PI - d };
                rule.nodes.push(th);
                rule.weights.push(wt * factor / e);
            }
        } else {
            let p = Rule::gauss(order, lo, hi);
            for (&th, &wt) in p.nodes.iter().zip(&p.weights) {
                rule.nodes.push(th);
                rule.weights.push(wt * th.sin().powf(w));
            }
        }
    }
    rule
}

/// Double-exponential integration with an explicit convergence check.
pub fn integrate_de(f: impl Fn(f64) -> f64, lo: f64, hi: f64, target: f64) -> Result<f64> {
    let out = quadrature::double_exponential::integrate(f, lo, hi, target);
    if !out.integral.is_finite() {
        return Err(Error::NonFinite("quadrature".into()));
    }
    // The estimate is conservative; allow a modest safety factor.
    if out.error_estimate > 1e3 * target.max(1e-300) {
        return Err(Error::Quadrature {
            achieved: out.error_estimate,
            target,
        });
    }
    Ok(out.integral)
}
