//! Model constants of the competition system and the boundary reaction terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed family of boundary reactions `f_i(x, t)`.
///
/// `Logistic` and `Absorption` act on the component's own density `t_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ReactionFamily {
    Zero,
    Constant { lambda: f64 },
    Logistic { lambda: f64, kappa: f64 },
    /// `-rate * t_i^exponent + source`, the boundary law of the decay estimate.
    Absorption { rate: f64, exponent: f64, source: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec {
    #[serde(flatten)]
    pub family: ReactionFamily,
    /// The reaction vanishes whenever `|t| < cutoff_theta`.
    #[serde(default)]
    pub cutoff_theta: f64,
}

impl Default for ReactionSpec {
    fn default() -> Self {
        Self::zero()
    }
}

impl ReactionSpec {
    pub fn zero() -> Self {
        Self {
            family: ReactionFamily::Zero,
            cutoff_theta: 0.0,
        }
    }

    pub fn constant(lambda: f64) -> Self {
        Self {
            family: ReactionFamily::Constant { lambda },
            cutoff_theta: 0.0,
        }
    }

    pub fn logistic(lambda: f64, kappa: f64) -> Self {
        Self {
            family: ReactionFamily::Logistic { lambda, kappa },
            cutoff_theta: 0.0,
        }
    }

    pub fn absorption(rate: f64, exponent: f64, source: f64) -> Self {
        Self {
            family: ReactionFamily::Absorption {
                rate,
                exponent,
                source,
            },
            cutoff_theta: 0.0,
        }
    }

    pub fn with_cutoff(mut self, theta: f64) -> Self {
        self.cutoff_theta = theta;
        self
    }

    fn below_cutoff(&self, t: &[f64]) -> bool {
        self.cutoff_theta > 0.0 && t.iter().map(|v| v * v).sum::<f64>().sqrt() < self.cutoff_theta
    }

    /// Evaluates `f_i(x, t)` for the component `own`.
    pub fn eval(&self, _x: f64, t: &[f64], own: usize) -> f64 {
        if self.below_cutoff(t) {
            return 0.0;
        }
        let ti = t[own];
        match self.family {
            ReactionFamily::Zero => 0.0,
            ReactionFamily::Constant { lambda } => lambda,
            ReactionFamily::Logistic { lambda, kappa } => lambda * ti * (kappa - ti),
            ReactionFamily::Absorption {
                rate,
                exponent,
                source,
            } => -rate * ti.powf(exponent) + source,
        }
    }

    /// Partial derivative of [`eval`](Self::eval) with respect to `t[own]`.
    /// Returns 0 below the cutoff; infinite slopes at 0 are reported as such.
    pub fn d_own(&self, _x: f64, t: &[f64], own: usize) -> f64 {
        if self.below_cutoff(t) {
            return 0.0;
        }
        let ti = t[own];
        match self.family {
            ReactionFamily::Zero | ReactionFamily::Constant { .. } => 0.0,
            ReactionFamily::Logistic { lambda, kappa } => lambda * (kappa - 2.0 * ti),
            ReactionFamily::Absorption { rate, exponent, .. } => {
                -rate * exponent * ti.powf(exponent - 1.0)
            }
        }
    }
}

/// Free-function form of [`ReactionSpec::eval`].
pub fn eval_reaction(spec: &ReactionSpec, x: f64, t: &[f64], own: usize) -> f64 {
    spec.eval(x, t, own)
}

/// All constants of problem `(P_beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub s: f64,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    /// Row-major `k x k` interaction matrix with zero diagonal.
    pub interaction: Vec<f64>,
    pub reactions: Vec<ReactionSpec>,
}

impl ProblemParams {
    pub fn new(
        s: f64,
        k: usize,
        p: f64,
        q: f64,
        beta: f64,
        interaction: Vec<f64>,
        reactions: Vec<ReactionSpec>,
    ) -> Result<Self> {
        let params = Self {
            s,
            k,
            p,
            q,
            beta,
            interaction,
            reactions,
        };
        params.validate()?;
        Ok(params)
    }

    /// `k` densities with `a_ij = 1`, zero reactions and `q = p`.
    pub fn symmetric(k: usize, s: f64, p: f64, beta: f64) -> Result<Self> {
        Self::new(
            s,
            k,
            p,
            p,
            beta,
            unit_interaction(k),
            vec![ReactionSpec::zero(); k],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s = {} must lie in (0, 1)", self.s));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.p > 0.0 && self.p.is_finite()) || !(self.q > 0.0 && self.q.is_finite()) {
            return bad(format!("exponents p = {}, q = {} must be positive", self.p, self.q));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta = {} must be finite and nonnegative", self.beta));
        }
        if self.interaction.len() != self.k * self.k {
            return bad(format!(
                "interaction matrix has {} entries, expected {}",
                self.interaction.len(),
                self.k * self.k
            ));
        }
        for i in 0..self.k {
            for j in 0..self.k {
                let aij = self.interaction[i * self.k + j];
                if i == j && aij != 0.0 {
                    return bad(format!("a_{i}{i} = {aij} must be zero"));
                }
                if i != j && !(aij > 0.0 && aij.is_finite()) {
                    return bad(format!("a_{i}{j} = {aij} must be positive"));
                }
            }
        }
        if self.reactions.len() != self.k {
            return bad(format!(
                "{} reactions given for k = {}",
                self.reactions.len(),
                self.k
            ));
        }
        if self.reactions.iter().any(|r| !(r.cutoff_theta >= 0.0)) {
            return bad("reaction cutoff must be nonnegative".into());
        }
        Ok(())
    }

    /// `a = 1 - 2s`.
    pub fn a(&self) -> f64 {
        1.0 - 2.0 * self.s
    }

    pub fn aij(&self, i: usize, j: usize) -> f64 {
        self.interaction[i * self.k + j]
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self {
            beta,
            ..self.clone()
        }
    }

    /// `sum_{j != i} a_ij t_j^q`.
    pub fn partner_sum(&self, i: usize, t: &[f64]) -> f64 {
        (0..self.k)
            .filter(|&j| j != i)
            .map(|j| self.aij(i, j) * t[j].powf(self.q))
            .sum()
    }

    /// `beta * t_i^p * sum_{j != i} a_ij t_j^q`.
    pub fn competition_term(&self, i: usize, t: &[f64]) -> f64 {
        if self.beta == 0.0 {
            return 0.0;
        }
        self.beta * t[i].powf(self.p) * self.partner_sum(i, t)
    }

    pub fn reaction(&self, i: usize, x: f64, t: &[f64]) -> f64 {
        self.reactions[i].eval(x, t, i)
    }
}

pub fn unit_interaction(k: usize) -> Vec<f64> {
    (0..k * k)
        .map(|n| if n / k == n % k { 0.0 } else { 1.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reaction_examples() {
        let t = [0.3, 0.7];
        assert_eq!(ReactionSpec::zero().eval(0.1, &t, 0), 0.0);

        let s = 0.3;
        let c = ReactionSpec::constant(-2.0 * s).with_cutoff(0.5);
        assert_eq!(c.eval(0.0, &[0.6], 0), -0.6);

        let l = ReactionSpec::logistic(1.0, 1.0);
        assert!((l.eval(0.0, &[0.5], 0) - 0.25).abs() < 1e-15);
        assert_eq!(l.with_cutoff(1.0).eval(0.0, &[0.5], 0), 0.0);
    }

    #[test]
    fn competition_examples() {
        let p = ProblemParams::symmetric(2, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(p.competition_term(0, &[2.0, 3.0]), 0.0);

        let p = ProblemParams::symmetric(2, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(p.competition_term(0, &[2.0, 3.0]), 6.0);

        let p = ProblemParams::symmetric(3, 0.5, 2.0, 10.0).unwrap();
        assert_eq!(p.competition_term(0, &[1.0, 1.0, 1.0]), 20.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProblemParams::symmetric(2, 1.0, 1.0, 1.0).is_err());
        assert!(ProblemParams::symmetric(0, 0.5, 1.0, 1.0).is_err());
        let mut m = unit_interaction(2);
        m[1] = 0.0;
        assert!(ProblemParams::new(0.5, 2, 1.0, 1.0, 1.0, m, vec![ReactionSpec::zero(); 2]).is_err());
    }

    proptest! {
        #[test]
        fn competition_vanishes_without_self_or_partners(
            t1 in 0.0..5.0f64, t2 in 0.0..5.0f64, beta in 0.0..1e6f64, p in 0.2..3.0f64
        ) {
            let prm = ProblemParams::symmetric(3, 0.4, p, beta).unwrap();
            prop_assert_eq!(prm.competition_term(0, &[0.0, t1, t2]), 0.0);
            prop_assert_eq!(prm.competition_term(0, &[t1, 0.0, 0.0]), 0.0);
        }

        #[test]
        fn competition_is_monotone(
            t in proptest::collection::vec(0.0..3.0f64, 3),
            bump in 0.0..1.0f64,
            j in 0usize..3,
            p in 0.2..3.0f64,
            q in 0.2..3.0f64,
        ) {
            let mut prm = ProblemParams::symmetric(3, 0.4, p, 7.0).unwrap();
            prm.q = q;
            let base = prm.competition_term(0, &t);
            let mut up = t.clone();
            up[j] += bump;
            prop_assert!(prm.competition_term(0, &up) >= base);
        }

        #[test]
        fn cutoff_zeroes_small_densities(
            t in proptest::collection::vec(0.0..0.5f64, 2),
            theta in 0.75..2.0f64,
        ) {
            let spec = ReactionSpec::logistic(3.0, 2.0).with_cutoff(theta);
            prop_assert_eq!(spec.eval(0.0, &t, 0), 0.0);
            prop_assert_eq!(ReactionSpec::constant(-1.0).with_cutoff(theta).eval(0.0, &t, 1), 0.0);
        }
    }
}
