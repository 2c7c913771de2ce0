use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::ProblemParams;

/// `k` nonnegative grid functions, the extensions `v_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub params: Arc<ProblemParams>,
    pub grid: Arc<Grid>,
    /// One column-major array per component.
    pub values: Vec<Vec<f64>>,
}

impl Field {
    pub fn new(params: Arc<ProblemParams>, grid: Arc<Grid>, values: Vec<Vec<f64>>) -> Result<Self> {
        let f = Self { params, grid, values };
        f.validate()?;
        Ok(f)
    }

    pub fn zeros(params: Arc<ProblemParams>, grid: Arc<Grid>) -> Self {
        let n = grid.len();
        let k = params.k;
        Self {
            params,
            grid,
            values: vec![vec![0.0; n]; k],
        }
    }

    /// Samples `f(component, x, y)` at every node.
    pub fn from_fn(
        params: Arc<ProblemParams>,
        grid: Arc<Grid>,
        f: impl Fn(usize, f64, f64) -> f64,
    ) -> Result<Self> {
        let values = (0..params.k)
            .map(|c| {
                let mut v = Vec::with_capacity(grid.len());
                for &x in &grid.x_nodes {
                    for &y in &grid.y_nodes {
                        v.push(f(c, x, y));
                    }
                }
                v
            })
            .collect();
        Self::new(params, grid, values)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.params.k {
            return Err(Error::InvalidField(format!(
                "{} components for k = {}",
                self.values.len(),
                self.params.k
            )));
        }
        if self.params.a() != self.grid.a {
            return Err(Error::InvalidField(format!(
                "grid weight exponent {} does not match a = {}",
                self.grid.a,
                self.params.a()
            )));
        }
        for (c, v) in self.values.iter().enumerate() {
            if v.len() != self.grid.len() {
                return Err(Error::InvalidField(format!(
                    "component {c} has {} values, grid has {} nodes",
                    v.len(),
                    self.grid.len()
                )));
            }
            if let Some(n) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidField(format!(
                    "component {c} node {n} holds {} (values must be finite and >= 0)",
                    v[n]
                )));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    #[inline]
    pub fn at(&self, c: usize, i: usize, j: usize) -> f64 {
        self.values[c][self.grid.idx(i, j)]
    }

    /// Trace `u_c(x) = v_c(x, 0)` on the bottom nodes.
    pub fn trace(&self, c: usize) -> Vec<f64> {
        (0..self.grid.nx()).map(|i| self.at(c, i, 0)).collect()
    }

    /// Density vector at bottom node `i`.
    pub fn trace_vector(&self, i: usize) -> Vec<f64> {
        (0..self.k()).map(|c| self.at(c, i, 0)).collect()
    }

    pub fn component(&self, c: usize) -> GridFunction {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values[c].clone(),
        }
    }

    pub fn with_params(&self, params: Arc<ProblemParams>) -> Result<Self> {
        Self::new(params, Arc::clone(&self.grid), self.values.clone())
    }

    pub fn sup(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// Single scalar grid function, possibly signed; used for reflected
/// differences and the inputs of the monotonicity functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &x in &grid.x_nodes {
            for &y in &grid.y_nodes {
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    pub fn negative_part(&self) -> Self {
        self.map(|v| (-v).max(0.0))
    }

    pub fn trace(&self) -> Vec<f64> {
        (0..self.grid.nx()).map(|i| self.at(i, 0)).collect()
    }

    /// Bilinear interpolant and its gradient at `(x, y)`.
    pub fn sample_with_gradient(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let g = &*self.grid;
        let (i, j) = g.locate(x, y);
        let (x0, x1) = (g.x_nodes[i], g.x_nodes[i + 1]);
        let (y0, y1) = (g.y_nodes[j], g.y_nodes[j + 1]);
        let (hx, hy) = (x1 - x0, y1 - y0);
        let tx = (x - x0) / hx;
        let ty = (y - y0) / hy;
        let (v00, v10, v01, v11) = (self.at(i, j), self.at(i + 1, j), self.at(i, j + 1), self.at(i + 1, j + 1));
        let val = v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty;
        let dx = ((v10 - v00) * (1.0 - ty) + (v11 - v01) * ty) / hx;
        let dy = ((v01 - v00) * (1.0 - tx) + (v11 - v10) * tx) / hy;
        (val, [dx, dy])
    }

    pub fn sample(&self, x: f64, y: f64) -> f64 {
        self.sample_with_gradient(x, y).0
    }
}
