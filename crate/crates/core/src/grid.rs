//! Tensor mesh of the half-rectangle `[x_lo, x_hi] x [0, H]`, graded towards
//! `y = 0`, with the `y^a` weights of the finite-volume scheme.
//!
//! Nodes are stored column-major: node `(i, j)` lives at `i * ny + j`, so a
//! vertical line of the mesh is a contiguous slice.

use crate::error::{Error, Result};
use crate::quad::power_integral;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x_nodes: Vec<f64>,
    pub y_nodes: Vec<f64>,
    pub grading_exponent: f64,
    /// Weight exponent `a = 1 - 2s`.
    pub a: f64,
    /// Effective weight on the horizontal face between `y_j` and `y_{j+1}`:
    /// the harmonic mean of `y^a`, i.e. `(y_{j+1} - y_j) / int y^{-a}`.
    pub face_weights_y: Vec<f64>,
    /// Mean of `y^a` over the vertical extent `[y_{j-1/2}, y_{j+1/2}]` of the
    /// control volume of row `j` (clipped to `[0, H]`).
    pub face_weights_x: Vec<f64>,
    lateral: Vec<f64>,
    vertical: Vec<f64>,
}

/// Default grading `max(1, 2 / (1 + a))`.
pub fn default_grading(a: f64) -> f64 {
    (2.0 / (1.0 + a)).max(1.0)
}

/// Mean of `y^a` over `[y0, y1]`.
pub fn mean_weight(a: f64, y0: f64, y1: f64) -> f64 {
    power_integral(a, y0, y1) / (y1 - y0)
}

/// Harmonic mean of `y^a` over `[y0, y1]`.
pub fn harmonic_weight(a: f64, y0: f64, y1: f64) -> f64 {
    (y1 - y0) / power_integral(-a, y0, y1)
}

impl Grid {
    /// Uniform in `x`; `y_j = H (j / (ny - 1))^grading`.
    pub fn build(
        x_lo: f64,
        x_hi: f64,
        height: f64,
        nx: usize,
        ny: usize,
        grading_exponent: f64,
        a: f64,
    ) -> Result<Self> {
        if !(x_lo < x_hi) || !(height > 0.0) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need x_lo < x_hi and H > 0, got [{x_lo}, {x_hi}] x [0, {height}]"
            )));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!("nx = {nx}, ny = {ny}: both must be >= 3")));
        }
        if !(grading_exponent >= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "grading exponent {grading_exponent} must be >= 1"
            )));
        }
        let dx = (x_hi - x_lo) / (nx - 1) as f64;
        let mut x_nodes: Vec<f64> = (0..nx).map(|i| x_lo + i as f64 * dx).collect();
        x_nodes[nx - 1] = x_hi;
        let y_nodes: Vec<f64> = (0..ny)
            .map(|j| height * (j as f64 / (ny - 1) as f64).powf(grading_exponent))
            .collect();
        Self::from_nodes_with_grading(x_nodes, y_nodes, grading_exponent, a)
    }

    /// Rebuilds a grid from stored node arrays; the grading exponent is
    /// recovered from the first `y` spacing.
    pub fn from_nodes(x_nodes: Vec<f64>, y_nodes: Vec<f64>, a: f64) -> Result<Self> {
        let ny = y_nodes.len();
        let grading = if ny >= 3 && y_nodes[1] > 0.0 {
            let h = y_nodes[ny - 1];
            ((y_nodes[1] / h).ln() / (1.0 / (ny - 1) as f64).ln()).max(1.0)
        } else {
            1.0
        };
        Self::from_nodes_with_grading(x_nodes, y_nodes, grading, a)
    }

    fn from_nodes_with_grading(
        x_nodes: Vec<f64>,
        y_nodes: Vec<f64>,
        grading_exponent: f64,
        a: f64,
    ) -> Result<Self> {
        if !(a > -1.0 && a < 1.0) {
            return Err(Error::InvalidGrid(format!("weight exponent a = {a} outside (-1, 1)")));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite());
        if x_nodes.len() < 3 || y_nodes.len() < 3 || !increasing(&x_nodes) || !increasing(&y_nodes) {
            return Err(Error::InvalidGrid("node arrays must be strictly increasing with >= 3 entries".into()));
        }
        if y_nodes[0] != 0.0 {
            return Err(Error::InvalidGrid("y_nodes[0] must be 0".into()));
        }
        let ny = y_nodes.len();
        let face_weights_y: Vec<f64> = y_nodes
            .windows(2)
            .map(|w| harmonic_weight(a, w[0], w[1]))
            .collect();
        let vertical: Vec<f64> = y_nodes
            .windows(2)
            .map(|w| 1.0 / power_integral(-a, w[0], w[1]))
            .collect();
        let half = |j: usize| -> (f64, f64) {
            let lo = if j == 0 { 0.0 } else { 0.5 * (y_nodes[j - 1] + y_nodes[j]) };
            let hi = if j == ny - 1 {
                y_nodes[ny - 1]
            } else {
                0.5 * (y_nodes[j] + y_nodes[j + 1])
            };
            (lo, hi)
        };
        let lateral: Vec<f64> = (0..ny)
            .map(|j| {
                let (lo, hi) = half(j);
                power_integral(a, lo, hi)
            })
            .collect();
        let face_weights_x = (0..ny)
            .map(|j| {
                let (lo, hi) = half(j);
                lateral[j] / (hi - lo)
            })
            .collect();
        Ok(Self {
            x_nodes,
            y_nodes,
            grading_exponent,
            a,
            face_weights_y,
            face_weights_x,
            lateral,
            vertical,
        })
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn ny(&self) -> usize {
        self.y_nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny() + j
    }

    pub fn x_lo(&self) -> f64 {
        self.x_nodes[0]
    }

    pub fn x_hi(&self) -> f64 {
        self.x_nodes[self.nx() - 1]
    }

    pub fn height(&self) -> f64 {
        self.y_nodes[self.ny() - 1]
    }

    /// True for nodes carrying Dirichlet data (top and lateral sides).
    pub fn is_dirichlet(&self, i: usize, j: usize) -> bool {
        i == 0 || i == self.nx() - 1 || j == self.ny() - 1
    }

    /// Width of the control volume of column `i`.
    pub fn cell_width(&self, i: usize) -> f64 {
        let x = &self.x_nodes;
        let n = self.nx();
        let lo = if i == 0 { x[0] } else { 0.5 * (x[i - 1] + x[i]) };
        let hi = if i == n - 1 { x[n - 1] } else { 0.5 * (x[i] + x[i + 1]) };
        hi - lo
    }

    /// `int y^a dy` over the vertical extent of row `j`'s control volume.
    #[inline]
    pub fn lateral_weight(&self, j: usize) -> f64 {
        self.lateral[j]
    }

    /// `1 / int_{y_j}^{y_{j+1}} y^{-a} dy`, the flux coefficient per unit width.
    #[inline]
    pub fn vertical_conductance(&self, j: usize) -> f64 {
        self.vertical[j]
    }

    /// Cell `(ix, jy)` containing `(x, y)`, clamped to the mesh.
    pub fn locate(&self, x: f64, y: f64) -> (usize, usize) {
        (
            locate_interval(&self.x_nodes, x),
            locate_interval(&self.y_nodes, y),
        )
    }

    /// Refined grid with every cell halved in index space (nodes nest).
    pub fn refined(&self) -> Result<Self> {
        let nx = 2 * self.nx() - 1;
        let ny = 2 * self.ny() - 1;
        Self::build(
            self.x_lo(),
            self.x_hi(),
            self.height(),
            nx,
            ny,
            self.grading_exponent,
            self.a,
        )
    }
}

/// Index `k` with `nodes[k] <= v <= nodes[k + 1]`, clamped to valid cells.
pub fn locate_interval(nodes: &[f64], v: f64) -> usize {
    let n = nodes.len();
    match nodes.binary_search_by(|p| p.partial_cmp(&v).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(k) => k.min(n - 2),
        Err(k) => k.saturating_sub(1).min(n - 2),
    }
}

/// Free-function constructor matching the other module entry points.
pub fn build_grid(
    x_lo: f64,
    x_hi: f64,
    height: f64,
    nx: usize,
    ny: usize,
    grading_exponent: f64,
    a: f64,
) -> Result<Grid> {
    Grid::build(x_lo, x_hi, height, nx, ny, grading_exponent, a)
}
