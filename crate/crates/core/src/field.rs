use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Real-valued grid function, one value per node.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f(s, theta)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_s {
            let s = grid.s(i);
            for j in 0..grid.n_theta {
                values.push(f(s, grid.theta(j)));
            }
        }
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        let k = self.grid.idx(i, j);
        &mut self.values[k]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| f(x, y))
            .collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max absolute value over the interior rows (both boundary s-rows excluded).
    pub fn max_abs_interior(&self) -> f64 {
        let g = self.grid;
        let mut m = 0.0_f64;
        for i in 1..g.n_s - 1 {
            for j in 0..g.n_theta {
                m = m.max(self.at(i, j).abs());
            }
        }
        m
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// `R^n`-valued grid function (immersion coordinates, frame vectors, ...).
///
/// Layout is node-major: the `dim` components of node `(i, j)` are contiguous.
#[derive(Clone, Debug)]
pub struct AmbientField {
    pub grid: GridSpec,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl AmbientField {
    pub fn zeros(grid: GridSpec, dim: usize) -> Self {
        Self { grid, dim, values: vec![0.0; grid.len() * dim] }
    }

    /// Samples a vector-valued `f(s, theta, out)` at every node.
    pub fn from_fn(grid: GridSpec, dim: usize, f: impl Fn(f64, f64, &mut [f64])) -> Self {
        let mut values = vec![0.0; grid.len() * dim];
        for i in 0..grid.n_s {
            let s = grid.s(i);
            for j in 0..grid.n_theta {
                let k = grid.idx(i, j) * dim;
                f(s, grid.theta(j), &mut values[k..k + dim]);
            }
        }
        Self { grid, dim, values }
    }

    pub fn at(&self, i: usize, j: usize) -> &[f64] {
        let k = self.grid.idx(i, j) * self.dim;
        &self.values[k..k + self.dim]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let k = self.grid.idx(i, j) * self.dim;
        &mut self.values[k..k + self.dim]
    }

    pub fn component(&self, c: usize) -> ScalarField {
        let values = self.values.iter().skip(c).step_by(self.dim).copied().collect();
        ScalarField { grid: self.grid, values }
    }

    /// Pointwise inner product with another ambient field.
    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::GridMismatch);
        }
        let mut out = ScalarField::zeros(self.grid);
        for (k, v) in out.values.iter_mut().enumerate() {
            let base = k * self.dim;
            *v = (0..self.dim)
                .map(|c| self.values[base + c] * other.values[base + c])
                .sum();
        }
        Ok(out)
    }

    /// Pointwise squared Euclidean norm.
    pub fn norm_sq(&self) -> ScalarField {
        self.dot(self).expect("same field")
    }

    pub fn map_nodes(&self, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let mut out = Self::zeros(self.grid, self.dim);
        for k in 0..self.grid.len() {
            f(
                &self.values[k * self.dim..(k + 1) * self.dim],
                &mut out.values[k * self.dim..(k + 1) * self.dim],
            );
        }
        out
    }

    /// Pointwise linear combination `alpha * self + beta * other`.
    pub fn linear_comb(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| alpha * x + beta * y)
            .collect();
        Ok(Self { grid: self.grid, dim: self.dim, values })
    }

    /// Pointwise combination with scalar coefficient fields:
    /// `lambda * self + mu * other` where `lambda`, `mu` vary over nodes.
    pub fn rotate_comb(&self, lambda: &ScalarField, other: &Self, mu: &ScalarField) -> Result<Self> {
        if self.grid != other.grid || self.dim != other.dim || self.grid != lambda.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = Self::zeros(self.grid, self.dim);
        for k in 0..self.grid.len() {
            let (l, m) = (lambda.values[k], mu.values[k]);
            for c in 0..self.dim {
                out.values[k * self.dim + c] =
                    l * self.values[k * self.dim + c] + m * other.values[k * self.dim + c];
            }
        }
        Ok(out)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// 1-form on the annulus, stored as coefficients of `dr` and `dtheta`.
///
/// The pointwise norm is metric-consistent with `|dtheta|^2 = r^{-2}`:
/// `|w|^2 = w_r^2 + r^{-2} w_theta^2`.
#[derive(Clone, Debug)]
pub struct OneForm {
    pub w_r: ScalarField,
    pub w_theta: ScalarField,
}

impl OneForm {
    pub fn new(w_r: ScalarField, w_theta: ScalarField) -> Result<Self> {
        if w_r.grid != w_theta.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { w_r, w_theta })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { w_r: ScalarField::zeros(grid), w_theta: ScalarField::zeros(grid) }
    }

    pub fn grid(&self) -> GridSpec {
        self.w_r.grid
    }

    /// Pointwise squared norm `w_r^2 + r^{-2} w_theta^2`.
    pub fn norm_sq(&self) -> ScalarField {
        let g = self.grid();
        let mut out = ScalarField::zeros(g);
        for i in 0..g.n_s {
            let rinv2 = (-2.0 * g.s(i)).exp();
            for j in 0..g.n_theta {
                let wr = self.w_r.at(i, j);
                let wt = self.w_theta.at(i, j);
                *out.at_mut(i, j) = wr * wr + rinv2 * wt * wt;
            }
        }
        out
    }

    pub fn linear_comb(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        Ok(Self {
            w_r: self.w_r.zip(&other.w_r, |x, y| alpha * x + beta * y)?,
            w_theta: self.w_theta.zip(&other.w_theta, |x, y| alpha * x + beta * y)?,
        })
    }
}
