//! Uniform 1-D meshes and vector-valued nodal functions.

use crate::error::{FhsError, Result};

/// Uniform grid on `[a, b]` with `n_nodes` nodes, `t_i = a + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_nodes: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(FhsError::InvalidGrid(format!(
                "need finite a < b, got [{a}, {b}]"
            )));
        }
        if n_nodes < 3 {
            return Err(FhsError::InvalidGrid(format!(
                "need at least 3 nodes, got {n_nodes}"
            )));
        }
        Ok(Self { a, b, n_nodes })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n_nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh spacing `h = (b - a) / (n_nodes - 1)`.
    pub fn h(&self) -> f64 {
        (self.b - self.a) / (self.n_nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_nodes);
        self.a + i as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(move |i| self.node(i))
    }

    /// Index of the node equal to `t`, if `t` lies on the mesh
    /// (within `1e-9 h` — used to check that interval endpoints align).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let h = self.h();
        let x = (t - self.a) / h;
        let i = x.round();
        if (x - i).abs() <= 1e-9 && i >= 0.0 && (i as usize) < self.n_nodes {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Trapezoid quadrature weights: `h/2` at the two boundary nodes, `h`
    /// inside.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.n_nodes];
        w[0] = 0.5 * h;
        w[self.n_nodes - 1] = 0.5 * h;
        w
    }
}

/// Nodal samples of a function `[a, b] -> R^n`, stored node-major:
/// `values[i * n_components + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid1D,
    n_components: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid1D, n_components: usize) -> Self {
        let values = vec![0.0; grid.len() * n_components];
        Self {
            grid,
            n_components,
            values,
        }
    }

    /// Builds a scalar (n = 1) function from nodal evaluations of `f`.
    pub fn from_scalar_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = grid.nodes().map(&f).collect();
        Self::from_values(grid, 1, values)
    }

    /// Builds a vector-valued function; `f` fills the component slice at `t`.
    pub fn from_vector_fn(
        grid: Grid1D,
        n_components: usize,
        f: impl Fn(f64, &mut [f64]),
    ) -> Result<Self> {
        let mut values = vec![0.0; grid.len() * n_components];
        for (i, t) in grid.nodes().enumerate() {
            f(t, &mut values[i * n_components..(i + 1) * n_components]);
        }
        Self::from_values(grid, n_components, values)
    }

    pub fn from_values(grid: Grid1D, n_components: usize, values: Vec<f64>) -> Result<Self> {
        if n_components == 0 || values.len() != grid.len() * n_components {
            return Err(FhsError::InvalidGrid(format!(
                "value buffer of length {} does not match {} nodes x {} components",
                values.len(),
                grid.len(),
                n_components
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(FhsError::NonFinite);
        }
        Ok(Self {
            grid,
            n_components,
            values,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The `R^n` value at node `i`.
    pub fn node_value(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_components..(i + 1) * self.n_components]
    }

    /// Euclidean magnitude `|u(t_i)|`.
    pub fn node_magnitude(&self, i: usize) -> f64 {
        self.node_value(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest nodal magnitude.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.node_magnitude(i))
            .fold(0.0, f64::max)
    }

    /// Largest magnitude at the two boundary nodes; monitors decay for the
    /// truncated-line problem and periodification error for spectral norms.
    pub fn boundary_magnitude(&self) -> f64 {
        self.node_magnitude(0).max(self.node_magnitude(self.grid.len() - 1))
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }
}
