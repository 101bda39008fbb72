//! Cell-centered radial mesh, quadrature, and the reduced representation
//! `g = r f` shared by all solvers.
//!
//! Nodes sit at `r_i = (i + 1/2) h` with `h = r_max / n_points`, so no node
//! coincides with the coordinate singularity at `r = 0`. The quadrature
//! weights `w_i = r_i^2 h` realize the midpoint rule for integrals of the
//! form `∫_0^{r_max} φ(r) r^2 dr`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minimum number of mesh cells accepted by [`RadialGrid::new`].
pub const MIN_POINTS: usize = 16;

/// Uniform cell-centered radial mesh with midpoint quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r_max: f64,
    spacing: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Build a mesh on `(0, r_max)` with `n_points` cells.
    pub fn new(r_max: f64, n_points: usize) -> Result<Self> {
        if !r_max.is_finite() || r_max <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "r_max must be positive and finite, got {r_max}"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidConfig(format!(
                "n_points must be at least {MIN_POINTS}, got {n_points}"
            )));
        }
        let spacing = r_max / n_points as f64;
        let nodes: Vec<f64> = (0..n_points)
            .map(|i| (i as f64 + 0.5) * spacing)
            .collect();
        let weights: Vec<f64> = nodes.iter().map(|&r| r * r * spacing).collect();
        Ok(Self {
            r_max,
            spacing,
            nodes,
            weights,
        })
    }

    /// Shared-ownership constructor; most consumers hold the grid in an `Arc`.
    pub fn shared(r_max: f64, n_points: usize) -> Result<Arc<Self>> {
        Self::new(r_max, n_points).map(Arc::new)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Midpoint quadrature of `∫ φ(r) r^2 dr` for real samples on the nodes.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(samples
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| s * w)
            .sum())
    }

    /// Midpoint quadrature of `∫ φ(r) r^2 dr` for complex samples.
    pub fn integrate_complex(&self, samples: &[Complex64]) -> Result<Complex64> {
        self.check_len(samples.len())?;
        Ok(samples
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| s * w)
            .sum())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.nodes.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples, got {len}",
                self.nodes.len()
            )));
        }
        Ok(())
    }
}

/// Complex samples of a radial function on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NumericalBlowup(
                "radial function contains non-finite values".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        Self::new(
            grid,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Sample a real-valued closure on the grid nodes.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new(f(r), 0.0))
            .collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn integrate(&self) -> Complex64 {
        // Shape is guaranteed by construction.
        self.grid.integrate_complex(&self.values).expect("same grid")
    }

    /// Reduced representation `g(r_i) = r_i f(r_i)`.
    pub fn to_reduced(&self) -> RadialFunction {
        let values = self
            .values
            .iter()
            .zip(self.grid.nodes())
            .map(|(v, &r)| v * r)
            .collect();
        RadialFunction {
            grid: self.grid.clone(),
            values,
        }
    }

    /// Inverse of [`RadialFunction::to_reduced`]: `f = g / r`.
    pub fn from_reduced(g: &RadialFunction) -> RadialFunction {
        let values = g
            .values
            .iter()
            .zip(g.grid.nodes())
            .map(|(v, &r)| v / r)
            .collect();
        RadialFunction {
            grid: g.grid.clone(),
            values,
        }
    }
}

/// Cubic Lagrange interpolation of node samples at an arbitrary radius.
///
/// Uses the four nearest nodes (clamped at the ends); returns 0 beyond the
/// outer edge, where all profiles of interest have decayed.
pub fn interpolate_cubic(values: &[f64], grid: &RadialGrid, r: f64) -> f64 {
    let n = values.len();
    let h = grid.spacing();
    if r >= grid.r_max() {
        return 0.0;
    }
    // Fractional node index of r.
    let t = r / h - 0.5;
    let base = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for k in 0..4 {
        let idx = base + k;
        let mut weight = 1.0;
        for m in 0..4 {
            if m != k {
                let xm = (base + m) as f64;
                weight *= (t - xm) / ((base + k) as f64 - xm);
            }
        }
        acc += weight * values[idx];
    }
    acc
}

/// Resample node values onto another grid by cubic interpolation of `f(λ r)`.
pub fn resample_scaled(values: &[f64], grid: &RadialGrid, target: &RadialGrid, lambda: f64) -> Vec<f64> {
    target
        .nodes()
        .iter()
        .map(|&r| interpolate_cubic(values, grid, lambda * r))
        .collect()
}
