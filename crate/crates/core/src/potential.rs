//! External potentials and the radial Poisson solve `U = Δ⁻¹(n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};

/// Attractive external potential, vanishing at infinity and non-positive
/// everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExternalPotential {
    /// No external field.
    None,
    /// Point mass at the origin, `V(r) = -M/r`.
    PointMass { mass: f64 },
    /// Plummer sphere, `V(r) = -M/sqrt(r^2 + b^2)`.
    Plummer { mass: f64, softening: f64 },
}

impl ExternalPotential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ExternalPotential::None => Ok(()),
            ExternalPotential::PointMass { mass } => {
                if !mass.is_finite() || mass < 0.0 {
                    Err(Error::InvalidConfig(format!(
                        "point-mass potential needs M >= 0, got {mass}"
                    )))
                } else {
                    Ok(())
                }
            }
            ExternalPotential::Plummer { mass, softening } => {
                if !mass.is_finite() || mass < 0.0 {
                    Err(Error::InvalidConfig(format!(
                        "Plummer potential needs M >= 0, got {mass}"
                    )))
                } else if !softening.is_finite() || softening <= 0.0 {
                    Err(Error::InvalidConfig(format!(
                        "Plummer potential needs b > 0, got {softening}"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn value_at(&self, r: f64) -> f64 {
        match *self {
            ExternalPotential::None => 0.0,
            ExternalPotential::PointMass { mass } => -mass / r,
            ExternalPotential::Plummer { mass, softening } => {
                -mass / (r * r + softening * softening).sqrt()
            }
        }
    }

    /// Mass of the `-M/r` singularity (zero for regular potentials).
    pub fn singular_mass(&self) -> f64 {
        match *self {
            ExternalPotential::PointMass { mass } => mass,
            _ => 0.0,
        }
    }

    /// Smooth remainder after removing the `-M/r` singularity.
    pub fn smooth_part_at(&self, r: f64) -> f64 {
        match *self {
            ExternalPotential::PointMass { .. } => 0.0,
            _ => self.value_at(r),
        }
    }

    /// True when `V` is homogeneous of degree -1, the hypothesis of the
    /// virial identity (point mass or no potential).
    pub fn is_inverse_radius(&self) -> bool {
        !matches!(self, ExternalPotential::Plummer { .. })
    }
}

/// Sample the external potential on the grid nodes.
pub fn sample_external(pot: &ExternalPotential, grid: &std::sync::Arc<RadialGrid>) -> RadialFunction {
    RadialFunction::from_fn(grid.clone(), |r| pot.value_at(r))
}

/// Gravitational potential of a non-negative radial source.
#[derive(Debug, Clone)]
pub struct GravPotential {
    values: Vec<f64>,
    total_source: f64,
}

impl GravPotential {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Total source `N = ∫ n dx` seen by the solve.
    pub fn total_source(&self) -> f64 {
        self.total_source
    }
}

// Quadratic Lagrange interpolation, in node-index units, of the value a
// quarter spacing inward of node i. Closes the half cell between a cell
// face and its center at O(h^3) instead of O(h^2).
fn quarter_point_inward(samples: &[f64], i: usize) -> f64 {
    let n = samples.len();
    let j0 = if i == 0 { 0 } else { (i - 1).min(n - 3) };
    let u = (i as f64 - 0.25) - j0 as f64;
    let l0 = (u - 1.0) * (u - 2.0) / 2.0;
    let l1 = -u * (u - 2.0);
    let l2 = u * (u - 1.0) / 2.0;
    l0 * samples[j0] + l1 * samples[j0 + 1] + l2 * samples[j0 + 2]
}

/// Solve `ΔU = n` with `U → 0` at infinity for a non-negative radial source,
/// via the two cumulative integrals
/// `U(r) = -(1/r) ∫_0^r n s^2 ds - ∫_r^∞ n s ds`.
pub fn solve_poisson(density: &[f64], grid: &RadialGrid) -> Result<GravPotential> {
    let n = grid.len();
    if density.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "density has {} samples on a {}-node grid",
            density.len(),
            n
        )));
    }
    if let Some(&bad) = density.iter().find(|&&v| v < -1e-14 || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "density must be non-negative, found {bad}"
        )));
    }
    let clamped: Vec<f64> = density.iter().map(|&v| v.max(0.0)).collect();
    let h = grid.spacing();
    let nodes = grid.nodes();

    // Integrands n s^2 (inner integral) and n s (outer integral) on the nodes.
    let phi: Vec<f64> = clamped
        .iter()
        .zip(nodes)
        .map(|(&d, &r)| d * r * r)
        .collect();
    let chi: Vec<f64> = clamped.iter().zip(nodes).map(|(&d, &r)| d * r).collect();

    // Exclusive prefix of full cells for ∫_0^{face_i} n s^2 ds.
    let mut values = vec![0.0; n];
    let mut inner = 0.0; // ∫ up to the left face of cell i
    let mut outer: f64 = chi.iter().map(|&c| c * h).sum(); // ∫ over all cells
    for i in 0..n {
        // Close the half cell [face_i, r_i] with the quarter-point value.
        let q_in = inner + 0.5 * h * quarter_point_inward(&phi, i).max(0.0);
        // Remaining outer integral: everything beyond face_i minus [face_i, r_i].
        let chi_half = 0.5 * h * quarter_point_inward(&chi, i).max(0.0);
        let q_out = (outer - chi_half).max(0.0);
        values[i] = -q_in / nodes[i] - q_out;
        inner += phi[i] * h;
        outer -= chi[i] * h;
    }

    let total_source = 4.0 * std::f64::consts::PI * inner;
    Ok(GravPotential {
        values,
        total_source,
    })
}
