//! Multi-component radial states and the conserved functionals: charges,
//! kinetic/external/gravitational energies, and the phase-insensitive H¹
//! distance used in the orbital-stability experiments.
//!
//! All angular algebra is collapsed analytically: a component with angular
//! momentum `ℓ` carries one radial profile `f(r)` and the full multiplet
//! contributes `(2ℓ+1) |f|^2 / 4π` to the particle density.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{RadialFunction, RadialGrid};
use crate::hamiltonian::{reduced_kinetic_form, reduced_kinetic_inner};
use crate::potential::{solve_poisson, ExternalPotential};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// One angular block of the state: angular momentum and its prescribed
/// squared L² norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComponentSpec {
    pub ell: u32,
    /// Target charge `N_j` of the block.
    pub target_norm: f64,
}

impl ComponentSpec {
    pub fn new(ell: u32, target_norm: f64) -> Self {
        Self { ell, target_norm }
    }

    pub fn multiplicity(&self) -> f64 {
        2.0 * self.ell as f64 + 1.0
    }
}

/// Check a component list: non-empty, positive targets, strictly increasing
/// distinct angular momenta.
pub fn validate_components(specs: &[ComponentSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig("component list is empty".into()));
    }
    for spec in specs {
        if !spec.target_norm.is_finite() || spec.target_norm <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "component ell={} needs a positive norm target, got {}",
                spec.ell, spec.target_norm
            )));
        }
    }
    for pair in specs.windows(2) {
        if pair[1].ell <= pair[0].ell {
            return Err(Error::InvalidConfig(format!(
                "angular momenta must be distinct and increasing, got {} then {}",
                pair[0].ell, pair[1].ell
            )));
        }
    }
    Ok(())
}

/// One component of a [`FieldState`].
#[derive(Debug, Clone)]
pub struct FieldComponent {
    pub spec: ComponentSpec,
    pub profile: RadialFunction,
}

/// Complex multi-component radial state, the dynamical and variational
/// unknown.
#[derive(Debug, Clone)]
pub struct FieldState {
    grid: Arc<RadialGrid>,
    components: Vec<FieldComponent>,
}

impl FieldState {
    pub fn new(grid: Arc<RadialGrid>, components: Vec<FieldComponent>) -> Result<Self> {
        let specs: Vec<ComponentSpec> = components.iter().map(|c| c.spec).collect();
        validate_components(&specs)?;
        for c in &components {
            if !Arc::ptr_eq(c.profile.grid(), &grid) && c.profile.grid().as_ref() != grid.as_ref() {
                return Err(Error::ShapeMismatch(
                    "component profile lives on a different grid".into(),
                ));
            }
        }
        Ok(Self { grid, components })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn components(&self) -> &[FieldComponent] {
        &self.components
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Reduced profiles `g_j = r f_j` of all components.
    pub fn reduced_profiles(&self) -> Vec<Vec<Complex64>> {
        self.components
            .iter()
            .map(|c| c.profile.to_reduced().values().to_vec())
            .collect()
    }

    /// True when every component respects `f_j(r) ~ r^{ℓ_j}` at the origin,
    /// with the slope constant estimated from the next nodes.
    pub fn origin_regular(&self) -> bool {
        let nodes = self.grid.nodes();
        self.components.iter().all(|c| {
            let ell = c.spec.ell as i32;
            let v = c.profile.values();
            let scale = |i: usize| v[i].norm() / nodes[i].powi(ell);
            let reference = 0.5 * (scale(1) + scale(2));
            scale(0) <= 4.0 * reference + 1e-12
        })
    }
}

/// Energy split `E = T - L - D`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    /// Kinetic term `T ≥ 0`.
    #[serde(rename = "T")]
    pub kinetic: f64,
    /// External-potential term `L ≥ 0` (for attractive `V`).
    #[serde(rename = "L")]
    pub external: f64,
    /// Gravitational self-energy `D ≥ 0`.
    #[serde(rename = "D")]
    pub gravitational: f64,
    /// Total `E = T - L - D`.
    #[serde(rename = "E")]
    pub total: f64,
}

/// Particle density `n(r) = Σ_j (2ℓ_j+1)/(4π) |f_j(r)|^2`.
pub fn density(state: &FieldState) -> RadialFunction {
    let n = state.grid.len();
    let mut values = vec![0.0; n];
    for c in &state.components {
        let factor = c.spec.multiplicity() / FOUR_PI;
        for (acc, v) in values.iter_mut().zip(c.profile.values()) {
            *acc += factor * v.norm_sqr();
        }
    }
    RadialFunction::from_real(state.grid.clone(), values).expect("finite density")
}

/// Per-component charges `N_j = (2ℓ_j+1) ∫ |f_j|^2 r^2 dr`.
pub fn charges(state: &FieldState) -> Vec<f64> {
    state
        .components
        .iter()
        .map(|c| {
            let norm: f64 = c
                .profile
                .values()
                .iter()
                .zip(state.grid.weights())
                .map(|(v, w)| v.norm_sqr() * w)
                .sum();
            c.spec.multiplicity() * norm
        })
        .collect()
}

/// Kinetic energy `T = Σ_j (2ℓ_j+1)/2 ∫ [|g_j'|^2 + ℓ_j(ℓ_j+1)|g_j|^2/r^2] dr`
/// in the reduced variable.
pub fn kinetic(state: &FieldState) -> f64 {
    state
        .components
        .iter()
        .map(|c| {
            let g = c.profile.to_reduced();
            0.5 * c.spec.multiplicity()
                * reduced_kinetic_form(g.values(), c.spec.ell, &state.grid)
        })
        .sum()
}

/// External-potential energy `L = ½ ∫ (-V) n dx ≥ 0`.
pub fn external_energy(state: &FieldState, pot: &ExternalPotential) -> f64 {
    let n = density(state);
    let acc: f64 = n
        .values()
        .iter()
        .zip(state.grid.nodes())
        .zip(state.grid.weights())
        .map(|((ni, &r), w)| -pot.value_at(r) * ni.re * w)
        .sum();
    0.5 * FOUR_PI * acc
}

/// Gravitational self-energy `D = -¼ ∫ U n dx ≥ 0` with `U = Δ⁻¹(n)`.
pub fn self_energy(state: &FieldState) -> f64 {
    let n = density(state);
    let real_n: Vec<f64> = n.values().iter().map(|v| v.re).collect();
    let u = solve_poisson(&real_n, &state.grid).expect("density is non-negative");
    let acc: f64 = u
        .values()
        .iter()
        .zip(&real_n)
        .zip(state.grid.weights())
        .map(|((ui, ni), w)| ui * ni * w)
        .sum();
    -0.25 * FOUR_PI * acc
}

/// Full energy breakdown `E = T - L - D`.
pub fn total_energy(state: &FieldState, pot: &ExternalPotential) -> EnergyBreakdown {
    let kinetic = self::kinetic(state);
    let external = external_energy(state, pot);
    let gravitational = self_energy(state);
    EnergyBreakdown {
        kinetic,
        external,
        gravitational,
        total: kinetic - external - gravitational,
    }
}

/// Energy of the charge-preserving rescaling `u_λ(x) = λ^{3/2} u(λx)`,
/// evaluated algebraically: `T → λ²T`, `D → λD`, and the external term from
/// the exact identity `L[n_λ] = ½ ∫ (-V(r/λ)) n r² dr · 4π`.
pub fn scaled_energy(state: &FieldState, pot: &ExternalPotential, lambda: f64) -> f64 {
    let kinetic = self::kinetic(state);
    let gravitational = self_energy(state);
    let n = density(state);
    let external: f64 = 0.5
        * FOUR_PI
        * n.values()
            .iter()
            .zip(state.grid.nodes())
            .zip(state.grid.weights())
            .map(|((ni, &r), w)| -pot.value_at(r / lambda) * ni.re * w)
            .sum::<f64>();
    lambda * lambda * kinetic - external - lambda * gravitational
}

/// H¹ distance between two states minimized over one phase per component.
///
/// `‖·‖²_{H¹} = ‖·‖₂² + 2T[·]`; the optimal phase is the argument of the
/// component H¹ inner product.
pub fn h1_distance_mod_phase(a: &FieldState, b: &FieldState) -> Result<f64> {
    if a.n_components() != b.n_components() || a.grid.as_ref() != b.grid.as_ref() {
        return Err(Error::ShapeMismatch(
            "states differ in grid or component count".into(),
        ));
    }
    let mut total = 0.0;
    for (ca, cb) in a.components.iter().zip(&b.components) {
        if ca.spec.ell != cb.spec.ell {
            return Err(Error::ShapeMismatch(format!(
                "component angular momenta differ: {} vs {}",
                ca.spec.ell, cb.spec.ell
            )));
        }
        let (na, inner, nb) = h1_norms_and_inner(ca, cb, &a.grid);
        let dist_sq = na + nb - 2.0 * inner.norm();
        total += dist_sq.max(0.0);
    }
    Ok(total.sqrt())
}

/// H¹ norm of a state, `sqrt(‖u‖₂² + 2T[u])`.
pub fn h1_norm(state: &FieldState) -> f64 {
    let l2: f64 = charges(state).iter().sum();
    (l2 + 2.0 * kinetic(state)).sqrt()
}

fn h1_norms_and_inner(
    ca: &FieldComponent,
    cb: &FieldComponent,
    grid: &RadialGrid,
) -> (f64, Complex64, f64) {
    let mult = ca.spec.multiplicity();
    let ga = ca.profile.to_reduced();
    let gb = cb.profile.to_reduced();
    let h = grid.spacing();
    let mut l2_aa = 0.0;
    let mut l2_bb = 0.0;
    let mut l2_ab = Complex64::new(0.0, 0.0);
    for (va, vb) in ga.values().iter().zip(gb.values()) {
        l2_aa += va.norm_sqr() * h;
        l2_bb += vb.norm_sqr() * h;
        l2_ab += va.conj() * vb * h;
    }
    let kin_aa = reduced_kinetic_form(ga.values(), ca.spec.ell, grid);
    let kin_bb = reduced_kinetic_form(gb.values(), cb.spec.ell, grid);
    let kin_ab = reduced_kinetic_inner(ga.values(), gb.values(), ca.spec.ell, grid);
    (
        mult * (l2_aa + kin_aa),
        (l2_ab + kin_ab) * mult,
        mult * (l2_bb + kin_bb),
    )
}
