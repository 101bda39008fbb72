//! Constrained ground states by projected imaginary-time flow.
//!
//! The energy is minimized over states with fixed per-component charges by
//! the semi-implicit flow `∂_τ g_j = -(H_j - μ_j) g_j`: each step solves
//! `(1 + dτ H_j) g* = g` with the tridiagonal kinetic and local terms
//! implicit and the gravitational potential lagged (under-relaxed between
//! steps), then re-projects every component onto its norm target. The flow
//! is monotone in the energy; any uphill step is retried with a halved
//! time step.
//!
//! For potentials homogeneous of degree -1 the solver additionally makes
//! the state stationary along the exact discrete rescaling family
//! `u_λ(x) = λ^{3/2} u(λx)` by optimizing the grid scale, which drives the
//! virial combination `2T - L - D` to convergence level rather than to
//! discretization level.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{
    charges, density, validate_components, ComponentSpec, EnergyBreakdown, FieldComponent,
    FieldState,
};
use crate::grid::{RadialFunction, RadialGrid};
use crate::hamiltonian::ReducedHamiltonian;
use crate::potential::{solve_poisson, ExternalPotential};
use crate::shooting::count_nodes;
use crate::tridiag;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Physical description of one solve: component list and external potential.
#[derive(Debug, Clone, Serialize)]
pub struct ModelConfig {
    pub components: Vec<ComponentSpec>,
    pub potential: ExternalPotential,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        validate_components(&self.components)?;
        self.potential.validate()
    }
}

/// Imaginary-time solver controls.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolverParams {
    /// Initial imaginary-time step `dτ`.
    pub time_step: f64,
    pub max_iterations: usize,
    /// Relative per-step energy change below which the state counts as
    /// energy-converged.
    pub energy_tolerance: f64,
    /// Stationarity residual required of the converged state.
    pub residual_tolerance: f64,
    /// Under-relaxation factor for the gravitational potential, in (0, 1].
    pub potential_mixing: f64,
    /// Optimize the grid scale along the rescaling family (homogeneous
    /// potentials only).
    pub scale_optimize: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            time_step: 0.5,
            max_iterations: 50_000,
            energy_tolerance: 1e-12,
            residual_tolerance: 1e-8,
            potential_mixing: 0.5,
            scale_optimize: true,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > 0.0
            && self.energy_tolerance > 0.0
            && self.residual_tolerance > 0.0
            && self.max_iterations > 0)
        {
            return Err(Error::InvalidConfig(
                "solver parameters must all be positive".into(),
            ));
        }
        if !(self.potential_mixing > 0.0 && self.potential_mixing <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "potential mixing must lie in (0, 1], got {}",
                self.potential_mixing
            )));
        }
        Ok(())
    }
}

/// Converged stationary state with its frequencies and diagnostics.
#[derive(Debug, Clone)]
pub struct StationaryState {
    pub state: FieldState,
    /// Frequencies `ω_j`, one per component, all negative.
    pub omegas: Vec<f64>,
    pub energy: EnergyBreakdown,
    /// Stationarity residual at convergence.
    pub residual: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl StationaryState {
    /// Interior sign changes of each converged profile (zero for a ground
    /// state).
    pub fn node_counts(&self) -> Vec<usize> {
        self.state
            .components()
            .iter()
            .map(|c| count_nodes(&c.profile.real_values()))
            .collect()
    }
}

struct Flow {
    grid: Arc<RadialGrid>,
    specs: Vec<ComponentSpec>,
    potential: ExternalPotential,
    v: Vec<f64>,
    /// Reduced real profiles, one per component, normalized to their targets.
    g: Vec<Vec<f64>>,
    /// Under-relaxed gravitational potential driving the next step.
    u_mixed: Vec<f64>,
    energy: EnergyBreakdown,
}

struct EnergyTerms {
    breakdown: EnergyBreakdown,
    /// Self-consistent gravitational potential of the current state.
    u_self: Vec<f64>,
}

impl Flow {
    fn state_density(grid: &RadialGrid, specs: &[ComponentSpec], g: &[Vec<f64>]) -> Vec<f64> {
        let mut n = vec![0.0; grid.len()];
        for (spec, gj) in specs.iter().zip(g) {
            let factor = spec.multiplicity() / FOUR_PI;
            for ((ni, &gi), &r) in n.iter_mut().zip(gj).zip(grid.nodes()) {
                *ni += factor * gi * gi / (r * r);
            }
        }
        n
    }

    fn kinetic_form(grid: &RadialGrid, ell: u32, g: &[f64]) -> f64 {
        let n = g.len();
        let h = grid.spacing();
        let ll = (ell as f64) * (ell as f64 + 1.0);
        let mut acc = 0.0;
        for i in 0..n - 1 {
            let d = g[i + 1] - g[i];
            acc += d * d / h;
        }
        acc += 2.0 * (g[0] * g[0] + g[n - 1] * g[n - 1]) / h;
        if ell > 0 {
            for (&gi, &r) in g.iter().zip(grid.nodes()) {
                acc += ll * gi * gi / (r * r) * h;
            }
        }
        acc
    }

    fn energies(&self, g: &[Vec<f64>]) -> Result<EnergyTerms> {
        let h = self.grid.spacing();
        let n = Self::state_density(&self.grid, &self.specs, g);
        let u = solve_poisson(&n, &self.grid)?;
        let mut kinetic = 0.0;
        let mut external = 0.0;
        let mut grav_dot = 0.0;
        for (spec, gj) in self.specs.iter().zip(g) {
            let mult = spec.multiplicity();
            kinetic += 0.5 * mult * Self::kinetic_form(&self.grid, spec.ell, gj);
            let mut vdot = 0.0;
            let mut udot = 0.0;
            for ((&gi, &vi), &ui) in gj.iter().zip(&self.v).zip(u.values()) {
                let g2 = gi * gi;
                vdot += vi * g2;
                udot += ui * g2;
            }
            external += -0.5 * mult * vdot * h;
            grav_dot += mult * udot * h;
        }
        let gravitational = -0.25 * grav_dot;
        let breakdown = EnergyBreakdown {
            kinetic,
            external,
            gravitational,
            total: kinetic - external - gravitational,
        };
        if !breakdown.total.is_finite() {
            return Err(Error::NumericalBlowup("non-finite energy".into()));
        }
        Ok(EnergyTerms {
            breakdown,
            u_self: u.values().to_vec(),
        })
    }

    fn normalize(grid: &RadialGrid, spec: &ComponentSpec, g: &mut [f64]) -> Result<()> {
        let h = grid.spacing();
        let norm: f64 = g.iter().map(|&x| x * x).sum::<f64>() * h * spec.multiplicity();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NumericalBlowup(
                "component norm vanished during the flow".into(),
            ));
        }
        let scale = (spec.target_norm / norm).sqrt();
        for x in g.iter_mut() {
            *x *= scale;
        }
        Ok(())
    }

    /// One backward-Euler step of the normalized flow; returns trial profiles.
    fn step(&self, dtau: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.grid.len();
        let mut w = vec![0.0; n];
        for i in 0..n {
            w[i] = self.v[i] + self.u_mixed[i];
        }
        let mut trial = Vec::with_capacity(self.g.len());
        for (spec, gj) in self.specs.iter().zip(&self.g) {
            let ham = ReducedHamiltonian::new(spec.ell, &w, &self.grid);
            let diag: Vec<f64> = ham.diagonal().iter().map(|d| 1.0 + dtau * d).collect();
            let off = dtau * ham.off_diagonal();
            let mut next = tridiag::solve_real(&diag, off, gj)?;
            Self::normalize(&self.grid, spec, &mut next)?;
            trial.push(next);
        }
        Ok(trial)
    }

    /// Exact transform along `u_λ`: grid shrinks by λ, profiles scale by
    /// `sqrt(λ)`, the gravitational potential by λ.
    fn rescale(&mut self, lambda: f64) -> Result<()> {
        let n = self.grid.len();
        self.grid = RadialGrid::shared(self.grid.r_max() / lambda, n)?;
        let sqrt_lambda = lambda.sqrt();
        for gj in &mut self.g {
            for x in gj.iter_mut() {
                *x *= sqrt_lambda;
            }
        }
        for u in &mut self.u_mixed {
            *u *= lambda;
        }
        self.v = self
            .grid
            .nodes()
            .iter()
            .map(|&r| self.potential.value_at(r))
            .collect();
        Ok(())
    }

    fn scale_gap(&self) -> f64 {
        let e = &self.energy;
        let lambda = (e.external + e.gravitational) / (2.0 * e.kinetic);
        lambda - 1.0
    }

    fn residual(&self, u_self: &[f64]) -> f64 {
        let n = self.grid.len();
        let mut w = vec![0.0; n];
        for i in 0..n {
            w[i] = self.v[i] + u_self[i];
        }
        let mut total = 0.0;
        for (spec, gj) in self.specs.iter().zip(&self.g) {
            let ham = ReducedHamiltonian::new(spec.ell, &w, &self.grid);
            let gc: Vec<Complex64> = gj.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            total += ham.stationarity_defect(&gc);
        }
        total
    }
}

/// Minimize the energy at fixed per-component charges.
pub fn minimize(
    config: &ModelConfig,
    grid: &Arc<RadialGrid>,
    params: &SolverParams,
) -> Result<StationaryState> {
    config.validate()?;
    params.validate()?;

    let specs = config.components.clone();
    let v: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| config.potential.value_at(r))
        .collect();

    // Gaussian seeds r^ℓ e^{-r²/2σ²} with a width matched to the expected
    // state: ~1/N for the self-gravitating branch, the hydrogenic radius
    // when an external mass dominates.
    let n_total: f64 = specs.iter().map(|s| s.target_norm).sum();
    let mut g = Vec::with_capacity(specs.len());
    for spec in &specs {
        let mut sigma = (1.0 / n_total).max(1.0);
        let mass = match config.potential {
            ExternalPotential::PointMass { mass } => mass,
            ExternalPotential::Plummer { mass, .. } => mass,
            ExternalPotential::None => 0.0,
        };
        if mass > 0.0 {
            let lp1 = spec.ell as f64 + 1.0;
            sigma = sigma.min(3.0 * lp1 * lp1 / mass);
        }
        sigma = sigma.clamp(8.0 * grid.spacing(), grid.r_max() / 6.0);
        let mut gj: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&r| r.powi(spec.ell as i32 + 1) * (-r * r / (2.0 * sigma * sigma)).exp())
            .collect();
        Flow::normalize(grid, spec, &mut gj)?;
        g.push(gj);
    }

    let mut flow = Flow {
        grid: grid.clone(),
        specs,
        potential: config.potential,
        v,
        g,
        u_mixed: Vec::new(),
        energy: EnergyBreakdown {
            kinetic: 0.0,
            external: 0.0,
            gravitational: 0.0,
            total: 0.0,
        },
    };
    let first = flow.energies(&flow.g)?;
    flow.u_mixed = first.u_self.clone();
    flow.energy = first.breakdown;

    let scale_opt = params.scale_optimize && config.potential.is_inverse_radius();
    let scale_gate = 1e-10;
    let mut dtau = params.time_step;
    let mut halvings_in_a_row = 0;
    let mut last_residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iterations {
        iterations += 1;

        let trial = flow.step(dtau)?;
        let terms = match flow.energies(&trial) {
            Ok(t) => t,
            Err(_) => {
                dtau *= 0.5;
                halvings_in_a_row += 1;
                if halvings_in_a_row > 60 {
                    return Err(Error::NumericalBlowup(
                        "flow kept producing non-finite energies".into(),
                    ));
                }
                continue;
            }
        };

        // Energy must not increase along the flow (1e-12-level slack for
        // round-off near convergence).
        let slack = 1e-12 * (1.0 + flow.energy.total.abs());
        if terms.breakdown.total > flow.energy.total + slack {
            dtau *= 0.5;
            halvings_in_a_row += 1;
            if dtau < 1e-14 || halvings_in_a_row > 60 {
                return Err(Error::NotConverged {
                    reason: "energy descent failed at vanishing time step".into(),
                    last_residual,
                });
            }
            continue;
        }
        halvings_in_a_row = 0;
        if iterations % 32 == 0 {
            dtau = (dtau * 1.5).min(params.time_step);
        }

        let delta_e =
            (terms.breakdown.total - flow.energy.total).abs() / terms.breakdown.total.abs().max(1e-300);
        flow.g = trial;
        flow.energy = terms.breakdown;
        for (um, &us) in flow.u_mixed.iter_mut().zip(&terms.u_self) {
            *um += params.potential_mixing * (us - *um);
        }

        let periodic_rescale = scale_opt && iterations % 64 == 0;
        if delta_e < params.energy_tolerance || periodic_rescale {
            let gap = if scale_opt { flow.scale_gap() } else { 0.0 };
            if delta_e < params.energy_tolerance {
                last_residual = flow.residual(&terms.u_self);
                if last_residual <= params.residual_tolerance && gap.abs() <= scale_gate {
                    converged = true;
                    break;
                }
            }
            if scale_opt && gap.abs() > scale_gate {
                let lambda = (1.0 + gap).clamp(0.7, 1.5);
                flow.rescale(lambda)?;
                let terms = flow.energies(&flow.g)?;
                flow.energy = terms.breakdown;
                flow.u_mixed = terms.u_self;
            }
        }
    }

    if !converged {
        return Err(Error::NotConverged {
            reason: format!("imaginary-time flow exhausted {} iterations", iterations),
            last_residual,
        });
    }

    finalize(flow, iterations, last_residual)
}

fn finalize(mut flow: Flow, iterations: usize, residual: f64) -> Result<StationaryState> {
    // Canonical sign: the profile is positive at its largest amplitude.
    for gj in &mut flow.g {
        let (idx, _) = gj
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("non-empty profile");
        if gj[idx] < 0.0 {
            for x in gj.iter_mut() {
                *x = -*x;
            }
        }
    }

    let terms = flow.energies(&flow.g)?;
    let mut omegas = Vec::with_capacity(flow.specs.len());
    let n = flow.grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n {
        w[i] = flow.v[i] + terms.u_self[i];
    }
    for (spec, gj) in flow.specs.iter().zip(&flow.g) {
        let ham = ReducedHamiltonian::new(spec.ell, &w, &flow.grid);
        let gc: Vec<Complex64> = gj.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        omegas.push(ham.rayleigh_quotient(&gc));
    }

    if terms.breakdown.total >= 0.0 {
        return Err(Error::NotConverged {
            reason: format!(
                "converged state has non-negative energy E = {:.6e}",
                terms.breakdown.total
            ),
            last_residual: residual,
        });
    }
    if let Some(&bad) = omegas.iter().find(|&&o| o >= 0.0) {
        return Err(Error::NotConverged {
            reason: format!("converged state has non-negative frequency ω = {bad:.6e}"),
            last_residual: residual,
        });
    }

    let mut warnings = Vec::new();
    let mut components = Vec::with_capacity(flow.specs.len());
    for (spec, gj) in flow.specs.iter().zip(&flow.g) {
        let f: Vec<f64> = gj
            .iter()
            .zip(flow.grid.nodes())
            .map(|(&gi, &r)| gi / r)
            .collect();
        if count_nodes(&f) != 0 {
            return Err(Error::NotConverged {
                reason: format!(
                    "flow converged to a sign-changing profile for ell = {}",
                    spec.ell
                ),
                last_residual: residual,
            });
        }
        let peak = f.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let tail_start = flow.grid.len() - (flow.grid.len() / 100).max(1);
        let tail = f[tail_start..].iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if tail > 1e-10 * peak {
            warnings.push(format!(
                "profile for ell = {} has not decayed at r_max (tail/peak = {:.2e}); enlarge the domain",
                spec.ell,
                tail / peak
            ));
        }
        components.push(FieldComponent {
            spec: *spec,
            profile: RadialFunction::from_real(flow.grid.clone(), f)?,
        });
    }
    let state = FieldState::new(flow.grid.clone(), components)?;

    Ok(StationaryState {
        state,
        omegas,
        energy: terms.breakdown,
        residual,
        iterations,
        warnings,
    })
}

/// Frequencies of a state as Rayleigh quotients of the mean-field
/// Hamiltonian `H_j = -Δ_{ℓ_j} + V + U[n]`.
pub fn extract_omega(state: &FieldState, pot: &ExternalPotential) -> Result<Vec<f64>> {
    let grid = state.grid();
    let n_values: Vec<f64> = density(state).values().iter().map(|v| v.re).collect();
    let u = solve_poisson(&n_values, grid)?;
    let w: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(&r, &ui)| pot.value_at(r) + ui)
        .collect();
    let mut omegas = Vec::with_capacity(state.n_components());
    for c in state.components() {
        let g = c.profile.to_reduced();
        let norm: f64 = g.values().iter().map(|v| v.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(Error::Domain(format!(
                "component ell = {} is identically zero",
                c.spec.ell
            )));
        }
        let ham = ReducedHamiltonian::new(c.spec.ell, &w, grid);
        omegas.push(ham.rayleigh_quotient(g.values()));
    }
    Ok(omegas)
}

/// Stationarity residual `Σ_j ‖H_j f_j - ω_j f_j‖ / ‖f_j‖` with `ω_j` from
/// [`extract_omega`]. Zero exactly on discrete stationary solutions.
pub fn residual(state: &FieldState, pot: &ExternalPotential) -> Result<f64> {
    let grid = state.grid();
    let n_values: Vec<f64> = density(state).values().iter().map(|v| v.re).collect();
    let u = solve_poisson(&n_values, grid)?;
    let w: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(&r, &ui)| pot.value_at(r) + ui)
        .collect();
    let mut total = 0.0;
    for c in state.components() {
        let g = c.profile.to_reduced();
        let norm: f64 = g.values().iter().map(|v| v.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(Error::Domain(format!(
                "component ell = {} is identically zero",
                c.spec.ell
            )));
        }
        let ham = ReducedHamiltonian::new(c.spec.ell, &w, grid);
        total += ham.stationarity_defect(g.values());
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::{h1_distance_mod_phase, total_energy};
    use crate::grid::RadialFunction;
    use approx::assert_relative_eq;

    fn quick_params() -> SolverParams {
        SolverParams {
            residual_tolerance: 1e-7,
            ..SolverParams::default()
        }
    }

    #[test]
    fn hydrogen_rayleigh_quotient_from_tiny_state() {
        // With a vanishing amplitude the self-gravity term is negligible and
        // the quotient reduces to the hydrogen eigenvalue.
        let grid = RadialGrid::shared(60.0, 4096).unwrap();
        let f = RadialFunction::from_fn(grid.clone(), |r| 1e-8 * (-r / 2.0).exp());
        let state = FieldState::new(
            grid.clone(),
            vec![FieldComponent {
                spec: ComponentSpec::new(0, 1.0),
                profile: f,
            }],
        )
        .unwrap();
        let omega = extract_omega(&state, &ExternalPotential::PointMass { mass: 1.0 }).unwrap();
        assert_relative_eq!(omega[0], -0.25, max_relative = 1e-5);
    }

    #[test]
    fn rayleigh_quotient_scales_quadratically() {
        // Tiny amplitude and V = 0: the quotient is purely kinetic and picks
        // up λ² under f(r) → f(λr).
        let grid = RadialGrid::shared(40.0, 2048).unwrap();
        let profile = |r: f64| 1e-9 * r * (-r * r / 6.0).exp();
        let make = |lambda: f64| {
            FieldState::new(
                grid.clone(),
                vec![FieldComponent {
                    spec: ComponentSpec::new(1, 1.0),
                    profile: RadialFunction::from_fn(grid.clone(), |r| profile(lambda * r)),
                }],
            )
            .unwrap()
        };
        let w1 = extract_omega(&make(1.0), &ExternalPotential::None).unwrap()[0];
        let w2 = extract_omega(&make(2.0), &ExternalPotential::None).unwrap()[0];
        assert_relative_eq!(w2, 4.0 * w1, max_relative = 1e-8);
    }

    #[test]
    fn residual_of_frozen_eigenpair_and_random_state() {
        // Inverse iteration on the frozen linear operator produces a
        // machine-accurate discrete eigenpair; our residual must see it.
        let grid = RadialGrid::shared(50.0, 1024).unwrap();
        let w: Vec<f64> = grid.nodes().iter().map(|&r| -1.0 / r).collect();
        let ham = ReducedHamiltonian::new(0, &w, &grid);
        let mut g: Vec<f64> = grid.nodes().iter().map(|&r| r * (-r / 2.0).exp()).collect();
        for _ in 0..80 {
            let shifted: Vec<f64> = ham.diagonal().iter().map(|d| d + 0.3).collect();
            g = tridiag::solve_real(&shifted, ham.off_diagonal(), &g).unwrap();
            let norm: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in g.iter_mut() {
                *x /= norm;
            }
        }
        let gc: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        assert!(ham.stationarity_defect(&gc) < 1e-12);

        let random: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&r| Complex64::new((r * 0.77).sin() * (-r / 8.0).exp() * r, 0.0))
            .collect();
        assert!(ham.stationarity_defect(&random) > 1e-3);
    }

    #[test]
    fn minimize_self_gravitating_ground_state() {
        let grid = RadialGrid::shared(30.0, 1024).unwrap();
        let config = ModelConfig {
            components: vec![ComponentSpec::new(0, 1.0)],
            potential: ExternalPotential::None,
        };
        let st = minimize(&config, &grid, &quick_params()).unwrap();

        assert!(st.energy.total < 0.0);
        assert!(st.omegas[0] < 0.0);
        assert!(st.residual <= 1e-7);
        assert_eq!(st.node_counts(), vec![0]);
        // Charge restored exactly by the projection.
        assert_relative_eq!(charges(&st.state)[0], 1.0, max_relative = 1e-13);
        // Virial at convergence level thanks to the scale optimization.
        let e = &st.energy;
        let virial = (2.0 * e.kinetic - e.external - e.gravitational).abs() / e.total.abs();
        assert!(virial < 1e-8, "virial residual {virial:.2e}");
        // ω = 2(E - D)/N holds by discrete consistency.
        let lhs = 0.5 * st.omegas[0];
        let rhs = e.total - e.gravitational;
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        // M = 0, N = 1: ω = 6E.
        assert_relative_eq!(st.omegas[0], 6.0 * e.total, max_relative = 1e-7);
        assert!(st.warnings.is_empty(), "{:?}", st.warnings);
    }

    #[test]
    fn minimize_beats_scaling_family() {
        let grid = RadialGrid::shared(30.0, 1024).unwrap();
        let config = ModelConfig {
            components: vec![ComponentSpec::new(0, 1.0)],
            potential: ExternalPotential::None,
        };
        let st = minimize(&config, &grid, &quick_params()).unwrap();
        let e0 = total_energy(&st.state, &config.potential).total;
        for &lambda in &[0.9f64, 1.1] {
            let scaled = crate::functional::scaled_energy(&st.state, &config.potential, lambda);
            assert!(
                scaled >= e0 - 1e-10 * e0.abs(),
                "E[u_{lambda}] = {scaled} fell below E = {e0}"
            );
        }
    }

    #[test]
    fn minimize_multi_component() {
        let grid = RadialGrid::shared(40.0, 1024).unwrap();
        let config = ModelConfig {
            components: vec![ComponentSpec::new(0, 0.5), ComponentSpec::new(1, 0.5)],
            potential: ExternalPotential::None,
        };
        let st = minimize(&config, &grid, &quick_params()).unwrap();
        assert_eq!(st.omegas.len(), 2);
        assert!(st.omegas.iter().all(|&o| o < 0.0));
        assert_eq!(st.node_counts(), vec![0, 0]);
        let n = charges(&st.state);
        assert_relative_eq!(n[0], 0.5, max_relative = 1e-12);
        assert_relative_eq!(n[1], 0.5, max_relative = 1e-12);
        // Multi-component ω-energy relation.
        let e = &st.energy;
        let lhs = 0.5 * (0.5 * st.omegas[0] + 0.5 * st.omegas[1]);
        assert_relative_eq!(lhs, e.total - e.gravitational, max_relative = 1e-9);
    }

    #[test]
    fn minimize_rejects_bad_inputs() {
        let grid = RadialGrid::shared(30.0, 256).unwrap();
        let bad = ModelConfig {
            components: vec![],
            potential: ExternalPotential::None,
        };
        assert!(minimize(&bad, &grid, &SolverParams::default()).is_err());
        let zero_norm = ModelConfig {
            components: vec![ComponentSpec::new(0, 0.0)],
            potential: ExternalPotential::None,
        };
        assert!(minimize(&zero_norm, &grid, &SolverParams::default()).is_err());
    }

    #[test]
    fn default_seed_is_reproducible() {
        let grid = RadialGrid::shared(25.0, 512).unwrap();
        let config = ModelConfig {
            components: vec![ComponentSpec::new(0, 1.0)],
            potential: ExternalPotential::None,
        };
        let a = minimize(&config, &grid, &quick_params()).unwrap();
        let b = minimize(&config, &grid, &quick_params()).unwrap();
        assert_eq!(a.energy.total, b.energy.total);
        assert_eq!(a.omegas[0], b.omegas[0]);
        assert_eq!(
            h1_distance_mod_phase(&a.state, &b.state).unwrap(),
            0.0
        );
    }
}
