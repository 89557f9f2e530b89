use num_complex::Complex64;

use super::{derive_coulomb_coupling, derive_optomech_coupling, drive_amplitude, PhysicalParams, SystemParams};
use crate::error::{invalid, OmitError, Result};

/// Damped fixed-point iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSettings {
    /// Weight kept on the previous iterate.
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tolerance: 1e-12,
            max_iterations: 1000,
        }
    }
}

/// Inputs of the mean-field problem, already reduced to rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldInputs {
    /// Pump amplitude `eps_c`.
    pub eps_c: f64,
    pub kappa: f64,
    /// `omega_0 - omega_c`.
    pub bare_detuning: f64,
    /// Single-photon coupling `g`.
    pub g: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub c_s: Complex64,
    pub b1_s: Complex64,
    pub b2_s: Complex64,
    /// `G = g c_s`.
    pub coupling: Complex64,
    /// Converged `Delta = omega_0 - omega_c + g (b1_s + b1_s^*)`.
    pub delta_eff: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl MeanFieldInputs {
    fn cavity_amplitude(&self, delta: f64) -> Complex64 {
        Complex64::new(self.eps_c, 0.0) / Complex64::new(2.0 * self.kappa, delta)
    }

    fn mechanical_amplitude(&self, photons: f64) -> Complex64 {
        let i = Complex64::i();
        let w1 = Complex64::new(self.omega1, self.gamma1 / 2.0);
        let w2 = Complex64::new(self.omega2, self.gamma2 / 2.0);
        let damp2 = Complex64::new(self.gamma2 / 2.0, self.omega2);
        let coulomb = 8.0 * self.lambda_c.powi(2) * self.omega1 * self.omega2 / (w1 * w2 * damp2);
        let denom = Complex64::new(self.gamma1 / 2.0, self.omega1) + coulomb;
        -i * self.g * photons / denom
    }

    fn second_amplitude(&self, b1: Complex64) -> Complex64 {
        let i = Complex64::i();
        -i * 2.0 * self.lambda_c * b1 / Complex64::new(self.gamma2 / 2.0, self.omega2)
    }
}

/// Solve `c_s = eps_c / (2 kappa + i Delta)` with the back-action shifted
/// `Delta` by damped iteration on `Delta`.
pub fn solve_mean_field(inputs: &MeanFieldInputs, settings: &FixedPointSettings) -> Result<SteadyState> {
    if !(inputs.kappa > 0.0) {
        return Err(invalid("kappa", "must be > 0"));
    }
    if !(0.0..1.0).contains(&settings.damping) {
        return Err(invalid("damping", "must lie in [0, 1)"));
    }
    let mut delta = inputs.bare_detuning;
    let mut residual = f64::INFINITY;
    for iteration in 1..=settings.max_iterations {
        let c_s = inputs.cavity_amplitude(delta);
        let b1_s = inputs.mechanical_amplitude(c_s.norm_sqr());
        let shifted = inputs.bare_detuning + 2.0 * inputs.g * b1_s.re;
        residual = (c_s - inputs.cavity_amplitude(shifted)).norm() / c_s.norm().max(1.0);
        if !residual.is_finite() {
            break;
        }
        if residual <= settings.tolerance {
            return Ok(SteadyState {
                c_s,
                b1_s,
                b2_s: inputs.second_amplitude(b1_s),
                coupling: c_s * inputs.g,
                delta_eff: shifted,
                iterations: iteration,
                residual,
            });
        }
        delta = settings.damping * delta + (1.0 - settings.damping) * shifted;
    }
    Err(OmitError::Convergence {
        iterations: settings.max_iterations,
        residual,
    })
}

impl MeanFieldInputs {
    pub fn from_physical(phys: &PhysicalParams) -> Result<Self> {
        let g = derive_optomech_coupling(phys)?;
        Ok(Self {
            eps_c: drive_amplitude(phys.pump_power, phys.kappa, phys.pump_omega())?,
            kappa: phys.kappa,
            bare_detuning: phys.bare_detuning(),
            g,
            omega1: phys.omega1,
            omega2: phys.omega2,
            gamma1: phys.gamma1,
            gamma2: phys.gamma2,
            lambda_c: derive_coulomb_coupling(phys)?,
        })
    }
}

pub fn steady_state(phys: &PhysicalParams) -> Result<SteadyState> {
    steady_state_with(phys, &FixedPointSettings::default())
}

pub fn steady_state_with(phys: &PhysicalParams, settings: &FixedPointSettings) -> Result<SteadyState> {
    solve_mean_field(&MeanFieldInputs::from_physical(phys)?, settings)
}

impl PhysicalParams {
    /// Linearized parameters around the converged steady state. Both probes
    /// carry `probe_power`; the probe frequency is taken as the pump frequency
    /// when converting power to amplitude (they differ by a mechanical frequency).
    pub fn to_system(&self, settings: &FixedPointSettings) -> Result<(SystemParams, SteadyState)> {
        let inputs = MeanFieldInputs::from_physical(self)?;
        let state = solve_mean_field(&inputs, settings)?;
        let eps_p = drive_amplitude(self.probe_power, self.kappa, self.pump_omega())?;
        let sys = SystemParams {
            omega1: self.omega1,
            omega2: self.omega2,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            kappa: self.kappa,
            delta_cav: state.delta_eff,
            g_eff: state.coupling.norm(),
            g_eff_phase: state.coupling.arg(),
            lambda_c: inputs.lambda_c,
            eps_left: eps_p,
            eps_right: eps_p,
            theta_rel: 0.0,
            convention: Default::default(),
        };
        Ok((sys, state))
    }
}
