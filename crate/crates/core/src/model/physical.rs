use std::f64::consts::PI;

use super::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{invalid, Result};

/// SI device parameters. Frequencies and decay rates are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Effective masses (kg).
    pub m1: f64,
    pub m2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Per-side cavity decay.
    pub kappa: f64,
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Pump wavelength (m); sets the pump frequency when `pump_frequency` is absent.
    pub cavity_wavelength: f64,
    /// Radiation-pressure strength per displacement; `omega_c / L` when absent.
    pub g0: Option<f64>,
    /// Bias capacitances (F) and voltages (V).
    pub c1: f64,
    pub c2: f64,
    pub v1: f64,
    pub v2: f64,
    /// Equilibrium separation of the resonators (m).
    pub r0: f64,
    /// Pump and probe powers (W).
    pub pump_power: f64,
    pub probe_power: f64,
    pub pump_frequency: Option<f64>,
    /// Bare cavity frequency. When absent the bare detuning defaults to `omega1`.
    pub bare_cavity_frequency: Option<f64>,
}

impl PhysicalParams {
    /// The experimental parameter set: 947 kHz resonators of 145 ng, a 25 mm
    /// cavity at 1064 nm with kappa = 2pi x 215 kHz and a 0.037 mW pump.
    /// Decays are set to `2 kappa`; the bias voltages put lambda at 2pi x 124 kHz.
    pub fn experimental() -> Self {
        let two_pi = 2.0 * PI;
        let kappa = two_pi * 215e3;
        Self {
            m1: 145e-12,
            m2: 145e-12,
            omega1: two_pi * 947e3,
            omega2: two_pi * 947e3,
            gamma1: 2.0 * kappa,
            gamma2: 2.0 * kappa,
            kappa,
            cavity_length: 25e-3,
            cavity_wavelength: 1064e-9,
            g0: None,
            c1: 27.5e-9,
            c2: 27.5e-9,
            v1: EXPERIMENTAL_BIAS_VOLTAGE,
            v2: EXPERIMENTAL_BIAS_VOLTAGE,
            r0: 67e-6,
            pump_power: 0.037e-3,
            probe_power: 0.037e-6,
            pump_frequency: None,
            bare_cavity_frequency: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("kappa", self.kappa),
            ("cavity_length", self.cavity_length),
            ("cavity_wavelength", self.cavity_wavelength),
            ("r0", self.r0),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, "must be finite and > 0"));
            }
        }
        let non_negative = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("c1", self.c1),
            ("c2", self.c2),
            ("pump_power", self.pump_power),
            ("probe_power", self.probe_power),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, "must be finite and >= 0"));
            }
        }
        for (name, v) in [("v1", self.v1), ("v2", self.v2)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if let Some(g0) = self.g0 {
            if !g0.is_finite() {
                return Err(invalid("g0", "must be finite"));
            }
        }
        if let Some(w) = self.pump_frequency {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid("pump_frequency", "must be finite and > 0"));
            }
        }
        if let Some(w) = self.bare_cavity_frequency {
            if !(w.is_finite() && w > 0.0) {
                return Err(invalid("bare_cavity_frequency", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Pump angular frequency `omega_c = 2 pi c / lambda_c` unless given explicitly.
    pub fn pump_omega(&self) -> f64 {
        self.pump_frequency
            .unwrap_or(2.0 * PI * SPEED_OF_LIGHT / self.cavity_wavelength)
    }

    pub fn radiation_pressure_strength(&self) -> f64 {
        self.g0.unwrap_or(self.pump_omega() / self.cavity_length)
    }

    /// `omega_0 - omega_c`.
    pub fn bare_detuning(&self) -> f64 {
        match self.bare_cavity_frequency {
            Some(w0) => w0 - self.pump_omega(),
            None => self.omega1,
        }
    }
}

// V such that lambda = 2pi x 124 kHz for the experimental masses, C = 27.5 nF, r0 = 67 um.
const EXPERIMENTAL_BIAS_VOLTAGE: f64 = 5.4539e-3;

/// Single-photon optomechanical coupling `g = g0 sqrt(hbar / (2 m1 omega1))`.
pub fn derive_optomech_coupling(phys: &PhysicalParams) -> Result<f64> {
    phys.validate()?;
    let zpf = (HBAR / (2.0 * phys.m1 * phys.omega1)).sqrt();
    Ok(phys.radiation_pressure_strength() * zpf)
}

/// Coulomb strength per unit displacement squared,
/// `lambda0 = C1 V1 C2 V2 / (2 pi hbar eps0 r0^3)`.
pub fn coulomb_strength(phys: &PhysicalParams) -> Result<f64> {
    phys.validate()?;
    Ok(phys.c1 * phys.v1 * phys.c2 * phys.v2
        / (2.0 * PI * HBAR * EPSILON_0 * phys.r0.powi(3)))
}

/// Phonon-basis Coulomb coupling `lambda = lambda0 hbar / (2 sqrt(m1 omega1 m2 omega2))`,
/// from `hbar lambda0 q1 q2` with `q_j = sqrt(hbar / 2 m_j omega_j) (b_j + b_j^+)`.
pub fn derive_coulomb_coupling(phys: &PhysicalParams) -> Result<f64> {
    let lambda0 = coulomb_strength(phys)?;
    Ok(lambda0 * HBAR / (2.0 * (phys.m1 * phys.omega1 * phys.m2 * phys.omega2).sqrt()))
}

/// Drive amplitude `sqrt(2 kappa P / (hbar omega))`.
pub fn drive_amplitude(power: f64, kappa: f64, omega: f64) -> Result<f64> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(invalid("power", "must be finite and >= 0"));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", "must be finite and > 0"));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(invalid("omega", "must be finite and > 0"));
    }
    Ok((2.0 * kappa * power / (HBAR * omega)).sqrt())
}
