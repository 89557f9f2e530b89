//! Model parameters, unit conventions and the driven mean-field steady state.
//!
//! Two parameterizations coexist. [`SystemParams`] carries the linearized
//! model directly (frequencies, decays and couplings in any consistent
//! angular unit, usually multiples of `kappa`). [`PhysicalParams`] carries SI
//! device data and is turned into a [`SystemParams`] through the coupling
//! derivations and the self-consistent steady state.

mod physical;
mod steady;

pub use physical::{
    coulomb_strength, derive_coulomb_coupling, derive_optomech_coupling, drive_amplitude,
    PhysicalParams,
};
pub use steady::{solve_mean_field, steady_state, steady_state_with, FixedPointSettings, MeanFieldInputs, SteadyState};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Reduced Planck constant (J s), CODATA 2018 exact.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m), CODATA 2018.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// How the probe detuning `D` maps onto the probe-pump detuning `delta`.
///
/// `Eq8` uses `delta = omega_ref + D`, so the cavity denominator reads
/// `2 kappa + i (Delta - delta)`. `Eq11` reads the cavity term as
/// `2 kappa + i D`, which is the same physics with the detuning axis mirrored:
/// `delta = omega_ref - D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Eq8,
    Eq11,
}

impl Convention {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eq8" => Some(Self::Eq8),
            "eq11" => Some(Self::Eq11),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Eq8 => "eq8",
            Self::Eq11 => "eq11",
        }
    }
}

/// Linearized model parameters.
///
/// All rates are angular (rad/s in physical mode, multiples of `kappa` in
/// normalized mode). `kappa` is the per-side decay; the cavity loses `2 kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub kappa: f64,
    /// Effective cavity-pump detuning `Delta`.
    pub delta_cav: f64,
    /// `|G|`.
    pub g_eff: f64,
    /// `arg G`.
    pub g_eff_phase: f64,
    pub lambda_c: f64,
    pub eps_left: f64,
    pub eps_right: f64,
    /// Relative phase applied to the right probe, kept in (-pi, pi].
    pub theta_rel: f64,
    pub convention: Convention,
}

impl SystemParams {
    /// Identical resonators at `omega_m` with `gamma1 = gamma2 = 2 kappa`,
    /// `Delta = omega_m`, unit probes and no relative phase.
    pub fn identical(omega_m: f64, kappa: f64, g_eff: f64, lambda_c: f64) -> Self {
        Self {
            omega1: omega_m,
            omega2: omega_m,
            gamma1: 2.0 * kappa,
            gamma2: 2.0 * kappa,
            kappa,
            delta_cav: omega_m,
            g_eff,
            g_eff_phase: 0.0,
            lambda_c,
            eps_left: 1.0,
            eps_right: 1.0,
            theta_rel: 0.0,
            convention: Convention::Eq8,
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta_rel = reduce_phase(theta);
        self
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("kappa", self.kappa),
            ("delta_cav", self.delta_cav),
            ("g_eff", self.g_eff),
            ("g_eff_phase", self.g_eff_phase),
            ("lambda_c", self.lambda_c),
            ("eps_left", self.eps_left),
            ("eps_right", self.eps_right),
            ("theta_rel", self.theta_rel),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.kappa <= 0.0 {
            return Err(invalid("kappa", "must be > 0"));
        }
        if self.omega1 <= 0.0 {
            return Err(invalid("omega1", "must be > 0"));
        }
        if self.omega2 <= 0.0 {
            return Err(invalid("omega2", "must be > 0"));
        }
        if self.gamma1 < 0.0 {
            return Err(invalid("gamma1", "must be >= 0"));
        }
        if self.gamma2 < 0.0 {
            return Err(invalid("gamma2", "must be >= 0"));
        }
        if self.g_eff < 0.0 {
            return Err(invalid("g_eff", "must be >= 0"));
        }
        if self.eps_left < 0.0 {
            return Err(invalid("eps_left", "must be >= 0"));
        }
        if self.eps_right < 0.0 {
            return Err(invalid("eps_right", "must be >= 0"));
        }
        Ok(())
    }

    /// Detuning origin for `D`: `omega1` (equal to `omega_m` for identical resonators).
    pub fn omega_ref(&self) -> f64 {
        self.omega1
    }

    /// Probe-pump detuning `delta` for a probe detuning `D`.
    pub fn probe_delta(&self, d: f64) -> f64 {
        match self.convention {
            Convention::Eq8 => self.omega_ref() + d,
            Convention::Eq11 => self.omega_ref() - d,
        }
    }

    /// Complex effective coupling `G`.
    pub fn coupling(&self) -> Complex64 {
        Complex64::from_polar(self.g_eff, self.g_eff_phase)
    }

    /// Combined drive `eps_L + eps_R e^{i theta}`.
    pub fn total_drive(&self) -> Complex64 {
        self.eps_left + Complex64::from_polar(self.eps_right, self.theta_rel)
    }

    pub fn right_drive(&self) -> Complex64 {
        Complex64::from_polar(self.eps_right, self.theta_rel)
    }

    pub fn is_identical(&self) -> bool {
        (self.omega1 - self.omega2).abs() <= 1e-12 * self.omega1.abs().max(self.omega2.abs())
    }

    /// Every rate multiplied by `s`; drive amplitudes and phases unchanged.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            omega1: self.omega1 * s,
            omega2: self.omega2 * s,
            gamma1: self.gamma1 * s,
            gamma2: self.gamma2 * s,
            kappa: self.kappa * s,
            delta_cav: self.delta_cav * s,
            g_eff: self.g_eff * s,
            lambda_c: self.lambda_c * s,
            ..*self
        }
    }
}

/// Reduce an angle to (-pi, pi].
pub fn reduce_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}
