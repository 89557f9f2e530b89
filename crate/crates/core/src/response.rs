//! Frequency-domain probe response: sideband amplitudes, the two output
//! fields, normalized excitations and the bright/dark mechanical modes.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, OmitError, Result};
use crate::model::SystemParams;

/// Upper-sideband amplitudes at one probe detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResponse {
    pub detuning: f64,
    /// Probe-pump detuning `delta` the detuning maps to.
    pub delta: f64,
    pub dc_plus: Complex64,
    pub db1_plus: Complex64,
    pub db2_plus: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputFields {
    pub out_left: Complex64,
    pub out_right: Complex64,
    pub power_left: f64,
    pub power_right: f64,
}

/// Excitations in units of the bare probe photon number `(|eps_L|^2 + |eps_R|^2) / 4 kappa^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDistribution {
    pub norm_photon: f64,
    pub norm_phonon1: f64,
    pub norm_phonon2: f64,
    pub phonon_sum: f64,
}

/// How output powers are normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Both sides divided by `|eps_L|^2`.
    #[default]
    Left,
    /// Each side divided by its own probe power.
    PerSide,
}

/// Mechanical part of the response at probe-pump detuning `delta`:
/// `A = gamma1/2 - i(delta - omega1) + lambda^2 / chi2` with `chi2 = gamma2/2 - i(delta - omega2)`.
pub(crate) fn mechanical_response(sys: &SystemParams, delta: f64) -> Result<(Complex64, Complex64)> {
    let chi2 = Complex64::new(sys.gamma2 / 2.0, -(delta - sys.omega2));
    let mut a = Complex64::new(sys.gamma1 / 2.0, -(delta - sys.omega1));
    if sys.lambda_c != 0.0 {
        if chi2.norm() == 0.0 {
            return Err(OmitError::SingularResponse { delta });
        }
        a += sys.lambda_c * sys.lambda_c / chi2;
    }
    if a.norm() == 0.0 || !a.is_finite() {
        return Err(OmitError::SingularResponse { delta });
    }
    Ok((a, chi2))
}

pub fn probe_response(sys: &SystemParams, d: f64) -> Result<ProbeResponse> {
    sys.validate()?;
    let delta = sys.probe_delta(d);
    let (a, chi2) = mechanical_response(sys, delta)?;
    let i = Complex64::i();
    let g = sys.coupling();
    let denom = Complex64::new(2.0 * sys.kappa, sys.delta_cav - delta) + g.norm_sqr() / a;
    let dc_plus = sys.total_drive() / denom;
    let db1_plus = -i * g.conj() * dc_plus / a;
    let db2_plus = if sys.lambda_c == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -i * sys.lambda_c / chi2 * db1_plus
    };
    Ok(ProbeResponse {
        detuning: d,
        delta,
        dc_plus,
        db1_plus,
        db2_plus,
    })
}

pub fn output_fields(sys: &SystemParams, d: f64) -> Result<OutputFields> {
    output_fields_normalized(sys, d, Normalization::Left)
}

pub fn output_fields_normalized(sys: &SystemParams, d: f64, norm: Normalization) -> Result<OutputFields> {
    let r = probe_response(sys, d)?;
    let cavity = 2.0 * sys.kappa * r.dc_plus;
    let out_left = cavity - sys.eps_left;
    let out_right = cavity - sys.right_drive();
    let (left_ref, right_ref) = match norm {
        Normalization::Left => (sys.eps_left, sys.eps_left),
        Normalization::PerSide => (sys.eps_left, sys.eps_right),
    };
    if left_ref == 0.0 {
        return Err(invalid("eps_left", "output powers are normalized by eps_left, which is 0"));
    }
    if right_ref == 0.0 {
        return Err(invalid("eps_right", "per-side normalization needs eps_right > 0"));
    }
    Ok(OutputFields {
        out_left,
        out_right,
        power_left: out_left.norm_sqr() / (left_ref * left_ref),
        power_right: out_right.norm_sqr() / (right_ref * right_ref),
    })
}

impl EnergyDistribution {
    pub fn from_response(sys: &SystemParams, r: &ProbeResponse) -> Result<Self> {
        let probe = sys.eps_left.powi(2) + sys.eps_right.powi(2);
        if probe <= 0.0 {
            return Err(invalid("eps_left", "energy normalization needs |eps_L|^2 + |eps_R|^2 > 0"));
        }
        let scale = 4.0 * sys.kappa * sys.kappa / probe;
        let norm_phonon1 = scale * r.db1_plus.norm_sqr();
        let norm_phonon2 = scale * r.db2_plus.norm_sqr();
        Ok(Self {
            norm_photon: scale * r.dc_plus.norm_sqr(),
            norm_phonon1,
            norm_phonon2,
            phonon_sum: norm_phonon1 + norm_phonon2,
        })
    }
}

pub fn energy_distribution(sys: &SystemParams, d: f64) -> Result<EnergyDistribution> {
    EnergyDistribution::from_response(sys, &probe_response(sys, d)?)
}

/// Bright mode `b = b1 cos(theta) + b2 sin(theta)` and dark mode
/// `d = b2 cos(theta) - b1 sin(theta)` of the Coulomb-coupled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightDarkModes {
    pub mixing_angle: f64,
    pub coupling_bright: f64,
    pub coupling_dark: f64,
}

pub fn bright_dark_modes(sys: &SystemParams) -> Result<BrightDarkModes> {
    if sys.lambda_c == 0.0 {
        return Err(OmitError::DegenerateModes);
    }
    let split = sys.omega2 - sys.omega1;
    let root = (4.0 * sys.lambda_c * sys.lambda_c + split * split).sqrt();
    // tan = (split + root) / 2 lambda, rationalized when split < 0
    let tan = if split >= 0.0 {
        (split + root) / (2.0 * sys.lambda_c)
    } else {
        2.0 * sys.lambda_c / (root - split)
    };
    let mixing_angle = tan.atan();
    Ok(BrightDarkModes {
        mixing_angle,
        coupling_bright: sys.g_eff * mixing_angle.cos(),
        coupling_dark: sys.g_eff * mixing_angle.sin(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub power_left: f64,
    pub power_right: f64,
    pub energy: EnergyDistribution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub detuning: f64,
    pub point: Result<SweepPoint>,
}

fn sweep_point(sys: &SystemParams, d: f64, norm: Normalization) -> SweepRow {
    let point = (|| {
        let r = probe_response(sys, d)?;
        let out = output_fields_normalized(sys, d, norm)?;
        Ok(SweepPoint {
            power_left: out.power_left,
            power_right: out.power_right,
            energy: EnergyDistribution::from_response(sys, &r)?,
        })
    })();
    SweepRow { detuning: d, point }
}

/// One row per grid point, in grid order. Failures stay in their row.
pub fn sweep(sys: &SystemParams, grid: &[f64]) -> Vec<SweepRow> {
    sweep_with(sys, grid, Normalization::Left)
}

pub fn sweep_with(sys: &SystemParams, grid: &[f64], norm: Normalization) -> Vec<SweepRow> {
    grid.iter().map(|&d| sweep_point(sys, d, norm)).collect()
}

/// Same rows as [`sweep_with`], evaluated on the rayon pool.
pub fn sweep_par(sys: &SystemParams, grid: &[f64], norm: Normalization) -> Vec<SweepRow> {
    grid.par_iter().map(|&d| sweep_point(sys, d, norm)).collect()
}

/// `n` evenly spaced points on `[lo, hi]` (`n >= 2`), or `[lo]` when `n == 1`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
                .collect()
        }
    }
}
