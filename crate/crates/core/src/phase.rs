//! Unilateral inverse OMIT: with equal probe strengths and a relative phase
//! `theta`, the left output vanishes where
//! `z(D) = |G|^2 / A - i(delta - Delta)` satisfies `z = 2 kappa e^{i theta}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::{bracket_roots, single_nr_channels_numeric, UnilateralRoot};
use crate::error::{invalid, OmitError, Result};
use crate::model::{reduce_phase, SystemParams};
use crate::response::{linspace, mechanical_response};

pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-3;
/// Sensitivity window in units of kappa.
pub const DEFAULT_WINDOW: (f64, f64) = (-0.01, 0.01);
pub const DEFAULT_SAMPLES: usize = 21;
/// Band over which the locus is required to be usable, in units of kappa.
pub const MONITOR_BAND: (f64, f64) = (-1.5, 1.5);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLocusPoint {
    pub detuning: f64,
    /// `arg z` in (-pi, pi].
    pub theta: f64,
    /// `(|z| - 2 kappa) / 2 kappa`.
    pub modulus_residual: f64,
    pub feasible: bool,
    pub z: Complex64,
}

pub fn locus_value(sys: &SystemParams, d: f64) -> Result<Complex64> {
    let delta = sys.probe_delta(d);
    let (a, _) = mechanical_response(sys, delta)?;
    Ok(sys.g_eff * sys.g_eff / a - Complex64::new(0.0, delta - sys.delta_cav))
}

pub fn unilateral_locus(sys: &SystemParams, d: f64) -> Result<PhaseLocusPoint> {
    unilateral_locus_with(sys, d, DEFAULT_FEASIBILITY_TOL)
}

pub fn unilateral_locus_with(sys: &SystemParams, d: f64, tol: f64) -> Result<PhaseLocusPoint> {
    sys.validate()?;
    if sys.eps_left != sys.eps_right {
        return Err(invalid("eps_right", "the unilateral locus assumes eps_right = eps_left"));
    }
    let z = locus_value(sys, d)?;
    let two_k = 2.0 * sys.kappa;
    let modulus_residual = (z.norm() - two_k) / two_k;
    Ok(PhaseLocusPoint {
        detuning: d,
        theta: reduce_phase(z.arg()),
        modulus_residual,
        feasible: modulus_residual.abs() <= tol,
        z,
    })
}

/// Locus on `n` evenly spaced detunings over `[lo, hi]`.
pub fn locus_scan(sys: &SystemParams, lo: f64, hi: f64, n: usize, tol: f64) -> Result<Vec<PhaseLocusPoint>> {
    linspace(lo, hi, n)
        .into_iter()
        .map(|d| unilateral_locus_with(sys, d, tol))
        .collect()
}

/// Detuning where `theta(D)` first changes direction, if anywhere.
pub fn first_reversal(points: &[PhaseLocusPoint]) -> Option<f64> {
    let mut direction = 0.0;
    for w in points.windows(2) {
        let step = reduce_phase(w[1].theta - w[0].theta);
        if step == 0.0 {
            continue;
        }
        if direction != 0.0 && step.signum() != direction {
            return Some(w[0].detuning);
        }
        direction = step.signum();
    }
    None
}

/// Roots of `|z(D)| = 2 kappa` on `[lo, hi]` for any system, bisected to `1e-12 kappa`.
pub fn unilateral_roots(sys: &SystemParams, lo: f64, hi: f64, n: usize) -> Result<Vec<UnilateralRoot>> {
    sys.validate()?;
    let k = sys.kappa;
    let defect = |d: f64| match locus_value(sys, d) {
        Ok(z) => (z.norm_sqr() - 4.0 * k * k) / (k * k),
        Err(_) => f64::NAN,
    };
    bracket_roots(defect, lo, hi, n.max(2), 1e-12 * k)
        .into_iter()
        .map(|d| {
            Ok(UnilateralRoot {
                detuning: d,
                theta: reduce_phase(locus_value(sys, d)?.arg()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensitivity {
    /// Mean `dD/dtheta` over the window, in the units of `D` per radian.
    pub slope: f64,
    /// Whether every window sample met the modulus tolerance.
    pub feasible: bool,
    pub samples: Vec<PhaseLocusPoint>,
}

impl Sensitivity {
    /// Slope as ordinary frequency in MHz/rad, for `D` in units of `kappa`
    /// and a physical `kappa_si` in rad/s.
    pub fn mhz_per_rad(&self, kappa_over_unit: f64, kappa_si: f64) -> f64 {
        self.slope / kappa_over_unit * kappa_si / (2.0 * PI * 1e6)
    }
}

/// Mean of the central differences `(D[k+1] - D[k-1]) / (theta[k+1] - theta[k-1])`.
/// Errors when `theta` is not strictly monotonic, naming the first reversal.
pub fn slope_from_samples(d: &[f64], theta: &[f64]) -> Result<f64> {
    if d.len() != theta.len() || d.len() < 3 {
        return Err(OmitError::InvalidWindow("need at least 3 matching samples".into()));
    }
    let mut direction = 0.0;
    for k in 1..theta.len() {
        let step = reduce_phase(theta[k] - theta[k - 1]);
        if step == 0.0 || (direction != 0.0 && step.signum() != direction) {
            return Err(OmitError::InvalidWindow(format!(
                "theta(D) is not monotonic: first reversal at D = {:e}",
                d[k - 1]
            )));
        }
        direction = step.signum();
    }
    let n = d.len();
    let sum: f64 = (1..n - 1)
        .map(|k| (d[k + 1] - d[k - 1]) / reduce_phase(theta[k + 1] - theta[k - 1]))
        .sum();
    Ok(sum / (n - 2) as f64)
}

pub fn phase_sensitivity(sys: &SystemParams, d_lo: f64, d_hi: f64) -> Result<Sensitivity> {
    phase_sensitivity_with(sys, d_lo, d_hi, DEFAULT_SAMPLES, DEFAULT_FEASIBILITY_TOL)
}

pub fn phase_sensitivity_with(
    sys: &SystemParams,
    d_lo: f64,
    d_hi: f64,
    samples: usize,
    tol: f64,
) -> Result<Sensitivity> {
    if !(d_lo < d_hi) || samples < 3 {
        return Err(OmitError::InvalidWindow(format!(
            "need D_lo < D_hi and >= 3 samples, got [{d_lo}, {d_hi}] with {samples}"
        )));
    }
    let points = locus_scan(sys, d_lo, d_hi, samples, tol)?;
    let d: Vec<f64> = points.iter().map(|p| p.detuning).collect();
    let theta: Vec<f64> = points.iter().map(|p| p.theta).collect();
    let slope = slope_from_samples(&d, &theta)?;
    Ok(Sensitivity {
        slope,
        feasible: points.iter().all(|p| p.feasible),
        samples: points,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub ratio: f64,
    /// `|dD/dtheta|` on the sensitivity window, when it is monotonic.
    pub sensitivity: Option<f64>,
    /// Roots of `|z| = 2 kappa` inside the monitored band.
    pub band_roots: usize,
    /// Window samples all within the modulus tolerance.
    pub window_feasible: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioScan {
    pub rows: Vec<RatioRow>,
    pub best_ratio: f64,
    pub best_sensitivity: f64,
}

impl RatioScan {
    pub fn excluded(&self) -> impl Iterator<Item = &RatioRow> {
        self.rows.iter().filter(|r| !r.feasible)
    }
}

fn ratio_row(base: &SystemParams, ratio: f64) -> RatioRow {
    let sys = SystemParams { omega2: base.omega1 * ratio, ..*base };
    let k = sys.kappa;
    let (lo, hi) = DEFAULT_WINDOW;
    let sens = phase_sensitivity(&sys, lo * k, hi * k).ok();
    let band_roots = unilateral_roots(&sys, MONITOR_BAND.0 * k, MONITOR_BAND.1 * k, 601)
        .map(|r| r.len())
        .unwrap_or(0);
    let sensitivity = sens.as_ref().map(|s| s.slope.abs());
    RatioRow {
        ratio,
        sensitivity,
        band_roots,
        window_feasible: sens.as_ref().is_some_and(|s| s.feasible),
        feasible: band_roots > 0 && sensitivity.is_some_and(f64::is_finite),
    }
}

/// Scan `omega2 / omega1` over `[lo, hi]` in steps of `step` and keep the
/// largest window sensitivity among feasible ratios. A ratio is feasible when
/// `|z| = 2 kappa` has a root within `D in [-1.5, 1.5] kappa` and `theta(D)`
/// is monotonic on the window.
pub fn optimal_frequency_ratio(base: &SystemParams, lo: f64, hi: f64, step: f64) -> Result<RatioScan> {
    base.validate()?;
    if !(lo > 0.0 && hi >= lo && step > 0.0) {
        return Err(invalid("ratio", "need 0 < lo <= hi and step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let ratios: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
    let rows: Vec<RatioRow> = ratios.par_iter().map(|&r| ratio_row(base, r)).collect();
    let best = rows
        .iter()
        .filter(|r| r.feasible)
        .filter_map(|r| r.sensitivity.map(|s| (r.ratio, s)))
        .fold(None, |acc: Option<(f64, f64)>, (r, s)| match acc {
            Some((_, bs)) if bs >= s => acc,
            _ => Some((r, s)),
        });
    match best {
        Some((best_ratio, best_sensitivity)) => Ok(RatioScan {
            rows,
            best_ratio,
            best_sensitivity,
        }),
        None => Err(OmitError::NoFeasibleRatio { lo, hi }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayPhaseRow {
    pub gamma1: f64,
    pub roots: Vec<UnilateralRoot>,
}

/// Unilateral roots and phases of a single resonator for each decay rate.
pub fn decay_phase_curve(g_mag: f64, kappa: f64, gamma1_grid: &[f64]) -> Result<Vec<DecayPhaseRow>> {
    gamma1_grid
        .par_iter()
        .map(|&gamma1| {
            Ok(DecayPhaseRow {
                gamma1,
                roots: single_nr_channels_numeric(g_mag, kappa, gamma1)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::matching_coulomb_coupling;
    use proptest::prelude::*;

    fn matched(g: f64) -> SystemParams {
        SystemParams::identical(10.0, 1.0, g, matching_coulomb_coupling(g, 1.0).unwrap())
    }

    #[test]
    fn matched_locus_at_origin() {
        let p = unilateral_locus(&matched(2.0), 0.0).unwrap();
        assert!((p.z - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        assert_eq!(p.theta, 0.0);
        assert!(p.modulus_residual.abs() < 1e-14);
        assert!(p.feasible);
    }

    #[test]
    fn channels_have_zero_phase() {
        for g in [2.0, 4.0, 6.0] {
            for d in crate::channels::analytic_channels(g, 1.0).detunings() {
                let p = unilateral_locus(&matched(g), d).unwrap();
                assert!(p.theta.abs() < 1e-10 && p.modulus_residual.abs() < 1e-10, "G = {g}, D = {d}: {p:?}");
            }
        }
    }

    #[test]
    fn unequal_probes_rejected() {
        let mut sys = matched(2.0);
        sys.eps_right = 0.5;
        assert!(matches!(unilateral_locus(&sys, 0.0), Err(OmitError::InvalidParameter { .. })));
    }

    #[test]
    fn linear_locus_slope() {
        let d = linspace(-0.01, 0.01, 21);
        let theta: Vec<f64> = d.iter().map(|x| 0.4 * x).collect();
        assert!((slope_from_samples(&d, &theta).unwrap() - 2.5).abs() < 1e-10);
    }

    #[test]
    fn reversal_named() {
        let d = [0.0, 1.0, 2.0, 3.0];
        let err = slope_from_samples(&d, &[0.0, 0.1, 0.05, 0.0]).unwrap_err();
        assert!(err.to_string().contains("D = 1e0"), "{err}");
    }

    #[test]
    fn identical_sensitivity_closed_form() {
        // near D = 0, dD/dtheta = 2G^2 / (3G^2 - 8) kappa for the matched system
        for g in [2.0, 4.0] {
            let s = phase_sensitivity(&matched(g), -0.01, 0.01).unwrap();
            let expect = 2.0 * g * g / (3.0 * g * g - 8.0);
            assert!((s.slope.abs() - expect).abs() < 1e-3 * expect, "G = {g}: {}", s.slope);
            assert!(s.feasible);
        }
    }

    #[test]
    fn mhz_conversion() {
        let s = Sensitivity { slope: 2.0, feasible: true, samples: Vec::new() };
        let kappa_si = 2.0 * PI * 215e3;
        assert!((s.mhz_per_rad(1.0, kappa_si) - 0.43).abs() < 1e-12);
    }

    #[test]
    fn single_resonator_locus_equals_reduction() {
        let mut sys = SystemParams::identical(10.0, 1.0, 2.0, 0.0);
        sys.gamma1 = 1.3;
        let via_locus = unilateral_roots(&sys, -4.0, 4.0, 8001).unwrap();
        let direct = single_nr_channels_numeric(2.0, 1.0, 1.3).unwrap();
        assert_eq!(via_locus.len(), direct.len());
        for (a, b) in via_locus.iter().zip(&direct) {
            assert!((a.detuning - b.detuning).abs() < 1e-9);
            assert!((a.theta - b.theta).abs() < 1e-9);
        }
    }

    #[test]
    fn decay_curve_nonempty_for_any_decay() {
        let grid: Vec<f64> = (1..=80).map(|k| 0.1 * k as f64).collect();
        for row in decay_phase_curve(2.0, 1.0, &grid).unwrap() {
            assert!(!row.roots.is_empty(), "gamma1 = {}", row.gamma1);
        }
        let tiny = decay_phase_curve(2.0, 1.0, &[1e-6]).unwrap();
        assert!(!tiny[0].roots.is_empty());
    }

    #[test]
    fn ratio_one_matches_identical() {
        let base = matched(2.0);
        let scan = optimal_frequency_ratio(&base, 1.0, 1.0, 0.01).unwrap();
        let direct = phase_sensitivity(&base, -0.01, 0.01).unwrap();
        assert_eq!(scan.rows.len(), 1);
        assert_eq!(scan.best_ratio, 1.0);
        assert_eq!(scan.best_sensitivity, direct.slope.abs());
    }

    #[test]
    fn ratio_scan_rejects_bad_range() {
        assert!(optimal_frequency_ratio(&matched(2.0), 0.0, 1.0, 0.1).is_err());
        assert!(optimal_frequency_ratio(&matched(2.0), 1.0, 1.1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn theta_antisymmetric(g in 1.7f64..8.0, d in 0.0f64..3.0) {
            let sys = matched(g);
            let a = unilateral_locus(&sys, d).unwrap();
            let b = unilateral_locus(&sys, -d).unwrap();
            if a.feasible && b.feasible && a.theta.abs() < PI - 1e-9 {
                prop_assert!((a.theta + b.theta).abs() < 1e-10);
            }
            prop_assert!((a.modulus_residual - b.modulus_residual).abs() < 1e-12);
        }

        #[test]
        fn feasible_points_reconstruct(g in 1.7f64..8.0, d in -3.0f64..3.0) {
            let p = unilateral_locus(&matched(g), d).unwrap();
            if p.feasible {
                let rebuilt = Complex64::from_polar(2.0, p.theta);
                prop_assert!((rebuilt - p.z).norm() / 2.0 <= DEFAULT_FEASIBILITY_TOL + 1e-12);
            }
        }

        #[test]
        fn sensitivity_scale_free(g in 1.7f64..6.0, s in 0.01f64..100.0) {
            let sys = matched(g);
            let a = phase_sensitivity(&sys, -0.01, 0.01).unwrap().slope;
            let b = phase_sensitivity(&sys.scaled(s), -0.01 * s, 0.01 * s).unwrap().slope / s;
            prop_assert!((a - b).abs() < 1e-8 * a.abs());
        }
    }
}
