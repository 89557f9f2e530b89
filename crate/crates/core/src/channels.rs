//! Absorption channels: detunings where both output fields vanish.

use num_complex::Complex64;

use crate::error::{OmitError, Result};
use crate::model::SystemParams;
use crate::numerics::{bisect, golden_section, local_minima};
use crate::response::{energy_distribution, linspace, output_fields, EnergyDistribution};

/// Exactness threshold on the normalized residual output power.
pub const DEFAULT_EXACT_TOL: f64 = 1e-8;
pub const DEFAULT_GRID: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    None,
    Single,
    Three,
    /// Any other number of exact channels (numeric search only).
    Other(usize),
}

impl Regime {
    fn from_count(n: usize) -> Self {
        match n {
            0 => Self::None,
            1 => Self::Single,
            3 => Self::Three,
            n => Self::Other(n),
        }
    }

    pub fn name(self) -> String {
        match self {
            Self::None => "none".into(),
            Self::Single => "single-channel".into(),
            Self::Three => "three-channel".into(),
            Self::Other(n) => format!("{n}-channel"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub detuning: f64,
    /// `power_left + power_right` at the channel.
    pub residual_power: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Sorted ascending in detuning.
    pub channels: Vec<Channel>,
    /// Equal probes, `gamma1 = gamma2 = 2 kappa` and `lambda^2 = |G|^2/2 - kappa^2`.
    pub condition_met: bool,
    pub regime: Regime,
}

impl ChannelSet {
    pub fn detunings(&self) -> Vec<f64> {
        self.channels.iter().map(|c| c.detuning).collect()
    }

    pub fn exact(&self) -> impl Iterator<Item = &Channel> {
        self.channels.iter().filter(|c| c.exact)
    }
}

/// `lambda = sqrt(|G|^2/2 - kappa^2)`, the Coulomb coupling that opens the channels.
pub fn matching_coulomb_coupling(g_mag: f64, kappa: f64) -> Result<f64> {
    let threshold = 2f64.sqrt() * kappa;
    let sq = g_mag * g_mag / 2.0 - kappa * kappa;
    if g_mag < threshold || sq < 0.0 {
        return Err(OmitError::NoRealCoupling { g_mag, threshold });
    }
    Ok(sq.sqrt())
}

/// Whether `sys` satisfies the matching condition to relative tolerance `tol`.
pub fn matching_condition_holds(sys: &SystemParams, tol: f64) -> bool {
    let k = sys.kappa;
    let close = |a: f64, b: f64, scale: f64| (a - b).abs() <= tol * scale;
    close(sys.eps_left, sys.eps_right, sys.eps_left.max(sys.eps_right).max(f64::MIN_POSITIVE))
        && close(sys.gamma1, 2.0 * k, k)
        && close(sys.gamma2, 2.0 * k, k)
        && close(sys.lambda_c.powi(2), sys.g_eff.powi(2) / 2.0 - k * k, k * k)
}

/// Identical resonators at the matching coupling, used to evaluate closed-form channels.
fn matched_identical(g_mag: f64, kappa: f64, lambda: f64) -> SystemParams {
    SystemParams::identical(10.0 * kappa, kappa, g_mag, lambda)
}

fn channel_at(sys: &SystemParams, d: f64, tol: f64) -> Channel {
    let residual_power = output_fields(sys, d)
        .map(|o| o.power_left + o.power_right)
        .unwrap_or(f64::INFINITY);
    Channel {
        detuning: d,
        residual_power,
        exact: residual_power < tol,
    }
}

/// Closed-form channels for identical resonators at the matching coupling:
/// `D0 = 0` and `D_+- = +-sqrt(3/2 |G|^2 - 4 kappa^2)`.
pub fn analytic_channels(g_mag: f64, kappa: f64) -> ChannelSet {
    let Ok(lambda) = matching_coulomb_coupling(g_mag, kappa) else {
        return ChannelSet {
            channels: Vec::new(),
            condition_met: false,
            regime: Regime::None,
        };
    };
    let sys = matched_identical(g_mag, kappa, lambda);
    let radicand = 1.5 * g_mag * g_mag - 4.0 * kappa * kappa;
    let detunings = if radicand > 1e-12 * kappa * kappa {
        let side = radicand.sqrt();
        vec![-side, 0.0, side]
    } else {
        vec![0.0]
    };
    let regime = Regime::from_count(detunings.len());
    ChannelSet {
        channels: detunings
            .into_iter()
            .map(|d| channel_at(&sys, d, DEFAULT_EXACT_TOL))
            .collect(),
        condition_met: true,
        regime,
    }
}

/// `|(x - 3 kappa)(x^2 + lambda^2) + |G|^2 x| / kappa^3` with `x = kappa - i D`;
/// vanishes at the three channels of the matched identical system.
pub fn cubic_residual(d: f64, g_mag: f64, lambda: f64, kappa: f64) -> f64 {
    let x = Complex64::new(kappa, -d);
    let p = (x - 3.0 * kappa) * (x * x + lambda * lambda) + g_mag * g_mag * x;
    p.norm() / kappa.powi(3)
}

/// Local minima of `P(D) = power_left + power_right` on a uniform grid,
/// each refined by golden section to a bracket of `1e-10 kappa`.
pub fn find_channels_numeric(
    sys: &SystemParams,
    d_min: f64,
    d_max: f64,
    grid_points: usize,
    tol: f64,
) -> Result<ChannelSet> {
    sys.validate()?;
    if !(d_min.is_finite() && d_max.is_finite() && d_min < d_max) {
        return Err(OmitError::InvalidWindow(format!("need D_min < D_max, got [{d_min}, {d_max}]")));
    }
    if grid_points < 100 {
        return Err(OmitError::InvalidWindow(format!("grid needs >= 100 points, got {grid_points}")));
    }
    let total = |d: f64| {
        output_fields(sys, d)
            .map(|o| o.power_left + o.power_right)
            .unwrap_or(f64::INFINITY)
    };
    let grid = linspace(d_min, d_max, grid_points);
    let values: Vec<f64> = grid.iter().map(|&d| total(d)).collect();
    let width = 1e-10 * sys.kappa;
    let mut channels: Vec<Channel> = local_minima(&values)
        .into_iter()
        .map(|k| {
            let (d, p) = golden_section(total, grid[k - 1], grid[k + 1], width);
            Channel {
                detuning: d,
                residual_power: p,
                exact: p < tol,
            }
        })
        .collect();
    channels.sort_by(|a, b| a.detuning.total_cmp(&b.detuning));
    let regime = Regime::from_count(channels.iter().filter(|c| c.exact).count());
    Ok(ChannelSet {
        channels,
        condition_met: sys.is_identical() && matching_condition_holds(sys, 1e-9),
        regime,
    })
}

/// Numeric search over the default range `[-3|G|, 3|G|]` (at least `+-3 kappa`).
pub fn find_channels_default(sys: &SystemParams) -> Result<ChannelSet> {
    let span = 3.0 * sys.g_eff.max(sys.kappa);
    find_channels_numeric(sys, -span, span, DEFAULT_GRID, DEFAULT_EXACT_TOL)
}

/// The unilateral detunings of a single resonator evaluated exactly as printed,
/// `D = +-sqrt((8G^2 + (16k^2 - g^2) + sqrt(16G^2(16k^2 - g^2) + (16k^2 + g^2))) / 8)`.
/// The inner `(16k^2 + g^2)` is not squared, so the expression is not
/// homogeneous in the rates; see [`single_nr_channels_corrected`].
/// Empty when a radicand is negative.
pub fn single_nr_channels_closed_form(g_mag: f64, kappa: f64, gamma1: f64) -> Vec<f64> {
    let g2 = g_mag * g_mag;
    let a = 16.0 * kappa * kappa - gamma1 * gamma1;
    let b = 16.0 * kappa * kappa + gamma1 * gamma1;
    let inner = 16.0 * g2 * a + b;
    if inner < 0.0 {
        return Vec::new();
    }
    let outer = (8.0 * g2 + a + inner.sqrt()) / 8.0;
    if outer < 0.0 {
        return Vec::new();
    }
    let d = outer.sqrt();
    vec![-d, d]
}

/// Exact roots of `|G^2/(g/2 - iD) - iD| = 2 kappa`:
/// `D^2 = (8G^2 + 16k^2 - g^2 +- sqrt(16G^2(16k^2 - g^2) + (16k^2 + g^2)^2)) / 8`.
/// Sorted ascending; a zero double root is reported once.
pub fn single_nr_channels_corrected(g_mag: f64, kappa: f64, gamma1: f64) -> Vec<f64> {
    let g2 = g_mag * g_mag;
    let a = 16.0 * kappa * kappa - gamma1 * gamma1;
    let b = 16.0 * kappa * kappa + gamma1 * gamma1;
    let disc = 16.0 * g2 * a + b * b;
    if disc < 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for sign in [1.0, -1.0] {
        let u = (8.0 * g2 + a + sign * disc.sqrt()) / 8.0;
        if u > 0.0 {
            let d = u.sqrt();
            out.extend([-d, d]);
        } else if u.abs() <= 1e-14 * (8.0 * g2 + b) {
            out.push(0.0);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// A root of `|z(D)| = 2 kappa` with the phase `theta = arg z(D)` it requires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnilateralRoot {
    pub detuning: f64,
    pub theta: f64,
}

/// `z(D) = |G|^2 / (gamma1/2 - iD) - iD` for a single resonator with `Delta = omega1`.
pub fn single_nr_locus(g_mag: f64, gamma1: f64, d: f64) -> Complex64 {
    g_mag * g_mag / Complex64::new(gamma1 / 2.0, -d) - Complex64::new(0.0, d)
}

/// Roots of `|z(D)|^2 - 4 kappa^2` for a single resonator, bracketed on a grid
/// over `|D| <= kappa + sqrt(kappa^2 + |G|^2)` (outside that band `|z| > 2 kappa`)
/// and bisected to `1e-12 kappa`. Tangential roots are picked up from grid
/// minima of the modulus defect.
pub fn single_nr_channels_numeric(g_mag: f64, kappa: f64, gamma1: f64) -> Result<Vec<UnilateralRoot>> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(crate::error::invalid("kappa", "must be finite and > 0"));
    }
    if !(g_mag >= 0.0 && gamma1 >= 0.0 && g_mag.is_finite() && gamma1.is_finite()) {
        return Err(crate::error::invalid("g_eff", "|G| and gamma1 must be finite and >= 0"));
    }
    let defect = |d: f64| {
        let z = single_nr_locus(g_mag, gamma1, d);
        (z.norm_sqr() - 4.0 * kappa * kappa) / (kappa * kappa)
    };
    let bound = 1.01 * (kappa + (kappa * kappa + g_mag * g_mag).sqrt());
    let roots = bracket_roots(defect, -bound, bound, 8001, 1e-12 * kappa);
    Ok(roots
        .into_iter()
        .map(|d| UnilateralRoot {
            detuning: d,
            theta: single_nr_locus(g_mag, gamma1, d).arg(),
        })
        .collect())
}

/// Sign-change bracketing plus bisection, with grid minima of `|f|` that touch
/// zero accepted as tangential roots. Sorted ascending.
pub(crate) fn bracket_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize, tol: f64) -> Vec<f64> {
    let grid = linspace(lo, hi, n);
    let values: Vec<f64> = grid.iter().map(|&d| f(d)).collect();
    let mut roots = Vec::new();
    for k in 0..n - 1 {
        let (a, b) = (values[k], values[k + 1]);
        if a == 0.0 {
            roots.push(grid[k]);
        } else if a.is_finite() && b.is_finite() && b != 0.0 && a.signum() != b.signum() {
            if let Some(r) = bisect(&f, grid[k], grid[k + 1], tol) {
                roots.push(r);
            }
        }
    }
    if values[n - 1] == 0.0 {
        roots.push(grid[n - 1]);
    }
    let magnitude: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let step = grid[1] - grid[0];
    for k in local_minima(&magnitude) {
        if roots.iter().any(|r| (r - grid[k]).abs() <= 1.5 * step) {
            continue;
        }
        let (x, fx) = golden_section(|d| f(d).abs(), grid[k - 1], grid[k + 1], tol);
        if fx < 1e-12 {
            roots.push(x);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// One channel-table row: a channel of the system at a given `|G|` and `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    /// 1 for the middle channel, 2 for the side channels.
    pub part: u8,
    pub detuning: f64,
    pub g_mag: f64,
    pub lambda: f64,
    pub power_right: f64,
    pub power_left: f64,
    pub energy: EnergyDistribution,
}

pub const TABLE_COUPLINGS: [f64; 3] = [2.0, 4.0, 6.0];

/// Middle and side channels of `base` for `|G| / kappa` in {2, 4, 6}, each with
/// the matching `lambda`. Closed forms are used when the matching condition
/// holds for identical resonators, the numeric finder otherwise; the minimum
/// nearest `D = 0` is the middle channel. Side rows list `+` before `-`.
pub fn table_one(base: &SystemParams) -> Result<Vec<TableRow>> {
    let k = base.kappa;
    let mut middle = Vec::new();
    let mut sides = Vec::new();
    for g_rel in TABLE_COUPLINGS {
        let g_mag = g_rel * k;
        let lambda = matching_coulomb_coupling(g_mag, k)?;
        let sys = SystemParams { g_eff: g_mag, lambda_c: lambda, ..*base };
        let mut found = if sys.is_identical() && matching_condition_holds(&sys, 1e-9) {
            analytic_channels(g_mag, k).detunings()
        } else {
            find_channels_default(&sys)?.detunings()
        };
        if found.is_empty() {
            continue;
        }
        let mid = (0..found.len())
            .min_by(|&a, &b| found[a].abs().total_cmp(&found[b].abs()))
            .unwrap_or(0);
        let d0 = found.remove(mid);
        found.sort_by(|a, b| b.total_cmp(a));
        let row = |part: u8, d: f64| -> Result<TableRow> {
            let out = output_fields(&sys, d)?;
            Ok(TableRow {
                part,
                detuning: d,
                g_mag,
                lambda,
                power_right: out.power_right,
                power_left: out.power_left,
                energy: energy_distribution(&sys, d)?,
            })
        };
        middle.push(row(1, d0)?);
        for d in found {
            sides.push(row(2, d)?);
        }
    }
    middle.extend(sides);
    Ok(middle)
}
