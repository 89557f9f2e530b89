//! Time-domain check of the sideband solution.
//!
//! The mean-value fluctuation equations, counter-rotating terms included,
//! are stepped with classical RK4 from rest under the probe tone
//! `(eps_L + eps_R e^{i theta}) e^{-i delta t}`. The settled signal is
//! demodulated at `e^{-+i delta t}` and compared with the frequency-domain
//! amplitudes and with an exact solve of the linear two-tone system.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;

use crate::cli::csv::fmt_num;
use crate::error::{OmitError, Result};
use crate::model::SystemParams;
use crate::response::{probe_response, ProbeResponse};

/// Minimum number of steps per period of the fastest frequency.
pub const MIN_STEPS_PER_PERIOD: f64 = 50.0;

/// Amplitudes of `(b1, b2, c)` in that order.
pub type Modes = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub b1: Vec<Complex64>,
    pub b2: Vec<Complex64>,
    pub c: Vec<Complex64>,
    pub dt: f64,
    /// Transient to discard before demodulating: `10 max(1/kappa, 1/gamma1, 1/gamma2)`.
    pub settle_time: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> Modes {
        [self.b1[k], self.b2[k], self.c[k]]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,b1_re,b1_im,b2_re,b2_im,c_re,c_im")?;
        for k in 0..self.len() {
            let [b1, b2, c] = self.state(k);
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_num(self.times[k]),
                fmt_num(b1.re),
                fmt_num(b1.im),
                fmt_num(b2.re),
                fmt_num(b2.im),
                fmt_num(c.re),
                fmt_num(c.im)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Drive switched off from this time on.
    pub drive_off: Option<f64>,
    /// Complex factor applied to the whole probe drive.
    pub drive_factor: Complex64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            drive_off: None,
            drive_factor: Complex64::new(1.0, 0.0),
        }
    }
}

/// Largest allowed step: one fiftieth of the period of
/// `max(omega1, omega2, |Delta|, |delta|)`.
pub fn max_step(sys: &SystemParams, d: f64) -> f64 {
    let fastest = sys
        .omega1
        .max(sys.omega2)
        .max(sys.delta_cav.abs())
        .max(sys.probe_delta(d).abs());
    2.0 * PI / fastest / MIN_STEPS_PER_PERIOD
}

pub fn settle_time(sys: &SystemParams) -> f64 {
    let mut slowest = 1.0 / sys.kappa;
    for g in [sys.gamma1, sys.gamma2] {
        if g > 0.0 {
            slowest = slowest.max(1.0 / g);
        }
    }
    10.0 * slowest
}

struct MeanValueEquations {
    omega1: f64,
    omega2: f64,
    gamma1: f64,
    gamma2: f64,
    kappa: f64,
    delta_cav: f64,
    coupling: Complex64,
    lambda: f64,
    drive: Complex64,
    delta: f64,
    drive_off: f64,
}

impl MeanValueEquations {
    fn rhs(&self, t: f64, [b1, b2, c]: Modes) -> Modes {
        let i = Complex64::i();
        let g = self.coupling;
        let x1 = b1 + b1.conj();
        let x2 = b2 + b2.conj();
        let probe = if t < self.drive_off {
            self.drive * Complex64::from_polar(1.0, -self.delta * t)
        } else {
            ZERO
        };
        [
            -i * (g.conj() * c + g * c.conj()) - Complex64::new(self.gamma1 / 2.0, self.omega1) * b1 - i * self.lambda * x2,
            -Complex64::new(self.gamma2 / 2.0, self.omega2) * b2 - i * self.lambda * x1,
            -Complex64::new(2.0 * self.kappa, self.delta_cav) * c - i * g * x1 + probe,
        ]
    }
}

fn axpy(y: &Modes, h: f64, k: &Modes) -> Modes {
    [y[0] + k[0] * h, y[1] + k[1] * h, y[2] + k[2] * h]
}

pub fn integrate_mean_langevin(sys: &SystemParams, d: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate_mean_langevin_with(sys, d, t_end, dt, &IntegrationOptions::default())
}

/// RK4 from zero initial data. Samples are taken at `k dt` for
/// `k = 0..=round(t_end / dt)`.
pub fn integrate_mean_langevin_with(
    sys: &SystemParams,
    d: f64,
    t_end: f64,
    dt: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    sys.validate()?;
    let limit = max_step(sys, d);
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(OmitError::InvalidStep { dt, max: limit });
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(crate::error::invalid("t_end", "must be finite and at least one step"));
    }
    let eqs = MeanValueEquations {
        omega1: sys.omega1,
        omega2: sys.omega2,
        gamma1: sys.gamma1,
        gamma2: sys.gamma2,
        kappa: sys.kappa,
        delta_cav: sys.delta_cav,
        coupling: sys.coupling(),
        lambda: sys.lambda_c,
        drive: sys.total_drive() * opts.drive_factor,
        delta: sys.probe_delta(d),
        drive_off: opts.drive_off.unwrap_or(f64::INFINITY),
    };
    let steps = (t_end / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut b1 = Vec::with_capacity(steps + 1);
    let mut b2 = Vec::with_capacity(steps + 1);
    let mut c = Vec::with_capacity(steps + 1);
    let mut y: Modes = [ZERO; 3];
    let half = 0.5 * dt;
    for k in 0..=steps {
        let t = k as f64 * dt;
        times.push(t);
        b1.push(y[0]);
        b2.push(y[1]);
        c.push(y[2]);
        if k == steps {
            break;
        }
        let k1 = eqs.rhs(t, y);
        let k2 = eqs.rhs(t + half, axpy(&y, half, &k1));
        let k3 = eqs.rhs(t + half, axpy(&y, half, &k2));
        let k4 = eqs.rhs(t + dt, axpy(&y, dt, &k3));
        for m in 0..3 {
            y[m] += (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]) * (dt / 6.0);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(OmitError::Divergence { time: t + dt });
        }
    }
    Ok(Trajectory {
        times,
        b1,
        b2,
        c,
        dt,
        settle_time: settle_time(sys),
    })
}

/// Sideband amplitudes `o_+` (at `e^{-i delta t}`) and `o_-` (at `e^{+i delta t}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sidebands {
    pub plus: Modes,
    pub minus: Modes,
}

/// Project the last `periods` whole periods of `2 pi / delta` onto
/// `e^{-+i delta t}` with trapezoidal weights. The window must start after
/// the settle time and span an integer number of steps.
pub fn demodulate(traj: &Trajectory, delta: f64, periods: usize) -> Result<Sidebands> {
    if traj.len() < 2 || delta == 0.0 || !delta.is_finite() {
        return Err(OmitError::InvalidWindow("need a trajectory and a nonzero delta".into()));
    }
    if periods == 0 {
        return Err(OmitError::InvalidWindow("window shorter than one period".into()));
    }
    let span = periods as f64 * 2.0 * PI / delta.abs();
    let steps = (span / traj.dt).round() as usize;
    if (steps as f64 * traj.dt - span).abs() > 1e-9 * span {
        return Err(OmitError::InvalidWindow(format!(
            "{periods} periods ({span:e}) is not a whole number of steps of {:e}",
            traj.dt
        )));
    }
    let last = traj.len() - 1;
    if steps > last {
        return Err(OmitError::InvalidWindow(format!(
            "trajectory covers {} steps, window needs {steps}",
            last
        )));
    }
    let first = last - steps;
    if traj.times[first] < traj.settle_time * (1.0 - 1e-12) {
        return Err(OmitError::InvalidWindow(format!(
            "window starts at t = {:e}, before the transient ends at {:e}",
            traj.times[first], traj.settle_time
        )));
    }
    let mut plus = [ZERO; 3];
    let mut minus = [ZERO; 3];
    for k in first..=last {
        let w = if k == first || k == last { 0.5 } else { 1.0 } / steps as f64;
        let rot = Complex64::from_polar(w, delta * traj.times[k]);
        let state = traj.state(k);
        for m in 0..3 {
            plus[m] += state[m] * rot;
            minus[m] += state[m] * rot.conj();
        }
    }
    Ok(Sidebands { plus, minus })
}

/// Exact steady sidebands of the linear mean-value equations under a single
/// probe tone: a 6x6 solve for `o_+` and `conj(o_-)` of all three modes.
pub fn exact_sideband_solution(sys: &SystemParams, d: f64) -> Result<Sidebands> {
    sys.validate()?;
    let i = Complex64::i();
    let delta = sys.probe_delta(d);
    let g = sys.coupling();
    let gc = g.conj();
    let lam = Complex64::new(sys.lambda_c, 0.0);
    let diag = |rate: f64, freq: f64| Complex64::new(rate, freq - delta);
    let mut m = Matrix6::<Complex64>::zeros();
    // unknowns: b1+, b2+, c+, conj(b1-), conj(b2-), conj(c-)
    m[(0, 0)] = diag(sys.gamma1 / 2.0, sys.omega1);
    m[(0, 2)] = i * gc;
    m[(0, 5)] = i * g;
    m[(0, 1)] = i * lam;
    m[(0, 4)] = i * lam;
    m[(1, 1)] = diag(sys.gamma2 / 2.0, sys.omega2);
    m[(1, 0)] = i * lam;
    m[(1, 3)] = i * lam;
    m[(2, 2)] = diag(2.0 * sys.kappa, sys.delta_cav);
    m[(2, 0)] = i * g;
    m[(2, 3)] = i * g;
    m[(3, 3)] = diag(sys.gamma1 / 2.0, -sys.omega1);
    m[(3, 5)] = -i * g;
    m[(3, 2)] = -i * gc;
    m[(3, 4)] = -i * lam;
    m[(3, 1)] = -i * lam;
    m[(4, 4)] = diag(sys.gamma2 / 2.0, -sys.omega2);
    m[(4, 3)] = -i * lam;
    m[(4, 0)] = -i * lam;
    m[(5, 5)] = diag(2.0 * sys.kappa, -sys.delta_cav);
    m[(5, 3)] = -i * gc;
    m[(5, 0)] = -i * gc;
    let mut rhs = Vector6::<Complex64>::zeros();
    rhs[2] = sys.total_drive();
    let x = m.lu().solve(&rhs).ok_or(OmitError::SingularResponse { delta })?;
    Ok(Sidebands {
        plus: [x[0], x[1], x[2]],
        minus: [x[3].conj(), x[4].conj(), x[5].conj()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Steps per period of the fastest frequency (at least 50).
    pub steps_per_period: usize,
    /// Whole probe periods retained for demodulation.
    pub periods: usize,
    /// Overrides the default settle time.
    pub settle_time: Option<f64>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            steps_per_period: 400,
            periods: 20,
            settle_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub detuning: f64,
    pub delta: f64,
    pub numeric: Sidebands,
    pub analytic: ProbeResponse,
    pub exact: Sidebands,
    /// `|o+ numeric - o+ analytic| / |o+ analytic|` for `(b1, b2, c)`.
    pub rel_err_analytic: [f64; 3],
    /// Same against the exact linear solve.
    pub rel_err_exact: [f64; 3],
    pub dt: f64,
    pub steps: usize,
}

impl OracleReport {
    /// `|c-| / |c+|` from the integration.
    pub fn cavity_minus_ratio(&self) -> f64 {
        self.numeric.minus[2].norm() / self.numeric.plus[2].norm()
    }
}

fn relative(a: Complex64, reference: Complex64) -> f64 {
    let diff = (a - reference).norm();
    if reference.norm() == 0.0 {
        diff
    } else {
        diff / reference.norm()
    }
}

pub fn oracle_compare(sys: &SystemParams, d: f64) -> Result<OracleReport> {
    oracle_compare_with(sys, d, &OracleSettings::default())
}

pub fn oracle_compare_with(sys: &SystemParams, d: f64, settings: &OracleSettings) -> Result<OracleReport> {
    oracle_run(sys, d, settings).map(|(report, _)| report)
}

/// Integrate, demodulate and compare. The step divides the probe period
/// exactly and the run covers a whole number of probe periods.
pub fn oracle_run(sys: &SystemParams, d: f64, settings: &OracleSettings) -> Result<(OracleReport, Trajectory)> {
    sys.validate()?;
    let delta = sys.probe_delta(d);
    if delta == 0.0 {
        return Err(OmitError::InvalidWindow("probe-pump detuning delta = 0 has no period".into()));
    }
    let period = 2.0 * PI / delta.abs();
    let target = max_step(sys, d) * MIN_STEPS_PER_PERIOD / settings.steps_per_period.max(50) as f64;
    let per_period = (period / target).ceil() as usize;
    let dt = period / per_period as f64;
    let settle = settings.settle_time.unwrap_or_else(|| settle_time(sys));
    let settle_periods = (settle / period).ceil() as usize;
    let total_periods = settle_periods + settings.periods;
    let steps = total_periods * per_period;
    let mut traj = integrate_mean_langevin(sys, d, steps as f64 * dt, dt)?;
    traj.settle_time = settle;
    let numeric = demodulate(&traj, delta, settings.periods)?;
    let analytic = probe_response(sys, d)?;
    let exact = exact_sideband_solution(sys, d)?;
    let reference = [analytic.db1_plus, analytic.db2_plus, analytic.dc_plus];
    let rel_err_analytic = std::array::from_fn(|m| relative(numeric.plus[m], reference[m]));
    let rel_err_exact = std::array::from_fn(|m| relative(numeric.plus[m], exact.plus[m]));
    let report = OracleReport {
        detuning: d,
        delta,
        numeric,
        analytic,
        exact,
        rel_err_analytic,
        rel_err_exact,
        dt,
        steps,
    };
    Ok((report, traj))
}
