//! C ABI over the `inverse-omit` model.
//!
//! Every entry point returns an [`OmitStatus`] and writes results through
//! out-pointers. Systems and channel sets are opaque heap handles owned by
//! the caller and released with the matching `*_free` function. Panics never
//! cross the boundary; they surface as `OMIT_STATUS_PANIC`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use inverse_omit::channels::{self, ChannelSet};
use inverse_omit::phase;
use inverse_omit::response;
use inverse_omit::{Convention, OmitError, SystemParams};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Convergence = 3,
    SingularResponse = 4,
    NoRealCoupling = 5,
    DegenerateModes = 6,
    InvalidWindow = 7,
    NoFeasibleRatio = 8,
    InvalidStep = 9,
    Divergence = 10,
    IndexOutOfRange = 11,
    Panic = 12,
}

impl From<&OmitError> for OmitStatus {
    fn from(e: &OmitError) -> Self {
        match e {
            OmitError::InvalidParameter { .. } => Self::InvalidParameter,
            OmitError::Convergence { .. } => Self::Convergence,
            OmitError::SingularResponse { .. } => Self::SingularResponse,
            OmitError::NoRealCoupling { .. } => Self::NoRealCoupling,
            OmitError::DegenerateModes => Self::DegenerateModes,
            OmitError::InvalidWindow(_) => Self::InvalidWindow,
            OmitError::NoFeasibleRatio { .. } => Self::NoFeasibleRatio,
            OmitError::InvalidStep { .. } => Self::InvalidStep,
            OmitError::Divergence { .. } => Self::Divergence,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmitConvention {
    /// `delta = omega1 + D`.
    Eq8 = 0,
    /// `delta = omega1 - D`.
    Eq11 = 1,
}

/// Linearized model parameters, mirrored field by field.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OmitParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub kappa: f64,
    pub delta_cav: f64,
    pub g_eff: f64,
    pub g_eff_phase: f64,
    pub lambda_c: f64,
    pub eps_left: f64,
    pub eps_right: f64,
    pub theta_rel: f64,
    pub convention: OmitConvention,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OmitComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OmitProbeResponse {
    pub detuning: f64,
    pub delta: f64,
    pub dc_plus: OmitComplex,
    pub db1_plus: OmitComplex,
    pub db2_plus: OmitComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OmitOutputFields {
    pub out_left: OmitComplex,
    pub out_right: OmitComplex,
    pub power_left: f64,
    pub power_right: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OmitEnergy {
    pub norm_photon: f64,
    pub norm_phonon1: f64,
    pub norm_phonon2: f64,
    pub phonon_sum: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OmitLocusPoint {
    pub detuning: f64,
    pub theta: f64,
    pub modulus_residual: f64,
    pub feasible: bool,
    pub z: OmitComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OmitChannel {
    pub detuning: f64,
    pub residual_power: f64,
    pub exact: bool,
}

/// Opaque validated system.
pub struct OmitSystem {
    inner: SystemParams,
}

/// Opaque list of channels, sorted by detuning.
pub struct OmitChannelSet {
    inner: ChannelSet,
}

impl From<Complex64> for OmitComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<&OmitParams> for SystemParams {
    fn from(p: &OmitParams) -> Self {
        SystemParams {
            omega1: p.omega1,
            omega2: p.omega2,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            kappa: p.kappa,
            delta_cav: p.delta_cav,
            g_eff: p.g_eff,
            g_eff_phase: p.g_eff_phase,
            lambda_c: p.lambda_c,
            eps_left: p.eps_left,
            eps_right: p.eps_right,
            theta_rel: p.theta_rel,
            convention: match p.convention {
                OmitConvention::Eq8 => Convention::Eq8,
                OmitConvention::Eq11 => Convention::Eq11,
            },
        }
        .with_theta(p.theta_rel)
    }
}

fn guard(f: impl FnOnce() -> Result<(), OmitStatus>) -> OmitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OmitStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => OmitStatus::Panic,
    }
}

fn status(e: OmitError) -> OmitStatus {
    OmitStatus::from(&e)
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, OmitStatus> {
    p.as_mut().ok_or(OmitStatus::NullPointer)
}

unsafe fn system_ref<'a>(sys: *const OmitSystem) -> Result<&'a SystemParams, OmitStatus> {
    sys.as_ref().map(|s| &s.inner).ok_or(OmitStatus::NullPointer)
}

/// Static description of a status code. Never null; do not free.
#[no_mangle]
pub extern "C" fn omit_status_message(status: OmitStatus) -> *const c_char {
    let s: &'static CStr = match status {
        OmitStatus::Ok => c"ok",
        OmitStatus::NullPointer => c"null pointer argument",
        OmitStatus::InvalidParameter => c"invalid parameter",
        OmitStatus::Convergence => c"fixed point did not converge",
        OmitStatus::SingularResponse => c"singular response",
        OmitStatus::NoRealCoupling => c"no real Coulomb coupling below sqrt(2) kappa",
        OmitStatus::DegenerateModes => c"bright/dark decomposition undefined",
        OmitStatus::InvalidWindow => c"invalid window",
        OmitStatus::NoFeasibleRatio => c"no feasible frequency ratio",
        OmitStatus::InvalidStep => c"invalid integration step",
        OmitStatus::Divergence => c"integration diverged",
        OmitStatus::IndexOutOfRange => c"index out of range",
        OmitStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Library version string. Never null; do not free.
#[no_mangle]
pub extern "C" fn omit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validate `params` and allocate a system handle into `*out`.
///
/// # Safety
/// `params` must point to a readable `OmitParams`, `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn omit_system_new(params: *const OmitParams, out: *mut *mut OmitSystem) -> OmitStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let p = params.as_ref().ok_or(OmitStatus::NullPointer)?;
        let inner = SystemParams::from(p);
        inner.validate().map_err(status)?;
        *out = Box::into_raw(Box::new(OmitSystem { inner }));
        Ok(())
    })
}

/// Identical resonators at `omega_m` with `gamma = 2 kappa`, `Delta = omega_m`
/// and unit in-phase probes.
///
/// # Safety
/// `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn omit_system_identical(
    omega_m: f64,
    kappa: f64,
    g_eff: f64,
    lambda_c: f64,
    out: *mut *mut OmitSystem,
) -> OmitStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let inner = SystemParams::identical(omega_m, kappa, g_eff, lambda_c);
        inner.validate().map_err(status)?;
        *out = Box::into_raw(Box::new(OmitSystem { inner }));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from `omit_system_new`/`omit_system_identical`
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn omit_system_free(sys: *mut OmitSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Copy the parameters back out, with `theta_rel` reduced to (-pi, pi].
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn omit_system_params(sys: *const OmitSystem, out: *mut OmitParams) -> OmitStatus {
    guard(|| {
        let s = system_ref(sys)?;
        *out_ref(out)? = OmitParams {
            omega1: s.omega1,
            omega2: s.omega2,
            gamma1: s.gamma1,
            gamma2: s.gamma2,
            kappa: s.kappa,
            delta_cav: s.delta_cav,
            g_eff: s.g_eff,
            g_eff_phase: s.g_eff_phase,
            lambda_c: s.lambda_c,
            eps_left: s.eps_left,
            eps_right: s.eps_right,
            theta_rel: s.theta_rel,
            convention: match s.convention {
                Convention::Eq8 => OmitConvention::Eq8,
                Convention::Eq11 => OmitConvention::Eq11,
            },
        };
        Ok(())
    })
}

/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn omit_probe_response(
    sys: *const OmitSystem,
    detuning: f64,
    out: *mut OmitProbeResponse,
) -> OmitStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let out = out_ref(out)?;
        let r = response::probe_response(s, detuning).map_err(status)?;
        *out = OmitProbeResponse {
            detuning: r.detuning,
            delta: r.delta,
            dc_plus: r.dc_plus.into(),
            db1_plus: r.db1_plus.into(),
            db2_plus: r.db2_plus.into(),
        };
        Ok(())
    })
}

/// Output fields with powers normalized to `eps_left^2`.
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn omit_output_fields(
    sys: *const OmitSystem,
    detuning: f64,
    out: *mut OmitOutputFields,
) -> OmitStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let out = out_ref(out)?;
        let o = response::output_fields(s, detuning).map_err(status)?;
        *out = OmitOutputFields {
            out_left: o.out_left.into(),
            out_right: o.out_right.into(),
            power_left: o.power_left,
            power_right: o.power_right,
        };
        Ok(())
    })
}

/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn omit_energy_distribution(
    sys: *const OmitSystem,
    detuning: f64,
    out: *mut OmitEnergy,
) -> OmitStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let out = out_ref(out)?;
        let e = response::energy_distribution(s, detuning).map_err(status)?;
        *out = OmitEnergy {
            norm_photon: e.norm_photon,
            norm_phonon1: e.norm_phonon1,
            norm_phonon2: e.norm_phonon2,
            phonon_sum: e.phonon_sum,
        };
        Ok(())
    })
}

/// Point on the unilateral-absorption locus with the default modulus tolerance.
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn omit_unilateral_locus(
    sys: *const OmitSystem,
    detuning: f64,
    out: *mut OmitLocusPoint,
) -> OmitStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let out = out_ref(out)?;
        let p = phase::unilateral_locus(s, detuning).map_err(status)?;
        *out = OmitLocusPoint {
            detuning: p.detuning,
            theta: p.theta,
            modulus_residual: p.modulus_residual,
            feasible: p.feasible,
            z: p.z.into(),
        };
        Ok(())
    })
}

/// Mean `dD/dtheta` over `[d_lo, d_hi]`. `*feasible` may be null.
///
/// # Safety
/// `sys` must be a live handle, `slope` writable, `feasible` null or writable.
#[no_mangle]
pub unsafe extern "C" fn omit_phase_sensitivity(
    sys: *const OmitSystem,
    d_lo: f64,
    d_hi: f64,
    slope: *mut f64,
    feasible: *mut bool,
) -> OmitStatus {
    guard(|| {
        let s = system_ref(sys)?;
        let slope = out_ref(slope)?;
        let r = phase::phase_sensitivity(s, d_lo, d_hi).map_err(status)?;
        *slope = r.slope;
        if let Some(f) = feasible.as_mut() {
            *f = r.feasible;
        }
        Ok(())
    })
}

/// `lambda = sqrt(|G|^2/2 - kappa^2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omit_matching_coulomb_coupling(g_mag: f64, kappa: f64, out: *mut f64) -> OmitStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = channels::matching_coulomb_coupling(g_mag, kappa).map_err(status)?;
        Ok(())
    })
}

/// Closed-form channels of the matched identical system.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn omit_analytic_channels(g_mag: f64, kappa: f64, out: *mut *mut OmitChannelSet) -> OmitStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        if !(g_mag.is_finite() && kappa.is_finite() && kappa > 0.0 && g_mag >= 0.0) {
            return Err(OmitStatus::InvalidParameter);
        }
        let inner = channels::analytic_channels(g_mag, kappa);
        *out = Box::into_raw(Box::new(OmitChannelSet { inner }));
        Ok(())
    })
}

/// Numeric channel search over `[d_min, d_max]` on `grid_points >= 100`
/// samples; a channel is exact when its residual power is below `tol`.
///
/// # Safety
/// `sys` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn omit_find_channels(
    sys: *const OmitSystem,
    d_min: f64,
    d_max: f64,
    grid_points: usize,
    tol: f64,
    out: *mut *mut OmitChannelSet,
) -> OmitStatus {
    guard(|| {
        let out = out_ref(out)?;
        *out = ptr::null_mut();
        let s = system_ref(sys)?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(OmitStatus::InvalidParameter);
        }
        let inner = channels::find_channels_numeric(s, d_min, d_max, grid_points, tol).map_err(status)?;
        *out = Box::into_raw(Box::new(OmitChannelSet { inner }));
        Ok(())
    })
}

/// Number of channels, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn omit_channel_set_len(set: *const OmitChannelSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.channels.len())
}

/// Number of channels flagged exact, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn omit_channel_set_exact_count(set: *const OmitChannelSet) -> usize {
    set.as_ref().map_or(0, |s| s.inner.exact().count())
}

/// # Safety
/// `set` must be a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn omit_channel_set_get(
    set: *const OmitChannelSet,
    index: usize,
    out: *mut OmitChannel,
) -> OmitStatus {
    guard(|| {
        let set = set.as_ref().ok_or(OmitStatus::NullPointer)?;
        let out = out_ref(out)?;
        let c = set.inner.channels.get(index).ok_or(OmitStatus::IndexOutOfRange)?;
        *out = OmitChannel {
            detuning: c.detuning,
            residual_power: c.residual_power,
            exact: c.exact,
        };
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn omit_channel_set_free(set: *mut OmitChannelSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_status_has_a_message() {
        use OmitStatus::*;
        let all = [
            Ok, NullPointer, InvalidParameter, Convergence, SingularResponse, NoRealCoupling, DegenerateModes,
            InvalidWindow, NoFeasibleRatio, InvalidStep, Divergence, IndexOutOfRange, Panic,
        ];
        for s in all {
            let msg = unsafe { CStr::from_ptr(omit_status_message(s)) };
            assert!(!msg.to_bytes().is_empty());
        }
    }

    #[test]
    fn error_mapping_is_distinct() {
        let errs = [
            OmitError::DegenerateModes,
            OmitError::InvalidWindow(String::new()),
            OmitError::SingularResponse { delta: 0.0 },
            OmitError::Divergence { time: 0.0 },
        ];
        let codes: Vec<_> = errs.iter().map(OmitStatus::from).collect();
        assert_eq!(
            codes,
            [
                OmitStatus::DegenerateModes,
                OmitStatus::InvalidWindow,
                OmitStatus::SingularResponse,
                OmitStatus::Divergence
            ]
        );
    }
}
