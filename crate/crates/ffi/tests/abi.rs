use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use inverse_omit::response::output_fields;
use inverse_omit::SystemParams;
use inverse_omit_ffi::*;

fn identical(g: f64, lambda: f64) -> *mut OmitSystem {
    let mut sys = ptr::null_mut();
    let s = unsafe { omit_system_identical(10.0, 1.0, g, lambda, &mut sys) };
    assert_eq!(s, OmitStatus::Ok);
    assert!(!sys.is_null());
    sys
}

#[test]
fn output_fields_match_the_library() {
    let lambda = 1.0;
    let sys = identical(2.0, lambda);
    let expect = SystemParams::identical(10.0, 1.0, 2.0, lambda);
    for d in [-3.0, -1.2, 0.0, 0.7, 2.5] {
        let mut o = OmitOutputFields::default();
        assert_eq!(unsafe { omit_output_fields(sys, d, &mut o) }, OmitStatus::Ok);
        let r = output_fields(&expect, d).unwrap();
        assert_eq!(o.power_left, r.power_left);
        assert_eq!(o.power_right, r.power_right);
        assert_eq!((o.out_left.re, o.out_left.im), (r.out_left.re, r.out_left.im));
    }
    unsafe { omit_system_free(sys) };
}

#[test]
fn params_round_trip_and_phase_reduction() {
    let p = OmitParams {
        omega1: 12.0,
        omega2: 10.0,
        gamma1: 2.0,
        gamma2: 2.0,
        kappa: 1.0,
        delta_cav: 12.0,
        g_eff: 2.0,
        g_eff_phase: 0.0,
        lambda_c: 1.0,
        eps_left: 1.0,
        eps_right: 1.0,
        theta_rel: 3.0 * std::f64::consts::PI,
        convention: OmitConvention::Eq11,
    };
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { omit_system_new(&p, &mut sys) }, OmitStatus::Ok);
    let mut back = p;
    back.theta_rel = 0.0;
    assert_eq!(unsafe { omit_system_params(sys, &mut back) }, OmitStatus::Ok);
    assert!((back.theta_rel - std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(back.convention, OmitConvention::Eq11);
    assert_eq!(back.omega1, 12.0);
    unsafe { omit_system_free(sys) };
}

#[test]
fn invalid_parameters_leave_null_handle() {
    let mut sys = ptr::dangling_mut::<OmitSystem>();
    let s = unsafe { omit_system_identical(10.0, 0.0, 2.0, 1.0, &mut sys) };
    assert_eq!(s, OmitStatus::InvalidParameter);
    assert!(sys.is_null());

    let mut lambda = 0.0;
    let s = unsafe { omit_matching_coulomb_coupling(1.0, 1.0, &mut lambda) };
    assert_eq!(s, OmitStatus::NoRealCoupling);
}

#[test]
fn null_pointers_are_reported() {
    let mut o = OmitOutputFields::default();
    assert_eq!(unsafe { omit_output_fields(ptr::null(), 0.0, &mut o) }, OmitStatus::NullPointer);
    let sys = identical(2.0, 1.0);
    assert_eq!(unsafe { omit_output_fields(sys, 0.0, ptr::null_mut()) }, OmitStatus::NullPointer);
    assert_eq!(unsafe { omit_system_new(ptr::null(), ptr::null_mut()) }, OmitStatus::NullPointer);
    assert_eq!(unsafe { omit_channel_set_len(ptr::null()) }, 0);
    unsafe {
        omit_system_free(sys);
        omit_system_free(ptr::null_mut());
        omit_channel_set_free(ptr::null_mut());
    }
}

#[test]
fn analytic_and_numeric_channels_agree() {
    let sys = identical(2.0, 1.0);
    let (mut analytic, mut numeric) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(omit_analytic_channels(2.0, 1.0, &mut analytic), OmitStatus::Ok);
        assert_eq!(omit_find_channels(sys, -6.0, 6.0, 4001, 1e-8, &mut numeric), OmitStatus::Ok);
        assert_eq!(omit_channel_set_len(analytic), 3);
        assert_eq!(omit_channel_set_exact_count(numeric), 3);
        for k in 0..3 {
            let (mut a, mut n) = (OmitChannel::default(), OmitChannel::default());
            assert_eq!(omit_channel_set_get(analytic, k, &mut a), OmitStatus::Ok);
            assert_eq!(omit_channel_set_get(numeric, k, &mut n), OmitStatus::Ok);
            assert!(a.exact);
            assert!((a.detuning - n.detuning).abs() < 1e-3, "{a:?} {n:?}");
        }
        let mut c = OmitChannel::default();
        assert_eq!(omit_channel_set_get(analytic, 3, &mut c), OmitStatus::IndexOutOfRange);
        assert_eq!(omit_find_channels(sys, 1.0, -1.0, 4001, 1e-8, &mut numeric), OmitStatus::InvalidWindow);
        assert!(numeric.is_null());
        omit_channel_set_free(analytic);
        omit_system_free(sys);
    }
}

#[test]
fn locus_and_sensitivity() {
    let sys = identical(2.0, 1.0);
    let mut p = OmitLocusPoint::default();
    assert_eq!(unsafe { omit_unilateral_locus(sys, 0.0, &mut p) }, OmitStatus::Ok);
    assert!(p.feasible);
    let mut slope = 0.0;
    let s = unsafe { omit_phase_sensitivity(sys, -0.01, 0.01, &mut slope, ptr::null_mut()) };
    assert_eq!(s, OmitStatus::Ok);
    assert!((slope + 2.0).abs() < 1e-3, "slope {slope}");
    unsafe { omit_system_free(sys) };
}

#[test]
fn energy_and_probe_response() {
    let sys = identical(2.0, 1.0);
    let mut e = OmitEnergy::default();
    let mut r = OmitProbeResponse::default();
    unsafe {
        assert_eq!(omit_energy_distribution(sys, 0.0, &mut e), OmitStatus::Ok);
        assert_eq!(omit_probe_response(sys, 0.0, &mut r), OmitStatus::Ok);
        omit_system_free(sys);
    }
    assert!((e.norm_photon - 0.5).abs() < 1e-12);
    assert!((e.phonon_sum - e.norm_phonon1 - e.norm_phonon2).abs() < 1e-12);
    assert_eq!(r.delta, 10.0);
}

#[test]
fn status_messages_and_version() {
    let msg = unsafe { CStr::from_ptr(omit_status_message(OmitStatus::NoRealCoupling)) };
    assert!(msg.to_str().unwrap().contains("Coulomb"));
    let v = unsafe { CStr::from_ptr(omit_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(manifest_dir().join("include/inverse_omit.h")).unwrap();
    let source = std::fs::read_to_string(manifest_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["typedef struct OmitSystem OmitSystem;", "typedef struct OmitChannelSet OmitChannelSet;"] {
        assert!(header.contains(ty), "{ty}");
    }
}

/// Directory holding the static library: the parent of `deps/`.
fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libinverse_omit_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let exe = std::env::temp_dir().join(format!("inverse_omit_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[..3], ["-1.41421356237 1", "0.00000000000 1", "1.41421356237 1"]);
    assert!(lines[3].starts_with("version "));
}
