//! Acceptance criteria 1-9. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use inverse_omit::channels::{
    analytic_channels, matching_coulomb_coupling, single_nr_channels_closed_form, single_nr_channels_corrected,
    single_nr_channels_numeric, table_one, TableRow,
};
use inverse_omit::cli::{parse_config, run_command, Command, Overrides};
use inverse_omit::numerics::linear_fit;
use inverse_omit::oracle::{integrate_mean_langevin, max_step, oracle_compare_with, OracleSettings};
use inverse_omit::phase::{
    first_reversal, locus_scan, locus_value, optimal_frequency_ratio, phase_sensitivity, unilateral_roots,
    DEFAULT_FEASIBILITY_TOL,
};
use inverse_omit::response::{energy_distribution, output_fields, probe_response};
use inverse_omit::{Convention, SystemParams};

const KAPPA_SI: f64 = 2.0 * PI * 215e3;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn matched(omega: f64, g: f64) -> SystemParams {
    SystemParams::identical(omega, 1.0, g, matching_coulomb_coupling(g, 1.0).unwrap())
}

fn criterion_1() -> Outcome {
    let expected = [
        (2.0, 2f64.sqrt()),
        (4.0, 2.0 * 5f64.sqrt()),
        (6.0, 5.0 * 2f64.sqrt()),
    ];
    let mut worst = 0.0f64;
    let mut ok = true;
    for (g, side) in expected {
        let d = analytic_channels(g, 1.0).detunings();
        if d.len() != 3 || d[1] != 0.0 {
            ok = false;
            continue;
        }
        worst = worst.max(rel(-d[0], side)).max(rel(d[2], side));
    }
    Outcome::new(ok && worst <= 1e-12, format!("max relative error {worst:.2e} (limit 1e-12)"))
}

fn criterion_2() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let lo = (8.0f64 / 3.0).sqrt();
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..50 {
        // (lo, 8]: draw from [0, 1) and reflect
        let g = 8.0 - rng.random_range(0.0..1.0) * (8.0 - lo);
        let sys = matched(10.0, g);
        for d in analytic_channels(g, 1.0).detunings() {
            let o = output_fields(&sys, d).unwrap();
            worst = worst.max(o.out_left.norm()).max(o.out_right.norm());
            count += 1;
        }
    }
    Outcome::new(
        worst < 1e-8,
        format!("{count} channels, max |out| = {worst:.2e} eps_L (limit 1e-8)"),
    )
}

fn criterion_3() -> Outcome {
    let rows = table_one(&SystemParams::identical(1.0, 1.0, 0.0, 0.0)).unwrap();
    let middle_phonon1 = [0.5, 0.125, 0.056];
    let mut worst = 0.0f64;
    for (k, row) in rows.iter().enumerate() {
        let e = row.energy;
        let phonon1 = if row.part == 1 { middle_phonon1[k] } else { 0.75 };
        worst = worst
            .max((e.norm_photon - 0.5).abs())
            .max((e.norm_phonon1 - phonon1).abs())
            .max((e.norm_phonon2 - (1.0 - phonon1)).abs())
            .max((e.phonon_sum - 1.0).abs());
    }
    Outcome::new(
        rows.len() == 9 && worst <= 1e-3,
        format!("{} rows, max deviation {worst:.2e} (limit 1e-3)", rows.len()),
    )
}

/// Printed non-identical rows: detuning, photon, phonon1, phonon2, sum.
const TABLE_NON_IDENTICAL: [[f64; 5]; 9] = [
    [0.198, 0.503, 0.4985, 0.4985, 0.997],
    [0.140, 0.501, 0.125, 0.874, 0.999],
    [0.136, 0.518, 0.006, 0.976, 0.982],
    [1.417, 0.502, 0.711, 0.287, 0.998],
    [-1.415, 0.500, 0.783, 0.217, 1.000],
    [4.629, 0.492, 0.742, 0.266, 1.008],
    [-4.358, 0.508, 0.757, 0.235, 0.992],
    [7.227, 0.494, 0.746, 0.261, 1.006],
    [-6.943, 0.506, 0.754, 0.240, 0.994],
];

fn criterion_4() -> Outcome {
    let base = SystemParams {
        omega1: 1.2,
        omega2: 1.0,
        delta_cav: 1.2,
        ..SystemParams::identical(1.2, 1.0, 0.0, 0.0)
    }
    .with_convention(Convention::Eq11);
    let rows: Vec<TableRow> = table_one(&base).unwrap();
    if rows.len() != TABLE_NON_IDENTICAL.len() {
        return Outcome::new(false, format!("expected 9 rows, found {}", rows.len()));
    }
    let mut pos_fail = Vec::new();
    let mut exc_fail = Vec::new();
    for (row, want) in rows.iter().zip(TABLE_NON_IDENTICAL) {
        let e = row.energy;
        let got = [row.detuning, e.norm_photon, e.norm_phonon1, e.norm_phonon2, e.phonon_sum];
        println!(
            "    |G| = {:.0}: D = {:+.4} (printed {:+.3}), excitations {:.4}/{:.4}/{:.4}/{:.4} (printed {}/{}/{}/{})",
            row.g_mag, got[0], want[0], got[1], got[2], got[3], got[4], want[1], want[2], want[3], want[4]
        );
        if (got[0] - want[0]).abs() > 0.005 {
            pos_fail.push(format!("{:+.3}->{:+.4}", want[0], got[0]));
        }
        if (1..5).any(|k| (got[k] - want[k]).abs() > 0.01) {
            exc_fail.push(format!("D = {:+.3}", want[0]));
        }
    }
    let pass = pos_fail.is_empty() && exc_fail.is_empty();
    let detail = if pass {
        "all positions within 0.005 and excitations within 0.01".to_string()
    } else {
        format!(
            "positions off: [{}]; excitations off at: [{}]",
            pos_fail.join(", "),
            exc_fail.join(", ")
        )
    };
    Outcome::new(pass, detail)
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for g in [1.7, 2.0, 3.0, 4.0, 5.5, 6.0, 8.0] {
        let sys = matched(10.0, g);
        for ch in analytic_channels(g, 1.0).exact() {
            let e = energy_distribution(&sys, ch.detuning).unwrap();
            worst = worst.max((e.phonon_sum / e.norm_photon - 2.0).abs());
            count += 1;
        }
    }
    Outcome::new(
        count > 0 && worst <= 1e-6,
        format!("{count} exact channels, max |ratio - 2| = {worst:.2e} (limit 1e-6)"),
    )
}

fn criterion_6() -> Outcome {
    let settings = OracleSettings::default();
    let sys = SystemParams::identical(50.0, 1.0, 2.0, 1.0);
    let mut worst = 0.0f64;
    let mut worst_exact = 0.0f64;
    for d in analytic_channels(2.0, 1.0).detunings() {
        let r = oracle_compare_with(&sys, d, &settings).unwrap();
        println!(
            "    D = {d:+.4}: vs linearized b1/b2/c = {:.3e}/{:.3e}/{:.3e}, vs exact solve = {:.1e}/{:.1e}/{:.1e}",
            r.rel_err_analytic[0],
            r.rel_err_analytic[1],
            r.rel_err_analytic[2],
            r.rel_err_exact[0],
            r.rel_err_exact[1],
            r.rel_err_exact[2]
        );
        worst = r.rel_err_analytic.iter().fold(worst, |a, &b| a.max(b));
        worst_exact = r.rel_err_exact.iter().fold(worst_exact, |a, &b| a.max(b));
    }
    let bare = SystemParams::identical(50.0, 1.0, 0.0, 0.0);
    let mut worst_bare = 0.0f64;
    for d in [-1.0, 0.0, 0.5] {
        let r = oracle_compare_with(&bare, d, &settings).unwrap();
        worst_bare = r.rel_err_analytic.iter().fold(worst_bare, |a, &b| a.max(b));
    }
    let pass = worst <= 1e-2 && worst_bare <= 1e-6;
    Outcome::new(
        pass,
        format!(
            "channels: max rel err {worst:.3e} (limit 1e-2; exact-solve agreement {worst_exact:.1e}); \
             G = lambda = 0: {worst_bare:.1e} (limit 1e-6)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let omega = 947.0 / 215.0;
    let to_mhz = |slope: f64| slope.abs() * KAPPA_SI / (2.0 * PI * 1e6);
    let mut identical_match = None;
    let mut shifted_match = None;
    for g in [2.0, 4.0] {
        let lam = matching_coulomb_coupling(g, 1.0).unwrap();
        let ident = SystemParams::identical(omega, 1.0, g, lam);
        let shifted = SystemParams { omega2: 1.2 * omega, ..ident };
        for (label, sys, target, slot) in [
            ("identical", ident, 6.3, &mut identical_match),
            ("omega2 = 1.2 omega1", shifted, 7.7, &mut shifted_match),
        ] {
            match phase_sensitivity(&sys, -0.01, 0.01) {
                Ok(s) => {
                    let mhz = to_mhz(s.slope);
                    println!(
                        "    |G| = {g}: {label}: dD/dtheta = {:+.5} kappa/rad = {mhz:.4} MHz/rad \
                         ({:.4} if rad/s is read as MHz), window feasible = {}",
                        s.slope,
                        s.slope.abs() * KAPPA_SI / 1e6,
                        s.feasible
                    );
                    if rel(mhz, target) <= 0.10 {
                        *slot = Some(g);
                    }
                }
                Err(e) => println!("    |G| = {g}: {label}: no sensitivity ({e})"),
            }
        }
    }
    let mut ratio_match = None;
    for g in [2.0, 4.0] {
        let base = matched(omega, g);
        match optimal_frequency_ratio(&base, 1.0, 1.4, 0.002) {
            Ok(scan) => {
                println!("    ratio scan |G| = {g}: ratio, |dD/dtheta| [kappa/rad], MHz/rad, band roots, feasible");
                for r in scan.rows.iter().step_by(10) {
                    let s = r.sensitivity.unwrap_or(f64::NAN);
                    println!(
                        "      {:.3}, {:.5}, {:.4}, {}, {}",
                        r.ratio,
                        s,
                        to_mhz(s),
                        r.band_roots,
                        r.feasible
                    );
                }
                let best = to_mhz(scan.best_sensitivity);
                println!(
                    "    ratio scan |G| = {g}: best at {:.3} with {best:.4} MHz/rad, {} excluded",
                    scan.best_ratio,
                    scan.excluded().count()
                );
                if (1.30..=1.38).contains(&scan.best_ratio) && rel(best, 8.3) <= 0.15 {
                    ratio_match = Some(g);
                }
            }
            Err(e) => println!("    ratio scan |G| = {g}: {e}"),
        }
    }
    let matched_all = identical_match.is_some() && shifted_match.is_some() && ratio_match.is_some();
    println!(
        "    matches: identical {identical_match:?}, shifted {shifted_match:?}, ratio {ratio_match:?}{}",
        if matched_all { "" } else { " -> recording values only" }
    );
    let points = locus_scan(&matched(omega, 2.0), -1.5, 1.5, 3001, DEFAULT_FEASIBILITY_TOL).unwrap();
    let reversal = first_reversal(&points);
    let monotonic = reversal.is_none();
    let detail = match reversal {
        None => "theta(D) monotonic on [-1.5, 1.5] kappa at |G| = 2 kappa".to_string(),
        Some(d) => format!("theta(D) not monotonic on [-1.5, 1.5] kappa at |G| = 2 kappa: first reversal at D = {d:+.4}"),
    };
    let tag = if matched_all { "values matched" } else { "values recorded" };
    Outcome::new(monotonic, format!("{tag}; {detail}"))
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_theta = 0.0f64;
    let mut worst_corrected = 0.0f64;
    let mut count_ok = true;
    for g in [1.0, 2.0, 3.0, 4.0] {
        for gamma1 in [0.5, 1.0, 2.0, 3.0] {
            let reference = single_nr_channels_numeric(g, 1.0, gamma1).unwrap();
            let sys = SystemParams {
                gamma1,
                ..SystemParams::identical(5.0, 1.0, g, 0.0)
            };
            let span = 3.0 * g + 3.0;
            let roots = unilateral_roots(&sys, -span, span, 6001).unwrap();
            if roots.len() != reference.len() {
                count_ok = false;
                println!("    |G| = {g}, gamma1 = {gamma1}: {} locus roots vs {}", roots.len(), reference.len());
                continue;
            }
            for (a, b) in roots.iter().zip(&reference) {
                worst = worst.max((a.detuning - b.detuning).abs());
                worst_theta = worst_theta.max((a.theta - b.theta).abs());
            }
            let closed = single_nr_channels_corrected(g, 1.0, gamma1);
            for r in &reference {
                if let Some(c) = closed.iter().map(|c| (c - r.detuning).abs()).reduce(f64::min) {
                    worst_corrected = worst_corrected.max(c);
                }
            }
        }
    }
    println!("    locus vs single-resonator roots: max |dD| = {worst:.2e} kappa, max |dtheta| = {worst_theta:.2e} rad");
    println!("    corrected closed form vs numeric roots: max |dD| = {worst_corrected:.2e} kappa");

    let lo = (8.0f64 / 3.0).sqrt();
    let gs: Vec<f64> = (0..50).map(|k| lo + (6.0 - lo) * k as f64 / 49.0).collect();
    let mut ds = Vec::new();
    let mut gfit = Vec::new();
    for &g in &gs {
        let roots = single_nr_channels_numeric(g, 1.0, 2.0).unwrap();
        if let Some(outer) = roots.iter().map(|r| r.detuning).reduce(f64::max) {
            ds.push(outer);
            gfit.push(g);
        }
    }
    let (_, slope) = linear_fit(&ds, &gfit);
    println!("    linearity over {} couplings (gamma1 = 2 kappa): d|G|/dD = {slope:.4}", ds.len());

    let mut printed_dev = 0.0f64;
    let mut printed_missing = 0;
    for &g in &[2.0, 3.0, 4.0, 6.0] {
        for &gamma1 in &[0.5, 2.0, 3.0] {
            let numeric: Vec<f64> = single_nr_channels_numeric(g, 1.0, gamma1)
                .unwrap()
                .iter()
                .map(|r| r.detuning)
                .collect();
            let printed = single_nr_channels_closed_form(g, 1.0, gamma1);
            if printed.is_empty() || numeric.is_empty() {
                printed_missing += 1;
                continue;
            }
            for p in printed {
                let dev = numeric.iter().map(|n| (n - p).abs()).fold(f64::INFINITY, f64::min);
                printed_dev = printed_dev.max(dev);
            }
        }
    }
    println!(
        "    closed form as printed: max deviation from numeric roots {printed_dev:.4} kappa \
         ({printed_missing} cases without roots); reported only"
    );
    let pass = count_ok && worst <= 1e-9 && (slope - 1.016).abs() <= 0.05;
    Outcome::new(
        pass,
        format!("root agreement {worst:.2e} kappa (limit 1e-9), d|G|/dD = {slope:.4} (1.016 +- 0.05)"),
    )
}

fn random_system(rng: &mut StdRng) -> SystemParams {
    let omega1 = rng.random_range(2.0..20.0);
    let omega2 = omega1 * rng.random_range(0.8..1.25);
    SystemParams {
        omega1,
        omega2,
        gamma1: rng.random_range(0.1..4.0),
        gamma2: rng.random_range(0.1..4.0),
        kappa: 1.0,
        delta_cav: omega1 + rng.random_range(-1.0..1.0),
        g_eff: rng.random_range(0.0..6.0),
        g_eff_phase: rng.random_range(-PI..PI),
        lambda_c: rng.random_range(0.0..5.0),
        eps_left: rng.random_range(0.2..2.0),
        eps_right: rng.random_range(0.2..2.0),
        theta_rel: rng.random_range(-PI..PI),
        convention: Convention::Eq8,
    }
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1e-300)
}

fn criterion_9() -> Outcome {
    const DRAWS: usize = 120;
    let mut rng = StdRng::seed_from_u64(9);
    let mut failures: Vec<String> = Vec::new();
    let mut fail = |name: &str, k: usize| {
        if failures.len() < 8 {
            failures.push(format!("{name}#{k}"));
        }
    };
    let mut rk4_min_ratio = f64::INFINITY;
    for k in 0..DRAWS {
        let sys = random_system(&mut rng);
        let d = rng.random_range(-5.0..5.0);

        // evenness of identical spectra
        let ident = SystemParams::identical(sys.omega1, 1.0, sys.g_eff, sys.lambda_c);
        let (p, m) = (output_fields(&ident, d).unwrap(), output_fields(&ident, -d).unwrap());
        if rel(p.power_left, m.power_left) > 1e-9 && (p.power_left - m.power_left).abs() > 1e-14 {
            fail("even", k);
        }

        // theta antisymmetry for identical resonators with equal probes
        let (zp, zm) = (locus_value(&ident, d).unwrap(), locus_value(&ident, -d).unwrap());
        if (zp.arg() + zm.arg()).abs() > 1e-10 && zp.im.abs() > 1e-12 {
            fail("antisym", k);
        }

        // db2 from db1 through the second resonator
        let r = probe_response(&sys, d).unwrap();
        let chi2 = Complex64::new(sys.gamma2 / 2.0, -(r.delta - sys.omega2));
        let expect = -Complex64::i() * sys.lambda_c / chi2 * r.db1_plus;
        if !close(r.db2_plus, expect, 1e-12) && expect.norm() > 1e-300 {
            fail("db2", k);
        }

        // scale invariance
        let s = rng.random_range(0.1..10.0);
        let (a, b) = (output_fields(&sys, d).unwrap(), output_fields(&sys.scaled(s), s * d).unwrap());
        if rel(a.power_left, b.power_left) > 1e-9 || rel(a.power_right, b.power_right) > 1e-9 {
            fail("scale", k);
        }
        let ea = energy_distribution(&sys, d).unwrap();
        let eb = energy_distribution(&sys.scaled(s), s * d).unwrap();
        if rel(ea.phonon_sum, eb.phonon_sum) > 1e-9 {
            fail("scale-energy", k);
        }

        // RK4 self-convergence: error ratio between successive halvings
        let dt = max_step(&sys, d);
        let t_end = 256.0 * dt;
        let end = |h: f64| {
            let tr = integrate_mean_langevin(&sys, d, t_end, h).unwrap();
            tr.c[tr.len() - 1]
        };
        let (c1, c2, c4) = (end(dt), end(dt / 2.0), end(dt / 4.0));
        let ratio = (c1 - c2).norm() / (c2 - c4).norm();
        if ratio.is_finite() {
            rk4_min_ratio = rk4_min_ratio.min(ratio);
            if ratio < 12.0 {
                fail("rk4", k);
            }
        }
    }

    // CSV byte determinism across repeated and parallel runs
    let cfg = parse_config(include_str!("../configs/non_identical.json")).unwrap();
    let mut csv_ok = true;
    for cmd in [Command::Response, Command::Energy, Command::Channels, Command::Table1] {
        let serial = run_command(cmd, &cfg, &Overrides::default()).unwrap().csv;
        let again = run_command(cmd, &cfg, &Overrides::default()).unwrap().csv;
        let par = Overrides { parallel: true, ..Default::default() };
        let parallel = run_command(cmd, &cfg, &par).unwrap().csv;
        csv_ok &= serial == again && serial == parallel;
    }
    if !csv_ok {
        failures.push("csv".into());
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{DRAWS} draws; RK4 min error ratio {rk4_min_ratio:.1} (4th order: 16); csv deterministic = {csv_ok}{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

/// Name, time budget in seconds, check.
type Criterion = (&'static str, f64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("analytic channels", 1.0, criterion_1),
        ("zero output at channels", 1.0, criterion_2),
        ("channel table, identical", 1.0, criterion_3),
        ("channel table, non-identical", 10.0, criterion_4),
        ("energy partition 2:1", 1.0, criterion_5),
        ("time-domain oracle", 60.0, criterion_6),
        ("phase metrology", 60.0, criterion_7),
        ("single-resonator reduction", 5.0, criterion_8),
        ("property suite", 60.0, criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut lines = Vec::new();
    for (n, (name, budget, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", n + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        println!("{id}: {name}");
        let start = Instant::now();
        let out = run();
        let secs = start.elapsed().as_secs_f64();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        let line = format!("{verdict} {id} ({name}): {} [{secs:.2} s, budget {budget} s]", out.detail);
        println!("{line}");
        lines.push(line);
    }
    println!("\nsummary:");
    for line in &lines {
        println!("{line}");
    }
    println!("{} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
