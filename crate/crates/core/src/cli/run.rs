use std::fs;

use super::config::{ChannelMethod, GridOptions, PhaseMode, RunConfig};
use super::csv::{fmt_bool, fmt_num, Table};
use super::{parse_config, Args, CliError, Command, ConventionArg, PhaseModeArg};
use crate::channels::{
    analytic_channels, find_channels_numeric, matching_condition_holds, table_one, ChannelSet, DEFAULT_GRID,
};
use crate::model::Convention;
use crate::oracle::{oracle_run, OracleSettings, Trajectory};
use crate::phase::{decay_phase_curve, locus_scan, optimal_frequency_ratio, phase_sensitivity_with};
use crate::response::{linspace, sweep_par, sweep_with, SweepRow};

const BUNDLED: &str = include_str!("../../configs/identical.json");

/// Command-line settings that override the configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub convention: Option<Convention>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub parallel: bool,
    pub phase_mode: Option<PhaseMode>,
}

/// Result of one command: the CSV text and, for `oracle-check`, the first trajectory.
pub struct Output {
    pub csv: String,
    pub trajectory: Option<Trajectory>,
}

pub fn execute(args: &Args) -> Result<(), CliError> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => BUNDLED.to_string(),
    };
    let cfg = parse_config(&text)?;
    let overrides = Overrides {
        convention: args.convention.map(|c| match c {
            ConventionArg::Eq8 => Convention::Eq8,
            ConventionArg::Eq11 => Convention::Eq11,
        }),
        tol: args.tol,
        grid: args.grid,
        parallel: args.parallel.is_some(),
        phase_mode: args.phase_mode.map(|m| match m {
            PhaseModeArg::Locus => PhaseMode::Locus,
            PhaseModeArg::Sensitivity => PhaseMode::Sensitivity,
            PhaseModeArg::Decay => PhaseMode::Decay,
            PhaseModeArg::Ratio => PhaseMode::Ratio,
        }),
    };
    if let Some(t) = overrides.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config(format!("--tol must be finite and > 0, got {t}")));
        }
    }
    let output = match args.parallel {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("--parallel {n}: {e}")))?;
            pool.install(|| run_command(args.command, &cfg, &overrides))?
        }
        None => run_command(args.command, &cfg, &overrides)?,
    };
    match &args.out {
        Some(path) => fs::write(path, &output.csv)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", output.csv),
    }
    if let (Some(path), Some(traj)) = (&args.dump_trajectory, &output.trajectory) {
        let file = fs::File::create(path)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        traj.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn run_command(command: Command, cfg: &RunConfig, overrides: &Overrides) -> Result<Output, CliError> {
    let mut cfg = cfg.clone();
    if let Some(c) = overrides.convention {
        cfg.system.convention = c;
    }
    let mut trajectory = None;
    let table = match command {
        Command::Response => response_table(&cfg, overrides),
        Command::Energy => energy_table(&cfg, overrides),
        Command::Channels => channels_table(&cfg, overrides)?,
        Command::Phase => phase_table(&cfg, overrides)?,
        Command::Table1 => table1(&cfg)?,
        Command::OracleCheck => {
            let (table, traj) = oracle_table(&cfg)?;
            trajectory = traj;
            table
        }
    };
    Ok(Output {
        csv: table.render(),
        trajectory,
    })
}

fn grid_points(cfg: &RunConfig, overrides: &Overrides, default: GridOptions) -> Vec<f64> {
    let opts = cfg.grid.unwrap_or(default);
    let n = overrides.grid.unwrap_or(opts.points);
    let k = cfg.system.kappa;
    linspace(opts.d_min_over_kappa * k, opts.d_max_over_kappa * k, n)
}

const SPECTRUM_GRID: GridOptions = GridOptions {
    d_min_over_kappa: -10.0,
    d_max_over_kappa: 10.0,
    points: 2001,
};

fn rows(cfg: &RunConfig, overrides: &Overrides) -> Vec<SweepRow> {
    let grid = grid_points(cfg, overrides, SPECTRUM_GRID);
    if overrides.parallel {
        sweep_par(&cfg.system, &grid, cfg.normalization)
    } else {
        sweep_with(&cfg.system, &grid, cfg.normalization)
    }
}

fn response_table(cfg: &RunConfig, overrides: &Overrides) -> Table {
    let mut t = Table::new(&["D_over_kappa", "power_left", "power_right"]);
    for row in rows(cfg, overrides) {
        let d = row.detuning / cfg.system.kappa;
        match row.point {
            Ok(p) => t.push_nums(&[d, p.power_left, p.power_right]),
            Err(_) => t.push_nums(&[d, f64::NAN, f64::NAN]),
        }
    }
    t
}

fn energy_table(cfg: &RunConfig, overrides: &Overrides) -> Table {
    let mut t = Table::new(&["D_over_kappa", "norm_photon", "norm_phonon1", "norm_phonon2", "phonon_sum"]);
    for row in rows(cfg, overrides) {
        let d = row.detuning / cfg.system.kappa;
        match row.point {
            Ok(p) => {
                let e = p.energy;
                t.push_nums(&[d, e.norm_photon, e.norm_phonon1, e.norm_phonon2, e.phonon_sum]);
            }
            Err(_) => t.push_nums(&[d, f64::NAN, f64::NAN, f64::NAN, f64::NAN]),
        }
    }
    t
}

fn uses_closed_form(cfg: &RunConfig) -> bool {
    match cfg.channels.method {
        ChannelMethod::Analytic => true,
        ChannelMethod::Numeric => false,
        ChannelMethod::Auto => cfg.system.is_identical() && matching_condition_holds(&cfg.system, 1e-9),
    }
}

fn find_channels(cfg: &RunConfig, overrides: &Overrides) -> Result<ChannelSet, CliError> {
    let sys = &cfg.system;
    let tol = overrides.tol.unwrap_or(cfg.channels.tol);
    if uses_closed_form(cfg) {
        let mut set = analytic_channels(sys.g_eff, sys.kappa);
        for c in &mut set.channels {
            c.exact = c.residual_power < tol;
        }
        return Ok(set);
    }
    let span = 3.0 * sys.g_eff.max(sys.kappa) / sys.kappa;
    let default = GridOptions {
        d_min_over_kappa: -span,
        d_max_over_kappa: span,
        points: DEFAULT_GRID,
    };
    let opts = cfg.grid.unwrap_or(default);
    let n = overrides.grid.unwrap_or(opts.points);
    let k = sys.kappa;
    Ok(find_channels_numeric(sys, opts.d_min_over_kappa * k, opts.d_max_over_kappa * k, n, tol)?)
}

fn channels_table(cfg: &RunConfig, overrides: &Overrides) -> Result<Table, CliError> {
    let set = find_channels(cfg, overrides)?;
    let mut t = Table::new(&["D_over_kappa", "residual_power", "exact_flag"]);
    for c in &set.channels {
        t.push(vec![
            fmt_num(c.detuning / cfg.system.kappa),
            fmt_num(c.residual_power),
            fmt_bool(c.exact).into(),
        ]);
    }
    Ok(t)
}

const LOCUS_GRID: GridOptions = GridOptions {
    d_min_over_kappa: -1.5,
    d_max_over_kappa: 1.5,
    points: 301,
};

fn phase_table(cfg: &RunConfig, overrides: &Overrides) -> Result<Table, CliError> {
    let sys = &cfg.system;
    let k = sys.kappa;
    let opts = &cfg.phase;
    let tol = overrides.tol.unwrap_or(opts.tolerance);
    let table = match overrides.phase_mode.unwrap_or(opts.mode) {
        PhaseMode::Locus => {
            let grid = cfg.grid.unwrap_or(LOCUS_GRID);
            let n = overrides.grid.unwrap_or(grid.points);
            let points = locus_scan(sys, grid.d_min_over_kappa * k, grid.d_max_over_kappa * k, n, tol)?;
            let mut t = Table::new(&["D_over_kappa", "theta_rad", "modulus_residual", "feasible"]);
            for p in points {
                t.push(vec![
                    fmt_num(p.detuning / k),
                    fmt_num(p.theta),
                    fmt_num(p.modulus_residual),
                    fmt_bool(p.feasible).into(),
                ]);
            }
            t
        }
        PhaseMode::Sensitivity => {
            let n = overrides.grid.unwrap_or(crate::phase::DEFAULT_SAMPLES);
            let (lo, hi) = opts.window;
            let s = phase_sensitivity_with(sys, lo * k, hi * k, n, tol)?;
            let mut t = Table::new(&[
                "window_lo_over_kappa",
                "window_hi_over_kappa",
                "slope_over_kappa_per_rad",
                "mhz_per_rad",
                "feasible",
            ]);
            t.push(vec![
                fmt_num(lo),
                fmt_num(hi),
                fmt_num(s.slope / k),
                fmt_num(s.mhz_per_rad(k, opts.kappa_si)),
                fmt_bool(s.feasible).into(),
            ]);
            t
        }
        PhaseMode::Decay => {
            let g = opts.g_over_kappa.map_or(sys.g_eff, |g| g * k);
            let gammas: Vec<f64> = opts.gamma1_over_kappa.iter().map(|g| g * k).collect();
            let mut t = Table::new(&["gamma1_over_kappa", "D_over_kappa", "theta_rad"]);
            for row in decay_phase_curve(g, k, &gammas)? {
                if row.roots.is_empty() {
                    t.push_nums(&[row.gamma1 / k, f64::NAN, f64::NAN]);
                }
                for r in row.roots {
                    t.push_nums(&[row.gamma1 / k, r.detuning / k, r.theta]);
                }
            }
            t
        }
        PhaseMode::Ratio => {
            let scan = optimal_frequency_ratio(sys, opts.ratio_lo, opts.ratio_hi, opts.ratio_step)?;
            let mut t = Table::new(&[
                "ratio",
                "sensitivity_over_kappa_per_rad",
                "mhz_per_rad",
                "band_roots",
                "window_feasible",
                "feasible",
                "best",
            ]);
            for r in &scan.rows {
                let s = r.sensitivity.unwrap_or(f64::NAN);
                t.push(vec![
                    fmt_num(r.ratio),
                    fmt_num(s / k),
                    fmt_num(s / k * opts.kappa_si / (2.0 * std::f64::consts::PI * 1e6)),
                    r.band_roots.to_string(),
                    fmt_bool(r.window_feasible).into(),
                    fmt_bool(r.feasible).into(),
                    fmt_bool(r.ratio == scan.best_ratio).into(),
                ]);
            }
            t
        }
    };
    Ok(table)
}

fn table1(cfg: &RunConfig) -> Result<Table, CliError> {
    let k = cfg.system.kappa;
    let mut t = Table::new(&[
        "part",
        "D_over_kappa",
        "G_over_kappa",
        "lambda_over_kappa",
        "power_right",
        "power_left",
        "norm_photon",
        "norm_phonon1",
        "norm_phonon2",
        "phonon_sum",
    ]);
    for r in table_one(&cfg.system)? {
        let e = r.energy;
        let mut row = vec![if r.part == 1 { "I" } else { "II" }.to_string()];
        row.extend(
            [
                r.detuning / k,
                r.g_mag / k,
                r.lambda / k,
                r.power_right,
                r.power_left,
                e.norm_photon,
                e.norm_phonon1,
                e.norm_phonon2,
                e.phonon_sum,
            ]
            .iter()
            .map(|&x| fmt_num(x)),
        );
        t.push(row);
    }
    Ok(t)
}

fn oracle_table(cfg: &RunConfig) -> Result<(Table, Option<Trajectory>), CliError> {
    let sys = &cfg.system;
    let k = sys.kappa;
    let detunings: Vec<f64> = match &cfg.oracle.detunings_over_kappa {
        Some(ds) => ds.iter().map(|d| d * k).collect(),
        None => {
            let found: Vec<f64> = find_channels(cfg, &Overrides::default())?
                .exact()
                .map(|c| c.detuning)
                .collect();
            if found.is_empty() { vec![0.0] } else { found }
        }
    };
    let settings = OracleSettings {
        steps_per_period: cfg.oracle.steps_per_period,
        periods: cfg.oracle.periods,
        settle_time: None,
    };
    let mut t = Table::new(&[
        "D_over_kappa",
        "mode",
        "numeric_re",
        "numeric_im",
        "analytic_re",
        "analytic_im",
        "rel_err_analytic",
        "exact_re",
        "exact_im",
        "rel_err_exact",
        "minus_over_plus",
    ]);
    let mut first = None;
    for d in detunings {
        let (report, traj) = oracle_run(sys, d, &settings)?;
        let analytic = [report.analytic.db1_plus, report.analytic.db2_plus, report.analytic.dc_plus];
        for (m, name) in ["b1", "b2", "c"].iter().enumerate() {
            let num = report.numeric.plus[m];
            let ratio = report.numeric.minus[m].norm() / num.norm();
            let mut row = vec![fmt_num(d / k), name.to_string()];
            row.extend(
                [
                    num.re,
                    num.im,
                    analytic[m].re,
                    analytic[m].im,
                    report.rel_err_analytic[m],
                    report.exact.plus[m].re,
                    report.exact.plus[m].im,
                    report.rel_err_exact[m],
                    ratio,
                ]
                .iter()
                .map(|&x| fmt_num(x)),
            );
            t.push(row);
        }
        first.get_or_insert(traj);
    }
    Ok((t, first))
}
