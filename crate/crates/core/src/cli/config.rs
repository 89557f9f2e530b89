//! JSON run configuration.
//!
//! Rates are read as given; a key with an `_hz` suffix is read in ordinary
//! frequency and multiplied by `2 pi`. Unknown keys are rejected.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde_json::{Map, Value};

use super::CliError;
use crate::model::{Convention, FixedPointSettings, PhysicalParams, SteadyState, SystemParams};
use crate::response::Normalization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Normalized,
    Physical,
}

/// Detuning grid in units of kappa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub d_min_over_kappa: f64,
    pub d_max_over_kappa: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelMethod {
    /// Closed forms when the matching condition holds for identical resonators.
    #[default]
    Auto,
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOptions {
    pub method: ChannelMethod,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    #[default]
    Locus,
    Sensitivity,
    Decay,
    Ratio,
}

impl PhaseMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "locus" => Some(Self::Locus),
            "sensitivity" => Some(Self::Sensitivity),
            "decay" => Some(Self::Decay),
            "ratio" => Some(Self::Ratio),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOptions {
    pub mode: PhaseMode,
    pub tolerance: f64,
    /// Sensitivity window in units of kappa.
    pub window: (f64, f64),
    /// Physical kappa (rad/s) used for MHz/rad figures.
    pub kappa_si: f64,
    pub gamma1_over_kappa: Vec<f64>,
    /// `|G| / kappa` for the decay curve; defaults to the system's.
    pub g_over_kappa: Option<f64>,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub ratio_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    /// Defaults to the detected channels (or `D = 0`).
    pub detunings_over_kappa: Option<Vec<f64>>,
    pub steps_per_period: usize,
    pub periods: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub system: SystemParams,
    pub physical: Option<PhysicalParams>,
    pub steady: Option<SteadyState>,
    pub grid: Option<GridOptions>,
    pub normalization: Normalization,
    pub channels: ChannelOptions,
    pub phase: PhaseOptions,
    pub oracle: OracleOptions,
}

fn err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A JSON object whose keys are checked off as they are read.
struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
    seen: BTreeSet<String>,
}

impl<'a> Obj<'a> {
    fn new(path: &str, value: &'a Value) -> Result<Self, CliError> {
        match value {
            Value::Object(map) => Ok(Self {
                path: path.to_string(),
                map,
                seen: BTreeSet::new(),
            }),
            _ => Err(err(format!("`{path}`: expected an object"))),
        }
    }

    fn key(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&mut self, key: &str) -> Option<&'a Value> {
        let v = self.map.get(key)?;
        self.seen.insert(key.to_string());
        Some(v)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => n
                .as_f64()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| err(format!("`{}`: expected a finite number", self.key(key)))),
            Some(_) => Err(err(format!("`{}`: expected a number", self.key(key)))),
        }
    }

    /// `key` as given, or `key_hz` times `2 pi`; not both.
    fn rate(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        let hz = format!("{key}_hz");
        let direct = self.number(key)?;
        let scaled = self.number(&hz)?.map(|f| 2.0 * PI * f);
        match (direct, scaled) {
            (Some(_), Some(_)) => Err(err(format!(
                "`{}` and `{}` are both given",
                self.key(key),
                self.key(&hz)
            ))),
            (a, b) => Ok(a.or(b)),
        }
    }

    fn require(&self, key: &str, v: Option<f64>) -> Result<f64, CliError> {
        v.ok_or_else(|| err(format!("`{}`: required number is missing", self.key(key))))
    }

    fn string(&mut self, key: &str) -> Result<Option<&'a str>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(err(format!("`{}`: expected a string", self.key(key)))),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Number(n)) => n
                .as_u64()
                .map(|v| Some(v as usize))
                .ok_or_else(|| err(format!("`{}`: expected a non-negative integer", self.key(key)))),
            Some(_) => Err(err(format!("`{}`: expected a non-negative integer", self.key(key)))),
        }
    }

    fn numbers(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let name = self.key(key);
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| {
                    v.as_f64()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| err(format!("`{name}`: expected an array of numbers")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(err(format!("`{name}`: expected an array of numbers"))),
        }
    }

    fn object(&mut self, key: &str) -> Result<Option<Obj<'a>>, CliError> {
        let path = self.key(key);
        self.get(key).map(|v| Obj::new(&path, v)).transpose()
    }

    fn finish(self) -> Result<(), CliError> {
        match self.map.keys().find(|k| !self.seen.contains(*k)) {
            Some(k) => Err(err(format!("`{}`: unknown key", self.key(k)))),
            None => Ok(()),
        }
    }
}

fn parse_convention(name: &str, s: &str) -> Result<Convention, CliError> {
    Convention::parse(s).ok_or_else(|| err(format!("`{name}`: expected \"eq8\" or \"eq11\", got \"{s}\"")))
}

fn parse_system(mut o: Obj) -> Result<SystemParams, CliError> {
    let omega1 = o.rate("omega1")?;
    let omega1 = o.require("omega1", omega1)?;
    let kappa = o.rate("kappa")?;
    let kappa = o.require("kappa", kappa)?;
    let g_eff = o.rate("g_eff")?;
    let g_eff = o.require("g_eff", g_eff)?;
    let lambda_c = match o.map.get("lambda_c") {
        Some(Value::String(s)) => {
            o.seen.insert("lambda_c".into());
            if s != "matching" {
                return Err(err("`system.lambda_c`: expected a number or \"matching\""));
            }
            crate::channels::matching_coulomb_coupling(g_eff, kappa)
                .map_err(|e| err(format!("`system.lambda_c`: {e}")))?
        }
        _ => {
            let v = o.rate("lambda_c")?;
            o.require("lambda_c", v)?
        }
    };
    let omega2 = o.rate("omega2")?.unwrap_or(omega1);
    let sys = SystemParams {
        omega1,
        omega2,
        gamma1: o.rate("gamma1")?.unwrap_or(2.0 * kappa),
        gamma2: o.rate("gamma2")?.unwrap_or(2.0 * kappa),
        kappa,
        delta_cav: o.rate("delta_cav")?.unwrap_or(omega1),
        g_eff,
        g_eff_phase: o.number("g_eff_phase")?.unwrap_or(0.0),
        lambda_c,
        eps_left: o.number("eps_left")?.unwrap_or(1.0),
        eps_right: o.number("eps_right")?.unwrap_or(1.0),
        theta_rel: 0.0,
        convention: match o.string("convention")? {
            Some(s) => parse_convention("system.convention", s)?,
            None => Convention::Eq8,
        },
    }
    .with_theta(o.number("theta_rel")?.unwrap_or(0.0));
    o.finish()?;
    sys.validate().map_err(|e| err(format!("`system`: {e}")))?;
    Ok(sys)
}

fn parse_physical(mut o: Obj) -> Result<PhysicalParams, CliError> {
    let req = |o: &mut Obj, key: &str, rate: bool| -> Result<f64, CliError> {
        let v = if rate { o.rate(key)? } else { o.number(key)? };
        o.require(key, v)
    };
    let kappa = req(&mut o, "kappa", true)?;
    let omega1 = req(&mut o, "omega1", true)?;
    let phys = PhysicalParams {
        m1: req(&mut o, "m1", false)?,
        m2: req(&mut o, "m2", false)?,
        omega1,
        omega2: o.rate("omega2")?.unwrap_or(omega1),
        gamma1: o.rate("gamma1")?.unwrap_or(2.0 * kappa),
        gamma2: o.rate("gamma2")?.unwrap_or(2.0 * kappa),
        kappa,
        cavity_length: req(&mut o, "cavity_length", false)?,
        cavity_wavelength: req(&mut o, "cavity_wavelength", false)?,
        g0: o.number("g0")?,
        c1: req(&mut o, "c1", false)?,
        c2: req(&mut o, "c2", false)?,
        v1: req(&mut o, "v1", false)?,
        v2: req(&mut o, "v2", false)?,
        r0: req(&mut o, "r0", false)?,
        pump_power: req(&mut o, "pump_power", false)?,
        probe_power: req(&mut o, "probe_power", false)?,
        pump_frequency: o.rate("pump_frequency")?,
        bare_cavity_frequency: o.rate("bare_cavity_frequency")?,
    };
    o.finish()?;
    phys.validate().map_err(|e| err(format!("`physical`: {e}")))?;
    Ok(phys)
}

fn parse_fixed_point(o: Option<Obj>) -> Result<FixedPointSettings, CliError> {
    let mut s = FixedPointSettings::default();
    if let Some(mut o) = o {
        if let Some(v) = o.number("damping")? {
            s.damping = v;
        }
        if let Some(v) = o.number("tolerance")? {
            s.tolerance = v;
        }
        if let Some(v) = o.count("max_iterations")? {
            s.max_iterations = v;
        }
        o.finish()?;
    }
    Ok(s)
}

fn parse_grid(mut o: Obj) -> Result<GridOptions, CliError> {
    let lo = o.number("d_min_over_kappa")?;
    let hi = o.number("d_max_over_kappa")?;
    let grid = GridOptions {
        d_min_over_kappa: o.require("d_min_over_kappa", lo)?,
        d_max_over_kappa: o.require("d_max_over_kappa", hi)?,
        points: o.count("points")?.unwrap_or(2001),
    };
    o.finish()?;
    if !(grid.d_min_over_kappa <= grid.d_max_over_kappa) || grid.points == 0 {
        return Err(err("`grid`: need d_min_over_kappa <= d_max_over_kappa and points > 0"));
    }
    Ok(grid)
}

fn parse_channels(o: Option<Obj>) -> Result<ChannelOptions, CliError> {
    let mut opts = ChannelOptions {
        method: ChannelMethod::Auto,
        tol: crate::channels::DEFAULT_EXACT_TOL,
    };
    if let Some(mut o) = o {
        if let Some(m) = o.string("method")? {
            opts.method = match m {
                "auto" => ChannelMethod::Auto,
                "analytic" => ChannelMethod::Analytic,
                "numeric" => ChannelMethod::Numeric,
                other => {
                    return Err(err(format!(
                        "`channels.method`: expected \"auto\", \"analytic\" or \"numeric\", got \"{other}\""
                    )))
                }
            };
        }
        if let Some(t) = o.number("tol")? {
            opts.tol = t;
        }
        o.finish()?;
    }
    Ok(opts)
}

fn parse_phase(o: Option<Obj>, kappa_si: f64) -> Result<PhaseOptions, CliError> {
    let mut opts = PhaseOptions {
        mode: PhaseMode::Locus,
        tolerance: crate::phase::DEFAULT_FEASIBILITY_TOL,
        window: crate::phase::DEFAULT_WINDOW,
        kappa_si,
        gamma1_over_kappa: (1..=40).map(|k| 0.2 * k as f64).collect(),
        g_over_kappa: None,
        ratio_lo: 1.0,
        ratio_hi: 1.4,
        ratio_step: 0.002,
    };
    if let Some(mut o) = o {
        if let Some(m) = o.string("mode")? {
            opts.mode = PhaseMode::parse(m).ok_or_else(|| {
                err(format!(
                    "`phase.mode`: expected \"locus\", \"sensitivity\", \"decay\" or \"ratio\", got \"{m}\""
                ))
            })?;
        }
        if let Some(t) = o.number("tolerance")? {
            opts.tolerance = t;
        }
        if let Some(w) = o.numbers("window_over_kappa")? {
            if w.len() != 2 || !(w[0] < w[1]) {
                return Err(err("`phase.window_over_kappa`: expected [lo, hi] with lo < hi"));
            }
            opts.window = (w[0], w[1]);
        }
        if let Some(k) = o.rate("kappa_si")? {
            opts.kappa_si = k;
        }
        if let Some(g) = o.numbers("gamma1_over_kappa")? {
            opts.gamma1_over_kappa = g;
        }
        opts.g_over_kappa = o.number("g_over_kappa")?;
        if let Some(v) = o.number("ratio_lo")? {
            opts.ratio_lo = v;
        }
        if let Some(v) = o.number("ratio_hi")? {
            opts.ratio_hi = v;
        }
        if let Some(v) = o.number("ratio_step")? {
            opts.ratio_step = v;
        }
        o.finish()?;
    }
    Ok(opts)
}

fn parse_oracle(o: Option<Obj>) -> Result<OracleOptions, CliError> {
    let mut opts = OracleOptions {
        detunings_over_kappa: None,
        steps_per_period: 400,
        periods: 20,
    };
    if let Some(mut o) = o {
        opts.detunings_over_kappa = o.numbers("detunings_over_kappa")?;
        if let Some(n) = o.count("steps_per_period")? {
            if n < 50 {
                return Err(err("`oracle.steps_per_period`: must be at least 50"));
            }
            opts.steps_per_period = n;
        }
        if let Some(n) = o.count("periods")? {
            if n == 0 {
                return Err(err("`oracle.periods`: must be at least 1"));
            }
            opts.periods = n;
        }
        o.finish()?;
    }
    Ok(opts)
}

/// Physical kappa assumed for MHz/rad figures in normalized mode.
pub const DEFAULT_KAPPA_SI: f64 = 2.0 * PI * 215e3;

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let root: Value = serde_json::from_str(text).map_err(|e| err(format!("malformed JSON: {e}")))?;
    let mut o = Obj::new("", &root)?;
    let mode = match o.string("mode")? {
        None | Some("normalized") => Mode::Normalized,
        Some("physical") => Mode::Physical,
        Some(other) => return Err(err(format!("`mode`: expected \"normalized\" or \"physical\", got \"{other}\""))),
    };
    let system_block = o.object("system")?;
    let physical_block = o.object("physical")?;
    let fixed_point = parse_fixed_point(o.object("fixed_point")?)?;
    let (system, physical, steady) = match (mode, system_block, physical_block) {
        (Mode::Normalized, Some(s), None) => (parse_system(s)?, None, None),
        (Mode::Physical, None, Some(p)) => {
            let phys = parse_physical(p)?;
            let (sys, state) = phys.to_system(&fixed_point).map_err(CliError::Numerical)?;
            (sys, Some(phys), Some(state))
        }
        (Mode::Normalized, _, _) => return Err(err("normalized mode needs a `system` block and no `physical` block")),
        (Mode::Physical, _, _) => return Err(err("physical mode needs a `physical` block and no `system` block")),
    };
    let grid = o.object("grid")?.map(parse_grid).transpose()?;
    let normalization = match o.string("normalization")? {
        None | Some("left") => Normalization::Left,
        Some("per_side") => Normalization::PerSide,
        Some(other) => return Err(err(format!("`normalization`: expected \"left\" or \"per_side\", got \"{other}\""))),
    };
    let channels = parse_channels(o.object("channels")?)?;
    let kappa_si = match mode {
        Mode::Physical => system.kappa,
        Mode::Normalized => DEFAULT_KAPPA_SI,
    };
    let phase = parse_phase(o.object("phase")?, kappa_si)?;
    let oracle = parse_oracle(o.object("oracle")?)?;
    o.finish()?;
    Ok(RunConfig {
        mode,
        system,
        physical,
        steady,
        grid,
        normalization,
        channels,
        phase,
        oracle,
    })
}
