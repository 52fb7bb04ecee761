//! Flat `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment. Every key can also be given as
//! a `--key value` flag; flags win over the file. Complex numbers are written
//! `re,im` (or just `re`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use dfchannel_core::absorber::MICRO_MAX_CUTOFF;
use dfchannel_core::charfunc::GRID_BOUND;
use dfchannel_core::fock::{DEFAULT_CUTOFF_CAP, DEFAULT_MARGIN};
use dfchannel_core::pipeline::DEFAULT_DT;
use dfchannel_core::{
    AbsorberModel, AbsorberParams, ChannelOptions, FockCutoff, FrequencySpec, SchemeParams, SecondBeamsplitter, C64,
};
use serde::Serialize;

use crate::CliError;

/// Every accepted key, with a one-line description for `--help`.
pub const KEYS: &[(&str, &str)] = &[
    (
        "command",
        "channel | control | raman | stats | charfunc | verify | sweep",
    ),
    ("alpha", "coherent amplitude, re or re,im"),
    ("n", "Fock number of the protected mode"),
    ("g", "coupling of mode a"),
    ("f", "coupling of mode b"),
    ("theta", "beamsplitter angle (default: matched to g, f)"),
    ("Mz", "optical depth M*z (unit length and velocity)"),
    ("R", "absorption coefficient g^2 N / gamma"),
    ("N_occ", "lower-level occupation N"),
    ("gamma", "transversal decay rate"),
    ("z", "medium length"),
    ("v", "propagation velocity"),
    ("epsilon", "frame variant: -1, 0 or 1"),
    ("Omega", "pump frequency of the frame variant"),
    ("omega0", "resonance frequency"),
    ("omega_a", "frequency of mode a (default omega0 + epsilon*Omega)"),
    ("omega_b", "frequency of mode b (default omega0)"),
    ("n_max", "per-mode cutoff override"),
    ("cutoff_cap", "largest cutoff the truncation rule may pick"),
    ("margin", "levels below the cutoff counted as leakage"),
    ("leakage_threshold", "abort when leakage exceeds this"),
    ("model", "analytic | lindblad"),
    ("dt", "Lindblad RK4 step"),
    ("second_bs", "inverse | repeat"),
    ("stage", "charfunc state: input | absorber_in | absorber_out | output"),
    ("grid_bound", "charfunc grid half-width (<= 2)"),
    ("grid_count", "charfunc points per axis"),
    ("phase1", "direction of the beta1 axis"),
    ("phase2", "direction of the beta2 axis"),
    ("atoms", "number of atoms for verify (1-3)"),
    ("verify_time", "final time of the verify trajectory"),
    ("verify_steps", "sample count of the verify trajectory"),
    ("sweep_param", "key varied by sweep"),
    ("sweep_start", "first sweep value"),
    ("sweep_stop", "last sweep value"),
    ("sweep_count", "number of sweep points"),
    ("sweep_command", "channel | control | raman | stats"),
    ("out", "output path (default stdout)"),
    ("format", "json | csv"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Channel,
    Control,
    Raman,
    Stats,
    Charfunc,
    Verify,
    Sweep,
}

impl Command {
    pub const NAMES: [&'static str; 7] = ["channel", "control", "raman", "stats", "charfunc", "verify", "sweep"];

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "channel" => Self::Channel,
            "control" => Self::Control,
            "raman" => Self::Raman,
            "stats" => Self::Stats,
            "charfunc" => Self::Charfunc,
            "verify" => Self::Verify,
            "sweep" => Self::Sweep,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Input,
    AbsorberIn,
    AbsorberOut,
    Output,
}

/// How the absorber strength was specified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "by")]
pub enum Absorption {
    OpticalDepth { mz: f64 },
    Coefficient { r: f64 },
    Atoms { n_occ: f64, gamma: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub command: Command,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

/// Fully resolved and validated configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: C64,
    pub n: usize,
    pub g: f64,
    pub f: f64,
    pub theta: Option<f64>,
    pub absorption: Absorption,
    pub z: f64,
    pub v: f64,
    pub epsilon: i8,
    pub omega: f64,
    pub omega0: f64,
    pub omega_a: Option<f64>,
    pub omega_b: Option<f64>,
    pub n_max: Option<usize>,
    pub cutoff_cap: usize,
    pub margin: usize,
    pub leakage_threshold: f64,
    pub model: AbsorberModel,
    pub second_bs: SecondBeamsplitter,
    pub stage: Stage,
    pub grid_bound: f64,
    pub grid_count: usize,
    pub phase1: f64,
    pub phase2: f64,
    pub atoms: usize,
    pub verify_time: f64,
    pub verify_steps: usize,
    pub sweep: Option<SweepSpec>,
    pub out: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    raw: Raw,
}

/// Where a raw value came from, for diagnostics.
#[derive(Clone, Debug, PartialEq)]
enum Origin {
    Line(usize),
    Flag,
    Sweep,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(l) => write!(f, "line {l}"),
            Origin::Flag => write!(f, "flag"),
            Origin::Sweep => write!(f, "sweep"),
        }
    }
}

type Raw = BTreeMap<String, (String, Origin)>;

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

fn parse_lines(text: &str) -> Result<Raw, CliError> {
    let mut raw = Raw::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| CliError::validation(format!("line {lineno}: expected `key = value`, got `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !known(key) {
            return Err(CliError::validation(format!("line {lineno}: unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(CliError::validation(format!("line {lineno}: `{key}` has no value")));
        }
        if let Some((_, Origin::Line(prev))) = raw.get(key) {
            return Err(CliError::validation(format!(
                "line {lineno}: `{key}` already set on line {prev}"
            )));
        }
        raw.insert(key.to_string(), (value.to_string(), Origin::Line(lineno)));
    }
    Ok(raw)
}

/// Parses a config document and applies flag overrides (in order).
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let mut raw = parse_lines(text)?;
    for (key, value) in overrides {
        if !known(key) {
            return Err(CliError::validation(format!("unknown flag `--{key}`")));
        }
        raw.insert(key.clone(), (value.clone(), Origin::Flag));
    }
    resolve(raw)
}

struct Reader<'a> {
    raw: &'a Raw,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&(String, Origin)> {
        self.raw.get(key)
    }

    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        match self.get(key) {
            Some((v, origin)) => CliError::validation(format!("{origin}: {key} = {v}: {msg}")),
            None => CliError::validation(format!("{key}: {msg}")),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some((v, _)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| self.err(key, "expected a finite number")),
        }
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn int(&self, key: &str) -> Result<Option<i64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some((v, _)) => v
                .parse::<i64>()
                .map(Some)
                .map_err(|_| self.err(key, "expected an integer")),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.int(key)? {
            None => Ok(default),
            Some(x) if x >= 0 => Ok(x as usize),
            Some(_) => Err(self.err(key, format!("violates {key} >= 0"))),
        }
    }

    fn complex(&self, key: &str) -> Result<Option<C64>, CliError> {
        let Some((v, _)) = self.get(key) else {
            return Ok(None);
        };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().ok().filter(|x| x.is_finite());
        let z = match parts.as_slice() {
            [re] => num(re).map(|re| C64::new(re, 0.0)),
            [re, im] => num(re).zip(num(im)).map(|(re, im)| C64::new(re, im)),
            _ => None,
        };
        z.map(Some).ok_or_else(|| self.err(key, "expected `re` or `re,im`"))
    }

    fn choice<T>(&self, key: &str, default: T, options: &[(&str, T)]) -> Result<T, CliError>
    where
        T: Copy,
    {
        match self.get(key) {
            None => Ok(default),
            Some((v, _)) => options
                .iter()
                .find(|(name, _)| *name == v.as_str())
                .map(|(_, t)| *t)
                .ok_or_else(|| {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    self.err(key, format!("expected one of {}", names.join(", ")))
                }),
        }
    }
}

fn command_choices() -> Vec<(&'static str, Command)> {
    Command::NAMES
        .iter()
        .map(|n| (*n, Command::parse(n).expect("listed")))
        .collect()
}

fn resolve(raw: Raw) -> Result<RunConfig, CliError> {
    let r = Reader { raw: &raw };
    let command = match r.get("command") {
        None => return Err(CliError::validation("no command given")),
        Some(_) => r.choice("command", Command::Channel, &command_choices())?,
    };

    let alpha = r.complex("alpha")?.unwrap_or(C64::new(0.0, 0.0));
    let n = r.count("n", 0)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let g = r.float_or("g", h)?;
    let f = r.float_or("f", h)?;
    if g.hypot(f) == 0.0 {
        return Err(r.err("g", "g and f cannot both vanish"));
    }
    let theta = r.float("theta")?;

    let given: Vec<&str> = ["Mz", "R", "N_occ"]
        .into_iter()
        .filter(|k| r.get(k).is_some())
        .collect();
    if given.len() > 1 {
        return Err(CliError::validation(format!(
            "absorber over-specified: set only one of Mz, R, N_occ (got {})",
            given.join(", ")
        )));
    }
    let nonneg = |key: &str, x: f64| -> Result<f64, CliError> {
        if x < 0.0 {
            Err(r.err(key, format!("violates {key} >= 0")))
        } else {
            Ok(x)
        }
    };
    let absorption = if let Some(mz) = r.float("Mz")? {
        Absorption::OpticalDepth { mz: nonneg("Mz", mz)? }
    } else if let Some(coef) = r.float("R")? {
        Absorption::Coefficient { r: nonneg("R", coef)? }
    } else if let Some(n_occ) = r.float("N_occ")? {
        let gamma = r.float_or("gamma", 1.0)?;
        if gamma <= 0.0 {
            return Err(r.err("gamma", "violates gamma > 0"));
        }
        Absorption::Atoms {
            n_occ: nonneg("N_occ", n_occ)?,
            gamma,
        }
    } else {
        Absorption::OpticalDepth { mz: 0.0 }
    };
    if r.get("gamma").is_some() && !matches!(absorption, Absorption::Atoms { .. }) {
        return Err(r.err("gamma", "only used together with N_occ"));
    }
    let z = nonneg("z", r.float_or("z", 1.0)?)?;
    let v = r.float_or("v", 1.0)?;
    if v <= 0.0 {
        return Err(r.err("v", "violates v > 0"));
    }
    if matches!(absorption, Absorption::OpticalDepth { .. }) && (r.get("z").is_some() || r.get("v").is_some()) {
        return Err(CliError::validation(
            "Mz fixes a unit-length medium; give R or N_occ to set z and v",
        ));
    }

    let epsilon = match r.int("epsilon")? {
        None => 0,
        Some(e @ -1..=1) => e as i8,
        Some(_) => return Err(r.err("epsilon", "violates epsilon in {-1, 0, 1}")),
    };
    let omega = nonneg("Omega", r.float_or("Omega", 0.0)?)?;
    let omega0 = r.float_or("omega0", 1.0)?;
    let omega_a = r.float("omega_a")?;
    let omega_b = r.float("omega_b")?;

    let margin = r.count("margin", DEFAULT_MARGIN)?;
    let n_max = match r.int("n_max")? {
        None => None,
        Some(x) if x >= 2 => Some(x as usize),
        Some(_) => return Err(r.err("n_max", "violates n_max >= 2")),
    };
    let cutoff_cap = r.count("cutoff_cap", DEFAULT_CUTOFF_CAP)?;
    let leakage_threshold = r.float_or("leakage_threshold", dfchannel_core::absorber::LEAKAGE_THRESHOLD)?;
    if leakage_threshold <= 0.0 {
        return Err(r.err("leakage_threshold", "violates leakage_threshold > 0"));
    }
    let dt = r.float_or("dt", DEFAULT_DT)?;
    if dt <= 0.0 {
        return Err(r.err("dt", "violates dt > 0"));
    }
    let model = r.choice(
        "model",
        AbsorberModel::Analytic,
        &[
            ("analytic", AbsorberModel::Analytic),
            ("lindblad", AbsorberModel::Lindblad { dt }),
        ],
    )?;
    let second_bs = r.choice(
        "second_bs",
        SecondBeamsplitter::Inverse,
        &[
            ("inverse", SecondBeamsplitter::Inverse),
            ("repeat", SecondBeamsplitter::Repeat),
        ],
    )?;

    let stage = r.choice(
        "stage",
        Stage::Output,
        &[
            ("input", Stage::Input),
            ("absorber_in", Stage::AbsorberIn),
            ("absorber_out", Stage::AbsorberOut),
            ("output", Stage::Output),
        ],
    )?;
    let grid_bound = r.float_or("grid_bound", GRID_BOUND)?;
    if !(0.0..=GRID_BOUND).contains(&grid_bound) {
        return Err(r.err("grid_bound", format!("violates 0 <= grid_bound <= {GRID_BOUND}")));
    }
    let grid_count = r.count("grid_count", 11)?;
    if grid_count == 0 {
        return Err(r.err("grid_count", "violates grid_count >= 1"));
    }
    let phase1 = r.float_or("phase1", 0.0)?;
    let phase2 = r.float_or("phase2", 0.0)?;

    let atoms = r.count("atoms", 2)?;
    let verify_time = nonneg("verify_time", r.float_or("verify_time", 5.0)?)?;
    let verify_steps = r.count("verify_steps", 50)?;

    let sweep = if command == Command::Sweep {
        let param = r
            .get("sweep_param")
            .map(|(v, _)| v.clone())
            .ok_or_else(|| CliError::validation("sweep needs sweep_param"))?;
        if !SWEEPABLE.contains(&param.as_str()) {
            return Err(r.err("sweep_param", format!("expected one of {}", SWEEPABLE.join(", "))));
        }
        let start = r
            .float("sweep_start")?
            .ok_or_else(|| CliError::validation("sweep needs sweep_start"))?;
        let stop = r
            .float("sweep_stop")?
            .ok_or_else(|| CliError::validation("sweep needs sweep_stop"))?;
        let count = r.count("sweep_count", 11)?;
        if count == 0 {
            return Err(r.err("sweep_count", "violates sweep_count >= 1"));
        }
        let inner = r.choice(
            "sweep_command",
            Command::Channel,
            &[
                ("channel", Command::Channel),
                ("control", Command::Control),
                ("raman", Command::Raman),
                ("stats", Command::Stats),
            ],
        )?;
        Some(SweepSpec {
            param,
            start,
            stop,
            count,
            command: inner,
        })
    } else {
        None
    };

    let out = r.get("out").map(|(v, _)| PathBuf::from(v));
    let format = r.choice("format", Format::Json, &[("json", Format::Json), ("csv", Format::Csv)])?;

    let cfg = RunConfig {
        command,
        alpha,
        n,
        g,
        f,
        theta,
        absorption,
        z,
        v,
        epsilon,
        omega,
        omega0,
        omega_a,
        omega_b,
        n_max,
        cutoff_cap,
        margin,
        leakage_threshold,
        model,
        second_bs,
        stage,
        grid_bound,
        grid_count,
        phase1,
        phase2,
        atoms,
        verify_time,
        verify_steps,
        sweep,
        out,
        format,
        raw: raw.clone(),
    };
    cfg.check_physics()?;
    Ok(cfg)
}

/// Keys a sweep may vary.
pub const SWEEPABLE: &[&str] = &["alpha", "n", "g", "f", "theta", "Mz", "R", "N_occ", "z", "Omega", "dt"];

impl RunConfig {
    pub fn scheme(&self) -> Result<SchemeParams, CliError> {
        let s = match self.theta {
            Some(theta) => SchemeParams::with_angle(self.g, self.f, theta),
            None => SchemeParams::matched(self.g, self.f),
        };
        s.map_err(CliError::from_core)
    }

    pub fn absorber(&self, scheme: &SchemeParams) -> Result<AbsorberParams, CliError> {
        let a = match self.absorption {
            Absorption::OpticalDepth { mz } => AbsorberParams::from_optical_depth(mz, scheme),
            Absorption::Coefficient { r } => AbsorberParams::from_coefficient(r, self.z, self.v, scheme),
            Absorption::Atoms { n_occ, gamma } => AbsorberParams::from_atoms(n_occ, gamma, self.z, self.v, scheme),
        };
        a.map_err(CliError::from_core)
    }

    pub fn frequencies(&self) -> Result<FrequencySpec, CliError> {
        let spec = FrequencySpec {
            omega_a: self.omega_a.unwrap_or(self.omega0 + self.epsilon as f64 * self.omega),
            omega_b: self.omega_b.unwrap_or(self.omega0),
            omega_0: self.omega0,
            big_omega: self.omega,
            epsilon: self.epsilon,
        };
        spec.validate().map_err(CliError::from_core)?;
        Ok(spec)
    }

    pub fn options(&self) -> ChannelOptions {
        ChannelOptions {
            cutoff_cap: self.cutoff_cap,
            margin: self.margin,
            n_max: self.n_max,
            leakage_threshold: self.leakage_threshold,
            second_bs: self.second_bs,
        }
    }

    /// Field cutoff for the few-atom verifier.
    pub fn verify_cutoff(&self) -> Result<FockCutoff, CliError> {
        let c = match self.n_max {
            Some(n) => FockCutoff::new(n, self.margin),
            None => FockCutoff::for_input(self.alpha, self.n, MICRO_MAX_CUTOFF, self.margin),
        };
        c.map_err(CliError::from_core)
    }

    /// Checks the invariants owned by the core types that this command uses.
    fn check_physics(&self) -> Result<(), CliError> {
        let command = self.sweep.as_ref().map_or(self.command, |s| s.command);
        let scheme = self.scheme()?;
        self.absorber(&scheme)?;
        if command == Command::Raman {
            self.frequencies()?;
        }
        if matches!(command, Command::Channel | Command::Raman | Command::Charfunc) && !scheme.matched {
            return Err(CliError::validation(format!(
                "theta = {} is not matched to g = {}, f = {} (expected atan2(f, g) = {})",
                scheme.theta,
                self.g,
                self.f,
                self.f.atan2(self.g)
            )));
        }
        if command == Command::Verify && !(1..=3).contains(&self.atoms) {
            return Err(CliError::validation(format!(
                "atoms = {} violates 1 <= atoms <= 3",
                self.atoms
            )));
        }
        Ok(())
    }

    /// The same configuration with one key replaced.
    pub fn with_value(&self, key: &str, value: f64) -> Result<RunConfig, CliError> {
        let text = if key == "n" {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(CliError::validation(format!("sweep value {value} is not a valid n")));
            }
            format!("{}", value as u64)
        } else {
            format!("{value:?}")
        };
        let mut raw = self.raw.clone();
        raw.insert(key.to_string(), (text, Origin::Sweep));
        let inner = self.sweep.as_ref().map_or(self.command, |s| s.command);
        raw.insert(
            "command".into(),
            (Command::NAMES[inner as usize].to_string(), Origin::Sweep),
        );
        for k in [
            "sweep_param",
            "sweep_start",
            "sweep_stop",
            "sweep_count",
            "sweep_command",
        ] {
            raw.remove(k);
        }
        resolve(raw)
    }
}
