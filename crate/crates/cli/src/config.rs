//! Sectioned `key = value` run configuration.
//!
//! ```text
//! [species]
//! name = Ba+
//! mass_amu = 137.33
//! ...
//! [trap]
//! fz_hz = 1e5
//! ```
//!
//! Lines starting with `#` or `;` are comments. Keys are case-sensitive; a key may appear
//! once per document. Physical values are converted to SI on load.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use iontrap_core::chain::MAX_IONS;
use iontrap_core::physmodel::constants::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};
use iontrap_core::scaling::PolicyKind;
use iontrap_core::{ContinuumModel, IonSpecies, Multipole, RateMode, SolverOptions, TrapConfig};

use crate::error::ConfigError;

/// Text of the bundled `ba_example` preset.
pub const BA_EXAMPLE: &str = "\
# Ba+ with the 6s-5d quadrupole qubit in a 100 kHz / 20 MHz linear trap.
[species]
name = Ba+
mass_amu = 137.33
charge_e = 1
f0_hz = 1.7e14
tau_s_s = 50
multipole = E2

[trap]
fz_hz = 1e5
ft_hz = 2e7
n_ions = 1000
";

/// Names accepted by `--preset`.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "ba_example" => Some(BA_EXAMPLE),
        _ => None,
    }
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("species", &["name", "mass_amu", "charge_e", "f0_hz", "tau_s_s", "multipole"]),
    ("trap", &["fz_hz", "ft_hz", "n_ions"]),
    ("model", &["continuum", "qsq_constant", "solver_tolerance", "solver_max_iterations"]),
    ("adiabatic", &["eps_over_omega0", "rate_over_omega0", "omega0_t_end", "dt_omega0", "store_every"]),
    ("sums", &["exponent"]),
    ("continuum", &["samples"]),
    ("decohere", &["mode"]),
    ("scaling", &["policy", "n_min", "n_max", "points_per_decade", "s0_target_m"]),
];

const REQUIRED: &[&str] = &["species", "trap"];

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    pub continuum: ContinuumModel,
    pub solver: SolverOptions,
}

/// Two-level run in units where `ω₀ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticOptions {
    pub eps_over_omega0: f64,
    pub rate_over_omega0: f64,
    /// Defaults to the time at which `Φ = π/2`.
    pub omega0_t_end: f64,
    pub dt_omega0: f64,
    /// Defaults to about 1000 stored rows.
    pub store_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumsOptions {
    pub exponent: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumOptions {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecohereOptions {
    pub mode: RateMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOptions {
    pub policy: PolicyKind,
    pub n_min: usize,
    pub n_max: usize,
    pub points_per_decade: usize,
    /// Held central spacing in meters; defaults to the base trap's own `s₀`.
    pub s0_target_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub species: IonSpecies,
    pub trap: TrapConfig,
    pub model: ModelOptions,
    pub adiabatic: AdiabaticOptions,
    pub sums: SumsOptions,
    pub continuum: ContinuumOptions,
    pub decohere: DecohereOptions,
    pub scaling: ScalingOptions,
}

/// One value to set on top of the document, as `(section, key, value)`.
pub type Override = (&'static str, &'static str, String);

type Document = BTreeMap<String, BTreeMap<String, String>>;

fn tokenize(text: &str) -> Result<Document, ConfigError> {
    let mut doc = Document::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name =
                rest.strip_suffix(']').ok_or_else(|| ConfigError::parse(line, "section header is missing `]`"))?.trim();
            if name.is_empty() {
                return Err(ConfigError::parse(line, "empty section name"));
            }
            if !SCHEMA.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::UnknownSection { line, section: name.to_string() });
            }
            if doc.contains_key(name) {
                return Err(ConfigError::parse(line, format!("section [{name}] appears twice")));
            }
            doc.insert(name.to_string(), BTreeMap::new());
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::parse(line, format!("expected `key = value`, found `{trimmed}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::parse(line, "missing key before `=`"));
        }
        let Some(section) = &current else {
            return Err(ConfigError::parse(line, format!("key `{key}` appears before any section")));
        };
        let allowed = SCHEMA.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey { line, section: section.clone(), key: key.to_string() });
        }
        let table = doc.get_mut(section).expect("current section exists");
        if table.contains_key(key) {
            return Err(ConfigError::parse(line, format!("key `{key}` repeated in [{section}]")));
        }
        table.insert(key.to_string(), value.to_string());
    }
    Ok(doc)
}

/// Typed access to one section, tracking which field a failure belongs to.
struct Section<'a> {
    name: &'static str,
    table: Option<&'a BTreeMap<String, String>>,
}

impl Section<'_> {
    fn raw(&self, key: &'static str) -> Option<&str> {
        self.table.and_then(|t| t.get(key)).map(String::as_str)
    }

    fn required(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.raw(key).ok_or(ConfigError::MissingKey { section: self.name, key })
    }

    fn invalid(&self, key: &'static str, reason: impl Into<String>) -> ConfigError {
        ConfigError::Invalid { section: self.name, field: key, reason: reason.into() }
    }

    fn parse_f64(&self, key: &'static str, text: &str) -> Result<f64, ConfigError> {
        let v: f64 = text.parse().map_err(|_| self.invalid(key, format!("`{text}` is not a number")))?;
        if !v.is_finite() {
            return Err(self.invalid(key, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self, key: &'static str, text: &str) -> Result<f64, ConfigError> {
        let v = self.parse_f64(key, text)?;
        if v <= 0.0 {
            return Err(self.invalid(key, format!("must be > 0, got {text}")));
        }
        Ok(v)
    }

    fn non_negative(&self, key: &'static str, text: &str) -> Result<f64, ConfigError> {
        let v = self.parse_f64(key, text)?;
        if v < 0.0 {
            return Err(self.invalid(key, format!("must be >= 0, got {text}")));
        }
        Ok(v)
    }

    fn integer(&self, key: &'static str, text: &str, min: usize, max: usize) -> Result<usize, ConfigError> {
        let v: usize =
            text.parse().map_err(|_| self.invalid(key, format!("`{text}` is not a non-negative integer")))?;
        if v < min || v > max {
            return Err(self.invalid(key, format!("must be in {min}..={max}, got {v}")));
        }
        Ok(v)
    }

    fn parsed<T>(&self, key: &'static str, text: &str) -> Result<T, ConfigError>
    where
        T: std::str::FromStr<Err = String>,
    {
        text.parse().map_err(|e: String| self.invalid(key, e))
    }

    fn positive_or(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        self.raw(key).map_or(Ok(default), |t| self.positive(key, t))
    }

    fn integer_or(&self, key: &'static str, default: usize, min: usize, max: usize) -> Result<usize, ConfigError> {
        self.raw(key).map_or(Ok(default), |t| self.integer(key, t, min, max))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// Parses a document, then applies `overrides` before validation.
pub fn parse_config_with(text: &str, overrides: &[Override]) -> Result<RunConfig, ConfigError> {
    let mut doc = tokenize(text)?;
    let missing: Vec<&str> = REQUIRED.iter().copied().filter(|s| !doc.contains_key(*s)).collect();
    if !missing.is_empty() {
        return Err(ConfigError::MissingSection(missing.iter().map(|s| format!("[{s}]")).collect()));
    }
    for (section, key, value) in overrides {
        doc.entry(section.to_string()).or_default().insert(key.to_string(), value.clone());
    }
    let section = |name: &'static str| Section { name, table: doc.get(name) };

    let model_sec = section("model");
    let species = read_species(&section("species"), &model_sec)?;
    let trap = read_trap(&section("trap"))?;
    let model = read_model(&model_sec)?;
    let adiabatic = read_adiabatic(&section("adiabatic"))?;

    let sums_sec = section("sums");
    let sums = SumsOptions { exponent: sums_sec.integer_or("exponent", 8, 2, 64)? as u32 };

    let cont_sec = section("continuum");
    let continuum = ContinuumOptions { samples: cont_sec.integer_or("samples", 201, 2, 1_000_000)? };

    let dec_sec = section("decohere");
    let mode = dec_sec.raw("mode").map_or(Ok(RateMode::default()), |t| dec_sec.parsed("mode", t))?;

    let scaling = read_scaling(&section("scaling"))?;

    Ok(RunConfig { species, trap, model, adiabatic, sums, continuum, decohere: DecohereOptions { mode }, scaling })
}

fn read_species(sec: &Section<'_>, model: &Section<'_>) -> Result<IonSpecies, ConfigError> {
    let name = sec.required("name")?.to_string();
    if name.is_empty() {
        return Err(sec.invalid("name", "must not be empty"));
    }
    let mass = sec.positive("mass_amu", sec.required("mass_amu")?)? * ATOMIC_MASS_UNIT;
    let charge = sec.positive("charge_e", sec.required("charge_e")?)? * ELEMENTARY_CHARGE;
    let omega0 = 2.0 * PI * sec.positive("f0_hz", sec.required("f0_hz")?)?;
    let tau_s = sec.positive("tau_s_s", sec.required("tau_s_s")?)?;
    let multipole: Multipole = sec.parsed("multipole", sec.required("multipole")?)?;
    let moment_constant = model.positive_or("qsq_constant", 1.0)?;
    Ok(IonSpecies { name, mass, charge, omega0, tau_s, multipole, moment_constant })
}

fn read_trap(sec: &Section<'_>) -> Result<TrapConfig, ConfigError> {
    let fz = sec.positive("fz_hz", sec.required("fz_hz")?)?;
    let ft = sec.positive("ft_hz", sec.required("ft_hz")?)?;
    if ft <= fz {
        return Err(sec.invalid("ft_hz", format!("transverse frequency {ft} Hz must exceed fz_hz = {fz} Hz")));
    }
    let n_ions = sec.integer("n_ions", sec.required("n_ions")?, 1, MAX_IONS)?;
    Ok(TrapConfig { omega_z: 2.0 * PI * fz, omega_t: 2.0 * PI * ft, n_ions })
}

fn read_model(sec: &Section<'_>) -> Result<ModelOptions, ConfigError> {
    let continuum = sec.raw("continuum").map_or(Ok(ContinuumModel::default()), |t| sec.parsed("continuum", t))?;
    let defaults = SolverOptions::default();
    let solver = SolverOptions {
        tolerance: sec.positive_or("solver_tolerance", defaults.tolerance)?,
        max_iterations: sec.integer_or("solver_max_iterations", defaults.max_iterations, 1, 100_000)?,
    };
    Ok(ModelOptions { continuum, solver })
}

fn read_adiabatic(sec: &Section<'_>) -> Result<AdiabaticOptions, ConfigError> {
    let eps = sec.raw("eps_over_omega0").map_or(Ok(0.01), |t| sec.non_negative("eps_over_omega0", t))?;
    let rate = sec.raw("rate_over_omega0").map_or(Ok(0.001), |t| sec.non_negative("rate_over_omega0", t))?;
    let t_end = match sec.raw("omega0_t_end") {
        Some(t) => sec.positive("omega0_t_end", t)?,
        None if eps > 0.0 => 0.5 * PI / (eps * eps),
        None => return Err(sec.invalid("omega0_t_end", "required when eps_over_omega0 = 0")),
    };
    let dt = sec.positive_or("dt_omega0", 0.05)?;
    if dt > 0.1 {
        return Err(sec.invalid("dt_omega0", format!("must be <= 0.1, got {dt}")));
    }
    let steps = (t_end / dt).ceil().max(1.0);
    let default_every = (steps / 1000.0).ceil().max(1.0) as usize;
    let store_every = sec.integer_or("store_every", default_every, 1, usize::MAX)?;
    Ok(AdiabaticOptions {
        eps_over_omega0: eps,
        rate_over_omega0: rate,
        omega0_t_end: t_end,
        dt_omega0: dt,
        store_every,
    })
}

fn read_scaling(sec: &Section<'_>) -> Result<ScalingOptions, ConfigError> {
    let policy = sec.raw("policy").map_or(Ok(PolicyKind::FixedVoltage), |t| sec.parsed("policy", t))?;
    let n_min = sec.integer_or("n_min", 1000, 2, usize::MAX)?;
    let n_max = sec.integer_or("n_max", 10_000, 2, usize::MAX)?;
    if n_max < n_min {
        return Err(sec.invalid("n_max", format!("must be >= n_min = {n_min}, got {n_max}")));
    }
    let points_per_decade = sec.integer_or("points_per_decade", 16, 1, 10_000)?;
    let s0_target_m = sec.raw("s0_target_m").map(|t| sec.positive("s0_target_m", t)).transpose()?;
    Ok(ScalingOptions { policy, n_min, n_max, points_per_decade, s0_target_m })
}
