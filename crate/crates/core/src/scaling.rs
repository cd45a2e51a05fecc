//! How the vibrational rate grows with `N` under two ways of operating the trap.

use std::fmt;
use std::str::FromStr;

use crate::continuum::{dubin_c0, min_spacing, ContinuumModel};
use crate::decoherence::closed_form_rate;
use crate::error::{Error, Result};
use crate::physmodel::{coulomb_q2, radiative_time, trap_length, IonSpecies, Multipole, TrapConfig};

/// Asymptotic exponents for comparison with fitted slopes.
pub mod reference {
    /// Fixed trap voltages, E2: `N^(35/6) (ln N)^(−8/3)`.
    pub const FIXED_VOLTAGE_E2: f64 = 35.0 / 6.0;
    pub const FIXED_VOLTAGE_E2_LOG_POWER: f64 = -8.0 / 3.0;
    /// Fixed trap voltages, E1: `N^(9/2) (ln N)^(−2)`.
    pub const FIXED_VOLTAGE_E1: f64 = 4.5;
    pub const FIXED_VOLTAGE_E1_LOG_POWER: f64 = -2.0;
    /// Quoted for fixed spacing, E2: `N^(5/2)/ln N`. The self-consistent pipeline does not
    /// reproduce it; it is kept for side-by-side reporting.
    pub const FIXED_SPACING_E2_QUOTED: f64 = 2.5;
    pub const FIXED_SPACING_E2_QUOTED_LOG_POWER: f64 = -1.0;
}

/// What is held constant while `N` grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingPolicy {
    /// Central spacing held at `s0_target` meters by lowering `ω_z`; `ω_t` fixed.
    FixedSpacing { s0_target: f64 },
    /// `ω_z` and `ω_t` held at the base trap's values.
    FixedVoltage,
}

impl ScalingPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            ScalingPolicy::FixedSpacing { .. } => "fixed-spacing",
            ScalingPolicy::FixedVoltage => "fixed-voltage",
        }
    }

    /// Reference `(slope, log power)` for this policy and multipole, when one is known.
    pub fn reference_exponent(&self, multipole: Multipole) -> Option<(f64, f64)> {
        use reference::*;
        match (self, multipole) {
            (ScalingPolicy::FixedVoltage, Multipole::E2) => Some((FIXED_VOLTAGE_E2, FIXED_VOLTAGE_E2_LOG_POWER)),
            (ScalingPolicy::FixedVoltage, Multipole::E1) => Some((FIXED_VOLTAGE_E1, FIXED_VOLTAGE_E1_LOG_POWER)),
            (ScalingPolicy::FixedSpacing { .. }, Multipole::E2) => {
                Some((FIXED_SPACING_E2_QUOTED, FIXED_SPACING_E2_QUOTED_LOG_POWER))
            }
            (ScalingPolicy::FixedSpacing { .. }, Multipole::E1) => None,
        }
    }
}

impl fmt::Display for ScalingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Policy kind without its held values, for parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    FixedSpacing,
    FixedVoltage,
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed-spacing" | "spacing" => Ok(PolicyKind::FixedSpacing),
            "fixed-voltage" | "voltage" => Ok(PolicyKind::FixedVoltage),
            other => Err(format!("unknown policy `{other}` (expected fixed-spacing or fixed-voltage)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n_ions: usize,
    /// Axial angular frequency, rad/s.
    pub omega_z: f64,
    /// Meters.
    pub d0: f64,
    /// Central spacing, meters.
    pub s0: f64,
    /// Vibrational rate `τ_vib⁻¹`, s⁻¹.
    pub rate_vib: f64,
    /// Radiative rate `τ_rad⁻¹ = N/(2τ_s)`, s⁻¹.
    pub rate_rad: f64,
}

/// Least-squares slope of `ln(rate)` against `ln N` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries {
    pub policy: ScalingPolicy,
    pub multipole: Multipole,
    pub model: ContinuumModel,
    /// Sorted by `n_ions`.
    pub rows: Vec<ScalingRow>,
    /// Effective exponent without log correction, when the rows support a fit.
    pub effective: Option<ExponentFit>,
}

/// Logarithmic factor divided out of the rates before fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogCorrection {
    None,
    /// Divide by `(ln(c₀N))^c`, `c₀` the fluid-model constant.
    LogPower(f64),
}

/// Default grid density.
pub const POINTS_PER_DECADE: usize = 16;

/// Integer `N` values spaced evenly in `ln N` from `n_min` to `n_max` inclusive, deduplicated.
pub fn log_grid(n_min: usize, n_max: usize, per_decade: usize) -> Result<Vec<usize>> {
    if n_min < 2 || n_max < n_min {
        return Err(Error::invalid("n_min", format!("need 2 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    if per_decade == 0 {
        return Err(Error::invalid("points_per_decade", "must be >= 1"));
    }
    let decades = (n_max as f64 / n_min as f64).log10();
    let steps = ((decades * per_decade as f64).round() as usize).max(1);
    let mut out: Vec<usize> =
        (0..=steps).map(|k| (n_min as f64 * 10f64.powf(decades * k as f64 / steps as f64)).round() as usize).collect();
    out.dedup();
    Ok(out)
}

/// Axial frequency at which the model's central spacing equals `s0_target` meters,
/// found by bisection in `ln ω_z` on `(10⁻⁹ ω_t, ω_t)`.
pub fn axial_frequency_for_spacing(
    n_ions: usize,
    s0_target: f64,
    species: &IonSpecies,
    omega_t: f64,
    model: ContinuumModel,
) -> Result<f64> {
    if !(s0_target.is_finite() && s0_target > 0.0) {
        return Err(Error::invalid("s0_target", "must be finite and > 0"));
    }
    let q2 = coulomb_q2(species.charge);
    let s0_dimless = min_spacing(n_ions, model)?;
    let spacing = |ln_w: f64| s0_dimless * trap_length(q2, species.mass, ln_w.exp());
    // spacing decreases with ω_z
    let mut hi = omega_t.ln();
    let mut lo = hi - 9.0 * std::f64::consts::LN_10;
    if spacing(hi) >= s0_target {
        return Err(Error::RootSolve(format!("spacing {s0_target:e} m for N = {n_ions} needs omega_z >= omega_t")));
    }
    if spacing(lo) < s0_target {
        return Err(Error::RootSolve(format!(
            "spacing {s0_target:e} m for N = {n_ions} needs omega_z below 1e-9 omega_t"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spacing(mid) > s0_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Evaluates rates along `n_values` (sorted and deduplicated first).
pub fn scan(
    policy: ScalingPolicy,
    n_values: &[usize],
    species: &IonSpecies,
    base_trap: &TrapConfig,
    model: ContinuumModel,
) -> Result<ScalingSeries> {
    species.validate()?;
    base_trap.validate()?;
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() || ns[0] < 2 {
        return Err(Error::invalid("n_values", "need at least one N, each >= 2"));
    }
    let q2 = coulomb_q2(species.charge);
    let rows = ns
        .iter()
        .map(|&n| {
            let omega_z = match policy {
                ScalingPolicy::FixedVoltage => base_trap.omega_z,
                ScalingPolicy::FixedSpacing { s0_target } => {
                    axial_frequency_for_spacing(n, s0_target, species, base_trap.omega_t, model)?
                }
            };
            let trap = TrapConfig { omega_z, omega_t: base_trap.omega_t, n_ions: n };
            let d0 = trap_length(q2, species.mass, omega_z);
            Ok(ScalingRow {
                n_ions: n,
                omega_z,
                d0,
                s0: min_spacing(n, model)? * d0,
                rate_vib: closed_form_rate(n, species, &trap, model)?.full,
                rate_rad: 1.0 / radiative_time(species, n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut series = ScalingSeries { policy, multipole: species.multipole, model, rows, effective: None };
    series.effective = fit_exponent(&series, LogCorrection::None).ok();
    Ok(series)
}

/// Slope of `ln(rate_vib)` against `ln N`.
pub fn fit_exponent(series: &ScalingSeries, correction: LogCorrection) -> Result<ExponentFit> {
    let points: Vec<(f64, f64)> = series
        .rows
        .iter()
        .map(|r| {
            let n = r.n_ions as f64;
            let y = match correction {
                LogCorrection::None => r.rate_vib.ln(),
                LogCorrection::LogPower(c) => r.rate_vib.ln() - c * (dubin_c0() * n).ln().ln(),
            };
            (n.ln(), y)
        })
        .collect();
    fit_log_slope(&points)
}

/// Ordinary least squares on `(ln N, ln y)` pairs; needs 4 points over at least a decade.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 4 {
        return Err(Error::Fit(format!("need >= 4 rows, got {}", points.len())));
    }
    let (min_x, max_x) =
        points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    if max_x - min_x < std::f64::consts::LN_10 * (1.0 - 1e-12) {
        return Err(Error::Fit("rows must span at least one decade in N".into()));
    }
    if points.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
        return Err(Error::Fit("non-finite rate in series".into()));
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (sse / (m - 2.0) / sxx).sqrt();
    Ok(ExponentFit { slope, stderr })
}
