//! Driven two-level dynamics and the adiabatic phase.
//!
//! A spin with splitting `ω₀` is driven by a weak, slow transverse field
//! `H/ħ = ½ω₀σ_z + f(t)·σ`, `f = (f_x, f_y, 0)`. In the frame co-rotating at `ω₀`
//! the amplitudes obey `i u̇± = e^{±iω₀t} f∓(t) u∓` with `f± = f_x ± i f_y`.
//! Times and frequencies may be in any consistent units.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Transverse drive `f(t)` in angular-frequency units.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveField {
    /// `f = (f_x, f_y, 0)` for all time.
    Constant { fx: f64, fy: f64 },
    /// `f = ε(cos Ωt, sin Ωt, 0)`.
    Circular { amplitude: f64, rate: f64 },
    /// Linear interpolation in a table; held at the end values outside it.
    Sampled { times: Vec<f64>, fx: Vec<f64>, fy: Vec<f64> },
}

/// Weak/slow regime ratios of a drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeFlags {
    /// `max|f|/ω₀`.
    pub strength: f64,
    /// Characteristic variation rate of `f` over `ω₀`.
    pub slowness: f64,
}

impl RegimeFlags {
    pub const WARN_THRESHOLD: f64 = 0.1;

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.strength >= Self::WARN_THRESHOLD {
            out.push(format!("drive is not weak: |f|/omega0 = {}", self.strength));
        }
        if self.slowness >= Self::WARN_THRESHOLD {
            out.push(format!("drive is not slow: rate/omega0 = {}", self.slowness));
        }
        out
    }
}

impl DriveField {
    pub fn zero() -> Self {
        DriveField::Constant { fx: 0.0, fy: 0.0 }
    }

    pub fn sampled(times: Vec<f64>, fx: Vec<f64>, fy: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != fx.len() || times.len() != fy.len() {
            return Err(Error::invalid("times", "sampled drive needs >= 2 rows of equal length"));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::invalid("times", "sample times must be strictly increasing"));
        }
        if times.iter().chain(&fx).chain(&fy).any(|v| !v.is_finite()) {
            return Err(Error::invalid("times", "samples must be finite"));
        }
        Ok(DriveField::Sampled { times, fx, fy })
    }

    /// `(f_x, f_y)` at time `t`.
    pub fn components(&self, t: f64) -> (f64, f64) {
        match self {
            DriveField::Constant { fx, fy } => (*fx, *fy),
            DriveField::Circular { amplitude, rate } => {
                let (s, c) = (rate * t).sin_cos();
                (amplitude * c, amplitude * s)
            }
            DriveField::Sampled { times, fx, fy } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return (fx[0], fy[0]);
                }
                if t >= times[last] {
                    return (fx[last], fy[last]);
                }
                let k = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                (fx[k] + w * (fx[k + 1] - fx[k]), fy[k] + w * (fy[k + 1] - fy[k]))
            }
        }
    }

    /// `f₊ = f_x + i f_y`.
    pub fn f_plus(&self, t: f64) -> Complex64 {
        let (x, y) = self.components(t);
        Complex64::new(x, y)
    }

    pub fn magnitude_sq(&self, t: f64) -> f64 {
        let (x, y) = self.components(t);
        x * x + y * y
    }

    /// `|f|` when it does not depend on time.
    pub fn constant_magnitude(&self) -> Option<f64> {
        match self {
            DriveField::Constant { fx, fy } => Some(fx.hypot(*fy)),
            DriveField::Circular { amplitude, .. } => Some(amplitude.abs()),
            DriveField::Sampled { .. } => None,
        }
    }

    pub fn regime(&self, omega0: f64) -> RegimeFlags {
        match self {
            DriveField::Constant { fx, fy } => RegimeFlags { strength: fx.hypot(*fy) / omega0, slowness: 0.0 },
            DriveField::Circular { amplitude, rate } => {
                RegimeFlags { strength: amplitude.abs() / omega0, slowness: rate.abs() / omega0 }
            }
            DriveField::Sampled { times, fx, fy } => {
                let peak = fx.iter().zip(fy).map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
                let max_slope = (1..times.len())
                    .map(|k| {
                        let dt = times[k] - times[k - 1];
                        (fx[k] - fx[k - 1]).hypot(fy[k] - fy[k - 1]) / dt
                    })
                    .fold(0.0, f64::max);
                let slowness = if peak > 0.0 { max_slope / peak / omega0 } else { 0.0 };
                RegimeFlags { strength: peak / omega0, slowness }
            }
        }
    }
}

/// Stored amplitudes `u±` on a decimated time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTrajectory {
    pub times: Vec<f64>,
    pub up: Vec<Complex64>,
    pub down: Vec<Complex64>,
    /// Largest `| |u₊|² + |u₋|² − 1 |` seen over all steps.
    pub norm_drift: f64,
}

impl SpinTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norm_at(&self, k: usize) -> f64 {
        self.up[k].norm_sqr() + self.down[k].norm_sqr()
    }
}

/// Integrations abort when the norm drifts further than this.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

// Dormand–Prince 5(4) tableau; only the fifth-order solution is used.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

type State = [Complex64; 2];

fn rhs(omega0: f64, drive: &DriveField, t: f64, u: &State) -> State {
    let phase = Complex64::from_polar(1.0, omega0 * t);
    let fp = drive.f_plus(t);
    let fm = fp.conj();
    let minus_i = Complex64::new(0.0, -1.0);
    [minus_i * phase * fm * u[1], minus_i * phase.conj() * fp * u[0]]
}

fn axpy(u: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *u;
    for (c, k) in terms {
        out[0] += k[0] * (h * c);
        out[1] += k[1] * (h * c);
    }
    out
}

fn dopri_step(omega0: f64, drive: &DriveField, t: f64, u: &State, h: f64) -> State {
    let k1 = rhs(omega0, drive, t, u);
    let k2 = rhs(omega0, drive, t + C2 * h, &axpy(u, &[(A21, &k1)], h));
    let k3 = rhs(omega0, drive, t + C3 * h, &axpy(u, &[(A31, &k1), (A32, &k2)], h));
    let k4 = rhs(omega0, drive, t + C4 * h, &axpy(u, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
    let k5 = rhs(omega0, drive, t + C5 * h, &axpy(u, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = rhs(omega0, drive, t + h, &axpy(u, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h));
    axpy(u, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h)
}

/// Integrates the rotating-frame amplitudes from `t = 0` to `t_end` with a fixed step no
/// larger than `dt`, storing every `store_every`-th step plus both end points.
pub fn integrate_tls(
    omega0: f64,
    drive: &DriveField,
    initial: [Complex64; 2],
    t_end: f64,
    dt: f64,
    store_every: usize,
) -> Result<SpinTrajectory> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::invalid("omega0", "must be finite and > 0"));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::invalid("t_end", "must be finite and >= 0"));
    }
    let limit = 0.1 / omega0;
    if !(dt > 0.0) || dt > limit {
        return Err(Error::StepSize { dt, limit });
    }
    if store_every == 0 {
        return Err(Error::invalid("store_every", "must be >= 1"));
    }
    let norm0 = initial[0].norm_sqr() + initial[1].norm_sqr();
    if (norm0 - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("initial", format!("state must be normalized, |u|^2 = {norm0}")));
    }

    let steps = (t_end / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut traj = SpinTrajectory { times: vec![0.0], up: vec![initial[0]], down: vec![initial[1]], norm_drift: 0.0 };
    let mut u = initial;
    for k in 1..=steps {
        let t = (k - 1) as f64 * h;
        u = dopri_step(omega0, drive, t, &u, h);
        let drift = (u[0].norm_sqr() + u[1].norm_sqr() - 1.0).abs();
        traj.norm_drift = traj.norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::Accuracy { drift, limit: NORM_DRIFT_LIMIT });
        }
        if k % store_every == 0 || k == steps {
            traj.times.push(k as f64 * h);
            traj.up.push(u[0]);
            traj.down.push(u[1]);
        }
    }
    Ok(traj)
}

/// `Φ(t) = ∫₀^t |f|²/ω₀ dt'`.
///
/// Closed form for constant-magnitude drives. Sampled drives have a piecewise quadratic
/// `|f|²`, which Simpson's rule integrates exactly segment by segment.
pub fn adiabatic_phase(drive: &DriveField, omega0: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "must be >= 0"));
    }
    if !(omega0 > 0.0) {
        return Err(Error::invalid("omega0", "must be > 0"));
    }
    if let Some(mag) = drive.constant_magnitude() {
        return Ok(mag * mag * t / omega0);
    }
    let DriveField::Sampled { times, .. } = drive else { unreachable!() };
    let simpson = |a: f64, b: f64| {
        (b - a) / 6.0 * (drive.magnitude_sq(a) + 4.0 * drive.magnitude_sq(0.5 * (a + b)) + drive.magnitude_sq(b))
    };
    // Breakpoints: 0, every interior sample time below t, t.
    let mut knots = vec![0.0];
    knots.extend(times.iter().copied().filter(|&s| s > 0.0 && s < t));
    knots.push(t);
    let integral: f64 = knots.windows(2).map(|w| simpson(w[0], w[1])).sum();
    Ok(integral / omega0)
}

/// `Re⟨ψ₀(t)|ψ(t)⟩` along a trajectory that starts in `(|+⟩ + |−⟩)/√2`, where `ψ₀`
/// evolves without the drive. The `e^{∓iω₀t/2}` factors are common to both states.
pub fn overlap_fidelity(trajectory: &SpinTrajectory) -> Result<Vec<f64>> {
    if trajectory.is_empty() {
        return Err(Error::invalid("trajectory", "empty trajectory"));
    }
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let start = Complex64::new(half, 0.0);
    if (trajectory.up[0] - start).norm() > 1e-12 || (trajectory.down[0] - start).norm() > 1e-12 {
        return Err(Error::invalid("trajectory", "overlap formula assumes the initial state u+ = u- = 1/sqrt(2)"));
    }
    Ok(trajectory.up.iter().zip(&trajectory.down).map(|(a, b)| (start.conj() * a + start.conj() * b).re).collect())
}

/// Precession frequency of a spin in a combined longitudinal and transverse field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantaneousFrequency {
    /// `(ω₀² + (V/ħ)²)^(1/2)`.
    pub exact: f64,
    /// `ω₀ + (V/ħ)²/(2ω₀)`.
    pub second_order: f64,
}

/// `coupling` is the transverse field energy divided by `ħ`.
pub fn instantaneous_frequency(omega0: f64, coupling: f64) -> InstantaneousFrequency {
    InstantaneousFrequency {
        exact: omega0.hypot(coupling),
        second_order: omega0 + coupling * coupling / (2.0 * omega0),
    }
}
