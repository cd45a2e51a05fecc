//! Continuum descriptions of a long ion chain.
//!
//! Both models give the same spacing shape `s(z) = s₀/(1 − z²/L²)` and differ only in
//! how the half-length `L` and central spacing `s₀` depend on `N`. All lengths are in
//! units of the trap length `d0`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::physmodel::constants::EULER_GAMMA;

/// Which closed-form chain model to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ContinuumModel {
    /// Nearest-neighbour force balance: `L = (π²N/2)^(1/3)`, `s₀ = 2π²/L²`.
    NearestNeighbor,
    /// Uniformly charged fluid ellipsoid with a discreteness correction:
    /// `L³ = 3N ln(c₀N)`, `s₀ = 4L/(3N)`.
    #[default]
    DubinFluid,
}

impl fmt::Display for ContinuumModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContinuumModel::NearestNeighbor => "nearest-neighbor",
            ContinuumModel::DubinFluid => "dubin",
        })
    }
}

impl FromStr for ContinuumModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dubin" | "dubin-fluid" | "dubinfluid" => Ok(ContinuumModel::DubinFluid),
            "nearest-neighbor" | "nearestneighbor" | "nn" => Ok(ContinuumModel::NearestNeighbor),
            other => Err(format!("unknown continuum model `{other}` (expected dubin or nearest-neighbor)")),
        }
    }
}

/// `c₀ = 6·exp(γ − 13/5) ≈ 0.794`.
pub fn dubin_c0() -> f64 {
    6.0 * (EULER_GAMMA - 13.0 / 5.0).exp()
}

fn check_n(n_ions: usize, model: ContinuumModel) -> Result<()> {
    if n_ions < 2 {
        return Err(Error::Domain(format!("continuum model needs at least 2 ions, got {n_ions}")));
    }
    if model == ContinuumModel::DubinFluid && (dubin_c0() * n_ions as f64).ln() <= 0.0 {
        return Err(Error::Domain(format!("ln(c0 N) <= 0 for N = {n_ions}")));
    }
    Ok(())
}

/// Half-length `L/d0` of the chain.
pub fn chain_length(n_ions: usize, model: ContinuumModel) -> Result<f64> {
    check_n(n_ions, model)?;
    let n = n_ions as f64;
    Ok(match model {
        ContinuumModel::NearestNeighbor => (PI * PI * n / 2.0).cbrt(),
        ContinuumModel::DubinFluid => (3.0 * n * (dubin_c0() * n).ln()).cbrt(),
    })
}

/// Central (minimum) spacing `s₀/d0`.
pub fn min_spacing(n_ions: usize, model: ContinuumModel) -> Result<f64> {
    let l = chain_length(n_ions, model)?;
    Ok(match model {
        ContinuumModel::NearestNeighbor => 2.0 * PI * PI / (l * l),
        ContinuumModel::DubinFluid => 4.0 * l / (3.0 * n_ions as f64),
    })
}

/// Local spacing `s(z)/d0` at `z/L`, valid strictly inside the chain.
pub fn spacing_profile(z_over_l: f64, n_ions: usize, model: ContinuumModel) -> Result<f64> {
    if !(z_over_l.abs() < 1.0) {
        return Err(Error::Domain(format!("|z/L| must be < 1, got {z_over_l}")));
    }
    Ok(min_spacing(n_ions, model)? / (1.0 - z_over_l * z_over_l))
}

/// Cubic cumulative ion count `n(z) = a z − b z³`, with `z` in units of `d0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MJFit {
    pub a: f64,
    pub b: f64,
}

impl MJFit {
    /// Coefficients implied directly by a model's spacing profile:
    /// `∫₀^z (1 − t²/L²)/s₀ dt` gives `a = 1/s₀`, `b = 1/(3 L² s₀)`.
    pub fn from_profile(n_ions: usize, model: ContinuumModel) -> Result<Self> {
        let l = chain_length(n_ions, model)?;
        let s0 = min_spacing(n_ions, model)?;
        Ok(MJFit { a: 1.0 / s0, b: 1.0 / (3.0 * l * l * s0) })
    }

    pub fn count(&self, z: f64) -> f64 {
        self.a * z - self.b * z * z * z
    }

    /// Ion density `dn/dz`.
    pub fn density(&self, z: f64) -> f64 {
        self.a - 3.0 * self.b * z * z
    }

    /// Edge of the monotone branch, where the density vanishes.
    pub fn turning_point(&self) -> f64 {
        (self.a / (3.0 * self.b)).sqrt()
    }

    /// Inverts `n = a z − b z³` on the monotone branch through the origin.
    pub fn position_of(&self, count: f64) -> Result<f64> {
        let c = self.turning_point();
        let arg = 3.0 * count / (2.0 * self.a * c);
        if !(arg.abs() <= 1.0) {
            return Err(Error::Domain(format!(
                "count {count} lies beyond the cubic's maximum {}",
                2.0 * self.a * c / 3.0
            )));
        }
        Ok(2.0 * c * (arg.asin() / 3.0).sin())
    }

    /// Positions of `n_ions` ions, ion `i` at cumulative count `i − (N−1)/2`.
    pub fn sites(&self, n_ions: usize) -> Result<Vec<f64>> {
        let mid = (n_ions as f64 - 1.0) / 2.0;
        (0..n_ions).map(|i| self.position_of(i as f64 - mid)).collect()
    }
}

/// Least-squares fit of `n = a z − b z³` to `(z, n)` samples.
pub fn fit_cubic_count(samples: &[(f64, f64)]) -> Result<MJFit> {
    let (mut s2, mut s4, mut s6, mut nz, mut nz3) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(z, n) in samples {
        let z2 = z * z;
        s2 += z2;
        s4 += z2 * z2;
        s6 += z2 * z2 * z2;
        nz += n * z;
        nz3 += n * z2 * z;
    }
    // [s2 -s4; -s4 s6] [a; b] = [nz; -nz3]
    let det = s2 * s6 - s4 * s4;
    if !(det.is_finite() && det > 1e-12 * s2 * s6) {
        return Err(Error::Fit(format!("singular normal equations (det = {det:e}) from {} samples", samples.len())));
    }
    let a = (nz * s6 - s4 * nz3) / det;
    let b = (s2 * (-nz3) + s4 * nz) / det;
    Ok(MJFit { a, b })
}

/// Number of sample points used by [`fit_mj`].
pub const MJ_SAMPLES: usize = 401;

/// Fits the cubic count to the model's cumulative count sampled on `|z| ≤ 0.95 L`.
pub fn fit_mj(n_ions: usize, model: ContinuumModel) -> Result<MJFit> {
    if n_ions < 25 {
        return Err(Error::Domain(format!("cubic fit needs N >= 25, got {n_ions}")));
    }
    let l = chain_length(n_ions, model)?;
    let s0 = min_spacing(n_ions, model)?;
    let z_max = 0.95 * l;
    let samples: Vec<(f64, f64)> = (0..MJ_SAMPLES)
        .map(|k| {
            let z = -z_max + 2.0 * z_max * k as f64 / (MJ_SAMPLES - 1) as f64;
            (z, (z - z * z * z / (3.0 * l * l)) / s0)
        })
        .collect();
    let fit = fit_cubic_count(&samples)?;
    if !(fit.a > 0.0 && fit.b > 0.0 && fit.density(z_max) > 0.0) {
        return Err(Error::Fit(format!("non-physical coefficients a = {}, b = {}", fit.a, fit.b)));
    }
    Ok(fit)
}

/// Ion positions predicted by inverting the model's cumulative count.
pub fn continuum_sites(n_ions: usize, model: ContinuumModel) -> Result<Vec<f64>> {
    MJFit::from_profile(n_ions, model)?.sites(n_ions)
}
