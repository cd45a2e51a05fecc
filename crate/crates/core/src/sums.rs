//! Inverse-power lattice sums over a chain, in units of `d0`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;

use crate::chain::IonChain;
use crate::continuum::{chain_length, continuum_sites, min_spacing, spacing_profile, ContinuumModel};
use crate::error::{Error, Result};

/// Number of explicitly summed terms in [`zeta`].
pub const ZETA_TERMS: u64 = 1_000_000;

static ZETA_CACHE: OnceLock<Mutex<HashMap<u32, f64>>> = OnceLock::new();

/// Riemann zeta at an integer `n ≥ 2`: `ZETA_TERMS` terms summed smallest-first, plus
/// the Euler–Maclaurin tail `M^(1−n)/(n−1) − M^(−n)/2 + n M^(−n−1)/12`.
pub fn zeta(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("zeta(n) diverges for n = {n} < 2")));
    }
    let cache = ZETA_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&n) {
        return Ok(v);
    }
    let value = zeta_uncached(n);
    cache.lock().unwrap().insert(n, value);
    Ok(value)
}

fn zeta_uncached(n: u32) -> f64 {
    let e = n as i32;
    let m = ZETA_TERMS as f64;
    let nf = n as f64;
    let tail = m.powi(1 - e) / (nf - 1.0) - 0.5 * m.powi(-e) + nf * m.powi(-e - 1) / 12.0;
    let mut sum = tail;
    for j in (1..=ZETA_TERMS).rev() {
        sum += (j as f64).powi(-e);
    }
    sum
}

fn check_exponent(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("sum exponent must be >= 2, got {n}")));
    }
    Ok(())
}

/// `S_n(i) = Σ_{j≠i} |u_i − u_j|^(−n)`, by direct summation in index order.
pub fn pair_sum_exact(chain: &IonChain, i: usize, n: u32) -> Result<f64> {
    check_exponent(n)?;
    let len = chain.n_ions();
    if i >= len {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    Ok(pair_sum_at(chain.positions(), i, n))
}

fn pair_sum_at(u: &[f64], i: usize, n: u32) -> f64 {
    let e = -(n as i32);
    u.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &uj)| (u[i] - uj).abs().powi(e)).sum()
}

/// `S_n(i)` for every ion of the chain.
pub fn pair_sums(chain: &IonChain, n: u32) -> Result<Vec<f64>> {
    check_exponent(n)?;
    let u = chain.positions();
    Ok((0..u.len()).into_par_iter().map(|i| pair_sum_at(u, i, n)).collect())
}

/// Locally-uniform estimate `2ζ(n)/s^n`.
pub fn pair_sum_approx(s_local: f64, n: u32) -> Result<f64> {
    check_exponent(n)?;
    if !(s_local.is_finite() && s_local > 0.0) {
        return Err(Error::invalid("s_local", format!("must be finite and > 0, got {s_local}")));
    }
    Ok(2.0 * zeta(n)? / s_local.powi(n as i32))
}

/// Where the spacings of a chain total come from.
#[derive(Debug, Clone, Copy)]
pub enum SumSource<'a> {
    /// Local spacings of a solved chain.
    DiscreteChain(&'a IonChain),
    /// The model's spacing profile evaluated at the continuum-predicted ion sites.
    ContinuumProfile { n_ions: usize, model: ContinuumModel },
}

/// `T_n = Σ_i s(z_i)^(−n)`.
pub fn chain_total_exact(source: SumSource<'_>, n: u32) -> Result<f64> {
    check_exponent(n)?;
    let e = -(n as i32);
    match source {
        SumSource::DiscreteChain(chain) => {
            if chain.n_ions() < 2 {
                return Err(Error::Domain("chain totals need at least 2 ions".into()));
            }
            Ok(chain.local_spacings()?.iter().map(|s| s.powi(e)).sum())
        }
        SumSource::ContinuumProfile { n_ions, model } => {
            let l = chain_length(n_ions, model)?;
            continuum_sites(n_ions, model)?
                .iter()
                .map(|z| spacing_profile(z / l, n_ions, model).map(|s| s.powi(e)))
                .sum()
        }
    }
}

/// `√(4π/(4n+7))`, the large-`n` form of the Beta-function factor in the chain-total integral.
pub fn asymptotic_shape_factor(n: u32) -> f64 {
    (4.0 * PI / (4.0 * n as f64 + 7.0)).sqrt()
}

/// Integral estimate `T_n ≈ (L/s₀^(n+1))·√(4π/(4n+7))`.
pub fn chain_total_asymptotic(n_ions: usize, n: u32, model: ContinuumModel) -> Result<f64> {
    check_exponent(n)?;
    let l = chain_length(n_ions, model)?;
    let s0 = min_spacing(n_ions, model)?;
    Ok(l / s0.powi(n as i32 + 1) * asymptotic_shape_factor(n))
}
