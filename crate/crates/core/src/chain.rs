//! Exact equilibrium of `N` ions in a harmonic axial well.
//!
//! Positions are dimensionless, `u_i = z_i/d0`. In these units the force on ion `i` is
//! `g_i = u_i − Σ_{j<i} (u_i−u_j)⁻² + Σ_{j>i} (u_j−u_i)⁻²`, the gradient of
//! `E = ½Σu_i² + Σ_{i<j} 1/(u_j−u_i)`. `E` is strictly convex on ordered configurations,
//! so a damped Newton iteration from any ordered start converges to the unique minimum.

use rayon::prelude::*;

use crate::continuum::{chain_length, continuum_sites, ContinuumModel};
use crate::error::{Error, Result};

/// Largest chain the solver accepts.
pub const MAX_IONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Bound on the scale-relative force imbalance (see [`IonChain::relative_residual`]).
    pub tolerance: f64,
    /// Newton iteration budget.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-12, max_iterations: 200 }
    }
}

/// Equilibrium positions of an ion chain in units of `d0`, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct IonChain {
    positions: Vec<f64>,
    residual: f64,
    relative_residual: f64,
}

impl IonChain {
    /// Wraps arbitrary strictly increasing positions, computing their force residual.
    pub fn from_positions(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("positions", "chain must hold at least one ion"));
        }
        if positions.iter().any(|u| !u.is_finite()) {
            return Err(Error::invalid("positions", "positions must be finite"));
        }
        if !is_strictly_increasing(&positions) {
            return Err(Error::invalid("positions", "positions must be strictly increasing"));
        }
        let (residual, relative_residual) = residuals(&positions);
        Ok(IonChain { positions, residual, relative_residual })
    }

    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Largest absolute force imbalance `max_i |g_i|`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Largest imbalance relative to the forces being balanced,
    /// `max_i |g_i| / (1 + |u_i| + Σ_j (u_i−u_j)⁻²)`.
    pub fn relative_residual(&self) -> f64 {
        self.relative_residual
    }

    /// Local spacing around ion `i` (0-based): the mean of the two adjacent gaps, or
    /// the single gap for an end ion.
    pub fn local_spacing(&self, i: usize) -> Result<f64> {
        let n = self.n_ions();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if n < 2 {
            return Err(Error::Domain("local spacing needs at least 2 ions".into()));
        }
        let u = &self.positions;
        Ok(if i == 0 {
            u[1] - u[0]
        } else if i == n - 1 {
            u[n - 1] - u[n - 2]
        } else {
            0.5 * (u[i + 1] - u[i - 1])
        })
    }

    pub fn local_spacings(&self) -> Result<Vec<f64>> {
        (0..self.n_ions()).map(|i| self.local_spacing(i)).collect()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Gap between the two middle ions (even `N`) or the local spacing of the middle ion (odd `N`).
    pub fn central_spacing(&self) -> Result<f64> {
        let n = self.n_ions();
        if n < 2 {
            return Err(Error::Domain("central spacing needs at least 2 ions".into()));
        }
        if n.is_multiple_of(2) {
            Ok(self.positions[n / 2] - self.positions[n / 2 - 1])
        } else {
            self.local_spacing(n / 2)
        }
    }
}

fn is_strictly_increasing(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[1] > w[0])
}

/// Net dimensionless force `g_i` on every ion. Each entry is summed in fixed index order.
pub fn force_imbalance(positions: &[f64]) -> Vec<f64> {
    (0..positions.len()).into_par_iter().map(|i| force_on(positions, i).0).collect()
}

/// Returns `(g_i, Σ_j (u_i−u_j)⁻²)`.
fn force_on(u: &[f64], i: usize) -> (f64, f64) {
    let ui = u[i];
    let mut left = 0.0;
    for &uj in &u[..i] {
        let d = ui - uj;
        left += 1.0 / (d * d);
    }
    let mut right = 0.0;
    for &uj in &u[i + 1..] {
        let d = uj - ui;
        right += 1.0 / (d * d);
    }
    (ui - left + right, left + right)
}

fn residuals(u: &[f64]) -> (f64, f64) {
    let per_ion: Vec<(f64, f64)> = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let (g, gross) = force_on(u, i);
            (g.abs(), g.abs() / (1.0 + u[i].abs() + gross))
        })
        .collect();
    per_ion.iter().fold((0.0f64, 0.0f64), |(a, r), &(g, gr)| (a.max(g), r.max(gr)))
}

/// Largest absolute force imbalance of a chain.
pub fn residual_force(chain: &IonChain) -> f64 {
    residuals(chain.positions()).0
}

/// Dimensionless potential energy `½Σu_i² + Σ_{i<j} 1/|u_i−u_j|`.
pub fn potential_energy(positions: &[f64]) -> f64 {
    let n = positions.len();
    let mut energy = 0.0;
    for i in 0..n {
        energy += 0.5 * positions[i] * positions[i];
        for j in i + 1..n {
            energy += 1.0 / (positions[j] - positions[i]).abs();
        }
    }
    energy
}

pub fn solve_equilibrium(n_ions: usize) -> Result<IonChain> {
    solve_equilibrium_with(n_ions, &SolverOptions::default())
}

pub fn solve_equilibrium_with(n_ions: usize, opts: &SolverOptions) -> Result<IonChain> {
    if n_ions == 0 || n_ions > MAX_IONS {
        return Err(Error::invalid("n_ions", format!("must be in 1..={MAX_IONS}, got {n_ions}")));
    }
    if !(opts.tolerance > 0.0) {
        return Err(Error::invalid("tolerance", "must be > 0"));
    }
    if n_ions == 1 {
        return IonChain::from_positions(vec![0.0]);
    }

    let mut u = initial_guess(n_ions)?;
    let mut g = force_imbalance(&u);
    let mut best = residuals(&u);

    // Keep polishing past the relative test until the absolute residual meets the
    // tolerance or no descent is left.
    for _ in 0..opts.max_iterations {
        if best.0 <= opts.tolerance {
            break;
        }
        let step = newton_step(&u, &g);
        let g_norm = norm(&g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
            if is_strictly_increasing(&trial) {
                let trial = symmetrize(trial);
                let g_trial = force_imbalance(&trial);
                if norm(&g_trial) < (1.0 - 1e-4 * alpha) * g_norm {
                    accepted = Some((trial, g_trial));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((next, g_next)) => {
                u = next;
                g = g_next;
                best = residuals(&u);
            }
            // No descent left: the iterate sits on the rounding floor.
            None => break,
        }
    }

    if best.1 > opts.tolerance {
        return Err(Error::SolverFailure { iterations: opts.max_iterations, residual: best.1 });
    }
    Ok(IonChain { positions: u, residual: best.0, relative_residual: best.1 })
}

/// Continuum sites for long chains, evenly spaced ions over the continuum length otherwise.
fn initial_guess(n_ions: usize) -> Result<Vec<f64>> {
    if n_ions >= 10 {
        return continuum_sites(n_ions, ContinuumModel::DubinFluid);
    }
    let l = chain_length(n_ions, ContinuumModel::DubinFluid)?;
    let h = 2.0 * l / n_ions as f64;
    let mid = (n_ions as f64 - 1.0) / 2.0;
    Ok((0..n_ions).map(|i| (i as f64 - mid) * h).collect())
}

/// Enforces `u_i = −u_{N−1−i}`; the middle ion of an odd chain sits at exactly 0.
fn symmetrize(mut u: Vec<f64>) -> Vec<f64> {
    let n = u.len();
    for i in 0..n / 2 {
        let half = 0.5 * (u[n - 1 - i] - u[i]);
        u[i] = -half;
        u[n - 1 - i] = half;
    }
    if n % 2 == 1 {
        u[n / 2] = 0.0;
    }
    u
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hessian of the energy: `H_ii = 1 + Σ_j w_ij`, `H_ij = −w_ij`, `w_ij = 2/|u_i−u_j|³`.
/// Applied matrix-free.
fn hessian_apply(u: &[f64], x: &[f64]) -> Vec<f64> {
    (0..u.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = x[i];
            for j in 0..u.len() {
                if j != i {
                    let d = (u[i] - u[j]).abs();
                    acc += 2.0 / (d * d * d) * (x[i] - x[j]);
                }
            }
            acc
        })
        .collect()
}

/// Solves `H δ = −g` by conjugate gradients, preconditioned with the tridiagonal
/// part of `H` (full diagonal plus nearest-neighbour couplings).
fn newton_step(u: &[f64], g: &[f64]) -> Vec<f64> {
    let n = u.len();
    let diag: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 1.0;
            for j in 0..n {
                if j != i {
                    let d = (u[i] - u[j]).abs();
                    s += 2.0 / (d * d * d);
                }
            }
            s
        })
        .collect();
    let off: Vec<f64> = u
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            -2.0 / (d * d * d)
        })
        .collect();
    let precond = Tridiagonal::factor(&diag, &off);

    let b: Vec<f64> = g.iter().map(|x| -x).collect();
    let b_norm = norm(&b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return x;
    }
    let mut r = b;
    let mut z = precond.solve(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..n.max(50) {
        let hp = hessian_apply(u, &p);
        let php = dot(&p, &hp);
        if !(php > 0.0) {
            break;
        }
        let a = rz / php;
        for k in 0..n {
            x[k] += a * p[k];
            r[k] -= a * hp[k];
        }
        if norm(&r) <= 1e-13 * b_norm {
            break;
        }
        z = precond.solve(&r);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    x
}

/// LU factors of a symmetric tridiagonal matrix (Thomas algorithm).
struct Tridiagonal {
    off: Vec<f64>,
    pivots: Vec<f64>,
}

impl Tridiagonal {
    fn factor(diag: &[f64], off: &[f64]) -> Self {
        let mut pivots = Vec::with_capacity(diag.len());
        pivots.push(diag[0]);
        for k in 1..diag.len() {
            let prev = pivots[k - 1];
            pivots.push(diag[k] - off[k - 1] * off[k - 1] / prev);
        }
        Tridiagonal { off: off.to_vec(), pivots }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for k in 1..n {
            y[k] -= self.off[k - 1] / self.pivots[k - 1] * y[k - 1];
        }
        y[n - 1] /= self.pivots[n - 1];
        for k in (0..n - 1).rev() {
            y[k] = (y[k] - self.off[k] * y[k + 1]) / self.pivots[k];
        }
        y
    }
}
