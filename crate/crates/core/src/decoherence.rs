//! Vibrational and radiative decoherence times.
//!
//! Each ion is treated as vibrating independently at the transverse frequency with
//! zero-temperature variance `⟨u_j u_k⟩ = ħ/(m ω_t) δ_jk`. The rate of ion `i` is then
//! `τ_i⁻¹ = q²M²/(2πħ m ω₀ ω_t) · Σ_{j≠i} |z_i − z_j|^(−2p)`, where `M²` is the squared
//! transition moment and `p` the coupling exponent (4 for E2). Ion rates combine in
//! quadrature, `τ_vib⁻² = Σ τ_i⁻²`, because each ion's overlap decays like a cosine.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::chain::{solve_equilibrium_with, IonChain, SolverOptions};
use crate::continuum::{chain_length, min_spacing, ContinuumModel};
use crate::error::{Error, Result};
use crate::physmodel::{constants::HBAR, derive_scales, radiative_time, DerivedScales, IonSpecies, TrapConfig};
use crate::sums::{asymptotic_shape_factor, pair_sum_exact, pair_sums, zeta};

/// How `τ_vib` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RateMode {
    /// Solve the chain and sum every ion's rate.
    #[default]
    DiscreteSum,
    /// Continuum closed form.
    ContinuumClosedForm,
}

impl fmt::Display for RateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMode::DiscreteSum => "discrete-sum",
            RateMode::ContinuumClosedForm => "closed-form",
        })
    }
}

impl FromStr for RateMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "discrete" | "discrete-sum" => Ok(RateMode::DiscreteSum),
            "closed-form" | "continuum" | "continuum-closed-form" => Ok(RateMode::ContinuumClosedForm),
            other => Err(format!("unknown rate mode `{other}` (expected discrete or closed-form)")),
        }
    }
}

/// Species- and trap-dependent constants shared by every rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibrationalCoupling {
    pub scales: DerivedScales,
    /// `q²M²/(2πħ m ω₀ ω_t)`, in s⁻¹·m^(2p).
    pub prefactor: f64,
    pub pair_exponent: u32,
}

impl VibrationalCoupling {
    pub fn new(species: &IonSpecies, trap: &TrapConfig) -> Result<Self> {
        let scales = derive_scales(species, trap)?;
        let prefactor =
            scales.q2_coul * scales.moment_sq / (2.0 * PI * HBAR * species.mass * species.omega0 * trap.omega_t);
        Ok(VibrationalCoupling { scales, prefactor, pair_exponent: species.multipole.pair_exponent() })
    }

    /// Exponent of the pair sum entering a single-ion rate.
    pub fn sum_exponent(&self) -> u32 {
        2 * self.pair_exponent
    }

    /// Prefactor for sums expressed in units of `d0`, in s⁻¹.
    pub fn dimensionless_prefactor(&self) -> f64 {
        self.prefactor / self.scales.d0.powi(self.sum_exponent() as i32)
    }
}

fn check_chain(chain: &IonChain, trap: &TrapConfig) -> Result<()> {
    if chain.n_ions() != trap.n_ions {
        return Err(Error::invalid(
            "n_ions",
            format!("chain holds {} ions but the trap is configured for {}", chain.n_ions(), trap.n_ions),
        ));
    }
    Ok(())
}

/// Decoherence rate `τ_i⁻¹` of ion `i` (0-based), in s⁻¹.
pub fn per_ion_rate(chain: &IonChain, i: usize, species: &IonSpecies, trap: &TrapConfig) -> Result<f64> {
    check_chain(chain, trap)?;
    let coupling = VibrationalCoupling::new(species, trap)?;
    Ok(coupling.dimensionless_prefactor() * pair_sum_exact(chain, i, coupling.sum_exponent())?)
}

/// Rates of every ion, in s⁻¹.
pub fn per_ion_rates(chain: &IonChain, species: &IonSpecies, trap: &TrapConfig) -> Result<Vec<f64>> {
    check_chain(chain, trap)?;
    let coupling = VibrationalCoupling::new(species, trap)?;
    if chain.n_ions() < 2 {
        return Ok(vec![0.0; chain.n_ions()]);
    }
    let k = coupling.dimensionless_prefactor();
    Ok(pair_sums(chain, coupling.sum_exponent())?.into_iter().map(|s| k * s).collect())
}

/// `τ_vib = (Σ r_i²)^(−1/2)`; `+∞` when every rate vanishes.
pub fn aggregate_tau_vib(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::invalid("rates", "need at least one rate"));
    }
    if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::invalid("rates", "rates must be finite and >= 0"));
    }
    let scale = rates.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(f64::INFINITY);
    }
    let sum: f64 = rates.iter().map(|r| (r / scale) * (r / scale)).sum();
    Ok(1.0 / (scale * sum.sqrt()))
}

/// Survival probability of the intended state at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPoint {
    pub t: f64,
    /// `Π_i cos²(t/τ_i)`.
    pub product: f64,
    /// `exp(−t²/τ_vib²)`.
    pub gaussian: f64,
    /// False once `t > 0.4 min τ_i`, where the product form stops being meaningful.
    pub in_window: bool,
}

pub fn fidelity_curve(rates: &[f64], times: &[f64]) -> Result<Vec<FidelityPoint>> {
    let tau_vib = aggregate_tau_vib(rates)?;
    let max_rate = rates.iter().cloned().fold(0.0, f64::max);
    let window = if max_rate > 0.0 { 0.4 / max_rate } else { f64::INFINITY };
    times
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid("times", "times must be finite and >= 0"));
            }
            let product = rates.iter().map(|r| (t * r).cos().powi(2)).product();
            let x = t / tau_vib;
            Ok(FidelityPoint { t, product, gaussian: (-x * x).exp(), in_window: t <= window })
        })
        .collect()
}

/// Continuum estimate of the aggregate vibrational rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormRate {
    /// `prefactor · 2ζ(2p) · √T_{4p}`, in s⁻¹.
    pub full: f64,
    /// Order-of-magnitude form `N^(1/2) · prefactor / s₀^(2p)`, in s⁻¹.
    pub bare: f64,
}

pub fn closed_form_rate(
    n_ions: usize,
    species: &IonSpecies,
    trap: &TrapConfig,
    model: ContinuumModel,
) -> Result<ClosedFormRate> {
    let coupling = VibrationalCoupling::new(species, trap)?;
    let l = chain_length(n_ions, model)?;
    let s0 = min_spacing(n_ions, model)?;
    let two_p = coupling.sum_exponent();
    let four_p = 2 * two_p;
    let k = coupling.dimensionless_prefactor();
    // √T_{4p} = √(L/s₀^(4p+1)·shape) in d0 units; taken as a root of the logs to keep
    // s₀^(4p+1) in range for long chains.
    let ln_total = l.ln() - (four_p as f64 + 1.0) * s0.ln() + asymptotic_shape_factor(four_p).ln();
    let full = k * 2.0 * zeta(two_p)? * (0.5 * ln_total).exp();
    let bare = (n_ions as f64).sqrt() * k / s0.powi(two_p as i32);
    Ok(ClosedFormRate { full, bare })
}

/// Decoherence times of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceReport {
    pub mode: RateMode,
    /// `τ_i` per ion, seconds (`+∞` for an ion without neighbours). Empty in closed-form mode.
    pub per_ion_tau: Vec<f64>,
    pub tau_vib: f64,
    pub tau_rad: f64,
    /// `(τ_rad⁻¹ + τ_vib⁻¹)⁻¹`.
    pub t_d: f64,
    pub tau_s: f64,
    /// Transition-moment convention the numbers depend on.
    pub convention: String,
}

impl DecoherenceReport {
    pub fn tau_vib_over_tau_s(&self) -> f64 {
        self.tau_vib / self.tau_s
    }

    pub fn tau_vib_over_tau_rad(&self) -> f64 {
        self.tau_vib / self.tau_rad
    }
}

/// Combines two decoherence channels by adding rates; infinite times drop out.
pub fn combined_window(tau_rad: f64, tau_vib: f64) -> f64 {
    1.0 / (1.0 / tau_rad + 1.0 / tau_vib)
}

pub fn build_report(species: &IonSpecies, trap: &TrapConfig, mode: RateMode) -> Result<DecoherenceReport> {
    build_report_with(species, trap, mode, ContinuumModel::default(), &SolverOptions::default())
}

pub fn build_report_with(
    species: &IonSpecies,
    trap: &TrapConfig,
    mode: RateMode,
    model: ContinuumModel,
    solver: &SolverOptions,
) -> Result<DecoherenceReport> {
    species.validate()?;
    trap.validate()?;
    let tau_rad = radiative_time(species, trap.n_ions)?;
    let (per_ion_tau, tau_vib) = match mode {
        RateMode::DiscreteSum => {
            let chain = solve_equilibrium_with(trap.n_ions, solver)?;
            let rates = per_ion_rates(&chain, species, trap)?;
            let tau_vib = aggregate_tau_vib(&rates)?;
            (rates.iter().map(|r| 1.0 / r).collect(), tau_vib)
        }
        RateMode::ContinuumClosedForm => {
            if trap.n_ions < 2 {
                (Vec::new(), f64::INFINITY)
            } else {
                (Vec::new(), 1.0 / closed_form_rate(trap.n_ions, species, trap, model)?.full)
            }
        }
    };
    Ok(DecoherenceReport {
        mode,
        per_ion_tau,
        tau_vib,
        tau_rad,
        t_d: combined_window(tau_rad, tau_vib),
        tau_s: species.tau_s,
        convention: species.moment_convention(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::solve_equilibrium;
    use crate::physmodel::{constants, Multipole};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ba3() -> (IonSpecies, TrapConfig) {
        (IonSpecies::barium_ion(), TrapConfig::ba_example().with_n_ions(3))
    }

    #[test]
    fn single_ion_has_no_vibrational_rate() {
        let sp = IonSpecies::barium_ion();
        let trap = TrapConfig::ba_example().with_n_ions(1);
        let chain = solve_equilibrium(1).unwrap();
        assert_eq!(per_ion_rate(&chain, 0, &sp, &trap).unwrap(), 0.0);
        let report = build_report(&sp, &trap, RateMode::DiscreteSum).unwrap();
        assert_eq!(report.tau_vib, f64::INFINITY);
        assert_eq!(report.t_d, report.tau_rad);
    }

    #[test]
    fn center_ion_rate_from_constants() {
        // Independent plug-in of CODATA constants for Ba+, N = 3, centre ion.
        let (sp, trap) = ba3();
        let hbar = constants::HBAR;
        let c = constants::SPEED_OF_LIGHT;
        let q2 = constants::ELEMENTARY_CHARGE.powi(2) / (4.0 * PI * constants::EPSILON_0);
        let m = 137.33 * constants::ATOMIC_MASS_UNIT;
        let wz = 2.0 * PI * 1e5;
        let wt = 2.0 * PI * 2e7;
        let w0 = 2.0 * PI * 1.7e14;
        let d0 = (q2 / (m * wz * wz)).cbrt();
        let k0 = w0 / c;
        let qsq = hbar / (50.0 * k0.powi(5));
        let sum = 2.0 * 1.25f64.powf(-8.0 / 3.0); // 1.103074
        let expected = q2 * qsq / (2.0 * PI * hbar * m * w0 * wt) * sum / d0.powi(8);

        let chain = solve_equilibrium(3).unwrap();
        let rate = per_ion_rate(&chain, 1, &sp, &trap).unwrap();
        assert_relative_eq!(rate, expected, max_relative = 1e-9);
        assert!(rate > 1e-24 && rate < 1e-22, "{rate}");
    }

    #[test]
    fn mirror_ions_share_rates() {
        let sp = IonSpecies::barium_ion();
        let trap = TrapConfig::ba_example().with_n_ions(12);
        let chain = solve_equilibrium(12).unwrap();
        let rates = per_ion_rates(&chain, &sp, &trap).unwrap();
        for i in 0..12 {
            assert_relative_eq!(rates[i], rates[11 - i], max_relative = 1e-9);
            assert_eq!(rates[i], per_ion_rate(&chain, i, &sp, &trap).unwrap());
        }
    }

    #[test]
    fn chain_size_must_match_trap() {
        let (sp, trap) = ba3();
        let chain = solve_equilibrium(4).unwrap();
        assert!(per_ion_rate(&chain, 0, &sp, &trap).is_err());
    }

    #[test]
    fn aggregation_law() {
        assert_relative_eq!(aggregate_tau_vib(&[4.0]).unwrap(), 0.25);
        let n = 64;
        let rates = vec![2.0; n];
        let tau = aggregate_tau_vib(&rates).unwrap();
        assert_relative_eq!(tau, 1.0 / (2.0 * (n as f64).sqrt()), max_relative = 1e-15);
        let naive: f64 = rates.iter().sum();
        assert_relative_eq!(naive * tau, (n as f64).sqrt(), max_relative = 1e-15);
        assert_eq!(aggregate_tau_vib(&[0.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(aggregate_tau_vib(&[]).is_err());
        assert!(aggregate_tau_vib(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn fidelity_curve_values() {
        let pts = fidelity_curve(&[1.0], &[0.0, PI / 4.0]).unwrap();
        assert_eq!((pts[0].product, pts[0].gaussian), (1.0, 1.0));
        assert_relative_eq!(pts[1].product, 0.5, max_relative = 1e-14);
        assert_relative_eq!(pts[1].gaussian, (-PI * PI / 16.0).exp(), max_relative = 1e-14);
        assert_relative_eq!(pts[1].gaussian, 0.5396, epsilon = 1e-4);
        assert!(!pts[1].in_window);
    }

    fn heterogeneous_rates(n: usize) -> Vec<f64> {
        (0..n).map(|k| 1.0 + 0.5 * (k as f64 * 0.37).sin() + 0.01 * k as f64).collect()
    }

    #[test]
    fn gaussian_approximates_product() {
        let rates = heterogeneous_rates(100);
        let t_max = 0.3 / rates.iter().cloned().fold(0.0, f64::max);
        let times: Vec<f64> = (0..=60).map(|k| t_max * k as f64 / 60.0).collect();
        for p in fidelity_curve(&rates, &times).unwrap() {
            assert!(p.in_window);
            assert!((p.product - p.gaussian).abs() <= 1e-2);
            if p.t > 0.0 {
                // ln cos²x = −x² − x⁴/6 − … < −x²
                assert!(p.product < p.gaussian);
            }
        }
    }

    #[test]
    fn closed_form_constants() {
        let sp = IonSpecies::barium_ion();
        let trap = TrapConfig::ba_example();
        let r = closed_form_rate(1000, &sp, &trap, ContinuumModel::DubinFluid).unwrap();
        let l = chain_length(1000, ContinuumModel::DubinFluid).unwrap();
        let s0 = min_spacing(1000, ContinuumModel::DubinFluid).unwrap();
        let expected = 2.0 * zeta(8).unwrap() * (l / s0).sqrt() * (4.0 * PI / 71.0).powf(0.25) / 1000f64.sqrt();
        assert_relative_eq!(r.full / r.bare, expected, max_relative = 1e-12);
    }

    #[test]
    fn closed_form_power_counting() {
        // Lowering ω_z by √8 doubles d0 with the dimensionless chain unchanged: rate ∝ d0^(-8).
        let sp = IonSpecies::barium_ion();
        let trap = TrapConfig::ba_example();
        let wider = TrapConfig { omega_z: trap.omega_z / 8f64.sqrt(), ..trap };
        let a = closed_form_rate(1000, &sp, &trap, ContinuumModel::DubinFluid).unwrap().full;
        let b = closed_form_rate(1000, &sp, &wider, ContinuumModel::DubinFluid).unwrap().full;
        assert_relative_eq!(a / b, 2f64.powi(8), max_relative = 1e-12);

        // Direct s₀ doubling at fixed L inside the formula.
        let l = chain_length(1000, ContinuumModel::DubinFluid).unwrap();
        let s0 = min_spacing(1000, ContinuumModel::DubinFluid).unwrap();
        let f = |s: f64| (l / s.powi(17)).sqrt();
        assert_relative_eq!(f(s0) / f(2.0 * s0), 2f64.powi(8) * 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn discrete_and_closed_form_agree() {
        let sp = IonSpecies::barium_ion();
        for n in [200usize, 500] {
            let trap = TrapConfig::ba_example().with_n_ions(n);
            let d = build_report(&sp, &trap, RateMode::DiscreteSum).unwrap();
            let c = build_report(&sp, &trap, RateMode::ContinuumClosedForm).unwrap();
            let ratio = c.tau_vib / d.tau_vib; // discrete rate / closed-form rate
            assert!((0.7..=1.4).contains(&ratio), "N = {n}: {ratio}");
            if n == 500 {
                assert!((ratio - 1.0).abs() <= 0.25);
            }
        }
    }

    #[test]
    fn report_invariants() {
        let sp = IonSpecies::barium_ion();
        let trap = TrapConfig::ba_example().with_n_ions(40);
        let r = build_report(&sp, &trap, RateMode::DiscreteSum).unwrap();
        let inv_sq: f64 = r.per_ion_tau.iter().map(|t| t.powi(-2)).sum();
        assert_relative_eq!(r.tau_vib.powi(-2), inv_sq, max_relative = 1e-12);
        assert_relative_eq!(1.0 / r.t_d, 1.0 / r.tau_rad + 1.0 / r.tau_vib, max_relative = 1e-14);
        assert_eq!(r.convention, "Q^2=1*hbar/(tau_s*k0^5)");
    }

    #[test]
    fn equal_channels_halve_the_window() {
        assert_relative_eq!(combined_window(3.0, 3.0), 1.5);
        assert_eq!(combined_window(3.0, f64::INFINITY), 3.0);
    }

    #[test]
    fn e1_only_changes_exponent_and_moment() {
        let e2 = IonSpecies::barium_ion();
        let e1 = IonSpecies { multipole: Multipole::E1, ..e2.clone() };
        let trap = TrapConfig::ba_example().with_n_ions(7);
        let chain = solve_equilibrium(7).unwrap();
        let r1 = per_ion_rate(&chain, 3, &e1, &trap).unwrap();
        let r2 = per_ion_rate(&chain, 3, &e2, &trap).unwrap();
        let s1 = derive_scales(&e1, &trap).unwrap();
        let s2 = derive_scales(&e2, &trap).unwrap();
        let ratio = (s1.moment_sq / s2.moment_sq) * (pair_sum_exact(&chain, 3, 6).unwrap() / s1.d0.powi(6))
            / (pair_sum_exact(&chain, 3, 8).unwrap() / s2.d0.powi(8));
        assert_relative_eq!(r1 / r2, ratio, max_relative = 1e-12);
    }

    #[test]
    fn barium_thousand_ions_is_radiatively_limited() {
        let r = build_report(&IonSpecies::barium_ion(), &TrapConfig::ba_example(), RateMode::DiscreteSum).unwrap();
        assert!(r.tau_vib_over_tau_rad() > 1e4);
        assert!(r.tau_vib_over_tau_s() > 1.0);
    }

    proptest! {
        #[test]
        fn aggregate_is_permutation_invariant_and_monotone(
            mut rates in proptest::collection::vec(1e-3f64..1e3, 1..40),
            extra in 1e-3f64..1e3,
        ) {
            let tau = aggregate_tau_vib(&rates).unwrap();
            let mut rev = rates.clone();
            rev.reverse();
            prop_assert!((aggregate_tau_vib(&rev).unwrap() / tau - 1.0).abs() < 1e-13);
            rates.push(extra);
            prop_assert!(aggregate_tau_vib(&rates).unwrap() < tau);
        }

        #[test]
        fn gaussian_bounds_product(scale in 0.01f64..0.39) {
            let rates = heterogeneous_rates(30);
            let t = scale / rates.iter().cloned().fold(0.0, f64::max);
            let p = fidelity_curve(&rates, &[t]).unwrap()[0];
            prop_assert!(p.product < p.gaussian);
        }
    }
}
