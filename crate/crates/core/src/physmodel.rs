//! Physical constants, ion species, trap parameters and the derived length scales.
//!
//! Everything is SI. The Gaussian-units `q²` that appears in Coulomb energies is
//! carried as `q²/(4πε₀)` (joule·meters), so `q2_coul / r` is an energy in joules.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{require_positive, Error, Result};

/// CODATA 2018 values.
pub mod constants {
    /// Reduced Planck constant, J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Speed of light in vacuum, m/s.
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Vacuum permittivity, F/m.
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    /// Unified atomic mass unit, kg.
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Elementary charge, C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Euler–Mascheroni constant, to the ten digits used by the continuum model.
    pub const EULER_GAMMA: f64 = 0.577_215_664_9;
}

/// Multipole order of the `g ↔ e` optical transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Multipole {
    /// Electric dipole.
    E1,
    /// Electric quadrupole.
    #[default]
    E2,
}

impl Multipole {
    /// Exponent `p` of the `1/r^p` coupling between a displaced neighbour and the transition.
    pub fn pair_exponent(self) -> u32 {
        match self {
            Multipole::E1 => 3,
            Multipole::E2 => 4,
        }
    }

    /// Multipole order `ℓ` (1 for a dipole, 2 for a quadrupole).
    pub fn order(self) -> u32 {
        match self {
            Multipole::E1 => 1,
            Multipole::E2 => 2,
        }
    }

    /// Power of `k0` in the squared moment, `2ℓ + 1`.
    pub fn moment_k0_power(self) -> i32 {
        2 * self.order() as i32 + 1
    }

    /// Symbol of the squared transition moment (`D²` or `Q²`).
    pub fn moment_symbol(self) -> &'static str {
        match self {
            Multipole::E1 => "D^2",
            Multipole::E2 => "Q^2",
        }
    }
}

impl fmt::Display for Multipole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multipole::E1 => f.write_str("E1"),
            Multipole::E2 => f.write_str("E2"),
        }
    }
}

impl std::str::FromStr for Multipole {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "E1" | "e1" => Ok(Multipole::E1),
            "E2" | "e2" => Ok(Multipole::E2),
            other => Err(format!("unknown multipole `{other}` (expected E1 or E2)")),
        }
    }
}

/// One ion type: charge, mass and the optical qubit transition.
#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    /// Mass in kilograms.
    pub mass: f64,
    /// Charge in coulombs.
    pub charge: f64,
    /// Angular frequency of the optical transition, rad/s.
    pub omega0: f64,
    /// Spontaneous lifetime of the excited state, seconds.
    pub tau_s: f64,
    pub multipole: Multipole,
    /// Dimensionless multiplier `C` in `moment² = C·ħ/(τ_s·k0^(2ℓ+1))`. Defaults to 1.
    pub moment_constant: f64,
}

impl IonSpecies {
    /// Ba⁺ with the E2 `6s ²S₁/₂ ↔ 5d ²D₅/₂` qubit, `τ_s = 50 s` (mid-range of 30–70 s).
    pub fn barium_ion() -> Self {
        IonSpecies {
            name: "Ba+".to_string(),
            mass: 137.33 * constants::ATOMIC_MASS_UNIT,
            charge: constants::ELEMENTARY_CHARGE,
            omega0: 2.0 * PI * 1.7e14,
            tau_s: 50.0,
            multipole: Multipole::E2,
            moment_constant: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("mass", self.mass)?;
        require_positive("charge", self.charge)?;
        require_positive("omega0", self.omega0)?;
        require_positive("tau_s", self.tau_s)?;
        require_positive("moment_constant", self.moment_constant)?;
        Ok(())
    }

    /// Human-readable statement of the transition-moment convention in force.
    pub fn moment_convention(&self) -> String {
        format!(
            "{}={}*hbar/(tau_s*k0^{})",
            self.multipole.moment_symbol(),
            self.moment_constant,
            self.multipole.moment_k0_power()
        )
    }
}

/// Trap frequencies and ion count of a linear Paul trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    /// Axial secular angular frequency, rad/s.
    pub omega_z: f64,
    /// Typical transverse mode angular frequency, rad/s.
    pub omega_t: f64,
    pub n_ions: usize,
}

impl TrapConfig {
    /// `ω_z/2π = 100 kHz`, `ω_t/2π = 20 MHz`, 1000 ions.
    pub fn ba_example() -> Self {
        TrapConfig { omega_z: 2.0 * PI * 1.0e5, omega_t: 2.0 * PI * 2.0e7, n_ions: 1000 }
    }

    pub fn with_n_ions(self, n_ions: usize) -> Self {
        TrapConfig { n_ions, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("omega_z", self.omega_z)?;
        require_positive("omega_t", self.omega_t)?;
        if self.omega_t <= self.omega_z {
            return Err(Error::invalid(
                "omega_t",
                format!(
                    "transverse frequency {} must exceed axial frequency {} for a linear chain",
                    self.omega_t, self.omega_z
                ),
            ));
        }
        if self.n_ions == 0 {
            return Err(Error::invalid("n_ions", "must be at least 1"));
        }
        Ok(())
    }
}

/// Length and coupling scales derived from a species in a trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Trap length scale `(q²/(m ω_z²))^(1/3)`, meters.
    pub d0: f64,
    /// Transition wavenumber `ω₀/c`, 1/m.
    pub k0: f64,
    /// `q²/(4πε₀)`, J·m.
    pub q2_coul: f64,
    /// Squared transition moment: `Q²` (J·m⁵) for E2, `D²` (J·m³) for E1.
    pub moment_sq: f64,
}

/// `q²/(4πε₀)` for a charge in coulombs.
pub fn coulomb_q2(charge: f64) -> f64 {
    charge * charge / (4.0 * PI * constants::EPSILON_0)
}

/// Trap length scale for a given charge, mass and axial frequency.
pub fn trap_length(q2_coul: f64, mass: f64, omega_z: f64) -> f64 {
    (q2_coul / (mass * omega_z * omega_z)).cbrt()
}

pub fn derive_scales(species: &IonSpecies, trap: &TrapConfig) -> Result<DerivedScales> {
    species.validate()?;
    trap.validate()?;
    let q2_coul = coulomb_q2(species.charge);
    let d0 = trap_length(q2_coul, species.mass, trap.omega_z);
    let k0 = species.omega0 / constants::SPEED_OF_LIGHT;
    let moment_sq =
        species.moment_constant * constants::HBAR / (species.tau_s * k0.powi(species.multipole.moment_k0_power()));
    Ok(DerivedScales { d0, k0, q2_coul, moment_sq })
}

/// Radiative decoherence window `2τ_s/N`, assuming half the ions are excited on average.
pub fn radiative_time(species: &IonSpecies, n_ions: usize) -> Result<f64> {
    require_positive("tau_s", species.tau_s)?;
    if n_ions == 0 {
        return Err(Error::invalid("n_ions", "must be at least 1"));
    }
    Ok(2.0 * species.tau_s / n_ions as f64)
}
