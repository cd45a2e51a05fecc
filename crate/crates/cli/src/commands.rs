//! One function per subcommand, each returning the full CSV text.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use clap::ValueEnum;
use num_complex::Complex64;

use iontrap_core::adiabatic::{adiabatic_phase, integrate_tls, overlap_fidelity};
use iontrap_core::chain::solve_equilibrium_with;
use iontrap_core::continuum::{chain_length, min_spacing, spacing_profile};
use iontrap_core::decoherence::build_report_with;
use iontrap_core::physmodel::radiative_time;
use iontrap_core::scaling::{fit_exponent, log_grid, scan, PolicyKind};
use iontrap_core::sums::{pair_sum_approx, pair_sums};
use iontrap_core::{derive_scales, ContinuumModel, DriveField, LogCorrection, Multipole, ScalingPolicy};

use crate::config::RunConfig;
use crate::csvout::{fmt_num, render, Table};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Derived length, wavenumber and moment scales.
    Scales,
    /// Exact equilibrium positions of the chain.
    Equilibrium,
    /// Continuum spacing profiles of both models.
    Continuum,
    /// Per-ion lattice sums against the local-spacing shortcut.
    Sums,
    /// Driven two-level overlap against the adiabatic phase.
    Adiabatic,
    /// Decoherence times and the radiative window.
    Decohere,
    /// Rate growth with the number of ions.
    Scaling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub csv: String,
    /// Diagnostics for stderr.
    pub warnings: Vec<String>,
}

impl Output {
    fn tables(tables: &[Table]) -> Self {
        Output { csv: render(tables), warnings: Vec::new() }
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match command {
        Command::Scales => scales(cfg),
        Command::Equilibrium => equilibrium(cfg),
        Command::Continuum => continuum(cfg),
        Command::Sums => sums(cfg),
        Command::Adiabatic => adiabatic(cfg),
        Command::Decohere => decohere(cfg),
        Command::Scaling => scaling(cfg),
    }
}

fn scales(cfg: &RunConfig) -> Result<Output, CliError> {
    let s = derive_scales(&cfg.species, &cfg.trap)?;
    let model = cfg.model.continuum;
    let n = cfg.trap.n_ions;
    let moment_unit = match cfg.species.multipole {
        Multipole::E1 => "J*m^3",
        Multipole::E2 => "J*m^5",
    };
    let mut t = Table::new(&["quantity", "value", "unit"]);
    let mut row = |q: &str, v: f64, unit: &str| t.push(vec![q.into(), fmt_num(v), unit.into()]);
    row("d0", s.d0, "m");
    row("k0", s.k0, "1/m");
    row("q2", s.q2_coul, "J*m");
    row("moment_sq", s.moment_sq, moment_unit);
    row("omega_z", cfg.trap.omega_z, "rad/s");
    row("omega_t", cfg.trap.omega_t, "rad/s");
    row("omega0", cfg.species.omega0, "rad/s");
    if n >= 2 {
        row("half_length", chain_length(n, model)? * s.d0, "m");
        row("s0", min_spacing(n, model)? * s.d0, "m");
    }
    row("tau_rad", radiative_time(&cfg.species, n)?, "s");
    Ok(Output::tables(&[t]))
}

fn equilibrium(cfg: &RunConfig) -> Result<Output, CliError> {
    let d0 = derive_scales(&cfg.species, &cfg.trap)?.d0;
    let chain = solve_equilibrium_with(cfg.trap.n_ions, &cfg.model.solver)?;
    let spacings = chain.local_spacings().unwrap_or_else(|_| vec![f64::NAN; chain.n_ions()]);
    let mut t = Table::new(&["index", "u_dimensionless", "z_meters", "local_spacing_dimensionless"]);
    for (i, (&u, &s)) in chain.positions().iter().zip(&spacings).enumerate() {
        t.push(vec![(i + 1).to_string(), fmt_num(u), fmt_num(u * d0), fmt_num(s)]);
    }
    Ok(Output::tables(&[t]))
}

fn continuum(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.trap.n_ions;
    let models = [ContinuumModel::NearestNeighbor, ContinuumModel::DubinFluid];
    let mut meta = Table::new(&["model", "L_over_d0", "s0_over_d0"]);
    for m in models {
        meta.push(vec![m.to_string(), fmt_num(chain_length(n, m)?), fmt_num(min_spacing(n, m)?)]);
    }
    let samples = cfg.continuum.samples;
    let mut profile = Table::new(&["z_over_L", "s_over_d0_nn", "s_over_d0_dubin"]);
    for k in 0..samples {
        // cell midpoints on (−1, 1), symmetric about 0
        let x = (2 * k + 1) as f64 / samples as f64 - 1.0;
        profile.push(vec![
            fmt_num(x),
            fmt_num(spacing_profile(x, n, models[0])?),
            fmt_num(spacing_profile(x, n, models[1])?),
        ]);
    }
    Ok(Output::tables(&[meta, profile]))
}

fn sums(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.sums.exponent;
    let chain = solve_equilibrium_with(cfg.trap.n_ions, &cfg.model.solver)?;
    let exact = pair_sums(&chain, n)?;
    let spacings = chain.local_spacings()?;
    let mut t = Table::new(&["i", "u_i", "S_n_exact", "S_n_approx", "rel_err"]);
    for (i, ((&u, &s), &e)) in chain.positions().iter().zip(&spacings).zip(&exact).enumerate() {
        let a = pair_sum_approx(s, n)?;
        t.push(vec![(i + 1).to_string(), fmt_num(u), fmt_num(e), fmt_num(a), fmt_num((a - e) / e)]);
    }
    Ok(Output::tables(&[t]))
}

fn adiabatic(cfg: &RunConfig) -> Result<Output, CliError> {
    let opts = &cfg.adiabatic;
    let drive = DriveField::Circular { amplitude: opts.eps_over_omega0, rate: opts.rate_over_omega0 };
    let start = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let traj = integrate_tls(1.0, &drive, [start, start], opts.omega0_t_end, opts.dt_omega0, opts.store_every)?;
    let overlap = overlap_fidelity(&traj)?;
    let mut t = Table::new(&["omega0_t", "re_overlap", "cos_phi", "abs_error"]);
    for (&time, &o) in traj.times.iter().zip(&overlap) {
        let c = adiabatic_phase(&drive, 1.0, time)?.cos();
        t.push(vec![fmt_num(time), fmt_num(o), fmt_num(c), fmt_num((o - c).abs())]);
    }
    let mut out = Output::tables(&[t]);
    out.warnings = drive.regime(1.0).warnings();
    Ok(out)
}

fn decohere(cfg: &RunConfig) -> Result<Output, CliError> {
    let r = build_report_with(&cfg.species, &cfg.trap, cfg.decohere.mode, cfg.model.continuum, &cfg.model.solver)?;
    let mut per_ion = Table::new(&["i", "tau_i_seconds"]);
    for (i, tau) in r.per_ion_tau.iter().enumerate() {
        per_ion.push(vec![(i + 1).to_string(), fmt_num(*tau)]);
    }
    let mut summary = Table::new(&[
        "tau_vib",
        "tau_rad",
        "t_d",
        "mode",
        "Qsq_convention",
        "tau_s",
        "tau_vib_over_tau_s",
        "tau_vib_over_tau_rad",
    ]);
    summary.push(vec![
        fmt_num(r.tau_vib),
        fmt_num(r.tau_rad),
        fmt_num(r.t_d),
        r.mode.to_string(),
        r.convention.clone(),
        fmt_num(r.tau_s),
        fmt_num(r.tau_vib_over_tau_s()),
        fmt_num(r.tau_vib_over_tau_rad()),
    ]);
    Ok(Output::tables(&[per_ion, summary]))
}

fn scaling(cfg: &RunConfig) -> Result<Output, CliError> {
    let opts = &cfg.scaling;
    let model = cfg.model.continuum;
    let policy = match opts.policy {
        PolicyKind::FixedVoltage => ScalingPolicy::FixedVoltage,
        PolicyKind::FixedSpacing => {
            let s0_target = match opts.s0_target_m {
                Some(s) => s,
                None => {
                    let d0 = derive_scales(&cfg.species, &cfg.trap)?.d0;
                    min_spacing(cfg.trap.n_ions, model)? * d0
                }
            };
            ScalingPolicy::FixedSpacing { s0_target }
        }
    };
    let ns = log_grid(opts.n_min, opts.n_max, opts.points_per_decade)?;
    let series = scan(policy, &ns, &cfg.species, &cfg.trap, model)?;

    let mut rows = Table::new(&["N", "omega_z_hz", "d0_m", "s0_m", "rate_vib_hz", "rate_rad_hz"]);
    for r in &series.rows {
        rows.push(vec![
            r.n_ions.to_string(),
            fmt_num(r.omega_z / (2.0 * PI)),
            fmt_num(r.d0),
            fmt_num(r.s0),
            fmt_num(r.rate_vib),
            fmt_num(r.rate_rad),
        ]);
    }

    let mut fits = Table::new(&["fit", "log_power", "slope", "stderr", "reference_slope"]);
    let mut warnings = Vec::new();
    match series.effective {
        Some(f) => {
            fits.push(vec!["effective".into(), fmt_num(0.0), fmt_num(f.slope), fmt_num(f.stderr), String::new()])
        }
        None => warnings.push("too few rows for an exponent fit (need >= 4 over a decade)".to_string()),
    }
    if let (Some(_), Some((slope, log_power))) = (series.effective, policy.reference_exponent(series.multipole)) {
        let f = fit_exponent(&series, LogCorrection::LogPower(log_power))?;
        fits.push(vec![
            "log-corrected".into(),
            fmt_num(log_power),
            fmt_num(f.slope),
            fmt_num(f.stderr),
            fmt_num(slope),
        ]);
    }
    Ok(Output { csv: render(&[rows, fits]), warnings })
}
