use iontrap_core::chain::solve_equilibrium;
use iontrap_core::continuum::{chain_length, continuum_sites, fit_mj, min_spacing, spacing_profile};
use iontrap_core::decoherence::{aggregate_tau_vib, closed_form_rate, per_ion_rates};
use iontrap_core::sums::{chain_total_asymptotic, chain_total_exact, SumSource};
use iontrap_core::{ContinuumModel, IonSpecies, TrapConfig};

const DUBIN: ContinuumModel = ContinuumModel::DubinFluid;

#[test]
fn central_gap_approaches_fluid_spacing() {
    for n in [100usize, 200, 400] {
        let chain = solve_equilibrium(n).unwrap();
        let ratio = chain.central_spacing().unwrap() / min_spacing(n, DUBIN).unwrap();
        assert!((ratio - 1.0).abs() < 0.10, "N = {n}: {ratio}");
    }
}

#[test]
fn profile_matches_gaps_in_the_bulk() {
    let n = 100;
    let chain = solve_equilibrium(n).unwrap();
    let u = chain.positions();
    let l = chain_length(n, DUBIN).unwrap();
    let mid = n / 2;
    let z = 0.5 * (u[mid - 1] + u[mid]);
    let s = spacing_profile(z / l, n, DUBIN).unwrap();
    assert!((s / (u[mid] - u[mid - 1]) - 1.0).abs() < 0.10);
    // Over the inner half of the chain the profile stays within 10% of every gap;
    // near the ends the discreteness correction grows past that.
    for w in u.windows(2) {
        let z = 0.5 * (w[0] + w[1]);
        if z.abs() <= 0.5 * l {
            let s = spacing_profile(z / l, n, DUBIN).unwrap();
            assert!((s / (w[1] - w[0]) - 1.0).abs() < 0.10, "z/L = {}", z / l);
        }
    }
}

#[test]
fn inverted_cubic_tracks_discrete_positions() {
    let n = 100;
    let chain = solve_equilibrium(n).unwrap();
    let sites = fit_mj(n, DUBIN).unwrap().sites(n).unwrap();
    let worst = sites
        .iter()
        .zip(chain.positions())
        .filter(|(_, u)| u.abs() > 0.0)
        .map(|(z, u)| (z / u - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.05, "{worst}");
}

#[test]
fn continuum_site_totals_match_asymptotic_form() {
    for n in [200usize, 1000] {
        for exp in [8u32, 16] {
            let total = chain_total_exact(SumSource::ContinuumProfile { n_ions: n, model: DUBIN }, exp).unwrap();
            let asym = chain_total_asymptotic(n, exp, DUBIN).unwrap();
            assert!((total / asym - 1.0).abs() < 2e-3, "N = {n}, n = {exp}: {}", total / asym);
        }
    }
    assert_eq!(continuum_sites(200, DUBIN).unwrap().len(), 200);
}

#[test]
fn discrete_and_closed_form_rates_agree_in_order() {
    let sp = IonSpecies::barium_ion();
    for n in [200usize, 500] {
        let trap = TrapConfig::ba_example().with_n_ions(n);
        let chain = solve_equilibrium(n).unwrap();
        let discrete = 1.0 / aggregate_tau_vib(&per_ion_rates(&chain, &sp, &trap).unwrap()).unwrap();
        let closed = closed_form_rate(n, &sp, &trap, DUBIN).unwrap().full;
        let ratio = discrete / closed;
        assert!((0.7..=1.4).contains(&ratio), "N = {n}: {ratio}");
        if n == 500 {
            assert!((ratio - 1.0).abs() <= 0.25);
        }
    }
}
