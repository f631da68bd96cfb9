//! End-to-end gate: one test per headline criterion, each printing a
//! single pass/fail line (visible with `--nocapture`).

use fermipulse::degeneracy::{
    arrival_time, delta1_3d, delta2_axis, delta2_total_3d, delta_total, Symmetry,
};
use fermipulse::estimation::{fit_p1, sample_clicks};
use fermipulse::figures::{dip_fwhm, find_dip, write_figure};
use fermipulse::runconfig::RunConfig;
use fermipulse::specfun::erf_real;
use fermipulse::statemodel::{default_ensemble, DetectorWindow};
use fermipulse::validate::{self, ValidateOptions};

fn report(criterion: &str, pass: bool) {
    println!(
        "criterion {criterion}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_1_source_degeneracy() {
    let ens = default_ensemble();
    let det = DetectorWindow::phase_cell(0.0, ens.one_el.dk()).unwrap();
    let d = delta_total(&ens, &det, 0.0).unwrap().d_total;
    let pass = (0.17..=0.23).contains(&d);
    report("1 (source degeneracy ~ 0.2)", pass);
    assert!(pass, "d_total = {d}");
}

#[test]
fn criterion_2_detector_peak() {
    let cfg = RunConfig::default();
    let ens = cfg.ensemble().unwrap();
    let det = cfg.detector(&ens).unwrap();
    let grid = cfg.time_grid(&ens).unwrap();
    let (mut peak, mut t_peak) = (f64::MIN, 0.0);
    for &t in &grid {
        let d = delta1_3d(&det, &ens.one_el, t).unwrap();
        if d > peak {
            peak = d;
            t_peak = t;
        }
    }
    let pass = (peak / 1.55e-14 - 1.0).abs() <= 0.10 && (t_peak / 8.43e-9 - 1.0).abs() <= 0.005;
    report("2 (detector peak degeneracy and time)", pass);
    assert!(pass, "peak = {peak}, t_peak = {t_peak}");
}

#[test]
fn criterion_3_two_electron_dip() {
    let cfg = RunConfig::default();
    let ens = cfg.ensemble().unwrap();
    let det = cfg.detector(&ens).unwrap();
    let grid = cfg.time_grid(&ens).unwrap();
    let trace: Vec<f64> = grid
        .iter()
        .map(|&t| delta2_total_3d(&det, &ens.two_el, t).unwrap())
        .collect();
    let dip = find_dip(&trace, 0.5);
    let fwhm = dip.and_then(|d| dip_fwhm(&grid, &trace, d));
    let pass = matches!(fwhm, Some(w) if (5e-12..=100e-12).contains(&w));
    report("3 (interior two-electron dip, FWHM 5-100 ps)", pass);
    assert!(pass, "dip = {dip:?}, fwhm = {fwhm:?}");
}

#[test]
fn criterion_4_coulomb_scalars() {
    let cfg = RunConfig::default();
    let scalars = fermipulse::figures::compute_scalars(&cfg).unwrap();
    let coulomb_names = [
        "coulomb_x0_m",
        "coulomb_p_ratio",
        "coulomb_x_det_m",
        "coulomb_suppression",
        "dispersion_sqrt_alpha",
        "pancake_r0_m",
        "pancake_quantum_ratio",
        "pancake_coulomb_ratio",
    ];
    let mut n_pass = 0;
    for s in scalars.iter().filter(|s| coulomb_names.contains(&s.name)) {
        let ok = s.passes();
        n_pass += ok as usize;
        println!(
            "  {}  {:<24} {:>14.6e}  (target {:.6e})",
            if ok { "PASS" } else { "FAIL" },
            s.name,
            s.value,
            s.target
        );
    }
    let pass = n_pass == coulomb_names.len();
    report(
        &format!("4 (coulomb scalars, {n_pass}/{} subchecks)", coulomb_names.len()),
        pass,
    );
    assert!(pass, "{n_pass}/{} coulomb scalars in tolerance", coulomb_names.len());
}

#[test]
fn criterion_5_oracle_master_suite() {
    let report_ = validate::run(&RunConfig::default(), &ValidateOptions::default()).unwrap();
    report("5 (oracle master suite)", report_.pass);
    assert!(report_.pass, "failures: {:?}", report_.failures());
}

#[test]
fn criterion_6_property_spot_checks() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    // erf oddness and the erf/erfc complement on 1e3 random points.
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(-6.0..6.0);
        let odd = (erf_real(x).unwrap() + erf_real(-x).unwrap()).abs();
        let compl = (erf_real(x).unwrap() + fermipulse::specfun::erfc_real(x).unwrap() - 1.0).abs();
        worst = worst.max(odd).max(compl);
    }
    let mut pass = worst < 1e-12;
    // Classical limit: at negligible overlap both symmetries reduce to
    // the distinguishable sum.
    let ens = default_ensemble();
    let dk = ens.one_el.dk();
    let ka = ens.one_el.k0()[0];
    let kb = ka - 40.0 * dk;
    let (lo, hi) = (0.1 - 0.5 / dk, 0.1 + 0.5 / dk);
    let t = arrival_time(&ens.one_el, 0.1).unwrap();
    let s = delta2_axis(Symmetry::Symmetric, lo, hi, ka, kb, dk, t).unwrap();
    let a = delta2_axis(Symmetry::Antisymmetric, lo, hi, ka, kb, dk, t).unwrap();
    // Overlap ~exp(-200): far below double precision but not exactly zero.
    pass &= (s - a).abs() <= 1e-12 * s.abs().max(1e-300);
    // Byte-determinism of a figure CSV.
    let cfg = RunConfig {
        n_t: Some(21),
        ..RunConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let f1 = std::fs::read(write_figure(2, &cfg, dir.path()).unwrap()).unwrap();
    let f2 = std::fs::read(write_figure(2, &cfg, dir.path()).unwrap()).unwrap();
    pass &= f1 == f2;
    report("6 (property spot checks)", pass);
    assert!(pass, "worst erf residual = {worst:e}");
}

#[test]
fn criterion_7_fit_recovery() {
    let ens = default_ensemble();
    let mut ok = 0;
    for seed in 0..20u64 {
        let sample = sample_clicks(&ens, 100_000, seed).unwrap();
        let fit = fit_p1(&sample, &ens).unwrap();
        if (0.45..=0.55).contains(&fit.p1_hat) && (0.05..=0.15).contains(&fit.p2_hat) {
            ok += 1;
        }
    }
    let pass = ok >= 19;
    report(&format!("7 (fit recovery, {ok}/20 seeds)"), pass);
    assert!(pass, "{ok}/20 seeds recovered the weights");
}
