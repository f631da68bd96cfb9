//! Self-check suite: re-derives the closed-form figure sweeps against
//! the quadrature reference and reports one pass/fail record per check.
//!
//! Degeneracy and density comparisons hold to 1e-7 relative with a
//! noise floor of 1e-10 of each sweep's peak (deep tails sit at the
//! precision limit of both methods), Pauli zeros to 1e-18 absolute and
//! normalizations to 1e-8; `ValidateOptions::tol_scale` tightens or
//! loosens every tolerance at once for margin studies, and
//! `interference_scale` corrupts the closed-form interference term so a
//! test can prove the suite notices.

use serde::Serialize;

use crate::constants::{HBAR, M_E};
use crate::coulomb::{relative_momentum, separation_at_detector, CoulombScenario};
use crate::degeneracy::arrival_time;
use crate::degeneracy::{delta1_3d, delta2_3d_scaled, Symmetry};
use crate::detection::{joint_density, joint_density_t0, marginal_density, p1_density};
use crate::oracle::{
    integrate_real, quadrature_density, quadrature_density2_pieces, quadrature_joint_pointwise,
    quadrature_marginal, QuadratureSpec,
};
use crate::runconfig::RunConfig;
use crate::Result;

/// One comparison family with its worst observed error.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// Number of compared values.
    pub points: usize,
    /// Worst |closed − reference| divided by its tolerance; ≤ 1 passes.
    pub worst_error_ratio: f64,
    pub pass: bool,
}

/// Machine-readable outcome of the whole suite.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub norm_tol: f64,
    pub pauli_tol: f64,
    pub interference_scale: f64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Names of the failing checks, empty on success.
    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Multiplier on the closed-form interference term (1 = physical).
    pub interference_scale: f64,
    /// Multiplier on every tolerance (0.1 = ten times tighter).
    pub tol_scale: f64,
    /// Sample count per sweep.
    pub n_samples: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            interference_scale: 1.0,
            tol_scale: 1.0,
            n_samples: 11,
        }
    }
}

// Worst-error accumulator: per point tol = rel·|reference| +
// floor_frac·max|reference| over the whole sweep, so the absolute floor
// absorbs quadrature noise near zero without swamping sweeps whose
// natural scale is far below 1 (3D degeneracies peak at ~1e-14).
struct Acc {
    pairs: Vec<(f64, f64)>,
    worst_abs: f64,
    abs_points: usize,
}

impl Acc {
    fn new() -> Self {
        Self {
            pairs: Vec::new(),
            worst_abs: 0.0,
            abs_points: 0,
        }
    }

    fn add(&mut self, closed: f64, reference: f64) {
        self.pairs.push((closed, reference));
    }

    // Absolute-only comparison (Pauli zeros, monotonicity violations).
    fn add_abs(&mut self, value: f64, tol: f64) {
        self.worst_abs = self.worst_abs.max(value.abs() / tol);
        self.abs_points += 1;
    }

    fn finish(self, name: &str, rel: f64, floor_frac: f64) -> CheckResult {
        let scale = self
            .pairs
            .iter()
            .fold(0.0f64, |m, &(_, r)| m.max(r.abs()));
        let mut worst = self.worst_abs;
        for &(c, r) in &self.pairs {
            let tol = rel * r.abs() + floor_frac * scale + f64::MIN_POSITIVE;
            worst = worst.max((c - r).abs() / tol);
        }
        CheckResult {
            name: name.to_string(),
            points: self.pairs.len() + self.abs_points,
            worst_error_ratio: worst,
            pass: worst <= 1.0,
        }
    }
}

fn sample_indices(len: usize, n: usize) -> Vec<usize> {
    let n = n.clamp(2, len);
    (0..n).map(|i| i * (len - 1) / (n - 1)).collect()
}

/// Runs the full suite against the configured ensemble.
pub fn run(cfg: &RunConfig, opts: &ValidateOptions) -> Result<ValidationReport> {
    let rel = 1e-7 * opts.tol_scale;
    let floor = 1e-10 * opts.tol_scale;
    let norm_tol = 1e-8 * opts.tol_scale;
    let pauli_tol = 1e-18 * opts.tol_scale;

    let ens = cfg.ensemble()?;
    let det = cfg.detector(&ens)?;
    let pair = &ens.two_el;
    let dk = ens.one_el.dk();
    let spec = QuadratureSpec::default();
    let (xlo, xhi) = det.axis_bounds(0);
    let (ylo, yhi) = det.axis_bounds(1);

    let mut checks = Vec::new();

    // --- Figure 1-4 time sweeps: one quadrature pass per sampled time,
    // then the five closed-form columns against reference combinations.
    // The 3D values factorize per axis (the transverse packets share a
    // center), so the 3D reference is the beam-axis window integral
    // times the squared transverse one.
    let grid = cfg.time_grid(&ens)?;
    let mut c_d1 = Acc::new();
    let mut c_sym = Acc::new();
    let mut c_asym = Acc::new();
    let mut c_d2tot = Acc::new();
    let mut c_total = Acc::new();
    for &i in &sample_indices(grid.len(), opts.n_samples) {
        let t = grid[i];
        // One heavy momentum pass serves all beam-axis integrals: the
        // ensemble's one-electron packet is the pair's first member, so
        // its window mass is the `ia` piece.
        let pieces = quadrature_density2_pieces(xlo, xhi, pair, t, &spec)?;
        let qx = pieces.ia;
        let qy = quadrature_density(ylo, yhi, 0.0, dk, t, &spec)?;
        let q2s = pieces.combine(1.0) * qy * qy;
        let q2a = pieces.combine(-1.0) * qy * qy;
        let d1 = delta1_3d(&det, &ens.one_el, t)?;
        let ds = delta2_3d_scaled(Symmetry::Symmetric, &det, pair, t, opts.interference_scale)?;
        let da = delta2_3d_scaled(Symmetry::Antisymmetric, &det, pair, t, opts.interference_scale)?;
        c_d1.add(d1, qx * qy * qy);
        c_sym.add(ds, q2s);
        c_asym.add(da, q2a);
        c_d2tot.add(0.25 * ds + 0.75 * da, 0.25 * q2s + 0.75 * q2a);
        c_total.add(
            ens.p1 * d1 + ens.p2 * (0.25 * ds + 0.75 * da),
            ens.p1 * qx * qy * qy + ens.p2 * (0.25 * q2s + 0.75 * q2a),
        );
    }
    checks.push(c_d1.finish("fig1_d1_vs_quadrature", rel, floor));
    checks.push(c_sym.finish("fig2_sym_vs_quadrature", rel, floor));
    checks.push(c_asym.finish("fig2_antisym_vs_quadrature", rel, floor));
    checks.push(c_d2tot.finish("fig3_total_vs_quadrature", rel, floor));
    checks.push(c_total.finish("fig4_grand_total_vs_quadrature", rel, floor));

    // --- Figure 5: joint two-detector density along the x2 sweep at the
    // pair's arrival time, plus the Pauli zero at coincidence.
    let kmid = 0.5 * (pair.a().k0()[0] + pair.b().k0()[0]);
    let t5 = cfg.detector_x_m * M_E / (HBAR * kmid);
    let x1 = cfg.detector_x_m;
    let lo = cfg.x_min_m.unwrap_or(x1 - 2e-6);
    let hi = cfg.x_max_m.unwrap_or(x1 + 2e-6);
    let mut c_joint = Acc::new();
    let mut c_pauli = Acc::new();
    for j in 0..opts.n_samples {
        let x2 = lo + (hi - lo) * j as f64 / (opts.n_samples - 1) as f64;
        let (ps, pas, pt) = joint_density(pair, x1, t5, x2, t5)?;
        let (qs, qa) = quadrature_joint_pointwise(pair, x1, t5, x2, t5, &spec)?;
        c_joint.add(ps, qs);
        c_joint.add(pas, qa);
        c_joint.add(pt, 0.25 * qs + 0.75 * qa);
    }
    let (_, pas_c, _) = joint_density(pair, x1, t5, x1, t5)?;
    let (_, pas_q) = quadrature_joint_pointwise(pair, x1, t5, x1, t5, &spec)?;
    c_pauli.add_abs(pas_c, pauli_tol);
    c_pauli.add_abs(pas_q, pauli_tol);
    let (_, pas_src, _) = joint_density_t0(pair, 0.0, 0.0)?;
    c_pauli.add_abs(pas_src, pauli_tol);
    checks.push(c_joint.finish("fig5_joint_vs_quadrature", rel, floor));
    checks.push(c_pauli.finish("pauli_zero_at_coincidence", rel, floor));

    // --- Single-detector marginal against direct 2D marginalization.
    let mut c_marg = Acc::new();
    for x in [-4e-9, 0.0, 1.7e-9, 6e-9] {
        let (_, _, want) = marginal_density(pair, x)?;
        let got = quadrature_marginal(pair, x, &spec)?;
        c_marg.add(want, got);
    }
    checks.push(c_marg.finish("marginal_vs_quadrature", rel, floor));

    // --- Normalizations: one-electron density at t = 0 and at the
    // detector transit, the t = 0 joint density over the plane, and the
    // single-detector marginal.
    let mut c_norm = Acc::new();
    let k0 = ens.one_el.k0()[0];
    for t in [0.0, arrival_time(&ens.one_el, cfg.detector_x_m)?] {
        let alpha = crate::degeneracy::alpha(t, dk)?;
        let sigma = 1.0 / (2.0 * dk * alpha.sqrt());
        let center = HBAR * k0 * t / M_E;
        let mass = integrate_real(center - 10.0 * sigma, center + 10.0 * sigma, 640, |x| {
            p1_density(k0, dk, x, t).unwrap_or(f64::NAN)
        });
        c_norm.add(mass, 1.0);
    }
    let w = 6.0 / dk;
    let joint_mass = integrate_real(-w, w, 768, |x| {
        integrate_real(-w, w, 768, |y| joint_density_t0(pair, x, y).map(|v| v.2).unwrap_or(f64::NAN))
    });
    c_norm.add(joint_mass, 1.0);
    let marg_mass = integrate_real(-w, w, 768, |x| {
        marginal_density(pair, x).map(|v| v.2).unwrap_or(f64::NAN)
    });
    c_norm.add(marg_mass, 1.0);
    checks.push(c_norm.finish("density_normalizations", norm_tol, 0.0));

    // --- Figure 6: the closed-form momentum curve must be monotone, and
    // the time of flight recovered by quadrature of dt = mₑ dx / (2p)
    // must match the detector transit the trajectory integrator used.
    let s = CoulombScenario::from_packet(pair, cfg.detector_x_m)?;
    let mut c_mono = Acc::new();
    let mut prev = 0.0;
    for j in 0..opts.n_samples {
        let x = s.x0_rel * 10f64.powf(6.0 * j as f64 / (opts.n_samples - 1) as f64);
        let p = relative_momentum(&s, x)?;
        // Relative size of any monotonicity violation, against rel_tol.
        c_mono.add_abs((prev - p).max(0.0) / p, rel);
        prev = p;
    }
    checks.push(c_mono.finish("fig6_momentum_monotone", rel, floor));
    let mut c_tof = Acc::new();
    let x_f = separation_at_detector(&s)?;
    // Substituting x = x0 + u² removes the p → 0 singularity at release.
    let u_max = (x_f - s.x0_rel).sqrt();
    let t_quad = integrate_real(0.0, u_max, 2048, |u| {
        let x = s.x0_rel + u * u;
        // p >= p0 > 0 on [x0, x_f], so failures surface as NaN.
        match relative_momentum(&s, x) {
            Ok(p) if p > 0.0 => u * M_E / p,
            _ => f64::NAN,
        }
    });
    c_tof.add(t_quad, s.t_detector());
    checks.push(c_tof.finish("fig6_time_of_flight", rel, 0.0));

    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        rel_tol: rel,
        abs_floor: floor,
        norm_tol,
        pauli_tol,
        interference_scale: opts.interference_scale,
        checks,
        pass,
    })
}
