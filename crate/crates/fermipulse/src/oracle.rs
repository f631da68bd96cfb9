//! Brute-force numerical reference. Position-space amplitudes are built
//! by direct Gauss–Legendre quadrature of the momentum-space packet
//! against the free-evolution phase, and densities are integrated over
//! windows, arbitrating every closed-form result in `degeneracy` and
//! `detection`.
//!
//! The only analytic step shared with the closed forms is factoring out
//! the carrier e^(iφ₀) (φ₀ ≈ 1e10 rad at the detector): quadrature is
//! performed in the frame co-moving at the group velocity, where the
//! integrand phase is bounded by the window geometry, and the carrier is
//! reattached with the byte-identical expression the closed forms use.
//! Without this both sides would carry independent ~1e-6 rad carrier
//! rounding and no 1e-7 comparison could succeed.

use std::sync::LazyLock;

use num_complex::Complex64;

use crate::constants::{HBAR, M_E};
use crate::detection::{carrier_phase, interference_phase};
use crate::statemodel::TwoElectronPacket;
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Resolution parameters of the quadrature reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Truncation of the momentum integral at k₀ ± this many Δk.
    pub k_halfwidth_in_dk: f64,
    /// Minimum number of momentum nodes (grows automatically with the
    /// integrand's phase span).
    pub n_k: usize,
    /// Position nodes for marginalization and normalization integrals.
    pub n_x: usize,
    /// Relative tolerance for internal convergence (doubling) checks.
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            k_halfwidth_in_dk: 8.0,
            n_k: 4096,
            n_x: 4096,
            rel_tol: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_k < 16 || self.n_x < 16 {
            return Err(Error::Config(format!(
                "quadrature needs at least 16 nodes per axis, got n_k={}, n_x={}",
                self.n_k, self.n_x
            )));
        }
        if !(self.rel_tol > 0.0) || !(self.k_halfwidth_in_dk > 0.0) {
            return Err(Error::Config(
                "rel_tol and k_halfwidth_in_dk must be positive".into(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------
// Gauss-Legendre rules

const PANEL_ORDER: usize = 32;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1],
/// found by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n(x) and its derivative by upward recurrence.
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // Recompute derivative at the converged node for the weight.
        let (mut p0, mut p1) = (1.0f64, x);
        for j in 2..=n {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

static PANEL_RULE: LazyLock<(Vec<f64>, Vec<f64>)> = LazyLock::new(|| gauss_legendre(PANEL_ORDER));

/// Composite Gauss–Legendre integration of `f` over [lo, hi] with at
/// least `min_nodes` total nodes.
fn integrate<F: FnMut(f64) -> Complex64>(
    lo: f64,
    hi: f64,
    min_nodes: usize,
    mut f: F,
) -> Complex64 {
    let (nodes, weights) = &*PANEL_RULE;
    let panels = min_nodes.div_ceil(PANEL_ORDER).max(1);
    let h = (hi - lo) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let (a, b) = (lo + p as f64 * h, lo + (p + 1) as f64 * h);
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in nodes.iter().zip(weights) {
            acc += *w * r * f(c + r * x);
        }
    }
    acc
}

pub(crate) fn integrate_real<F: FnMut(f64) -> f64>(lo: f64, hi: f64, min_nodes: usize, mut f: F) -> f64 {
    integrate(lo, hi, min_nodes, |x| Complex64::new(f(x), 0.0)).re
}

// ---------------------------------------------------------------------
// Momentum tables and amplitudes

// Per-time table of quadrature nodes kappa_j (relative to k0) with
// weight * C(kappa) * exp(-i hbar kappa^2 t / 2m) folded in; the
// remaining factor per position is exp(i kappa X). Nodes are stored by
// panel: kappa = center_p + offset_i with equally spaced centers, so
// exp(i kappa X) factorizes and the panel phase advances by a constant
// rotation instead of a per-node sin_cos (the envelope evaluation
// dominates the oracle's runtime at ~1e6 nodes per detector-era table).
struct KTable {
    g: Vec<Complex64>,
    offsets: [f64; PANEL_ORDER],
    c0: f64,
    step: f64,
    panels: usize,
}

impl KTable {
    fn build(dk: f64, t: f64, half: f64, min_nodes: usize) -> Self {
        let (nodes, weights) = &*PANEL_RULE;
        let panels = min_nodes.div_ceil(PANEL_ORDER).max(1);
        let h = 2.0 * half / panels as f64;
        let r = 0.5 * h;
        let norm = 1.0 / (2.0 * PI * dk * dk).powf(0.25);
        let mut offsets = [0.0; PANEL_ORDER];
        for (o, x) in offsets.iter_mut().zip(nodes) {
            *o = r * x;
        }
        let c0 = -half + 0.5 * h;
        let mut g = Vec::with_capacity(panels * PANEL_ORDER);
        for p in 0..panels {
            let c = c0 + p as f64 * h;
            for (o, w) in offsets.iter().zip(weights) {
                let k = c + o;
                let amp = norm * (-k * k / (4.0 * dk * dk)).exp();
                let phase = -HBAR * k * k * t / (2.0 * M_E);
                g.push(w * r * amp * Complex64::from_polar(1.0, phase));
            }
        }
        Self { g, offsets, c0, step: h, panels }
    }

    // Co-moving envelope at offset X from the packet center:
    // (1/sqrt(2 pi)) * sum_j g_j exp(i kappa_j X).
    fn envelope(&self, x_co: f64) -> Complex64 {
        let mut eoff = [Complex64::new(0.0, 0.0); PANEL_ORDER];
        for (e, o) in eoff.iter_mut().zip(&self.offsets) {
            *e = Complex64::from_polar(1.0, o * x_co);
        }
        let rot = Complex64::from_polar(1.0, self.step * x_co);
        let mut cphase = Complex64::from_polar(1.0, self.c0 * x_co);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..self.panels {
            // Re-anchor the recurrence so rotation round-off stays below
            // ~1e-13 over ~1e5 panels.
            if p % 256 == 0 && p > 0 {
                cphase = Complex64::from_polar(1.0, (self.c0 + p as f64 * self.step) * x_co);
            }
            let base = p * PANEL_ORDER;
            let mut inner = Complex64::new(0.0, 0.0);
            for (gj, ej) in self.g[base..base + PANEL_ORDER].iter().zip(&eoff) {
                inner += gj * ej;
            }
            acc += inner * cphase;
            cphase *= rot;
        }
        acc / (2.0 * PI).sqrt()
    }
}

// Node count that keeps >= ~8 quadrature nodes per oscillation period
// for the worst phase span seen over offsets up to |X| = x_co_max.
// (5 per period leaves ~1e-5 residual with 32-node panels; 8 is
// converged far past the 1e-9 internal tolerance.)
fn k_nodes_needed(spec: &QuadratureSpec, dk: f64, t: f64, x_co_max: f64) -> usize {
    let half = spec.k_halfwidth_in_dk * dk;
    let phase_span = 2.0 * half * x_co_max.abs() + HBAR * half * half * t.abs() / (2.0 * M_E);
    let from_phase = (phase_span / 24.0).ceil() as usize * PANEL_ORDER;
    from_phase.max(spec.n_k)
}

// Position nodes that resolve the packet inside an arbitrarily wide
// window: one 32-node panel per dispersed packet width.
fn x_nodes_needed(x_lo: f64, x_hi: f64, dk: f64, t: f64) -> Result<usize> {
    let alpha = crate::degeneracy::alpha(t, dk)?;
    let sigma = 1.0 / (2.0 * dk * alpha.sqrt());
    let panels = ((x_hi - x_lo) / sigma).ceil().max(1.0) as usize;
    Ok(panels * PANEL_ORDER)
}

/// Quadrature amplitude (1/√2π)∫C(k)e^(ikx − iħk²t/2mₑ)dk, with an
/// internal node-doubling convergence check.
pub fn quadrature_amplitude(
    k0: f64,
    dk: f64,
    x: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    spec.validate()?;
    let x_co = x - HBAR * k0 * t / M_E;
    let half = spec.k_halfwidth_in_dk * dk;
    let n = k_nodes_needed(spec, dk, t, x_co);
    let coarse = KTable::build(dk, t, half, n).envelope(x_co);
    let fine = KTable::build(dk, t, half, 2 * n).envelope(x_co);
    let scale = fine.norm().max(dk.sqrt() * 1e-12);
    if (fine - coarse).norm() > spec.rel_tol * scale {
        return Err(Error::Numerics(format!(
            "momentum quadrature not converged at x={x}, t={t}: {} vs {} with {n} nodes",
            coarse, fine
        )));
    }
    Ok(fine * Complex64::from_polar(1.0, carrier_phase(k0, x, t)))
}

/// ∫ over [x_lo, x_hi] of the quadrature |amplitude|²: the reference for
/// the one-electron degeneracy along one axis.
pub fn quadrature_density(
    x_lo: f64,
    x_hi: f64,
    k0: f64,
    dk: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if !(x_lo < x_hi) {
        return Err(Error::Domain(format!(
            "window must be ordered, got [{x_lo}, {x_hi}]"
        )));
    }
    let x_co_max = (x_lo - HBAR * k0 * t / M_E).abs().max((x_hi - HBAR * k0 * t / M_E).abs());
    let half = spec.k_halfwidth_in_dk * dk;
    let n = k_nodes_needed(spec, dk, t, x_co_max);
    let density = |table: &KTable, nx: usize| {
        integrate_real(x_lo, x_hi, nx, |x| {
            table.envelope(x - HBAR * k0 * t / M_E).norm_sqr()
        })
    };
    let nx = x_nodes_needed(x_lo, x_hi, dk, t)?;
    let table = KTable::build(dk, t, half, n);
    let coarse = density(&table, nx);
    let table2 = KTable::build(dk, t, half, 2 * n);
    let fine = density(&table2, 2 * nx);
    if (fine - coarse).abs() > spec.rel_tol * fine.abs().max(1e-12) {
        return Err(Error::Numerics(format!(
            "window-density quadrature not converged on [{x_lo}, {x_hi}] at t={t}: {coarse} vs {fine}"
        )));
    }
    Ok(fine)
}

/// Packet overlap by direct momentum quadrature of C_b*(k)·C_a(k) along
/// the beam axis (real for real centers).
pub fn quadrature_overlap(pair: &TwoElectronPacket, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let dk = pair.dk();
    let (ka, kb) = (pair.a().k0()[0], pair.b().k0()[0]);
    let half = spec.k_halfwidth_in_dk * dk;
    let (lo, hi) = (ka.min(kb) - half, ka.max(kb) + half);
    let norm = 1.0 / (2.0 * PI * dk * dk).sqrt();
    Ok(integrate_real(lo, hi, spec.n_k, |k| {
        norm * (-((k - ka).powi(2) + (k - kb).powi(2)) / (4.0 * dk * dk)).exp()
    }))
}

/// Pointwise two-electron joint density from quadrature amplitudes:
/// (P_S, P_AS) = |N± [A_a(x₁,t₁)A_b(x₂,t₂) ± A_b(x₁,t₁)A_a(x₂,t₂)]|².
pub fn quadrature_joint_pointwise(
    pair: &TwoElectronPacket,
    x1: f64,
    t1: f64,
    x2: f64,
    t2: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let dk = pair.dk();
    let (ka, kb) = (pair.a().k0()[0], pair.b().k0()[0]);
    let half = spec.k_halfwidth_in_dk * dk;
    let env = |k0: f64, x: f64, t: f64| -> Result<Complex64> {
        let x_co = x - HBAR * k0 * t / M_E;
        let n = k_nodes_needed(spec, dk, t, x_co);
        Ok(KTable::build(dk, t, half, 2 * n).envelope(x_co))
    };
    let ga1 = env(ka, x1, t1)?;
    let ga2 = env(ka, x2, t2)?;
    let gb1 = env(kb, x1, t1)?;
    let gb2 = env(kb, x2, t2)?;
    let direct = ga1 * gb2;
    let exchanged = gb1 * ga2;
    let phase = interference_phase(ka, kb, x1, t1, x2, t2);
    let cross = 2.0 * (Complex64::from_polar(1.0, phase) * direct * exchanged.conj()).re;
    let base = direct.norm_sqr() + exchanged.norm_sqr();
    let ov = quadrature_overlap(pair, spec)?;
    let np2 = 1.0 / (2.0 * (1.0 + ov * ov));
    let nm2 = 1.0 / (2.0 * (1.0 - ov * ov));
    Ok(((np2 * (base + cross)).max(0.0), (nm2 * (base - cross)).max(0.0)))
}

/// Sign-independent window integrals behind the two-electron one-body
/// density: `ia` = ∫|A_a|², `ib` = ∫|A_b|², and the interference term
/// `ic` = ∫2 ov·Re(A_a A_b*), with the overlap from momentum quadrature.
/// Either symmetry combines them as (ia + ib ± ic)/(1 ± ov²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoElectronWindowPieces {
    pub ia: f64,
    pub ib: f64,
    pub ic: f64,
    pub ov: f64,
}

impl TwoElectronWindowPieces {
    /// One-axis two-electron degeneracy for the symmetric (+1) or
    /// antisymmetric (−1) combination.
    pub fn combine(&self, sign: f64) -> f64 {
        let ov2 = self.ov * self.ov;
        ((self.ia + self.ib + sign * self.ic) / (1.0 + sign * ov2)).max(0.0)
    }
}

/// Computes [`TwoElectronWindowPieces`] by quadrature: one shared pass
/// over the window serves both symmetries.
pub fn quadrature_density2_pieces(
    x_lo: f64,
    x_hi: f64,
    pair: &TwoElectronPacket,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<TwoElectronWindowPieces> {
    spec.validate()?;
    if !(x_lo < x_hi) {
        return Err(Error::Domain(format!(
            "window must be ordered, got [{x_lo}, {x_hi}]"
        )));
    }
    let dk = pair.dk();
    let (ka, kb) = (pair.a().k0()[0], pair.b().k0()[0]);
    let half = spec.k_halfwidth_in_dk * dk;
    let (va, vb) = (HBAR * ka / M_E, HBAR * kb / M_E);
    let x_co_max = [x_lo - va * t, x_hi - va * t, x_lo - vb * t, x_hi - vb * t]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let n = k_nodes_needed(spec, dk, t, x_co_max);
    let ov = quadrature_overlap(pair, spec)?;
    let body = |table: &KTable, min_nodes: usize| -> [f64; 3] {
        let (nodes, weights) = &*PANEL_RULE;
        let panels = min_nodes.div_ceil(PANEL_ORDER).max(1);
        let h = (x_hi - x_lo) / panels as f64;
        let mut acc = [0.0f64; 3];
        for p in 0..panels {
            let a = x_lo + p as f64 * h;
            let (c, r) = (a + 0.5 * h, 0.5 * h);
            for (xn, w) in nodes.iter().zip(weights) {
                let x = c + r * xn;
                let wr = w * r;
                let ga = table.envelope(x - va * t);
                let gb = table.envelope(x - vb * t);
                // Carrier difference of A_a(x,t) A_b*(x,t):
                // (k_a−k_b)(x − ħ(k_a+k_b)t/(2mₑ)).
                let dphi = interference_phase(ka, kb, x, t, 0.0, 0.0);
                let cross = 2.0 * ov * (Complex64::from_polar(1.0, dphi) * ga * gb.conj()).re;
                acc[0] += wr * ga.norm_sqr();
                acc[1] += wr * gb.norm_sqr();
                acc[2] += wr * cross;
            }
        }
        acc
    };
    let nx = x_nodes_needed(x_lo, x_hi, dk, t)?;
    let coarse = body(&KTable::build(dk, t, half, n), nx);
    let fine = body(&KTable::build(dk, t, half, 2 * n), 2 * nx);
    let scale = (fine[0] + fine[1]).abs().max(1e-12);
    for i in 0..3 {
        if (fine[i] - coarse[i]).abs() > 10.0 * spec.rel_tol * scale {
            return Err(Error::Numerics(format!(
                "two-electron window quadrature not converged on [{x_lo}, {x_hi}] at t={t}: \
                 {:?} vs {:?}",
                coarse, fine
            )));
        }
    }
    Ok(TwoElectronWindowPieces {
        ia: fine[0],
        ib: fine[1],
        ic: fine[2],
        ov,
    })
}

/// Window integral of the one-body density of the symmetric (+1) or
/// antisymmetric (−1) two-electron state: the reference for the one-axis
/// two-electron degeneracy, via the exact one-body reduction
/// n(x) = 2N±²[|A_a|² + |A_b|² ± 2 ov·Re(A_a A_b*)].
pub fn quadrature_density2(
    sign: f64,
    x_lo: f64,
    x_hi: f64,
    pair: &TwoElectronPacket,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::Domain(format!("sign must be ±1, got {sign}")));
    }
    Ok(quadrature_density2_pieces(x_lo, x_hi, pair, t, spec)?.combine(sign))
}

/// Numerical single-detector marginal at t=0: ∫ P_total(x, y) dy from
/// pointwise quadrature joint densities.
pub fn quadrature_marginal(pair: &TwoElectronPacket, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let dk = pair.dk();
    let halfwidth = 8.0 / dk;
    let ov = quadrature_overlap(pair, spec)?;
    let np2 = 1.0 / (2.0 * (1.0 + ov * ov));
    let nm2 = 1.0 / (2.0 * (1.0 - ov * ov));
    let (ka, kb) = (pair.a().k0()[0], pair.b().k0()[0]);
    let half = spec.k_halfwidth_in_dk * dk;
    let table = KTable::build(dk, 0.0, half, spec.n_k);
    let gx_a = table.envelope(x);
    let gx_b = table.envelope(x);
    // At t=0 both packets share the same (real) envelope but different
    // carriers; the envelope evaluations stay split to mirror the
    // general structure.
    Ok(integrate_real(-halfwidth, halfwidth, spec.n_x, |y| {
        let gy_a = table.envelope(y);
        let gy_b = table.envelope(y);
        let direct = gx_a * gy_b;
        let exchanged = gx_b * gy_a;
        let phase = interference_phase(ka, kb, x, 0.0, y, 0.0);
        let cross = 2.0 * (Complex64::from_polar(1.0, phase) * direct * exchanged.conj()).re;
        let base = direct.norm_sqr() + exchanged.norm_sqr();
        let ps = np2 * (base + cross);
        let pas = nm2 * (base - cross);
        0.25 * ps + 0.75 * pas
    }))
}
