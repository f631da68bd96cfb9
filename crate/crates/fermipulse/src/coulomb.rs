//! Classical center-of-mass estimate of two-electron Coulomb repulsion:
//! relative momentum versus separation from energy conservation, the
//! separation reached when the pair's center of mass arrives at the
//! detector, and the comparison against quantum wave-packet dispersion,
//! including the flattened ("pancake") two-dimensional variant.
//!
//! Conventions: the relative kinetic energy is written p²/mₑ, i.e. the
//! reduced mass is μ = mₑ/2, and the separation therefore grows as
//! dx/dt = p/μ = 2p/mₑ. The electron charge enters through `coupling`,
//! normally k_e·qₑ²; setting it to zero is a test hook that makes the
//! motion exactly ballistic.

use crate::constants::{HBAR, K_COULOMB, M_E, Q_E};
use crate::degeneracy::alpha;
use crate::statemodel::TwoElectronPacket;
use crate::{Error, Result};

/// Classical two-electron scenario in the center-of-mass frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombScenario {
    /// Initial relative momentum, kg·m/s.
    pub p0_rel: f64,
    /// Initial separation, m.
    pub x0_rel: f64,
    /// Source-to-detector distance, m.
    pub l_detector: f64,
    /// Center-of-mass speed toward the detector, m/s.
    pub v_com: f64,
    /// Coulomb coupling k_e·qₑ², J·m. Zero disables the interaction
    /// (free-flight test hook).
    pub coupling: f64,
}

impl CoulombScenario {
    pub fn new(p0_rel: f64, x0_rel: f64, l_detector: f64, v_com: f64) -> Result<Self> {
        if !(x0_rel > 0.0) || !(l_detector > 0.0) || !(v_com > 0.0) {
            return Err(Error::Domain(format!(
                "x0_rel, l_detector, v_com must be positive, got {x0_rel}, {l_detector}, {v_com}"
            )));
        }
        if !p0_rel.is_finite() || p0_rel < 0.0 {
            return Err(Error::Domain(format!(
                "initial relative momentum must be non-negative, got {p0_rel}"
            )));
        }
        Ok(Self {
            p0_rel,
            x0_rel,
            l_detector,
            v_com,
            coupling: K_COULOMB * Q_E * Q_E,
        })
    }

    /// Canonical scenario derived from a two-electron packet: relative
    /// momentum ħ|k₀ₓ−k₀ₓ′|, separation 1/(√2Δk), center-of-mass speed
    /// ħ(k₀ₓ+k₀ₓ′)/(2mₑ), detector at `l_detector`.
    pub fn from_packet(pair: &TwoElectronPacket, l_detector: f64) -> Result<Self> {
        let (ka, kb) = (pair.a().k0()[0], pair.b().k0()[0]);
        let p0 = HBAR * (ka - kb).abs();
        let x0 = 1.0 / (std::f64::consts::SQRT_2 * pair.dk());
        let v_com = HBAR * (ka + kb) / (2.0 * M_E);
        Self::new(p0, x0, l_detector, v_com)
    }

    /// Flight time of the center of mass to the detector.
    pub fn t_detector(&self) -> f64 {
        self.l_detector / self.v_com
    }
}

/// Conserved relative energy E₀ = p₀²/mₑ + coupling/x₀.
pub fn total_energy(s: &CoulombScenario) -> f64 {
    s.p0_rel * s.p0_rel / M_E + s.coupling / s.x0_rel
}

/// Relative momentum at separation x, p(x) = √(mₑE₀ − mₑ·coupling/x);
/// monotone rising from p₀ at x₀ toward the terminal √(mₑE₀).
pub fn relative_momentum(s: &CoulombScenario, x: f64) -> Result<f64> {
    if x < s.x0_rel {
        return Err(Error::Domain(format!(
            "separation {x} below the initial {}, classically forbidden for a repulsive start",
            s.x0_rel
        )));
    }
    let e0 = total_energy(s);
    let arg = M_E * e0 - M_E * s.coupling / x;
    if arg < 0.0 {
        return Err(Error::Numerics(format!(
            "negative momentum-squared {arg} at x = {x}"
        )));
    }
    Ok(arg.sqrt())
}

/// Terminal relative momentum p_t = √(mₑE₀) (x → ∞).
pub fn terminal_momentum(s: &CoulombScenario) -> f64 {
    (M_E * total_energy(s)).sqrt()
}

// Separation after flying for `duration` from x0: integrate
// dx/dt = 2 p(x)/mₑ with adaptive RK4 step doubling.
fn integrate_separation(s: &CoulombScenario, duration: f64, rtol: f64) -> Result<f64> {
    let deriv = |x: f64| -> Result<f64> { Ok(2.0 * relative_momentum(s, x)? / M_E) };
    let rk4 = |x: f64, h: f64| -> Result<f64> {
        let k1 = deriv(x)?;
        let k2 = deriv(x + 0.5 * h * k1)?;
        let k3 = deriv(x + 0.5 * h * k2)?;
        let k4 = deriv(x + h * k3)?;
        Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    };
    let mut x = s.x0_rel;
    let mut t = 0.0f64;
    // Initial step: resolve the strongly accelerating start.
    let mut h = duration * 1e-9;
    let e0 = total_energy(s);
    let mut steps = 0u64;
    while t < duration {
        if steps > 50_000_000 {
            return Err(Error::Numerics(format!(
                "separation integration stalled at t = {t} of {duration} (x = {x})"
            )));
        }
        steps += 1;
        if t + h > duration {
            h = duration - t;
        }
        let full = rk4(x, h)?;
        let half = rk4(rk4(x, 0.5 * h)?, 0.5 * h)?;
        let err = (full - half).abs();
        let tol = rtol * half.abs();
        if err > tol {
            h *= 0.5;
            continue;
        }
        // Accept (Richardson-extrapolated), verify energy conservation.
        x = half + (half - full) / 15.0;
        t += h;
        let p = relative_momentum(s, x)?;
        let e = p * p / M_E + s.coupling / x;
        if e0 != 0.0 && ((e - e0) / e0).abs() > 1e-9 {
            return Err(Error::Numerics(format!(
                "energy drift {} at t = {t}",
                (e - e0) / e0
            )));
        }
        if err < 0.1 * tol {
            h *= 2.0;
        }
    }
    Ok(x)
}

/// Separation between the electrons when their center of mass reaches
/// the detector, by adaptive integration of dx/dt = 2p(x)/mₑ over
/// t_det = L/v_com at relative tolerance 1e-10.
pub fn separation_at_detector(s: &CoulombScenario) -> Result<f64> {
    integrate_separation(s, s.t_detector(), 1e-10)
}

/// Same integration at a caller-chosen tolerance (for convergence
/// studies).
pub fn separation_at_detector_with_tol(s: &CoulombScenario, rtol: f64) -> Result<f64> {
    if !(rtol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {rtol}")));
    }
    integrate_separation(s, s.t_detector(), rtol)
}

/// Quantum dispersion ratio Δx(0)/Δx(t) = √α(t).
pub fn dispersion_ratio(dk: f64, t: f64) -> Result<f64> {
    Ok(alpha(t, dk)?.sqrt())
}

/// Two-dimensional "pancake" comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PancakeComparison {
    /// Initial 2D separation √(x₀² + (factor·x₀)²), m.
    pub r0: f64,
    /// ΔxΔy(0)/ΔxΔy(t_det) = √α(t;Δk)·√α(t;Δk/factor).
    pub quantum_ratio: f64,
    /// r₀²/r_det² from the radial energy-conservation model.
    pub coulomb_ratio: f64,
}

/// Compares quantum dispersion against Coulomb repulsion for a packet
/// whose transverse coherence is `transverse_factor` times better than
/// the longitudinal one (transverse spread Δk/factor; transverse offset
/// factor·x₀). The radial Coulomb model reuses the 1D relative momentum
/// along the separation direction starting from r₀.
pub fn pancake_comparison(
    pair: &TwoElectronPacket,
    l_detector: f64,
    transverse_factor: f64,
) -> Result<PancakeComparison> {
    if !(transverse_factor >= 1.0) {
        return Err(Error::Domain(format!(
            "transverse factor must be >= 1, got {transverse_factor}"
        )));
    }
    let base = CoulombScenario::from_packet(pair, l_detector)?;
    let x0 = base.x0_rel;
    let r0 = x0 * (1.0 + transverse_factor * transverse_factor).sqrt();
    let t_det = base.t_detector();
    let dk = pair.dk();
    let quantum_ratio = dispersion_ratio(dk, t_det)? * dispersion_ratio(dk / transverse_factor, t_det)?;
    let radial = CoulombScenario {
        x0_rel: r0,
        ..base
    };
    let r_det = separation_at_detector(&radial)?;
    Ok(PancakeComparison {
        r0,
        quantum_ratio,
        coulomb_ratio: (r0 / r_det).powi(2),
    })
}
