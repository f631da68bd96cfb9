//! Position-space detection statistics on the beam axis: the dispersing
//! one-electron amplitude and density, equal-time and time-generalized
//! two-detector joint densities, single-detector marginals and the
//! one-click mixture used to discriminate one- and two-electron events.
//!
//! Carrier phases k₀x − ħk₀²t/(2mₑ) reach ~1e10 rad at the detector, so
//! interference terms never subtract two independently rounded carrier
//! exponentials; the phase difference is formed analytically
//! ([`interference_phase`]) and only slowly varying envelopes are
//! multiplied in complex arithmetic.

use num_complex::Complex64;

use crate::constants::{HBAR, M_E};
use crate::statemodel::{normalizations, overlap, SourceEnsemble, TwoElectronPacket};
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

fn check_packet(dk: f64) -> Result<()> {
    if !dk.is_finite() || dk <= 0.0 {
        return Err(Error::Domain(format!(
            "wavenumber spread must be positive, got {dk}"
        )));
    }
    Ok(())
}

/// Carrier phase of a freely evolving packet, φ₀ = k₀x − ħk₀²t/(2mₑ).
///
/// Kept as one canonical expression so every caller (including the
/// quadrature reference) rounds it identically; its absolute f64 error
/// is ~1e-6 rad at the detector and must cancel between amplitudes.
pub fn carrier_phase(k0: f64, x: f64, t: f64) -> f64 {
    k0 * x - HBAR * k0 * k0 * t / (2.0 * M_E)
}

/// Slowly varying part of the dispersing Gaussian amplitude: the full
/// amplitude is `packet_envelope` × e^(iφ₀) with φ₀ from
/// [`carrier_phase`]. Obtained from the Gaussian momentum integral in
/// the frame co-moving at the group velocity ħk₀/mₑ.
pub fn packet_envelope(k0: f64, dk: f64, x: f64, t: f64) -> Result<Complex64> {
    check_packet(dk)?;
    if !x.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("non-finite coordinates ({x}, {t})")));
    }
    // a = 1/(4 dk^2) + i hbar t / (2 m); the co-moving Gaussian integral
    // gives sqrt(pi/a) exp(-X^2/(4a)).
    let a = Complex64::new(1.0 / (4.0 * dk * dk), HBAR * t / (2.0 * M_E));
    let x_co = x - HBAR * k0 * t / M_E;
    let pref = 1.0 / ((2.0 * PI).sqrt() * (2.0 * PI * dk * dk).powf(0.25));
    Ok(pref * (PI / a).sqrt() * (-x_co * x_co / (4.0 * a)).exp())
}

/// Full one-electron position amplitude ⟨0|Ψ̂(x,t)|1ᵉˡ⟩ in m^(−1/2);
/// its squared modulus is [`p1_density`].
pub fn packet_amplitude(k0: f64, dk: f64, x: f64, t: f64) -> Result<Complex64> {
    Ok(packet_envelope(k0, dk, x, t)? * Complex64::from_polar(1.0, carrier_phase(k0, x, t)))
}

/// One-electron probability density
/// P₁(x,t) = Δk√(2α)/√π · e^(−2Δk²α(x−ħk₀t/mₑ)²), per meter.
pub fn p1_density(k0: f64, dk: f64, x: f64, t: f64) -> Result<f64> {
    check_packet(dk)?;
    let a = crate::degeneracy::alpha(t, dk)?;
    let x_co = x - HBAR * k0 * t / M_E;
    Ok(dk * (2.0 * a).sqrt() / PI.sqrt() * (-2.0 * dk * dk * a * x_co * x_co).exp())
}

/// Phase difference between the direct and exchanged two-electron
/// amplitude products,
/// Δ = (k_a−k_b)[(x₁−x₂) − ħ(k_a+k_b)(t₁−t₂)/(2mₑ)],
/// formed analytically so the ~1e10 rad carriers cancel exactly.
pub fn interference_phase(k_a: f64, k_b: f64, x1: f64, t1: f64, x2: f64, t2: f64) -> f64 {
    (k_a - k_b) * ((x1 - x2) - HBAR * (k_a + k_b) * (t1 - t2) / (2.0 * M_E))
}

/// Joint two-detector density at t=0 for the symmetric, antisymmetric
/// and spin-weighted total components, per m²:
/// P_{S/AS} = 2Δk² e^(−2Δk²(x₁²+x₂²)) (1 ± cos X(k₀−k₀′)) / (π(1±ov²)).
pub fn joint_density_t0(pair: &TwoElectronPacket, x1: f64, x2: f64) -> Result<(f64, f64, f64)> {
    let dk = pair.dk();
    let ov2 = overlap(pair).powi(2);
    let dkx = pair.a().k0()[0] - pair.b().k0()[0];
    let env = 2.0 * dk * dk / PI * (-2.0 * dk * dk * (x1 * x1 + x2 * x2)).exp();
    let c = ((x1 - x2) * dkx).cos();
    let ps = env * (1.0 + c) / (1.0 + ov2);
    let pas = env * (1.0 - c) / (1.0 - ov2);
    Ok((ps, pas, 0.25 * ps + 0.75 * pas))
}

/// Time-generalized joint density (HBT configuration): detector 1 at
/// (x₁,t₁), detector 2 at (x₂,t₂). Built from symmetrized products of
/// dispersing single-packet amplitudes,
/// P± = |N± [A_a(1)A_b(2) ± A_b(1)A_a(2)]|², reducing to
/// [`joint_density_t0`] at t₁=t₂=0.
pub fn joint_density(
    pair: &TwoElectronPacket,
    x1: f64,
    t1: f64,
    x2: f64,
    t2: f64,
) -> Result<(f64, f64, f64)> {
    let dk = pair.dk();
    let (ka, kb) = (pair.a().k0()[0], pair.b().k0()[0]);
    let ga1 = packet_envelope(ka, dk, x1, t1)?;
    let ga2 = packet_envelope(ka, dk, x2, t2)?;
    let gb1 = packet_envelope(kb, dk, x1, t1)?;
    let gb2 = packet_envelope(kb, dk, x2, t2)?;
    let direct = ga1 * gb2;
    let exchanged = gb1 * ga2;
    let phase = interference_phase(ka, kb, x1, t1, x2, t2);
    let cross = 2.0 * (Complex64::from_polar(1.0, phase) * direct * exchanged.conj()).re;
    let base = direct.norm_sqr() + exchanged.norm_sqr();
    let (np, nm) = normalizations(pair);
    let ps = np * np * (base + cross);
    let pas = nm * nm * (base - cross);
    Ok((ps.max(0.0), pas.max(0.0), 0.25 * ps.max(0.0) + 0.75 * pas.max(0.0)))
}

/// Single-detector marginal of the t=0 joint density, per meter:
/// P_{S/AS}(x) = √2Δk e^(−2Δk²x²)(1 ± ov·cos x(k₀−k₀′))/(√π(1±ov²)).
pub fn marginal_density(pair: &TwoElectronPacket, x: f64) -> Result<(f64, f64, f64)> {
    let dk = pair.dk();
    let ov = overlap(pair);
    let dkx = pair.a().k0()[0] - pair.b().k0()[0];
    let env = 2.0f64.sqrt() * dk / PI.sqrt() * (-2.0 * dk * dk * x * x).exp();
    let c = ov * (x * dkx).cos();
    let ps = env * (1.0 + c) / (1.0 + ov * ov);
    let pas = env * (1.0 - c) / (1.0 - ov * ov);
    Ok((ps.max(0.0), pas.max(0.0), 0.25 * ps.max(0.0) + 0.75 * pas.max(0.0)))
}

/// Unnormalized one-click position density of the source at t=0,
/// p₁·P₁(x) + p₂·P(x); integrates to p₁+p₂ over x.
pub fn one_click_mixture(ens: &SourceEnsemble, x: f64) -> Result<f64> {
    let p1 = p1_density(ens.one_el.k0()[0], ens.one_el.dk(), x, 0.0)?;
    let (_, _, p) = marginal_density(&ens.two_el, x)?;
    Ok(ens.p1 * p1 + ens.p2 * p)
}
