//! Physical constants (CODATA 2018) and the energy/wavenumber
//! conversions every other module agrees on.
//!
//! Values are compiled in and not user-configurable so that repeated runs
//! are bit-for-bit reproducible.

use crate::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;
/// Electron mass, kg.
pub const M_E: f64 = 9.1093837015e-31;
/// Elementary charge, C.
pub const Q_E: f64 = 1.602176634e-19;
/// Coulomb constant 1/(4πε₀), N·m²/C².
pub const K_COULOMB: f64 = 8.9875517923e9;
/// One electronvolt in joule.
pub const EV_TO_JOULE: f64 = 1.602176634e-19;

/// Mean wavenumber k = √(2 mₑ E)/ħ for a kinetic energy given in eV.
pub fn energy_to_wavenumber(energy_ev: f64) -> Result<f64> {
    if !energy_ev.is_finite() || energy_ev < 0.0 {
        return Err(Error::Domain(format!(
            "energy must be finite and non-negative, got {energy_ev} eV"
        )));
    }
    Ok((2.0 * M_E * energy_ev * EV_TO_JOULE).sqrt() / HBAR)
}

/// Wavenumber spread Δk = mₑ ΔE / (ħ² k₀), the first-order propagation of
/// an energy spread ΔE (eV) through the dispersion relation at k₀.
pub fn energy_spread_to_dk(de_ev: f64, k0: f64) -> Result<f64> {
    if !de_ev.is_finite() || de_ev < 0.0 {
        return Err(Error::Domain(format!(
            "energy spread must be finite and non-negative, got {de_ev} eV"
        )));
    }
    if !k0.is_finite() || k0 <= 0.0 {
        return Err(Error::Domain(format!(
            "reference wavenumber must be positive, got {k0} 1/m"
        )));
    }
    Ok(M_E * de_ev * EV_TO_JOULE / (HBAR * HBAR * k0))
}

/// Inverse of [`energy_to_wavenumber`]: kinetic energy in eV of a plane
/// wave with wavenumber `k`.
pub fn wavenumber_to_energy(k: f64) -> Result<f64> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::Domain(format!(
            "wavenumber must be finite and non-negative, got {k} 1/m"
        )));
    }
    Ok(HBAR * HBAR * k * k / (2.0 * M_E * EV_TO_JOULE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters() {
        // E0 = 400 eV maps onto k0 = 1.024e11 1/m, dE = 1 eV onto
        // dk = 1.28e8 1/m.
        let k0 = energy_to_wavenumber(400.0).unwrap();
        assert!((k0 / 1.024e11 - 1.0).abs() < 5e-3, "k0 = {k0}");
        let dk = energy_spread_to_dk(1.0, k0).unwrap();
        assert!((dk / 1.28e8 - 1.0).abs() < 1e-2, "dk = {dk}");
    }

    #[test]
    fn zero_energy_and_linearity() {
        assert_eq!(energy_to_wavenumber(0.0).unwrap(), 0.0);
        let k0 = energy_to_wavenumber(400.0).unwrap();
        assert_eq!(energy_spread_to_dk(0.0, k0).unwrap(), 0.0);
        // k scales as sqrt(E): quarter energy halves k.
        let k100 = energy_to_wavenumber(100.0).unwrap();
        assert!((k100 / (0.5 * k0) - 1.0).abs() < 1e-14);
        // dk is linear in dE.
        let d1 = energy_spread_to_dk(1.0, k0).unwrap();
        let d2 = energy_spread_to_dk(2.0, k0).unwrap();
        assert!((d2 / (2.0 * d1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        for e in [1e-3, 0.5, 100.0, 400.0, 1e4] {
            let k = energy_to_wavenumber(e).unwrap();
            let back = wavenumber_to_energy(k).unwrap();
            assert!((back / e - 1.0).abs() < 1e-12, "{e} -> {k} -> {back}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(energy_to_wavenumber(-1.0).is_err());
        assert!(energy_to_wavenumber(f64::NAN).is_err());
        assert!(energy_spread_to_dk(1.0, 0.0).is_err());
        assert!(energy_spread_to_dk(1.0, -5.0).is_err());
        assert!(energy_spread_to_dk(-1.0, 1e11).is_err());
    }
}
