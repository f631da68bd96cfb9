//! Source-state description: Gaussian wave packets, two-electron
//! composites, ensemble weights and the detector window, together with
//! the scalar derived quantities (overlap, normalizations) that all
//! downstream formulas consume.

use crate::constants::{energy_spread_to_dk, energy_to_wavenumber, HBAR, M_E};
use crate::{Error, Result};

/// Isotropic 3D Gaussian wave packet in momentum space: mean wavenumber
/// `k0` per axis and a single spread `dk` shared by all three axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket3D {
    k0: [f64; 3],
    dk: f64,
}

impl GaussianPacket3D {
    pub fn new(k0: [f64; 3], dk: f64) -> Result<Self> {
        if !k0.iter().all(|k| k.is_finite()) {
            return Err(Error::Domain(format!("non-finite packet center {k0:?}")));
        }
        if !dk.is_finite() || dk <= 0.0 {
            return Err(Error::Domain(format!(
                "wavenumber spread must be positive, got {dk}"
            )));
        }
        Ok(Self { k0, dk })
    }

    pub fn k0(&self) -> [f64; 3] {
        self.k0
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    /// Group velocity along the beam (x) axis, m/s.
    pub fn group_velocity_x(&self) -> f64 {
        HBAR * self.k0[0] / M_E
    }
}

/// Two distinguishable-center packets with identical spreads. Equal
/// centers are rejected at construction because the antisymmetric
/// normalization diverges there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoElectronPacket {
    a: GaussianPacket3D,
    b: GaussianPacket3D,
}

impl TwoElectronPacket {
    pub fn new(a: GaussianPacket3D, b: GaussianPacket3D) -> Result<Self> {
        if a.dk != b.dk {
            return Err(Error::Domain(format!(
                "packet spreads must match, got {} and {}",
                a.dk, b.dk
            )));
        }
        if a.k0 == b.k0 {
            return Err(Error::Domain(
                "packet centers must differ; identical centers make the \
                 antisymmetric state unnormalizable"
                    .into(),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &GaussianPacket3D {
        &self.a
    }

    pub fn b(&self) -> &GaussianPacket3D {
        &self.b
    }

    pub fn dk(&self) -> f64 {
        self.a.dk
    }

    /// Euclidean distance between the packet centers, m⁻¹.
    pub fn center_separation(&self) -> f64 {
        let d: f64 = self
            .a
            .k0
            .iter()
            .zip(&self.b.k0)
            .map(|(p, q)| (p - q) * (p - q))
            .sum();
        d.sqrt()
    }
}

/// Occupation-number mixture of the source: vacuum, one-electron and
/// two-electron weights plus the states they refer to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceEnsemble {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub one_el: GaussianPacket3D,
    pub two_el: TwoElectronPacket,
}

impl SourceEnsemble {
    /// Builds the ensemble from (p1, p2); p0 is the remainder.
    pub fn new(
        p1: f64,
        p2: f64,
        one_el: GaussianPacket3D,
        two_el: TwoElectronPacket,
    ) -> Result<Self> {
        for (name, p) in [("p1", p1), ("p2", p2)] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        let p0 = 1.0 - p1 - p2;
        if p0 < -1e-12 {
            return Err(Error::Domain(format!(
                "p1 + p2 = {} exceeds 1",
                p1 + p2
            )));
        }
        Ok(Self {
            p0: p0.max(0.0),
            p1,
            p2,
            one_el,
            two_el,
        })
    }
}

/// Rectangular detection window: a center and per-axis half-widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorWindow {
    pub center: [f64; 3],
    pub half_width: [f64; 3],
}

impl DetectorWindow {
    pub fn new(center: [f64; 3], half_width: [f64; 3]) -> Result<Self> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!("non-finite center {center:?}")));
        }
        if !half_width.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(Error::Domain(format!(
                "half-widths must be positive, got {half_width:?}"
            )));
        }
        Ok(Self { center, half_width })
    }

    /// Window covering one source phase-space cell: per-axis full width
    /// 1/dk (the position uncertainty at the source), centered at
    /// (x, 0, 0).
    pub fn phase_cell(x: f64, dk: f64) -> Result<Self> {
        if !dk.is_finite() || dk <= 0.0 {
            return Err(Error::Domain(format!(
                "wavenumber spread must be positive, got {dk}"
            )));
        }
        let h = 0.5 / dk;
        Self::new([x, 0.0, 0.0], [h, h, h])
    }

    /// Window edges along one axis: (lo, hi).
    pub fn axis_bounds(&self, axis: usize) -> (f64, f64) {
        (
            self.center[axis] - self.half_width[axis],
            self.center[axis] + self.half_width[axis],
        )
    }
}

/// Overlap ⟨ψ|φ⟩ = exp(−|k₀−k₀′|²/(8 Δk²)) of the two packets; real and
/// positive for equal-spread Gaussians with real centers.
pub fn overlap(pair: &TwoElectronPacket) -> f64 {
    let d = pair.center_separation();
    (-d * d / (8.0 * pair.dk() * pair.dk())).exp()
}

/// Normalizations of the symmetric and antisymmetric combinations,
/// N± = 1/√(2(1 ± ⟨ψ|φ⟩²)).
pub fn normalizations(pair: &TwoElectronPacket) -> (f64, f64) {
    let ov2 = overlap(pair).powi(2);
    (
        1.0 / (2.0 * (1.0 + ov2)).sqrt(),
        1.0 / (2.0 * (1.0 - ov2)).sqrt(),
    )
}

/// Canonical source configuration: 400 eV mean energy, 1 eV spread,
/// weights (p0, p1, p2) = (0.4, 0.5, 0.1), second packet offset by
/// −0.5 Δk along the beam axis.
pub fn default_ensemble() -> SourceEnsemble {
    build_ensemble(400.0, 1.0, 0.5, 0.5, 0.1).expect("canonical parameters are valid")
}

/// Ensemble from physical inputs: mean energy (eV), energy spread (eV),
/// center offset of the second packet in units of Δk, and weights.
pub fn build_ensemble(
    e0_ev: f64,
    de_ev: f64,
    k_offset_in_dk: f64,
    p1: f64,
    p2: f64,
) -> Result<SourceEnsemble> {
    let k0 = energy_to_wavenumber(e0_ev)?;
    if k0 <= 0.0 {
        return Err(Error::Domain("mean energy must be positive".into()));
    }
    let dk = energy_spread_to_dk(de_ev, k0)?;
    if dk <= 0.0 {
        return Err(Error::Domain("energy spread must be positive".into()));
    }
    if !k_offset_in_dk.is_finite() || k_offset_in_dk == 0.0 {
        return Err(Error::Domain(format!(
            "packet center offset must be finite and nonzero, got {k_offset_in_dk}"
        )));
    }
    let one_el = GaussianPacket3D::new([k0, 0.0, 0.0], dk)?;
    let shifted = GaussianPacket3D::new([k0 - k_offset_in_dk * dk, 0.0, 0.0], dk)?;
    let two_el = TwoElectronPacket::new(one_el, shifted)?;
    SourceEnsemble::new(p1, p2, one_el, two_el)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_reference_value() {
        let ens = default_ensemble();
        // Separation 0.5 dk gives exp(-1/32).
        let ov = overlap(&ens.two_el);
        // The separation is a difference of ~1e11 wavenumbers, so the
        // overlap carries ~1e-14 of center-rounding noise.
        assert!((ov - (-1.0f64 / 32.0).exp()).abs() < 1e-13);
        assert!((ov - 0.969233).abs() < 1e-6);
    }

    #[test]
    fn overlap_limits_and_symmetry() {
        let dk = 1.28e8;
        let a = GaussianPacket3D::new([1.0e11, 0.0, 0.0], dk).unwrap();
        let b = GaussianPacket3D::new([1.0e11 - 100.0 * dk, 0.0, 0.0], dk).unwrap();
        let pair = TwoElectronPacket::new(a, b).unwrap();
        // 100 dk separation: overlap underflows to exactly 0.
        assert_eq!(overlap(&pair), 0.0);
        // Swap symmetry.
        let swapped = TwoElectronPacket::new(b, a).unwrap();
        assert_eq!(overlap(&pair), overlap(&swapped));
        // Off-axis separation with the same modulus gives the same overlap.
        let c = GaussianPacket3D::new([1.0e11, 100.0 * dk, 0.0], dk).unwrap();
        let off = TwoElectronPacket::new(a, c).unwrap();
        assert_eq!(overlap(&pair), overlap(&off));
    }

    #[test]
    fn normalization_identities() {
        let ens = default_ensemble();
        let ov = overlap(&ens.two_el);
        let (np, nm) = normalizations(&ens.two_el);
        assert!(np > 0.0 && nm > 0.0);
        assert!(np <= 1.0 / 2.0f64.sqrt() && nm >= 1.0 / 2.0f64.sqrt());
        // 2 N±² (1 ± ov²) = 1.
        assert!((2.0 * np * np * (1.0 + ov * ov) - 1.0).abs() < 1e-14);
        assert!((2.0 * nm * nm * (1.0 - ov * ov) - 1.0).abs() < 1e-14);
        // Values for the canonical separation, frozen from the identity
        // above evaluated at ov = exp(-1/32).
        // dN-/dov ~ 23 amplifies the ~1e-14 overlap rounding noise.
        assert!((np - 0.5077498969586383).abs() < 1e-13);
        assert!((nm - 2.8727345852236910).abs() < 1e-11);
        // Orthogonal limit: both tend to 1/sqrt(2).
        let dk = 1.28e8;
        let a = GaussianPacket3D::new([1.0e11, 0.0, 0.0], dk).unwrap();
        let b = GaussianPacket3D::new([1.0e11 - 100.0 * dk, 0.0, 0.0], dk).unwrap();
        let (np0, nm0) = normalizations(&TwoElectronPacket::new(a, b).unwrap());
        assert_eq!(np0, nm0);
        assert!((np0 - 1.0 / 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn default_ensemble_matches_canonical_parameters() {
        let ens = default_ensemble();
        assert!((ens.p0 + ens.p1 + ens.p2 - 1.0).abs() < 1e-15);
        assert_eq!((ens.p1, ens.p2), (0.5, 0.1));
        let k0 = ens.one_el.k0();
        assert!((k0[0] / 1.024e11 - 1.0).abs() < 5e-3);
        assert_eq!((k0[1], k0[2]), (0.0, 0.0));
        assert!((ens.one_el.dk() / 1.28e8 - 1.0).abs() < 1e-2);
        // Second packet sits 0.5 dk below on the beam axis.
        let kb = ens.two_el.b().k0();
        assert!((k0[0] - kb[0] - 0.5 * ens.one_el.dk()).abs() < 1.0);
    }

    #[test]
    fn constructors_reject_invalid_states() {
        let dk = 1.28e8;
        let a = GaussianPacket3D::new([1.0e11, 0.0, 0.0], dk).unwrap();
        assert!(GaussianPacket3D::new([1.0e11, 0.0, 0.0], 0.0).is_err());
        assert!(GaussianPacket3D::new([f64::NAN, 0.0, 0.0], dk).is_err());
        // Identical centers rejected.
        assert!(TwoElectronPacket::new(a, a).is_err());
        // Mismatched spreads rejected.
        let b = GaussianPacket3D::new([1.0e11, 0.0, 0.0], 2.0 * dk).unwrap();
        assert!(TwoElectronPacket::new(a, b).is_err());
        // Probabilities outside [0,1] or summing past 1 rejected.
        let c = GaussianPacket3D::new([0.9e11, 0.0, 0.0], dk).unwrap();
        let pair = TwoElectronPacket::new(a, c).unwrap();
        assert!(SourceEnsemble::new(-0.1, 0.1, a, pair).is_err());
        assert!(SourceEnsemble::new(0.7, 0.7, a, pair).is_err());
        // Detector half-widths must be positive.
        assert!(DetectorWindow::new([0.1, 0.0, 0.0], [1e-8, 0.0, 1e-8]).is_err());
        // Zero packet offset rejected.
        assert!(build_ensemble(400.0, 1.0, 0.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn phase_cell_window_geometry() {
        let dk = 1.28e8;
        let w = DetectorWindow::phase_cell(0.1, dk).unwrap();
        let (lo, hi) = w.axis_bounds(0);
        // Bounds sit at 0.1 +- 3.9e-9, so the width carries ~ulp(0.1).
        assert!((hi - lo - 1.0 / dk).abs() < 1e-16);
        assert!(((lo + hi) / 2.0 - 0.1).abs() < 1e-16);
        let (ylo, yhi) = w.axis_bounds(1);
        assert_eq!(ylo, -yhi);
    }
}
