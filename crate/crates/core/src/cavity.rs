//! Static resonator properties of the plano-concave Fabry-Perot cavity.
//!
//! All quantities derive from the mirror transmissions/losses and the
//! geometry: finesse, FWHM linewidth, free spectral range, quality factor,
//! Gaussian mode waist and volume, the two-level and branched Purcell
//! factors, and the photon escape probabilities. The standing-wave mode
//! function gives the position-dependent coupling of embedded emitters.
//!
//! Everything here is a pure function of its inputs.

use crate::constants::SPEED_OF_LIGHT;
use crate::error::SimError;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Fractional mirror transmissions and round-trip loss (dimensionless,
/// ppm scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSet<T> {
    /// Transmission of the flat outcoupling mirror.
    pub t_out: T,
    /// Transmission of the concave back mirror.
    pub t_back: T,
    /// Absorption and scattering loss per round trip.
    pub loss: T,
}

impl<T: Scalar> MirrorSet<T> {
    pub fn new(t_out: T, t_back: T, loss: T) -> Result<Self, SimError> {
        let zero = T::zero();
        if t_out < zero || t_back < zero || loss < zero {
            return Err(SimError::physics("mirror fractions must be non-negative"));
        }
        if t_out + t_back + loss <= zero {
            return Err(SimError::physics(
                "total round-trip loss must be positive (infinite finesse)",
            ));
        }
        Ok(Self { t_out, t_back, loss })
    }

    pub fn total(&self) -> T {
        self.t_out + self.t_back + self.loss
    }
}

/// Plano-concave resonator geometry. Lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry<T> {
    /// Radius of curvature of the concave mirror.
    pub roc: T,
    /// Effective optical cavity length.
    pub l_opt: T,
    /// Operating vacuum wavelength.
    pub wavelength: T,
    /// Refractive index of the host membrane.
    pub n_host: T,
    /// Membrane thickness.
    pub membrane_thickness: T,
}

impl<T: Scalar> CavityGeometry<T> {
    pub fn new(
        roc: T,
        l_opt: T,
        wavelength: T,
        n_host: T,
        membrane_thickness: T,
    ) -> Result<Self, SimError> {
        if !(l_opt > T::zero() && l_opt < roc) {
            return Err(SimError::physics(
                "stability requires 0 < l_opt < roc for a plano-concave resonator",
            ));
        }
        if wavelength <= T::zero() || n_host < T::one() || membrane_thickness < T::zero() {
            return Err(SimError::physics("invalid wavelength, index or thickness"));
        }
        Ok(Self {
            roc,
            l_opt,
            wavelength,
            n_host,
            membrane_thickness,
        })
    }

    /// Mode waist radius w0 at the flat mirror, from Gaussian-beam optics:
    /// w0^2 = (λ/π)·sqrt(l(R−l)).
    pub fn waist(&self) -> T {
        let w0_sq = self.wavelength / T::PI() * (self.l_opt * (self.roc - self.l_opt)).sqrt();
        w0_sq.sqrt()
    }

    /// Effective mode volume V = (π/4)·w0²·l_opt.
    pub fn mode_volume(&self) -> T {
        let w0 = self.waist();
        T::PI() / T::from_f64(4.0) * w0 * w0 * self.l_opt
    }

    /// Free spectral range c/(2·l_opt), Hz.
    pub fn fsr(&self) -> T {
        T::from_f64(SPEED_OF_LIGHT) / (T::from_f64(2.0) * self.l_opt)
    }
}

/// Derived resonator quantities, computed once per configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityDerived<T> {
    pub finesse: T,
    /// FWHM cavity linewidth, Hz.
    pub fwhm_linewidth: T,
    /// Free spectral range, Hz.
    pub fsr: T,
    pub quality_factor: T,
    /// Mode waist radius, m.
    pub waist: T,
    /// Mode volume, m³.
    pub mode_volume: T,
    /// Two-level Purcell factor at the field maximum (geometric estimate
    /// unless overridden).
    pub p_tl: T,
    /// Purcell factor after branching into other decay channels.
    pub p_branched: T,
    /// Probability that an intra-cavity photon leaves through the
    /// outcoupling mirror.
    pub eta_out: T,
}

/// Finesse from the total fractional round-trip loss: F = 2π/Σ.
pub fn compute_finesse<T: Scalar>(mirrors: &MirrorSet<T>) -> Result<T, SimError> {
    let total = mirrors.total();
    if total <= T::zero() {
        return Err(SimError::physics("zero total loss: infinite finesse"));
    }
    if total > T::from_f64(std::f64::consts::TAU) {
        return Err(SimError::physics("total loss must not exceed 2π"));
    }
    Ok(T::from_f64(std::f64::consts::TAU) / total)
}

/// FWHM linewidth κ = FSR/F with FSR = c/(2·l_opt), Hz.
pub fn compute_linewidth<T: Scalar>(finesse: T, l_opt: T) -> Result<T, SimError> {
    if finesse <= T::zero() || l_opt <= T::zero() {
        return Err(SimError::physics("finesse and length must be positive"));
    }
    let fsr = T::from_f64(SPEED_OF_LIGHT) / (T::from_f64(2.0) * l_opt);
    Ok(fsr / finesse)
}

/// Two-level Purcell factor at the field maximum:
/// P = (3/4π²)·(λ/n)³·(Q/V).
pub fn compute_purcell_tl<T: Scalar>(
    quality: T,
    mode_volume: T,
    wavelength: T,
    n_host: T,
) -> Result<T, SimError> {
    if quality <= T::zero() || mode_volume <= T::zero() || wavelength <= T::zero() || n_host <= T::zero() {
        return Err(SimError::physics("purcell inputs must be positive"));
    }
    let lam_med = wavelength / n_host;
    let pref = T::from_f64(3.0) / (T::from_f64(4.0) * T::PI() * T::PI());
    Ok(pref * lam_med * lam_med * lam_med * quality / mode_volume)
}

/// Reduce the two-level Purcell factor by the branching ratio β of the
/// enhanced transition.
pub fn apply_branching<T: Scalar>(p_tl: T, beta: T) -> Result<T, SimError> {
    if beta < T::zero() || beta > T::one() {
        return Err(SimError::physics("branching ratio must lie in [0, 1]"));
    }
    Ok(beta * p_tl)
}

/// Probability that a photon lost from the mode exits through the
/// outcoupling mirror: T1/(T1 + T2 + L).
pub fn outcoupling_efficiency<T: Scalar>(mirrors: &MirrorSet<T>) -> Result<T, SimError> {
    let total = mirrors.total();
    if total <= T::zero() {
        return Err(SimError::physics("total loss must be positive"));
    }
    Ok(mirrors.t_out / total)
}

/// Relative mode intensity at (radial offset r, axial offset z), normalized
/// to 1 at the waist center on an antinode:
/// exp(−2r²/w(z)²)·cos²(k·z) with k the wave number in the host.
///
/// `z` is measured from an antinode at the waist plane; the beam envelope
/// w(z) expands with the vacuum Rayleigh range.
pub fn mode_coupling<T: Scalar>(position: (T, T), geometry: &CavityGeometry<T>) -> T {
    let (r, z) = position;
    let w0 = geometry.waist();
    let z_r = T::PI() * w0 * w0 / geometry.wavelength;
    let w_sq = w0 * w0 * (T::one() + (z / z_r) * (z / z_r));
    let radial = (-T::from_f64(2.0) * r * r / w_sq).exp();
    let k = T::from_f64(2.0) * T::PI() * geometry.n_host / geometry.wavelength;
    let axial = (k * z).cos().powi(2);
    radial * axial
}

/// Bundle of derived quantities. `p_tl_override` substitutes an externally
/// calibrated two-level Purcell factor for the geometric estimate.
pub fn derive<T: Scalar>(
    mirrors: &MirrorSet<T>,
    geometry: &CavityGeometry<T>,
    beta: T,
    p_tl_override: Option<T>,
) -> Result<CavityDerived<T>, SimError> {
    let finesse = compute_finesse(mirrors)?;
    let fsr = geometry.fsr();
    let fwhm_linewidth = fsr / finesse;
    let frequency = T::from_f64(SPEED_OF_LIGHT) / geometry.wavelength;
    let quality_factor = frequency / fwhm_linewidth;
    let waist = geometry.waist();
    let mode_volume = geometry.mode_volume();
    let p_geometric = compute_purcell_tl(quality_factor, mode_volume, geometry.wavelength, geometry.n_host)?;
    let p_tl = p_tl_override.unwrap_or(p_geometric);
    let p_branched = apply_branching(p_tl, beta)?;
    let eta_out = outcoupling_efficiency(mirrors)?;
    Ok(CavityDerived {
        finesse,
        fwhm_linewidth,
        fsr,
        quality_factor,
        waist,
        mode_volume,
        p_tl,
        p_branched,
        eta_out,
    })
}

/// Lorentzian cavity transmission at detuning Δ from resonance, for a
/// FWHM linewidth κ: 1/(1 + (2Δ/κ)²).
pub fn lorentzian_transmission<T: Scalar>(detuning: T, fwhm: T) -> T {
    if fwhm <= T::zero() {
        return if detuning == T::zero() { T::one() } else { T::zero() };
    }
    let x = T::from_f64(2.0) * detuning / fwhm;
    T::one() / (T::one() + x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_mirrors() -> MirrorSet<f64> {
        MirrorSet::new(22e-6, 20e-6, 27e-6).unwrap()
    }

    fn paper_geometry() -> CavityGeometry<f64> {
        CavityGeometry::new(155e-6, 128e-6, 1.5365e-6, 1.78, 19e-6).unwrap()
    }

    #[test]
    fn finesse_from_measured_mirrors() {
        let f = compute_finesse(&paper_mirrors()).unwrap();
        assert_relative_eq!(f, 9.106e4, max_relative = 1e-3);
        // within the measured band 9.0(7)e4
        assert!(f > 8.3e4 && f < 9.7e4);
    }

    #[test]
    fn finesse_identity_at_two_pi_loss() {
        let pi = std::f64::consts::PI;
        let m = MirrorSet::new(pi, pi, 0.0).unwrap();
        assert_relative_eq!(compute_finesse(&m).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn finesse_hand_evaluated() {
        let m = MirrorSet::new(100e-6, 100e-6, 0.0).unwrap();
        assert_relative_eq!(compute_finesse(&m).unwrap(), 31415.93, max_relative = 1e-6);
    }

    #[test]
    fn finesse_zero_loss_errors() {
        assert!(MirrorSet::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn linewidth_matches_reported() {
        // l_opt solved from the reported κ and F as a consistency oracle
        let kappa = compute_linewidth(9.0e4, 1.28e-4).unwrap();
        assert_relative_eq!(kappa, 13.0e6, max_relative = 0.01);
    }

    #[test]
    fn linewidth_unit_fsr() {
        let kappa = compute_linewidth(1.0, SPEED_OF_LIGHT / 2.0).unwrap();
        assert_relative_eq!(kappa, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn linewidth_halved_length_doubles() {
        let kappa = compute_linewidth(9.0e4, 6.4e-5).unwrap();
        assert_relative_eq!(kappa, 26.0e6, max_relative = 0.01);
    }

    #[test]
    fn purcell_within_factor_of_reported() {
        // Independent Gaussian-optics oracle: Q from ν/κ, V from geometry.
        let g = paper_geometry();
        let quality = 1.5e7;
        let v = g.mode_volume();
        let p = compute_purcell_tl(quality, v, g.wavelength, g.n_host).unwrap();
        let ratio = 362.0 / p;
        assert!(
            (1.0 / 1.5..=1.5).contains(&ratio),
            "geometric estimate {p} vs 362"
        );
    }

    #[test]
    fn purcell_formula_inversion() {
        let lam = 1.5365e-6f64;
        let n = 1.78;
        let q = 2.0e7;
        let v = 3.0 / (4.0 * std::f64::consts::PI.powi(2)) * (lam / n).powi(3) * q;
        assert_relative_eq!(compute_purcell_tl(q, v, lam, n).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn purcell_linear_in_quality() {
        let g = paper_geometry();
        let v = g.mode_volume();
        let p1 = compute_purcell_tl(1.5e7, v, g.wavelength, g.n_host).unwrap();
        let p2 = compute_purcell_tl(3.0e7, v, g.wavelength, g.n_host).unwrap();
        assert_relative_eq!(p2, 2.0 * p1, max_relative = 1e-12);
    }

    #[test]
    fn branching_reproduces_reported_pair() {
        let p = apply_branching(362.0f64, 0.204).unwrap();
        assert_relative_eq!(p, 73.848, max_relative = 1e-6);
        assert!((p - 74.0).abs() < 0.5);
        assert_eq!(apply_branching(362.0, 0.0).unwrap(), 0.0);
        assert_eq!(apply_branching(362.0, 1.0).unwrap(), 362.0);
    }

    #[test]
    fn outcoupling_from_measured_mirrors() {
        let eta = outcoupling_efficiency(&paper_mirrors()).unwrap();
        assert_relative_eq!(eta, 22.0 / 69.0, max_relative = 1e-12);
        assert_relative_eq!(eta, 0.319, epsilon = 1e-3);
    }

    #[test]
    fn outcoupling_trivial_cases() {
        let m = MirrorSet::new(5e-6, 0.0, 0.0).unwrap();
        assert_relative_eq!(outcoupling_efficiency(&m).unwrap(), 1.0, max_relative = 1e-12);
        let m = MirrorSet::new(20e-6, 20e-6, 20e-6).unwrap();
        assert_relative_eq!(
            outcoupling_efficiency(&m).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn escape_fractions_sum_to_one() {
        let m = paper_mirrors();
        let total = m.total();
        let out = outcoupling_efficiency(&m).unwrap();
        let back = m.t_back / total;
        let loss = m.loss / total;
        assert_relative_eq!(out + back + loss, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn mode_coupling_reference_points() {
        let g = paper_geometry();
        assert_relative_eq!(mode_coupling((0.0, 0.0), &g), 1.0, max_relative = 1e-12);
        let w0 = g.waist();
        assert_relative_eq!(
            mode_coupling((w0 / 2f64.sqrt(), 0.0), &g),
            (-1.0f64).exp(),
            max_relative = 1e-9
        );
        // node: quarter wave in the host away from the antinode
        let node = g.wavelength / g.n_host / 4.0;
        assert!(mode_coupling((0.0, node), &g) < 1e-9);
    }

    #[test]
    fn derived_bundle_consistency() {
        let d = derive(&paper_mirrors(), &paper_geometry(), 0.204, Some(362.0)).unwrap();
        // FSR = F × κ to machine precision
        assert_relative_eq!(d.finesse * d.fwhm_linewidth, d.fsr, max_relative = 1e-14);
        assert_relative_eq!(d.p_branched, 73.848, max_relative = 1e-6);
        assert!(d.quality_factor > 1.0e7 && d.quality_factor < 2.0e7);
        assert!((0.0..=1.0).contains(&d.eta_out));
        assert!(d.p_branched <= d.p_tl);
        // waist a few microns for this geometry
        assert!(d.waist > 4e-6 && d.waist < 7e-6);
    }

    #[test]
    fn lorentzian_transmission_profile() {
        assert_relative_eq!(lorentzian_transmission(0.0, 13e6), 1.0);
        assert_relative_eq!(lorentzian_transmission(6.5e6, 13e6), 0.5, max_relative = 1e-12);
        assert!(lorentzian_transmission(100e6, 13e6) < 0.005);
    }

    proptest::proptest! {
        #[test]
        fn finesse_linewidth_fsr_identity(
            t_out in 1e-6..500e-6f64,
            t_back in 1e-6..500e-6f64,
            loss in 0.0..500e-6f64,
            l_opt in 20e-6..150e-6f64,
        ) {
            let m = MirrorSet::new(t_out, t_back, loss).unwrap();
            let g = CavityGeometry::new(155e-6, l_opt, 1.5365e-6, 1.78, 19e-6).unwrap();
            let d = derive(&m, &g, 0.204, None).unwrap();
            proptest::prop_assert!((d.finesse * d.fwhm_linewidth / d.fsr - 1.0).abs() < 1e-14);
            let total = m.total();
            let sum = d.eta_out + m.t_back / total + m.loss / total;
            proptest::prop_assert!((sum - 1.0).abs() < 1e-14);
        }

        #[test]
        fn mode_coupling_bounded_and_radially_monotone(
            r1 in 0.0..20e-6f64,
            dr in 1e-9..10e-6f64,
            z in -9e-6..9e-6f64,
        ) {
            let g = CavityGeometry::new(155e-6, 128e-6, 1.5365e-6, 1.78, 19e-6).unwrap();
            let a = mode_coupling((r1, z), &g);
            let b = mode_coupling((r1 + dr, z), &g);
            proptest::prop_assert!((0.0..=1.0).contains(&a));
            proptest::prop_assert!(b <= a + 1e-15);
        }

        #[test]
        fn branching_monotone_bounded(p in 0.0..1000.0f64, b1 in 0.0..1.0f64, b2 in 0.0..1.0f64) {
            let lo = b1.min(b2);
            let hi = b1.max(b2);
            let plo = apply_branching(p, lo).unwrap();
            let phi = apply_branching(p, hi).unwrap();
            proptest::prop_assert!(plo <= phi);
            proptest::prop_assert!(phi <= p);
        }
    }
}
