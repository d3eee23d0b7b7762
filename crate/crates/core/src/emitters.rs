//! The dopant ensemble: transition frequencies sampled from the
//! inhomogeneous line, positions in the cavity mode, and the per-emitter
//! coupling chain (Purcell factor, lifetime, coherence time).
//!
//! Ensemble construction is deterministic for a given seed; the result is
//! immutable and serializable to JSON for reproducible re-runs.

use crate::cavity::{mode_coupling, CavityGeometry};
use crate::error::SimError;
use crate::rng::{derive_rng, poisson_count};
use crate::scalar::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Lorentzian inhomogeneous distribution of transition frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousLine<T> {
    /// Line center, Hz (zero-referenced detunings are fine).
    pub center: T,
    /// Lorentzian FWHM, Hz.
    pub fwhm: T,
    /// Expected resonant emitters per Hz at line center.
    pub density_per_hz: T,
}

impl<T: Scalar> InhomogeneousLine<T> {
    /// Unit-peak Lorentzian profile at frequency ν.
    pub fn profile(&self, freq: T) -> T {
        let half = self.fwhm / T::from_f64(2.0);
        let d = freq - self.center;
        half * half / (d * d + half * half)
    }

    /// Expected emitter count in a window: density × ∫ profile.
    pub fn expected_count(&self, window: (T, T)) -> T {
        let half = self.fwhm / T::from_f64(2.0);
        let lo = ((window.0 - self.center) / half).atan();
        let hi = ((window.1 - self.center) / half).atan();
        self.density_per_hz * half * (hi - lo)
    }

    /// Inverse-CDF draw from the Lorentzian truncated to the window.
    pub fn sample_truncated<R: Rng + ?Sized>(&self, window: (T, T), rng: &mut R) -> T {
        let half = self.fwhm / T::from_f64(2.0);
        let lo = ((window.0 - self.center) / half).atan();
        let hi = ((window.1 - self.center) / half).atan();
        let u = T::unit_uniform(rng);
        let theta = lo + (hi - lo) * u;
        self.center + half * theta.tan()
    }
}

/// One sampled emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Emitter<T> {
    pub id: u64,
    /// Nominal transition frequency (detuning from line center), Hz.
    pub freq0: T,
    /// (radial, axial) position in the mode, m.
    pub position: (T, T),
    /// Purcell factor at this position.
    pub purcell: T,
    /// Purcell-shortened lifetime, s.
    pub lifetime: T,
    /// Optical coherence time, s.
    pub t2: T,
}

/// Purcell-shortened lifetime τ = τ0/(1 + P).
pub fn purcell_lifetime<T: Scalar>(p: T, tau0: T) -> T {
    assert!(p >= T::zero() && tau0 > T::zero());
    tau0 / (T::one() + p)
}

/// Fraction of emission channeled into the resonator mode, P/(1 + P).
pub fn channeling_efficiency<T: Scalar>(p: T) -> T {
    assert!(p >= T::zero());
    p / (T::one() + p)
}

/// Radiative (lifetime-limited) linewidth, 1/(2π·τ), Hz.
pub fn radiative_fwhm<T: Scalar>(lifetime: T) -> T {
    assert!(lifetime > T::zero());
    (T::from_f64(std::f64::consts::TAU) * lifetime).recip()
}

/// Geometry of the sampled dopant cloud inside the mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingRegion<T> {
    /// Positions are uniform over a cylinder of this radius (units of the
    /// mode waist).
    pub radius_in_waists: T,
    /// Axial extent (membrane thickness), m; centered on the waist.
    pub axial_span: T,
}

/// Parameters of the per-emitter coupling chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel<T> {
    /// Maximum branched Purcell factor (antinode, on axis).
    pub p_branched: T,
    /// Dipole orientation factor in [0, 1].
    pub orientation_factor: T,
    /// Free-space lifetime τ0, s.
    pub tau0: T,
    /// Optical coherence time assigned to every emitter, s.
    pub t2: T,
}

/// Sample the ensemble in the window. Count is Poisson with the
/// Lorentzian-integral mean; frequencies are i.i.d. truncated-Lorentzian;
/// positions are uniform over the sampling cylinder. Deterministic per
/// seed; the RNG stream is derived under the "ensemble" domain.
pub fn sample_ensemble<T: Scalar>(
    line: &InhomogeneousLine<T>,
    window: (T, T),
    geometry: &CavityGeometry<T>,
    region: &SamplingRegion<T>,
    coupling: &CouplingModel<T>,
    seed: u64,
) -> Result<Vec<Emitter<T>>, SimError> {
    if !(window.1 > window.0) {
        return Err(SimError::physics("empty detuning window"));
    }
    let mean = line.expected_count(window).into_f64();
    if !mean.is_finite() {
        return Err(SimError::physics("non-finite expected emitter count"));
    }
    let mut rng = derive_rng(seed, "ensemble", 0);
    let count = poisson_count(&mut rng, mean);
    let waist = geometry.waist();
    let r_max = region.radius_in_waists * waist;
    let mut emitters = Vec::with_capacity(count as usize);
    for id in 0..count {
        let freq0 = line.sample_truncated(window, &mut rng);
        // uniform over the disk: r = r_max·sqrt(u)
        let r = r_max * T::unit_uniform(&mut rng).sqrt();
        let z = (T::unit_uniform(&mut rng) - T::from_f64(0.5)) * region.axial_span;
        let p = coupling.p_branched * coupling.orientation_factor * mode_coupling((r, z), geometry);
        let lifetime = purcell_lifetime(p, coupling.tau0);
        // T2 cannot exceed 2·T1
        let t2 = coupling.t2.min(T::from_f64(2.0) * lifetime);
        emitters.push(Emitter {
            id,
            freq0,
            position: (r, z),
            purcell: p,
            lifetime,
            t2,
        });
    }
    Ok(emitters)
}

/// Serializable ensemble document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleDocument<T> {
    pub seed: u64,
    pub window: (T, T),
    pub emitters: Vec<Emitter<T>>,
}

impl<T: Scalar + Serialize + for<'de> Deserialize<'de>> EnsembleDocument<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ensemble serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SimError> {
        serde_json::from_str(s)
            .map_err(|e| SimError::physics(format!("ensemble parse error: {e}")))
    }
}
