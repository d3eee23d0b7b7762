//! Stochastic processes driving spectral diffusion and cavity jitter.
//!
//! Each emitter owns a fast Ornstein-Uhlenbeck component, an optional slow
//! OU wander and a set of telegraph spins; the cavity carries a Gaussian
//! per-shot resonance jitter. OU steps use the exact discretization, so any
//! step size is unbiased. All state advances only through its owning
//! simulation run; streams for distinct emitters are derived independently
//! (see [`crate::rng`]) and therefore statistically independent.

use crate::constants::GAUSSIAN_FWHM_PER_SIGMA;
use crate::rng::{derive_rng2, poisson_count};
use crate::scalar::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Ornstein-Uhlenbeck frequency offset process.
///
/// Stationary distribution N(0, sigma²); autocorrelation e^(−τ/tau_c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuProcess<T> {
    /// Stationary standard deviation, Hz.
    pub sigma: T,
    /// Correlation time, s.
    pub tau_c: T,
    /// Current offset, Hz.
    pub value: T,
}

impl<T: Scalar> OuProcess<T> {
    pub fn new(sigma: T, tau_c: T) -> Self {
        assert!(sigma >= T::zero() && tau_c > T::zero());
        Self {
            sigma,
            tau_c,
            value: T::zero(),
        }
    }

    /// Start from a stationary draw instead of zero.
    pub fn stationary_init<R: Rng + ?Sized>(mut self, rng: &mut R) -> Self {
        self.value = self.sigma * T::standard_normal(rng);
        self
    }

    /// Exact OU update over `dt`:
    /// value' = value·e^(−dt/τ) + N(0, σ²(1 − e^(−2dt/τ))).
    pub fn step<R: Rng + ?Sized>(&mut self, dt: T, rng: &mut R) {
        debug_assert!(dt >= T::zero());
        if dt == T::zero() {
            return;
        }
        let alpha = (-dt / self.tau_c).exp();
        let noise_sd = self.sigma * (T::one() - alpha * alpha).sqrt();
        self.value = self.value * alpha + noise_sd * T::standard_normal(rng);
    }

    /// FWHM of the stationary Gaussian, 2·sqrt(2 ln 2)·σ.
    pub fn stationary_fwhm(&self) -> T {
        T::from_f64(GAUSSIAN_FWHM_PER_SIGMA) * self.sigma
    }

    /// σ that produces a given stationary FWHM.
    pub fn sigma_from_fwhm(fwhm: T) -> T {
        fwhm / T::from_f64(GAUSSIAN_FWHM_PER_SIGMA)
    }
}

/// A single proximal nuclear spin producing a two-state frequency shift.
///
/// The emitter frequency shifts by coupling·state/2 (zero-mean convention),
/// so a flip moves the line by the full coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelegraphSpin<T> {
    /// Frequency separation between the two states, Hz.
    pub coupling: T,
    /// Expected flips per second.
    pub flip_rate: T,
    /// Current state, ±1.
    pub state: i8,
}

impl<T: Scalar> TelegraphSpin<T> {
    pub fn new(coupling: T, flip_rate: T) -> Self {
        assert!(flip_rate >= T::zero());
        Self {
            coupling,
            flip_rate,
            state: 1,
        }
    }

    /// Advance by `dt`: the state flips when the Poisson flip count over the
    /// interval is odd, P(odd) = (1 − e^(−2·rate·dt))/2.
    pub fn step<R: Rng + ?Sized>(&mut self, dt: T, rng: &mut R) {
        debug_assert!(dt >= T::zero());
        if dt == T::zero() || self.flip_rate == T::zero() {
            return;
        }
        let two = T::from_f64(2.0);
        let p_odd = (T::one() - (-two * self.flip_rate * dt).exp()) / two;
        if T::unit_uniform(rng) < p_odd {
            self.state = -self.state;
        }
    }

    /// Frequency contribution of this spin, coupling·state/2.
    pub fn shift(&self) -> T {
        self.coupling * T::from_f64(self.state as f64) / T::from_f64(2.0)
    }
}

/// Gaussian per-shot cavity resonance jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityJitter<T> {
    /// FWHM of the per-shot resonance detuning distribution, Hz.
    pub fwhm: T,
    /// When set, consecutive shots are correlated with this time constant
    /// instead of being independent.
    pub correlation_time: Option<T>,
}

impl<T: Scalar> CavityJitter<T> {
    pub fn independent(fwhm: T) -> Self {
        assert!(fwhm >= T::zero());
        Self {
            fwhm,
            correlation_time: None,
        }
    }

    pub fn off() -> Self {
        Self::independent(T::zero())
    }

    /// Fresh Gaussian sample of the cavity detuning, Hz.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        if self.fwhm == T::zero() {
            return T::zero();
        }
        let sigma = self.fwhm / T::from_f64(GAUSSIAN_FWHM_PER_SIGMA);
        sigma * T::standard_normal(rng)
    }
}

/// Correlated-jitter sampler used when `correlation_time` is set.
#[derive(Debug, Clone)]
pub struct JitterSampler<T> {
    jitter: CavityJitter<T>,
    ou: Option<OuProcess<T>>,
}

impl<T: Scalar> JitterSampler<T> {
    pub fn new(jitter: CavityJitter<T>) -> Self {
        let ou = jitter.correlation_time.map(|tau| {
            OuProcess::new(jitter.fwhm / T::from_f64(GAUSSIAN_FWHM_PER_SIGMA), tau)
        });
        Self { jitter, ou }
    }

    /// Sample the cavity detuning for a shot occurring `dt` after the
    /// previous one.
    pub fn next<R: Rng + ?Sized>(&mut self, dt: T, rng: &mut R) -> T {
        match &mut self.ou {
            Some(ou) => {
                ou.step(dt, rng);
                ou.value
            }
            None => self.jitter.sample(rng),
        }
    }
}

/// Parameters for generating per-emitter noise state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePreset {
    /// Fast OU stationary sigma, Hz.
    pub ou_sigma: f64,
    /// Fast OU correlation time, s.
    pub ou_tau: f64,
    /// Slow-wander OU sigma, Hz (0 disables).
    pub slow_sigma: f64,
    /// Slow-wander correlation time, s.
    pub slow_tau: f64,
    /// Mean number of proximal telegraph spins per emitter.
    pub telegraph_mean_spins: f64,
    /// Couplings drawn uniformly in [0, max], Hz.
    pub telegraph_coupling_max: f64,
    /// Flip rates drawn log-uniformly in [min, max], Hz.
    pub telegraph_rate_min: f64,
    pub telegraph_rate_max: f64,
    /// Cavity jitter FWHM, Hz.
    pub jitter_fwhm: f64,
    /// Correlation time of the jitter, s; i.i.d. per shot when absent.
    pub jitter_correlation: Option<f64>,
}

/// Full noise state of one emitter.
#[derive(Debug, Clone)]
pub struct EmitterNoise<T> {
    pub fast: OuProcess<T>,
    pub slow: Option<OuProcess<T>>,
    pub spins: Vec<TelegraphSpin<T>>,
    /// Accumulated simulation time, s.
    pub time: T,
}

impl<T: Scalar> EmitterNoise<T> {
    /// Build the noise state for emitter `emitter_id` from the preset,
    /// deterministically derived from the master seed.
    pub fn build(preset: &NoisePreset, seed: u64, emitter_id: u64) -> Self {
        let mut init_rng = derive_rng2(seed, "noise-init", emitter_id, 0);
        let fast = OuProcess::new(T::from_f64(preset.ou_sigma), T::from_f64(preset.ou_tau))
            .stationary_init(&mut init_rng);
        let slow = if preset.slow_sigma > 0.0 {
            Some(
                OuProcess::new(T::from_f64(preset.slow_sigma), T::from_f64(preset.slow_tau))
                    .stationary_init(&mut init_rng),
            )
        } else {
            None
        };
        let n_spins = poisson_count(&mut init_rng, preset.telegraph_mean_spins);
        let mut spins = Vec::with_capacity(n_spins as usize);
        for _ in 0..n_spins {
            let coupling = T::from_f64(preset.telegraph_coupling_max) * T::unit_uniform(&mut init_rng);
            let log_min = preset.telegraph_rate_min.ln();
            let log_max = preset.telegraph_rate_max.ln();
            let u = T::unit_uniform(&mut init_rng).into_f64();
            let rate = (log_min + u * (log_max - log_min)).exp();
            let mut spin = TelegraphSpin::new(coupling, T::from_f64(rate));
            if T::unit_uniform(&mut init_rng) < T::from_f64(0.5) {
                spin.state = -1;
            }
            spins.push(spin);
        }
        Self {
            fast,
            slow,
            spins,
            time: T::zero(),
        }
    }

    /// Noise-free emitter.
    pub fn disabled() -> Self {
        Self {
            fast: OuProcess::new(T::zero(), T::one()),
            slow: None,
            spins: Vec::new(),
            time: T::zero(),
        }
    }

    /// Advance all component processes by `dt`.
    pub fn step<R: Rng + ?Sized>(&mut self, dt: T, rng: &mut R) {
        self.fast.step(dt, rng);
        if let Some(slow) = &mut self.slow {
            slow.step(dt, rng);
        }
        for spin in &mut self.spins {
            spin.step(dt, rng);
        }
        self.time += dt;
    }

    /// Total frequency offset from the nominal transition, Hz.
    pub fn offset(&self) -> T {
        let mut total = self.fast.value;
        if let Some(slow) = &self.slow {
            total += slow.value;
        }
        for spin in &self.spins {
            total += spin.shift();
        }
        total
    }
}

/// Instantaneous frequency of an emitter with nominal detuning `freq0`
/// whose noise state has been evolved to the query time.
pub fn emitter_frequency<T: Scalar>(freq0: T, noise: &EmitterNoise<T>) -> T {
    freq0 + noise.offset()
}
