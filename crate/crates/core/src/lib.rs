//! Monte-Carlo simulation and analysis toolkit for a frequency-multiplexed
//! ensemble of narrow-line emitters coupled to a high-finesse Fabry-Perot
//! microcavity.
//!
//! The crate is organized around the physical signal chain:
//!
//! * [`cavity`] — static resonator properties (finesse, linewidth, Purcell
//!   factors, escape probabilities) and the Gaussian standing-wave mode.
//! * [`emitters`] — sampling of the dopant ensemble from the inhomogeneous
//!   line, with position-dependent coupling.
//! * [`noise`] — stochastic processes driving spectral diffusion (exact
//!   Ornstein-Uhlenbeck steps, telegraph spin flips) and cavity jitter.
//! * [`dynamics`] — two-level Bloch evolution under shaped pulses: excitation
//!   profiles, Rabi scans, photon-echo sequences.
//! * [`detection`] — the efficiency chain and conversion of excitation events
//!   into timestamped detector click streams with dark counts.
//! * [`analysis`] — estimators and fitters: pulsed autocorrelation
//!   histograms, background rescaling, line/decay/bunching fits.
//! * [`protocols`] — end-to-end experiment drivers (spectral scan,
//!   autocorrelation run, Rabi/echo, long-term alternating interrogation
//!   with feed-forward).
//! * [`config`] / [`output`] — run configuration, manifests and CSV/JSON
//!   persistence used by the `simtool` binary.
//!
//! All numerical kernels are generic over the floating-point type through
//! [`scalar::Scalar`]; the aliases below fix the default `f64` instantiation
//! used by the protocol and CLI layers. Every stochastic path is driven by
//! named, per-purpose RNG streams derived in [`rng`], so a (seed, config)
//! pair reproduces output files byte for byte.

pub mod analysis;
pub mod cavity;
pub mod config;
pub mod constants;
pub mod detection;
pub mod dynamics;
pub mod emitters;
pub mod error;
pub mod noise;
pub mod output;
pub mod protocols;
pub mod rng;
pub mod scalar;

/// Default scalar type for the concrete simulation layers.
pub type Real = f64;

pub type MirrorSet = cavity::MirrorSet<Real>;
pub type CavityGeometry = cavity::CavityGeometry<Real>;
pub type CavityDerived = cavity::CavityDerived<Real>;
pub type InhomogeneousLine = emitters::InhomogeneousLine<Real>;
pub type Emitter = emitters::Emitter<Real>;
pub type OuProcess = noise::OuProcess<Real>;
pub type TelegraphSpin = noise::TelegraphSpin<Real>;
pub type CavityJitter = noise::CavityJitter<Real>;
pub type Pulse = dynamics::Pulse<Real>;
pub type BlochState = dynamics::BlochState<Real>;
pub type Decay = dynamics::Decay<Real>;
pub type EchoSequence = dynamics::EchoSequence<Real>;
pub type FitResult = analysis::FitResult<Real>;
pub type G2Histogram = analysis::G2Histogram<Real>;

pub use error::{ConfigError, FitError, SimError};
