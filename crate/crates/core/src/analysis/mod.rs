//! Estimators and fitters: pulsed autocorrelation histograms, Poissonian
//! background rescaling, and nonlinear least-squares fits for lines, decays
//! and bunching. All functions are pure.

pub mod fit;
pub mod g2;

pub use fit::{
    fit_exponential_decay, fit_line, levenberg_marquardt, ExpBunching, ExponentialDecay,
    FitModel, FitResult, GaussianPeak, LorentzianPeak, Model, ParamEstimate, RabiDamped,
};
pub use g2::{compute_g2, fit_bunching, rescale_g2, G2Histogram};
