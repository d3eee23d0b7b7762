//! Physical and numerical constants shared across modules.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Conversion between a Gaussian standard deviation and its FWHM,
/// 2·sqrt(2·ln 2).
pub const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Time-bandwidth product of a transform-limited Gaussian pulse,
/// duration FWHM × spectral FWHM (both of the intensity), 2·ln 2/π.
pub const GAUSSIAN_TBP: f64 = 0.441_270_189_673_880_6;

/// Detector click timestamps are quantized to this tick, seconds.
pub const TIME_RESOLUTION: f64 = 1e-9;
