//! Conversion of excitation events into detector click streams.
//!
//! Each excited emitter emits one photon after an exponential delay; the
//! photon survives the efficiency chain with the product probability.
//! Detector dark counts form a homogeneous Poisson process, the weakly
//! coupled dopant background a per-pulse Poissonian stream. Merged streams
//! are quantized to 1 ns ticks and filtered by a non-paralyzable dead time,
//! which also removes duplicate timestamps.
//!
//! Origin tags exist for testing only; estimators never look at them and
//! they can be stripped on export.

use crate::constants::TIME_RESOLUTION;
use crate::error::SimError;
use crate::rng::poisson_count;
use crate::scalar::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Multiplicative photon-survival chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyChain<T> {
    /// Emission channeled into the resonator mode, P/(P+1).
    pub eta_channel: T,
    /// Escape through the outcoupling mirror.
    pub eta_out: T,
    /// Fiber-coupling probability.
    pub eta_fiber: T,
    /// Remaining transmission × detector efficiency.
    pub eta_rest: T,
}

impl<T: Scalar> EfficiencyChain<T> {
    pub fn new(eta_channel: T, eta_out: T, eta_fiber: T, eta_rest: T) -> Result<Self, SimError> {
        for (name, v) in [
            ("eta_channel", eta_channel),
            ("eta_out", eta_out),
            ("eta_fiber", eta_fiber),
            ("eta_rest", eta_rest),
        ] {
            if v < T::zero() || v > T::one() {
                return Err(SimError::physics(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(Self {
            eta_channel,
            eta_out,
            eta_fiber,
            eta_rest,
        })
    }

    /// Product of all chain factors.
    pub fn total(&self) -> T {
        self.eta_channel * self.eta_out * self.eta_fiber * self.eta_rest
    }
}

/// Total detection probability for an emitted photon.
pub fn total_efficiency<T: Scalar>(chain: &EfficiencyChain<T>) -> T {
    chain.total()
}

/// Provenance of a click (testing metadata only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClickOrigin {
    /// Photon from the addressed emitter.
    Signal,
    /// Photon from the weakly coupled dopant background.
    Background,
    /// Detector dark count.
    Dark,
}

impl ClickOrigin {
    pub fn label(self) -> &'static str {
        match self {
            ClickOrigin::Signal => "signal",
            ClickOrigin::Background => "background",
            ClickOrigin::Dark => "dark",
        }
    }
}

/// Timestamped detector events over a record of fixed duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickStream {
    /// (timestamp in ns ticks, origin), strictly increasing timestamps.
    pub clicks: Vec<(i64, ClickOrigin)>,
    /// Record duration, s.
    pub duration: f64,
    /// Dark-count rate used to build the stream, Hz.
    pub dark_rate: f64,
}

impl ClickStream {
    pub fn len(&self) -> usize {
        self.clicks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clicks.is_empty()
    }

    /// Timestamps in seconds.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.clicks.iter().map(|(t, _)| *t as f64 * TIME_RESOLUTION)
    }

    /// CSV export `timestamp_ns[,origin]`; the origin column is dropped
    /// when `strip_origin` is set (blind analysis).
    pub fn to_csv(&self, strip_origin: bool) -> String {
        let mut out = String::new();
        if strip_origin {
            out.push_str("timestamp_ns\n");
            for (t, _) in &self.clicks {
                out.push_str(&format!("{t}\n"));
            }
        } else {
            out.push_str("timestamp_ns,origin\n");
            for (t, origin) in &self.clicks {
                out.push_str(&format!("{t},{}\n", origin.label()));
            }
        }
        out
    }
}

/// One laser excitation of one emitter.
#[derive(Debug, Clone, Copy)]
pub struct ExcitationEvent {
    /// Pulse time, s.
    pub time: f64,
    /// Index into the per-emitter detection parameters.
    pub emitter: usize,
    /// Probability that the pulse left the emitter excited.
    pub p_excited: f64,
}

/// Per-emitter parameters needed by the click sampler.
#[derive(Debug, Clone, Copy)]
pub struct EmitterDetection {
    /// Excited-state lifetime, s.
    pub lifetime: f64,
    /// Photon survival probability through the full chain.
    pub efficiency: f64,
}

fn to_tick(t: f64) -> i64 {
    (t / TIME_RESOLUTION).round() as i64
}

/// Sample signal clicks: each excitation yields at most one photon after an
/// exponential delay, thinned by the chain efficiency. Events must be
/// sorted by time.
pub fn signal_clicks<R: Rng + ?Sized>(
    events: &[ExcitationEvent],
    emitters: &[EmitterDetection],
    duration: f64,
    rng: &mut R,
) -> Vec<(i64, ClickOrigin)> {
    let mut clicks = Vec::new();
    for ev in events {
        let det = &emitters[ev.emitter];
        if f64::unit_uniform(rng) >= ev.p_excited {
            continue;
        }
        let delay = det.lifetime * f64::standard_exp(rng);
        if f64::unit_uniform(rng) >= det.efficiency {
            continue;
        }
        let t = ev.time + delay;
        if t < duration {
            clicks.push((to_tick(t), ClickOrigin::Signal));
        }
    }
    clicks
}

/// Homogeneous Poisson dark counts over [0, duration).
pub fn dark_clicks<R: Rng + ?Sized>(
    dark_rate: f64,
    duration: f64,
    rng: &mut R,
) -> Vec<(i64, ClickOrigin)> {
    let mut clicks = Vec::new();
    if dark_rate <= 0.0 {
        return clicks;
    }
    let mut t = 0.0;
    loop {
        t += f64::standard_exp(rng) / dark_rate;
        if t >= duration {
            break;
        }
        clicks.push((to_tick(t), ClickOrigin::Dark));
    }
    clicks
}

/// Poissonian background clicks: for each window, a Poisson count with the
/// given mean, uniform within the window.
pub fn background_clicks<R: Rng + ?Sized>(
    windows: &[(f64, f64, f64)], // (start, end, mean count)
    rng: &mut R,
) -> Vec<(i64, ClickOrigin)> {
    let mut clicks = Vec::new();
    for &(start, end, mean) in windows {
        let n = poisson_count(rng, mean);
        for _ in 0..n {
            let t = start + (end - start) * f64::unit_uniform(rng);
            clicks.push((to_tick(t), ClickOrigin::Background));
        }
    }
    clicks
}

/// Merge click collections, sort, and apply a non-paralyzable dead time.
/// The result has strictly increasing timestamps.
pub fn merge_with_dead_time(
    mut clicks: Vec<(i64, ClickOrigin)>,
    dead_time: f64,
    duration: f64,
    dark_rate: f64,
) -> ClickStream {
    clicks.sort_by_key(|(t, origin)| (*t, *origin as u8));
    let dead_ticks = (dead_time / TIME_RESOLUTION).round() as i64;
    let dead_ticks = dead_ticks.max(1);
    let mut filtered: Vec<(i64, ClickOrigin)> = Vec::with_capacity(clicks.len());
    for (t, origin) in clicks {
        if let Some((last, _)) = filtered.last() {
            if t - last < dead_ticks {
                continue;
            }
        }
        filtered.push((t, origin));
    }
    ClickStream {
        clicks: filtered,
        duration,
        dark_rate,
    }
}

/// Full click pipeline for a pulsed run: signal + per-window background +
/// darks, merged under the dead time.
pub fn emit_clicks<R: Rng + ?Sized>(
    events: &[ExcitationEvent],
    emitters: &[EmitterDetection],
    background_windows: &[(f64, f64, f64)],
    dark_rate: f64,
    duration: f64,
    dead_time: f64,
    rng: &mut R,
) -> ClickStream {
    let mut clicks = signal_clicks(events, emitters, duration, rng);
    clicks.extend(background_clicks(background_windows, rng));
    clicks.extend(dark_clicks(dark_rate, duration, rng));
    merge_with_dead_time(clicks, dead_time, duration, dark_rate)
}
