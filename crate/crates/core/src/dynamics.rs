//! Two-level optical Bloch dynamics under shaped laser pulses.
//!
//! The Bloch vector (u, v, w) evolves in the frame rotating at the laser
//! carrier; `w` is the population inversion and the ground state is
//! (0, 0, −1). Pulses are Gaussian or chirped-Gaussian envelopes integrated
//! with a fixed-step fourth-order Runge-Kutta scheme. On top of the raw
//! integrator sit the measurement-level building blocks: tabulated
//! excitation profiles, Rabi scans against intra-cavity photon number with
//! cavity-jitter intensity noise, and photon-echo sequences.

use crate::cavity::lorentzian_transmission;
use crate::constants::GAUSSIAN_TBP;
use crate::error::SimError;
use crate::noise::CavityJitter;
use crate::rng::derive_rng2;
use crate::scalar::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Gaussian amplitude-envelope integral: ∫exp(−2 ln2 t²/d²) dt = d·sqrt(π/(2 ln2)).
fn envelope_area_factor<T: Scalar>() -> T {
    T::from_f64((std::f64::consts::PI / (2.0 * std::f64::consts::LN_2)).sqrt())
}

/// Pulse envelope shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    Gaussian,
    ChirpedGaussian,
}

/// A shaped excitation pulse.
///
/// `duration_fwhm` and `bandwidth_fwhm` refer to the intensity envelope and
/// intensity spectrum; for a transform-limited Gaussian their product is
/// 2 ln2/π ≈ 0.441.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse<T> {
    pub shape: PulseShape,
    /// Intensity FWHM duration, s.
    pub duration_fwhm: T,
    /// Intensity FWHM spectral width, Hz.
    pub bandwidth_fwhm: T,
    /// Laser carrier minus reference frequency, Hz.
    pub center_detuning: T,
    /// Full chirp span for chirped pulses, Hz.
    pub chirp_span: T,
    /// Pulse area, rad (θ = ∫Ω dt).
    pub area: T,
    /// Carrier phase, rad.
    pub phase: T,
}

impl<T: Scalar> Pulse<T> {
    /// Transform-limited Gaussian of given intensity-spectrum FWHM.
    pub fn gaussian_from_bandwidth(bandwidth_fwhm: T, area: T) -> Self {
        let duration = T::from_f64(GAUSSIAN_TBP) / bandwidth_fwhm;
        Self {
            shape: PulseShape::Gaussian,
            duration_fwhm: duration,
            bandwidth_fwhm,
            center_detuning: T::zero(),
            chirp_span: T::zero(),
            area,
            phase: T::zero(),
        }
    }

    /// Transform-limited Gaussian of given intensity-envelope FWHM.
    pub fn gaussian_from_duration(duration_fwhm: T, area: T) -> Self {
        let bandwidth = T::from_f64(GAUSSIAN_TBP) / duration_fwhm;
        Self {
            shape: PulseShape::Gaussian,
            duration_fwhm,
            bandwidth_fwhm: bandwidth,
            center_detuning: T::zero(),
            chirp_span: T::zero(),
            area,
            phase: T::zero(),
        }
    }

    /// Chirped Gaussian sweeping `chirp_span` linearly across the window.
    pub fn chirped(bandwidth_fwhm: T, chirp_span: T, area: T) -> Self {
        let mut p = Self::gaussian_from_bandwidth(bandwidth_fwhm, area);
        p.shape = PulseShape::ChirpedGaussian;
        p.chirp_span = chirp_span;
        p
    }

    pub fn with_phase(mut self, phase: T) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_detuning(mut self, detuning: T) -> Self {
        self.center_detuning = detuning;
        self
    }

    pub fn with_area(mut self, area: T) -> Self {
        self.area = area;
        self
    }

    /// Peak Rabi angular frequency Ω0 = area/(d·sqrt(π/(2 ln2))), rad/s.
    pub fn peak_rabi(&self) -> T {
        self.area / (self.duration_fwhm * envelope_area_factor::<T>())
    }

    /// Integration window half-width: the envelope is negligible beyond.
    fn half_window(&self) -> T {
        T::from_f64(3.5) * self.duration_fwhm
    }

    /// Rabi envelope at time t (t = 0 at pulse center), rad/s.
    fn envelope(&self, t: T) -> T {
        let x = t / self.duration_fwhm;
        self.peak_rabi() * (-T::from_f64(2.0 * std::f64::consts::LN_2) * x * x).exp()
    }

    /// Instantaneous detuning offset from the chirp, Hz.
    fn chirp_offset(&self, t: T) -> T {
        match self.shape {
            PulseShape::Gaussian => T::zero(),
            PulseShape::ChirpedGaussian => {
                // linear sweep across the integration window
                let w = self.half_window();
                self.chirp_span * t / (T::from_f64(2.0) * w)
            }
        }
    }

    /// ∫Ω² dt, used as the pulse-energy proxy for background excitation.
    pub fn energy(&self) -> T {
        let omega0 = self.peak_rabi();
        let factor = T::from_f64((std::f64::consts::PI / (4.0 * std::f64::consts::LN_2)).sqrt());
        omega0 * omega0 * self.duration_fwhm * factor
    }
}

/// Relaxation during pulses and free evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay<T> {
    /// Excited-state lifetime T1, s; infinite disables energy relaxation.
    pub lifetime: T,
    /// Optical coherence time T2, s; infinite disables dephasing.
    pub t2: T,
}

impl<T: Scalar> Decay<T> {
    pub fn new(lifetime: T, t2: T) -> Self {
        Self { lifetime, t2 }
    }

    pub fn none() -> Self {
        Self {
            lifetime: T::infinity(),
            t2: T::infinity(),
        }
    }

    fn gamma1(&self) -> T {
        if self.lifetime.is_finite() {
            self.lifetime.recip()
        } else {
            T::zero()
        }
    }

    fn gamma2(&self) -> T {
        if self.t2.is_finite() {
            self.t2.recip()
        } else {
            T::zero()
        }
    }
}

/// Bloch vector; ground state is (0, 0, −1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState<T> {
    pub u: T,
    pub v: T,
    pub w: T,
}

impl<T: Scalar> BlochState<T> {
    pub fn ground() -> Self {
        Self {
            u: T::zero(),
            v: T::zero(),
            w: -T::one(),
        }
    }

    pub fn norm(&self) -> T {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    /// Excited-state population (1 + w)/2.
    pub fn excited_population(&self) -> T {
        (T::one() + self.w) / T::from_f64(2.0)
    }

    /// Free evolution: precession about z by detuning Δ (Hz) for `dt` with
    /// transverse/longitudinal relaxation. Exact (no integration error).
    pub fn free_evolve(&mut self, detuning: T, dt: T, decay: &Decay<T>) {
        let phi = T::from_f64(2.0) * T::PI() * detuning * dt;
        let (s, c) = phi.sin_cos();
        let (u, v) = (self.u, self.v);
        // precession convention matches the in-pulse equations below
        self.u = u * c - v * s;
        self.v = u * s + v * c;
        let g2 = decay.gamma2();
        if g2 > T::zero() {
            let damp = (-dt * g2).exp();
            self.u *= damp;
            self.v *= damp;
        }
        let g1 = decay.gamma1();
        if g1 > T::zero() {
            let damp = (-dt * g1).exp();
            self.w = -T::one() + (self.w + T::one()) * damp;
        }
    }
}

fn bloch_derivative<T: Scalar>(
    state: (T, T, T),
    omega_x: T,
    omega_y: T,
    delta: T,
    g1: T,
    g2: T,
) -> (T, T, T) {
    let (u, v, w) = state;
    (
        -delta * v + omega_y * w - g2 * u,
        delta * u - omega_x * w - g2 * v,
        omega_x * v - omega_y * u - g1 * (w + T::one()),
    )
}

/// Evolve a Bloch state through one pulse at a given emitter detuning
/// (laser minus emitter, Hz), with relaxation.
///
/// Fixed-step RK4; the step obeys both `duration/200` and a rotation-angle
/// bound so the norm error stays below 1e−9 over the pulse.
pub fn evolve_pulse<T: Scalar>(
    state: &BlochState<T>,
    pulse: &Pulse<T>,
    detuning: T,
    decay: &Decay<T>,
) -> Result<BlochState<T>, SimError> {
    let two_pi = T::from_f64(std::f64::consts::TAU);
    let half_window = pulse.half_window();
    let window = T::from_f64(2.0) * half_window;
    let delta_total = (pulse.center_detuning + detuning).abs() + pulse.chirp_span / T::from_f64(2.0);
    let omega_max =
        (pulse.peak_rabi().powi(2) + (two_pi * delta_total).powi(2)).sqrt() + T::from_f64(1.0);

    // step ≤ duration/200 and rotation per step ≤ 0.012 rad
    let n_envelope = (window / pulse.duration_fwhm).into_f64() * 200.0;
    let n_rotation = (omega_max * window).into_f64() / 0.012;
    let n_steps = n_envelope.max(n_rotation).ceil() as usize;
    if n_steps == 0 || !(n_steps as f64).is_finite() {
        return Err(SimError::physics("step-size underflow in pulse integration"));
    }
    let h = window / T::from_f64(n_steps as f64);
    if h <= T::zero() {
        return Err(SimError::physics("step-size underflow in pulse integration"));
    }

    let g1 = decay.gamma1();
    let g2 = decay.gamma2();
    let (ps, pc) = pulse.phase.sin_cos();

    let fields = |t: T| -> (T, T, T) {
        let omega = pulse.envelope(t);
        let delta_hz = pulse.center_detuning + detuning - pulse.chirp_offset(t);
        (omega * pc, omega * ps, two_pi * delta_hz)
    };

    let mut s = (state.u, state.v, state.w);
    let mut t = -half_window;
    let half = T::from_f64(0.5);
    let sixth = T::from_f64(1.0 / 6.0);
    for _ in 0..n_steps {
        let (ox1, oy1, d1) = fields(t);
        let (ox2, oy2, d2) = fields(t + h * half);
        let (ox3, oy3, d3) = fields(t + h);
        let k1 = bloch_derivative(s, ox1, oy1, d1, g1, g2);
        let s2 = (s.0 + half * h * k1.0, s.1 + half * h * k1.1, s.2 + half * h * k1.2);
        let k2 = bloch_derivative(s2, ox2, oy2, d2, g1, g2);
        let s3 = (s.0 + half * h * k2.0, s.1 + half * h * k2.1, s.2 + half * h * k2.2);
        let k3 = bloch_derivative(s3, ox2, oy2, d2, g1, g2);
        let s4 = (s.0 + h * k3.0, s.1 + h * k3.1, s.2 + h * k3.2);
        let k4 = bloch_derivative(s4, ox3, oy3, d3, g1, g2);
        s = (
            s.0 + sixth * h * (k1.0 + T::from_f64(2.0) * (k2.0 + k3.0) + k4.0),
            s.1 + sixth * h * (k1.1 + T::from_f64(2.0) * (k2.1 + k3.1) + k4.1),
            s.2 + sixth * h * (k1.2 + T::from_f64(2.0) * (k2.2 + k3.2) + k4.2),
        );
        t += h;
    }
    Ok(BlochState { u: s.0, v: s.1, w: s.2 })
}

/// Excited population after one pulse from the ground state.
pub fn excitation_probability<T: Scalar>(
    pulse: &Pulse<T>,
    emitter_detuning: T,
    decay: &Decay<T>,
) -> Result<T, SimError> {
    let end = evolve_pulse(&BlochState::ground(), pulse, emitter_detuning, decay)?;
    Ok(end.excited_population().max(T::zero()).min(T::one()))
}

/// Tabulated excitation probability vs detuning, for fast repeated lookup
/// inside Monte-Carlo loops. Entries come from the Bloch integrator;
/// evaluation interpolates linearly between grid points.
#[derive(Debug, Clone)]
pub struct ExcitationProfile<T> {
    detuning_min: T,
    step: T,
    values: Vec<T>,
}

impl<T: Scalar> ExcitationProfile<T> {
    pub fn tabulate(
        pulse: &Pulse<T>,
        decay: &Decay<T>,
        detuning_span: T,
        points: usize,
    ) -> Result<Self, SimError> {
        assert!(points >= 3);
        let min = -detuning_span / T::from_f64(2.0);
        let step = detuning_span / T::from_f64((points - 1) as f64);
        let mut values = Vec::with_capacity(points);
        for i in 0..points {
            let delta = min + step * T::from_f64(i as f64);
            values.push(excitation_probability(pulse, delta, decay)?);
        }
        Ok(Self {
            detuning_min: min,
            step,
            values,
        })
    }

    /// Linear interpolation; clamps outside the tabulated span (the profile
    /// is negligible there by construction).
    pub fn eval(&self, detuning: T) -> T {
        let pos = (detuning - self.detuning_min) / self.step;
        let n = self.values.len();
        if pos <= T::zero() {
            return self.values[0];
        }
        let idx = pos.floor().into_f64() as usize;
        if idx + 1 >= n {
            return self.values[n - 1];
        }
        let frac = pos - T::from_f64(idx as f64);
        self.values[idx] * (T::one() - frac) + self.values[idx + 1] * frac
    }
}

/// Scaling of pulse area with mean intra-cavity photon number:
/// θ = π·sqrt(N/N_π).
pub fn area_from_photon_number<T: Scalar>(n_cavity: T, n_pi: T) -> T {
    T::PI() * (n_cavity / n_pi).sqrt()
}

/// One point of a Rabi scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub mean: f64,
    pub std_error: f64,
    pub shots: u64,
}

/// Rabi-scan configuration: pulse shape fixed, area scanned through the
/// photon-number axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RabiPlan<T> {
    /// Pulse template (duration fixes the envelope; area comes from N).
    pub pulse_duration_fwhm: T,
    /// Photon numbers to scan.
    pub photon_numbers: Vec<T>,
    /// Calibration: photon number of a π pulse at zero cavity detuning.
    pub n_pi: T,
    /// Linear background signal per photon number.
    pub background_slope: T,
    /// Monte-Carlo shots per point.
    pub shots: u64,
    /// Cavity FWHM linewidth, Hz (for jitter intensity filtering).
    pub cavity_fwhm: T,
}

/// Simulate a Rabi scan: for each ⟨N⟩ the per-shot intra-cavity intensity
/// is filtered by the Lorentzian cavity transmission at a sampled jitter
/// detuning, and the fluorescence signal is the excited population after
/// the pulse plus a linear background.
pub fn rabi_scan<T: Scalar>(
    plan: &RabiPlan<T>,
    decay: &Decay<T>,
    jitter: &CavityJitter<T>,
    seed: u64,
) -> Result<Vec<ScanPoint>, SimError> {
    // tabulate excited population vs pulse area on a fine grid
    let max_n = plan
        .photon_numbers
        .iter()
        .cloned()
        .fold(T::zero(), |a, b| a.max(b));
    let max_area = area_from_photon_number(max_n, plan.n_pi) * T::from_f64(1.05) + T::from_f64(0.1);
    let grid = 2048usize;
    let mut pop = Vec::with_capacity(grid);
    for i in 0..grid {
        let area = max_area * T::from_f64(i as f64 / (grid - 1) as f64);
        let pulse = Pulse::gaussian_from_duration(plan.pulse_duration_fwhm, area);
        pop.push(excitation_probability(&pulse, T::zero(), decay)?);
    }
    let area_step = max_area / T::from_f64((grid - 1) as f64);
    let eval = |area: T| -> T {
        let pos = (area / area_step).into_f64();
        let idx = pos.floor() as usize;
        if idx + 1 >= grid {
            return pop[grid - 1];
        }
        let frac = T::from_f64(pos - idx as f64);
        pop[idx] * (T::one() - frac) + pop[idx + 1] * frac
    };

    let mut points = Vec::with_capacity(plan.photon_numbers.len());
    for (pi, &n_cavity) in plan.photon_numbers.iter().enumerate() {
        let mut rng = derive_rng2(seed, "rabi-point", pi as u64, 0);
        let nominal_area = area_from_photon_number(n_cavity, plan.n_pi);
        let mut sum = T::zero();
        let mut sumsq = T::zero();
        for _ in 0..plan.shots {
            let cavity_detuning = jitter.sample(&mut rng);
            let transmission = lorentzian_transmission(cavity_detuning, plan.cavity_fwhm);
            let area = nominal_area * transmission.sqrt();
            let signal = eval(area) + plan.background_slope * n_cavity;
            sum += signal;
            sumsq += signal * signal;
        }
        let shots_f = T::from_f64(plan.shots as f64);
        let mean = sum / shots_f;
        let var = (sumsq / shots_f - mean * mean).max(T::zero());
        let std_error = (var / shots_f).sqrt();
        points.push(ScanPoint {
            x: n_cavity.into_f64(),
            mean: mean.into_f64(),
            std_error: std_error.into_f64(),
            shots: plan.shots,
        });
    }
    Ok(points)
}

/// Photon-echo sequence: π/2 — T/2 — π — T/2 — π/2 with per-pulse phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EchoSequence<T> {
    /// Total free-evolution time, s.
    pub t_seq: T,
    /// Phases of the π/2, π, π/2 pulses, rad.
    pub phases: (T, T, T),
}

impl<T: Scalar> EchoSequence<T> {
    pub fn new(t_seq: T) -> Self {
        Self {
            t_seq,
            phases: (T::zero(), T::zero(), T::zero()),
        }
    }
}

/// Ideal rotation about an equatorial axis at angle `phase` from x.
fn hard_rotation<T: Scalar>(state: &mut BlochState<T>, angle: T, phase: T) {
    let (sa, ca) = angle.sin_cos();
    let (sp, cp) = phase.sin_cos();
    // axis n = (cos φ, sin φ, 0); Rodrigues rotation of (u, v, w)
    let (u, v, w) = (state.u, state.v, state.w);
    let dot = u * cp + v * sp;
    state.u = u * ca + (sp * w) * sa + cp * dot * (T::one() - ca);
    state.v = v * ca + (-cp * w) * sa + sp * dot * (T::one() - ca);
    state.w = w * ca + (cp * v - sp * u) * sa;
}

/// Echo readout for one realization: final excited population for the
/// given first-pulse phase, under a static detuning during free evolution.
/// Pulses are ideal (hard-pulse limit); decoherence acts during the free
/// periods.
pub fn echo_population<T: Scalar>(
    seq: &EchoSequence<T>,
    first_phase: T,
    static_detuning: T,
    decay: &Decay<T>,
) -> T {
    let mut state = BlochState::ground();
    let half = seq.t_seq / T::from_f64(2.0);
    let pi = T::PI();
    let half_pi = pi / T::from_f64(2.0);
    hard_rotation(&mut state, half_pi, seq.phases.0 + first_phase);
    state.free_evolve(static_detuning, half, decay);
    hard_rotation(&mut state, pi, seq.phases.1);
    state.free_evolve(static_detuning, half, decay);
    hard_rotation(&mut state, half_pi, seq.phases.2);
    state.excited_population()
}

/// Same readout with finite-duration Gaussian pulses integrated through the
/// Bloch equations; used to validate the hard-pulse model.
pub fn echo_population_finite_pulses<T: Scalar>(
    seq: &EchoSequence<T>,
    first_phase: T,
    static_detuning: T,
    decay: &Decay<T>,
    pulse_duration: T,
    include_refocusing_pulse: bool,
) -> Result<T, SimError> {
    let mut state = BlochState::ground();
    let half = seq.t_seq / T::from_f64(2.0);
    let pi = T::PI();
    let p90 = Pulse::gaussian_from_duration(pulse_duration, pi / T::from_f64(2.0));
    let p180 = Pulse::gaussian_from_duration(pulse_duration, pi);
    state = evolve_pulse(
        &state,
        &p90.with_phase(seq.phases.0 + first_phase),
        static_detuning,
        decay,
    )?;
    state.free_evolve(static_detuning, half, decay);
    if include_refocusing_pulse {
        state = evolve_pulse(&state, &p180.with_phase(seq.phases.1), static_detuning, decay)?;
    }
    state.free_evolve(static_detuning, half, decay);
    state = evolve_pulse(&state, &p90.with_phase(seq.phases.2), static_detuning, decay)?;
    Ok(state.excited_population())
}

/// Echo contrast averaged over shots: normalized difference of the
/// fluorescence signal between the two first-pulse phase variants
/// (0 and π). Static per-shot detunings cancel exactly; decoherence gives
/// e^(−t_seq/T2).
///
/// `detuning_sampler` provides the quasi-static detuning for each shot.
pub fn echo_contrast<T: Scalar, R: Rng + ?Sized, F: FnMut(&mut R) -> T>(
    seq: &EchoSequence<T>,
    decay: &Decay<T>,
    shots: u64,
    rng: &mut R,
    mut detuning_sampler: F,
) -> T {
    assert!(shots > 0);
    let mut diff_sum = T::zero();
    for _ in 0..shots {
        let delta = detuning_sampler(rng);
        let p_plus = echo_population(seq, T::zero(), delta, decay);
        let p_minus = echo_population(seq, T::PI(), delta, decay);
        diff_sum += p_minus - p_plus;
    }
    diff_sum / T::from_f64(shots as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;
    use approx::assert_relative_eq;

    type P = Pulse<f64>;

    #[test]
    fn transform_limited_product() {
        let p = P::gaussian_from_bandwidth(0.28e6, std::f64::consts::PI);
        assert_relative_eq!(
            p.duration_fwhm * p.bandwidth_fwhm,
            GAUSSIAN_TBP,
            max_relative = 1e-12
        );
        assert_relative_eq!(p.duration_fwhm, 1.576e-6, max_relative = 1e-3);
    }

    #[test]
    fn pi_pulse_inverts() {
        let p = P::gaussian_from_duration(1e-6, std::f64::consts::PI);
        let end = evolve_pulse(&BlochState::ground(), &p, 0.0, &Decay::none()).unwrap();
        assert!((end.w - 1.0).abs() < 1e-6, "w = {}", end.w);
        assert!((end.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_pi_pulse_equalizes() {
        let p = P::gaussian_from_duration(1e-6, std::f64::consts::FRAC_PI_2);
        let end = evolve_pulse(&BlochState::ground(), &p, 0.0, &Decay::none()).unwrap();
        assert!(end.w.abs() < 1e-6, "w = {}", end.w);
    }

    #[test]
    fn far_detuned_pulse_leaves_ground() {
        let p = P::gaussian_from_duration(1e-6, std::f64::consts::PI);
        // detuning much larger than the 0.44 MHz bandwidth
        let end = evolve_pulse(&BlochState::ground(), &p, 30e6, &Decay::none()).unwrap();
        assert!(end.w < -0.999, "w = {}", end.w);
    }

    #[test]
    fn weak_field_response_matches_gaussian_spectrum() {
        // the Bloch integrator is the oracle for the spectral response:
        // in the perturbative limit p(δ)/p(0) = exp(−4 ln2 (δ/FWHM)²)
        let p = P::gaussian_from_bandwidth(0.28e6, 0.05 * std::f64::consts::PI);
        let p0 = excitation_probability(&p, 0.0, &Decay::none()).unwrap();
        for frac in [0.25, 0.5, 1.0] {
            let delta = frac * 0.28e6;
            let pd = excitation_probability(&p, delta, &Decay::none()).unwrap();
            let expected = (-4.0 * std::f64::consts::LN_2 * frac * frac).exp();
            assert_relative_eq!(pd / p0, expected, max_relative = 0.02);
        }
    }

    #[test]
    fn excitation_drops_below_half_at_one_bandwidth() {
        // π-area pulse, 0.28 MHz bandwidth, detuning = bandwidth
        let p = P::gaussian_from_bandwidth(0.28e6, std::f64::consts::PI);
        let on = excitation_probability(&p, 0.0, &Decay::none()).unwrap();
        let off = excitation_probability(&p, 0.28e6, &Decay::none()).unwrap();
        assert!(off < 0.5 * on, "on {on} off {off}");
    }

    #[test]
    fn narrowband_pulse_has_no_crosstalk_at_5mhz() {
        // 0.02 MHz probe, 5.3 MHz neighbor: excitation < 1e−3
        let p = P::gaussian_from_bandwidth(0.02e6, std::f64::consts::PI);
        let leak = excitation_probability(&p, 5.3e6, &Decay::none()).unwrap();
        assert!(leak < 1e-3, "leak {leak}");
    }

    #[test]
    fn excitation_even_in_detuning() {
        let p = P::gaussian_from_bandwidth(0.55e6, 1.7);
        for delta in [0.1e6, 0.37e6, 0.9e6] {
            let a = excitation_probability(&p, delta, &Decay::none()).unwrap();
            let b = excitation_probability(&p, -delta, &Decay::none()).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn two_half_pi_pulses_compose_to_pi() {
        let half = P::gaussian_from_duration(1e-6, std::f64::consts::FRAC_PI_2);
        let full = P::gaussian_from_duration(1e-6, std::f64::consts::PI);
        let mid = evolve_pulse(&BlochState::ground(), &half, 0.0, &Decay::none()).unwrap();
        let end2 = evolve_pulse(&mid, &half, 0.0, &Decay::none()).unwrap();
        let end1 = evolve_pulse(&BlochState::ground(), &full, 0.0, &Decay::none()).unwrap();
        assert!((end1.u - end2.u).abs() < 1e-7);
        assert!((end1.v - end2.v).abs() < 1e-7);
        assert!((end1.w - end2.w).abs() < 1e-7);
    }

    #[test]
    fn decay_during_long_pulse_reduces_inversion() {
        let p = P::gaussian_from_bandwidth(0.02e6, std::f64::consts::PI); // ~22 µs
        let decay = Decay::new(0.152e-3, 0.115e-3);
        let with = excitation_probability(&p, 0.0, &decay).unwrap();
        let without = excitation_probability(&p, 0.0, &Decay::none()).unwrap();
        assert!(with < without);
        assert!(with > 0.5, "decay should not destroy the pulse: {with}");
    }

    #[test]
    fn profile_matches_direct_integration() {
        let p = P::gaussian_from_bandwidth(0.28e6, std::f64::consts::PI);
        let decay = Decay::new(0.152e-3, 0.115e-3);
        let profile = ExcitationProfile::tabulate(&p, &decay, 4e6, 1601).unwrap();
        for delta in [-1.3e6, -0.2e6, 0.0, 0.11e6, 0.5e6, 1.9e6] {
            let direct = excitation_probability(&p, delta, &decay).unwrap();
            let interp = profile.eval(delta);
            assert!(
                (direct - interp).abs() < 2e-4,
                "delta {delta}: {direct} vs {interp}"
            );
        }
    }

    #[test]
    fn chirped_pulse_covers_span() {
        // chirp spanning 2 MHz excites across the span where an unchirped
        // pulse of the same bandwidth would not
        let chirped = P::chirped(0.5e6, 2.0e6, 2.0 * std::f64::consts::PI);
        let plain = P::gaussian_from_bandwidth(0.5e6, 2.0 * std::f64::consts::PI);
        let delta = 0.8e6;
        let pc = excitation_probability(&chirped, delta, &Decay::none()).unwrap();
        let pp = excitation_probability(&plain, delta, &Decay::none()).unwrap();
        assert!(pc > 3.0 * pp, "chirped {pc} plain {pp}");
    }

    #[test]
    fn norm_conserved_without_decay() {
        for (area, delta) in [
            (std::f64::consts::PI, 0.0),
            (2.3, 0.3e6),
            (6.0, 1.2e6),
            (0.4, 5e6),
        ] {
            let p = P::gaussian_from_duration(1e-6, area);
            let end = evolve_pulse(&BlochState::ground(), &p, delta, &Decay::none()).unwrap();
            assert!(
                (end.norm() - 1.0).abs() < 1e-9,
                "area {area} delta {delta}: norm {}",
                end.norm()
            );
        }
    }

    #[test]
    fn hard_rotation_is_exact() {
        let mut s = BlochState::<f64>::ground();
        hard_rotation(&mut s, std::f64::consts::PI, 0.0);
        assert_relative_eq!(s.w, 1.0, epsilon = 1e-12);
        let mut s = BlochState::<f64>::ground();
        hard_rotation(&mut s, std::f64::consts::FRAC_PI_2, 0.0);
        assert!(s.w.abs() < 1e-12);
        assert_relative_eq!(s.v, 1.0, epsilon = 1e-12);
        // phase-π/2 axis rotates u instead
        let mut s = BlochState::<f64>::ground();
        hard_rotation(&mut s, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(s.u, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn echo_difference_decays_with_t2() {
        let t2 = 0.115e-3;
        let decay = Decay::new(f64::INFINITY, t2);
        for t_seq in [0.0, 0.05e-3, 0.115e-3, 0.2e-3] {
            let seq = EchoSequence::new(t_seq);
            let d = echo_population(&seq, std::f64::consts::PI, 37e3, &decay)
                - echo_population(&seq, 0.0, 37e3, &decay);
            assert_relative_eq!(d, (-t_seq / t2).exp(), max_relative = 1e-9);
        }
    }

    #[test]
    fn echo_cancels_static_detuning_exactly() {
        let seq = EchoSequence::new(0.2e-3);
        for delta in [0.0, 11e3, 50e3, 4.4e6] {
            let d = echo_population(&seq, std::f64::consts::PI, delta, &Decay::none())
                - echo_population(&seq, 0.0, delta, &Decay::none());
            assert!((d - 1.0).abs() < 1e-12, "delta {delta}: {d}");
        }
    }

    #[test]
    fn echo_contrast_unity_at_zero_delay() {
        let seq = EchoSequence::new(0.0);
        let mut rng = derive_rng(21, "echo-test", 0);
        let c = echo_contrast(&seq, &Decay::none(), 64, &mut rng, |r| {
            50e3 * f64::standard_normal(r)
        });
        assert_relative_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn finite_pulse_echo_refocuses_small_detuning() {
        // Bloch oracle with and without the π pulse: 50 kHz static detuning
        let seq = EchoSequence::new(0.05e-3);
        let none = Decay::<f64>::none();
        let with_pi = echo_population_finite_pulses(&seq, std::f64::consts::PI, 50e3, &none, 0.2e-6, true)
            .unwrap()
            - echo_population_finite_pulses(&seq, 0.0, 50e3, &none, 0.2e-6, true).unwrap();
        assert!((with_pi - 1.0).abs() < 1e-3, "contrast {with_pi}");
        let without_pi =
            echo_population_finite_pulses(&seq, std::f64::consts::PI, 50e3, &none, 0.2e-6, false)
                .unwrap()
                - echo_population_finite_pulses(&seq, 0.0, 50e3, &none, 0.2e-6, false).unwrap();
        assert!(
            (without_pi - 1.0).abs() > 0.05,
            "without refocusing the detuning must bite: {without_pi}"
        );
    }

    #[test]
    fn rabi_scan_ideal_is_undamped() {
        let n_pi = 20.0;
        let plan = RabiPlan {
            pulse_duration_fwhm: 1e-6,
            photon_numbers: (0..=40).map(|i| i as f64).collect(),
            n_pi,
            background_slope: 0.0,
            shots: 4,
            cavity_fwhm: 13e6,
        };
        let points = rabi_scan(&plan, &Decay::none(), &CavityJitter::off(), 3).unwrap();
        for pt in &points {
            let theta = std::f64::consts::PI * (pt.x / n_pi).sqrt();
            let expected = (theta / 2.0).sin().powi(2);
            assert!(
                (pt.mean - expected).abs() < 2e-3,
                "N {}: {} vs {expected}",
                pt.x,
                pt.mean
            );
        }
    }

    #[test]
    fn rabi_background_only_is_linear() {
        let plan = RabiPlan {
            pulse_duration_fwhm: 1e-6,
            photon_numbers: vec![0.0, 10.0, 20.0, 40.0],
            n_pi: 1e12, // emitter effectively decoupled: area ~ 0
            background_slope: 0.004,
            shots: 8,
            cavity_fwhm: 13e6,
        };
        let points = rabi_scan(&plan, &Decay::none(), &CavityJitter::off(), 4).unwrap();
        for pt in &points {
            assert_relative_eq!(pt.mean, 0.004 * pt.x, epsilon = 1e-4);
        }
    }

    #[test]
    fn rabi_jitter_damps_late_oscillations() {
        let n_pi = 16.0;
        let photon_numbers: Vec<f64> = (0..=120).map(|i| i as f64 * 0.5).collect();
        let plan = RabiPlan {
            pulse_duration_fwhm: 1e-6,
            photon_numbers: photon_numbers.clone(),
            n_pi,
            background_slope: 0.0,
            shots: 600,
            cavity_fwhm: 13e6,
        };
        let jitter = CavityJitter::independent(6e6);
        let points = rabi_scan(&plan, &Decay::none(), &jitter, 5).unwrap();
        // first maximum (θ=π) stays high, the θ=3π maximum is visibly damped
        let at = |n: f64| {
            points
                .iter()
                .min_by(|a, b| (a.x - n).abs().partial_cmp(&(b.x - n).abs()).unwrap())
                .unwrap()
                .mean
        };
        let first_peak = at(n_pi);
        let second_peak = at(9.0 * n_pi);
        assert!(first_peak > 0.9);
        assert!(second_peak < first_peak - 0.02, "no damping: {first_peak} vs {second_peak}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig { cases: 24, ..Default::default() })]
        #[test]
        fn norm_never_exceeds_one(
            area in 0.05..7.0f64,
            delta in -8e6..8e6f64,
            phase in 0.0..std::f64::consts::TAU,
        ) {
            let p = P::gaussian_from_duration(1e-6, area).with_phase(phase);
            let end = evolve_pulse(&BlochState::ground(), &p, delta, &Decay::none()).unwrap();
            proptest::prop_assert!(end.norm() <= 1.0 + 1e-9);
            proptest::prop_assert!((end.norm() - 1.0).abs() < 1e-9);
        }
    }
}
