//! Nonlinear least squares: a small Levenberg-Marquardt engine with
//! analytic Jacobians for the four fixed models (gaussian, lorentzian,
//! exponential, exponential bunching) plus the damped-Rabi compound model.
//!
//! Damped normal equations are solved directly by Gaussian elimination;
//! parameter covariances come from (JᵀWJ)⁻¹, scaled by the reduced
//! chi-square for unweighted data.

use crate::error::FitError;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-10;

/// Model identifiers used in fit results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    Gaussian,
    Lorentzian,
    Exponential,
    ExpBunching,
    RabiDamped,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::Gaussian => "gaussian",
            FitModel::Lorentzian => "lorentzian",
            FitModel::Exponential => "exponential",
            FitModel::ExpBunching => "exp-bunching",
            FitModel::RabiDamped => "rabi-damped",
        }
    }
}

/// Estimate with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate<T> {
    pub value: T,
    pub std_error: T,
}

/// Outcome of a fit: named parameters and the goodness metric
/// (reduced chi-square for weighted fits).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub model: FitModel,
    pub params: BTreeMap<String, ParamEstimate<T>>,
    pub goodness: T,
}

impl<T: Scalar> FitResult<T> {
    pub fn value(&self, name: &str) -> T {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("fit result has no parameter `{name}`"))
            .value
    }

    pub fn std_error(&self, name: &str) -> T {
        self.params
            .get(name)
            .unwrap_or_else(|| panic!("fit result has no parameter `{name}`"))
            .std_error
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).expect("fit result serializes")
    }
}

/// Model function and Jacobian evaluated at one abscissa.
pub trait Model<T: Scalar> {
    fn id(&self) -> FitModel;
    fn param_names(&self) -> &'static [&'static str];
    fn eval(&self, x: T, p: &[T]) -> T;
    /// Writes ∂f/∂p_j into `out`.
    fn jacobian_row(&self, x: T, p: &[T], out: &mut [T]);
}

/// f = A·exp(−4 ln2 (x−c)²/F²) + o, params [amplitude, center, fwhm, offset].
pub struct GaussianPeak;

impl<T: Scalar> Model<T> for GaussianPeak {
    fn id(&self) -> FitModel {
        FitModel::Gaussian
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "center", "fwhm", "offset"]
    }
    fn eval(&self, x: T, p: &[T]) -> T {
        let four_ln2 = T::from_f64(4.0 * std::f64::consts::LN_2);
        let d = x - p[1];
        p[0] * (-four_ln2 * d * d / (p[2] * p[2])).exp() + p[3]
    }
    fn jacobian_row(&self, x: T, p: &[T], out: &mut [T]) {
        let four_ln2 = T::from_f64(4.0 * std::f64::consts::LN_2);
        let d = x - p[1];
        let f2 = p[2] * p[2];
        let e = (-four_ln2 * d * d / f2).exp();
        out[0] = e;
        out[1] = p[0] * e * T::from_f64(2.0) * four_ln2 * d / f2;
        out[2] = p[0] * e * T::from_f64(2.0) * four_ln2 * d * d / (f2 * p[2]);
        out[3] = T::one();
    }
}

/// f = A·(F/2)²/((x−c)² + (F/2)²) + o, params [amplitude, center, fwhm, offset].
pub struct LorentzianPeak;

impl<T: Scalar> Model<T> for LorentzianPeak {
    fn id(&self) -> FitModel {
        FitModel::Lorentzian
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "center", "fwhm", "offset"]
    }
    fn eval(&self, x: T, p: &[T]) -> T {
        let half = p[2] / T::from_f64(2.0);
        let q = half * half;
        let d = x - p[1];
        p[0] * q / (d * d + q) + p[3]
    }
    fn jacobian_row(&self, x: T, p: &[T], out: &mut [T]) {
        let half = p[2] / T::from_f64(2.0);
        let q = half * half;
        let d = x - p[1];
        let den = d * d + q;
        out[0] = q / den;
        out[1] = p[0] * q * T::from_f64(2.0) * d / (den * den);
        out[2] = p[0] * half * d * d / (den * den);
        out[3] = T::one();
    }
}

/// f = A·e^(−t/τ), params [amplitude, tau].
pub struct ExponentialDecay;

impl<T: Scalar> Model<T> for ExponentialDecay {
    fn id(&self) -> FitModel {
        FitModel::Exponential
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "tau"]
    }
    fn eval(&self, x: T, p: &[T]) -> T {
        p[0] * (-x / p[1]).exp()
    }
    fn jacobian_row(&self, x: T, p: &[T], out: &mut [T]) {
        let e = (-x / p[1]).exp();
        out[0] = e;
        out[1] = p[0] * e * x / (p[1] * p[1]);
    }
}

/// f = 1 + A·e^(−τ/τ_d), params [amplitude, tau].
pub struct ExpBunching;

impl<T: Scalar> Model<T> for ExpBunching {
    fn id(&self) -> FitModel {
        FitModel::ExpBunching
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "tau"]
    }
    fn eval(&self, x: T, p: &[T]) -> T {
        T::one() + p[0] * (-x / p[1]).exp()
    }
    fn jacobian_row(&self, x: T, p: &[T], out: &mut [T]) {
        let e = (-x / p[1]).exp();
        out[0] = e;
        out[1] = p[0] * e * x / (p[1] * p[1]);
    }
}

/// f = offset + slope·N + (amp/2)·(1 − e^(−N/N_damp)·cos(π·sqrt(N/N_π))),
/// params [amplitude, n_pi, n_damp, slope, offset].
pub struct RabiDamped;

impl<T: Scalar> Model<T> for RabiDamped {
    fn id(&self) -> FitModel {
        FitModel::RabiDamped
    }
    fn param_names(&self) -> &'static [&'static str] {
        &["amplitude", "n_pi", "n_damp", "slope", "offset"]
    }
    fn eval(&self, x: T, p: &[T]) -> T {
        let theta = T::PI() * (x / p[1]).max(T::zero()).sqrt();
        let env = (-x / p[2]).exp();
        p[4] + p[3] * x + p[0] / T::from_f64(2.0) * (T::one() - env * theta.cos())
    }
    fn jacobian_row(&self, x: T, p: &[T], out: &mut [T]) {
        let two = T::from_f64(2.0);
        let ratio = (x / p[1]).max(T::zero());
        let theta = T::PI() * ratio.sqrt();
        let env = (-x / p[2]).exp();
        let c = theta.cos();
        let s = theta.sin();
        out[0] = (T::one() - env * c) / two;
        // dθ/dN_π = −θ/(2 N_π)
        out[1] = -(p[0] / two) * env * s * theta / (two * p[1]);
        out[2] = -(p[0] / two) * c * env * x / (p[2] * p[2]);
        out[3] = x;
        out[4] = T::one();
    }
}

/// Solve the symmetric system a·x = b in place (Gaussian elimination with
/// partial pivoting); `a` is n×n row-major.
fn solve_linear<T: Scalar>(a: &mut [T], b: &mut [T], n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < T::from_f64(1e-300) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = a[col * n + col].recip();
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            let bc = b[col];
            b[row] -= factor * bc;
        }
    }
    let mut x = vec![T::zero(); n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= a[col * n + k] * x[k];
        }
        x[col] = sum / a[col * n + col];
    }
    Some(x)
}

/// Invert a symmetric positive matrix via per-column solves.
fn invert<T: Scalar>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut inv = vec![T::zero(); n * n];
    for col in 0..n {
        let mut m = a.to_vec();
        let mut rhs = vec![T::zero(); n];
        rhs[col] = T::one();
        let x = solve_linear(&mut m, &mut rhs, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Some(inv)
}

/// Weighted Levenberg-Marquardt.
///
/// `sigmas`, when given, supplies per-point standard deviations; parameter
/// errors then come straight from the covariance. Unweighted fits scale the
/// covariance by the residual variance.
pub fn levenberg_marquardt<T: Scalar, M: Model<T>>(
    model: &M,
    xs: &[T],
    ys: &[T],
    sigmas: Option<&[T]>,
    initial: &[T],
) -> Result<FitResult<T>, FitError> {
    let n = xs.len();
    let np = model.param_names().len();
    assert_eq!(initial.len(), np);
    if n < np {
        return Err(FitError::InvalidInput(format!(
            "{} fit needs at least {np} points, got {n}",
            model.id().name()
        )));
    }
    let weights: Vec<T> = match sigmas {
        Some(s) => s
            .iter()
            .map(|&sig| {
                if sig > T::zero() {
                    (sig * sig).recip()
                } else {
                    T::one()
                }
            })
            .collect(),
        None => vec![T::one(); n],
    };

    let chi2_of = |p: &[T]| -> T {
        xs.iter()
            .zip(ys)
            .zip(&weights)
            .map(|((&x, &y), &w)| {
                let r = y - model.eval(x, p);
                w * r * r
            })
            .sum()
    };

    let mut params = initial.to_vec();
    let mut chi2 = chi2_of(&params);
    let mut lambda = T::from_f64(1e-3);
    let mut row = vec![T::zero(); np];
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        // assemble JᵀWJ and JᵀWr
        let mut jtj = vec![T::zero(); np * np];
        let mut jtr = vec![T::zero(); np];
        for ((&x, &y), &w) in xs.iter().zip(ys).zip(&weights) {
            model.jacobian_row(x, &params, &mut row);
            let r = y - model.eval(x, &params);
            for j in 0..np {
                jtr[j] += w * row[j] * r;
                for k in j..np {
                    jtj[j * np + k] += w * row[j] * row[k];
                }
            }
        }
        for j in 0..np {
            for k in 0..j {
                jtj[j * np + k] = jtj[k * np + j];
            }
        }

        let mut improved = false;
        for _ in 0..16 {
            let mut damped = jtj.clone();
            for j in 0..np {
                damped[j * np + j] *= T::one() + lambda;
            }
            let mut rhs = jtr.clone();
            let step = match solve_linear(&mut damped, &mut rhs, np) {
                Some(s) => s,
                None => {
                    lambda *= T::from_f64(8.0);
                    continue;
                }
            };
            let trial: Vec<T> = params.iter().zip(&step).map(|(&p, &d)| p + d).collect();
            let trial_chi2 = chi2_of(&trial);
            if trial_chi2.is_finite() && trial_chi2 <= chi2 {
                let rel = ((chi2 - trial_chi2) / chi2.max(T::from_f64(1e-300))).into_f64();
                params = trial;
                chi2 = trial_chi2;
                lambda = (lambda * T::from_f64(0.3)).max(T::from_f64(1e-12));
                improved = true;
                if rel < RELATIVE_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= T::from_f64(8.0);
        }
        if converged {
            break;
        }
        if !improved {
            // cannot improve further: treat as converged at this minimum
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(FitError::NonConvergence {
            model: model.id().name().to_string(),
            iterations: MAX_ITERATIONS,
            initial: initial.iter().map(|p| p.into_f64()).collect(),
            chi2: chi2.into_f64(),
        });
    }

    // covariance at the optimum
    let mut jtj = vec![T::zero(); np * np];
    for (&x, &w) in xs.iter().zip(&weights) {
        model.jacobian_row(x, &params, &mut row);
        for j in 0..np {
            for k in j..np {
                jtj[j * np + k] += w * row[j] * row[k];
            }
        }
    }
    for j in 0..np {
        for k in 0..j {
            jtj[j * np + k] = jtj[k * np + j];
        }
    }
    let dof = (n - np).max(1);
    let reduced = chi2 / T::from_f64(dof as f64);
    let scale = if sigmas.is_some() { T::one() } else { reduced };
    let cov = invert(&jtj, np);
    let mut result = BTreeMap::new();
    for (j, &name) in model.param_names().iter().enumerate() {
        let var = cov
            .as_ref()
            .map(|c| c[j * np + j] * scale)
            .unwrap_or(T::infinity());
        result.insert(
            name.to_string(),
            ParamEstimate {
                value: params[j],
                std_error: var.max(T::zero()).sqrt(),
            },
        );
    }
    Ok(FitResult {
        model: model.id(),
        params: result,
        goodness: reduced,
    })
}

/// Peak-line fit (gaussian or lorentzian) with moment-based initialization
/// and a fit window restricted to the global maximum (tie-break for
/// multi-peak inputs).
pub fn fit_line<T: Scalar>(
    scan: &[(T, T, T)], // (detuning, signal, error); error 0 → unweighted point
    model: FitModel,
) -> Result<FitResult<T>, FitError> {
    if scan.len() < 5 {
        return Err(FitError::InvalidInput(format!(
            "line fit needs >= 5 points spanning the peak, got {}",
            scan.len()
        )));
    }
    let mut pts = scan.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = pts.len();

    // baseline: mean of the lowest quartile
    let mut ys: Vec<T> = pts.iter().map(|p| p.1).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = (n / 4).max(1);
    let baseline = ys[..q].iter().cloned().sum::<T>() / T::from_f64(q as f64);
    let y_max = ys[n - 1];
    if !(y_max > baseline) || (y_max - baseline).into_f64() == 0.0 {
        return Err(FitError::Degenerate {
            model: model.name().to_string(),
            reason: "flat data: no peak above baseline".to_string(),
        });
    }

    let i_max = pts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
        .unwrap()
        .0;
    let x_ref = pts[i_max].0;
    let half_height = baseline + (y_max - baseline) / T::from_f64(2.0);

    // half crossings around the global maximum
    let mut left = pts[0].0;
    for i in (0..i_max).rev() {
        if pts[i].1 < half_height {
            left = pts[i].0;
            break;
        }
    }
    let mut right = pts[n - 1].0;
    for item in pts.iter().skip(i_max + 1) {
        if item.1 < half_height {
            right = item.0;
            break;
        }
    }
    let mut fwhm_est = right - left;
    if !(fwhm_est > T::zero()) {
        fwhm_est = (pts[n - 1].0 - pts[0].0) / T::from_f64(4.0);
    }

    // restrict to the window around the global maximum
    let window = fwhm_est * T::from_f64(3.0);
    let mut sel: Vec<(T, T, T)> = pts
        .iter()
        .filter(|p| (p.0 - x_ref).abs() <= window)
        .cloned()
        .collect();
    if sel.len() < 5 {
        sel = pts.clone();
    }

    // center the abscissa for conditioning (and exact shift equivariance)
    let xs: Vec<T> = sel.iter().map(|p| p.0 - x_ref).collect();
    let sig: Vec<T> = sel.iter().map(|p| p.1).collect();
    let errs: Vec<T> = sel.iter().map(|p| p.2).collect();
    let weighted = errs.iter().any(|&e| e > T::zero());

    // weighted-moment refinement of the center start value
    let mut wsum = T::zero();
    let mut xsum = T::zero();
    for (x, y) in xs.iter().zip(&sig) {
        let w = (*y - baseline).max(T::zero());
        wsum += w;
        xsum += w * *x;
    }
    let c0 = if wsum > T::zero() { xsum / wsum } else { T::zero() };
    let init = [y_max - baseline, c0, fwhm_est, baseline];

    let result = match model {
        FitModel::Gaussian => {
            levenberg_marquardt(&GaussianPeak, &xs, &sig, weighted.then_some(&errs[..]), &init)
        }
        FitModel::Lorentzian => levenberg_marquardt(
            &LorentzianPeak,
            &xs,
            &sig,
            weighted.then_some(&errs[..]),
            &init,
        ),
        other => Err(FitError::InvalidInput(format!(
            "fit_line supports gaussian/lorentzian, not {}",
            other.name()
        ))),
    }?;

    // un-center
    let mut result = result;
    if let Some(c) = result.params.get_mut("center") {
        c.value += x_ref;
    }
    if let Some(f) = result.params.get_mut("fwhm") {
        f.value = f.value.abs();
    }
    Ok(result)
}

/// Exponential-decay fit with log-linear initialization.
pub fn fit_exponential_decay<T: Scalar>(points: &[(T, T)]) -> Result<FitResult<T>, FitError> {
    if points.len() < 4 {
        return Err(FitError::InvalidInput(format!(
            "exponential fit needs >= 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(_, y)| y <= T::zero()) {
        return Err(FitError::InvalidInput(
            "exponential fit requires positive ordinates".to_string(),
        ));
    }
    // log-linear regression: ln y = ln A − t/τ
    let n = T::from_f64(points.len() as f64);
    let sx: T = points.iter().map(|&(t, _)| t).sum();
    let sy: T = points.iter().map(|&(_, y)| y.ln()).sum();
    let sxx: T = points.iter().map(|&(t, _)| t * t).sum();
    let sxy: T = points.iter().map(|&(t, y)| t * y.ln()).sum();
    let denom = n * sxx - sx * sx;
    if denom.into_f64() == 0.0 {
        return Err(FitError::Degenerate {
            model: "exponential".to_string(),
            reason: "all abscissas equal".to_string(),
        });
    }
    let slope = (n * sxy - sx * sy) / denom;
    let t_span = points
        .iter()
        .map(|&(t, _)| t)
        .fold(T::neg_infinity(), T::max)
        - points.iter().map(|&(t, _)| t).fold(T::infinity(), T::min);
    if slope >= -T::from_f64(1e-3) / t_span.max(T::from_f64(1e-300)) {
        return Err(FitError::NonIdentifiable {
            model: "exponential".to_string(),
            reason: "no measurable decay over the scan (τ → ∞)".to_string(),
        });
    }
    let tau0 = -slope.recip();
    let a0 = ((sy - slope * sx) / n).exp();
    let xs: Vec<T> = points.iter().map(|&(t, _)| t).collect();
    let ys: Vec<T> = points.iter().map(|&(_, y)| y).collect();
    levenberg_marquardt(&ExponentialDecay, &xs, &ys, None, &[a0, tau0])
}
