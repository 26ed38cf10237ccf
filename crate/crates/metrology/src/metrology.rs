//! Fisher-information quantities, damping rates, precision curves, and the
//! damped-cosine theta estimator.

use crate::channel::{SimulationConfig, Trajectory};
use crate::error::{Error, Result};
use crate::gf2::{binomial, robustness, BinaryCode};
use crate::linalg::{self, CMat};
use crate::qop::DensityMatrix;
use serde::{Deserialize, Serialize};

/// Default eigenvalue cutoff for the QFI sum: eigen-pairs with
/// lambda_k + lambda_l below this are dropped, since the QFI expression is
/// singular on the kernel of rho.
pub const QFI_EIGEN_CUTOFF: f64 = 1e-12;

/// Default finite-difference step for CFI as a fraction of theta.
pub const CFI_STEP_FRACTION: f64 = 0.01;

/// A probability this close to 0 or 1 makes the Fisher information
/// ill-conditioned; such samples are flagged unreliable.
pub const RELIABLE_MARGIN: f64 = 1e-4;

/// Parameters of the damped-cosine signal model
/// A e^{-gamma t} cos(sqrt(q_pure) theta t) + B.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GammaParams {
    pub gamma: f64,
    pub q_pure: f64,
    pub amplitude: f64,
    pub offset: f64,
}

impl GammaParams {
    pub fn new(gamma: f64, q_pure: f64) -> Result<Self> {
        if gamma < 0.0 || q_pure < 0.0 {
            return Err(Error::Domain(format!(
                "gamma = {gamma} and q_pure = {q_pure} must be nonnegative"
            )));
        }
        Ok(Self {
            gamma,
            q_pure,
            amplitude: 0.5,
            offset: 0.5,
        })
    }
}

/// Quantum Fisher information of `rho` with derivative `drho`, from the
/// spectral sum 2 sum_{kl} |<k|drho|l>|^2 / (lambda_k + lambda_l) over
/// eigen-pairs above `cutoff`.
pub fn qfi(rho: &DensityMatrix, drho: &CMat, cutoff: f64) -> Result<f64> {
    if drho.nrows() != rho.dim() || drho.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "drho is {}x{} but rho has dimension {}",
            drho.nrows(),
            drho.ncols(),
            rho.dim()
        )));
    }
    if linalg::hermiticity_defect(drho) > 1e-8 {
        return Err(Error::NonHermitian("drho".into()));
    }
    if linalg::trace(drho).norm() > 1e-8 {
        return Err(Error::Domain(
            "drho must be traceless (derivative of a trace-one family)".into(),
        ));
    }
    if cutoff < 0.0 {
        return Err(Error::Domain("negative QFI cutoff".into()));
    }
    let (eigenvalues, vectors) = linalg::hermitian_eigen(&rho.mat);
    let dim = rho.dim();
    // M_kl = <k| drho |l> in the eigenbasis.
    let m = vectors.t().mapv(|z| z.conj()).dot(drho).dot(&vectors);
    let mut total = 0.0;
    for k in 0..dim {
        for l in 0..dim {
            let denom = eigenvalues[k] + eigenvalues[l];
            if denom > 0.0 && denom >= cutoff {
                total += 2.0 * m[(k, l)].norm_sqr() / denom;
            }
        }
    }
    Ok(total)
}

/// The generator-variance upper bound on the QFI:
/// 4 Tr(rho H^2) - 4 (Tr(rho H))^2. Tight for pure states.
pub fn variance_bound(rho: &DensityMatrix, h: &CMat) -> Result<f64> {
    if h.nrows() != rho.dim() || h.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "h is {}x{} but rho has dimension {}",
            h.nrows(),
            h.ncols(),
            rho.dim()
        )));
    }
    if linalg::hermiticity_defect(h) > 1e-10 {
        return Err(Error::NonHermitian("h".into()));
    }
    let mean = linalg::trace(&rho.mat.dot(h)).re;
    let mean_sq = linalg::trace(&rho.mat.dot(h).dot(h)).re;
    Ok(4.0 * (mean_sq - mean * mean))
}

/// QFI of the pure probe state of a nontrivial code:
/// 4 (2 W_{dual,2} + N).
pub fn q_pure(code: &BinaryCode) -> Result<f64> {
    if code.is_degenerate() {
        return Err(Error::Domain(
            "trivial code: dual contains weight-1 codewords, Q_pure does not apply".into(),
        ));
    }
    let dual_weights = code.dual().weight_enumerator();
    Ok(4.0 * (2.0 * dual_weights.coefficient(2) as f64 + code.len() as f64))
}

/// Rescaled dephasing damping rate 2 [1 - ((1-pt)^N + W~_dual)].
pub fn gamma_dephasing(code: &BinaryCode, p: f64, theta: f64) -> Result<f64> {
    let pt = crate::gf2::check_noise_product(p, theta)?;
    let w_tilde = robustness(&code.dual().weight_enumerator(), p, theta, code.len())?;
    let n = code.len() as i32;
    Ok(2.0 * (1.0 - ((1.0 - pt).powi(n) + w_tilde)))
}

fn check_phi(phi: f64) -> Result<(f64, f64)> {
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::Domain(format!("phi = {phi} outside [0, pi]")));
    }
    let (s, c) = (phi / 2.0).sin_cos();
    Ok((c * c, s * s))
}

/// Damping rate of the interpolating channel at mixing angle phi:
/// (1-(1-pt)^N)(1 - (sin^2 - cos^2)(phi/2)) - 2 cos^2(phi/2) W~_dual.
pub fn gamma_mixed(code: &BinaryCode, p: f64, theta: f64, phi: f64) -> Result<f64> {
    let pt = crate::gf2::check_noise_product(p, theta)?;
    let (c2, s2) = check_phi(phi)?;
    let w_tilde = robustness(&code.dual().weight_enumerator(), p, theta, code.len())?;
    let leak = 1.0 - (1.0 - pt).powi(code.len() as i32);
    Ok(leak - leak * (s2 - c2) - 2.0 * c2 * w_tilde)
}

/// Exact damping rate of the coherent U(phi) channel, as a double sum over
/// error weight k and its X-type part l, with the dual-enumerator term W~'.
pub fn gamma_exact_mixed(code: &BinaryCode, p: f64, theta: f64, phi: f64) -> Result<f64> {
    let pt = crate::gf2::check_noise_product(p, theta)?;
    let (c2, s2) = check_phi(phi)?;
    let n = code.len();
    let dual_weights = code.dual().weight_enumerator();
    let mut cross = 0.0;
    let mut w_tilde_prime = 0.0;
    for k in 1..=n {
        let qk = (1.0 - pt).powi((n - k) as i32) * pt.powi(k as i32);
        for l in 0..=k {
            if k - l > n {
                continue;
            }
            let angular = c2.powi((k - l) as i32) * s2.powi(l as i32) * binomial(n, l) as f64;
            cross += qk * angular * binomial(n, k - l) as f64;
            w_tilde_prime += qk * angular * dual_weights.coefficient(k - l) as f64;
        }
    }
    Ok(1.0 - (1.0 - pt).powi(n as i32) + cross - 2.0 * w_tilde_prime)
}

/// The damped-cosine signal model evaluated at time t.
pub fn analytic_probability(t: f64, theta: f64, params: &GammaParams) -> f64 {
    params.amplitude * (-params.gamma * t).exp() * (params.q_pure.sqrt() * theta * t).cos()
        + params.offset
}

/// Classical Fisher information of a binary outcome, with its reliability.
#[derive(Clone, Copy, Debug)]
pub struct CfiSample {
    pub fisher: f64,
    /// False when the outcome probability is within [`RELIABLE_MARGIN`] of
    /// deterministic, where the finite-difference CFI is ill-conditioned.
    pub reliable: bool,
}

/// CFI of a one-bit measurement, F = (dp/dtheta)^2 / (p (1-p)), with the
/// derivative taken by central differences of `p_of_theta`.
pub fn cfi<P>(p_of_theta: P, theta: f64, delta: f64) -> Result<CfiSample>
where
    P: Fn(f64) -> Result<f64>,
{
    if delta <= 0.0 {
        return Err(Error::Domain("finite-difference step must be positive".into()));
    }
    let p_plus = p_of_theta(theta + delta)?;
    let p_minus = p_of_theta(theta - delta)?;
    let p = 0.5 * (p_plus + p_minus);
    let reliable = p.min(1.0 - p) >= RELIABLE_MARGIN;
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    let slope = (p_plus - p_minus) / (2.0 * delta);
    Ok(CfiSample {
        fisher: slope * slope / (p * (1.0 - p)),
        reliable,
    })
}

/// Closed-form inverse CFI of the damped-cosine model with A=B=1/2:
/// (e^{2 gamma t} - cos^2(w t)) / (t (sqrt(Q) sin(w t) + gamma' cos(w t)))^2
/// with w = sqrt(Q) theta and gamma' = dgamma/dtheta.
pub fn inverse_cfi_closed_form(
    t: f64,
    theta: f64,
    q_pure: f64,
    gamma: f64,
    dgamma_dtheta: f64,
) -> f64 {
    let omega = q_pure.sqrt() * theta;
    let (s, c) = (omega * t).sin_cos();
    let numer = (2.0 * gamma * t).exp() - c * c;
    let denom = t * (q_pure.sqrt() * s + dgamma_dtheta * c);
    numer / (denom * denom)
}

/// delta-theta lower bound as a function of time for one channel and probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrecisionCurve {
    pub times: Vec<f64>,
    pub delta_theta: Vec<f64>,
    pub reliable: Vec<bool>,
    pub label: String,
}

impl PrecisionCurve {
    /// CSV with header `t,delta_theta,reliable`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,delta_theta,reliable\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{}\n",
                self.times[i], self.delta_theta[i], self.reliable[i]
            ));
        }
        out
    }
}

/// Cramer-Rao precision curve: evolve at theta +/- delta (concurrently),
/// turn the sampled probabilities into a CFI per time, report
/// delta_theta(t) = 1 / sqrt(F(t)).
pub fn cramer_rao_curve(config: &SimulationConfig, delta: f64) -> Result<PrecisionCurve> {
    if delta <= 0.0 || delta >= config.channel.theta {
        return Err(Error::Domain(format!(
            "finite-difference step {delta} must be in (0, theta)"
        )));
    }
    let cfg_plus = config.with_theta(config.channel.theta + delta)?;
    let cfg_minus = config.with_theta(config.channel.theta - delta)?;
    let (traj_plus, traj_minus) = std::thread::scope(|scope| {
        let plus = scope.spawn(|| crate::channel::evolve(&cfg_plus));
        let minus = crate::channel::evolve(&cfg_minus);
        (plus.join().expect("evolve thread panicked"), minus)
    });
    let traj_plus = traj_plus?;
    let traj_minus = traj_minus?;

    let mut delta_theta = Vec::with_capacity(traj_plus.times.len());
    let mut reliable = Vec::with_capacity(traj_plus.times.len());
    for i in 0..traj_plus.times.len() {
        let p_plus = traj_plus.probabilities[i];
        let p_minus = traj_minus.probabilities[i];
        let p = (0.5 * (p_plus + p_minus)).clamp(1e-12, 1.0 - 1e-12);
        let slope = (p_plus - p_minus) / (2.0 * delta);
        let fisher = (slope * slope / (p * (1.0 - p))).max(f64::MIN_POSITIVE);
        delta_theta.push(1.0 / fisher.sqrt());
        reliable.push(p.min(1.0 - p) >= RELIABLE_MARGIN && fisher > 1e-30);
    }
    Ok(PrecisionCurve {
        times: traj_plus.times,
        delta_theta,
        reliable,
        label: format!("{}-{}q", config.channel.kind.name(), config.code.len()),
    })
}

/// Result of fitting the damped-cosine model to a trajectory.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThetaEstimate {
    pub theta_hat: f64,
    pub gamma_hat: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual: f64,
}

/// Fit A e^{-gamma t} cos(sqrt(q_pure) theta t) + B to a trajectory over
/// (theta, gamma), A = B = 1/2 fixed, initialized from a dense frequency
/// scan of the centered signal.
pub fn estimate_theta(trajectory: &Trajectory, q_pure: f64) -> Result<ThetaEstimate> {
    estimate_theta_with_options(trajectory, q_pure, false)
}

/// As [`estimate_theta`] but optionally freeing the amplitude A and offset B.
pub fn estimate_theta_with_options(
    trajectory: &Trajectory,
    q_pure: f64,
    free_amplitude: bool,
) -> Result<ThetaEstimate> {
    let times = &trajectory.times;
    let probs = &trajectory.probabilities;
    let n_params = if free_amplitude { 4 } else { 2 };
    if times.len() < n_params {
        return Err(Error::EstimationFailed(format!(
            "{} samples cannot constrain {} parameters",
            times.len(),
            n_params
        )));
    }
    if q_pure <= 0.0 {
        return Err(Error::Domain("q_pure must be positive".into()));
    }
    let omega0 = scan_frequency(times, probs)?;
    fit_damped_cosine(trajectory, q_pure, omega0 / q_pure.sqrt(), 1e-6, free_amplitude)
}

/// Levenberg-Marquardt fit of the damped-cosine model from an explicit
/// starting point, for callers that already know the frequency ballpark.
pub fn fit_damped_cosine(
    trajectory: &Trajectory,
    q_pure: f64,
    theta_init: f64,
    gamma_init: f64,
    free_amplitude: bool,
) -> Result<ThetaEstimate> {
    let times = &trajectory.times;
    let probs = &trajectory.probabilities;
    let n_params = if free_amplitude { 4 } else { 2 };
    if times.len() < n_params {
        return Err(Error::EstimationFailed(format!(
            "{} samples cannot constrain {} parameters",
            times.len(),
            n_params
        )));
    }
    let root_q = q_pure.sqrt();

    // Parameter vector: [theta, gamma] or [theta, gamma, A, B].
    let mut params = vec![theta_init, gamma_init, 0.5, 0.5];
    let model = |params: &[f64], t: f64| -> f64 {
        params[2] * (-params[1] * t).exp() * (root_q * params[0] * t).cos() + params[3]
    };
    let jacobian_row = |params: &[f64], t: f64| -> [f64; 4] {
        let decay = (-params[1] * t).exp();
        let phase = root_q * params[0] * t;
        let (s, c) = phase.sin_cos();
        [
            -params[2] * decay * s * root_q * t,
            -params[2] * t * decay * c,
            decay * c,
            1.0,
        ]
    };

    let mut lambda = 1e-3;
    let mut chi2 = chi_squared(&params, times, probs, model);
    for _ in 0..200 {
        // Build normal equations J^T J + lambda diag and J^T r.
        let mut jtj = [[0.0f64; 4]; 4];
        let mut jtr = [0.0f64; 4];
        for (&t, &p) in times.iter().zip(probs) {
            let row = jacobian_row(&params, t);
            let r = p - model(&params, t);
            for a in 0..n_params {
                jtr[a] += row[a] * r;
                for b in 0..n_params {
                    jtj[a][b] += row[a] * row[b];
                }
            }
        }
        let mut damped = jtj;
        for a in 0..n_params {
            damped[a][a] *= 1.0 + lambda;
        }
        let Some(step) = solve_small(&mut damped, &jtr, n_params) else {
            lambda *= 10.0;
            if lambda > 1e12 {
                return Err(Error::EstimationFailed(
                    "normal equations are singular".into(),
                ));
            }
            continue;
        };
        let mut trial = params.clone();
        for a in 0..n_params {
            trial[a] += step[a];
        }
        trial[0] = trial[0].abs();
        let trial_chi2 = chi_squared(&trial, times, probs, model);
        if trial_chi2 < chi2 {
            let gain = (chi2 - trial_chi2) / chi2.max(1e-300);
            params = trial;
            chi2 = trial_chi2;
            lambda = (lambda * 0.3).max(1e-12);
            if gain < 1e-14 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    if !chi2.is_finite() {
        return Err(Error::EstimationFailed("fit diverged".into()));
    }
    Ok(ThetaEstimate {
        theta_hat: params[0],
        gamma_hat: params[1],
        amplitude: params[2],
        offset: params[3],
        residual: (chi2 / times.len() as f64).sqrt(),
    })
}

fn chi_squared<M>(params: &[f64], times: &[f64], probs: &[f64], model: M) -> f64
where
    M: Fn(&[f64], f64) -> f64,
{
    times
        .iter()
        .zip(probs)
        .map(|(&t, &p)| {
            let r = p - model(params, t);
            r * r
        })
        .sum()
}

/// Dense scan of the discrete-time Fourier transform of the centered signal
/// for its peak frequency.
fn scan_frequency(times: &[f64], probs: &[f64]) -> Result<f64> {
    let mean = probs.iter().sum::<f64>() / probs.len() as f64;
    let signal: Vec<f64> = probs.iter().map(|p| p - mean).collect();
    let amplitude = signal.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if amplitude < 1e-9 {
        return Err(Error::EstimationFailed(
            "trajectory has no oscillation to estimate from".into(),
        ));
    }
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    if span <= 0.0 || dt <= 0.0 {
        return Err(Error::EstimationFailed("degenerate time grid".into()));
    }
    let omega_max = std::f64::consts::PI / dt;
    let omega_min = std::f64::consts::PI / (4.0 * span);
    let steps = 4000usize;
    let mut best = (0.0f64, omega_min);
    for i in 0..=steps {
        let omega = omega_min + (omega_max - omega_min) * i as f64 / steps as f64;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (&t, &s) in times.iter().zip(&signal) {
            let (sn, cs) = (omega * t).sin_cos();
            re += s * cs;
            im -= s * sn;
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, omega);
        }
    }
    let noise_floor = signal.iter().map(|s| s * s).sum::<f64>() * 1e-6;
    if best.0 <= noise_floor {
        return Err(Error::EstimationFailed(
            "no spectral peak above the noise floor".into(),
        ));
    }
    Ok(best.1)
}

/// Gaussian elimination with partial pivoting on an n x n system, n <= 4.
fn solve_small(a: &mut [[f64; 4]; 4], b: &[f64; 4], n: usize) -> Option<[f64; 4]> {
    let mut x = *b;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        for k in col + 1..n {
            x[col] -= a[col][k] * x[k];
        }
        x[col] /= a[col][col];
    }
    Some(x)
}


pub(crate) fn solve_quadratic_system(a: &mut [[f64; 4]; 4], b: &[f64; 4]) -> Option<[f64; 3]> {
    solve_small(a, b, 3).map(|x| [x[0], x[1], x[2]])
}
