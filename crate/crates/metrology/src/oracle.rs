//! Brute-force verifiers for the closed-form claims: each check recomputes a
//! quantity by explicit matrix work and compares it with the enumerator
//! formula, sharing no code path with the implementation it certifies.

use crate::channel::{self, ChannelKind, ChannelSpec, SimulationConfig};
use crate::error::{Error, Result};
use crate::gf2::BinaryCode;
use crate::linalg;
use crate::metrology;
use crate::qop;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest instance the full-matrix verifiers accept for the toy-variance
/// and expansion checks.
pub const ORACLE_QUBIT_CAP: usize = 7;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub claim_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    /// False when the claim's preconditions are not met (e.g. a trivial
    /// code); both sides are still reported but the comparison carries no
    /// weight and does not fail the report.
    pub applicable: bool,
    pub passed: bool,
}

impl OracleReport {
    fn new(claim_id: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let abs_error = (lhs - rhs).abs();
        Self {
            claim_id: claim_id.into(),
            lhs,
            rhs,
            abs_error,
            tolerance,
            applicable: true,
            passed: abs_error <= tolerance,
        }
    }

    fn inapplicable(mut self) -> Self {
        self.applicable = false;
        self.passed = true;
        self
    }
}

fn check_oracle_size(code: &BinaryCode, cap: usize) -> Result<()> {
    if code.len() > cap {
        return Err(Error::SizeCap { n: code.len(), cap });
    }
    Ok(())
}

/// Check that the generator variance of the probe after a fixed-weight-w
/// Z-error channel still equals 4 (2 W_{dual,2} + N), by explicit matrix
/// traces on one side and the dual enumerator on the other.
pub fn verify_toy_variance(code: &BinaryCode, w: usize) -> Result<OracleReport> {
    check_oracle_size(code, 6)?;
    let rho = qop::probe_state(code)?;
    let noisy = channel::fixed_weight_z_map(&rho, w)?;
    let h = qop::hamiltonian(code.len())?;
    let lhs = metrology::variance_bound(&noisy, &h)?;
    let w2 = code.dual().weight_enumerator().coefficient(2) as f64;
    let rhs = 4.0 * (2.0 * w2 + code.len() as f64);
    let report = OracleReport::new(
        format!("toy-variance/n{}w{}", code.len(), w),
        lhs,
        rhs,
        1e-9,
    );
    // A trivial code leaves <H> nonzero, so the identity is not claimed.
    Ok(if code.is_degenerate() {
        report.inapplicable()
    } else {
        report
    })
}

/// Check that the first-order signal term Tr(-i [H, rho] Pi) vanishes, which
/// is what forces the quadratic short-time expansion.
pub fn verify_first_order_vanishing(code: &BinaryCode) -> Result<OracleReport> {
    check_oracle_size(code, ORACLE_QUBIT_CAP)?;
    let rho = qop::probe_state(code)?;
    let h = qop::hamiltonian(code.len())?;
    let projector = qop::stabilizer_projector(code)?;
    let comm = linalg::commutator(&h, &rho.mat).mapv(|z| z * Complex64::new(0.0, -1.0));
    let lhs = linalg::trace(&comm.dot(&projector)).norm();
    Ok(OracleReport::new(
        format!("first-order-vanishing/n{}", code.len()),
        lhs,
        0.0,
        1e-10,
    ))
}

/// Fit the short-time signal s(dt) = 2 Tr(rho(dt) Pi) - 1 to a quadratic in
/// dt and compare its coefficients with the damped-cosine Taylor expansion
/// 1 - gamma dt + (gamma^2 - theta^2 Q) dt^2 / 2.
///
/// Three reports: the linear coefficient against -gamma, the quadratic
/// coefficient against the Taylor value, and (marked inapplicable, for the
/// record) the quadratic coefficient against the alternative reading
/// -theta Q + gamma^2 / 2, which is dimensionally inconsistent with the
/// model and not expected to match.
pub fn verify_second_order_expansion(
    code: &BinaryCode,
    p: f64,
    theta: f64,
) -> Result<Vec<OracleReport>> {
    check_oracle_size(code, 5)?;
    let spec = ChannelSpec::new(ChannelKind::Dephasing, p, theta)?;
    let generator = channel::Generator::new(&spec, code.len())?;
    let rho0 = qop::probe_state(code)?;
    let projector = qop::stabilizer_projector(code)?;

    // Signal samples over dt in [1e-3, 1e-2]; the grid is narrow enough
    // that the cubic remainder is far below the quadratic term.
    let dts: Vec<f64> = (1..=10).map(|i| i as f64 * 1e-3).collect();
    let mut signals = Vec::with_capacity(dts.len());
    for &dt in &dts {
        let rho = integrate_fixed(&generator, &rho0, dt, 8);
        let p_plus = qop::measure_plus_probability(&rho, &projector)?;
        signals.push(2.0 * p_plus - 1.0);
    }
    let coeffs = polyfit_quadratic(&dts, &signals)?;

    let gamma = metrology::gamma_dephasing(code, p, theta)?;
    let q_pure_val = 4.0 * (2.0 * code.dual().weight_enumerator().coefficient(2) as f64
        + code.len() as f64);
    let tag = format!("n{}p{}t{}", code.len(), p, theta);
    let rel = |rhs: f64| 1e-6 * rhs.abs().max(1e-3);
    let linear = OracleReport::new(
        format!("second-order/linear/{tag}"),
        coeffs[1],
        -gamma,
        rel(gamma),
    );
    let taylor = 0.5 * (gamma * gamma - theta * theta * q_pure_val);
    let quadratic = OracleReport::new(
        format!("second-order/quadratic/{tag}"),
        coeffs[2],
        taylor,
        1e-6 * taylor.abs().max(1e-3),
    );
    let alt = -theta * q_pure_val + 0.5 * gamma * gamma;
    let alt_reading = OracleReport::new(
        format!("second-order/quadratic-alt-reading/{tag}"),
        coeffs[2],
        alt,
        1e-6 * alt.abs().max(1e-3),
    )
    .inapplicable();
    Ok(vec![linear, quadratic, alt_reading])
}

/// Evolve under the bit-flip channel over a short window and fit a damped
/// cosine with the true theta as the starting point: the fitted damping must
/// be negligible.
pub fn verify_bitflip_undamped(code: &BinaryCode, p: f64, theta: f64) -> Result<OracleReport> {
    check_oracle_size(code, ORACLE_QUBIT_CAP)?;
    let config = SimulationConfig {
        code: code.clone(),
        channel: ChannelSpec::new(ChannelKind::BitFlip, p, theta)?,
        t_max: 12.0,
        dt: 0.05,
        sample_every: 2,
    };
    let trajectory = channel::evolve(&config)?;
    let q_pure_val =
        4.0 * (2.0 * code.dual().weight_enumerator().coefficient(2) as f64 + code.len() as f64);
    let fit = metrology::fit_damped_cosine(&trajectory, q_pure_val, theta, 0.0, false)?;
    Ok(OracleReport::new(
        format!("bitflip-undamped/n{}", code.len()),
        fit.gamma_hat.abs(),
        0.0,
        1e-6,
    ))
}

/// The shipped fixture suite: every report in it must pass.
pub fn oracle_suite() -> Result<Vec<OracleReport>> {
    let mut reports = Vec::new();
    let (p, theta) = (0.05, 1e-3);
    for n in [2usize, 3, 4, 5] {
        let code = BinaryCode::repetition(n);
        for w in 0..=n {
            reports.push(verify_toy_variance(&code, w)?);
        }
    }
    reports.push(verify_toy_variance(&BinaryCode::trivial(3), 1)?);
    for code in [
        BinaryCode::repetition(3),
        BinaryCode::repetition(7),
        BinaryCode::steane_x(),
        BinaryCode::trivial(3),
    ] {
        reports.push(verify_first_order_vanishing(&code)?);
    }
    for n in [3usize, 5] {
        reports.extend(verify_second_order_expansion(
            &BinaryCode::repetition(n),
            p,
            theta,
        )?);
    }
    reports.extend(verify_second_order_expansion(
        &BinaryCode::repetition(3),
        p,
        0.0,
    )?);
    for code in [
        BinaryCode::repetition(3),
        BinaryCode::repetition(7),
        BinaryCode::steane_x(),
    ] {
        reports.push(verify_bitflip_undamped(&code, p, theta)?);
    }
    Ok(reports)
}

fn integrate_fixed(
    generator: &channel::Generator,
    rho0: &qop::DensityMatrix,
    t_end: f64,
    steps: usize,
) -> qop::DensityMatrix {
    let dt = t_end / steps as f64;
    let half = dt / 2.0;
    let mut rho = rho0.mat.clone();
    for _ in 0..steps {
        let k1 = generator.apply(&rho);
        let k2 = generator.apply(&(&rho + &k1.mapv(|z| z * half)));
        let k3 = generator.apply(&(&rho + &k2.mapv(|z| z * half)));
        let k4 = generator.apply(&(&rho + &k3.mapv(|z| z * dt)));
        ndarray::Zip::from(&mut rho)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|r, &a, &b, &c, &d| *r += (a + (b + c) * 2.0 + d) * (dt / 6.0));
    }
    qop::DensityMatrix {
        mat: linalg::rehermitize(&rho),
        n_qubits: rho0.n_qubits,
    }
}

/// Least-squares quadratic c0 + c1 x + c2 x^2.
fn polyfit_quadratic(xs: &[f64], ys: &[f64]) -> Result<[f64; 3]> {
    let mut ata = [[0.0f64; 4]; 4];
    let mut atb = [0.0f64; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let row = [1.0, x, x * x];
        for a in 0..3 {
            atb[a] += row[a] * y;
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    crate::metrology::solve_quadratic_system(&mut ata, &atb)
        .ok_or_else(|| Error::EstimationFailed("quadratic fit is singular".into()))
}
