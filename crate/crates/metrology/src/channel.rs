//! Lindbladian noise models and the fixed-step time integrator.
//!
//! All three time-continuous channels share the structure
//! drho/dt = -i theta [H, rho] - rho + N(rho) where the noise sum
//! N(rho) = sum_{k, |j|=k} (1-pt)^{N-k} (pt)^k K_j rho K_j factorizes
//! into a tensor product of single-qubit channels
//! (1-pt) Id + pt (K . K), which is how it is evaluated here.

use crate::error::{Error, Result};
use crate::gf2::BinaryCode;
use crate::linalg::{self, CMat};
use crate::qop::{self, DensityMatrix};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default integrator step.
pub const DEFAULT_DT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    /// Pauli-Z noise, parallel to the sensing Hamiltonian.
    Dephasing,
    /// Pauli-X noise, orthogonal to the sensing Hamiltonian.
    BitFlip,
    /// Coherent mixture: conjugation by U(phi) = cos(phi/2) Z + sin(phi/2) X.
    Mixed { phi: f64 },
    /// Convex mixture cos^2(phi/2) L(Z) + sin^2(phi/2) L(X) of the two
    /// Lindbladians, used as the lower-bounding channel.
    Mixture { phi: f64 },
    /// One-shot channel applying Z errors to exactly w qubits.
    FixedWeightZ { w: usize },
}

impl ChannelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::BitFlip => "bitflip",
            ChannelKind::Mixed { .. } => "mixed",
            ChannelKind::Mixture { .. } => "mixture",
            ChannelKind::FixedWeightZ { .. } => "fixed-weight-z",
        }
    }
}

/// Noise model plus its rate parameters. The per-qubit error probability is
/// p(theta) = p * theta, taken literally.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(flatten)]
    pub kind: ChannelKind,
    pub p: f64,
    pub theta: f64,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, p: f64, theta: f64) -> Result<Self> {
        if p < 0.0 || theta < 0.0 {
            return Err(Error::Domain(format!("negative rate: p={p}, theta={theta}")));
        }
        crate::gf2::check_noise_product(p, theta)?;
        if let ChannelKind::Mixed { phi } | ChannelKind::Mixture { phi } = kind {
            if !(0.0..=std::f64::consts::PI).contains(&phi) {
                return Err(Error::Domain(format!("phi = {phi} outside [0, pi]")));
            }
        }
        Ok(Self { kind, p, theta })
    }

    pub fn noise_product(&self) -> f64 {
        self.p * self.theta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.kind, self.p, theta)
    }
}

/// Precomputed right-hand side of the master equation for one channel and
/// qubit count.
pub struct Generator {
    n: usize,
    dim: usize,
    theta: f64,
    h: Vec<f64>,
    noise: Noise,
}

enum Noise {
    /// Elementwise factor ((1-2pt)^{w(x^y)} - 1) rho_xy.
    Dephasing { factor_by_weight: Vec<f64> },
    /// Per-qubit channel (1-pt) Id + pt (U . U) with a real Hermitian U.
    ProductConj { pt: f64, u: [[f64; 2]; 2] },
    /// cos^2(phi/2) L(Z) + sin^2(phi/2) L(X).
    Mixture {
        cz2: f64,
        sx2: f64,
        pt: f64,
        factor_by_weight: Vec<f64>,
    },
}

impl Generator {
    pub fn new(spec: &ChannelSpec, n: usize) -> Result<Self> {
        qop::check_qubit_cap(n)?;
        let pt = crate::gf2::check_noise_product(spec.p, spec.theta)?;
        let dephasing_factors = |pt: f64| -> Vec<f64> {
            (0..=n).map(|w| (1.0 - 2.0 * pt).powi(w as i32) - 1.0).collect()
        };
        let noise = match spec.kind {
            ChannelKind::Dephasing => Noise::Dephasing {
                factor_by_weight: dephasing_factors(pt),
            },
            ChannelKind::BitFlip => Noise::ProductConj {
                pt,
                u: [[0.0, 1.0], [1.0, 0.0]],
            },
            ChannelKind::Mixed { phi } => {
                let (s, c) = (phi / 2.0).sin_cos();
                Noise::ProductConj {
                    pt,
                    u: [[c, s], [s, -c]],
                }
            }
            ChannelKind::Mixture { phi } => {
                let (s, c) = (phi / 2.0).sin_cos();
                Noise::Mixture {
                    cz2: c * c,
                    sx2: s * s,
                    pt,
                    factor_by_weight: dephasing_factors(pt),
                }
            }
            ChannelKind::FixedWeightZ { .. } => {
                return Err(Error::WrongChannel {
                    expected: "a Lindbladian channel".into(),
                    got: spec.kind.name().into(),
                })
            }
        };
        Ok(Self {
            n,
            dim: 1usize << n,
            theta: spec.theta,
            h: qop::hamiltonian_diagonal(n),
            noise,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Evaluate drho/dt.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let dim = self.dim;
        let mut out: CMat = Array2::zeros((dim, dim));
        // -i theta [H, rho] for diagonal H
        for x in 0..dim {
            for y in 0..dim {
                let freq = self.theta * (self.h[x] - self.h[y]);
                out[(x, y)] = Complex64::new(0.0, -freq) * rho[(x, y)];
            }
        }
        match &self.noise {
            Noise::Dephasing { factor_by_weight } => {
                add_dephasing_noise(&mut out, rho, factor_by_weight, 1.0);
            }
            Noise::ProductConj { pt, u } => {
                let noisy = product_channel(rho, self.n, *pt, u);
                out += &noisy;
                out -= rho;
            }
            Noise::Mixture {
                cz2,
                sx2,
                pt,
                factor_by_weight,
            } => {
                add_dephasing_noise(&mut out, rho, factor_by_weight, *cz2);
                let flip = [[0.0, 1.0], [1.0, 0.0]];
                let noisy = product_channel(rho, self.n, *pt, &flip);
                out.zip_mut_with(&(&noisy - rho), |o, d| *o += d * *sx2);
            }
        }
        out
    }
}

fn add_dephasing_noise(out: &mut CMat, rho: &CMat, factor_by_weight: &[f64], scale: f64) {
    let dim = rho.nrows();
    for x in 0..dim {
        for y in 0..dim {
            let w = (x ^ y).count_ones() as usize;
            out[(x, y)] += rho[(x, y)] * (factor_by_weight[w] * scale);
        }
    }
}

/// Apply the tensor-product channel prod_i [(1-pt) Id + pt (U_i . U_i)] by
/// composing the commuting single-qubit channels.
fn product_channel(rho: &CMat, n: usize, pt: f64, u: &[[f64; 2]; 2]) -> CMat {
    let dim = 1usize << n;
    let mut cur = rho.clone();
    let is_flip = u[0][0] == 0.0 && u[1][1] == 0.0 && u[0][1] == 1.0 && u[1][0] == 1.0;
    for bit in 0..n {
        let conj = if is_flip {
            conjugate_by_x(&cur, dim, bit)
        } else {
            conjugate_by_real_u(&cur, dim, bit, u)
        };
        cur.zip_mut_with(&conj, |c, j| *c = *c * (1.0 - pt) + *j * pt);
    }
    cur
}

fn conjugate_by_x(rho: &CMat, dim: usize, bit: usize) -> CMat {
    let mask = 1usize << bit;
    let mut out: CMat = Array2::zeros((dim, dim));
    for x in 0..dim {
        for y in 0..dim {
            out[(x, y)] = rho[(x ^ mask, y ^ mask)];
        }
    }
    out
}

fn conjugate_by_real_u(rho: &CMat, dim: usize, bit: usize, u: &[[f64; 2]; 2]) -> CMat {
    let mask = 1usize << bit;
    let mut tmp: CMat = Array2::zeros((dim, dim));
    // rows: tmp = U rho
    for x in 0..dim {
        if x & mask != 0 {
            continue;
        }
        let x1 = x | mask;
        for y in 0..dim {
            let r0 = rho[(x, y)];
            let r1 = rho[(x1, y)];
            tmp[(x, y)] = r0 * u[0][0] + r1 * u[0][1];
            tmp[(x1, y)] = r0 * u[1][0] + r1 * u[1][1];
        }
    }
    // columns: out = tmp U  (U real symmetric)
    let mut out: CMat = Array2::zeros((dim, dim));
    for y in 0..dim {
        if y & mask != 0 {
            continue;
        }
        let y1 = y | mask;
        for x in 0..dim {
            let c0 = tmp[(x, y)];
            let c1 = tmp[(x, y1)];
            out[(x, y)] = c0 * u[0][0] + c1 * u[0][1];
            out[(x, y1)] = c0 * u[1][0] + c1 * u[1][1];
        }
    }
    out
}

fn check_kind(spec: &ChannelSpec, want: &str) -> Result<()> {
    if spec.kind.name() != want {
        return Err(Error::WrongChannel {
            expected: want.into(),
            got: spec.kind.name().into(),
        });
    }
    Ok(())
}

/// drho/dt for the dephasing channel.
pub fn dephasing_generator(rho: &DensityMatrix, spec: &ChannelSpec, n: usize) -> Result<CMat> {
    check_kind(spec, "dephasing")?;
    Ok(Generator::new(spec, n)?.apply(&rho.mat))
}

/// drho/dt for the bit-flip channel.
pub fn bitflip_generator(rho: &DensityMatrix, spec: &ChannelSpec, n: usize) -> Result<CMat> {
    check_kind(spec, "bitflip")?;
    Ok(Generator::new(spec, n)?.apply(&rho.mat))
}

/// drho/dt for the coherent U(phi) channel.
pub fn mixed_generator(rho: &DensityMatrix, spec: &ChannelSpec, n: usize) -> Result<CMat> {
    check_kind(spec, "mixed")?;
    Ok(Generator::new(spec, n)?.apply(&rho.mat))
}

/// One-shot channel applying a Z error to exactly w qubits, all weight-w
/// error patterns equally likely.
pub fn fixed_weight_z_map(rho: &DensityMatrix, w: usize) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    if w > n {
        return Err(Error::Domain(format!("error weight {w} exceeds {n} qubits")));
    }
    let dim = rho.dim();
    // The conjugation average depends only on d = weight(x ^ y):
    // coeff(d) = binomial(n, w)^{-1} sum_{|i|=w} (-1)^{|i & x^y|}.
    let total = crate::gf2::binomial(n, w) as f64;
    let mut coeff = vec![0.0f64; n + 1];
    for (d, c) in coeff.iter_mut().enumerate() {
        let rep: usize = (1usize << d) - 1;
        let mut acc = 0i64;
        for i in 0..dim {
            if i.count_ones() as usize == w {
                acc += if (i & rep).count_ones() & 1 == 1 { -1 } else { 1 };
            }
        }
        *c = acc as f64 / total;
    }
    let mut out: CMat = Array2::zeros((dim, dim));
    for x in 0..dim {
        for y in 0..dim {
            out[(x, y)] = rho.mat[(x, y)] * coeff[(x ^ y).count_ones() as usize];
        }
    }
    DensityMatrix::new(out, n)
}

/// Full description of one integration run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub code: BinaryCode,
    pub channel: ChannelSpec,
    pub t_max: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.t_max < self.dt {
            return Err(Error::Domain(format!(
                "bad time grid: t_max={}, dt={}",
                self.t_max, self.dt
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Domain("sample_every must be positive".into()));
        }
        Ok(())
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Ok(Self {
            code: self.code.clone(),
            channel: self.channel.with_theta(theta)?,
            ..*self
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectorySource {
    Integrated,
    Analytic,
}

impl std::fmt::Display for TrajectorySource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrajectorySource::Integrated => write!(f, "integrated"),
            TrajectorySource::Analytic => write!(f, "analytic"),
        }
    }
}

/// Time grid plus the measured all-+1 syndrome probability at each time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub source: TrajectorySource,
}

impl Trajectory {
    /// CSV with header `t,p_plus,source`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p_plus,source\n");
        for (t, p) in self.times.iter().zip(&self.probabilities) {
            out.push_str(&format!("{t:.16e},{p:.16e},{}\n", self.source));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut probabilities = Vec::new();
        let mut source = TrajectorySource::Integrated;
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 {
                if line.trim() != "t,p_plus,source" {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("unexpected trajectory header '{line}'"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "expected 3 columns".into(),
                });
            }
            let t: f64 = parts[0].trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad time: {e}"),
            })?;
            let p: f64 = parts[1].trim().parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad probability: {e}"),
            })?;
            source = match parts[2].trim() {
                "integrated" => TrajectorySource::Integrated,
                "analytic" => TrajectorySource::Analytic,
                other => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("unknown source '{other}'"),
                    })
                }
            };
            times.push(t);
            probabilities.push(p);
        }
        Ok(Self {
            times,
            probabilities,
            source,
        })
    }
}

/// Numerical-hygiene measurements collected over a run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IntegrationStats {
    pub max_trace_drift: f64,
    pub max_hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub max_step_change: f64,
}

pub struct EvolveOutcome {
    pub trajectory: Trajectory,
    pub stats: IntegrationStats,
    pub final_state: DensityMatrix,
}

/// Fixed-step RK4 integration of the configured channel from the code's
/// probe state, sampling Tr(rho Pi) every `sample_every` steps.
pub fn evolve_detailed(config: &SimulationConfig) -> Result<EvolveOutcome> {
    config.validate()?;
    let n = config.code.len();
    let generator = Generator::new(&config.channel, n)?;
    let mut rho = qop::probe_state(&config.code)?;
    let projector = qop::stabilizer_projector(&config.code)?;
    let dt = config.dt;
    let steps = (config.t_max / dt).round() as usize;
    let steps = steps.max(1);

    let mut times = Vec::new();
    let mut probabilities = Vec::new();
    let mut stats = IntegrationStats {
        max_trace_drift: 0.0,
        max_hermiticity_defect: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_step_change: 0.0,
    };

    let n_samples = steps / config.sample_every + 1;
    let eig_stride = (n_samples / 32).max(1);

    let mut sample_idx = 0usize;
    let mut record = |rho: &DensityMatrix,
                      t: f64,
                      stats: &mut IntegrationStats,
                      times: &mut Vec<f64>,
                      probs: &mut Vec<f64>|
     -> Result<()> {
        let p = qop::measure_plus_probability(rho, &projector)?;
        times.push(t);
        probs.push(p);
        let herm = linalg::hermiticity_defect(&rho.mat);
        stats.max_hermiticity_defect = stats.max_hermiticity_defect.max(herm);
        if sample_idx % eig_stride == 0 {
            let min = linalg::min_eigenvalue(&rho.mat);
            stats.min_eigenvalue = stats.min_eigenvalue.min(min);
            if min < -1e-8 {
                return Err(Error::InvariantViolation(format!(
                    "negative eigenvalue {min:.3e} at t={t}"
                )));
            }
        }
        sample_idx += 1;
        Ok(())
    };

    record(&rho, 0.0, &mut stats, &mut times, &mut probabilities)?;
    let half = dt / 2.0;
    for step in 1..=steps {
        let k1 = generator.apply(&rho.mat);
        let step_change = linalg::frobenius_norm(&k1) * dt;
        stats.max_step_change = stats.max_step_change.max(step_change);
        if step_change >= 0.1 {
            return Err(Error::StepSize(format!(
                "||drho|| = {step_change:.3e} per step at t={}; reduce dt",
                (step - 1) as f64 * dt
            )));
        }
        let k2 = generator.apply(&(&rho.mat + &k1.mapv(|z| z * half)));
        let k3 = generator.apply(&(&rho.mat + &k2.mapv(|z| z * half)));
        let k4 = generator.apply(&(&rho.mat + &k3.mapv(|z| z * dt)));
        let mut next = rho.mat;
        ndarray::Zip::from(&mut next)
            .and(&k1)
            .and(&k2)
            .and(&k3)
            .and(&k4)
            .for_each(|r, &a, &b, &c, &d| {
                *r += (a + (b + c) * 2.0 + d) * (dt / 6.0);
            });
        rho = DensityMatrix {
            mat: linalg::rehermitize(&next),
            n_qubits: n,
        };
        let drift = (linalg::trace(&rho.mat).re - 1.0).abs();
        stats.max_trace_drift = stats.max_trace_drift.max(drift);
        if drift > 1e-8 {
            return Err(Error::StepSize(format!(
                "trace drift {drift:.3e} at t={}; reduce dt",
                step as f64 * dt
            )));
        }
        if step % config.sample_every == 0 {
            record(
                &rho,
                step as f64 * dt,
                &mut stats,
                &mut times,
                &mut probabilities,
            )?;
        }
    }
    Ok(EvolveOutcome {
        trajectory: Trajectory {
            times,
            probabilities,
            source: TrajectorySource::Integrated,
        },
        stats,
        final_state: rho,
    })
}

/// See [`evolve_detailed`]; drops the hygiene stats.
pub fn evolve(config: &SimulationConfig) -> Result<Trajectory> {
    Ok(evolve_detailed(config)?.trajectory)
}
