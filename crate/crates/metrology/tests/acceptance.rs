//! Acceptance suite: one test per headline claim, each printing a single
//! pass/fail line (visible with --nocapture; the test verdict itself is the
//! same signal).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_metrology::channel::{
    evolve, evolve_detailed, ChannelKind, ChannelSpec, Generator, SimulationConfig,
};
use robust_metrology::gf2::{self, BinaryCode, BitVector};
use robust_metrology::linalg;
use robust_metrology::metrology::{
    cramer_rao_curve, estimate_theta, gamma_dephasing, gamma_exact_mixed, gamma_mixed, q_pure,
    qfi, variance_bound, QFI_EIGEN_CUTOFF,
};
use robust_metrology::oracle;
use robust_metrology::qop;

const P: f64 = 0.05;
const THETA: f64 = 1e-3;

fn verdict(criterion: &str, passed: bool, detail: &str) {
    println!(
        "[{}] {criterion}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "{criterion}: {detail}");
}

fn ghz(n: usize) -> BinaryCode {
    BinaryCode::repetition(n)
}

#[test]
fn criterion_01_macwilliams_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 200 {
        let n = 2 + (checked % 11); // n in 2..=12
        let code = gf2::random_code(n, &mut rng);
        let direct = code.dual().weight_enumerator();
        let transformed = code
            .weight_enumerator()
            .macwilliams_transform(n, code.size() as u64)
            .unwrap();
        assert_eq!(
            direct.coefficients(),
            transformed.coefficients(),
            "code {:?}",
            code.generators()
        );
        checked += 1;
    }
    verdict(
        "criterion 1 (MacWilliams equivalence)",
        true,
        "200 random codes n<=12, exact integer match",
    );
}

/// All subspaces of F2^n via breadth-first span extension, deduplicated by
/// their codeword-membership bitmap.
fn all_codes(n: usize) -> Vec<BinaryCode> {
    let dim = 1u64 << (1 << n);
    let _ = dim;
    let mut seen = std::collections::HashSet::new();
    let mut out: Vec<Vec<u32>> = Vec::new();
    let zero: Vec<u32> = vec![0];
    seen.insert(1u64); // membership bitmap of {0}
    out.push(zero);
    let mut frontier = vec![vec![0u32]];
    while let Some(space) = frontier.pop() {
        for v in 1..(1u32 << n) {
            if space.contains(&v) {
                continue;
            }
            let mut bigger: Vec<u32> = space.iter().flat_map(|&w| [w, w ^ v]).collect();
            bigger.sort_unstable();
            bigger.dedup();
            let mask: u64 = bigger.iter().map(|&w| 1u64 << w).fold(0, |a, b| a | b);
            if seen.insert(mask) {
                out.push(bigger.clone());
                frontier.push(bigger);
            }
        }
    }
    out.into_iter()
        .map(|codewords| {
            // Rebuild as a generated code from a spanning subset.
            let gens: Vec<BitVector> = {
                let mut basis: Vec<u32> = Vec::new();
                let mut span = vec![0u32];
                for &w in &codewords {
                    if !span.contains(&w) {
                        basis.push(w);
                        let extended: Vec<u32> = span.iter().map(|&s| s ^ w).collect();
                        span.extend(extended);
                    }
                }
                basis.into_iter().map(|b| BitVector::new(b, n)).collect()
            };
            BinaryCode::from_generators(&gens, n).unwrap()
        })
        .collect()
}

#[test]
fn criterion_02_toy_variance_all_small_codes() {
    let start = std::time::Instant::now();
    let mut count = 0;
    for n in 2..=5 {
        for code in all_codes(n) {
            if code.is_degenerate() {
                continue;
            }
            for w in 0..=n {
                let report = oracle::verify_toy_variance(&code, w).unwrap();
                assert!(
                    report.passed && report.abs_error <= 1e-9,
                    "n={n} w={w} gens={:?}: {report:?}",
                    code.generators()
                );
                count += 1;
            }
        }
    }
    verdict(
        "criterion 2 (toy variance identity)",
        start.elapsed().as_secs() < 30,
        &format!("{count} (code, w) cases, abs error <= 1e-9"),
    );
}

#[test]
fn criterion_03_pure_state_qfi() {
    let code = ghz(7);
    let rho = qop::probe_state(&code).unwrap();
    let h = qop::hamiltonian(7).unwrap();
    let drho = linalg::commutator(&h, &rho.mat).mapv(|z| z * num_complex::Complex64::new(0.0, -1.0));
    let f = qfi(&rho, &drho, QFI_EIGEN_CUTOFF).unwrap();
    let vb = variance_bound(&rho, &h).unwrap();
    let ok = (f - 196.0).abs() / 196.0 <= 1e-6 && (f - vb).abs() / vb <= 1e-8;
    verdict(
        "criterion 3 (pure-state QFI = 196)",
        ok,
        &format!("qfi = {f}, variance bound = {vb}"),
    );
}

#[test]
fn criterion_04_ghz_dephasing_exact() {
    let gamma = 1.0 - (1.0 - 2.0 * P * THETA).powi(7);
    let config = SimulationConfig {
        code: ghz(7),
        channel: ChannelSpec::new(ChannelKind::Dephasing, P, THETA).unwrap(),
        t_max: 3.0 / gamma,
        dt: 0.5,
        sample_every: 10,
    };
    let out = evolve_detailed(&config).unwrap();
    check_hygiene("criterion 4", &out.stats);
    let mut worst = 0.0f64;
    for (t, p) in out.trajectory.times.iter().zip(&out.trajectory.probabilities) {
        let exact = 0.5 * ((-gamma * t).exp() * (14.0 * THETA * t).cos() + 1.0);
        worst = worst.max((p - exact).abs());
    }
    verdict(
        "criterion 4 (GHZ dephasing closed form)",
        worst <= 1e-3,
        &format!("max |p - closed form| = {worst:.3e} over [0, 3/gamma]"),
    );
}

fn check_hygiene(tag: &str, stats: &robust_metrology::channel::IntegrationStats) {
    assert!(stats.max_trace_drift <= 1e-8, "{tag}: trace drift {stats:?}");
    assert!(
        stats.max_hermiticity_defect <= 1e-10,
        "{tag}: hermiticity {stats:?}"
    );
    assert!(stats.min_eigenvalue >= -1e-8, "{tag}: positivity {stats:?}");
}

fn crb_ratio_window(
    code: BinaryCode,
    kind: ChannelKind,
    t_max: f64,
    dt: f64,
    sample_every: usize,
) -> robust_metrology::metrology::PrecisionCurve {
    let config = SimulationConfig {
        code,
        channel: ChannelSpec::new(kind, P, THETA).unwrap(),
        t_max,
        dt,
        sample_every,
    };
    cramer_rao_curve(&config, THETA / 100.0).unwrap()
}

#[test]
fn criterion_05_ghz7_bitflip_heisenberg() {
    let t_max = 240.0;
    let curve = crb_ratio_window(ghz(7), ChannelKind::BitFlip, t_max, 0.25, 16);
    let target = 1.0 / 14.0;
    let mut worst: f64 = 0.0;
    for i in 0..curve.times.len() {
        let t = curve.times[i];
        if t < t_max / 4.0 || t > 3.0 * t_max / 4.0 || !curve.reliable[i] {
            continue;
        }
        let rel = (curve.delta_theta[i] * t - target).abs() / target;
        worst = worst.max(rel);
    }
    let report = oracle::verify_bitflip_undamped(&ghz(7), P, THETA).unwrap();
    let ok = worst <= 0.05 && report.passed;
    verdict(
        "criterion 5 (GHZ7 X-channel Heisenberg)",
        ok,
        &format!(
            "max |dtheta*t - 1/14|/ (1/14) = {worst:.3e} (mid-window), gamma_hat = {:.3e}",
            report.lhs
        ),
    );
}

#[test]
fn criterion_06_steane_bitflip_sql() {
    let t_max = 60.0;
    let curve = crb_ratio_window(BinaryCode::steane_x(), ChannelKind::BitFlip, t_max, 0.25, 8);
    let target = 1.0 / 28.0f64.sqrt();
    let mut worst: f64 = 0.0;
    for i in 0..curve.times.len() {
        let t = curve.times[i];
        if t < t_max / 4.0 || t > 3.0 * t_max / 4.0 || !curve.reliable[i] {
            continue;
        }
        let rel = (curve.delta_theta[i] * t - target).abs() / target;
        worst = worst.max(rel);
    }
    verdict(
        "criterion 6 (Steane X-channel SQL)",
        worst <= 0.05,
        &format!("max |dtheta*t - 1/sqrt(28)|/target = {worst:.3e} (mid-window)"),
    );
}

#[test]
fn criterion_07_negative_claims_dephasing_and_mixed() {
    let sql = |t: f64| 1.0 / (7.0f64.sqrt() * t);
    let mut detail = String::new();
    let mut all_ok = true;
    for kind in [
        ChannelKind::Dephasing,
        ChannelKind::Mixed {
            phi: std::f64::consts::FRAC_PI_2,
        },
    ] {
        let gamma = match kind {
            ChannelKind::Dephasing => gamma_dephasing(&ghz(7), P, THETA).unwrap(),
            ChannelKind::Mixed { phi } => gamma_mixed(&ghz(7), P, THETA, phi).unwrap(),
            _ => unreachable!(),
        };
        // Past the transient the damping has priced the channel out of the
        // SQL; before it the GHZ state still beats sqrt(N) briefly.
        let transient = 2.2 / gamma;
        let t_max = 3.2 / gamma;
        let curve = crb_ratio_window(ghz(7), kind, t_max, 2.0, 64);
        let mut min_margin = f64::INFINITY;
        for i in 0..curve.times.len() {
            let t = curve.times[i];
            if t < transient || !curve.reliable[i] {
                continue;
            }
            min_margin = min_margin.min(curve.delta_theta[i] / sql(t));
        }
        all_ok &= min_margin > 1.0;
        detail.push_str(&format!("{} min dtheta/SQL = {min_margin:.3} ", kind.name()));
    }
    verdict("criterion 7 (below SQL past transient)", all_ok, &detail);
}

#[test]
fn criterion_08_channel_limit_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = 1 + trial % 4;
        let dim = 1usize << n;
        let m = linalg::random_hermitian(dim, &mut rng);
        let spec = |kind| ChannelSpec::new(kind, P, THETA).unwrap();
        let mixed0 = Generator::new(&spec(ChannelKind::Mixed { phi: 0.0 }), n).unwrap();
        let dephasing = Generator::new(&spec(ChannelKind::Dephasing), n).unwrap();
        worst = worst.max(linalg::frobenius_norm(
            &(&mixed0.apply(&m) - &dephasing.apply(&m)),
        ));
        let mixed_pi =
            Generator::new(&spec(ChannelKind::Mixed { phi: std::f64::consts::PI }), n).unwrap();
        let bitflip = Generator::new(&spec(ChannelKind::BitFlip), n).unwrap();
        worst = worst.max(linalg::frobenius_norm(
            &(&mixed_pi.apply(&m) - &bitflip.apply(&m)),
        ));
    }
    let mut gamma_worst = 0.0f64;
    for code in [ghz(3), ghz(7), BinaryCode::steane_x(), BinaryCode::trivial(3)] {
        let gd = gamma_dephasing(&code, P, THETA).unwrap();
        gamma_worst = gamma_worst.max((gamma_mixed(&code, P, THETA, 0.0).unwrap() - gd).abs());
        gamma_worst = gamma_worst
            .max(gamma_mixed(&code, P, THETA, std::f64::consts::PI).unwrap().abs());
    }
    verdict(
        "criterion 8 (channel endpoint identities)",
        worst <= 1e-12 && gamma_worst <= 1e-12,
        &format!("generator defect {worst:.3e}, gamma defect {gamma_worst:.3e}"),
    );
}

#[test]
fn criterion_09_robustness_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let grid = [0.05, 0.15, 0.25, 0.35, 0.45];
    for trial in 0..500 {
        let n = 2 + trial % 9; // n in 2..=10
        let code = gf2::random_code(n, &mut rng);
        let dual_weights = code.dual().weight_enumerator();
        for pt in grid {
            let slack = gf2::robustness_bound_slack(&dual_weights, 1.0, pt, n).unwrap();
            assert!(slack >= -1e-12, "negative slack {slack} for {:?}", code.generators());
            if slack < 1e-12 {
                assert_eq!(
                    code.size(),
                    1,
                    "bound saturated by a nontrivial code {:?}",
                    code.generators()
                );
            }
        }
    }
    let mut limit_worst = 0.0f64;
    for code in [ghz(3), ghz(7), BinaryCode::steane_x()] {
        let d0 = (gamma_exact_mixed(&code, P, THETA, 0.0).unwrap()
            - gamma_dephasing(&code, P, THETA).unwrap())
        .abs();
        let dpi = gamma_exact_mixed(&code, P, THETA, std::f64::consts::PI)
            .unwrap()
            .abs();
        limit_worst = limit_worst.max(d0).max(dpi);
    }
    verdict(
        "criterion 9 (robustness bound)",
        limit_worst <= 1e-9,
        &format!("500 codes slack >= 0; exact-gamma endpoint defect {limit_worst:.3e}"),
    );
}

#[test]
fn criterion_10_integrator_hygiene() {
    let mut worst_halving = 0.0f64;
    for kind in [
        ChannelKind::Dephasing,
        ChannelKind::BitFlip,
        ChannelKind::Mixed {
            phi: std::f64::consts::FRAC_PI_2,
        },
    ] {
        let config = SimulationConfig {
            code: ghz(7),
            channel: ChannelSpec::new(kind, P, THETA).unwrap(),
            t_max: 100.0,
            dt: 0.5,
            sample_every: 20,
        };
        let coarse = evolve_detailed(&config).unwrap();
        check_hygiene("criterion 10", &coarse.stats);
        let fine = evolve(&SimulationConfig {
            dt: 0.25,
            sample_every: 40,
            ..config
        })
        .unwrap();
        for (a, b) in coarse
            .trajectory
            .probabilities
            .iter()
            .zip(&fine.probabilities)
        {
            worst_halving = worst_halving.max((a - b).abs());
        }
    }
    verdict(
        "criterion 10 (integrator hygiene)",
        worst_halving <= 1e-6,
        &format!("max probability shift under dt halving = {worst_halving:.3e}"),
    );
}

#[test]
fn criterion_11_estimation_round_trip() {
    let mut detail = String::new();
    let mut all_ok = true;
    for n in [3usize, 5, 7] {
        // One full oscillation period pi/(N theta) per run.
        let t_max = std::f64::consts::PI / (n as f64 * THETA);
        for kind in [
            ChannelKind::Dephasing,
            ChannelKind::BitFlip,
            ChannelKind::Mixed {
                phi: std::f64::consts::FRAC_PI_2,
            },
        ] {
            let config = SimulationConfig {
                code: ghz(n),
                channel: ChannelSpec::new(kind, P, THETA).unwrap(),
                t_max,
                dt: 0.5,
                sample_every: ((t_max / 0.5) as usize / 200).max(1),
            };
            let trajectory = evolve(&config).unwrap();
            let estimate = estimate_theta(&trajectory, q_pure(&config.code).unwrap()).unwrap();
            let rel = (estimate.theta_hat - THETA).abs() / THETA;
            all_ok &= rel <= 0.05;
            detail.push_str(&format!("{}/n{n}: {rel:.1e} ", kind.name()));
        }
    }
    verdict("criterion 11 (estimation round trip)", all_ok, &detail);
}
