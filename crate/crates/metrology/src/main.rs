use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_metrology::channel::{
    self, ChannelKind, ChannelSpec, SimulationConfig, Trajectory, TrajectorySource,
};
use robust_metrology::error::{Error, Result};
use robust_metrology::gf2::{robustness, robustness_bound_slack, BinaryCode};
use robust_metrology::metrology::{
    self, cramer_rao_curve, estimate_theta_with_options, gamma_dephasing, gamma_mixed, q_pure,
    GammaParams,
};
use robust_metrology::oracle;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "robust-metrology",
    version,
    about = "Phase estimation with classical-code probe states under Lindblad noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report code invariants: weight enumerators, Q_pure, robustness and
    /// the robustness-bound slack at the given rates.
    Analyze {
        /// Built-in code name (ghzN, steane, trivialN) or a code file path.
        #[arg(long)]
        code: String,
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        #[arg(long, default_value_t = 1e-3)]
        theta: f64,
        /// Write the JSON report here (human table always goes to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the master equation and emit the syndrome-probability
    /// trajectory as CSV.
    Simulate(SimulateArgs),
    /// Emit the Cramer-Rao precision curve delta-theta(t) as CSV.
    Crb(CrbArgs),
    /// Fit the damped-cosine model to a trajectory CSV and recover theta.
    Estimate {
        /// Trajectory CSV file (header t,p_plus,source).
        trajectory: PathBuf,
        /// Pure-state QFI of the probe code (sets the frequency scale).
        #[arg(long)]
        q_pure: Option<f64>,
        /// Compute q_pure from this code instead of passing --q-pure.
        #[arg(long)]
        code: Option<String>,
        /// Fit amplitude and offset too, instead of fixing A = B = 1/2.
        #[arg(long)]
        free_amplitude: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the brute-force verification suite and emit its reports as JSON.
    Oracle {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SimulateArgs {
    /// Built-in code name (ghzN, steane, trivialN) or a code file path.
    #[arg(long)]
    code: Option<String>,
    /// dephasing | bitflip | mixed | mixture
    #[arg(long)]
    channel: Option<String>,
    /// Mixing angle in [0, pi]; required for mixed/mixture channels.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Number of measured copies per time point for binomial sampling;
    /// 0 emits exact probabilities.
    #[arg(long, default_value_t = 0)]
    copies: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also emit the damped-cosine model rows (source "analytic").
    #[arg(long)]
    analytic: bool,
    /// JSON file with a full SimulationConfig; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CrbArgs {
    #[command(flatten)]
    sim: SimulateArgs,
    /// Finite-difference step for the CFI derivative; default theta/100.
    #[arg(long)]
    fd_step: Option<f64>,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a SimulationConfig,
    seed: Option<u64>,
    outputs: Vec<String>,
    tool_version: &'static str,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { code, p, theta, out } => cmd_analyze(&code, p, theta, out.as_deref()),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Crb(args) => cmd_crb(&args),
        Command::Estimate {
            trajectory,
            q_pure,
            code,
            free_amplitude,
            out,
        } => cmd_estimate(&trajectory, q_pure, code.as_deref(), free_amplitude, out.as_deref()),
        Command::Oracle { out } => cmd_oracle(out.as_deref()),
    }
}

/// Resolve a --code argument: ghzN / steane / trivialN, else a file path.
fn resolve_code(name: &str) -> Result<BinaryCode> {
    if let Some(n) = name.strip_prefix("ghz") {
        if let Ok(n) = n.parse::<usize>() {
            if n == 0 {
                return Err(Error::Domain("ghz0 has no qubits".into()));
            }
            return Ok(BinaryCode::repetition(n));
        }
    }
    if let Some(n) = name.strip_prefix("trivial") {
        if let Ok(n) = n.parse::<usize>() {
            if n == 0 {
                return Err(Error::Domain("trivial0 has no qubits".into()));
            }
            return Ok(BinaryCode::trivial(n));
        }
    }
    if name == "steane" {
        return Ok(BinaryCode::steane_x());
    }
    let text = std::fs::read_to_string(name)?;
    BinaryCode::parse_text(&text)
}

#[derive(Serialize)]
struct AnalysisReport {
    code: CodeSummary,
    p: f64,
    theta: f64,
    gamma_dephasing: f64,
    robustness: f64,
    bound_slack: f64,
    degenerate: bool,
}

#[derive(Serialize)]
struct CodeSummary {
    n: usize,
    k: usize,
    size: usize,
    weight_enumerator: Vec<u64>,
    dual_weight_enumerator: Vec<u64>,
    w2_dual: u64,
    q_pure: Option<f64>,
}

fn cmd_analyze(code_name: &str, p: f64, theta: f64, out: Option<&Path>) -> Result<()> {
    let code = resolve_code(code_name)?;
    let dual = code.dual();
    let weights = code.weight_enumerator();
    let dual_weights = dual.weight_enumerator();
    let degenerate = code.is_degenerate();
    let q = q_pure(&code).ok();
    let rob = robustness(&dual_weights, p, theta, code.len())?;
    let slack = robustness_bound_slack(&dual_weights, p, theta, code.len())?;
    let gamma = gamma_dephasing(&code, p, theta)?;

    println!("code: {code_name}");
    println!("  n = {}, k = {}, |C| = {}", code.len(), code.dimension(), code.size());
    println!("  W_C      = {:?}", weights.coefficients());
    println!("  W_dual   = {:?}", dual_weights.coefficients());
    println!("  W_dual,2 = {}", dual_weights.coefficient(2));
    match q {
        Some(q) => println!("  Q_pure   = {q}"),
        None => println!("  Q_pure   = n/a (trivial code: dual has weight-1 codewords)"),
    }
    println!("  at p = {p}, theta = {theta}:");
    println!("    robustness  = {rob:.12e}");
    println!("    bound slack = {slack:.12e}");
    println!("    gamma       = {gamma:.12e}");
    if degenerate {
        println!("  warning: trivial (degenerate) code — some qubit carries no signal");
    }

    let report = AnalysisReport {
        code: CodeSummary {
            n: code.len(),
            k: code.dimension(),
            size: code.size(),
            weight_enumerator: weights.coefficients().to_vec(),
            dual_weight_enumerator: dual_weights.coefficients().to_vec(),
            w2_dual: dual_weights.coefficient(2),
            q_pure: q,
        },
        p,
        theta,
        gamma_dephasing: gamma,
        robustness: rob,
        bound_slack: slack,
        degenerate,
    };
    if let Some(path) = out {
        write_atomic(path, &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(())
}

/// Merge CLI flags over an optional config file over defaults.
fn build_config(args: &SimulateArgs) -> Result<SimulationConfig> {
    let base: Option<SimulationConfig> = match &args.config {
        Some(path) => Some(serde_json::from_str(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    let code = match &args.code {
        Some(name) => resolve_code(name)?,
        None => base
            .as_ref()
            .map(|b| b.code.clone())
            .ok_or_else(|| Error::Domain("--code or --config is required".into()))?,
    };
    let theta = args
        .theta
        .or(base.as_ref().map(|b| b.channel.theta))
        .unwrap_or(1e-3);
    let p = args.p.or(base.as_ref().map(|b| b.channel.p)).unwrap_or(0.05);
    let kind = match args.channel.as_deref() {
        Some("dephasing") => ChannelKind::Dephasing,
        Some("bitflip") => ChannelKind::BitFlip,
        Some("mixed") => ChannelKind::Mixed {
            phi: args.phi.ok_or_else(|| {
                Error::Domain("--phi is required for the mixed channel".into())
            })?,
        },
        Some("mixture") => ChannelKind::Mixture {
            phi: args.phi.ok_or_else(|| {
                Error::Domain("--phi is required for the mixture channel".into())
            })?,
        },
        Some(other) => {
            return Err(Error::Domain(format!(
                "unknown channel '{other}' (expected dephasing|bitflip|mixed|mixture)"
            )))
        }
        None => base
            .as_ref()
            .map(|b| b.channel.kind)
            .ok_or_else(|| Error::Domain("--channel or --config is required".into()))?,
    };
    if args.phi.is_some()
        && !matches!(kind, ChannelKind::Mixed { .. } | ChannelKind::Mixture { .. })
    {
        return Err(Error::Domain(
            "--phi only applies to the mixed and mixture channels".into(),
        ));
    }
    let config = SimulationConfig {
        code,
        channel: ChannelSpec::new(kind, p, theta)?,
        t_max: args.t_max.or(base.as_ref().map(|b| b.t_max)).unwrap_or(450.0),
        dt: args.dt.or(base.as_ref().map(|b| b.dt)).unwrap_or(0.1),
        sample_every: args
            .sample_every
            .or(base.as_ref().map(|b| b.sample_every))
            .unwrap_or(10),
    };
    config.validate()?;
    Ok(config)
}

/// Gamma of the configured channel in the damped-cosine model.
fn model_gamma(config: &SimulationConfig) -> Result<f64> {
    let (p, theta) = (config.channel.p, config.channel.theta);
    match config.channel.kind {
        ChannelKind::Dephasing => gamma_dephasing(&config.code, p, theta),
        ChannelKind::BitFlip => Ok(0.0),
        ChannelKind::Mixed { phi } | ChannelKind::Mixture { phi } => {
            gamma_mixed(&config.code, p, theta, phi)
        }
        ChannelKind::FixedWeightZ { .. } => Err(Error::WrongChannel {
            expected: "a Lindbladian channel".into(),
            got: "fixed-weight-z".into(),
        }),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let config = build_config(args)?;
    let mut trajectory = channel::evolve(&config)?;
    if args.copies > 0 {
        sample_binomial(&mut trajectory, args.copies, args.seed);
    }
    let mut csv = trajectory.to_csv();
    if args.analytic {
        let params = GammaParams::new(model_gamma(&config)?.max(0.0), q_pure(&config.code)?)?;
        let analytic = Trajectory {
            probabilities: trajectory
                .times
                .iter()
                .map(|&t| metrology::analytic_probability(t, config.channel.theta, &params))
                .collect(),
            times: trajectory.times.clone(),
            source: TrajectorySource::Analytic,
        };
        // Append the model rows under the same header.
        csv.push_str(analytic.to_csv().trim_start_matches("t,p_plus,source\n"));
    }
    emit(args, &config, &csv)
}

fn cmd_crb(args: &CrbArgs) -> Result<()> {
    let config = build_config(&args.sim)?;
    let delta = args.fd_step.unwrap_or(config.channel.theta * metrology::CFI_STEP_FRACTION);
    let curve = cramer_rao_curve(&config, delta)?;
    emit(&args.sim, &config, &curve.to_csv())
}

fn sample_binomial(trajectory: &mut Trajectory, copies: u64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in trajectory.probabilities.iter_mut() {
        let hits = (0..copies).filter(|_| rng.gen::<f64>() < *p).count();
        *p = hits as f64 / copies as f64;
    }
}

/// Write CSV to --out (plus a run manifest) or to stdout.
fn emit(args: &SimulateArgs, config: &SimulationConfig, csv: &str) -> Result<()> {
    match &args.out {
        Some(path) => {
            write_atomic(path, csv)?;
            let manifest = RunManifest {
                config,
                seed: (args.copies > 0).then_some(args.seed),
                outputs: vec![path.display().to_string()],
                tool_version: env!("CARGO_PKG_VERSION"),
            };
            let manifest_path = path.with_extension("manifest.json");
            write_atomic(&manifest_path, &serde_json::to_string_pretty(&manifest)?)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    theta_hat: f64,
    gamma_hat: f64,
    amplitude: f64,
    offset: f64,
    residual: f64,
    /// Rough 95% half-width from the RMS residual and the frequency
    /// sensitivity of the fit; a sanity scale, not a rigorous interval.
    ci_heuristic: f64,
}

fn cmd_estimate(
    path: &Path,
    q: Option<f64>,
    code_name: Option<&str>,
    free_amplitude: bool,
    out: Option<&Path>,
) -> Result<()> {
    let q = match (q, code_name) {
        (Some(q), _) => q,
        (None, Some(name)) => q_pure(&resolve_code(name)?)?,
        (None, None) => {
            return Err(Error::Domain("--q-pure or --code is required".into()));
        }
    };
    let trajectory = Trajectory::from_csv(&std::fs::read_to_string(path)?)?;
    let estimate = estimate_theta_with_options(&trajectory, q, free_amplitude)?;
    let span = trajectory.times.last().unwrap_or(&0.0) - trajectory.times.first().unwrap_or(&0.0);
    let sensitivity = 0.5 * q.sqrt() * span.max(f64::MIN_POSITIVE);
    let report = EstimateReport {
        theta_hat: estimate.theta_hat,
        gamma_hat: estimate.gamma_hat,
        amplitude: estimate.amplitude,
        offset: estimate.offset,
        residual: estimate.residual,
        ci_heuristic: 1.96 * estimate.residual / sensitivity,
    };
    let json = serde_json::to_string_pretty(&report)?;
    match out {
        Some(path) => write_atomic(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_oracle(out: Option<&Path>) -> Result<()> {
    let reports = oracle::oracle_suite()?;
    let json = serde_json::to_string_pretty(&reports)?;
    match out {
        Some(path) => write_atomic(path, &json)?,
        None => println!("{json}"),
    }
    if let Some(failed) = reports.iter().find(|r| !r.passed) {
        return Err(Error::InvariantViolation(format!(
            "oracle check '{}' failed: |{} - {}| = {:.3e}",
            failed.claim_id, failed.lhs, failed.rhs, failed.abs_error
        )));
    }
    Ok(())
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
