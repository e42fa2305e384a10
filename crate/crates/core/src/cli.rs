//! Command-line front end: `classify`, `teleport`, `swap` and `noise-sweep`.
//!
//! Reports go to stdout as JSON (`schema_version` 1) or CSV, diagnostics to
//! stderr. Exit codes: 0 success, 1 a checked claim failed, 2 usage error.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::hbsa::{hbsa, label_probabilities, HbsaBranch, HbsaConfig, PortRecord, TranscriptEntry};
use crate::hilbert::HyperBellLabel;
use crate::kerr::{
    analytic_two_gaussian_error, homodyne_error_rate, pick_weighted, quadrature_mean, trial_rng,
    ErrorRate, KerrConfig,
};
use crate::protocols::{swap, teleport, SwapBranch, TeleportBranch, TeleportInput};

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance on emitted probabilities and fidelities.
pub const REPORT_TOL: f64 = 1e-9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CLAIM: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hyperbell", version, about = "Hyperentangled Bell-state analysis simulator")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// Kerr phase per coupled photon, radians in (0, π/2]
    #[arg(long, global = true, default_value_t = 0.5)]
    pub theta: f64,

    /// Coherent probe amplitude (noise model only)
    #[arg(long, global = true, default_value_t = 2.0)]
    pub alpha: f64,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value_t = 1,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,

    /// Draw outcomes with a seeded generator instead of enumerating them
    #[arg(long, global = true)]
    pub sample: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the analyzer on all sixteen hyper-Bell states
    Classify,
    /// Teleport a polarization ⊗ path state through a hyperentangled channel
    Teleport(TeleportArgs),
    /// Swap two hyperentangled pairs
    Swap,
    /// Homodyne misclassification rate over a grid of probe settings
    NoiseSweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    /// Polarization amplitudes: `a,b` (real) or `a_re,a_im,b_re,b_im`
    #[arg(long, value_parser = parse_qubit, allow_hyphen_values = true)]
    pub pol: Option<[Complex64; 2]>,

    /// Path amplitudes: `g,d` (real) or `g_re,g_im,d_re,d_im`
    #[arg(long, value_parser = parse_qubit, allow_hyphen_values = true)]
    pub spat: Option<[Complex64; 2]>,

    /// Draw a Haar-random input for each trial
    #[arg(long, conflicts_with_all = ["pol", "spat"])]
    pub random: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `start:stop:steps` or a single value; defaults to --theta
    #[arg(long, value_parser = parse_range)]
    pub theta_range: Option<SweepRange>,

    /// `start:stop:steps` or a single value; defaults to --alpha
    #[arg(long, value_parser = parse_range)]
    pub alpha_range: Option<SweepRange>,
}

/// Inclusive, evenly spaced grid of values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRange(pub Vec<f64>);

fn parse_qubit(text: &str) -> Result<[Complex64; 2], String> {
    let nums: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    match nums.as_slice() {
        [a, b] => Ok([Complex64::new(*a, 0.0), Complex64::new(*b, 0.0)]),
        [ar, ai, br, bi] => Ok([Complex64::new(*ar, *ai), Complex64::new(*br, *bi)]),
        _ => Err("expected 2 real or 4 (re,im) numbers".into()),
    }
}

fn parse_range(text: &str) -> Result<SweepRange, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    match parts.as_slice() {
        [single] => Ok(SweepRange(vec![num(single)?])),
        [start, stop, steps] => {
            let (start, stop) = (num(start)?, num(stop)?);
            let steps: usize = steps.trim().parse().map_err(|e| format!("'{steps}': {e}"))?;
            if steps == 0 || start > stop || (steps == 1 && start != stop) {
                return Err(format!("empty or ill-formed range {text}"));
            }
            if steps == 1 {
                return Ok(SweepRange(vec![start]));
            }
            let step = (stop - start) / (steps - 1) as f64;
            Ok(SweepRange((0..steps).map(|k| start + step * k as f64).collect()))
        }
        _ => Err("expected start:stop:steps or a single value".into()),
    }
}

/// Failure of a subcommand, already mapped to its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Inconsistent(_) | Error::NotDeterministic => EXIT_CLAIM,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = &cli.config;
    let (bytes, code) = match &cli.command {
        Command::Classify => cmd_classify(cfg)?,
        Command::Teleport(args) => cmd_teleport(cfg, args)?,
        Command::Swap => cmd_swap(cfg)?,
        Command::NoiseSweep(args) => cmd_noise_sweep(cfg, args)?,
    };
    out.write_all(&bytes)
        .map_err(|e| usage(format!("writing output: {e}")))?;
    Ok(code)
}

fn hbsa_config(cfg: &RunConfig) -> Result<HbsaConfig, Failure> {
    let kerr = KerrConfig::new(cfg.theta, cfg.alpha)?;
    let hbsa = HbsaConfig::new(kerr);
    hbsa.validate()?;
    Ok(hbsa)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn json<T: Serialize>(cfg: &RunConfig, command: &str, body: T) -> Result<Vec<u8>, Failure> {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command,
        config: cfg,
        body,
    };
    let mut bytes = serde_json::to_vec_pretty(&report).map_err(|e| usage(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| usage(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.into_inner().map_err(|e| usage(e.to_string()))
}

/// Stream index for trial `trial` of item `item`.
fn stream(item: u64, trial: u64) -> u64 {
    (item << 32) | trial
}

#[derive(Serialize)]
struct BranchSummary<'a> {
    prob: f64,
    label: HyperBellLabel,
    ports: PortRecord,
    transcript: &'a [TranscriptEntry],
}

#[derive(Serialize)]
struct StateReport<'a> {
    input: HyperBellLabel,
    branches: Vec<BranchSummary<'a>>,
}

#[derive(Serialize)]
struct ClassifyBody<'a> {
    mode: &'a str,
    labels: Vec<String>,
    /// Rows: prepared label, columns: announced label.
    confusion: Vec<Vec<f64>>,
    identity: bool,
    states: Vec<StateReport<'a>>,
}

fn cmd_classify(cfg: &RunConfig) -> Result<(Vec<u8>, i32), Failure> {
    let hcfg = hbsa_config(cfg)?;
    let mut all_branches: Vec<(HyperBellLabel, Vec<HbsaBranch>)> = Vec::new();
    for label in HyperBellLabel::all() {
        all_branches.push((label, hbsa(&label.state(), (0, 1), &hcfg)?));
    }

    let mut confusion = vec![vec![0.0; 16]; 16];
    let mut shown: Vec<Vec<usize>> = Vec::new();
    for (i, (_, branches)) in all_branches.iter().enumerate() {
        if cfg.sample {
            let mut picked = Vec::new();
            for t in 0..cfg.trials {
                let mut rng = trial_rng(cfg.seed, stream(i as u64, t));
                let k = pick_weighted(branches.iter().map(|b| b.prob), &mut rng);
                confusion[i][branches[k].result.label.index()] += 1.0;
                picked.push(k);
            }
            shown.push(picked);
        } else {
            confusion[i] = label_probabilities(branches).to_vec();
            shown.push((0..branches.len()).collect());
        }
    }

    let identity = confusion.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, &x)| {
            if cfg.sample {
                (i == j) == (x > 0.0)
            } else {
                let target = if i == j { 1.0 } else { 0.0 };
                (x - target).abs() <= REPORT_TOL
            }
        })
    });
    // every branch of every input must agree with the prepared label
    let unanimous = all_branches
        .iter()
        .all(|(label, bs)| bs.iter().all(|b| b.result.label == *label));
    let code = if identity && unanimous { EXIT_OK } else { EXIT_CLAIM };

    let labels: Vec<String> = HyperBellLabel::all().map(|l| l.to_string()).collect();
    let bytes = match cfg.format {
        OutputFormat::Json => {
            let states = all_branches
                .iter()
                .zip(&shown)
                .map(|((input, branches), picks)| StateReport {
                    input: *input,
                    branches: picks
                        .iter()
                        .map(|&k| {
                            let b = &branches[k];
                            BranchSummary {
                                prob: b.prob,
                                label: b.result.label,
                                ports: b.result.ports,
                                transcript: &b.result.transcript,
                            }
                        })
                        .collect(),
                })
                .collect();
            json(
                cfg,
                "classify",
                ClassifyBody {
                    mode: mode_name(cfg),
                    labels: labels.clone(),
                    confusion: confusion.clone(),
                    identity,
                    states,
                },
            )?
        }
        OutputFormat::Csv => {
            let header: Vec<String> = std::iter::once("input".to_string())
                .chain(labels.iter().cloned())
                .collect();
            let rows: Vec<Vec<String>> = confusion
                .iter()
                .zip(&labels)
                .map(|(row, l)| {
                    std::iter::once(l.clone())
                        .chain(row.iter().map(|x| x.to_string()))
                        .collect()
                })
                .collect();
            csv_bytes(&header, &rows)?
        }
    };
    Ok((bytes, code))
}

fn mode_name(cfg: &RunConfig) -> &'static str {
    if cfg.sample {
        "sample"
    } else {
        "enumerate"
    }
}

#[derive(Serialize)]
struct TeleportRun {
    trial: u64,
    input: TeleportInput,
    prob_sum: f64,
    branches: Vec<TeleportBranch>,
}

#[derive(Serialize)]
struct TeleportBody<'a> {
    mode: &'a str,
    min_fidelity: f64,
    runs: Vec<TeleportRun>,
}

fn cmd_teleport(cfg: &RunConfig, args: &TeleportArgs) -> Result<(Vec<u8>, i32), Failure> {
    let hcfg = hbsa_config(cfg)?;
    let fixed = if args.random {
        None
    } else {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let balanced = [Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
        let [alpha, beta] = args.pol.unwrap_or(balanced);
        let [gamma, delta] = args.spat.unwrap_or(balanced);
        Some(TeleportInput::new(alpha, beta, gamma, delta)?)
    };
    let runs_needed = if fixed.is_some() && !cfg.sample { 1 } else { cfg.trials };

    let mut runs = Vec::new();
    for t in 0..runs_needed {
        let input = match fixed {
            Some(input) => input,
            None => TeleportInput::random(&mut trial_rng(cfg.seed, stream(0, t))),
        };
        let all = teleport(&input, &hcfg)?;
        let prob_sum: f64 = all.iter().map(|b| b.prob).sum();
        let branches = if cfg.sample {
            let mut rng = trial_rng(cfg.seed, stream(1, t));
            let k = pick_weighted(all.iter().map(|b| b.prob), &mut rng);
            vec![all[k].clone()]
        } else {
            all
        };
        runs.push(TeleportRun {
            trial: t,
            input,
            prob_sum,
            branches,
        });
    }

    let min_fidelity = runs
        .iter()
        .flat_map(|r| r.branches.iter().map(|b| b.fidelity))
        .fold(1.0, f64::min);
    let probs_ok = runs.iter().all(|r| {
        (r.prob_sum - 1.0).abs() <= REPORT_TOL
            && r.branches.iter().all(|b| (0.0..=1.0 + REPORT_TOL).contains(&b.prob))
    });
    let code = if min_fidelity >= 1.0 - REPORT_TOL && probs_ok {
        EXIT_OK
    } else {
        EXIT_CLAIM
    };

    let bytes = match cfg.format {
        OutputFormat::Json => json(
            cfg,
            "teleport",
            TeleportBody {
                mode: mode_name(cfg),
                min_fidelity,
                runs,
            },
        )?,
        OutputFormat::Csv => {
            let header: Vec<String> = ["trial", "label", "prob", "fidelity", "pol_ops", "spat_ops"]
                .map(String::from)
                .to_vec();
            let rows: Vec<Vec<String>> = runs
                .iter()
                .flat_map(|r| {
                    r.branches.iter().map(move |b| {
                        vec![
                            r.trial.to_string(),
                            b.label.to_string(),
                            b.prob.to_string(),
                            b.fidelity.to_string(),
                            op_names(b.correction.pol_ops.iter()),
                            op_names(b.correction.spat_ops.iter()),
                        ]
                    })
                })
                .collect();
            csv_bytes(&header, &rows)?
        }
    };
    Ok((bytes, code))
}

fn op_names<'a>(ops: impl Iterator<Item = &'a crate::elements::LocalUnitary>) -> String {
    ops.map(|u| u.name()).collect::<Vec<_>>().join(";")
}

#[derive(Serialize)]
struct SwapBody<'a> {
    mode: &'a str,
    prob_sum: f64,
    min_fidelity: f64,
    branches: Vec<SwapBranch>,
}

fn cmd_swap(cfg: &RunConfig) -> Result<(Vec<u8>, i32), Failure> {
    let hcfg = hbsa_config(cfg)?;
    let all = swap(&hcfg)?;
    let prob_sum: f64 = all.iter().map(|b| b.prob).sum();
    let branches = if cfg.sample {
        (0..cfg.trials)
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, stream(0, t));
                all[pick_weighted(all.iter().map(|b| b.prob), &mut rng)].clone()
            })
            .collect()
    } else {
        all
    };
    let min_fidelity = branches
        .iter()
        .map(|b| b.fidelity_to_phi_plus)
        .fold(1.0, f64::min);
    let code = if min_fidelity >= 1.0 - REPORT_TOL && (prob_sum - 1.0).abs() <= REPORT_TOL {
        EXIT_OK
    } else {
        EXIT_CLAIM
    };
    let bytes = match cfg.format {
        OutputFormat::Json => json(
            cfg,
            "swap",
            SwapBody {
                mode: mode_name(cfg),
                prob_sum,
                min_fidelity,
                branches,
            },
        )?,
        OutputFormat::Csv => {
            let header: Vec<String> = ["bc_label", "prob", "fidelity_to_phi_plus", "pol_ops", "spat_ops"]
                .map(String::from)
                .to_vec();
            let rows: Vec<Vec<String>> = branches
                .iter()
                .map(|b| {
                    vec![
                        b.bc_label.to_string(),
                        b.prob.to_string(),
                        b.fidelity_to_phi_plus.to_string(),
                        op_names(b.correction.pol_ops.iter()),
                        op_names(b.correction.spat_ops.iter()),
                    ]
                })
                .collect();
            csv_bytes(&header, &rows)?
        }
    };
    Ok((bytes, code))
}

/// One grid point of the noise sweep. The two candidates are probe phases
/// `0` (odd parity) and `theta` (even parity).
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub theta: f64,
    /// Distance between the two quadrature means.
    pub separation: f64,
    #[serde(flatten)]
    pub estimate: ErrorRate,
    pub analytic_error: f64,
}

#[derive(Serialize)]
struct SweepBody {
    records: Vec<SweepRecord>,
}

/// Error-rate estimates for every `(alpha, theta)` grid point.
pub fn noise_sweep(
    thetas: &[f64],
    alphas: &[f64],
    trials: u64,
    seed: u64,
) -> crate::error::Result<Vec<SweepRecord>> {
    if thetas.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidConfig("empty sweep range".into()));
    }
    let mut records = Vec::new();
    for (ai, &alpha) in alphas.iter().enumerate() {
        for (ti, &theta) in thetas.iter().enumerate() {
            let kerr = KerrConfig::new(theta, alpha)?;
            let point = (ai * thetas.len() + ti) as u64;
            let candidates = [0.0, theta];
            let estimate = homodyne_error_rate(&candidates, &kerr, trials, seed, stream(point, 0))?;
            let separation = (quadrature_mean(0.0, alpha) - quadrature_mean(theta, alpha)).abs();
            records.push(SweepRecord {
                alpha,
                theta,
                separation,
                estimate,
                analytic_error: analytic_two_gaussian_error(separation),
            });
        }
    }
    Ok(records)
}

fn cmd_noise_sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<(Vec<u8>, i32), Failure> {
    let thetas = args.theta_range.clone().map_or_else(|| vec![cfg.theta], |r| r.0);
    let alphas = args.alpha_range.clone().map_or_else(|| vec![cfg.alpha], |r| r.0);
    let records = noise_sweep(&thetas, &alphas, cfg.trials, cfg.seed)?;
    let bytes = match cfg.format {
        OutputFormat::Json => json(cfg, "noise-sweep", SweepBody { records })?,
        OutputFormat::Csv => {
            let header: Vec<String> = [
                "alpha",
                "theta",
                "separation",
                "trials",
                "errors",
                "error_rate",
                "std_error",
                "analytic_error",
            ]
            .map(String::from)
            .to_vec();
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    vec![
                        r.alpha.to_string(),
                        r.theta.to_string(),
                        r.separation.to_string(),
                        r.estimate.trials.to_string(),
                        r.estimate.errors.to_string(),
                        r.estimate.rate.to_string(),
                        r.estimate.std_error.to_string(),
                        r.analytic_error.to_string(),
                    ]
                })
                .collect();
            csv_bytes(&header, &rows)?
        }
    };
    Ok((bytes, EXIT_OK))
}
