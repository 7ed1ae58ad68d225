//! `wmodes`: scans, mode profiles, Picard runs and stability certificates for
//! the self-similar wave map `f0(ρ) = 2 arctan ρ`.

mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use wavemap_modes::connection::{
    miss, phi0_profile, phi1_profile, scan_real, ConnectionResult, ShootingConfig,
};
use wavemap_modes::odecore::CoefficientFault;
use wavemap_modes::picard::{
    contraction_radius_one, contraction_radius_zero, picard_phi0_with, picard_phi1_with,
    ContractionEstimate, PicardOptions, PicardRun,
};
use wavemap_modes::stability::{full_certificate, CertificateConfig};
use wavemap_modes::{Complex64, ModeError};

use config::RunConfig;
use output::{write_json, write_profile, write_scan_csv, Envelope};

const SCAN_HELP: &str = "\
Output files in --out:
  scan.csv   one row per grid point with columns
               lambda          grid value of lambda (integers other than 1 are nudged by 1e-9)
               miss            Wronskian of phi0 and phi1 at the matching point, normalized
                               by (|phi0|+|phi0'|)(|phi1|+|phi1'|)
               abel_wronskian  Wronskian times rho^2 (1-rho^2)^lambda, independent of the matching point
               classification EigenvalueCandidate, NoEigenvalue or Indeterminate
               error           message if the point could not be evaluated, else empty
  scan.json  full report with refined roots, sign changes and the run configuration

The exit status does not depend on whether roots were found.";

#[derive(Parser, Debug)]
#[command(
    name = "wmodes",
    version,
    about = "Mode stability analysis for the self-similar wave map 2 arctan(rho)"
)]
#[command(
    after_help = "Exit status: 0 success, 1 certificate failed, 2 invalid configuration, 3 computation failed.\n\
Every flag can also be set through an environment variable WMODES_<FLAG>, e.g. WMODES_MATCH_POINT."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan real lambda for zeros of the connection miss
    #[command(after_help = SCAN_HELP)]
    Scan {
        #[arg(long, env = "WMODES_LO", allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, env = "WMODES_HI", allow_negative_numbers = true)]
        hi: f64,
        /// Grid points in [lo, hi]
        #[arg(long, env = "WMODES_N", default_value_t = 101)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Write phi0 and phi1 profiles for one lambda
    #[command(
        after_help = "Output files in --out:\n  phi0.dat, phi1.dat  columns: rho u_re u_im du_re du_im\n  mode.json           connection miss at the matching point"
    )]
    Mode {
        /// Complex lambda such as 0.5 or 0.5+0.2i; Re lambda must be positive
        #[arg(allow_hyphen_values = true)]
        lambda: Complex64,
        /// Samples per profile
        #[arg(long, env = "WMODES_N", default_value_t = 201)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the integral equations near both endpoints by fixed-point iteration
    #[command(
        after_help = "Output files in --out:\n  picard_phi0.dat, picard_phi1.dat  columns: rho u_re u_im du_re du_im\n  picard.json                       contraction estimates, iteration history and agreement with shooting\n\n--tol is the fixed-point stopping tolerance here (default 1e-12)."
    )]
    Picard {
        #[arg(allow_hyphen_values = true)]
        lambda: Complex64,
        #[command(flatten)]
        common: Common,
    },
    /// Run every stability check and write a certificate
    #[command(
        after_help = "Output files in --out:\n  certificate.json  every check with pass flag, detail and failure location"
    )]
    Certify {
        /// Restrict to one scan range lo:hi instead of the default ranges
        #[arg(long, env = "WMODES_RANGE", value_parser = parse_range)]
        range: Option<(f64, f64)>,
        /// Grid points for --range
        #[arg(long, env = "WMODES_N", default_value_t = 100)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Matching point in (0, 1)
    #[arg(long, env = "WMODES_MATCH_POINT", default_value_t = 0.5)]
    match_point: f64,
    /// Integrator relative tolerance (absolute tolerance is 1% of it)
    #[arg(long, env = "WMODES_TOL")]
    tol: Option<f64>,
    /// Worker threads; 0 uses all cores
    #[arg(long, env = "WMODES_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Output directory
    #[arg(long, env = "WMODES_OUT", default_value = "wmodes-out")]
    out: PathBuf,
    #[arg(long, env = "WMODES_FAULT", hide = true)]
    fault: Option<Fault>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Fault {
    FlipSpectralTerm,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

enum Failure {
    Config(Vec<String>),
    Compute(String),
    Certificate,
}

impl From<ModeError> for Failure {
    fn from(e: ModeError) -> Self {
        match e {
            ModeError::Config(m) => Failure::Config(vec![m]),
            e => Failure::Compute(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(format!("writing output: {e}"))
    }
}

fn run_config(command: &str, common: &Common, n: usize) -> RunConfig {
    let mut shooting = ShootingConfig {
        match_point: common.match_point,
        workers: common.workers,
        fault: common
            .fault
            .map(|Fault::FlipSpectralTerm| CoefficientFault::FlipSpectralTerm),
        ..ShootingConfig::default()
    };
    let mut picard_tol = None;
    if let Some(t) = common.tol {
        if command == "picard" {
            picard_tol = Some(t);
        } else {
            shooting.rtol = t;
            shooting.atol = t * 1e-2;
        }
    }
    RunConfig {
        command: command.to_string(),
        lambda: None,
        lo: None,
        hi: None,
        n,
        shooting,
        picard_tol,
        out: common.out.clone(),
        workers: common.workers,
    }
}

fn prepare(cfg: &RunConfig) -> Result<(), Failure> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(Failure::Config(problems));
    }
    fs::create_dir_all(&cfg.out)?;
    Ok(())
}

fn cmd_scan(cfg: RunConfig) -> Result<(), Failure> {
    prepare(&cfg)?;
    let (lo, hi) = (cfg.lo.unwrap_or_default(), cfg.hi.unwrap_or_default());
    let report = scan_real(lo, hi, cfg.n, &cfg.shooting)?;
    write_scan_csv(&cfg.out.join("scan.csv"), &report)?;
    eprintln!(
        "scan [{lo}, {hi}] n={}: {} root(s){}, {} failed point(s)",
        cfg.n,
        report.root_count(),
        report
            .roots
            .iter()
            .map(|r| format!(" {:.10}", r.lambda))
            .collect::<String>(),
        report.metadata.failures
    );
    let failures = report.metadata.failures;
    write_json(&cfg.out.join("scan.json"), &Envelope::new(cfg, report))?;
    if failures > 0 {
        return Err(Failure::Compute(format!(
            "{failures} grid point(s) could not be evaluated"
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ModePayload {
    connection: ConnectionResult,
    phi0_integrator_evaluations: usize,
    phi1_integrator_evaluations: usize,
}

/// Samples `k/(n-1)`, dropping the endpoint where the profile is singular.
fn unit_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn cmd_mode(cfg: RunConfig) -> Result<(), Failure> {
    prepare(&cfg)?;
    let lambda = cfg.lambda.unwrap_or_default();
    let grid = unit_grid(cfg.n);
    let left = &grid[..grid.len() - 1];
    let mut right: Vec<f64> = grid[1..].to_vec();
    right.reverse();

    let (s0, st0) = phi0_profile(lambda, left, &cfg.shooting)?;
    let (mut s1, st1) = phi1_profile(lambda, &right, &cfg.shooting)?;
    right.reverse();
    s1.reverse();
    let split = |s: &[[Complex64; 2]]| -> (Vec<Complex64>, Vec<Complex64>) {
        s.iter().map(|y| (y[0], y[1])).unzip()
    };
    let (u0, du0) = split(&s0);
    let (u1, du1) = split(&s1);
    write_profile(&cfg.out.join("phi0.dat"), left, &u0, &du0)?;
    write_profile(&cfg.out.join("phi1.dat"), &right, &u1, &du1)?;

    let connection = miss(lambda, &cfg.shooting)?;
    eprintln!(
        "lambda = {lambda}: normalized miss {:.3e} ({:?})",
        connection.normalized_miss.norm(),
        connection.classification
    );
    let payload = ModePayload {
        connection,
        phi0_integrator_evaluations: st0.evaluations,
        phi1_integrator_evaluations: st1.evaluations,
    };
    write_json(&cfg.out.join("mode.json"), &Envelope::new(cfg, payload))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct PicardSide {
    estimate: ContractionEstimate,
    run: PicardRun,
    /// Largest `|u_picard - u_shooting|` over the grid.
    shooting_difference: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PicardPayload {
    zero: PicardSide,
    one: PicardSide,
}

fn max_difference(run: &PicardRun, shot: &[[Complex64; 2]]) -> f64 {
    run.u
        .iter()
        .zip(shot)
        .map(|(u, s)| (u - s[0]).norm())
        .fold(0.0, f64::max)
}

fn cmd_picard(cfg: RunConfig) -> Result<(), Failure> {
    prepare(&cfg)?;
    let lambda = cfg.lambda.unwrap_or_default();
    let opts = PicardOptions::with_tol(cfg.picard_tol.unwrap_or(PicardOptions::default().tol));
    let pencil = cfg.shooting.pencil(lambda);

    let e0 = contraction_radius_zero(lambda)?;
    let r0 = picard_phi0_with(&pencil, e0.endpoint, &opts)?;
    let (s0, _) = phi0_profile(lambda, &r0.nodes, &cfg.shooting)?;
    let e1 = contraction_radius_one(lambda)?;
    let r1 = picard_phi1_with(&pencil, e1.distance, &opts)?;
    let (s1, _) = phi1_profile(lambda, &r1.nodes, &cfg.shooting)?;

    write_profile(&cfg.out.join("picard_phi0.dat"), &r0.nodes, &r0.u, &r0.du)?;
    write_profile(&cfg.out.join("picard_phi1.dat"), &r1.nodes, &r1.u, &r1.du)?;
    let zero = PicardSide {
        shooting_difference: max_difference(&r0, &s0),
        estimate: e0,
        run: r0,
    };
    let one = PicardSide {
        shooting_difference: max_difference(&r1, &s1),
        estimate: e1,
        run: r1,
    };
    eprintln!(
        "rho0 = {}: {} iterations, shooting difference {:.2e}; 1 - rho1 = {:.3e}: {} iterations, shooting difference {:.2e}",
        zero.estimate.endpoint,
        zero.run.iterations,
        zero.shooting_difference,
        one.estimate.distance,
        one.run.iterations,
        one.shooting_difference
    );
    let converged = zero.run.converged && one.run.converged;
    write_json(
        &cfg.out.join("picard.json"),
        &Envelope::new(cfg, PicardPayload { zero, one }),
    )?;
    if !converged {
        return Err(Failure::Compute(
            "fixed-point iteration did not converge".into(),
        ));
    }
    Ok(())
}

fn cmd_certify(cfg: RunConfig) -> Result<(), Failure> {
    prepare(&cfg)?;
    let cc = match (cfg.lo, cfg.hi) {
        (Some(lo), Some(hi)) => CertificateConfig::restricted(lo, hi, cfg.n, cfg.shooting),
        _ => CertificateConfig {
            shooting: cfg.shooting,
            ..CertificateConfig::default()
        },
    };
    let report = full_certificate(&cc)?;
    for c in report.failures() {
        eprintln!(
            "FAIL {}: {}",
            c.name,
            c.error.as_deref().unwrap_or(&c.detail)
        );
    }
    eprintln!(
        "{} of {} checks passed",
        report.checks.len() - report.failures().count(),
        report.checks.len()
    );
    let (pass, errors) = (report.pass, report.has_errors());
    write_json(
        &cfg.out.join("certificate.json"),
        &Envelope::new(cfg, report),
    )?;
    if errors {
        Err(Failure::Compute("some checks could not be computed".into()))
    } else if !pass {
        Err(Failure::Certificate)
    } else {
        Ok(())
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let (cfg, run): (RunConfig, fn(RunConfig) -> Result<(), Failure>) = match cli.command {
        Command::Scan { lo, hi, n, common } => {
            let mut c = run_config("scan", &common, n);
            (c.lo, c.hi) = (Some(lo), Some(hi));
            (c, cmd_scan)
        }
        Command::Mode { lambda, n, common } => {
            let mut c = run_config("mode", &common, n);
            c.lambda = Some(lambda);
            (c, cmd_mode)
        }
        Command::Picard { lambda, common } => {
            let mut c = run_config("picard", &common, 2);
            c.lambda = Some(lambda);
            (c, cmd_picard)
        }
        Command::Certify { range, n, common } => {
            let mut c = run_config("certify", &common, n);
            if let Some((lo, hi)) = range {
                (c.lo, c.hi) = (Some(lo), Some(hi));
            }
            (c, cmd_certify)
        }
    };
    if cfg.workers == 0 {
        return run(cfg);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Failure::Compute(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Certificate) => ExitCode::from(1),
        Err(Failure::Config(problems)) => {
            for p in problems {
                eprintln!("error: {p}");
            }
            ExitCode::from(2)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
