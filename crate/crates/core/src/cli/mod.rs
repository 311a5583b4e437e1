//! Command-line front end. Exit codes: `0` success, `1` usage or input
//! error, `2` analysis-level failure (the report is still written).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{self, io as grid_io, DomainMask, GridDistribution, GridShape};
use crate::logdomain::DEFAULT_DENSITY;
use crate::param::{
    self, check_weight_condition, pseudoconcavity_test, ro_membership, IndexConfig, ParamExpr, PseudoconcavityConfig,
    PseudoconcavityReport, RoConfig, RoReport, WeightCondition, WeightConfig,
};
use crate::{spectral, xlab};

const MAX_NORM_POINTS: usize = 1 << 22;

#[derive(Debug, Parser)]
#[command(
    name = "hormander",
    version,
    about = "RO-varying parameters, interpolation and Hörmander norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// RO certificate, indices, pseudoconcavity and weight condition of a parameter
    Analyze(AnalyzeArgs),
    /// Hörmander (or quotient) norm of a grid distribution
    Norm(NormArgs),
    /// Tables for the oscillating slowly varying parameter
    Counterexample(CounterArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Common {
    /// Output path (written atomically); standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Parameter expression: inline JSON or a file path
    #[arg(long)]
    param: String,
    #[arg(long, allow_negative_numbers = true)]
    s0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    s1: Option<f64>,
    /// Upper end of the range, a number or `exp:<log t_max>`
    #[arg(long, default_value = "1e8")]
    t_max: String,
    /// Grid points per decade
    #[arg(long, default_value_t = DEFAULT_DENSITY)]
    density: f64,
    /// Cap on admissible constants
    #[arg(long, default_value_t = 1e6)]
    cap: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct NormArgs {
    /// Distribution file (binary or JSON); random samples when absent
    input: Option<PathBuf>,
    /// Parameter expression: inline JSON or a file path (default phi = 1)
    #[arg(long)]
    param: Option<String>,
    #[arg(long = "grid-n", default_value_t = 1)]
    grid_n: usize,
    #[arg(long = "grid-N", default_value_t = 64)]
    grid_points: usize,
    #[arg(long = "box-L", default_value_t = std::f64::consts::TAU)]
    box_length: f64,
    /// Mask file; computes the quotient norm over the masked points
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Also compare with the interpolation norm between H^(s0) and H^(s1)
    #[arg(long, num_args = 2, value_names = ["S0", "S1"], allow_negative_numbers = true)]
    identity_check: Option<Vec<f64>>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct CounterArgs {
    #[arg(long, default_value_t = 5)]
    k_max: u32,
    #[arg(long, default_value_t = DEFAULT_DENSITY)]
    density: f64,
    #[command(flatten)]
    common: Common,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match &cli.command {
        Command::Analyze(a) => analyze(a, out, err),
        Command::Norm(a) => norm(a, out, err),
        Command::Counterexample(a) => counterexample(a, out, err),
    }));
    match result {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
        Err(_) => {
            let _ = writeln!(err, "error: internal failure");
            1
        }
    }
}

fn parse_param(src: &str) -> Result<ParamExpr> {
    let text = if src.trim_start().starts_with('{') {
        src.to_owned()
    } else {
        std::fs::read_to_string(src).map_err(|e| Error::invalid(format!("cannot read parameter file {src}: {e}")))?
    };
    ParamExpr::from_json(&text)
}

/// `1e8` or `exp:18.42` to `log t_max`.
fn parse_log_t_max(s: &str) -> Result<f64> {
    let x = if let Some(rest) = s.strip_prefix("exp:") {
        rest.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad t_max {s}")))?
    } else {
        let t: f64 = s.trim().parse().map_err(|_| Error::invalid(format!("bad t_max {s}")))?;
        t.ln()
    };
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid(format!("t_max = {s} must exceed 1")));
    }
    Ok(x)
}

fn check_common(c: &Common) -> Result<()> {
    if !(c.tol > 0.0) || !c.tol.is_finite() {
        return Err(Error::invalid("tolerance must be positive"));
    }
    Ok(())
}

fn check_density(d: f64) -> Result<()> {
    if !(d >= 8.0) || !d.is_finite() {
        return Err(Error::invalid(format!(
            "density must be at least 8 points per decade, got {d}"
        )));
    }
    Ok(())
}

/// Writes via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn emit(common: &Common, text: &str, out: &mut dyn Write) -> Result<()> {
    match &common.out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct AnalyzeConfig<'a> {
    command: &'static str,
    param: &'a ParamExpr,
    log_t_max: f64,
    density: f64,
    samples: usize,
    cap: f64,
    s0: f64,
    s1: f64,
    exponents_from_certificate: bool,
    tol: f64,
    format: Format,
    seed: u64,
}

#[derive(Serialize)]
struct PseudoconcavitySection {
    s0: f64,
    s1: f64,
    report: PseudoconcavityReport,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    config: AnalyzeConfig<'a>,
    ro: RoReport,
    pseudoconcavity: Option<PseudoconcavitySection>,
    weight_condition: Option<WeightCondition>,
    failures: Vec<String>,
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    check_common(&a.common)?;
    check_density(a.density)?;
    if a.common.format != Format::Json {
        return Err(Error::invalid("analyze writes JSON only"));
    }
    if !(a.cap >= 1.0) {
        return Err(Error::invalid("cap must be at least 1"));
    }
    let phi = parse_param(&a.param)?;
    let log_t_max = parse_log_t_max(&a.t_max)?;
    if log_t_max < std::f64::consts::LN_10 {
        return Err(Error::invalid("t_max must be at least 10"));
    }
    let samples = ((log_t_max / std::f64::consts::LN_10 * a.density).ceil() as usize + 1).max(64);
    let cfg = RoConfig {
        cap: a.cap,
        index: IndexConfig {
            density: a.density,
            cap: a.cap,
            ..IndexConfig::default()
        },
        ..RoConfig::default()
    };
    let ro = ro_membership(&phi, log_t_max, samples, &cfg)?;
    let mut failures = Vec::new();
    if !ro.is_member {
        failures.push("ro_membership".to_owned());
    }

    // default exponents bracket the certificate by at least one unit
    let from_cert = a.s0.is_none() || a.s1.is_none();
    let s0 = a.s0.unwrap_or(ro.s0.floor() - 1.0);
    let s1 = a.s1.unwrap_or(ro.s1.ceil() + 1.0);
    let pseudoconcavity = if ro.is_member {
        let psi = param::psi_from_phi(&phi, s0, s1)?;
        let pc_cfg = PseudoconcavityConfig {
            density: a.density,
            cap: a.cap,
            extra_log_points: Vec::new(),
        };
        let report = pseudoconcavity_test(&psi, 1.0, (s1 - s0) * log_t_max, &pc_cfg)?;
        if !report.passes {
            failures.push("pseudoconcavity".to_owned());
        }
        Some(PseudoconcavitySection { s0, s1, report })
    } else {
        param::psi_from_phi(&phi, s0, s1)?;
        None
    };
    let weight_condition = if ro.is_member {
        Some(check_weight_condition(
            &phi,
            &ro,
            &WeightConfig {
                seed: a.common.seed,
                ..WeightConfig::default()
            },
        )?)
    } else {
        None
    };

    let report = AnalyzeReport {
        config: AnalyzeConfig {
            command: "analyze",
            param: &phi,
            log_t_max,
            density: a.density,
            samples,
            cap: a.cap,
            s0,
            s1,
            exponents_from_certificate: from_cert,
            tol: a.common.tol,
            format: a.common.format,
            seed: a.common.seed,
        },
        ro,
        pseudoconcavity,
        weight_condition,
        failures,
    };
    emit(&a.common, &to_json(&report)?, out)?;
    if report.failures.is_empty() {
        Ok(0)
    } else {
        writeln!(err, "analysis failed: {}", report.failures.join(", "))?;
        Ok(2)
    }
}

#[derive(Serialize)]
struct NormConfigEcho<'a> {
    command: &'static str,
    param: &'a ParamExpr,
    input: Option<String>,
    mask: Option<String>,
    grid: &'a GridShape,
    identity_check: Option<[f64; 2]>,
    tol: f64,
    seed: u64,
}

#[derive(Serialize)]
struct NormReport<'a> {
    config: NormConfigEcho<'a>,
    norm: f64,
    quotient: bool,
    identity_discrepancy: Option<f64>,
}

fn norm(a: &NormArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    check_common(&a.common)?;
    let phi = match &a.param {
        Some(s) => parse_param(s)?,
        None => ParamExpr::constant(1.0),
    };
    let u = match &a.input {
        Some(p) => grid_io::load_distribution(p)?,
        None => {
            if !(1..=3).contains(&a.grid_n) {
                return Err(Error::invalid(format!(
                    "grid dimension must be 1, 2 or 3, got {}",
                    a.grid_n
                )));
            }
            let total = (a.grid_points as u128).pow(a.grid_n as u32);
            if total > MAX_NORM_POINTS as u128 {
                return Err(Error::invalid(format!(
                    "grid of {total} points exceeds the cap {MAX_NORM_POINTS}"
                )));
            }
            let shape = GridShape::new(vec![a.grid_points; a.grid_n], vec![a.box_length; a.grid_n])?;
            GridDistribution::random(shape, a.common.seed)?
        }
    };
    if u.grid().len() > MAX_NORM_POINTS {
        return Err(Error::invalid(format!(
            "grid exceeds the cap of {MAX_NORM_POINTS} points"
        )));
    }
    let (value, quotient) = match &a.mask {
        Some(p) => {
            let mask: DomainMask = grid_io::load_mask(p)?;
            if mask.grid != *u.grid() {
                return Err(Error::invalid("mask and distribution live on different grids"));
            }
            (grid::quotient_norm(&mask.restrict(&u)?, &mask, &phi)?, true)
        }
        None => (grid::hormander_norm(&u, &phi)?, false),
    };
    let identity = match &a.identity_check {
        Some(v) => Some(spectral::norm_identity_check(&u, &phi, v[0], v[1])?),
        None => None,
    };

    let mut text = format!("norm {value:.14e}\n");
    if let Some(d) = identity {
        text.push_str(&format!("identity_discrepancy {d:.14e}\n"));
    }
    out.write_all(text.as_bytes())?;
    if let Some(path) = &a.common.out {
        let report = NormReport {
            config: NormConfigEcho {
                command: "norm",
                param: &phi,
                input: a.input.as_ref().map(|p| p.display().to_string()),
                mask: a.mask.as_ref().map(|p| p.display().to_string()),
                grid: u.grid(),
                identity_check: a.identity_check.as_ref().map(|v| [v[0], v[1]]),
                tol: a.common.tol,
                seed: a.common.seed,
            },
            norm: value,
            quotient,
            identity_discrepancy: identity,
        };
        let body = match a.common.format {
            Format::Json => to_json(&report)?,
            Format::Csv => {
                let mut s = String::from("quantity,value\n");
                s.push_str(&format!("norm,{value}\n"));
                if let Some(d) = identity {
                    s.push_str(&format!("identity_discrepancy,{d}\n"));
                }
                s
            }
        };
        write_atomic(path, body.as_bytes())?;
    }
    match identity {
        Some(d) if d > a.common.tol => {
            writeln!(
                err,
                "identity check failed: discrepancy {d:e} above tolerance {:e}",
                a.common.tol
            )?;
            Ok(2)
        }
        _ => Ok(0),
    }
}

#[derive(Serialize)]
struct CounterReport {
    config: CounterConfigEcho,
    witnesses: Vec<xlab::WitnessRow>,
    slow_variation: Vec<xlab::DeviationRow>,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct CounterConfigEcho {
    command: &'static str,
    k_max: u32,
    density: f64,
    format: Format,
    seed: u64,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn counterexample(a: &CounterArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    check_common(&a.common)?;
    check_density(a.density)?;
    if a.k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let witnesses = xlab::non_interpolation_demo(a.k_max)?;
    let xs = [1e2, 1e3, 1e4, 1e5];
    let slow = xlab::slow_variation_profile(&[1.25, 1.5, 2.0], &xs)?;
    let mut checks = Vec::new();
    let mut check = |name: &'static str, passed: bool, detail: String| checks.push(Check { name, passed, detail });

    let bounds_hold = (1..=a.k_max)
        .map(xlab::ratio_log_lower_bound)
        .collect::<Result<Vec<_>>>()?;
    check(
        "ratio_bound",
        bounds_hold.iter().all(|b| b.holds),
        format!("bound(1) = {}", bounds_hold[0].bound),
    );
    check(
        "witness_above_bound",
        witnesses.iter().all(|w| w.witness >= w.bound - 1e-9),
        format!("k = 1..{}", a.k_max),
    );
    check(
        "witness_increasing",
        witnesses.windows(2).all(|w| w[1].witness > w[0].witness),
        format!("last witness {}", witnesses.last().map(|w| w.witness).unwrap_or(0.0)),
    );
    check(
        "slow_variation_decreasing",
        slow.windows(2).all(|w| w[1].deviation < w[0].deviation),
        format!("deviation at x = 1e5: {}", slow[3].deviation),
    );
    let indices = param::matuszewska_indices(
        &ParamExpr::Appendix,
        1e4,
        &IndexConfig {
            density: a.density,
            ..IndexConfig::default()
        },
    )?;
    check(
        "indices_vanish",
        indices.sigma0.abs() <= 0.1 && indices.sigma1.abs() <= 0.1,
        format!("({}, {}) at log t_max = 1e4", indices.sigma0, indices.sigma1),
    );
    // grid through the first pair, both pair points included
    let first = xlab::sequence_pair(1)?;
    let pc_cfg = PseudoconcavityConfig {
        density: a.density,
        cap: 1e6,
        extra_log_points: vec![first.log_t_k, first.log_s_k],
    };
    let mut worst = f64::INFINITY;
    for r in [1.0, 10.0, 1e3] {
        worst = worst.min(pseudoconcavity_test(&ParamExpr::Appendix, r, first.log_s_k, &pc_cfg)?.log_c_best);
    }
    check(
        "not_pseudoconcave",
        worst >= 52.0,
        format!("min log c_best over r = {worst}"),
    );
    let mut finite = true;
    for log_t_max in [10.0, 100.0, 1e4] {
        finite &= grid::embedding_scan(&ParamExpr::Appendix, 0.0, 1.0, log_t_max, a.density, 1e6)?.finite;
    }
    check("embedding_constants_finite", finite, "(s0, s1) = (0, 1)".into());
    let pos = xlab::positive_side_check(0.5, 200.0, &PseudoconcavityConfig::default())?;
    check(
        "interpolation_for_shifted_couple",
        pos.holds,
        format!("eps = 0.5, c_best = {}", pos.pseudoconcavity.c_best),
    );

    let report = CounterReport {
        config: CounterConfigEcho {
            command: "counterexample",
            k_max: a.k_max,
            density: a.density,
            format: a.common.format,
            seed: a.common.seed,
        },
        witnesses,
        slow_variation: slow,
        checks,
    };
    match (a.common.format, &a.common.out) {
        (Format::Csv, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            write_atomic(
                &dir.join("witnesses.csv"),
                xlab::witness_csv(&report.witnesses).as_bytes(),
            )?;
            write_atomic(
                &dir.join("slow_variation.csv"),
                xlab::profile_csv(&report.slow_variation).as_bytes(),
            )?;
        }
        (Format::Csv, None) => {
            let text = format!(
                "{}\n{}",
                xlab::witness_csv(&report.witnesses),
                xlab::profile_csv(&report.slow_variation)
            );
            out.write_all(text.as_bytes())?;
        }
        (Format::Json, _) => emit(&a.common, &to_json(&report)?, out)?,
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        writeln!(err, "failed checks: {}", failed.join(", "))?;
        Ok(2)
    }
}
