//! Command-line front end: catalog spectra, counting reports, Weyl diagnostics,
//! eigenvalue-sum fuzzing and discrete oracles, written as CSV or JSON.

mod descriptor;

pub use descriptor::{parse_descriptor, DescriptorError};

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cone_spectra::asymptotics::{limit_estimate, liminf_estimate};
use cone_spectra::cone::{
    counting_function, counting_report, coverage_for_growth, eigenvalue_growth_target, weyl_target,
    ConeGeometry,
};
use cone_spectra::energy::{eigensum_campaign, write_json_lines, FuzzConfig, FuzzRecord};
use cone_spectra::oracle::{build_circle, build_icosphere, lowest_eigenvalues, spectrum_match};
use cone_spectra::spectra::{self, CrossSection, Spectrum};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "CONE_SPECTRA_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportThresholds {
    /// Relative tolerance on `N(λ)/λ^{(n-1)/2}` at `lambda_max`.
    pub weyl: f64,
    /// Relative tolerance on `S_d/d^n` at `d_max`.
    pub ratio_sum: f64,
}

impl Default for ReportThresholds {
    fn default() -> Self {
        ReportThresholds {
            weyl: 0.02,
            ratio_sum: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Spectrum {
        cross_section: CrossSection,
        lambda_max: f64,
    },
    Hd {
        cone: CrossSection,
        d_max: u64,
    },
    Weyl {
        cross_section: CrossSection,
        lambda_max: f64,
        points: usize,
    },
    GramCheck {
        cone: CrossSection,
        dim: Option<usize>,
        trials: usize,
        seed: u64,
    },
    Oracle {
        cross_section: CrossSection,
        level: u32,
        points: usize,
        count: usize,
        tolerance: f64,
        mesh: Option<PathBuf>,
    },
    Report {
        cone: CrossSection,
        d_max: u64,
        lambda_max: f64,
        trials: usize,
        seed: u64,
        thresholds: ReportThresholds,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: Output,
}

/// Failure of a CLI invocation, rendered as `error:<category>: <message>`.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(DescriptorError),
    Core(cone_spectra::Error),
    Io(io::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Core(e) => e.category(),
            CliError::Io(_) => "io",
        }
    }

    /// Single-line rendering with the machine-readable prefix.
    pub fn line(&self) -> String {
        let msg = match self {
            CliError::Usage(m) => m.clone(),
            CliError::Parse(e) => e.to_string(),
            CliError::Core(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        };
        let flat = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        format!("error:{}: {flat}", self.category())
    }
}

impl From<cone_spectra::Error> for CliError {
    fn from(e: cone_spectra::Error) -> Self {
        match e {
            cone_spectra::Error::Io(io) => CliError::Io(io),
            other => CliError::Core(other),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "cone-spectra", version, about = "Spectral counting on metric cones")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Neumann spectrum of a catalog cross-section up to an eigenvalue bound.
    Spectrum {
        #[arg(short = 'x', long)]
        cross_section: String,
        #[arg(long)]
        lambda_max: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Harmonic growth counts h_d and their normalised ratios for d = 1..=d_max.
    Hd {
        #[arg(short = 'c', long)]
        cone: String,
        #[arg(long)]
        d_max: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Weyl ratios on log-spaced eigenvalue bounds up to lambda_max.
    Weyl {
        #[arg(short = 'x', long)]
        cross_section: String,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Randomized checks of the eigenvalue-sum inequality, one JSON line per trial.
    GramCheck {
        /// Cone dimension; selects the Euclidean cone when --cone is absent.
        #[arg(long)]
        n: Option<usize>,
        #[arg(short = 'c', long)]
        cone: Option<String>,
        /// Subspace dimension; random per trial when absent.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Discrete Laplacian eigenvalues matched against the analytic spectrum.
    Oracle {
        #[arg(short = 'x', long, default_value = "sphere:m=2")]
        cross_section: String,
        /// Icosphere refinement level.
        #[arg(long, default_value_t = 4)]
        level: u32,
        /// Number of circle sample points.
        #[arg(long, default_value_t = 2048)]
        points: usize,
        /// Number of eigenvalues to compute.
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
        /// Writes the ASCII mesh dump here.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Counting, Weyl and fuzzing verdicts for one cone as a single JSON document.
    Report {
        #[arg(short = 'c', long)]
        cone: String,
        #[arg(long, default_value_t = 1000)]
        d_max: u64,
        #[arg(long, default_value_t = 1e6)]
        lambda_max: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0.02)]
        weyl_tolerance: f64,
        #[arg(long, default_value_t = 0.005)]
        sum_tolerance: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn descriptor(text: &str) -> CliResult<CrossSection> {
    parse_descriptor(text).map_err(CliError::Parse)
}

fn output(out: OutArgs, default: Format, allowed: &[Format]) -> CliResult<Output> {
    let format = out.format.unwrap_or(default);
    if !allowed.contains(&format) {
        return Err(CliError::Usage(format!(
            "format {format:?} is not available for this command"
        )));
    }
    Ok(Output {
        path: out.out,
        format,
    })
}

fn euclidean(n: usize) -> CliResult<CrossSection> {
    match n {
        0 | 1 => Err(CliError::Usage(format!("cone dimension must be >= 2, got {n}"))),
        2 => Ok(CrossSection::Circle {
            circumference: std::f64::consts::TAU,
        }),
        _ => Ok(CrossSection::Sphere {
            m: n - 1,
            radius: 1.0,
        }),
    }
}

impl RunConfig {
    /// Builds a configuration from command-line arguments (program name first).
    ///
    /// Help and version requests come back as `Err(Ok(text))`.
    pub fn from_args<I, T>(args: I) -> std::result::Result<RunConfig, std::result::Result<String, CliError>>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = match Cli::try_parse_from(args) {
            Ok(c) => c,
            Err(e) => {
                use clap::error::ErrorKind;
                return Err(match e.kind() {
                    ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(e.to_string()),
                    _ => Err(CliError::Usage(first_line(&e.to_string()))),
                });
            }
        };
        Self::from_cli(cli).map_err(Err)
    }

    fn from_cli(cli: Cli) -> CliResult<RunConfig> {
        use Format::{Csv, Json};
        let (command, output) = match cli.command {
            Cmd::Spectrum {
                cross_section,
                lambda_max,
                out,
            } => (
                Command::Spectrum {
                    cross_section: descriptor(&cross_section)?,
                    lambda_max,
                },
                output(out, Csv, &[Csv, Json])?,
            ),
            Cmd::Hd { cone, d_max, out } => (
                Command::Hd {
                    cone: descriptor(&cone)?,
                    d_max,
                },
                output(out, Csv, &[Csv, Json])?,
            ),
            Cmd::Weyl {
                cross_section,
                lambda_max,
                points,
                out,
            } => {
                if points == 0 {
                    return Err(CliError::Usage("--points must be >= 1".into()));
                }
                (
                    Command::Weyl {
                        cross_section: descriptor(&cross_section)?,
                        lambda_max,
                        points,
                    },
                    output(out, Csv, &[Csv, Json])?,
                )
            }
            Cmd::GramCheck {
                n,
                cone,
                dim,
                trials,
                seed,
                out,
            } => {
                let cone = match (cone, n) {
                    (Some(c), n) => {
                        let x = descriptor(&c)?;
                        if let Some(n) = n {
                            if x.dim() + 1 != n {
                                return Err(CliError::Usage(format!(
                                    "--n {n} does not match the {}-dimensional cone over {x}",
                                    x.dim() + 1
                                )));
                            }
                        }
                        x
                    }
                    (None, n) => euclidean(n.unwrap_or(3))?,
                };
                if dim == Some(0) {
                    return Err(CliError::Usage("--dim must be >= 1".into()));
                }
                (
                    Command::GramCheck {
                        cone,
                        dim,
                        trials,
                        seed,
                    },
                    output(out, Json, &[Csv, Json])?,
                )
            }
            Cmd::Oracle {
                cross_section,
                level,
                points,
                count,
                tolerance,
                mesh,
                out,
            } => (
                Command::Oracle {
                    cross_section: descriptor(&cross_section)?,
                    level,
                    points,
                    count,
                    tolerance,
                    mesh,
                },
                output(out, Json, &[Csv, Json])?,
            ),
            Cmd::Report {
                cone,
                d_max,
                lambda_max,
                trials,
                seed,
                weyl_tolerance,
                sum_tolerance,
                out,
            } => (
                Command::Report {
                    cone: descriptor(&cone)?,
                    d_max,
                    lambda_max,
                    trials,
                    seed,
                    thresholds: ReportThresholds {
                        weyl: weyl_tolerance,
                        ratio_sum: sum_tolerance,
                    },
                },
                output(out, Json, &[Json])?,
            ),
        };
        Ok(RunConfig { command, output })
    }
}

fn first_line(s: &str) -> String {
    s.lines().next().unwrap_or("").trim_start_matches("error: ").to_string()
}

/// Outcome of a successful run: whether every verdict passed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    ValidationFailure,
}

fn with_output<F>(output: &Output, stdout: &mut dyn Write, f: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    match &output.path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_context(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| io_context(p, e))?;
        }
        None => {
            f(stdout)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn io_context(p: &Path, e: io::Error) -> CliError {
    CliError::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
}

fn sidecar_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_file<F>(path: &Path, f: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> CliResult<()>,
{
    with_output(
        &Output {
            path: Some(path.to_path_buf()),
            format: Format::Json,
        },
        &mut io::sink(),
        f,
    )
}

fn cone_for(x: CrossSection, lambda_max: f64) -> CliResult<ConeGeometry> {
    Ok(ConeGeometry::new(x.spectrum(lambda_max)?)?)
}

fn growth_cone(x: CrossSection, d_max: u64) -> CliResult<ConeGeometry> {
    cone_for(x, coverage_for_growth(d_max as f64, x.dim() + 1) * (1.0 + 1e-6))
}

fn spectrum_json(s: &Spectrum) -> Value {
    let entries: Vec<Value> = s
        .entries()
        .iter()
        .map(|e| {
            json!({
                "eigenvalue": e.eigenvalue.to_string(),
                "value": e.eigenvalue.to_f64(),
                "multiplicity": e.multiplicity,
            })
        })
        .collect();
    json!({
        "lambda_max": s.lambda_max(),
        "dim": s.dim(),
        "total_measure": s.total_measure(),
        "exact": s.is_exact(),
        "entries": entries,
    })
}

fn json_line(out: &mut dyn Write, v: &Value) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn run_spectrum(x: CrossSection, lambda_max: f64, output: &Output, stdout: &mut dyn Write) -> CliResult<Status> {
    let s = x.spectrum(lambda_max)?;
    match output.format {
        Format::Csv => {
            with_output(output, stdout, |w| Ok(spectra::write_csv(&s, w)?))?;
            if let Some(p) = &output.path {
                write_file(&sidecar_path(p), |w| Ok(spectra::write_sidecar(&s, w)?))?;
            }
        }
        Format::Json => with_output(output, stdout, |w| json_line(w, &spectrum_json(&s)))?,
    }
    Ok(Status::Pass)
}

fn run_hd(x: CrossSection, d_max: u64, output: &Output, stdout: &mut dyn Write) -> CliResult<Status> {
    let cone = growth_cone(x, d_max)?;
    let rep = counting_report(&cone, d_max)?;
    match output.format {
        Format::Csv => {
            with_output(output, stdout, |w| Ok(rep.write_csv(w)?))?;
            if let Some(p) = &output.path {
                write_file(&sidecar_path(p), |w| Ok(rep.write_metadata(w)?))?;
            }
        }
        Format::Json => with_output(output, stdout, |w| {
            json_line(
                w,
                &json!({ "metadata": rep.metadata, "rows": rep.rows }),
            )
        })?,
    }
    Ok(Status::Pass)
}

struct WeylRow {
    lambda: f64,
    count: u64,
    ratio: f64,
    index_ratio: f64,
}

fn weyl_rows(cone: &ConeGeometry, lambda_max: f64, points: usize) -> CliResult<Vec<WeylRow>> {
    let s = cone.cross_section();
    let first = s
        .slot(1)
        .map(|e| e.to_f64())
        .filter(|&v| v <= lambda_max)
        .ok_or_else(|| CliError::Usage(format!("no positive eigenvalue lies below lambda_max = {lambda_max}")))?;
    let k = (cone.n() - 1) as f64;
    let lo = first.max(lambda_max * 1e-3);
    (0..points)
        .map(|j| {
            let lambda = if points == 1 {
                lambda_max
            } else {
                lo * (lambda_max / lo).powf(j as f64 / (points - 1) as f64)
            };
            let count = counting_function(cone, lambda)?;
            let li = s.slot(count).expect("counted slot exists").to_f64();
            Ok(WeylRow {
                lambda,
                count,
                ratio: count as f64 / lambda.powf(k / 2.0),
                index_ratio: li / (count as f64).powf(2.0 / k),
            })
        })
        .collect()
}

fn run_weyl(
    x: CrossSection,
    lambda_max: f64,
    points: usize,
    output: &Output,
    stdout: &mut dyn Write,
) -> CliResult<Status> {
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(CliError::Usage(format!("--lambda-max must be finite and > 0, got {lambda_max}")));
    }
    let cone = cone_for(x, lambda_max * (1.0 + 1e-6))?;
    let rows = weyl_rows(&cone, lambda_max, points)?;
    let (target, growth) = (weyl_target(&cone), eigenvalue_growth_target(&cone));
    with_output(output, stdout, |w| {
        match output.format {
            Format::Csv => {
                writeln!(w, "lambda,count,weyl_ratio,weyl_target,index_ratio,index_target")?;
                for r in &rows {
                    writeln!(
                        w,
                        "{:?},{},{:?},{:?},{:?},{:?}",
                        r.lambda, r.count, r.ratio, target, r.index_ratio, growth
                    )?;
                }
            }
            Format::Json => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "lambda": r.lambda,
                            "count": r.count,
                            "weyl_ratio": r.ratio,
                            "index_ratio": r.index_ratio,
                        })
                    })
                    .collect();
                json_line(
                    w,
                    &json!({
                        "cross_section": x.to_string(),
                        "n": cone.n(),
                        "weyl_target": target,
                        "index_target": growth,
                        "rows": rows,
                    }),
                )?;
            }
        }
        Ok(())
    })?;
    Ok(Status::Pass)
}

fn fuzz_cone(x: CrossSection, max_alpha: f64) -> CliResult<ConeGeometry> {
    let n = (x.dim() + 1) as f64;
    cone_for(x, max_alpha * (max_alpha + n - 2.0) * 1.01 + 1.0)
}

fn run_fuzz(x: CrossSection, dim: Option<usize>, trials: usize, seed: u64) -> CliResult<Vec<FuzzRecord>> {
    let cfg = FuzzConfig {
        trials,
        seed,
        dim,
        ..FuzzConfig::default()
    };
    let cone = fuzz_cone(x, cfg.max_alpha)?;
    Ok(eigensum_campaign(&cone, &cfg)?)
}

fn run_gram_check(
    x: CrossSection,
    dim: Option<usize>,
    trials: usize,
    seed: u64,
    output: &Output,
    stdout: &mut dyn Write,
) -> CliResult<Status> {
    let records = run_fuzz(x, dim, trials, seed)?;
    with_output(output, stdout, |w| {
        match output.format {
            Format::Json => write_json_lines(&records, w)?,
            Format::Csv => {
                writeln!(w, "seed,k,n,r,lhs,rhs,margin,holds")?;
                for r in &records {
                    writeln!(
                        w,
                        "{},{},{},{:?},{:?},{:?},{:?},{}",
                        r.seed, r.k, r.n, r.r, r.lhs, r.rhs, r.margin, r.holds
                    )?;
                }
            }
        }
        Ok(())
    })?;
    Ok(if records.iter().all(|r| r.holds) {
        Status::Pass
    } else {
        Status::ValidationFailure
    })
}

#[allow(clippy::too_many_arguments)]
fn run_oracle(
    x: CrossSection,
    level: u32,
    points: usize,
    count: usize,
    tolerance: f64,
    mesh: Option<&Path>,
    output: &Output,
    stdout: &mut dyn Write,
) -> CliResult<Status> {
    let lap = match x {
        CrossSection::Circle { circumference } => build_circle(points, circumference)?,
        CrossSection::Sphere { m: 2, radius: 1.0 } => build_icosphere(level, 1)?,
        CrossSection::Football { q } => build_icosphere(level, q)?,
        other => {
            return Err(CliError::Usage(format!(
                "no discrete oracle for {other}; use a circle, sphere:m=2 or a football"
            )))
        }
    };
    let ev = lowest_eigenvalues(&lap, count)?;
    let top = ev.last().copied().unwrap_or(0.0);
    let analytic = x.spectrum(top * 1.5 + 1.0)?;
    let rep = spectrum_match(&analytic, &ev, tolerance);
    if let Some(p) = mesh {
        write_file(p, |w| Ok(lap.write_mesh(w)?))?;
    }
    with_output(output, stdout, |w| {
        match output.format {
            Format::Json => json_line(
                w,
                &json!({
                    "shape": lap.shape(),
                    "size": lap.size(),
                    "eigenvalues": ev,
                    "match": rep,
                }),
            )?,
            Format::Csv => {
                writeln!(w, "index,eigenvalue")?;
                for (i, v) in ev.iter().enumerate() {
                    writeln!(w, "{i},{v:?}")?;
                }
            }
        }
        Ok(())
    })?;
    Ok(if rep.pass {
        Status::Pass
    } else {
        Status::ValidationFailure
    })
}

#[allow(clippy::too_many_arguments)]
fn run_report(
    x: CrossSection,
    d_max: u64,
    lambda_max: f64,
    trials: usize,
    seed: u64,
    th: &ReportThresholds,
    output: &Output,
    stdout: &mut dyn Write,
) -> CliResult<Status> {
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(CliError::Usage(format!("--lambda-max must be finite and > 0, got {lambda_max}")));
    }
    let n = x.dim() + 1;
    let needed = coverage_for_growth(d_max as f64, n).max(lambda_max) * (1.0 + 1e-6);
    let cone = cone_for(x, needed)?;

    let rep = counting_report(&cone, d_max)?;
    let sum_series: Vec<_> = rep.rows.iter().map(|r| (r.d as f64, r.ratio_sum)).collect();
    let hd_series: Vec<_> = rep.rows.iter().map(|r| (r.d as f64, r.ratio_hd)).collect();
    let sum_verdict = limit_estimate(&sum_series, rep.metadata.target_sum)?;
    let hd_verdict = limit_estimate(&hd_series, rep.metadata.target_hd)?;
    let liminf = liminf_estimate(&hd_series)?;
    let hd_pass = sum_verdict.rel_err <= th.ratio_sum;

    let weyl = weyl_rows(&cone, lambda_max, 1)?.remove(0);
    let (wt, gt) = (weyl_target(&cone), eigenvalue_growth_target(&cone));
    let weyl_err = (weyl.ratio / wt - 1.0).abs();
    let index_err = (weyl.index_ratio / gt - 1.0).abs();
    let weyl_pass = weyl_err <= th.weyl && index_err <= th.weyl;

    let records = run_fuzz(x, None, trials, seed)?;
    let violations = records.iter().filter(|r| !r.holds).count();
    let min_margin = records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let fuzz_pass = violations == 0;

    let pass = hd_pass && weyl_pass && fuzz_pass;
    let doc = json!({
        "cone": x.to_string(),
        "n": n,
        "avr": cone.avr(),
        "thresholds": { "weyl": th.weyl, "ratio_sum": th.ratio_sum },
        "hd": {
            "d_max": d_max,
            "ratio_sum": sum_verdict,
            "ratio_hd": hd_verdict,
            "ratio_hd_liminf": liminf,
            "pass": hd_pass,
        },
        "weyl": {
            "lambda": weyl.lambda,
            "count": weyl.count,
            "ratio": weyl.ratio,
            "target": wt,
            "rel_err": weyl_err,
            "index_ratio": weyl.index_ratio,
            "index_target": gt,
            "index_rel_err": index_err,
            "pass": weyl_pass,
        },
        "gram_check": {
            "trials": records.len(),
            "seed": seed,
            "violations": violations,
            "min_margin": if records.is_empty() { Value::Null } else { json!(min_margin) },
            "pass": fuzz_pass,
        },
        "pass": pass,
    });
    with_output(output, stdout, |w| json_line(w, &doc))?;
    Ok(if pass {
        Status::Pass
    } else {
        Status::ValidationFailure
    })
}

/// Executes a configuration, writing primary output to `stdout` unless a path is set.
pub fn execute(config: &RunConfig, stdout: &mut dyn Write) -> CliResult<Status> {
    let out = &config.output;
    match &config.command {
        Command::Spectrum {
            cross_section,
            lambda_max,
        } => run_spectrum(*cross_section, *lambda_max, out, stdout),
        Command::Hd { cone, d_max } => run_hd(*cone, *d_max, out, stdout),
        Command::Weyl {
            cross_section,
            lambda_max,
            points,
        } => run_weyl(*cross_section, *lambda_max, *points, out, stdout),
        Command::GramCheck {
            cone,
            dim,
            trials,
            seed,
        } => run_gram_check(*cone, *dim, *trials, *seed, out, stdout),
        Command::Oracle {
            cross_section,
            level,
            points,
            count,
            tolerance,
            mesh,
        } => run_oracle(
            *cross_section,
            *level,
            *points,
            *count,
            *tolerance,
            mesh.as_deref(),
            out,
            stdout,
        ),
        Command::Report {
            cone,
            d_max,
            lambda_max,
            trials,
            seed,
            thresholds,
        } => run_report(*cone, *d_max, *lambda_max, *trials, *seed, thresholds, out, stdout),
    }
}

/// Runs a configuration and maps the outcome to an exit code: 0 on success,
/// 1 when a verdict fails, 2 on usage, input or I/O errors.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(config, stdout) {
        Ok(Status::Pass) => 0,
        Ok(Status::ValidationFailure) => 1,
        Err(e) => report_error(&e, stderr),
    }
}

fn report_error(e: &CliError, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "{}", e.line());
    match e {
        CliError::Core(cone_spectra::Error::NonConvergence { .. }) => 1,
        _ => 2,
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // an already initialized pool (repeated in-process calls) keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Full command-line entry point.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    if let Err(e) = configure_threads() {
        return report_error(&e, stderr);
    }
    match RunConfig::from_args(args) {
        Ok(cfg) => run(&cfg, stdout, stderr),
        Err(Ok(text)) => {
            let _ = write!(stdout, "{text}");
            0
        }
        Err(Err(e)) => report_error(&e, stderr),
    }
}
