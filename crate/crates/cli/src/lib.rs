//! Command-line front end for `spherekern`.
//!
//! [`run`] executes one parsed [`Cli`] invocation and returns the report text
//! together with the process exit status:
//!
//! | status | meaning                                          |
//! |--------|--------------------------------------------------|
//! | 0      | success                                          |
//! | 1      | input or usage error                             |
//! | 2      | the kernel is not positive definite              |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use spherekern::certify::{certify, BlockStatus, Certificate, Justification, ParityCase, Verdict};
use spherekern::harmonics::{harmonics_upto, HarmonicIndex};
use spherekern::interpolate::{fit, gram, read_sites_file, read_values_file, Interpolant};
use spherekern::kernels::{
    parse_kernel_spec, to_kernel_spec, BandLimitedFunction, CoefficientTensor,
};
use spherekern::linalg::hermitian_eigen;
use spherekern::quadrature::{fibonacci_points, sphere_rule};
use spherekern::witness::{
    antipodal_witness, block_negative_witness, discretize_negative_direction,
    hemisphere_nullspace_witness, DegreeParity, Witness,
};
use spherekern::{Complex64, SpherePoint};

/// Environment variable overriding the default relative tolerance.
pub const TOL_ENV: &str = "SPHEREKERN_TOL";
pub const DEFAULT_TOL: f64 = spherekern::certify::DEFAULT_TOL;
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_PD: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] spherekern::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Parser)]
#[command(
    name = "spherekern",
    version,
    about = "Positive definiteness certificates and interpolation for Hermitian kernels on the sphere"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Relative eigenvalue tolerance
    #[arg(long, global = true, env = TOL_ENV, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the report here instead of standard output
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the blocks of a kernel and decide (strict) positive definiteness
    Certify {
        kernel: PathBuf,
        /// Highest degree to classify; defaults to j_max, or j_max + 20 with a tail
        #[arg(long)]
        j_check: Option<usize>,
        /// Also write the parsed kernel back out in canonical form
        #[arg(long)]
        emit_normalized: Option<PathBuf>,
    },
    /// Construct a point set on which the quadratic form is zero or negative
    Witness {
        kernel: PathBuf,
        #[arg(long, value_enum, default_value_t = WitnessCase::Auto)]
        case: WitnessCase,
        /// Largest degree of the vanishing parity (cases 3 and 4)
        #[arg(long)]
        j_hat: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Initial quadrature resolution for negative directions
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long)]
        j_check: Option<usize>,
    },
    /// Print the Gram matrix of a kernel on a site file
    Gram { kernel: PathBuf, points: PathBuf },
    /// Interpolate data on sites and report residuals
    Fit {
        #[command(flatten)]
        data: FitData,
        /// Also evaluate the interpolant on this many spiral points
        #[arg(long)]
        eval_grid: Option<usize>,
    },
    /// Interpolate data on sites and evaluate at query points
    Eval {
        #[command(flatten)]
        data: FitData,
        /// Site file with the query points (`theta,phi`)
        #[arg(long)]
        at: PathBuf,
    },
    /// Tabulate spherical harmonics at one point
    Harmonics {
        j_max: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        phi: f64,
    },
    /// Check the product quadrature rule against harmonic orthonormality
    Quadtest {
        m: usize,
        /// Highest degree to test; defaults to m − 1
        #[arg(long)]
        j_max: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct FitData {
    pub kernel: PathBuf,
    /// Sites `theta,phi[,value_re,value_im]`
    pub points: PathBuf,
    /// Separate values `value_re[,value_im]`, one per site
    pub values: Option<PathBuf>,
    /// Degree up to which a tail is expanded before solving
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub j_check: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessCase {
    #[value(name = "1")]
    EvenOnly,
    #[value(name = "2")]
    OddOnly,
    #[value(name = "3")]
    FinitelyManyEven,
    #[value(name = "4")]
    FinitelyManyOdd,
    Auto,
}

/// Report text and exit status of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
    /// Message for standard error when the invocation failed.
    pub error: Option<String>,
}

fn read_kernel(path: &Path) -> CliResult<CoefficientTensor> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(parse_kernel_spec(&text)?)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn default_j_check(t: &CoefficientTensor) -> usize {
    if t.tail().is_some() {
        t.j_max() + 20
    } else {
        t.j_max()
    }
}

fn c_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn line(out: &mut String, v: Value) {
    writeln!(out, "{v}").unwrap();
}

/// Runs one invocation. Errors are reported with status 1.
pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok((code, report)) => match &cli.common.output {
            Some(path) => match write_file(path, &report) {
                Ok(()) => Outcome {
                    code,
                    report: String::new(),
                    error: None,
                },
                Err(e) => error_outcome(&e),
            },
            None => Outcome {
                code,
                report,
                error: None,
            },
        },
        Err(e) => error_outcome(&e),
    }
}

fn error_outcome(e: &CliError) -> Outcome {
    Outcome {
        code: EXIT_INPUT,
        report: String::new(),
        error: Some(format!("error: {e}")),
    }
}

fn dispatch(cli: &Cli) -> CliResult<(i32, String)> {
    let common = &cli.common;
    if !(common.tol.is_finite() && common.tol > 0.0) {
        return Err(CliError::Usage(format!(
            "tolerance must be positive, got {}",
            common.tol
        )));
    }
    match &cli.command {
        Command::Certify {
            kernel,
            j_check,
            emit_normalized,
        } => {
            let t = read_kernel(kernel)?;
            let cert = certify(
                &t,
                j_check.unwrap_or_else(|| default_j_check(&t)),
                common.tol,
            )?;
            if let Some(path) = emit_normalized {
                write_file(path, &to_kernel_spec(&t))?;
            }
            let report = match common.format {
                Format::Human => cert.to_human(),
                Format::Machine => cert.to_machine(),
            };
            Ok((verdict_code(&cert), report))
        }
        Command::Witness {
            kernel,
            case,
            j_hat,
            seed,
            m,
            j_check,
        } => {
            let t = read_kernel(kernel)?;
            let j_check = j_check.unwrap_or_else(|| default_j_check(&t));
            witness_command(&t, *case, *j_hat, *seed, *m, j_check, common)
        }
        Command::Gram { kernel, points } => {
            let t = read_kernel(kernel)?;
            let sites = read_sites_file(points)?;
            let pts: Vec<SpherePoint> = sites.iter().map(|s| s.point).collect();
            let g = gram(&t, &pts)?;
            let eig = hermitian_eigen(&g);
            let mut out = String::new();
            match common.format {
                Format::Machine => {
                    for r in 0..g.nrows() {
                        let row: Vec<Value> = (0..g.ncols()).map(|c| c_json(g[(r, c)])).collect();
                        line(
                            &mut out,
                            json!({"record": "gram_row", "row": r, "entries": row}),
                        );
                    }
                    line(
                        &mut out,
                        json!({"record": "spectrum", "n": g.nrows(), "min_eig": eig.min(), "max_eig": eig.max()}),
                    );
                }
                Format::Human => {
                    for r in 0..g.nrows() {
                        let cells: Vec<String> = (0..g.ncols())
                            .map(|c| format!("{:>12.5e}{:+.5e}i", g[(r, c)].re, g[(r, c)].im))
                            .collect();
                        writeln!(out, "{}", cells.join("  ")).unwrap();
                    }
                    writeln!(
                        out,
                        "\nmin eigenvalue: {:?}\nmax eigenvalue: {:?}",
                        eig.min(),
                        eig.max()
                    )
                    .unwrap();
                }
            }
            Ok((EXIT_OK, out))
        }
        Command::Fit { data, eval_grid } => {
            let (interp, pts, vals, pre) = fit_data(data, common)?;
            let Some(interp) = interp else {
                return Ok((EXIT_NOT_PD, pre));
            };
            let mut out = pre;
            let d = interp.diagnostics();
            match common.format {
                Format::Machine => {
                    for (i, (p, v)) in pts.iter().zip(&vals).enumerate() {
                        let s = interp.evaluate(p);
                        line(
                            &mut out,
                            json!({"record": "site", "index": i, "theta": p.theta(), "phi": p.phi(),
                                   "value": c_json(*v), "fitted": c_json(s), "residual": (s - v).norm()}),
                        );
                    }
                    line(
                        &mut out,
                        json!({"record": "diagnostics", "min_eig": d.min_eigenvalue, "max_eig": d.max_eigenvalue,
                               "condition": d.condition, "residual": d.residual}),
                    );
                }
                Format::Human => {
                    writeln!(
                        out,
                        "{:>5}  {:>10}  {:>10}  {:>24}  {:>10}",
                        "site", "theta", "phi", "fitted", "residual"
                    )
                    .unwrap();
                    for (i, (p, v)) in pts.iter().zip(&vals).enumerate() {
                        let s = interp.evaluate(p);
                        writeln!(
                            out,
                            "{:>5}  {:>10.6}  {:>10.6}  {:>11.4e}{:+.4e}i  {:>10.3e}",
                            i,
                            p.theta(),
                            p.phi(),
                            s.re,
                            s.im,
                            (s - v).norm()
                        )
                        .unwrap();
                    }
                    writeln!(
                        out,
                        "\nmin eigenvalue {:e}  max eigenvalue {:e}  condition {:e}  max residual {:e}",
                        d.min_eigenvalue, d.max_eigenvalue, d.condition, d.residual
                    )
                    .unwrap();
                }
            }
            if let Some(n) = eval_grid {
                write_evaluations(
                    &mut out,
                    &interp,
                    &fibonacci_points(*n),
                    common.format,
                    "grid",
                );
            }
            Ok((EXIT_OK, out))
        }
        Command::Eval { data, at } => {
            let (interp, _, _, pre) = fit_data(data, common)?;
            let Some(interp) = interp else {
                return Ok((EXIT_NOT_PD, pre));
            };
            let queries: Vec<SpherePoint> = read_sites_file(at)?.iter().map(|s| s.point).collect();
            let mut out = pre;
            write_evaluations(&mut out, &interp, &queries, common.format, "eval");
            Ok((EXIT_OK, out))
        }
        Command::Harmonics { j_max, theta, phi } => {
            let p = SpherePoint::new(*theta, *phi)?;
            let table = harmonics_upto(*j_max, &p);
            let mut out = String::new();
            for (slot, y) in table.iter().enumerate() {
                let idx = HarmonicIndex::from_flat(slot + 1)?;
                match common.format {
                    Format::Machine => line(
                        &mut out,
                        json!({"record": "harmonic", "j": idx.j(), "k": idx.k(), "value": c_json(*y)}),
                    ),
                    Format::Human => writeln!(
                        out,
                        "{:>4} {:>5}  {:>23?}  {:>23?}",
                        idx.j(),
                        idx.k(),
                        y.re,
                        y.im
                    )
                    .unwrap(),
                }
            }
            Ok((EXIT_OK, out))
        }
        Command::Quadtest { m, j_max } => {
            let rule = sphere_rule(*m)?;
            let j_max = j_max.unwrap_or(m.saturating_sub(1));
            let tables: Vec<Vec<Complex64>> = rule
                .points()
                .iter()
                .map(|p| harmonics_upto(j_max, p))
                .collect();
            let n = tables.first().map_or(0, Vec::len);
            let mut worst = 0.0f64;
            for a in 0..n {
                for b in a..n {
                    let s: Complex64 = tables
                        .iter()
                        .zip(rule.weights())
                        .map(|(y, w)| y[a] * y[b].conj() * *w)
                        .sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s - target).norm());
                }
            }
            let weight_sum: f64 = rule.weights().iter().sum();
            let weight_err = (weight_sum - 4.0 * std::f64::consts::PI).abs();
            let pass = worst < 1e-10 && weight_err < 1e-10;
            let mut out = String::new();
            match common.format {
                Format::Machine => line(
                    &mut out,
                    json!({"record": "quadtest", "m": m, "j_max": j_max, "points": rule.len(),
                           "orthonormality_error": worst, "weight_sum_error": weight_err, "pass": pass}),
                ),
                Format::Human => {
                    writeln!(
                        out,
                        "resolution {m}: {} points, degrees up to {j_max}",
                        rule.len()
                    )
                    .unwrap();
                    writeln!(out, "max orthonormality error: {worst:e}").unwrap();
                    writeln!(out, "weight sum error:         {weight_err:e}").unwrap();
                    writeln!(out, "{}", if pass { "PASS" } else { "FAIL" }).unwrap();
                }
            }
            Ok((if pass { EXIT_OK } else { EXIT_INPUT }, out))
        }
    }
}

fn verdict_code(cert: &Certificate) -> i32 {
    if cert.verdict == Verdict::NotPositiveDefinite {
        EXIT_NOT_PD
    } else {
        EXIT_OK
    }
}

/// Interpolant with its data, plus text to print ahead of it.
type Fitted = (
    Option<Interpolant>,
    Vec<SpherePoint>,
    Vec<Complex64>,
    String,
);

/// Certifies, expands the tail and fits. `None` means the pre-check refuted
/// positive definiteness; the accompanying text is the certificate.
fn fit_data(data: &FitData, common: &Common) -> CliResult<Fitted> {
    let t = read_kernel(&data.kernel)?;
    let cert = certify(
        &t,
        data.j_check.unwrap_or_else(|| default_j_check(&t)),
        common.tol,
    )?;
    if cert.verdict == Verdict::NotPositiveDefinite {
        let report = match common.format {
            Format::Human => cert.to_human(),
            Format::Machine => cert.to_machine(),
        };
        return Ok((None, Vec::new(), Vec::new(), report));
    }
    let sites = read_sites_file(&data.points)?;
    let pts: Vec<SpherePoint> = sites.iter().map(|s| s.point).collect();
    let vals: Vec<Complex64> = match &data.values {
        Some(path) => read_values_file(path)?,
        None => sites
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.value.ok_or_else(|| {
                    CliError::Usage(format!("site {i} has no value and no value file was given"))
                })
            })
            .collect::<CliResult<_>>()?,
    };
    let explicit = t.expand_tail(data.degree.unwrap_or_else(|| default_j_check(&t)))?;
    let interp = fit(&explicit, &pts, &vals)?;
    Ok((Some(interp), pts, vals, String::new()))
}

fn write_evaluations(
    out: &mut String,
    interp: &Interpolant,
    points: &[SpherePoint],
    format: Format,
    record: &str,
) {
    if format == Format::Human && !points.is_empty() {
        writeln!(
            out,
            "\n{:>5}  {:>10}  {:>10}  {:>24}",
            record, "theta", "phi", "value"
        )
        .unwrap();
    }
    for (i, q) in points.iter().enumerate() {
        let s = interp.evaluate(q);
        match format {
            Format::Machine => line(
                out,
                json!({"record": record, "index": i, "theta": q.theta(), "phi": q.phi(), "value": c_json(s)}),
            ),
            Format::Human => writeln!(
                out,
                "{:>5}  {:>10.6}  {:>10.6}  {:>11.4e}{:+.4e}i",
                i,
                q.theta(),
                q.phi(),
                s.re,
                s.im
            )
            .unwrap(),
        }
    }
}

fn witness_command(
    t: &CoefficientTensor,
    case: WitnessCase,
    j_hat: Option<usize>,
    seed: u64,
    m: usize,
    j_check: usize,
    common: &Common,
) -> CliResult<(i32, String)> {
    let cert = certify(t, j_check, common.tol)?;
    let case = match case {
        WitnessCase::Auto => match cert.justification {
            Justification::IndefiniteBlock { .. }
            | Justification::IndefiniteOperator
            | Justification::NegativeTail { .. } => None,
            Justification::Parity(ParityCase::EvenOnly) => Some(WitnessCase::EvenOnly),
            Justification::Parity(ParityCase::OddOnly) => Some(WitnessCase::OddOnly),
            Justification::Parity(ParityCase::FinitelyManyEven) => {
                Some(WitnessCase::FinitelyManyEven)
            }
            Justification::Parity(ParityCase::FinitelyManyOdd) => {
                Some(WitnessCase::FinitelyManyOdd)
            }
            other => {
                return Err(CliError::Usage(format!(
                    "no witness construction applies to this kernel ({}, {})",
                    cert.verdict.name(),
                    other.name()
                )))
            }
        },
        explicit => Some(explicit),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (witness, code) = match case {
        None if cert
            .coupling
            .as_ref()
            .is_some_and(|c| c.negative_direction.is_some()) =>
        {
            let v = cert
                .coupling
                .as_ref()
                .and_then(|c| c.negative_direction.as_ref())
                .unwrap();
            // the form v^H A v is realized by coefficient direction conj(v)
            let y: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
            let f = BandLimitedFunction::from_direction(&y)?;
            (
                discretize_negative_direction(t, &f, m)?.witness,
                EXIT_NOT_PD,
            )
        }
        None => {
            let b = cert
                .per_block
                .iter()
                .find(|b| b.status == BlockStatus::Indefinite)
                .ok_or_else(|| {
                    CliError::Usage("negative tail lies beyond j_check; raise --j-check".into())
                })?;
            let v = b
                .negative_direction
                .as_ref()
                .expect("indefinite blocks carry a direction");
            (block_negative_witness(t, b.j, v, m)?.witness, EXIT_NOT_PD)
        }
        Some(WitnessCase::EvenOnly) => (antipodal_witness(t, DegreeParity::Even)?, EXIT_OK),
        Some(WitnessCase::OddOnly) => (antipodal_witness(t, DegreeParity::Odd)?, EXIT_OK),
        Some(c @ (WitnessCase::FinitelyManyEven | WitnessCase::FinitelyManyOdd)) => {
            let parity = if c == WitnessCase::FinitelyManyEven {
                DegreeParity::Even
            } else {
                DegreeParity::Odd
            };
            let j_hat = j_hat.unwrap_or_else(|| last_nonzero_degree(&cert, parity));
            let explicit = t.expand_tail(j_check)?;
            (
                hemisphere_nullspace_witness(&explicit, j_hat, parity, &mut rng)?,
                EXIT_OK,
            )
        }
        Some(WitnessCase::Auto) => unreachable!("resolved above"),
    };
    Ok((code, render_witness(&witness, common.format)))
}

fn last_nonzero_degree(cert: &Certificate, parity: DegreeParity) -> usize {
    cert.per_block
        .iter()
        .filter(|b| DegreeParity::of(b.j) == parity && b.status != BlockStatus::Zero)
        .map(|b| b.j)
        .max()
        .unwrap_or(0)
}

/// Points as `(θ, φ)` pairs and weights as `[re, im]`.
pub fn render_witness(w: &Witness, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Machine => {
            let points: Vec<Value> = w
                .points
                .iter()
                .map(|p| json!([p.theta(), p.phi()]))
                .collect();
            let coeffs: Vec<Value> = w.coeffs.iter().map(|c| c_json(*c)).collect();
            line(
                &mut out,
                json!({"record": "witness", "kind": w.kind.name(), "quad_form": w.quad_form, "scale": w.scale,
                       "points": points, "coeffs": coeffs}),
            );
        }
        Format::Human => {
            writeln!(out, "witness: {}", w.kind.name()).unwrap();
            writeln!(
                out,
                "{:>5}  {:>22}  {:>22}  {:>23}  {:>23}",
                "i", "theta", "phi", "c_re", "c_im"
            )
            .unwrap();
            for (i, (p, c)) in w.points.iter().zip(&w.coeffs).enumerate() {
                writeln!(
                    out,
                    "{:>5}  {:>22?}  {:>22?}  {:>23?}  {:>23?}",
                    i,
                    p.theta(),
                    p.phi(),
                    c.re,
                    c.im
                )
                .unwrap();
            }
            writeln!(
                out,
                "quadratic form: {:?}\nscale:          {:?}",
                w.quad_form, w.scale
            )
            .unwrap();
        }
    }
    out
}
