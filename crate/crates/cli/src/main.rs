use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dimer_core::enumeration::{
    brute_winding_table_with_cap, enumerate_matchings_with_cap, superimpose, winding_by_counts, winding_by_loops,
    DEFAULT_VERTEX_CAP,
};
use dimer_core::kasteleyn::extended::{
    digits_to_bits, extract_winding_counts, mgf_extended, partition_extended, required_digits, DEFAULT_DIGITS,
};
use dimer_core::kasteleyn::{mgf, partition, Perturbation};
use dimer_core::limitlaw::{convergence_report, ConvergenceOptions};
use dimer_core::spectral::{free_energy, FreeEnergyMethod};
use dimer_core::theta::{theta_product_terms, theta_series, Nome, DEFAULT_EPS};
use dimer_core::verify::{self, Suite};
use dimer_core::{Error, TorusGraph};
use num_complex::Complex64;
use rug::Float;
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_VALIDATION: u8 = 1;
const EXIT_PRECISION: u8 = 2;
const EXIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "dimer", version, about = "Dimers on the toroidal honeycomb lattice")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Size {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
}

#[derive(clap::Args)]
struct Weights {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindingMethod {
    Brute,
    Dft,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThetaSide {
    Series,
    Product,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyMethod {
    All,
    DoubleIntegral,
    DoubleIntegralSwapped,
    LogR1Integral,
}

#[derive(Subcommand)]
enum Command {
    /// Vertex and edge counts, modulus, and optionally the full edge list.
    LatticeInfo {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value = "json")]
        format: LatticeFormat,
    },
    /// Counts perfect matchings by exhaustive search.
    Enumerate {
        #[command(flatten)]
        size: Size,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        cap: usize,
    },
    /// Winding-number table `k,l,count`.
    Winding {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum)]
        method: WindingMethod,
        /// Decimal digits for the Fourier extraction.
        #[arg(long, env = "DIMER_PRECISION")]
        precision: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        cap: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
    },
    /// Z_{m,n}(α, β) in log-magnitude/phase form.
    Partition {
        #[command(flatten)]
        size: Size,
        #[command(flatten)]
        weights: Weights,
        /// Decimal digits; hardware precision when absent.
        #[arg(long, env = "DIMER_PRECISION")]
        precision: Option<u32>,
    },
    /// E[e^{-π(αk + βl)}] under the uniform measure.
    Mgf {
        #[command(flatten)]
        size: Size,
        #[command(flatten)]
        weights: Weights,
        #[arg(long, env = "DIMER_PRECISION")]
        precision: Option<u32>,
    },
    /// A Jacobi theta function.
    Theta {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        index: u8,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        zeta_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        zeta_im: f64,
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["tau_re", "tau_im"])]
        q_re: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        q_im: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        tau_re: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        tau_im: Option<f64>,
        #[arg(long, value_enum, default_value = "series")]
        side: ThetaSide,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        tol: f64,
    },
    /// Free energy per fundamental domain by quadrature.
    FreeEnergy {
        #[arg(long, value_enum, default_value = "all")]
        method: EnergyMethod,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Runs a numerical check suite; exits 3 if any check fails.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Option<Suite>,
    },
    /// Winding tables along a sequence of sizes against the discrete Gaussian.
    Converge {
        #[arg(long)]
        rho: f64,
        /// Comma-separated `MxN` list, e.g. `2x6,4x12`.
        #[arg(long, value_parser = parse_size, value_delimiter = ',', required = true)]
        sizes: Vec<(usize, usize)>,
        /// Directory for the per-size tables and `summary.json`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "DIMER_PRECISION")]
        precision: Option<u32>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|x| x.label()).collect();
        format!("unknown suite `{s}` (expected one of {})", names.join(", "))
    })
}

fn parse_size(p: &str) -> Result<(usize, usize), String> {
    let (m, n) = p.trim().split_once('x').ok_or_else(|| format!("size `{p}` is not of the form MxN"))?;
    let m = m.parse().map_err(|_| format!("bad m in `{p}`"))?;
    let n = n.parse().map_err(|_| format!("bad n in `{p}`"))?;
    Ok((m, n))
}

#[derive(Serialize)]
struct Precision {
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    digits: Option<u32>,
}

impl Precision {
    const EXACT: Precision = Precision { mode: "exact", digits: None };
    const HARDWARE: Precision = Precision { mode: "hardware", digits: None };

    fn extended(digits: u32) -> Precision {
        Precision { mode: "extended", digits: Some(digits) }
    }

    fn of(digits: Option<u32>) -> Precision {
        digits.map_or(Precision::HARDWARE, Precision::extended)
    }
}

/// Output plus, when the command ran but its checks did not hold, why.
struct Emitted {
    body: String,
    failure: Option<String>,
}

fn json_body(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn emitted(v: Value) -> Result<Emitted, Error> {
    Ok(Emitted { body: json_body(&v), failure: None })
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn digits_for(m: usize, n: usize, precision: Option<u32>) -> Result<u32, Error> {
    match precision {
        Some(d) => Ok(d),
        None => Ok(required_digits(m, n)?.max(DEFAULT_DIGITS)),
    }
}

fn run(cmd: Command) -> Result<Emitted, Error> {
    match cmd {
        Command::LatticeInfo { size, format } => {
            let g = TorusGraph::build(size.m, size.n)?;
            match format {
                LatticeFormat::Text => Ok(Emitted { body: g.to_text(), failure: None }),
                LatticeFormat::Json => {
                    let md = g.modulus();
                    emitted(json!({
                        "m": g.m(),
                        "n": g.n(),
                        "vertices": g.vertex_count(),
                        "edges": g.edge_count(),
                        "modulus": md.to_string(),
                        "rho": md.rho(),
                        "precision": Precision::HARDWARE,
                    }))
                }
            }
        }
        Command::Enumerate { size, cap } => {
            let g = TorusGraph::build(size.m, size.n)?;
            let m0 = if size.n % 3 == 0 { Some(g.reference_matching()?) } else { None };
            let mut count: u64 = 0;
            let mut mismatches: u64 = 0;
            for mt in enumerate_matchings_with_cap(&g, cap)? {
                count += 1;
                if let Some(m0) = &m0 {
                    let loops = winding_by_loops(&superimpose(&g, &mt, m0)?);
                    if loops != winding_by_counts(&mt, &g)? {
                        mismatches += 1;
                    }
                }
            }
            let mut v = json!({ "m": g.m(), "n": g.n(), "matchings": count, "precision": Precision::EXACT });
            if m0.is_some() {
                v["winding_formula_mismatches"] = json!(mismatches);
            }
            let failure = (mismatches > 0).then(|| format!("{mismatches} matchings with inconsistent winding"));
            Ok(Emitted { body: json_body(&v), failure })
        }
        Command::Winding { size, method, precision, cap, format } => {
            let (table, prec) = match method {
                WindingMethod::Brute => {
                    let g = TorusGraph::build(size.m, size.n)?;
                    (brute_winding_table_with_cap(&g, cap)?, Precision::EXACT)
                }
                WindingMethod::Dft => {
                    let d = digits_for(size.m, size.n, precision)?;
                    (extract_winding_counts(size.m, size.n, d)?, Precision::extended(d))
                }
            };
            match format {
                TableFormat::Json => {
                    let mut v = table.to_json();
                    v["precision"] = json!(prec);
                    emitted(v)
                }
                TableFormat::Csv => Ok(Emitted { body: table.to_csv(), failure: None }),
            }
        }
        Command::Partition { size, weights, precision } => {
            let (m, n, a, b) = (size.m, size.n, weights.alpha, weights.beta);
            let v = match precision {
                None => {
                    let z = partition(&Perturbation::real(a, b), m, n)?;
                    json!({
                        "m": m, "n": n, "alpha": a, "beta": b,
                        "log_magnitude": (!z.zero).then_some(z.log_magnitude),
                        "phase": z.phase,
                        "value_if_representable": z.to_complex().map(complex_json),
                        "precision": Precision::HARDWARE,
                    })
                }
                Some(d) => {
                    let z = partition_extended(a.into(), b.into(), m, n, d)?;
                    let bits = digits_to_bits(d);
                    let zero = z.is_zero();
                    let log_mag = Float::with_val(bits, z.abs_ref()).ln().to_f64();
                    let phase = Float::with_val(bits, z.arg_ref()).to_f64();
                    let value = Complex64::new(z.real().to_f64(), z.imag().to_f64());
                    let representable = value.re.is_finite() && value.im.is_finite();
                    json!({
                        "m": m, "n": n, "alpha": a, "beta": b,
                        "log_magnitude": (!zero).then_some(log_mag),
                        "phase": phase,
                        "value_if_representable": representable.then(|| complex_json(value)),
                        "value_decimal": format!("{:.*}", d as usize, z.real()),
                        "precision": Precision::extended(d),
                    })
                }
            };
            emitted(v)
        }
        Command::Mgf { size, weights, precision } => {
            let (m, n, a, b) = (size.m, size.n, weights.alpha, weights.beta);
            let value = match precision {
                None => mgf(a, b, m, n)?,
                Some(d) => mgf_extended(a, b, m, n, d)?.to_f64(),
            };
            emitted(json!({
                "m": m, "n": n, "alpha": a, "beta": b, "mgf": value, "precision": Precision::of(precision),
            }))
        }
        Command::Theta { index, zeta_re, zeta_im, q_re, q_im, tau_re, tau_im, side, tol } => {
            let nome = if tau_re.is_some() || tau_im.is_some() {
                Nome::from_tau(Complex64::new(tau_re.unwrap_or(0.0), tau_im.unwrap_or(0.0)))?
            } else if q_re.is_some() || q_im.is_some() {
                Nome::new(Complex64::new(q_re.unwrap_or(0.0), q_im.unwrap_or(0.0)))?
            } else {
                return Err(Error::InvalidArgument("give the nome with --q-re/--q-im or --tau-re/--tau-im".into()));
            };
            let zeta = Complex64::new(zeta_re, zeta_im);
            let t = match side {
                ThetaSide::Series => theta_series(index, zeta, &nome, tol)?,
                ThetaSide::Product => theta_product_terms(index, zeta, &nome, tol)?,
            };
            emitted(json!({
                "value_re": t.value.re,
                "value_im": t.value.im,
                "terms_used": t.terms_used,
                "precision": Precision::HARDWARE,
            }))
        }
        Command::FreeEnergy { method, tol } => {
            let methods: Vec<FreeEnergyMethod> = match method {
                EnergyMethod::All => FreeEnergyMethod::ALL.to_vec(),
                EnergyMethod::DoubleIntegral => vec![FreeEnergyMethod::DoubleIntegral],
                EnergyMethod::DoubleIntegralSwapped => vec![FreeEnergyMethod::DoubleIntegralSwapped],
                EnergyMethod::LogR1Integral => vec![FreeEnergyMethod::LogR1Integral],
            };
            let results = methods
                .into_iter()
                .map(|mth| {
                    free_energy(mth, tol).map(|f| {
                        json!({ "method": mth.label(), "value": f.value, "estimated_error": f.estimated_error })
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            emitted(json!({ "results": results, "tol": tol, "precision": Precision::HARDWARE }))
        }
        Command::Verify { suite } => {
            let suites = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let mut reports = Vec::new();
            let mut failed = Vec::new();
            for s in suites {
                let checks = verify::run(s)?;
                let pass = checks.iter().all(|c| c.pass);
                failed.extend(checks.iter().filter(|c| !c.pass).map(|c| c.check_name.clone()));
                reports.push(json!({ "suite": s.label(), "pass": pass, "checks": checks }));
            }
            let pass = failed.is_empty();
            let body = json_body(&json!({ "pass": pass, "suites": reports, "precision": Precision::HARDWARE }));
            let failure = (!pass).then(|| format!("failed checks: {}", failed.join(", ")));
            Ok(Emitted { body, failure })
        }
        Command::Converge { rho, sizes, out, precision } => {
            std::fs::create_dir_all(&out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
            let opts = ConvergenceOptions { digits: precision, table_dir: Some(out.clone()) };
            let report = convergence_report(rho, &sizes, &opts)?;
            let mut v = json!(report);
            v["precision"] = json!(match precision {
                Some(d) => Precision::extended(d),
                None => Precision { mode: "extended", digits: None },
            });
            let body = json_body(&v);
            let summary = out.join("summary.json");
            std::fs::write(&summary, &body).map_err(|e| Error::Io(format!("{}: {e}", summary.display())))?;
            Ok(Emitted { body, failure: None })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = match run(cli.command) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::Precision { .. } => EXIT_PRECISION,
                Error::Io(_) => EXIT_FAILED,
                _ => EXIT_VALIDATION,
            });
        }
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.body) {
                eprintln!("error: i/o error: {}: {e}", path.display());
                return ExitCode::from(EXIT_FAILED);
            }
        }
        None => print!("{}", out.body),
    }
    match out.failure {
        None => ExitCode::SUCCESS,
        Some(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
