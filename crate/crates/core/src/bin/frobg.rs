use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;

use frobg::catalog::{self, ModelEntry};
use frobg::drivers;
use frobg::report::{self, VerificationReport, VerifyOptions};
use frobg::scalar::Precision;

#[derive(Parser)]
#[command(name = "frobg", version, about = "Check G-functions of Frobenius manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Working precision in decimal digits.
    #[arg(long, env = "FROBG_PRECISION", default_value_t = 64)]
    precision: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl Common {
    fn options(&self) -> VerifyOptions {
        VerifyOptions { points: self.points, seed: self.seed, tol: self.tol, prec: Precision::new(self.precision) }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Catalog model name; ignored with --model-file.
    model: Option<String>,
    /// Model parameter, repeatable.
    #[arg(long = "param", value_name = "NAME=RATIONAL")]
    params: Vec<String>,
    /// Load a model definition file instead of a catalog entry.
    #[arg(long)]
    model_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog models and reference tables.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run check suites on a model.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated checks; default all.
        #[arg(long)]
        checks: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Collision exponents and residues along probe rays.
    Caustic {
        #[command(flatten)]
        model: ModelArgs,
        /// Probe along a coordinate axis, e.g. t2.
        #[arg(long)]
        ray: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Landau-Ginzburg unfoldings `x^k + a_1 x^{k-1} + ... + a_{k+m} x^{-m}`.
    Lg {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        /// Comma-separated rationals a_1..a_{k+m}.
        #[arg(long, conflicts_with = "sweep")]
        coeffs: Option<String>,
        /// Fit exponents along seeded transversal paths.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 20)]
        paths: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Legendre-type symmetry or inversion.
    Symmetry {
        #[command(flatten)]
        model: ModelArgs,
        /// 1-based index kappa.
        #[arg(long, conflicts_with = "inversion")]
        legendre: Option<usize>,
        #[arg(long)]
        inversion: bool,
        /// Catalog entry expected to be the image; defaults to the known pair.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, BigRational>, UsageError> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (name, value) = p.split_once('=').ok_or_else(|| UsageError(format!("--param '{p}' is not NAME=RATIONAL")))?;
        let v = BigRational::from_str(value.trim()).map_err(|_| UsageError(format!("--param {name}: '{value}' is not rational")))?;
        out.insert(name.trim().to_string(), v);
    }
    Ok(out)
}

fn load(args: &ModelArgs) -> Result<ModelEntry, UsageError> {
    if let Some(path) = &args.model_file {
        return Ok(catalog::load_model_file(path)?);
    }
    let name = args.model.as_deref().ok_or_else(|| UsageError("a model name or --model-file is required".into()))?;
    Ok(catalog::get_model(name, &parse_params(&args.params)?)?)
}

fn axis(name: &str, dim: usize) -> Result<usize, UsageError> {
    let i: usize = name
        .strip_prefix('t')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| UsageError(format!("--ray '{name}' is not a coordinate like t2")))?;
    if i == 0 || i > dim {
        return Err(UsageError(format!("--ray {name}: coordinate outside t1..t{dim}")));
    }
    Ok(i - 1)
}

fn emit(report: &VerificationReport, format: Format) -> ExitCode {
    match format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn list(format: Format) {
    let names = catalog::list_models();
    match format {
        Format::Json => {
            let tables = serde_json::json!({
                "models": names,
                "coxeter_g": catalog::coxeter_g_table().iter().map(|r| serde_json::json!({
                    "group": r.group, "gamma": r.gamma, "G": r.g, "kappa": r.kappa,
                })).collect::<Vec<_>>(),
                "caustic_counts": catalog::caustic_counts().iter().map(|r| serde_json::json!({
                    "group": r.group, "components": r.components, "N": r.orders, "note": r.note,
                })).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&tables).expect("json"));
        }
        Format::Text => {
            println!("models:");
            for n in names {
                let params = match n {
                    "cp1" => "  --param r=<positive integer, default 2>",
                    "i2" => "  --param h=<integer >= 3, default 5>",
                    _ => "",
                };
                println!("  {n}{params}");
            }
            println!("reference rows (no prepotential; kappa in the source's flat coordinates):");
            for r in catalog::coxeter_g_table() {
                println!("  {:<10} gamma = {:<22} G = {}{}", r.group, r.gamma, r.g, r.kappa.map(|k| format!(", kappa = {k}")).unwrap_or_default());
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, UsageError> {
    match cli.command {
        Command::List { format } => {
            list(format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { model, checks, common } => {
            let checks = report::parse_checks(checks.as_deref())?;
            let entry = load(&model)?;
            Ok(emit(&report::verify(&entry, &checks, &common.options()), common.format))
        }
        Command::Caustic { model, ray, common } => {
            let entry = load(&model)?;
            let axis = ray.as_deref().map(|r| axis(r, entry.dim())).transpose()?;
            Ok(emit(&drivers::caustic_report(&entry, axis, &common.options()), common.format))
        }
        Command::Lg { k, m, coeffs, sweep, paths, common } => {
            let opts = common.options();
            let report = match (coeffs, sweep) {
                (Some(c), _) => {
                    let a = c
                        .split(',')
                        .map(|s| BigRational::from_str(s.trim()).map_err(|_| UsageError(format!("'{s}' is not rational"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    drivers::lg_point_report(k, m, &a, &opts)
                }
                (None, true) => drivers::lg_sweep_report(k, m, paths, &opts),
                (None, false) => return Err(UsageError("lg needs --coeffs or --sweep".into())),
            };
            Ok(emit(&report, common.format))
        }
        Command::Symmetry { model, legendre, inversion, target, common } => {
            let entry = load(&model)?;
            let opts = common.options();
            let report = match (legendre, inversion) {
                (Some(k), _) => {
                    if k == 0 || k > entry.dim() {
                        return Err(UsageError(format!("--legendre {k}: index outside 1..={}", entry.dim())));
                    }
                    let kappa = k - 1;
                    let target = match target.as_deref() {
                        Some(t) => catalog::get_model(t, &BTreeMap::new())?,
                        None if kappa == entry.prepotential.identity => entry.clone(),
                        None => {
                            let t = drivers::legendre_target(&entry.name, kappa)
                                .ok_or_else(|| UsageError(format!("no known image of {} under S_{k}; pass --target", entry.name)))?;
                            catalog::get_model(t, &BTreeMap::new())?
                        }
                    };
                    drivers::legendre_report(&entry, &target, kappa, &opts)
                }
                (None, true) => drivers::inversion_report(&entry, &opts),
                (None, false) => return Err(UsageError("symmetry needs --legendre K or --inversion".into())),
            };
            Ok(emit(&report, common.format))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
