//! Registry of models with their expected G-functions, anomalies and
//! caustic data, plus a TOML model-file format for user-supplied models.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caustics::Ray;
use crate::expr::{parse, Expression, Node};
use crate::frobenius::{EulerField, FrobeniusError, Prepotential};
use crate::getzler::{self, CausticDatum, GCandidate, GetzlerError, LogTerm};
use crate::sampling;
use crate::scalar::Precision;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("parameter {name}: {msg}")]
    BadParameter { name: String, msg: String },
    #[error("model file: {0}")]
    File(String),
    #[error("model '{model}' failed validation: {msg}")]
    Invalid { model: String, msg: String },
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Getzler(#[from] GetzlerError),
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Residues expected along a probe ray crossing a caustic.
#[derive(Clone, Debug)]
pub struct ResidueProbe {
    pub label: String,
    pub kappa: Expression,
    pub ray: Ray,
    pub dg: BigRational,
    /// Only for 2-dimensional models.
    pub tau: Option<BigRational>,
    pub dlog_j: BigRational,
    /// Expected collision exponent along the ray, when it is a standard caustic.
    pub exponent: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct ModelEntry {
    pub name: String,
    pub params: BTreeMap<String, BigRational>,
    pub prepotential: Prepotential,
    pub g: GCandidate,
    pub gamma: BigRational,
    /// Independent value of the anomaly from a closed formula, when one applies.
    pub reference_gamma: Option<BigRational>,
    pub caustics: Vec<CausticDatum>,
    pub n_log: Option<u32>,
    pub probes: Vec<ResidueProbe>,
    pub notes: Vec<String>,
}

pub const MODEL_NAMES: [&str; 6] = ["cp1", "eaw_a2", "i2", "a3_coxeter", "legendre_s2_a2", "legendre_s3_a2"];

pub fn list_models() -> Vec<&'static str> {
    MODEL_NAMES.to_vec()
}

fn param(params: &BTreeMap<String, BigRational>, name: &str, default: i64) -> BigRational {
    params.get(name).cloned().unwrap_or_else(|| q(default, 1))
}

fn positive_integer(params: &BTreeMap<String, BigRational>, name: &str, default: i64, min: i64) -> Result<i64, CatalogError> {
    let v = param(params, name, default);
    let bad = |msg: &str| CatalogError::BadParameter { name: name.into(), msg: msg.into() };
    if !v.is_integer() {
        return Err(bad("must be an integer"));
    }
    let i: i64 = v.to_integer().try_into().map_err(|_| bad("out of range"))?;
    if i < min {
        return Err(bad(&format!("must be at least {min}")));
    }
    Ok(i)
}

fn reject_unknown(params: &BTreeMap<String, BigRational>, allowed: &[&str]) -> Result<(), CatalogError> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(CatalogError::BadParameter { name: k.clone(), msg: "not a parameter of this model".into() });
        }
    }
    Ok(())
}

fn expr(src: &str) -> Expression {
    parse(src).expect("catalog expressions parse")
}

/// Validated catalog entry.
pub fn get_model(name: &str, params: &BTreeMap<String, BigRational>) -> Result<ModelEntry, CatalogError> {
    let entry = match name {
        "cp1" => cp1(params)?,
        "eaw_a2" => {
            reject_unknown(params, &[])?;
            eaw_a2()?
        }
        "i2" => i2(params)?,
        "a3_coxeter" => {
            reject_unknown(params, &[])?;
            a3_coxeter()?
        }
        "legendre_s2_a2" => {
            reject_unknown(params, &[])?;
            legendre_s2_a2()?
        }
        "legendre_s3_a2" => {
            reject_unknown(params, &[])?;
            legendre_s3_a2()?
        }
        _ => return Err(CatalogError::UnknownModel(name.into())),
    };
    check_entry(&entry)?;
    Ok(entry)
}

fn cp1(params: &BTreeMap<String, BigRational>) -> Result<ModelEntry, CatalogError> {
    reject_unknown(params, &["r"])?;
    let r = positive_integer(params, "r", 2, 1)?;
    let f = expr(&format!("1/2*t1^2*t2 + exp({r}*t2)"));
    let euler = EulerField::new(vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(2, r)]);
    let p = Prepotential::new("cp1", 2, f, 0, euler)?;
    let g = GCandidate { linear: vec![q(0, 1), q(-r, 24)], logs: vec![] };
    let mut params = BTreeMap::new();
    params.insert("r".to_string(), q(r, 1));
    Ok(ModelEntry {
        name: "cp1".into(),
        params,
        gamma: getzler::gamma_theorem1(&p),
        reference_gamma: Some(q(-1, 12)),
        prepotential: p,
        g,
        caustics: vec![],
        n_log: Some(r as u32),
        probes: vec![ResidueProbe {
            label: "t2 -> -inf".into(),
            kappa: Expression::exp_var(1, q(1, 1)),
            ray: Ray::Log { base: vec![q(1, 3), q(0, 1)], index: 1 },
            dg: q(-r, 24),
            tau: Some(q(-r, 16)),
            dlog_j: q(-r, 2),
            exponent: None,
        }],
        notes: vec![
            "logarithmic caustic exp(t2) = 0 with N_log = r".into(),
            "idempotent d/t2-components are +-(1/2) r^(-3/2) exp(-r t2 / 2) in this normalization".into(),
        ],
    })
}

fn eaw_a2() -> Result<ModelEntry, CatalogError> {
    let f = expr("1/2*t1^2*t3 + 1/2*t1*t2^2 - 1/24*t2^4 + t2*exp(t3)");
    let euler = EulerField::new(vec![q(1, 1), q(1, 2), q(0, 1)], vec![q(0, 1), q(0, 1), q(3, 2)]);
    let p = Prepotential::new("eaw_a2", 3, f, 0, euler)?;
    let kappa = expr("4*t2^3 - 27*exp(t3)");
    let caustics = vec![CausticDatum { kappa: kappa.clone(), n: 3, n_log: None }];
    let g = getzler::build_g_eaw(&caustics, 1, 3)?;
    let d_k = q(2, 3);
    Ok(ModelEntry {
        name: "eaw_a2".into(),
        params: BTreeMap::new(),
        gamma: getzler::gamma_theorem1(&p),
        reference_gamma: Some(-q(1, 24) / d_k),
        prepotential: p,
        g,
        caustics,
        n_log: Some(1),
        probes: vec![ResidueProbe {
            label: "t3 -> -inf".into(),
            kappa: Expression::exp_var(2, q(1, 1)),
            ray: Ray::Log { base: vec![q(1, 3), q(1, 1), q(0, 1)], index: 2 },
            dg: q(-1, 24),
            tau: None,
            dlog_j: q(-1, 2),
            exponent: None,
        }],
        notes: vec!["G = -t3/24 is independent of k".into(), "d_k = 2/3".into()],
    })
}

fn i2(params: &BTreeMap<String, BigRational>) -> Result<ModelEntry, CatalogError> {
    reject_unknown(params, &["h"])?;
    let h = positive_integer(params, "h", 5, 3)?;
    let f = expr(&format!("1/2*t1^2*t2 + t2^{}", h + 1));
    let p = Prepotential::new("i2", 2, f, 0, EulerField::linear(vec![q(1, 1), q(2, h)]))?;
    let caustics = vec![CausticDatum { kappa: Expression::var(1), n: h as u32, n_log: None }];
    let g = getzler::build_g_coxeter(&caustics, 2)?;
    let mut params = BTreeMap::new();
    params.insert("h".to_string(), q(h, 1));
    let c = (h - 2) * (h - 3);
    Ok(ModelEntry {
        name: "i2".into(),
        params,
        gamma: getzler::gamma_theorem1(&p),
        reference_gamma: Some(q(-c, 12 * h * h)),
        prepotential: p,
        g,
        caustics,
        n_log: None,
        probes: vec![ResidueProbe {
            label: "t2 = 0".into(),
            kappa: Expression::var(1),
            ray: Ray::Linear { base: vec![q(1, 3), q(0, 1)], dir: vec![q(0, 1), q(1, 1)] },
            dg: q(-c, 24 * h),
            tau: Some(q(-(h - 2) * (h - 2), 16 * h)),
            dlog_j: q(-(h - 2), 2),
            exponent: Some(h as u32),
        }],
        notes: vec![
            "caustic order N_1 read as h".into(),
            "monomial coefficient of t2^(h+1) is a normalization choice; rescaling shifts G by a constant".into(),
        ],
    })
}

fn a3_coxeter() -> Result<ModelEntry, CatalogError> {
    let f = expr("1/2*t1^2*t3 + 1/2*t1*t2^2 - t2^2*t3^2 + 4/15*t3^5");
    let p = Prepotential::new("a3_coxeter", 3, f, 0, EulerField::linear(vec![q(1, 1), q(3, 4), q(1, 2)]))?;
    let kappa = expr("27*t2^2 + 128*t3^3");
    let caustics = vec![CausticDatum { kappa: kappa.clone(), n: 3, n_log: None }];
    let g = getzler::build_g_coxeter(&caustics, 3)?;
    Ok(ModelEntry {
        name: "a3_coxeter".into(),
        params: BTreeMap::new(),
        gamma: getzler::gamma_theorem1(&p),
        reference_gamma: Some(BigRational::zero()),
        prepotential: p,
        g,
        caustics,
        n_log: None,
        probes: vec![ResidueProbe {
            label: "kappa = 0 at (1/5, 4, -3/2)".into(),
            kappa,
            ray: Ray::Linear { base: vec![q(1, 5), q(4, 1), q(-3, 2)], dir: vec![q(0, 1), q(1, 1), q(1, 3)] },
            dg: BigRational::zero(),
            tau: None,
            dlog_j: q(-1, 2),
            exponent: Some(3),
        }],
        notes: vec!["flat coordinates of the x^4 unfolding".into()],
    })
}

fn legendre_s2_a2() -> Result<ModelEntry, CatalogError> {
    let f = expr("1/6*t2^3 + t1*t2*t3 + 1/6*t1*t3^3 + 1/2*t1^2*(log(t1) - 3/4)");
    let p = Prepotential::recover("legendre_s2_a2", 3, f)?;
    let g = GCandidate::zero(3).with_log(q(-1, 12), Expression::var(0));
    Ok(ModelEntry {
        name: "legendre_s2_a2".into(),
        params: BTreeMap::new(),
        gamma: getzler::gamma_theorem1(&p),
        reference_gamma: Some(q(-1, 16) - q(3, 24) * q(1, 2)),
        prepotential: p,
        g,
        caustics: vec![],
        n_log: None,
        probes: vec![],
        notes: vec!["image of eaw_a2 under S_2; identity coordinate and Euler field recovered from F".into()],
    })
}

fn legendre_s3_a2() -> Result<ModelEntry, CatalogError> {
    let f = expr("1/2*t1*t3^2 + 1/2*t2^2*t3 + 1/2*t1^2*log(t2)");
    let p = Prepotential::recover("legendre_s3_a2", 3, f)?;
    let g = GCandidate::zero(3).with_log(q(-1, 8), Expression::var(1));
    Ok(ModelEntry {
        name: "legendre_s3_a2".into(),
        params: BTreeMap::new(),
        gamma: getzler::gamma_theorem1(&p),
        reference_gamma: Some(q(-1, 16) - q(3, 24)),
        prepotential: p,
        g,
        caustics: vec![],
        n_log: None,
        probes: vec![],
        notes: vec!["image of eaw_a2 under S_3; identity coordinate and Euler field recovered from F".into()],
    })
}

/// Load-time invariants: the stored anomaly is the one determined by the
/// charges, G is annihilated by the unit field, and G has the stored
/// Euler derivative.
pub fn check_entry(e: &ModelEntry) -> Result<(), CatalogError> {
    let invalid = |msg: String| CatalogError::Invalid { model: e.name.clone(), msg };
    let p = &e.prepotential;
    if e.g.dim() != p.dim {
        return Err(invalid(format!("G has dimension {}, model has {}", e.g.dim(), p.dim)));
    }
    if p.wdvv_identity() == Some(false) {
        return Err(invalid("WDVV fails identically".into()));
    }
    let g1 = getzler::gamma_theorem1(p);
    if g1 != e.gamma {
        return Err(invalid(format!("stored gamma {} differs from {}", e.gamma, g1)));
    }
    if !e.g.check_bo7(p.identity)? {
        return Err(invalid("G is not constant along the unit field".into()));
    }
    let eg = getzler::euler_derivative_exact(p, &e.g)?;
    if eg != e.gamma {
        return Err(invalid(format!("E(G) = {eg}, stored gamma {}", e.gamma)));
    }
    Ok(())
}

/// Log arguments appearing anywhere in an expression.
pub(crate) fn log_arguments(e: &Expression, out: &mut Vec<Expression>) {
    match e.node() {
        Node::Log(a) => {
            out.push(a.clone());
            log_arguments(a, out);
        }
        Node::Sum(items) | Node::Product(items) => items.iter().for_each(|x| log_arguments(x, out)),
        Node::Pow(b, _) => log_arguments(b, out),
        Node::Quotient(a, b) => {
            log_arguments(a, out);
            log_arguments(b, out);
        }
        Node::Const(_) | Node::Var(_) | Node::Exp(_) => {}
    }
}

/// Smallest value a log argument may take at a sample point.
pub const MIN_LOG_ARGUMENT: f64 = 1.0 / 16.0;

impl ModelEntry {
    /// True when every log argument of F and G is comfortably positive.
    pub fn admissible(&self, point: &[BigRational]) -> bool {
        let mut args = Vec::new();
        log_arguments(&self.prepotential.f, &mut args);
        for l in &self.g.logs {
            args.push(l.arg.clone());
        }
        let x: Vec<f64> = point.iter().map(crate::scalar::rational_to_f64).collect();
        args.iter().all(|a| a.eval_with(&x, Precision::default()).is_ok_and(|v| v >= MIN_LOG_ARGUMENT))
    }

    /// Seeded admissible rational sample points in `[-2, 2]^n`.
    pub fn sample_points(&self, seed: u64, count: usize) -> Vec<Vec<BigRational>> {
        sampling::rational_points(seed, count, self.prepotential.dim, 2, |p| self.admissible(p))
    }

    pub fn dim(&self) -> usize {
        self.prepotential.dim
    }
}

/// Result of checking one catalog entry.
#[derive(Clone, Debug)]
pub struct EntryValidation {
    pub name: String,
    pub passed: bool,
    pub message: String,
    pub getzler_residual: Option<f64>,
}

/// Runs the load-time invariants and a seeded Getzler residual on `entry`.
pub fn validate_entry(entry: &ModelEntry, seed: u64, points: usize, tol: f64, prec: Precision) -> EntryValidation {
    let name = entry.name.clone();
    if let Err(e) = check_entry(entry) {
        return EntryValidation { name, passed: false, message: e.to_string(), getzler_residual: None };
    }
    let pts = entry.sample_points(seed, points);
    match getzler::getzler_residual(&entry.prepotential, &entry.g, &pts, prec, getzler::ResidualMode::Symmetrized) {
        Ok(r) if r.max <= tol => {
            EntryValidation { name, passed: true, message: "ok".into(), getzler_residual: Some(r.max) }
        }
        Ok(r) => EntryValidation {
            name,
            passed: false,
            message: format!("Getzler residual {:e} exceeds {tol:e}", r.max),
            getzler_residual: Some(r.max),
        },
        Err(e) => EntryValidation { name, passed: false, message: e.to_string(), getzler_residual: None },
    }
}

/// Default parameter sets used when validating the whole catalog.
pub fn default_instances() -> Vec<(String, BTreeMap<String, BigRational>)> {
    let mut out = Vec::new();
    for r in 1..=3 {
        out.push(("cp1".to_string(), BTreeMap::from([("r".to_string(), q(r, 1))])));
    }
    out.push(("eaw_a2".to_string(), BTreeMap::new()));
    for h in 3..=6 {
        out.push(("i2".to_string(), BTreeMap::from([("h".to_string(), q(h, 1))])));
    }
    for n in ["a3_coxeter", "legendre_s2_a2", "legendre_s3_a2"] {
        out.push((n.to_string(), BTreeMap::new()));
    }
    out
}

pub fn validate_all(seed: u64, points: usize, tol: f64, prec: Precision) -> Vec<EntryValidation> {
    default_instances()
        .into_iter()
        .map(|(name, params)| match get_model(&name, &params) {
            Ok(e) => validate_entry(&e, seed, points, tol, prec),
            Err(e) => EntryValidation { name, passed: false, message: e.to_string(), getzler_residual: None },
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Reference data without prepotentials.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausticCounts {
    pub group: &'static str,
    pub components: u32,
    pub orders: &'static [u32],
    pub note: Option<&'static str>,
}

/// Number of caustic components and their orders for Coxeter groups.
pub fn caustic_counts() -> Vec<CausticCounts> {
    vec![
        CausticCounts { group: "A_n, D_n, E_6,7,8", components: 1, orders: &[3], note: None },
        CausticCounts { group: "B_n", components: 2, orders: &[4, 3], note: None },
        CausticCounts { group: "F_4", components: 3, orders: &[4, 3, 3], note: None },
        CausticCounts { group: "H_3", components: 2, orders: &[5, 3], note: None },
        CausticCounts { group: "H_4", components: 2, orders: &[5, 3], note: None },
        CausticCounts { group: "I_2(h)", components: 1, orders: &[], note: Some("N_1 = h (printed as k)") },
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxeterGRow {
    pub group: &'static str,
    pub gamma: &'static str,
    pub g: &'static str,
    /// Caustic polynomial in the flat coordinates of the source normalization.
    pub kappa: Option<&'static str>,
    pub order: Option<u32>,
}

/// G-functions of Coxeter orbit spaces. The kappa polynomials assume a
/// specific flat-coordinate normalization that is not reproduced here.
pub fn coxeter_g_table() -> Vec<CoxeterGRow> {
    vec![
        CoxeterGRow { group: "A_n", gamma: "0", g: "0", kappa: None, order: Some(3) },
        CoxeterGRow { group: "B_n", gamma: "(1-n)/(48n)", g: "-1/48 log kappa_1", kappa: None, order: Some(4) },
        CoxeterGRow { group: "D_n", gamma: "0", g: "0", kappa: None, order: Some(3) },
        CoxeterGRow { group: "E_6,7,8", gamma: "0", g: "0", kappa: None, order: Some(3) },
        CoxeterGRow {
            group: "F_4",
            gamma: "-1/48",
            g: "-1/48 log kappa",
            kappa: Some("6*t3^2 - 2*t2*t4^2 + t4^6"),
            order: Some(4),
        },
        CoxeterGRow { group: "H_3", gamma: "-3/100", g: "-1/20 log kappa", kappa: Some("t2 - t3^3"), order: Some(5) },
        CoxeterGRow {
            group: "H_4",
            gamma: "-1/25",
            g: "-1/20 log kappa",
            kappa: Some("2025*t3^2 - 8100*t2*t4^2 + 630*t3*t4^6 - 16*t4^12"),
            order: Some(5),
        },
        CoxeterGRow {
            group: "I_2(h)",
            gamma: "-(h-2)(h-3)/(12h^2)",
            g: "-(h-2)(h-3)/(24h) log t2",
            kappa: Some("t2"),
            order: None,
        },
    ]
}

/// `(1 - n)/(48 n)` for B_n.
pub fn gamma_b(n: i64) -> BigRational {
    q(1 - n, 48 * n)
}

/// `-(h-2)(h-3)/(12 h^2)` for I_2(h).
pub fn gamma_i2(h: i64) -> BigRational {
    q(-(h - 2) * (h - 3), 12 * h * h)
}

/// Scaling anomalies of extended affine Weyl orbit spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EawFamily {
    /// A_l^(k), D_l, E_6,7,8.
    Simply,
    B,
    C,
    F4,
    G2,
}

/// Anomaly for an extended affine family; `l` and `d_k` are ignored for
/// the exceptional rows.
pub fn gamma_eaw(family: EawFamily, l: i64, d_k: &BigRational) -> BigRational {
    match family {
        EawFamily::Simply => -q(1, 24) / d_k,
        EawFamily::B => -q(l + 1, 48) / d_k,
        EawFamily::C => -q(l + 1, 24) / d_k,
        EawFamily::F4 => q(-5, 144),
        EawFamily::G2 => q(-1, 16),
    }
}

// ---------------------------------------------------------------------------
// Model files.

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EulerSpec {
    pub weights: Vec<String>,
    pub shifts: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LogSpec {
    pub coeff: String,
    pub arg: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GSpec {
    pub linear: Vec<String>,
    #[serde(default)]
    pub logs: Vec<LogSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CausticSpec {
    pub kappa: String,
    #[serde(rename = "N")]
    pub n: u32,
}

/// One model per file. Rationals are `"p/q"` strings; `identity_index` is
/// 1-based like the coordinate names `t1 .. tn`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub name: String,
    pub dimension: usize,
    pub identity_index: usize,
    pub euler: EulerSpec,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "G")]
    pub g: GSpec,
    pub gamma: String,
    #[serde(default)]
    pub caustics: Vec<CausticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_log: Option<u32>,
}

fn parse_rational(s: &str) -> Result<BigRational, CatalogError> {
    BigRational::from_str(s.trim()).map_err(|_| CatalogError::File(format!("'{s}' is not a rational p/q")))
}

fn rationals(v: &[String]) -> Result<Vec<BigRational>, CatalogError> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn parse_expr(s: &str) -> Result<Expression, CatalogError> {
    parse(s).map_err(|e| CatalogError::File(format!("expression '{s}': {e}")))
}

impl ModelFile {
    pub fn into_entry(self) -> Result<ModelEntry, CatalogError> {
        let n = self.dimension;
        if self.identity_index == 0 || self.identity_index > n {
            return Err(CatalogError::File(format!("identity_index {} outside 1..={n}", self.identity_index)));
        }
        let euler = EulerField::new(rationals(&self.euler.weights)?, rationals(&self.euler.shifts)?);
        let f = parse_expr(&self.f)?;
        let p = Prepotential::new(self.name.clone(), n, f, self.identity_index - 1, euler)?;
        let linear = rationals(&self.g.linear)?;
        if linear.len() != n {
            return Err(CatalogError::File(format!("G.linear has {} entries, expected {n}", linear.len())));
        }
        let logs = self
            .g
            .logs
            .iter()
            .map(|l| Ok(LogTerm { coeff: parse_rational(&l.coeff)?, arg: parse_expr(&l.arg)? }))
            .collect::<Result<Vec<_>, CatalogError>>()?;
        let caustics = self
            .caustics
            .iter()
            .map(|c| Ok(CausticDatum { kappa: parse_expr(&c.kappa)?, n: c.n, n_log: None }))
            .collect::<Result<Vec<_>, CatalogError>>()?;
        let entry = ModelEntry {
            name: self.name,
            params: BTreeMap::new(),
            g: GCandidate { linear, logs },
            gamma: parse_rational(&self.gamma)?,
            reference_gamma: None,
            prepotential: p,
            caustics,
            n_log: self.n_log,
            probes: vec![],
            notes: vec!["loaded from a model file".into()],
        };
        check_entry(&entry)?;
        Ok(entry)
    }

    pub fn from_entry(e: &ModelEntry) -> ModelFile {
        let s = |v: &[BigRational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let p = &e.prepotential;
        ModelFile {
            name: e.name.clone(),
            dimension: p.dim,
            identity_index: p.identity + 1,
            euler: EulerSpec { weights: s(&p.euler.weights), shifts: s(&p.euler.shifts) },
            f: p.f.to_string(),
            g: GSpec {
                linear: s(&e.g.linear),
                logs: e.g.logs.iter().map(|l| LogSpec { coeff: l.coeff.to_string(), arg: l.arg.to_string() }).collect(),
            },
            gamma: e.gamma.to_string(),
            caustics: e.caustics.iter().map(|c| CausticSpec { kappa: c.kappa.to_string(), n: c.n }).collect(),
            n_log: e.n_log,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model files serialize")
    }

    pub fn from_toml(src: &str) -> Result<ModelFile, CatalogError> {
        toml::from_str(src).map_err(|e| CatalogError::File(e.to_string()))
    }
}

pub fn load_model_file(path: &Path) -> Result<ModelEntry, CatalogError> {
    let src = std::fs::read_to_string(path).map_err(|e| CatalogError::File(format!("{}: {e}", path.display())))?;
    ModelFile::from_toml(&src)?.into_entry()
}

pub fn write_model_file(entry: &ModelEntry, path: &Path) -> Result<(), CatalogError> {
    std::fs::write(path, ModelFile::from_entry(entry).to_toml())
        .map_err(|e| CatalogError::File(format!("{}: {e}", path.display())))
}

/// `p/q` for display in reports; integers render without a denominator.
pub fn rational_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
