//! Check suites over catalog entries and the report format shared by the
//! CLI and the C interface.

use std::fmt::Write as _;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{rational_string, ModelEntry};
use crate::caustics::{self, point_at};
use crate::getzler::{self, GetzlerError, ResidualMode};
use crate::scalar::{format_sci, rational_to_f64, MpFloat, Precision, Scalar};

pub const SCHEMA_VERSION: u32 = 1;

/// Residue probes are limited by extrapolation, not by working precision.
pub const RESIDUE_TOL: f64 = 1e-3;

pub const ALL_CHECKS: [&str; 7] = ["wdvv", "getzler", "bo7", "bo8", "bo9", "gamma", "caustic-residues"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown check '{0}'")]
    UnknownCheck(String),
    #[error(transparent)]
    Getzler(#[from] GetzlerError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub max_residual: String,
    pub tolerance: String,
    pub points: usize,
    pub notes: Vec<String>,
}

impl CheckResult {
    pub fn measured(name: &str, residual: f64, tol: f64, points: usize, notes: Vec<String>) -> Self {
        let status = if residual <= tol { Status::Pass } else { Status::Fail };
        CheckResult {
            name: name.into(),
            status,
            max_residual: format_sci(residual, 6),
            tolerance: format_sci(tol, 6),
            points,
            notes,
        }
    }

    /// A check that could not produce a residual.
    pub fn failed(name: &str, tol: f64, note: String) -> Self {
        CheckResult {
            name: name.into(),
            status: Status::Fail,
            max_residual: "inf".into(),
            tolerance: format_sci(tol, 6),
            points: 0,
            notes: vec![note],
        }
    }

    pub fn skipped(name: &str, tol: f64, note: &str) -> Self {
        CheckResult {
            name: name.into(),
            status: Status::Skipped,
            max_residual: "0".into(),
            tolerance: format_sci(tol, 6),
            points: 0,
            notes: vec![note.into()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub theorem1: String,
    pub euler_applied: String,
    pub table_value: Option<String>,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub model: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub gamma: Option<GammaReport>,
}

impl VerificationReport {
    pub fn new(model: &str, seed: u64) -> Self {
        VerificationReport { schema_version: SCHEMA_VERSION, model: model.into(), seed, checks: vec![], gamma: None }
    }

    /// No check failed; skipped checks do not count against a report.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model {}  seed {}", self.model, self.seed);
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            };
            let _ = writeln!(
                s,
                "  {:<18} {:<5} residual {:>13}  tol {:>13}  points {}",
                c.name, status, c.max_residual, c.tolerance, c.points
            );
            for n in &c.notes {
                let _ = writeln!(s, "      {n}");
            }
        }
        if let Some(g) = &self.gamma {
            let _ = writeln!(
                s,
                "  gamma: theorem1 {}  E(G) {}  table {}  consistent {}",
                g.theorem1,
                g.euler_applied,
                g.table_value.as_deref().unwrap_or("-"),
                g.consistent
            );
        }
        let _ = writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
    pub prec: Precision,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { points: 100, seed: 0, tol: 1e-9, prec: Precision::default() }
    }
}

/// Parses a comma-separated check list; empty means every check.
pub fn parse_checks(list: Option<&str>) -> Result<Vec<String>, ReportError> {
    let Some(list) = list else {
        return Ok(ALL_CHECKS.iter().map(|s| s.to_string()).collect());
    };
    let mut out = Vec::new();
    for c in list.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        if !ALL_CHECKS.contains(&c) {
            return Err(ReportError::UnknownCheck(c.into()));
        }
        out.push(c.to_string());
    }
    Ok(out)
}

fn mp(point: &[BigRational], prec: Precision) -> Vec<MpFloat> {
    point_at(point, prec)
}

fn max_over<F>(pts: &[Vec<BigRational>], f: F) -> Result<f64, String>
where
    F: Fn(&[BigRational]) -> Result<f64, String> + Sync,
{
    let vals: Vec<f64> = pts.par_iter().map(|p| f(p)).collect::<Result<_, _>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

fn check_wdvv(e: &ModelEntry, pts: &[Vec<BigRational>], o: &VerifyOptions) -> CheckResult {
    let p = &e.prepotential;
    let symbolic = p.wdvv_identity();
    let numeric = max_over(pts, |pt| {
        p.frame::<MpFloat>(&mp(pt, o.prec), o.prec, 3).map(|fr| fr.wdvv_residual().as_f64()).map_err(|e| e.to_string())
    });
    let note = match symbolic {
        Some(true) => "symbolic: vanishes identically",
        Some(false) => "symbolic: nonzero",
        None => "symbolic: not decidable in the polynomial ring",
    };
    match numeric {
        Ok(r) => CheckResult::measured("wdvv", r, o.tol, pts.len(), vec![note.into()]),
        Err(msg) => CheckResult::failed("wdvv", o.tol, msg),
    }
}

fn check_getzler(e: &ModelEntry, pts: &[Vec<BigRational>], o: &VerifyOptions) -> CheckResult {
    match getzler::getzler_residual(&e.prepotential, &e.g, pts, o.prec, ResidualMode::Symmetrized) {
        Ok(r) => {
            let note = if r.exact { "rational arithmetic" } else { "multiprecision arithmetic" };
            CheckResult::measured("getzler", r.max, o.tol, r.points, vec![note.into()])
        }
        Err(err) => CheckResult::failed("getzler", o.tol, err.to_string()),
    }
}

fn check_bo7(e: &ModelEntry, pts: &[Vec<BigRational>], o: &VerifyOptions) -> CheckResult {
    let k = e.prepotential.identity;
    let identically = match e.g.check_bo7(k) {
        Ok(b) => b,
        Err(err) => return CheckResult::failed("bo7", o.tol, err.to_string()),
    };
    let dg = e.g.to_expression().diff(k);
    let numeric = max_over(pts, |pt| {
        dg.eval_with(&mp(pt, o.prec), o.prec).map(|v| v.magnitude().as_f64()).map_err(|e| e.to_string())
    });
    let note = if identically { "d_e G vanishes identically" } else { "d_e G is not identically zero" };
    match numeric {
        Ok(r) => CheckResult::measured("bo7", r, o.tol, pts.len(), vec![note.into()]),
        Err(msg) => CheckResult::failed("bo7", o.tol, msg),
    }
}

fn check_bo8(e: &ModelEntry, pts: &[Vec<BigRational>], o: &VerifyOptions) -> CheckResult {
    let r = max_over(pts, |pt| {
        getzler::check_bo8(&e.prepotential, &e.g, pt, o.prec).map(|c| c.residual).map_err(|e| e.to_string())
    });
    let gamma = rational_string(&getzler::gamma_theorem1(&e.prepotential));
    let notes = vec![format!("E(G) compared with {gamma}")];
    match r {
        Ok(r) => CheckResult::measured("bo8", r, o.tol, pts.len(), notes),
        Err(msg) => CheckResult::failed("bo8", o.tol, msg),
    }
}

fn check_bo9(e: &ModelEntry, pts: &[Vec<BigRational>], o: &VerifyOptions) -> CheckResult {
    let mut worst = 0.0f64;
    for k in [2, 3] {
        match max_over(pts, |pt| {
            getzler::check_bo9(&e.prepotential, &e.g, k, pt, o.prec).map(|c| c.residual).map_err(|e| e.to_string())
        }) {
            Ok(r) => worst = worst.max(r),
            Err(msg) => return CheckResult::failed("bo9", o.tol, format!("k = {k}: {msg}")),
        }
    }
    CheckResult::measured("bo9", worst, o.tol, pts.len(), vec!["k = 2, 3".into()])
}

/// Compares the anomaly from the charges, E(G) and the closed-form value.
pub fn gamma_report(e: &ModelEntry) -> Result<GammaReport, GetzlerError> {
    let t1 = getzler::gamma_theorem1(&e.prepotential);
    let eg = getzler::euler_derivative_exact(&e.prepotential, &e.g)?;
    let consistent = t1 == eg && e.reference_gamma.as_ref().is_none_or(|r| *r == t1);
    Ok(GammaReport {
        theorem1: rational_string(&t1),
        euler_applied: rational_string(&eg),
        table_value: e.reference_gamma.as_ref().map(rational_string),
        consistent,
    })
}

fn check_gamma(e: &ModelEntry, o: &VerifyOptions) -> (CheckResult, Option<GammaReport>) {
    match gamma_report(e) {
        Ok(g) => {
            // Exact comparison; a mismatch is reported as an infinite residual.
            let r = if g.consistent { 0.0 } else { f64::INFINITY };
            (CheckResult::measured("gamma", r, o.tol, 0, vec!["exact rational comparison".into()]), Some(g))
        }
        Err(err) => (CheckResult::failed("gamma", o.tol, err.to_string()), None),
    }
}

/// Residues of dG, d log tau (2D only) and d log J against expected values.
pub fn check_residues(e: &ModelEntry, probes: &[crate::catalog::ResidueProbe], o: &VerifyOptions) -> CheckResult {
    if probes.is_empty() {
        return CheckResult::skipped("caustic-residues", RESIDUE_TOL, "no probe rays for this model");
    }
    let p = &e.prepotential;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut count = 0;
    for probe in probes {
        let mut record = |what: &str, est: Result<caustics::ResidueEstimate, caustics::CausticError>, want: &BigRational| {
            count += 1;
            match est {
                Ok(r) => {
                    let dev = (r.value - rational_to_f64(want)).abs();
                    worst = worst.max(dev);
                    notes.push(format!("{}: {what} = {:.6} (expected {})", probe.label, r.value, rational_string(want)));
                }
                Err(err) => {
                    worst = f64::INFINITY;
                    notes.push(format!("{}: {what} failed: {err}", probe.label));
                }
            }
        };
        record("res dG", caustics::residue_probe(caustics::dg_form(&e.g), &probe.kappa, &probe.ray, o.prec), &probe.dg);
        if let Some(t) = &probe.tau {
            let est = caustics::residue_probe(
                |pt: &[MpFloat], v: &[MpFloat], pr| caustics::tau2d_form(p, pt, v, pr),
                &probe.kappa,
                &probe.ray,
                o.prec,
            );
            record("res dlog tau", est, t);
        }
        let est = caustics::residue_probe(
            |pt: &[MpFloat], v: &[MpFloat], pr| caustics::dlog_jacobian(p, pt, v, pr),
            &probe.kappa,
            &probe.ray,
            o.prec,
        );
        record("res dlog J", est, &probe.dlog_j);
    }
    if worst.is_infinite() {
        let mut c = CheckResult::failed("caustic-residues", RESIDUE_TOL, notes.remove(notes.len() - 1));
        c.notes = notes;
        c.points = count;
        return c;
    }
    CheckResult::measured("caustic-residues", worst, RESIDUE_TOL, count, notes)
}

/// Runs `checks` on `entry` at `opts.points` seeded admissible points.
pub fn verify(entry: &ModelEntry, checks: &[String], opts: &VerifyOptions) -> VerificationReport {
    let mut report = VerificationReport::new(&entry.name, opts.seed);
    let pts = entry.sample_points(opts.seed, opts.points);
    for c in checks {
        let result = match c.as_str() {
            "wdvv" => check_wdvv(entry, &pts, opts),
            "getzler" => check_getzler(entry, &pts, opts),
            "bo7" => check_bo7(entry, &pts, opts),
            "bo8" => check_bo8(entry, &pts, opts),
            "bo9" => check_bo9(entry, &pts, opts),
            "gamma" => {
                let (r, g) = check_gamma(entry, opts);
                report.gamma = g;
                r
            }
            "caustic-residues" => check_residues(entry, &entry.probes, opts),
            other => CheckResult::failed(other, opts.tol, "unknown check".into()),
        };
        report.checks.push(result);
    }
    if report.gamma.is_none() {
        report.gamma = gamma_report(entry).ok();
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_model;
    use std::collections::BTreeMap;

    fn opts(points: usize) -> VerifyOptions {
        VerifyOptions { points, ..VerifyOptions::default() }
    }

    #[test]
    fn check_lists() {
        assert_eq!(parse_checks(None).unwrap().len(), ALL_CHECKS.len());
        assert_eq!(parse_checks(Some("bo8, getzler")).unwrap(), vec!["bo8", "getzler"]);
        assert!(matches!(parse_checks(Some("bo8,nope")), Err(ReportError::UnknownCheck(_))));
    }

    #[test]
    fn status_tracks_residual_against_tolerance() {
        assert_eq!(CheckResult::measured("x", 1e-10, 1e-9, 1, vec![]).status, Status::Pass);
        assert_eq!(CheckResult::measured("x", 1e-9, 1e-9, 1, vec![]).status, Status::Pass);
        assert_eq!(CheckResult::measured("x", 2e-9, 1e-9, 1, vec![]).status, Status::Fail);
    }

    #[test]
    fn full_suite_on_cp1() {
        let e = get_model("cp1", &BTreeMap::from([("r".to_string(), crate::expr::rat(2, 1))])).unwrap();
        let checks = parse_checks(None).unwrap();
        let r = verify(&e, &checks, &opts(8));
        assert!(r.passed(), "{}", r.to_text());
        let g = r.gamma.unwrap();
        assert_eq!((g.theorem1.as_str(), g.euler_applied.as_str()), ("-1/12", "-1/12"));
    }

    #[test]
    fn wrong_g_fails_bo8_and_gamma() {
        let mut e = get_model("cp1", &BTreeMap::new()).unwrap();
        e.g.linear[1] = crate::expr::rat(-1, 13);
        let r = verify(&e, &["bo8".into(), "gamma".into()], &opts(4));
        assert!(r.checks.iter().all(|c| c.status == Status::Fail), "{}", r.to_text());
    }

    #[test]
    fn json_is_deterministic() {
        let e = get_model("eaw_a2", &BTreeMap::new()).unwrap();
        let checks = parse_checks(Some("getzler,bo8")).unwrap();
        let a = verify(&e, &checks, &VerifyOptions { seed: 7, points: 6, ..Default::default() }).to_json();
        let b = verify(&e, &checks, &VerifyOptions { seed: 7, points: 6, ..Default::default() }).to_json();
        assert_eq!(a, b);
        let back: VerificationReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back.schema_version, SCHEMA_VERSION);
    }
}
