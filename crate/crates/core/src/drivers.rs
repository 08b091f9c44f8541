//! Report builders for caustic probes, Landau-Ginzburg sweeps and symmetry
//! transforms.

use num_rational::BigRational;

use crate::catalog::{rational_string, ModelEntry, ResidueProbe};
use crate::caustics::{self, Ray};
use crate::getzler::{self, ResidualMode};
use crate::lgmodels::{self, Superpotential};
use crate::report::{check_residues, CheckResult, VerificationReport, VerifyOptions};
use crate::scalar::{format_sci, rational_to_f64, Precision, Scalar};
use crate::symmetry::{self, LegendrePair};

/// Allowed deviation of a fitted collision exponent from its expected value.
pub const EXPONENT_TOL: f64 = 0.02;
/// Band half-width for exponents fitted along random unfolding paths.
pub const LG_EXPONENT_TOL: f64 = 0.1;
/// Tolerance for Legendre comparisons and for the hatted anomaly.
pub const LEGENDRE_TOL: f64 = 1e-8;

/// Replaces each probe's direction by the coordinate axis `t_{axis+1}`.
pub fn probes_along(entry: &ModelEntry, axis: usize) -> Vec<ResidueProbe> {
    let n = entry.dim();
    entry
        .probes
        .iter()
        .map(|p| {
            let ray = match &p.ray {
                Ray::Linear { base, .. } => {
                    let dir = (0..n).map(|i| BigRational::from_integer(i64::from(i == axis).into())).collect();
                    Ray::Linear { base: base.clone(), dir }
                }
                Ray::Log { base, .. } => Ray::Log { base: base.clone(), index: axis },
            };
            ResidueProbe { ray, label: format!("{} along t{}", p.label, axis + 1), ..p.clone() }
        })
        .collect()
}

fn exponent_check(entry: &ModelEntry, probes: &[ResidueProbe], prec: Precision) -> CheckResult {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut count = 0;
    for p in probes {
        let Some(n) = p.exponent else {
            notes.push(format!("{}: logarithmic caustic, no power-law exponent", p.label));
            continue;
        };
        count += 1;
        match caustics::collision_exponent(&entry.prepotential, &p.ray, prec) {
            Ok(fit) => {
                worst = worst.max((fit.exponent - n as f64).abs());
                notes.push(format!("{}: N = {:.5} (expected {n})", p.label, fit.exponent));
            }
            Err(e) => return CheckResult::failed("collision-exponent", EXPONENT_TOL, format!("{}: {e}", p.label)),
        }
    }
    if count == 0 {
        let note = notes.pop().unwrap_or_else(|| "no probe rays".into());
        return CheckResult::skipped("collision-exponent", EXPONENT_TOL, &note);
    }
    CheckResult::measured("collision-exponent", worst, EXPONENT_TOL, count, notes)
}

/// Collision exponents and residues along the entry's probe rays, or along
/// the coordinate axis `axis` through the same base points.
pub fn caustic_report(entry: &ModelEntry, axis: Option<usize>, opts: &VerifyOptions) -> VerificationReport {
    let probes = match axis {
        Some(a) => probes_along(entry, a),
        None => entry.probes.clone(),
    };
    let mut r = VerificationReport::new(&entry.name, opts.seed);
    r.checks.push(exponent_check(entry, &probes, opts.prec));
    let mut res = check_residues(entry, &probes, opts);
    res.notes.push(format!("label convention: {}", caustics::RESIDUE_LABEL_NOTE));
    r.checks.push(res);
    r
}

/// Exponents along `paths` seeded transversal paths starting at `opts.seed`.
pub fn lg_sweep_report(k: u32, m: u32, paths: usize, opts: &VerifyOptions) -> VerificationReport {
    let name = format!("lg(k={k},m={m})");
    let mut r = VerificationReport::new(&name, opts.seed);
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for i in 0..paths as u64 {
        let seed = opts.seed + i;
        let fit = lgmodels::transversal_path(k, m, seed).and_then(|p| lgmodels::lg_collision_exponent(&p, opts.prec));
        match fit {
            Ok(f) => {
                worst = worst.max((f.exponent - 3.0).abs());
                notes.push(format!("path {seed}: N = {:.5}", f.exponent));
            }
            Err(e) => {
                r.checks.push(CheckResult::failed("collision-exponent", LG_EXPONENT_TOL, format!("path {seed}: {e}")));
                return r;
            }
        }
    }
    r.checks.push(CheckResult::measured("collision-exponent", worst, LG_EXPONENT_TOL, paths, notes));
    r
}

/// Critical points and values of one superpotential.
pub fn lg_point_report(k: u32, m: u32, coeffs: &[BigRational], opts: &VerifyOptions) -> VerificationReport {
    let name = format!("lg(k={k},m={m})");
    let mut r = VerificationReport::new(&name, opts.seed);
    let result = (|| -> Result<CheckResult, lgmodels::LgError> {
        let sp = Superpotential::from_rationals(k, m, coeffs, opts.prec)?;
        let xs = lgmodels::critical_points(&sp, opts.prec)?;
        let mut worst = 0.0f64;
        let mut notes = Vec::new();
        for x in &xs {
            worst = worst.max(sp.derivative(x, opts.prec)?.abs().as_f64());
            let u = sp.eval(x, opts.prec)?;
            let (xr, xi) = x.to_f64_pair();
            let (ur, ui) = u.to_f64_pair();
            notes.push(format!("x = {xr:.12} {xi:+.12}i  u = {ur:.12} {ui:+.12}i"));
        }
        let disc = lgmodels::lg_caustic_indicator(&sp, opts.prec)?.abs().as_f64();
        notes.push(format!("|prod (u_i - u_j)^2| = {}", format_sci(disc, 6)));
        Ok(CheckResult::measured("critical-points", worst, opts.tol, xs.len(), notes))
    })();
    r.checks.push(result.unwrap_or_else(|e| CheckResult::failed("critical-points", opts.tol, e.to_string())));
    r
}

/// Catalog entry holding the image of `name` under `S_kappa` (0-based).
pub fn legendre_target(name: &str, kappa: usize) -> Option<&'static str> {
    match (name, kappa) {
        ("eaw_a2", 1) => Some("legendre_s2_a2"),
        ("eaw_a2", 2) => Some("legendre_s3_a2"),
        _ => None,
    }
}

/// Legendre pair check, G transform, anomaly rule and Getzler's equation on
/// the hatted side.
pub fn legendre_report(source: &ModelEntry, target: &ModelEntry, kappa: usize, opts: &VerifyOptions) -> VerificationReport {
    let name = format!("{} -> {} (S_{})", source.name, target.name, kappa + 1);
    let mut r = VerificationReport::new(&name, opts.seed);
    let pair = match LegendrePair::new(&source.prepotential, &target.prepotential, kappa) {
        Ok(p) => p,
        Err(e) => {
            r.checks.push(CheckResult::failed("legendre", LEGENDRE_TOL, e.to_string()));
            return r;
        }
    };
    let pts = symmetry::legendre_points(&pair, &target.g, opts.seed, opts.points, opts.prec);

    r.checks.push(match symmetry::legendre_check_points(&source.prepotential, &target.prepotential, kappa, &pts, opts.prec) {
        Ok(s) => {
            let offsets: Vec<String> = s
                .offset
                .iter()
                .enumerate()
                .flat_map(|(a, row)| row.iter().enumerate().map(move |(b, v)| (a, b, *v)))
                .filter(|(a, b, v)| a <= b && v.abs() > LEGENDRE_TOL)
                .map(|(a, b, v)| format!("({},{}): {v:.12}", a + 1, b + 1))
                .collect();
            let notes = vec![
                format!("third derivatives: {}", format_sci(s.third, 3)),
                format!("constant second-derivative offset: {}", if offsets.is_empty() { "none".into() } else { offsets.join(", ") }),
            ];
            CheckResult::measured("legendre", s.residual(), LEGENDRE_TOL, s.points, notes)
        }
        Err(e) => CheckResult::failed("legendre", LEGENDRE_TOL, e.to_string()),
    });

    r.checks.push(
        match symmetry::transform_g_legendre(&source.g, &source.prepotential, kappa)
            .and_then(|t| symmetry::compare_hatted_gradients(&t, &source.prepotential, kappa, &target.g, &pts, opts.prec).map(|v| (t, v)))
        {
            Ok((t, v)) => CheckResult::measured(
                "g-transform",
                v,
                LEGENDRE_TOL,
                pts.len(),
                vec![format!("pulled back: {}", t.expr), format!("target: {}", target.g.to_expression()), t.tau_rule.into()],
            ),
            Err(e) => CheckResult::failed("g-transform", LEGENDRE_TOL, e.to_string()),
        },
    );

    let q_kappa = source.prepotential.charges()[kappa].clone();
    let rule = symmetry::transform_gamma_legendre(&source.gamma, source.dim(), &q_kappa);
    let hatted_pts: Vec<_> = target.sample_points(opts.seed, opts.points.clamp(1, 20));
    let hatted_mp: Vec<_> = hatted_pts.iter().map(|p| caustics::point_at(p, opts.prec)).collect();
    r.checks.push(match symmetry::euler_on_g(&target.prepotential, &target.g, &hatted_mp, opts.prec) {
        Ok((mean, spread)) => {
            let exact = getzler::gamma_theorem1(&target.prepotential) == rule;
            let dev = (mean - rational_to_f64(&rule)).abs().max(spread);
            let dev = if exact { dev } else { f64::INFINITY };
            CheckResult::measured(
                "gamma-transform",
                dev,
                LEGENDRE_TOL,
                hatted_mp.len(),
                vec![
                    format!("rule gives {}", rational_string(&rule)),
                    format!("hatted charges give {}", rational_string(&getzler::gamma_theorem1(&target.prepotential))),
                    format!("hatted E(G) = {mean:.12}"),
                ],
            )
        }
        Err(e) => CheckResult::failed("gamma-transform", LEGENDRE_TOL, e.to_string()),
    });

    let gpts = target.sample_points(opts.seed, opts.points);
    r.checks.push(
        match getzler::getzler_residual(&target.prepotential, &target.g, &gpts, opts.prec, ResidualMode::Symmetrized) {
            Ok(res) => CheckResult::measured("getzler-hatted", res.max, opts.tol, res.points, vec![]),
            Err(e) => CheckResult::failed("getzler-hatted", opts.tol, e.to_string()),
        },
    );
    r
}

/// Inversion rules applied to the entry's G and γ.
pub fn inversion_report(entry: &ModelEntry, opts: &VerifyOptions) -> VerificationReport {
    let mut r = VerificationReport::new(&format!("{} (inversion)", entry.name), opts.seed);
    let p = &entry.prepotential;
    r.checks.push(match symmetry::transform_g_inversion(&entry.g, &p.euler, &p.d) {
        Ok(inv) => CheckResult::measured(
            "inversion",
            0.0,
            opts.tol,
            0,
            vec![
                format!("G_hat = {}", inv.g_hat.to_expression()),
                format!("gamma_hat = {}", rational_string(&(entry.gamma.clone() + inv.gamma_shift))),
                inv.tau_rule.into(),
            ],
        ),
        Err(e) => CheckResult::failed("inversion", opts.tol, e.to_string()),
    });
    r
}
