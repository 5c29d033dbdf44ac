use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fil::basis::{Basis, BasisTable, Parity, SquareNode};
use fil::bounds_lab::{
    analyticity_demo, basis_growth, circle_points, decay_fit, decay_samples, exponential_rate, growth_from_values,
    growth_in_index, lower_bound_fit, synthesize_complex,
};
use fil::error::FilError;
use fil::interpolate::{direct_synthesis, nodes_for, parse_grid, reconstruct as rebuild, sample, TestFunction};
use fil::nodes::{classify_pair, match_nodes, NodePlan, Perturbation};
use fil::perturb_op::{
    build_truncation, eval_perturbed_basis, matrix_csv, summary_json, unweighted_inverse, Inverse, OperatorTruncation,
    PerturbedBasisCoeffs, WeightScheme,
};
use num_complex::Complex;
use serde_json::json;

use crate::config::RunConfig;
use crate::report::{write_csv, write_json};

#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Fil(FilError),
}

impl From<FilError> for CmdError {
    fn from(e: FilError) -> Self {
        CmdError::Fil(e)
    }
}

type CmdResult = Result<bool, CmdError>;

fn cache_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.join("cache")
}

fn basis_cache(cfg: &RunConfig) -> PathBuf {
    cache_dir(cfg).join("basis.bin")
}

fn point_cache(cfg: &RunConfig) -> PathBuf {
    cache_dir(cfg).join(format!("{}-{}.bin", cfg.command, &cfg.hash()[..16]))
}

/// Basis for downstream commands; insists on the cache written by `basis`
/// with the same n_max, precision and quadrature settings.
fn checked_basis(cfg: &RunConfig) -> Result<Basis, CmdError> {
    let path = basis_cache(cfg);
    let hint = format!(
        "run `fil basis --nmax {} --precision {} --out {}` first",
        cfg.n_max,
        precision_name(cfg),
        cfg.out.display()
    );
    let table = match BasisTable::load(&path) {
        Ok(t) => t,
        Err(FilError::Io(_)) => {
            return Err(CmdError::Usage(format!("no basis cache at {}; {hint}", path.display())));
        }
        Err(e) => return Err(CmdError::Usage(format!("basis cache at {} is unusable ({e}); {hint}", path.display()))),
    };
    let basis = Basis::new(cfg.n_max, cfg.precision, cfg.quad.clone())?;
    let h = &table.header;
    if h.n_max != basis.n_max() || h.bits != basis.bits() || h.quad != *basis.params() {
        return Err(CmdError::Usage(format!("basis cache at {} was built with other settings; {hint}", path.display())));
    }
    if cfg.truncation() > cfg.n_max {
        return Err(CmdError::Usage(format!("truncation {} exceeds n_max {}", cfg.truncation(), cfg.n_max)));
    }
    Ok(basis)
}

fn precision_name(cfg: &RunConfig) -> &'static str {
    match cfg.precision {
        fil::scalar::Precision::Double => "double",
        fil::scalar::Precision::Extended => "extended",
    }
}

fn table_for(cfg: &RunConfig, basis: &Basis, real: &[SquareNode], complex: &[Complex<f64>]) -> Result<BasisTable, CmdError> {
    let (t, rebuilt) = BasisTable::load_or_build(&point_cache(cfg), basis, real, complex, cfg.jobs)?;
    if rebuilt {
        eprintln!("tabulated {} real and {} complex points", real.len(), complex.len());
    }
    Ok(t)
}

fn note(path: &Path) {
    println!("wrote {}", path.display());
}

/// Expected (a_n(√m), â_n(√m)). At the origin a_0 = â_0 = ½ and, for
/// square n ≥ 1, a_n(0) = −1, â_n(0) = 1.
fn expected_delta(n: usize, m: usize) -> (f64, f64) {
    if m == 0 {
        let r = (n as f64).sqrt().round() as usize;
        return match n {
            0 => (0.5, 0.5),
            _ if r * r == n => (-1.0, 1.0),
            _ => (0.0, 0.0),
        };
    }
    (if n == m { 1.0 } else { 0.0 }, 0.0)
}

pub fn basis(cfg: &RunConfig) -> CmdResult {
    let basis = Basis::new(cfg.n_max, cfg.precision, cfg.quad.clone())?;
    let nodes: Vec<SquareNode> = (0..=cfg.n_max as u64).map(SquareNode::exact).collect();
    let (table, rebuilt) = BasisTable::load_or_build(&basis_cache(cfg), &basis, &nodes, &[], cfg.jobs)?;
    let mut csv = String::from("n,m,a,a_hat,expected_a,expected_a_hat\n");
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for n in 0..=cfg.n_max {
        for (i, node) in nodes.iter().enumerate() {
            let m = node.k as usize;
            let (a, ah) = table.a_real(n, i)?;
            let (ea, eah) = expected_delta(n, m);
            let err = (a - ea).abs().max((ah - eah).abs());
            worst = worst.max(err);
            if !(err < cfg.tol) {
                failures.push(json!({ "n": n, "m": m, "a": a, "a_hat": ah, "error": err }));
            }
            let _ = writeln!(csv, "{n},{m},{a:e},{ah:e},{ea},{eah}");
        }
    }
    let pass = failures.is_empty();
    note(&write_csv(cfg, "basis_deltas", &csv)?);
    note(&write_json(
        cfg,
        "basis",
        json!({
            "n_max": cfg.n_max,
            "bits": basis.bits(),
            "cache": basis_cache(cfg),
            "rebuilt": rebuilt,
            "tolerance": cfg.tol,
            "max_delta_error": worst,
            "pass": pass,
            "failures": failures,
        }),
    )?);
    if pass {
        println!("interpolation deltas hold to {worst:e} (tolerance {:e})", cfg.tol);
    } else {
        eprintln!("invariant failed: interpolation deltas a_n(sqrt m) off by up to {worst:e} (tolerance {:e})", cfg.tol);
    }
    Ok(pass)
}

fn plan(cfg: &RunConfig) -> Result<NodePlan, CmdError> {
    Ok(NodePlan::new(cfg.truncation(), cfg.perturbation(), cfg.weight.clone())?)
}

/// Neumann when the defect allows it, otherwise the direct inverse.
fn invert(cfg: &RunConfig, op: &OperatorTruncation) -> Result<(Inverse, Option<Inverse>, Inverse), CmdError> {
    let direct = op.invert_direct()?;
    let neumann = match op.invert_neumann(cfg.neumann_tol, cfg.neumann_terms) {
        Ok(inv) => Some(inv),
        Err(e) => {
            eprintln!("warning: {e}; falling back to the direct inverse");
            None
        }
    };
    let chosen = neumann.clone().unwrap_or_else(|| direct.clone());
    Ok((chosen, neumann, direct))
}

pub fn perturb(cfg: &RunConfig) -> CmdResult {
    let basis = checked_basis(cfg)?;
    let plan = plan(cfg)?;
    let table = table_for(cfg, &basis, &plan.all_nodes(), &[])?;
    let op = build_truncation(&plan, &table)?;
    let n = plan.truncation;
    let (chosen, neumann, direct) = invert(cfg, &op)?;
    let agreement = neumann.as_ref().map(|ne| (&ne.matrix - &direct.matrix).amax());
    let coeffs = PerturbedBasisCoeffs::from_inverse(&chosen, &plan.weight, n);

    // h_n(x_m) − δ_{nm} over m ≥ 1.
    let mut delta_error = 0.0f64;
    for (m, node) in plan.space_nodes().iter().enumerate().skip(1) {
        let i = table.find_real(*node).ok_or(FilError::MissingValue { n: 0, node: m })?;
        for (k, (h, _)) in eval_perturbed_basis(&coeffs, &table, i)?.iter().enumerate() {
            delta_error = delta_error.max((h - if k == m { 1.0 } else { 0.0 }).abs());
        }
    }

    note(&write_csv(cfg, "operator", &op.to_csv())?);
    note(&write_csv(cfg, "inverse", &matrix_csv(&unweighted_inverse(&chosen, &plan.weight, n)))?);
    note(&write_csv(cfg, "coefficients", &coeffs.to_csv())?);
    let mut summary = summary_json(&op, &chosen, &coeffs);
    summary["condition_1"] = json!(direct.condition);
    summary["neumann_vs_direct"] = json!(agreement);
    summary["node_delta_error"] = json!(delta_error);
    summary["eps"] = json!(plan.eps);
    summary["delta"] = json!(plan.delta);
    note(&write_json(cfg, "perturb", summary)?);
    println!(
        "defect {:e}, {} inverse, node delta error {delta_error:e}",
        op.hs_defect(),
        if neumann.is_some() { "Neumann" } else { "direct" }
    );
    Ok(true)
}

pub fn reconstruct(cfg: &RunConfig) -> CmdResult {
    let basis = checked_basis(cfg)?;
    let plan = plan(cfg)?;
    let grid = cfg.grid_points()?;
    let table = table_for(cfg, &basis, &nodes_for(&plan, &grid), &[])?;
    let op = build_truncation(&plan, &table)?;
    let (chosen, _, _) = invert(cfg, &op)?;
    let t_inv = unweighted_inverse(&chosen, &plan.weight, plan.truncation);
    let seminorms: &[(u32, u32)] = if cfg.jitter > 0.0 { &[] } else { &[(0, 0), (0, 1), (1, 0), (1, 1), (0, 2)] };
    let provenance = format!("{:?} inverse, defect {:e}", chosen.method, op.hs_defect());
    let report = rebuild(&cfg.function, &plan, &t_inv, &provenance, &table, &grid, seminorms)?;
    let direct = direct_synthesis(&sample(&cfg.function, &plan), &table, &grid)?;
    let identical = direct.iter().zip(&report.reconstruction).all(|(a, b)| a.to_bits() == b.to_bits());
    note(&write_csv(cfg, "reconstruct", &report.to_csv())?);
    note(&write_json(
        cfg,
        "reconstruct",
        json!({
            "truncation": report.truncation,
            "sup_error": report.sup_error,
            "node_residual": report.node_residual,
            "seminorm_errors": report.seminorm_errors,
            "provenance": report.provenance,
            "identical_to_direct_synthesis": identical,
            "grid_points": report.grid.len(),
        }),
    )?);
    println!("sup error {:e}, node residual {:e}", report.sup_error, report.node_residual);
    Ok(true)
}

pub fn bounds(cfg: &RunConfig) -> CmdResult {
    let basis = checked_basis(cfg)?;
    let n_max = cfg.n_max;
    let xs = parse_grid(&cfg.decay_grid)?;
    if xs[0] != 0.0 {
        return Err(CmdError::Usage(format!("decay grid {:?} must start at 0", cfg.decay_grid)));
    }
    let radii = cfg.radii.clone();
    let per_quarter = 9;
    let mut complex = circle_points(&radii, per_quarter);
    let demo_at = complex.len();
    complex.extend((0..6).map(|j| Complex::from_polar(1.5, PI / 2.0 * j as f64 / 5.0)));
    complex.push(Complex::new(0.5, 0.5));

    let demo_weight = WeightScheme::Exponential { c: 1.0 };
    let demo_plan = NodePlan::new(cfg.truncation(), cfg.perturbation(), demo_weight.clone())?;
    let zero_plan = NodePlan::new(cfg.truncation(), Perturbation::zero(), demo_weight)?;
    let mut real = nodes_for(&demo_plan, &xs);
    for z in zero_plan.all_nodes() {
        if !real.contains(&z) {
            real.push(z);
        }
    }
    let table = table_for(cfg, &basis, &real, &complex)?;

    let mut claims = Vec::new();
    let mut pass = true;
    let mut check = |name: &str, ok: bool, detail: serde_json::Value| {
        if !ok {
            eprintln!("claim check failed: {name}");
        }
        pass &= ok;
        claims.push(json!({ "claim": name, "pass": ok, "detail": detail }));
    };

    let ns: Vec<usize> = (1..=n_max.min(12)).collect();
    let mut raw = String::from("n,x,a_n\n");
    for d in decay_samples(&table, &(0..=n_max.min(12)).collect::<Vec<_>>(), &xs, 0)? {
        for (x, v) in d.xs.iter().zip(&d.values) {
            let _ = writeln!(raw, "{},{x},{v:e}", d.n);
        }
    }
    note(&write_csv(cfg, "decay_raw", &raw)?);
    for order in [0, 1] {
        let fit = decay_fit(&table, &ns, &xs, order)?;
        let ok = !fit.degenerate && fit.constant("c").unwrap_or(0.0) > 0.0 && fit.max_violation < 0.05;
        check(&fit.claim.clone(), ok, json!(fit));
    }
    let a0 = &decay_samples(&table, &[0], &xs, 0)?[0];
    let rate = exponential_rate("decay-envelope:a_0 exponential rate", &a0.xs, &a0.values, 3.0);
    let floor = (PI / 2.0).sqrt() - 0.05;
    check(&rate.claim.clone(), rate.constant("rate").is_some_and(|r| r >= floor), json!({ "fit": rate, "floor": floor }));

    let mut growth_csv = String::from("label,r,log_max\n");
    let g0 = basis_growth(&table, 0, Parity::Plus, &radii, per_quarter, 0)?;
    // log M(r)/r² undershoots the limiting type at finite r; check that it rises with r and stays below π.
    let ratios: Vec<f64> = g0.radii.iter().zip(&g0.log_max).map(|(r, l)| l / (r * r)).collect();
    let rising = ratios.len() >= 2 && ratios.windows(2).all(|w| w[1] > w[0]);
    let below = ratios.iter().all(|t| *t <= 1.1 * PI);
    check("growth:b_0^+ type trend", rising && below, json!({ "report": g0, "log_max_over_r2": ratios }));
    let mut by_n = Vec::new();
    for n in 0..=n_max.min(10) {
        let g = basis_growth(&table, n, Parity::Plus, &radii, per_quarter, 0)?;
        for (r, l) in g.radii.iter().zip(&g.log_max) {
            let _ = writeln!(growth_csv, "{},{r},{l:e}", g.label);
        }
        if let Some(l) = g.log_max.last() {
            by_n.push((n, *l));
        }
    }
    let lin = growth_in_index(&by_n);
    check("growth:b_n^+ linear in n", lin.is_some_and(|f| f.r2 > 0.95), json!({ "fit": lin, "points": by_n }));

    let gauss = TestFunction::Gaussian { a: 1.0 };
    let coords = sample(&gauss, &zero_plan);
    let vals: Vec<f64> =
        (0..demo_at).map(|i| synthesize_complex(&coords, &table, i).map(|v| v.norm())).collect::<Result<_, _>>()?;
    let cal = growth_from_values("calibration gaussian", &radii, per_quarter, &vals)?;
    let ok = cal.order.is_some_and(|o| (o - 2.0).abs() <= 0.1) && cal.type_estimate.is_some_and(|t| (t - PI).abs() <= 0.1 * PI);
    for (r, l) in cal.radii.iter().zip(&cal.log_max) {
        let _ = writeln!(growth_csv, "{},{r},{l:e}", cal.label);
    }
    check("growth:calibration", ok, json!(cal));
    note(&write_csv(cfg, "growth", &growth_csv)?);

    for n in 0..=n_max.min(5) {
        for sign in Parity::BOTH {
            let lo = (n as f64).sqrt() + 1.0;
            let samples: Vec<(f64, f64)> = (0..=40)
                .map(|i| lo + (12.0 - lo) * i as f64 / 40.0)
                .map(|x| basis.eval_bn_tail(n, sign, x).map(|b| (x, b)))
                .collect::<Result<_, _>>()?;
            let fit = lower_bound_fit(n, sign, &samples, 1e-3);
            let ok = fit.degenerate || (fit.constant("c").unwrap_or(0.0) > 0.0 && fit.constant("c_n").unwrap_or(0.0) > 0.0);
            check(&fit.claim.clone(), ok, json!(fit));
        }
    }

    match analyticity_demo(&gauss, PI, &demo_plan, &table, None) {
        Ok(rep) => {
            let err = rep.values[demo_at..]
                .iter()
                .zip(&complex[demo_at..])
                .map(|(v, z)| (Complex::new(v[0], v[1]) - gauss.eval_complex(*z)).norm())
                .fold(0.0f64, f64::max);
            check(
                "entire-extension:gaussian",
                err < 1e-4,
                json!({ "max_error_disk_1_5": err, "majorant": rep.majorant, "majorant_tail": rep.majorant_tail }),
            );
        }
        Err(e) => check("entire-extension:gaussian", false, json!({ "error": e.to_string() })),
    }

    let passed = claims.iter().filter(|c| c["pass"] == json!(true)).count();
    let total = claims.len();
    note(&write_json(cfg, "bounds", json!({ "claims": claims, "passed": passed, "total": total }))?);
    println!("{passed}/{total} claim checks passed");
    Ok(pass)
}

fn read_sequence(source: &str, count: usize) -> Result<Vec<f64>, CmdError> {
    let (kind, rest) = source.split_once(':').unwrap_or((source, ""));
    match kind {
        "scaled" => {
            let a: f64 = rest.parse().map_err(|e| CmdError::Usage(format!("sequence {source:?}: {e}")))?;
            Ok((0..count).map(|n| a * (n as f64).sqrt()).collect())
        }
        "file" => {
            let text = std::fs::read_to_string(rest).map_err(FilError::from)?;
            let v: Vec<f64> = if text.trim_start().starts_with('[') {
                serde_json::from_str(&text).map_err(FilError::from)?
            } else {
                text.split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|e| CmdError::Usage(format!("{rest}: {e}"))))
                    .collect::<Result<_, _>>()?
            };
            Ok(v)
        }
        _ => Err(CmdError::Usage(format!("sequence {source:?}: expected scaled:a or file:PATH"))),
    }
}

pub fn nodes(cfg: &RunConfig) -> CmdResult {
    let source = cfg.sequence.as_deref().ok_or_else(|| CmdError::Usage("nodes needs --seq scaled:a or --seq file:PATH".into()))?;
    let xs = read_sequence(source, cfg.count)?;
    if xs.len() < 4 {
        return Err(CmdError::Usage(format!("sequence {source:?} has {} points; need at least 4", xs.len())));
    }
    let window = if cfg.window == 0 { xs.len() } else { cfg.window };
    let class = classify_pair(&xs, &xs, cfg.p, cfg.q, window)?;
    let last = xs[xs.len() - 1];
    let matched = match_nodes(&xs, (last * last).ceil() as usize, cfg.match_d, cfg.match_c)?;
    let mut csv = String::from("n,m,x,eps\n");
    for mt in &matched.matches {
        let _ = writeln!(csv, "{},{},{},{:e}", mt.n, mt.m, mt.x, mt.eps);
    }
    note(&write_csv(cfg, "nodes_match", &csv)?);
    note(&write_json(
        cfg,
        "nodes",
        json!({
            "points": xs.len(),
            "classification": class,
            "match": {
                "boundary": matched.boundary,
                "delta": matched.delta,
                "envelope_ratio": matched.envelope_ratio,
                "admissible": matched.admissible,
                "matched": matched.matches.len(),
            },
        }),
    )?);
    println!("{}", class.verdict);
    Ok(true)
}
