use serde::Serialize;
use serde_json::{json, Value};

use qsobolev::embedding::{
    compute_exponents, counterexample_run, verify_embedding_chain, BetaChoice, COMPOSITE_TOLERANCE, HOLDER_TOLERANCE,
};
use qsobolev::qft::{hy_matrix_unit_endpoint, verify_hausdorff_young, verify_plancherel, Direction};
use qsobolev::sobolev::{
    nondegeneracy_check, norm_axioms_check, pairing_bound_estimate, phi_isometry_check, NegativeOrderSpec,
    SobolevSpec, NONDEGENERACY_MAX_N, TRIANGLE_SLACK,
};
use qsobolev::weyl::{check_axioms, trace_orthogonality_defect, unitarity_defect, WeylSystem};
use qsobolev::Error;

use crate::config::{build_weight, CommandKind, ConfigError, RunConfig};

/// Why a command could not produce a report.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Kernel(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_kernel_failure() {
            Failure::Kernel(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

/// Rows of the flat CSV view; every cell already formatted.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub results: Value,
    pub table: Table,
}

/// 17 significant digits, lossless for `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn systems(cfg: &RunConfig) -> Result<Vec<WeylSystem>, Failure> {
    cfg.n
        .iter()
        .map(|&n| WeylSystem::new(n, cfg.convention).map_err(Failure::from))
        .collect()
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    match cfg.command {
        CommandKind::Axioms => axioms(cfg),
        CommandKind::Plancherel => plancherel(cfg),
        CommandKind::HausdorffYoung => hausdorff_young(cfg),
        CommandKind::SobolevNorms => sobolev_norms(cfg),
        CommandKind::Pairing => pairing(cfg),
        CommandKind::Exponents => exponents(cfg),
        CommandKind::Embed => embed(cfg),
        CommandKind::Counterexample => counterexample(cfg),
    }
}

fn axioms(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tol = cfg.tolerance.expect("resolved");
    let mut table = Table::new(&["n", "convention", "check", "passed", "tolerance", "worst_deviation"]);
    let mut results = Vec::new();
    let mut passed = true;
    for sys in systems(cfg)? {
        let report = check_axioms(&sys)?;
        let orth = trace_orthogonality_defect(&sys)?;
        let unit = unitarity_defect(&sys)?;
        // only the identities that hold for every convention are assertions
        for id in ["composition", "unimodular", "cocycle"] {
            passed &= report.check(id).is_some_and(|c| c.passed && c.worst_deviation <= tol);
        }
        passed &= orth <= tol && unit <= tol;
        for c in &report.checks {
            table.push(vec![
                sys.dim().to_string(),
                sys.convention().to_string(),
                c.id.clone(),
                c.passed.to_string(),
                num(c.tolerance),
                num(c.worst_deviation),
            ]);
        }
        for (id, dev) in [("trace_orthogonality", orth), ("unitarity", unit)] {
            table.push(vec![
                sys.dim().to_string(),
                sys.convention().to_string(),
                id.to_string(),
                (dev <= tol).to_string(),
                num(tol),
                num(dev),
            ]);
        }
        results.push(json!({
            "axioms": to_value(&report),
            "trace_orthogonality_defect": orth,
            "unitarity_defect": unit,
        }));
    }
    Ok(Outcome {
        passed,
        summary: format!("axioms N={:?}: {}", cfg.n, verdict(passed)),
        results: Value::Array(results),
        table,
    })
}

fn plancherel(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tol = cfg.tolerance.expect("resolved");
    let (trials, seed) = (cfg.trials.expect("resolved"), cfg.seed.expect("resolved"));
    let mut table = Table::new(&[
        "n",
        "trials",
        "seed",
        "worst_relative_deviation",
        "worst_operator_roundtrip",
        "worst_function_roundtrip",
    ]);
    let mut reports = Vec::new();
    let mut worst = 0.0f64;
    for sys in systems(cfg)? {
        let r = verify_plancherel(&sys, trials, seed)?;
        worst = worst
            .max(r.worst_relative_deviation)
            .max(r.worst_operator_roundtrip)
            .max(r.worst_function_roundtrip);
        table.push(vec![
            r.n.to_string(),
            trials.to_string(),
            seed.to_string(),
            num(r.worst_relative_deviation),
            num(r.worst_operator_roundtrip),
            num(r.worst_function_roundtrip),
        ]);
        reports.push(r);
    }
    let passed = worst <= tol;
    Ok(Outcome {
        passed,
        summary: format!("plancherel N={:?}: worst deviation {worst:.3e}: {}", cfg.n, verdict(passed)),
        results: to_value(&reports),
        table,
    })
}

fn hausdorff_young(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tol = cfg.tolerance.expect("resolved");
    let (trials, seed) = (cfg.trials.expect("resolved"), cfg.seed.expect("resolved"));
    let mut table = Table::new(&["n", "p", "q", "direction", "trial", "ratio"]);
    let mut reports = Vec::new();
    let mut endpoints = Vec::new();
    let mut passed = true;
    let mut worst = 0.0f64;
    for sys in systems(cfg)? {
        for &p in &cfg.p {
            for &direction in &cfg.direction {
                let mut r = verify_hausdorff_young(&sys, p, direction, trials, seed)?;
                r.tolerance = tol;
                r.passed = r.worst_ratio <= 1.0 + tol;
                passed &= r.passed;
                worst = worst.max(r.worst_ratio);
                for (i, ratio) in r.ratios.iter().enumerate() {
                    table.push(vec![
                        r.n.to_string(),
                        num(r.p),
                        num(r.q),
                        direction.to_string(),
                        i.to_string(),
                        num(*ratio),
                    ]);
                }
                reports.push(r);
            }
        }
        if cfg.p.contains(&1.0) && cfg.direction.contains(&Direction::Forward) {
            let e = hy_matrix_unit_endpoint(&sys)?;
            passed &= e <= 1.0 + tol;
            endpoints.push(json!({ "n": sys.dim(), "matrix_unit_worst_ratio": e }));
        }
    }
    Ok(Outcome {
        passed,
        summary: format!("hausdorff-young N={:?}: worst ratio {worst:.15}: {}", cfg.n, verdict(passed)),
        results: json!({ "runs": to_value(&reports), "matrix_unit_endpoint": endpoints }),
        table,
    })
}

fn sobolev_norms(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tol = cfg.tolerance.expect("resolved");
    let (trials, seed) = (cfg.trials.expect("resolved"), cfg.seed.expect("resolved"));
    let mut table = Table::new(&["n", "metric", "value"]);
    let mut results = Vec::new();
    let mut passed = true;
    for sys in systems(cfg)? {
        let weight = build_weight(cfg.weight.as_deref().expect("resolved"), sys.group())?;
        let spec = SobolevSpec::from_q(
            cfg.s.expect("resolved"),
            cfg.q.expect("resolved"),
            weight,
            cfg.homogeneous.expect("resolved"),
        )?;
        let axioms = norm_axioms_check(&sys, &spec, trials, seed)?;
        let iso = phi_isometry_check(&sys, &spec, trials, seed)?;
        passed &= axioms.homogeneity_max_rel_deviation <= tol
            && axioms.triangle_violations == 0
            && axioms.monotonicity_violations == 0
            && axioms.homogeneous_exceeds_inhomogeneous == 0
            && axioms.definite
            && iso.worst_abs_deviation <= tol;
        let n = sys.dim().to_string();
        for (metric, value) in [
            ("homogeneity_max_rel_deviation", num(axioms.homogeneity_max_rel_deviation)),
            ("triangle_max_rel_excess", num(axioms.triangle_max_rel_excess)),
            ("triangle_violations", axioms.triangle_violations.to_string()),
            ("monotonicity_violations", axioms.monotonicity_violations.to_string()),
            ("homogeneous_exceeds_inhomogeneous", axioms.homogeneous_exceeds_inhomogeneous.to_string()),
            ("definite", axioms.definite.to_string()),
            ("phi_isometry_worst_abs_deviation", num(iso.worst_abs_deviation)),
            ("phi_isometry_worst_rel_deviation", num(iso.worst_rel_deviation)),
        ] {
            table.push(vec![n.clone(), metric.to_string(), value]);
        }
        results.push(json!({
            "n": sys.dim(),
            "spec": to_value(&spec),
            "triangle_slack": TRIANGLE_SLACK,
            "norm_axioms": to_value(&axioms),
            "phi_isometry": to_value(&iso),
        }));
    }
    Ok(Outcome {
        passed,
        summary: format!("sobolev-norms N={:?}: {}", cfg.n, verdict(passed)),
        results: Value::Array(results),
        table,
    })
}

fn pairing(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tol = cfg.tolerance.expect("resolved");
    let (trials, seed) = (cfg.trials.expect("resolved"), cfg.seed.expect("resolved"));
    let mut table = Table::new(&["n", "sign", "trial", "ratio", "analytic_bound"]);
    let mut results = Vec::new();
    let mut passed = true;
    for sys in systems(cfg)? {
        let weight = build_weight(cfg.weight.as_deref().expect("resolved"), sys.group())?;
        let spec = NegativeOrderSpec::from_primal(cfg.s.expect("resolved"), cfg.p[0], weight)?;
        for &sign in &cfg.sign {
            let mut bound = pairing_bound_estimate(&sys, &spec, sign, trials, seed)?;
            bound.passed = bound.max_ratio <= bound.analytic_bound * (1.0 + tol);
            passed &= bound.passed;
            for (i, r) in bound.ratios.iter().enumerate() {
                table.push(vec![
                    sys.dim().to_string(),
                    sign.to_string(),
                    i.to_string(),
                    num(*r),
                    num(bound.analytic_bound),
                ]);
            }
            let nondegeneracy = if sys.dim() <= NONDEGENERACY_MAX_N {
                let r = nondegeneracy_check(&sys, &spec, sign)?;
                passed &= r.passed;
                Some(r)
            } else {
                None
            };
            results.push(json!({
                "n": sys.dim(),
                "sign": sign,
                "bound": to_value(&bound),
                "nondegeneracy": to_value(&nondegeneracy),
            }));
        }
    }
    Ok(Outcome {
        passed,
        summary: format!("pairing N={:?}: {}", cfg.n, verdict(passed)),
        results: Value::Array(results),
        table,
    })
}

fn exponents(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let r = compute_exponents(cfg.alpha.expect("resolved"), cfg.q.expect("resolved"), cfg.s.expect("resolved"))?;
    let passed = r.is_consistent();
    let mut table = Table::new(&[
        "alpha",
        "q",
        "s",
        "sigma",
        "beta_corrected",
        "beta_paper",
        "sigma_substituted",
        "sigma_in_range",
        "beta_paper_defined",
    ]);
    table.push(vec![
        num(r.alpha),
        num(r.q),
        num(r.s),
        num(r.sigma),
        opt_num(r.beta_corrected),
        opt_num(r.beta_paper),
        num(r.sigma_substituted),
        r.sigma_in_range.to_string(),
        r.beta_paper_defined.to_string(),
    ]);
    let show = |x: Option<f64>| x.map_or("undefined".to_string(), |v| v.to_string());
    Ok(Outcome {
        passed,
        summary: format!(
            "sigma={} beta_corrected={} beta_paper={} sigma_in_range={}",
            r.sigma,
            show(r.beta_corrected),
            show(r.beta_paper),
            r.sigma_in_range
        ),
        results: to_value(&r),
        table,
    })
}

fn embed(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let tol = cfg.tolerance.expect("resolved");
    let (trials, seed) = (cfg.trials.expect("resolved"), cfg.seed.expect("resolved"));
    let beta = cfg.beta.expect("resolved");
    let mut table = Table::new(&[
        "n",
        "beta_choice",
        "trial",
        "sobolev_norm",
        "link1_ratio",
        "link2_ratio",
        "composite_ratio",
    ]);
    let mut reports = Vec::new();
    let mut passed = true;
    for sys in systems(cfg)? {
        let weight = build_weight(cfg.weight.as_deref().expect("resolved"), sys.group())?;
        let spec = SobolevSpec::from_q(
            cfg.s.expect("resolved"),
            cfg.q.expect("resolved"),
            weight,
            cfg.homogeneous.expect("resolved"),
        )?;
        let mut r = verify_embedding_chain(&sys, &spec, cfg.alpha.expect("resolved"), beta, trials, seed)?;
        let m = r.multiplier_norm;
        r.link1_violations = r.per_trial.iter().filter(|t| t.link1_ratio > 1.0 + HOLDER_TOLERANCE).count() as u64;
        r.link2_violations = r.per_trial.iter().filter(|t| t.link2_ratio > 1.0 + tol).count() as u64;
        r.violations = r.per_trial.iter().filter(|t| t.composite_ratio > m * (1.0 + tol)).count() as u64;
        passed &= r.link1_violations == 0 && r.link2_violations == 0 && r.exponents.is_consistent();
        // beta_paper is measured, never asserted
        if beta == BetaChoice::Corrected {
            passed &= r.violations == 0;
        }
        for t in &r.per_trial {
            table.push(vec![
                r.n.to_string(),
                beta.to_string(),
                t.trial.to_string(),
                num(t.sobolev_norm),
                num(t.link1_ratio),
                num(t.link2_ratio),
                num(t.composite_ratio),
            ]);
        }
        reports.push(r);
    }
    Ok(Outcome {
        passed,
        summary: format!("embed N={:?} beta={beta}: {}", cfg.n, verdict(passed)),
        results: json!({
            "runs": to_value(&reports),
            "holder_tolerance": HOLDER_TOLERANCE,
            "default_composite_tolerance": COMPOSITE_TOLERANCE,
        }),
        table,
    })
}

fn counterexample(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let sweep = cfg
        .sweep
        .iter()
        .map(|&(n, k)| Ok((WeylSystem::new(n, cfg.convention)?, k)))
        .collect::<Result<Vec<_>, Error>>()?;
    let r = counterexample_run(
        &sweep,
        cfg.q.expect("resolved"),
        cfg.rho.expect("resolved"),
        cfg.selector.expect("resolved"),
    )?;
    let mut table = Table::new(&["n", "k", "epsilon", "sobolev_norm", "rho_norm", "schatten_beta_norm"]);
    for p in &r.points {
        table.push(vec![
            p.n.to_string(),
            p.k.to_string(),
            num(p.epsilon),
            num(p.sobolev_norm),
            num(p.rho_norm),
            num(p.schatten_beta_norm),
        ]);
    }
    let passed = r.passed();
    Ok(Outcome {
        passed,
        summary: format!(
            "counterexample: fitted slope {:.6} vs predicted {:.6} over {:.2} decades: {}",
            r.fitted_slope,
            r.predicted_slope,
            r.decades_spanned,
            verdict(passed)
        ),
        results: to_value(&r),
        table,
    })
}
