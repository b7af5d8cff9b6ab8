use std::time::Instant;

use super::config::ScenarioConfig;
use super::report::{
    tool_version, CheckOutcome, PrincipalSummary, Ratios, Report, SandwichSummary, SparseSummary, Timing,
    SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::lattice::{build_lattice_function, DyadicCube, LatticeFunction, LatticeParams, Shift, WeightSpec};
use crate::maximal::{eval_lattice_maximal, maximal_sandwich};
use crate::testing::{
    build_principal_cubes, build_sparse_family, carleson_check, estimate_operator_norm,
    estimate_partial_test_constant, regime_check, sawyer_scan, validate_sparse_family, InnerMode, PrincipalForest,
    SawyerScan, SparseFamily,
};
use crate::weights::{
    multilinear_weight_constant, single_weight_constant, ConstantKind, ConstantValue, CubeFamily, WeightScenario,
};

/// Slack used by the ordering checks.
pub const ORDER_SLACK: f64 = 1e-9;

/// Outcome of a scenario run. `failure` is set when a resource limit
/// stopped the run; the report then carries `partial_report = true`.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub failure: Option<Error>,
}

/// Inputs `sigma_i` of the maximal-function steps (test functions `f_i = 1`).
pub fn sigma_inputs(scn: &WeightScenario) -> Vec<LatticeFunction> {
    scn.sigma.iter().map(|s| s.values().clone()).collect()
}

pub fn sandwich_summary(funcs: &[LatticeFunction], alpha: f64) -> Result<SandwichSummary> {
    let exact = eval_lattice_maximal(funcs, alpha, None)?;
    let (lower, upper) = maximal_sandwich(funcs, alpha)?;
    let lo = lower.domain_values();
    let ex = exact.domain_values();
    let up = upper.domain_values();
    let violations = sandwich_violations(&lo, &ex, &up, ORDER_SLACK).len();
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(SandwichSummary {
        factor: upper.certified_factor,
        max_lower: max(&lo),
        max_exact: max(&ex),
        max_upper: max(&up),
        cells: ex.len(),
        violations,
    })
}

/// Domain cell positions where `lower <= exact <= upper` fails at relative slack `tol`.
pub fn sandwich_violations(lower: &[f64], exact: &[f64], upper: &[f64], tol: f64) -> Vec<usize> {
    (0..exact.len())
        .filter(|&i| lower[i] > exact[i] * (1.0 + tol) || exact[i] > upper[i] * (1.0 + tol))
        .collect()
}

pub fn sparse_families(cfg: &ScenarioConfig, scn: &WeightScenario) -> Result<Vec<SparseFamily>> {
    let funcs = sigma_inputs(scn);
    Shift::all(cfg.lattice.n)
        .into_iter()
        .map(|shift| build_sparse_family(&funcs, scn.exps.alpha, shift, cfg.sparse.a, cfg.sparse.k_floor))
        .collect()
}

/// Root of the principal-cube step: the coarsest unshifted grid cube.
pub fn principal_root(params: &LatticeParams) -> Result<DyadicCube> {
    DyadicCube::containing(params, Shift::ZERO, params.min_level(), [0, 0])
}

/// Principal cubes of a seeded lognormal `f` against `sigma_1`.
pub fn principal_forest(cfg: &ScenarioConfig, scn: &WeightScenario) -> Result<(PrincipalForest, LatticeFunction)> {
    let f = build_lattice_function(&WeightSpec::Lognormal { seed: cfg.seed, s: 1.0 }, &cfg.lattice)?;
    let forest = build_principal_cubes(&f, scn.sigma[0].values(), principal_root(&cfg.lattice)?)?;
    Ok((forest, f))
}

fn constants(scn: &WeightScenario) -> Result<Vec<ConstantValue>> {
    let families = [CubeFamily::AllLattice, CubeFamily::Dyadic { shift: Shift::ZERO }];
    let exps = &scn.exps;
    let mut out = Vec::new();
    for family in families {
        if exps.m == 1 {
            let (w, p) = (&scn.w[0], exps.p_vec[0]);
            out.push(single_weight_constant(w, p, None, ConstantKind::Ap, family)?);
            out.push(single_weight_constant(w, p, Some(exps.q), ConstantKind::Apq, family)?);
        } else {
            out.push(multilinear_weight_constant(&scn.w, exps, ConstantKind::AP, family)?);
            out.push(multilinear_weight_constant(&scn.w, exps, ConstantKind::APq, family)?);
        }
    }
    Ok(out)
}

/// Notes for displays whose powers of a power weight are not locally
/// integrable: the lattice value is then a finite truncation of an infinite constant.
fn truncation_warnings(scn: &WeightScenario) -> Vec<String> {
    let exps = &scn.exps;
    let mut out = Vec::new();
    for (i, (w, &pc)) in scn.w.iter().zip(&exps.p_conj).enumerate() {
        for e in [exps.q, -pc] {
            if let Some(a) = w.non_integrable_power(e) {
                out.push(format!(
                    "A_pq/A_Pq: w_{}^{e} = |x|^{a} is not locally integrable; the reported value is a lattice \
                     truncation of an infinite constant",
                    i + 1
                ));
            }
        }
    }
    out
}

fn ordering_checks(report: &Report) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let Some(s) = &report.sawyer else { return out };
    let le = |name: String, lhs: f64, rhs: f64| CheckOutcome {
        pass: lhs <= rhs + ORDER_SLACK * rhs.abs().max(1.0),
        name,
        lhs,
        rhs,
    };
    if s.family == CubeFamily::AllLattice {
        for d in &report.sawyer_dyadic {
            out.push(le(
                format!("sawyer_{} <= sawyer", super::report::family_label(&d.family, report.config.lattice.n)),
                d.value,
                s.value,
            ));
        }
    }
    if let Some(n) = &report.norm {
        out.push(le("sawyer <= norm".into(), s.value, n.value));
    }
    for p in &report.partial {
        out.push(le(format!("sawyer <= partial_{}", p.fixed_slot + 1), s.value, p.value));
    }
    if let Some(sw) = &report.sawyer_sandwich {
        out.push(le("sandwich_lower <= sawyer".into(), sw.value, s.value));
        if let Some(u) = sw.upper {
            out.push(le("sawyer <= sandwich_upper".into(), s.value, u));
        }
    }
    out
}

struct Clock {
    timing: Timing,
    start: Instant,
}

impl Clock {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timing.steps.insert(name.into(), t.elapsed().as_secs_f64());
        out
    }
}

/// Runs every enabled step of `cfg`. Config problems are returned as
/// errors; budget exhaustion yields a partial report.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let exps = cfg.exponent_data()?;
    let regime = regime_check(&exps);
    let scn = cfg.scenario()?;
    let mut clock = Clock {
        timing: Timing::default(),
        start: Instant::now(),
    };
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        tool_version: tool_version(),
        config: cfg.clone(),
        exponents: exps,
        regime,
        constants: Vec::new(),
        sawyer: None,
        sawyer_dyadic: Vec::new(),
        sawyer_sandwich: None,
        sandwich: None,
        sparse: Vec::new(),
        principal: None,
        norm: None,
        partial: Vec::new(),
        ratios: Ratios::default(),
        ordering: Vec::new(),
        warnings: Vec::new(),
        partial_report: false,
        error: None,
        timing: Timing::default(),
    };
    let failure = run_steps(cfg, &scn, &mut report, &mut clock).err();
    if let Some(e) = &failure {
        if !e.is_resource() {
            return Err(e.clone());
        }
        report.partial_report = true;
        report.error = Some(e.to_string());
    }
    report.ordering = ordering_checks(&report);
    clock.timing.total = clock.start.elapsed().as_secs_f64();
    report.timing = clock.timing;
    Ok(RunOutcome { report, failure })
}

fn run_steps(cfg: &ScenarioConfig, scn: &WeightScenario, report: &mut Report, clock: &mut Clock) -> Result<()> {
    let steps = cfg.steps;
    let alpha = scn.exps.alpha;
    if steps.constants {
        match clock.time("constants", || constants(scn)) {
            Ok(c) => {
                report.constants = c;
                report.warnings.extend(truncation_warnings(scn));
            }
            Err(e) if e.is_resource() => return Err(e),
            Err(e) => report.warnings.push(format!("constants: {e}")),
        }
    }
    let budget = cfg.budgets.sawyer_work as u128;
    let scan: SawyerScan = clock.time("sawyer", || sawyer_scan(scn, cfg.family, cfg.inner, budget))?;
    report.sawyer = Some(scan.result.clone());
    if steps.dyadic_sawyer {
        report.sawyer_dyadic = clock.time("sawyer_dyadic", || {
            Shift::all(cfg.lattice.n)
                .into_iter()
                .map(|shift| {
                    sawyer_scan(scn, CubeFamily::Dyadic { shift }, InnerMode::Lattice, budget).map(|s| s.result)
                })
                .collect::<Result<Vec<_>>>()
        })?;
    }
    if steps.sandwich_sawyer && cfg.inner == InnerMode::Lattice {
        let s = clock.time("sawyer_sandwich", || sawyer_scan(scn, cfg.family, InnerMode::Sandwich, budget))?;
        report.sawyer_sandwich = Some(s.result);
    }
    if steps.sandwich {
        report.sandwich = Some(clock.time("sandwich", || sandwich_summary(&sigma_inputs(scn), alpha))?);
    }
    if steps.sparse {
        let funcs = sigma_inputs(scn);
        report.sparse = clock.time("sparse", || -> Result<Vec<SparseSummary>> {
            let mut out = Vec::new();
            for sf in sparse_families(cfg, scn)? {
                let validation = validate_sparse_family(&sf, &funcs, alpha)?;
                out.push(SparseSummary {
                    shift: sf.shift.label(cfg.lattice.n),
                    a: sf.a,
                    k_floor: sf.k_floor,
                    k_ceil: sf.k_ceil,
                    entries: sf.entries.len(),
                    validation,
                });
            }
            Ok(out)
        })?;
    }
    if steps.principal {
        report.principal = Some(clock.time("principal", || -> Result<PrincipalSummary> {
            let (forest, f) = principal_forest(cfg, scn)?;
            let p = scn.exps.p_vec[0];
            let carleson = carleson_check(&forest, &f, scn.sigma[0].values(), p)?;
            Ok(PrincipalSummary {
                root: forest.root,
                cubes: forest.cubes.len(),
                generations: forest.generations().len(),
                p,
                carleson,
            })
        })?);
    }
    let strategy = cfg.strategy();
    let s_value = scan.result.value;
    if steps.norm {
        let n = clock.time("norm", || estimate_operator_norm(scn, Some(&scan), &strategy))?;
        report.ratios.norm_over_sawyer = Some(n.value / s_value);
        report.norm = Some(n);
    }
    if steps.partial {
        if scn.exps.m == 2 {
            report.partial = clock.time("partial", || {
                (0..2)
                    .map(|slot| estimate_partial_test_constant(slot, scn, &scan, &strategy))
                    .collect::<Result<Vec<_>>>()
            })?;
            report.ratios.partial_over_sawyer = report.partial.iter().map(|p| p.value / s_value).collect();
        } else {
            report
                .warnings
                .push(format!("partial testing constants skipped: defined for m = 2, got m = {}", scn.exps.m));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus_scenario;

    #[test]
    fn lebesgue_scenario_reports_unit_testing_constant() {
        let mut cfg = corpus_scenario("lebesgue_m2").unwrap().unwrap();
        cfg.lattice = LatticeParams::new(1, 2, 1, 1).unwrap();
        cfg.search.max_evals = 500;
        let out = run_scenario(&cfg).unwrap();
        assert!(out.failure.is_none());
        let r = out.report;
        let s = r.sawyer.as_ref().unwrap();
        assert!((s.value - 1.0).abs() < 1e-9);
        assert_eq!(s.ties, s.scanned);
        assert!(r.norm.as_ref().unwrap().value >= 1.0 - 1e-9);
        assert!(r.ordering.iter().all(|c| c.pass), "{:?}", r.ordering);
        for c in &r.constants {
            assert!((c.value - 1.0).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn tiny_budget_yields_partial_report() {
        let mut cfg = corpus_scenario("lebesgue_m1").unwrap().unwrap();
        cfg.budgets.sawyer_work = 10;
        let out = run_scenario(&cfg).unwrap();
        assert!(out.failure.unwrap().is_resource());
        assert!(out.report.partial_report);
        assert!(!out.report.constants.is_empty());
        assert!(out.report.sawyer.is_none());
    }
}
