//! Invariant suites over a set of scenarios.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::ScenarioConfig;
use super::report::{tool_version, SCHEMA_VERSION};
use super::run::{principal_forest, sandwich_violations, sigma_inputs, sparse_families, ORDER_SLACK};
use crate::error::{Error, Result};
use crate::lattice::{
    build_lattice_function, covering_dyadic_cube, enumerate_dyadic_cubes, DyadicCube, LatticeCube, LatticeFunction,
    LatticeParams, Shift, WeightSpec,
};
use crate::maximal::{eval_dyadic_maximal, eval_lattice_maximal, maximal_sandwich, WindowScratch};
use crate::testing::{
    build_principal_cubes, carleson_check, estimate_operator_norm, estimate_partial_test_constant, sawyer_scan,
    validate_sparse_family, InnerMode, NormRatio, SearchStrategy, SigmaAverages, DEFAULT_SAWYER_WORK,
};
use crate::weights::{CubeFamily, Weight, WeightScenario};

/// Relative tolerance of the exact-symmetry suites.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Smoke bound on `N^ / [S]`.
pub const NORM_RATIO_BOUND: f64 = 100.0;
const MAX_REPORTED: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Covering,
    Sandwich,
    Sparse,
    Principal,
    Carleson,
    Ordering,
    Homogeneity,
    Dilation,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Covering,
        Suite::Sandwich,
        Suite::Sparse,
        Suite::Principal,
        Suite::Carleson,
        Suite::Ordering,
        Suite::Homogeneity,
        Suite::Dilation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Covering => "covering",
            Suite::Sandwich => "sandwich",
            Suite::Sparse => "sparse",
            Suite::Principal => "principal",
            Suite::Carleson => "carleson",
            Suite::Ordering => "ordering",
            Suite::Homogeneity => "homogeneity",
            Suite::Dilation => "dilation",
        }
    }

    /// Parses a comma-separated list; `all` selects every suite.
    pub fn parse_list(text: &str) -> Result<Vec<Suite>> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if part == "all" {
                out.extend(Suite::ALL);
                continue;
            }
            match Suite::ALL.iter().find(|s| s.name() == part) {
                Some(s) => out.push(*s),
                None => {
                    return Err(Error::Config {
                        path: "suite".into(),
                        message: format!(
                            "unknown suite `{part}`; expected one of all, {}",
                            Suite::ALL.map(|s| s.name()).join(", ")
                        ),
                    })
                }
            }
        }
        if out.is_empty() {
            return Err(Error::Config {
                path: "suite".into(),
                message: "no suite named".into(),
            });
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Test hook: drop one coarsest cube from every sparse family before validating.
    pub corrupt_sparse: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub pass: bool,
    pub cases: usize,
    pub failures: usize,
    pub counterexamples: Vec<String>,
    pub details: serde_json::Value,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub scenarios: Vec<String>,
    pub pass: bool,
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    /// The report with per-suite timings zeroed.
    pub fn numeric_json(&self) -> serde_json::Value {
        let mut clone = self.clone();
        for s in &mut clone.suites {
            s.seconds = 0.0;
        }
        serde_json::to_value(clone).expect("verify report serializes")
    }
}

/// Accumulates cases, failures and a capped list of counterexamples.
#[derive(Default)]
struct Tally {
    cases: usize,
    failures: usize,
    examples: Vec<String>,
}

impl Tally {
    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < MAX_REPORTED {
                self.examples.push(describe());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.failures += other.failures;
        for e in other.examples {
            if self.examples.len() < MAX_REPORTED {
                self.examples.push(e);
            }
        }
    }

    fn finish(self, suite: Suite, details: serde_json::Value, seconds: f64) -> SuiteOutcome {
        SuiteOutcome {
            suite,
            pass: self.failures == 0,
            cases: self.cases,
            failures: self.failures,
            counterexamples: self.examples,
            details,
            seconds,
        }
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()) || (a == 0.0 && b == 0.0)
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn cell_label(params: &LatticeParams, flat: usize) -> String {
    let idx = params.unflat(flat);
    format!("{:?}", &idx[..params.n])
}

/// Runs `suites` over `configs`; suites that need no scenario run once.
pub fn verify_suite(configs: &[ScenarioConfig], suites: &[Suite], opts: VerifyOptions) -> Result<VerifyReport> {
    let scenarios: Vec<(ScenarioConfig, WeightScenario)> = configs
        .iter()
        .map(|c| Ok((c.clone(), c.scenario()?)))
        .collect::<Result<_>>()?;
    let mut outcomes = Vec::new();
    for suite in suites {
        let t = Instant::now();
        let (tally, details) = match suite {
            Suite::Covering => covering_suite(opts.seed)?,
            Suite::Carleson => carleson_suite(opts.seed)?,
            _ => per_scenario(&scenarios, *suite, opts)?,
        };
        outcomes.push(tally.finish(*suite, details, t.elapsed().as_secs_f64()));
    }
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        tool_version: tool_version(),
        seed: opts.seed,
        scenarios: configs.iter().map(|c| c.name.clone()).collect(),
        pass: outcomes.iter().all(|o| o.pass),
        suites: outcomes,
    })
}

fn per_scenario(
    scenarios: &[(ScenarioConfig, WeightScenario)],
    suite: Suite,
    opts: VerifyOptions,
) -> Result<(Tally, serde_json::Value)> {
    let results: Vec<Result<(Tally, serde_json::Value)>> = scenarios
        .par_iter()
        .map(|(cfg, scn)| match suite {
            Suite::Sandwich => sandwich_case(cfg, scn),
            Suite::Sparse => sparse_case(cfg, scn, opts.corrupt_sparse),
            Suite::Principal => principal_case(cfg, scn),
            Suite::Ordering => ordering_case(cfg, scn),
            Suite::Homogeneity => homogeneity_case(cfg, scn),
            Suite::Dilation => dilation_case(cfg, scn),
            Suite::Covering | Suite::Carleson => unreachable!("scenario-free suite"),
        })
        .collect();
    let mut tally = Tally::default();
    let mut details = serde_json::Map::new();
    for ((cfg, _), r) in scenarios.iter().zip(results) {
        let (t, d) = r?;
        tally.merge(t);
        details.insert(cfg.name.clone(), d);
    }
    Ok((tally, serde_json::Value::Object(details)))
}

/// Random lattice cubes against `covering_dyadic_cube`, with an independent
/// check of containment and size, plus a brute-force minimality check on
/// a subset.
fn covering_suite(seed: u64) -> Result<(Tally, serde_json::Value)> {
    let mut tally = Tally::default();
    let mut details = serde_json::Map::new();
    for (n, count, params) in [
        (1usize, 10_000usize, LatticeParams::new(1, 2, 4, 1)?),
        (2, 1_000, LatticeParams::new(2, 1, 2, 1)?),
    ] {
        let mut r = rng(seed, 10 + n as u64);
        let d = params.domain_side();
        let mut histogram = [0usize; 6];
        let mut brute_checked = 0;
        for i in 0..count {
            let side = r.random_range(1..=d);
            let mut anchor = [0usize; 2];
            for a in anchor.iter_mut().take(n) {
                *a = r.random_range(0..=d - side);
            }
            let cube = LatticeCube::new(&params, anchor, side)?;
            let got = covering_dyadic_cube(&params, &cube);
            let (ok, ratio) = match &got {
                Ok((_, q)) => {
                    let b = q.cell_box(&params);
                    let ratio = q.side_cells(&params) as f64 / side as f64;
                    (b.contains_box(&cube.as_box()) && b.within_region(&params) && ratio <= 6.0, ratio)
                }
                Err(_) => (false, f64::INFINITY),
            };
            if ratio.is_finite() {
                histogram[(ratio.floor() as usize).clamp(1, 6) - 1] += 1;
            }
            let minimal = if i % 10 == 0 && ok {
                brute_checked += 1;
                brute_smallest_cover(&params, &cube) == Some(ratio)
            } else {
                true
            };
            tally.case(ok && minimal, || {
                format!("n={n} anchor={:?} side={side}: {:?} (ratio {ratio})", &anchor[..n], got)
            });
        }
        details.insert(
            format!("n{n}"),
            json!({
                "cubes": count,
                "ratio_histogram": {
                    "[1,2)": histogram[0], "[2,3)": histogram[1], "[3,4)": histogram[2],
                    "[4,5)": histogram[3], "[5,6)": histogram[4], "6": histogram[5],
                },
                "brute_force_checked": brute_checked,
            }),
        );
    }
    Ok((tally, serde_json::Value::Object(details)))
}

/// Smallest side ratio over every level and shift whose grid cube covers `cube`.
fn brute_smallest_cover(params: &LatticeParams, cube: &LatticeCube) -> Option<f64> {
    let target = cube.as_box();
    let mut best: Option<f64> = None;
    for shift in Shift::all(params.n) {
        for level in params.min_level()..=params.max_level() {
            let q = DyadicCube::containing(params, shift, level, [cube.anchor[0] as i64, cube.anchor[1] as i64]).ok()?;
            let b = q.cell_box(params);
            if b.contains_box(&target) && b.within_region(params) {
                let r = q.side_cells(params) as f64 / cube.side as f64;
                best = Some(best.map_or(r, |x: f64| x.min(r)));
            }
        }
    }
    best.filter(|r| *r <= 6.0)
}

fn sandwich_case(cfg: &ScenarioConfig, scn: &WeightScenario) -> Result<(Tally, serde_json::Value)> {
    let funcs = sigma_inputs(scn);
    let alpha = scn.exps.alpha;
    let exact = eval_lattice_maximal(&funcs, alpha, None)?;
    let (lower, upper) = maximal_sandwich(&funcs, alpha)?;
    let (lo, ex, up) = (lower.domain_values(), exact.domain_values(), upper.domain_values());
    let bad = sandwich_violations(&lo, &ex, &up, ORDER_SLACK);
    let mut tally = Tally::default();
    let params = cfg.lattice;
    let domain = params.domain_cell_indices();
    for i in 0..ex.len() {
        tally.case(!bad.contains(&i), || {
            format!(
                "{}: cell {} lower {} exact {} upper {}",
                cfg.name,
                cell_label(&params, domain[i]),
                lo[i],
                ex[i],
                up[i]
            )
        });
    }
    let max_ratio = ex
        .iter()
        .zip(&lo)
        .filter(|(_, l)| **l > 0.0)
        .map(|(e, l)| e / l)
        .fold(0.0, f64::max);
    Ok((
        tally,
        json!({"cells": ex.len(), "factor": upper.certified_factor, "max_exact_over_lower": max_ratio}),
    ))
}

fn sparse_case(cfg: &ScenarioConfig, scn: &WeightScenario, corrupt: bool) -> Result<(Tally, serde_json::Value)> {
    let funcs = sigma_inputs(scn);
    let alpha = scn.exps.alpha;
    let params = cfg.lattice;
    let (n, m) = (params.n as f64, scn.exps.m as f64);
    let ratio_floor = 2f64.powf(alpha - m * n);
    let mut tally = Tally::default();
    let mut details = Vec::new();
    for mut sf in sparse_families(cfg, scn)? {
        if corrupt && !sf.entries.is_empty() {
            let low = sf.entries.iter().map(|e| e.k).min().expect("nonempty");
            let pos = sf.entries.iter().position(|e| e.k == low).expect("present");
            sf.entries.remove(pos);
        }
        let v = validate_sparse_family(&sf, &funcs, alpha)?;
        let label = sf.shift.label(params.n);
        for c in &v.checks {
            tally.case(c.pass, || {
                let cells: Vec<String> = if c.name == "pointwise" || c.name == "e_disjoint" {
                    c.counterexamples.iter().map(|f| cell_label(&params, *f)).collect()
                } else {
                    c.counterexamples.iter().map(|e| format!("entry {e}")).collect()
                };
                format!("{} t=({label}) {} failed at {}", cfg.name, c.name, cells.join(" "))
            });
        }
        if let Some((lo, hi)) = v.ratio_range {
            let ok = lo > ratio_floor * (1.0 - ORDER_SLACK) && hi <= sf.a * (1.0 + ORDER_SLACK);
            tally.case(ok, || {
                format!("{} t=({label}) ratio range [{lo}, {hi}] outside ({ratio_floor}, {}]", cfg.name, sf.a)
            });
        }
        details.push(json!({
            "shift": label, "entries": sf.entries.len(), "k_floor": sf.k_floor, "k_ceil": sf.k_ceil,
            "ratio_range": v.ratio_range, "root_exempt": v.root_exempt_entries,
            "root_half_measure_shortfall": v.root_half_measure_shortfall,
        }));
    }
    Ok((tally, serde_json::Value::Array(details)))
}

fn principal_case(cfg: &ScenarioConfig, scn: &WeightScenario) -> Result<(Tally, serde_json::Value)> {
    let params = cfg.lattice;
    let (forest, f) = principal_forest(cfg, scn)?;
    let sigma = scn.sigma[0].values();
    let avgs = SigmaAverages::new(&f, sigma)?;
    let mut tally = Tally::default();
    for g in forest.cubes.iter().filter(|g| g.parent.is_some()) {
        let parent = &forest.cubes[g.parent.expect("child")];
        tally.case(g.average > 4.0 * parent.average, || {
            format!("{}: principal {} does not jump over its parent", cfg.name, g.cube)
        });
    }
    let cubes = enumerate_dyadic_cubes(&params, Shift::ZERO, forest.root.level..=params.max_level())?;
    for c in &cubes {
        if !forest.root.contains(&c.cube, &params) {
            continue;
        }
        let g = forest.gamma(&c.cube)?;
        let (avg, bound) = (avgs.average(&c.cube), 4.0 * forest.cubes[g].average);
        tally.case(avg <= bound * (1.0 + ORDER_SLACK), || {
            format!("{}: {} average {avg} exceeds 4 * E(Gamma) = {bound}", cfg.name, c.cube)
        });
    }
    let carleson = carleson_check(&forest, &f, sigma, scn.exps.p_vec[0])?;
    tally.case(carleson.pass, || format!("{}: Carleson {} > {}", cfg.name, carleson.lhs, carleson.rhs));
    Ok((
        tally,
        json!({"principal_cubes": forest.cubes.len(), "generations": forest.generations().len(),
               "carleson_lhs": carleson.lhs, "carleson_rhs": carleson.rhs}),
    ))
}

/// 100 randomized `(f, sigma, p)` cases on small lattices.
fn carleson_suite(seed: u64) -> Result<(Tally, serde_json::Value)> {
    let cases: Vec<Result<(bool, f64, String)>> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(seed, 500 + i);
            let params = if i % 4 == 3 {
                LatticeParams::new(2, 1, 1, 1)?
            } else {
                LatticeParams::new(1, 2, 3, 1)?
            };
            let p = [1.5, 2.0, 3.0][(i % 3) as usize];
            let f_spec = WeightSpec::Lognormal {
                seed: r.random(),
                s: r.random_range(0.5..2.5),
            };
            let s_spec = WeightSpec::Lognormal {
                seed: r.random(),
                s: r.random_range(0.2..1.5),
            };
            let f = build_lattice_function(&f_spec, &params)?;
            let sigma = build_lattice_function(&s_spec, &params)?;
            let root = DyadicCube::containing(&params, Shift::ZERO, params.min_level(), [0, 0])?;
            let forest = build_principal_cubes(&f, &sigma, root)?;
            let c = carleson_check(&forest, &f, &sigma, p)?;
            Ok((c.pass, c.lhs / c.rhs, format!("case {i}: n={} p={p} lhs {} rhs {}", params.n, c.lhs, c.rhs)))
        })
        .collect();
    let mut tally = Tally::default();
    let mut worst: f64 = 0.0;
    for c in cases {
        let (pass, ratio, label) = c?;
        worst = worst.max(ratio);
        tally.case(pass, || label);
    }
    Ok((tally, json!({"cases": 100, "max_lhs_over_rhs": worst})))
}

fn ordering_case(cfg: &ScenarioConfig, scn: &WeightScenario) -> Result<(Tally, serde_json::Value)> {
    let budget = DEFAULT_SAWYER_WORK;
    let scan = sawyer_scan(scn, CubeFamily::AllLattice, InnerMode::Lattice, budget)?;
    let s = scan.result.value;
    let mut tally = Tally::default();
    let le = |t: &mut Tally, name: &str, a: f64, b: f64| {
        t.case(a <= b + ORDER_SLACK * b.abs().max(1.0), || format!("{}: {name}: {a} > {b}", cfg.name));
    };
    let mut dyadic = Vec::new();
    for shift in Shift::all(cfg.lattice.n) {
        let d = sawyer_scan(scn, CubeFamily::Dyadic { shift }, InnerMode::Lattice, budget)?.result.value;
        le(&mut tally, &format!("dyadic({}) <= lattice", shift.label(cfg.lattice.n)), d, s);
        dyadic.push(d);
    }
    let strategy = cfg.strategy();
    let norm = estimate_operator_norm(scn, Some(&scan), &strategy)?;
    le(&mut tally, "lattice <= norm", s, norm.value);
    let ratio = norm.value / s;
    tally.case(ratio.is_finite() && ratio <= NORM_RATIO_BOUND, || {
        format!("{}: N^/[S] = {ratio} outside the smoke bound", cfg.name)
    });
    let mut partial = Vec::new();
    if scn.exps.m == 2 {
        for slot in 0..2 {
            let c = estimate_partial_test_constant(slot, scn, &scan, &strategy)?;
            le(&mut tally, &format!("lattice <= partial_{}", slot + 1), s, c.value);
            partial.push(c.value);
        }
    }
    Ok((
        tally,
        json!({"dyadic": dyadic, "sawyer": s, "norm": norm.value, "norm_over_sawyer": ratio, "partial": partial}),
    ))
}

fn scaled_weight(w: &Weight, c: f64) -> Result<Weight> {
    Ok(Weight::from_function(w.values().scale(c)?))
}

fn homogeneity_case(cfg: &ScenarioConfig, scn: &WeightScenario) -> Result<(Tally, serde_json::Value)> {
    let mut tally = Tally::default();
    let alpha = scn.exps.alpha;
    let m = scn.exps.m;
    let funcs = sigma_inputs(scn);
    let cs: Vec<f64> = [1.5, 0.25, 3.0, 0.7].iter().copied().cycle().take(m).collect();
    let prod: f64 = cs.iter().product();
    let scaled: Vec<LatticeFunction> = funcs.iter().zip(&cs).map(|(f, c)| f.scale(*c)).collect::<Result<_>>()?;

    let base = eval_lattice_maximal(&funcs, alpha, None)?.domain_values();
    let moved = eval_lattice_maximal(&scaled, alpha, None)?.domain_values();
    let bad = (0..base.len()).filter(|&i| !rel_close(moved[i], prod * base[i], SYMMETRY_TOL)).count();
    tally.case(bad == 0, || format!("{}: lattice maximal not homogeneous at {bad} cells", cfg.name));
    for shift in Shift::all(cfg.lattice.n) {
        let base = eval_dyadic_maximal(&funcs, alpha, shift)?.domain_values();
        let moved = eval_dyadic_maximal(&scaled, alpha, shift)?.domain_values();
        let bad = (0..base.len()).filter(|&i| !rel_close(moved[i], prod * base[i], SYMMETRY_TOL)).count();
        tally.case(bad == 0, || {
            format!("{}: dyadic({}) maximal not homogeneous at {bad} cells", cfg.name, shift.label(cfg.lattice.n))
        });
    }

    // v -> c v scales the testing constant by c^{1/q}
    let c = 7.0f64;
    let factor = c.powf(1.0 / scn.exps.q);
    let scn_c = WeightScenario::from_weights(scn.exps.clone(), scn.w.clone(), scaled_weight(&scn.v, c)?)?;
    let scan = sawyer_scan(scn, CubeFamily::AllLattice, InnerMode::Lattice, DEFAULT_SAWYER_WORK)?;
    let scan_c = sawyer_scan(&scn_c, CubeFamily::AllLattice, InnerMode::Lattice, DEFAULT_SAWYER_WORK)?;
    let (s, s_c) = (scan.result.value, scan_c.result.value);
    tally.case(rel_close(s_c, factor * s, SYMMETRY_TOL), || {
        format!("{}: [S] with c v is {s_c}, expected {}", cfg.name, factor * s)
    });

    // norm candidates are invariant under f_i -> c_i f_i
    let ratio = NormRatio::new(scn);
    let mut r = rng(cfg.seed, 900);
    let mut scratch = WindowScratch::default();
    for trial in 0..4 {
        let f: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..ratio.cell_count()).map(|_| r.random_range(0.1..2.0)).collect())
            .collect();
        let g: Vec<Vec<f64>> = f.iter().zip(&cs).map(|(fi, c)| fi.iter().map(|x| x * c).collect()).collect();
        let (a, b) = (ratio.eval(&f, &mut scratch), ratio.eval(&g, &mut scratch));
        let ok = matches!((a, b), (Some(a), Some(b)) if rel_close(a, b, SYMMETRY_TOL));
        tally.case(ok, || format!("{}: candidate {trial} ratio {a:?} vs scaled {b:?}", cfg.name));
    }

    // partial constants scale with v as well
    if m == 2 {
        let strategy = SearchStrategy {
            random: 0,
            restarts: 0,
            max_evals: 0,
            ..cfg.strategy()
        };
        for slot in 0..2 {
            let a = estimate_partial_test_constant(slot, scn, &scan, &strategy)?.value;
            let b = estimate_partial_test_constant(slot, &scn_c, &scan_c, &strategy)?.value;
            tally.case(rel_close(b, factor * a, SYMMETRY_TOL), || {
                format!("{}: C^_{} with c v is {b}, expected {}", cfg.name, slot + 1, factor * a)
            });
        }
    }
    Ok((tally, json!({"scales": cs, "v_scale": c, "sawyer": s, "sawyer_scaled": s_c})))
}

/// `M^D_alpha(f o delta_2)(x) = 2^{-alpha} M^D_alpha(f)(2x)` on the unshifted grid.
/// Halving `K` and refining `L` keeps the cell array: cell `i` of the
/// dilated lattice sits at half the position of cell `i` of the original.
fn dilation_case(cfg: &ScenarioConfig, scn: &WeightScenario) -> Result<(Tally, serde_json::Value)> {
    let p = cfg.lattice;
    let mut tally = Tally::default();
    if p.domain_exp == 0 {
        return Ok((tally, json!({"skipped": "K = 0 has no coarser lattice"})));
    }
    let q = LatticeParams::with_budget(p.n, p.domain_exp - 1, p.finest_level + 1, p.padding, p.max_cells)?;
    let funcs = sigma_inputs(scn);
    let dilated: Vec<LatticeFunction> = funcs
        .iter()
        .map(|f| LatticeFunction::from_cells(q, f.cells().to_vec()))
        .collect::<Result<_>>()?;
    let alpha = scn.exps.alpha;
    let base = eval_dyadic_maximal(&funcs, alpha, Shift::ZERO)?;
    let moved = eval_dyadic_maximal(&dilated, alpha, Shift::ZERO)?;
    let factor = 2f64.powf(-alpha);
    let mut worst: f64 = 0.0;
    for (i, (a, b)) in base.values.cells().iter().zip(moved.values.cells()).enumerate() {
        let expect = factor * a;
        if expect > 0.0 {
            worst = worst.max((b - expect).abs() / expect);
        }
        tally.case(rel_close(*b, expect, SYMMETRY_TOL), || {
            format!("{}: cell {} dilated {b} expected {expect}", cfg.name, cell_label(&p, i))
        });
    }
    Ok((tally, json!({"factor": factor, "max_relative_error": worst})))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus_scenario;

    fn small() -> Vec<ScenarioConfig> {
        ["lebesgue_m1", "power_bilinear", "lognormal_pair_2d"]
            .iter()
            .map(|n| {
                let mut c = corpus_scenario(n).unwrap().unwrap();
                c.search.max_evals = 300;
                c
            })
            .collect()
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 8);
        assert_eq!(Suite::parse_list("sparse,covering").unwrap(), vec![Suite::Covering, Suite::Sparse]);
        assert!(Suite::parse_list("bogus").unwrap_err().is_config());
    }

    #[test]
    fn scenario_suites_pass_on_small_corpus() {
        let suites = [Suite::Sandwich, Suite::Sparse, Suite::Principal, Suite::Homogeneity, Suite::Dilation];
        let r = verify_suite(&small(), &suites, VerifyOptions::default()).unwrap();
        for s in &r.suites {
            assert!(s.pass, "{:?}: {:?}", s.suite, s.counterexamples);
            assert!(s.cases > 0);
        }
    }

    #[test]
    fn corrupted_sparse_family_is_caught() {
        let opts = VerifyOptions {
            corrupt_sparse: true,
            ..Default::default()
        };
        let r = verify_suite(&small()[..1], &[Suite::Sparse], opts).unwrap();
        let s = &r.suites[0];
        assert!(!s.pass);
        assert!(s.counterexamples.iter().any(|c| c.contains("pointwise failed at [")), "{:?}", s.counterexamples);
    }
}
