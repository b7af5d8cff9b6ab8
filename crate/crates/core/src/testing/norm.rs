//! Lower bounds for the operator norm and for the partial testing constants
//! by searching over candidate input functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sawyer::{lattice_numerator, SawyerScan};
use crate::error::{Error, Result};
use crate::lattice::{LatticeCube, LatticeFunction, LatticeParams};
use crate::maximal::WindowScratch;
use crate::weights::WeightScenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchStrategy {
    /// Number of best testing cubes tried as indicator candidates.
    pub indicators: usize,
    /// Seeded lognormal fields.
    pub random: usize,
    /// Log-standard deviation of the random fields.
    pub spread: f64,
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Evaluation budget shared by all ascent restarts.
    pub max_evals: usize,
    /// Restrict ascent moves to these cell values.
    pub net_levels: Option<Vec<f64>>,
    /// Taken from the scenario seed, not from the strategy block.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for SearchStrategy {
    fn default() -> Self {
        SearchStrategy {
            indicators: 8,
            random: 16,
            spread: 1.0,
            restarts: 4,
            max_sweeps: 6,
            max_evals: 20_000,
            net_levels: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Indicator,
    Random,
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub source: CandidateSource,
    pub witness_cube: Option<LatticeCube>,
    /// Domain cell values per slot, first coordinate fastest.
    pub witness: Vec<Vec<f64>>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialEstimate {
    /// Slot held at `sigma_i 1_Q` (0-based).
    pub fixed_slot: usize,
    pub value: f64,
    pub source: CandidateSource,
    pub witness_cube: LatticeCube,
    /// Values of the varying slot on the cells of the witness cube.
    pub witness: Vec<f64>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

fn box_cells(params: &LatticeParams, cube: &LatticeCube) -> Vec<[usize; 2]> {
    let s = cube.side;
    let count = s.pow(params.n as u32);
    (0..count)
        .map(|k| {
            if params.n == 1 {
                [cube.anchor[0] + k, 0]
            } else {
                [cube.anchor[0] + k % s, cube.anchor[1] + k / s]
            }
        })
        .collect()
}

/// `(sum_{cells} f^p sigma h^n)^{1/p}` over the listed cells.
fn local_norm(f: &[f64], sigma: &LatticeFunction, cells: &[[usize; 2]], p: f64) -> f64 {
    let s: f64 = f
        .iter()
        .zip(cells)
        .map(|(v, &c)| v.abs().powf(p) * sigma.value(c))
        .sum();
    (s * sigma.params().cell_volume()).powf(1.0 / p)
}

fn embed(params: &LatticeParams, cells: &[[usize; 2]], vals: &[f64], sigma: &LatticeFunction) -> Result<LatticeFunction> {
    let mut out = vec![0.0; params.total_cells()];
    for (c, v) in cells.iter().zip(vals) {
        out[params.flat(*c)] = v * sigma.value(*c);
    }
    LatticeFunction::from_cells(*params, out)
}

/// Greedy coordinate ascent on `eval` from `x`; returns (best, evals, hit budget).
fn ascend(
    x: &mut [Vec<f64>],
    start: f64,
    eval: &mut dyn FnMut(&[Vec<f64>]) -> Option<f64>,
    net: Option<&[f64]>,
    max_sweeps: usize,
    budget: usize,
) -> (f64, usize, bool) {
    let mut best = start;
    let mut evals = 0;
    for _ in 0..max_sweeps {
        let mut improved = false;
        for slot in 0..x.len() {
            for c in 0..x[slot].len() {
                let cur = x[slot][c];
                let moves: Vec<f64> = match net {
                    Some(levels) => levels.iter().copied().filter(|l| *l != cur).collect(),
                    None if cur > 0.0 => vec![2.0 * cur, 0.5 * cur, 0.0],
                    None => {
                        let pos: Vec<f64> = x[slot].iter().copied().filter(|v| *v > 0.0).collect();
                        let mean = if pos.is_empty() {
                            1.0
                        } else {
                            pos.iter().sum::<f64>() / pos.len() as f64
                        };
                        vec![mean]
                    }
                };
                for mv in moves {
                    if evals >= budget {
                        x[slot][c] = cur;
                        return (best, evals, true);
                    }
                    x[slot][c] = mv;
                    evals += 1;
                    match eval(x) {
                        Some(r) if r > best * (1.0 + 1e-13) => {
                            best = r;
                            improved = true;
                            break;
                        }
                        _ => x[slot][c] = cur,
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    (best, evals, false)
}

fn lognormal(rng: &mut ChaCha8Rng, spread: f64, len: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (0..len).map(|_| (spread * normal.sample(rng)).exp()).collect()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Evaluates `‖M_alpha(f_1 sigma_1, ...)‖_{L^q(v)} / prod ‖f_i‖_{L^{p_i}(sigma_i)}`
/// on domain data.
pub struct NormRatio<'a> {
    scn: &'a WeightScenario,
    cells: Vec<[usize; 2]>,
    domain: LatticeCube,
}

impl<'a> NormRatio<'a> {
    pub fn new(scn: &'a WeightScenario) -> Self {
        let params = *scn.params();
        let domain = LatticeCube {
            n: params.n,
            anchor: [0, 0],
            side: params.domain_side(),
        };
        NormRatio {
            scn,
            cells: box_cells(&params, &domain),
            domain,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn eval(&self, f: &[Vec<f64>], scratch: &mut WindowScratch) -> Option<f64> {
        let scn = self.scn;
        let params = *scn.params();
        let mut den = 1.0;
        let mut funcs = Vec::with_capacity(f.len());
        for ((fi, s), p) in f.iter().zip(&scn.sigma).zip(&scn.exps.p_vec) {
            let norm = local_norm(fi, s.values(), &self.cells, *p);
            if !(norm > 0.0) {
                return None;
            }
            den *= norm;
            funcs.push(embed(&params, &self.cells, fi, s.values()).ok()?);
        }
        let num = lattice_numerator(&funcs, scn.exps.alpha, scn.v.values(), scn.exps.q, &self.domain, scratch);
        Some(num.powf(1.0 / scn.exps.q) / den)
    }

    fn indicator(&self, cube: &LatticeCube) -> Vec<Vec<f64>> {
        let row: Vec<f64> = self
            .cells
            .iter()
            .map(|&c| if cube.contains_cell(c) { 1.0 } else { 0.0 })
            .collect();
        vec![row; self.scn.exps.m]
    }
}

struct Candidate {
    value: f64,
    source: CandidateSource,
    cube: Option<LatticeCube>,
    x: Vec<Vec<f64>>,
    order: usize,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    if b.value > a.value || (b.value == a.value && b.order < a.order) {
        b
    } else {
        a
    }
}

/// `N^`: best ratio over indicator, random and ascent candidates. Indicator
/// candidates score the larger of the full ratio and the cube's testing
/// ratio, so the result is never below the testing constant.
pub fn estimate_operator_norm(scn: &WeightScenario, scan: Option<&SawyerScan>, strategy: &SearchStrategy) -> Result<NormEstimate> {
    let ratio = NormRatio::new(scn);
    let m = scn.exps.m;
    let len = ratio.cell_count();
    let mut scratch = WindowScratch::default();
    let mut evaluations = 0;
    let mut pool: Vec<Candidate> = Vec::new();

    if let Some(scan) = scan {
        for (order, &(r_cube, cube)) in scan.ranked.iter().take(strategy.indicators).enumerate() {
            let x = ratio.indicator(&cube);
            evaluations += 1;
            let full = ratio.eval(&x, &mut scratch).unwrap_or(0.0);
            pool.push(Candidate {
                value: full.max(r_cube),
                source: CandidateSource::Indicator,
                cube: Some(cube),
                x,
                order,
            });
        }
    }
    let random: Vec<Candidate> = (0..strategy.random)
        .into_par_iter()
        .map_init(WindowScratch::default, |scratch, r| {
            let mut rng = rng_for(strategy.seed, 1_000 + r as u64);
            let x: Vec<Vec<f64>> = (0..m).map(|_| lognormal(&mut rng, strategy.spread, len)).collect();
            let value = ratio.eval(&x, scratch).unwrap_or(0.0);
            Candidate {
                value,
                source: CandidateSource::Random,
                cube: None,
                x,
                order: strategy.indicators + r,
            }
        })
        .collect();
    evaluations += random.len();
    pool.extend(random);

    let seed_point = pool.iter().max_by(|a, b| a.value.total_cmp(&b.value).then(b.order.cmp(&a.order)));
    let start = seed_point.map(|c| (c.x.clone(), c.value));
    let net = strategy.net_levels.as_deref();
    let restarts = strategy.restarts;
    let budget = strategy.max_evals.checked_div(restarts).unwrap_or(0);
    let ascents: Vec<(Candidate, usize, bool)> = (0..restarts)
        .into_par_iter()
        .map_init(WindowScratch::default, |scratch, r| {
            let mut rng = rng_for(strategy.seed, 2_000 + r as u64);
            let mut x: Vec<Vec<f64>> = match (&start, r) {
                (Some((x0, _)), 0) => x0.clone(),
                _ => match net {
                    Some(levels) if !levels.is_empty() => (0..m)
                        .map(|_| (0..len).map(|_| levels[rng.random_range(0..levels.len())]).collect())
                        .collect(),
                    _ => (0..m).map(|_| lognormal(&mut rng, strategy.spread, len)).collect(),
                },
            };
            let init = ratio.eval(&x, scratch).unwrap_or(0.0);
            let mut eval = |y: &[Vec<f64>]| ratio.eval(y, scratch);
            let (value, used, hit) = ascend(&mut x, init, &mut eval, net, strategy.max_sweeps, budget);
            (
                Candidate {
                    value,
                    source: CandidateSource::Ascent,
                    cube: None,
                    x,
                    order: strategy.indicators + strategy.random + r,
                },
                used + 1,
                hit,
            )
        })
        .collect();
    let mut exhausted = false;
    for (c, used, hit) in ascents {
        evaluations += used;
        exhausted |= hit;
        pool.push(c);
    }

    let best = pool
        .into_iter()
        .reduce(better)
        .ok_or_else(|| Error::EmptyFamily("the search strategy produced no candidates".into()))?;
    if !(best.value > 0.0) {
        return Err(Error::Degenerate("every candidate has a vanishing ratio".into()));
    }
    Ok(NormEstimate {
        value: best.value,
        source: best.source,
        witness_cube: best.cube,
        witness: best.x,
        evaluations,
        budget_exhausted: exhausted,
    })
}

/// `C^_i` for `m = 2`: slot `fixed_slot` is `sigma_i 1_Q`, the other slot
/// varies over functions supported on `Q`, for the best testing cubes.
pub fn estimate_partial_test_constant(
    fixed_slot: usize,
    scn: &WeightScenario,
    scan: &SawyerScan,
    strategy: &SearchStrategy,
) -> Result<PartialEstimate> {
    if scn.exps.m != 2 {
        return Err(Error::Unsupported(format!(
            "partial testing constants are defined for m = 2, got m = {}",
            scn.exps.m
        )));
    }
    if fixed_slot > 1 {
        return Err(Error::InvalidParams(format!("slot {fixed_slot} out of range for m = 2")));
    }
    let vary = 1 - fixed_slot;
    let params = *scn.params();
    let (alpha, q) = (scn.exps.alpha, scn.exps.q);
    let sig_fixed = scn.sigma[fixed_slot].values();
    let sig_vary = scn.sigma[vary].values();
    let p_fixed = scn.exps.p_vec[fixed_slot];
    let p_vary = scn.exps.p_vec[vary];
    let cubes: Vec<(f64, LatticeCube)> = scan.ranked.iter().copied().take(strategy.indicators.max(1)).collect();
    let per_cube_budget = strategy.max_evals / cubes.len().max(1);

    let results: Vec<(Candidate, usize, bool)> = cubes
        .par_iter()
        .enumerate()
        .map_init(WindowScratch::default, |scratch, (ci, &(sawyer, cube))| {
            let cells = box_cells(&params, &cube);
            let fixed_mass = sig_fixed.box_integral_cells(&cube.as_box());
            let fixed_norm = fixed_mass.powf(1.0 / p_fixed);
            let mut eval = |x: &[Vec<f64>]| -> Option<f64> {
                let norm = local_norm(&x[0], sig_vary, &cells, p_vary);
                if !(norm > 0.0 && fixed_norm > 0.0) {
                    return None;
                }
                let g = embed(&params, &cells, &x[0], sig_vary).ok()?;
                let funcs = if fixed_slot == 0 {
                    [sig_fixed.clone(), g]
                } else {
                    [g, sig_fixed.clone()]
                };
                let num = lattice_numerator(&funcs, alpha, scn.v.values(), q, &cube, scratch);
                Some(num.powf(1.0 / q) / (fixed_norm * norm))
            };
            let order0 = ci * (strategy.random + 2);
            let mut best = Candidate {
                value: sawyer,
                source: CandidateSource::Indicator,
                cube: Some(cube),
                x: vec![vec![1.0; cells.len()]],
                order: order0,
            };
            let mut used = 0;
            for r in 0..strategy.random {
                let mut rng = rng_for(strategy.seed, 3_000 + (ci * strategy.random + r) as u64);
                let x = vec![lognormal(&mut rng, strategy.spread, cells.len())];
                used += 1;
                if let Some(v) = eval(&x) {
                    best = better(
                        best,
                        Candidate {
                            value: v,
                            source: CandidateSource::Random,
                            cube: Some(cube),
                            x,
                            order: order0 + 1 + r,
                        },
                    );
                }
            }
            let mut x = best.x.clone();
            let (value, more, hit) = ascend(
                &mut x,
                best.value,
                &mut eval,
                strategy.net_levels.as_deref(),
                strategy.max_sweeps,
                per_cube_budget,
            );
            used += more;
            if value > best.value {
                best = Candidate {
                    value,
                    source: CandidateSource::Ascent,
                    cube: Some(cube),
                    x,
                    order: order0 + 1 + strategy.random,
                };
            }
            (best, used, hit)
        })
        .collect();

    let mut evaluations = 0;
    let mut exhausted = false;
    let mut pool = Vec::new();
    for (c, used, hit) in results {
        evaluations += used;
        exhausted |= hit;
        pool.push(c);
    }
    let best = pool
        .into_iter()
        .reduce(better)
        .ok_or_else(|| Error::EmptyFamily("no testing cubes to search".into()))?;
    Ok(PartialEstimate {
        fixed_slot,
        value: best.value,
        source: best.source,
        witness_cube: best.cube.expect("partial candidates carry a cube"),
        witness: best.x.into_iter().next().expect("one varying slot"),
        evaluations,
        budget_exhausted: exhausted,
    })
}
