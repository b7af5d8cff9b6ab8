//! Sparse families from the level sets `{M^D_alpha F > a^k}` of one grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DyadicCube, LatticeFunction, LatticeParams, Shift};
use crate::maximal::{check_inputs, DyadicTerms};

/// Default level base `2^{(m - alpha/n)(n+1)}`.
pub fn default_level_base(n: usize, m: usize, alpha: f64) -> f64 {
    2f64.powf((m as f64 - alpha / n as f64) * (n as f64 + 1.0))
}

/// Parent-to-child growth bound `2^{mn - alpha}` of the cube term.
pub fn term_growth_bound(n: usize, m: usize, alpha: f64) -> f64 {
    2f64.powf((m * n) as f64 - alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub k: i32,
    pub cube: DyadicCube,
    pub term: f64,
    /// Region cells of the cube outside `Gamma_{k+1}` (flat indices).
    pub e_cells: Vec<usize>,
    /// `|Q| - |Gamma_{k+1} ∩ Q|` in full (unclipped) measure.
    pub e_measure: f64,
    /// Top-level cube: no parent, so neither the term upper bound nor the
    /// half-measure bound is asserted.
    pub root_exempt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    pub a: f64,
    pub shift: Shift,
    pub alpha: f64,
    pub m: usize,
    pub k_floor: i32,
    pub k_ceil: i32,
    pub entries: Vec<SparseEntry>,
}

impl SparseFamily {
    pub fn entries_at(&self, k: i32) -> impl Iterator<Item = &SparseEntry> {
        self.entries.iter().filter(move |e| e.k == k)
    }
}

/// Largest `k` with `a^k < x` (`x > 0`).
fn level_below(a: f64, x: f64) -> i32 {
    let mut k = (x.ln() / a.ln()).ceil() as i32 - 1;
    while a.powi(k + 1) < x {
        k += 1;
    }
    while a.powi(k) >= x {
        k -= 1;
    }
    k
}

/// Builds the family for grid `shift`. `a` defaults to the level base above;
/// `k_floor` defaults to the largest `k` at which a top-level cube enters.
pub fn build_sparse_family(
    funcs: &[LatticeFunction],
    alpha: f64,
    shift: Shift,
    a: Option<f64>,
    k_floor: Option<i32>,
) -> Result<SparseFamily> {
    let params = check_inputs(funcs, alpha)?;
    let m = funcs.len();
    let a = a.unwrap_or_else(|| default_level_base(params.n, m, alpha));
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::InvalidParams(format!("level base a = {a} must exceed 1")));
    }
    let terms = DyadicTerms::multilinear(funcs, alpha, shift)?;
    let maximal = terms.chain_max();
    let max_m = maximal.iter().copied().fold(0.0, f64::max);
    if !(max_m > 0.0) {
        return Err(Error::Degenerate("the input product vanishes on every cube".into()));
    }
    let k_ceil = level_below(a, max_m);
    let top = terms
        .level(params.min_level())
        .terms
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let default_floor = if top > 0.0 { level_below(a, top) } else { k_ceil };
    let k_floor = k_floor.unwrap_or(default_floor.min(k_ceil));
    if k_floor > k_ceil {
        return Err(Error::InvalidParams(format!(
            "k_floor = {k_floor} lies above k_ceil = {k_ceil}"
        )));
    }

    // top-down: strict-ancestor maximum of the term for every cube
    let mut anc: HashMap<DyadicCube, f64> = HashMap::new();
    let mut raw: Vec<(i32, DyadicCube, f64)> = Vec::new();
    for (level, lt) in terms.levels() {
        for (slot, &term) in lt.terms.iter().enumerate() {
            let cube = DyadicCube {
                n: params.n,
                shift,
                level,
                index: lt.layout.index_at(slot),
            };
            let above = match cube.parent(&params) {
                Some(p) => {
                    let pa = anc.get(&p).copied().unwrap_or(0.0);
                    pa.max(terms.term(&p))
                }
                None => 0.0,
            };
            anc.insert(cube, above);
            if term > above && term > a.powi(k_floor) {
                // entries for every k with above <= a^k < term
                let hi = level_below(a, term).min(k_ceil);
                let mut k = hi;
                while k >= k_floor && a.powi(k) >= above {
                    raw.push((k, cube, term));
                    k -= 1;
                }
            }
        }
    }
    raw.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut entries = Vec::with_capacity(raw.len());
    for &(k, cube, term) in &raw {
        let threshold = a.powi(k + 1);
        let b = cube.cell_box(&params);
        let e_cells: Vec<usize> = b
            .cells(&params)
            .into_iter()
            .filter(|&i| maximal[i] <= threshold)
            .collect();
        let inner: f64 = raw
            .iter()
            .filter(|(kk, c, _)| *kk == k + 1 && cube.contains(c, &params))
            .map(|(_, c, _)| c.volume())
            .sum();
        entries.push(SparseEntry {
            k,
            cube,
            term,
            e_cells,
            e_measure: cube.volume() - inner,
            root_exempt: cube.level == params.min_level(),
        });
    }
    Ok(SparseFamily {
        a,
        shift,
        alpha,
        m,
        k_floor,
        k_ceil,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseCheck {
    pub name: String,
    pub pass: bool,
    /// Offending cells (flat indices) or entry positions, capped.
    pub counterexamples: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseValidation {
    pub checks: Vec<SparseCheck>,
    /// Smallest and largest pointwise ratio `M^D / S` observed.
    pub ratio_range: Option<(f64, f64)>,
    pub root_exempt_entries: usize,
    /// Root entries whose `E` set is below half their measure (not a failure:
    /// without a parent their term is only bounded by `a^{k+1}`).
    pub root_half_measure_shortfall: usize,
}

impl SparseValidation {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&SparseCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const MAX_COUNTEREXAMPLES: usize = 16;

fn check(name: &str, bad: Vec<usize>) -> SparseCheck {
    SparseCheck {
        name: name.into(),
        pass: bad.is_empty(),
        counterexamples: bad.into_iter().take(MAX_COUNTEREXAMPLES).collect(),
    }
}

/// Checks a family against the inputs it claims to come from.
pub fn validate_sparse_family(sf: &SparseFamily, funcs: &[LatticeFunction], alpha: f64) -> Result<SparseValidation> {
    let params: LatticeParams = check_inputs(funcs, alpha)?;
    if funcs.len() != sf.m || (alpha - sf.alpha).abs() > 0.0 {
        return Err(Error::InvalidParams(format!(
            "family was built for m = {}, alpha = {}; got m = {}, alpha = {alpha}",
            sf.m,
            sf.alpha,
            funcs.len()
        )));
    }
    if let Some(e) = sf.entries.iter().find(|e| e.cube.shift != sf.shift || e.cube.n != params.n) {
        return Err(Error::InvalidParams(format!("entry {} does not belong to the family grid", e.cube)));
    }
    let terms = DyadicTerms::multilinear(funcs, alpha, sf.shift)?;
    let maximal = terms.chain_max();
    let total = params.total_cells();
    let a = sf.a;
    let n = params.n;
    let growth = term_growth_bound(n, sf.m, alpha);

    // (i) disjointness per level, nesting, half-measure
    let mut overlap = Vec::new();
    let mut nesting = Vec::new();
    let mut half = Vec::new();
    let mut owner_prev: Vec<Option<usize>> = vec![None; total];
    for k in sf.k_floor..=sf.k_ceil {
        let mut owner: Vec<Option<usize>> = vec![None; total];
        for (j, e) in sf.entries.iter().enumerate().filter(|(_, e)| e.k == k) {
            let cells = e.cube.cell_box(&params).cells(&params);
            for &c in &cells {
                if owner[c].is_some() {
                    overlap.push(j);
                    break;
                }
            }
            for &c in &cells {
                owner[c].get_or_insert(j);
            }
            if k > sf.k_floor {
                let parent_ok = cells.first().and_then(|&c| owner_prev[c]).is_some_and(|pj| {
                    sf.entries[pj].cube.contains(&e.cube, &params)
                });
                if !parent_ok {
                    nesting.push(j);
                }
            }
        }
        owner_prev = owner;
    }
    let mut root_shortfall = 0;
    for (j, e) in sf.entries.iter().enumerate() {
        let inner: f64 = sf
            .entries
            .iter()
            .filter(|c| c.k == e.k + 1 && e.cube.contains(&c.cube, &params))
            .map(|c| c.cube.volume())
            .sum();
        if inner > 0.5 * e.cube.volume() * (1.0 + 1e-12) {
            if e.root_exempt {
                root_shortfall += 1;
            } else {
                half.push(j);
            }
        }
    }
    overlap.dedup();

    // (ii) E-set measure and disjointness
    let mut e_small = Vec::new();
    let mut e_count = vec![0u32; total];
    for (j, e) in sf.entries.iter().enumerate() {
        if !e.root_exempt && e.e_measure < 0.5 * e.cube.volume() * (1.0 - 1e-12) {
            e_small.push(j);
        }
        for &c in &e.e_cells {
            e_count[c] += 1;
        }
    }
    let e_overlap: Vec<usize> = (0..total).filter(|&c| e_count[c] > 1).collect();

    // (iii) term bounds
    let mut bounds = Vec::new();
    for (j, e) in sf.entries.iter().enumerate() {
        let lo = a.powi(e.k);
        let ok_lo = e.term > lo;
        let ok_hi = e.root_exempt || e.term <= growth * lo * (1.0 + 1e-12);
        if !(ok_lo && ok_hi) {
            bounds.push(j);
        }
    }

    // (iv) every cell above a^{k_floor} lies in exactly one E(Q); above
    // a^{k_floor+1} the ratio is also pinned
    let covered_from = a.powi(sf.k_floor);
    let threshold = a.powi(sf.k_floor + 1);
    let mut owner: Vec<Option<usize>> = vec![None; total];
    for (j, e) in sf.entries.iter().enumerate() {
        for &c in &e.e_cells {
            owner[c] = Some(j);
        }
    }
    let lo_ratio = 2f64.powf(alpha - (sf.m * n) as f64);
    let mut pointwise = Vec::new();
    let mut range: Option<(f64, f64)> = None;
    for c in 0..total {
        let mv = maximal[c];
        if mv <= covered_from {
            continue;
        }
        let covered = e_count[c] == 1;
        if mv <= threshold {
            if !covered {
                pointwise.push(c);
            }
            continue;
        }
        let ratio = owner[c].map(|j| mv / sf.entries[j].term);
        match (covered, ratio) {
            (true, Some(r)) => {
                range = Some(match range {
                    None => (r, r),
                    Some((l, h)) => (l.min(r), h.max(r)),
                });
                if !(r > lo_ratio && r <= a * (1.0 + 1e-12)) {
                    pointwise.push(c);
                }
            }
            _ => pointwise.push(c),
        }
    }

    Ok(SparseValidation {
        checks: vec![
            check("disjoint_per_level", overlap),
            check("nested_level_sets", nesting),
            check("half_measure", half),
            check("e_measure", e_small),
            check("e_disjoint", e_overlap),
            check("term_bounds", bounds),
            check("pointwise", pointwise),
        ],
        ratio_range: range,
        root_exempt_entries: sf.entries.iter().filter(|e| e.root_exempt).count(),
        root_half_measure_shortfall: root_shortfall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter_indicator() -> (LatticeParams, LatticeFunction) {
        let p = LatticeParams::new(1, 2, 2, 1).unwrap();
        let f = LatticeFunction::from_domain_fn(p, |i| if i[0] < 3 { 1.0 } else { 0.0 }).unwrap();
        (p, f)
    }

    #[test]
    fn quarter_indicator_levels() {
        let (p, f) = quarter_indicator();
        let sf = build_sparse_family(std::slice::from_ref(&f), 0.0, Shift::ZERO, None, None).unwrap();
        assert_eq!(sf.a, 4.0);
        assert_eq!((sf.k_floor, sf.k_ceil), (-3, -1));
        let h = p.h();
        let expect = [(-1, 0.5, 0.5), (-2, 2.0, 0.125), (-3, 8.0, 1.0 / 32.0)];
        for (k, side, term) in expect {
            let at: Vec<_> = sf.entries_at(k).collect();
            assert_eq!(at.len(), 1, "k = {k}");
            assert!((at[0].cube.side_length() - side).abs() < 1e-12);
            assert_eq!(at[0].cube.anchor_cells(&p)[0], 0);
            assert!((at[0].term - term).abs() < 1e-12);
        }
        let v = validate_sparse_family(&sf, std::slice::from_ref(&f), 0.0).unwrap();
        assert!(v.pass(), "{v:?}");
        // cells of [0,1/4): M = 1, S = 1/2
        let (lo, hi) = v.ratio_range.unwrap();
        assert!(lo >= 1.0 - 1e-12 && hi <= 4.0);
        let _ = h;
    }

    #[test]
    fn deleted_cube_breaks_pointwise() {
        let (_, f) = quarter_indicator();
        let mut sf = build_sparse_family(std::slice::from_ref(&f), 0.0, Shift::ZERO, None, None).unwrap();
        let j = sf.entries.iter().position(|e| e.k == -1).unwrap();
        sf.entries.remove(j);
        let v = validate_sparse_family(&sf, std::slice::from_ref(&f), 0.0).unwrap();
        assert!(!v.check("pointwise").unwrap().pass);
    }

    #[test]
    fn duplicated_cube_breaks_disjointness() {
        let (_, f) = quarter_indicator();
        let mut sf = build_sparse_family(std::slice::from_ref(&f), 0.0, Shift::ZERO, None, None).unwrap();
        let dup = sf.entries[0].clone();
        sf.entries.push(dup);
        let v = validate_sparse_family(&sf, std::slice::from_ref(&f), 0.0).unwrap();
        assert!(!v.check("disjoint_per_level").unwrap().pass);
    }

    #[test]
    fn scaling_by_a_shifts_levels() {
        let (_, f) = quarter_indicator();
        let sf = build_sparse_family(std::slice::from_ref(&f), 0.0, Shift::ZERO, None, None).unwrap();
        let g = f.scale(4.0).unwrap();
        let sg = build_sparse_family(std::slice::from_ref(&g), 0.0, Shift::ZERO, None, None).unwrap();
        assert_eq!(sf.entries.len(), sg.entries.len());
        for (x, y) in sf.entries.iter().zip(&sg.entries) {
            assert_eq!(x.k + 1, y.k);
            assert_eq!(x.cube, y.cube);
        }
    }

    #[test]
    fn zero_input_is_rejected() {
        let p = LatticeParams::new(1, 1, 0, 1).unwrap();
        let f = LatticeFunction::zeros(p);
        assert!(build_sparse_family(&[f], 0.0, Shift::ZERO, None, None).is_err());
    }
}
