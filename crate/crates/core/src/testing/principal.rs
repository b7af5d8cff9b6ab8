//! Principal cubes of `(f, sigma)` below a root cube, and the Carleson bound.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{DyadicCube, LatticeFunction, LatticeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalCube {
    pub cube: DyadicCube,
    /// `E^sigma_G f = sigma(G)^{-1} ∫_G f sigma`
    pub average: f64,
    pub sigma_mass: f64,
    pub generation: usize,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PrincipalForest {
    pub root: DyadicCube,
    pub cubes: Vec<PrincipalCube>,
    params: LatticeParams,
    index: HashMap<DyadicCube, usize>,
}

/// `(∫_Q f sigma, sigma(Q))` on the region part of a grid cube.
fn weighted_parts(fs: &LatticeFunction, sigma: &LatticeFunction, q: &DyadicCube) -> (f64, f64) {
    let p = sigma.params();
    let b = q.cell_box(p);
    (fs.box_integral_cells(&b), sigma.box_integral_cells(&b))
}

/// Repeated `E^sigma_Q f` evaluations for one `(f, sigma)`.
#[derive(Debug, Clone)]
pub struct SigmaAverages {
    fs: LatticeFunction,
    sigma: LatticeFunction,
}

impl SigmaAverages {
    pub fn new(f: &LatticeFunction, sigma: &LatticeFunction) -> Result<Self> {
        Ok(SigmaAverages {
            fs: f.mul(sigma)?,
            sigma: sigma.clone(),
        })
    }

    /// `E^sigma_Q f`, zero when `sigma(Q) = 0`.
    pub fn average(&self, q: &DyadicCube) -> f64 {
        let (num, mass) = weighted_parts(&self.fs, &self.sigma, q);
        if mass > 0.0 {
            num / mass
        } else {
            0.0
        }
    }
}

impl PrincipalForest {
    pub fn generations(&self) -> Vec<Vec<usize>> {
        let depth = self.cubes.iter().map(|c| c.generation).max().unwrap_or(0);
        let mut out = vec![Vec::new(); depth + 1];
        for (i, c) in self.cubes.iter().enumerate() {
            out[c.generation].push(i);
        }
        out
    }

    pub fn find(&self, cube: &DyadicCube) -> Option<usize> {
        self.index.get(cube).copied()
    }

    /// `Gamma(Q)`: the minimal principal cube containing `Q`.
    pub fn gamma(&self, q: &DyadicCube) -> Result<usize> {
        if !self.root.contains(q, &self.params) {
            return Err(Error::OutOfRange(format!("{q} is not inside the root {}", self.root)));
        }
        let mut cur = *q;
        loop {
            if let Some(&i) = self.index.get(&cur) {
                return Ok(i);
            }
            cur = cur.parent(&self.params).expect("root is an ancestor");
        }
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }
}

/// Principal cubes below `root`: each new cube is a maximal dyadic subcube
/// whose average exceeds four times that of its principal parent.
pub fn build_principal_cubes(f: &LatticeFunction, sigma: &LatticeFunction, root: DyadicCube) -> Result<PrincipalForest> {
    let params = *f.params();
    let fs = f.mul(sigma)?;
    params.check_level(root.level)?;
    let (num, mass) = weighted_parts(&fs, sigma, &root);
    if !(mass > 0.0) {
        return Err(Error::Degenerate(format!("sigma vanishes on the root {root}")));
    }
    let mut cubes = vec![PrincipalCube {
        cube: root,
        average: num / mass,
        sigma_mass: mass,
        generation: 0,
        parent: None,
    }];
    let mut stack: Vec<(DyadicCube, usize)> = root.children(&params).into_iter().rev().map(|c| (c, 0)).collect();
    while let Some((q, g)) = stack.pop() {
        let (num, mass) = weighted_parts(&fs, sigma, &q);
        if !(mass > 0.0) {
            continue;
        }
        let avg = num / mass;
        let owner = if avg > 4.0 * cubes[g].average {
            cubes.push(PrincipalCube {
                cube: q,
                average: avg,
                sigma_mass: mass,
                generation: cubes[g].generation + 1,
                parent: Some(g),
            });
            cubes.len() - 1
        } else {
            g
        };
        for c in q.children(&params).into_iter().rev() {
            stack.push((c, owner));
        }
    }
    let index = cubes.iter().enumerate().map(|(i, c)| (c.cube, i)).collect();
    Ok(PrincipalForest {
        root,
        cubes,
        params,
        index,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlesonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `sum_G (E^sigma_G f)^p sigma(G)` against `(4/3) ∫_{root} (M^D_sigma f)^p sigma`,
/// with the maximal function over dyadic subcubes of the root.
pub fn carleson_check(forest: &PrincipalForest, f: &LatticeFunction, sigma: &LatticeFunction, p: f64) -> Result<CarlesonCheck> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidExponents(format!("p = {p} must be positive")));
    }
    let params = *f.params();
    if !params.same_grid(forest.params()) {
        return Err(Error::LatticeMismatch("forest and inputs live on different lattices".into()));
    }
    let fs = f.mul(sigma)?;
    let lhs: f64 = forest
        .cubes
        .iter()
        .map(|g| g.average.powf(p) * g.sigma_mass)
        .sum();
    let root = forest.root;
    let cells = root.cell_box(&params).cells(&params);
    let mut integral = 0.0;
    for c in cells {
        let idx = params.unflat(c);
        let cell = [idx[0] as i64, idx[1] as i64];
        let mut best: f64 = 0.0;
        for level in root.level..=params.max_level() {
            let q = DyadicCube::containing(&params, root.shift, level, cell)?;
            let (num, mass) = weighted_parts(&fs, sigma, &q);
            if mass > 0.0 {
                best = best.max(num / mass);
            }
        }
        integral += best.powf(p) * sigma.cells()[c];
    }
    let rhs = 4.0 / 3.0 * integral * params.cell_volume();
    Ok(CarlesonCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + 1e-9 * rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Shift;

    fn setup() -> (LatticeParams, LatticeFunction, LatticeFunction, DyadicCube) {
        let p = LatticeParams::new(1, 2, 2, 1).unwrap();
        let f = LatticeFunction::from_domain_fn(p, |i| if i[0] < 3 { 1.0 } else { 0.0 }).unwrap();
        let sigma = LatticeFunction::from_domain_fn(p, |_| 1.0).unwrap();
        let root = DyadicCube::containing(&p, Shift::ZERO, -2, [0, 0]).unwrap();
        (p, f, sigma, root)
    }

    #[test]
    fn quarter_indicator_forest() {
        let (_, f, sigma, root) = setup();
        let forest = build_principal_cubes(&f, &sigma, root).unwrap();
        assert_eq!(forest.cubes.len(), 2);
        assert!((forest.cubes[0].average - 1.0 / 16.0).abs() < 1e-14);
        assert!((forest.cubes[1].cube.side_length() - 0.5).abs() < 1e-14);
        assert!((forest.cubes[1].average - 0.5).abs() < 1e-14);
        let c = carleson_check(&forest, &f, &sigma, 2.0).unwrap();
        assert!((c.lhs - (1.0 / 8.0 + 1.0 / 64.0)).abs() < 1e-14);
        assert!(c.pass);
    }

    #[test]
    fn constant_gives_root_only() {
        let (_, _, sigma, root) = setup();
        let f = sigma.scale(2.5).unwrap();
        let forest = build_principal_cubes(&f, &sigma, root).unwrap();
        assert_eq!(forest.cubes.len(), 1);
        let c = carleson_check(&forest, &f, &sigma, 3.0).unwrap();
        assert!(c.pass);
    }

    #[test]
    fn gamma_dominates() {
        let (p, f, sigma, root) = setup();
        let forest = build_principal_cubes(&f, &sigma, root).unwrap();
        let avgs = SigmaAverages::new(&f, &sigma).unwrap();
        for level in root.level..=p.max_level() {
            for cell in 0..p.domain_side() as i64 {
                let q = DyadicCube::containing(&p, Shift::ZERO, level, [cell, 0]).unwrap();
                let g = forest.gamma(&q).unwrap();
                let avg = avgs.average(&q);
                assert!(avg <= 4.0 * forest.cubes[g].average + 1e-15);
            }
        }
    }

    #[test]
    fn zero_sigma_root_is_rejected() {
        let (p, f, _, _) = setup();
        let sigma = LatticeFunction::zeros(p);
        let root = DyadicCube::containing(&p, Shift::ZERO, -2, [0, 0]).unwrap();
        assert!(build_principal_cubes(&f, &sigma, root).is_err());
    }
}
