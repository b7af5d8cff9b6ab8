//! Exponents, weights, dual weights and Muckenhoupt-type constants.

mod constants;
mod exponents;
mod weight;

pub use constants::{
    family_cubes, multilinear_weight_constant, single_weight_constant, ConstantDisplay, ConstantKind,
    ConstantValue, CubeFamily,
};
pub(crate) use constants::pick_max;
pub use exponents::{conjugate, derive_exponents, ExponentData};
pub use weight::{dual_weights, weighted_norm, Clamp, ClosedForm, Weight};

use crate::error::{Error, Result};
use crate::lattice::{LatticeParams, WeightSpec};

/// Everything the testing operations need about one weight configuration.
#[derive(Debug, Clone)]
pub struct WeightScenario {
    pub exps: ExponentData,
    pub w: Vec<Weight>,
    pub v: Weight,
    /// `sigma_i = w_i^{1 - p_i'}`
    pub sigma: Vec<Weight>,
    /// `prod w_i^{p/p_i}`
    pub v_w: Weight,
}

impl WeightScenario {
    pub fn new(
        params: &LatticeParams,
        exps: ExponentData,
        w_specs: &[WeightSpec],
        v_spec: &WeightSpec,
        clamp: Clamp,
    ) -> Result<Self> {
        if w_specs.len() != exps.m {
            return Err(Error::InvalidParams(format!(
                "{} weight specs for m = {}",
                w_specs.len(),
                exps.m
            )));
        }
        if params.n != exps.n {
            return Err(Error::InvalidParams(format!(
                "lattice dimension {} differs from exponent dimension {}",
                params.n, exps.n
            )));
        }
        exps.require_duals()?;
        let w = w_specs
            .iter()
            .map(|s| Weight::from_spec(s, params, clamp))
            .collect::<Result<Vec<_>>>()?;
        let v = Weight::from_spec(v_spec, params, clamp)?;
        Self::from_weights(exps, w, v)
    }

    pub fn from_weights(exps: ExponentData, w: Vec<Weight>, v: Weight) -> Result<Self> {
        let sigma = dual_weights(&w, &exps.p_vec)?;
        let mut v_w = w[0].powf(exps.p / exps.p_vec[0])?;
        for (wi, pi) in w.iter().zip(&exps.p_vec).skip(1) {
            v_w = v_w.mul(&wi.powf(exps.p / pi)?)?;
        }
        Ok(WeightScenario {
            exps,
            w,
            v,
            sigma,
            v_w,
        })
    }

    pub fn params(&self) -> &LatticeParams {
        self.v.params()
    }
}
