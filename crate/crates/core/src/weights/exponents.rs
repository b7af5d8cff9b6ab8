use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent bookkeeping for `(p_1..p_m, alpha, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentData {
    pub n: usize,
    pub m: usize,
    pub p_vec: Vec<f64>,
    /// `1/p = sum 1/p_i`
    pub p: f64,
    pub alpha: f64,
    /// `1/q = 1/p - alpha/n`
    pub q: f64,
    /// Conjugates `p_i/(p_i - 1)`; infinite when `p_i = 1`.
    pub p_conj: Vec<f64>,
    pub regime_thm1: bool,
    pub q_positive: bool,
}

impl ExponentData {
    /// Errors unless every `p_i > 1`, as needed wherever duals are formed.
    pub fn require_duals(&self) -> Result<()> {
        if let Some(p) = self.p_vec.iter().find(|p| !(**p > 1.0)) {
            return Err(Error::InvalidExponents(format!(
                "p_i = {p}: dual weights need every p_i > 1"
            )));
        }
        Ok(())
    }

    pub fn max_p(&self) -> f64 {
        self.p_vec.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Derives `p`, `q`, the conjugates and the regime flags. `p_i = 1` is
/// admitted here; paths that form duals call [`ExponentData::require_duals`].
pub fn derive_exponents(p_vec: &[f64], alpha: f64, n: usize) -> Result<ExponentData> {
    let m = p_vec.len();
    if m == 0 {
        return Err(Error::InvalidExponents("need at least one p_i".into()));
    }
    if !(n == 1 || n == 2) {
        return Err(Error::InvalidExponents(format!("dimension {n} is not supported")));
    }
    if let Some(p) = p_vec.iter().find(|p| !(p.is_finite() && **p >= 1.0)) {
        return Err(Error::InvalidExponents(format!("p_i = {p} must lie in [1, inf)")));
    }
    let limit = (m * n) as f64;
    if !(alpha >= 0.0 && alpha < limit) {
        return Err(Error::InvalidExponents(format!(
            "alpha = {alpha} must lie in [0, mn) = [0, {limit})"
        )));
    }
    let inv_p: f64 = p_vec.iter().map(|p| 1.0 / p).sum();
    let inv_q = inv_p - alpha / n as f64;
    if !(inv_q > 1e-12) {
        return Err(Error::InvalidExponents(format!(
            "1/q = 1/p - alpha/n = {inv_q} is not positive"
        )));
    }
    let q = 1.0 / inv_q;
    let max_p = p_vec.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ExponentData {
        n,
        m,
        p_vec: p_vec.to_vec(),
        p: 1.0 / inv_p,
        alpha,
        q,
        p_conj: p_vec.iter().map(|&p| conjugate(p)).collect(),
        regime_thm1: q >= max_p * (1.0 - 1e-12),
        q_positive: true,
    })
}
