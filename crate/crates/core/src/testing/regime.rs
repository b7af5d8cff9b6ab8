use serde::{Deserialize, Serialize};

use crate::lattice::LatticeCube;
use crate::weights::{derive_exponents, ExponentData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    Thm1Applies,
    Thm4TestsOnly,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub explanation: String,
}

pub fn regime_check(exps: &ExponentData) -> RegimeReport {
    if exps.require_duals().is_err() || !(exps.q > 0.0) {
        return RegimeReport {
            regime: Regime::Invalid,
            explanation: "exponents do not define a testing problem (need every p_i > 1 and q > 0)".into(),
        };
    }
    if exps.regime_thm1 {
        RegimeReport {
            regime: Regime::Thm1Applies,
            explanation: format!(
                "q = {} >= max p_i = {}: the testing constant is two-sided comparable to the operator norm; \
                 N^ and the testing value bracket the norm up to dimensional constants",
                exps.q,
                exps.max_p()
            ),
        }
    } else {
        RegimeReport {
            regime: Regime::Thm4TestsOnly,
            explanation: format!(
                "q = {} < max p_i = {}: only the lower bounds are guaranteed; the testing constant is \
                 necessary but not known to be sufficient, and the partial constants are the relevant tests (m = 2)",
                exps.q,
                exps.max_p()
            ),
        }
    }
}

/// Regime of raw exponents; invalid data maps to `Invalid`.
pub fn regime_for(p_vec: &[f64], alpha: f64, n: usize) -> RegimeReport {
    match derive_exponents(p_vec, alpha, n) {
        Ok(e) => regime_check(&e),
        Err(err) => RegimeReport {
            regime: Regime::Invalid,
            explanation: err.to_string(),
        },
    }
}

/// Assigns each cube to every slot `i` maximizing `(E^{sigma_i}_Q f_i)^{p_i} sigma_i(Q)`.
/// `quantities[c][i]` holds `(∫_Q f_i sigma_i, sigma_i(Q))` for cube `c`.
pub fn split_by_dominant_slot(cubes: &[LatticeCube], quantities: &[Vec<(f64, f64)>], p_vec: &[f64]) -> Vec<Vec<usize>> {
    let m = p_vec.len();
    let mut classes = vec![Vec::new(); m];
    for (c, _) in cubes.iter().enumerate() {
        let scores: Vec<f64> = (0..m)
            .map(|i| {
                let (num, mass) = quantities[c][i];
                if mass > 0.0 {
                    (num / mass).powf(p_vec[i]) * mass
                } else {
                    0.0
                }
            })
            .collect();
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, s) in scores.iter().enumerate() {
            if *s >= top {
                classes[i].push(c);
            }
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(regime_for(&[2.0, 2.0], 0.75, 1).regime, Regime::Thm1Applies);
        assert_eq!(regime_for(&[2.0, 2.0], 0.0, 1).regime, Regime::Thm4TestsOnly);
        assert_eq!(regime_for(&[4.0, 4.0], 0.0, 1).regime, Regime::Thm4TestsOnly);
        assert_eq!(regime_for(&[3.0, 6.0], 1.0, 2).regime, Regime::Invalid);
        assert_eq!(regime_for(&[1.0, 2.0], 0.0, 1).regime, Regime::Invalid);
    }

    #[test]
    fn regime_serializes_in_caps() {
        assert_eq!(serde_json::to_string(&Regime::Thm4TestsOnly).unwrap(), "\"THM4_TESTS_ONLY\"");
    }
}
