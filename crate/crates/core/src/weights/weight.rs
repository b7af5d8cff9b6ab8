use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_lattice_function, sample_power, LatticeFunction, LatticeParams, WeightSpec};

/// Clamp range applied to every weight built from a spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Clamp {
    pub min: f64,
    pub max: f64,
}

impl Default for Clamp {
    fn default() -> Self {
        Clamp { min: 1e-8, max: 1e8 }
    }
}

/// Closed form a weight was sampled from, kept so powers and products can be
/// re-sampled exactly instead of transforming cell averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    Const(f64),
    /// `scale * |x - center|^exponent`
    Power { scale: f64, exponent: f64, center: [f64; 2] },
}

/// A positive weight on the domain cells (padding is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    form: Option<ClosedForm>,
    values: LatticeFunction,
}

impl Weight {
    /// Samples `spec` and clamps domain values into `clamp`. The closed form
    /// is dropped when clamping changed any cell.
    pub fn from_spec(spec: &WeightSpec, params: &LatticeParams, clamp: Clamp) -> Result<Self> {
        let values = build_lattice_function(spec, params)?;
        let form = match spec {
            WeightSpec::Constant { value } => Some(ClosedForm::Const(*value)),
            WeightSpec::Power { exponent, .. } => Some(ClosedForm::Power {
                scale: 1.0,
                exponent: *exponent,
                center: spec.power_center(params.n).expect("power spec"),
            }),
            _ => None,
        };
        Self::clamped(form, values, clamp)
    }

    fn clamped(form: Option<ClosedForm>, values: LatticeFunction, clamp: Clamp) -> Result<Self> {
        let mut changed = false;
        let values = values.map_domain(|v| {
            let c = v.clamp(clamp.min, clamp.max);
            changed |= c != v;
            c
        })?;
        Ok(Weight {
            form: if changed { None } else { form },
            values,
        })
    }

    /// Wraps arbitrary domain data with no closed form.
    pub fn from_function(values: LatticeFunction) -> Self {
        Weight { form: None, values }
    }

    pub fn values(&self) -> &LatticeFunction {
        &self.values
    }

    pub fn params(&self) -> &LatticeParams {
        self.values.params()
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.form
    }

    /// `w^e`. Power forms are re-sampled exactly when the new exponent is
    /// integrable; otherwise domain cells are raised pointwise.
    pub fn powf(&self, e: f64) -> Result<Weight> {
        match self.symbolic_powf(e)? {
            Some(w) => Ok(w),
            None => self.pointwise_powf(e),
        }
    }

    /// Exponent of `w^e` when `w` is a power form and `w^e` is not locally
    /// integrable, so `powf` would return a finite lattice truncation.
    pub fn non_integrable_power(&self, e: f64) -> Option<f64> {
        match self.form {
            Some(ClosedForm::Power { exponent, .. }) if exponent * e <= -(self.params().n as f64) => Some(exponent * e),
            _ => None,
        }
    }

    /// `w^e`, refusing to fall back to pointwise powers of a power form.
    pub fn powf_exact(&self, e: f64) -> Result<Weight> {
        match self.symbolic_powf(e)? {
            Some(w) => Ok(w),
            None if matches!(self.form, Some(ClosedForm::Power { .. })) => {
                let a = match self.form {
                    Some(ClosedForm::Power { exponent, .. }) => exponent * e,
                    _ => unreachable!(),
                };
                Err(Error::InvalidSpec(format!(
                    "|x|^{a} is not locally integrable in dimension {}",
                    self.params().n
                )))
            }
            None => self.pointwise_powf(e),
        }
    }

    fn symbolic_powf(&self, e: f64) -> Result<Option<Weight>> {
        let p = *self.params();
        match self.form {
            Some(ClosedForm::Const(c)) => {
                let v = c.powf(e);
                Ok(Some(Weight {
                    form: Some(ClosedForm::Const(v)),
                    values: LatticeFunction::from_domain_fn(p, |_| v)?,
                }))
            }
            Some(ClosedForm::Power { scale, exponent, center }) if exponent * e > -(p.n as f64) => {
                let (scale, exponent) = (scale.powf(e), exponent * e);
                Ok(Some(Weight {
                    form: Some(ClosedForm::Power { scale, exponent, center }),
                    values: sample_power(&p, scale, exponent, center)?,
                }))
            }
            _ => Ok(None),
        }
    }

    fn pointwise_powf(&self, e: f64) -> Result<Weight> {
        Ok(Weight {
            form: None,
            values: self.values.map_domain(|v| v.powf(e))?,
        })
    }

    /// Product, exact for constants and same-center powers.
    pub fn mul(&self, other: &Weight) -> Result<Weight> {
        self.values.check_same_lattice(&other.values)?;
        let p = *self.params();
        match (self.form, other.form) {
            (Some(ClosedForm::Const(a)), _) => Ok(Weight {
                form: other.form.map(|f| scale_form(f, a)),
                values: other.values.scale(a)?,
            }),
            (_, Some(ClosedForm::Const(b))) => Ok(Weight {
                form: self.form.map(|f| scale_form(f, b)),
                values: self.values.scale(b)?,
            }),
            (
                Some(ClosedForm::Power { scale: s1, exponent: a1, center: c1 }),
                Some(ClosedForm::Power { scale: s2, exponent: a2, center: c2 }),
            ) if c1 == c2 && a1 + a2 > -(p.n as f64) => {
                let (scale, exponent) = (s1 * s2, a1 + a2);
                Ok(Weight {
                    form: Some(ClosedForm::Power { scale, exponent, center: c1 }),
                    values: sample_power(&p, scale, exponent, c1)?,
                })
            }
            _ => Ok(Weight {
                form: None,
                values: self.values.mul(&other.values)?,
            }),
        }
    }
}

fn scale_form(f: ClosedForm, c: f64) -> ClosedForm {
    match f {
        ClosedForm::Const(v) => ClosedForm::Const(v * c),
        ClosedForm::Power { scale, exponent, center } => ClosedForm::Power {
            scale: scale * c,
            exponent,
            center,
        },
    }
}

/// `sigma_i = w_i^{1 - p_i'}`; power forms are re-sampled exactly.
pub fn dual_weights(w: &[Weight], p_vec: &[f64]) -> Result<Vec<Weight>> {
    if w.len() != p_vec.len() {
        return Err(Error::InvalidExponents(format!(
            "{} weights for {} exponents",
            w.len(),
            p_vec.len()
        )));
    }
    w.iter()
        .zip(p_vec)
        .map(|(wi, &p)| {
            if !(p > 1.0) {
                return Err(Error::InvalidExponents(format!("dual weight needs p_i > 1, got {p}")));
            }
            wi.powf_exact(1.0 - super::conjugate(p))
        })
        .collect()
}

/// `(sum_cells |f|^p sigma h^n)^{1/p}`, summed in cell order.
pub fn weighted_norm(f: &LatticeFunction, sigma: &LatticeFunction, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidExponents(format!("norm exponent {p} must be positive")));
    }
    f.check_same_lattice(sigma)?;
    let s: f64 = f
        .cells()
        .iter()
        .zip(sigma.cells())
        .map(|(v, s)| v.abs().powf(p) * s)
        .sum();
    Ok((s * f.params().cell_volume()).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> LatticeParams {
        LatticeParams::new(1, 2, 2, 1).unwrap()
    }

    #[test]
    fn dual_of_constant_and_power() {
        let p = params();
        let c = Weight::from_spec(&WeightSpec::constant(4.0), &p, Clamp::default()).unwrap();
        let s = dual_weights(&[c], &[2.0]).unwrap();
        assert!((s[0].values().value([0, 0]) - 0.25).abs() < 1e-15);
        let w = Weight::from_spec(&WeightSpec::power(0.5), &p, Clamp::default()).unwrap();
        let s = dual_weights(&[w], &[2.0]).unwrap();
        let h = p.h();
        assert!((s[0].values().value([0, 0]) - 2.0 * h.powf(-0.5)).abs() < 1e-12 * h.powf(-0.5));
        assert_eq!(s[0].values().value([p.domain_side(), 0]), 0.0);
    }

    #[test]
    fn dual_rejects_non_integrable() {
        let p = params();
        let w = Weight::from_spec(&WeightSpec::power(2.0), &p, Clamp::default()).unwrap();
        assert!(dual_weights(std::slice::from_ref(&w), &[2.0]).is_err());
        assert!(dual_weights(&[w], &[1.0]).is_err());
    }

    #[test]
    fn clamping_drops_closed_form() {
        let p = params();
        let w = Weight::from_spec(&WeightSpec::power(0.5), &p, Clamp { min: 0.2, max: 10.0 }).unwrap();
        assert!(w.closed_form().is_none());
        assert!((w.values().value([0, 0]) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn same_center_powers_multiply_exactly() {
        let p = params();
        let a = Weight::from_spec(&WeightSpec::power(0.5), &p, Clamp::default()).unwrap();
        let b = a.mul(&a).unwrap();
        let direct = Weight::from_spec(&WeightSpec::power(1.0), &p, Clamp::default()).unwrap();
        for (x, y) in b.values().cells().iter().zip(direct.values().cells()) {
            assert!((x - y).abs() <= 1e-14 * y.max(1.0));
        }
    }

    #[test]
    fn norms() {
        let p = params();
        let one = build_lattice_function(&WeightSpec::constant(1.0), &p).unwrap();
        assert!((weighted_norm(&one, &one, 2.0).unwrap() - 2.0).abs() < 1e-12);
        // f = x on [0,1) against 1/sqrt(3)
        let h = p.h();
        let f = LatticeFunction::from_domain_fn(p, |i| {
            let x = (i[0] as f64 + 0.5) * h;
            if x < 1.0 {
                x
            } else {
                0.0
            }
        })
        .unwrap();
        let v = weighted_norm(&f, &one, 2.0).unwrap();
        assert!((v - (1.0f64 / 3.0).sqrt()).abs() < h);
    }
}
