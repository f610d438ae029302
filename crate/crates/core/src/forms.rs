//! Finite exponential forms: 2-forms `f dz1 ∧ dz2` on `H²` with
//! `f = Σ c e^{2πi(α1 z1 + α2 z2)}`, and 1-forms `(Σ c e^{2πi n z}) dz`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quadfield::{FieldContext, QuadField, QuadInt};

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm2 {
    pub coeff: Complex64,
    pub alpha: QuadInt,
    /// `(α1, α2)`.
    pub emb: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpForm2 {
    pub field: QuadField,
    pub terms: Vec<ExpTerm2>,
}

impl ExpForm2 {
    /// Builds a form, rejecting exponents that are neither zero nor totally positive.
    pub fn new(field: QuadField, terms: Vec<(Complex64, QuadInt)>) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (coeff, alpha) in terms {
            if alpha.field != field {
                return Err(Error::InvalidInput("exponent from a different field".into()));
            }
            if !alpha.is_zero() && !alpha.is_totally_positive() {
                return Err(Error::NotTotallyPositive(alpha.to_string()));
            }
            let emb = if alpha.is_zero() { (0.0, 0.0) } else { alpha.embed() };
            out.push(ExpTerm2 { coeff, alpha, emb });
        }
        Ok(ExpForm2 { field, terms: out })
    }

    pub fn single(alpha: QuadInt, coeff: Complex64) -> Result<Self> {
        Self::new(alpha.field, vec![(coeff, alpha)])
    }

    /// The constant form `ω0 = dz1 ∧ dz2`.
    pub fn omega0(field: QuadField) -> Self {
        ExpForm2 {
            field,
            terms: vec![ExpTerm2 { coeff: Complex64::new(1.0, 0.0), alpha: QuadInt::zero(field), emb: (0.0, 0.0) }],
        }
    }

    pub fn is_omega0(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].alpha.is_zero()
    }

    /// Whether every exponent is totally positive, so the form decays at the cusp `∞`.
    pub fn decays(&self) -> bool {
        self.terms.iter().all(|t| !t.alpha.is_zero())
    }

    /// The density `f(z1, z2)`.
    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.coeff * (TWO_PI_I * (t.emb.0 * z1 + t.emb.1 * z2)).exp()).sum()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut f = self.clone();
        for t in &mut f.terms {
            t.coeff *= k;
        }
        f
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::InvalidInput("forms over different fields".into()));
        }
        let mut f = self.clone();
        f.terms.extend(other.terms.iter().cloned());
        Ok(f)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| json!({"re": t.coeff.re, "im": t.coeff.im, "a": t.alpha.a.to_string(), "b": t.alpha.b.to_string()}))
            .collect();
        json!({"d": self.field.d, "terms": terms})
    }

    /// Reads `{"d": .., "terms": [{"re", "im", "a", "b"}]}`; `a` and `b` may be
    /// integers or decimal strings.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::Parse(format!("form: {s}"));
        let d = v.get("d").and_then(Value::as_i64).ok_or_else(|| bad("missing d"))?;
        let field = QuadField::new(d)?;
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
        let int = |x: Option<&Value>| -> Result<num_bigint::BigInt> {
            match x {
                Some(Value::Number(n)) => n.as_i64().map(Into::into).ok_or_else(|| bad("integer coordinate")),
                Some(Value::String(s)) => s.parse().map_err(|_| bad("integer coordinate")),
                _ => Err(bad("missing coordinate")),
            }
        };
        let mut out = Vec::new();
        for t in terms {
            let re = t.get("re").and_then(Value::as_f64).unwrap_or(0.0);
            let im = t.get("im").and_then(Value::as_f64).unwrap_or(0.0);
            out.push((Complex64::new(re, im), QuadInt::new(field, int(t.get("a"))?, int(t.get("b"))?)));
        }
        Self::new(field, out)
    }
}

/// `Σ_{k=-K}^{K} a0 e^{2πi ε^k α0 z}`: a unit-orbit truncation of a unit-invariant form.
pub fn unit_orbit_form(field: &FieldContext, a0: Complex64, alpha0: &QuadInt, k: u32) -> Result<ExpForm2> {
    if !alpha0.is_totally_positive() {
        return Err(Error::NotTotallyPositive(alpha0.to_string()));
    }
    let k = k as i32;
    let terms = (-k..=k).map(|j| (a0, &field.eps_pow(j) * alpha0)).collect();
    ExpForm2::new(field.field, terms)
}

/// `(Σ c e^{2πi n z}) dz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpForm1 {
    pub terms: Vec<(Complex64, u32)>,
}

impl ExpForm1 {
    pub fn new(terms: Vec<(Complex64, u32)>) -> Self {
        ExpForm1 { terms }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|(c, n)| c * (TWO_PI_I * (*n as f64) * z).exp()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    fn i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    #[test]
    fn eval_examples() {
        let k = make_field(2).unwrap();
        let w0 = ExpForm2::omega0(k.field);
        assert_eq!(w0.eval(i(), Complex64::new(3.0, 0.5)), Complex64::new(1.0, 0.0));
        let f = ExpForm2::single(k.field.int(1), Complex64::new(1.0, 0.0)).unwrap();
        let v = f.eval(i(), i());
        assert!((v.re - (-4.0 * PI).exp()).abs() < 1e-18 && v.im.abs() < 1e-18);
        assert!(matches!(ExpForm2::single(k.elem(1, 1), Complex64::new(1.0, 0.0)), Err(Error::NotTotallyPositive(_))));
    }

    #[test]
    fn orbit_forms() {
        let k = make_field(2).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let a = k.elem(2, 1);
        assert_eq!(unit_orbit_form(&k, one, &a, 0).unwrap().terms.len(), 1);
        let f = unit_orbit_form(&k, one, &a, 1).unwrap();
        assert_eq!(f.terms.len(), 3);
        assert_eq!(f.terms[0].alpha, &k.eps.conj() * &a);
        assert_eq!(f.terms[2].alpha, &k.eps * &a);
        let f = unit_orbit_form(&k, one, &a, 4).unwrap();
        assert!(f.terms.iter().all(|t| t.emb.0 > 0.0 && t.emb.1 > 0.0));
    }

    #[test]
    fn decays_along_rays() {
        let k = make_field(5).unwrap();
        let f = ExpForm2::new(
            k.field,
            vec![(Complex64::new(1.0, 0.0), k.elem(1, 0)), (Complex64::new(0.3, -0.2), k.elem(1, 1))],
        )
        .unwrap();
        for (y1, y2) in [(1.0, 1.0), (0.3, 2.0), (5.0, 0.1)] {
            let mut prev = f64::INFINITY;
            for s in 1..40 {
                let t = s as f64 * 0.25;
                let v = f.eval(Complex64::new(0.0, t * y1), Complex64::new(0.0, t * y2)).norm();
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn linear_in_coefficients() {
        let k = make_field(2).unwrap();
        let f = ExpForm2::single(k.elem(3, 1), Complex64::new(0.5, 1.0)).unwrap();
        let g = ExpForm2::single(k.elem(1, 0), Complex64::new(-2.0, 0.1)).unwrap();
        let z1 = Complex64::new(0.3, 0.2);
        let z2 = Complex64::new(-0.1, 0.4);
        let s = f.add(&g).unwrap().scale(Complex64::new(0.0, 2.0));
        let expect = (f.eval(z1, z2) + g.eval(z1, z2)) * Complex64::new(0.0, 2.0);
        assert!((s.eval(z1, z2) - expect).norm() < 1e-15);
    }

    #[test]
    fn json_roundtrip() {
        let k = make_field(2).unwrap();
        assert!(unit_orbit_form(&k, Complex64::new(1.0, 0.0), &k.elem(1, 1), 0).is_err());
        let f = unit_orbit_form(&k, Complex64::new(1.5, -0.5), &k.elem(3, 1), 2).unwrap();
        let g = ExpForm2::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
        let v = serde_json::json!({"d": 2, "terms": [{"re": 1.0, "im": 0.0, "a": 1, "b": 0}]});
        assert_eq!(ExpForm2::from_json(&v).unwrap().terms.len(), 1);
    }

    #[test]
    fn one_forms() {
        let w = ExpForm1::new(vec![(Complex64::new(2.0, 0.0), 0), (Complex64::new(1.0, 0.0), 1)]);
        let v = w.eval(i());
        assert!((v - Complex64::new(2.0 + (-2.0 * PI).exp(), 0.0)).norm() < 1e-15);
    }
}
