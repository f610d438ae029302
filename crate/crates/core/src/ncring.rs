//! Truncated formal series in the rings `R` and `R'`.
//!
//! A monomial of `R` is a pair of words `(X_{x_1} ... X_{x_k}, Y_{y_1} ... Y_{y_k})`;
//! since every `X` commutes with every `Y`, this pair is a canonical form. Letters
//! of `R'` additionally carry a domain tag in `{1, 2}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::shuffle::{shuffles, Permutation};

/// Coefficients below this magnitude are dropped.
pub const PRUNE: f64 = 1e-15;

/// A generator index (1-based) with a domain tag; tag 0 marks the untagged ring `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u32,
    pub tag: u8,
}

impl Letter {
    pub fn plain(gen: u32) -> Self {
        Letter { gen, tag: 0 }
    }

    pub fn tagged(gen: u32, tag: u8) -> Self {
        Letter { gen, tag }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub x: Vec<Letter>,
    pub y: Vec<Letter>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { x: Vec::new(), y: Vec::new() }
    }

    pub fn plain(x: &[u32], y: &[u32]) -> Self {
        Monomial { x: x.iter().map(|&g| Letter::plain(g)).collect(), y: y.iter().map(|&g| Letter::plain(g)).collect() }
    }

    pub fn tagged(x: &[(u32, u8)], y: &[(u32, u8)]) -> Self {
        Monomial {
            x: x.iter().map(|&(g, t)| Letter::tagged(g, t)).collect(),
            y: y.iter().map(|&(g, t)| Letter::tagged(g, t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Same multiset of letters (index and tag) on the X and Y sides.
    pub fn is_balanced(&self) -> bool {
        if self.x.len() != self.y.len() {
            return false;
        }
        let mut a = self.x.clone();
        let mut b = self.y.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    pub fn is_tagged(&self) -> bool {
        self.x.iter().chain(self.y.iter()).any(|l| l.tag != 0)
    }

    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut y = self.y.clone();
        y.extend_from_slice(&other.y);
        Monomial { x, y }
    }

    /// Drops domain tags.
    pub fn collapse(&self) -> Monomial {
        let strip = |w: &[Letter]| w.iter().map(|l| Letter::plain(l.gen)).collect();
        Monomial { x: strip(&self.x), y: strip(&self.y) }
    }

    /// Replaces every tag by `tag`.
    pub fn with_tag(&self, tag: u8) -> Monomial {
        let set = |w: &[Letter]| w.iter().map(|l| Letter::tagged(l.gen, tag)).collect();
        Monomial { x: set(&self.x), y: set(&self.y) }
    }
}

/// Places `a` at positions `tau(0..i)` and `b` at `tau(i..i+j)`.
pub fn interleave<T: Copy>(a: &[T], b: &[T], tau: &Permutation) -> Vec<T> {
    let mut out: Vec<Option<T>> = vec![None; a.len() + b.len()];
    for (l, v) in a.iter().chain(b.iter()).enumerate() {
        out[tau.apply(l)] = Some(*v);
    }
    out.into_iter().map(|v| v.expect("tau is a bijection")).collect()
}

/// One output term of a monomial shuffle: the shuffled monomial with the
/// horizontal and vertical set-shuffles that produced it.
#[derive(Debug, Clone)]
pub struct ShuffleTerm {
    pub monomial: Monomial,
    pub tau_x: Permutation,
    pub tau_y: Permutation,
}

/// All shuffles of two monomials, the first tagged 1 and the second tagged 2,
/// with X-words and Y-words interleaved independently.
pub fn shuffle_monomials(a: &Monomial, b: &Monomial) -> Vec<ShuffleTerm> {
    let a1 = a.with_tag(1);
    let b2 = b.with_tag(2);
    let sh = shuffles(a.len(), b.len());
    let mut out = Vec::with_capacity(sh.len() * sh.len());
    for tx in &sh {
        let x = interleave(&a1.x, &b2.x, tx);
        for ty in &sh {
            let y = interleave(&a1.y, &b2.y, ty);
            out.push(ShuffleTerm { monomial: Monomial { x: x.clone(), y }, tau_x: tx.clone(), tau_y: ty.clone() });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NCSeries {
    pub degree: usize,
    pub terms: BTreeMap<Monomial, Complex64>,
}

impl NCSeries {
    pub fn zero(degree: usize) -> Self {
        NCSeries { degree, terms: BTreeMap::new() }
    }

    pub fn one(degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.terms.insert(Monomial::one(), Complex64::new(1.0, 0.0));
        s
    }

    pub fn monomial(degree: usize, m: Monomial, c: Complex64) -> Self {
        let mut s = Self::zero(degree);
        s.add_term(m, c);
        s
    }

    /// Adds `c` to the coefficient of `m`, ignoring words beyond the truncation degree.
    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        if m.len() > self.degree {
            return;
        }
        let e = self.terms.entry(m).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
    }

    pub fn coeff(&self, m: &Monomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn constant(&self) -> Complex64 {
        self.coeff(&Monomial::one())
    }

    pub fn prune(mut self) -> Self {
        self.terms.retain(|_, c| c.norm() >= PRUNE);
        self
    }

    pub fn is_balanced(&self) -> bool {
        self.terms.keys().all(Monomial::is_balanced)
    }

    pub fn truncate(&self, n: usize) -> Self {
        let degree = n.min(self.degree);
        let terms = self.terms.iter().filter(|(m, _)| m.len() <= degree).map(|(m, c)| (m.clone(), *c)).collect();
        NCSeries { degree, terms }
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        let mut s = self.clone();
        for (m, c) in &other.terms {
            s.add_term(m.clone(), *c);
        }
        Ok(s.prune())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect();
        NCSeries { degree: self.degree, terms }.prune()
    }

    /// Ring product: X-words and Y-words concatenate separately.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_degree(other)?;
        let mut s = Self::zero(self.degree);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.len() + mb.len() <= self.degree {
                    s.add_term(ma.concat(mb), ca * cb);
                }
            }
        }
        Ok(s.prune())
    }

    /// Formal shuffle product into `R'`: every pair of monomials is shuffled
    /// and each output term carries the product of the input coefficients.
    pub fn shuffle_product(&self, other: &Self) -> Result<Self> {
        self.shuffle_product_with(other, |_, _, _, ca, cb| ca * cb)
    }

    /// Shuffle product whose output coefficients are supplied by `coeff`,
    /// called with the two input monomials, the output term and the input
    /// coefficients.
    pub fn shuffle_product_with<F>(&self, other: &Self, mut coeff: F) -> Result<Self>
    where
        F: FnMut(&Monomial, &Monomial, &ShuffleTerm, Complex64, Complex64) -> Complex64,
    {
        self.check_degree(other)?;
        let mut s = Self::zero(self.degree);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.len() + mb.len() > self.degree {
                    continue;
                }
                for t in shuffle_monomials(ma, mb) {
                    let c = coeff(ma, mb, &t, *ca, *cb);
                    s.add_term(t.monomial, c);
                }
            }
        }
        Ok(s.prune())
    }

    /// The homomorphism `R' -> R` forgetting domain tags.
    pub fn phi(&self) -> Self {
        let mut s = Self::zero(self.degree);
        for (m, c) in &self.terms {
            s.add_term(m.collapse(), *c);
        }
        s.prune()
    }

    /// Largest coefficient difference over the union of supports.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (m, c) in &self.terms {
            d = d.max((c - other.coeff(m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                d = d.max(c.norm());
            }
        }
        d
    }

    pub fn to_json(&self) -> Value {
        let letter = |l: &Letter| if l.tag == 0 { json!(l.gen) } else { json!([l.gen, l.tag]) };
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                json!({
                    "x": m.x.iter().map(letter).collect::<Vec<_>>(),
                    "y": m.y.iter().map(letter).collect::<Vec<_>>(),
                    "re": c.re,
                    "im": c.im,
                })
            })
            .collect();
        json!({ "degree": self.degree, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |s: &str| Error::Parse(format!("series: {s}"));
        let degree = v.get("degree").and_then(Value::as_u64).ok_or_else(|| bad("missing degree"))? as usize;
        let terms = v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("missing terms"))?;
        let letter = |l: &Value| -> Result<Letter> {
            if let Some(g) = l.as_u64() {
                Ok(Letter::plain(g as u32))
            } else if let Some([g, t]) = l.as_array().map(|a| a.as_slice()) {
                let g = g.as_u64().ok_or_else(|| bad("letter index"))?;
                let t = t.as_u64().ok_or_else(|| bad("letter tag"))?;
                Ok(Letter::tagged(g as u32, t as u8))
            } else {
                Err(bad("letter"))
            }
        };
        let word = |w: Option<&Value>| -> Result<Vec<Letter>> {
            w.and_then(Value::as_array).ok_or_else(|| bad("word"))?.iter().map(letter).collect()
        };
        let mut s = Self::zero(degree);
        for t in terms {
            let m = Monomial { x: word(t.get("x"))?, y: word(t.get("y"))? };
            if !m.is_balanced() {
                return Err(Error::InvalidInput("unbalanced monomial".into()));
            }
            let re = t.get("re").and_then(Value::as_f64).unwrap_or(0.0);
            let im = t.get("im").and_then(Value::as_f64).unwrap_or(0.0);
            s.add_term(m, Complex64::new(re, im));
        }
        Ok(s)
    }
}

/// A truncated series in one set of non-commuting variables, used for the
/// generating series of iterated path integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct WordSeries {
    pub degree: usize,
    pub terms: BTreeMap<Vec<u32>, Complex64>,
}

impl WordSeries {
    pub fn one(degree: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        WordSeries { degree, terms }
    }

    pub fn coeff(&self, w: &[u32]) -> Complex64 {
        self.terms.get(w).copied().unwrap_or_default()
    }

    /// Concatenation product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        let mut by_len: Vec<Vec<(&Vec<u32>, &Complex64)>> = vec![Vec::new(); self.degree + 1];
        for (b, cb) in &other.terms {
            if b.len() <= self.degree {
                by_len[b.len()].push((b, cb));
            }
        }
        let mut terms: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (a, ca) in self.terms.iter().filter(|(a, _)| a.len() <= self.degree) {
            for (b, cb) in by_len[..=self.degree - a.len()].iter().flatten() {
                let mut w = a.clone();
                w.extend_from_slice(b);
                *terms.entry(w).or_default() += ca * *cb;
            }
        }
        Ok(WordSeries { degree: self.degree, terms })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for w in self.terms.keys().chain(other.terms.keys()) {
            d = d.max((self.coeff(w) - other.coeff(w)).norm());
        }
        d
    }
}

/// Word shuffle `u ⧢ v` as a list of words with multiplicity.
pub fn shuffle_words(u: &[u32], v: &[u32]) -> Vec<Vec<u32>> {
    shuffles(u.len(), v.len()).iter().map(|tau| interleave(u, v, tau)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_series(rng: &mut ChaCha8Rng, degree: usize, maxlen: usize, gens: u32) -> NCSeries {
        let mut s = NCSeries::zero(degree);
        s.add_term(Monomial::one(), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        for _ in 0..4 {
            let len = rng.gen_range(1..=maxlen);
            let x: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=gens)).collect();
            let mut y = x.clone();
            // random balanced partner
            for k in (1..y.len()).rev() {
                let j = rng.gen_range(0..=k);
                y.swap(k, j);
            }
            s.add_term(Monomial::plain(&x, &y), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        s
    }

    #[test]
    fn phi_examples() {
        let one = NCSeries::one(3);
        assert_eq!(one.phi(), one);
        let m = Monomial::tagged(&[(1, 1)], &[(1, 2)]);
        let s = NCSeries::monomial(3, m, c(2.5));
        assert_eq!(s.phi().coeff(&Monomial::plain(&[1], &[1])), c(2.5));
        let mut t = NCSeries::zero(3);
        t.add_term(Monomial::tagged(&[(1, 1)], &[(1, 1)]), c(1.0));
        t.add_term(Monomial::tagged(&[(1, 2)], &[(1, 2)]), c(1.0));
        let p = t.phi();
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.coeff(&Monomial::plain(&[1], &[1])), c(2.0));
    }

    #[test]
    fn shuffle_product_examples() {
        let one = NCSeries::one(4);
        assert_eq!(one.shuffle_product(&one).unwrap(), one);
        let a = NCSeries::monomial(4, Monomial::plain(&[1], &[1]), c(2.0));
        let b = NCSeries::monomial(4, Monomial::plain(&[2], &[2]), c(3.0));
        let p = a.shuffle_product(&b).unwrap();
        assert_eq!(p.terms.len(), 4);
        assert!(p.terms.values().all(|v| *v == c(6.0)));
        let a2 = NCSeries::monomial(4, Monomial::plain(&[1, 2], &[2, 1]), c(1.0));
        let b1 = NCSeries::monomial(4, Monomial::plain(&[3], &[3]), c(1.0));
        let terms: usize = shuffle_monomials(&a2.terms.keys().next().unwrap().clone(), &Monomial::plain(&[3], &[3])).len();
        assert_eq!(terms, 9);
        assert_eq!(a2.shuffle_product(&b1).unwrap().terms.len(), 9);
        assert!(matches!(a.shuffle_product(&NCSeries::one(3)), Err(Error::DegreeMismatch(4, 3))));
    }

    #[test]
    fn utilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_series(&mut rng, 3, 3, 2);
        assert_eq!(s.truncate(0).terms.len(), 1);
        assert_eq!(s.truncate(0).constant(), s.constant());
        assert!(s.sub(&s).unwrap().terms.is_empty());
        let t = NCSeries::monomial(3, Monomial::plain(&[1], &[1]), c(1.0)).scale(c(2.0));
        assert_eq!(t.coeff(&Monomial::plain(&[1], &[1])), c(2.0));
    }

    /// phi(A ⧢ B) equals the sum over shuffles computed directly on untagged words.
    #[test]
    fn phi_of_shuffle_matches_untagged_shuffle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_series(&mut rng, 3, 2, 2);
            let b = random_series(&mut rng, 3, 1, 3);
            let lhs = a.shuffle_product(&b).unwrap().phi();
            let mut rhs = NCSeries::zero(3);
            for (ma, ca) in &a.terms {
                for (mb, cb) in &b.terms {
                    if ma.len() + mb.len() > 3 {
                        continue;
                    }
                    let xa: Vec<u32> = ma.x.iter().map(|l| l.gen).collect();
                    let xb: Vec<u32> = mb.x.iter().map(|l| l.gen).collect();
                    let ya: Vec<u32> = ma.y.iter().map(|l| l.gen).collect();
                    let yb: Vec<u32> = mb.y.iter().map(|l| l.gen).collect();
                    for x in shuffle_words(&xa, &xb) {
                        for y in shuffle_words(&ya, &yb) {
                            rhs.add_term(Monomial::plain(&x, &y), ca * cb);
                        }
                    }
                }
            }
            assert!(lhs.max_abs_diff(&rhs.prune()) < 1e-14);
            assert!(a.shuffle_product(&b).unwrap().is_balanced());
        }
    }

    /// On collapsed words the formal shuffle is associative.
    #[test]
    fn shuffle_associative_after_collapse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let a = random_series(&mut rng, 4, 2, 2);
            let b = random_series(&mut rng, 4, 1, 2);
            let cc = random_series(&mut rng, 4, 1, 2);
            let l = a.shuffle_product(&b).unwrap().phi().shuffle_product(&cc).unwrap().phi();
            let r = a.shuffle_product(&b.shuffle_product(&cc).unwrap().phi()).unwrap().phi();
            assert!(l.max_abs_diff(&r) < 1e-12);
        }
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_series(&mut rng, 3, 1, 2);
        let b = random_series(&mut rng, 3, 2, 2);
        let p = a.shuffle_product(&b).unwrap();
        assert_eq!(NCSeries::from_json(&p.to_json()).unwrap(), p);
        assert_eq!(NCSeries::from_json(&a.to_json()).unwrap(), a);
        let bad = json!({"degree": 2, "terms": [{"x": [1], "y": [2], "re": 1.0, "im": 0.0}]});
        assert!(NCSeries::from_json(&bad).is_err());
    }

    #[test]
    fn ring_product_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_series(&mut rng, 4, 2, 2);
        let b = random_series(&mut rng, 4, 2, 2);
        let cc = random_series(&mut rng, 4, 2, 2);
        let l = a.mul(&b).unwrap().mul(&cc).unwrap();
        let r = a.mul(&b.mul(&cc).unwrap()).unwrap();
        assert!(l.max_abs_diff(&r) < 1e-14);
    }

    #[test]
    fn word_shuffle_counts() {
        assert_eq!(shuffle_words(&[1, 2], &[3]).len(), 3);
        assert_eq!(shuffle_words(&[1, 2], &[3]), vec![vec![1, 2, 3], vec![1, 3, 2], vec![3, 1, 2]]);
    }
}
