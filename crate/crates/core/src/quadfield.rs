//! Exact arithmetic in the ring of integers of a real quadratic field
//! `K = Q(sqrt d)`, its two real embeddings, the totally positive unit
//! generator and the positive cones `eps^k C`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest coefficient examined by the unit search.
pub const UNIT_SEARCH_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OmegaKind {
    /// `omega = sqrt d`, used when `d = 2, 3 mod 4`.
    Sqrt,
    /// `omega = (1 + sqrt d) / 2`, used when `d = 1 mod 4`.
    Half,
}

/// The discrete data of a real quadratic field: `d` and the choice of `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadField {
    pub d: i64,
    pub kind: OmegaKind,
}

impl QuadField {
    pub fn new(d: i64) -> Result<Self> {
        if d <= 1 {
            return Err(Error::InvalidField(format!("d = {d} must exceed 1")));
        }
        if !is_squarefree(d as u64) {
            return Err(Error::InvalidField(format!("d = {d} is not squarefree")));
        }
        let kind = if d % 4 == 1 { OmegaKind::Half } else { OmegaKind::Sqrt };
        Ok(QuadField { d, kind })
    }

    /// `(omega_1, omega_2)`.
    pub fn omega_embeddings(&self) -> (f64, f64) {
        let s = (self.d as f64).sqrt();
        match self.kind {
            OmegaKind::Sqrt => (s, -s),
            OmegaKind::Half => ((1.0 + s) / 2.0, (1.0 - s) / 2.0),
        }
    }

    pub fn int(&self, a: i64) -> QuadInt {
        QuadInt::new(*self, a, 0)
    }

    pub fn elem(&self, a: i64, b: i64) -> QuadInt {
        QuadInt::new(*self, a, b)
    }

    pub fn omega(&self) -> QuadInt {
        self.elem(0, 1)
    }

    /// `sqrt d` as an element of the ring of integers.
    pub fn sqrt_d(&self) -> QuadInt {
        match self.kind {
            OmegaKind::Sqrt => self.elem(0, 1),
            OmegaKind::Half => self.elem(-1, 2),
        }
    }
}

fn is_squarefree(n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// `a + b*omega` in the ring of integers.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadInt {
    pub field: QuadField,
    pub a: BigInt,
    pub b: BigInt,
}

impl QuadInt {
    pub fn new(field: QuadField, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        QuadInt { field, a: a.into(), b: b.into() }
    }

    pub fn zero(field: QuadField) -> Self {
        Self::new(field, 0, 0)
    }

    pub fn one(field: QuadField) -> Self {
        Self::new(field, 1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate.
    pub fn conj(&self) -> Self {
        match self.field.kind {
            OmegaKind::Sqrt => Self::new(self.field, self.a.clone(), -&self.b),
            // conj(omega) = 1 - omega
            OmegaKind::Half => Self::new(self.field, &self.a + &self.b, -&self.b),
        }
    }

    pub fn norm(&self) -> BigInt {
        let d = BigInt::from(self.field.d);
        match self.field.kind {
            OmegaKind::Sqrt => &self.a * &self.a - d * &self.b * &self.b,
            OmegaKind::Half => {
                let q = (d - 1) / 4;
                &self.a * &self.a + &self.a * &self.b - q * &self.b * &self.b
            }
        }
    }

    pub fn trace(&self) -> BigInt {
        match self.field.kind {
            OmegaKind::Sqrt => BigInt::from(2) * &self.a,
            OmegaKind::Half => BigInt::from(2) * &self.a + &self.b,
        }
    }

    pub fn embed(&self) -> (f64, f64) {
        let (w1, w2) = self.field.omega_embeddings();
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let (x1, x2) = (a + b * w1, a + b * w2);
        // the smaller embedding suffers cancellation; recover it from the exact norm
        let n = self.norm().to_f64().unwrap_or(f64::NAN);
        if x1.abs() >= x2.abs() && x1 != 0.0 {
            (x1, n / x1)
        } else if x2 != 0.0 {
            (n / x2, x2)
        } else {
            (x1, x2)
        }
    }

    pub fn is_totally_positive(&self) -> bool {
        // sign of x_1 and x_2 decided exactly: x_1 x_2 = N(x) and x_1 + x_2 = Tr(x)
        let n = self.norm();
        n.is_positive() && self.trace().is_positive()
    }

    /// Sign pattern of the two embeddings, decided exactly. `None` for zero.
    pub fn embedding_signs(&self) -> Option<(bool, bool)> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        let t = self.trace();
        if n.is_positive() {
            let pos = t.is_positive();
            Some((pos, pos))
        } else {
            // mixed signs; the larger embedding (w.r.t. omega_1 > omega_2) decides
            let first_pos = match self.b.sign() {
                num_bigint::Sign::Plus => true,
                num_bigint::Sign::Minus => false,
                num_bigint::Sign::NoSign => unreachable!("rational nonzero has positive norm"),
            };
            Some((first_pos, !first_pos))
        }
    }

    pub fn is_unit(&self) -> bool {
        let n = self.norm();
        n.is_one() || n == BigInt::from(-1)
    }

    /// Exact inverse when `self` is a unit.
    pub fn unit_inverse(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_one() {
            Some(self.conj())
        } else if n == BigInt::from(-1) {
            Some(-self.conj())
        } else {
            None
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.field);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Exact division, when the quotient lies in the ring of integers.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        let n = other.norm();
        let num = self * &other.conj();
        if (&num.a % &n).is_zero() && (&num.b % &n).is_zero() {
            Some(Self::new(self.field, &num.a / &n, &num.b / &n))
        } else {
            None
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.field, &self.a * k, &self.b * k)
    }
}

impl fmt::Debug for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = match self.field.kind {
            OmegaKind::Sqrt => format!("√{}", self.field.d),
            OmegaKind::Half => "ω".to_string(),
        };
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let coef = if self.b.is_one() {
            String::new()
        } else if self.b == BigInt::from(-1) {
            "-".to_string()
        } else {
            self.b.to_string()
        };
        if self.a.is_zero() {
            write!(f, "{coef}{w}")
        } else if self.b.is_negative() {
            let coef = if self.b == BigInt::from(-1) { String::new() } else { (-&self.b).to_string() };
            write!(f, "{}-{coef}{w}", self.a)
        } else {
            write!(f, "{}+{coef}{w}", self.a)
        }
    }
}

impl<'a> Add<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn add(self, rhs: &QuadInt) -> QuadInt {
        debug_assert_eq!(self.field, rhs.field);
        QuadInt::new(self.field, &self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn sub(self, rhs: &QuadInt) -> QuadInt {
        debug_assert_eq!(self.field, rhs.field);
        QuadInt::new(self.field, &self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a QuadInt> for &'a QuadInt {
    type Output = QuadInt;
    fn mul(self, rhs: &QuadInt) -> QuadInt {
        debug_assert_eq!(self.field, rhs.field);
        let ac = &self.a * &rhs.a;
        let cross = &self.a * &rhs.b + &self.b * &rhs.a;
        let bb = &self.b * &rhs.b;
        let d = BigInt::from(self.field.d);
        match self.field.kind {
            // omega^2 = d
            OmegaKind::Sqrt => QuadInt::new(self.field, ac + d * bb, cross),
            // omega^2 = omega + (d - 1)/4
            OmegaKind::Half => {
                let q = (d - 1) / 4;
                QuadInt::new(self.field, ac + &bb * q, cross + bb)
            }
        }
    }
}

impl Add for QuadInt {
    type Output = QuadInt;
    fn add(self, rhs: QuadInt) -> QuadInt {
        &self + &rhs
    }
}

impl Sub for QuadInt {
    type Output = QuadInt;
    fn sub(self, rhs: QuadInt) -> QuadInt {
        &self - &rhs
    }
}

impl Mul for QuadInt {
    type Output = QuadInt;
    fn mul(self, rhs: QuadInt) -> QuadInt {
        &self * &rhs
    }
}

impl Neg for QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt::new(self.field, -self.a, -self.b)
    }
}

impl Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt::new(self.field, -&self.a, -&self.b)
    }
}

/// A real quadratic field together with its units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldContext {
    pub field: QuadField,
    pub omega_embeddings: (f64, f64),
    /// Smallest unit greater than one in the first embedding.
    pub fundamental_unit: QuadInt,
    /// Generator of the totally positive units, normalized so that `eps_1 > 1 > eps_2 > 0`.
    pub eps: QuadInt,
}

impl FieldContext {
    pub fn d(&self) -> i64 {
        self.field.d
    }

    pub fn eps_embeddings(&self) -> (f64, f64) {
        let (e1, _) = self.eps.embed();
        // the second embedding is recovered from the norm to keep full precision
        (e1, 1.0 / e1)
    }

    pub fn eps_inverse(&self) -> QuadInt {
        self.eps.conj()
    }

    /// `eps^k` for any integer `k`.
    pub fn eps_pow(&self, k: i32) -> QuadInt {
        if k >= 0 {
            self.eps.pow(k as u32)
        } else {
            self.eps.conj().pow((-k) as u32)
        }
    }

    pub fn elem(&self, a: i64, b: i64) -> QuadInt {
        self.field.elem(a, b)
    }

    /// Writes `x` in the basis `(1, eps)` when its coordinates are integers.
    pub fn eps_coordinates(&self, x: &QuadInt) -> Option<(BigInt, BigInt)> {
        // eps = e0 + e1*omega, x = p + q*omega => b = q / e1, a = p - b*e0
        let e0 = &self.eps.a;
        let e1 = &self.eps.b;
        if (&x.b % e1).is_zero() {
            let b = &x.b / e1;
            let a = &x.a - &b * e0;
            Some((a, b))
        } else {
            None
        }
    }
}

/// Builds the field context for `Q(sqrt d)`, locating the fundamental unit by
/// a bounded search over the coefficient of `omega`.
pub fn make_field(d: i64) -> Result<FieldContext> {
    let field = QuadField::new(d)?;
    let fundamental_unit = fundamental_unit(field, UNIT_SEARCH_LIMIT)?;
    let eps = if fundamental_unit.norm().is_one() {
        fundamental_unit.clone()
    } else {
        &fundamental_unit * &fundamental_unit
    };
    Ok(FieldContext { field, omega_embeddings: field.omega_embeddings(), fundamental_unit, eps })
}

fn fundamental_unit(field: QuadField, limit: u64) -> Result<QuadInt> {
    let d = field.d as u128;
    for b in 1..=limit as u128 {
        match field.kind {
            OmegaKind::Sqrt => {
                // a^2 = d b^2 -+ 1
                let db2 = d * b * b;
                for t in [db2 - 1, db2 + 1] {
                    let a = t.sqrt();
                    if a * a == t && a > 0 {
                        return Ok(QuadInt::new(field, a as i64, b as i64));
                    }
                }
            }
            OmegaKind::Half => {
                // x = a + b omega with 2a + b = s and s^2 = d b^2 -+ 4
                let db2 = d * b * b;
                let mut best: Option<u128> = None;
                for t in [db2 - 4, db2 + 4] {
                    let s = t.sqrt();
                    if s * s == t && s >= b && (s - b) % 2 == 0 {
                        let a = (s - b) / 2;
                        best = Some(best.map_or(a, |x: u128| x.min(a)));
                    }
                }
                if let Some(a) = best {
                    return Ok(QuadInt::new(field, a as i64, b as i64));
                }
            }
        }
    }
    Err(Error::UnitSearchExhausted(limit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum ConeVariant {
    /// `{n : n >= 1} ∪ {a + b eps : a, b >= 1}`.
    #[default]
    Strict,
    /// Also includes the boundary ray `{b eps : b >= 1}`.
    Inclusive,
}

/// A base cone element `a + b eps` together with its embeddings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub a: i64,
    pub b: i64,
    pub e1: f64,
    pub e2: f64,
}

impl ConePoint {
    pub fn norm(&self) -> f64 {
        self.e1 * self.e2
    }

    pub fn height(&self) -> f64 {
        self.e1.max(self.e2)
    }
}

/// The cone `eps^k C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub field: FieldContext,
    pub unit_power: i32,
    #[serde(default)]
    pub variant: ConeVariant,
}

impl Cone {
    pub fn new(field: &FieldContext, unit_power: i32) -> Self {
        Cone { field: field.clone(), unit_power, variant: ConeVariant::Strict }
    }

    pub fn with_variant(mut self, variant: ConeVariant) -> Self {
        self.variant = variant;
        self
    }

    /// Base cone points `a + b eps` (before scaling by `eps^k`) whose larger
    /// embedding is at most `bound`, in deterministic order.
    pub fn base_points(&self, bound: f64) -> Vec<ConePoint> {
        base_points(&self.field, self.variant, bound)
    }

    /// Elements `eps^k (a + b eps)` whose larger embedding is at most `bound`,
    /// ordered by larger embedding, ties broken by the rational coordinate.
    pub fn elements(&self, height_bound: f64) -> Vec<QuadInt> {
        if !(height_bound > 0.0) {
            return Vec::new();
        }
        let (e1, e2) = self.field.eps_embeddings();
        let k = self.unit_power;
        let s1 = e1.powi(k);
        let s2 = e2.powi(k);
        // max(s1 x1, s2 x2) >= sqrt(N) and the base search is bounded through N
        let nbound = height_bound * height_bound;
        let scale = s1.min(s2);
        let base_bound = height_bound / scale;
        let mut found: Vec<(f64, QuadInt)> = Vec::new();
        let epk = self.field.eps_pow(k);
        for p in base_points_by_norm(&self.field, self.variant, nbound, base_bound) {
            let h = (s1 * p.e1).max(s2 * p.e2);
            if h <= height_bound {
                let base = &self.field.field.int(p.a) + &self.field.eps.scale(&BigInt::from(p.b));
                found.push((h, &epk * &base));
            }
        }
        found.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal).then_with(|| x.1.a.cmp(&y.1.a)));
        found.into_iter().map(|(_, x)| x).collect()
    }
}

/// Base cone points with larger embedding at most `bound`.
pub fn base_points(field: &FieldContext, variant: ConeVariant, bound: f64) -> Vec<ConePoint> {
    if !(bound > 0.0) {
        return Vec::new();
    }
    let mut pts: Vec<ConePoint> = base_points_by_norm(field, variant, bound * bound, bound)
        .into_iter()
        .filter(|p| p.height() <= bound)
        .collect();
    pts.sort_by(|x, y| {
        x.height().partial_cmp(&y.height()).unwrap_or(Ordering::Equal).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b))
    });
    pts
}

/// All base points whose norm is at most `nbound` and whose coordinates make
/// the height at most `hbound` possible.
fn base_points_by_norm(field: &FieldContext, variant: ConeVariant, nbound: f64, hbound: f64) -> Vec<ConePoint> {
    let (e1, e2) = field.eps_embeddings();
    let t = e1 + e2;
    let mut out = Vec::new();
    // rational points n, N = n^2
    let nmax = nbound.sqrt().min(hbound).floor() as i64;
    for n in 1..=nmax {
        out.push(ConePoint { a: n, b: 0, e1: n as f64, e2: n as f64 });
    }
    // a + b eps, N >= (T + 2) a b when a >= 1; N = b^2 on the boundary ray
    if variant == ConeVariant::Inclusive {
        let bmax = (nbound.sqrt().min(hbound / e2.max(1e-300))).floor() as i64;
        for b in 1..=bmax {
            let (x1, x2) = (b as f64 * e1, b as f64 * e2);
            if x1 * x2 <= nbound {
                out.push(ConePoint { a: 0, b, e1: x1, e2: x2 });
            }
        }
    }
    let amax = (nbound / (t + 2.0)).floor() as i64;
    for a in 1..=amax {
        let bmax = (nbound / ((t + 2.0) * a as f64)).floor() as i64;
        for b in 1..=bmax {
            let x1 = a as f64 + b as f64 * e1;
            let x2 = a as f64 + b as f64 * e2;
            if x1 * x2 <= nbound * (1.0 + 1e-12) {
                out.push(ConePoint { a, b, e1: x1, e2: x2 });
            }
        }
    }
    out
}

/// Result of comparing the cone `C` against a fundamental domain for the
/// totally positive integers modulo totally positive units.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FundamentalDomainCensus {
    /// Unit classes of totally positive integers with norm at most the bound.
    pub classes: usize,
    /// Classes represented by at least one element of the cone.
    pub covered: usize,
    /// Classes represented more than once by the cone.
    pub overlapping: usize,
}

/// Empirically checks how well the cone tiles the totally positive integers
/// modulo units, over all classes of norm at most `norm_bound`.
pub fn fundamental_domain_census(field: &FieldContext, variant: ConeVariant, norm_bound: i64) -> FundamentalDomainCensus {
    use std::collections::BTreeMap;
    let (e1, _) = field.eps_embeddings();
    let f = field.field;
    let (w1, w2) = f.omega_embeddings();
    // reduced representatives: x1/x2 in [1, eps1^2)
    let reduce = |x: &QuadInt| -> QuadInt {
        let mut y = x.clone();
        loop {
            let (y1, y2) = y.embed();
            let r = y1 / y2;
            if r < 1.0 - 1e-12 {
                y = &y * &field.eps;
            } else if r >= e1 * e1 * (1.0 - 1e-12) {
                y = &y * &field.eps.conj();
            } else {
                return y;
            }
        }
    };
    let mut classes: BTreeMap<(BigInt, BigInt), usize> = BTreeMap::new();
    // enumerate reduced totally positive x with N(x) <= bound: x2 >= x1 / eps1^2, so x1 <= eps1 sqrt(N)
    let xmax = e1 * (norm_bound as f64).sqrt() + 1.0;
    let span = (w1 - w2).abs();
    let bmax = (2.0 * xmax / span).ceil() as i64 + 1;
    for b in -bmax..=bmax {
        let amin = (-(b as f64) * w1.max(w2) - 1.0).floor() as i64 - 1;
        let amax = (xmax - b as f64 * w1.min(w2)).ceil() as i64 + 1;
        for a in amin..=amax {
            let x = f.elem(a, b);
            if !x.is_totally_positive() {
                continue;
            }
            let n = x.norm();
            if n > BigInt::from(norm_bound) {
                continue;
            }
            let r = reduce(&x);
            classes.entry((r.a.clone(), r.b.clone())).or_insert(0);
        }
    }
    // count cone hits per class: a class is hit once per eps^j multiple lying in C
    let mut covered = 0;
    let mut overlapping = 0;
    for (a, b) in classes.keys() {
        let x = QuadInt::new(f, a.clone(), b.clone());
        let mut hits = 0;
        for j in -2..=2 {
            let y = &x * &field.eps_pow(j);
            if let Some((p, q)) = field.eps_coordinates(&y) {
                let in_cone = match variant {
                    ConeVariant::Strict => (p.is_positive() && q.is_positive()) || (p.is_positive() && q.is_zero()),
                    ConeVariant::Inclusive => !p.is_negative() && !q.is_negative() && !(p.is_zero() && q.is_zero()),
                };
                if in_cone {
                    hits += 1;
                }
            }
        }
        if hits >= 1 {
            covered += 1;
        }
        if hits >= 2 {
            overlapping += 1;
        }
    }
    FundamentalDomainCensus { classes: classes.len(), covered, overlapping }
}

/// Parses `"(a,b)"` or `"a"` into an element of the field.
pub fn parse_quadint(field: QuadField, s: &str) -> Result<QuadInt> {
    let t = s.trim();
    let inner = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(t);
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    let parse = |x: &str| x.parse::<BigInt>().map_err(|e| Error::Parse(format!("{x}: {e}")));
    match parts.as_slice() {
        [a] => Ok(QuadInt::new(field, parse(a)?, 0)),
        [a, b] => Ok(QuadInt::new(field, parse(a)?, parse(b)?)),
        _ => Err(Error::Parse(format!("expected (a,b), got {s}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_choice_follows_d_mod_4() {
        assert_eq!(QuadField::new(5).unwrap().kind, OmegaKind::Half);
        assert_eq!(QuadField::new(2).unwrap().kind, OmegaKind::Sqrt);
        assert_eq!(QuadField::new(3).unwrap().kind, OmegaKind::Sqrt);
        assert_eq!(QuadField::new(13).unwrap().kind, OmegaKind::Half);
    }

    #[test]
    fn rejects_bad_d() {
        assert!(matches!(make_field(4), Err(Error::InvalidField(_))));
        assert!(matches!(make_field(1), Err(Error::InvalidField(_))));
        assert!(matches!(make_field(-3), Err(Error::InvalidField(_))));
        assert!(matches!(make_field(12), Err(Error::InvalidField(_))));
    }

    /// Independent brute force over a + b sqrt 2 with |a|, b <= 1000.
    #[test]
    fn eps_for_d2_matches_brute_force() {
        let mut best: Option<(i64, i64, f64)> = None;
        for b in 1..=1000i64 {
            for a in 1..=1000i64 {
                let n = a * a - 2 * b * b;
                let v = a as f64 + b as f64 * 2f64.sqrt();
                if n == 1 && best.map_or(true, |x| v < x.2) {
                    best = Some((a, b, v));
                }
            }
        }
        let (a, b, _) = best.unwrap();
        assert_eq!((a, b), (3, 2));
        let k = make_field(2).unwrap();
        assert_eq!(k.eps, k.elem(3, 2));
        assert_eq!(k.fundamental_unit, k.elem(1, 1));
        assert_eq!(k.fundamental_unit.norm(), BigInt::from(-1));
    }

    #[test]
    fn golden_ratio_field() {
        let k = make_field(5).unwrap();
        assert_eq!(k.fundamental_unit, k.elem(0, 1));
        // eps = omega^2 = omega + 1
        assert_eq!(k.eps, k.elem(1, 1));
        let (w1, w2) = k.omega_embeddings;
        assert!((w1 - 1.618033988749895).abs() < 1e-12);
        assert!((w2 + 0.6180339887498949).abs() < 1e-12);
    }

    #[test]
    fn unit_invariants_over_many_fields() {
        for d in [2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19, 21, 22, 23, 29, 31, 41, 46, 61, 94] {
            let k = make_field(d).unwrap();
            assert!(k.eps.norm().is_one(), "d={d}");
            let (e1, e2) = k.eps.embed();
            assert!(e1 > 1.0 && e2 > 0.0 && e2 < 1.0, "d={d}");
            assert!(k.eps.is_totally_positive());
            assert_eq!(&k.eps * &k.eps.conj(), k.field.int(1));
            let (r1, r2) = k.eps_embeddings();
            assert!((r2 - e2).abs() <= 1e-12 * e2, "d={d}");
            assert!((r1 * r2 - 1.0).abs() < 1e-12);
        }
    }

    /// eps is the smallest totally positive unit above one, checked by search.
    #[test]
    fn eps_is_minimal_for_small_fields() {
        for d in [2i64, 3, 5, 6, 7, 13] {
            let k = make_field(d).unwrap();
            let (e1, _) = k.eps.embed();
            for b in -60..=60i64 {
                for a in -200..=200i64 {
                    let x = k.elem(a, b);
                    if x.norm().is_one() && x.is_totally_positive() {
                        let (x1, _) = x.embed();
                        assert!(!(x1 > 1.0 + 1e-9 && x1 < e1 - 1e-9), "d={d} found {x}");
                    }
                }
            }
        }
    }

    #[test]
    fn norm_examples() {
        let f = QuadField::new(2).unwrap();
        assert_eq!(f.int(1).norm(), BigInt::from(1));
        assert_eq!(f.elem(3, 2).norm(), BigInt::from(1));
        assert_eq!(f.elem(0, 1).norm(), BigInt::from(-2));
    }

    #[test]
    fn embed_examples() {
        let f = QuadField::new(2).unwrap();
        assert_eq!(f.int(1).embed(), (1.0, 1.0));
        let (x1, x2) = f.elem(1, 1).embed();
        assert!((x1 - 2.41421356).abs() < 1e-8);
        assert!((x2 + 0.41421356).abs() < 1e-8);
        assert!(!f.elem(1, 1).is_totally_positive());
        assert_eq!(f.elem(1, 1).embedding_signs(), Some((true, false)));
        assert_eq!(f.elem(-1, 1).embedding_signs(), Some((true, false)));
        assert_eq!(f.elem(1, -1).embedding_signs(), Some((false, true)));
        assert_eq!(f.elem(-3, 0).embedding_signs(), Some((false, false)));
    }

    #[test]
    fn cone_examples() {
        let k = make_field(2).unwrap();
        let c = Cone::new(&k, 0);
        assert_eq!(c.elements(1.5), vec![k.field.int(1)]);
        assert!(c.elements(0.0).is_empty());
        for x in c.elements(40.0) {
            assert!(x.is_totally_positive());
        }
    }

    /// Counts by a trace-ordered double loop agree with the embedding-ordered enumeration.
    #[test]
    fn cone_counts_agree_between_enumerations() {
        let k = make_field(2).unwrap();
        let (e1, e2) = k.eps_embeddings();
        let bound = 60.0;
        let mut brute = 0;
        for a in 0..=200i64 {
            for b in 0..=200i64 {
                let in_cone = (a >= 1 && b >= 1) || (a >= 1 && b == 0);
                if !in_cone {
                    continue;
                }
                let tr = 2 * a + b * 6;
                if tr as f64 > 2.0 * bound + 1.0 {
                    continue;
                }
                let x1 = a as f64 + b as f64 * e1;
                let x2 = a as f64 + b as f64 * e2;
                if x1.max(x2) <= bound {
                    brute += 1;
                }
            }
        }
        assert_eq!(Cone::new(&k, 0).elements(bound).len(), brute);
    }

    #[test]
    fn scaled_cones_are_unit_multiples() {
        let k = make_field(2).unwrap();
        let (e1, _) = k.eps_embeddings();
        for kk in [-2, -1, 1, 2] {
            let c = Cone::new(&k, kk);
            let bound = 200.0;
            let scaled = c.elements(bound);
            let inv = k.eps_pow(-kk);
            for x in &scaled {
                let base = &inv * x;
                let (p, q) = k.eps_coordinates(&base).unwrap();
                assert!(p.is_positive() && !q.is_negative());
            }
            // every base element small enough lands inside
            let s = e1.powi(kk.abs());
            let epk = k.eps_pow(kk);
            for g in Cone::new(&k, 0).elements(bound / s) {
                assert!(scaled.contains(&(&epk * &g)));
            }
        }
    }

    #[test]
    fn census_reports_coverage() {
        let k = make_field(2).unwrap();
        let c = fundamental_domain_census(&k, ConeVariant::Strict, 60);
        assert!(c.classes > 0);
        assert!(c.covered <= c.classes);
        assert_eq!(c.overlapping, 0);
        let inc = fundamental_domain_census(&k, ConeVariant::Inclusive, 60);
        assert!(inc.overlapping > 0);
        assert_eq!(inc.covered, c.covered);
    }

    #[test]
    fn parse_roundtrip() {
        let f = QuadField::new(2).unwrap();
        assert_eq!(parse_quadint(f, "(3,2)").unwrap(), f.elem(3, 2));
        assert_eq!(parse_quadint(f, "-7").unwrap(), f.int(-7));
        assert!(parse_quadint(f, "(1,2,3)").is_err());
    }

    #[test]
    fn div_exact_and_units() {
        let f = QuadField::new(5).unwrap();
        let x = f.elem(3, 4);
        let y = f.elem(2, -1);
        let p = &x * &y;
        assert_eq!(p.div_exact(&y).unwrap(), x);
        let w = f.omega();
        assert_eq!(&w * &w.unit_inverse().unwrap(), f.int(1));
    }

    proptest::proptest! {
        #[test]
        fn norm_is_multiplicative(d in proptest::sample::select(vec![2i64, 3, 5, 6, 13, 21]),
                                  a in -100i64..=100, b in -100i64..=100, c in -100i64..=100, e in -100i64..=100) {
            let f = QuadField::new(d).unwrap();
            let x = f.elem(a, b);
            let y = f.elem(c, e);
            proptest::prop_assert_eq!((&x * &y).norm(), x.norm() * y.norm());
            proptest::prop_assert_eq!(x.conj().conj(), x.clone());
            if !x.is_zero() {
                let (x1, x2) = x.embed();
                let n = x.norm().to_f64().unwrap();
                proptest::prop_assert!((x1 * x2 - n).abs() <= 1e-10 * n.abs());
            }
        }
    }
}
