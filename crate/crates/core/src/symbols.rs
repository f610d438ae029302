//! Cusps, the action of `GL₂(K)` on `H²`, geodesic diangles and triangles, and the
//! commutative and non-commutative Hilbert modular symbols built from them.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::ExpForm2;
use crate::membrane::{
    generating_series_jb, generating_series_jb_restricted, membrane_integral_type_a, verify_series_shuffle, Membrane, Mobius, Region,
};
use crate::ncring::NCSeries;
use crate::quadfield::{parse_quadint, QuadField, QuadInt};
use crate::quadrature::{Estimate, QuadratureConfig};
use crate::report::{rel_diff, Report};

type C = Complex64;

/// Diangles with `|ln(ratio)|` below this are degenerate.
pub const DEGENERATE_LOG_RATIO: f64 = 1e-12;

/// A point `[p : q]` of `P¹(K)`.
#[derive(Clone, Serialize, Deserialize)]
pub struct Cusp {
    pub p: QuadInt,
    pub q: QuadInt,
}

impl PartialEq for Cusp {
    fn eq(&self, o: &Self) -> bool {
        &self.p * &o.q == &o.p * &self.q
    }
}

impl Eq for Cusp {}

impl Cusp {
    pub fn new(p: QuadInt, q: QuadInt) -> Result<Self> {
        if p.is_zero() && q.is_zero() {
            return Err(Error::InvalidInput("[0 : 0] is not a cusp".into()));
        }
        Ok(Cusp { p, q })
    }

    pub fn infinity(field: QuadField) -> Self {
        Cusp { p: QuadInt::one(field), q: QuadInt::zero(field) }
    }

    pub fn zero(field: QuadField) -> Self {
        Cusp { p: QuadInt::zero(field), q: QuadInt::one(field) }
    }

    pub fn point(x: QuadInt) -> Self {
        let one = QuadInt::one(x.field);
        Cusp { p: x, q: one }
    }

    pub fn field(&self) -> QuadField {
        self.p.field
    }

    pub fn is_infinity(&self) -> bool {
        self.q.is_zero()
    }

    /// The two real embeddings; `None` is `∞`.
    pub fn embed(&self) -> [Option<f64>; 2] {
        if self.q.is_zero() {
            return [None, None];
        }
        let (p1, p2) = self.p.embed();
        let (q1, q2) = self.q.embed();
        [Some(p1 / q1), Some(p2 / q2)]
    }

    /// Parses `"p/q"`, `"p"` or `"inf"`, with `p`, `q` written as `a` or `(a,b)`.
    pub fn parse(field: QuadField, s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "inf" || t == "∞" {
            return Ok(Self::infinity(field));
        }
        match t.split_once('/') {
            Some((p, q)) => Self::new(parse_quadint(field, p)?, parse_quadint(field, q)?),
            None => Ok(Self::point(parse_quadint(field, t)?)),
        }
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            write!(f, "∞")
        } else if self.q == QuadInt::one(self.q.field) {
            write!(f, "({})", self.p)
        } else {
            write!(f, "({})/({})", self.p, self.q)
        }
    }
}

impl fmt::Debug for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetClass {
    TotallyPositive,
    TotallyNegative,
    Mixed,
}

/// Which kind of curve `γ*Δ` carries a geodesic triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Holomorphic,
    AntiHolomorphic,
}

/// A matrix over `K`: integral entries divided by a common denominator. It acts
/// through `PGL₂(K)`, where the denominator is immaterial: rescaling by `λ` multiplies
/// the determinant by the totally positive `λ²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixK {
    pub a: QuadInt,
    pub b: QuadInt,
    pub c: QuadInt,
    pub d: QuadInt,
    pub den: QuadInt,
}

impl MatrixK {
    pub fn new(a: QuadInt, b: QuadInt, c: QuadInt, d: QuadInt) -> Result<Self> {
        let den = QuadInt::one(a.field);
        Self::with_den(a, b, c, d, den)
    }

    pub fn with_den(a: QuadInt, b: QuadInt, c: QuadInt, d: QuadInt, den: QuadInt) -> Result<Self> {
        let m = MatrixK { a, b, c, d, den };
        if m.den.is_zero() || m.det_numerator().is_zero() {
            return Err(Error::InvalidInput("singular matrix".into()));
        }
        Ok(m)
    }

    pub fn identity(field: QuadField) -> Self {
        let (o, z) = (QuadInt::one(field), QuadInt::zero(field));
        MatrixK { a: o.clone(), b: z.clone(), c: z, d: o.clone(), den: o }
    }

    pub fn diag(x: QuadInt, y: QuadInt) -> Result<Self> {
        let z = QuadInt::zero(x.field);
        Self::new(x, z.clone(), z, y)
    }

    /// `ad − bc` of the integral entries; the determinant is this over `den²`.
    pub fn det_numerator(&self) -> QuadInt {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn det_class(&self) -> DetClass {
        match self.det_numerator().embedding_signs() {
            Some((true, true)) => DetClass::TotallyPositive,
            Some((false, false)) => DetClass::TotallyNegative,
            _ => DetClass::Mixed,
        }
    }

    pub fn curve_kind(&self) -> CurveKind {
        match self.det_class() {
            DetClass::Mixed => CurveKind::AntiHolomorphic,
            _ => CurveKind::Holomorphic,
        }
    }

    pub fn mul(&self, o: &MatrixK) -> MatrixK {
        let m = |x: &QuadInt, y: &QuadInt, z: &QuadInt, w: &QuadInt| &(x * y) + &(z * w);
        MatrixK {
            a: m(&self.a, &o.a, &self.b, &o.c),
            b: m(&self.a, &o.b, &self.b, &o.d),
            c: m(&self.c, &o.a, &self.d, &o.c),
            d: m(&self.c, &o.b, &self.d, &o.d),
            den: &self.den * &o.den,
        }
    }

    /// The adjugate, which acts as the inverse.
    pub fn projective_inverse(&self) -> MatrixK {
        MatrixK { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone(), den: self.den.clone() }
    }

    pub fn act_cusp(&self, x: &Cusp) -> Cusp {
        Cusp { p: &(&self.a * &x.p) + &(&self.b * &x.q), q: &(&self.c * &x.p) + &(&self.d * &x.q) }
    }

    /// The two embedded real matrices, each rescaled to unit max-norm.
    pub fn mobius(&self) -> [Mobius; 2] {
        let e = [self.a.embed(), self.b.embed(), self.c.embed(), self.d.embed()];
        let make = |k: usize| {
            let v: Vec<f64> = e.iter().map(|p| if k == 0 { p.0 } else { p.1 }).collect();
            let s = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            Mobius { a: v[0] / s, b: v[1] / s, c: v[2] / s, d: v[3] / s }
        };
        [make(0), make(1)]
    }

    pub fn is_identity(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }
}

/// The action on `H²`: `z_k ↦ M_k(z_k)` when the `k`-th embedding of the determinant is
/// positive and `z_k ↦ M_k(z̄_k)` when it is negative.
pub fn act(gamma: &MatrixK, z: [C; 2]) -> Result<[C; 2]> {
    if z.iter().any(|w| !(w.im > 0.0)) {
        return Err(Error::InvalidInput("point not in H²".into()));
    }
    let m = gamma.mobius();
    let out = [m[0].apply(z[0]), m[1].apply(z[1])];
    if out.iter().any(|w| !w.re.is_finite() || !(w.im > 0.0)) {
        return Err(Error::Boundary);
    }
    Ok(out)
}

/// The element of `PGL₂(K)` sending `p1 ↦ 0`, `p2 ↦ ∞`, `p3 ↦ 1`.
pub fn mobius_to_standard(p1: &Cusp, p2: &Cusp, p3: &Cusp) -> Result<MatrixK> {
    if p1 == p2 || p1 == p3 || p2 == p3 {
        return Err(Error::RepeatedCusps);
    }
    // L_i(x, y) = q_i x − p_i y vanishes at p_i
    let l = |pi: &Cusp, x: &Cusp| &(&pi.q * &x.p) - &(&pi.p * &x.q);
    let l2p3 = l(p2, p3);
    let l1p3 = l(p1, p3);
    MatrixK::new(&l2p3 * &p1.q, -&(&l2p3 * &p1.p), &l1p3 * &p2.q, -&(&l1p3 * &p2.p))
}

/// Ratio `|α_1/α_2|` of a finite nonzero cusp `α`.
fn abs_ratio(x: &Cusp) -> Result<f64> {
    if x.p.is_zero() || x.q.is_zero() {
        return Err(Error::RepeatedCusps);
    }
    let (p1, p2) = x.p.embed();
    let (q1, q2) = x.q.embed();
    Ok(((p1 / p2) * (q2 / q1)).abs())
}

/// The diangle `{p1, p2; p3, p4}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiangleSymbol {
    pub points: [Cusp; 4],
    /// Sends `p1, p2, p3` to `0, ∞, 1`.
    pub normalizer: MatrixK,
    /// `|α_1/α_2|` for `α` the image of `p4`.
    pub ratio: f64,
    /// `+1` when `|α_1| > |α_2|`, `−1` when smaller, `0` when degenerate.
    pub orientation: i8,
    /// Curves of the triangles `{p1, p2, p3}` and `{p1, p2, p4}`.
    pub curves: [CurveKind; 2],
}

impl DiangleSymbol {
    pub fn is_degenerate(&self) -> bool {
        self.orientation == 0
    }
}

/// The diangle between the geodesics from `p1` to `p2` on the triangles `{p1, p2, p3}` and
/// `{p1, p2, p4}`. In the normalized picture it is `(i r y, i y)`, `y ∈ (0, ∞)`, with `r`
/// running from `1` to `|α_1/α_2|`; the membrane is its image under the inverse normalizer.
pub fn build_diangle(p1: &Cusp, p2: &Cusp, p3: &Cusp, p4: &Cusp) -> Result<(Membrane, DiangleSymbol)> {
    let gamma = mobius_to_standard(p1, p2, p3)?;
    if p4 == p1 || p4 == p2 {
        return Err(Error::RepeatedCusps);
    }
    let alpha = gamma.act_cusp(p4);
    let ratio = abs_ratio(&alpha)?;
    let degenerate = ratio.ln().abs() < DEGENERATE_LOG_RATIO;
    let orientation = if degenerate { 0 } else if ratio > 1.0 { 1 } else { -1 };
    let kind4 = mobius_to_standard(p1, p2, p4)?.curve_kind();
    let inv = gamma.projective_inverse();
    let g = if inv.b.is_zero() && inv.c.is_zero() {
        // p1 = 0 and p2 = ∞: the inverse normalizer only rescales the imaginary axes
        let l = |x: &QuadInt, y: &QuadInt| {
            let (x1, x2) = x.embed();
            let (y1, y2) = y.embed();
            ((x1 / y1).abs(), (x2 / y2).abs())
        };
        let (l1, l2) = l(&inv.a, &inv.d);
        let s = l1 / l2;
        Membrane::diangle(s, ratio * s)?
    } else {
        Membrane::diangle(1.0, ratio)?.translated(inv.mobius())
    };
    let symbol = DiangleSymbol {
        points: [p1.clone(), p2.clone(), p3.clone(), p4.clone()],
        curves: [gamma.curve_kind(), kind4],
        normalizer: gamma,
        ratio,
        orientation,
    };
    Ok((g, symbol))
}

/// The geodesic triangle `{p1, p2, p3}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleSymbol {
    pub points: [Cusp; 3],
    /// Sends the (cyclically rotated) vertices to `0, 1, ∞`.
    pub normalizer: MatrixK,
    /// Cyclic shift applied so that a vertex at `∞` is sent to `∞`.
    pub rotation: usize,
    pub curve: CurveKind,
}

/// The image of the ideal triangle `T(0, 1, ∞)` on the diagonal under the inverse
/// normalizer; vertex order `p1, p2, p3` corresponds to `0, 1, ∞`.
pub fn build_triangle(p1: &Cusp, p2: &Cusp, p3: &Cusp) -> Result<(Membrane, TriangleSymbol)> {
    let pts = [p1.clone(), p2.clone(), p3.clone()];
    let rotation = pts.iter().position(Cusp::is_infinity).map_or(0, |k| (k + 1) % 3);
    let r = |k: usize| &pts[(k + rotation) % 3];
    let gamma = mobius_to_standard(r(0), r(2), r(1))?;
    let g = Membrane::triangle().translated(gamma.projective_inverse().mobius());
    let curve = gamma.curve_kind();
    Ok((g, TriangleSymbol { points: pts, normalizer: gamma, rotation, curve }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    Triangle([Cusp; 3]),
    Diangle([Cusp; 4]),
}

impl Symbol {
    pub fn membrane(&self) -> Result<Membrane> {
        match self {
            Symbol::Triangle([a, b, c]) => Ok(build_triangle(a, b, c)?.0),
            Symbol::Diangle([a, b, c, d]) => Ok(build_diangle(a, b, c, d)?.0),
        }
    }
}

/// `∫ f dz₁∧dz₂` over the symbol's region.
///
/// Pairings are often far below 1 in size, so the node count is raised (up to
/// [`MAX_PAIRING_NODES`]) until the error estimate is also below `tolerance·|value|`.
pub fn pair_commutative(symbol: &Symbol, f: &ExpForm2, quad: &QuadratureConfig) -> Result<Estimate> {
    let g = symbol.membrane()?;
    if g.is_degenerate() {
        return Ok(Estimate::exact(C::new(0.0, 0.0)));
    }
    let mut q = *quad;
    loop {
        let est = membrane_integral_type_a(std::slice::from_ref(f), &g, &q)?;
        if est.error <= q.tolerance * est.value.norm() || q.nodes_per_dim >= MAX_PAIRING_NODES {
            return Ok(est);
        }
        q.nodes_per_dim = (q.refined_nodes()).min(MAX_PAIRING_NODES);
    }
}

pub const MAX_PAIRING_NODES: usize = 48;

/// `J(p1, p2; p3, γ p3)`.
pub fn nc_symbol_c1(
    p1: &Cusp,
    p2: &Cusp,
    p3: &Cusp,
    gamma: &MatrixK,
    forms: &[ExpForm2],
    depth: usize,
    quad: &QuadratureConfig,
) -> Result<NCSeries> {
    let p4 = gamma.act_cusp(p3);
    if &p4 == p3 {
        return Ok(NCSeries::one(depth));
    }
    let (g, _) = build_diangle(p1, p2, p3, &p4)?;
    generating_series_jb(forms, &g, depth, quad)
}

fn pair_d(p: [&Cusp; 4], f: &ExpForm2, quad: &QuadratureConfig) -> Result<C> {
    Ok(pair_commutative(&Symbol::Diangle([p[0].clone(), p[1].clone(), p[2].clone(), p[3].clone()]), f, quad)?.value)
}

fn pair_t(p: [&Cusp; 3], f: &ExpForm2, quad: &QuadratureConfig) -> Result<C> {
    Ok(pair_commutative(&Symbol::Triangle([p[0].clone(), p[1].clone(), p[2].clone()]), f, quad)?.value)
}

/// Points `h⁻¹(q)` for rational `q`, which lie on the curve `h*Δ`.
fn on_curve(h: &MatrixK, qs: &[(i64, i64)]) -> Vec<Cusp> {
    let field = h.a.field;
    let inv = h.projective_inverse();
    qs.iter().map(|&(p, q)| inv.act_cusp(&Cusp { p: field.int(p), q: field.int(q) })).collect()
}

/// Numerical checks of the relations among commutative symbols for the first five
/// `points` (pairwise distinct, `p1`, `p2` distinct from the rest):
/// orientation signs, diangle additivity, vanishing of diangles on one curve, and the
/// triangulation identity `{abc} + {acd} = {abd} + {bcd}` on an anti-holomorphic curve
/// through `p1, p2, p3`.
pub fn verify_commutative_relations(points: &[Cusp], forms: &[ExpForm2], quad: &QuadratureConfig) -> Result<Report> {
    if points.len() < 5 {
        return Err(Error::InvalidInput("five cusps are required".into()));
    }
    let [p1, p2, p3, p4, p5] = [&points[0], &points[1], &points[2], &points[3], &points[4]];
    let field = p1.field();
    let gamma = mobius_to_standard(p1, p2, p3)?;
    let mut report = Report::new();
    for (k, f) in forms.iter().enumerate() {
        let base = pair_d([p1, p2, p3, p4], f, quad)?;
        let scale = base.norm().max(1e-300);
        // property 4
        let swapped = [
            ("p2p1;p3p4", pair_d([p2, p1, p3, p4], f, quad)?, -1.0),
            ("p1p2;p4p3", pair_d([p1, p2, p4, p3], f, quad)?, -1.0),
            ("p2p1;p4p3", pair_d([p2, p1, p4, p3], f, quad)?, 1.0),
        ];
        for (name, v, sign) in swapped {
            report.push(format!("orientation f{} {name}", k + 1), (v - base * sign).norm() / scale, 1e-8);
        }
        // property 5
        let b = pair_d([p1, p2, p4, p5], f, quad)?;
        let c = pair_d([p1, p2, p3, p5], f, quad)?;
        report.push(format!("additivity f{}", k + 1), rel_diff(base + b, c, 1e-300), 1e-7);
        let d = pair_d([p1, p2, p4, p4], f, quad)?;
        report.push(format!("additivity p5=p4 f{}", k + 1), d.norm(), 1e-8);
        // property 3: a fourth point on the curve through p1, p2, p3
        let q = on_curve(&gamma, &[(2, 1), (-3, 2)]);
        for (j, x) in q.iter().enumerate() {
            let v = pair_d([p1, p2, p3, x], f, quad)?;
            report.push(format!("one curve f{} q{}", k + 1, j + 1), v.norm(), 1e-8);
        }
        // property 2 on an anti-holomorphic curve through p1, p2
        let twist = MatrixK::diag(field.int(1), field.sqrt_d())?.mul(&gamma);
        let (hol, anti) = if gamma.det_class() == DetClass::Mixed { (&twist, &gamma) } else { (&gamma, &twist) };
        let h = anti;
        let c4 = on_curve(h, &[(0, 1), (1, 1), (1, 0), (3, 1)]);
        let [a, b, cc, dd] = [&c4[0], &c4[1], &c4[2], &c4[3]];
        let abc = pair_t([a, b, cc], f, quad)?;
        let acd = pair_t([a, cc, dd], f, quad)?;
        let abd = pair_t([a, b, dd], f, quad)?;
        let bcd = pair_t([b, cc, dd], f, quad)?;
        let scale = [abc, acd, abd, bcd].iter().map(|z| z.norm()).fold(1e-300, f64::max);
        report.push(format!("triangulation f{}", k + 1), (abc + acd - abd - bcd).norm() / scale, 1e-7);
        report.note(format!("triangulation as printed f{}", k + 1), (abc + bcd - abd - acd).norm() / scale);
        // holomorphic triangles pair to zero
        let hol = on_curve(hol, &[(0, 1), (1, 1), (1, 0)]);
        let z = pair_t([&hol[0], &hol[1], &hol[2]], f, quad)?;
        report.push(format!("holomorphic triangle f{}", k + 1), z.norm(), 1e-8);
    }
    Ok(report)
}

/// Relations of `J(p1, p2; ·, ·)` for five cusps: orientation reversal at depth 1, additivity
/// at depth 1, and at depth 2 the collapsed shuffle product of the two sub-diangles against
/// the union `{p1, p2; p3, p5}`. The cusp `p4` must lie between `p3` and `p5` in the normalized
/// picture for the depth-2 check.
pub fn verify_nc_relations(points: &[Cusp], forms: &[ExpForm2], quad: &QuadratureConfig) -> Result<Report> {
    if points.len() < 5 {
        return Err(Error::InvalidInput("five cusps are required".into()));
    }
    let [p1, p2, p3, p4, p5] = [&points[0], &points[1], &points[2], &points[3], &points[4]];
    let jb = |a: &Cusp, b: &Cusp, c: &Cusp, d: &Cusp, depth: usize| -> Result<NCSeries> {
        let (g, _) = build_diangle(a, b, c, d)?;
        generating_series_jb(forms, &g, depth, quad)
    };
    let mut report = Report::new();
    let j = jb(p1, p2, p3, p4, 1)?;
    let scale = j.terms.values().skip(1).map(|c| c.norm()).fold(1e-300, f64::max);
    let flip = jb(p2, p1, p3, p4, 1)?;
    let mut worst: f64 = 0.0;
    for (m, c) in j.terms.iter().filter(|(m, _)| !m.is_empty()) {
        worst = worst.max((flip.coeff(m) + c).norm());
    }
    report.push("nc orientation depth 1", worst / scale, 1e-8);
    let j2 = jb(p1, p2, p4, p5, 1)?;
    let j3 = jb(p1, p2, p3, p5, 1)?;
    let mut worst: f64 = 0.0;
    for (m, c) in j3.terms.iter().filter(|(m, _)| !m.is_empty()) {
        worst = worst.max((j.coeff(m) + j2.coeff(m) - c).norm());
    }
    report.push("nc cocycle depth 1", worst / scale, 1e-7);

    // depth 2 through the shuffle product, on the union membrane split at the ray of p4
    let (g, sym) = build_diangle(p1, p2, p3, p5)?;
    let r4 = abs_ratio(&sym.normalizer.act_cusp(p4))?;
    let a = r4.ln() / sym.ratio.ln();
    if !(a > 1e-6 && a < 1.0 - 1e-6) {
        return Err(Error::InvalidInput("p4 does not separate p3 and p5".into()));
    }
    report.extend(verify_series_shuffle(forms, a, &g, 2, quad)?);
    let left = generating_series_jb_restricted(forms, &g, &Region::rect((0.0, a), (0.0, 1.0))?, 2, quad)?;
    let right = generating_series_jb_restricted(forms, &g, &Region::rect((a, 1.0), (0.0, 1.0))?, 2, quad)?;
    let own_left = jb(p1, p2, p3, p4, 2)?;
    let own_right = jb(p1, p2, p4, p5, 2)?;
    let s = |x: &NCSeries| x.terms.values().map(|c| c.norm()).fold(1e-300, f64::max);
    report.push("sub-diangle series left", left.max_abs_diff(&own_left) / s(&own_left), 1e-8);
    report.push("sub-diangle series right", right.max_abs_diff(&own_right) / s(&own_right), 1e-8);
    Ok(report)
}

/// A random finite cusp `p/q` with small coordinates, `q ≠ 0`.
pub fn random_cusp<R: Rng>(field: &QuadField, rng: &mut R) -> Cusp {
    loop {
        let p = field.elem(rng.gen_range(-4..=4), rng.gen_range(-3..=3));
        let q = field.elem(rng.gen_range(1..=4), rng.gen_range(-2..=2));
        if !q.is_zero() {
            return Cusp { p, q };
        }
    }
}

/// Five random finite cusps for the relation checks: `p3, p4, p5` lie on distinct rays of
/// the normalized picture of `(p1, p2, p3)`, with `p4` strictly between `p3` and `p5`.
pub fn random_configuration<R: Rng>(field: &QuadField, rng: &mut R) -> Vec<Cusp> {
    loop {
        let mut p: Vec<Cusp> = (0..5).map(|_| random_cusp(field, rng)).collect();
        let Ok(g) = mobius_to_standard(&p[0], &p[1], &p[2]) else { continue };
        let Ok(r4) = abs_ratio(&g.act_cusp(&p[3])) else { continue };
        let Ok(r5) = abs_ratio(&g.act_cusp(&p[4])) else { continue };
        let (l4, l5) = (r4.ln(), r5.ln());
        let apart = [l4, l5, l4 - l5].iter().all(|x| x.abs() > 0.05) && l4.abs() < 3.0 && l5.abs() < 3.0;
        if !apart || l4.signum() != l5.signum() {
            continue;
        }
        if l4.abs() > l5.abs() {
            p.swap(3, 4);
        }
        return p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::{make_field, FieldContext};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn q() -> QuadratureConfig {
        QuadratureConfig { nodes_per_dim: 16, ..Default::default() }
    }

    fn cusp(k: &FieldContext, p: (i64, i64), q: (i64, i64)) -> Cusp {
        Cusp::new(k.elem(p.0, p.1), k.elem(q.0, q.1)).unwrap()
    }

    fn proportional(m: &MatrixK, n: &MatrixK) -> bool {
        let e = [(&m.a, &n.a), (&m.b, &n.b), (&m.c, &n.c), (&m.d, &n.d)];
        e.iter().all(|(x, y)| e.iter().all(|(u, v)| &(*x * *v) == &(*y * *u)))
    }

    #[test]
    fn cusps() {
        let k = make_field(2).unwrap();
        assert_eq!(cusp(&k, (2, 0), (4, 0)), cusp(&k, (1, 0), (2, 0)));
        assert_ne!(cusp(&k, (1, 0), (2, 0)), Cusp::zero(k.field));
        assert_eq!(Cusp::parse(k.field, "(1,1)/2").unwrap(), cusp(&k, (1, 1), (2, 0)));
        assert!(Cusp::parse(k.field, "inf").unwrap().is_infinity());
        assert!(Cusp::new(k.field.int(0), k.field.int(0)).is_err());
    }

    #[test]
    fn standard_examples() {
        let k = make_field(2).unwrap();
        let (zero, inf, one) = (Cusp::zero(k.field), Cusp::infinity(k.field), Cusp::point(k.field.int(1)));
        let g = mobius_to_standard(&zero, &inf, &one).unwrap();
        assert!(proportional(&g, &MatrixK::identity(k.field)));
        let alpha = k.elem(3, 1);
        let g = mobius_to_standard(&zero, &inf, &Cusp::point(alpha.clone())).unwrap();
        assert!(proportional(&g, &MatrixK::diag(k.field.int(1), alpha).unwrap()));
        let g = mobius_to_standard(&inf, &zero, &one).unwrap();
        assert!(g.a.is_zero() && g.d.is_zero());
        assert_eq!(g.act_cusp(&inf), zero);
        assert_eq!(g.act_cusp(&zero), inf);
        assert_eq!(g.act_cusp(&one), one);
        assert_eq!(mobius_to_standard(&zero, &zero, &one), Err(Error::RepeatedCusps));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let p: Vec<Cusp> = (0..3).map(|_| random_cusp(&k.field, &mut rng)).collect();
            if let Ok(g) = mobius_to_standard(&p[0], &p[1], &p[2]) {
                assert_eq!(g.act_cusp(&p[0]), zero);
                assert_eq!(g.act_cusp(&p[1]), inf);
                assert_eq!(g.act_cusp(&p[2]), one);
            }
        }
    }

    #[test]
    fn action() {
        let k = make_field(2).unwrap();
        let z = [C::new(0.0, 1.3), C::new(0.0, 1.3)];
        assert_eq!(act(&MatrixK::identity(k.field), z).unwrap(), z);
        let (u1, u2) = k.eps.embed();
        let pull = MatrixK::diag(k.eps_inverse(), k.field.int(1)).unwrap().projective_inverse();
        let w = act(&pull, z).unwrap();
        assert!((w[0] - z[0] * u1).norm() < 1e-12 && (w[1] - z[1] * u2).norm() < 1e-12);
        let m = MatrixK::diag(k.field.int(1), k.field.sqrt_d()).unwrap();
        assert_eq!(m.det_class(), DetClass::Mixed);
        let w = act(&m, z).unwrap();
        let s = 2f64.sqrt();
        assert!((w[0] - z[0] / s).norm() < 1e-12 && (w[1] - z[1] / s).norm() < 1e-12);
        assert!(act(&m, [C::new(0.0, -1.0), z[1]]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tp = |rng: &mut ChaCha8Rng| loop {
            let e: Vec<QuadInt> = (0..4).map(|_| k.elem(rng.gen_range(-3..=3), rng.gen_range(-2..=2))).collect();
            if let Ok(m) = MatrixK::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()) {
                if m.det_class() == DetClass::TotallyPositive {
                    return m;
                }
            }
        };
        for _ in 0..20 {
            let (g, h) = (tp(&mut rng), tp(&mut rng));
            let z = [C::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.2..2.0)), C::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.2..2.0))];
            let a = act(&g.mul(&h), z).unwrap();
            let b = act(&g, act(&h, z).unwrap()).unwrap();
            for j in 0..2 {
                assert!((a[j] - b[j]).norm() < 1e-10 * (1.0 + a[j].norm()));
            }
        }
    }

    /// `∫ e(a1 z1 + a2 z2) dz1∧dz2` over the bare diangle from `r0` to `r1`.
    fn bare_diangle_exact(alpha: &QuadInt, r0: f64, r1: f64) -> C {
        let (a1, a2) = alpha.embed();
        C::new((r0 - r1) / (4.0 * PI * PI * (a1 * r1 + a2) * (a1 * r0 + a2)), 0.0)
    }

    #[test]
    fn diangles_at_infinity() {
        let k = make_field(2).unwrap();
        let (zero, inf, one) = (Cusp::zero(k.field), Cusp::infinity(k.field), Cusp::point(k.field.int(1)));
        let (g, s) = build_diangle(&zero, &inf, &one, &one).unwrap();
        assert!(s.is_degenerate() && g.is_degenerate());
        let f = ExpForm2::single(k.elem(3, 1), C::new(1.0, 0.0)).unwrap();
        assert_eq!(pair_commutative(&Symbol::Diangle([zero.clone(), inf.clone(), one.clone(), one.clone()]), &f, &q()).unwrap().value, C::new(0.0, 0.0));

        let eps = Cusp::point(k.eps.clone());
        let (_, s) = build_diangle(&zero, &inf, &one, &eps).unwrap();
        let (u1, u2) = k.eps.embed();
        assert_eq!(s.orientation, 1);
        assert!((s.ratio - u1 / u2).abs() < 1e-12);
        for alpha in [k.elem(1, 0), k.elem(3, 1)] {
            let f = ExpForm2::single(alpha.clone(), C::new(1.0, 0.0)).unwrap();
            let sym = Symbol::Diangle([zero.clone(), inf.clone(), one.clone(), eps.clone()]);
            let v = pair_commutative(&sym, &f, &q()).unwrap().value;
            let exact = bare_diangle_exact(&alpha, 1.0, u1 / u2);
            assert!((v - exact).norm() < 1e-12 * exact.norm(), "{v} {exact}");
            // the unit diangle {0, ∞; u, u⁻¹}
            let sym = Symbol::Diangle([zero.clone(), inf.clone(), eps.clone(), Cusp::point(k.eps_inverse())]);
            let v = pair_commutative(&sym, &f, &q()).unwrap().value;
            let (a1, a2) = alpha.embed();
            let lemma = C::new(-1.0 / (4.0 * PI * PI), 0.0) * ((u2 * u2 - u1 * u1) / ((a1 * u1 + a2 * u2) * (a1 * u2 + a2 * u1)));
            assert!((v - lemma).norm() < 1e-12 * lemma.norm(), "{v} {lemma}");
        }
    }

    #[test]
    fn translated_diangle_matches_action() {
        let k = make_field(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gamma = MatrixK::new(k.elem(2, 1), k.elem(1, 0), k.elem(1, 1), k.elem(1, 0)).unwrap();
        let mut done = 0;
        while done < 5 {
            let p: Vec<Cusp> = (0..4).map(|_| random_cusp(&k.field, &mut rng)).collect();
            let Ok((g, s)) = build_diangle(&p[0], &p[1], &p[2], &p[3]) else { continue };
            if s.is_degenerate() {
                continue;
            }
            let gp: Vec<Cusp> = p.iter().map(|x| gamma.act_cusp(x)).collect();
            let (h, _) = build_diangle(&gp[0], &gp[1], &gp[2], &gp[3]).unwrap();
            for &(t1, t2) in &[(0.2, 0.3), (0.7, 0.5), (0.5, 0.9)] {
                let a = act(&gamma, g.eval(t1, t2).z).unwrap();
                let b = h.eval(t1, t2).z;
                for j in 0..2 {
                    assert!((a[j] - b[j]).norm() < 1e-9 * (1.0 + a[j].norm()));
                }
            }
            done += 1;
        }
    }

    #[test]
    fn triangles() {
        let k = make_field(2).unwrap();
        let (zero, inf, one) = (Cusp::zero(k.field), Cusp::infinity(k.field), Cusp::point(k.field.int(1)));
        let (g, s) = build_triangle(&inf, &zero, &one).unwrap();
        assert_eq!(s.curve, CurveKind::Holomorphic);
        assert!(s.normalizer.act_cusp(&inf).is_infinity());
        let f = ExpForm2::single(k.elem(3, 1), C::new(1.0, 0.5)).unwrap();
        let v = membrane_integral_type_a(&[f], &g, &q()).unwrap().value;
        assert!(v.norm() < 1e-12);
        let h = MatrixK::diag(k.field.int(1), k.field.sqrt_d()).unwrap();
        let pts = on_curve(&h, &[(0, 1), (1, 1), (1, 0)]);
        let (_, s) = build_triangle(&pts[0], &pts[1], &pts[2]).unwrap();
        assert_eq!(s.curve, CurveKind::AntiHolomorphic);
    }

    fn forms(k: &FieldContext) -> Vec<ExpForm2> {
        vec![
            ExpForm2::single(k.elem(1, 0), C::new(1.0, 0.0)).unwrap(),
            ExpForm2::new(k.field, vec![(C::new(0.5, 0.2), k.elem(2, 1)), (C::new(-0.3, 0.0), k.elem(3, 1))]).unwrap(),
        ]
    }

    #[test]
    fn commutative_relations() {
        for (d, seed) in [(2, 1), (5, 2)] {
            let k = make_field(d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_configuration(&k.field, &mut rng);
            let r = verify_commutative_relations(&p, &forms(&k), &q()).unwrap();
            assert!(r.passed(), "d={d} {p:?}\n{}", r.table());
        }
    }

    #[test]
    fn nc_symbol() {
        let k = make_field(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_configuration(&k.field, &mut rng);
        let fs = forms(&k);
        let one = nc_symbol_c1(&p[0], &p[1], &p[2], &MatrixK::identity(k.field), &fs, 2, &q()).unwrap();
        assert_eq!(one, NCSeries::one(2));
        let r = verify_nc_relations(&p, &fs, &q()).unwrap();
        assert!(r.passed(), "{p:?}\n{}", r.table());
    }
}
