//! Multiple Dedekind zeta values over the cones `ε^k C`, the sums `Z(m, n)`, and the
//! single and iterated L-values of exponential forms in series and integral form.
//!
//! Cone sums are truncated by the height (larger embedding) of the base point in `C`,
//! so `ε^k C` is truncated at the same base points for every `k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::ExpForm2;
use crate::membrane::{membrane_integral_type_a, Membrane};
use crate::quadfield::{Cone, ConeVariant, FieldContext, QuadInt};
use crate::quadrature::{CompensatedSum, Estimate, QuadratureConfig};

type C = Complex64;

const TWO_PI_I: C = C::new(0.0, 2.0 * std::f64::consts::PI);

/// A truncated sum `Σ_{α_i ∈ C_i} Π N(α_1 + … + α_i)^{-k_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSumSpec {
    pub field: FieldContext,
    pub cones: Vec<Cone>,
    pub exponents: Vec<u32>,
    /// Base points of `C` with larger embedding above this are dropped.
    pub height_bound: f64,
    /// Unit window `|k| ≤ K` for sums over `k`.
    pub unit_window: u32,
}

impl ConeSumSpec {
    /// `ζ_{K; C, ε^{k_2} C, …}(k_1, …)` with unit powers `powers`.
    pub fn new(field: &FieldContext, powers: &[i32], exponents: &[u32], height_bound: f64) -> Self {
        ConeSumSpec {
            field: field.clone(),
            cones: powers.iter().map(|&k| Cone::new(field, k)).collect(),
            exponents: exponents.to_vec(),
            height_bound,
            unit_window: 8,
        }
    }

    pub fn with_window(mut self, k: u32) -> Self {
        self.unit_window = k;
        self
    }

    /// Exponent `e` that every `α_i` can be bounded with: `Π N(partial sums)^{-k_i} ≤ Π N(α_i)^{-e}`.
    fn uniform_exponent(&self) -> f64 {
        let m = self.exponents.len();
        (0..m)
            .map(|j| self.exponents[j..].iter().sum::<u32>() as f64 / (m - j) as f64)
            .fold(f64::INFINITY, f64::min)
    }

    fn validate(&self) -> Result<()> {
        let m = self.exponents.len();
        if m == 0 || self.cones.len() != m {
            return Err(Error::SizeMismatch(self.cones.len(), m));
        }
        if self.exponents.contains(&0) || self.exponents[m - 1] < 2 {
            return Err(Error::Divergence(format!("exponents {:?}", self.exponents)));
        }
        if self.uniform_exponent() <= 1.0 {
            return Err(Error::Divergence(format!("exponents {:?} admit no convergent majorant", self.exponents)));
        }
        if !(self.height_bound >= 0.0) {
            return Err(Error::InvalidInput("negative height bound".into()));
        }
        Ok(())
    }
}

/// A truncated sum with a bound on everything it leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSum {
    pub value: f64,
    pub tail_bound: f64,
}

/// Embeddings of the base points of `C` up to height `h`.
fn base_embeddings(field: &FieldContext, variant: ConeVariant, h: f64) -> Vec<(f64, f64)> {
    Cone::new(field, 0).with_variant(variant).base_points(h).iter().map(|p| (p.e1, p.e2)).collect()
}

/// `Σ_{β ∈ C, height ≤ h} N(β)^{-e} β_1^{-p} β_2^{-q}` and a bound on the rest, for
/// `2e + p + q > 2`. The rest is bounded by an integral over the real cone spanned by
/// `1` and `ε` beyond the truncation, using that the summand decreases in both
/// coordinates `a, b` of `a + bε`; heights too small for that comparison are summed exactly.
pub fn weighted_cone_sum(field: &FieldContext, variant: ConeVariant, h: f64, e: f64, p: f64, q: f64) -> Result<ConeSum> {
    let t = 2.0 * e + p + q;
    if t <= 2.0 || e + q < 0.0 {
        return Err(Error::Divergence(format!("cone sum with exponents ({e}, {p}, {q})")));
    }
    let (e1, e2) = field.eps_embeddings();
    let term = |x: (f64, f64)| (x.0 * x.1).powf(-e) * x.0.powf(-p) * x.1.powf(-q);
    let h2 = h.max(4.0 * (1.0 + e1));
    let pts = base_embeddings(field, variant, h2);
    let mut inner = CompensatedSum::default();
    let mut extra = CompensatedSum::default();
    for &x in &pts {
        if x.0.max(x.1) <= h {
            inner.add_real(term(x));
        } else {
            extra.add_real(term(x));
        }
    }
    // rational points n > h2
    let nmax = h2.floor();
    let mut tail = nmax.powf(1.0 - t) / (t - 1.0);
    // a + bε, a, b ≥ 1: cells [a-1, a] × [b-1, b] lie beyond x1 = h2 - 1 - ε1
    let r = h2 - 1.0 - e1;
    let sigma = e2 / e1;
    let s_int = if (e + q - 1.0).abs() < 1e-12 { -sigma.ln() } else { (1.0 - sigma.powf(1.0 - e - q)) / (1.0 - e - q) };
    tail += r.powf(2.0 - t) / (t - 2.0) * s_int / (e1 - e2);
    if variant == ConeVariant::Inclusive {
        // bε, b > h2 / ε1
        let bmin = (h2 / e1).floor().max(1.0);
        tail += term((e1, e2)) * bmin.powf(1.0 - t) / (t - 1.0);
    }
    Ok(ConeSum { value: inner.real(), tail_bound: tail + extra.real() })
}

/// Truncated multiple Dedekind zeta value with a tail bound.
pub fn mdzv(spec: &ConeSumSpec) -> Result<ConeSum> {
    spec.validate()?;
    let (e1, e2) = spec.field.eps_embeddings();
    let lists: Vec<Vec<(f64, f64)>> = spec
        .cones
        .iter()
        .map(|c| {
            let (s1, s2) = (e1.powi(c.unit_power), e2.powi(c.unit_power));
            base_embeddings(&spec.field, c.variant, spec.height_bound).into_iter().map(|(x, y)| (s1 * x, s2 * y)).collect()
        })
        .collect();
    let mut acc = CompensatedSum::default();
    nested(&lists, &spec.exponents, (0.0, 0.0), 1.0, &mut acc);
    // every term is at most Π N(α_i)^{-e}; the omitted ones have some α_j beyond the bound
    let e = spec.uniform_exponent();
    let mut tail = 0.0;
    let parts: Vec<ConeSum> = spec
        .cones
        .iter()
        .map(|c| weighted_cone_sum(&spec.field, c.variant, spec.height_bound, e, 0.0, 0.0))
        .collect::<Result<_>>()?;
    for j in 0..parts.len() {
        let others: f64 = parts.iter().enumerate().filter(|(l, _)| *l != j).map(|(_, s)| s.value + s.tail_bound).product();
        tail += parts[j].tail_bound * others;
    }
    Ok(ConeSum { value: acc.real(), tail_bound: tail })
}

fn nested(lists: &[Vec<(f64, f64)>], exps: &[u32], partial: (f64, f64), weight: f64, acc: &mut CompensatedSum) {
    let Some((first, rest)) = lists.split_first() else {
        acc.add_real(weight);
        return;
    };
    let k = exps[0] as i32;
    for &(x, y) in first {
        let s = (partial.0 + x, partial.1 + y);
        nested(rest, &exps[1..], s, weight * (s.0 * s.1).powi(-k), acc);
    }
}

/// `Σ_{|k| ≤ K} ζ_{K; C, ε^k C}(m, n)` with its terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZValue {
    pub m: u32,
    pub n: u32,
    pub window: u32,
    pub value: f64,
    /// `(k, ζ_{K; C, ε^k C}(m, n))` for `k = -K..=K`.
    pub terms: Vec<(i32, f64)>,
    /// Bound on the omitted heights (summed over the window) and on `|k| > K`.
    pub tail_bound: f64,
}

impl ZValue {
    pub fn term(&self, k: i32) -> Option<f64> {
        self.terms.iter().find(|t| t.0 == k).map(|t| t.1)
    }

    /// `term(k ± 1) / term(k)` moving away from `0`, for `|k| ≥ from`.
    pub fn decay_ratios(&self, from: i32) -> Vec<(i32, f64)> {
        let mut out = Vec::new();
        for &(k, v) in &self.terms {
            if k.abs() >= from {
                let next = if k > 0 { k + 1 } else { k - 1 };
                if let Some(w) = self.term(next) {
                    out.push((k, w / v));
                }
            }
        }
        out
    }
}

/// `Z(m, n)` over the window `|k| ≤ spec.unit_window`; the cones and exponents of `spec`
/// are replaced by `(C, ε^k C)` and `(m, n)`.
pub fn z_value(m: u32, n: u32, spec: &ConeSumSpec) -> Result<ZValue> {
    if !(m > n && n > 1) {
        return Err(Error::Divergence(format!("Z({m}, {n}) needs m > n > 1")));
    }
    let k = spec.unit_window as i32;
    let mut terms = Vec::new();
    let mut acc = CompensatedSum::default();
    let mut tail = 0.0;
    for j in -k..=k {
        let s = ConeSumSpec { cones: vec![Cone::new(&spec.field, 0), Cone::new(&spec.field, j)], exponents: vec![m, n], ..spec.clone() };
        let r = mdzv(&s)?;
        terms.push((j, r.value));
        acc.add_real(r.value);
        tail += r.tail_bound;
    }
    let maj = z_majorant_parts(m, n, spec)?;
    let (e1, _) = spec.field.eps_embeddings();
    tail += 2.0 * maj.mixed * e1.powi(-k) / (e1 - 1.0);
    Ok(ZValue { m, n, window: spec.unit_window, value: acc.real(), terms, tail_bound: tail })
}

/// Ingredients of the majorant: `ζ_{C,C}(m, n)` and the mixed sum bounding each `k ≠ 0`
/// term by `ε_1^{-|k|}` times it.
struct MajorantParts {
    diagonal: f64,
    mixed: f64,
}

fn z_majorant_parts(m: u32, n: u32, spec: &ConeSumSpec) -> Result<MajorantParts> {
    let f = &spec.field;
    let h = spec.height_bound;
    let v = ConeVariant::Strict;
    let up = |s: ConeSum| s.value + s.tail_bound;
    // for k ≥ 1, N(α + ε^k β) ≥ N(β)^{n-1} · ε_1^k β_1 α_2, and symmetrically for k ≤ -1
    let a2 = up(weighted_cone_sum(f, v, h, m as f64, 0.0, 1.0)?);
    let a1 = up(weighted_cone_sum(f, v, h, m as f64, 1.0, 0.0)?);
    let b1 = up(weighted_cone_sum(f, v, h, (n - 1) as f64, 1.0, 0.0)?);
    let b2 = up(weighted_cone_sum(f, v, h, (n - 1) as f64, 0.0, 1.0)?);
    let diag = mdzv(&ConeSumSpec { cones: vec![Cone::new(f, 0); 2], exponents: vec![m, n], ..spec.clone() })?;
    Ok(MajorantParts { diagonal: up(diag), mixed: 0.5 * (a2 * b1 + a1 * b2) })
}

/// An upper bound for the untruncated `Z(m, n)`:
/// `ζ_{C,C}(m, n) + (2 / (ε_1 - 1)) · ½(Σ N(α)^{-m} α_2^{-1} · Σ N(β)^{1-n} β_1^{-1} + (1 ↔ 2))`.
pub fn z_majorant(m: u32, n: u32, spec: &ConeSumSpec) -> Result<f64> {
    if !(m > n && n > 1) {
        return Err(Error::Divergence(format!("Z({m}, {n}) needs m > n > 1")));
    }
    let p = z_majorant_parts(m, n, spec)?;
    let (e1, _) = spec.field.eps_embeddings();
    Ok(p.diagonal + 2.0 / (e1 - 1.0) * p.mixed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LMode {
    Series,
    Integral,
}

/// `(2πi)^{-2k}`: the constant of a `k`-fold iterated integral of exponential 2-forms over
/// `Im(H) × Im(H)`.
pub fn l_prefactor(k: u32) -> C {
    TWO_PI_I.powi(-2 * k as i32)
}

fn norm_f64(x: &QuadInt) -> f64 {
    let (a, b) = x.embed();
    a * b
}

/// The iterated integral of `forms` over `Im(H) × Im(H)` from the cusp to `0`.
fn quadrant_integral(forms: &[ExpForm2], quad: &QuadratureConfig) -> Result<Estimate> {
    membrane_integral_type_a(forms, &Membrane::imaginary_quadrant(), quad)?.check(quad.tolerance)
}

fn with_omega0(first: &ExpForm2, copies: u32) -> Vec<ExpForm2> {
    let mut v = vec![first.clone()];
    v.extend((1..copies).map(|_| ExpForm2::omega0(first.field)));
    v
}

/// `L_f(n)`: in series mode `(2πi)^{-2n} Σ a_α / N(α)^n` over the terms of `f`, in integral
/// mode the iterated integral of `f · ω0^{n-1}` over `Im(H) × Im(H)`.
pub fn l_single(f: &ExpForm2, n: u32, mode: LMode, quad: &QuadratureConfig) -> Result<C> {
    if n == 0 || !f.decays() {
        return Err(Error::InvalidInput("L_f(n) needs n ≥ 1 and a decaying form".into()));
    }
    if f.terms.is_empty() {
        return Ok(C::new(0.0, 0.0));
    }
    match mode {
        LMode::Series => {
            let mut acc = CompensatedSum::default();
            for t in &f.terms {
                acc.add(t.coeff * norm_f64(&t.alpha).powi(-(n as i32)));
            }
            Ok(acc.value() * l_prefactor(n))
        }
        LMode::Integral => Ok(quadrant_integral(&with_omega0(f, n), quad)?.value),
    }
}

/// The unit power `k` with `ε^{-k} x` in the fundamental domain `{1 ≤ x_1/x_2 < ε_1²}` of the
/// totally positive integers modulo totally positive units.
pub fn unit_class_index(field: &FieldContext, x: &QuadInt) -> Result<i32> {
    if !x.is_totally_positive() {
        return Err(Error::NotTotallyPositive(x.to_string()));
    }
    let (x1, x2) = x.embed();
    let (e1, _) = field.eps_embeddings();
    let guess = ((x1 / x2).ln() / (2.0 * e1.ln())).floor() as i32;
    // settle boundary cases exactly: x_1/x_2 = ε_1^{2k} iff ε^{-k} x is rational
    for k in [guess + 1, guess, guess - 1] {
        if (x * &field.eps_pow(-k)).is_rational() {
            return Ok(k);
        }
    }
    Ok(guess)
}

/// The terms of `f` whose exponent lies in the fundamental domain: one representative per
/// unit orbit.
pub fn orbit_representatives(field: &FieldContext, f: &ExpForm2) -> Result<ExpForm2> {
    let mut terms = Vec::new();
    for t in &f.terms {
        if unit_class_index(field, &t.alpha)? == 0 {
            terms.push((t.coeff, t.alpha.clone()));
        }
    }
    ExpForm2::new(f.field, terms)
}

/// `L_{f,g}(m, n)`, with `F` the fundamental domain of [`unit_class_index`]. Series mode is
/// `Σ_{|k| ≤ window} Σ_{α ∈ F, β ∈ ε^k F} a_α b_β / (N(α)^m N(α+β)^n)` over the terms of `f`
/// and `g`, without any `(2πi)` factor. Integral mode is the raw iterated integral of
/// `f_F · ω0^{m-1} · g · ω0^{n-1}` over `Im(H) × Im(H)`, where `f_F` keeps the terms of `f`
/// in `F`; it equals the series times [`l_prefactor`]`(m + n)` when the window covers the
/// terms of `g`.
pub fn l_double(
    field: &FieldContext,
    f: &ExpForm2,
    g: &ExpForm2,
    m: u32,
    n: u32,
    mode: LMode,
    window: u32,
    quad: &QuadratureConfig,
) -> Result<C> {
    if m == 0 || n == 0 || !f.decays() || !g.decays() {
        return Err(Error::InvalidInput("L_{f,g}(m, n) needs m, n ≥ 1 and decaying forms".into()));
    }
    let fc = orbit_representatives(field, f)?;
    match mode {
        LMode::Series => {
            let mut acc = CompensatedSum::default();
            for a in &fc.terms {
                let na = norm_f64(&a.alpha).powi(-(m as i32));
                for b in &g.terms {
                    if unit_class_index(field, &b.alpha)?.unsigned_abs() <= window {
                        let s = &a.alpha + &b.alpha;
                        acc.add(a.coeff * b.coeff * na * norm_f64(&s).powi(-(n as i32)));
                    }
                }
            }
            Ok(acc.value())
        }
        LMode::Integral => {
            if m + n > 5 {
                return Err(Error::InvalidInput("integral mode supports m + n ≤ 5".into()));
            }
            if fc.terms.is_empty() {
                return Ok(C::new(0.0, 0.0));
            }
            let mut forms = with_omega0(&fc, m);
            forms.extend(with_omega0(g, n));
            Ok(quadrant_integral(&forms, quad)?.value)
        }
    }
}

/// Fits the constant `c` in `∫ e(αz) ω0^{m-1} e(βz) ω0^{n-1} = c / (N(α)^m N(α+β)^n)` for each
/// pair; returns the fitted constants.
pub fn fit_prefactor(pairs: &[(QuadInt, QuadInt)], m: u32, n: u32, quad: &QuadratureConfig) -> Result<Vec<C>> {
    pairs
        .iter()
        .map(|(a, b)| {
            let fa = ExpForm2::single(a.clone(), C::new(1.0, 0.0))?;
            let fb = ExpForm2::single(b.clone(), C::new(1.0, 0.0))?;
            let mut forms = with_omega0(&fa, m);
            forms.extend(with_omega0(&fb, n));
            let v = quadrant_integral(&forms, quad)?.value;
            Ok(v * norm_f64(a).powi(m as i32) * norm_f64(&(a + b)).powi(n as i32))
        })
        .collect()
}
