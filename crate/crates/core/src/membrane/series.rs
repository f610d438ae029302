//! Generating series of membrane integrals and the shuffle and homotopy laws.

use num_complex::Complex64;

use super::engine::{Integrator, Method};
use super::geometry::{Membrane, Shape};
use super::restriction::{DomainRestriction, Rect, Region};
use crate::error::{Error, Result};
use crate::forms::ExpForm2;
use crate::ncring::{Letter, Monomial, NCSeries, WordSeries};
use crate::quadrature::QuadratureConfig;
use crate::report::{rel_diff, Report};
use crate::shuffle::{all_permutations, shuffle_of_permutations, shuffles, Permutation};

type C = Complex64;

/// Largest depth of the generating series.
pub const MAX_SERIES_DEPTH: usize = 3;

/// All words of length `k` over `0..m`.
pub(crate) fn words(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|w: Vec<usize>| {
                (0..m).map(move |c| {
                    let mut v = w.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

fn gens(c: &[usize]) -> Vec<u32> {
    c.iter().map(|&k| k as u32 + 1).collect()
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > MAX_SERIES_DEPTH {
        return Err(Error::InvalidInput(format!("series depth limited to {MAX_SERIES_DEPTH}")));
    }
    Ok(())
}

/// Letters of form `f` placed at position `rho(f)`.
fn arrange(c: &[usize], rho: &Permutation, tags: Option<&[u8]>) -> Vec<Letter> {
    let inv = rho.invert();
    (0..c.len())
        .map(|p| {
            let f = inv.apply(p);
            Letter::tagged(c[f] as u32 + 1, tags.map_or(0, |t| t[f]))
        })
        .collect()
}

fn single(region: Option<&Region>, k: usize) -> Option<DomainRestriction> {
    region.map(|r| DomainRestriction::single(r.clone(), k))
}

fn ja_with(it: &mut Integrator, depth: usize, region: Option<&Region>) -> Result<WordSeries> {
    let m = it.forms().len();
    let mut s = WordSeries::one(depth);
    for k in 1..=depth {
        let id = Permutation::identity(k);
        let restr = single(region, k);
        for c in words(m, k) {
            let v = it.integral(&c, &id, &id, restr.as_ref())?.value;
            s.terms.insert(gens(&c), v);
        }
    }
    Ok(s)
}

/// Sums over the classes `(c, id, rho)`; every class of `(c, rho1, rho2)` has exactly one
/// such representative.
fn jb_with(it: &mut Integrator, depth: usize, region: Option<&Region>) -> Result<NCSeries> {
    let m = it.forms().len();
    let mut s = NCSeries::one(depth);
    for k in 1..=depth {
        let id = Permutation::identity(k);
        let restr = single(region, k);
        for c in words(m, k) {
            for rho in all_permutations(k) {
                let v = it.integral(&c, &id, &rho, restr.as_ref())?.value;
                let mono = Monomial { x: arrange(&c, &id, None), y: arrange(&c, &rho, None) };
                s.add_term(mono, v);
            }
        }
    }
    Ok(s.prune())
}

/// Type-a generating series: the coefficient of `X_{c(1)}…X_{c(k)}` is the type-a
/// integral of `ω_{c(1)}…ω_{c(k)}`.
pub fn generating_series_ja(forms: &[ExpForm2], g: &Membrane, depth: usize, quad: &QuadratureConfig) -> Result<WordSeries> {
    check_depth(depth)?;
    let mut it = Integrator::new(forms, g, quad, Method::Auto, Default::default())?;
    ja_with(&mut it, depth, None)
}

/// Type-b generating series over `(X, Y)` word pairs: the class of `(c, rho1, rho2)`
/// contributes its integral to `X_{c∘rho1⁻¹} ⊗ Y_{c∘rho2⁻¹}`.
pub fn generating_series_jb(forms: &[ExpForm2], g: &Membrane, depth: usize, quad: &QuadratureConfig) -> Result<NCSeries> {
    check_depth(depth)?;
    let mut it = Integrator::new(forms, g, quad, Method::Auto, Default::default())?;
    jb_with(&mut it, depth, None)
}

/// Type-b generating series with every form restricted to `region`.
pub fn generating_series_jb_restricted(
    forms: &[ExpForm2],
    g: &Membrane,
    region: &Region,
    depth: usize,
    quad: &QuadratureConfig,
) -> Result<NCSeries> {
    check_depth(depth)?;
    let (xs, ys) = DomainRestriction::single(region.clone(), 1).edges();
    let mut it = Integrator::new(forms, g, quad, Method::Auto, (xs, ys))?;
    jb_with(&mut it, depth, Some(region))
}

fn words_label(word: &[usize]) -> String {
    word.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join("")
}

/// Product of two type-b integrals (first `split` forms, then the rest) against the sum
/// over the shuffles of both permutation pairs, for every permutation pair of each factor.
pub fn verify_membrane_shuffle(forms: &[ExpForm2], split: usize, g: &Membrane, quad: &QuadratureConfig) -> Result<Report> {
    let m = forms.len();
    if split > m {
        return Err(Error::SizeMismatch(split, m));
    }
    let mut it = Integrator::new(forms, g, quad, Method::Auto, Default::default())?;
    verify_shuffle_with(&mut it, &(0..m).collect::<Vec<_>>(), split, 1e-8)
}

pub(crate) fn verify_shuffle_with(it: &mut Integrator, word: &[usize], split: usize, tol: f64) -> Result<Report> {
    let (w1, w2) = word.split_at(split);
    let (i, j) = (w1.len(), w2.len());
    let mut report = Report::new();
    for p1 in all_permutations(i) {
        for p2 in all_permutations(i) {
            let a = it.integral(w1, &p1, &p2, None)?.value;
            for q1 in all_permutations(j) {
                for q2 in all_permutations(j) {
                    let b = it.integral(w2, &q1, &q2, None)?.value;
                    let mut rhs = C::new(0.0, 0.0);
                    for r1 in shuffle_of_permutations(&p1, &q1) {
                        for r2 in shuffle_of_permutations(&p2, &q2) {
                            rhs += it.integral(word, &r1, &r2, None)?.value;
                        }
                    }
                    let name = format!("shuffle w={} split={split} ({p1},{p2})x({q1},{q2})", words_label(word));
                    report.push(name, rel_diff(a * b, rhs, 1e-300), tol);
                }
            }
        }
    }
    Ok(report)
}

/// Sum over all `2^m` tag maps of two-domain integrals against the unrestricted integral.
pub fn verify_tag_collapse(
    forms: &[ExpForm2],
    rho1: &Permutation,
    rho2: &Permutation,
    a1: &Region,
    a2: &Region,
    g: &Membrane,
    quad: &QuadratureConfig,
) -> Result<Report> {
    let m = forms.len();
    let mut cuts = (Vec::new(), Vec::new());
    for r in a1.rects.iter().chain(&a2.rects) {
        cuts.0.extend([r.x.0, r.x.1]);
        cuts.1.extend([r.y.0, r.y.1]);
    }
    let mut it = Integrator::new(forms, g, quad, Method::Auto, cuts)?;
    let word: Vec<usize> = (0..m).collect();
    let whole = it.integral(&word, rho1, rho2, None)?.value;
    let mut sum = C::new(0.0, 0.0);
    for r in DomainRestriction::all_tag_maps(a1, a2, m)? {
        sum += it.integral(&word, rho1, rho2, Some(&r))?.value;
    }
    let mut report = Report::new();
    report.push(format!("tag collapse m={m} ({rho1},{rho2})"), rel_diff(sum, whole, 1e-300), 1e-8);
    Ok(report)
}

/// The shuffle of the series of `U' = g([0,a]×[0,1])` and `U'' = g([a,1]×[0,1])`,
/// collapsed by `φ`, against the series of the whole membrane.
///
/// The tagged monomial produced by shuffling the classes `(c', id, ρ')` and `(c'', id, ρ'')`
/// along `(τ_x, τ_y)` carries the two-domain integral with permutations
/// `(τ_x, τ_y∘(ρ'∪ρ''))`. The residual of the purely formal product, where each output term
/// carries the product of the input coefficients, is recorded as a diagnostic.
pub fn verify_series_shuffle(forms: &[ExpForm2], a: f64, g: &Membrane, depth: usize, quad: &QuadratureConfig) -> Result<Report> {
    check_depth(depth)?;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidInput("split leaf must be interior".into()));
    }
    let m = forms.len();
    let mut it = Integrator::new(forms, g, quad, Method::Auto, (vec![a], vec![]))?;
    let left = Region::rect((0.0, a), (0.0, 1.0))?;
    let right = Region::rect((a, 1.0), (0.0, 1.0))?;
    let whole = jb_with(&mut it, depth, None)?;
    let j1 = jb_with(&mut it, depth, Some(&left))?;
    let j2 = jb_with(&mut it, depth, Some(&right))?;

    let mut tagged = NCSeries::zero(depth);
    for i in 0..=depth {
        for j in 0..=depth - i {
            let tags: Vec<u8> = (0..i + j).map(|f| if f < i { 1 } else { 2 }).collect();
            let restr = DomainRestriction::split_x(a, tags.clone())?;
            let sh = shuffles(i, j);
            for c1 in words(m, i) {
                for c2 in words(m, j) {
                    let c: Vec<usize> = c1.iter().chain(&c2).copied().collect();
                    for p1 in all_permutations(i) {
                        for p2 in all_permutations(j) {
                            let sum = p1.direct_sum(&p2);
                            for tx in &sh {
                                for ty in &sh {
                                    let r2 = ty.compose(&sum)?;
                                    let v = if c.is_empty() {
                                        C::new(1.0, 0.0)
                                    } else {
                                        it.integral(&c, tx, &r2, Some(&restr))?.value
                                    };
                                    let mono = Monomial { x: arrange(&c, tx, Some(&tags)), y: arrange(&c, &r2, Some(&tags)) };
                                    tagged.add_term(mono, v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let collapsed = tagged.phi();
    let formal = j1.shuffle_product(&j2)?.phi();
    let scale = whole.terms.values().map(|c| c.norm()).fold(1e-300, f64::max);
    let mut report = Report::new();
    report.push(format!("series shuffle depth={depth} a={a}"), collapsed.max_abs_diff(&whole) / scale, 1e-6);
    report.note(format!("formal shuffle residual depth={depth} a={a}"), formal.max_abs_diff(&whole) / scale);
    Ok(report)
}

/// `J^a(A∪B) = J^a(A)·J^a(B)` for the corner-stacked squares `A = [0,a]²`, `B = [a,1]²`.
pub fn verify_type_a_composition(forms: &[ExpForm2], a: f64, g: &Membrane, depth: usize, quad: &QuadratureConfig) -> Result<Report> {
    check_depth(depth)?;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidInput("corner must be interior".into()));
    }
    let mut it = Integrator::new(forms, g, quad, Method::Auto, (vec![a], vec![a]))?;
    let ra = Rect::new((0.0, a), (0.0, a))?;
    let rb = Rect::new((a, 1.0), (a, 1.0))?;
    let ja = ja_with(&mut it, depth, Some(&Region::new(vec![ra])?))?;
    let jb = ja_with(&mut it, depth, Some(&Region::new(vec![rb])?))?;
    let jab = ja_with(&mut it, depth, Some(&Region::new(vec![ra, rb])?))?;
    let prod = ja.mul(&jb)?;
    let scale = jab.terms.values().map(|c| c.norm()).fold(1e-300, f64::max);
    let mut report = Report::new();
    report.push(format!("type-a composition depth={depth} a={a}"), prod.max_abs_diff(&jab) / scale, 1e-8);
    Ok(report)
}

fn slide_of(g: &Membrane) -> f64 {
    match g.shape {
        Shape::Diangle { slide, .. } => slide,
        _ => 0.0,
    }
}

/// Type-b integrals of every class of depth ≤ 2 over `g0` and `g1`. The tolerance is
/// `1e-8` for reparametrizations and `1e-6` when the boundary slides along its curves.
pub fn verify_homotopy_invariance(forms: &[ExpForm2], g0: &Membrane, g1: &Membrane, quad: &QuadratureConfig) -> Result<Report> {
    let mut report = Report::new();
    if g0 == g1 {
        report.push("homotopy identity", 0.0, 1e-8);
        return Ok(report);
    }
    let tol = if slide_of(g0) != slide_of(g1) { 1e-6 } else { 1e-8 };
    let mut i0 = Integrator::new(forms, g0, quad, Method::Auto, Default::default())?;
    let mut i1 = Integrator::new(forms, g1, quad, Method::Auto, Default::default())?;
    for k in 1..=2 {
        let id = Permutation::identity(k);
        for c in words(forms.len(), k) {
            for rho in all_permutations(k) {
                let a = i0.integral(&c, &id, &rho, None)?.value;
                let b = i1.integral(&c, &id, &rho, None)?.value;
                report.push(format!("homotopy w={} rho2={rho}", words_label(&c)), rel_diff(a, b, 1e-300), tol);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membrane::Reparam;
    use crate::quadfield::{make_field, FieldContext};

    fn setup() -> (FieldContext, Membrane, Vec<ExpForm2>) {
        let k = make_field(2).unwrap();
        let g = Membrane::diangle_unit(&k, &k.eps).unwrap();
        let forms = vec![
            ExpForm2::single(k.elem(1, 0), C::new(1.0, 0.0)).unwrap(),
            ExpForm2::new(k.field.clone(), vec![(C::new(0.5, 0.2), k.elem(2, 1)), (C::new(-0.3, 0.0), k.elem(3, 1))]).unwrap(),
        ];
        (k, g, forms)
    }

    #[test]
    fn series_basics() {
        let (_, g, forms) = setup();
        let q = QuadratureConfig::default();
        assert_eq!(generating_series_jb(&forms, &g, 0, &q).unwrap(), NCSeries::one(0));
        let flat = Membrane::diangle(2.0, 2.0).unwrap();
        assert_eq!(generating_series_jb(&forms, &flat, 2, &q).unwrap(), NCSeries::one(2));
        let jb = generating_series_jb(&forms, &g, 1, &q).unwrap();
        let direct = crate::membrane::membrane_integral_type_a(&forms[..1], &g, &q).unwrap().value;
        assert!((jb.coeff(&Monomial::plain(&[1], &[1])) - direct).norm() < 1e-14);
        assert!(jb.is_balanced());
    }

    #[test]
    fn shuffle_identity_small() {
        let (_, g, forms) = setup();
        let q = QuadratureConfig::default();
        let r = verify_membrane_shuffle(&forms, 1, &g, &q).unwrap();
        assert!(r.passed(), "{}", r.table());
        assert_eq!(r.checks.len(), 1);
        let r = verify_membrane_shuffle(&forms, 2, &g, &q).unwrap();
        assert!(r.passed() && r.max_residual() < 1e-15);
    }

    #[test]
    fn tag_collapse() {
        let (_, g, forms) = setup();
        let forms3 = vec![forms[0].clone(), forms[1].clone(), forms[0].clone()];
        let q = QuadratureConfig::default();
        let a1 = Region::rect((0.0, 0.4), (0.0, 1.0)).unwrap();
        let a2 = Region::rect((0.4, 1.0), (0.0, 1.0)).unwrap();
        let r1 = Permutation::from_one_line(&[2, 3, 1]).unwrap();
        let r2 = Permutation::from_one_line(&[3, 1, 2]).unwrap();
        let r = verify_tag_collapse(&forms3, &r1, &r2, &a1, &a2, &g, &q).unwrap();
        assert!(r.passed(), "{}", r.table());
    }

    #[test]
    fn series_shuffle_collapses() {
        let (_, g, forms) = setup();
        let q = QuadratureConfig::default();
        let r = verify_series_shuffle(&forms, 0.45, &g, 2, &q).unwrap();
        assert!(r.passed(), "{}", r.table());
        assert!(r.info.values().all(|v| *v > 1e-6), "{}", r.table());
    }

    #[test]
    fn type_a_corner_composition() {
        let (_, g, forms) = setup();
        let q = QuadratureConfig::default();
        let r = verify_type_a_composition(&forms, 0.5, &g, 2, &q).unwrap();
        assert!(r.passed(), "{}", r.table());
    }

    #[test]
    fn homotopy() {
        let (_, g, forms) = setup();
        let q = QuadratureConfig::default();
        assert!(verify_homotopy_invariance(&forms, &g, &g, &q).unwrap().max_residual() == 0.0);
        let g1 = g.reparametrized(Reparam::Power(2.0), Reparam::Sine(0.3)).unwrap();
        let r = verify_homotopy_invariance(&forms, &g, &g1, &q).unwrap();
        assert!(r.passed(), "{}", r.table());
        let r = verify_homotopy_invariance(&forms, &g, &g.slid(0.7).unwrap(), &q).unwrap();
        assert!(r.passed(), "{}", r.table());
    }
}
