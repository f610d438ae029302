//! Iterated integrals of 1-forms along paths in the upper half-plane and their
//! generating series.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::ExpForm1;
use crate::ncring::{shuffle_words, WordSeries};
use crate::quadrature::{geometric_breaks, Estimate, Grid, QuadratureConfig, Substitution};
use crate::report::Report;

type C = Complex64;

pub const MAX_WORD: usize = 5;
pub const MAX_DEPTH: usize = 4;

/// A piecewise smooth path. `None` heights stand for the cusp `i∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    Segment { start: C, end: C },
    /// `x + i·y`, parametrized by `log y` between finite heights and by a
    /// compactified height toward the cusp.
    Vertical { x: f64, y_start: Option<f64>, y_end: Option<f64> },
    Concat(Vec<Path>),
}

impl Path {
    pub fn segment(start: C, end: C) -> Self {
        Path::Segment { start, end }
    }

    pub fn vertical(x: f64, y_start: f64, y_end: f64) -> Result<Self> {
        if !(y_start > 0.0 && y_end > 0.0) {
            return Err(Error::InvalidInput("vertical geodesic heights must be positive".into()));
        }
        Ok(Path::Vertical { x, y_start: Some(y_start), y_end: Some(y_end) })
    }

    pub fn to_cusp(x: f64, y_start: f64) -> Result<Self> {
        if y_start <= 0.0 {
            return Err(Error::InvalidInput("height must be positive".into()));
        }
        Ok(Path::Vertical { x, y_start: Some(y_start), y_end: None })
    }

    pub fn from_cusp(x: f64, y_end: f64) -> Result<Self> {
        if y_end <= 0.0 {
            return Err(Error::InvalidInput("height must be positive".into()));
        }
        Ok(Path::Vertical { x, y_start: None, y_end: Some(y_end) })
    }

    /// Concatenation; consecutive endpoints must agree.
    pub fn concat(paths: Vec<Path>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::InvalidInput("empty concatenation".into()));
        }
        for w in paths.windows(2) {
            if !endpoints_match(w[0].end(), w[1].start()) {
                return Err(Error::EndpointMismatch);
            }
        }
        Ok(Path::Concat(paths))
    }

    /// Start point; `None` is the cusp.
    pub fn start(&self) -> Option<C> {
        match self {
            Path::Segment { start, .. } => Some(*start),
            Path::Vertical { x, y_start, .. } => y_start.map(|y| C::new(*x, y)),
            Path::Concat(v) => v[0].start(),
        }
    }

    pub fn end(&self) -> Option<C> {
        match self {
            Path::Segment { end, .. } => Some(*end),
            Path::Vertical { x, y_end, .. } => y_end.map(|y| C::new(*x, y)),
            Path::Concat(v) => v[v.len() - 1].end(),
        }
    }

    fn pieces(&self) -> Vec<&Path> {
        match self {
            Path::Concat(v) => v.iter().flat_map(|p| p.pieces()).collect(),
            p => vec![p],
        }
    }

    fn touches_cusp(&self) -> bool {
        self.pieces().iter().any(|p| matches!(p, Path::Vertical { y_start: None, .. } | Path::Vertical { y_end: None, .. }))
    }

    /// Breakpoints of one smooth piece on `[0, 1]`.
    fn local_breaks(&self, freq: f64, scale: f64) -> Vec<f64> {
        let uniform = |len: f64| {
            let panels = 1 + (2.0 * PI * freq.max(0.5) * len / 8.0) as usize;
            (0..=panels).map(|k| k as f64 / panels as f64).collect::<Vec<_>>()
        };
        match *self {
            Path::Segment { start, end } => uniform((end - start).norm()),
            Path::Vertical { y_start: Some(a), y_end: Some(b), .. } => uniform((b - a).abs()),
            Path::Vertical { y_start, .. } => {
                let sub = Substitution::Rational { scale, power: 1 };
                let b = geometric_breaks(&sub, 0.05 * scale, 40.0 * scale, 3.0);
                if y_start.is_none() {
                    b.iter().rev().map(|t| 1.0 - t).collect()
                } else {
                    b
                }
            }
            Path::Concat(_) => unreachable!(),
        }
    }

    /// `(z(s), dz/ds)` on one smooth piece.
    fn local_eval(&self, s: f64, scale: f64) -> (C, C) {
        let i = C::new(0.0, 1.0);
        match *self {
            Path::Segment { start, end } => (start + (end - start) * s, end - start),
            Path::Vertical { x, y_start: Some(a), y_end: Some(b) } => {
                let l = (b / a).ln();
                let y = a * (l * s).exp();
                (C::new(x, y), i * y * l)
            }
            Path::Vertical { x, y_start: Some(a), y_end: None } => {
                let (u, du) = Substitution::Rational { scale, power: 1 }.eval(s);
                (C::new(x, a + u), i * du)
            }
            Path::Vertical { x, y_start: None, y_end: Some(b) } => {
                let (u, du) = Substitution::Rational { scale, power: 1 }.eval(1.0 - s);
                (C::new(x, b + u), -i * du)
            }
            _ => unreachable!(),
        }
    }
}

fn endpoints_match(a: Option<C>, b: Option<C>) -> bool {
    match (a, b) {
        (Some(p), Some(q)) => (p - q).norm() <= 1e-12 * (1.0 + p.norm()),
        (None, None) => true,
        _ => false,
    }
}

/// Pulled-back densities `g*ω_k` at the nodes of a grid adapted to the path.
struct Sampled {
    grid: Grid,
    h: Vec<Vec<C>>,
}

fn sample(forms: &[ExpForm1], g: &Path, n: usize) -> Result<Sampled> {
    let freq = forms.iter().flat_map(|f| f.terms.iter().map(|t| t.1)).max().unwrap_or(0) as f64;
    let mut scale = 1.0;
    if g.touches_cusp() {
        if let Some(f) = forms.iter().find(|f| f.terms.iter().any(|t| t.1 == 0 && t.0 != C::new(0.0, 0.0))) {
            return Err(Error::NoDecay(format!("{:?}", f.terms)));
        }
        let nmin = forms.iter().flat_map(|f| f.terms.iter().map(|t| t.1)).filter(|&k| k > 0).min().unwrap_or(1);
        scale = 1.0 / (2.0 * PI * nmin as f64);
    }
    let pieces = g.pieces();
    let mut breaks = vec![0.0];
    for (p, piece) in pieces.iter().enumerate() {
        for b in piece.local_breaks(freq, scale).into_iter().skip(1) {
            breaks.push(p as f64 + b);
        }
    }
    let grid = Grid::new(&breaks, n);
    let mut h = vec![Vec::with_capacity(grid.len()); forms.len()];
    for &t in &grid.nodes {
        let k = (t.floor() as usize).min(pieces.len() - 1);
        let (z, dz) = pieces[k].local_eval(t - k as f64, scale);
        for (f, hk) in forms.iter().zip(h.iter_mut()) {
            hk.push(f.eval(z) * dz);
        }
    }
    Ok(Sampled { grid, h })
}

fn chain(s: &Sampled, word: &[usize]) -> C {
    if word.is_empty() {
        return C::new(1.0, 0.0);
    }
    let mut f = s.h[word[0]].clone();
    for &k in &word[1..] {
        let g = s.grid.cumulative(&f);
        f = g.iter().zip(&s.h[k]).map(|(a, b)| a * b).collect();
    }
    s.grid.integrate(&f)
}

/// `∫_{0<t_1<...<t_m<1} ∏ g*ω_i(t_i)` with an error estimate from a refined rule.
pub fn iterated_path_integral(forms: &[ExpForm1], g: &Path, quad: &QuadratureConfig) -> Result<Estimate> {
    quad.validate()?;
    if forms.is_empty() || forms.len() > MAX_WORD {
        return Err(Error::InvalidInput(format!("word length {} outside 1..={MAX_WORD}", forms.len())));
    }
    let word: Vec<usize> = (0..forms.len()).collect();
    let coarse = chain(&sample(forms, g, quad.nodes_per_dim)?, &word);
    let fine = chain(&sample(forms, g, quad.refined_nodes())?, &word);
    Estimate { value: fine, error: (fine - coarse).norm() }.check(quad.tolerance)
}

fn series_at(forms: &[ExpForm1], g: &Path, depth: usize, n: usize) -> Result<WordSeries> {
    let s = sample(forms, g, n)?;
    let mut terms = BTreeMap::new();
    terms.insert(Vec::new(), C::new(1.0, 0.0));
    let mut stack: Vec<(Vec<u32>, Vec<C>)> = vec![(Vec::new(), Vec::new())];
    while let Some((word, f)) = stack.pop() {
        if word.len() == depth {
            continue;
        }
        let base = if word.is_empty() { None } else { Some(s.grid.cumulative(&f)) };
        for (k, hk) in s.h.iter().enumerate() {
            let next: Vec<C> = match &base {
                None => hk.clone(),
                Some(b) => b.iter().zip(hk).map(|(a, c)| a * c).collect(),
            };
            let mut w = word.clone();
            w.push(k as u32 + 1);
            terms.insert(w.clone(), s.grid.integrate(&next));
            stack.push((w, next));
        }
    }
    Ok(WordSeries { degree: depth, terms })
}

/// `F = 1 + Σ X_i ∫ω_i + Σ X_iX_j ∫ω_iω_j + …` truncated at `depth`, generators numbered from 1.
pub fn generating_series_f(forms: &[ExpForm1], g: &Path, depth: usize, quad: &QuadratureConfig) -> Result<WordSeries> {
    quad.validate()?;
    if depth > MAX_DEPTH {
        return Err(Error::InvalidInput(format!("depth {depth} > {MAX_DEPTH}")));
    }
    let coarse = series_at(forms, g, depth, quad.nodes_per_dim)?;
    let fine = series_at(forms, g, depth, quad.refined_nodes())?;
    let err = fine.max_abs_diff(&coarse);
    let scale = fine.terms.values().map(|c| c.norm()).fold(1.0, f64::max);
    if err > quad.tolerance * scale {
        return Err(Error::NonConvergence { estimate: err, tolerance: quad.tolerance });
    }
    Ok(fine)
}

/// Word integrals along a path at fixed resolution, empty word giving 1.
fn word_value(forms: &[ExpForm1], g: &Path, word: &[usize], n: usize) -> Result<C> {
    Ok(chain(&sample(forms, g, n)?, word))
}

/// Checks `∫_{g1 g2} ω_1…ω_m = Σ_i ∫_{g1} ω_1…ω_i · ∫_{g2} ω_{i+1}…ω_m` and
/// `F_{g1 g2} = F_{g1} F_{g2}`.
pub fn verify_composition(forms: &[ExpForm1], g1: &Path, g2: &Path, quad: &QuadratureConfig) -> Result<Report> {
    quad.validate()?;
    if !endpoints_match(g1.end(), g2.start()) {
        return Err(Error::EndpointMismatch);
    }
    if forms.is_empty() || forms.len() > MAX_WORD {
        return Err(Error::InvalidInput("word length".into()));
    }
    let n = quad.refined_nodes();
    let whole = Path::concat(vec![g1.clone(), g2.clone()])?;
    let m = forms.len();
    let word: Vec<usize> = (0..m).collect();
    let lhs = word_value(forms, &whole, &word, n)?;
    let s1 = sample(forms, g1, n)?;
    let s2 = sample(forms, g2, n)?;
    let rhs: C = (0..=m).map(|i| chain(&s1, &word[..i]) * chain(&s2, &word[i..])).sum();
    let mut r = Report::new();
    r.push("word", (lhs - rhs).norm(), 1e-10 * lhs.norm().max(1.0));
    let depth = m.min(MAX_DEPTH);
    let f = series_at(forms, &whole, depth, n)?;
    let f12 = series_at(forms, g1, depth, n)?.mul(&series_at(forms, g2, depth, n)?)?;
    let scale = f.terms.values().map(|c| c.norm()).fold(1.0, f64::max);
    r.push("series", f.max_abs_diff(&f12), 1e-10 * scale);
    Ok(r)
}

/// Checks `∫ω_1…ω_i · ∫ω_{i+1}…ω_m = Σ_{σ ∈ sh(i, m−i)} ∫` of the shuffled word.
pub fn verify_path_shuffle(forms: &[ExpForm1], g: &Path, i: usize, quad: &QuadratureConfig) -> Result<Report> {
    quad.validate()?;
    let m = forms.len();
    if i > m || m > MAX_WORD {
        return Err(Error::InvalidInput(format!("split {i} of a word of length {m}")));
    }
    let s = sample(forms, g, quad.refined_nodes())?;
    let u: Vec<u32> = (0..i as u32).collect();
    let v: Vec<u32> = (i as u32..m as u32).collect();
    let lhs = chain(&s, &(0..i).collect::<Vec<_>>()) * chain(&s, &(i..m).collect::<Vec<_>>());
    let rhs: C = shuffle_words(&u, &v)
        .iter()
        .map(|w| chain(&s, &w.iter().map(|&k| k as usize).collect::<Vec<_>>()))
        .sum();
    let mut r = Report::new();
    r.push(format!("split {i}/{m}"), (lhs - rhs).norm(), 1e-9 * lhs.norm().max(1.0));
    Ok(r)
}
