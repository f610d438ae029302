//! Type-b membrane integrals
//! `∫_{t1,1<…<t1,m} ∫_{t2,1<…<t2,m} ∏_j g*ω_j(t1,ρ1(j), t2,ρ2(j))`.
//!
//! Routes:
//! * `Tensor`: panel-ordered tuples in `t1` (spectral simplex rule) times a
//!   cumulative chain in `t2`; any membrane, `m ≤ 3`.
//! * `Separable`: bare boxes, where each exponential term factors into two chains.
//! * `ExactHeight`: bare diangles, where the height simplex of `y e^{-νy}` factors
//!   is summed in closed form and only `t1` is discretized; `m ≤ 4`.
//! * `MonteCarlo`: fixed-seed sampling of both simplices.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geometry::{Axis, Membrane, Mobius, Shape};
use super::restriction::DomainRestriction;
use crate::error::{Error, Result};
use crate::forms::ExpForm2;
use crate::quadrature::{
    factorial, merge_breaks, monte_carlo_simplex_pair, CompensatedSum, Estimate, Grid, QuadratureConfig, SimplexPoints,
    SimplexRule, Substitution,
};
use crate::shuffle::Permutation;

type C = Complex64;

pub const MAX_TENSOR: usize = 3;
pub const MAX_EXACT: usize = 4;
pub const MONTE_CARLO_TOLERANCE: f64 = 1e-3;
/// Width in `log r` of one `t1` panel on a diangle.
const FAN_PANEL_WIDTH: f64 = 3.5;
/// Width in `ln r` of the cells used by the exact-height route.
const EXACT_CELL_WIDTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Auto,
    Tensor,
    Separable,
    ExactHeight,
    MonteCarlo,
}

/// `∫_{0<y_1<…<y_m<∞} ∏_k y_k e^{-ν_k y_k} dy`, all `ν_k > 0`.
pub fn exact_height(nu: &[f64]) -> f64 {
    // T_k(y) = ∫_y^∞ s e^{-ν_k s} T_{k+1}(s) ds = e^{-S_k y} P_k(y)
    let mut p = [0.0f64; MAX_EXACT + 2];
    let mut q = [0.0f64; MAX_EXACT + 2];
    let mut deg = 0;
    p[0] = 1.0;
    let mut s = 0.0;
    for &v in nu.iter().rev() {
        s += v;
        let inv = 1.0 / s;
        // q(s) = s·p(s)
        q[0] = 0.0;
        q[1..=deg + 1].copy_from_slice(&p[..=deg]);
        let qdeg = deg + 1;
        // ∫_y^∞ s^j e^{-S s} ds = e^{-S y} Σ_{l≤j} j!/l! y^l / S^{j-l+1}
        for l in 0..=qdeg {
            let mut acc = 0.0;
            let mut coef = inv; // j = l term: 1/S
            for j in l..=qdeg {
                acc += q[j] * coef;
                coef *= (j + 1) as f64 * inv;
            }
            p[l] = acc;
        }
        deg = qdeg;
    }
    p[0]
}

/// Reference sum over maps `f(j) ≤ j`, for testing the recursion.
pub fn exact_height_reference(nu: &[f64]) -> f64 {
    let m = nu.len();
    let suffix: Vec<f64> = (0..m).map(|k| nu[k..].iter().sum()).collect();
    let mut total = 0.0;
    let mut f = vec![0usize; m];
    loop {
        let mut d = vec![0usize; m];
        for &k in &f {
            d[k] += 1;
        }
        total += (0..m).map(|k| factorial(d[k]) / suffix[k].powi(1 + d[k] as i32)).product::<f64>();
        // next map with f(j) ≤ j
        let mut j = 0;
        loop {
            if j == m {
                return total;
            }
            if f[j] < j {
                f[j] += 1;
                break;
            }
            f[j] = 0;
            j += 1;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    c: C,
    a1: f64,
    a2: f64,
}

fn terms_of(f: &ExpForm2) -> Vec<Term> {
    f.terms.iter().map(|t| Term { c: t.coeff, a1: t.emb.0, a2: t.emb.1 }).collect()
}

/// Positive decay rates per factor over all terms, `None` when some form has a constant term.
fn rates(forms: &[ExpForm2]) -> (Vec<f64>, Vec<f64>, bool) {
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    let mut all_decay = true;
    for f in forms {
        for t in &f.terms {
            if t.alpha.is_zero() {
                all_decay = false;
            } else {
                r1.push(2.0 * PI * t.emb.0);
                r2.push(2.0 * PI * t.emb.1);
            }
        }
    }
    (r1, r2, all_decay)
}

fn minmax(v: &[f64]) -> Option<(f64, f64)> {
    if v.is_empty() {
        None
    } else {
        Some((v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(0.0, f64::max)))
    }
}

fn uniform(panels: usize) -> Vec<f64> {
    (0..=panels).map(|k| k as f64 / panels as f64).collect()
}

/// Graded `t1` breaks of the standard triangle around the columns under the real poles of the
/// action, so that panels shrink to the distance of each pole from the arc.
fn pole_breaks(action: &[Mobius; 2]) -> Vec<f64> {
    let mut out = Vec::new();
    for m in action {
        if m.c == 0.0 {
            continue;
        }
        let q = -m.d / m.c;
        if !(q > 0.0 && q < 1.0) {
            continue;
        }
        let t = (1.0 - 2.0 * q).acos() / PI;
        let dist = (2.0 / PI) * (q * (1.0 - q)).sqrt();
        let mut w = dist;
        while w < 0.05 {
            out.extend([t - w, t + w].into_iter().filter(|x| *x > 0.0 && *x < 1.0));
            w *= 2.0;
        }
        out.push(t);
    }
    out
}

/// Discretization at one resolution.
struct Level {
    g: Membrane,
    xg: Grid,
    yg: Grid,
    dens: Option<Vec<Vec<C>>>,
    rules: HashMap<usize, SimplexRule>,
    /// `(Y, Y')` at the nodes of each axis of a bare box.
    boxed: Option<[Vec<(f64, f64)>; 2]>,
    /// `t1` cells of the exact-height route and nested rules per `(cell, k)`.
    cells: Vec<f64>,
    cell_rules: HashMap<(usize, usize), SimplexPoints>,
    n: usize,
}

impl Level {
    fn rule(&mut self, m: usize) -> &SimplexRule {
        let xg = &self.xg;
        self.rules.entry(m).or_insert_with(|| SimplexRule::new(xg, m))
    }

    fn cell_rule(&mut self, cell: usize, k: usize) -> &SimplexPoints {
        let (a, b, n) = (self.cells[cell], self.cells[cell + 1], self.n);
        self.cell_rules.entry((cell, k)).or_insert_with(|| SimplexPoints::new(a, b, k, n, 1))
    }
}

/// Cached evaluator of type-b integrals of words in a fixed list of forms over one membrane.
pub struct Integrator {
    forms: Vec<ExpForm2>,
    terms: Vec<Vec<Term>>,
    g: Membrane,
    quad: QuadratureConfig,
    method: Method,
    cuts: (Vec<f64>, Vec<f64>),
    levels: Vec<Level>,
    cache: HashMap<(Vec<usize>, Vec<usize>, Vec<usize>, String, Method), Estimate>,
}

impl Integrator {
    /// `cuts` are extra breakpoints in `t1` and `t2`; every restriction used later must
    /// have its rectangle edges among them.
    pub fn new(forms: &[ExpForm2], g: &Membrane, quad: &QuadratureConfig, method: Method, cuts: (Vec<f64>, Vec<f64>)) -> Result<Self> {
        quad.validate()?;
        if g.touches_infinity() && forms.iter().any(|f| !f.decays()) && g.plain_box().is_none() {
            return Err(Error::NoDecay("a form with a constant term on a membrane reaching the cusp ∞".into()));
        }
        let mut it = Integrator {
            forms: forms.to_vec(),
            terms: forms.iter().map(terms_of).collect(),
            g: *g,
            quad: *quad,
            method,
            cuts,
            levels: Vec::new(),
            cache: HashMap::new(),
        };
        for n in [quad.nodes_per_dim, quad.refined_nodes()] {
            let lvl = it.build_level(n);
            it.levels.push(lvl);
        }
        Ok(it)
    }

    pub fn forms(&self) -> &[ExpForm2] {
        &self.forms
    }

    pub fn membrane(&self) -> &Membrane {
        &self.g
    }

    fn build_level(&self, n: usize) -> Level {
        let (r1, r2, _) = rates(&self.forms);
        let sub0 = self.quad.substitution;
        let with_scale = |s: f64| sub0.with_scale(s);
        let (g, xb, yb): (Membrane, Vec<f64>, Vec<f64>) = match self.g.shape {
            Shape::Box { axes } if self.g.action.is_none() => {
                let mut g = self.g;
                let mut br = Vec::new();
                let mut new_axes = axes;
                for (k, rk) in [&r1, &r2].iter().enumerate() {
                    let (lo, hi) = minmax(rk).unwrap_or((1.0, 1.0));
                    let scale = 1.0 / (lo * hi).sqrt();
                    new_axes[k] = axes[k].with_substitution(with_scale(scale));
                    br.push(new_axes[k].breaks(0.05 / hi, 60.0 / lo, hi));
                }
                g.shape = Shape::Box { axes: new_axes };
                (g, br[0].clone(), br[1].clone())
            }
            Shape::Diangle { r_start, r_end, .. } if self.g.action.is_none() => {
                let (rmin, rmax) = (r_start.min(r_end), r_start.max(r_end));
                let nu: Vec<f64> = r1.iter().zip(&r2).flat_map(|(a, b)| [a * rmin + b, a * rmax + b]).collect();
                let (lo, hi) = minmax(&nu).unwrap_or((1.0, 1.0));
                let scale = 1.0 / (lo * hi).sqrt();
                let g = self.g.with_substitution(with_scale(scale));
                let height = match g.shape {
                    Shape::Diangle { height, .. } => height,
                    _ => unreachable!(),
                };
                let panels = ((r_end / r_start).ln().abs() / FAN_PANEL_WIDTH).ceil().max(1.0) as usize;
                (g, uniform(panels), height.breaks(0.05 / hi, 60.0 / lo, hi))
            }
            _ => {
                let g = self.g.with_substitution(with_scale(1.0));
                let yb = Axis::to_cusp().with_substitution(with_scale(1.0)).breaks(1e-3, 1e3, 1.0);
                let xb = match self.g.shape {
                    Shape::Box { axes: [a, _] } => a.with_substitution(with_scale(1.0)).breaks(1e-3, 1e3, 1.0),
                    Shape::Diangle { r_start, r_end, .. } => {
                        uniform(((r_end / r_start).ln().abs() / FAN_PANEL_WIDTH).ceil().max(1.0) as usize)
                    }
                    Shape::Triangle { .. } => match self.g.action {
                        Some(act) => merge_breaks(&uniform(24), &pole_breaks(&act)),
                        None => uniform(4),
                    },
                };
                let yb = match self.g.shape {
                    Shape::Box { axes: [_, b] } => b.with_substitution(with_scale(1.0)).breaks(1e-3, 1e3, 1.0),
                    _ => yb,
                };
                (g, xb, yb)
            }
        };
        let pull = |b: Vec<f64>, k: usize| -> Vec<f64> { b.into_iter().map(|t| self.g.reparam[k].inverse(t)).collect() };
        let (xb, yb) = (pull(xb, 0), pull(yb, 1));
        let xg = Grid::new(&merge_breaks(&xb, &self.cuts.0), n);
        let yg = Grid::new(&merge_breaks(&yb, &self.cuts.1), n);
        let boxed = g.plain_box().map(|axes| {
            [xg.nodes.iter().map(|&t| axes[0].eval(t)).collect(), yg.nodes.iter().map(|&t| axes[1].eval(t)).collect()]
        });
        let cells = match self.g.shape {
            Shape::Diangle { r_start, r_end, .. } => {
                let p = ((r_end / r_start).ln().abs() / EXACT_CELL_WIDTH).ceil().max(1.0) as usize;
                merge_breaks(&uniform(p), &self.cuts.0)
            }
            _ => vec![0.0, 1.0],
        };
        Level { g, xg, yg, dens: None, rules: HashMap::new(), boxed, cells, cell_rules: HashMap::new(), n }
    }

    fn resolve(&self, m: usize, restr: Option<&DomainRestriction>) -> Result<Method> {
        let restricted = restr.is_some_and(|r| !r.is_trivial());
        let x_only = restr.is_none_or(|r| r.is_x_only());
        let m_ok = |method: Method| -> Result<Method> {
            match method {
                Method::Tensor if m > MAX_TENSOR => Err(Error::InvalidInput(format!("tensor route limited to m ≤ {MAX_TENSOR}"))),
                Method::ExactHeight if m > MAX_EXACT => Err(Error::InvalidInput(format!("exact route limited to m ≤ {MAX_EXACT}"))),
                Method::ExactHeight if self.g.plain_fan().is_none() || !x_only || !self.forms.iter().all(ExpForm2::decays) => {
                    Err(Error::InvalidInput("exact route needs a bare diangle, decaying forms and t1-only restrictions".into()))
                }
                Method::Separable if self.g.plain_box().is_none() || restricted => {
                    Err(Error::InvalidInput("separable route needs a bare box without restriction".into()))
                }
                other => Ok(other),
            }
        };
        match self.method {
            Method::Auto => {
                if self.g.plain_box().is_some() && !restricted {
                    Ok(Method::Separable)
                } else if self.g.plain_fan().is_some() && x_only && m <= MAX_EXACT && self.forms.iter().all(ExpForm2::decays) {
                    Ok(Method::ExactHeight)
                } else if m <= MAX_TENSOR {
                    Ok(Method::Tensor)
                } else {
                    Ok(Method::MonteCarlo)
                }
            }
            other => m_ok(other),
        }
    }

    /// Type-b integral of the word `word` (indices into the form list).
    pub fn integral(
        &mut self,
        word: &[usize],
        rho1: &Permutation,
        rho2: &Permutation,
        restr: Option<&DomainRestriction>,
    ) -> Result<Estimate> {
        let m = word.len();
        if rho1.len() != m || rho2.len() != m {
            return Err(Error::SizeMismatch(rho1.len().max(rho2.len()), m));
        }
        if let Some(&k) = word.iter().find(|&&k| k >= self.forms.len()) {
            return Err(Error::InvalidInput(format!("form index {k} out of range")));
        }
        if let Some(r) = restr {
            if r.len() != m {
                return Err(Error::SizeMismatch(r.len(), m));
            }
            let (xs, ys) = r.edges();
            let known = |v: &[f64], cuts: &[f64]| v.iter().all(|e| *e == 0.0 || *e == 1.0 || cuts.iter().any(|c| (c - e).abs() < 1e-14));
            if !known(&xs, &self.cuts.0) || !known(&ys, &self.cuts.1) {
                return Err(Error::InvalidInput("restriction edges must be among the integrator cuts".into()));
            }
        }
        if m == 0 {
            return Ok(Estimate::exact(C::new(1.0, 0.0)));
        }
        if self.g.is_degenerate() {
            return Ok(Estimate::exact(C::new(0.0, 0.0)));
        }
        let method = self.resolve(m, restr)?;
        let rkey = restr.filter(|r| !r.is_trivial()).map(|r| r.key()).unwrap_or_default();
        let key = (word.to_vec(), rho1.as_slice().to_vec(), rho2.as_slice().to_vec(), rkey, method);
        if let Some(e) = self.cache.get(&key) {
            return Ok(*e);
        }
        let restr = restr.filter(|r| !r.is_trivial());
        let est = match method {
            Method::MonteCarlo => {
                let (v, se) = self.monte_carlo(word, rho1, rho2, restr);
                Estimate { value: v, error: se }.check(MONTE_CARLO_TOLERANCE.max(self.quad.tolerance))?
            }
            _ => {
                let coarse = self.at_level(0, method, word, rho1, rho2, restr);
                let fine = self.at_level(1, method, word, rho1, rho2, restr);
                let mut est = Estimate { value: fine, error: (fine - coarse).norm() };
                // up to two further refinements before giving up
                let mut lvl = 1;
                while est.error > self.quad.tolerance * est.value.norm().max(1.0) && lvl < 3 {
                    lvl += 1;
                    if self.levels.len() <= lvl {
                        let prev = self.levels[lvl - 1].n;
                        let next = self.build_level(prev + prev.div_ceil(2));
                        self.levels.push(next);
                    }
                    let v = self.at_level(lvl, method, word, rho1, rho2, restr);
                    est = Estimate { value: v, error: (v - est.value).norm() };
                }
                est.check(self.quad.tolerance)?
            }
        };
        self.cache.insert(key, est);
        Ok(est)
    }

    fn at_level(&mut self, lvl: usize, method: Method, word: &[usize], rho1: &Permutation, rho2: &Permutation, restr: Option<&DomainRestriction>) -> C {
        match method {
            Method::Separable => self.separable(lvl, word, rho1, rho2),
            Method::ExactHeight => self.exact(lvl, word, rho1, rho2, restr),
            _ => self.tensor(lvl, word, rho1, rho2, restr),
        }
    }

    fn separable(&mut self, lvl: usize, word: &[usize], rho1: &Permutation, rho2: &Permutation) -> C {
        let level = &self.levels[lvl];
        let nodes = level.boxed.as_ref().expect("box nodes");
        let m = word.len();
        let inv = [rho1.invert(), rho2.invert()];
        let i = C::new(0.0, 1.0);
        let mut total = CompensatedSum::default();
        for choice in term_choices(word.iter().map(|&k| self.terms[k].len()).collect()) {
            let ts: Vec<Term> = (0..m).map(|j| self.terms[word[j]][choice[j]]).collect();
            let mut value: C = ts.iter().map(|t| t.c).product();
            for axis in 0..2 {
                let grid = if axis == 0 { &level.xg } else { &level.yg };
                let hs: Vec<Vec<C>> = (0..m)
                    .map(|p| {
                        let t = ts[inv[axis].apply(p)];
                        let a = if axis == 0 { t.a1 } else { t.a2 };
                        nodes[axis].iter().map(|&(y, dy)| i * dy * (-2.0 * PI * a * y).exp()).collect()
                    })
                    .collect();
                let refs: Vec<&[C]> = hs.iter().map(|h| h.as_slice()).collect();
                value *= crate::quadrature::iterated_1d(grid, &refs);
            }
            total.add(value);
        }
        total.value()
    }

    fn exact(&mut self, lvl: usize, word: &[usize], rho1: &Permutation, rho2: &Permutation, restr: Option<&DomainRestriction>) -> C {
        let m = word.len();
        let choices = term_choices(word.iter().map(|&k| self.terms[k].len()).collect());
        let terms: Vec<Vec<Term>> = choices.iter().map(|ch| (0..m).map(|j| self.terms[word[j]][ch[j]]).collect()).collect();
        let (r0, r1) = self.levels[lvl].g.plain_fan().expect("bare diangle");
        let l = (r1 / r0).ln();
        let ncell = self.levels[lvl].cells.len() - 1;
        let r1inv = rho1.invert();
        let r2inv = rho2.invert();
        let mut total = CompensatedSum::default();
        let mut nu = [0.0f64; MAX_EXACT];
        let mut nu_y = [0.0f64; MAX_EXACT];
        let mut rdr = [(0.0f64, 0.0f64); MAX_EXACT];
        // Sorted position q carries form r1inv(q); assign nondecreasing cells to positions.
        for assign in nondecreasing(m, ncell) {
            let level = &self.levels[lvl];
            let ok = (0..m).all(|q| {
                let mid = 0.5 * (level.cells[assign[q]] + level.cells[assign[q] + 1]);
                restr.is_none_or(|r| r.contains(r1inv.apply(q), mid, 0.5))
            });
            if !ok {
                continue;
            }
            let mut runs: Vec<(usize, usize)> = Vec::new();
            for &c in &assign {
                match runs.last_mut() {
                    Some((cell, k)) if *cell == c => *k += 1,
                    _ => runs.push((c, 1)),
                }
            }
            let rules: Vec<SimplexPoints> = runs.iter().map(|&(c, k)| self.levels[lvl].cell_rule(c, k).clone()).collect();
            let mut idx = vec![0usize; rules.len()];
            'outer: loop {
                let mut w = 1.0;
                let mut q = 0;
                for (rule, &i) in rules.iter().zip(&idx) {
                    w *= rule.weights[i];
                    for &x in rule.point(i) {
                        let r = r0 * (l * x).exp();
                        rdr[q] = (r, r * l);
                        q += 1;
                    }
                }
                for ts in &terms {
                    let mut pre = C::new(w, 0.0);
                    for j in 0..m {
                        let (r, dr) = rdr[rho1.apply(j)];
                        nu[j] = 2.0 * PI * (ts[j].a1 * r + ts[j].a2);
                        pre *= -ts[j].c * dr;
                    }
                    for p in 0..m {
                        nu_y[p] = nu[r2inv.apply(p)];
                    }
                    total.add(pre * exact_height(&nu_y[..m]));
                }
                for d in (0..idx.len()).rev() {
                    idx[d] += 1;
                    if idx[d] < rules[d].len() {
                        continue 'outer;
                    }
                    idx[d] = 0;
                }
                break;
            }
        }
        total.value()
    }

    fn densities(&mut self, lvl: usize) {
        if self.levels[lvl].dens.is_some() {
            return;
        }
        let level = &self.levels[lvl];
        let ny = level.yg.len();
        let dens: Vec<Vec<C>> = self
            .forms
            .iter()
            .map(|f| {
                let mut d = vec![C::new(0.0, 0.0); level.xg.len() * ny];
                for (xi, &x) in level.xg.nodes.iter().enumerate() {
                    for (yi, &y) in level.yg.nodes.iter().enumerate() {
                        d[xi * ny + yi] = level.g.density(f, x, y);
                    }
                }
                d
            })
            .collect();
        self.levels[lvl].dens = Some(dens);
    }

    fn tensor(&mut self, lvl: usize, word: &[usize], rho1: &Permutation, rho2: &Permutation, restr: Option<&DomainRestriction>) -> C {
        self.densities(lvl);
        let m = word.len();
        let rule = self.levels[lvl].rule(m).clone();
        let level = &self.levels[lvl];
        let dens = level.dens.as_ref().unwrap();
        let (xg, yg) = (&level.xg, &level.yg);
        let ny = yg.len();
        let masks: Option<Vec<Vec<bool>>> = restr.map(|r| {
            (0..m)
                .map(|j| {
                    let mut v = vec![false; xg.len() * ny];
                    for (xi, &x) in xg.nodes.iter().enumerate() {
                        for (yi, &y) in yg.nodes.iter().enumerate() {
                            v[xi * ny + yi] = r.contains(j, x, y);
                        }
                    }
                    v
                })
                .collect()
        });
        let r1 = rho1.as_slice();
        let r2inv = rho2.invert();
        let mut f = vec![C::new(0.0, 0.0); ny];
        let mut tmp = vec![C::new(0.0, 0.0); ny];
        let mut total = CompensatedSum::default();
        for k in 0..rule.len() {
            let tup = rule.tuple(k);
            for p in 0..m {
                let j = r2inv.apply(p);
                let xi = tup[r1[j]] as usize;
                let row = &dens[word[j]][xi * ny..(xi + 1) * ny];
                let mrow = masks.as_ref().map(|ms| &ms[j][xi * ny..(xi + 1) * ny]);
                if p == 0 {
                    f.copy_from_slice(row);
                } else {
                    yg.cumulative_into(&f, &mut tmp);
                    for y in 0..ny {
                        f[y] = tmp[y] * row[y];
                    }
                }
                if let Some(mr) = mrow {
                    for y in 0..ny {
                        if !mr[y] {
                            f[y] = C::new(0.0, 0.0);
                        }
                    }
                }
            }
            total.add(yg.integrate(&f) * rule.weights[k]);
        }
        total.value()
    }

    fn monte_carlo(&self, word: &[usize], rho1: &Permutation, rho2: &Permutation, restr: Option<&DomainRestriction>) -> (C, f64) {
        let g = self.levels[1].g;
        let m = word.len();
        let f = |xs: &[f64], ys: &[f64]| -> C {
            let mut v = C::new(1.0, 0.0);
            for j in 0..m {
                let (x, y) = (xs[rho1.apply(j)], ys[rho2.apply(j)]);
                if let Some(r) = restr {
                    if !r.contains(j, x, y) {
                        return C::new(0.0, 0.0);
                    }
                }
                v *= g.density(&self.forms[word[j]], x, y);
            }
            v
        };
        monte_carlo_simplex_pair(m, self.quad.monte_carlo_samples, self.quad.seed, &f)
    }

    /// Pulled-back density used by the integrator (after its own height reparametrization).
    pub fn density(&self, k: usize, t1: f64, t2: f64) -> C {
        self.levels[1].g.density(&self.forms[k], t1, t2)
    }
}

/// Mixed-radix enumeration of term choices.
/// Nondecreasing sequences of length `m` in `0..k`.
fn nondecreasing(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                let lo = v.last().copied().unwrap_or(0);
                (lo..k).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

fn term_choices(sizes: Vec<usize>) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for s in sizes {
        out = out.into_iter().flat_map(|v| (0..s).map(move |k| {
            let mut w = v.clone();
            w.push(k);
            w
        })).collect();
    }
    out
}

/// Reference value by nested Gauss–Legendre over all `2m` parameters (`m ≤ 3`),
/// independent of the routes above.
pub fn nested_reference(
    forms: &[ExpForm2],
    rho1: &Permutation,
    rho2: &Permutation,
    g: &Membrane,
    restr: Option<&DomainRestriction>,
    n: usize,
    panels: usize,
) -> C {
    let m = forms.len();
    let g = g.with_substitution(Substitution::Rational { scale: 0.1, power: 1 });
    let f = |xs: &[f64], ys: &[f64]| -> C {
        let mut v = C::new(1.0, 0.0);
        for j in 0..m {
            let (x, y) = (xs[rho1.apply(j)], ys[rho2.apply(j)]);
            if let Some(r) = restr {
                if !r.contains(j, x, y) {
                    return C::new(0.0, 0.0);
                }
            }
            v *= g.density(&forms[j], x, y);
        }
        v
    };
    crate::quadrature::nested_simplex_pair(m, n, panels, &f)
}

pub fn membrane_integral_with(
    forms: &[ExpForm2],
    rho1: &Permutation,
    rho2: &Permutation,
    g: &Membrane,
    restr: Option<&DomainRestriction>,
    quad: &QuadratureConfig,
    method: Method,
) -> Result<Estimate> {
    let cuts = restr.map(|r| r.edges()).unwrap_or_default();
    let mut it = Integrator::new(forms, g, quad, method, cuts)?;
    let word: Vec<usize> = (0..forms.len()).collect();
    it.integral(&word, rho1, rho2, restr)
}

pub fn membrane_integral_type_a(forms: &[ExpForm2], g: &Membrane, quad: &QuadratureConfig) -> Result<Estimate> {
    let id = Permutation::identity(forms.len());
    membrane_integral_with(forms, &id, &id, g, None, quad, Method::Auto)
}

pub fn membrane_integral_type_b(
    forms: &[ExpForm2],
    rho1: &Permutation,
    rho2: &Permutation,
    g: &Membrane,
    quad: &QuadratureConfig,
) -> Result<Estimate> {
    membrane_integral_with(forms, rho1, rho2, g, None, quad, Method::Auto)
}

pub fn membrane_integral_restricted(
    forms: &[ExpForm2],
    rho1: &Permutation,
    rho2: &Permutation,
    g: &Membrane,
    restriction: &DomainRestriction,
    quad: &QuadratureConfig,
) -> Result<Estimate> {
    membrane_integral_with(forms, rho1, rho2, g, Some(restriction), quad, Method::Auto)
}

/// `m!²`-normalized volume check helper: the type-b integral of constant densities.
pub fn simplex_pair_volume(m: usize) -> f64 {
    1.0 / (factorial(m) * factorial(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;
    use crate::shuffle::all_permutations;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn exact_height_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 1..=MAX_EXACT {
            for _ in 0..20 {
                let nu: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..5.0)).collect();
                let a = exact_height(&nu);
                let b = exact_height_reference(&nu);
                assert!((a - b).abs() < 1e-13 * b.abs(), "{nu:?} {a} {b}");
            }
        }
        assert!((exact_height(&[2.0]) - 0.25).abs() < 1e-16);
    }

    #[test]
    fn unit_box_constant_forms() {
        let k = make_field(2).unwrap();
        let g = Membrane::unit_box();
        for (m, expect) in [(1, -1.0), (2, 0.25), (3, -1.0 / 36.0)] {
            let forms = vec![ExpForm2::omega0(k.field); m];
            let id = Permutation::identity(m);
            for method in [Method::Auto, Method::Tensor, Method::Separable] {
                let v = membrane_integral_with(&forms, &id, &id, &g, None, &q(), method).unwrap();
                assert!((v.value - C::new(expect, 0.0)).norm() < 1e-13, "{m} {method:?} {}", v.value);
            }
        }
        let forms = vec![ExpForm2::omega0(k.field); 2];
        for r1 in all_permutations(2) {
            for r2 in all_permutations(2) {
                let v = membrane_integral_type_b(&forms, &r1, &r2, &g, &q()).unwrap();
                assert!((v.value.re - 0.25).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn box_single_exponential_closed_form() {
        let k = make_field(5).unwrap();
        let f = ExpForm2::single(k.elem(1, 1), C::new(0.5, -1.0)).unwrap();
        let (a1, a2) = f.terms[0].emb;
        let one = |a: f64| ((-2.0 * PI * a).exp() - (-4.0 * PI * a).exp()) / (2.0 * PI * a);
        let exact = -C::new(0.5, -1.0) * one(a1) * one(a2);
        let id = Permutation::identity(1);
        for method in [Method::Tensor, Method::Separable] {
            let v = membrane_integral_with(&[f.clone()], &id, &id, &Membrane::unit_box(), None, &q(), method).unwrap();
            assert!((v.value - exact).norm() < 1e-14, "{method:?}");
        }
    }

    #[test]
    fn unit_diangle_closed_form() {
        let k = make_field(2).unwrap();
        let g = Membrane::diangle_unit(&k, &k.eps).unwrap();
        let (u1, u2) = k.eps.embed();
        for alpha in [k.elem(1, 0), k.elem(3, 1), k.elem(5, 3)] {
            let (a1, a2) = alpha.embed();
            let exact = C::new(-1.0 / (4.0 * PI * PI), 0.0) * ((u2 * u2 - u1 * u1) / ((a1 * u1 + a2 * u2) * (a1 * u2 + a2 * u1)));
            let f = ExpForm2::single(alpha, C::new(1.0, 0.0)).unwrap();
            let id = Permutation::identity(1);
            for method in [Method::Tensor, Method::ExactHeight] {
                let v = membrane_integral_with(&[f.clone()], &id, &id, &g, None, &q(), method).unwrap();
                assert!((v.value - exact).norm() < 1e-12 * exact.norm(), "{method:?} {} {}", v.value, exact);
            }
        }
    }

    fn diangle_forms(k: &crate::quadfield::FieldContext) -> Vec<ExpForm2> {
        vec![
            ExpForm2::single(k.elem(1, 0), C::new(1.0, 0.0)).unwrap(),
            ExpForm2::new(k.field, vec![(C::new(0.5, 0.5), k.elem(2, 1)), (C::new(-0.3, 0.0), k.elem(3, 2))]).unwrap(),
            ExpForm2::single(k.elem(2, -1), C::new(0.0, 1.0)).unwrap(),
        ]
    }

    #[test]
    fn routes_agree_on_diangle() {
        let k = make_field(2).unwrap();
        let g = Membrane::diangle(0.3, 4.0).unwrap();
        let forms = diangle_forms(&k);
        for m in 1..=3 {
            for r1 in all_permutations(m) {
                for r2 in all_permutations(m) {
                    let t = membrane_integral_with(&forms[..m], &r1, &r2, &g, None, &q(), Method::Tensor).unwrap();
                    let e = membrane_integral_with(&forms[..m], &r1, &r2, &g, None, &q(), Method::ExactHeight).unwrap();
                    assert!((t.value - e.value).norm() < 1e-10 * e.value.norm().max(1e-3), "{m} {r1} {r2} {} {}", t.value, e.value);
                }
            }
        }
    }

    #[test]
    fn separable_agrees_with_tensor() {
        let k = make_field(2).unwrap();
        let g = Membrane::imaginary_quadrant();
        let forms = diangle_forms(&k);
        for m in 1..=3 {
            for r1 in all_permutations(m).into_iter().take(3) {
                let r2 = r1.invert();
                let t = membrane_integral_with(&forms[..m], &r1, &r2, &g, None, &q(), Method::Tensor).unwrap();
                let s = membrane_integral_with(&forms[..m], &r1, &r2, &g, None, &q(), Method::Separable).unwrap();
                assert!((t.value - s.value).norm() < 1e-10 * s.value.norm(), "{m} {} {}", t.value, s.value);
            }
        }
    }
}
