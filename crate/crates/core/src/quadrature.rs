//! Quadrature building blocks: Gauss–Legendre rules, composite panel grids
//! with a spectral cumulative-integration operator, ordered-simplex sums,
//! an independent nested tensor rule, Monte Carlo, and compensated sums.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre grid on `[breaks[0], breaks[last]]` with `n` nodes
/// per panel and the cumulative operator `(Q v)_i ≈ ∫_{start}^{x_i} v`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub breaks: Vec<f64>,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub panel_of: Vec<usize>,
    /// Reference in-panel cumulative matrix on `[0, 1]`, row-major `n × n`.
    qref: Vec<f64>,
}

impl Grid {
    pub fn new(breaks: &[f64], n: usize) -> Self {
        assert!(breaks.len() >= 2 && n >= 1);
        let (x, w) = gauss_legendre(n);
        let xi: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let wi: Vec<f64> = w.iter().map(|t| 0.5 * t).collect();
        // qref[i][l] = ∫_0^{xi_i} ℓ_l, evaluated by the same rule mapped to [0, xi_i]
        let bary: Vec<f64> = (0..n)
            .map(|l| 1.0 / (0..n).filter(|&k| k != l).map(|k| xi[l] - xi[k]).product::<f64>())
            .collect();
        let lagrange = |l: usize, t: f64| -> f64 {
            let mut v = bary[l];
            for k in 0..n {
                if k != l {
                    v *= t - xi[k];
                }
            }
            v
        };
        let mut qref = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += wi[k] * xi[i] * lagrange(l, xi[k] * xi[i]);
                }
                qref[i * n + l] = s;
            }
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut panel_of = Vec::new();
        for p in 0..breaks.len() - 1 {
            let (a, b) = (breaks[p], breaks[p + 1]);
            assert!(b > a, "breakpoints must increase");
            for k in 0..n {
                nodes.push(a + (b - a) * xi[k]);
                weights.push((b - a) * wi[k]);
                panel_of.push(p);
            }
        }
        Grid { breaks: breaks.to_vec(), n, nodes, weights, panel_of, qref }
    }

    pub fn uniform(a: f64, b: f64, panels: usize, n: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels).map(|k| a + (b - a) * k as f64 / panels as f64).collect();
        Self::new(&breaks, n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> usize {
        self.breaks.len() - 1
    }

    fn panel_len(&self, p: usize) -> f64 {
        self.breaks[p + 1] - self.breaks[p]
    }

    /// Entry `Q[i][l]`.
    pub fn q(&self, i: usize, l: usize) -> f64 {
        let (pi, pl) = (self.panel_of[i], self.panel_of[l]);
        if pl < pi {
            self.weights[l]
        } else if pl == pi {
            self.panel_len(pi) * self.qref[(i % self.n) * self.n + (l % self.n)]
        } else {
            0.0
        }
    }

    /// Same breakpoints with more nodes per panel.
    pub fn refined(&self, n: usize) -> Self {
        Self::new(&self.breaks, n)
    }

    pub fn integrate(&self, v: &[C]) -> C {
        self.weights.iter().zip(v).map(|(w, x)| x * *w).sum()
    }

    /// `(Q v)_i = ∫_{start}^{x_i} v`.
    pub fn cumulative(&self, v: &[C]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); v.len()];
        self.cumulative_into(v, &mut out);
        out
    }

    /// Allocation-free form of [`Grid::cumulative`].
    pub fn cumulative_into(&self, v: &[C], out: &mut [C]) {
        let n = self.n;
        let mut before = C::new(0.0, 0.0);
        for p in 0..self.panels() {
            let h = self.panel_len(p);
            let base = p * n;
            for i in 0..n {
                let mut s = C::new(0.0, 0.0);
                let row = &self.qref[i * n..(i + 1) * n];
                for l in 0..n {
                    s += v[base + l] * row[l];
                }
                out[base + i] = before + s * h;
            }
            for l in 0..n {
                before += v[base + l] * self.weights[base + l];
            }
        }
    }
}

/// `∫_{x_1 < ... < x_m} ∏_k h_k(x_k)` from nodal values, by repeated cumulative integration.
pub fn iterated_1d(grid: &Grid, hs: &[&[C]]) -> C {
    if hs.is_empty() {
        return C::new(1.0, 0.0);
    }
    let mut f: Vec<C> = hs[0].to_vec();
    for h in &hs[1..] {
        let g = grid.cumulative(&f);
        f = g.iter().zip(h.iter()).map(|(a, b)| a * b).collect();
    }
    grid.integrate(&f)
}

/// All index tuples `(i_1, ..., i_m)` with nonzero weight
/// `w_{i_m} Q[i_m][i_{m-1}] ... Q[i_2][i_1]`, so that
/// `Σ weight · G(x_{i_1}, ..., x_{i_m}) ≈ ∫_{x_1 < ... < x_m} G`.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub m: usize,
    pub indices: Vec<u16>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    pub fn new(grid: &Grid, m: usize) -> Self {
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        if m == 0 {
            return SimplexRule { m, indices, weights: vec![1.0] };
        }
        let mut cur = vec![0u16; m];
        for top in 0..grid.len() {
            cur[m - 1] = top as u16;
            descend(grid, m - 1, grid.weights[top], &mut cur, &mut indices, &mut weights);
        }
        SimplexRule { m, indices, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn tuple(&self, k: usize) -> &[u16] {
        &self.indices[k * self.m..(k + 1) * self.m]
    }
}

fn descend(grid: &Grid, level: usize, w: f64, cur: &mut Vec<u16>, idx: &mut Vec<u16>, ws: &mut Vec<f64>) {
    if level == 0 {
        idx.extend_from_slice(cur);
        ws.push(w);
        return;
    }
    let above = cur[level] as usize;
    let pa = grid.panel_of[above];
    let hi = (pa + 1) * grid.n;
    for l in 0..hi {
        let q = grid.q(above, l);
        if q != 0.0 {
            cur[level - 1] = l as u16;
            descend(grid, level - 1, w * q, cur, idx, ws);
        }
    }
}

/// Points and weights of nested Gauss–Legendre on `{a < x_1 < … < x_m < b}`:
/// `x_m` over `[a, b]`, each `x_k` over `[a, x_{k+1}]`, with `panels` equal panels per level.
#[derive(Debug, Clone)]
pub struct SimplexPoints {
    pub m: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SimplexPoints {
    pub fn new(a: f64, b: f64, m: usize, n: usize, panels: usize) -> Self {
        let (gx, gw) = gauss_legendre(n);
        let mut out = SimplexPoints { m, points: Vec::new(), weights: Vec::new() };
        if m == 0 {
            out.weights.push(1.0);
            return out;
        }
        let mut cur = vec![0.0; m];
        fill_nested(a, b, m, 1.0, &gx, &gw, panels, &mut cur, &mut out);
        out
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.m..(k + 1) * self.m]
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_nested(a: f64, upper: f64, level: usize, w: f64, gx: &[f64], gw: &[f64], panels: usize, cur: &mut Vec<f64>, out: &mut SimplexPoints) {
    if level == 0 {
        out.points.extend_from_slice(cur);
        out.weights.push(w);
        return;
    }
    let h = (upper - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (t, wt) in gx.iter().zip(gw) {
            cur[level - 1] = lo + 0.5 * h * (t + 1.0);
            let x = cur[level - 1];
            fill_nested(a, x, level - 1, w * 0.5 * h * wt, gx, gw, panels, cur, out);
        }
    }
}

/// Independent oracle: `∫_{0<x_1<...<x_m<1} ∫_{0<y_1<...<y_m<1} f(x, y)` by
/// nested composite Gauss–Legendre with variable limits, `panels × n` points per level.
pub fn nested_simplex_pair(m: usize, n: usize, panels: usize, f: &dyn Fn(&[f64], &[f64]) -> C) -> C {
    let (gx, gw) = gauss_legendre(n);
    let mut xs = vec![0.0; m];
    let mut ys = vec![0.0; m];
    nest_x(m, m, 1.0, &gx, &gw, panels, &mut xs, &mut ys, f)
}

#[allow(clippy::too_many_arguments)]
fn nest_x(
    m: usize,
    level: usize,
    upper: f64,
    gx: &[f64],
    gw: &[f64],
    panels: usize,
    xs: &mut Vec<f64>,
    ys: &mut Vec<f64>,
    f: &dyn Fn(&[f64], &[f64]) -> C,
) -> C {
    if level == 0 {
        return nest_y(m, m, 1.0, gx, gw, panels, xs, ys, f);
    }
    let mut s = C::new(0.0, 0.0);
    let h = upper / panels as f64;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in gx.iter().zip(gw) {
            xs[level - 1] = a + 0.5 * h * (t + 1.0);
            s += nest_x(m, level - 1, xs[level - 1], gx, gw, panels, xs, ys, f) * (0.5 * h * w);
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn nest_y(
    m: usize,
    level: usize,
    upper: f64,
    gx: &[f64],
    gw: &[f64],
    panels: usize,
    xs: &mut Vec<f64>,
    ys: &mut Vec<f64>,
    f: &dyn Fn(&[f64], &[f64]) -> C,
) -> C {
    if level == 0 {
        return f(xs, ys);
    }
    let mut s = C::new(0.0, 0.0);
    let h = upper / panels as f64;
    for p in 0..panels {
        let a = p as f64 * h;
        for (t, w) in gx.iter().zip(gw) {
            ys[level - 1] = a + 0.5 * h * (t + 1.0);
            s += nest_y(m, level - 1, ys[level - 1], gx, gw, panels, xs, ys, f) * (0.5 * h * w);
        }
    }
    let _ = m;
    s
}

/// Monte Carlo estimate over the same pair of ordered simplices with a fixed seed.
/// Returns `(estimate, standard error)`.
pub fn monte_carlo_simplex_pair(m: usize, samples: usize, seed: u64, f: &dyn Fn(&[f64], &[f64]) -> C) -> (C, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = vec![0.0; m];
    let mut ys = vec![0.0; m];
    let mut sum = CompensatedSum::default();
    let mut sq = 0.0;
    for _ in 0..samples {
        for v in xs.iter_mut().chain(ys.iter_mut()) {
            *v = rng.gen::<f64>();
        }
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let v = f(&xs, &ys);
        sum.add(v);
        sq += v.norm_sqr();
    }
    let vol = 1.0 / (factorial(m) * factorial(m));
    let nn = samples as f64;
    let mean = sum.value() / nn;
    let var = (sq / nn - mean.norm_sqr()).max(0.0);
    (mean * vol, vol * (var / nn).sqrt())
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// Neumaier compensated summation for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

impl CompensatedSum {
    pub fn add(&mut self, z: C) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub fn add_real(&mut self, x: f64) {
        neumaier(&mut self.re, x);
    }

    pub fn value(&self) -> C {
        C::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }

    pub fn real(&self) -> f64 {
        self.re.0 + self.re.1
    }
}

/// Compactifying substitution of a half-line coordinate `y ∈ (0, ∞)` by `t ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Substitution {
    /// `y = scale · (t / (1 - t))^power`.
    Rational { scale: f64, power: u32 },
    /// `y = -scale · ln(1 - t)`.
    Log { scale: f64 },
}

impl Substitution {
    /// `(y(t), y'(t))`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Substitution::Rational { scale, power } => {
                let u = t / (1.0 - t);
                let p = power as i32;
                let y = scale * u.powi(p);
                let dy = scale * p as f64 * u.powi(p - 1) / ((1.0 - t) * (1.0 - t));
                (y, dy)
            }
            Substitution::Log { scale } => (-scale * (1.0 - t).ln(), scale / (1.0 - t)),
        }
    }

    /// Inverse map `t(y)`.
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            Substitution::Rational { scale, power } => {
                let u = (y / scale).powf(1.0 / power as f64);
                u / (1.0 + u)
            }
            Substitution::Log { scale } => 1.0 - (-y / scale).exp(),
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            Substitution::Rational { scale, .. } | Substitution::Log { scale } => scale,
        }
    }

    pub fn with_scale(&self, s: f64) -> Self {
        match *self {
            Substitution::Rational { power, .. } => Substitution::Rational { scale: s, power },
            Substitution::Log { .. } => Substitution::Log { scale: s },
        }
    }
}

/// Breakpoints in `t` whose images under `sub` are geometric between `y_lo` and `y_hi`.
pub fn geometric_breaks(sub: &Substitution, y_lo: f64, y_hi: f64, ratio: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut y = y_lo;
    while y < y_hi {
        let t = sub.inverse(y);
        if t > *b.last().unwrap() + 1e-9 && t < 1.0 - 1e-9 {
            b.push(t);
        }
        y *= ratio;
    }
    b.push(1.0);
    b
}

/// Merges extra breakpoints (restriction edges) into a sorted breakpoint list.
pub fn merge_breaks(base: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = base.iter().chain(extra.iter()).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        if out.last().is_none_or(|&l| x - l > 1e-12) {
            out.push(x);
        }
    }
    out
}

/// Shared quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel and per coordinate.
    pub nodes_per_dim: usize,
    /// Compactification of half-infinite coordinates; the scale is adapted per integrand.
    pub substitution: Substitution,
    pub tolerance: f64,
    pub monte_carlo_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes_per_dim: 16,
            substitution: Substitution::Rational { scale: 1.0, power: 1 },
            tolerance: 1e-8,
            monte_carlo_samples: 1_000_000,
            seed: 20_240_601,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.nodes_per_dim < 4 {
            return Err(crate::Error::InvalidInput(format!("nodes_per_dim = {} < 4", self.nodes_per_dim)));
        }
        if !(self.tolerance > 0.0) {
            return Err(crate::Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Node count used for the error estimate.
    pub fn refined_nodes(&self) -> usize {
        self.nodes_per_dim + self.nodes_per_dim.div_ceil(2)
    }
}

/// A value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: C,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: C) -> Self {
        Estimate { value, error: 0.0 }
    }

    /// Fails with `NonConvergence` when the error exceeds `tol · max(1, |value|)`.
    pub fn check(self, tol: f64) -> crate::Result<Self> {
        if self.error > tol * self.value.norm().max(1.0) || !self.value.re.is_finite() || !self.value.im.is_finite() {
            Err(crate::Error::NonConvergence { estimate: self.error, tolerance: tol })
        } else {
            Ok(self)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 12, 24, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..2 * n {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} k={k}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let g = Grid::uniform(0.0, 2.0, 3, 10);
        let v: Vec<C> = g.nodes.iter().map(|x| c(x.cos())).collect();
        let q = g.cumulative(&v);
        for (x, qv) in g.nodes.iter().zip(&q) {
            assert!((qv.re - x.sin()).abs() < 1e-13);
        }
        for i in 0..g.len() {
            let row: C = (0..g.len()).map(|l| v[l] * g.q(i, l)).sum();
            assert!((row - q[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn iterated_exponentials_match_closed_form() {
        // ∫_{0<x1<x2<x3<1} e^{a x1} e^{b x2} e^{c x3}: nested closed form
        let (a, b, cc) = (0.7, -1.3, 2.1);
        let g = Grid::uniform(0.0, 1.0, 2, 12);
        let h = |k: f64| -> Vec<C> { g.nodes.iter().map(|x| c((k * x).exp())).collect() };
        let (ha, hb, hc) = (h(a), h(b), h(cc));
        let got = iterated_1d(&g, &[&ha, &hb, &hc]);
        let exact = {
            let s = a + b;
            ((s + cc).exp() - 1.0) / (a * s * (s + cc)) - ((cc).exp() - 1.0) / (a * s * cc) - ((b + cc).exp() - 1.0) / (a * b * (b + cc))
                + ((cc).exp() - 1.0) / (a * b * cc)
        };
        assert!((got.re - exact).abs() < 1e-13, "{got} {exact}");
    }

    #[test]
    fn simplex_volumes() {
        let g = Grid::uniform(0.0, 1.0, 3, 6);
        for m in 1..=4 {
            let r = SimplexRule::new(&g, m);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0 / factorial(m)).abs() < 1e-13, "m={m}");
        }
        let one: Vec<C> = vec![c(1.0); g.len()];
        assert!((iterated_1d(&g, &[&one, &one, &one]).re - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn simplex_rule_on_nonseparable_integrand() {
        // ∫_{0<x<y<1} 1/(1+x+y) dx dy
        let g = Grid::uniform(0.0, 1.0, 2, 10);
        let r = SimplexRule::new(&g, 2);
        let mut s = 0.0;
        for k in 0..r.len() {
            let t = r.tuple(k);
            s += r.weights[k] / (1.0 + g.nodes[t[0] as usize] + g.nodes[t[1] as usize]);
        }
        // antiderivative in x: ln(1+x+y) from 0 to y = ln(1+2y) - ln(1+y)
        let g2 = Grid::uniform(0.0, 1.0, 4, 20);
        let exact: f64 =
            g2.nodes.iter().zip(&g2.weights).map(|(y, w)| w * ((1.0 + 2.0 * y).ln() - (1.0 + y).ln())).sum();
        assert!((s - exact).abs() < 1e-13);
    }

    #[test]
    fn nested_oracle_and_monte_carlo() {
        let f = |x: &[f64], y: &[f64]| c(x.iter().chain(y.iter()).map(|v| (-v).exp()).product());
        let exact = {
            // ∫_{0<x1<x2<1} e^{-x1-x2} = (1 - e^{-1})^2 / 2
            let s = (1.0 - (-1.0f64).exp()).powi(2) / 2.0;
            s * s
        };
        let v = nested_simplex_pair(2, 10, 1, &f);
        assert!((v.re - exact).abs() < 1e-13);
        let (mc, se) = monte_carlo_simplex_pair(2, 200_000, 7, &f);
        assert!((mc.re - exact).abs() < 6.0 * se);
        let (mc2, _) = monte_carlo_simplex_pair(2, 1000, 7, &f);
        let (mc3, _) = monte_carlo_simplex_pair(2, 1000, 7, &f);
        assert_eq!(mc2, mc3);
    }

    #[test]
    fn nested_simplex_points() {
        let r = SimplexPoints::new(0.0, 2.0, 3, 6, 2);
        let vol: f64 = r.weights.iter().sum();
        assert!((vol - 8.0 / 6.0).abs() < 1e-13);
        let g: f64 = (0..r.len()).map(|k| {
            let p = r.point(k);
            assert!(p[0] < p[1] && p[1] < p[2]);
            r.weights[k] * p[0] * p[2]
        }).sum();
        // ∫_{0<a<b<c<2} a c = 2^5 · 1/30
        assert!((g - 32.0 / 30.0).abs() < 1e-12, "{g}");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add_real(1e16);
        for _ in 0..1000 {
            s.add_real(1.0);
        }
        s.add_real(-1e16);
        assert_eq!(s.real(), 1000.0);
    }

    #[test]
    fn substitutions_roundtrip() {
        for sub in [Substitution::Rational { scale: 0.3, power: 1 }, Substitution::Rational { scale: 2.0, power: 2 }, Substitution::Log { scale: 0.5 }] {
            for t in [0.1, 0.5, 0.93] {
                let (y, dy) = sub.eval(t);
                assert!((sub.inverse(y) - t).abs() < 1e-12);
                let h = 1e-6;
                let fd = (sub.eval(t + h).0 - sub.eval(t - h).0) / (2.0 * h);
                assert!((fd - dy).abs() < 1e-5 * dy.abs().max(1.0));
            }
        }
        let b = geometric_breaks(&Substitution::Rational { scale: 1.0, power: 1 }, 0.01, 100.0, 10.0);
        assert_eq!(b.len(), 6);
        assert_eq!(merge_breaks(&[0.0, 0.5, 1.0], &[0.5, 0.25]), vec![0.0, 0.25, 0.5, 1.0]);
    }
}
