//! Verification suites: each runs a module's verifiers on seeded random data and returns
//! residual reports. Output contains no timings, so equal configurations give equal JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chen::{generating_series_f, Path};
use crate::dedekind::{fit_prefactor, l_double, l_prefactor, l_single, mdzv, z_majorant, z_value, ConeSumSpec, LMode};
use crate::error::{Error, Result};
use crate::forms::{unit_orbit_form, ExpForm1, ExpForm2};
use crate::membrane::{
    membrane_integral_type_a, verify_homotopy_invariance, verify_membrane_shuffle, verify_series_shuffle,
    verify_tag_collapse, verify_type_a_composition, Membrane, Reparam, Region,
};
use crate::ncring::shuffle_words;
use crate::quadfield::{make_field, FieldContext, QuadInt};
use crate::quadrature::QuadratureConfig;
use crate::report::{rel_diff, Report};
use crate::shuffle::{all_permutations, binomial, shuffle_of_permutations, shuffles, Permutation};
use crate::symbols::{act, random_configuration, random_cusp, verify_commutative_relations, verify_nc_relations, MatrixK};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    /// Field for the membrane and dedekind suites; the symbols suite always runs d = 2 and d = 5.
    pub d: i64,
    /// Gauss–Legendre nodes per panel (8..=64).
    pub nodes_per_dim: usize,
    /// Nodes for the four-form membrane shuffle integrals (6..=64).
    pub shuffle_nodes: usize,
    /// Depth of the generating-series checks (1..=3).
    pub depth: usize,
    pub seed: u64,
    /// Height bound for cone sums.
    pub height_bound: f64,
    /// Unit windows compared for Z(3, 2).
    pub windows: (u32, u32),
    /// Random cusp configurations per field.
    pub configurations: usize,
    /// Random deformations per homotopy check.
    pub deformations: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            d: 2,
            nodes_per_dim: 16,
            shuffle_nodes: 8,
            depth: 2,
            seed: 20_240_601,
            height_bound: 25.0,
            windows: (8, 12),
            configurations: 10,
            deformations: 5,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidInput(s.into()));
        if !(8..=64).contains(&self.nodes_per_dim) {
            return bad("nodes_per_dim must be in 8..=64");
        }
        if !(6..=64).contains(&self.shuffle_nodes) {
            return bad("shuffle_nodes must be in 6..=64");
        }
        if !(1..=3).contains(&self.depth) {
            return bad("depth must be in 1..=3");
        }
        if !(self.height_bound >= 1.0 && self.height_bound <= 200.0) {
            return bad("height_bound must be in [1, 200]");
        }
        if self.windows.0 >= self.windows.1 || self.windows.1 > 30 {
            return bad("windows must satisfy K0 < K1 ≤ 30");
        }
        if self.configurations == 0 || self.configurations > 100 || self.deformations == 0 || self.deformations > 100 {
            return bad("configurations and deformations must be in 1..=100");
        }
        make_field(self.d).map(|_| ())
    }

    fn quad(&self) -> QuadratureConfig {
        QuadratureConfig { nodes_per_dim: self.nodes_per_dim, seed: self.seed, ..Default::default() }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Shuffle,
    Chen,
    Membrane,
    Symbols,
    Dedekind,
    All,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Shuffle, Suite::Chen, Suite::Membrane, Suite::Symbols, Suite::Dedekind];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Shuffle => "shuffle",
            Suite::Chen => "chen",
            Suite::Membrane => "membrane",
            Suite::Symbols => "symbols",
            Suite::Dedekind => "dedekind",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .chain([Suite::All].iter())
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite '{s}'")))
    }
}

/// Reports of one suite, keyed by section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub sections: BTreeMap<String, Report>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.sections.values().all(Report::passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub config: SuiteConfig,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl VerifyOutput {
    /// `PASS|FAIL suite/section/check residual tolerance` lines followed by info lines.
    pub fn table(&self) -> String {
        let mut s = String::new();
        for r in &self.suites {
            for (name, rep) in &r.sections {
                for line in rep.table().lines() {
                    let mut parts = line.splitn(2, ' ');
                    let head = parts.next().unwrap_or("");
                    let rest = parts.next().unwrap_or("");
                    s.push_str(&format!("{head} {}/{name}/{rest}\n", r.suite));
                }
            }
        }
        s
    }
}

/// Runs `suite` (every suite for [`Suite::All`]).
pub fn run(suite: Suite, cfg: &SuiteConfig) -> Result<VerifyOutput> {
    cfg.validate()?;
    let list: Vec<Suite> = if suite == Suite::All { Suite::ALL.to_vec() } else { vec![suite] };
    let suites = list.into_iter().map(|s| run_one(s, cfg)).collect::<Result<Vec<_>>>()?;
    let passed = suites.iter().all(SuiteResult::passed);
    Ok(VerifyOutput { config: cfg.clone(), suites, passed })
}

fn run_one(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteResult> {
    let sections = match suite {
        Suite::Shuffle => shuffle_suite(cfg)?,
        Suite::Chen => chen_suite(cfg)?,
        Suite::Membrane => membrane_suite(cfg)?,
        Suite::Symbols => symbols_suite(cfg)?,
        Suite::Dedekind => dedekind_suite(cfg)?,
        Suite::All => unreachable!(),
    };
    Ok(SuiteResult { suite, sections })
}

type Sections = BTreeMap<String, Report>;

pub fn shuffle_suite(cfg: &SuiteConfig) -> Result<Sections> {
    let mut out = Sections::new();
    let mut counts = Report::new();
    for m in 0..=8 {
        for i in 0..=m {
            let sh = shuffles(i, m - i);
            let distinct: BTreeSet<Vec<usize>> = sh.iter().map(Permutation::one_line).collect();
            let valid = sh.iter().all(|t| t.is_shuffle(i));
            let bad = (sh.len() as i64 - binomial(m, i) as i64).unsigned_abs() + (sh.len() - distinct.len()) as u64 + u64::from(!valid);
            counts.push(format!("sh({i},{})", m - i), bad as f64, 0.0);
        }
    }
    out.insert("shuffle counts".into(), counts);
    let mut rng = cfg.rng(1);
    let mut pairs = Report::new();
    for t in 0..30 {
        let i = rng.gen_range(1..=4);
        let j = rng.gen_range(1..=4);
        let pick = |rng: &mut ChaCha8Rng, n: usize| {
            let all = all_permutations(n);
            all[rng.gen_range(0..all.len())].clone()
        };
        let (a, b) = (pick(&mut rng, i), pick(&mut rng, j));
        let sh = shuffle_of_permutations(&a, &b);
        let distinct: BTreeSet<Vec<usize>> = sh.iter().map(Permutation::one_line).collect();
        let bad = (sh.len() as i64 - binomial(i + j, i) as i64).unsigned_abs() + (sh.len() - distinct.len()) as u64;
        pairs.push(format!("pair {t} sizes ({i},{j})"), bad as f64, 0.0);
    }
    out.insert("shuffle of permutations".into(), pairs);
    Ok(out)
}

fn random_form1(rng: &mut ChaCha8Rng) -> ExpForm1 {
    let k = rng.gen_range(1..=3);
    ExpForm1::new((0..k).map(|_| (C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), rng.gen_range(0..=3))).collect())
}

fn random_point(rng: &mut ChaCha8Rng) -> C {
    C::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.1..1.0))
}

/// Composition and shuffle laws for all words of length ≤ 4 over 20 random 1-forms.
pub fn chen_suite(cfg: &SuiteConfig) -> Result<Sections> {
    let mut rng = cfg.rng(2);
    let forms: Vec<ExpForm1> = (0..20).map(|_| random_form1(&mut rng)).collect();
    let quad = QuadratureConfig { nodes_per_dim: cfg.nodes_per_dim.max(24), ..cfg.quad() };
    let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
    let (g1, g2) = (Path::segment(a, b), Path::segment(b, c));
    let whole = Path::concat(vec![g1.clone(), g2.clone()])?;
    let f = generating_series_f(&forms, &whole, 4, &quad)?;
    let f12 = generating_series_f(&forms, &g1, 4, &quad)?.mul(&generating_series_f(&forms, &g2, 4, &quad)?)?;
    let scale = f.terms.values().map(|x| x.norm()).fold(1.0, f64::max);
    let mut comp = Report::new();
    comp.push("F(g1 g2) = F(g1) F(g2), 20 forms, depth 4", f.max_abs_diff(&f12) / scale, 1e-9);
    let mut sh = Report::new();
    for (name, s) in [("g1", generating_series_f(&forms, &g1, 4, &quad)?), ("g1 g2", f)] {
        let mut worst: f64 = 0.0;
        let mut by_len: Vec<Vec<&Vec<u32>>> = vec![Vec::new(); 5];
        for w in s.terms.keys() {
            by_len[w.len()].push(w);
        }
        for u in by_len[1..4].iter().flatten() {
            for v in by_len[1..=4 - u.len()].iter().flatten() {
                let lhs = s.coeff(u) * s.coeff(v);
                let rhs: C = shuffle_words(u, v).iter().map(|w| s.coeff(w)).sum();
                worst = worst.max((lhs - rhs).norm());
            }
        }
        sh.push(format!("shuffle on {name}, all words |u|+|v| ≤ 4"), worst / scale, 1e-9);
    }
    let mut out = Sections::new();
    out.insert("composition".into(), comp);
    out.insert("path shuffle".into(), sh);
    Ok(out)
}

fn diangle_forms(k: &FieldContext) -> Result<Vec<ExpForm2>> {
    Ok(vec![
        ExpForm2::single(k.elem(1, 0), C::new(1.0, 0.0))?,
        ExpForm2::new(k.field, vec![(C::new(0.5, 0.2), k.elem(2, 1)), (C::new(-0.3, 0.0), k.elem(3, 1))])?,
        ExpForm2::single(k.elem(3, 1), C::new(0.2, -0.7))?,
        ExpForm2::new(k.field, vec![(C::new(1.0, 0.0), k.elem(1, 0)), (C::new(0.0, 0.4), k.elem(4, 1))])?,
    ])
}

/// The unit diangle's closed form `(2πi)^{-2}(u_2² − u_1²)/((α_1u_1 + α_2u_2)(α_1u_2 + α_2u_1))`.
pub fn unit_diangle_closed_form(u: &QuadInt, alpha: &QuadInt) -> C {
    let (u1, u2) = u.embed();
    let (a1, a2) = alpha.embed();
    C::new(-1.0 / (4.0 * PI * PI), 0.0) * ((u2 * u2 - u1 * u1) / ((a1 * u1 + a2 * u2) * (a1 * u2 + a2 * u1)))
}

/// Five totally positive exponents starting with `1`.
pub fn lemma_alphas(k: &FieldContext) -> Vec<QuadInt> {
    let mut out = vec![k.elem(1, 0)];
    let mut b = 0;
    while out.len() < 5 {
        b += 1;
        for a in 1..=6 {
            let x = k.elem(a, b);
            if x.is_totally_positive() && out.len() < 5 && !out.contains(&x) {
                out.push(x);
                break;
            }
        }
    }
    out
}

pub fn membrane_suite(cfg: &SuiteConfig) -> Result<Sections> {
    let k = make_field(cfg.d)?;
    let quad = cfg.quad();
    let g = Membrane::diangle_unit(&k, &k.eps)?;
    let forms = diangle_forms(&k)?;
    let mut out = Sections::new();

    let mut lemma = Report::new();
    for alpha in lemma_alphas(&k) {
        let f = ExpForm2::single(alpha.clone(), C::new(1.0, 0.0))?;
        let v = membrane_integral_type_a(&[f], &g, &quad)?.value;
        lemma.push(format!("alpha {alpha}"), rel_diff(v, unit_diangle_closed_form(&k.eps, &alpha), 1e-300), 1e-6);
    }
    out.insert("unit diangle closed form".into(), lemma);

    let heavy = QuadratureConfig { nodes_per_dim: cfg.shuffle_nodes, ..quad };
    let mut sh = Report::new();
    for m in 2..=4 {
        for split in 1..m {
            let q = if m == 4 { &heavy } else { &quad };
            let r = verify_membrane_shuffle(&forms[..m], split, &g, q)?;
            for c in r.checks {
                sh.push(format!("m={m} split={split} {}", c.name), c.residual, c.tolerance);
            }
        }
    }
    out.insert("membrane shuffle".into(), sh);

    let depth = cfg.depth.min(2);
    out.insert("series shuffle".into(), verify_series_shuffle(&forms[..2], 0.45, &g, depth, &quad)?);
    out.insert("type-a composition".into(), verify_type_a_composition(&forms[..2], 0.5, &g, depth, &quad)?);
    let a1 = Region::rect((0.0, 0.4), (0.0, 1.0))?;
    let a2 = Region::rect((0.4, 1.0), (0.0, 1.0))?;
    let forms3 = &forms[..3];
    let r1 = Permutation::from_one_line(&[2, 3, 1])?;
    let r2 = Permutation::from_one_line(&[3, 1, 2])?;
    out.insert("tag collapse".into(), verify_tag_collapse(forms3, &r1, &r2, &a1, &a2, &g, &quad)?);

    let mut rng = cfg.rng(3);
    let mut rep = Report::new();
    let mut slide = Report::new();
    for t in 0..cfg.deformations {
        let pick = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                Reparam::Power(rng.gen_range(1..=3) as f64)
            } else {
                Reparam::Sine(rng.gen_range(-0.8..0.8))
            }
        };
        let (p1, p2) = (pick(&mut rng), pick(&mut rng));
        let r = verify_homotopy_invariance(&forms[..2], &g, &g.reparametrized(p1, p2)?, &quad)?;
        rep.push(format!("deformation {t} {p1:?} {p2:?}"), r.max_residual(), 1e-8);
        let delta = rng.gen_range(-0.8..0.8);
        let r = verify_homotopy_invariance(&forms[..2], &g, &g.slid(delta)?, &quad)?;
        slide.push(format!("deformation {t} slide {delta:.4}"), r.max_residual(), 1e-6);
    }
    out.insert("homotopy reparametrization".into(), rep);
    out.insert("homotopy sliding".into(), slide);
    Ok(out)
}

fn symbol_forms(k: &FieldContext) -> Result<Vec<ExpForm2>> {
    Ok(vec![
        ExpForm2::single(k.elem(1, 0), C::new(1.0, 0.0))?,
        ExpForm2::new(k.field, vec![(C::new(0.5, 0.2), k.elem(2, 1)), (C::new(-0.3, 0.0), k.elem(3, 1))])?,
    ])
}

pub fn symbols_suite(cfg: &SuiteConfig) -> Result<Sections> {
    let quad = cfg.quad();
    let mut out = Sections::new();
    for (stream, d) in [(4u64, 2i64), (5, 5)] {
        let k = make_field(d)?;
        let forms = symbol_forms(&k)?;
        let mut rng = cfg.rng(stream);
        let mut rel = Report::new();
        let mut nc = Report::new();
        for c in 0..cfg.configurations {
            let p = random_configuration(&k.field, &mut rng);
            let r = verify_commutative_relations(&p, &forms, &quad)?;
            for ch in r.checks {
                rel.push(format!("config {c} {}", ch.name), ch.residual, ch.tolerance);
            }
            for (name, v) in r.info {
                rel.note(format!("config {c} {name}"), v);
            }
            if c < 2 {
                let r = verify_nc_relations(&p, &forms, &quad)?;
                for ch in r.checks {
                    nc.push(format!("config {c} {}", ch.name), ch.residual, ch.tolerance);
                }
                for (name, v) in r.info {
                    nc.note(format!("config {c} {name}"), v);
                }
            }
        }
        out.insert(format!("commutative relations d={d}"), rel);
        out.insert(format!("non-commutative relations d={d}"), nc);

        // action composition for totally positive matrices
        let mut acts = Report::new();
        let mut found = 0;
        while found < 10 {
            let e: Vec<QuadInt> = (0..8).map(|_| random_cusp(&k.field, &mut rng).p).collect();
            let (Ok(g), Ok(h)) = (
                MatrixK::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()),
                MatrixK::new(e[4].clone(), e[5].clone(), e[6].clone(), e[7].clone()),
            ) else {
                continue;
            };
            use crate::symbols::DetClass::TotallyPositive;
            if g.det_class() != TotallyPositive || h.det_class() != TotallyPositive {
                continue;
            }
            let z = [random_point(&mut rng), random_point(&mut rng)];
            let (Ok(a), Ok(b)) = (act(&g.mul(&h), z), act(&h, z).and_then(|w| act(&g, w))) else { continue };
            let r = (0..2).map(|j| (a[j] - b[j]).norm() / (1.0 + a[j].norm())).fold(0.0, f64::max);
            acts.push(format!("pair {found}"), r, 1e-10);
            found += 1;
        }
        out.insert(format!("action composition d={d}"), acts);
    }
    Ok(out)
}

/// `Π_k 1/(2πi(λ_1 + … + λ_k))`: the iterated integral of `e(λ_k z) dz` along `Im(H)` from the cusp to `0`.
pub fn nested_exponential(lambdas: &[f64]) -> C {
    let mut s = 0.0;
    let mut out = C::new(1.0, 0.0);
    for l in lambdas {
        s += l;
        out /= C::new(0.0, 2.0 * PI * s);
    }
    out
}

pub fn dedekind_suite(cfg: &SuiteConfig) -> Result<Sections> {
    let k = make_field(cfg.d)?;
    let quad = cfg.quad();
    let mut out = Sections::new();
    let alphas = lemma_alphas(&k);

    let mut oracle = Report::new();
    for (a, b) in alphas.iter().zip(alphas.iter().skip(1)) {
        for (m, n) in [(1u32, 1u32), (2, 1), (2, 2), (3, 2)] {
            let fa = ExpForm2::single(a.clone(), C::new(1.0, 0.0))?;
            let fb = ExpForm2::single(b.clone(), C::new(1.0, 0.0))?;
            let mut forms = vec![fa];
            forms.extend((1..m).map(|_| ExpForm2::omega0(k.field)));
            forms.push(fb);
            forms.extend((1..n).map(|_| ExpForm2::omega0(k.field)));
            let v = membrane_integral_type_a(&forms, &Membrane::imaginary_quadrant(), &quad)?.value;
            let seq = |x: f64, y: f64| {
                let mut s = vec![x];
                s.extend((1..m).map(|_| 0.0));
                s.push(y);
                s.extend((1..n).map(|_| 0.0));
                s
            };
            let ((a1, a2), (b1, b2)) = (a.embed(), b.embed());
            let exact = nested_exponential(&seq(a1, b1)) * nested_exponential(&seq(a2, b2));
            oracle.push(format!("alpha {a} beta {b} (m,n)=({m},{n})"), rel_diff(v, exact, 1e-300), 1e-8);
        }
    }
    out.insert("single-term oracle".into(), oracle);

    let mut single = Report::new();
    let orbit = unit_orbit_form(&k, C::new(1.0, 0.5), &alphas[1], 3)?;
    for n in 1..=3 {
        let s = l_single(&orbit, n, LMode::Series, &quad)?;
        let i = l_single(&orbit, n, LMode::Integral, &quad)?;
        single.push(format!("n={n}"), rel_diff(s, i, 1e-300), 1e-6);
    }
    out.insert("L single series vs integral".into(), single);

    let mut double = Report::new();
    let f = unit_orbit_form(&k, C::new(1.0, 0.0), &alphas[0], 3)?;
    let g = unit_orbit_form(&k, C::new(0.5, 0.5), &alphas[2], 3)?;
    for (m, n) in [(2, 1), (2, 2), (3, 2)] {
        let s = l_double(&k, &f, &g, m, n, LMode::Series, 8, &quad)? * l_prefactor(m + n);
        let i = l_double(&k, &f, &g, m, n, LMode::Integral, 8, &quad)?;
        double.push(format!("(m,n)=({m},{n})"), rel_diff(s, i, 1e-300), 1e-3);
    }
    out.insert("L double series vs integral".into(), double);

    let mut fit = Report::new();
    let pairs: Vec<(QuadInt, QuadInt)> = alphas.iter().flat_map(|a| alphas.iter().map(move |b| (a.clone(), b.clone()))).take(10).collect();
    for (m, n) in [(1u32, 1u32), (3, 2)] {
        let c = fit_prefactor(&pairs, m, n, &quad)?;
        let spread = c.iter().map(|x| rel_diff(*x, c[0], 1e-300)).fold(0.0, f64::max);
        fit.push(format!("(m,n)=({m},{n}) constant across 10 pairs"), spread, 1e-6);
        fit.push(format!("(m,n)=({m},{n}) constant = (2πi)^-{}", 2 * (m + n)), rel_diff(c[0], l_prefactor(m + n), 1e-300), 1e-6);
        fit.note(format!("(m,n)=({m},{n}) ratio to (2πi)^-2"), (c[0] / l_prefactor(1)).norm());
    }
    out.insert("prefactor fit".into(), fit);

    let mut z = Report::new();
    let spec = ConeSumSpec::new(&k, &[0, 0], &[3, 2], cfg.height_bound);
    let z0 = z_value(3, 2, &spec.clone().with_window(cfg.windows.0))?;
    let z1 = z_value(3, 2, &spec.clone().with_window(cfg.windows.1))?;
    z.push(format!("Z(3,2) K={} vs K={}", cfg.windows.0, cfg.windows.1), (z0.value - z1.value).abs() / z1.value.abs().max(1e-300), 1e-6);
    let (e1, _) = k.eps_embeddings();
    let worst = z1.decay_ratios(3).iter().map(|r| r.1).fold(0.0, f64::max);
    z.push("per-k ratio for |k| ≥ 3 (tolerance 2/ε1)", worst, 2.0 / e1);
    let maj = z_majorant(3, 2, &spec)?;
    z.push("Z(3,2) above majorant", (z1.value - maj).max(0.0), 0.0);
    z.note("Z(3,2)", z1.value);
    z.note("Z(3,2) tail bound", z1.tail_bound);
    z.note("Z(3,2) majorant", maj);
    let zeta2 = mdzv(&ConeSumSpec::new(&k, &[0], &[2], cfg.height_bound))?;
    let longer = mdzv(&ConeSumSpec::new(&k, &[0], &[2], 2.0 * cfg.height_bound))?;
    z.push("zeta_C(2) tail bound covers doubled truncation", (longer.value - zeta2.value - zeta2.tail_bound).max(0.0), 0.0);
    z.note("zeta_C(2)", zeta2.value);
    z.note("zeta_C(2) tail bound", zeta2.tail_bound);
    out.insert("cone sums".into(), z);
    Ok(out)
}
