use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hms_core::chen::{generating_series_f, Path};
use hms_core::dedekind::{l_double, l_prefactor, mdzv, z_majorant, z_value, ConeSumSpec, LMode};
use hms_core::forms::{unit_orbit_form, ExpForm1, ExpForm2};
use hms_core::membrane::{generating_series_jb, membrane_integral_type_a, Membrane};
use hms_core::ncring::Letter;
use hms_core::quadfield::{make_field, parse_quadint, FieldContext, OmegaKind, QuadInt};
use hms_core::quadrature::Estimate;
use hms_core::report::rel_diff;
use hms_core::shuffle::{binomial, shuffle_of_permutations, shuffles, Permutation};
use hms_core::suites::{run, unit_diangle_closed_form, Suite};
use hms_core::symbols::{build_diangle, build_triangle, pair_commutative, Cusp, Symbol};
use num_complex::Complex64 as C;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::output::Output;
use crate::CliError;

fn input(s: impl Into<String>) -> CliError {
    CliError::Input(s.into())
}

fn meta(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn complex(z: C) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn estimate(e: &Estimate) -> Value {
    json!({"re": e.value.re, "im": e.value.im, "error": e.error})
}

/// `eps`, `a,b` or `(a,b)` as an element of the field.
fn element(k: &FieldContext, s: &str) -> Result<QuadInt, CliError> {
    if s.trim() == "eps" {
        return Ok(k.eps.clone());
    }
    Ok(parse_quadint(k.field, s)?)
}

fn read_json(path: &PathBuf) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// 2-forms from a file (one form object or an array of them) followed by one single-term form
/// `e(αz)` per `--alpha`.
fn forms2(k: &FieldContext, file: &Option<PathBuf>, alphas: &[String]) -> Result<Vec<ExpForm2>, CliError> {
    let mut out = Vec::new();
    if let Some(p) = file {
        let v = read_json(p)?;
        let items = match v {
            Value::Array(a) => a,
            other => vec![other],
        };
        for item in &items {
            let f = ExpForm2::from_json(item)?;
            if f.field != k.field {
                return Err(input(format!("form over Q(√{}) but the run uses d = {}", f.field.d, k.d())));
            }
            out.push(f);
        }
    }
    for a in alphas {
        out.push(ExpForm2::single(element(k, a)?, C::new(1.0, 0.0))?);
    }
    if out.is_empty() {
        return Err(input("no forms given (use --forms or --alpha)"));
    }
    Ok(out)
}

#[derive(Args)]
pub struct FieldArgs {
    /// Squarefree d > 1 (defaults to --d).
    pub d: Option<i64>,
}

pub fn field(a: &FieldArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let k = make_field(a.d.unwrap_or(cfg.d))?;
    let d = k.d();
    let omega = match k.field.kind {
        OmegaKind::Sqrt => format!("√{d}"),
        OmegaKind::Half => format!("(1+√{d})/2"),
    };
    let (u1, u2) = k.fundamental_unit.embed();
    let (e1, e2) = k.eps_embeddings();
    Ok(Output::single(json!({
        "d": d,
        "omega": omega,
        "omega_embeddings": [k.omega_embeddings.0, k.omega_embeddings.1],
        "fundamental_unit": k.fundamental_unit.to_string(),
        "fundamental_unit_norm": k.fundamental_unit.norm().to_string(),
        "fundamental_unit_embeddings": [u1, u2],
        "eps": k.eps.to_string(),
        "eps_embeddings": [e1, e2],
    })))
}

#[derive(Args)]
pub struct ShuffleArgs {
    #[arg(long, default_value_t = 2)]
    pub i: usize,
    #[arg(long, default_value_t = 2)]
    pub j: usize,
    /// First block permutation in one-line notation, e.g. `2,1`; needs --rho2.
    #[arg(long, requires = "rho2")]
    pub rho1: Option<String>,
    #[arg(long, requires = "rho1")]
    pub rho2: Option<String>,
}

fn permutation(s: &str) -> Result<Permutation, CliError> {
    let v: Vec<usize> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| input(format!("bad permutation {s}"))))
        .collect::<Result<_, _>>()?;
    Ok(Permutation::from_one_line(&v)?)
}

pub fn shuffle(a: &ShuffleArgs) -> Result<Output, CliError> {
    let (list, m) = match (&a.rho1, &a.rho2) {
        (Some(r1), Some(r2)) => {
            let (p1, p2) = (permutation(r1)?, permutation(r2)?);
            let m = json!({"rho1": p1.to_string(), "rho2": p2.to_string(), "binomial": binomial(p1.len() + p2.len(), p1.len())});
            (shuffle_of_permutations(&p1, &p2), m)
        }
        _ => {
            if a.i + a.j > 12 {
                return Err(input("i + j must be at most 12"));
            }
            (shuffles(a.i, a.j), json!({"i": a.i, "j": a.j, "binomial": binomial(a.i + a.j, a.i)}))
        }
    };
    let mut m = meta(m);
    m.insert("count".into(), json!(list.len()));
    let records = list.iter().enumerate().map(|(n, p)| json!({"index": n, "permutation": p.to_string()})).collect();
    Ok(Output::table(m, records))
}

#[derive(Args)]
pub struct ChenArgs {
    /// JSON array of 1-forms `{"terms": [{"re", "im", "n"}]}` standing for `Σ c e(nz) dz`.
    #[arg(long)]
    pub forms: PathBuf,
    /// Path pieces, concatenated in order: `segment:x0,y0:x1,y1`, `to-cusp:x,y` or `from-cusp:x,y`.
    #[arg(long = "path", required = true)]
    pub paths: Vec<String>,
}

fn forms1(v: &Value) -> Result<Vec<ExpForm1>, CliError> {
    let bad = || input("1-forms must be an array of {\"terms\": [{\"re\", \"im\", \"n\"}]}");
    let arr = v.as_array().ok_or_else(bad)?;
    arr.iter()
        .map(|f| {
            let terms = f.get("terms").and_then(Value::as_array).ok_or_else(bad)?;
            let t = terms
                .iter()
                .map(|t| {
                    let re = t.get("re").and_then(Value::as_f64).unwrap_or(0.0);
                    let im = t.get("im").and_then(Value::as_f64).unwrap_or(0.0);
                    let n = t.get("n").and_then(Value::as_u64).ok_or_else(bad)?;
                    Ok((C::new(re, im), n as u32))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(ExpForm1::new(t))
        })
        .collect()
}

fn point(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<f64> = s.split(',').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| input(format!("bad point {s}")))?;
    match parts.as_slice() {
        [x, y] => Ok((*x, *y)),
        _ => Err(input(format!("bad point {s}"))),
    }
}

fn path_piece(s: &str) -> Result<Path, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["segment", a, b] => {
            let (a, b) = (point(a)?, point(b)?);
            Ok(Path::segment(C::new(a.0, a.1), C::new(b.0, b.1)))
        }
        ["to-cusp", a] => {
            let (x, y) = point(a)?;
            Ok(Path::to_cusp(x, y)?)
        }
        ["from-cusp", a] => {
            let (x, y) = point(a)?;
            Ok(Path::from_cusp(x, y)?)
        }
        _ => Err(input(format!("bad path piece {s}"))),
    }
}

pub fn chen(a: &ChenArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let forms = forms1(&read_json(&a.forms)?)?;
    let pieces = a.paths.iter().map(|s| path_piece(s)).collect::<Result<Vec<_>, _>>()?;
    let g = if pieces.len() == 1 { pieces.into_iter().next().unwrap() } else { Path::concat(pieces)? };
    let s = generating_series_f(&forms, &g, cfg.depth, &cfg.quad())?;
    let records = s
        .terms
        .iter()
        .map(|(w, c)| {
            let word: Vec<String> = w.iter().map(|x| format!("X{x}")).collect();
            json!({"word": word.join(""), "re": c.re, "im": c.im})
        })
        .collect();
    let m = meta(json!({"depth": cfg.depth, "forms": forms.len(), "tolerance": cfg.tolerance}));
    Ok(Output::table(m, records))
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    /// D_u between the rays z1 = (u1/u2) z2 and z1 = (u2/u1) z2, the symbol {0, ∞; u, u⁻¹}.
    UnitDiangle,
    /// The plain diangle between the rays z1 = r_start z2 and z1 = r_end z2.
    Diangle,
    /// Im(H) × Im(H).
    Quadrant,
    /// The triangle {0, 1, ∞} on the diagonal.
    Triangle,
}

#[derive(Args)]
pub struct MembraneArgs {
    /// JSON 2-form `{"d", "terms": [{"re", "im", "a", "b"}]}` or an array of them.
    #[arg(long)]
    pub forms: Option<PathBuf>,
    /// Adds the form e(αz) for α = a + bω.
    #[arg(long)]
    pub alpha: Vec<String>,
    #[arg(long, value_enum, default_value = "unit-diangle")]
    pub shape: ShapeArg,
    /// Unit of the unit diangle: `eps` or `a,b`.
    #[arg(long, default_value = "eps")]
    pub u: String,
    #[arg(long, default_value_t = 1.0)]
    pub r_start: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r_end: f64,
    /// Also print the type-b generating series up to --depth.
    #[arg(long)]
    pub series: bool,
}

fn letters(w: &[Letter]) -> String {
    w.iter().map(|l| if l.tag == 0 { format!("{}", l.gen) } else { format!("{}'{}", l.gen, l.tag) }).collect::<Vec<_>>().join(" ")
}

pub fn membrane(a: &MembraneArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let k = make_field(cfg.d)?;
    let forms = forms2(&k, &a.forms, &a.alpha)?;
    let g = match a.shape {
        ShapeArg::UnitDiangle => Membrane::diangle_unit(&k, &element(&k, &a.u)?)?,
        ShapeArg::Diangle => Membrane::diangle(a.r_start, a.r_end)?,
        ShapeArg::Quadrant => Membrane::imaginary_quadrant(),
        ShapeArg::Triangle => Membrane::triangle(),
    };
    let quad = cfg.quad();
    let e = membrane_integral_type_a(&forms, &g, &quad)?;
    let mut m = meta(json!({"forms": forms.len(), "integral": estimate(&e)}));
    if !a.series {
        return Ok(Output::single(Value::Object(m)));
    }
    if cfg.depth > 3 {
        return Err(input("membrane series depth must be at most 3"));
    }
    let s = generating_series_jb(&forms, &g, cfg.depth, &quad)?;
    m.insert("depth".into(), json!(cfg.depth));
    let records = s.terms.iter().map(|(mono, c)| json!({"x": letters(&mono.x), "y": letters(&mono.y), "re": c.re, "im": c.im})).collect();
    Ok(Output::table(m, records))
}

#[derive(Args)]
pub struct SymbolArgs {
    /// Three (triangle) or four (diangle) cusps: `inf`, `p` or `p/q` with p, q given as `a` or `(a,b)`.
    #[arg(long = "point", required = true, num_args = 1, allow_hyphen_values = true)]
    pub points: Vec<String>,
    #[arg(long)]
    pub forms: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Vec<String>,
}

pub fn symbol(a: &SymbolArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let k = make_field(cfg.d)?;
    let forms = forms2(&k, &a.forms, &a.alpha)?;
    let p = a.points.iter().map(|s| Cusp::parse(k.field, s)).collect::<Result<Vec<_>, _>>()?;
    let (sym, info) = match p.as_slice() {
        [p1, p2, p3] => {
            let (_, t) = build_triangle(p1, p2, p3)?;
            (Symbol::Triangle([p1.clone(), p2.clone(), p3.clone()]), json!({"kind": "triangle", "curve": format!("{:?}", t.curve)}))
        }
        [p1, p2, p3, p4] => {
            let (_, d) = build_diangle(p1, p2, p3, p4)?;
            let info = json!({
                "kind": "diangle",
                "ratio": d.ratio,
                "orientation": d.orientation,
                "degenerate": d.is_degenerate(),
                "curves": d.curves.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>(),
            });
            (Symbol::Diangle([p1.clone(), p2.clone(), p3.clone(), p4.clone()]), info)
        }
        _ => return Err(input("a symbol needs three or four points")),
    };
    let quad = cfg.quad();
    let mut m = meta(info);
    m.insert("points".into(), json!(p.iter().map(|c| c.to_string()).collect::<Vec<_>>()));
    let records = forms
        .iter()
        .enumerate()
        .map(|(i, f)| Ok(json!({"form": i + 1, "pairing": estimate(&pair_commutative(&sym, f, &quad)?)})))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Output::table(m, records))
}

#[derive(Args)]
pub struct DiangleArgs {
    /// Totally positive unit: `eps` or `a,b`.
    #[arg(long, default_value = "eps")]
    pub u: String,
    /// Totally positive exponent α = a + bω (repeatable).
    #[arg(long, default_value = "1,0")]
    pub alpha: Vec<String>,
}

pub fn diangle(a: &DiangleArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let k = make_field(cfg.d)?;
    let u = element(&k, &a.u)?;
    let g = Membrane::diangle_unit(&k, &u)?;
    let quad = cfg.quad();
    let mut records = Vec::new();
    for s in &a.alpha {
        let alpha = element(&k, s)?;
        if !alpha.is_totally_positive() {
            return Err(input(format!("α = {alpha} is not totally positive")));
        }
        let e = membrane_integral_type_a(&[ExpForm2::single(alpha.clone(), C::new(1.0, 0.0))?], &g, &quad)?;
        let exact = unit_diangle_closed_form(&u, &alpha);
        records.push(json!({
            "alpha": alpha.to_string(),
            "quadrature": estimate(&e),
            "closed_form": complex(exact),
            "relative_difference": rel_diff(e.value, exact, 1e-300),
        }));
    }
    Ok(Output::table(meta(json!({"d": k.d(), "u": u.to_string()})), records))
}

#[derive(Args)]
pub struct ZetaArgs {
    /// Exponents `k_1,…,k_m`; a single value is repeated --depth times.
    #[arg(long, default_value = "2")]
    pub k: String,
    /// Unit powers of the cones (`0,…` by default).
    #[arg(long)]
    pub powers: Option<String>,
    /// Compute Z(m, n) for the two exponents instead, summing ε^k C over the unit window.
    #[arg(long)]
    pub z: bool,
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|_| input(format!("bad list {s}")))).collect()
}

pub fn zeta(a: &ZetaArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let k = make_field(cfg.d)?;
    let mut ks: Vec<u32> = list(&a.k)?;
    if ks.len() == 1 {
        ks = vec![ks[0]; cfg.depth];
    }
    let powers: Vec<i32> = match &a.powers {
        Some(p) => list(p)?,
        None => vec![0; ks.len()],
    };
    if powers.len() != ks.len() {
        return Err(input("--powers and --k must have the same length"));
    }
    let spec = ConeSumSpec::new(&k, &powers, &ks, cfg.height_bound).with_window(cfg.window);
    let base = json!({"d": k.d(), "exponents": ks, "height_bound": cfg.height_bound});
    if a.z {
        let [m, n] = ks[..] else { return Err(input("Z(m, n) needs two exponents")) };
        let z = z_value(m, n, &spec)?;
        let mut out = meta(base);
        out.insert("window".into(), json!(z.window));
        out.insert("value".into(), json!(z.value));
        out.insert("tail_bound".into(), json!(z.tail_bound));
        out.insert("majorant".into(), json!(z_majorant(m, n, &spec)?));
        let records = z.terms.iter().map(|(k, v)| json!({"k": k, "term": v})).collect();
        return Ok(Output::table(out, records));
    }
    let s = mdzv(&spec)?;
    let mut out = meta(base);
    out.insert("powers".into(), json!(powers));
    out.insert("value".into(), json!(s.value));
    out.insert("tail_bound".into(), json!(s.tail_bound));
    Ok(Output::single(Value::Object(out)))
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Series,
    Integral,
    Both,
}

#[derive(Args)]
pub struct LvalueArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: ModeArg,
    /// Seed exponent of f = Σ_{|j| ≤ orbit} e(ε^j α z).
    #[arg(long, default_value = "1,0")]
    pub alpha: String,
    /// Seed exponent of g.
    #[arg(long, default_value = "3,1")]
    pub beta: String,
    /// Coefficient `re,im` of g.
    #[arg(long, default_value = "0.5,0.5", allow_hyphen_values = true)]
    pub coeff: String,
    #[arg(long, default_value_t = 3)]
    pub orbit: u32,
}

pub fn lvalue(a: &LvalueArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let k = make_field(cfg.d)?;
    let c: Vec<f64> = list(&a.coeff)?;
    let [re, im] = c[..] else { return Err(input("--coeff must be re,im")) };
    if a.orbit > 10 {
        return Err(input("--orbit must be at most 10"));
    }
    let f = unit_orbit_form(&k, C::new(1.0, 0.0), &element(&k, &a.alpha)?, a.orbit)?;
    let g = unit_orbit_form(&k, C::new(re, im), &element(&k, &a.beta)?, a.orbit)?;
    let quad = cfg.quad();
    let mut out = meta(json!({"d": k.d(), "m": a.m, "n": a.n, "window": cfg.window, "prefactor": complex(l_prefactor(a.m + a.n))}));
    let mut series = None;
    let mut integral = None;
    if a.mode != ModeArg::Integral {
        let s = l_double(&k, &f, &g, a.m, a.n, LMode::Series, cfg.window, &quad)?;
        out.insert("series".into(), complex(s));
        series = Some(s * l_prefactor(a.m + a.n));
        out.insert("series_times_prefactor".into(), complex(series.unwrap()));
    }
    if a.mode != ModeArg::Series {
        let i = l_double(&k, &f, &g, a.m, a.n, LMode::Integral, cfg.window, &quad)?;
        integral = Some(i);
        out.insert("integral".into(), complex(i));
    }
    if let (Some(s), Some(i)) = (series, integral) {
        out.insert("relative_gap".into(), json!(rel_diff(s, i, 1e-300)));
    }
    Ok(Output::single(Value::Object(out)))
}

#[derive(Args)]
pub struct VerifyArgs {
    /// shuffle, chen, membrane, symbols, dedekind or all.
    #[arg(value_parser = parse_suite)]
    pub suite: Suite,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

pub fn verify(a: &VerifyArgs, cfg: &RunConfig) -> Result<(Output, bool), CliError> {
    let out = run(a.suite, &cfg.suite())?;
    let mut records = Vec::new();
    for s in &out.suites {
        for (name, rep) in &s.sections {
            for c in &rep.checks {
                records.push(json!({
                    "suite": s.suite.name(), "section": name, "check": c.name,
                    "residual": c.residual, "tolerance": c.tolerance, "passed": c.passed,
                }));
            }
        }
    }
    let json = serde_json::to_value(&out).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok((Output { json, records: Some(records) }, out.passed))
}
