use std::time::{Duration, Instant};

use hms_core::membrane::{membrane_integral_type_a, Membrane};
use hms_core::forms::ExpForm2;
use hms_core::quadfield::make_field;
use hms_core::quadrature::QuadratureConfig;
use hms_core::report::{rel_diff, Report};
use hms_core::suites::{lemma_alphas, run, unit_diangle_closed_form, Suite, SuiteConfig, VerifyOutput};
use num_complex::Complex64;

struct Line {
    ok: bool,
    text: String,
}

fn section<'a>(out: &'a VerifyOutput, suite: Suite, name: &str) -> &'a Report {
    let s = out.suites.iter().find(|s| s.suite == suite).expect("suite missing");
    s.sections.get(name).unwrap_or_else(|| panic!("section {name} missing"))
}

fn checks<'a>(reports: &[&'a Report], filter: impl Fn(&str) -> bool) -> (bool, f64, usize) {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for r in reports {
        for c in r.checks.iter().filter(|c| filter(&c.name)) {
            ok &= c.passed;
            worst = worst.max(c.residual);
            n += 1;
        }
    }
    (ok && n > 0, worst, n)
}

fn line(id: u32, title: &str, ok: bool, detail: String) -> Line {
    Line { ok, text: format!("{} criterion {id}: {title} ({detail})", if ok { "PASS" } else { "FAIL" }) }
}

fn lemma_timing() -> Line {
    let k = make_field(2).unwrap();
    let g = Membrane::diangle_unit(&k, &k.eps).unwrap();
    let quad = QuadratureConfig::default();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for alpha in lemma_alphas(&k) {
        let t = Instant::now();
        let f = ExpForm2::single(alpha.clone(), Complex64::new(1.0, 0.0)).unwrap();
        let v = membrane_integral_type_a(&[f], &g, &quad).unwrap().value;
        let el = t.elapsed();
        slowest = slowest.max(el);
        let r = rel_diff(v, unit_diangle_closed_form(&k.eps, &alpha), 1e-300);
        worst = worst.max(r);
        ok &= r < 1e-6 && el < Duration::from_secs(5);
    }
    line(1, "unit diangle closed form, d=2, five alphas", ok, format!("max rel {worst:.2e}, slowest case {:.3}s", slowest.as_secs_f64()))
}

fn main() {
    let cfg = SuiteConfig::default();
    let t = Instant::now();
    let out = run(Suite::All, &cfg).expect("verify all");
    let first = serde_json::to_string_pretty(&out).unwrap();
    let elapsed = t.elapsed();

    let mut lines = vec![lemma_timing()];

    let counts = section(&out, Suite::Shuffle, "shuffle counts");
    let pairs = section(&out, Suite::Shuffle, "shuffle of permutations");
    let (ok, w, n) = checks(&[counts, pairs], |_| true);
    lines.push(line(2, "shuffle combinatorics", ok && w == 0.0, format!("{n} exact checks")));

    let comp = section(&out, Suite::Chen, "composition");
    let sh = section(&out, Suite::Chen, "path shuffle");
    let (ok, w, n) = checks(&[comp, sh], |_| true);
    lines.push(line(3, "path composition and shuffle laws", ok, format!("{n} checks, max {w:.2e}")));

    let ms = section(&out, Suite::Membrane, "membrane shuffle");
    let ss = section(&out, Suite::Membrane, "series shuffle");
    let (ok1, w1, n1) = checks(&[ms], |_| true);
    let (ok2, w2, n2) = checks(&[ss], |_| true);
    lines.push(line(
        4,
        "membrane shuffle and collapsed series shuffle",
        ok1 && ok2,
        format!("{n1} permutation pairs max {w1:.2e}; series {n2} checks max {w2:.2e}"),
    ));
    for (name, v) in &ss.info {
        println!("INFO series shuffle {name}: {v:.3e}");
    }

    let rep = section(&out, Suite::Membrane, "homotopy reparametrization");
    let sl = section(&out, Suite::Membrane, "homotopy sliding");
    let (ok1, w1, _) = checks(&[rep], |_| true);
    let (ok2, w2, _) = checks(&[sl], |_| true);
    lines.push(line(5, "homotopy invariance", ok1 && ok2, format!("reparametrization {w1:.2e}, sliding {w2:.2e}")));

    let r2 = section(&out, Suite::Symbols, "commutative relations d=2");
    let r5 = section(&out, Suite::Symbols, "commutative relations d=5");
    let (ok3, w3, _) = checks(&[r2, r5], |n| n.contains("one curve"));
    let (ok4, w4, _) = checks(&[r2, r5], |n| n.contains("orientation"));
    let (ok5, w5, _) = checks(&[r2, r5], |n| n.contains("additivity"));
    let (oka, _, na) = checks(&[r2, r5], |_| true);
    lines.push(line(
        6,
        "commutative relations, d=2 and d=5",
        ok3 && ok4 && ok5 && oka,
        format!("vanishing {w3:.2e}, sign flip {w4:.2e}, additivity {w5:.2e}, {na} checks"),
    ));

    let or = section(&out, Suite::Dedekind, "single-term oracle");
    let ld = section(&out, Suite::Dedekind, "L double series vs integral");
    let fit = section(&out, Suite::Dedekind, "prefactor fit");
    let (ok1, w1, _) = checks(&[or], |_| true);
    let (ok2, w2, _) = checks(&[ld], |_| true);
    let (ok3, w3, _) = checks(&[fit], |n| n.contains("across"));
    lines.push(line(
        7,
        "integral and series agreement",
        ok1 && ok2 && ok3,
        format!("oracle {w1:.2e}, L double {w2:.2e}, prefactor spread {w3:.2e}"),
    ));
    for (name, v) in &fit.info {
        println!("INFO prefactor {name}: {v:.6e}");
    }

    let z = section(&out, Suite::Dedekind, "cone sums");
    let (ok1, w1, _) = checks(&[z], |n| n.starts_with("Z(3,2) K="));
    let (ok2, w2, _) = checks(&[z], |n| n.starts_with("per-k"));
    lines.push(line(8, "Z(3,2) window stability and decay", ok1 && ok2, format!("window diff {w1:.2e}, worst ratio {w2:.3}")));

    let t2 = Instant::now();
    let second = serde_json::to_string_pretty(&run(Suite::All, &cfg).expect("verify all")).unwrap();
    let total = elapsed + t2.elapsed();
    lines.push(line(
        9,
        "determinism and runtime",
        first == second && elapsed < Duration::from_secs(600),
        format!("identical JSON: {}, one run {:.1}s", first == second, elapsed.as_secs_f64()),
    ));
    println!("INFO verify all twice: {:.1}s", total.as_secs_f64());

    for l in &lines {
        println!("{}", l.text);
    }
    if !out.passed {
        for l in out.table().lines().filter(|l| l.starts_with("FAIL")) {
            println!("{l}");
        }
    }
    if !lines.iter().all(|l| l.ok) {
        eprintln!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
