//! Parametrized membranes in `H²`: maps from the unit square with their
//! Jacobians.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::ExpForm2;
use crate::quadfield::{FieldContext, QuadInt};
use crate::quadrature::{geometric_breaks, Substitution};
use crate::report::Report;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Height coordinate along one imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `y = a + (b - a) t`.
    Linear { a: f64, b: f64 },
    /// `y = φ(t)`, from `0` up to the cusp.
    ToCusp(Substitution),
    /// `y = φ(1 - t)`, from the cusp down to `0`.
    FromCusp(Substitution),
}

impl Axis {
    pub fn to_cusp() -> Self {
        Axis::ToCusp(Substitution::Rational { scale: 1.0, power: 1 })
    }

    pub fn from_cusp() -> Self {
        Axis::FromCusp(Substitution::Rational { scale: 1.0, power: 1 })
    }

    /// `(y, dy/dt)`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Axis::Linear { a, b } => (a + (b - a) * t, b - a),
            Axis::ToCusp(s) => s.eval(t),
            Axis::FromCusp(s) => {
                let (y, dy) = s.eval(1.0 - t);
                (y, -dy)
            }
        }
    }

    pub fn is_unbounded(&self) -> bool {
        !matches!(self, Axis::Linear { .. })
    }

    pub(crate) fn with_substitution(&self, sub: Substitution) -> Axis {
        match self {
            Axis::Linear { .. } => *self,
            Axis::ToCusp(_) => Axis::ToCusp(sub),
            Axis::FromCusp(_) => Axis::FromCusp(sub),
        }
    }

    /// Panel breakpoints in `t`: uniform for a linear axis, geometric in `y`
    /// between `y_lo` and `y_hi` otherwise.
    pub(crate) fn breaks(&self, y_lo: f64, y_hi: f64, rate: f64) -> Vec<f64> {
        match *self {
            Axis::Linear { a, b } => {
                let panels = 1 + (rate * (b - a).abs() / 6.0) as usize;
                (0..=panels).map(|k| k as f64 / panels as f64).collect()
            }
            Axis::ToCusp(s) => geometric_breaks(&s, y_lo, y_hi, 8.0),
            Axis::FromCusp(s) => geometric_breaks(&s, y_lo, y_hi, 8.0).iter().rev().map(|t| 1.0 - t).collect(),
        }
    }
}

/// A real linear fractional map acting on one factor of `H²`:
/// `z ↦ (az+b)/(cz+d)` when `ad - bc > 0` and `z ↦ (a z̄ + b)/(c z̄ + d)` otherwise,
/// so that the upper half-plane is preserved in both cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mobius {
    pub fn identity() -> Self {
        Mobius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_conjugating(&self) -> bool {
        self.det() < 0.0
    }

    fn arg(&self, z: C) -> C {
        if self.is_conjugating() {
            z.conj()
        } else {
            z
        }
    }

    pub fn apply(&self, z: C) -> C {
        let w = self.arg(z);
        (w * self.a + self.b) / (w * self.c + self.d)
    }

    /// Value and the pushed-forward tangent vectors `∂/∂t1`, `∂/∂t2`.
    pub fn push(&self, z: C, dz: [C; 2]) -> (C, [C; 2]) {
        let w = self.arg(z);
        let den = w * self.c + self.d;
        let deriv = self.det() / (den * den);
        let dw = if self.is_conjugating() { [dz[0].conj(), dz[1].conj()] } else { dz };
        ((w * self.a + self.b) / den, [deriv * dw[0], deriv * dw[1]])
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Self {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Image of a boundary point; `None` is `∞`.
    pub fn apply_boundary(&self, x: Option<f64>) -> Option<f64> {
        let (num, den) = match x {
            Some(x) => (self.a * x + self.b, self.c * x + self.d),
            None => (self.a, self.c),
        };
        if den.abs() <= 1e-14 * num.abs().max(1.0) {
            None
        } else {
            Some(num / den)
        }
    }
}

/// Monotone self-map of `[0, 1]` applied to one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reparam {
    Identity,
    /// `t ↦ t^k`, `k > 0`.
    Power(f64),
    /// `t ↦ t + a sin(πt)/π`, `|a| < 1`.
    Sine(f64),
}

impl Reparam {
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match *self {
            Reparam::Identity => (t, 1.0),
            Reparam::Power(k) => (t.powf(k), k * t.powf(k - 1.0)),
            Reparam::Sine(a) => (t + a * (PI * t).sin() / PI, 1.0 + a * (PI * t).cos()),
        }
    }

    /// Inverse map, by Newton's method for the sine family.
    pub fn inverse(&self, s: f64) -> f64 {
        match *self {
            Reparam::Identity => s,
            Reparam::Power(k) => s.powf(1.0 / k),
            Reparam::Sine(_) => {
                let mut t = s;
                for _ in 0..60 {
                    let (v, d) = self.eval(t);
                    let step = (v - s) / d;
                    t = (t - step).clamp(0.0, 1.0);
                    if step.abs() < 1e-16 {
                        break;
                    }
                }
                t
            }
        }
    }

    fn valid(&self) -> bool {
        match *self {
            Reparam::Identity => true,
            Reparam::Power(k) => k > 0.0,
            Reparam::Sine(a) => a.abs() < 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `(t1, t2) ↦ (i·Y1(t1), i·Y2(t2))`.
    Box { axes: [Axis; 2] },
    /// `(t1, t2) ↦ (r(t1)·w(t2), w(t2))` with `r` geometric from `r_start` to
    /// `r_end` and `w = φ(t)·(i + slide·4t(1-t))`, `φ` running from `0` to the cusp.
    Diangle { r_start: f64, r_end: f64, height: Axis, slide: f64 },
    /// The ideal triangle `T(0, 1, ∞)` on the diagonal, `w = x(s) + i(√(x(1-x)) + u(v))`.
    Triangle { height: Axis },
}

/// A point of a membrane with its tangent vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembranePoint {
    pub z: [C; 2],
    /// `dz[k][l] = ∂z_k/∂t_l`.
    pub dz: [[C; 2]; 2],
}

impl MembranePoint {
    pub fn jacobian(&self) -> C {
        self.dz[0][0] * self.dz[1][1] - self.dz[0][1] * self.dz[1][0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membrane {
    pub shape: Shape,
    /// Post-composed action, one map per factor.
    pub action: Option<[Mobius; 2]>,
    pub reparam: [Reparam; 2],
}

impl Membrane {
    pub fn from_shape(shape: Shape) -> Self {
        Membrane { shape, action: None, reparam: [Reparam::Identity; 2] }
    }

    pub fn boxed(a1: Axis, a2: Axis) -> Self {
        Self::from_shape(Shape::Box { axes: [a1, a2] })
    }

    /// `(t1, t2) ↦ (i(t1 + 1), i(t2 + 1))`.
    pub fn unit_box() -> Self {
        let a = Axis::Linear { a: 1.0, b: 2.0 };
        Self::boxed(a, a)
    }

    /// `Im(H) × Im(H)` with both coordinates running from the cusp down to `0`.
    pub fn imaginary_quadrant() -> Self {
        Self::boxed(Axis::from_cusp(), Axis::from_cusp())
    }

    /// The region between the rays `z1 = r_start·z2` and `z1 = r_end·z2` on the imaginary axes.
    pub fn diangle(r_start: f64, r_end: f64) -> Result<Self> {
        if !(r_start > 0.0 && r_end > 0.0) {
            return Err(Error::InvalidInput("diangle ratios must be positive".into()));
        }
        Ok(Self::from_shape(Shape::Diangle { r_start, r_end, height: Axis::to_cusp(), slide: 0.0 }))
    }

    /// `D_u` between `(iu1 t, iu2 t)` and `(iu2 t, iu1 t)` for a totally positive unit `u`.
    pub fn diangle_unit(_field: &FieldContext, u: &QuadInt) -> Result<Self> {
        if !u.is_unit() || !u.is_totally_positive() {
            return Err(Error::InvalidInput(format!("{u} is not a totally positive unit")));
        }
        let (u1, u2) = u.embed();
        Self::diangle(u1 / u2, u2 / u1)
    }

    pub fn triangle() -> Self {
        Self::from_shape(Shape::Triangle { height: Axis::to_cusp() })
    }

    /// Post-composes with `action` (applied after any existing action).
    pub fn translated(mut self, action: [Mobius; 2]) -> Self {
        self.action = Some(match self.action {
            None => action,
            Some(old) => [action[0].compose(&old[0]), action[1].compose(&old[1])],
        });
        self
    }

    pub fn reparametrized(mut self, p1: Reparam, p2: Reparam) -> Result<Self> {
        if !p1.valid() || !p2.valid() || self.reparam != [Reparam::Identity; 2] {
            return Err(Error::InvalidInput("invalid reparametrization".into()));
        }
        self.reparam = [p1, p2];
        Ok(self)
    }

    /// Moves the interior of a diangle horizontally by `delta·4t(1-t)` times the height while keeping
    /// each side on its curve `z1 = r·z2`.
    pub fn slid(mut self, delta: f64) -> Result<Self> {
        match &mut self.shape {
            Shape::Diangle { slide, .. } => {
                *slide += delta;
                Ok(self)
            }
            _ => Err(Error::InvalidInput("only diangles can slide along their sides".into())),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self.shape {
            Shape::Diangle { r_start, r_end, .. } => (r_end / r_start).ln().abs() < 1e-12,
            _ => false,
        }
    }

    /// Whether the membrane is the bare box (no action, no reparametrization).
    pub(crate) fn plain_box(&self) -> Option<[Axis; 2]> {
        match (self.shape, self.action, self.reparam) {
            (Shape::Box { axes }, None, [Reparam::Identity, Reparam::Identity]) => Some(axes),
            _ => None,
        }
    }

    /// Ratios of a bare, unslid diangle.
    pub(crate) fn plain_fan(&self) -> Option<(f64, f64)> {
        match (self.shape, self.action, self.reparam) {
            (Shape::Diangle { r_start, r_end, slide, .. }, None, [Reparam::Identity, Reparam::Identity]) if slide == 0.0 => {
                Some((r_start, r_end))
            }
            _ => None,
        }
    }

    /// Same map up to reparametrization of the unbounded coordinates.
    pub(crate) fn with_substitution(&self, sub: Substitution) -> Self {
        let mut g = *self;
        g.shape = match self.shape {
            Shape::Box { axes } => Shape::Box { axes: [axes[0].with_substitution(sub), axes[1].with_substitution(sub)] },
            Shape::Diangle { r_start, r_end, height, slide } => {
                Shape::Diangle { r_start, r_end, height: height.with_substitution(sub), slide }
            }
            Shape::Triangle { height } => Shape::Triangle { height: height.with_substitution(sub) },
        };
        g
    }

    fn eval_shape(&self, t1: f64, t2: f64) -> MembranePoint {
        match self.shape {
            Shape::Box { axes } => {
                let (y1, d1) = axes[0].eval(t1);
                let (y2, d2) = axes[1].eval(t2);
                MembranePoint { z: [I * y1, I * y2], dz: [[I * d1, C::new(0.0, 0.0)], [C::new(0.0, 0.0), I * d2]] }
            }
            Shape::Diangle { r_start, r_end, height, slide } => {
                let l = (r_end / r_start).ln();
                let r = r_start * (l * t1).exp();
                let dr = r * l;
                let (y, dy) = height.eval(t2);
                let bend = C::new(slide * 4.0 * t2 * (1.0 - t2), 1.0);
                let w = y * bend;
                let dw = dy * bend + y * slide * 4.0 * (1.0 - 2.0 * t2);
                MembranePoint { z: [w * r, w], dz: [[w * dr, dw * r], [C::new(0.0, 0.0), dw]] }
            }
            Shape::Triangle { height } => {
                let x = 0.5 * (1.0 - (PI * t1).cos());
                let dx = 0.5 * PI * (PI * t1).sin();
                let h = 0.5 * (PI * t1).sin();
                let dh = 0.5 * PI * (PI * t1).cos();
                let (u, du) = height.eval(t2);
                let w = C::new(x, h + u);
                let ws = C::new(dx, dh);
                let wv = C::new(0.0, du);
                MembranePoint { z: [w, w], dz: [[ws, wv], [ws, wv]] }
            }
        }
    }

    /// Point and tangent vectors at parameters `(t1, t2)`.
    pub fn eval(&self, t1: f64, t2: f64) -> MembranePoint {
        let (s1, p1) = self.reparam[0].eval(t1);
        let (s2, p2) = self.reparam[1].eval(t2);
        let mut pt = self.eval_shape(s1, s2);
        for row in pt.dz.iter_mut() {
            row[0] *= p1;
            row[1] *= p2;
        }
        if let Some(act) = self.action {
            for k in 0..2 {
                let (z, dz) = act[k].push(pt.z[k], pt.dz[k]);
                pt.z[k] = z;
                pt.dz[k] = dz;
            }
        }
        pt
    }

    /// Pulled-back density `f(g(t))·det ∂(z1, z2)/∂(t1, t2)`.
    pub fn density(&self, f: &ExpForm2, t1: f64, t2: f64) -> C {
        let p = self.eval(t1, t2);
        f.eval(p.z[0], p.z[1]) * p.jacobian()
    }

    /// Boundary points touched by the membrane, as pairs of embedded real
    /// coordinates; `None` is `∞`.
    pub fn cusps(&self) -> Vec<[Option<f64>; 2]> {
        let base: Vec<Option<f64>> = match self.shape {
            Shape::Box { axes } => {
                if axes.iter().any(Axis::is_unbounded) {
                    vec![None]
                } else {
                    vec![]
                }
            }
            Shape::Diangle { .. } => vec![Some(0.0), None],
            Shape::Triangle { .. } => vec![Some(0.0), Some(1.0), None],
        };
        base.into_iter()
            .map(|p| match self.action {
                None => [p, p],
                Some(act) => [act[0].apply_boundary(p), act[1].apply_boundary(p)],
            })
            .collect()
    }

    /// Whether some touched cusp is `∞` in both factors, where only decaying forms are integrable.
    pub fn touches_infinity(&self) -> bool {
        self.cusps().iter().any(|c| c[0].is_none() && c[1].is_none())
    }

    /// Samples `samples` points on leaves `t1 = const` and `t2 = const` and checks
    /// that each leaf stays on one holomorphic curve of the expected kind.
    pub fn verify_foliation(&self, leaves: usize, samples: usize) -> Report {
        let mut r = Report::new();
        let inv = self.action.map(|a| [a[0].inverse(), a[1].inverse()]);
        let pull = |t1: f64, t2: f64| -> [C; 2] {
            let mut z = self.eval(t1, t2).z;
            if let Some(m) = inv {
                z = [m[0].apply(z[0]), m[1].apply(z[1])];
            }
            z
        };
        let ts = |k: usize, n: usize| 0.02 + 0.96 * k as f64 / (n - 1).max(1) as f64;
        let (mut res1, mut res2) = (0.0f64, 0.0f64);
        for a in 0..leaves {
            let s = ts(a, leaves);
            let z0 = pull(s, 0.5);
            let w0 = pull(0.5, s);
            for b in 0..samples {
                let t = ts(b, samples);
                // leaf t1 = s
                let z = pull(s, t);
                let w = pull(t, s);
                match self.shape {
                    Shape::Box { .. } => {
                        res1 = res1.max((z[0] - z0[0]).norm() / z0[0].norm());
                        res2 = res2.max((w[1] - w0[1]).norm() / w0[1].norm());
                    }
                    Shape::Diangle { .. } => {
                        res1 = res1.max((z[0] / z[1] - z0[0] / z0[1]).norm() / (z0[0] / z0[1]).norm());
                        res2 = res2.max((w[1] - w0[1]).norm() / w0[1].norm());
                    }
                    Shape::Triangle { .. } => {
                        res1 = res1.max((z[0] - z[1]).norm() / z[0].norm());
                        res2 = res2.max((w[0] - w[1]).norm() / w[0].norm());
                    }
                }
            }
        }
        r.push("leaves t1=const", res1, 1e-9);
        r.push("leaves t2=const", res2, 1e-9);
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::make_field;

    fn fd_jacobian(g: &Membrane, t1: f64, t2: f64) -> C {
        let h = 1e-6;
        let d1: Vec<C> = (0..2).map(|k| (g.eval(t1 + h, t2).z[k] - g.eval(t1 - h, t2).z[k]) / (2.0 * h)).collect();
        let d2: Vec<C> = (0..2).map(|k| (g.eval(t1, t2 + h).z[k] - g.eval(t1, t2 - h).z[k]) / (2.0 * h)).collect();
        d1[0] * d2[1] - d2[0] * d1[1]
    }

    fn samples() -> Vec<Membrane> {
        let act = [Mobius { a: 0.0, b: -1.0, c: 1.0, d: 0.5 }, Mobius { a: 2.0, b: 1.0, c: 1.0, d: -1.0 }];
        vec![
            Membrane::unit_box(),
            Membrane::imaginary_quadrant(),
            Membrane::diangle(0.2, 3.0).unwrap(),
            Membrane::diangle(0.2, 3.0).unwrap().slid(0.3).unwrap(),
            Membrane::diangle(0.2, 3.0).unwrap().translated(act),
            Membrane::diangle(0.5, 2.0).unwrap().reparametrized(Reparam::Power(2.0), Reparam::Sine(0.4)).unwrap(),
            Membrane::triangle(),
            Membrane::triangle().translated(act),
        ]
    }

    #[test]
    fn jacobians_match_finite_differences() {
        for g in samples() {
            for (t1, t2) in [(0.3, 0.4), (0.71, 0.22), (0.5, 0.9)] {
                let j = g.eval(t1, t2).jacobian();
                let fd = fd_jacobian(&g, t1, t2);
                assert!((j - fd).norm() < 1e-6 * j.norm().max(1.0), "{g:?} {j} {fd}");
                let z = g.eval(t1, t2).z;
                assert!(z[0].im > 0.0 && z[1].im > 0.0);
            }
        }
    }

    #[test]
    fn holomorphic_triangle_has_zero_density() {
        let g = Membrane::triangle();
        assert!(g.eval(0.3, 0.6).jacobian().norm() < 1e-15);
        let mixed = [Mobius::identity(), Mobius { a: -1.0, b: 0.0, c: 0.0, d: 1.0 }];
        assert!(Membrane::triangle().translated(mixed).eval(0.3, 0.6).jacobian().norm() > 0.1);
    }

    #[test]
    fn mobius_preserves_upper_half_plane_and_composes() {
        let m = Mobius { a: 1.0, b: 2.0, c: -3.0, d: 0.5 };
        let n = Mobius { a: -1.0, b: 0.3, c: 0.2, d: 1.0 };
        for z in [C::new(0.2, 0.7), C::new(-3.0, 0.01), C::new(5.0, 4.0)] {
            assert!(m.apply(z).im > 0.0 && n.apply(z).im > 0.0);
            let lhs = m.compose(&n).apply(z);
            let rhs = m.apply(n.apply(z));
            assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
            assert!((m.inverse().apply(m.apply(z)) - z).norm() < 1e-12);
        }
        assert_eq!(Mobius { a: 0.0, b: 1.0, c: 1.0, d: 0.0 }.apply_boundary(Some(0.0)), None);
    }

    #[test]
    fn foliation_holds() {
        for g in samples() {
            let r = g.verify_foliation(10, 100);
            assert!(r.passed(), "{g:?} {r:?}");
        }
    }

    #[test]
    fn unit_diangle_sides() {
        let k = make_field(2).unwrap();
        let g = Membrane::diangle_unit(&k, &k.eps).unwrap();
        let (e1, e2) = k.eps.embed();
        let z = g.eval(0.0, 0.5).z;
        assert!(((z[0] / z[1]).re - e1 / e2).abs() < 1e-9);
        let z = g.eval(1.0, 0.5).z;
        assert!(((z[0] / z[1]).re - e2 / e1).abs() < 1e-12);
        assert!(Membrane::diangle_unit(&k, &k.elem(1, 1)).is_err());
        assert!(Membrane::diangle(2.0, 2.0).unwrap().is_degenerate());
        assert!(g.touches_infinity());
        assert!(!Membrane::unit_box().touches_infinity());
    }
}
