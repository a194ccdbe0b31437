//! Value domains.
//!
//! Rational and hyperbolic families evaluate in exact rationals.  A hyperbolic
//! parameter θ is carried multiplicatively as t = e^θ, so every Z/sh of an
//! integer combination of parameters is a rational function of the t's and a
//! residual is either exactly zero or it is not.  The elliptic family runs in
//! complex doubles.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Rat = BigRational;
pub type C64 = Complex64;

pub fn rat(p: i64, q: i64) -> Rat {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Canonical "p/q" rendering; integers keep their "/1".
pub fn rat_str(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Common interface of the two value types (exact rationals, complex doubles).
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + Send + Sync + 'static + Num + Neg<Output = Self>
{
    const EXACT: bool;

    fn int(n: i64) -> Self;
    fn ratio(p: i64, q: i64) -> Self;
    fn mag(&self) -> f64;
    fn to_c64(&self) -> C64;
    fn from_c64(z: C64) -> Option<Self>;
    fn render(&self) -> Value;

    /// Zero test used by every check: exact for rationals, relative to
    /// `scale` for floats.
    fn negligible(&self, scale: f64, tol: f64) -> bool;

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn int(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn ratio(p: i64, q: i64) -> Self {
        rat(p, q)
    }
    fn mag(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_c64(_: C64) -> Option<Self> {
        None
    }
    fn render(&self) -> Value {
        Value::String(rat_str(self))
    }
    fn negligible(&self, _: f64, _: f64) -> bool {
        self.is_zero()
    }
}

impl Scalar for C64 {
    const EXACT: bool = false;

    fn int(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn ratio(p: i64, q: i64) -> Self {
        C64::new(p as f64 / q as f64, 0.0)
    }
    fn mag(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn from_c64(z: C64) -> Option<Self> {
        Some(z)
    }
    fn render(&self) -> Value {
        json!([self.re, self.im])
    }
    fn negligible(&self, scale: f64, tol: f64) -> bool {
        self.is_finite() && self.norm() <= tol * scale.max(f64::MIN_POSITIVE)
    }
}

/// A parameter in one of the two encodings.
#[derive(Clone, Debug, PartialEq)]
pub enum Par<S> {
    /// θ itself (rational and elliptic families).
    Add(S),
    /// e^θ (hyperbolic families).  Addition of parameters multiplies.
    Exp(S),
}

impl<S: Scalar> Par<S> {
    pub fn is_exp(&self) -> bool {
        matches!(self, Par::Exp(_))
    }

    pub fn zero_like(&self) -> Self {
        match self {
            Par::Add(_) => Par::Add(S::zero()),
            Par::Exp(_) => Par::Exp(S::one()),
        }
    }

    /// k·θ
    pub fn times(&self, k: i64) -> Self {
        match self {
            Par::Add(a) => Par::Add(a.clone() * S::int(k)),
            Par::Exp(t) => {
                let base = if k < 0 { t.recip() } else { t.clone() };
                let mut acc = S::one();
                for _ in 0..k.unsigned_abs() {
                    acc = acc * base.clone();
                }
                Par::Exp(acc)
            }
        }
    }

    /// θ for additive parameters.
    pub fn val(&self) -> S {
        match self {
            Par::Add(a) => a.clone(),
            Par::Exp(_) => panic!("additive value requested from an exponential parameter"),
        }
    }

    /// Z(θ) = e^θ
    pub fn z(&self) -> S {
        match self {
            Par::Exp(t) => t.clone(),
            Par::Add(_) => panic!("Z requested from an additive parameter"),
        }
    }

    /// sh(θ) = sinh θ
    pub fn sh(&self) -> S {
        let t = self.z();
        (t.clone() - t.recip()) / S::int(2)
    }

    /// cosh θ
    pub fn ch(&self) -> S {
        let t = self.z();
        (t.clone() + t.recip()) / S::int(2)
    }

    pub fn render(&self) -> Value {
        match self {
            Par::Add(a) => json!({ "add": a.render() }),
            Par::Exp(t) => json!({ "exp": t.render() }),
        }
    }
}

impl<S: Scalar> Add for &Par<S> {
    type Output = Par<S>;
    fn add(self, o: &Par<S>) -> Par<S> {
        match (self, o) {
            (Par::Add(a), Par::Add(b)) => Par::Add(a.clone() + b.clone()),
            (Par::Exp(a), Par::Exp(b)) => Par::Exp(a.clone() * b.clone()),
            _ => panic!("mixed parameter encodings"),
        }
    }
}

impl<S: Scalar> Sub for &Par<S> {
    type Output = Par<S>;
    fn sub(self, o: &Par<S>) -> Par<S> {
        match (self, o) {
            (Par::Add(a), Par::Add(b)) => Par::Add(a.clone() - b.clone()),
            (Par::Exp(a), Par::Exp(b)) => Par::Exp(a.clone() / b.clone()),
            _ => panic!("mixed parameter encodings"),
        }
    }
}

impl<S: Scalar> Neg for &Par<S> {
    type Output = Par<S>;
    fn neg(self) -> Par<S> {
        match self {
            Par::Add(a) => Par::Add(-a.clone()),
            Par::Exp(t) => Par::Exp(t.recip()),
        }
    }
}

impl<S: Scalar> Add for Par<S> {
    type Output = Par<S>;
    fn add(self, o: Par<S>) -> Par<S> {
        &self + &o
    }
}

impl<S: Scalar> Sub for Par<S> {
    type Output = Par<S>;
    fn sub(self, o: Par<S>) -> Par<S> {
        &self - &o
    }
}

impl<S: Scalar> Neg for Par<S> {
    type Output = Par<S>;
    fn neg(self) -> Par<S> {
        -&self
    }
}

/// Strictly positive e^θ, validated.
#[derive(Clone, Debug, PartialEq)]
pub struct HypParam {
    expv: Rat,
}

impl HypParam {
    pub fn new(expv: Rat) -> Result<Self> {
        if !expv.is_positive() {
            return Err(Error::Parse(format!(
                "hyperbolic parameter needs expv > 0, got {}",
                rat_str(&expv)
            )));
        }
        Ok(HypParam { expv })
    }

    pub fn expv(&self) -> &Rat {
        &self.expv
    }

    pub fn par(&self) -> Par<Rat> {
        Par::Exp(self.expv.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypKind {
    Exp,
    Sinh,
}

/// e^s or sinh(s) for s = Σ kᵢθᵢ, exactly.
pub fn hyp_eval(kind: HypKind, coeffs: &[i64], params: &[HypParam]) -> Result<Rat> {
    if coeffs.len() != params.len() {
        return Err(Error::Parse(format!(
            "hyp_eval: {} coefficients for {} parameters",
            coeffs.len(),
            params.len()
        )));
    }
    let mut acc = Par::Exp(Rat::one());
    for (k, p) in coeffs.iter().zip(params) {
        acc = &acc + &p.par().times(*k);
    }
    Ok(match kind {
        HypKind::Exp => acc.z(),
        HypKind::Sinh => acc.sh(),
    })
}

// ---------------------------------------------------------------------------
// Expression wrapper: lets polynomial transcriptions read like the formulas
// (`&xa * &xc - &xb * &xd`) without sprinkling clones everywhere.

#[derive(Clone, Debug, PartialEq)]
pub struct V<S>(pub S);

impl<S: Scalar> V<S> {
    pub fn int(n: i64) -> Self {
        V(S::int(n))
    }
    pub fn ratio(p: i64, q: i64) -> Self {
        V(S::ratio(p, q))
    }
    pub fn one() -> Self {
        V(S::one())
    }
    pub fn zero() -> Self {
        V(S::zero())
    }
    pub fn sq(&self) -> Self {
        V(self.0.clone() * self.0.clone())
    }
    pub fn cube(&self) -> Self {
        V(self.0.clone() * self.0.clone() * self.0.clone())
    }
    pub fn into_inner(self) -> S {
        self.0
    }
}

macro_rules! v_binop {
    ($tr:ident, $m:ident) => {
        impl<S: Scalar> std::ops::$tr<V<S>> for V<S> {
            type Output = V<S>;
            fn $m(self, o: V<S>) -> V<S> {
                V(self.0.$m(o.0))
            }
        }
        impl<S: Scalar> std::ops::$tr<&V<S>> for V<S> {
            type Output = V<S>;
            fn $m(self, o: &V<S>) -> V<S> {
                V(self.0.$m(o.0.clone()))
            }
        }
        impl<S: Scalar> std::ops::$tr<V<S>> for &V<S> {
            type Output = V<S>;
            fn $m(self, o: V<S>) -> V<S> {
                V(self.0.clone().$m(o.0))
            }
        }
        impl<S: Scalar> std::ops::$tr<&V<S>> for &V<S> {
            type Output = V<S>;
            fn $m(self, o: &V<S>) -> V<S> {
                V(self.0.clone().$m(o.0.clone()))
            }
        }
        impl<S: Scalar> std::ops::$tr<i64> for V<S> {
            type Output = V<S>;
            fn $m(self, o: i64) -> V<S> {
                V(self.0.$m(S::int(o)))
            }
        }
        impl<S: Scalar> std::ops::$tr<i64> for &V<S> {
            type Output = V<S>;
            fn $m(self, o: i64) -> V<S> {
                V(self.0.clone().$m(S::int(o)))
            }
        }
        impl<S: Scalar> std::ops::$tr<V<S>> for i64 {
            type Output = V<S>;
            fn $m(self, o: V<S>) -> V<S> {
                V(S::int(self).$m(o.0))
            }
        }
        impl<S: Scalar> std::ops::$tr<&V<S>> for i64 {
            type Output = V<S>;
            fn $m(self, o: &V<S>) -> V<S> {
                V(S::int(self).$m(o.0.clone()))
            }
        }
    };
}
v_binop!(Add, add);
v_binop!(Sub, sub);
v_binop!(Mul, mul);
v_binop!(Div, div);

impl<S: Scalar> Neg for V<S> {
    type Output = V<S>;
    fn neg(self) -> V<S> {
        V(-self.0)
    }
}

impl<S: Scalar> Neg for &V<S> {
    type Output = V<S>;
    fn neg(self) -> V<S> {
        V(-self.0.clone())
    }
}

/// Z(θ) and sh(θ) wrapped.
pub fn zv<S: Scalar>(p: &Par<S>) -> V<S> {
    V(p.z())
}

pub fn shv<S: Scalar>(p: &Par<S>) -> V<S> {
    V(p.sh())
}

pub fn valv<S: Scalar>(p: &Par<S>) -> V<S> {
    V(p.val())
}

/// `base` when the flag is set, 1 otherwise (flag exponents).
pub fn pw<S: Scalar>(base: V<S>, e: u8) -> V<S> {
    if e != 0 {
        base
    } else {
        V::one()
    }
}

// ---------------------------------------------------------------------------
// Weierstrass ℘

const LAURENT_TERMS: usize = 40;
const MAX_DEPTH: u32 = 40;
const OVERFLOW: f64 = 1e150;

#[derive(Clone, Debug, PartialEq)]
pub struct EllipticContext {
    pub g2: C64,
    pub g3: C64,
    pub tol: f64,
    coeffs: Vec<C64>,
    seed_radius: f64,
}

impl EllipticContext {
    pub fn new(g2: C64, g3: C64, tol: f64) -> Result<Self> {
        let disc = g2 * g2 * g2 - 27.0 * g3 * g3;
        if disc.norm() <= 1e-12 * (1.0 + g2.norm().powi(3) + g3.norm().powi(2)) {
            return Err(Error::DegenerateCurve);
        }
        // c_k multiplies z^(2k-2); c_0 = c_1 = 0 apart from the 1/z² pole
        let mut c = vec![C64::new(0.0, 0.0); LAURENT_TERMS + 2];
        c[2] = g2 / 20.0;
        c[3] = g3 / 28.0;
        for k in 4..LAURENT_TERMS + 2 {
            let mut s = C64::new(0.0, 0.0);
            for m in 2..=k - 2 {
                s += c[m] * c[k - m];
            }
            c[k] = s * (3.0 / ((2 * k + 1) as f64 * (k - 3) as f64));
        }
        // keep the seed well inside the period lattice
        let scale = 1f64.max(g2.norm().powf(0.25)).max(g3.norm().powf(1.0 / 6.0));
        Ok(EllipticContext { g2, g3, tol, coeffs: c, seed_radius: 1.0 / scale })
    }

    /// Default curve used by the elliptic suites.
    pub fn standard() -> Self {
        Self::new(C64::new(1.3, 0.2), C64::new(-0.7, 0.4), 1e-12).expect("nondegenerate")
    }

    fn seed(&self, z: C64) -> (C64, C64) {
        let z2 = z * z;
        let mut p = z2.inv();
        let mut dp = -2.0 * (z2 * z).inv();
        // z^(2k-3) and z^(2k-2), starting at k = 2
        let mut odd = z;
        for k in 2..self.coeffs.len() {
            p += self.coeffs[k] * odd * z;
            dp += self.coeffs[k] * odd * (2 * k - 2) as f64;
            odd *= z2;
        }
        (p, dp)
    }

    /// (℘(z), ℘′(z))
    pub fn wp(&self, z: C64) -> Result<(C64, C64)> {
        if !z.is_finite() || z.norm() == 0.0 {
            return Err(Error::PoleAtLatticePoint(format!("{z}")));
        }
        let mut n = 0;
        while z.norm() / 2f64.powi(n as i32) > self.seed_radius {
            n += 1;
            if n > MAX_DEPTH {
                return Err(Error::NonConvergent(f64::INFINITY));
            }
        }
        let (mut p, mut dp) = self.seed(z / 2f64.powi(n as i32));
        for _ in 0..n {
            if dp.norm() * OVERFLOW < p.norm().powf(1.5) || !dp.is_finite() {
                return Err(Error::PoleAtLatticePoint(format!("{z}")));
            }
            // tangent-line duplication on y² = 4x³ − g2 x − g3
            let lam = (6.0 * p * p - self.g2 / 2.0) / dp;
            let p2 = lam * lam / 4.0 - 2.0 * p;
            let dp2 = -dp - lam * (p2 - p);
            p = p2;
            dp = dp2;
            if p.norm() > OVERFLOW || dp.norm() > OVERFLOW {
                return Err(Error::PoleAtLatticePoint(format!("{z}")));
            }
        }
        let scale = dp.norm_sqr().max((4.0 * p * p * p).norm()).max(1.0);
        let res = (dp * dp - (4.0 * p * p * p - self.g2 * p - self.g3)).norm() / scale;
        if !(res <= self.tol) {
            return Err(Error::NonConvergent(res));
        }
        Ok((p, dp))
    }

    /// ẋ = 4x³ − g2 x − g3
    pub fn xdot(&self, x: C64) -> C64 {
        4.0 * x * x * x - self.g2 * x - self.g3
    }
}

pub fn weierstrass_eval(z: C64, ctx: &EllipticContext) -> Result<(C64, C64)> {
    ctx.wp(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(p: i64, q: i64) -> HypParam {
        HypParam::new(rat(p, q)).unwrap()
    }

    #[test]
    fn hyp_eval_examples() {
        assert_eq!(hyp_eval(HypKind::Exp, &[0], &[hp(5, 3)]).unwrap(), rat(1, 1));
        assert_eq!(hyp_eval(HypKind::Sinh, &[1, -1], &[hp(7, 2), hp(7, 2)]).unwrap(), rat(0, 1));
        assert_eq!(hyp_eval(HypKind::Sinh, &[1], &[hp(2, 1)]).unwrap(), rat(3, 4));
        assert!(hyp_eval(HypKind::Exp, &[1, 2], &[hp(2, 1)]).is_err());
        assert!(HypParam::new(rat(-1, 2)).is_err());
    }

    #[test]
    fn combos_are_products() {
        let (a, b) = (hp(3, 2), hp(5, 7));
        let v = hyp_eval(HypKind::Exp, &[2, -3], &[a, b]).unwrap();
        assert_eq!(v, rat(9, 4) * rat(343, 125));
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(rat_str(&rat(4, -6)), "-2/3");
        assert_eq!(rat_str(&rat(3, 1)), "3/1");
        assert_eq!(parse_rat("-2/3").unwrap(), rat(-2, 3));
        assert_eq!(parse_rat("7").unwrap(), rat(7, 1));
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn wp_near_origin() {
        let ctx = EllipticContext::standard();
        for z in [C64::new(1e-4, 0.0), C64::new(0.0, 1e-4), C64::new(7e-5, -7e-5)] {
            let (p, _) = ctx.wp(z).unwrap();
            assert!((p * z * z - 1.0).norm() < 1e-7);
        }
    }

    #[test]
    fn wp_parity_and_ode() {
        let ctx = EllipticContext::standard();
        for z in [C64::new(0.3, 0.2), C64::new(-0.7, 0.05), C64::new(0.45, -0.1)] {
            let (p, dp) = ctx.wp(z).unwrap();
            let (pm, dpm) = ctx.wp(-z).unwrap();
            assert!((p - pm).norm() <= 1e-12 * p.norm());
            assert!((dp + dpm).norm() <= 1e-12 * dp.norm());
            let res = (dp * dp - ctx.xdot(p)).norm();
            assert!(res <= 1e-12 * dp.norm_sqr().max(1.0), "{res}");
        }
    }

    #[test]
    fn wp_pole_and_degenerate_curve() {
        let ctx = EllipticContext::standard();
        assert!(matches!(ctx.wp(C64::new(0.0, 0.0)), Err(Error::PoleAtLatticePoint(_))));
        assert!(EllipticContext::new(C64::new(3.0, 0.0), C64::new(1.0, 0.0), 1e-12).is_err());
    }
}
