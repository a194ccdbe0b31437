//! Equation catalogue: ABS quad polynomials, type-A/type-C face-centered quad
//! polynomials, their P1 coefficients, the trapezoidal type-H form, the
//! face → ABS correspondence and the square / face symmetries.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{pw, shv, valv, zv, EllipticContext, Par, Scalar, C64, V};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Rational,
    Hyperbolic,
    Elliptic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Quad,
    Face,
}

/// One equation family with its flags.  C3's δ's are exact halves and are
/// stored doubled; every other flag is 0 or 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Q1 { d: u8 },
    Q2,
    Q3 { d: u8 },
    Q4,
    H1 { e: u8 },
    H2 { e: u8 },
    H3 { d: u8, e: u8 },
    A2 { d1: u8, d2: u8 },
    A3 { d: u8 },
    A4,
    C1 { d: u8 },
    C2 { d1: u8, d2: u8, d3: u8 },
    C3 { d2x: [u8; 3] },
}

impl Family {
    /// Every legal family, in table order.
    pub fn all() -> Vec<Family> {
        use Family::*;
        vec![
            Q4,
            Q3 { d: 1 },
            Q3 { d: 0 },
            Q2,
            Q1 { d: 1 },
            Q1 { d: 0 },
            H3 { d: 1, e: 1 },
            H3 { d: 1, e: 0 },
            H3 { d: 0, e: 0 },
            H2 { e: 1 },
            H2 { e: 0 },
            H1 { e: 1 },
            H1 { e: 0 },
            A4,
            A3 { d: 1 },
            A3 { d: 0 },
            A2 { d1: 1, d2: 1 },
            A2 { d1: 1, d2: 0 },
            A2 { d1: 0, d2: 0 },
            C3 { d2x: [1, 1, 0] },
            C3 { d2x: [1, 0, 1] },
            C3 { d2x: [2, 0, 0] },
            C3 { d2x: [0, 0, 0] },
            C2 { d1: 1, d2: 1, d3: 0 },
            C2 { d1: 1, d2: 0, d3: 1 },
            C2 { d1: 1, d2: 0, d3: 0 },
            C2 { d1: 0, d2: 0, d3: 0 },
            C1 { d: 1 },
            C1 { d: 0 },
        ]
    }

    pub fn is_legal(&self) -> bool {
        Family::all().contains(self)
    }

    pub fn root(&self) -> &'static str {
        use Family::*;
        match self {
            Q1 { .. } => "Q1",
            Q2 => "Q2",
            Q3 { .. } => "Q3",
            Q4 => "Q4",
            H1 { .. } => "H1",
            H2 { .. } => "H2",
            H3 { .. } => "H3",
            A2 { .. } => "A2",
            A3 { .. } => "A3",
            A4 => "A4",
            C1 { .. } => "C1",
            C2 { .. } => "C2",
            C3 { .. } => "C3",
        }
    }

    /// Flag values as strings ("1/2" for C3 halves).
    pub fn flags(&self) -> Vec<String> {
        use Family::*;
        let half = |h: u8| match h {
            0 => "0".to_string(),
            1 => "1/2".to_string(),
            _ => "1".to_string(),
        };
        match *self {
            Q2 | Q4 | A4 => vec![],
            Q1 { d } | Q3 { d } | A3 { d } | C1 { d } => vec![d.to_string()],
            H1 { e } | H2 { e } => vec![e.to_string()],
            H3 { d, e } => vec![d.to_string(), e.to_string()],
            A2 { d1, d2 } => vec![d1.to_string(), d2.to_string()],
            C2 { d1, d2, d3 } => vec![d1.to_string(), d2.to_string(), d3.to_string()],
            C3 { d2x } => d2x.iter().map(|&h| half(h)).collect(),
        }
    }

    /// Label as printed in the tables, e.g. `C3(1/2;1/2;0)`.
    pub fn label(&self) -> String {
        let f = self.flags();
        if f.is_empty() {
            self.root().to_string()
        } else {
            format!("{}({})", self.root(), f.join(";"))
        }
    }

    /// Serialized identifier, e.g. `Q3:d=1`, `H3:d=1,e=0`, `C3:1/2,1/2,0`.
    pub fn id(&self) -> String {
        use Family::*;
        match *self {
            Q2 | Q4 | A4 => self.root().to_string(),
            Q1 { d } | Q3 { d } | A3 { d } | C1 { d } => format!("{}:d={d}", self.root()),
            H1 { e } | H2 { e } => format!("{}:e={e}", self.root()),
            H3 { d, e } => format!("H3:d={d},e={e}"),
            _ => format!("{}:{}", self.root(), self.flags().join(",")),
        }
    }

    /// Name usable on a command line: `C3_1/2_1/2_0`, `Q2`, `A2_1_0`.
    pub fn combo_name(&self) -> String {
        let mut s = self.root().to_string();
        for f in self.flags() {
            s.push('_');
            s.push_str(&f);
        }
        s
    }

    /// Build from a root name and flag strings ("0", "1", "1/2", "d=1").
    pub fn from_parts(root: &str, flags: &[&str]) -> Result<Family> {
        let bad = || Error::Parse(format!("unknown family {root}{flags:?}"));
        let bit = |s: &str| -> Result<u8> {
            match s.rsplit('=').next().unwrap_or("").trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(bad()),
            }
        };
        let half = |s: &str| -> Result<u8> {
            match s.trim() {
                "0" => Ok(0),
                "1/2" => Ok(1),
                "1" => Ok(2),
                _ => Err(bad()),
            }
        };
        let n = flags.len();
        let need = |k: usize| if n == k { Ok(()) } else { Err(bad()) };
        let f = match root.trim().to_ascii_uppercase().as_str() {
            "Q1" => {
                need(1)?;
                Family::Q1 { d: bit(flags[0])? }
            }
            "Q2" => {
                need(0)?;
                Family::Q2
            }
            "Q3" => {
                need(1)?;
                Family::Q3 { d: bit(flags[0])? }
            }
            "Q4" => {
                need(0)?;
                Family::Q4
            }
            "H1" => {
                need(1)?;
                Family::H1 { e: bit(flags[0])? }
            }
            "H2" => {
                need(1)?;
                Family::H2 { e: bit(flags[0])? }
            }
            "H3" => {
                need(2)?;
                Family::H3 { d: bit(flags[0])?, e: bit(flags[1])? }
            }
            "A2" => {
                need(2)?;
                Family::A2 { d1: bit(flags[0])?, d2: bit(flags[1])? }
            }
            "A3" => {
                need(1)?;
                Family::A3 { d: bit(flags[0])? }
            }
            "A4" => {
                need(0)?;
                Family::A4
            }
            "C1" => {
                need(1)?;
                Family::C1 { d: bit(flags[0])? }
            }
            "C2" => {
                need(3)?;
                Family::C2 { d1: bit(flags[0])?, d2: bit(flags[1])?, d3: bit(flags[2])? }
            }
            "C3" => {
                need(3)?;
                Family::C3 { d2x: [half(flags[0])?, half(flags[1])?, half(flags[2])?] }
            }
            _ => return Err(bad()),
        };
        if !f.is_legal() {
            return Err(Error::Parse(format!("{} is not a listed flag combination", f.label())));
        }
        Ok(f)
    }

    pub fn shape(&self) -> Shape {
        use Family::*;
        match self {
            Q1 { .. } | Q2 | Q3 { .. } | Q4 | H1 { .. } | H2 { .. } | H3 { .. } => Shape::Quad,
            _ => Shape::Face,
        }
    }

    pub fn domain(&self) -> Domain {
        use Family::*;
        match self {
            Q4 | A4 => Domain::Elliptic,
            Q3 { .. } | H3 { .. } | A3 { .. } | C3 { .. } => Domain::Hyperbolic,
            _ => Domain::Rational,
        }
    }

    pub fn is_type_h(&self) -> bool {
        matches!(self, Family::H1 { .. } | Family::H2 { .. } | Family::H3 { .. })
    }

    pub fn is_type_c(&self) -> bool {
        matches!(self, Family::C1 { .. } | Family::C2 { .. } | Family::C3 { .. })
    }

    pub fn is_type_a(&self) -> bool {
        matches!(self, Family::A2 { .. } | Family::A3 { .. } | Family::A4)
    }

    /// ε of a type-H family.
    pub fn epsilon(&self) -> Option<u8> {
        match *self {
            Family::H1 { e } | Family::H2 { e } | Family::H3 { e, .. } => Some(e),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Split "A2:1,0", "A2(1;0)", "A2_1_0", "H3:d=1,e=0" into root and flags.
fn split_family(s: &str) -> (String, Vec<String>) {
    let s = s.trim();
    let cut = s.find([':', '(', '_']).unwrap_or(s.len());
    let root = s[..cut].to_string();
    let rest = s[cut..].trim_matches(|c: char| matches!(c, ':' | '(' | ')' | '_'));
    let flags = rest
        .split([',', ';', '_'])
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    (root, flags)
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        let (root, flags) = split_family(s);
        let flags: Vec<&str> = flags.iter().map(String::as_str).collect();
        Family::from_parts(&root, &flags)
    }
}

/// A family plus the optional (x_a↔x_b, x_c↔x_d) substitution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EquationSpec {
    pub family: Family,
    pub swap_ab_cd: bool,
}

impl EquationSpec {
    pub fn new(family: Family) -> Self {
        EquationSpec { family, swap_ab_cd: false }
    }

    pub fn swapped(family: Family) -> Self {
        EquationSpec { family, swap_ab_cd: true }
    }

    pub fn id(&self) -> String {
        let mut s = self.family.id();
        if self.swap_ab_cd {
            s.push_str(";swap");
        }
        s
    }
}

impl From<Family> for EquationSpec {
    fn from(f: Family) -> Self {
        EquationSpec::new(f)
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for EquationSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (body, swap) = match s.trim().strip_suffix(";swap") {
            Some(b) => (b, true),
            None => (s.trim(), false),
        };
        Ok(EquationSpec { family: body.parse()?, swap_ab_cd: swap })
    }
}

impl Serialize for EquationSpec {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        s.serialize_str(&self.id())
    }
}

impl Serialize for Family {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        s.serialize_str(&self.id())
    }
}

// ---------------------------------------------------------------------------
// domain checks

fn check_domain<S: Scalar>(fam: Family, ps: &[&Par<S>], ell: Option<&EllipticContext>) -> Result<()> {
    let mismatch = |why: &str| Err(Error::DomainMismatch(format!("{}: {why}", fam.label())));
    match fam.domain() {
        Domain::Hyperbolic => {
            if !ps.iter().all(|p| p.is_exp()) {
                return mismatch("hyperbolic family needs e^θ-encoded parameters");
            }
        }
        Domain::Rational => {
            if ps.iter().any(|p| p.is_exp()) {
                return mismatch("rational family needs additive parameters");
            }
        }
        Domain::Elliptic => {
            if S::EXACT {
                return mismatch("elliptic family evaluates in complex doubles");
            }
            if ps.iter().any(|p| p.is_exp()) {
                return mismatch("elliptic family needs additive parameters");
            }
            if ell.is_none() {
                return Err(Error::EllipticUnavailable(fam.label()));
            }
        }
    }
    Ok(())
}

fn wrap4<S: Scalar>(x: &[S; 4]) -> [V<S>; 4] {
    [V(x[0].clone()), V(x[1].clone()), V(x[2].clone()), V(x[3].clone())]
}

fn to_c<S: Scalar>(v: &S) -> C64 {
    v.to_c64()
}

fn from_c<S: Scalar>(z: C64) -> Result<S> {
    S::from_c64(z).ok_or_else(|| Error::DomainMismatch("complex value in exact domain".into()))
}

// ---------------------------------------------------------------------------
// quad polynomials

/// Published ABS polynomial, after the optional argument swap.
pub fn eval_quad<S: Scalar>(
    spec: &EquationSpec,
    x: &[S; 4],
    a: &Par<S>,
    b: &Par<S>,
    ell: Option<&EllipticContext>,
) -> Result<S> {
    let fam = spec.family;
    if fam.shape() != Shape::Quad {
        return Err(Error::NotApplicable("eval_quad".into(), fam.label()));
    }
    check_domain(fam, &[a, b], ell)?;
    let x = if spec.swap_ab_cd {
        [x[1].clone(), x[0].clone(), x[3].clone(), x[2].clone()]
    } else {
        x.clone()
    };
    if fam == Family::Q4 {
        let xs = [to_c(&x[0]), to_c(&x[1]), to_c(&x[2]), to_c(&x[3])];
        let v = q4(&xs, to_c(&a.val()), to_c(&b.val()), ell.expect("checked"))?;
        return from_c(v);
    }
    Ok(quad_poly(fam, &wrap4(&x), a, b).into_inner())
}

fn quad_poly<S: Scalar>(fam: Family, x: &[V<S>; 4], pa: &Par<S>, pb: &Par<S>) -> V<S> {
    let [xa, xb, xc, xd] = x;
    match fam {
        Family::Q1 { d } => {
            let (a, b) = (valv(pa), valv(pb));
            &a * (xa - xc) * (xb - xd) - &b * (xa - xb) * (xc - xd) + d as i64 * &a * &b * (&a - &b)
        }
        Family::Q2 => {
            let (a, b) = (valv(pa), valv(pb));
            let q10 = &a * (xa - xc) * (xb - xd) - &b * (xa - xb) * (xc - xd);
            q10 + &a * &b * (&a - &b) * (xa + xb + xc + xd + &a * &b - a.sq() - b.sq())
        }
        Family::Q3 { d } => {
            let amb = pa - pb;
            shv(pa) * (xa * xb + xc * xd) - shv(pb) * (xa * xc + xb * xd) - shv(&amb) * (xa * xd + xb * xc)
                - d as i64 * shv(pa) * shv(pb) * shv(&amb)
        }
        Family::H1 { e } => {
            let (a, b) = (valv(pa), valv(pb));
            (xa - xd) * (xb - xc) + 2 * (&a - &b) - e as i64 * (&a - &b) * (2 + xa + xd)
        }
        Family::H2 { e } => {
            let (a, b) = (valv(pa), valv(pb));
            let amb = &a - &b;
            let s = &a + &b + 1;
            (xa - xd) * (xb - xc) - &amb * (xa + xb + xc + xd) - (a.sq() - b.sq())
                + V::ratio(e as i64, 2) * &amb * ((2 * xa + &s) * (2 * xd + &s) + amb.sq() - 1)
        }
        Family::H3 { d, e } => {
            zv(pa) * (xa * xc + xb * xd) - zv(pb) * (xa * xb + xc * xd)
                - shv(&(pa - pb)) * (V::int(d as i64 * (2 - e as i64)) + e as i64 * zv(&(pa + pb)) * xa * xd)
        }
        _ => unreachable!("not a quad family"),
    }
}

/// Trapezoidal type-H form: H*(a,b,c,d;α,β) = H(a,d,c,b;β−α,β).
pub fn trapezoidal<S: Scalar>(
    spec: &EquationSpec,
    x: &[S; 4],
    a: &Par<S>,
    b: &Par<S>,
    ell: Option<&EllipticContext>,
) -> Result<S> {
    if !spec.family.is_type_h() {
        return Err(Error::NotApplicable("trapezoidal form".into(), spec.family.label()));
    }
    let y = [x[0].clone(), x[3].clone(), x[2].clone(), x[1].clone()];
    eval_quad(spec, &y, &(b - a), b, ell)
}

// ---------------------------------------------------------------------------
// face polynomials

/// Published face-centered quad polynomial.
pub fn eval_face<S: Scalar>(
    spec: &EquationSpec,
    x: &S,
    c: &[S; 4],
    p: &[Par<S>; 3],
    ell: Option<&EllipticContext>,
) -> Result<S> {
    let fam = spec.family;
    if fam.shape() != Shape::Face {
        return Err(Error::NotApplicable("eval_face".into(), fam.label()));
    }
    check_domain(fam, &[&p[0], &p[1], &p[2]], ell)?;
    let c = if spec.swap_ab_cd {
        [c[1].clone(), c[0].clone(), c[3].clone(), c[2].clone()]
    } else {
        c.clone()
    };
    if fam == Family::A4 {
        let xs = [to_c(&c[0]), to_c(&c[1]), to_c(&c[2]), to_c(&c[3])];
        let ps = [to_c(&p[0].val()), to_c(&p[1].val()), to_c(&p[2].val())];
        return from_c(a4(to_c(x), &xs, &ps, ell.expect("checked"))?);
    }
    Ok(face_poly(fam, &V(x.clone()), &wrap4(&c), p).into_inner())
}

fn face_poly<S: Scalar>(fam: Family, x: &V<S>, c: &[V<S>; 4], p: &[Par<S>; 3]) -> V<S> {
    let [xa, xb, xc, xd] = c;
    let [pa, pb, pg] = p;
    let x2 = x.sq();
    match fam {
        Family::A3 { d } => {
            let sa = shv(pa);
            let sb = shv(pb);
            let sbg = shv(&(pb - pg));
            let sag = shv(&(pa - pg));
            x * p_face(fam, c, p)
                + &sb * (xa * &x2 - xb * xc * xd)
                - &sbg * (xb * &x2 - xa * xc * xd)
                - &sa * (xc * &x2 - xa * xb * xd)
                + &sag * (xd * &x2 - xa * xb * xc)
                + d as i64
                    * (&sbg * &sag * (&sa * xa - &sb * xc)
                        + &sa * &sb * (shv(&(pg - pa)) * xb - shv(&(pg - pb)) * xd))
        }
        Family::A2 { d1, d2 } => {
            let (a, b, g) = (valv(pa), valv(pb), valv(pg));
            let phi = &a + &b - &g;
            let (d1, d2v) = (d1 as i64, d2 as i64);
            x * p_face(fam, c, p)
                - &a * (xc - xd) * (&x2 + xa * xb - d1 * b.sq() * pw(xa + xb - b.sq(), d2))
                + &b * (xa - xb) * (&x2 + xc * xd - d1 * a.sq() * pw(xc + xd - a.sq(), d2))
                + &g * (xb - xd)
                    * (&x2 + xa * xc - d1 * &a * &b * pw(xa + xc - (&a - &b).sq() - &a * &b, d2))
                + d1 * &g
                    * &phi
                    * ((&a * xa - &b * xc + d2v * (&a - &b) * &a * &b)
                        * pw(xb + xd + (&a - &g) * (&g - &b), d2)
                        + d2v * ((&a - &b) * (xa * xc - &x2) - a.cube() * xa + b.cube() * xc))
        }
        Family::C3 { d2x } => {
            let [d1, d2, d3] = d2x.map(|h| V::<S>::ratio(h as i64, 2));
            let phi = &(pa + pb) - pg;
            let zg = zv(pg);
            x * p_face(fam, c, p)
                + (xa * xb + 2 * &d2 * shv(pb) * shv(&(pb - pg))) * (xd - xc * &zg)
                + (xd * &zg - xc) * &x2
                + &d1
                    * zv(&-pa)
                    * (1 + 2 * &d2 * xc * xd * zv(&(&pa.times(2) - pg)))
                    * ((zv(pb) - 2 * &d3 * zv(&(&pa.times(2) - pb)) * &x2) * (xb * &zg - xa)
                        + (xa * &zg - xb) * (zv(&(pg - pb)) - 2 * &d3 * zv(&(pa + &phi)) * &x2))
        }
        Family::C2 { d1, d2, d3 } => {
            let (a, b, g) = (valv(pa), valv(pb), valv(pg));
            let w3 = pw(&g - 2 * &a, d3);
            let w2 = pw(&g - 2 * &a, d2);
            let (d1, d2v, d3v) = (d1 as i64, d2 as i64, d3 as i64);
            x * p_face(fam, c, p)
                + (&x2 - xa * xb) * &g * &w3
                - (&x2 + xa * xb) * (xc - xd)
                + d1 * &b * (&b - &g) * (&g * &w3 + (xc - xd)) * pw(&b * (&g - &b) + xa + xb, d2)
                - 2 * d3v * &g * (xa + xb) * &x2
                + d1 * (&b * (xa - xb) - &g * xa)
                    * (xc + xd + (2 * &a - &g) * &w3 + 2 * d3v * (&a * (&a - &g) - &x2))
                    * &w2
                + 2 * d2v
                    * (&b * &g * (&b - &g) * (&a + xc) * (&a - &g + xd)
                        + (&g * xa - &b * (xa - xb)) * (&a * (&g - &a) + xc * xd))
        }
        Family::C1 { d } => {
            let (b, g) = (valv(pb), valv(pg));
            x * p_face(fam, c, p)
                + 2 * (&b * (xa - xb) - &g * xa) * pw(-(xc + xd) / 2, d)
                + (&x2 + xa * xb + d as i64 * &b * (&g - &b)) * (xc - xd)
        }
        _ => unreachable!("not an exact face family"),
    }
}

/// Published P-polynomial (coefficient of the linear term in x).
fn p_face<S: Scalar>(fam: Family, c: &[V<S>; 4], p: &[Par<S>; 3]) -> V<S> {
    let [xa, xb, xc, xd] = c;
    let [pa, pb, pg] = p;
    match fam {
        Family::A3 { d } => {
            let phi = &(pa + pb) - pg;
            let samb = shv(&(pa - pb));
            let sphi = shv(&phi);
            let sg = shv(pg);
            (xa * xc - xb * xd) * &samb + (xc * xd - xa * xb) * &sg + (xb * xc - xa * xd) * &sphi
                + d as i64 * &samb * &sphi * &sg
        }
        Family::A2 { d1, d2 } => {
            let (a, b, g) = (valv(pa), valv(pb), valv(pg));
            let phi = &a + &b - &g;
            let d2v = d2 as i64;
            &a * (xc - xd) * (xa + xb + 2 * d2v * b.sq())
                - &b * (xa - xb) * (xc + xd + 2 * d2v * a.sq())
                - &g * (xb - xd) * (xa + xc + 2 * d2v * &a * &b)
                - d1 as i64
                    * &phi
                    * &g
                    * ((&a - &b) * pw(xa + xb + xc + xd + &g * &phi - a.sq() - b.sq(), d2)
                        - 2 * d2v * (&a * xa - &b * xc))
        }
        Family::C3 { d2x } => {
            let [d1, d2, d3] = d2x.map(|h| V::<S>::ratio(h as i64, 2));
            (xa * xc - xb * xd) * zv(pb)
                + (xb * xc - xa * xd) * zv(&(pg - pb))
                + &d1 * (zv(&-pa) - 2 * (&d3 * xa * xb - &d2 * xc * xd) * zv(&(pa - pg))) * (1 - zv(&pg.times(2)))
        }
        Family::C2 { d1, d2, d3 } => {
            let (a, b, g) = (valv(pa), valv(pb), valv(pg));
            let phi = &a + &b - &g;
            let w3 = pw(&g - 2 * &a, d3);
            (xa + xb + 2 * d2 as i64 * (&b - &g) * &b) * (xc - xd)
                + (xa - xb) * (2 * &b - &g) * &w3
                + d1 as i64 * &g * (xc + xd + (2 * &a - &g) * &w3) * pw(&g - 2 * &a, d2)
                + 2 * d2 as i64 * &g * ((&a - &g) * &a - xc * xd)
                + 2 * d3 as i64 * &g * ((&a - &b) * &phi + xa * xb)
        }
        Family::C1 { d } => {
            let g = valv(pg);
            2 * &g * pw(-(xc + xd) / 2, d) - (xa + xb) * (xc - xd)
        }
        _ => unreachable!("no published P1"),
    }
}

/// Coefficient form κ0 + κ1·x + κ2·x², with κ0 and κ2 transcribed by
/// collecting powers of x term by term (independent of `face_poly`).
pub fn face_coefficients<S: Scalar>(spec: &EquationSpec, c: &[S; 4], p: &[Par<S>; 3]) -> Result<[S; 3]> {
    let fam = spec.family;
    if fam.shape() != Shape::Face || fam == Family::A4 {
        return Err(Error::NotApplicable("coefficient form".into(), fam.label()));
    }
    check_domain(fam, &[&p[0], &p[1], &p[2]], None)?;
    let c = if spec.swap_ab_cd {
        [c[1].clone(), c[0].clone(), c[3].clone(), c[2].clone()]
    } else {
        c.clone()
    };
    let w = wrap4(&c);
    let [xa, xb, xc, xd] = &w;
    let [pa, pb, pg] = p;
    let k1 = p_face(fam, &w, p);
    let (k0, k2) = match fam {
        Family::A3 { d } => {
            let (sa, sb) = (shv(pa), shv(pb));
            let (sag, sbg) = (shv(&(pa - pg)), shv(&(pb - pg)));
            let k2 = &sb * xa - &sbg * xb - &sa * xc + &sag * xd;
            let cubic = &sa * xa * xb * xd + &sbg * xa * xc * xd - &sb * xb * xc * xd - &sag * xa * xb * xc;
            let konst = &sbg * &sag * (&sa * xa - &sb * xc) - &sa * &sb * (shv(&(pg - pb)) * xd - shv(&(pg - pa)) * xb);
            (cubic + d as i64 * konst, k2)
        }
        Family::A2 { d1, d2 } => {
            let (a, b, g) = (valv(pa), valv(pb), valv(pg));
            let phi = &a + &b - &g;
            let (d1v, d2v) = (d1 as i64, d2 as i64);
            let k2 = &b * (xa - xb) + &g * (xb - xd) - &a * (xc - xd) - d1v * d2v * &g * &phi * (&a - &b);
            let t_a = -(&a * (xc - xd)) * (xa * xb - d1v * b.sq() * pw(xa + xb - b.sq(), d2));
            let t_b = &b * (xa - xb) * (xc * xd - d1v * a.sq() * pw(xc + xd - a.sq(), d2));
            let t_g = &g * (xb - xd) * (xa * xc - d1v * &a * &b * pw(xa + xc - a.sq() + &a * &b - b.sq(), d2));
            let lin = &a * xa - &b * xc + d2v * &a * &b * (&a - &b);
            let t_d = d1v
                * &g
                * &phi
                * (lin * pw(xb + xd - &a * &b + &g * (&a + &b) - g.sq(), d2)
                    + d2v * ((&a - &b) * xa * xc + b.cube() * xc - a.cube() * xa));
            (t_a + t_b + t_g + t_d, k2)
        }
        Family::C3 { d2x } => {
            let [d1, d2, d3] = d2x.map(|h| V::<S>::ratio(h as i64, 2));
            let zg = zv(pg);
            let phi = &(pa + pb) - pg;
            let outer = &d1 * zv(&-pa) * (1 + 2 * &d2 * xc * xd * zv(&(&pa.times(2) - pg)));
            let u = xb * &zg - xa;
            let w = xa * &zg - xb;
            let k2 = (xd * &zg - xc) - 2 * &d3 * &outer * (zv(&(&pa.times(2) - pb)) * &u + zv(&(pa + &phi)) * &w);
            let k0 = (xa * xb + 2 * &d2 * shv(pb) * shv(&(pb - pg))) * (xd - xc * &zg)
                + &outer * (zv(pb) * &u + zv(&(pg - pb)) * &w);
            (k0, k2)
        }
        Family::C2 { d1, d2, d3 } => {
            let (a, b, g) = (valv(pa), valv(pb), valv(pg));
            let (d1v, d2v, d3v) = (d1 as i64, d2 as i64, d3 as i64);
            let w3 = pw(&g - 2 * &a, d3);
            let w2 = pw(&g - 2 * &a, d2);
            let m = &b * (xa - xb) - &g * xa;
            let k2 = &g * &w3 - (xc - xd) - 2 * d3v * &g * (xa + xb) - 2 * d1v * d3v * &m * &w2;
            let k0 = -(xa * xb) * (&g * &w3 + (xc - xd))
                + d1v * &b * (&b - &g) * (&g * &w3 + (xc - xd)) * pw(xa + xb + &b * &g - b.sq(), d2)
                + d1v * &m * (xc + xd + (2 * &a - &g) * &w3 + 2 * d3v * &a * (&a - &g)) * &w2
                + 2 * d2v * (&b * &g * (&b - &g) * (&a + xc) * (&a - &g + xd) - &m * (&a * (&g - &a) + xc * xd));
            (k0, k2)
        }
        Family::C1 { d } => {
            let (b, g) = (valv(pb), valv(pg));
            let k2 = xc - xd;
            let k0 = (xa * xb + d as i64 * &b * (&g - &b)) * (xc - xd)
                + 2 * (&b * (xa - xb) - &g * xa) * pw(-(xc + xd) / 2, d);
            (k0, k2)
        }
        _ => unreachable!(),
    };
    Ok([k0.into_inner(), k1.into_inner(), k2.into_inner()])
}

/// κ0 + κ1·x + κ2·x²
pub fn eval_face_coeff<S: Scalar>(spec: &EquationSpec, x: &S, c: &[S; 4], p: &[Par<S>; 3]) -> Result<S> {
    let [k0, k1, k2] = face_coefficients(spec, c, p)?;
    Ok(k0 + k1 * x.clone() + k2 * x.clone() * x.clone())
}

/// P1 from the published P-polynomials.  A zero value is reported as
/// degenerate rather than returned.
pub fn extract_p1<S: Scalar>(spec: &EquationSpec, corners: &[S; 4], p: &[Par<S>; 3]) -> Result<S> {
    let fam = spec.family;
    if fam.shape() != Shape::Face {
        return Err(Error::NotApplicable("P1 extraction".into(), fam.label()));
    }
    if fam == Family::A4 {
        return Err(Error::NotApplicable("P1 extraction (degree 10 in x)".into(), fam.label()));
    }
    check_domain(fam, &[&p[0], &p[1], &p[2]], None)?;
    let c = if spec.swap_ab_cd {
        [corners[1].clone(), corners[0].clone(), corners[3].clone(), corners[2].clone()]
    } else {
        corners.clone()
    };
    let v = p_face(fam, &wrap4(&c), p).into_inner();
    if v.is_zero() {
        return Err(Error::Degenerate(format!("P1 of {} vanishes at this sample", fam.label())));
    }
    Ok(v)
}

/// Isolation of the linear term by finite differences: (f(1) − f(−1))/2.
pub fn p1_by_difference<S: Scalar>(spec: &EquationSpec, corners: &[S; 4], p: &[Par<S>; 3]) -> Result<S> {
    let f1 = eval_face(spec, &S::one(), corners, p, None)?;
    let fm = eval_face(spec, &-S::one(), corners, p, None)?;
    Ok((f1 - fm) / S::int(2))
}

// ---------------------------------------------------------------------------
// elliptic polynomials

#[derive(Clone, Copy)]
struct Pt {
    p: C64,
    d: C64,
}

impl Pt {
    fn at(ctx: &EllipticContext, z: C64) -> Result<Pt> {
        let (p, d) = ctx.wp(z)?;
        Ok(Pt { p, d })
    }
}

fn q4(x: &[C64; 4], a: C64, b: C64, ctx: &EllipticContext) -> Result<C64> {
    let [xa, xb, xc, xd] = *x;
    let pa = Pt::at(ctx, a)?;
    let pb = Pt::at(ctx, b)?;
    let pab = Pt::at(ctx, a - b)?;
    let kb = (pa.p - pb.p) * (pab.p - pb.p);
    let ka = (pb.p - pa.p) * (pab.p - pa.p);
    Ok(pa.d * ((xa - pb.p) * (xc - pb.p) - kb) * ((xd - pb.p) * (xb - pb.p) - kb)
        + pb.d * ((xa - pa.p) * (xb - pa.p) - ka) * ((xc - pa.p) * (xd - pa.p) - ka)
        + pa.d * pb.d * pab.d * (pa.p - pb.p))
}

/// Helpers q, p0..p4, q1..q4 of the elliptic face polynomial, at fixed x.
struct Ell<'a> {
    ctx: &'a EllipticContext,
    x: C64,
    xdot: C64,
}

impl Ell<'_> {
    fn q(&self, a: Pt) -> C64 {
        (self.x - a.p) * (self.x - a.p)
    }
    fn p0(&self, a: Pt) -> C64 {
        2.0 * self.ctx.g3 + (self.x + a.p) * (self.ctx.g2 - 4.0 * self.x * a.p)
    }
    fn p1(&self, a: Pt) -> C64 {
        let t = 4.0 * self.x * a.p + self.ctx.g2;
        16.0 * (self.x + a.p) * self.ctx.g3 + t * t
    }
    fn p2(&self, a1: Pt, a2: Pt) -> C64 {
        a2.d * self.p0(a1) + a1.d * self.p0(a2)
    }
    fn p3(&self, a: [Pt; 3]) -> C64 {
        let mut s = -4.0 * self.xdot * a[0].d * a[1].d * a[2].d;
        for i in 0..3 {
            let mut t = a[i].d;
            for (j, aj) in a.iter().enumerate() {
                if j != i {
                    t *= self.p0(*aj);
                }
            }
            s -= t;
        }
        s
    }
    fn p4(&self, a: [Pt; 4]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..4 {
            let mut t1 = 4.0 * self.xdot * self.p0(a[i]);
            let mut t2 = a[i].d;
            for (j, aj) in a.iter().enumerate() {
                if j != i {
                    t1 *= aj.d;
                    t2 *= self.p0(*aj);
                }
            }
            s += t1 + t2;
        }
        s
    }
    fn q1(&self, y: C64, a: [Pt; 4]) -> C64 {
        self.p2(a[0], a[1]) * (self.p1(a[2]) * self.p1(a[3]) - 256.0 * self.q(a[2]) * self.q(a[3]) * y)
    }
    fn q2(&self, y1: C64, y2: C64, a: [Pt; 4]) -> C64 {
        self.p2(a[0], a[1]) * (self.p1(a[2]) * self.q(a[3]) * y1 - self.p1(a[3]) * self.q(a[2]) * y2)
    }
    fn q3(&self, y1: C64, y2: C64, a: [Pt; 4]) -> C64 {
        self.p3([a[0], a[1], a[2]]) * (16.0 * self.q(a[3]) * y1 - self.p1(a[3]) * y2)
    }
    fn q4(&self, y: C64, a: [Pt; 4]) -> C64 {
        self.p1(a[0])
            * self.q(a[1])
            * (a[2].d * (16.0 * self.q(a[3]) * y + self.p1(a[3])) + a[3].d * (16.0 * self.q(a[2]) * y + self.p1(a[2])))
    }
}

fn a4(x: C64, c: &[C64; 4], p: &[C64; 3], ctx: &EllipticContext) -> Result<C64> {
    let [xa, xb, xc, xd] = *c;
    let [al, bt, gm] = *p;
    let e = Ell { ctx, x, xdot: ctx.xdot(x) };
    let at = |z: C64| Pt::at(ctx, z);
    let a = at(al)?;
    let b = at(bt)?;
    let ag = at(al - gm)?;
    let bg = at(bt - gm)?;
    // ℘ is even and ℘′ odd
    let n = |t: Pt| Pt { p: t.p, d: -t.d };
    let pre = (32.0 * x * ctx.g3 + (4.0 * x * x + ctx.g2).powi(2) - 16.0 * at(al - bt)?.p * e.xdot)
        * (at(gm)?.p - at(al + bt - gm)?.p);
    let y4 = xa * xb * xc * xd;
    let mut s = e.q1(y4, [n(a), b, ag, bg]) + e.q1(y4, [a, bg, ag, b])
        - e.q1(y4, [ag, b, a, bg])
        - e.q1(y4, [n(ag), bg, a, b]);
    s -= 16.0
        * (e.p4([a, ag, b, bg]) * (xb * xc - xa * xd)
            + e.q2(xd, xc, [b, bg, a, ag]) * (xa + xb)
            + e.p4([n(a), n(ag), b, bg]) * (xa * xc - xb * xd)
            + e.q2(xa, xb, [a, ag, bg, b]) * (xc + xd)
            + e.q2(xa * xb, xc * xd, [a, n(bg), ag, b])
            - e.q2(xa * xb, xc * xd, [a, b, ag, bg])
            + e.q2(xa * xb, xc * xd, [ag, bg, a, b])
            - e.q2(xa * xb, xc * xd, [ag, n(b), a, bg]));
    s += 4.0
        * (e.q3(xb * xc * xd, xa, [a, b, bg, ag]) - e.q3(xb * xc * xd, xa, [n(ag), b, bg, a])
            + e.q3(xa * xc * xd, xb, [n(a), b, bg, ag])
            - e.q3(xa * xc * xd, xb, [ag, b, bg, a])
            - e.q3(xa * xb * xd, xc, [a, ag, b, bg])
            + e.q3(xa * xb * xd, xc, [a, ag, n(bg), b])
            - e.q3(xa * xb * xc, xd, [a, ag, n(b), bg])
            + e.q3(xa * xb * xc, xd, [a, ag, bg, b])
            - e.q4(xc * xd, [bg, b, a, ag]) * xa
            + e.q4(xc * xd, [b, bg, a, ag]) * xb
            + e.q4(xa * xb, [ag, a, b, bg]) * xc
            - e.q4(xa * xb, [a, ag, b, bg]) * xd);
    Ok(pre * s)
}

// ---------------------------------------------------------------------------
// correspondence

/// One row of the face → ABS table.  `swap_ac_bd` is the (x_a↔x_c, x_b↔x_d)
/// annotation: the ABS side is read as Q(x_c, x_d, x_a, x_b).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorrespondenceRow {
    pub face: Family,
    pub quad: Family,
    pub swap_ac_bd: bool,
}

pub fn correspondence_table() -> Vec<CorrespondenceRow> {
    use Family::*;
    let r = |face, quad, swap_ac_bd| CorrespondenceRow { face, quad, swap_ac_bd };
    vec![
        r(A3 { d: 1 }, Q3 { d: 1 }, false),
        r(A3 { d: 0 }, Q3 { d: 0 }, false),
        r(A2 { d1: 1, d2: 1 }, Q2, false),
        r(A2 { d1: 1, d2: 0 }, Q1 { d: 1 }, false),
        r(A2 { d1: 0, d2: 0 }, Q1 { d: 0 }, false),
        r(C3 { d2x: [1, 1, 0] }, H3 { d: 1, e: 1 }, true),
        r(C3 { d2x: [1, 0, 1] }, H3 { d: 1, e: 1 }, false),
        r(C3 { d2x: [2, 0, 0] }, H3 { d: 1, e: 0 }, false),
        r(C3 { d2x: [0, 0, 0] }, H3 { d: 0, e: 0 }, false),
        r(C2 { d1: 1, d2: 1, d3: 0 }, H2 { e: 1 }, true),
        r(C2 { d1: 1, d2: 0, d3: 1 }, H2 { e: 1 }, false),
        r(C2 { d1: 1, d2: 0, d3: 0 }, H2 { e: 0 }, false),
        r(C1 { d: 1 }, H1 { e: 1 }, true),
        r(C2 { d1: 0, d2: 0, d3: 0 }, H1 { e: 1 }, false),
        r(C1 { d: 0 }, H1 { e: 0 }, false),
    ]
}

pub fn correspondence_row(face: Family) -> Result<CorrespondenceRow> {
    correspondence_table()
        .into_iter()
        .find(|r| r.face == face)
        .ok_or_else(|| Error::NotApplicable("face/ABS correspondence".into(), face.label()))
}

/// Both sides of the correspondence at one sample:
/// (P1(x_a, −x_d, x_c, x_b; α, α−β, α−β), ABS value).
pub fn correspondence_pair<S: Scalar>(row: &CorrespondenceRow, x: &[S; 4], a: &Par<S>, b: &Par<S>) -> Result<(S, S)> {
    let [xa, xb, xc, xd] = x.clone();
    let amb = a - b;
    let lhs = p_raw(&EquationSpec::new(row.face), &[xa.clone(), -xd.clone(), xc.clone(), xb.clone()], &[a.clone(), amb.clone(), amb])?;
    let qx = if row.swap_ac_bd { [xc, xd, xa, xb] } else { [xa, xb, xc, xd] };
    let rhs = eval_quad(&EquationSpec::new(row.quad), &qx, a, b, None)?;
    Ok((lhs, rhs))
}

/// P1 without the degeneracy guard.
fn p_raw<S: Scalar>(spec: &EquationSpec, c: &[S; 4], p: &[Par<S>; 3]) -> Result<S> {
    match extract_p1(spec, c, p) {
        Err(Error::Degenerate(_)) => Ok(S::zero()),
        r => r,
    }
}

// ---------------------------------------------------------------------------
// symmetries

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymKind {
    QuadSym1,
    QuadSym2,
    FaceSym1,
    FaceSym2,
    FaceSym3,
}

impl SymKind {
    pub const ALL: [SymKind; 5] = [SymKind::QuadSym1, SymKind::QuadSym2, SymKind::FaceSym1, SymKind::FaceSym2, SymKind::FaceSym3];

    pub fn name(&self) -> &'static str {
        match self {
            SymKind::QuadSym1 => "quad-sym-1",
            SymKind::QuadSym2 => "quad-sym-2",
            SymKind::FaceSym1 => "face-sym-1",
            SymKind::FaceSym2 => "face-sym-2",
            SymKind::FaceSym3 => "face-sym-3",
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            SymKind::QuadSym1 | SymKind::QuadSym2 => Shape::Quad,
            _ => Shape::Face,
        }
    }

    /// Whether the family is claimed to satisfy this symmetry.
    pub fn applies_to(&self, fam: Family) -> bool {
        if fam.shape() != self.shape() {
            return false;
        }
        match self {
            SymKind::QuadSym1 => fam.epsilon() != Some(1),
            SymKind::QuadSym2 => true,
            SymKind::FaceSym1 => true,
            SymKind::FaceSym2 | SymKind::FaceSym3 => !fam.is_type_c(),
        }
    }
}

impl FromStr for SymKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SymKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown symmetry {s:?}")))
    }
}

/// A sample for the symmetry checks: the face value is ignored for quads.
#[derive(Clone, Debug)]
pub struct SymSample<S> {
    pub x: S,
    pub c: [S; 4],
    pub p: [Par<S>; 3],
}

/// LHS − (±RHS) of the symmetry identity; NotApplicable for excluded pairs.
pub fn symmetry_residual<S: Scalar>(
    kind: SymKind,
    spec: &EquationSpec,
    s: &SymSample<S>,
    ell: Option<&EllipticContext>,
) -> Result<S> {
    if !kind.applies_to(spec.family) {
        return Err(Error::NotApplicable(kind.name().into(), spec.family.label()));
    }
    symmetry_residual_raw(kind, spec, s, ell)
}

/// Same as `symmetry_residual` without the applicability filter, so excluded
/// cases can be shown to fail.
pub fn symmetry_residual_raw<S: Scalar>(
    kind: SymKind,
    spec: &EquationSpec,
    s: &SymSample<S>,
    ell: Option<&EllipticContext>,
) -> Result<S> {
    if spec.family.shape() != kind.shape() {
        return Err(Error::NotApplicable(kind.name().into(), spec.family.label()));
    }
    let [a, b, c, d] = s.c.clone();
    let [al, be, ga] = s.p.clone();
    match kind {
        SymKind::QuadSym1 => {
            let l = eval_quad(spec, &s.c, &al, &be, ell)?;
            let r = eval_quad(spec, &[b, a, d, c], &al, &be, ell)?;
            Ok(l - r)
        }
        SymKind::QuadSym2 => {
            let l = eval_quad(spec, &s.c, &al, &be, ell)?;
            let r = eval_quad(spec, &[d, b, c, a], &be, &al, ell)?;
            // the published Q4 is normalised symmetric under this map
            if spec.family == Family::Q4 {
                Ok(l - r)
            } else {
                Ok(l + r)
            }
        }
        SymKind::FaceSym1 => {
            let l = eval_face(spec, &s.x, &s.c, &s.p, ell)?;
            let r = eval_face(spec, &s.x, &[b, a, d, c], &[&al - &ga, &be - &ga, -&ga], ell)?;
            // C3 picks up the multiplier Z(γ)
            let k = match spec.family {
                Family::C3 { .. } => ga.z(),
                _ => S::one(),
            };
            Ok(l + k * r)
        }
        SymKind::FaceSym2 => {
            let l = eval_face(spec, &s.x, &s.c, &s.p, ell)?;
            let r = eval_face(spec, &s.x, &[c, d, a, b], &[be, al, ga], ell)?;
            Ok(l + r)
        }
        SymKind::FaceSym3 => {
            let l = eval_face(spec, &s.x, &s.c, &s.p, ell)?;
            let r = eval_face(spec, &s.x, &[d, b, c, a], &[-&al, &ga - &al, &be - &al], ell)?;
            Ok(l + r)
        }
    }
}

/// Scale for float comparisons of a residual: the largest single evaluation
/// entering the identity.
pub fn magnitude_hint<S: Scalar>(vals: &[&S]) -> f64 {
    vals.iter().map(|v| v.mag()).fold(0.0, f64::max).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    fn q(p: i64, d: i64) -> Rat {
        rat(p, d)
    }
    fn add(p: i64, d: i64) -> Par<Rat> {
        Par::Add(rat(p, d))
    }
    fn ex(p: i64, d: i64) -> Par<Rat> {
        Par::Exp(rat(p, d))
    }
    fn spec(s: &str) -> EquationSpec {
        s.parse().unwrap()
    }

    #[test]
    fn q1_examples() {
        let s = spec("Q1:d=0");
        let v = eval_quad(&s, &std::array::from_fn(|_| q(3, 2)), &add(5, 1), &add(1, 3), None).unwrap();
        assert_eq!(v, q(0, 1));
        let x = [q(1, 1), q(2, 1), q(3, 1), q(4, 1)];
        assert_eq!(eval_quad(&s, &x, &add(1, 1), &add(2, 1), None).unwrap(), q(2, 1));
    }

    #[test]
    fn h1_diagonal_vanishes() {
        let s = spec("H1:e=0");
        let x = [q(2, 3), q(-1, 4), q(5, 7), q(2, 3)];
        assert_eq!(eval_quad(&s, &x, &add(3, 5), &add(3, 5), None).unwrap(), q(0, 1));
    }

    #[test]
    fn constant_fields_annihilate() {
        let c1 = spec("C1:d=0");
        let p = [add(1, 2), add(-3, 4), add(2, 5)];
        let k = q(7, 3);
        assert_eq!(eval_face(&c1, &k, &[k.clone(), k.clone(), k.clone(), k.clone()], &p, None).unwrap(), q(0, 1));
        // x_a = x_b = x_c = x_d leaves only the x-polynomial, which vanishes for A2(0;0)
        let a2 = spec("A2:0,0");
        assert_eq!(eval_face(&a2, &q(-5, 2), &[k.clone(), k.clone(), k.clone(), k.clone()], &p, None).unwrap(), q(0, 1));
    }

    #[test]
    fn trapezoidal_examples() {
        let h = spec("H1:e=0");
        // H1(0)*: (x_a,x_b,x_c,x_d) = (2,1,0,x_d) gives x_d − 2α
        for (xd, a, b) in [(q(3, 1), q(1, 2), q(2, 1)), (q(-4, 5), q(7, 3), q(1, 9))] {
            let v = trapezoidal(&h, &[q(2, 1), q(1, 1), q(0, 1), xd.clone()], &Par::Add(a.clone()), &Par::Add(b), None).unwrap();
            assert_eq!(v, xd - q(2, 1) * a);
        }
        // α = 0: plain H at (β, β) with x_b ↔ x_d
        let x = [q(1, 3), q(-2, 5), q(4, 7), q(3, 2)];
        let b = add(5, 4);
        let t = trapezoidal(&h, &x, &add(0, 1), &b, None).unwrap();
        let e = eval_quad(&h, &[x[0].clone(), x[3].clone(), x[2].clone(), x[1].clone()], &b, &b, None).unwrap();
        assert_eq!(t, e);
    }

    #[test]
    fn c1_p1_constant_corners() {
        let s = spec("C1:d=0");
        let k = q(3, 4);
        let g = q(-2, 7);
        let p = [add(1, 3), add(5, 2), Par::Add(g.clone())];
        let v = extract_p1(&s, &[k.clone(), k.clone(), k.clone(), k.clone()], &p).unwrap();
        assert_eq!(v, q(2, 1) * g);
    }

    #[test]
    fn p1_degenerate_is_flagged() {
        let s = spec("C1:d=0");
        let p = [add(1, 3), add(5, 2), add(0, 1)];
        let k = q(3, 4);
        assert!(matches!(extract_p1(&s, &[k.clone(), k.clone(), k.clone(), k], &p), Err(Error::Degenerate(_))));
        assert!(extract_p1::<C64>(&spec("A4"), &[C64::new(1.0, 0.0); 4], &std::array::from_fn(|_| Par::Add(C64::new(0.1, 0.0)))).is_err());
    }

    #[test]
    fn a2_00_p1_matches_interpolation() {
        let s = spec("A2:0,0");
        let c = [q(1, 2), q(-3, 5), q(7, 4), q(2, 9)];
        let p = [add(2, 3), add(-1, 4), add(5, 6)];
        assert_eq!(extract_p1(&s, &c, &p).unwrap(), p1_by_difference(&s, &c, &p).unwrap());
    }

    #[test]
    fn a2_00_factor_is_minus_one() {
        let row = correspondence_row("A2:0,0".parse().unwrap()).unwrap();
        let x = [q(1, 2), q(-3, 5), q(7, 4), q(2, 9)];
        let (l, r) = correspondence_pair(&row, &x, &add(2, 3), &add(-1, 4)).unwrap();
        assert_eq!(l, -r);
    }

    #[test]
    fn domain_mismatch() {
        let s = spec("Q3:d=1");
        let x: [Rat; 4] = std::array::from_fn(|_| q(1, 2));
        assert!(matches!(eval_quad(&s, &x, &add(1, 2), &add(1, 3), None), Err(Error::DomainMismatch(_))));
        let s = spec("Q1:d=1");
        assert!(matches!(eval_quad(&s, &x, &ex(1, 2), &ex(1, 3), None), Err(Error::DomainMismatch(_))));
        let a4 = spec("A4");
        assert!(matches!(
            eval_face::<C64>(&a4, &C64::new(0.1, 0.0), &[C64::new(0.2, 0.0); 4], &std::array::from_fn(|_| Par::Add(C64::new(0.3, 0.0))), None),
            Err(Error::EllipticUnavailable(_))
        ));
    }

    #[test]
    fn id_round_trip() {
        for f in Family::all() {
            assert_eq!(f.id().parse::<Family>().unwrap(), f, "{}", f.id());
            assert_eq!(f.label().parse::<Family>().unwrap(), f);
            assert_eq!(f.combo_name().parse::<Family>().unwrap(), f);
        }
        assert_eq!(spec("H2:e=0;swap").id(), "H2:e=0;swap");
        assert_eq!(spec("C3:1/2,1/2,0").family.label(), "C3(1/2;1/2;0)");
        assert!("C3:1/2,1/2,1/2".parse::<Family>().is_err());
        assert!("A2:0,1".parse::<Family>().is_err());
    }

    #[test]
    fn sym_exclusions() {
        let s = SymSample { x: q(1, 1), c: [q(1, 2), q(3, 4), q(-1, 3), q(2, 5)], p: [add(1, 2), add(2, 3), add(3, 7)] };
        assert!(matches!(symmetry_residual(SymKind::QuadSym1, &spec("H1:e=1"), &s, None), Err(Error::NotApplicable(..))));
        assert_ne!(symmetry_residual_raw(SymKind::QuadSym1, &spec("H1:e=1"), &s, None).unwrap(), q(0, 1));
        assert_eq!(symmetry_residual(SymKind::QuadSym1, &spec("Q1:d=0"), &s, None).unwrap(), q(0, 1));
        assert_eq!(symmetry_residual(SymKind::FaceSym3, &spec("A2:1,1"), &s, None).unwrap(), q(0, 1));
        assert!(symmetry_residual(SymKind::FaceSym2, &spec("C1:d=0"), &s, None).is_err());
    }
}
