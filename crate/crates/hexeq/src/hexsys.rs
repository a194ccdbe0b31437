//! Hex systems: six face-centered quad equations on a hexagon, one centred at
//! each vertex.  Rows are data; solving is by two-point probing in a corner
//! slot.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{eval_face, Domain, EquationSpec, Family};
use crate::error::{Error, Result};
use crate::report::{render_residual, ConsistencyReport};
use crate::sampling::{Draw, Sampler, GUARD_LIMIT, SAMPLING_POLICY};
use crate::scalar::{EllipticContext, Par, Rat, Scalar, C64};

pub const ROLES: [char; 6] = ['a', 'b', 'c', 'd', 'e', 'f'];

/// Parameter triple handed to a row, as a function of (α, β, γ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ParMap {
    /// (α, β, γ)
    Abg,
    /// (γ, β, α)
    Gba,
    /// (γ, α, β)
    Gab,
    /// (γ−α, −α, β−α)
    Shifted,
}

impl ParMap {
    pub fn apply<S: Scalar>(&self, p: &[Par<S>; 3]) -> [Par<S>; 3] {
        let [a, b, g] = p;
        match self {
            ParMap::Abg => [a.clone(), b.clone(), g.clone()],
            ParMap::Gba => [g.clone(), b.clone(), a.clone()],
            ParMap::Gab => [g.clone(), a.clone(), b.clone()],
            ParMap::Shifted => [g - a, -a, b - a],
        }
    }

    pub fn expr(&self) -> [&'static str; 3] {
        match self {
            ParMap::Abg => ["alpha", "beta", "gamma"],
            ParMap::Gba => ["gamma", "beta", "alpha"],
            ParMap::Gab => ["gamma", "alpha", "beta"],
            ParMap::Shifted => ["gamma-alpha", "-alpha", "beta-alpha"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RowDef {
    pub role: char,
    pub face: usize,
    pub corners: [usize; 4],
    pub params: ParMap,
    /// evaluated with C̄ instead of C (type-C only)
    pub bar: bool,
}

const fn row(role: char, face: usize, corners: [usize; 4], params: ParMap, bar: bool) -> RowDef {
    RowDef { role, face, corners, params, bar }
}

pub const A_ROWS: [RowDef; 6] = [
    row('a', 0, [5, 4, 1, 2], ParMap::Gba, false),
    row('b', 1, [2, 3, 0, 5], ParMap::Gab, false),
    row('c', 2, [3, 4, 1, 0], ParMap::Abg, false),
    row('d', 3, [2, 1, 4, 5], ParMap::Gba, false),
    row('e', 4, [5, 0, 3, 2], ParMap::Gab, false),
    row('f', 5, [0, 1, 4, 3], ParMap::Abg, false),
];

pub const C_ROWS: [RowDef; 6] = [
    row('a', 0, [5, 4, 1, 2], ParMap::Gba, true),
    row('b', 1, [2, 3, 0, 5], ParMap::Gab, false),
    row('c', 2, [1, 3, 0, 4], ParMap::Shifted, false),
    row('d', 3, [2, 1, 4, 5], ParMap::Gba, false),
    row('e', 4, [5, 0, 3, 2], ParMap::Gab, true),
    row('f', 5, [4, 0, 3, 1], ParMap::Shifted, true),
];

/// The (C, C̄) pairings admitted for type-C systems (unordered).
pub fn c_pairs() -> Vec<(Family, Family)> {
    use Family::*;
    vec![
        (C3 { d2x: [1, 1, 0] }, C3 { d2x: [1, 0, 1] }),
        (C3 { d2x: [2, 0, 0] }, C3 { d2x: [2, 0, 0] }),
        (C3 { d2x: [0, 0, 0] }, C3 { d2x: [0, 0, 0] }),
        (C2 { d1: 1, d2: 1, d3: 0 }, C2 { d1: 1, d2: 0, d3: 1 }),
        (C2 { d1: 1, d2: 0, d3: 0 }, C2 { d1: 1, d2: 0, d3: 0 }),
        (C2 { d1: 0, d2: 0, d3: 0 }, C1 { d: 1 }),
        (C1 { d: 0 }, C1 { d: 0 }),
    ]
}

pub fn is_c_pair(c: Family, cbar: Family) -> bool {
    c_pairs().iter().any(|&(x, y)| (x, y) == (c, cbar) || (y, x) == (c, cbar))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    A(EquationSpec),
    C { c: EquationSpec, cbar: EquationSpec },
}

#[derive(Clone, Debug)]
pub struct HexSystem {
    pub variant: Variant,
    pub ell: Option<EllipticContext>,
    /// Relative tolerance for float residuals.
    pub tol: f64,
}

pub const ELLIPTIC_TOL: f64 = 1e-8;

impl HexSystem {
    pub fn type_a(f: Family) -> Result<Self> {
        if !f.is_type_a() {
            return Err(Error::NotApplicable("type-A hex system".into(), f.label()));
        }
        let ell = (f == Family::A4).then(EllipticContext::standard);
        let s = HexSystem { variant: Variant::A(f.into()), ell, tol: ELLIPTIC_TOL };
        s.check_structure()?;
        Ok(s)
    }

    /// Type-C system; the pair must be one of the admitted pairings.
    pub fn type_c(c: Family, cbar: Family) -> Result<Self> {
        if !is_c_pair(c, cbar) {
            return Err(Error::IllegalCombo { row: format!("({}, {})", c.label(), cbar.label()), shape: "type-C hex system".into() });
        }
        Self::type_c_unchecked(c, cbar)
    }

    /// No pairing check; used for negative controls.
    pub fn type_c_unchecked(c: Family, cbar: Family) -> Result<Self> {
        if !c.is_type_c() || !cbar.is_type_c() {
            return Err(Error::NotApplicable("type-C hex system".into(), format!("({}, {})", c.label(), cbar.label())));
        }
        let s = HexSystem { variant: Variant::C { c: c.into(), cbar: cbar.into() }, ell: None, tol: ELLIPTIC_TOL };
        s.check_structure()?;
        Ok(s)
    }

    pub fn name(&self) -> String {
        match &self.variant {
            Variant::A(s) => s.family.label(),
            Variant::C { c, cbar } => format!("({}, {})", c.family.label(), cbar.family.label()),
        }
    }

    pub fn domain(&self) -> Domain {
        match &self.variant {
            Variant::A(s) => s.family.domain(),
            Variant::C { c, .. } => c.family.domain(),
        }
    }

    pub fn rows(&self) -> &'static [RowDef; 6] {
        match self.variant {
            Variant::A(_) => &A_ROWS,
            Variant::C { .. } => &C_ROWS,
        }
    }

    /// The C ↔ C̄ exchanged system (identity for type A).
    pub fn exchanged(&self) -> HexSystem {
        let variant = match &self.variant {
            Variant::A(s) => Variant::A(*s),
            Variant::C { c, cbar } => Variant::C { c: *cbar, cbar: *c },
        };
        HexSystem { variant, ell: self.ell.clone(), tol: self.tol }
    }

    pub fn row_spec(&self, k: usize) -> EquationSpec {
        match &self.variant {
            Variant::A(s) => *s,
            Variant::C { c, cbar } => {
                if self.rows()[k].bar {
                    *cbar
                } else {
                    *c
                }
            }
        }
    }

    /// Index of the hexagon variable row k does not involve.
    pub fn independent(&self, k: usize) -> usize {
        let r = &self.rows()[k];
        (0..6).find(|i| *i != r.face && !r.corners.contains(i)).expect("row leaves one variable out")
    }

    /// Row not involving X_j.
    pub fn row_without(&self, j: usize) -> usize {
        (0..6).find(|&k| self.independent(k) == j).expect("each variable is left out once")
    }

    /// Every row leaves out exactly the variable opposite its face.
    pub fn check_structure(&self) -> Result<()> {
        for (k, r) in self.rows().iter().enumerate() {
            let mut seen = [false; 6];
            seen[r.face] = true;
            for &c in &r.corners {
                if seen[c] {
                    return Err(Error::Scenario(format!("row {} repeats variable {c}", r.role)));
                }
                seen[c] = true;
            }
            if r.face != k || self.independent(k) != (r.face + 3) % 6 {
                return Err(Error::Scenario(format!("row {} is not independent of its opposite vertex", r.role)));
            }
        }
        Ok(())
    }

    pub fn row_value<S: Scalar>(&self, k: usize, x: &[S; 6], p: &[Par<S>; 3]) -> Result<S> {
        let r = &self.rows()[k];
        let c = r.corners.map(|i| x[i].clone());
        eval_face(&self.row_spec(k), &x[r.face], &c, &r.params.apply(p), self.ell.as_ref())
    }

    pub fn residuals<S: Scalar>(&self, x: &[S; 6], p: &[Par<S>; 3]) -> Result<Vec<S>> {
        (0..6).map(|k| self.row_value(k, x, p)).collect()
    }

    /// Solve row k for the corner variable X_u (linear by construction).
    pub fn solve_corner<S: Scalar>(&self, k: usize, u: usize, x: &[S; 6], p: &[Par<S>; 3]) -> Result<S> {
        let r = &self.rows()[k];
        if !r.corners.contains(&u) {
            return Err(Error::NotApplicable(
                format!("solving for x_{} (not a corner slot)", ROLES[u]),
                format!("row {}", r.role),
            ));
        }
        let mut y = x.clone();
        solve_linear(
            |v| {
                y[u] = v;
                self.row_value(k, &y, p)
            },
            &format!("{} row {} for x_{}", self.name(), r.role, ROLES[u]),
        )
    }

    /// Knowns on S_i = {X_i, .., X_{i+3}}; returns (X_{i−2}, X_{i−1}).
    pub fn solve_pair<S: Scalar>(&self, i: usize, x: &[S; 6], p: &[Par<S>; 3]) -> Result<(S, S)> {
        let (u1, u2) = ((i + 4) % 6, (i + 5) % 6);
        let mut y = x.clone();
        y[u1] = self.solve_corner(self.row_without(u2), u1, &y, p)?;
        y[u2] = self.solve_corner(self.row_without(u1), u2, &y, p)?;
        Ok((y[u1].clone(), y[u2].clone()))
    }

    /// All eight solve orders for the pair of unknowns of S_i: first one
    /// unknown from the row free of the other, then the second from any row
    /// holding it as a corner.
    pub fn solve_paths<S: Scalar>(&self, i: usize, x: &[S; 6], p: &[Par<S>; 3]) -> Result<Vec<SolvePath<S>>> {
        let (u1, u2) = ((i + 4) % 6, (i + 5) % 6);
        let mut out = vec![];
        for (first, second) in [(u1, u2), (u2, u1)] {
            let k1 = self.row_without(second);
            let mut y = x.clone();
            y[first] = self.solve_corner(k1, first, &y, p)?;
            for k2 in (0..6).filter(|&k| self.rows()[k].corners.contains(&second)) {
                let mut z = y.clone();
                z[second] = self.solve_corner(k2, second, &z, p)?;
                out.push(SolvePath {
                    rows: [self.rows()[k1].role, self.rows()[k2].role],
                    first: ROLES[first],
                    values: (z[u1].clone(), z[u2].clone()),
                });
            }
        }
        Ok(out)
    }

    /// Relaxed initial data: three consecutive knowns plus one more.
    /// Unknowns at distance 2 are solved one after the other; opposite
    /// unknowns are rejected.  Returns the lexicographically first valid
    /// ordering as (row role, variable role) steps.
    pub fn relaxed_solve<S: Scalar>(&self, known: [bool; 6], x: &[S; 6], p: &[Par<S>; 3]) -> Result<([S; 6], Vec<(char, char)>)> {
        let unk: Vec<usize> = (0..6).filter(|&i| !known[i]).collect();
        if unk.len() != 2 {
            return Err(Error::NotApplicable("relaxed solve".into(), format!("{} unknowns", unk.len())));
        }
        let (u, v) = (unk[0], unk[1]);
        let dist = (v - u).min(6 - (v - u));
        if dist == 3 {
            return Err(Error::NotApplicable("relaxed solve".into(), "opposite unknowns".into()));
        }
        for (first, second) in [(u, v), (v, u)] {
            let k1 = self.row_without(second);
            if !self.rows()[k1].corners.contains(&first) {
                continue;
            }
            let Some(k2) = (0..6).find(|&k| self.rows()[k].corners.contains(&second)) else { continue };
            let mut y = x.clone();
            y[first] = self.solve_corner(k1, first, &y, p)?;
            y[second] = self.solve_corner(k2, second, &y, p)?;
            let order = vec![(self.rows()[k1].role, ROLES[first]), (self.rows()[k2].role, ROLES[second])];
            return Ok((y, order));
        }
        Err(Error::NotApplicable("relaxed solve".into(), "no valid ordering".into()))
    }

    /// Row residual check: exact zero, or relative size below `tol`, measured
    /// against the linear coefficients of the first corner slot.
    pub fn row_ok<S: Scalar>(&self, k: usize, x: &[S; 6], p: &[Par<S>; 3]) -> Result<(bool, Value)> {
        let r = self.row_value(k, x, p)?;
        if S::EXACT {
            return Ok((r.is_zero(), render_residual(&r)));
        }
        let s = self.rows()[k].corners[0];
        let mut y = x.clone();
        y[s] = S::zero();
        let m = self.row_value(k, &y, p)?;
        y[s] = S::one();
        let l = self.row_value(k, &y, p)? - m.clone();
        let rel = r.mag() / (m.mag() + (l * x[s].clone()).mag()).max(f64::MIN_POSITIVE);
        Ok((rel.is_finite() && rel <= self.tol, json!(rel)))
    }

    /// All six rows; the worst residual is returned.
    pub fn all_rows_ok<S: Scalar>(&self, x: &[S; 6], p: &[Par<S>; 3]) -> Result<(bool, Value)> {
        let mut ok = true;
        let mut worst = json!(0.0);
        let mut worst_mag = -1.0;
        for k in 0..6 {
            let (o, r) = self.row_ok(k, x, p)?;
            let mag = if S::EXACT { if o { 0.0 } else { 1.0 } } else { r.as_f64().unwrap_or(f64::INFINITY) };
            if mag > worst_mag {
                worst_mag = mag;
                worst = r;
            }
            ok &= o;
        }
        if S::EXACT && ok {
            worst = Value::String("0/1".into());
        }
        Ok((ok, worst))
    }

    /// Serializable description with the explicit slot permutations.
    pub fn describe(&self) -> Value {
        let rows: Vec<Value> = self
            .rows()
            .iter()
            .enumerate()
            .map(|(k, r)| {
                json!({
                    "row": format!("{}", r.role),
                    "equation": self.row_spec(k).id(),
                    "face": format!("x_{}", ROLES[r.face]),
                    "corners": r.corners.map(|c| format!("x_{}", ROLES[c])),
                    "params": r.params.expr(),
                    "independent_of": format!("x_{}", ROLES[self.independent(k)]),
                })
            })
            .collect();
        json!({
            "variant": match self.variant { Variant::A(_) => "A", Variant::C { .. } => "C" },
            "system": self.name(),
            "rows": rows,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolvePath<S> {
    pub rows: [char; 2],
    pub first: char,
    pub values: (S, S),
}

/// Solve f(u) = L·u + M = 0 from f(0) and f(1).
pub fn solve_linear<S: Scalar>(mut f: impl FnMut(S) -> Result<S>, what: &str) -> Result<S> {
    let m = f(S::zero())?;
    let f1 = f(S::one())?;
    let l = f1.clone() - m.clone();
    let singular = if S::EXACT {
        l.is_zero()
    } else {
        !(l.mag() > 1e-13 * m.mag().max(f1.mag())) || !l.mag().is_finite()
    };
    if singular {
        return Err(Error::SingularSolve(what.to_string()));
    }
    Ok(-m / l)
}

/// Equality for exact values, relative closeness for floats.
pub fn same<S: Scalar>(a: &S, b: &S, tol: f64) -> bool {
    if S::EXACT {
        a == b
    } else {
        (a.clone() - b.clone()).mag() <= tol * a.mag().max(b.mag()).max(1.0)
    }
}

// ---------------------------------------------------------------------------
// hexagonal symmetries

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HexSym {
    Reflect1,
    Reflect2,
    RotThird,
    RotHalf,
}

impl HexSym {
    pub const ALL: [HexSym; 4] = [HexSym::Reflect1, HexSym::Reflect2, HexSym::RotThird, HexSym::RotHalf];

    pub fn name(&self) -> &'static str {
        match self {
            HexSym::Reflect1 => "reflection-1",
            HexSym::Reflect2 => "reflection-2",
            HexSym::RotThird => "rotation-pi/3",
            HexSym::RotHalf => "rotation-pi",
        }
    }

    /// Claimed symmetries: two reflections and the π/3 rotation for type A;
    /// both reflections and the π rotation for type C.
    pub fn applies(&self, v: &Variant) -> bool {
        !matches!((self, v), (HexSym::RotThird, Variant::C { .. }) | (HexSym::RotHalf, Variant::A(_)))
    }

    /// Whether the transformed sample solves the C ↔ C̄ exchanged system.
    pub fn exchanges(&self) -> bool {
        matches!(self, HexSym::Reflect2 | HexSym::RotHalf)
    }

    pub fn apply<S: Scalar>(&self, x: &[S; 6], p: &[Par<S>; 3]) -> ([S; 6], [Par<S>; 3]) {
        let perm: [usize; 6] = match self {
            HexSym::Reflect1 => [4, 3, 2, 1, 0, 5],
            HexSym::Reflect2 => [1, 0, 5, 4, 3, 2],
            HexSym::RotThird => [1, 2, 3, 4, 5, 0],
            HexSym::RotHalf => [3, 4, 5, 0, 1, 2],
        };
        let [a, b, g] = p.clone();
        let q = match self {
            HexSym::Reflect1 | HexSym::Reflect2 => [b, a, g],
            HexSym::RotThird => [b, g, a],
            HexSym::RotHalf => [a, b, g],
        };
        (perm.map(|i| x[i].clone()), q)
    }
}

/// Check every claimed hexagonal symmetry on a solved sample.  For type-C
/// systems with C̄ ≠ C the exchange is also shown to be necessary.
pub fn hex_symmetry_check<S: Scalar>(sys: &HexSystem, x: &[S; 6], p: &[Par<S>; 3], tag: &str) -> Result<ConsistencyReport> {
    let mut rep = ConsistencyReport::new(json!({ "system": sys.name() }));
    for sym in HexSym::ALL {
        if !sym.applies(&sys.variant) {
            continue;
        }
        let (y, q) = sym.apply(x, p);
        let target = if sym.exchanges() { sys.exchanged() } else { sys.clone() };
        let (ok, res) = target.all_rows_ok(&y, &q)?;
        rep.check(format!("{tag}{}", sym.name()), S::EXACT, ok, res, 0);
        if let Variant::C { c, cbar } = &sys.variant {
            if sym.exchanges() && c != cbar {
                let (plain_ok, _) = sys.all_rows_ok(&y, &q)?;
                rep.note(format!(
                    "{tag}{}: without the C/C-bar exchange the rows {}",
                    sym.name(),
                    if plain_ok { "still vanish" } else { "do not vanish" }
                ));
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// suites

fn draw_params<S: Draw>(s: &mut Sampler, d: Domain) -> Result<[Par<S>; 3]> {
    Ok([S::draw_par(s, d)?, S::draw_par(s, d)?, S::draw_par(s, d)?])
}

/// Sample knowns on S_i and solve the pair, resampling singular draws.
pub fn solved_sample<S: Draw>(sys: &HexSystem, s: &mut Sampler, i: usize, p: &[Par<S>; 3]) -> Result<[S; 6]> {
    for _ in 0..GUARD_LIMIT {
        let mut x: [S; 6] = std::array::from_fn(|_| S::draw_value(s));
        match sys.solve_pair(i, &x, p) {
            Ok((v1, v2)) => {
                x[(i + 4) % 6] = v1;
                x[(i + 5) % 6] = v2;
                return Ok(x);
            }
            Err(Error::SingularSolve(_)) => s.resamples += 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GuardExhausted(GUARD_LIMIT))
}

fn config(sys: &HexSystem, suite: &str, trials: usize, seed: u64) -> Value {
    json!({
        "suite": suite,
        "system": sys.describe(),
        "trials": trials,
        "seed": seed,
        "tolerance": if sys.domain() == Domain::Elliptic { json!(sys.tol) } else { Value::Null },
        "sampling": SAMPLING_POLICY,
    })
}

type CahDraw<S> = ([Par<S>; 3], Vec<([S; 6], Vec<SolvePath<S>>)>);

/// Parameters plus, for each i, a solved sample and its eight paths.
fn cah_draw<S: Draw>(sys: &HexSystem, s: &mut Sampler) -> Result<CahDraw<S>> {
    let p = draw_params::<S>(s, sys.domain())?;
    let mut out = Vec::with_capacity(6);
    for i in 0..6 {
        let mut x: [S; 6] = std::array::from_fn(|_| S::draw_value(s));
        let (v1, v2) = sys.solve_pair(i, &x, &p)?;
        x[(i + 4) % 6] = v1;
        x[(i + 5) % 6] = v2;
        let paths = sys.solve_paths(i, &x, &p)?;
        out.push((x, paths));
    }
    Ok((p, out))
}

fn cah_trial<S: Draw>(sys: &HexSystem, seed: u64, t: usize) -> ConsistencyReport {
    let mut rep = ConsistencyReport::new(Value::Null);
    let mut s = Sampler::for_trial(seed, t as u64);
    // a draw where any solve order hits a vanishing coefficient is redrawn
    // whole, parameters included
    let mut drawn = Err(Error::GuardExhausted(GUARD_LIMIT));
    for _ in 0..GUARD_LIMIT {
        match cah_draw::<S>(sys, &mut s) {
            Err(Error::SingularSolve(_)) => s.resamples += 1,
            r => {
                drawn = r;
                break;
            }
        }
    }
    let (p, samples) = match drawn {
        Ok(v) => v,
        Err(e) => {
            rep.fail(format!("trial{t}/solve"), e.to_string(), s.resamples);
            return rep;
        }
    };
    for (i, (x, paths)) in samples.into_iter().enumerate() {
        let id = format!("trial{t}/i{i}");
        // resamples are charged to the trial's first entry
        let used = if i == 0 { s.resamples } else { 0 };
        match sys.all_rows_ok(&x, &p) {
            Ok((ok, r)) => rep.check(format!("{id}/rows"), S::EXACT, ok, r, used),
            Err(e) => rep.fail(format!("{id}/rows"), e.to_string(), used),
        }
        let (r1, r2) = (&x[(i + 4) % 6], &x[(i + 5) % 6]);
        let bad = paths.iter().find(|q| !(same(&q.values.0, r1, sys.tol) && same(&q.values.1, r2, sys.tol)));
        rep.check(format!("{id}/paths"), S::EXACT, paths.len() == 8 && bad.is_none(), json!(paths.len()), 0);
        if let Some(q) = bad {
            rep.entries.last_mut().expect("just pushed").detail =
                Some(format!("x_{} first, rows {}{} disagrees", q.first, q.rows[0], q.rows[1]));
        }
    }
    rep
}

fn run_trials(trials: usize, f: impl Fn(usize) -> ConsistencyReport + Sync + Send) -> Vec<ConsistencyReport> {
    (0..trials).into_par_iter().map(f).collect()
}

/// CAH: for every trial and every i, solve the pair from S_i, require all
/// six rows to vanish and all eight solve orders to agree.
pub fn cah_verify(sys: &HexSystem, trials: usize, seed: u64) -> ConsistencyReport {
    let t0 = std::time::Instant::now();
    let mut rep = ConsistencyReport::new(config(sys, "cah", trials, seed));
    let parts = match sys.domain() {
        Domain::Elliptic => run_trials(trials, |t| cah_trial::<C64>(sys, seed, t)),
        _ => run_trials(trials, |t| cah_trial::<Rat>(sys, seed, t)),
    };
    for part in parts {
        rep.merge(part);
    }
    rep.wall_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    rep
}

fn sym_trial<S: Draw>(sys: &HexSystem, seed: u64, t: usize) -> ConsistencyReport {
    let mut s = Sampler::for_trial(seed, t as u64);
    let run = |s: &mut Sampler| -> Result<ConsistencyReport> {
        for _ in 0..GUARD_LIMIT {
            let p = draw_params::<S>(s, sys.domain())?;
            let mut x: [S; 6] = std::array::from_fn(|_| S::draw_value(s));
            match sys.solve_pair(4, &x, &p) {
                Ok((v1, v2)) => {
                    x[2] = v1;
                    x[3] = v2;
                    return hex_symmetry_check(sys, &x, &p, &format!("trial{t}/"));
                }
                Err(Error::SingularSolve(_)) => s.resamples += 1,
                Err(e) => return Err(e),
            }
        }
        Err(Error::GuardExhausted(GUARD_LIMIT))
    };
    match run(&mut s) {
        Ok(r) => r,
        Err(e) => {
            let mut r = ConsistencyReport::new(Value::Null);
            r.fail(format!("trial{t}/sample"), e.to_string(), s.resamples);
            r
        }
    }
}

/// Hexagonal symmetries on `trials` solved samples.
pub fn hex_symmetry_suite(sys: &HexSystem, trials: usize, seed: u64) -> ConsistencyReport {
    let t0 = std::time::Instant::now();
    let mut rep = ConsistencyReport::new(config(sys, "hex-symmetry", trials, seed));
    let parts = match sys.domain() {
        Domain::Elliptic => run_trials(trials, |t| sym_trial::<C64>(sys, seed, t)),
        _ => run_trials(trials, |t| sym_trial::<Rat>(sys, seed, t)),
    };
    let mut notes: Vec<String> = vec![];
    for mut part in parts {
        notes.append(&mut part.notes);
        rep.merge(part);
    }
    // keep one copy of each distinct note
    let mut uniq: Vec<String> = vec![];
    for n in notes {
        let tail = n.split_once('/').map(|(_, r)| r.to_string()).unwrap_or(n);
        if !uniq.contains(&tail) {
            uniq.push(tail);
        }
    }
    rep.notes = uniq;
    rep.wall_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    rep
}
