//! Hexagonal lattice in brick-wall coordinates.
//!
//! Vertices are integer pairs (r, c).  A hexagonal face sits at (r, c) with
//! r + c even and has the six vertices
//!   a=(r,c) b=(r+1,c) c=(r+1,c+1) d=(r+1,c+2) e=(r,c+2) f=(r,c+1),
//! so every face carries the same (α, β, γ) and the edge labels read
//! (γ, α, β, γ, α, β) cyclically, opposite edges sharing a parameter.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hexsys::{same, HexSystem, ROLES};
use crate::report::ConsistencyReport;
use crate::sampling::{Draw, Sampler, GUARD_LIMIT, SAMPLING_POLICY};
use crate::scalar::{Par, Scalar};

pub type Vtx = (i64, i64);
pub const MAX_DIM: usize = 64;

pub fn face_vertices((r, c): Vtx) -> [Vtx; 6] {
    [(r, c), (r + 1, c), (r + 1, c + 1), (r + 1, c + 2), (r, c + 2), (r, c + 1)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// faces (r, 2k − r + R): rows shift left going up
    Parallelogram,
    /// faces (r, 2k + r mod 2)
    Rectangular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IvpKind {
    Staircase,
    Corner,
    Column,
    Row,
    Explicit(Vec<Vtx>),
}

impl IvpKind {
    pub fn name(&self) -> &'static str {
        match self {
            IvpKind::Staircase => "staircase",
            IvpKind::Corner => "corner",
            IvpKind::Column => "column",
            IvpKind::Row => "row",
            IvpKind::Explicit(_) => "explicit",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "staircase" => IvpKind::Staircase,
            "corner" => IvpKind::Corner,
            "column" => IvpKind::Column,
            "row" => IvpKind::Row,
            _ => return Err(Error::Parse(format!("unknown initial-value pattern {s:?}"))),
        })
    }

    pub fn layout(&self) -> Layout {
        match self {
            IvpKind::Column | IvpKind::Row => Layout::Rectangular,
            _ => Layout::Parallelogram,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IvpSpec {
    pub kind: IvpKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

pub fn faces(layout: Layout, rows: usize, cols: usize) -> Vec<Vtx> {
    let (rr, kk) = (rows as i64, cols as i64);
    let mut out = vec![];
    for r in 0..rr {
        for k in 0..kk {
            out.push(match layout {
                Layout::Parallelogram => (r, 2 * k - r + rr),
                Layout::Rectangular => (r, 2 * k + r % 2),
            });
        }
    }
    out
}

fn all_vertices(faces: &[Vtx]) -> BTreeSet<Vtx> {
    faces.iter().flat_map(|&f| face_vertices(f)).collect()
}

/// Vertices never in the given slot pair of any face; each such pair
/// vertex must belong to exactly one face.
fn complement_of_pairs(faces: &[Vtx], pair: (usize, usize)) -> Result<Vec<Vtx>> {
    let mut seen: BTreeMap<Vtx, usize> = BTreeMap::new();
    for &f in faces {
        let v = face_vertices(f);
        for i in [pair.0, pair.1] {
            *seen.entry(v[i]).or_default() += 1;
        }
    }
    if seen.values().any(|&n| n > 1) {
        return Err(Error::PatternTooSmall("evolution pairs overlap".into()));
    }
    Ok(all_vertices(faces).into_iter().filter(|v| !seen.contains_key(v)).collect())
}

/// The known set of a pattern, in sorted order.
pub fn pattern(kind: &IvpKind, rows: usize, cols: usize) -> Result<Vec<Vtx>> {
    if rows == 0 || cols == 0 {
        return Err(Error::PatternTooSmall(format!("{rows}x{cols}")));
    }
    if rows > MAX_DIM || cols > MAX_DIM {
        return Err(Error::PatternTooSmall(format!("{rows}x{cols} exceeds {MAX_DIM}x{MAX_DIM}")));
    }
    let fs = faces(kind.layout(), rows, cols);
    let mut v = match kind {
        IvpKind::Corner => complement_of_pairs(&fs, (2, 3))?,
        IvpKind::Row => complement_of_pairs(&fs, (2, 3))?,
        // evolves to the right, column by column
        IvpKind::Column => complement_of_pairs(&fs, (3, 4))?,
        IvpKind::Staircase => {
            if rows != cols {
                return Err(Error::PatternTooSmall(format!("staircase needs a square region, got {rows}x{cols}")));
            }
            let r0 = rows as i64 - 1;
            let c0 = if r0 % 2 == 0 { 0 } else { 1 };
            let mut out = vec![];
            for t in 0..rows as i64 {
                let (r, c) = (r0 - t, 3 * t + c0);
                if t == 0 {
                    out.push((r + 1, c));
                }
                out.extend((0..4).map(|j| (r, c + j)));
            }
            out
        }
        IvpKind::Explicit(v) => v.clone(),
    };
    v.sort();
    v.dedup();
    Ok(v)
}

/// Lattice state: every vertex of the region, known or not.
#[derive(Clone, Debug)]
pub struct HexLattice<S> {
    pub spec: IvpSpec,
    pub layout: Layout,
    pub faces: Vec<Vtx>,
    pub values: BTreeMap<Vtx, Option<S>>,
    pub initial: BTreeSet<Vtx>,
    pub params: [Par<S>; 3],
}

impl<S: Scalar> HexLattice<S> {
    pub fn unknown(&self) -> usize {
        self.values.values().filter(|v| v.is_none()).count()
    }

    fn known(&self, v: &Vtx) -> bool {
        matches!(self.values.get(v), Some(Some(_)))
    }

    /// Face whose unknowns are exactly two adjacent vertices: returns the
    /// index i with S_i = {X_i..X_{i+3}} known.
    pub fn ready(&self, f: Vtx) -> Option<usize> {
        let vs = face_vertices(f);
        let unk: Vec<usize> = (0..6).filter(|&i| !self.known(&vs[i])).collect();
        if unk.len() != 2 {
            return None;
        }
        let (u1, u2) = (unk[0], unk[1]);
        if u2 - u1 == 1 {
            Some((u2 + 1) % 6)
        } else if u1 == 0 && u2 == 5 {
            Some(1)
        } else {
            None
        }
    }

    pub fn face_values(&self, f: Vtx) -> Option<[S; 6]> {
        let vs = face_vertices(f);
        let mut out = Vec::with_capacity(6);
        for v in vs {
            out.push(self.values.get(&v)?.clone()?);
        }
        out.try_into().ok()
    }

    fn partial_values(&self, f: Vtx) -> [S; 6] {
        face_vertices(f).map(|v| self.values.get(&v).cloned().flatten().unwrap_or_else(S::zero))
    }

    /// Frontier snapshot: faces with four consecutive knowns.
    pub fn frontier(&self) -> Vec<Vtx> {
        self.faces.iter().copied().filter(|&f| self.ready(f).is_some()).collect()
    }
}

fn draw_lattice<S: Draw>(spec: &IvpSpec, sys: &HexSystem, s: &mut Sampler) -> Result<HexLattice<S>> {
    let layout = spec.kind.layout();
    let fs = faces(layout, spec.rows, spec.cols);
    let init: BTreeSet<Vtx> = pattern(&spec.kind, spec.rows, spec.cols)?.into_iter().collect();
    let params = [S::draw_par(s, sys.domain())?, S::draw_par(s, sys.domain())?, S::draw_par(s, sys.domain())?];
    let mut values = BTreeMap::new();
    for v in all_vertices(&fs) {
        values.insert(v, if init.contains(&v) { Some(S::draw_value(s)) } else { None });
    }
    let lat = HexLattice { spec: spec.clone(), layout, faces: fs, values, initial: init, params };
    if lat.frontier().is_empty() {
        return Err(Error::PatternTooSmall(format!("{} pattern seeds no hexagon", spec.kind.name())));
    }
    Ok(lat)
}

/// Initial lattice: pattern values and parameters drawn from the pattern's seed.
pub fn init_lattice<S: Draw>(spec: &IvpSpec, sys: &HexSystem) -> Result<HexLattice<S>> {
    draw_lattice(spec, sys, &mut Sampler::new(spec.seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Forward,
    Reverse,
}

/// Fill the lattice by repeated pair solves.  Faces are scanned in the given
/// order; every scan solves each ready face it meets.
pub fn fill<S: Scalar>(lat: &mut HexLattice<S>, sys: &HexSystem, order: Order) -> Result<Vec<Vtx>> {
    let mut seq: Vec<Vtx> = lat.faces.clone();
    if order == Order::Reverse {
        seq.reverse();
    }
    let mut solved = vec![];
    loop {
        let mut progress = false;
        for &f in &seq {
            let Some(i) = lat.ready(f) else { continue };
            let x = lat.partial_values(f);
            let (v1, v2) = sys.solve_pair(i, &x, &lat.params).map_err(|e| match e {
                Error::SingularSolve(m) => Error::SingularSolve(format!("face ({}, {}): {m}", f.0, f.1)),
                e => e,
            })?;
            let vs = face_vertices(f);
            lat.values.insert(vs[(i + 4) % 6], Some(v1));
            lat.values.insert(vs[(i + 5) % 6], Some(v2));
            solved.push(f);
            progress = true;
        }
        if !progress {
            break;
        }
    }
    let unknown = lat.unknown();
    if unknown > 0 {
        return Err(Error::Stalled { unknown });
    }
    Ok(solved)
}

/// Verify every face: all six rows vanish and each of the six pair solves,
/// from the face's other four values, reproduces the stored pair.
pub fn verify<S: Scalar>(lat: &HexLattice<S>, sys: &HexSystem, rep: &mut ConsistencyReport) -> Result<()> {
    for &f in &lat.faces {
        let id = format!("face({},{})", f.0, f.1);
        let Some(x) = lat.face_values(f) else {
            rep.fail(format!("{id}/complete"), "face has unknown vertices", 0);
            continue;
        };
        let (ok, res) = sys.all_rows_ok(&x, &lat.params)?;
        rep.check(format!("{id}/rows"), S::EXACT, ok, res, 0);
        let mut bad = vec![];
        for i in 0..6 {
            match sys.solve_pair(i, &x, &lat.params) {
                Ok((v1, v2)) => {
                    if !(same(&v1, &x[(i + 4) % 6], sys.tol) && same(&v2, &x[(i + 5) % 6], sys.tol)) {
                        bad.push(format!("pair x_{}x_{}", ROLES[(i + 4) % 6], ROLES[(i + 5) % 6]));
                    }
                }
                // a vanishing coefficient means that pair is not determined here
                Err(Error::SingularSolve(_)) => {}
                Err(e) => return Err(e),
            }
        }
        rep.check(format!("{id}/determinations"), S::EXACT, bad.is_empty(), json!(bad.len()), 0);
        if !bad.is_empty() {
            rep.entries.last_mut().expect("just pushed").detail = Some(bad.join(", "));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Evolution<S> {
    pub lattice: HexLattice<S>,
    pub report: ConsistencyReport,
}

/// Initialise, fill in two scheduling orders, verify, and compare.  Draws
/// that hit a singular solve are redrawn (bounded).
pub fn evolve<S: Draw>(spec: &IvpSpec, sys: &HexSystem) -> Result<Evolution<S>> {
    let t0 = std::time::Instant::now();
    let mut s = Sampler::new(spec.seed);
    let mut done = None;
    for _ in 0..GUARD_LIMIT {
        let lat: HexLattice<S> = draw_lattice(spec, sys, &mut s)?;
        let mut fwd = lat.clone();
        let mut rev = lat;
        match fill(&mut fwd, sys, Order::Forward).and_then(|_| fill(&mut rev, sys, Order::Reverse)) {
            Ok(_) => {
                done = Some((fwd, rev));
                break;
            }
            Err(Error::SingularSolve(_)) => s.resamples += 1,
            Err(e) => return Err(e),
        }
    }
    let (fwd, rev) = done.ok_or(Error::GuardExhausted(GUARD_LIMIT))?;
    let mut rep = ConsistencyReport::new(json!({
        "suite": "evolve",
        "system": sys.describe(),
        "ivp": spec.kind.name(),
        "rows": spec.rows,
        "cols": spec.cols,
        "seed": spec.seed,
        "initial_known": fwd.initial.len(),
        "sampling": SAMPLING_POLICY,
    }));
    verify(&fwd, sys, &mut rep)?;
    let identical = fwd.values == rev.values;
    rep.check("dual-order", S::EXACT || identical, identical, json!(identical), s.resamples);
    if !S::EXACT && !identical {
        // floats: report the largest discrepancy instead
        let worst = fwd
            .values
            .iter()
            .filter_map(|(k, v)| Some((v.clone()?.clone() - rev.values.get(k)?.clone()?).mag()))
            .fold(0.0, f64::max);
        rep.entries.last_mut().expect("just pushed").detail = Some(format!("max difference {worst:e}"));
    }
    rep.wall_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(Evolution { lattice: fwd, report: rep })
}

impl<S: Scalar> HexLattice<S> {
    /// JSON export: dimensions, parameter map, vertex values, per-face
    /// residual booleans.
    pub fn to_json(&self, sys: &HexSystem) -> Value {
        let vertices: Vec<Value> = self
            .values
            .iter()
            .map(|(&(r, c), v)| {
                json!({
                    "row": r,
                    "col": c,
                    "value": v.as_ref().map(|v| v.render()).unwrap_or(Value::Null),
                    "initial": self.initial.contains(&(r, c)),
                })
            })
            .collect();
        let faces: Vec<Value> = self
            .faces
            .iter()
            .map(|&f| {
                let zero: Vec<bool> = match self.face_values(f) {
                    Some(x) => (0..6).map(|k| sys.row_ok(k, &x, &self.params).map(|r| r.0).unwrap_or(false)).collect(),
                    None => vec![false; 6],
                };
                json!({ "row": f.0, "col": f.1, "residual_zero": zero })
            })
            .collect();
        json!({
            "rows": self.spec.rows,
            "cols": self.spec.cols,
            "layout": self.layout,
            "ivp": self.spec.kind.name(),
            "system": sys.name(),
            "parameters": {
                "alpha": self.params[0].render(),
                "beta": self.params[1].render(),
                "gamma": self.params[2].render(),
            },
            "edge_labels": ["gamma", "alpha", "beta", "gamma", "alpha", "beta"],
            "vertices": vertices,
            "faces": faces,
        })
    }

    /// CSV rows `row,col,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for (&(r, c), v) in &self.values {
            let s = match v.as_ref().map(|v| v.render()) {
                Some(Value::String(s)) => s,
                Some(Value::Array(a)) => format!("{}{:+}i", a[0], a[1].as_f64().unwrap_or(0.0)),
                Some(other) => other.to_string(),
                None => String::new(),
            };
            out.push_str(&format!("{r},{c},{s}\n"));
        }
        out
    }
}

/// All shipped patterns at one size, for the audit fixture.
pub fn pattern_fixture(rows: usize, cols: usize) -> Value {
    let mut m = serde_json::Map::new();
    for kind in [IvpKind::Staircase, IvpKind::Corner, IvpKind::Column, IvpKind::Row] {
        let v = pattern(&kind, rows, cols).map(|p| json!(p)).unwrap_or(Value::Null);
        m.insert(kind.name().to_string(), v);
    }
    json!({ "rows": rows, "cols": cols, "known": m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Family;
    use crate::scalar::Rat;

    fn a210() -> HexSystem {
        HexSystem::type_a(Family::A2 { d1: 1, d2: 0 }).unwrap()
    }

    #[test]
    fn pattern_sizes() {
        assert_eq!(pattern(&IvpKind::Corner, 8, 8).unwrap().len(), 32);
        assert_eq!(pattern(&IvpKind::Staircase, 8, 8).unwrap().len(), 33);
        assert!(pattern(&IvpKind::Staircase, 8, 6).is_err());
    }

    #[test]
    fn staircase_frontier() {
        let spec = IvpSpec { kind: IvpKind::Staircase, rows: 8, cols: 8, seed: 1 };
        let lat: HexLattice<Rat> = init_lattice(&spec, &a210()).unwrap();
        for &f in &lat.faces {
            let k = face_vertices(f).iter().filter(|v| lat.known(v)).count();
            assert!(k <= 4);
        }
        assert!(!lat.frontier().is_empty());
    }

    #[test]
    fn evolve_patterns() {
        for kind in [IvpKind::Staircase, IvpKind::Corner, IvpKind::Column, IvpKind::Row] {
            let spec = IvpSpec { kind: kind.clone(), rows: 6, cols: 6, seed: 3 };
            let ev: Evolution<Rat> = evolve(&spec, &a210()).unwrap();
            assert!(ev.report.passed(), "{}: {:?}", kind.name(), ev.report.first_failure());
            assert_eq!(ev.lattice.unknown(), 0);
        }
    }

    #[test]
    fn type_c_corner() {
        let c = Family::C3 { d2x: [2, 0, 0] };
        let sys = HexSystem::type_c(c, c).unwrap();
        let spec = IvpSpec { kind: IvpKind::Corner, rows: 6, cols: 6, seed: 2 };
        let ev: Evolution<Rat> = evolve(&spec, &sys).unwrap();
        assert!(ev.report.passed(), "{:?}", ev.report.first_failure());
    }

    #[test]
    fn stall_is_an_error() {
        let spec = IvpSpec { kind: IvpKind::Explicit(vec![(1, 8), (0, 8), (0, 9), (0, 10)]), rows: 4, cols: 4, seed: 1 };
        let r: Result<Evolution<Rat>> = evolve(&spec, &a210());
        assert!(matches!(r, Err(Error::Stalled { .. })), "{r:?}");
        let spec = IvpSpec { kind: IvpKind::Explicit(vec![(0, 8)]), rows: 4, cols: 4, seed: 1 };
        assert!(matches!(init_lattice::<Rat>(&spec, &a210()), Err(Error::PatternTooSmall(_))));
    }

    #[test]
    fn fixture_matches() {
        let want: Value = serde_json::from_str(include_str!("../fixtures/patterns_8x8.json")).unwrap();
        assert_eq!(pattern_fixture(8, 8), want);
    }
}
