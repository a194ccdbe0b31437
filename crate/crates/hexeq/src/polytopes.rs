//! Consistency on polytopes with quadrilateral and hexagonal faces: the
//! hexagonal prism (type A and two type-C arrangements), the elongated
//! dodecahedron (two arrangements), the truncated octahedron and the
//! 6-6-duoprism.
//!
//! Scenarios are data (scenarios/*.toml): ordered equation instances with
//! their argument and parameter bindings, some marked as solving for one or
//! two unknowns.  After all solves, every equation of the scenario is
//! evaluated as a check.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::{eval_quad, trapezoidal, Domain, EquationSpec, Family};
use crate::error::{Error, Result};
use crate::hexsys::{solve_linear, HexSystem};
use crate::report::{render_residual, ConsistencyReport};
use crate::sampling::{Draw, Sampler, GUARD_LIMIT, SAMPLING_POLICY};
use crate::scalar::{Par, Rat};

// ---------------------------------------------------------------------------
// combination rows

/// One row of the legal combination tables.  `None` in `cbar` / `qstar`
/// stands for "same as C" / "same as Q".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ComboRow {
    TypeC { c: Family, cbar: Option<Family>, h: EquationSpec, q: Family, qstar: Option<Family> },
    TypeA { a: Family, q: Family },
}

impl ComboRow {
    pub fn name(&self) -> String {
        match self {
            ComboRow::TypeC { c, .. } => c.combo_name(),
            ComboRow::TypeA { a, .. } => a.combo_name(),
        }
    }

    /// The row as printed.
    pub fn label(&self) -> String {
        match *self {
            ComboRow::TypeC { c, cbar, h, q, qstar } => {
                let hl = if h.swap_ab_cd {
                    format!("{} (x_a<->x_b, x_c<->x_d)", h.family.label())
                } else {
                    h.family.label()
                };
                format!(
                    "{} | {} | {} | {} | {}",
                    c.label(),
                    cbar.map(|f| f.label()).unwrap_or_else(|| "same as C".into()),
                    hl,
                    q.label(),
                    qstar.map(|f| f.label()).unwrap_or_else(|| "same as Q".into()),
                )
            }
            ComboRow::TypeA { a, q } => format!("{} | {}", a.label(), q.label()),
        }
    }

    pub fn cbar(&self) -> Option<Family> {
        match *self {
            ComboRow::TypeC { c, cbar, .. } => Some(cbar.unwrap_or(c)),
            ComboRow::TypeA { .. } => None,
        }
    }

    pub fn qstar(&self) -> Option<Family> {
        match *self {
            ComboRow::TypeC { q, qstar, .. } => Some(qstar.unwrap_or(q)),
            ComboRow::TypeA { .. } => None,
        }
    }

    pub fn is_type_c(&self) -> bool {
        matches!(self, ComboRow::TypeC { .. })
    }

    /// Q and Q* interchanged; not a table row (sensitivity control).
    pub fn with_q_exchanged(&self) -> ComboRow {
        match *self {
            ComboRow::TypeC { c, cbar, h, q, qstar } => {
                ComboRow::TypeC { c, cbar, h, q: qstar.unwrap_or(q), qstar: Some(q) }
            }
            a => a,
        }
    }

    pub fn is_tabulated(&self) -> bool {
        type_c_rows().contains(self) || type_a_rows().contains(self)
    }

    pub fn describe(&self) -> Value {
        match *self {
            ComboRow::TypeC { c, h, q, .. } => json!({
                "type": "C",
                "name": self.name(),
                "label": self.label(),
                "C": c.id(),
                "Cbar": self.cbar().map(|f| f.id()),
                "H": h.id(),
                "Q": q.id(),
                "Qstar": self.qstar().map(|f| f.id()),
            }),
            ComboRow::TypeA { a, q } => json!({
                "type": "A",
                "name": self.name(),
                "label": self.label(),
                "A": a.id(),
                "Q": q.id(),
            }),
        }
    }
}

/// Combinations of type-C hex equations and quad equations.
pub fn type_c_rows() -> Vec<ComboRow> {
    use Family::*;
    let row = |c, cbar, h, q, qstar| ComboRow::TypeC { c, cbar, h, q, qstar };
    let n = EquationSpec::new;
    let s = EquationSpec::swapped;
    vec![
        row(C3 { d2x: [1, 1, 0] }, Some(C3 { d2x: [1, 0, 1] }), n(H3 { d: 1, e: 1 }), Q3 { d: 1 }, Some(Q3 { d: 0 })),
        row(C3 { d2x: [1, 0, 1] }, Some(C3 { d2x: [1, 1, 0] }), s(H3 { d: 1, e: 1 }), Q3 { d: 0 }, Some(Q3 { d: 1 })),
        row(C3 { d2x: [2, 0, 0] }, None, n(H3 { d: 1, e: 0 }), Q3 { d: 0 }, None),
        row(C3 { d2x: [0, 0, 0] }, None, n(H3 { d: 0, e: 0 }), Q3 { d: 0 }, None),
        row(C2 { d1: 1, d2: 1, d3: 0 }, Some(C2 { d1: 1, d2: 0, d3: 1 }), n(H2 { e: 1 }), Q2, Some(Q1 { d: 1 })),
        row(C2 { d1: 1, d2: 0, d3: 1 }, Some(C2 { d1: 1, d2: 1, d3: 0 }), s(H2 { e: 1 }), Q1 { d: 1 }, Some(Q2)),
        row(C2 { d1: 1, d2: 0, d3: 0 }, None, n(H2 { e: 0 }), Q1 { d: 1 }, None),
        row(C1 { d: 1 }, Some(C2 { d1: 0, d2: 0, d3: 0 }), n(H1 { e: 1 }), Q1 { d: 1 }, Some(Q1 { d: 0 })),
        row(C2 { d1: 0, d2: 0, d3: 0 }, Some(C1 { d: 1 }), s(H1 { e: 1 }), Q1 { d: 0 }, Some(Q1 { d: 1 })),
        row(C1 { d: 0 }, None, n(H1 { e: 0 }), Q1 { d: 0 }, None),
    ]
}

/// Type-A / type-Q pairs (left side of the face → ABS table).
pub fn type_a_rows() -> Vec<ComboRow> {
    use Family::*;
    vec![
        ComboRow::TypeA { a: A3 { d: 1 }, q: Q3 { d: 1 } },
        ComboRow::TypeA { a: A3 { d: 0 }, q: Q3 { d: 0 } },
        ComboRow::TypeA { a: A2 { d1: 1, d2: 1 }, q: Q2 },
        ComboRow::TypeA { a: A2 { d1: 1, d2: 0 }, q: Q1 { d: 1 } },
        ComboRow::TypeA { a: A2 { d1: 0, d2: 0 }, q: Q1 { d: 0 } },
    ]
}

/// Look a row up by command-line name (`C3_1/2_1/2_0`, `A2_1_1`), printed
/// label (`C1(0)`), or zero-based index into the type-C table.
pub fn combo_table(key: &str) -> Result<ComboRow> {
    let key = key.trim();
    let tc = type_c_rows();
    if let Ok(i) = key.parse::<usize>() {
        return tc.get(i).copied().ok_or_else(|| Error::UnknownRow(key.to_string()));
    }
    let first = |r: &ComboRow| match *r {
        ComboRow::TypeC { c, .. } => c,
        ComboRow::TypeA { a, .. } => a,
    };
    tc.into_iter()
        .chain(type_a_rows())
        .find(|r| r.name() == key || first(r).label() == key)
        .ok_or_else(|| Error::UnknownRow(key.to_string()))
}

// ---------------------------------------------------------------------------
// scenarios

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyShape {
    Aprism,
    Cahp1,
    Cahp2,
    Caed1,
    Caed2,
    Cato,
    Ca66d,
}

impl PolyShape {
    pub const ALL: [PolyShape; 7] = [
        PolyShape::Aprism,
        PolyShape::Cahp1,
        PolyShape::Cahp2,
        PolyShape::Caed1,
        PolyShape::Caed2,
        PolyShape::Cato,
        PolyShape::Ca66d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolyShape::Aprism => "aprism",
            PolyShape::Cahp1 => "cahp1",
            PolyShape::Cahp2 => "cahp2",
            PolyShape::Caed1 => "caed1",
            PolyShape::Caed2 => "caed2",
            PolyShape::Cato => "cato",
            PolyShape::Ca66d => "ca66d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let l = s.to_ascii_lowercase();
        PolyShape::ALL
            .into_iter()
            .find(|p| p.name() == l)
            .ok_or_else(|| Error::Parse(format!("unknown polytope {s:?}")))
    }

    fn source(&self) -> &'static str {
        match self {
            PolyShape::Aprism => include_str!("../scenarios/aprism.toml"),
            PolyShape::Cahp1 => include_str!("../scenarios/cahp1.toml"),
            PolyShape::Cahp2 => include_str!("../scenarios/cahp2.toml"),
            PolyShape::Caed1 => include_str!("../scenarios/caed1.toml"),
            PolyShape::Caed2 => include_str!("../scenarios/caed2.toml"),
            PolyShape::Cato => include_str!("../scenarios/cato.toml"),
            PolyShape::Ca66d => include_str!("../scenarios/ca66d.toml"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EqKind {
    #[serde(rename = "hex")]
    Hex,
    /// hex system oriented with C and C̄ exchanged
    #[serde(rename = "hexbar")]
    HexBar,
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "Q*")]
    QStar,
    #[serde(rename = "H")]
    H,
    #[serde(rename = "H*")]
    HStar,
}

impl EqKind {
    pub fn arity(&self) -> usize {
        match self {
            EqKind::Hex | EqKind::HexBar => 6,
            _ => 4,
        }
    }

    fn n_params(&self) -> usize {
        match self {
            EqKind::Hex | EqKind::HexBar => 3,
            _ => 2,
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            EqKind::Hex => "hex",
            EqKind::HexBar => "hexbar",
            EqKind::Q => "Q",
            EqKind::QStar => "Q*",
            EqKind::H => "H",
            EqKind::HStar => "H*",
        }
    }

    fn type_c_only(&self) -> bool {
        !matches!(self, EqKind::Hex | EqKind::Q)
    }
}

#[derive(Clone, Debug, Deserialize)]
struct StepFile {
    eq: EqKind,
    args: Vec<String>,
    params: Vec<String>,
    #[serde(default)]
    solve: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
struct CellFile {
    x: String,
    y: String,
    params: [String; 4],
    stage: u8,
    #[serde(default, rename = "final")]
    final_checks: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    kind: String,
    params: Vec<String>,
    initial: Vec<String>,
    #[serde(default)]
    step: Vec<StepFile>,
    #[serde(default)]
    tuples: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    cell: Vec<CellFile>,
}

/// One equation instance.  Variables and parameters are indices into the
/// scenario's name tables.
#[derive(Clone, Debug, Serialize)]
pub struct Step {
    pub id: String,
    pub eq: EqKind,
    pub args: Vec<usize>,
    pub params: Vec<usize>,
    pub solve: Vec<usize>,
    /// checks singled out as not implied by the sub-polytopes
    pub final_check: bool,
    /// 0 for explicit step lists; cell stage otherwise
    pub stage: u8,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolytopeScenario {
    pub shape: PolyShape,
    pub type_c: bool,
    pub params: Vec<String>,
    pub vars: Vec<String>,
    pub initial: Vec<usize>,
    pub steps: Vec<Step>,
}

/// The eight equations of a hexagonal prism cell: two hex systems on the
/// x- and y-faces and one quad equation on each side face.
pub fn prism_system(x: &[String; 6], y: &[String; 6], p: &[String; 4]) -> Vec<(&'static str, EqKind, Vec<String>, Vec<String>)> {
    let [a, b, g, r] = p.clone();
    let q = |i: usize, j: usize, k: &String| (vec![y[i].clone(), y[j].clone(), x[i].clone(), x[j].clone()], vec![k.clone(), r.clone()]);
    let mut out = vec![
        ("PX.a", EqKind::Hex, x.to_vec(), vec![a.clone(), b.clone(), g.clone()]),
        ("PX.b", EqKind::Hex, y.to_vec(), vec![a.clone(), b.clone(), g.clone()]),
    ];
    for (name, (args, ps)) in [
        ("PQ.a", q(0, 1, &g)),
        ("PQ.b", q(1, 2, &a)),
        ("PQ.c", q(2, 3, &b)),
        ("PQ.d", q(4, 3, &g)),
        ("PQ.e", q(5, 4, &a)),
        ("PQ.f", q(0, 5, &b)),
    ] {
        out.push((name, EqKind::Q, args, ps));
    }
    out
}

struct Names {
    idx: BTreeMap<String, usize>,
    list: Vec<String>,
}

impl Names {
    fn new() -> Self {
        Names { idx: BTreeMap::new(), list: vec![] }
    }
    fn get(&mut self, n: &str) -> usize {
        if let Some(&i) = self.idx.get(n) {
            return i;
        }
        self.list.push(n.to_string());
        self.idx.insert(n.to_string(), self.list.len() - 1);
        self.list.len() - 1
    }
}

/// Slots of two cyclically adjacent hex arguments, ordered (u1, u2) with
/// u2 following u1.
fn adjacent_pair(a: usize, b: usize) -> Option<(usize, usize)> {
    if (a + 1) % 6 == b {
        Some((a, b))
    } else if (b + 1) % 6 == a {
        Some((b, a))
    } else {
        None
    }
}

impl PolytopeScenario {
    pub fn load(shape: PolyShape) -> Result<Self> {
        Self::parse(shape, shape.source())
    }

    pub fn parse(shape: PolyShape, text: &str) -> Result<Self> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| Error::Scenario(format!("{}: {e}", shape.name())))?;
        if f.name != shape.name() {
            return Err(Error::Scenario(format!("file names {} but was loaded as {}", f.name, shape.name())));
        }
        let type_c = match f.kind.as_str() {
            "typec" => true,
            "typea" => false,
            k => return Err(Error::Scenario(format!("unknown scenario kind {k:?}"))),
        };
        let mut vars = Names::new();
        let initial: Vec<usize> = f.initial.iter().map(|n| vars.get(n)).collect();
        let pidx: BTreeMap<&str, usize> = f.params.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let param = |n: &String| pidx.get(n.as_str()).copied().ok_or_else(|| Error::Scenario(format!("undeclared parameter {n}")));

        let mut steps = vec![];
        for (k, s) in f.step.iter().enumerate() {
            steps.push(Step {
                id: format!("step{}:{}({})", k + 1, s.eq.symbol(), s.args.join(",")),
                eq: s.eq,
                args: s.args.iter().map(|n| vars.get(n)).collect(),
                params: s.params.iter().map(&param).collect::<Result<_>>()?,
                solve: s.solve.iter().map(|n| vars.get(n)).collect(),
                final_check: false,
                stage: 0,
            });
        }
        for (n, c) in f.cell.iter().enumerate() {
            let tuple = |t: &String| -> Result<[String; 6]> {
                f.tuples
                    .get(t)
                    .cloned()
                    .ok_or_else(|| Error::Scenario(format!("unknown tuple {t}")))?
                    .try_into()
                    .map_err(|_| Error::Scenario(format!("tuple {t} needs six variables")))
            };
            for (name, eq, args, ps) in prism_system(&tuple(&c.x)?, &tuple(&c.y)?, &c.params) {
                steps.push(Step {
                    id: format!("cell{}:P({},{})/{name}", n + 1, c.x, c.y),
                    eq,
                    args: args.iter().map(|v| vars.get(v)).collect(),
                    params: ps.iter().map(&param).collect::<Result<_>>()?,
                    solve: vec![],
                    final_check: c.final_checks.iter().any(|f| f == name),
                    stage: c.stage,
                });
            }
        }
        let mut sc = PolytopeScenario { shape, type_c, params: f.params.clone(), vars: vars.list, initial, steps };
        if !f.cell.is_empty() {
            sc.schedule_cells()?;
        }
        sc.audit()?;
        Ok(sc)
    }

    /// Cell scenarios: stage by stage, repeatedly let any equation with
    /// exactly one unknown (quad) or two adjacent unknowns (hex) solve them.
    fn schedule_cells(&mut self) -> Result<()> {
        let mut known: BTreeSet<usize> = self.initial.iter().copied().collect();
        let stages: BTreeSet<u8> = self.steps.iter().map(|s| s.stage).collect();
        for stage in stages {
            loop {
                let mut progress = false;
                for s in self.steps.iter_mut().filter(|s| s.stage == stage) {
                    let unk: Vec<usize> = (0..s.args.len()).filter(|&i| !known.contains(&s.args[i])).collect();
                    let ok = match (s.eq.arity(), unk.len()) {
                        (4, 1) => true,
                        (6, 2) => adjacent_pair(unk[0], unk[1]).is_some(),
                        _ => false,
                    };
                    if ok {
                        s.solve = unk.iter().map(|&i| s.args[i]).collect();
                        known.extend(s.solve.iter().copied());
                        progress = true;
                    }
                }
                if !progress {
                    break;
                }
            }
        }
        Ok(())
    }

    /// Structural audit: arities, declared parameters, every solve step has
    /// its other arguments already known, every non-initial vertex is solved
    /// exactly once.
    pub fn audit(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(format!("{}: {m}", self.shape.name())));
        let mut known: BTreeSet<usize> = BTreeSet::new();
        for &v in &self.initial {
            if !known.insert(v) {
                return bad(format!("initial variable {} listed twice", self.vars[v]));
            }
        }
        for s in &self.steps {
            if s.args.len() != s.eq.arity() || s.params.len() != s.eq.n_params() {
                return bad(format!("{} has the wrong number of arguments or parameters", s.id));
            }
            if !self.type_c && s.eq.type_c_only() {
                return bad(format!("{} uses {} in a type-A scenario", s.id, s.eq.symbol()));
            }
            let distinct: BTreeSet<_> = s.args.iter().collect();
            if distinct.len() != s.args.len() {
                return bad(format!("{} repeats a variable", s.id));
            }
            if s.solve.is_empty() {
                continue;
            }
            for &u in &s.solve {
                if !s.args.contains(&u) {
                    return bad(format!("{} solves {} which it does not involve", s.id, self.vars[u]));
                }
                if known.contains(&u) {
                    return bad(format!("{} is determined twice (again in {})", self.vars[u], s.id));
                }
            }
            let unknown: Vec<usize> = s.args.iter().copied().filter(|v| !known.contains(v)).collect();
            if unknown.len() != s.solve.len() {
                return bad(format!("{} has unknowns besides its solve targets", s.id));
            }
            match (s.eq.arity(), s.solve.len()) {
                (4, 1) => {}
                (6, 2) => {
                    let pos = |v| s.args.iter().position(|&a| a == v).expect("checked above");
                    if adjacent_pair(pos(s.solve[0]), pos(s.solve[1])).is_none() {
                        return bad(format!("{} solves a non-adjacent pair", s.id));
                    }
                }
                _ => return bad(format!("{} solves {} variables", s.id, s.solve.len())),
            }
            known.extend(s.solve.iter().copied());
        }
        let all: BTreeSet<usize> = self.steps.iter().flat_map(|s| s.args.iter().copied()).collect();
        if let Some(&v) = all.difference(&known).next() {
            return bad(format!("vertex {} is never determined", self.vars[v]));
        }
        if let Some(&v) = known.difference(&all).next() {
            return bad(format!("variable {} is on no face", self.vars[v]));
        }
        Ok(())
    }

    pub fn unknowns(&self) -> usize {
        self.vars.len() - self.initial.len()
    }

    pub fn describe(&self) -> Value {
        json!({
            "shape": self.shape.name(),
            "type": if self.type_c { "C" } else { "A" },
            "parameters": self.params,
            "initial": self.initial.iter().map(|&v| &self.vars[v]).collect::<Vec<_>>(),
            "vertices": self.vars.len(),
            "unknowns": self.unknowns(),
            "equations": self.steps.len(),
            "solve_steps": self.steps.iter().filter(|s| !s.solve.is_empty()).count(),
        })
    }
}

// ---------------------------------------------------------------------------
// execution

/// The equations a combination row assigns to each equation kind.
struct Assigned {
    hex: HexSystem,
    hexbar: Option<HexSystem>,
    q: EquationSpec,
    qstar: EquationSpec,
    h: Option<EquationSpec>,
}

impl Assigned {
    fn new(combo: &ComboRow) -> Result<Self> {
        Ok(match *combo {
            ComboRow::TypeA { a, q } => Assigned {
                hex: HexSystem::type_a(a)?,
                hexbar: None,
                q: q.into(),
                qstar: q.into(),
                h: None,
            },
            ComboRow::TypeC { c, h, q, .. } => {
                let cbar = combo.cbar().expect("type C");
                let hex = HexSystem::type_c(c, cbar)?;
                Assigned {
                    hexbar: Some(hex.exchanged()),
                    hex,
                    q: q.into(),
                    qstar: combo.qstar().expect("type C").into(),
                    h: Some(h),
                }
            }
        })
    }

    fn domain(&self) -> Domain {
        self.hex.domain()
    }

    fn hex_for(&self, eq: EqKind) -> &HexSystem {
        match eq {
            EqKind::HexBar => self.hexbar.as_ref().expect("audited: type C"),
            _ => &self.hex,
        }
    }

    fn quad(&self, eq: EqKind, x: &[Rat; 4], a: &Par<Rat>, b: &Par<Rat>) -> Result<Rat> {
        let h = || self.h.as_ref().expect("audited: type C");
        match eq {
            EqKind::Q => eval_quad(&self.q, x, a, b, None),
            EqKind::QStar => eval_quad(&self.qstar, x, a, b, None),
            EqKind::H => eval_quad(h(), x, a, b, None),
            EqKind::HStar => trapezoidal(h(), x, a, b, None),
            EqKind::Hex | EqKind::HexBar => unreachable!("quad evaluation of a hex system"),
        }
    }

    fn residuals(&self, s: &Step, vals: &[Option<Rat>], p: &[Par<Rat>]) -> Result<Vec<Rat>> {
        let x: Vec<Rat> = s.args.iter().map(|&v| vals[v].clone().expect("all variables determined")).collect();
        let pp: Vec<Par<Rat>> = s.params.iter().map(|&i| p[i].clone()).collect();
        match s.eq.arity() {
            6 => self.hex_for(s.eq).residuals(&to6(&x), &to3(&pp)),
            _ => Ok(vec![self.quad(s.eq, &to4(&x), &pp[0], &pp[1])?]),
        }
    }

    fn solve(&self, k: usize, s: &Step, vals: &mut [Option<Rat>], p: &[Par<Rat>]) -> Result<()> {
        let pp: Vec<Par<Rat>> = s.params.iter().map(|&i| p[i].clone()).collect();
        let mut x: Vec<Rat> = s.args.iter().map(|&v| vals[v].clone().unwrap_or_default()).collect();
        let pos = |v| s.args.iter().position(|&a| a == v).expect("audited");
        let what = format!("step {} ({})", k + 1, s.id);
        if s.eq.arity() == 6 {
            let (u1, _) = adjacent_pair(pos(s.solve[0]), pos(s.solve[1])).expect("audited");
            let (v1, v2) = self
                .hex_for(s.eq)
                .solve_pair((u1 + 2) % 6, &to6(&x), &to3(&pp))
                .map_err(|e| tag_singular(e, &what))?;
            vals[s.args[u1]] = Some(v1);
            vals[s.args[(u1 + 1) % 6]] = Some(v2);
        } else {
            let u = pos(s.solve[0]);
            let v = solve_linear(
                |t: Rat| {
                    x[u] = t;
                    self.quad(s.eq, &to4(&x), &pp[0], &pp[1])
                },
                &what,
            )?;
            vals[s.solve[0]] = Some(v);
        }
        Ok(())
    }
}

fn tag_singular(e: Error, what: &str) -> Error {
    match e {
        Error::SingularSolve(m) => Error::SingularSolve(format!("{what}: {m}")),
        e => e,
    }
}

fn to6(x: &[Rat]) -> [Rat; 6] {
    x.to_vec().try_into().expect("hex arity")
}
fn to4(x: &[Rat]) -> [Rat; 4] {
    x.to_vec().try_into().expect("quad arity")
}
fn to3(p: &[Par<Rat>]) -> [Par<Rat>; 3] {
    p.to_vec().try_into().expect("hex parameters")
}

fn check_legal(sc: &PolytopeScenario, combo: &ComboRow) -> Result<()> {
    if sc.type_c != combo.is_type_c() {
        return Err(Error::IllegalCombo { row: combo.label(), shape: sc.shape.name().into() });
    }
    Ok(())
}

type Solved = (Vec<Option<Rat>>, Vec<Par<Rat>>);

/// One trial: draw, solve in order, redraw on a singular solve.
fn poly_trial(sc: &PolytopeScenario, eqs: &Assigned, seed: u64, t: usize) -> ConsistencyReport {
    let mut rep = ConsistencyReport::new(Value::Null);
    let mut s = Sampler::for_trial(seed, t as u64);
    let mut solved = None;
    let mut last_err = None;
    for _ in 0..GUARD_LIMIT {
        let attempt = (|| -> Result<Solved> {
            let p: Vec<Par<Rat>> = (0..sc.params.len()).map(|_| Rat::draw_par(&mut s, eqs.domain())).collect::<Result<_>>()?;
            let mut vals: Vec<Option<Rat>> = vec![None; sc.vars.len()];
            for &v in &sc.initial {
                vals[v] = Some(Rat::draw_value(&mut s));
            }
            for (k, st) in sc.steps.iter().enumerate().filter(|(_, st)| !st.solve.is_empty()) {
                eqs.solve(k, st, &mut vals, &p)?;
            }
            Ok((vals, p))
        })();
        match attempt {
            Ok(v) => {
                solved = Some(v);
                break;
            }
            Err(e @ Error::SingularSolve(_)) => {
                last_err = Some(e);
                s.resamples += 1;
            }
            Err(e) => {
                rep.fail(format!("trial{t}/solve"), e.to_string(), s.resamples);
                return rep;
            }
        }
    }
    let Some((vals, p)) = solved else {
        let m = last_err.map(|e| e.to_string()).unwrap_or_default();
        rep.fail(format!("trial{t}/solve"), format!("{} ({m})", Error::GuardExhausted(GUARD_LIMIT)), s.resamples);
        return rep;
    };
    for st in &sc.steps {
        let id = format!("trial{t}/{}", st.id);
        match eqs.residuals(st, &vals, &p) {
            Ok(r) => {
                let bad = r.iter().find(|v| !num_traits::Zero::is_zero(*v));
                let shown = bad.map(render_residual).unwrap_or_else(|| Value::String("0/1".into()));
                rep.check(id, true, bad.is_none(), shown, 0);
                if st.final_check {
                    rep.entries.last_mut().expect("just pushed").detail = Some("final check".into());
                }
            }
            Err(e) => rep.fail(id, e.to_string(), 0),
        }
    }
    // resamples are charged once per trial
    if let Some(e) = rep.entries.first_mut() {
        e.resamples = s.resamples;
        rep.summary.resamples += s.resamples;
    }
    rep
}

/// Run a scenario with a combination row on `trials` independent draws.
pub fn run_polytope(sc: &PolytopeScenario, combo: &ComboRow, trials: usize, seed: u64) -> Result<ConsistencyReport> {
    check_legal(sc, combo)?;
    let eqs = Assigned::new(combo)?;
    let t0 = std::time::Instant::now();
    let mut rep = ConsistencyReport::new(json!({
        "suite": "polytope",
        "scenario": sc.describe(),
        "combo": combo.describe(),
        "tabulated": combo.is_tabulated(),
        "trials": trials,
        "seed": seed,
        "sampling": SAMPLING_POLICY,
    }));
    let parts: Vec<ConsistencyReport> = (0..trials).into_par_iter().map(|t| poly_trial(sc, &eqs, seed, t)).collect();
    for p in parts {
        rep.merge(p);
    }
    if !combo.is_tabulated() {
        rep.note("combination is not a table row; failures are expected");
    }
    rep.wall_time_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(rep)
}

/// Legal rows for a shape: the type-C table for type-C scenarios, the
/// type-A pairs otherwise.
pub fn legal_rows(sc: &PolytopeScenario) -> Vec<ComboRow> {
    if sc.type_c {
        type_c_rows()
    } else {
        type_a_rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenarios_load_and_audit() {
        for s in PolyShape::ALL {
            let sc = PolytopeScenario::load(s).unwrap();
            assert!(sc.unknowns() > 0, "{}", s.name());
        }
        let sc = PolytopeScenario::load(PolyShape::Ca66d).unwrap();
        assert_eq!(sc.unknowns(), 29);
        assert_eq!(sc.steps.iter().filter(|s| s.final_check).count(), 5);
        assert_eq!(PolytopeScenario::load(PolyShape::Cahp1).unwrap().unknowns(), 7);
    }

    #[test]
    fn audit_catches_double_solve() {
        let text = PolyShape::Cahp1.source().replacen("solve = [\"yc\"]", "solve = [\"yb\"]", 1);
        let e = PolytopeScenario::parse(PolyShape::Cahp1, &text).unwrap_err();
        assert!(matches!(e, Error::Scenario(_)), "{e}");
    }

    #[test]
    fn table_rows() {
        let r = combo_table("C1_0").unwrap();
        assert_eq!(r.label(), "C1(0) | same as C | H1(0) | Q1(0) | same as Q");
        let r = combo_table("C2(1;0;1)").unwrap();
        assert!(matches!(r, ComboRow::TypeC { h, .. } if h.swap_ab_cd && h.family == Family::H2 { e: 1 }));
        assert!(matches!(combo_table("A2_1_1").unwrap(), ComboRow::TypeA { q: Family::Q2, .. }));
        assert!(matches!(combo_table("C9"), Err(Error::UnknownRow(_))));
        assert!(matches!(combo_table("10"), Err(Error::UnknownRow(_))));
    }

    #[test]
    fn cahp1_c3_row() {
        let sc = PolytopeScenario::load(PolyShape::Cahp1).unwrap();
        let r = run_polytope(&sc, &combo_table("C3_1_0_0").unwrap(), 8, 1).unwrap();
        assert!(r.passed(), "{:?}", r.first_failure());
        assert_eq!(r.summary.exact_zero, r.summary.total);
    }

    #[test]
    fn all_rows_all_shapes() {
        for shape in PolyShape::ALL.into_iter().filter(|s| *s != PolyShape::Ca66d) {
            let sc = PolytopeScenario::load(shape).unwrap();
            for row in legal_rows(&sc) {
                let r = run_polytope(&sc, &row, 3, 5).unwrap();
                assert!(r.passed(), "{} {}: {:?}", shape.name(), row.label(), r.first_failure());
            }
        }
    }

    #[test]
    fn duoprism_type_a_rows() {
        let sc = PolytopeScenario::load(PolyShape::Ca66d).unwrap();
        for row in type_a_rows() {
            let r = run_polytope(&sc, &row, 2, 3).unwrap();
            assert!(r.passed(), "{}: {:?}", row.label(), r.first_failure());
            let finals = r.entries.iter().filter(|e| e.detail.as_deref() == Some("final check")).count();
            assert_eq!(finals, 10);
        }
    }

    #[test]
    fn negative_control() {
        let sc = PolytopeScenario::load(PolyShape::Cahp1).unwrap();
        let row = combo_table("C2_1_1_0").unwrap().with_q_exchanged();
        let r = run_polytope(&sc, &row, 3, 1).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn illegal_combo() {
        let sc = PolytopeScenario::load(PolyShape::Aprism).unwrap();
        let e = run_polytope(&sc, &combo_table("C1_0").unwrap(), 1, 1).unwrap_err();
        assert!(matches!(e, Error::IllegalCombo { .. }));
    }
}
