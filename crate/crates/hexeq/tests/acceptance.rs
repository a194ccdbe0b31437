//! Acceptance run: one line per criterion, tolerances and bounds pinned here.
//! Built without the libtest harness so the lines always print.

use std::time::{Duration, Instant};

use hexeq::catalog::{correspondence_table, Domain, Family};
use hexeq::hexsys::{c_pairs, cah_verify, hex_symmetry_suite, HexSystem};
use hexeq::lattice::{evolve, IvpKind, IvpSpec};
use hexeq::legs::{leg_families, legs_suite};
use hexeq::polytopes::{combo_table, run_polytope, type_a_rows, type_c_rows, PolyShape, PolytopeScenario};
use hexeq::report::{ConsistencyReport, Status};
use hexeq::scalar::Rat;
use hexeq::suites::{correspondence_suite, symmetry_suite};

const SEED: u64 = 20240601;
const CAH_TRIALS: usize = 100;
const CAH_A4_TRIALS: usize = 25;
const A4_TOL: f64 = 1e-8;
const CAH_BUDGET: Duration = Duration::from_secs(30);
const SYM_TRIALS: usize = 50;
const CORR_TRIALS: usize = 50;
const LEG_TRIALS: usize = 50;
const LEG_TOL: f64 = 1e-9;
const LATTICE_SIZE: usize = 8;
const LATTICE_BUDGET: Duration = Duration::from_secs(10);
const POLY_TRIALS: usize = 50;
const DUOPRISM_TRIALS: usize = 10;
const POLY_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    ok: bool,
    detail: String,
}

fn line(n: usize, what: &str, t: Duration, o: &Outcome) {
    println!(
        "criterion {n} {} {what}: {} ({:.1} s)",
        if o.ok { "PASS" } else { "FAIL" },
        o.detail,
        t.as_secs_f64()
    );
}

fn first_bad(reps: &[(String, ConsistencyReport)]) -> Option<String> {
    reps.iter().find(|(_, r)| !r.passed()).map(|(n, r)| {
        let f = r.first_failure().expect("failed report");
        format!("{n}: {} {}", f.id, f.detail.clone().unwrap_or_default())
    })
}

fn totals(reps: &[(String, ConsistencyReport)]) -> (usize, usize, usize) {
    reps.iter().fold((0, 0, 0), |(t, z, f), (_, r)| (t + r.summary.total, z + r.summary.exact_zero, f + r.summary.failed))
}

fn hex_systems() -> Vec<HexSystem> {
    let mut out: Vec<HexSystem> = Family::all()
        .into_iter()
        .filter(|f| f.is_legal() && f.is_type_a() && f.domain() != Domain::Elliptic)
        .map(|f| HexSystem::type_a(f).unwrap())
        .collect();
    let mut pairs = vec![];
    for (c, cb) in c_pairs() {
        pairs.push((c, cb));
        if c != cb {
            pairs.push((cb, c));
        }
    }
    out.extend(pairs.into_iter().map(|(c, cb)| HexSystem::type_c(c, cb).unwrap()));
    out
}

/// 1 and 2 share the runs: each CAH trial records the six pair solves and
/// their eight paths.
fn cah() -> (Outcome, Outcome, Duration) {
    let t0 = Instant::now();
    let reps: Vec<(String, ConsistencyReport)> =
        hex_systems().iter().map(|s| (s.name(), cah_verify(s, CAH_TRIALS, SEED))).collect();
    let elapsed = t0.elapsed();
    let mut a4 = HexSystem::type_a(Family::A4).unwrap();
    a4.tol = A4_TOL;
    let a4r = cah_verify(&a4, CAH_A4_TRIALS, SEED);

    let rows_exact = reps.iter().all(|(_, r)| r.entries.iter().filter(|e| e.id.ends_with("/rows")).all(|e| e.status == Status::ExactZero));
    let (tot, zero, failed) = totals(&reps);
    let ok1 = failed == 0 && rows_exact && a4r.passed() && elapsed < CAH_BUDGET;
    let d1 = format!(
        "{} systems x {CAH_TRIALS} trials, {tot} checks, {zero} exact-zero, {failed} failed, exact in {:.1} s (< {} s); A4 {} trials {} within {A4_TOL:e}{}",
        reps.len(),
        elapsed.as_secs_f64(),
        CAH_BUDGET.as_secs(),
        CAH_A4_TRIALS,
        if a4r.passed() { "all" } else { "NOT all" },
        first_bad(&reps).map(|s| format!("; first failure {s}")).unwrap_or_default(),
    );
    let paths: Vec<_> = reps.iter().flat_map(|(_, r)| r.entries.iter().filter(|e| e.id.ends_with("/paths"))).collect();
    let ok2 = !paths.is_empty() && paths.iter().all(|e| e.status == Status::ExactZero);
    let d2 = format!("{} pair solves x 8 paths, {} agree exactly", paths.len(), paths.iter().filter(|e| e.status == Status::ExactZero).count());
    (Outcome { ok: ok1, detail: d1 }, Outcome { ok: ok2, detail: d2 }, t0.elapsed())
}

fn symmetries() -> Outcome {
    let mut reps = vec![];
    for f in Family::all().into_iter().filter(|f| f.is_legal()) {
        reps.push((f.label(), symmetry_suite(f, SYM_TRIALS, SEED)));
    }
    let mut sys = hex_systems();
    sys.push(HexSystem::type_a(Family::A4).unwrap());
    for s in sys {
        reps.push((format!("hex {}", s.name()), hex_symmetry_suite(&s, SYM_TRIALS, SEED)));
    }
    let excluded: usize = reps.iter().map(|(_, r)| r.entries.iter().filter(|e| e.id.ends_with("/excluded")).count()).sum();
    let (tot, _, failed) = totals(&reps);
    Outcome {
        ok: failed == 0 && excluded > 0,
        detail: format!(
            "{} suites, {tot} checks, {failed} failed; {excluded} excluded (family, symmetry) samples fail the identity as required{}",
            reps.len(),
            first_bad(&reps).map(|s| format!("; first failure {s}")).unwrap_or_default()
        ),
    }
}

fn correspondence() -> Outcome {
    let mut reps = vec![];
    for row in correspondence_table() {
        reps.push((row.face.label(), correspondence_suite(row.face, CORR_TRIALS, SEED).unwrap()));
    }
    let a200 = reps.iter().find(|(n, _)| n == "A2(0;0)").map(|(_, r)| r.notes.first().cloned().unwrap_or_default());
    let minus_one = a200.as_deref() == Some("fitted constant -1/1");
    let (tot, _, failed) = totals(&reps);
    Outcome {
        ok: failed == 0 && minus_one,
        detail: format!(
            "{} rows x {CORR_TRIALS} samples, {tot} checks, {failed} failed; A2(0;0)->Q1(0) {}{}",
            reps.len(),
            a200.unwrap_or_default(),
            first_bad(&reps).map(|s| format!("; first failure {s}")).unwrap_or_default()
        ),
    }
}

fn legs() -> Outcome {
    let mut reps = vec![];
    let mut skipped = vec![];
    for f in leg_families() {
        let r = legs_suite(f, LEG_TRIALS, SEED, LEG_TOL);
        if r.entries.is_empty() {
            skipped.push(f.label());
        }
        reps.push((f.label(), r));
    }
    let star = reps
        .iter()
        .flat_map(|(_, r)| r.entries.iter())
        .filter(|e| !e.id.contains("three-leg") && !e.id.contains("four-leg"))
        .count();
    let (tot, _, failed) = totals(&reps);
    Outcome {
        ok: failed == 0 && star > 0,
        detail: format!(
            "{} families x {LEG_TRIALS} samples, {tot} residuals < {LEG_TOL:e} ({star} vertex-star), {failed} failed; not applicable: {}{}",
            reps.len() - skipped.len(),
            skipped.join(" "),
            first_bad(&reps).map(|s| format!("; first failure {s}")).unwrap_or_default()
        ),
    }
}

fn lattice() -> Outcome {
    let runs = [
        (HexSystem::type_a(Family::A2 { d1: 1, d2: 0 }).unwrap(), IvpKind::Staircase),
        (HexSystem::type_a(Family::A2 { d1: 1, d2: 0 }).unwrap(), IvpKind::Corner),
        (HexSystem::type_a(Family::A3 { d: 1 }).unwrap(), IvpKind::Staircase),
        (HexSystem::type_c(Family::C3 { d2x: [2, 0, 0] }, Family::C3 { d2x: [2, 0, 0] }).unwrap(), IvpKind::Corner),
    ];
    let mut ok = true;
    let mut parts = vec![];
    for (sys, kind) in runs {
        let spec = IvpSpec { kind: kind.clone(), rows: LATTICE_SIZE, cols: LATTICE_SIZE, seed: SEED };
        let t = Instant::now();
        let r = evolve::<Rat>(&spec, &sys);
        let dt = t.elapsed();
        let good = match &r {
            Ok(ev) => ev.report.passed() && ev.report.summary.exact_zero == ev.report.summary.total && ev.lattice.unknown() == 0,
            Err(_) => false,
        };
        ok &= good && dt < LATTICE_BUDGET;
        parts.push(format!(
            "{} {} {}",
            sys.name(),
            kind.name(),
            match r {
                Ok(_) if good => format!("exact, dual-order identical, {:.1} s", dt.as_secs_f64()),
                Ok(ev) => format!("FAILED {:?}", ev.report.first_failure().map(|e| e.id.clone())),
                Err(e) => format!("ERROR {e}"),
            }
        ));
    }
    Outcome { ok, detail: format!("{LATTICE_SIZE}x{LATTICE_SIZE}: {} (each < {} s)", parts.join("; "), LATTICE_BUDGET.as_secs()) }
}

fn polytopes() -> (Outcome, Duration) {
    let t0 = Instant::now();
    let mut reps = vec![];
    for shape in [PolyShape::Cahp1, PolyShape::Cahp2, PolyShape::Caed1, PolyShape::Caed2, PolyShape::Cato] {
        let sc = PolytopeScenario::load(shape).unwrap();
        for row in type_c_rows() {
            reps.push((format!("{} {}", shape.name(), row.name()), run_polytope(&sc, &row, POLY_TRIALS, SEED).unwrap()));
        }
    }
    for (shape, trials) in [(PolyShape::Aprism, POLY_TRIALS), (PolyShape::Ca66d, DUOPRISM_TRIALS)] {
        let sc = PolytopeScenario::load(shape).unwrap();
        assert!(shape != PolyShape::Ca66d || sc.unknowns() == 29);
        for row in type_a_rows() {
            reps.push((format!("{} {}", shape.name(), row.name()), run_polytope(&sc, &row, trials, SEED).unwrap()));
        }
    }
    let dt = t0.elapsed();
    let (tot, zero, failed) = totals(&reps);
    let ok = failed == 0 && zero == tot && dt < POLY_BUDGET;
    (
        Outcome {
            ok,
            detail: format!(
                "{} (shape, row) runs, {tot} checks, {zero} exact-zero, {failed} failed (< {} s){}",
                reps.len(),
                POLY_BUDGET.as_secs(),
                first_bad(&reps).map(|s| format!("; first failure {s}")).unwrap_or_default()
            ),
        },
        dt,
    )
}

fn negative_controls() -> Outcome {
    let illegal = HexSystem::type_c_unchecked(Family::C1 { d: 1 }, Family::C1 { d: 1 }).unwrap();
    let r1 = cah_verify(&illegal, 5, SEED);
    let sc = PolytopeScenario::load(PolyShape::Cahp1).unwrap();
    let row = combo_table("C2_1_1_0").unwrap().with_q_exchanged();
    let r2 = run_polytope(&sc, &row, 5, SEED).unwrap();
    Outcome {
        ok: !r1.passed() && !r2.passed(),
        detail: format!(
            "illegal pair (C1(1), C1(1)): {} of {} CAH checks failed; CAHP1 with {}: {} of {} checks failed",
            r1.summary.failed,
            r1.summary.total,
            row.label(),
            r2.summary.failed,
            r2.summary.total
        ),
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let t = Instant::now();
    let o = f();
    (o, t.elapsed())
}

fn main() {
    let mut all = true;
    let (c1, c2, t12) = cah();
    line(1, "consistency around a hexagon", t12, &c1);
    line(2, "eight-path agreement", t12, &c2);
    let (c3, t3) = timed(symmetries);
    line(3, "symmetries", t3, &c3);
    let (c4, t4) = timed(correspondence);
    line(4, "face -> ABS correspondence", t4, &c4);
    let (c5, t5) = timed(legs);
    line(5, "leg equations", t5, &c5);
    let (c6, t6) = timed(lattice);
    line(6, "lattice evolution", t6, &c6);
    let (c7, tc) = polytopes();
    line(7, "polytope consistency", tc, &c7);
    let (c8, t8) = timed(negative_controls);
    line(8, "negative controls", t8, &c8);
    for c in [&c1, &c2, &c3, &c4, &c5, &c6, &c7, &c8] {
        all &= c.ok;
    }
    if !all {
        std::process::exit(1);
    }
}
