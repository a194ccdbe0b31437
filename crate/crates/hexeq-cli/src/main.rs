//! `hexeq` command line: run a verification suite, write its JSON report,
//! print a one-line summary.  Exit status: 0 all checks passed, 1 some check
//! failed (report still written), 2 bad configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hexeq::catalog::{correspondence_table, Domain, Family};
use hexeq::hexsys::{c_pairs, cah_verify, hex_symmetry_suite, HexSystem};
use hexeq::lattice::{evolve, Evolution, IvpKind, IvpSpec};
use hexeq::legs::{leg_families, legs_suite, LEG_TOL};
use hexeq::polytopes::{combo_table, legal_rows, run_polytope, PolyShape, PolytopeScenario};
use hexeq::report::{write_atomic, ConsistencyReport};
use hexeq::scalar::{Rat, C64};
use hexeq::suites::{correspondence_suite, symmetry_suite};
use hexeq::Error;

const OUT_DIR_ENV: &str = "HEXEQ_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "hexeq-reports";

#[derive(Parser)]
#[command(name = "hexeq", version, about = "Exact verification of hex equation systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one verification suite
    #[command(subcommand)]
    Check(Check),
    /// Evolve a hex system on a hexagonal lattice from an initial pattern
    Evolve(EvolveArgs),
    /// List families, combination rows, scenarios and patterns
    List,
}

#[derive(Subcommand)]
enum Check {
    /// Consistency around a hexagon, including all eight solve paths
    Cah(SysArgs),
    /// Equation symmetries, plus hexagon symmetries for hex families
    Symmetry(SysArgs),
    /// Face-centered equation against its ABS quad equation
    Correspondence(SysArgs),
    /// Three-leg / four-leg forms and vertex-star compositions
    Legs(SysArgs),
    /// Consistency on a polytope with a combination row
    Polytope(PolyArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// report path; defaults to a generated name in $HEXEQ_OUT_DIR
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SysArgs {
    #[arg(long)]
    family: String,
    /// comma-separated flags, e.g. `1,0` or `1/2,0,1/2`
    #[arg(long, default_value = "")]
    flags: String,
    /// partner C̄ of a type-C system; defaults to C itself
    #[arg(long)]
    cbar_family: Option<String>,
    #[arg(long, default_value = "")]
    cbar_flags: String,
    /// accept a C/C̄ pair outside the legal pairings
    #[arg(long)]
    unchecked: bool,
    /// tolerance for floating-point suites (elliptic, legs)
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct PolyArgs {
    #[arg(long)]
    shape: String,
    /// row name (`C1_0`, `A2_1_1`), label (`C3(1;0;0)`) or type-C row index
    #[arg(long)]
    combo: String,
    /// exchange Q and Q* of the row (sensitivity control)
    #[arg(long)]
    exchange_q: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct EvolveArgs {
    #[command(flatten)]
    sys: SysArgs,
    /// staircase | corner | column | row
    #[arg(long, default_value = "corner")]
    ivp: String,
    #[arg(long, default_value_t = 8)]
    rows: usize,
    #[arg(long, default_value_t = 8)]
    cols: usize,
}

/// Configuration problems map to exit status 2.
struct ConfigError(String);

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

type Run = Result<bool, ConfigError>;

fn family(root: &str, flags: &str) -> Result<Family, ConfigError> {
    let parts: Vec<&str> = flags.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(Family::from_parts(root, &parts)?)
}

impl SysArgs {
    fn family(&self) -> Result<Family, ConfigError> {
        family(&self.family, &self.flags)
    }

    fn system(&self) -> Result<HexSystem, ConfigError> {
        let f = self.family()?;
        if f.is_type_a() {
            if self.cbar_family.is_some() {
                return Err(ConfigError("--cbar-family only applies to type-C systems".into()));
            }
            return Ok(HexSystem::type_a(f)?);
        }
        if !f.is_type_c() {
            return Err(ConfigError(format!("{} is not a hex family (type A or C)", f.label())));
        }
        let cbar = match &self.cbar_family {
            Some(r) => family(r, &self.cbar_flags)?,
            None => f,
        };
        Ok(if self.unchecked { HexSystem::type_c_unchecked(f, cbar)? } else { HexSystem::type_c(f, cbar)? })
    }

    fn subject(&self) -> Result<String, ConfigError> {
        let mut s = self.family()?.combo_name();
        if let Some(r) = &self.cbar_family {
            s.push_str("--");
            s.push_str(&family(r, &self.cbar_flags)?.combo_name());
        }
        Ok(s.replace('/', "h"))
    }
}

fn out_path(common: &Common, default_name: String) -> PathBuf {
    common.out.clone().unwrap_or_else(|| {
        let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        dir.join(default_name)
    })
}

fn finish(rep: &ConsistencyReport, what: &str, path: &Path) -> Run {
    rep.write_atomic(path).map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    let s = &rep.summary;
    println!(
        "{what}: {} checks, {} exact-zero, {} within-tol, {} failed, {} resamples ({:.0} ms) -> {}",
        s.total,
        s.exact_zero,
        s.within_tol,
        s.failed,
        s.resamples,
        rep.wall_time_ms,
        path.display()
    );
    if let Some(f) = rep.first_failure() {
        println!("first failure: {} {}", f.id, f.detail.as_deref().unwrap_or(""));
    }
    Ok(rep.passed())
}

fn check(c: Check) -> Run {
    match c {
        Check::Cah(a) => {
            let sys = a.system()?;
            let rep = cah_verify(&sys, a.common.trials.unwrap_or(100), a.common.seed);
            finish(&rep, &format!("cah {}", sys.name()), &out_path(&a.common, format!("cah-{}.json", a.subject()?)))
        }
        Check::Symmetry(a) => {
            let f = a.family()?;
            let trials = a.common.trials.unwrap_or(if f.domain() == Domain::Elliptic { 50 } else { 100 });
            let mut rep = symmetry_suite(f, trials, a.common.seed);
            if f.is_type_a() || f.is_type_c() {
                rep.merge(hex_symmetry_suite(&a.system()?, trials, a.common.seed));
            }
            finish(&rep, &format!("symmetry {}", f.label()), &out_path(&a.common, format!("symmetry-{}.json", a.subject()?)))
        }
        Check::Correspondence(a) => {
            let f = a.family()?;
            let rep = correspondence_suite(f, a.common.trials.unwrap_or(100), a.common.seed)?;
            finish(&rep, &format!("correspondence {}", f.label()), &out_path(&a.common, format!("correspondence-{}.json", a.subject()?)))
        }
        Check::Legs(a) => {
            let f = a.family()?;
            let rep = legs_suite(f, a.common.trials.unwrap_or(50), a.common.seed, a.tol.unwrap_or(LEG_TOL));
            finish(&rep, &format!("legs {}", f.label()), &out_path(&a.common, format!("legs-{}.json", a.subject()?)))
        }
        Check::Polytope(a) => {
            let shape = PolyShape::parse(&a.shape)?;
            let sc = PolytopeScenario::load(shape)?;
            let mut row = combo_table(&a.combo)?;
            if a.exchange_q {
                row = row.with_q_exchanged();
            }
            let rep = run_polytope(&sc, &row, a.common.trials.unwrap_or(50), a.common.seed)?;
            let name = format!("polytope-{}-{}.json", shape.name(), row.name().replace('/', "h"));
            finish(&rep, &format!("{} {}", shape.name(), row.label()), &out_path(&a.common, name))
        }
    }
}

fn write_evolution<S: hexeq::scalar::Scalar>(ev: &Evolution<S>, sys: &HexSystem, path: &Path) -> Result<(), ConfigError> {
    let io = |e: std::io::Error| ConfigError(format!("cannot write {}: {e}", path.display()));
    let mut lat = ev.lattice.to_json(sys);
    lat["summary"] = json!(ev.report.summary);
    write_atomic(path, serde_json::to_string_pretty(&lat).expect("lattice serializes").as_bytes()).map_err(io)?;
    write_atomic(&path.with_extension("csv"), ev.lattice.to_csv().as_bytes()).map_err(io)?;
    Ok(())
}

fn evolve_cmd(a: EvolveArgs) -> Run {
    let mut sys = a.sys.system()?;
    if let Some(t) = a.sys.tol {
        sys.tol = t;
    }
    let spec = IvpSpec { kind: IvpKind::parse(&a.ivp)?, rows: a.rows, cols: a.cols, seed: a.sys.common.seed };
    let stem = format!("evolve-{}-{}-{}x{}", a.sys.subject()?, a.ivp, a.rows, a.cols);
    let path = out_path(&a.sys.common, format!("{stem}.json"));
    let report_path = path.with_extension("report.json");
    let what = format!("evolve {} {} {}x{}", sys.name(), a.ivp, a.rows, a.cols);
    let res = if sys.domain() == Domain::Elliptic {
        evolve::<C64>(&spec, &sys).map(|ev| write_evolution(&ev, &sys, &path).map(|_| ev.report))
    } else {
        evolve::<Rat>(&spec, &sys).map(|ev| write_evolution(&ev, &sys, &path).map(|_| ev.report))
    };
    let rep = match res {
        Ok(r) => r?,
        Err(e @ (Error::PatternTooSmall(_) | Error::Parse(_) | Error::DomainMismatch(_))) => return Err(e.into()),
        Err(e) => {
            // stalls and unresolvable singular solves are verification failures
            let mut r = ConsistencyReport::new(json!({ "suite": "evolve", "system": sys.describe(), "ivp": a.ivp }));
            r.fail("evolution", e.to_string(), 0);
            r
        }
    };
    finish(&rep, &what, &report_path)
}

fn list() -> Run {
    println!("families:");
    for f in Family::all().into_iter().filter(|f| f.is_legal()) {
        println!("  {:<16} {:<10} {:?}", f.label(), f.combo_name(), f.domain());
    }
    println!("legal C pairs:");
    for (c, cb) in c_pairs() {
        println!("  {} / {}", c.label(), cb.label());
    }
    println!("face -> ABS rows:");
    for r in correspondence_table() {
        println!("  {} -> {}{}", r.face.label(), r.quad.label(), if r.swap_ac_bd { " (x_a<->x_c, x_b<->x_d)" } else { "" });
    }
    println!("leg families:");
    println!("  {}", leg_families().iter().map(|f| f.label()).collect::<Vec<_>>().join(" "));
    println!("scenarios:");
    for s in PolyShape::ALL {
        let sc = PolytopeScenario::load(s)?;
        println!("  {:<7} type {} {} unknowns, {} equations", s.name(), if sc.type_c { "C" } else { "A" }, sc.unknowns(), sc.steps.len());
        for r in legal_rows(&sc) {
            println!("    {:<14} {}", r.name(), r.label());
        }
    }
    println!("lattice patterns: staircase corner column row");
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Check(c) => check(c),
        Cmd::Evolve(a) => evolve_cmd(a),
        Cmd::List => list(),
    };
    match r {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(ConfigError(m)) => {
            eprintln!("hexeq: {m}");
            ExitCode::from(2)
        }
    }
}
