//! Command-line front end: subcommands, run reports and exit codes.
//!
//! Exit code 0 means every requested check passed, 1 that some check failed
//! or could not be evaluated, 2 a usage error or unreadable input.

mod report;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::finquant::{check_axioms, check_complete_lattice, check_continuity, FiniteQuantale, QuantaleDoc};
use crate::law::LawReport;
use crate::loctop::{
    check_classical, check_distributive, check_local, check_sober, irreducible_closed_sets, points_of_locale,
    specialization_order, FiniteLattice, FiniteSpace, LatticeDoc, SpaceDoc,
};
use crate::maxa::hasse;
use crate::numeric::round_sig;
use crate::observer::{
    approximation_map, atom_lattice, check_observer_axioms, identity_beta, spin_beta, spin_observer, Spin,
};
use crate::order::hasse_dot;
use crate::relquant::{groupoid_quantale, pair_relation_map, relation_quantale, FiniteGroupoid};
use crate::subspace::{Tolerance, DEFAULT_EPS};

#[derive(Parser, Debug)]
#[command(name = "mslab", version, about = "Finite-scale measurement spaces")]
pub struct Cli {
    /// Tolerance for rank, containment and equality decisions.
    #[arg(long, global = true, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// Write the run report as JSON to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Emit a Hasse diagram in DOT, to PATH or to standard output.
    #[arg(long, global = true, value_name = "PATH", num_args = 0..=1)]
    pub dot: Option<Option<PathBuf>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the spin fixtures and check that their atoms join correctly.
    Fixtures {
        #[arg(long, value_enum)]
        spin: SpinArg,
    },
    /// Check the measurement space axioms of a quantale document.
    CheckAxioms { file: PathBuf },
    /// Check a space, lattice or quantale document.
    Topology {
        file: PathBuf,
        #[arg(long, value_enum)]
        check: TopologyCheck,
    },
    /// Summarize a lattice document (spaces give their lattice of opens).
    Lattice { file: PathBuf },
    /// Validate a groupoid document and optionally its quantale.
    Groupoid {
        file: PathBuf,
        /// Build the quantale of subsets of arrows.
        #[arg(long)]
        quantale: bool,
        /// Check axioms, continuity and classicality of that quantale.
        #[arg(long)]
        check: bool,
    },
    /// Print the diagonal observer's retraction table and laws.
    Observer {
        #[arg(long, value_enum)]
        spin: SpinArg,
    },
    /// Print the change-of-basis map and its verification.
    Beta {
        #[arg(long, value_enum)]
        spin: SpinArg,
    },
    /// Run every acceptance check end to end.
    Report,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SpinArg {
    Half,
    One,
}

impl From<SpinArg> for Spin {
    fn from(s: SpinArg) -> Self {
        match s {
            SpinArg::Half => Spin::Half,
            SpinArg::One => Spin::One,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum TopologyCheck {
    Sober,
    Distributive,
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Verdicts and facts of one invocation. Checks and facts are keyed
/// alphabetically; only `timing_ms` varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub eps: f64,
    pub passed: bool,
    pub checks: BTreeMap<String, Check>,
    pub facts: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: impl Into<String>, eps: f64) -> Self {
        Self {
            command: command.into(),
            eps: round_sig(eps),
            passed: true,
            checks: BTreeMap::new(),
            facts: BTreeMap::new(),
            timing_ms: None,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: Option<String>) {
        self.passed &= passed;
        self.checks.insert(name.into(), Check { passed, witness: None, detail });
    }

    /// Adds every verdict of `laws` as `prefix.law`.
    pub fn laws(&mut self, prefix: &str, laws: &LawReport) {
        for v in &laws.verdicts {
            self.passed &= v.passed;
            self.checks.insert(
                format!("{prefix}.{}", v.law),
                Check { passed: v.passed, witness: v.witness.clone(), detail: v.note.clone() },
            );
        }
    }

    pub fn fact(&mut self, name: impl Into<String>, value: impl Into<Value>) {
        self.facts.insert(name.into(), value.into());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, c) in &self.checks {
            let _ = write!(out, "{} {name}", if c.passed { "PASS" } else { "FAIL" });
            if let Some(w) = &c.witness {
                let _ = write!(out, " witness={w:?}");
            }
            if let Some(d) = &c.detail {
                let _ = write!(out, " ({d})");
            }
            out.push('\n');
        }
        let failed = self.checks.values().filter(|c| !c.passed).count();
        let _ = writeln!(out, "{} checks, {failed} failed", self.checks.len());
        out
    }
}

/// Result of a subcommand before output is written.
struct Outcome {
    report: RunReport,
    lines: Vec<String>,
    dot: Option<String>,
}

impl Outcome {
    fn new(report: RunReport) -> Self {
        Self { report, lines: Vec::new(), dot: None }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let result = Tolerance::new(cli.eps).map_err(|e| Failure::Usage(e.to_string())).and_then(|tol| execute(&cli, tol));
    let mut outcome = match result {
        Ok(o) => o,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return 2;
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            return 1;
        }
    };
    outcome.report.timing_ms = Some(round_sig(start.elapsed().as_secs_f64() * 1e3));
    for line in &outcome.lines {
        println!("{line}");
    }
    print!("{}", outcome.report.render());
    if let Some(dot_target) = &cli.dot {
        let dot = outcome.dot.clone().unwrap_or_default();
        match dot_target {
            Some(path) => {
                if let Err(e) = fs::write(path, dot) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            None => print!("{dot}"),
        }
    }
    if let Some(path) = &cli.json {
        let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
        if let Err(e) = fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 2;
        }
    }
    if outcome.report.passed {
        0
    } else {
        1
    }
}

fn execute(cli: &Cli, tol: Tolerance) -> Result<Outcome, Failure> {
    let eps = tol.eps();
    match &cli.command {
        Command::Fixtures { spin } => fixtures((*spin).into(), tol),
        Command::CheckAxioms { file } => check_axioms_cmd(file, eps),
        Command::Topology { file, check } => topology_cmd(file, *check, eps),
        Command::Lattice { file } => lattice_cmd(file, eps),
        Command::Groupoid { file, quantale, check } => groupoid_cmd(file, *quantale, *check, eps),
        Command::Observer { spin } => observer_cmd((*spin).into(), tol),
        Command::Beta { spin } => beta_cmd((*spin).into(), tol),
        Command::Report => Ok(report::run(tol)),
    }
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn malformed(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

fn file_command(name: &str, path: &Path) -> String {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{name} {file}")
}

/// A document holding a space, a lattice or a quantale, told apart by keys.
enum AnyDoc {
    Space(FiniteSpace),
    Lattice(FiniteLattice),
    Quantale(FiniteQuantale),
}

fn read_any(path: &Path) -> Result<AnyDoc, Failure> {
    let value: Value = read_doc(path)?;
    let bad = malformed(path);
    let parse = |v: Value| -> Result<AnyDoc, Error> {
        if v.get("points").is_some() {
            Ok(AnyDoc::Space(FiniteSpace::from_doc(serde_json::from_value::<SpaceDoc>(v)?)?))
        } else if v.get("prod").is_some() {
            Ok(AnyDoc::Quantale(FiniteQuantale::from_doc(serde_json::from_value::<QuantaleDoc>(v)?)?))
        } else {
            Ok(AnyDoc::Lattice(FiniteLattice::from_doc(serde_json::from_value::<LatticeDoc>(v)?)?))
        }
    };
    parse(value).map_err(bad)
}

impl AnyDoc {
    fn lattice(&self) -> Result<FiniteLattice, Error> {
        match self {
            AnyDoc::Space(x) => Ok(x.open_lattice()),
            AnyDoc::Lattice(l) => Ok(l.clone()),
            AnyDoc::Quantale(q) => FiniteLattice::new(q.leq_table().to_vec()),
        }
    }
}

fn fixtures(spin: Spin, tol: Tolerance) -> Result<Outcome, Failure> {
    let fx = spin.fixtures(tol);
    let mut out = Outcome::new(RunReport::new(format!("fixtures --spin {spin}"), tol.eps()));
    for (name, s) in fx.iter() {
        out.lines.push(format!("{name}: dim {}", s.dim()));
    }
    for (atoms, top) in [(spin.z_atoms(), "z"), (spin.x_atoms(), "x")] {
        let ok = atom_lattice(&fx, atoms, top, tol);
        out.report.check(format!("fixtures.{top}_atoms_join_to_{top}"), ok.is_ok(), ok.err().map(|e| e.to_string()));
    }
    out.report.fact("fixtures", serde_json::to_value(&fx).expect("fixtures serialize"));
    let names: Vec<String> = fx.names().map(str::to_string).collect();
    let covers = hasse(&fx.subspaces(), tol)?;
    out.dot = Some(hasse_dot(&names, &covers));
    Ok(out)
}

fn check_axioms_cmd(file: &Path, eps: f64) -> Result<Outcome, Failure> {
    let doc: QuantaleDoc = read_doc(file)?;
    let q = FiniteQuantale::from_doc(doc).map_err(malformed(file))?;
    let mut out = Outcome::new(RunReport::new(file_command("check-axioms", file), eps));
    let lattice = check_complete_lattice(&q).map_err(malformed(file))?;
    out.report.laws("lattice", &lattice);
    if lattice.passed() {
        out.report.laws("axioms", &check_axioms(&q)?);
        if q.topology().is_some() {
            out.report.laws("continuity", &check_continuity(&q)?);
        }
    }
    out.report.fact("size", q.size());
    if let Ok(p) = q.poset() {
        let labels: Vec<String> = (0..q.size()).map(|i| i.to_string()).collect();
        out.dot = Some(hasse_dot(&labels, &p.covers()));
    }
    Ok(out)
}

/// Records a checker result, turning a failed precondition into a failed
/// check rather than an abort.
fn laws_or_precondition(report: &mut RunReport, prefix: &str, result: crate::error::Result<LawReport>) -> Result<(), Failure> {
    match result {
        Ok(laws) => report.laws(prefix, &laws),
        Err(Error::Precondition(m)) => report.check(format!("{prefix}.precondition"), false, Some(m)),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn topology_cmd(file: &Path, check: TopologyCheck, eps: f64) -> Result<Outcome, Failure> {
    let doc = read_any(file)?;
    let name = match check {
        TopologyCheck::Sober => "sober",
        TopologyCheck::Distributive => "distributive",
        TopologyCheck::Classical => "classical",
    };
    let mut out = Outcome::new(RunReport::new(format!("{} --check {name}", file_command("topology", file)), eps));
    let lattice = doc.lattice().map_err(malformed(file))?;
    out.dot = Some(lattice.to_dot());
    match check {
        TopologyCheck::Sober => {
            let AnyDoc::Space(x) = &doc else {
                return Err(Failure::Usage("sobriety needs a space document with \"points\" and \"opens\"".into()));
            };
            out.report.laws("sober", &check_sober(x));
            let spec = specialization_order(x);
            let below: Vec<String> = (0..x.size())
                .flat_map(|a| (0..x.size()).map(move |b| (a, b)))
                .filter(|&(a, b)| a != b && spec.leq[a][b])
                .map(|(a, b)| format!("{} <= {}", x.label(a), x.label(b)))
                .collect();
            out.lines.extend(below.iter().cloned());
            out.report.fact("specialization", below);
            let irreducible: Vec<String> = irreducible_closed_sets(x).iter().map(|c| x.describe(&c.set)).collect();
            out.report.fact("irreducible_closed_sets", irreducible);
            out.report.fact("locale_points", points_of_locale(&lattice).len());
        }
        TopologyCheck::Distributive => out.report.laws("lattice", &check_distributive(&lattice)),
        TopologyCheck::Classical => {
            let q = match &doc {
                AnyDoc::Quantale(q) => q.clone(),
                _ => FiniteQuantale::local_from_order(lattice.poset().table().to_vec(), None)
                    .and_then(FiniteQuantale::with_alexandrov_topology)
                    .map_err(malformed(file))?,
            };
            laws_or_precondition(&mut out.report, "classical", check_classical(&q))?;
            let local = check_local(&q);
            if let Ok(l) = &local {
                out.report.fact("local", l.passed());
            }
        }
    }
    Ok(out)
}

fn lattice_cmd(file: &Path, eps: f64) -> Result<Outcome, Failure> {
    let lattice = read_any(file)?.lattice().map_err(malformed(file))?;
    let mut out = Outcome::new(RunReport::new(file_command("lattice", file), eps));
    let labels = lattice.labels();
    let covers: Vec<String> =
        lattice.covers().iter().map(|&(a, b)| format!("{} < {}", labels[a], labels[b])).collect();
    out.lines.push(format!("size {}, bottom {}, top {}", lattice.size(), labels[lattice.bottom()], labels[lattice.top()]));
    out.lines.extend(covers.iter().cloned());
    out.report.check("lattice.valid", true, None);
    out.report.fact("size", lattice.size());
    out.report.fact("covers", covers);
    out.report.fact("distributive", check_distributive(&lattice).passed());
    out.dot = Some(lattice.to_dot());
    Ok(out)
}

fn groupoid_cmd(file: &Path, quantale: bool, check: bool, eps: f64) -> Result<Outcome, Failure> {
    let g: FiniteGroupoid = read_doc(file)?;
    let mut out = Outcome::new(RunReport::new(file_command("groupoid", file), eps));
    let valid = g.validate();
    out.report.check("groupoid.valid", valid.is_ok(), valid.as_ref().err().map(|e| e.to_string()));
    out.report.fact("objects", g.objects.len());
    out.report.fact("arrows", g.arrows.len());
    if valid.is_err() || !(quantale || check) {
        return Ok(out);
    }
    let q = groupoid_quantale(&g)?;
    out.report.fact("quantale_size", q.size());
    if let Ok(map) = pair_relation_map(&g) {
        let n = g.objects.len();
        let rel = relation_quantale(n)?;
        let preserved = (0..q.size()).all(|u| {
            map[q.inv(u)] == rel.inv(map[u]) && (0..q.size()).all(|v| map[q.prod(u, v)] == rel.prod(map[u], map[v]))
        });
        out.report.check("quantale.relation_isomorphism", preserved, Some(format!("onto M_{n}(2)")));
    }
    if check {
        let q = q.with_alexandrov_topology()?;
        out.report.laws("axioms", &check_axioms(&q)?);
        out.report.laws("continuity", &check_continuity(&q)?);
        laws_or_precondition(&mut out.report, "classical", check_classical(&q))?;
        if let Ok(local) = check_local(&q) {
            out.report.fact("local", local.passed());
            if let Some(v) = local.failures().next() {
                out.report.fact("non_local_witness", json!({ "law": v.law, "witness": v.witness }));
            }
        }
    }
    Ok(out)
}

fn observer_cmd(spin: Spin, tol: Tolerance) -> Result<Outcome, Failure> {
    let fx = spin.fixtures(tol);
    let ctx = spin_observer(spin, tol)?;
    let mut out = Outcome::new(RunReport::new(format!("observer --spin {spin}"), tol.eps()));
    let mut table = serde_json::Map::new();
    for (name, s) in fx.iter() {
        let label = &ctx.labels()[ctx.retract_index(s)?];
        out.lines.push(format!("r_z({name}) = {label}"));
        table.insert(name.to_string(), Value::from(label.clone()));
    }
    out.report.fact("r_z", Value::Object(table));
    out.report.laws("observer", &check_observer_axioms(&ctx, &fx.subspaces())?);

    let o_x = atom_lattice(&fx, spin.x_atoms(), "x", tol)?;
    let af = approximation_map(&ctx, &o_x.elements)?;
    out.report.laws("approximation", &af.report);
    let witnesses: Vec<String> = af
        .product_witnesses
        .iter()
        .map(|w| {
            format!(
                "af({}·{}) = {} but af({})·af({}) = {}",
                o_x.labels[w.a],
                o_x.labels[w.b],
                ctx.labels()[w.image_of_product],
                o_x.labels[w.a],
                o_x.labels[w.b],
                ctx.labels()[w.product_of_images]
            )
        })
        .collect();
    out.lines.extend(witnesses.iter().cloned());
    out.report.fact("product_witnesses", witnesses);
    let labels: Vec<String> = ctx.labels().to_vec();
    out.dot = Some(hasse_dot(&labels, &hasse(ctx.carrier(), tol)?));
    Ok(out)
}

fn beta_cmd(spin: Spin, tol: Tolerance) -> Result<Outcome, Failure> {
    let b = spin_beta(spin, tol)?;
    let id = identity_beta(spin)?;
    let mut out = Outcome::new(RunReport::new(format!("beta --spin {spin}"), tol.eps()));
    let base = b.hyperspace.base();
    let mut assignment = serde_json::Map::new();
    for x in 0..b.assignment.len() {
        let value = b.describe(x);
        out.lines.push(format!("beta({}) = {value}", base.label(x)));
        assignment.insert(base.label(x).to_string(), Value::from(value));
    }
    out.report.fact("beta", Value::Object(assignment));
    out.report.fact("hyperspace_points", b.hyperspace.points().len());
    out.report.fact("hyperspace_opens", b.hyperspace.topology().opens().len());
    out.report.laws("beta", &b.report);
    out.report.laws("beta_identity", &id.report);
    out.report.check("beta.differs_from_identity", b.assignment != id.assignment, None);
    out.report.laws("hyperspace", &b.hyperspace.check_embedding());
    Ok(out)
}
