//! The end-to-end acceptance run behind `mslab report`.

use std::collections::BTreeSet;

use serde_json::json;

use super::{Outcome, RunReport};
use crate::error::{Error, Result};
use crate::finquant::{
    bounded_closure, bounded_closure_with, check_axioms, check_continuity, ClosureOps, SubspaceClosure,
};
use crate::loctop::{check_classical, check_local, check_sober, points_of_locale, sober_round_trip, specialization_order, FiniteSpace, SpaceDoc};
use crate::maxa::{distributivity_witness, hasse, FixtureSet};
use crate::observer::{
    approximation_map, atom_lattice, check_observer_axioms, identity_beta, spin_beta, spin_observer, BasisChange, Spin,
};
use crate::order::hasse_dot;
use crate::relquant::{groupoid_observer, groupoid_quantale, pair_groupoid};
use crate::sample::{random_partial_isometry, random_subspace, rng};
use crate::subspace::{Subspace, Tolerance};

/// Closure depth at which the four-operation closure is required to stop.
const CLOSURE_DEPTH: usize = 3;
/// Rounds allowed for the join/product/involution closure.
const QUANTALE_DEPTH: usize = 8;
const GROUPOID_SAMPLES: usize = 50;
const ISOMETRY_SAMPLES: usize = 100;
const SEED: u64 = 0x006d_736c_6162;

const FRAGMENT: [&str; 7] = ["0", "x_down", "x_up", "x", "z_down", "z_up", "z"];
const FRAGMENT_EDGES: [(&str, &str); 8] = [
    ("0", "x_down"),
    ("0", "x_up"),
    ("0", "z_down"),
    ("0", "z_up"),
    ("x_down", "x"),
    ("x_up", "x"),
    ("z_down", "z"),
    ("z_up", "z"),
];

pub(super) fn run(tol: Tolerance) -> Outcome {
    let mut out = Outcome::new(RunReport::new("report", tol.eps()));
    let half = Spin::Half.fixtures(tol);
    let one = Spin::One.fixtures(tol);

    let mut dot = None;
    section(&mut out.report, "c01", |r| {
        dot = Some(fragment(r, &half, tol)?);
        Ok(())
    });
    out.dot = dot;
    section(&mut out.report, "c02", |r| distributivity(r, &half, tol));
    section(&mut out.report, "c03", |r| spin_half_observer(r, &half, tol));
    section(&mut out.report, "c04", |r| spin_one_observer(r, &one, tol));
    section(&mut out.report, "c05", |r| beta_maps(r, tol));

    let half_closure = quantale_closure(&mut out.report, &half, tol);
    let one_partial = match bounded_closure_with(&one.subspaces(), 1, ClosureOps::QUANTALE, tol) {
        Ok(c) => c.elements,
        Err(f) => f.partial,
    };
    out.report.fact("spin_one_closure_sample", one_partial.len());

    section(&mut out.report, "c06", |r| axiom_suite(r, &half, half_closure.as_ref(), tol));
    section(&mut out.report, "c07", |r| observers(r, &half, &one, half_closure.as_ref(), &one_partial, tol));
    section(&mut out.report, "c08", z_space);
    section(&mut out.report, "c09", |r| stably_gelfand(r, half_closure.as_ref(), tol));
    out
}

/// Runs one criterion; an evaluation error becomes a failed check.
fn section(report: &mut RunReport, prefix: &str, body: impl FnOnce(&mut RunReport) -> Result<()>) {
    if let Err(e) = body(report) {
        report.check(format!("{prefix}.evaluation"), false, Some(e.to_string()));
    }
}

fn same(a: &Subspace, b: &Subspace, tol: Tolerance) -> Result<bool> {
    a.equal(b, tol)
}

fn fragment(r: &mut RunReport, fx: &FixtureSet, tol: Tolerance) -> Result<String> {
    let elements = FRAGMENT.iter().map(|n| fx.get(n).cloned()).collect::<Result<Vec<_>>>()?;
    let covers = hasse(&elements, tol)?;
    let got: BTreeSet<(&str, &str)> = covers.iter().map(|&(a, b)| (FRAGMENT[a], FRAGMENT[b])).collect();
    let want: BTreeSet<(&str, &str)> = FRAGMENT_EDGES.into_iter().collect();
    let detail = (got != want).then(|| format!("covers {got:?}"));
    r.check("c01.hasse_fragment", got == want, detail);
    r.check("c01.x_differs_from_z", !same(&fx["x"], &fx["z"], tol)?, None);
    let labels: Vec<String> = FRAGMENT.iter().map(|s| s.to_string()).collect();
    Ok(hasse_dot(&labels, &covers))
}

fn distributivity(r: &mut RunReport, fx: &FixtureSet, tol: Tolerance) -> Result<()> {
    let w = distributivity_witness(&fx["x"], &fx["z_down"], &fx["z_up"], tol)?;
    let ok = w.lhs.dim() == 0 && same(&w.rhs, &fx["e"], tol)? && !w.distributive;
    r.check("c02.witness", ok, Some(format!("lhs dim {}, rhs dim {}", w.lhs.dim(), w.rhs.dim())));
    let mut trivial = true;
    for atom in ["z_up", "z_down", "x_up", "x_down"] {
        trivial &= fx["e"].meet(&fx[atom], tol)?.is_zero();
    }
    r.check("c02.unit_meets_atoms_trivially", trivial, None);
    Ok(())
}

/// Checks `r_z(name) = expected` for each row, by carrier label.
fn r_table(r: &mut RunReport, check: &str, spin: Spin, fx: &FixtureSet, rows: &[(&str, &str)], tol: Tolerance) -> Result<()> {
    let ctx = spin_observer(spin, tol)?;
    let mut wrong = Vec::new();
    for &(name, expected) in rows {
        let got = &ctx.labels()[ctx.retract_index(&fx[name])?];
        if got != expected {
            wrong.push(format!("r_z({name}) = {got}"));
        }
    }
    r.check(check, wrong.is_empty(), (!wrong.is_empty()).then(|| wrong.join(", ")));
    Ok(())
}

fn spin_half_observer(r: &mut RunReport, fx: &FixtureSet, tol: Tolerance) -> Result<()> {
    let rows = [
        ("x_up", "z"),
        ("x_down", "z"),
        ("x", "z"),
        ("0", "0"),
        ("z_down", "z_down"),
        ("z_up", "z_up"),
        ("z", "z"),
    ];
    r_table(r, "c03.r_z_table", Spin::Half, fx, &rows, tol)?;
    let ctx = spin_observer(Spin::Half, tol)?;
    let o_x = atom_lattice(fx, Spin::Half.x_atoms(), "x", tol)?;
    let af = approximation_map(&ctx, &o_x.elements)?;
    // Masks: bit 0 is x_down, bit 1 is x_up.
    let expected = af.product_witnesses.iter().any(|w| {
        w.a == 2 && w.b == 1 && ctx.labels()[w.image_of_product] == "0" && ctx.labels()[w.product_of_images] == "z"
    });
    r.check("c03.product_witness", expected, Some(format!("{} witnesses", af.product_witnesses.len())));
    r.laws("c03.approximation", &af.report);
    Ok(())
}

fn spin_one_observer(r: &mut RunReport, fx: &FixtureSet, tol: Tolerance) -> Result<()> {
    let rows = [("x_zero", "z_minus∨z_plus"), ("x_minus", "z"), ("x_plus", "z"), ("x", "z")];
    r_table(r, "c04.r_z_table", Spin::One, fx, &rows, tol)?;
    let ctx = spin_observer(Spin::One, tol)?;
    let mut moved = Vec::new();
    for (i, m) in ctx.carrier().iter().enumerate() {
        if ctx.retract_index(m)? != i {
            moved.push(ctx.labels()[i].clone());
        }
    }
    r.check("c04.fixes_o_z", moved.is_empty(), Some(format!("{} elements", ctx.carrier().len())));
    Ok(())
}

fn beta_values(b: &BasisChange) -> Vec<String> {
    (0..b.assignment.len()).map(|x| b.describe(x)).collect()
}

fn beta_maps(r: &mut RunReport, tol: Tolerance) -> Result<()> {
    let cases: [(&str, BasisChange, Vec<&str>); 4] = [
        ("spin_half", spin_beta(Spin::Half, tol)?, vec!["{|down>,|up>}", "{|down>,|up>}"]),
        ("spin_one", spin_beta(Spin::One, tol)?, vec!["{|->,|0>,|+>}", "{|->,|+>}", "{|->,|0>,|+>}"]),
        ("identity_half", identity_beta(Spin::Half)?, vec!["{|down>}", "{|up>}"]),
        ("identity_one", identity_beta(Spin::One)?, vec!["{|->}", "{|0>}", "{|+>}"]),
    ];
    for (name, b, want) in &cases {
        let got = beta_values(b);
        let detail = (&got != want).then(|| got.join(" "));
        r.check(format!("c05.{name}.values"), got == *want, detail);
        r.laws(&format!("c05.{name}"), &b.report);
    }
    r.check("c05.differs_from_identity", cases[0].1.assignment != cases[2].1.assignment, None);
    Ok(())
}

fn quantale_closure(r: &mut RunReport, fx: &FixtureSet, tol: Tolerance) -> Option<SubspaceClosure> {
    match bounded_closure_with(&fx.subspaces(), QUANTALE_DEPTH, ClosureOps::QUANTALE, tol) {
        Ok(c) => {
            r.fact("spin_half_quantale_closure", json!({ "size": c.elements.len(), "growth": c.growth }));
            Some(c)
        }
        Err(f) => {
            r.check("c06.quantale_closure_terminates", false, Some(f.to_string()));
            None
        }
    }
}

fn missing_closure() -> Error {
    Error::Precondition("the spin-1/2 quantale closure did not terminate".into())
}

fn axiom_suite(r: &mut RunReport, fx: &FixtureSet, closure: Option<&SubspaceClosure>, tol: Tolerance) -> Result<()> {
    match bounded_closure(&fx.subspaces(), CLOSURE_DEPTH, tol) {
        Ok(c) => {
            r.check("c06.closure_terminates", true, Some(format!("{} elements", c.elements.len())));
            r.laws("c06.closure", &check_axioms(&c.quantale)?);
        }
        Err(f) => r.check("c06.closure_terminates", false, Some(f.to_string())),
    }
    let closure = closure.ok_or_else(missing_closure)?;
    r.laws("c06.quantale_closure", &check_axioms(&closure.quantale)?);

    let q = groupoid_quantale(&pair_groupoid(2)?)?.with_alexandrov_topology()?;
    r.fact("pair_groupoid_quantale_size", q.size());
    r.laws("c06.pair_groupoid", &check_axioms(&q)?);
    r.laws("c06.pair_groupoid.continuity", &check_continuity(&q)?);
    r.laws("c06.pair_groupoid.classical", &check_classical(&q)?);
    let local = check_local(&q)?;
    let witness = local.failures().next().map(|v| format!("{} fails at {:?}", v.law, v.witness.as_deref().unwrap_or(&[])));
    r.check("c06.pair_groupoid.non_local", witness.is_some(), witness);
    Ok(())
}

fn observers(
    r: &mut RunReport,
    half: &FixtureSet,
    one: &FixtureSet,
    half_closure: Option<&SubspaceClosure>,
    one_sample: &[Subspace],
    tol: Tolerance,
) -> Result<()> {
    let g = groupoid_observer(2, tol)?;
    let mut rand = rng(SEED);
    let samples: Vec<Subspace> = (0..GROUPOID_SAMPLES).map(|_| random_subspace(&mut rand, 2, tol)).collect();
    r.laws("c07.groupoid", &check_observer_axioms(&g, &samples)?);

    let half_closure = half_closure.ok_or_else(missing_closure)?;
    let mut half_samples = half.subspaces();
    half_samples.extend(half_closure.elements.iter().cloned());
    r.laws("c07.diag_half", &check_observer_axioms(&spin_observer(Spin::Half, tol)?, &half_samples)?);

    let mut one_samples = one.subspaces();
    one_samples.extend(one_sample.iter().cloned());
    r.laws("c07.diag_one", &check_observer_axioms(&spin_observer(Spin::One, tol)?, &one_samples)?);
    Ok(())
}

fn z_space(r: &mut RunReport) -> Result<()> {
    let x = FiniteSpace::from_doc(SpaceDoc {
        points: vec!["z_down".into(), "z_up".into(), "z".into()],
        opens: vec![vec![], vec![2], vec![0, 2], vec![1, 2], vec![0, 1, 2]],
    })?;
    r.laws("c08.z_space", &check_sober(&x));
    let l = x.open_lattice();
    let points = points_of_locale(&l);
    let generators: Vec<&str> = points.iter().map(|p| l.labels()[p.generator].as_str()).collect();
    r.check("c08.three_points", points.len() == 3, Some(generators.join(" ")));
    let bijection = sober_round_trip(&x)?.is_some_and(|mut m| {
        m.sort_unstable();
        m == [0, 1, 2]
    });
    r.check("c08.points_biject", bijection, None);
    let spec = specialization_order(&x);
    let below: Vec<(usize, usize)> =
        (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).filter(|&(a, b)| a != b && spec.leq[a][b]).collect();
    r.check("c08.specialization", below == [(0, 2), (1, 2)], Some(format!("{below:?}")));
    Ok(())
}

fn stably_gelfand(r: &mut RunReport, closure: Option<&SubspaceClosure>, tol: Tolerance) -> Result<()> {
    let closure = closure.ok_or_else(missing_closure)?;
    let mut premise = 0;
    let mut bad = None;
    for (i, p) in closure.elements.iter().enumerate() {
        let ppp = p.product(&p.involution(tol), tol)?.product(p, tol)?;
        if p.contains(&ppp, tol)? {
            premise += 1;
            if !ppp.equal(p, tol)? && bad.is_none() {
                bad = Some(i);
            }
        }
    }
    r.check("c09.closure", bad.is_none(), Some(format!("{premise} elements satisfy the premise")));

    let mut rand = rng(SEED ^ 1);
    for n in [2, 3] {
        let mut failures = 0;
        for _ in 0..ISOMETRY_SAMPLES {
            let p = Subspace::span(&[random_partial_isometry(&mut rand, n)], tol)?;
            let ppp = p.product(&p.involution(tol), tol)?.product(&p, tol)?;
            failures += usize::from(!ppp.equal(&p, tol)?);
        }
        r.check(format!("c09.partial_isometries_m{n}"), failures == 0, Some(format!("{failures} of {ISOMETRY_SAMPLES} fail")));
    }
    Ok(())
}
