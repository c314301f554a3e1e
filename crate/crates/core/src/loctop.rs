//! Finite spaces and finite lattices viewed as locales.
//!
//! At finite scale every directed set has a greatest element, so the Scott
//! topology of a lattice is its upper-set topology, and the continuity and
//! countability conditions on a locale hold vacuously. Those conditions are
//! reported as notes rather than tested.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finquant::{check_axioms, FiniteQuantale, Flag};
use crate::law::{first_failing, first_failing_pair, first_failing_triple, LawReport};
use crate::order::{hasse_dot, inclusion_order, LatticeOps, Poset};
use crate::topology::{bitset, Topology};

/// Note attached wherever the Scott topology is replaced by upper sets.
pub const SCOTT_DEGENERATION: &str =
    "finite lattice: directed sets have a maximum, so Scott opens are the upper sets";

/// Note attached to the local compactness condition.
pub const COMPACTNESS_DEGENERATION: &str =
    "finite distributive lattice: continuity and countable basis hold vacuously";

/// A labelled finite topological space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    topology: Topology,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub points: Vec<String>,
    pub opens: Vec<Vec<usize>>,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>, topology: Topology) -> Result<Self> {
        if labels.len() != topology.points() {
            return Err(Error::BadShape { expected: topology.points(), got: labels.len() });
        }
        Ok(Self { labels, topology })
    }

    /// Points labelled by their indices.
    pub fn unlabelled(topology: Topology) -> Self {
        let labels = (0..topology.points()).map(|i| i.to_string()).collect();
        Self { labels, topology }
    }

    pub fn from_doc(doc: SpaceDoc) -> Result<Self> {
        let topology = Topology::from_index_lists(doc.points.len(), &doc.opens)?;
        Self::new(doc.points, topology)
    }

    pub fn to_doc(&self) -> SpaceDoc {
        SpaceDoc { points: self.labels.clone(), opens: self.topology.index_lists() }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn point(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Renders a set of points as `{a,b}`.
    pub fn describe(&self, set: &FixedBitSet) -> String {
        let names: Vec<&str> = set.ones().map(|x| self.label(x)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// The frame of opens ordered by inclusion, in the topology's open order.
    pub fn open_lattice(&self) -> FiniteLattice {
        let k = self.size();
        let masks: Vec<Vec<bool>> =
            self.topology.opens().iter().map(|o| (0..k).map(|x| o.contains(x)).collect()).collect();
        let labels = self.topology.opens().iter().map(|o| self.describe(o)).collect();
        FiniteLattice::with_labels(inclusion_order(&masks), labels).expect("opens form a lattice")
    }
}

/// A finite lattice with its join and meet tables.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLattice {
    poset: Poset,
    ops: LatticeOps,
    labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub leq: Vec<Vec<Flag>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl FiniteLattice {
    pub fn new(leq: Vec<Vec<bool>>) -> Result<Self> {
        let labels = (0..leq.len()).map(|i| i.to_string()).collect();
        Self::with_labels(leq, labels)
    }

    pub fn with_labels(leq: Vec<Vec<bool>>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != leq.len() {
            return Err(Error::BadShape { expected: leq.len(), got: labels.len() });
        }
        if leq.is_empty() {
            return Err(Error::NotLattice("empty carrier".into()));
        }
        let poset = Poset::new(leq)?;
        let ops = LatticeOps::from_poset(&poset)?;
        Ok(Self { poset, ops, labels })
    }

    pub fn from_doc(doc: LatticeDoc) -> Result<Self> {
        let leq: Vec<Vec<bool>> = doc.leq.into_iter().map(|r| r.into_iter().map(Flag::truth).collect()).collect();
        match doc.labels {
            Some(labels) => Self::with_labels(leq, labels),
            None => Self::new(leq),
        }
    }

    pub fn to_doc(&self) -> LatticeDoc {
        let leq = self.poset.table().iter().map(|r| r.iter().map(|&b| Flag::Bool(b)).collect()).collect();
        LatticeDoc { leq, labels: Some(self.labels.clone()) }
    }

    pub fn size(&self) -> usize {
        self.poset.size()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.poset.leq(a, b)
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.ops.join[a][b]
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.ops.meet[a][b]
    }

    pub fn bottom(&self) -> usize {
        self.ops.bottom
    }

    pub fn top(&self) -> usize {
        self.ops.top
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn covers(&self) -> Vec<(usize, usize)> {
        self.poset.covers()
    }

    pub fn to_dot(&self) -> String {
        hasse_dot(&self.labels, &self.covers())
    }

    /// Whether `x` is join-prime: not the bottom, and below a join only if
    /// below one of its arguments.
    pub fn is_join_prime(&self, x: usize) -> bool {
        let k = self.size();
        x != self.bottom()
            && (0..k).all(|a| {
                (0..k).all(|b| !self.leq(x, self.join(a, b)) || self.leq(x, a) || self.leq(x, b))
            })
    }
}

/// The specialization preorder together with its lattice candidacy.
#[derive(Debug, Clone)]
pub struct SpecializationOrder {
    /// `leq[m][n]` iff `m` lies in the closure of `{n}`.
    pub leq: Vec<Vec<bool>>,
    pub report: LawReport,
}

pub fn specialization_order(x: &FiniteSpace) -> SpecializationOrder {
    let leq = x.topology().specialization();
    let k = x.size();
    let mut report = LawReport::new();
    let antisymmetry = first_failing_pair(k, |a, b| a == b || !(leq[a][b] && leq[b][a]));
    report.record("partial_order", antisymmetry.clone());
    if antisymmetry.is_none() {
        let poset = Poset::new(leq.clone()).expect("specialization of a T0 space is a partial order");
        report.record("bottom", if poset.bottom().is_some() || k == 0 { None } else { Some(vec![]) });
        report.record("binary_joins", poset.missing_join().map(|(a, b)| vec![a, b]));
    }
    SpecializationOrder { leq, report }
}

/// A nonempty closed set that is not a union of two proper closed subsets,
/// with the points whose closure it is.
#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibleClosed {
    pub set: FixedBitSet,
    pub generic_points: Vec<usize>,
}

pub fn irreducible_closed_sets(x: &FiniteSpace) -> Vec<IrreducibleClosed> {
    let t = x.topology();
    let closed = t.closed_sets();
    let mut out = Vec::new();
    for c in &closed {
        if c.is_clear() {
            continue;
        }
        let proper: Vec<&FixedBitSet> = closed.iter().filter(|d| d.is_subset(c) && *d != c).collect();
        let splits = proper.iter().any(|a| {
            proper.iter().any(|b| {
                let mut u = (*a).clone();
                u.union_with(b);
                &u == c
            })
        });
        if splits {
            continue;
        }
        let generic_points =
            (0..x.size()).filter(|&p| &t.closure(&bitset(x.size(), [p])) == c).collect();
        out.push(IrreducibleClosed { set: c.clone(), generic_points });
    }
    out.sort_by(|a, b| a.set.ones().cmp(b.set.ones()));
    out
}

/// `t0` and `sober`. A sobriety witness is the list of points of an
/// irreducible closed set without a unique generic point.
pub fn check_sober(x: &FiniteSpace) -> LawReport {
    let mut report = LawReport::new();
    let nb = x.topology().neighbourhoods();
    let k = x.size();
    report.record("t0", first_failing_pair(k, |a, b| a == b || nb[a] != nb[b]));
    let bad = irreducible_closed_sets(x).into_iter().find(|c| c.generic_points.len() != 1);
    report.record("sober", bad.map(|c| c.set.ones().collect()));
    report
}

/// A lattice homomorphism to the two-element lattice, stored as its truth
/// table. In a finite lattice it is `a ↦ (generator ≤ a)` for a join-prime
/// generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalePoint {
    pub generator: usize,
    pub values: Vec<bool>,
}

/// Whether `p` preserves top, binary meets, bottom and binary joins.
pub fn is_locale_point(l: &FiniteLattice, p: &[bool]) -> bool {
    let k = l.size();
    p.len() == k
        && p[l.top()]
        && !p[l.bottom()]
        && (0..k).all(|a| (0..k).all(|b| p[l.meet(a, b)] == (p[a] && p[b]) && p[l.join(a, b)] == (p[a] || p[b])))
}

/// All points, ordered by generator index.
pub fn points_of_locale(l: &FiniteLattice) -> Vec<LocalePoint> {
    let k = l.size();
    (0..k)
        .filter_map(|x| {
            let values: Vec<bool> = (0..k).map(|a| l.leq(x, a)).collect();
            is_locale_point(l, &values).then_some(LocalePoint { generator: x, values })
        })
        .collect()
}

/// `distributive` with witness `[p, m, n]` where `p∧(m∨n) ≠ (p∧m)∨(p∧n)`.
pub fn check_distributive(l: &FiniteLattice) -> LawReport {
    let mut report = LawReport::new();
    report.record("distributive", distributivity_failure(l));
    report
}

fn distributivity_failure(l: &FiniteLattice) -> Option<Vec<usize>> {
    first_failing_triple(l.size(), |p, m, n| l.meet(p, l.join(m, n)) == l.join(l.meet(p, m), l.meet(p, n)))
}

/// The Scott topology of a finite lattice, which is its upper-set topology.
/// See [`SCOTT_DEGENERATION`].
pub fn alexandrov_scott(l: &FiniteLattice) -> FiniteSpace {
    let t = Topology::upper_sets(l.poset()).expect("upper sets of a lattice within the open cap");
    FiniteSpace::new(l.labels.clone(), t).expect("one label per element")
}

/// The space of points of a lattice, with opens `{p : p(a)}`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub space: FiniteSpace,
    pub points: Vec<LocalePoint>,
    /// `opens[a]` is the open set assigned to lattice element `a`.
    pub opens: Vec<FixedBitSet>,
    /// Whether `a ↦ opens[a]` is an order isomorphism onto the topology.
    pub isomorphic: bool,
}

pub fn spectrum(l: &FiniteLattice, require_distributive: bool) -> Result<Spectrum> {
    if require_distributive {
        if let Some(w) = distributivity_failure(l) {
            return Err(Error::NotDistributive(w[0], w[1], w[2]));
        }
    }
    let points = points_of_locale(l);
    let np = points.len();
    let opens: Vec<FixedBitSet> =
        (0..l.size()).map(|a| bitset(np, (0..np).filter(|&i| points[i].values[a]))).collect();
    let topology = Topology::new(np, opens.clone())?;
    let labels = points.iter().map(|p| l.labels[p.generator].clone()).collect();
    let k = l.size();
    let isomorphic = topology.opens().len() == k
        && (0..k).all(|a| (0..k).all(|b| l.leq(a, b) == opens[a].is_subset(&opens[b])));
    Ok(Spectrum { space: FiniteSpace::new(labels, topology)?, points, opens, isomorphic })
}

/// For a sober space, the bijection `X → spectrum(O(X))` sending `x` to the
/// point generated by its least open neighbourhood. Returns `None` when that
/// assignment is not a homeomorphism.
pub fn sober_round_trip(x: &FiniteSpace) -> Result<Option<Vec<usize>>> {
    let lattice = x.open_lattice();
    let spec = spectrum(&lattice, false)?;
    let t = x.topology();
    let mut map = Vec::with_capacity(x.size());
    for p in 0..x.size() {
        let nb = t.neighbourhood(p);
        let open = t.open_index(&nb).expect("least neighbourhoods are open");
        match spec.points.iter().position(|q| q.generator == open) {
            Some(i) => map.push(i),
            None => return Ok(None),
        }
    }
    let mut seen = vec![false; spec.points.len()];
    for &i in &map {
        if std::mem::replace(&mut seen[i], true) {
            return Ok(None);
        }
    }
    if seen.iter().any(|s| !s) {
        return Ok(None);
    }
    // opens correspond: x ∈ U iff the image point lies in the spectrum open of U
    let matches = t
        .opens()
        .iter()
        .enumerate()
        .all(|(u, o)| (0..x.size()).all(|p| o.contains(p) == spec.opens[u].contains(map[p])));
    Ok(matches.then_some(map))
}

fn require_axioms(q: &FiniteQuantale) -> Result<()> {
    let r = check_axioms(q)?;
    match r.failures().next() {
        None => Ok(()),
        Some(v) => Err(Error::Precondition(format!("quantale fails {}", v.law))),
    }?;
    Ok(())
}

/// Finite reading of the classical measurement space conditions:
/// `distributive_lattice`, `locally_compact` (vacuous, noted),
/// `scott_topology` and `m_leq_m_mstar_m`.
pub fn check_classical(q: &FiniteQuantale) -> Result<LawReport> {
    require_axioms(q)?;
    let k = q.size();
    let lattice = FiniteLattice::new(q.leq_table().to_vec())?;
    let mut report = LawReport::new();
    let distributive = distributivity_failure(&lattice);
    let is_distributive = distributive.is_none();
    report.record("distributive_lattice", distributive);
    if is_distributive {
        report.pass_with_note("locally_compact", COMPACTNESS_DEGENERATION);
    }
    match q.topology() {
        Some(t) => {
            // every finite topology is determined by least neighbourhoods
            let poset = lattice.poset();
            let witness = first_failing(k, |x| {
                let nb = t.neighbourhood(x);
                (0..k).all(|y| nb.contains(y) == poset.leq(x, y))
            });
            report.record("scott_topology", witness);
            if let Some(v) = report.verdicts.last_mut().filter(|v| v.passed) {
                v.note = Some(SCOTT_DEGENERATION.into());
            }
        }
        None => {
            report.pass_with_note("scott_topology", "no topology attached; the Scott topology is implied");
        }
    }
    report.record(
        "m_leq_m_mstar_m",
        first_failing(k, |m| q.leq(m, q.prod(q.prod(m, q.inv(m)), m))),
    );
    Ok(report)
}

/// `product_is_meet` and `involution_is_identity`.
pub fn check_local(q: &FiniteQuantale) -> Result<LawReport> {
    require_axioms(q)?;
    let ops = q.lattice()?;
    let k = q.size();
    let mut report = LawReport::new();
    report.record("product_is_meet", first_failing_pair(k, |a, b| q.prod(a, b) == ops.meet[a][b]));
    report.record("involution_is_identity", first_failing(k, |a| q.inv(a) == a));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Points z_down, z_up, z; opens ∅, {z}, {z_down,z}, {z_up,z}, all.
    fn z_space() -> FiniteSpace {
        FiniteSpace::from_doc(SpaceDoc {
            points: vec!["z_down".into(), "z_up".into(), "z".into()],
            opens: vec![vec![], vec![2], vec![0, 2], vec![1, 2], vec![0, 1, 2]],
        })
        .unwrap()
    }

    fn sierpinski() -> FiniteSpace {
        FiniteSpace::from_doc(SpaceDoc { points: vec!["a".into(), "b".into()], opens: vec![vec![], vec![1], vec![0, 1]] })
            .unwrap()
    }

    fn indiscrete2() -> FiniteSpace {
        FiniteSpace::new(vec!["a".into(), "b".into()], Topology::indiscrete(2)).unwrap()
    }

    fn chain(k: usize) -> FiniteLattice {
        FiniteLattice::new((0..k).map(|a| (0..k).map(|b| a <= b).collect()).collect()).unwrap()
    }

    fn powerset(bits: usize) -> FiniteLattice {
        let k = 1 << bits;
        FiniteLattice::new((0..k).map(|a| (0..k).map(|b| a & b == a).collect()).collect()).unwrap()
    }

    /// Bottom 0, top `atoms + 1`, pairwise incomparable atoms in between.
    fn diamond(atoms: usize) -> FiniteLattice {
        let k = atoms + 2;
        let top = k - 1;
        let leq = (0..k).map(|a| (0..k).map(|b| a == b || a == 0 || b == top).collect()).collect();
        FiniteLattice::new(leq).unwrap()
    }

    /// Every map to {0,1} checked against the homomorphism laws directly.
    fn brute_force_points(l: &FiniteLattice) -> Vec<Vec<bool>> {
        let k = l.size();
        (0u32..1 << k)
            .map(|mask| (0..k).map(|i| mask >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|p| is_locale_point(l, p))
            .collect()
    }

    #[test]
    fn z_space_specialization() {
        let x = z_space();
        let s = specialization_order(&x);
        assert!(s.report.holds("partial_order") && s.report.holds("binary_joins"));
        // the two atoms have no common lower bound among the points
        assert!(!s.report.holds("bottom"));
        assert!(s.leq[0][2] && s.leq[1][2]);
        assert!(!s.leq[0][1] && !s.leq[1][0]);
        assert!(!s.leq[2][0] && !s.leq[2][1]);
    }

    #[test]
    fn specialization_examples() {
        let s = specialization_order(&sierpinski());
        assert!(s.leq[0][1] && !s.leq[1][0]);
        let discrete = FiniteSpace::unlabelled(Topology::discrete(2).unwrap());
        let s = specialization_order(&discrete);
        assert_eq!(s.leq, vec![vec![true, false], vec![false, true]]);
        assert!(!s.report.holds("bottom"));
        let s = specialization_order(&indiscrete2());
        assert!(!s.report.holds("partial_order"));
    }

    #[test]
    fn sobriety() {
        let x = z_space();
        assert!(check_sober(&x).passed());
        let irr = irreducible_closed_sets(&x);
        let generic: Vec<Vec<usize>> = irr.iter().map(|c| c.generic_points.clone()).collect();
        assert_eq!(generic, vec![vec![0], vec![2], vec![1]]);
        assert!(check_sober(&sierpinski()).passed());
        let r = check_sober(&indiscrete2());
        assert!(!r.holds("t0"));
        assert_eq!(r.verdict("sober").unwrap().witness, Some(vec![0, 1]));
    }

    #[test]
    fn points_match_brute_force() {
        for l in [chain(1), chain(2), chain(4), diamond(2), diamond(3), powerset(3), z_space().open_lattice()] {
            let fast: Vec<Vec<bool>> = points_of_locale(&l).into_iter().map(|p| p.values).collect();
            let mut slow = brute_force_points(&l);
            let mut sorted = fast.clone();
            sorted.sort();
            slow.sort();
            assert_eq!(sorted, slow);
        }
        assert_eq!(points_of_locale(&chain(2)).len(), 1);
        assert_eq!(points_of_locale(&diamond(2)).len(), 2);
    }

    #[test]
    fn z_space_points() {
        let x = z_space();
        let l = x.open_lattice();
        assert_eq!(l.size(), 5);
        let pts = points_of_locale(&l);
        let generators: Vec<&str> = pts.iter().map(|p| l.labels()[p.generator].as_str()).collect();
        assert_eq!(generators, vec!["{z}", "{z_down,z}", "{z_up,z}"]);
        let map = sober_round_trip(&x).unwrap().unwrap();
        let mut sorted = map.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn non_sober_round_trip_fails() {
        assert!(sober_round_trip(&indiscrete2()).unwrap().is_none());
    }

    #[test]
    fn distributivity() {
        assert!(check_distributive(&powerset(3)).passed());
        let r = check_distributive(&diamond(3));
        let w = r.verdict("distributive").unwrap().witness.clone().unwrap();
        let m3 = diamond(3);
        let (p, m, n) = (w[0], w[1], w[2]);
        assert_ne!(m3.meet(p, m3.join(m, n)), m3.join(m3.meet(p, m), m3.meet(p, n)));
        assert!(check_distributive(&diamond(2)).passed());
    }

    #[test]
    fn scott_topologies() {
        let s = alexandrov_scott(&chain(2));
        assert_eq!(s.topology(), sierpinski().topology());
        let d = alexandrov_scott(&diamond(2));
        // upper sets of a square: ∅, {1}, {a,1}, {b,1}, {a,b,1}, all
        assert_eq!(d.topology().opens().len(), 6);
        let one = alexandrov_scott(&chain(1));
        assert_eq!(one.topology().opens().len(), 2);
        for l in [chain(3), diamond(3), powerset(2)] {
            assert_eq!(specialization_order(&alexandrov_scott(&l)).leq, l.poset().table());
        }
    }

    #[test]
    fn spectra() {
        let s = spectrum(&powerset(3), true).unwrap();
        assert!(s.isomorphic);
        assert_eq!(s.space.topology(), &Topology::discrete(3).unwrap());
        let s = spectrum(&chain(2), true).unwrap();
        assert_eq!(s.space.size(), 1);
        assert!(matches!(spectrum(&diamond(3), true), Err(Error::NotDistributive(..))));
        assert!(!spectrum(&diamond(3), false).unwrap().isomorphic);
        let x = z_space();
        let s = spectrum(&x.open_lattice(), true).unwrap();
        assert!(s.isomorphic);
        assert_eq!(s.space.topology().opens().len(), 5);
    }

    #[test]
    fn frames_are_classical_and_local() {
        for l in [chain(3), powerset(2), diamond(2)] {
            let q = FiniteQuantale::local_from_order(l.poset().table().to_vec(), None)
                .unwrap()
                .with_alexandrov_topology()
                .unwrap();
            assert!(check_classical(&q).unwrap().passed());
            assert!(check_local(&q).unwrap().passed());
        }
        let trivial = FiniteQuantale::new(vec![vec![true]], vec![vec![0]], vec![0], None).unwrap();
        assert!(check_local(&trivial).unwrap().passed());
    }

    #[test]
    fn classical_detects_wrong_topology() {
        let q = FiniteQuantale::local_from_order(chain(2).poset().table().to_vec(), Some(Topology::discrete(2).unwrap()))
            .unwrap();
        let r = check_classical(&q).unwrap();
        assert!(!r.holds("scott_topology"));
    }

    #[test]
    fn json_round_trips() {
        let x = z_space();
        let s = serde_json::to_string(&x.to_doc()).unwrap();
        assert_eq!(FiniteSpace::from_doc(serde_json::from_str(&s).unwrap()).unwrap(), x);
        let l = diamond(3);
        let s = serde_json::to_string(&l.to_doc()).unwrap();
        assert_eq!(FiniteLattice::from_doc(serde_json::from_str(&s).unwrap()).unwrap(), l);
        let bad = SpaceDoc { points: vec!["a".into()], opens: vec![vec![0]] };
        assert!(FiniteSpace::from_doc(bad).is_err());
    }

    #[test]
    fn dot_has_every_cover() {
        let dot = diamond(2).to_dot();
        assert_eq!(dot.matches(" -> ").count(), 4);
    }
}
