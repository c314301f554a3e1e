//! Finite involutive quantales as explicit tables, and exhaustive checkers
//! for the measurement-space axioms, continuity and homomorphisms.
//!
//! Joins over arbitrary subsets of a finite lattice reduce to the bottom
//! element plus binary joins, so "preserves all joins" is the conjunction of
//! binary distributivity and absorption. For small carriers the arbitrary
//! form is also checked directly over every subset.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{first_failing, first_failing_pair, first_failing_triple, LawReport};
use crate::order::{LatticeOps, Poset};
use crate::subspace::{Subspace, Tolerance};
use crate::topology::Topology;

/// Carriers up to this size have their axioms checked over every triple.
pub const EXHAUSTIVE_LIMIT: usize = 256;
/// Triples sampled per law above [`EXHAUSTIVE_LIMIT`].
pub const SAMPLED_TRIPLES: usize = 200_000;
/// Carriers up to this size also get the arbitrary-join law checked over
/// every subset.
pub const SUBSET_JOIN_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteQuantale {
    leq: Vec<Vec<bool>>,
    prod: Vec<Vec<usize>>,
    inv: Vec<usize>,
    topology: Option<Topology>,
}

impl FiniteQuantale {
    /// Checks table shapes and index ranges. Order axioms are checked by
    /// [`check_complete_lattice`].
    pub fn new(
        leq: Vec<Vec<bool>>,
        prod: Vec<Vec<usize>>,
        inv: Vec<usize>,
        topology: Option<Topology>,
    ) -> Result<Self> {
        let k = leq.len();
        if k == 0 {
            return Err(Error::InvalidTable("empty carrier".into()));
        }
        if leq.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidTable("leq is not square".into()));
        }
        if prod.len() != k || prod.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidTable(format!("prod must be {k}x{k}")));
        }
        if prod.iter().flatten().any(|&x| x >= k) {
            return Err(Error::InvalidTable("prod entry out of range".into()));
        }
        if inv.len() != k || inv.iter().any(|&x| x >= k) {
            return Err(Error::InvalidTable(format!("inv must list {k} indices in range")));
        }
        if let Some(t) = &topology {
            if t.points() != k {
                return Err(Error::InvalidTopology(format!("topology on {} points, carrier has {k}", t.points())));
            }
        }
        Ok(Self { leq, prod, inv, topology })
    }

    pub fn size(&self) -> usize {
        self.leq.len()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn prod(&self, a: usize, b: usize) -> usize {
        self.prod[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn leq_table(&self) -> &[Vec<bool>] {
        &self.leq
    }

    pub fn prod_table(&self) -> &[Vec<usize>] {
        &self.prod
    }

    pub fn inv_table(&self) -> &[usize] {
        &self.inv
    }

    pub fn topology(&self) -> Option<&Topology> {
        self.topology.as_ref()
    }

    pub fn with_topology(mut self, topology: Topology) -> Result<Self> {
        if topology.points() != self.size() {
            return Err(Error::InvalidTopology("topology size does not match carrier".into()));
        }
        self.topology = Some(topology);
        Ok(self)
    }

    /// Attaches the Alexandrov (upper-set) topology of the order.
    pub fn with_alexandrov_topology(self) -> Result<Self> {
        let t = Topology::upper_sets(&self.poset()?)?;
        self.with_topology(t)
    }

    pub fn poset(&self) -> Result<Poset> {
        Poset::new(self.leq.clone())
    }

    pub fn lattice(&self) -> Result<LatticeOps> {
        LatticeOps::from_poset(&self.poset()?)
    }

    /// The quantale on a finite lattice with product = meet and identity
    /// involution.
    pub fn local_from_order(leq: Vec<Vec<bool>>, topology: Option<Topology>) -> Result<Self> {
        let ops = LatticeOps::from_poset(&Poset::new(leq.clone())?)?;
        let k = leq.len();
        Self::new(leq, ops.meet, (0..k).collect(), topology)
    }

    pub fn to_doc(&self) -> QuantaleDoc {
        QuantaleDoc {
            size: self.size(),
            leq: self.leq.iter().map(|r| r.iter().map(|&b| Flag::Bool(b)).collect()).collect(),
            prod: self.prod.clone(),
            inv: self.inv.clone(),
            opens: self.topology.as_ref().map(|t| t.index_lists()),
        }
    }

    pub fn from_doc(doc: QuantaleDoc) -> Result<Self> {
        if doc.leq.len() != doc.size {
            return Err(Error::InvalidTable(format!("size is {} but leq has {} rows", doc.size, doc.leq.len())));
        }
        let leq = doc.leq.into_iter().map(|r| r.into_iter().map(Flag::truth).collect()).collect();
        let topology = doc.opens.map(|o| Topology::from_index_lists(doc.size, &o)).transpose()?;
        Self::new(leq, doc.prod, doc.inv, topology)
    }
}

/// `true`/`false` or `1`/`0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Flag {
    Bool(bool),
    Int(u8),
}

impl Flag {
    pub fn truth(self) -> bool {
        match self {
            Flag::Bool(b) => b,
            Flag::Int(i) => i != 0,
        }
    }
}

/// JSON form of a finite quantale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantaleDoc {
    pub size: usize,
    pub leq: Vec<Vec<Flag>>,
    pub prod: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opens: Option<Vec<Vec<usize>>>,
}

/// Checks that `leq` is a complete lattice. A non-poset is an error.
pub fn check_complete_lattice(q: &FiniteQuantale) -> Result<LawReport> {
    let p = q.poset()?;
    let mut r = LawReport::new();
    r.record("bottom", p.bottom().is_none().then(Vec::new));
    r.record("binary_joins", p.missing_join().map(|(a, b)| vec![a, b]));
    Ok(r)
}

/// How the axiom checker covers the carrier.
#[derive(Debug, Clone, Copy)]
pub struct AxiomCheckConfig {
    pub exhaustive_limit: usize,
    pub sampled_triples: usize,
    pub seed: u64,
}

impl Default for AxiomCheckConfig {
    fn default() -> Self {
        Self { exhaustive_limit: EXHAUSTIVE_LIMIT, sampled_triples: SAMPLED_TRIPLES, seed: 0x006d_736c_6162 }
    }
}

enum Coverage {
    Exhaustive,
    Sampled(Vec<[usize; 3]>),
}

impl Coverage {
    fn triple(&self, k: usize, holds: impl FnMut(usize, usize, usize) -> bool) -> Option<Vec<usize>> {
        match self {
            Coverage::Exhaustive => first_failing_triple(k, holds),
            Coverage::Sampled(samples) => {
                let mut holds = holds;
                samples.iter().find(|t| !holds(t[0], t[1], t[2])).map(|t| t.to_vec())
            }
        }
    }
}

pub fn check_axioms(q: &FiniteQuantale) -> Result<LawReport> {
    check_axioms_with(q, AxiomCheckConfig::default())
}

/// Checks associativity, distributivity on both sides, absorption on both
/// sides, both involution laws, monotonicity of the involution,
/// reversibility and preservation of arbitrary joins.
pub fn check_axioms_with(q: &FiniteQuantale, cfg: AxiomCheckConfig) -> Result<LawReport> {
    let lattice_report = check_complete_lattice(q)?;
    if !lattice_report.passed() {
        return Err(Error::Precondition(format!("not a complete lattice:\n{lattice_report}")));
    }
    let ops = q.lattice()?;
    let k = q.size();
    let (p, i, j) = (&q.prod, &q.inv, &ops.join);
    let zero = ops.bottom;

    let coverage = if k <= cfg.exhaustive_limit {
        Coverage::Exhaustive
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Coverage::Sampled(
            (0..cfg.sampled_triples)
                .map(|_| [rng.random_range(0..k), rng.random_range(0..k), rng.random_range(0..k)])
                .collect(),
        )
    };

    let mut r = LawReport::new();
    r.record("associativity", coverage.triple(k, |n, m, x| p[p[n][m]][x] == p[n][p[m][x]]));
    r.record("distributivity_right", coverage.triple(k, |n, m, x| p[j[n][m]][x] == j[p[n][x]][p[m][x]]));
    r.record("distributivity_left", coverage.triple(k, |n, m, x| p[x][j[n][m]] == j[p[x][n]][p[x][m]]));
    r.record("absorption", first_failing(k, |x| p[zero][x] == zero));
    r.record("absorption_right", first_failing(k, |x| p[x][zero] == zero));
    r.record("involution_involutive", first_failing(k, |m| i[i[m]] == m));
    r.record("involution_antimultiplicative", first_failing_pair(k, |n, m| i[p[n][m]] == p[i[m]][i[n]]));
    r.record("involution_monotone", first_failing_pair(k, |a, b| !q.leq[a][b] || q.leq[i[a]][i[b]]));
    r.record(
        "reversibility",
        first_failing(k, |m| {
            let mmm = p[p[m][i[m]]][m];
            !q.leq[mmm][m] || mmm == m
        }),
    );

    let binary_ok = r.holds("distributivity_right")
        && r.holds("distributivity_left")
        && r.holds("absorption")
        && r.holds("absorption_right");
    if k <= SUBSET_JOIN_LIMIT {
        r.record("arbitrary_joins", subset_join_violation(k, p, j, zero));
    } else if binary_ok {
        r.pass_with_note("arbitrary_joins", "finite lattice: follows from binary distributivity and absorption");
    } else {
        let w = r.failures().next().and_then(|v| v.witness.clone()).unwrap_or_default();
        r.fail("arbitrary_joins", w);
    }
    if let Coverage::Sampled(s) = &coverage {
        let note = format!("carrier of {k} elements: {} sampled triples per ternary law", s.len());
        r.pass_with_note("coverage", note);
    }
    Ok(r)
}

/// Witness `[m, subset bitmask, side]` with side 0 for `m * join(S)` and 1
/// for `join(S) * m`.
fn subset_join_violation(k: usize, p: &[Vec<usize>], j: &[Vec<usize>], zero: usize) -> Option<Vec<usize>> {
    for mask in 0usize..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).collect();
        let join_all = |it: &mut dyn Iterator<Item = usize>| it.fold(zero, |acc, x| j[acc][x]);
        let s = join_all(&mut members.iter().copied());
        for m in 0..k {
            if p[m][s] != join_all(&mut members.iter().map(|&x| p[m][x])) {
                return Some(vec![m, mask, 0]);
            }
            if p[s][m] != join_all(&mut members.iter().map(|&x| p[x][m])) {
                return Some(vec![m, mask, 1]);
            }
        }
    }
    None
}

/// Continuity of involution, product and binary join.
///
/// A preimage of pairs is open in the product topology exactly when every
/// pair in it has an open rectangle around it inside the preimage; in a
/// finite space the smallest rectangle is the product of minimal
/// neighbourhoods. Witnesses are `[open index, a]` or `[open index, a, b]`.
pub fn check_continuity(q: &FiniteQuantale) -> Result<LawReport> {
    let t = q.topology.as_ref().ok_or(Error::MissingTopology)?;
    let ops = q.lattice()?;
    let k = q.size();
    let mut r = LawReport::new();

    let mut inv_w = None;
    for (o, open) in t.opens().iter().enumerate() {
        let pre = crate::topology::bitset(k, (0..k).filter(|&a| open.contains(q.inv[a])));
        if !t.is_open(&pre) {
            let a = (0..k).find(|&a| pre.contains(a)).unwrap_or(0);
            inv_w = Some(vec![o, a]);
            break;
        }
    }
    r.record("involution_continuous", inv_w);
    r.record("product_continuous", binary_violation(t, |a, b| q.prod[a][b]));
    r.record("join_continuous", binary_violation(t, |a, b| ops.join[a][b]));
    Ok(r)
}

fn binary_violation(t: &Topology, f: impl Fn(usize, usize) -> usize) -> Option<Vec<usize>> {
    for (o, open) in t.opens().iter().enumerate() {
        if let Some((a, b)) = t.product_open_violation(t, |a, b| open.contains(f(a, b))) {
            return Some(vec![o, a, b]);
        }
    }
    None
}

/// Checks that `h` (given as `h[src index] = dst index`) preserves zero,
/// binary joins, products and involution, and is continuous when both sides
/// carry topologies. Both quantales must pass [`check_axioms`].
pub fn check_homomorphism(h: &[usize], src: &FiniteQuantale, dst: &FiniteQuantale) -> Result<LawReport> {
    if h.len() != src.size() || h.iter().any(|&x| x >= dst.size()) {
        return Err(Error::InvalidTable(format!(
            "map must send each of {} source elements to one of {} targets",
            src.size(),
            dst.size()
        )));
    }
    for (name, q) in [("source", src), ("target", dst)] {
        let ax = check_axioms(q)?;
        if !ax.passed() {
            return Err(Error::Precondition(format!("{name} fails the axioms:\n{ax}")));
        }
    }
    let (s, d) = (src.lattice()?, dst.lattice()?);
    let k = src.size();
    let mut r = LawReport::new();
    r.record("zero", (h[s.bottom] != d.bottom).then(|| vec![s.bottom]));
    r.record("joins", first_failing_pair(k, |a, b| h[s.join[a][b]] == d.join[h[a]][h[b]]));
    r.record("products", first_failing_pair(k, |a, b| h[src.prod[a][b]] == dst.prod[h[a]][h[b]]));
    r.record("involution", first_failing(k, |a| h[src.inv[a]] == dst.inv[h[a]]));
    match (&src.topology, &dst.topology) {
        (Some(ts), Some(td)) => {
            let w = td.opens().iter().position(|open| {
                let pre = crate::topology::bitset(k, (0..k).filter(|&a| open.contains(h[a])));
                !ts.is_open(&pre)
            });
            r.record("continuity", w.map(|o| vec![o]));
        }
        _ => {
            r.pass_with_note("continuity", "not checked: a side has no topology");
        }
    }
    Ok(r)
}

/// A finite sub-structure of the subspace quantale of M_n(C), closed under
/// join, meet, product and involution.
#[derive(Debug, Clone)]
pub struct SubspaceClosure {
    pub elements: Vec<Subspace>,
    pub quantale: FiniteQuantale,
    /// Number of elements after each round (seed size first).
    pub growth: Vec<usize>,
    tol: Tolerance,
}

impl SubspaceClosure {
    pub fn index_of(&self, s: &Subspace) -> Option<usize> {
        self.elements.iter().position(|e| s.equal(e, self.tol).unwrap_or(false))
    }
}

#[derive(Debug, Clone)]
pub struct ClosureFailure {
    pub growth: Vec<usize>,
    pub reason: String,
    /// Everything enumerated before giving up, in discovery order.
    pub partial: Vec<Subspace>,
}

impl std::fmt::Display for ClosureFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (growth {:?})", self.reason, self.growth)
    }
}

/// Stop enumerating once the carrier exceeds this many subspaces.
pub const CLOSURE_ELEMENT_CAP: usize = 2000;

/// Deduplicating store of subspaces, bucketed by dimension.
struct Store {
    elements: Vec<Subspace>,
    by_dim: HashMap<usize, Vec<usize>>,
    tol: Tolerance,
}

impl Store {
    fn find(&self, s: &Subspace) -> Option<usize> {
        self.by_dim
            .get(&s.dim())?
            .iter()
            .copied()
            .find(|&i| self.elements[i].equal(s, self.tol).unwrap_or(false))
    }

    fn insert(&mut self, s: Subspace) -> bool {
        if self.find(&s).is_some() {
            return false;
        }
        self.by_dim.entry(s.dim()).or_default().push(self.elements.len());
        self.elements.push(s);
        true
    }
}

/// Sort key independent of the basis: dimension, then the orthogonal
/// projector rounded to a 1e-6 grid.
fn canonical_key(s: &Subspace) -> (usize, Vec<(i64, i64)>) {
    let grid = |x: f64| (x * 1e6).round() as i64;
    (s.dim(), s.projector().iter().map(|z| (grid(z.re), grid(z.im))).collect())
}

/// Operations a closure is taken under. Join, product and involution are
/// always included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosureOps {
    /// Also add intersections. Without this the result is a sub-quantale
    /// whose lattice meets need not agree with the ambient intersections.
    pub meet: bool,
}

impl Default for ClosureOps {
    fn default() -> Self {
        Self { meet: true }
    }
}

impl ClosureOps {
    pub const QUANTALE: ClosureOps = ClosureOps { meet: false };
}

/// Closes `seed` under join, meet, product and involution. Succeeds when a
/// round within `depth` rounds adds nothing; the elements are then sorted
/// canonically so the result does not depend on the seed order.
pub fn bounded_closure(
    seed: &[Subspace],
    depth: usize,
    tol: Tolerance,
) -> std::result::Result<SubspaceClosure, ClosureFailure> {
    bounded_closure_with(seed, depth, ClosureOps::default(), tol)
}

pub fn bounded_closure_with(
    seed: &[Subspace],
    depth: usize,
    ops: ClosureOps,
    tol: Tolerance,
) -> std::result::Result<SubspaceClosure, ClosureFailure> {
    let fail = |growth: &[usize], reason: String| ClosureFailure { growth: growth.to_vec(), reason, partial: Vec::new() };
    let n = match seed.first() {
        Some(s) => s.n(),
        None => return Err(fail(&[], "empty seed".into())),
    };
    if seed.iter().any(|s| s.n() != n) {
        return Err(fail(&[], "seed elements do not share an ambient dimension".into()));
    }
    let mut store = Store { elements: Vec::new(), by_dim: HashMap::new(), tol };
    for s in seed {
        store.insert(s.clone());
    }
    let mut growth = vec![store.elements.len()];
    let mut fresh_from = 0;
    let mut closed = false;
    let op_err = |e: Error| fail(&[], e.to_string());
    for _ in 0..depth {
        let before = store.elements.len();
        let mut found = Vec::new();
        for a in 0..before {
            let pa = &store.elements[a];
            if a >= fresh_from {
                found.push(pa.involution(tol));
            }
            for b in 0..before {
                if a < fresh_from && b < fresh_from {
                    continue;
                }
                let pb = &store.elements[b];
                found.push(pa.product(pb, tol).map_err(op_err)?);
                if a <= b {
                    found.push(pa.join(pb, tol).map_err(op_err)?);
                    if ops.meet {
                        found.push(pa.meet(pb, tol).map_err(op_err)?);
                    }
                }
            }
        }
        for s in found {
            store.insert(s);
            if store.elements.len() > CLOSURE_ELEMENT_CAP {
                growth.push(store.elements.len());
                let mut f = fail(&growth, format!("more than {CLOSURE_ELEMENT_CAP} elements"));
                f.partial = store.elements;
                return Err(f);
            }
        }
        growth.push(store.elements.len());
        fresh_from = before;
        if store.elements.len() == before {
            closed = true;
            break;
        }
    }
    if !closed {
        let mut f = fail(&growth, format!("still growing after {depth} rounds"));
        f.partial = store.elements;
        return Err(f);
    }

    let mut keyed: Vec<_> = store.elements.into_iter().map(|s| (canonical_key(&s), s)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let elements: Vec<Subspace> = keyed.into_iter().map(|(_, s)| s).collect();
    let store = {
        let mut st = Store { elements: Vec::new(), by_dim: HashMap::new(), tol };
        for s in &elements {
            st.by_dim.entry(s.dim()).or_default().push(st.elements.len());
            st.elements.push(s.clone());
        }
        st
    };
    let k = elements.len();
    let lookup = |s: &Subspace| -> std::result::Result<usize, ClosureFailure> {
        store.find(s).ok_or_else(|| fail(&growth, "closure is not closed under the operations".into()))
    };
    let leq = elements
        .iter()
        .map(|a| elements.iter().map(|b| b.contains(a, tol).unwrap_or(false)).collect())
        .collect();
    let mut prod = vec![vec![0; k]; k];
    for a in 0..k {
        for b in 0..k {
            prod[a][b] = lookup(&elements[a].product(&elements[b], tol).map_err(op_err)?)?;
        }
    }
    let inv = elements.iter().map(|a| lookup(&a.involution(tol))).collect::<std::result::Result<Vec<_>, _>>()?;
    let quantale = FiniteQuantale::new(leq, prod, inv, None).map_err(|e| fail(&growth, e.to_string()))?;
    Ok(SubspaceClosure { elements, quantale, growth, tol })
}
