//! Observer contexts, conditional expectations, approximation maps, lower
//! hyperspaces and change-of-basis maps.
//!
//! Carriers are finite element lists. Retractions are computed on demand, so
//! only the elements a check touches are ever evaluated. Continuity of a
//! retraction for the lower Vietoris topology on all of Max M_n(C) is not
//! finitely checkable and is not part of any report here.

use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finquant::FiniteQuantale;
use crate::law::LawReport;
use crate::loctop::FiniteSpace;
use crate::maxa::{spin_half_fixtures_with, spin_one_fixtures_with, FixtureSet};
use crate::order::LatticeOps;
use crate::subspace::{ComplexMatrix, Subspace, Tolerance};
use crate::topology::{bitset, full_set, Topology};

/// An involutive quantale whose elements can be compared and combined.
pub trait Ambient {
    type Elem: Clone + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn product(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn involution(&self, a: &Self::Elem) -> Result<Self::Elem>;
    fn same(&self, a: &Self::Elem, b: &Self::Elem) -> Result<bool>;
    /// Errors with [`Error::OutsideAmbient`] for foreign elements.
    fn validate(&self, a: &Self::Elem) -> Result<()>;
    /// Every element, when there are finitely many.
    fn elements(&self) -> Option<Vec<Self::Elem>> {
        None
    }
}

/// Max M_n(C) with a fixed tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxMn {
    pub n: usize,
    pub tol: Tolerance,
}

impl MaxMn {
    pub fn new(n: usize, tol: Tolerance) -> Self {
        Self { n, tol }
    }
}

impl Ambient for MaxMn {
    type Elem = Subspace;

    fn zero(&self) -> Subspace {
        Subspace::zero(self.n).expect("n >= 1")
    }

    fn join(&self, a: &Subspace, b: &Subspace) -> Result<Subspace> {
        a.join(b, self.tol)
    }

    fn product(&self, a: &Subspace, b: &Subspace) -> Result<Subspace> {
        a.product(b, self.tol)
    }

    fn involution(&self, a: &Subspace) -> Result<Subspace> {
        Ok(a.involution(self.tol))
    }

    fn same(&self, a: &Subspace, b: &Subspace) -> Result<bool> {
        a.equal(b, self.tol)
    }

    fn validate(&self, a: &Subspace) -> Result<()> {
        if a.n() != self.n {
            return Err(Error::OutsideAmbient(format!("subspace of M_{} in Max M_{}", a.n(), self.n)));
        }
        Ok(())
    }
}

/// A finite quantale with its join table precomputed.
#[derive(Debug, Clone)]
pub struct FiniteAmbient {
    q: FiniteQuantale,
    ops: LatticeOps,
}

impl FiniteAmbient {
    pub fn new(q: FiniteQuantale) -> Result<Self> {
        let ops = q.lattice()?;
        Ok(Self { q, ops })
    }

    pub fn quantale(&self) -> &FiniteQuantale {
        &self.q
    }
}

impl Ambient for FiniteAmbient {
    type Elem = usize;

    fn zero(&self) -> usize {
        self.ops.bottom
    }

    fn join(&self, a: &usize, b: &usize) -> Result<usize> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.ops.join[*a][*b])
    }

    fn product(&self, a: &usize, b: &usize) -> Result<usize> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.q.prod(*a, *b))
    }

    fn involution(&self, a: &usize) -> Result<usize> {
        self.validate(a)?;
        Ok(self.q.inv(*a))
    }

    fn same(&self, a: &usize, b: &usize) -> Result<bool> {
        Ok(a == b)
    }

    fn validate(&self, a: &usize) -> Result<()> {
        if *a >= self.q.size() {
            return Err(Error::OutsideAmbient(format!("element {a} of a {}-element quantale", self.q.size())));
        }
        Ok(())
    }

    fn elements(&self) -> Option<Vec<usize>> {
        Some((0..self.q.size()).collect())
    }
}

pub type Retraction<E> = Box<dyn Fn(&E) -> Result<E> + Send + Sync>;

/// A finite carrier inside an ambient quantale with a retraction onto it.
pub struct ObserverContext<A: Ambient> {
    ambient: A,
    carrier: Vec<A::Elem>,
    labels: Vec<String>,
    retraction: Retraction<A::Elem>,
}

impl<A: Ambient> fmt::Debug for ObserverContext<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObserverContext").field("labels", &self.labels).finish_non_exhaustive()
    }
}

impl<A: Ambient> ObserverContext<A> {
    pub fn new(ambient: A, carrier: Vec<A::Elem>, labels: Vec<String>, retraction: Retraction<A::Elem>) -> Result<Self> {
        if labels.len() != carrier.len() {
            return Err(Error::BadShape { expected: carrier.len(), got: labels.len() });
        }
        for c in &carrier {
            ambient.validate(c)?;
        }
        Ok(Self { ambient, carrier, labels, retraction })
    }

    pub fn ambient(&self) -> &A {
        &self.ambient
    }

    pub fn carrier(&self) -> &[A::Elem] {
        &self.carrier
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.carrier.len() {
            return Err(Error::BadShape { expected: self.carrier.len(), got: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn retract(&self, m: &A::Elem) -> Result<A::Elem> {
        self.ambient.validate(m)?;
        (self.retraction)(m)
    }

    pub fn carrier_index(&self, m: &A::Elem) -> Result<Option<usize>> {
        for (i, c) in self.carrier.iter().enumerate() {
            if self.ambient.same(c, m)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Carrier index of `r(m)`; errors if the retraction leaves the carrier.
    pub fn retract_index(&self, m: &A::Elem) -> Result<usize> {
        let r = self.retract(m)?;
        self.carrier_index(&r)?
            .ok_or_else(|| Error::Precondition(format!("retraction value {r:?} is not in the carrier")))
    }
}

/// Checks the observer context laws on the carrier followed by the test
/// elements. Test elements are all ambient elements when the ambient is
/// finite, `samples` otherwise. Witness indices refer to that combined list;
/// in `right_module` the second index is a carrier index.
pub fn check_observer_axioms<A: Ambient>(ctx: &ObserverContext<A>, samples: &[A::Elem]) -> Result<LawReport> {
    let amb = &ctx.ambient;
    for s in samples {
        amb.validate(s)?;
    }
    let carrier = &ctx.carrier;
    let c = carrier.len();
    let mut test: Vec<A::Elem> = carrier.clone();
    test.extend(amb.elements().unwrap_or_else(|| samples.to_vec()));

    let in_carrier = |m: &A::Elem| -> Result<bool> { Ok(ctx.carrier_index(m)?.is_some()) };
    let mut report = LawReport::new();

    report.record("carrier_has_zero", (!in_carrier(&amb.zero())?).then(Vec::new));
    let mut joins = None;
    let mut products = None;
    'outer: for i in 0..c {
        for j in 0..c {
            if j >= i && joins.is_none() && !in_carrier(&amb.join(&carrier[i], &carrier[j])?)? {
                joins = Some(vec![i, j]);
            }
            if products.is_none() && !in_carrier(&amb.product(&carrier[i], &carrier[j])?)? {
                products = Some(vec![i, j]);
            }
            if joins.is_some() && products.is_some() {
                break 'outer;
            }
        }
    }
    report.record("carrier_join_closed", joins);
    report.record("carrier_product_closed", products);
    let mut involutions = None;
    for (i, m) in carrier.iter().enumerate() {
        if !in_carrier(&amb.involution(m)?)? {
            involutions = Some(vec![i]);
            break;
        }
    }
    report.record("carrier_involution_closed", involutions);

    let images = test.iter().map(|m| ctx.retract(m)).collect::<Result<Vec<_>>>()?;
    let mut fixes = None;
    for i in 0..c {
        if !amb.same(&images[i], &carrier[i])? {
            fixes = Some(vec![i]);
            break;
        }
    }
    report.record("retraction_fixes_carrier", fixes);
    let mut lands = None;
    for (i, r) in images.iter().enumerate() {
        if !in_carrier(r)? {
            lands = Some(vec![i]);
            break;
        }
    }
    report.record("retraction_into_carrier", lands);

    let mut joins = None;
    'joins: for i in 0..test.len() {
        for j in i..test.len() {
            let lhs = ctx.retract(&amb.join(&test[i], &test[j])?)?;
            let rhs = amb.join(&images[i], &images[j])?;
            if !amb.same(&lhs, &rhs)? {
                joins = Some(vec![i, j]);
                break 'joins;
            }
        }
    }
    report.record("preserves_joins", joins);

    let mut inv = None;
    for (i, m) in test.iter().enumerate() {
        let lhs = ctx.retract(&amb.involution(m)?)?;
        if !amb.same(&lhs, &amb.involution(&images[i])?)? {
            inv = Some(vec![i]);
            break;
        }
    }
    report.record("preserves_involution", inv);

    let mut module = None;
    'module: for (i, m) in test.iter().enumerate() {
        for (w, omega) in carrier.iter().enumerate() {
            let lhs = ctx.retract(&amb.product(m, omega)?)?;
            let rhs = amb.product(&images[i], omega)?;
            if !amb.same(&lhs, &rhs)? {
                module = Some(vec![i, w]);
                break 'module;
            }
        }
    }
    report.record("right_module", module);
    Ok(report)
}

/// Restriction of a matrix algebra to the block-diagonal part for a
/// partition of the indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionalExpectation {
    n: usize,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl ConditionalExpectation {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Precondition(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= n || block_of[i] != usize::MAX {
                    return Err(Error::Precondition(format!("index {i} is out of range or repeated")));
                }
                block_of[i] = b;
            }
        }
        if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Precondition(format!("index {i} is in no block")));
        }
        Ok(Self { n, blocks, block_of })
    }

    /// Restriction to the main diagonal.
    pub fn diagonal(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| vec![i]).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, a.n()));
        }
        let mut out = a.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.block_of[i] != self.block_of[j] {
                    out.set(i, j, 0.0.into());
                }
            }
        }
        Ok(out)
    }

    /// The image of the expectation, spanned by in-block matrix units.
    pub fn block_algebra(&self, tol: Tolerance) -> Subspace {
        let units = self
            .blocks
            .iter()
            .flat_map(|b| b.iter().flat_map(move |&i| b.iter().map(move |&j| (i, j))))
            .map(|(i, j)| ComplexMatrix::unit(self.n, i, j));
        Subspace::canonicalize(self.n, units, tol).expect("n >= 1")
    }

    /// `span(Θ(P)) · B`.
    pub fn retract(&self, p: &Subspace, tol: Tolerance) -> Result<Subspace> {
        let images = p.basis().iter().map(|a| self.apply(a)).collect::<Result<Vec<_>>>()?;
        let theta = Subspace::canonicalize(self.n, images, tol)?;
        theta.product(&self.block_algebra(tol), tol)
    }

    /// Checks idempotence, adjoint preservation, that the image is fixed,
    /// the bimodule property over the image, and commutativity of the image,
    /// all on matrix units.
    pub fn verify(&self, tol: Tolerance) -> LawReport {
        let n = self.n;
        let units: Vec<ComplexMatrix> = (0..n * n).map(|k| ComplexMatrix::unit(n, k / n, k % n)).collect();
        let inside: Vec<usize> = (0..n * n).filter(|&k| self.block_of[k / n] == self.block_of[k % n]).collect();
        let close = |a: &ComplexMatrix, b: &ComplexMatrix| tol.negligible(a.sub(b).norm(), 1.0);
        let theta = |a: &ComplexMatrix| self.apply(a).expect("same n");
        let mut report = LawReport::new();
        let first = |f: &dyn Fn(usize) -> bool| (0..n * n).find(|&k| !f(k)).map(|k| vec![k]);
        report.record("idempotent", first(&|k| close(&theta(&theta(&units[k])), &theta(&units[k]))));
        report.record("adjoint", first(&|k| close(&theta(&units[k].adjoint()), &theta(&units[k]).adjoint())));
        report.record("fixes_image", inside.iter().find(|&&k| !close(&theta(&units[k]), &units[k])).map(|&k| vec![k]));
        let mut bimodule = None;
        'outer: for &b in &inside {
            for &c in &inside {
                for k in 0..n * n {
                    let lhs = theta(&units[b].mul(&units[k]).mul(&units[c]));
                    let rhs = units[b].mul(&theta(&units[k])).mul(&units[c]);
                    if !close(&lhs, &rhs) {
                        bimodule = Some(vec![b, k, c]);
                        break 'outer;
                    }
                }
            }
        }
        report.record("bimodule", bimodule);
        let mut abelian = None;
        'comm: for &b in &inside {
            for &c in &inside {
                if !close(&units[b].mul(&units[c]), &units[c].mul(&units[b])) {
                    abelian = Some(vec![b, c]);
                    break 'comm;
                }
            }
        }
        report.record("abelian_image", abelian);
        report
    }
}

pub fn diag_expectation(n: usize) -> Result<ConditionalExpectation> {
    ConditionalExpectation::diagonal(n)
}

/// Observer context with carrier `lattice` and retraction
/// `P ↦ span(Θ(P)) · B`. The lattice must be closed under binary joins.
pub fn observer_from_expectation(
    theta: ConditionalExpectation,
    lattice: Vec<Subspace>,
    tol: Tolerance,
) -> Result<ObserverContext<MaxMn>> {
    let amb = MaxMn::new(theta.n(), tol);
    for (i, a) in lattice.iter().enumerate() {
        amb.validate(a)?;
        for (j, b) in lattice.iter().enumerate().skip(i + 1) {
            let m = a.join(b, tol)?;
            if !lattice.iter().try_fold(false, |found, c| Ok::<_, Error>(found || c.equal(&m, tol)?))? {
                return Err(Error::Precondition(format!("lattice is not join-closed: elements {i} and {j}")));
            }
        }
    }
    let labels = (0..lattice.len()).map(|i| i.to_string()).collect();
    let retraction = move |p: &Subspace| theta.retract(p, tol);
    ObserverContext::new(amb, lattice, labels, Box::new(retraction))
}

/// The two worked spin systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Half,
    One,
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Spin::Half),
            "one" => Ok(Spin::One),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Half => "half",
            Spin::One => "one",
        })
    }
}

impl Spin {
    pub fn n(self) -> usize {
        match self {
            Spin::Half => 2,
            Spin::One => 3,
        }
    }

    pub fn fixtures(self, tol: Tolerance) -> FixtureSet {
        match self {
            Spin::Half => spin_half_fixtures_with(tol),
            Spin::One => spin_one_fixtures_with(tol),
        }
    }

    /// Fixture names of the `z` atoms in point order (down/−, 0, up/+).
    pub fn z_atoms(self) -> &'static [&'static str] {
        match self {
            Spin::Half => &["z_down", "z_up"],
            Spin::One => &["z_minus", "z_zero", "z_plus"],
        }
    }

    pub fn x_atoms(self) -> &'static [&'static str] {
        match self {
            Spin::Half => &["x_down", "x_up"],
            Spin::One => &["x_minus", "x_zero", "x_plus"],
        }
    }

    /// Labels of the discrete space whose points are the atoms.
    pub fn point_labels(self) -> Vec<String> {
        let raw: &[&str] = match self {
            Spin::Half => &["|down>", "|up>"],
            Spin::One => &["|->", "|0>", "|+>"],
        };
        raw.iter().map(|s| s.to_string()).collect()
    }
}

/// The Boolean lattice of joins of `atoms`, indexed by subset bitmask.
#[derive(Debug, Clone)]
pub struct AtomLattice {
    pub elements: Vec<Subspace>,
    pub labels: Vec<String>,
}

/// Joins of the named atoms. The full join must equal the fixture `top`
/// and is labelled by it.
pub fn atom_lattice(fixtures: &FixtureSet, atoms: &[&str], top: &str, tol: Tolerance) -> Result<AtomLattice> {
    let subs = atoms.iter().map(|a| fixtures.get(a).cloned()).collect::<Result<Vec<_>>>()?;
    let n = fixtures.n();
    let full = (1usize << atoms.len()) - 1;
    let mut elements = Vec::with_capacity(full + 1);
    let mut labels = Vec::with_capacity(full + 1);
    for mask in 0..=full {
        let mut s = Subspace::zero(n)?;
        let mut names = Vec::new();
        for (i, a) in subs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s = s.join(a, tol)?;
                names.push(atoms[i]);
            }
        }
        let label = match mask {
            0 => "0".to_string(),
            m if m == full => {
                if !s.equal(fixtures.get(top)?, tol)? {
                    return Err(Error::Precondition(format!("join of the atoms differs from {top}")));
                }
                top.to_string()
            }
            _ => names.join("∨"),
        };
        elements.push(s);
        labels.push(label);
    }
    Ok(AtomLattice { elements, labels })
}

/// The diagonal observer `(O_z, r_z)` for a spin system.
pub fn spin_observer(spin: Spin, tol: Tolerance) -> Result<ObserverContext<MaxMn>> {
    let fx = spin.fixtures(tol);
    let lattice = atom_lattice(&fx, spin.z_atoms(), "z", tol)?;
    observer_from_expectation(diag_expectation(spin.n())?, lattice.elements, tol)?.with_labels(lattice.labels)
}

/// `af(ab)` differs from `af(a)af(b)`. Source indices, carrier indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductWitness {
    pub a: usize,
    pub b: usize,
    pub image_of_product: usize,
    pub product_of_images: usize,
}

#[derive(Debug, Clone)]
pub struct Approximation {
    /// Carrier index of the image of each source element.
    pub images: Vec<usize>,
    pub report: LawReport,
    /// Reported, not counted as failures: approximations need not preserve
    /// products.
    pub product_witnesses: Vec<ProductWitness>,
}

/// The restriction of the retraction to `src`, with the approximation laws
/// `preserves_zero`, `fixes_common`, `preserves_joins` and
/// `preserves_involution` checked on `src`.
pub fn approximation_map<A: Ambient>(ctx: &ObserverContext<A>, src: &[A::Elem]) -> Result<Approximation> {
    let amb = ctx.ambient();
    let images = src.iter().map(|m| ctx.retract_index(m)).collect::<Result<Vec<_>>>()?;
    let carrier = ctx.carrier();
    let mut report = LawReport::new();
    let zero = amb.zero();
    report.record("preserves_zero", (!amb.same(&ctx.retract(&zero)?, &zero)?).then(Vec::new));

    let mut common = None;
    for (i, m) in src.iter().enumerate() {
        if ctx.carrier_index(m)?.is_some() && !amb.same(&carrier[images[i]], m)? {
            common = Some(vec![i]);
            break;
        }
    }
    report.record("fixes_common", common);

    let mut joins = None;
    'joins: for i in 0..src.len() {
        for j in i..src.len() {
            let lhs = ctx.retract(&amb.join(&src[i], &src[j])?)?;
            let rhs = amb.join(&carrier[images[i]], &carrier[images[j]])?;
            if !amb.same(&lhs, &rhs)? {
                joins = Some(vec![i, j]);
                break 'joins;
            }
        }
    }
    report.record("preserves_joins", joins);

    let mut inv = None;
    for (i, m) in src.iter().enumerate() {
        let lhs = ctx.retract(&amb.involution(m)?)?;
        if !amb.same(&lhs, &amb.involution(&carrier[images[i]])?)? {
            inv = Some(vec![i]);
            break;
        }
    }
    report.record("preserves_involution", inv);

    let mut product_witnesses = Vec::new();
    for a in 0..src.len() {
        for b in 0..src.len() {
            let image_of_product = ctx.retract_index(&amb.product(&src[a], &src[b])?)?;
            let prod = amb.product(&carrier[images[a]], &carrier[images[b]])?;
            let product_of_images = ctx
                .carrier_index(&prod)?
                .ok_or_else(|| Error::Precondition("carrier is not closed under products".into()))?;
            if image_of_product != product_of_images {
                product_witnesses.push(ProductWitness { a, b, image_of_product, product_of_images });
            }
        }
    }
    Ok(Approximation { images, report, product_witnesses })
}

/// Upper bound on the base size for hyperspace enumeration.
pub const HYPERSPACE_POINT_CAP: usize = 12;

/// Closed sets of a finite space with the lower Vietoris topology, generated
/// by the sets `⋄U` of closed sets meeting an open `U`. The empty closed set
/// is a point, so the whole hyperspace is open without being of the form
/// `⋄U`.
#[derive(Debug, Clone)]
pub struct LowerHyperspace {
    base: FiniteSpace,
    closed: Vec<FixedBitSet>,
    topology: Topology,
    diamond: Vec<FixedBitSet>,
}

pub fn lower_hyperspace(x: &FiniteSpace) -> Result<LowerHyperspace> {
    if x.size() > HYPERSPACE_POINT_CAP {
        return Err(Error::TooLarge(format!("hyperspace of {} points (cap {HYPERSPACE_POINT_CAP})", x.size())));
    }
    let mut closed = x.topology().closed_sets();
    closed.sort_by(|a, b| a.count_ones(..).cmp(&b.count_ones(..)).then_with(|| a.ones().cmp(b.ones())));
    let h = closed.len();
    let diamond: Vec<FixedBitSet> =
        x.topology().opens().iter().map(|u| bitset(h, (0..h).filter(|&c| !closed[c].is_disjoint(u)))).collect();
    let topology = Topology::generated_by(h, &diamond)?;
    Ok(LowerHyperspace { base: x.clone(), closed, topology, diamond })
}

impl LowerHyperspace {
    pub fn base(&self) -> &FiniteSpace {
        &self.base
    }

    /// Closed sets of the base, ordered by size then members.
    pub fn points(&self) -> &[FixedBitSet] {
        &self.closed
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// `⋄U` for the base open with index `u`.
    pub fn diamond(&self, u: usize) -> &FixedBitSet {
        &self.diamond[u]
    }

    pub fn point_index(&self, closed: &FixedBitSet) -> Option<usize> {
        let c = bitset(self.base.size(), closed.ones());
        self.closed.iter().position(|d| *d == c)
    }

    /// `⋄` preserves the empty set and binary unions, and is injective.
    pub fn check_embedding(&self) -> LawReport {
        let t = self.base.topology();
        let opens = t.opens();
        let k = opens.len();
        let mut report = LawReport::new();
        let empty = t.open_index(&FixedBitSet::with_capacity(self.base.size())).expect("empty set is open");
        report.record("diamond_preserves_empty", (!self.diamond[empty].is_clear()).then(|| vec![empty]));
        let mut unions = None;
        let mut injective = None;
        for u in 0..k {
            for v in 0..k {
                let mut uv = opens[u].clone();
                uv.union_with(&opens[v]);
                let w = t.open_index(&uv).expect("opens are closed under union");
                let mut du = self.diamond[u].clone();
                du.union_with(&self.diamond[v]);
                if unions.is_none() && du != self.diamond[w] {
                    unions = Some(vec![u, v]);
                }
                if injective.is_none() && u != v && self.diamond[u] == self.diamond[v] {
                    injective = Some(vec![u, v]);
                }
            }
        }
        report.record("diamond_preserves_unions", unions);
        report.record("diamond_injective", injective);
        report
    }
}

/// A map from the opens of `source` to the opens of `target`, indexed by
/// the source topology's open order.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenMap {
    source: FiniteSpace,
    target: FiniteSpace,
    images: Vec<FixedBitSet>,
}

impl OpenMap {
    pub fn new(source: FiniteSpace, target: FiniteSpace, images: Vec<FixedBitSet>) -> Result<Self> {
        let k = source.topology().opens().len();
        if images.len() != k {
            return Err(Error::BadShape { expected: k, got: images.len() });
        }
        let images: Vec<FixedBitSet> = images.iter().map(|s| bitset(target.size(), s.ones())).collect();
        if let Some(u) = images.iter().position(|s| !target.topology().is_open(s)) {
            return Err(Error::InvalidTopology(format!("image of open {u} is not open")));
        }
        Ok(Self { source, target, images })
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        Self { source: space.clone(), target: space.clone(), images: space.topology().opens().to_vec() }
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn image(&self, u: usize) -> &FixedBitSet {
        &self.images[u]
    }

    /// First pair of source opens whose union is not sent to the union of
    /// their images. `[u]` alone means `f(∅) ≠ ∅`.
    pub fn union_violation(&self) -> Option<Vec<usize>> {
        let t = self.source.topology();
        let opens = t.opens();
        let empty = t.open_index(&FixedBitSet::with_capacity(self.source.size())).expect("empty set is open");
        if !self.images[empty].is_clear() {
            return Some(vec![empty]);
        }
        for u in 0..opens.len() {
            for v in u + 1..opens.len() {
                let mut uv = opens[u].clone();
                uv.union_with(&opens[v]);
                let w = t.open_index(&uv).expect("opens are closed under union");
                let mut image = self.images[u].clone();
                image.union_with(&self.images[v]);
                if image != self.images[w] {
                    return Some(vec![u, v]);
                }
            }
        }
        None
    }
}

/// The union-preserving map `U ↦ r(join of the src atoms in U)`, read in the
/// dst atoms. Both spaces are discrete on `points`, whose `i`-th point
/// stands for the `i`-th atom.
pub fn open_map_from_retraction(
    ctx: &ObserverContext<MaxMn>,
    src_atoms: &[Subspace],
    dst_atoms: &[Subspace],
    points: Vec<String>,
) -> Result<OpenMap> {
    let k = points.len();
    if src_atoms.len() != k || dst_atoms.len() != k {
        return Err(Error::BadShape { expected: k, got: src_atoms.len().min(dst_atoms.len()) });
    }
    let tol = ctx.ambient().tol;
    let n = ctx.ambient().n;
    let space = FiniteSpace::new(points, Topology::discrete(k)?)?;
    let mut images = Vec::new();
    for u in space.topology().opens() {
        let mut s = Subspace::zero(n)?;
        for y in u.ones() {
            s = s.join(&src_atoms[y], tol)?;
        }
        let r = ctx.retract(&s)?;
        let mut hit = Vec::new();
        for (y, atom) in dst_atoms.iter().enumerate() {
            if r.contains(atom, tol)? {
                hit.push(y);
            }
        }
        let mut joined = Subspace::zero(n)?;
        for &y in &hit {
            joined = joined.join(&dst_atoms[y], tol)?;
        }
        if !joined.equal(&r, tol)? {
            return Err(Error::Precondition(format!("r({}) is not a join of target atoms", space.describe(u))));
        }
        images.push(bitset(k, hit));
    }
    OpenMap::new(space.clone(), space, images)
}

/// `β : X_p → C(X_q)` for `f : O(X_q) → O(X_p)` with assignment and checks.
#[derive(Debug, Clone)]
pub struct BasisChange {
    /// `assignment[x]` is the closed subset of `X_q` assigned to `x ∈ X_p`.
    pub assignment: Vec<FixedBitSet>,
    pub hyperspace: LowerHyperspace,
    /// `preimage_of_diamond`, `continuous`, and for discrete `X_q` also
    /// `discrete_formula_agrees`.
    pub report: LawReport,
    /// Points assigned the empty closed set.
    pub empty_points: Vec<usize>,
}

impl BasisChange {
    pub fn describe(&self, x: usize) -> String {
        self.hyperspace.base().describe(&self.assignment[x])
    }
}

/// `β(x) = X_q ∖ ⋃{U : x ∉ f(U)}`, so that `β⁻¹(⋄U) = f(U)`.
pub fn beta(f: &OpenMap) -> Result<BasisChange> {
    if let Some(w) = f.union_violation() {
        return Err(Error::NotUnionPreserving(format!("witness opens {w:?}")));
    }
    let xq = f.source();
    let xp = f.target();
    let tq = xq.topology();
    let (nq, np) = (xq.size(), xp.size());
    let hyperspace = lower_hyperspace(xq)?;
    let assignment: Vec<FixedBitSet> = (0..np)
        .map(|x| {
            let mut c = full_set(nq);
            for (u, o) in tq.opens().iter().enumerate() {
                if !f.image(u).contains(x) {
                    c.difference_with(o);
                }
            }
            c
        })
        .collect();

    let mut report = LawReport::new();
    let preimage = (0..tq.opens().len())
        .find(|&u| {
            let pre = bitset(np, (0..np).filter(|&x| !assignment[x].is_disjoint(&tq.opens()[u])));
            &pre != f.image(u)
        })
        .map(|u| vec![u]);
    report.record("preimage_of_diamond", preimage);

    let point_of: Vec<usize> = assignment
        .iter()
        .map(|c| hyperspace.point_index(c).expect("complements of opens are closed"))
        .collect();
    let continuous = (0..hyperspace.topology().opens().len())
        .find(|&w| {
            let open = &hyperspace.topology().opens()[w];
            !xp.topology().is_open(&bitset(np, (0..np).filter(|&x| open.contains(point_of[x]))))
        })
        .map(|w| vec![w]);
    report.record("continuous", continuous);

    if tq.opens().len() == 1 << nq {
        let discrete = (0..np).find(|&x| {
            let direct = bitset(
                nq,
                (0..nq).filter(|&y| {
                    let u = tq.open_index(&bitset(nq, [y])).expect("singletons are open");
                    f.image(u).contains(x)
                }),
            );
            direct != assignment[x]
        });
        report.record("discrete_formula_agrees", discrete.map(|x| vec![x]));
    }
    let empty_points = (0..np).filter(|&x| assignment[x].is_clear()).collect();
    Ok(BasisChange { assignment, hyperspace, report, empty_points })
}

/// The change of basis from `r_z` restricted to `O_x`.
pub fn spin_beta(spin: Spin, tol: Tolerance) -> Result<BasisChange> {
    let ctx = spin_observer(spin, tol)?;
    let fx = spin.fixtures(tol);
    let pick = |names: &[&str]| names.iter().map(|a| fx.get(a).cloned()).collect::<Result<Vec<_>>>();
    let f = open_map_from_retraction(&ctx, &pick(spin.x_atoms())?, &pick(spin.z_atoms())?, spin.point_labels())?;
    beta(&f)
}

/// The change of basis from the identity on `O_z`.
pub fn identity_beta(spin: Spin) -> Result<BasisChange> {
    let k = spin.n();
    let space = FiniteSpace::new(spin.point_labels(), Topology::discrete(k)?)?;
    beta(&OpenMap::identity(&space))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxa::spin_half_fixtures;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn m(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn diagonal_expectation_examples() {
        let th = diag_expectation(2).unwrap();
        assert_eq!(th.apply(&ComplexMatrix::unit(2, 0, 1)).unwrap(), ComplexMatrix::zeros(2));
        assert_eq!(th.apply(&m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap(), ComplexMatrix::identity(2));
        assert!(th.verify(tol()).passed());
        assert!(diag_expectation(3).unwrap().verify(tol()).passed());
    }

    #[test]
    fn block_expectation_is_not_abelian() {
        let th = ConditionalExpectation::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let r = th.verify(tol());
        assert!(r.holds("idempotent") && r.holds("bimodule"));
        assert!(!r.holds("abelian_image"));
        assert_eq!(th.block_algebra(tol()).dim(), 5);
        assert!(ConditionalExpectation::new(2, vec![vec![0]]).is_err());
        assert!(ConditionalExpectation::new(2, vec![vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn spin_half_retraction() {
        let ctx = spin_observer(Spin::Half, tol()).unwrap();
        assert_eq!(ctx.labels(), ["0", "z_down", "z_up", "z"]);
        let fx = spin_half_fixtures();
        for name in ["x_up", "x_down", "x"] {
            assert_eq!(ctx.retract_index(&fx[name]).unwrap(), 3, "{name}");
        }
        for (i, name) in ["0", "z_down", "z_up", "z"].iter().enumerate() {
            assert_eq!(ctx.retract_index(&fx[*name]).unwrap(), i);
        }
    }

    #[test]
    fn non_join_closed_lattice_is_refused() {
        let fx = spin_half_fixtures();
        let lattice = vec![fx["0"].clone(), fx["z_up"].clone(), fx["z_down"].clone()];
        let r = observer_from_expectation(diag_expectation(2).unwrap(), lattice, tol());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn corrupted_retraction_is_caught() {
        let fx = spin_half_fixtures();
        let lattice = atom_lattice(&fx, Spin::Half.z_atoms(), "z", tol()).unwrap();
        let th = diag_expectation(2).unwrap();
        let (z_up, z) = (fx["z_up"].clone(), fx["z"].clone());
        let bad = move |p: &Subspace| {
            if p.equal(&z_up, tol())? {
                Ok(z.clone())
            } else {
                th.retract(p, tol())
            }
        };
        let ctx = ObserverContext::new(MaxMn::new(2, tol()), lattice.elements, lattice.labels, Box::new(bad)).unwrap();
        let r = check_observer_axioms(&ctx, &[]).unwrap();
        assert_eq!(r.verdict("retraction_fixes_carrier").unwrap().witness, Some(vec![2]));
    }

    #[test]
    fn observer_axioms_on_fixtures() {
        let fx = spin_half_fixtures();
        let ctx = spin_observer(Spin::Half, tol()).unwrap();
        let r = check_observer_axioms(&ctx, &fx.subspaces()).unwrap();
        assert!(r.passed(), "{r}");
        let wrong = Subspace::zero(3).unwrap();
        assert!(matches!(check_observer_axioms(&ctx, &[wrong]), Err(Error::OutsideAmbient(_))));
    }

    #[test]
    fn finite_ambient_observer() {
        // diagonal relations inside M_2(2), with r(U) = U ∩ Δ
        let q = crate::relquant::relation_quantale(2).unwrap();
        let amb = FiniteAmbient::new(q).unwrap();
        let diag_mask = 0b1001;
        let carrier: Vec<usize> = vec![0, 0b0001, 0b1000, 0b1001];
        let labels = carrier.iter().map(|c| c.to_string()).collect();
        let ctx = ObserverContext::new(amb, carrier, labels, Box::new(move |u: &usize| Ok(u & diag_mask))).unwrap();
        assert!(check_observer_axioms(&ctx, &[]).unwrap().passed());
        let ctx_bad = ObserverContext::new(
            FiniteAmbient::new(crate::relquant::relation_quantale(2).unwrap()).unwrap(),
            vec![0, 0b0001, 0b1000, 0b1001],
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            Box::new(|u: &usize| Ok(if *u == 0 { 0 } else { 0b1001 })),
        )
        .unwrap();
        assert!(!check_observer_axioms(&ctx_bad, &[]).unwrap().passed());
    }

    #[test]
    fn spin_half_approximation() {
        let fx = spin_half_fixtures();
        let ctx = spin_observer(Spin::Half, tol()).unwrap();
        let src: Vec<Subspace> = ["0", "x_down", "x_up", "x"].iter().map(|n| fx[*n].clone()).collect();
        let af = approximation_map(&ctx, &src).unwrap();
        assert_eq!(af.images, vec![0, 3, 3, 3]);
        assert!(af.report.passed());
        let w = af.product_witnesses.iter().find(|w| (w.a, w.b) == (2, 1)).unwrap();
        assert_eq!((w.image_of_product, w.product_of_images), (0, 3));
    }

    #[test]
    fn identity_approximation() {
        let ctx = spin_observer(Spin::Half, tol()).unwrap();
        let src = ctx.carrier().to_vec();
        let af = approximation_map(&ctx, &src).unwrap();
        assert_eq!(af.images, vec![0, 1, 2, 3]);
        assert!(af.report.passed());
        assert!(af.product_witnesses.is_empty());
    }

    #[test]
    fn hyperspaces() {
        let two = FiniteSpace::new(vec!["a".into(), "b".into()], Topology::discrete(2).unwrap()).unwrap();
        let h = lower_hyperspace(&two).unwrap();
        assert_eq!(h.points().len(), 4);
        assert!(h.check_embedding().passed());
        // the ⋄-image is the five-element lattice ∅ < ⋄{a}∩⋄{b} ... < ⋄X
        assert_eq!(h.topology().opens().len(), 6);
        let one = FiniteSpace::unlabelled(Topology::discrete(1).unwrap());
        assert_eq!(lower_hyperspace(&one).unwrap().points().len(), 2);
        let z = FiniteSpace::from_doc(crate::loctop::SpaceDoc {
            points: vec!["z_down".into(), "z_up".into(), "z".into()],
            opens: vec![vec![], vec![2], vec![0, 2], vec![1, 2], vec![0, 1, 2]],
        })
        .unwrap();
        assert!(lower_hyperspace(&z).unwrap().check_embedding().passed());
    }

    #[test]
    fn beta_values() {
        let b = spin_beta(Spin::Half, tol()).unwrap();
        assert!(b.report.passed(), "{}", b.report);
        assert_eq!(b.describe(0), "{|down>,|up>}");
        assert_eq!(b.describe(1), "{|down>,|up>}");
        let b = spin_beta(Spin::One, tol()).unwrap();
        assert!(b.report.passed(), "{}", b.report);
        assert_eq!(b.describe(1), "{|->,|+>}");
        assert_eq!(b.describe(0), "{|->,|0>,|+>}");
        assert_eq!(b.describe(2), "{|->,|0>,|+>}");
        let id = identity_beta(Spin::Half).unwrap();
        assert!(id.report.passed());
        assert_eq!(id.describe(0), "{|down>}");
        assert_ne!(id.assignment, spin_beta(Spin::Half, tol()).unwrap().assignment);
    }

    #[test]
    fn beta_needs_union_preservation() {
        let two = FiniteSpace::new(vec!["a".into(), "b".into()], Topology::discrete(2).unwrap()).unwrap();
        let full = full_set(2);
        let images = vec![full.clone(); two.topology().opens().len()];
        let f = OpenMap::new(two.clone(), two, images).unwrap();
        assert!(matches!(beta(&f), Err(Error::NotUnionPreserving(_))));
    }
}
