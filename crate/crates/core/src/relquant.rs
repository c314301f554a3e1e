//! Boolean relation quantales, finite discrete groupoids, and the support
//! map relating subspaces of M_n(C) to relations on `{1, .., n}`.
//!
//! Indices are 0-based in code; labels print them 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finquant::FiniteQuantale;
use crate::observer::{MaxMn, ObserverContext};
use crate::subspace::{ComplexMatrix, Subspace, Tolerance};

/// Largest arrow count for which [`groupoid_quantale`] builds the full
/// powerset quantale (`2^10` elements, a million-entry product table).
pub const GROUPOID_ARROW_CAP: usize = 10;

/// An `n × n` boolean matrix, i.e. a relation on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl BoolMatrix {
    pub fn new(n: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != n * n {
            return Err(Error::BadShape { expected: n * n, got: bits.len() });
        }
        Ok(Self { n, bits })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::BadShape { expected: n, got: r.len() });
        }
        Ok(Self { n, bits: rows.concat() })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, bits: vec![false; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_pairs(n, (0..n).map(|i| (i, i)))
    }

    pub fn full(n: usize) -> Self {
        Self { n, bits: vec![true; n * n] }
    }

    /// Panics if a pair is out of range.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::empty(n);
        for (i, j) in pairs {
            m.set(i, j, true);
        }
        m
    }

    /// Bit `i*n + j` of `mask` is entry `(i, j)`.
    pub fn from_mask(n: usize, mask: usize) -> Self {
        Self { n, bits: (0..n * n).map(|b| mask >> b & 1 == 1).collect() }
    }

    pub fn mask(&self) -> usize {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| 1 << i).sum()
    }

    /// Every relation on `n` points, in mask order.
    pub fn all(n: usize) -> Result<Vec<Self>> {
        if n * n > GROUPOID_ARROW_CAP {
            return Err(Error::TooLarge(format!("2^{} relations on {n} points", n * n)));
        }
        Ok((0..1usize << (n * n)).map(|m| Self::from_mask(n, m)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.n && j < self.n, "entry ({i}, {j}) outside {0}x{0}", self.n);
        self.bits[i * self.n + j] = value;
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n * self.n).filter(|&b| self.bits[b]).map(|b| (b / self.n, b % self.n))
    }

    pub fn rows(&self) -> Vec<Vec<bool>> {
        self.bits.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { n: self.n, bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect() })
    }
}

impl fmt::Display for BoolMatrix {
    /// `{(1,2),(2,1)}`, 1-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self.pairs().map(|(i, j)| format!("({},{})", i + 1, j + 1)).collect();
        write!(f, "{{{}}}", pairs.join(","))
    }
}

/// `(ST)_ij = OR_k s_ik t_kj`.
pub fn bool_product(s: &BoolMatrix, t: &BoolMatrix) -> Result<BoolMatrix> {
    s.check_same(t)?;
    let n = s.n;
    let mut out = BoolMatrix::empty(n);
    for i in 0..n {
        for j in 0..n {
            out.bits[i * n + j] = (0..n).any(|k| s.get(i, k) && t.get(k, j));
        }
    }
    Ok(out)
}

/// Transpose.
pub fn bool_involution(s: &BoolMatrix) -> BoolMatrix {
    let n = s.n;
    BoolMatrix { n, bits: (0..n * n).map(|b| s.get(b % n, b / n)).collect() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub src: usize,
    pub tgt: usize,
    pub id: String,
}

/// A finite discrete groupoid. `compose[a][b]` is `a·b`, "first `b`, then
/// `a`", defined iff `src(a) = tgt(b)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroupoid {
    pub objects: Vec<String>,
    pub arrows: Vec<Arrow>,
    pub compose: Vec<Vec<Option<usize>>>,
    pub inverse: Vec<usize>,
}

impl FiniteGroupoid {
    /// Checks the tables, then the groupoid laws exhaustively.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidGroupoid(m));
        let k = self.arrows.len();
        let o = self.objects.len();
        if let Some(a) = self.arrows.iter().position(|a| a.src >= o || a.tgt >= o) {
            return bad(format!("arrow {a} has an endpoint outside the {o} objects"));
        }
        if self.compose.len() != k || self.compose.iter().any(|r| r.len() != k) {
            return bad(format!("compose must be {k}x{k}"));
        }
        if self.inverse.len() != k || self.inverse.iter().any(|&i| i >= k) {
            return bad(format!("inverse must list {k} arrow indices"));
        }
        let arr = &self.arrows;
        for a in 0..k {
            for b in 0..k {
                match (self.compose[a][b], arr[a].src == arr[b].tgt) {
                    (Some(c), true) if c < k => {
                        if arr[c].src != arr[b].src || arr[c].tgt != arr[a].tgt {
                            return bad(format!("{a}·{b} = {c} has the wrong endpoints"));
                        }
                    }
                    (Some(_), true) => return bad(format!("{a}·{b} is not an arrow index")),
                    (Some(_), false) => return bad(format!("{a}·{b} defined for non-composable arrows")),
                    (None, true) => return bad(format!("{a}·{b} undefined for composable arrows")),
                    (None, false) => {}
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                let Some(ab) = self.compose[a][b] else { continue };
                for c in 0..k {
                    if let Some(bc) = self.compose[b][c] {
                        if self.compose[ab][c] != self.compose[a][bc] {
                            return bad(format!("composition not associative at ({a}, {b}, {c})"));
                        }
                    }
                }
            }
        }
        for x in 0..o {
            self.identity(x).ok_or_else(|| Error::InvalidGroupoid(format!("object {x} has no identity")))?;
        }
        for g in 0..k {
            let inv = self.inverse[g];
            let left = self.compose[g][inv];
            let right = self.compose[inv][g];
            if left != self.identity(arr[g].tgt) || right != self.identity(arr[g].src) {
                return bad(format!("arrow {g} and its inverse {inv} do not compose to identities"));
            }
        }
        Ok(())
    }

    /// The loop at `x` that is a two-sided unit for composition.
    pub fn identity(&self, x: usize) -> Option<usize> {
        let k = self.arrows.len();
        (0..k).find(|&u| {
            self.arrows[u].src == x
                && self.arrows[u].tgt == x
                && (0..k).all(|g| {
                    (self.arrows[g].tgt != x || self.compose[u][g] == Some(g))
                        && (self.arrows[g].src != x || self.compose[g][u] == Some(g))
                })
        })
    }
}

/// All ordered pairs of `n` points. Arrow `(i, j)` goes from `j` to `i` and
/// has index `i*n + j`, so subsets of arrows are relations under the same
/// bit layout as [`BoolMatrix::mask`].
pub fn pair_groupoid(n: usize) -> Result<FiniteGroupoid> {
    if n == 0 {
        return Err(Error::InvalidGroupoid("pair groupoid needs at least one object".into()));
    }
    let objects = (1..=n).map(|i| i.to_string()).collect();
    let arrows = (0..n * n)
        .map(|a| Arrow { src: a % n, tgt: a / n, id: format!("({},{})", a / n + 1, a % n + 1) })
        .collect();
    let compose = (0..n * n)
        .map(|a| (0..n * n).map(|b| (a % n == b / n).then_some((a / n) * n + b % n)).collect())
        .collect();
    let inverse = (0..n * n).map(|a| (a % n) * n + a / n).collect();
    Ok(FiniteGroupoid { objects, arrows, compose, inverse })
}

/// A groupoid whose only arrows are identities.
pub fn space_groupoid(n: usize) -> FiniteGroupoid {
    FiniteGroupoid {
        objects: (1..=n).map(|i| i.to_string()).collect(),
        arrows: (0..n).map(|i| Arrow { src: i, tgt: i, id: format!("1_{}", i + 1) }).collect(),
        compose: (0..n).map(|a| (0..n).map(|b| (a == b).then_some(a)).collect()).collect(),
        inverse: (0..n).collect(),
    }
}

/// The quantale of all subsets of arrows, indexed by bitmask. Product is
/// pointwise composition, involution pointwise inverse, order inclusion.
pub fn groupoid_quantale(g: &FiniteGroupoid) -> Result<FiniteQuantale> {
    g.validate()?;
    let k = g.arrows.len();
    if k > GROUPOID_ARROW_CAP {
        return Err(Error::TooLarge(format!(
            "{k} arrows give 2^{k} subsets; restrict to at most {GROUPOID_ARROW_CAP} arrows"
        )));
    }
    let size = 1usize << k;
    // row[a][v]: the composites a·b for b in v
    let mut row = vec![vec![0usize; size]; k];
    for (a, r) in row.iter_mut().enumerate() {
        for v in 1..size {
            let b = v.trailing_zeros() as usize;
            let hit = g.compose[a][b].map_or(0, |c| 1 << c);
            r[v] = r[v & (v - 1)] | hit;
        }
    }
    let mut prod = vec![vec![0usize; size]; size];
    for u in 1..size {
        let a = u.trailing_zeros() as usize;
        let (done, rest) = prod.split_at_mut(u);
        let prev = &done[u & (u - 1)];
        for v in 0..size {
            rest[0][v] = prev[v] | row[a][v];
        }
    }
    let leq = (0..size).map(|u| (0..size).map(|v| u & v == u).collect()).collect();
    let inv = (0..size)
        .map(|u| (0..k).filter(|&a| u >> a & 1 == 1).map(|a| 1 << g.inverse[a]).sum())
        .collect();
    FiniteQuantale::new(leq, prod, inv, None)
}

/// `M_n(2)` with elements indexed by [`BoolMatrix::mask`].
pub fn relation_quantale(n: usize) -> Result<FiniteQuantale> {
    let all = BoolMatrix::all(n)?;
    let leq = all.iter().map(|s| all.iter().map(|t| s.is_subset(t).expect("same n")).collect()).collect();
    let prod = all
        .iter()
        .map(|s| all.iter().map(|t| bool_product(s, t).expect("same n").mask()).collect())
        .collect();
    let inv = all.iter().map(|s| bool_involution(s).mask()).collect();
    FiniteQuantale::new(leq, prod, inv, None)
}

/// The element map `O(G) → M_n(2)` induced by sending the arrow from `j`
/// to `i` to the pair `(i, j)`. Errors unless `G` has exactly one arrow per
/// ordered pair of objects.
pub fn pair_relation_map(g: &FiniteGroupoid) -> Result<Vec<usize>> {
    g.validate()?;
    let n = g.objects.len();
    if g.arrows.len() != n * n || g.arrows.len() > GROUPOID_ARROW_CAP {
        return Err(Error::InvalidGroupoid("not a pair groupoid within the size cap".into()));
    }
    let mut bit_of = vec![0usize; g.arrows.len()];
    let mut seen = vec![false; n * n];
    for (a, arrow) in g.arrows.iter().enumerate() {
        let b = arrow.tgt * n + arrow.src;
        if std::mem::replace(&mut seen[b], true) {
            return Err(Error::InvalidGroupoid(format!("two arrows from {} to {}", arrow.src, arrow.tgt)));
        }
        bit_of[a] = b;
    }
    Ok((0..1usize << g.arrows.len())
        .map(|u| bit_of.iter().enumerate().filter(|&(a, _)| u >> a & 1 == 1).map(|(_, &b)| 1 << b).sum())
        .collect())
}

/// Entries where some basis matrix of `p` exceeds `eps` in modulus. A
/// coordinate that vanishes on a basis vanishes on the whole span.
pub fn supp(p: &Subspace, tol: Tolerance) -> BoolMatrix {
    let n = p.n();
    let mut s = BoolMatrix::empty(n);
    for a in p.basis() {
        for i in 0..n {
            for j in 0..n {
                if a.get(i, j).norm() > tol.eps() {
                    s.set(i, j, true);
                }
            }
        }
    }
    s
}

/// Matrices vanishing outside `u`: the span of the matching matrix units.
pub fn iota(u: &BoolMatrix) -> Result<Subspace> {
    let n = u.n();
    let units = u.pairs().map(|(i, j)| ComplexMatrix::unit(n, i, j));
    Subspace::canonicalize(n, units, Tolerance::default())
}

/// The carrier `ι(M_n(2))` with retraction `P ↦ ι(supp P)`.
pub fn groupoid_observer(n: usize, tol: Tolerance) -> Result<ObserverContext<MaxMn>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let relations = BoolMatrix::all(n)?;
    let carrier = relations.iter().map(iota).collect::<Result<Vec<_>>>()?;
    let labels = relations.iter().map(|r| r.to_string()).collect();
    let retraction = move |p: &Subspace| iota(&supp(p, tol));
    ObserverContext::new(MaxMn::new(n, tol), carrier, labels, Box::new(retraction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finquant::{check_axioms, check_homomorphism};
    use crate::maxa::spin_half_fixtures;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn relation_algebra_examples() {
        let s = BoolMatrix::from_pairs(2, [(0, 1)]);
        let t = BoolMatrix::from_pairs(2, [(1, 0)]);
        assert_eq!(bool_product(&s, &t).unwrap(), BoolMatrix::from_pairs(2, [(0, 0)]));
        let id = BoolMatrix::identity(3);
        for m in [0b101_010_001usize, 0b111_000_000, 0] {
            let r = BoolMatrix::from_mask(3, m);
            assert_eq!(bool_product(&id, &r).unwrap(), r);
            assert_eq!(bool_product(&r, &id).unwrap(), r);
        }
        assert_eq!(bool_product(&BoolMatrix::full(3), &BoolMatrix::full(3)).unwrap(), BoolMatrix::full(3));
        assert_eq!(bool_involution(&s), t);
        assert!(bool_product(&s, &BoolMatrix::full(3)).is_err());
        assert_eq!(s.to_string(), "{(1,2)}");
    }

    #[test]
    fn pair_groupoids_validate() {
        assert!(pair_groupoid(0).is_err());
        let g1 = pair_groupoid(1).unwrap();
        assert_eq!((g1.objects.len(), g1.arrows.len()), (1, 1));
        let g2 = pair_groupoid(2).unwrap();
        assert_eq!(g2.arrows.len(), 4);
        assert_eq!((0..2).filter_map(|x| g2.identity(x)).count(), 2);
        let g3 = pair_groupoid(3).unwrap();
        assert_eq!(g3.arrows.len(), 9);
        g3.validate().unwrap();
        // (3,2)·(2,1) = (3,1)
        assert_eq!(g3.compose[2 * 3 + 1][3], Some(2 * 3));
    }

    #[test]
    fn broken_groupoids_are_rejected() {
        let mut g = pair_groupoid(2).unwrap();
        g.inverse[1] = 1;
        assert!(matches!(g.validate(), Err(Error::InvalidGroupoid(_))));
        let mut g = pair_groupoid(2).unwrap();
        g.compose[0][1] = None;
        assert!(g.validate().is_err());
        let mut g = pair_groupoid(2).unwrap();
        g.compose[0][0] = Some(1);
        assert!(g.validate().is_err());
    }

    #[test]
    fn groupoid_json_round_trip() {
        let g = pair_groupoid(2).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"compose\":[[0,1,null,null]"));
        assert_eq!(serde_json::from_str::<FiniteGroupoid>(&s).unwrap(), g);
    }

    #[test]
    fn pair_quantale_is_the_relation_quantale() {
        for n in 1..=3 {
            let g = pair_groupoid(n).unwrap();
            let og = groupoid_quantale(&g).unwrap();
            let rel = relation_quantale(n).unwrap();
            let map = pair_relation_map(&g).unwrap();
            let mut image = map.clone();
            image.sort();
            assert_eq!(image, (0..1 << (n * n)).collect::<Vec<_>>());
            if n <= 2 {
                assert!(check_homomorphism(&map, &og, &rel).unwrap().passed());
            } else {
                // same tables under the map, checked directly
                let k = og.size();
                for u in 0..k {
                    assert_eq!(map[og.inv(u)], rel.inv(map[u]));
                    for v in 0..k {
                        assert_eq!(map[og.prod(u, v)], rel.prod(map[u], map[v]));
                    }
                }
            }
        }
    }

    #[test]
    fn empty_subset_annihilates() {
        let q = groupoid_quantale(&pair_groupoid(2).unwrap()).unwrap();
        for u in 0..q.size() {
            assert_eq!(q.prod(0, u), 0);
            assert_eq!(q.prod(u, 0), 0);
        }
    }

    #[test]
    fn space_groupoid_gives_a_frame() {
        let q = groupoid_quantale(&space_groupoid(3)).unwrap();
        for u in 0..q.size() {
            assert_eq!(q.inv(u), u);
            for v in 0..q.size() {
                assert_eq!(q.prod(u, v), u & v);
            }
        }
        assert!(check_axioms(&q).unwrap().passed());
    }

    #[test]
    fn oversized_groupoids_are_refused() {
        let g = space_groupoid(GROUPOID_ARROW_CAP + 1);
        assert!(matches!(groupoid_quantale(&g), Err(Error::TooLarge(_))));
    }

    #[test]
    fn support_examples() {
        let fx = spin_half_fixtures();
        assert_eq!(supp(&fx["z_up"], tol()), BoolMatrix::from_pairs(2, [(0, 0)]));
        assert_eq!(supp(&fx["z"], tol()), BoolMatrix::identity(2));
        assert_eq!(supp(&fx["x_up"], tol()), BoolMatrix::full(2));
    }

    #[test]
    fn iota_examples() {
        assert!(iota(&BoolMatrix::empty(2)).unwrap().is_zero());
        let d = iota(&BoolMatrix::identity(2)).unwrap();
        assert!(d.equal(&spin_half_fixtures()["z"], tol()).unwrap());
        for u in BoolMatrix::all(2).unwrap() {
            assert_eq!(supp(&iota(&u).unwrap(), tol()), u);
        }
    }

    #[test]
    fn retraction_example() {
        let ctx = groupoid_observer(2, tol()).unwrap();
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]).unwrap();
        let p = Subspace::span(&[a], tol()).unwrap();
        let q = iota(&BoolMatrix::from_pairs(2, [(0, 0), (1, 0)])).unwrap();
        let r = ctx.retract(&p.product(&q, tol()).unwrap()).unwrap();
        assert!(r.equal(&iota(&BoolMatrix::from_pairs(2, [(0, 0)])).unwrap(), tol()).unwrap());
        assert!(ctx.retract(&Subspace::zero(2).unwrap()).unwrap().is_zero());
        for c in ctx.carrier() {
            assert!(ctx.retract(c).unwrap().equal(c, tol()).unwrap());
        }
    }
}
