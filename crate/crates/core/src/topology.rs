//! Finite topologies as explicit lists of open sets.

use std::collections::{HashMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::order::Poset;

/// Upper bound on the number of opens enumerated when generating a
/// topology (upper sets, hyperspace topologies).
pub const MAX_OPENS: usize = 1 << 16;

pub fn bitset(k: usize, members: impl IntoIterator<Item = usize>) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(k);
    for m in members {
        b.insert(m);
    }
    b
}

pub fn full_set(k: usize) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(k);
    b.insert_range(..);
    b
}

fn union(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut u = a.clone();
    u.union_with(b);
    u
}

fn intersection(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut u = a.clone();
    u.intersect_with(b);
    u
}

/// A topology on `{0, .., k-1}`. Opens are kept in the order given, with
/// duplicates removed.
#[derive(Debug, Clone)]
pub struct Topology {
    k: usize,
    opens: Vec<FixedBitSet>,
    index: HashMap<FixedBitSet, usize>,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.opens.len() == other.opens.len()
            && self.opens.iter().all(|o| other.index.contains_key(o))
    }
}

impl Topology {
    /// Validates that the family contains the empty and full sets and is
    /// closed under binary unions and intersections.
    pub fn new(k: usize, opens: Vec<FixedBitSet>) -> Result<Self> {
        let t = Self::unchecked(k, opens)?;
        if !t.index.contains_key(&FixedBitSet::with_capacity(k)) {
            return Err(Error::InvalidTopology("empty set is not open".into()));
        }
        if !t.index.contains_key(&full_set(k)) {
            return Err(Error::InvalidTopology("whole set is not open".into()));
        }
        for (i, a) in t.opens.iter().enumerate() {
            for (j, b) in t.opens.iter().enumerate().skip(i + 1) {
                if !t.index.contains_key(&union(a, b)) {
                    return Err(Error::InvalidTopology(format!("union of opens {i} and {j} is not open")));
                }
                if !t.index.contains_key(&intersection(a, b)) {
                    return Err(Error::InvalidTopology(format!(
                        "intersection of opens {i} and {j} is not open"
                    )));
                }
            }
        }
        Ok(t)
    }

    fn unchecked(k: usize, opens: Vec<FixedBitSet>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut kept = Vec::new();
        for o in opens {
            if o.ones().any(|x| x >= k) {
                return Err(Error::InvalidTopology(format!("open set mentions a point outside 0..{k}")));
            }
            let o = bitset(k, o.ones());
            if !index.contains_key(&o) {
                index.insert(o.clone(), kept.len());
                kept.push(o);
            }
        }
        Ok(Self { k, opens: kept, index })
    }

    pub fn from_index_lists(k: usize, opens: &[Vec<usize>]) -> Result<Self> {
        for o in opens {
            if let Some(&x) = o.iter().find(|&&x| x >= k) {
                return Err(Error::InvalidTopology(format!("open set mentions point {x} outside 0..{k}")));
            }
        }
        Self::new(k, opens.iter().map(|o| bitset(k, o.iter().copied())).collect())
    }

    /// Closes a family of subsets under finite intersections and then
    /// arbitrary unions, adding the empty and full sets.
    pub fn generated_by(k: usize, subbasis: &[FixedBitSet]) -> Result<Self> {
        let mut basis: HashSet<FixedBitSet> = HashSet::new();
        basis.insert(full_set(k));
        let mut queue: VecDeque<FixedBitSet> = VecDeque::from([full_set(k)]);
        while let Some(b) = queue.pop_front() {
            for s in subbasis {
                let i = intersection(&b, s);
                if basis.insert(i.clone()) {
                    if basis.len() > MAX_OPENS {
                        return Err(Error::TooLarge(format!("more than {MAX_OPENS} basic opens")));
                    }
                    queue.push_back(i);
                }
            }
        }
        let mut basis: Vec<FixedBitSet> = basis.into_iter().collect();
        basis.sort_by(|a, b| a.ones().cmp(b.ones()));
        Self::unions_of(k, &basis)
    }

    fn unions_of(k: usize, basis: &[FixedBitSet]) -> Result<Self> {
        let empty = FixedBitSet::with_capacity(k);
        let mut seen: HashSet<FixedBitSet> = HashSet::from([empty.clone()]);
        let mut order = vec![empty.clone()];
        let mut queue = VecDeque::from([empty]);
        while let Some(u) = queue.pop_front() {
            for b in basis {
                let v = union(&u, b);
                if seen.insert(v.clone()) {
                    if seen.len() > MAX_OPENS {
                        return Err(Error::TooLarge(format!("more than {MAX_OPENS} opens")));
                    }
                    order.push(v.clone());
                    queue.push_back(v);
                }
            }
        }
        Self::unchecked(k, order)
    }

    /// The Alexandrov topology of a poset: all upper sets.
    pub fn upper_sets(order: &Poset) -> Result<Self> {
        let k = order.size();
        let principal: Vec<FixedBitSet> = (0..k).map(|a| bitset(k, order.up(a))).collect();
        Self::unions_of(k, &principal)
    }

    pub fn discrete(k: usize) -> Result<Self> {
        let singletons: Vec<FixedBitSet> = (0..k).map(|a| bitset(k, [a])).collect();
        Self::unions_of(k, &singletons)
    }

    pub fn indiscrete(k: usize) -> Self {
        Self::unchecked(k, vec![FixedBitSet::with_capacity(k), full_set(k)]).expect("in range")
    }

    pub fn points(&self) -> usize {
        self.k
    }

    pub fn opens(&self) -> &[FixedBitSet] {
        &self.opens
    }

    pub fn is_open(&self, set: &FixedBitSet) -> bool {
        self.index.contains_key(set)
    }

    pub fn open_index(&self, set: &FixedBitSet) -> Option<usize> {
        self.index.get(set).copied()
    }

    /// Smallest open set containing `x`.
    pub fn neighbourhood(&self, x: usize) -> FixedBitSet {
        let mut n = full_set(self.k);
        for o in self.opens.iter().filter(|o| o.contains(x)) {
            n.intersect_with(o);
        }
        n
    }

    pub fn neighbourhoods(&self) -> Vec<FixedBitSet> {
        (0..self.k).map(|x| self.neighbourhood(x)).collect()
    }

    /// Closed sets, as complements of the opens (same order).
    pub fn closed_sets(&self) -> Vec<FixedBitSet> {
        self.opens
            .iter()
            .map(|o| {
                let mut c = o.clone();
                c.toggle_range(..);
                c
            })
            .collect()
    }

    /// Smallest closed set containing `set`.
    pub fn closure(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut c = full_set(self.k);
        for o in &self.opens {
            if o.is_disjoint(set) {
                let mut comp = o.clone();
                comp.toggle_range(..);
                c.intersect_with(&comp);
            }
        }
        c
    }

    /// Whether a set of pairs is open in the product topology, i.e. a union
    /// of open rectangles. Returns the first pair with no open rectangle
    /// around it inside the set.
    pub fn product_open_violation(
        &self,
        other: &Topology,
        contains: impl Fn(usize, usize) -> bool,
    ) -> Option<(usize, usize)> {
        let left = self.neighbourhoods();
        let right = other.neighbourhoods();
        for a in 0..self.k {
            for b in 0..other.k {
                if !contains(a, b) {
                    continue;
                }
                let inside = left[a].ones().all(|x| right[b].ones().all(|y| contains(x, y)));
                if !inside {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Specialization preorder: `a <= b` iff every open containing `a`
    /// contains `b`.
    pub fn specialization(&self) -> Vec<Vec<bool>> {
        let nb = self.neighbourhoods();
        (0..self.k).map(|a| (0..self.k).map(|b| nb[a].contains(b)).collect()).collect()
    }

    pub fn index_lists(&self) -> Vec<Vec<usize>> {
        self.opens.iter().map(|o| o.ones().collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sierpinski() -> Topology {
        Topology::from_index_lists(2, &[vec![], vec![1], vec![0, 1]]).unwrap()
    }

    #[test]
    fn validates_closure() {
        assert!(Topology::from_index_lists(2, &[vec![], vec![0], vec![1]]).is_err());
        assert!(Topology::from_index_lists(2, &[vec![0], vec![0, 1]]).is_err());
        assert!(Topology::from_index_lists(2, &[vec![], vec![2]]).is_err());
        assert_eq!(sierpinski().opens().len(), 3);
    }

    #[test]
    fn neighbourhoods_and_closure() {
        let t = sierpinski();
        assert_eq!(t.neighbourhood(0), bitset(2, [0, 1]));
        assert_eq!(t.neighbourhood(1), bitset(2, [1]));
        assert_eq!(t.closure(&bitset(2, [1])), bitset(2, [0, 1]));
        assert_eq!(t.closure(&bitset(2, [0])), bitset(2, [0]));
        let spec = t.specialization();
        assert!(spec[0][1] && !spec[1][0]);
    }

    #[test]
    fn generated_topologies() {
        assert_eq!(Topology::discrete(3).unwrap().opens().len(), 8);
        assert_eq!(Topology::indiscrete(3).opens().len(), 2);
        let chain = Poset::new(vec![vec![true, true, true], vec![false, true, true], vec![false, false, true]]).unwrap();
        // upper sets of a 3-chain: {}, {2}, {1,2}, {0,1,2}
        assert_eq!(Topology::upper_sets(&chain).unwrap().opens().len(), 4);
        let g = Topology::generated_by(3, &[bitset(3, [0, 1]), bitset(3, [1, 2])]).unwrap();
        assert!(g.is_open(&bitset(3, [1])));
        assert_eq!(g.opens().len(), 5);
    }

    #[test]
    fn product_openness() {
        let t = sierpinski();
        // {(1,1)} is the rectangle {1}x{1}
        assert!(t.product_open_violation(&t, |a, b| a == 1 && b == 1).is_none());
        // {(0,0)} is not open
        assert_eq!(t.product_open_violation(&t, |a, b| a == 0 && b == 0), Some((0, 0)));
    }
}
