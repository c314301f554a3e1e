//! Finite partial orders given by a boolean `leq` table.
//!
//! In a finite poset every subset has a join as soon as a bottom element
//! exists and every pair has a join: the empty join is the bottom and larger
//! joins are folded pairwise. The lattice checks below rely on this.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    leq: Vec<Vec<bool>>,
}

impl Poset {
    /// Validates reflexivity, antisymmetry and transitivity.
    pub fn new(leq: Vec<Vec<bool>>) -> Result<Self> {
        let k = leq.len();
        if let Some(i) = leq.iter().position(|row| row.len() != k) {
            return Err(Error::InvalidTable(format!("leq row {i} has wrong length")));
        }
        for a in 0..k {
            if !leq[a][a] {
                return Err(Error::NotPartialOrder(format!("not reflexive at {a}")));
            }
            for b in 0..k {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(Error::NotPartialOrder(format!("not antisymmetric at ({a}, {b})")));
                }
                if !leq[a][b] {
                    continue;
                }
                for c in 0..k {
                    if leq[b][c] && !leq[a][c] {
                        return Err(Error::NotPartialOrder(format!(
                            "not transitive at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(Self { leq })
    }

    pub fn size(&self) -> usize {
        self.leq.len()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn table(&self) -> &[Vec<bool>] {
        &self.leq
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.size()).find(|&b| (0..self.size()).all(|x| self.leq[b][x]))
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.size()).find(|&t| (0..self.size()).all(|x| self.leq[x][t]))
    }

    /// Least upper bound, if it exists.
    pub fn join(&self, a: usize, b: usize) -> Option<usize> {
        let k = self.size();
        let upper: Vec<usize> = (0..k).filter(|&u| self.leq[a][u] && self.leq[b][u]).collect();
        upper.iter().copied().find(|&u| upper.iter().all(|&v| self.leq[u][v]))
    }

    /// Greatest lower bound, if it exists.
    pub fn meet(&self, a: usize, b: usize) -> Option<usize> {
        let k = self.size();
        let lower: Vec<usize> = (0..k).filter(|&l| self.leq[l][a] && self.leq[l][b]).collect();
        lower.iter().copied().find(|&l| lower.iter().all(|&v| self.leq[v][l]))
    }

    /// First pair without a join, scanning in index order.
    pub fn missing_join(&self) -> Option<(usize, usize)> {
        let k = self.size();
        (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).find(|&(a, b)| self.join(a, b).is_none())
    }

    pub fn missing_meet(&self) -> Option<(usize, usize)> {
        let k = self.size();
        (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).find(|&(a, b)| self.meet(a, b).is_none())
    }

    /// Cover relations `(lower, upper)` in lexicographic order.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let k = self.size();
        let mut out = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if a == b || !self.leq[a][b] {
                    continue;
                }
                let between = (0..k).any(|c| c != a && c != b && self.leq[a][c] && self.leq[c][b]);
                if !between {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Upward closure of a single element.
    pub fn up(&self, a: usize) -> Vec<usize> {
        (0..self.size()).filter(|&b| self.leq[a][b]).collect()
    }

    pub fn is_upper_set(&self, set: &[bool]) -> bool {
        let k = self.size();
        (0..k).all(|a| !set[a] || (0..k).all(|b| !self.leq[a][b] || set[b]))
    }
}

/// Join and meet tables of a finite lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeOps {
    pub bottom: usize,
    pub top: usize,
    pub join: Vec<Vec<usize>>,
    pub meet: Vec<Vec<usize>>,
}

impl LatticeOps {
    pub fn from_poset(p: &Poset) -> Result<Self> {
        let k = p.size();
        let bottom = p.bottom().ok_or_else(|| Error::NotLattice("no bottom element".into()))?;
        let top = p.top().ok_or_else(|| Error::NotLattice("no top element".into()))?;
        let mut join = vec![vec![0; k]; k];
        let mut meet = vec![vec![0; k]; k];
        for a in 0..k {
            for b in 0..k {
                join[a][b] = p
                    .join(a, b)
                    .ok_or_else(|| Error::NotLattice(format!("no join of ({a}, {b})")))?;
                meet[a][b] = p
                    .meet(a, b)
                    .ok_or_else(|| Error::NotLattice(format!("no meet of ({a}, {b})")))?;
            }
        }
        Ok(Self { bottom, top, join, meet })
    }
}

/// Builds the inclusion order on a family of sets given as boolean masks.
pub fn inclusion_order(sets: &[Vec<bool>]) -> Vec<Vec<bool>> {
    sets.iter()
        .map(|a| sets.iter().map(|b| a.iter().zip(b).all(|(&x, &y)| !x || y)).collect())
        .collect()
}

/// Hasse diagram in DOT, drawn bottom to top. Node `i` carries `labels[i]`.
pub fn hasse_dot(labels: &[String], covers: &[(usize, usize)]) -> String {
    let mut out = String::from("digraph hasse {\n  rankdir=BT;\n");
    for (i, l) in labels.iter().enumerate() {
        let escaped = l.replace('\\', "\\\\").replace('"', "\\\"");
        out.push_str(&format!("  n{i} [label=\"{escaped}\"];\n"));
    }
    for (lo, hi) in covers {
        out.push_str(&format!("  n{lo} -> n{hi};\n"));
    }
    out.push_str("}\n");
    out
}
