//! Named spin fixtures in the subspace quantales of M_2(C) and M_3(C), plus
//! order diagrams and the distributivity test on triples of subspaces.
//!
//! Generators are entered unnormalized, exactly as the projections and spin
//! observables are usually written; factors of hbar are dropped because a
//! span does not see scalars.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::order::Poset;
use crate::subspace::{ComplexMatrix, Subspace, Tolerance};

/// Named subspaces of a common M_n(C), in insertion order.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    n: usize,
    named: Vec<(String, Subspace)>,
}

impl FixtureSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, name: &str) -> Result<&Subspace> {
        self.named
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::UnknownFixture(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.named.iter().map(|(k, _)| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Subspace)> {
        self.named.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn subspaces(&self) -> Vec<Subspace> {
        self.named.iter().map(|(_, v)| v.clone()).collect()
    }
}

impl std::ops::Index<&str> for FixtureSet {
    type Output = Subspace;

    fn index(&self, name: &str) -> &Subspace {
        self.get(name).expect("unknown fixture")
    }
}

impl Serialize for FixtureSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Named<'a>(&'a [(String, Subspace)]);
        impl Serialize for Named<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("n", &self.n)?;
        m.serialize_entry("named", &Named(&self.named))?;
        m.end()
    }
}

fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).expect("square fixture matrix")
}

fn span(n: usize, gens: Vec<ComplexMatrix>, tol: Tolerance) -> Subspace {
    Subspace::canonicalize(n, gens, tol).expect("fixture generators share n")
}

/// Span of all words in the generators and the identity: the unital
/// algebra they generate.
pub fn generated_algebra(n: usize, generators: &[ComplexMatrix], tol: Tolerance) -> Result<Subspace> {
    let gens = Subspace::canonicalize(n, generators.iter().cloned(), tol)?;
    let mut acc = Subspace::canonicalize(n, [ComplexMatrix::identity(n)], tol)?.join(&gens, tol)?;
    loop {
        let next = acc.join(&acc.product(&acc, tol)?, tol)?;
        if next.dim() == acc.dim() {
            return Ok(acc);
        }
        acc = next;
    }
}

pub fn spin_half_fixtures() -> FixtureSet {
    spin_half_fixtures_with(Tolerance::default())
}

pub fn spin_half_fixtures_with(tol: Tolerance) -> FixtureSet {
    let n = 2;
    let identity = ComplexMatrix::identity(n);
    let sigma_z = real(&[&[1.0, 0.0], &[0.0, -1.0]]);
    let sigma_x = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let named = vec![
        ("0", Subspace::zero(n).expect("n > 0")),
        ("e", span(n, vec![identity.clone()], tol)),
        ("1", span(n, (0..4).map(|k| ComplexMatrix::unit(n, k / 2, k % 2)).collect(), tol)),
        ("z", span(n, vec![identity.clone(), sigma_z], tol)),
        ("z_up", span(n, vec![real(&[&[1.0, 0.0], &[0.0, 0.0]])], tol)),
        ("z_down", span(n, vec![real(&[&[0.0, 0.0], &[0.0, 1.0]])], tol)),
        ("x", span(n, vec![identity, sigma_x], tol)),
        ("x_up", span(n, vec![real(&[&[1.0, 1.0], &[1.0, 1.0]])], tol)),
        ("x_down", span(n, vec![real(&[&[1.0, -1.0], &[-1.0, 1.0]])], tol)),
    ];
    FixtureSet { n, named: named.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
}

pub fn spin_one_fixtures() -> FixtureSet {
    spin_one_fixtures_with(Tolerance::default())
}

pub fn spin_one_fixtures_with(tol: Tolerance) -> FixtureSet {
    let n = 3;
    let r2 = std::f64::consts::SQRT_2;
    let s_z = ComplexMatrix::diag(&[1.0, 0.0, -1.0]);
    let s_x = real(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
    let algebra = |g: ComplexMatrix| generated_algebra(n, &[g], tol).expect("3x3 generator");
    let named = vec![
        ("z", algebra(s_z)),
        ("z_minus", span(n, vec![ComplexMatrix::diag(&[0.0, 0.0, 1.0])], tol)),
        ("z_zero", span(n, vec![ComplexMatrix::diag(&[0.0, 1.0, 0.0])], tol)),
        ("z_plus", span(n, vec![ComplexMatrix::diag(&[1.0, 0.0, 0.0])], tol)),
        ("x", algebra(s_x)),
        ("x_minus", span(n, vec![real(&[&[1.0, -r2, 1.0], &[-r2, 2.0, -r2], &[1.0, -r2, 1.0]])], tol)),
        ("x_zero", span(n, vec![real(&[&[1.0, 0.0, -1.0], &[0.0, 0.0, 0.0], &[-1.0, 0.0, 1.0]])], tol)),
        ("x_plus", span(n, vec![real(&[&[1.0, r2, 1.0], &[r2, 2.0, r2], &[1.0, r2, 1.0]])], tol)),
        ("e", span(n, vec![ComplexMatrix::identity(n)], tol)),
        ("0", Subspace::zero(n).expect("n > 0")),
        ("1", span(n, (0..9).map(|k| ComplexMatrix::unit(n, k / 3, k % 3)).collect(), tol)),
    ];
    FixtureSet { n, named: named.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
}

/// Containment order on a list of pairwise distinct subspaces.
pub fn containment_order(elements: &[Subspace], tol: Tolerance) -> Result<Poset> {
    for i in 0..elements.len() {
        for j in i + 1..elements.len() {
            if elements[i].equal(&elements[j], tol)? {
                return Err(Error::DuplicateElement(i, j));
            }
        }
    }
    let leq = elements
        .iter()
        .map(|a| elements.iter().map(|b| b.contains(a, tol)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Poset::new(leq)
}

/// Cover relations `(lower, upper)` of the containment order, as indices
/// into `elements`.
pub fn hasse(elements: &[Subspace], tol: Tolerance) -> Result<Vec<(usize, usize)>> {
    Ok(containment_order(elements, tol)?.covers())
}

#[derive(Debug, Clone)]
pub struct DistributivityWitness {
    /// `(p ∧ m) ∨ (p ∧ n)`
    pub lhs: Subspace,
    /// `p ∧ (m ∨ n)`
    pub rhs: Subspace,
    pub distributive: bool,
}

pub fn distributivity_witness(
    p: &Subspace,
    m: &Subspace,
    n: &Subspace,
    tol: Tolerance,
) -> Result<DistributivityWitness> {
    let lhs = p.meet(m, tol)?.join(&p.meet(n, tol)?, tol)?;
    let rhs = p.meet(&m.join(n, tol)?, tol)?;
    let distributive = lhs.equal(&rhs, tol)?;
    Ok(DistributivityWitness { lhs, rhs, distributive })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn fixture_invariants() {
        for f in [spin_half_fixtures(), spin_one_fixtures()] {
            let n = f.n();
            assert_eq!(f["0"].dim(), 0);
            assert_eq!(f["1"].dim(), n * n);
            let e = Subspace::span(&[ComplexMatrix::identity(n)], tol()).unwrap();
            assert!(f["e"].equal(&e, tol()).unwrap());
            for (_, s) in f.iter() {
                assert_eq!(s.n(), n);
            }
        }
    }

    #[test]
    fn spin_half_dimensions() {
        let f = spin_half_fixtures();
        assert_eq!(f["z"].dim(), 2);
        assert_eq!(f["x"].dim(), 2);
        assert_eq!(f["x_up"].dim(), 1);
        assert!(f["x"].meet(&f["z"], tol()).unwrap().equal(&f["e"], tol()).unwrap());
        assert!(!f["x"].equal(&f["z"], tol()).unwrap());
    }

    #[test]
    fn spin_one_fixtures_as_printed() {
        let f = spin_one_fixtures();
        assert_eq!(f["z"].dim(), 3);
        assert_eq!(f["x"].dim(), 3);
        let x0 = real(&[&[1.0, 0.0, -1.0], &[0.0, 0.0, 0.0], &[-1.0, 0.0, 1.0]]);
        assert!(f["x_zero"].contains_matrix(&x0, tol()).unwrap());
        assert_eq!(f["x_zero"].dim(), 1);
        assert!(f["x_zero"].product(&f["x_plus"], tol()).unwrap().is_zero());
        let z_atoms = f["z_minus"].join(&f["z_zero"], tol()).unwrap().join(&f["z_plus"], tol()).unwrap();
        assert!(z_atoms.equal(&f["z"], tol()).unwrap());
        let x_atoms = f["x_minus"].join(&f["x_zero"], tol()).unwrap().join(&f["x_plus"], tol()).unwrap();
        assert!(x_atoms.equal(&f["x"], tol()).unwrap());
    }

    #[test]
    fn unit_law_on_fixtures() {
        for f in [spin_half_fixtures(), spin_one_fixtures()] {
            let e = &f["e"];
            for (_, p) in f.iter() {
                assert!(e.product(p, tol()).unwrap().equal(p, tol()).unwrap());
                assert!(p.product(e, tol()).unwrap().equal(p, tol()).unwrap());
            }
        }
    }

    #[test]
    fn idle_measurement_meets_atoms_trivially() {
        let f = spin_half_fixtures();
        for atom in ["z_up", "z_down", "x_up", "x_down"] {
            assert!(f["e"].meet(&f[atom], tol()).unwrap().is_zero(), "{atom}");
        }
        assert!(f["z_down"].join(&f["z_up"], tol()).unwrap().equal(&f["z"], tol()).unwrap());
        assert!(f["x_down"].join(&f["x_up"], tol()).unwrap().equal(&f["x"], tol()).unwrap());
    }

    #[test]
    fn hasse_examples() {
        let f = spin_half_fixtures();
        assert!(hasse(&[f["z"].clone()], tol()).unwrap().is_empty());
        let chain = [f["0"].clone(), f["e"].clone(), f["1"].clone()];
        assert_eq!(hasse(&chain, tol()).unwrap(), vec![(0, 1), (1, 2)]);
        let dup = [f["z"].clone(), f["z"].clone()];
        assert!(matches!(hasse(&dup, tol()), Err(Error::DuplicateElement(0, 1))));
    }

    #[test]
    fn non_distributive_triple() {
        let f = spin_half_fixtures();
        let w = distributivity_witness(&f["x"], &f["z_down"], &f["z_up"], tol()).unwrap();
        assert_eq!(w.lhs.dim(), 0);
        assert!(w.rhs.equal(&f["e"], tol()).unwrap());
        assert!(!w.distributive);
        let p = &f["x"];
        assert!(distributivity_witness(p, p, p, tol()).unwrap().distributive);
    }

    #[test]
    fn coordinate_subspaces_of_the_diagonal_are_distributive() {
        let e11 = ComplexMatrix::diag(&[1.0, 0.0]);
        let e22 = ComplexMatrix::diag(&[0.0, 1.0]);
        let coord = [
            Subspace::zero(2).unwrap(),
            Subspace::span(&[e11.clone()], tol()).unwrap(),
            Subspace::span(&[e22.clone()], tol()).unwrap(),
            Subspace::span(&[e11, e22], tol()).unwrap(),
        ];
        for p in &coord {
            for m in &coord {
                for n in &coord {
                    assert!(distributivity_witness(p, m, n, tol()).unwrap().distributive);
                }
            }
        }
    }

    #[test]
    fn three_lines_in_the_diagonal_are_not_distributive() {
        let f = spin_half_fixtures();
        let w = distributivity_witness(&f["e"], &f["z_up"], &f["z_down"], tol()).unwrap();
        assert!(w.lhs.is_zero());
        assert!(w.rhs.equal(&f["e"], tol()).unwrap());
        assert!(!w.distributive);
    }
}
