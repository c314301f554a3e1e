//! Seeded random subspaces for sampled law checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::subspace::{ComplexMatrix, Subspace, Tolerance};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let entries = (0..n * n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    ComplexMatrix::new(n, entries).expect("finite entries")
}

/// Span of a uniformly chosen number (0 to `n²`) of random matrices.
pub fn random_subspace<R: Rng>(rng: &mut R, n: usize, tol: Tolerance) -> Subspace {
    let k = rng.random_range(0..=n * n);
    let gens: Vec<ComplexMatrix> = (0..k).map(|_| random_matrix(rng, n)).collect();
    Subspace::canonicalize(n, gens, tol).expect("n >= 1")
}

/// A random unitary from Gram-Schmidt on the columns of a random matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|i| a.get(i, j)).collect();
        for u in &cols {
            let c: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= c * ui;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    let mut u = ComplexMatrix::zeros(n);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            u.set(i, j, x);
        }
    }
    u
}

/// `U·P` for a random unitary `U` and a coordinate projection `P` of
/// random rank 1 to `n`. It satisfies `V V* V = V`.
pub fn random_partial_isometry<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let rank = rng.random_range(1..=n);
    let mut p = ComplexMatrix::zeros(n);
    for i in 0..rank {
        p.set(i, i, 1.0.into());
    }
    random_unitary(rng, n).mul(&p)
}
