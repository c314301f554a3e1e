//! Independent linear-algebra oracles. They use Gaussian elimination on raw
//! entry vectors and share no code with the library's subspace arithmetic.
#![allow(dead_code)]

use std::collections::BTreeSet;

use mslab_core::{Subspace, Tolerance};
use num_complex::Complex64;

pub const EPS: f64 = 1e-9;

pub fn tol() -> Tolerance {
    Tolerance::default()
}

pub fn vectors(s: &Subspace) -> Vec<Vec<Complex64>> {
    s.basis().iter().map(|m| m.entries().to_vec()).collect()
}

/// Rank by row reduction with partial pivoting, relative to the largest entry.
pub fn rank(rows: &[Vec<Complex64>]) -> usize {
    let mut m: Vec<Vec<Complex64>> = rows.to_vec();
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).max_by(|&a, &b| m[a][c].norm().total_cmp(&m[b][c].norm())) else { break };
        if m[p][c].norm() <= 1e-8 * scale {
            continue;
        }
        m.swap(r, p);
        let pivot = m[r][c];
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c] / pivot;
                let row_r = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(row_r) {
                    *x -= f * y;
                }
            }
        }
        r += 1;
    }
    r
}

pub fn join_dim(a: &Subspace, b: &Subspace) -> usize {
    let mut rows = vectors(a);
    rows.extend(vectors(b));
    rank(&rows)
}

pub fn meet_dim(a: &Subspace, b: &Subspace) -> usize {
    a.dim() + b.dim() - join_dim(a, b)
}

pub fn contains(big: &Subspace, small: &Subspace) -> bool {
    join_dim(big, small) == rank(&vectors(big))
}

pub fn equal(a: &Subspace, b: &Subspace) -> bool {
    contains(a, b) && contains(b, a)
}

pub fn mat_mul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    out
}

pub fn adjoint(n: usize, a: &[Complex64]) -> Vec<Complex64> {
    (0..n * n).map(|k| a[(k % n) * n + k / n].conj()).collect()
}

pub fn close(a: &[Complex64], b: &[Complex64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < 1e-9)
}

/// Diagonal coordinates on which some element of `s` is nonzero. The
/// diagonal observer sends `s` to the span of those matrix units.
pub fn diagonal_support(s: &Subspace) -> BTreeSet<usize> {
    let n = s.n();
    (0..n).filter(|&j| s.basis().iter().any(|m| m.get(j, j).norm() > EPS)).collect()
}

/// Coordinates on which some element of `s` is nonzero. An entry vanishes
/// on all of `s` iff it vanishes on every basis vector.
pub fn support(s: &Subspace) -> BTreeSet<(usize, usize)> {
    let n = s.n();
    (0..n * n).filter(|&e| s.basis().iter().any(|m| m.entries()[e].norm() > EPS)).map(|e| (e / n, e % n)).collect()
}
