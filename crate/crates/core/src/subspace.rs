//! Linear subspaces of the matrix algebra M_n(C).
//!
//! A [`Subspace`] is stored as an orthonormal basis under the trace inner
//! product `<A, B> = tr(A* B)`, i.e. M_n(C) is treated as the Hilbert space
//! C^{n*n}. Every rank decision goes through [`Tolerance::negligible`].
//!
//! The operations implement the involutive quantale structure of the
//! subspace lattice: join is the sum, meet is the intersection, the product
//! is the span of pairwise products and the involution is the pointwise
//! adjoint.

use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric::round_sig;

pub const DEFAULT_EPS: f64 = 1e-9;

/// Rank threshold shared by every subspace computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    eps: f64,
}

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps.is_finite() {
            Ok(Self { eps })
        } else {
            Err(Error::BadTolerance(eps))
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `true` when `residual` is below `eps * scale`.
    pub fn negligible(&self, residual: f64, scale: f64) -> bool {
        residual < self.eps * scale
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eps: DEFAULT_EPS }
    }
}

/// Dense n x n complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        if entries.len() != n * n {
            return Err(Error::BadShape { expected: n * n, got: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, entries })
    }

    /// Builds a real matrix from rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::BadShape { expected: n * n, got: n * row.len() });
            }
            entries.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::new(n, entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix unit E_ij (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.entries[i * n + j] = Complex64::new(1.0, 0.0);
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.entries[i * self.n + j] = value;
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        out
    }

    /// Trace inner product tr(self* other), conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum()
    }

    /// Norm induced by the trace inner product (Frobenius norm).
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { n: self.n, entries: self.entries.iter().map(|z| z * c).collect() }
    }

    /// `self -= c * other`
    fn sub_scaled(&mut self, c: Complex64, other: &Self) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a -= c * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.sub_scaled(Complex64::new(1.0, 0.0), other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.sub_scaled(Complex64::new(-1.0, 0.0), other);
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.n {
                let z = self.get(i, j);
                if j > 0 {
                    write!(f, ", ")?;
                }
                if z.im == 0.0 {
                    write!(f, "{}", z.re)?;
                } else {
                    write!(f, "{}{:+}i", z.re, z.im)?;
                }
            }
        }
        write!(f, "]")
    }
}

// Flat row-major list of [re, im] pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> =
            self.entries.iter().map(|z| [round_sig(z.re), round_sig(z.im)]).collect();
        pairs.serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Flat(Vec<[f64; 2]>),
    Rows(Vec<Vec<[f64; 2]>>),
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (n, pairs) = match MatrixDoc::deserialize(d)? {
            MatrixDoc::Flat(pairs) => {
                let n = (pairs.len() as f64).sqrt().round() as usize;
                (n, pairs)
            }
            MatrixDoc::Rows(rows) => (rows.len(), rows.into_iter().flatten().collect()),
        };
        let entries = pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(n, entries).map_err(D::Error::custom)
    }
}

/// A linear subspace of M_n(C) held as an orthonormal basis.
#[derive(Clone)]
pub struct Subspace {
    n: usize,
    basis: Vec<ComplexMatrix>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace").field("n", &self.n).field("dim", &self.dim()).finish()
    }
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(a, b))
    }
}

/// Sequential Gram-Schmidt (two passes per vector). Vectors whose residual
/// falls below `eps * (1 + |g|)` are dropped.
fn orthonormalize(
    mut basis: Vec<ComplexMatrix>,
    generators: impl IntoIterator<Item = ComplexMatrix>,
    tol: Tolerance,
) -> Vec<ComplexMatrix> {
    for g in generators {
        let norm = g.norm();
        let mut v = g;
        for _ in 0..2 {
            for b in &basis {
                let c = b.inner(&v);
                v.sub_scaled(c, b);
            }
        }
        let r = v.norm();
        if tol.negligible(r, 1.0 + norm) {
            continue;
        }
        basis.push(v.scale(Complex64::new(1.0 / r, 0.0)));
    }
    basis
}

fn projection(basis: &[ComplexMatrix], a: &ComplexMatrix) -> ComplexMatrix {
    let mut residual = a.clone();
    for _ in 0..2 {
        for b in basis {
            let c = b.inner(&residual);
            residual.sub_scaled(c, b);
        }
    }
    a.sub(&residual)
}

fn residual_norm(basis: &[ComplexMatrix], a: &ComplexMatrix) -> f64 {
    a.sub(&projection(basis, a)).norm()
}

impl Subspace {
    /// The zero subspace of M_n(C).
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { n, basis: Vec::new() })
    }

    /// All of M_n(C), spanned by the matrix units.
    pub fn full(n: usize) -> Result<Self> {
        let units = (0..n * n).map(|k| ComplexMatrix::unit(n, k / n, k % n)).collect::<Vec<_>>();
        Self::canonicalize(n, units, Tolerance::default())
    }

    /// Span of the generators, in canonical orthonormal form.
    ///
    /// Generators are processed in the given order, so equal inputs yield
    /// bit-identical bases.
    pub fn canonicalize(
        n: usize,
        generators: impl IntoIterator<Item = ComplexMatrix>,
        tol: Tolerance,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let generators: Vec<ComplexMatrix> = generators.into_iter().collect();
        for g in &generators {
            check_same(n, g.n)?;
        }
        Ok(Self { n, basis: orthonormalize(Vec::new(), generators, tol) })
    }

    /// Like [`Subspace::canonicalize`], inferring `n` from the first generator.
    pub fn span(generators: &[ComplexMatrix], tol: Tolerance) -> Result<Self> {
        let n = generators.first().map(|g| g.n).ok_or(Error::ZeroDimension)?;
        Self::canonicalize(n, generators.iter().cloned(), tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn join(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        check_same(self.n, other.n)?;
        Self::canonicalize(self.n, self.basis.iter().chain(&other.basis).cloned(), tol)
    }

    /// Orthogonal complement inside the n*n-dimensional ambient space.
    pub fn complement(&self, tol: Tolerance) -> Self {
        let n = self.n;
        let units = (0..n * n).map(|k| ComplexMatrix::unit(n, k / n, k % n));
        let all = orthonormalize(self.basis.clone(), units, tol);
        Self { n, basis: all[self.basis.len()..].to_vec() }
    }

    /// Intersection, computed as the complement of the sum of complements.
    pub fn meet(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        check_same(self.n, other.n)?;
        let sum = self.complement(tol).join(&other.complement(tol), tol)?;
        Ok(sum.complement(tol))
    }

    /// Span of all products `a b` with `a` in `self` and `b` in `other`.
    pub fn product(&self, other: &Self, tol: Tolerance) -> Result<Self> {
        check_same(self.n, other.n)?;
        let products = self
            .basis
            .iter()
            .flat_map(|a| other.basis.iter().map(move |b| a.mul(b)))
            .collect::<Vec<_>>();
        Self::canonicalize(self.n, products, tol)
    }

    pub fn involution(&self, tol: Tolerance) -> Self {
        Self { n: self.n, basis: orthonormalize(Vec::new(), self.basis.iter().map(|b| b.adjoint()), tol) }
    }

    /// `true` when every basis vector of `other` lies in `self` up to `eps`.
    pub fn contains(&self, other: &Self, tol: Tolerance) -> Result<bool> {
        check_same(self.n, other.n)?;
        Ok(other.basis.iter().all(|q| tol.negligible(residual_norm(&self.basis, q), 1.0)))
    }

    pub fn contains_matrix(&self, a: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
        check_same(self.n, a.n)?;
        Ok(tol.negligible(residual_norm(&self.basis, a), 1.0 + a.norm()))
    }

    pub fn equal(&self, other: &Self, tol: Tolerance) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.contains(other, tol)? && other.contains(self, tol)?)
    }

    /// Orthogonal projection of `a` onto the subspace.
    pub fn project(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_same(self.n, a.n)?;
        Ok(projection(&self.basis, a))
    }

    /// Distance from `a` to the subspace in the trace norm.
    pub fn distance(&self, a: &ComplexMatrix) -> Result<f64> {
        check_same(self.n, a.n)?;
        Ok(residual_norm(&self.basis, a))
    }

    /// Membership of the subspace in the lower Vietoris sub-basic open
    /// `<>U` for `U` the open ball of the given radius around `center`.
    pub fn meets_ball(&self, center: &ComplexMatrix, radius: f64) -> Result<bool> {
        Ok(self.distance(center)? < radius)
    }

    /// Orthogonal projector onto the subspace as an (n*n) x (n*n) matrix,
    /// row-major. Independent of the chosen basis.
    pub fn projector(&self) -> Vec<Complex64> {
        let d = self.n * self.n;
        let mut p = vec![Complex64::new(0.0, 0.0); d * d];
        for b in &self.basis {
            let e = b.entries();
            for i in 0..d {
                if e[i] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    p[i * d + j] += e[i] * e[j].conj();
                }
            }
        }
        p
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceDoc {
    n: usize,
    generators: Vec<ComplexMatrix>,
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceDoc { n: self.n, generators: self.basis.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = SubspaceDoc::deserialize(d)?;
        Subspace::canonicalize(doc.n, doc.generators, Tolerance::default()).map_err(D::Error::custom)
    }
}
