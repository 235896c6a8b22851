//! Dense complex linear algebra on small truncated Hilbert spaces.
//!
//! Operators live on tensor products of 2- or 3-level sites; superoperators
//! act on column-stacked (vectorized) density matrices. The column-stacking
//! convention is fixed globally: `vec(ρ)` concatenates the columns of ρ, so
//! that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Solve, UPLO};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Per-site truncation levels of a tensor-product Hilbert space.
///
/// Site 0 is the leftmost factor in every Kronecker product. For the
/// two-transmon device, site 0 is qubit 1 (the dephased qubit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertDims {
    per_site_levels: Vec<usize>,
}

impl HilbertDims {
    pub fn new(per_site_levels: &[usize]) -> Result<Self> {
        if per_site_levels.is_empty() {
            return Err(Error::DimensionMismatch("no sites".into()));
        }
        for &d in per_site_levels {
            if d != 2 && d != 3 {
                return Err(Error::UnsupportedTruncation(d));
            }
        }
        Ok(Self {
            per_site_levels: per_site_levels.to_vec(),
        })
    }

    /// Two two-level transmons.
    pub fn two_qubits() -> Self {
        Self {
            per_site_levels: vec![2, 2],
        }
    }

    /// Two three-level transmons (anharmonicity resolved).
    pub fn two_transmons() -> Self {
        Self {
            per_site_levels: vec![3, 3],
        }
    }

    pub fn per_site_levels(&self) -> &[usize] {
        &self.per_site_levels
    }

    pub fn num_sites(&self) -> usize {
        self.per_site_levels.len()
    }

    pub fn total_dim(&self) -> usize {
        self.per_site_levels.iter().product()
    }
}

/// Square complex matrix acting on a truncated Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    mat: Array2<C64>,
}

impl OperatorMatrix {
    pub fn from_array(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DimensionMismatch(
                "operator entries must be finite".into(),
            ));
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Array2::eye(dim),
        }
    }

    /// |to⟩⟨from| on a `dim`-dimensional space.
    pub fn transition(dim: usize, to: usize, from: usize) -> Self {
        let mut mat = Array2::zeros((dim, dim));
        mat[(to, from)] = C64::new(1.0, 0.0);
        Self { mat }
    }

    /// Diagonal operator from real entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut mat = Array2::zeros((dim, dim));
        for (k, &e) in entries.iter().enumerate() {
            mat[(k, k)] = C64::new(e, 0.0);
        }
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_array(self) -> Array2<C64> {
        self.mat
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            mat: self.mat.t().mapv(|z| z.conj()),
        }
    }

    pub fn dot(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.dot(&other.mat),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            mat: self.mat.mapv(|z| z * factor),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: ndarray::linalg::kron(&self.mat, &other.mat),
        }
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.sub(&self.dagger()).max_abs() <= tol
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        let (vals, _) = self
            .mat
            .eigh(UPLO::Lower)
            .map_err(|e| Error::DimensionMismatch(format!("eigh failed: {e}")))?;
        Ok(vals.to_vec())
    }

    /// ⟨ψ|A|ψ⟩ for a (not necessarily normalized) state vector.
    pub fn expectation_vec(&self, psi: &Array1<C64>) -> C64 {
        let apsi = self.mat.dot(psi);
        psi.iter().zip(apsi.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Truncated lowering operator with entries √k at (k−1, k).
pub fn ladder_op(d: usize) -> Result<OperatorMatrix> {
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedTruncation(d));
    }
    let mut mat = Array2::zeros((d, d));
    for k in 1..d {
        mat[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    Ok(OperatorMatrix { mat })
}

/// Kronecker-embed a single-site operator, identities on all other sites.
pub fn embed(op: &OperatorMatrix, site: usize, dims: &HilbertDims) -> Result<OperatorMatrix> {
    let sites = dims.num_sites();
    if site >= sites {
        return Err(Error::SiteOutOfRange { site, sites });
    }
    let expected = dims.per_site_levels()[site];
    if op.dim() != expected {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} does not match site {} levels {}",
            op.dim(),
            site,
            expected
        )));
    }
    let mut out = OperatorMatrix::identity(1);
    for (k, &d) in dims.per_site_levels().iter().enumerate() {
        let factor = if k == site {
            op.clone()
        } else {
            OperatorMatrix::identity(d)
        };
        out = out.kron(&factor);
    }
    Ok(out)
}

/// Column-stack a square matrix: vec([[a,b],[c,d]]) = (a, c, b, d).
pub fn vectorize(op: &OperatorMatrix) -> Array1<C64> {
    vectorize_array(op.mat())
}

pub fn vectorize_array(mat: &Array2<C64>) -> Array1<C64> {
    let n = mat.nrows();
    let mut v = Array1::zeros(n * n);
    for j in 0..n {
        for i in 0..n {
            v[j * n + i] = mat[(i, j)];
        }
    }
    v
}

/// Inverse of [`vectorize`]; errors unless the length is a perfect square.
pub fn unvectorize(v: &Array1<C64>) -> Result<OperatorMatrix> {
    let n2 = v.len();
    let n = (n2 as f64).sqrt().round() as usize;
    if n * n != n2 {
        return Err(Error::NonSquareLength(n2));
    }
    let mut mat = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            mat[(i, j)] = v[j * n + i];
        }
    }
    Ok(OperatorMatrix { mat })
}

/// Superoperator acting on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct SuperOperatorMatrix {
    mat: Array2<C64>,
    dim: usize,
}

impl SuperOperatorMatrix {
    pub fn from_array(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "superoperator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let n2 = mat.nrows();
        let n = (n2 as f64).sqrt().round() as usize;
        if n * n != n2 {
            return Err(Error::NonSquareLength(n2));
        }
        Ok(Self { mat, dim: n })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Array2::zeros((dim * dim, dim * dim)),
            dim,
        }
    }

    /// Hilbert-space dimension (the superoperator is dim²×dim²).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim2(&self) -> usize {
        self.dim * self.dim
    }

    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
            dim: self.dim,
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            mat: self.mat.mapv(|z| z * factor),
            dim: self.dim,
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn apply_vec(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// Apply to an operator in matrix form.
    pub fn apply(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator dim {} vs operator dim {}",
                self.dim,
                op.dim()
            )));
        }
        unvectorize(&self.apply_vec(&vectorize(op)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigendecomposition of the (generally non-normal) superoperator.
    pub fn eig(&self) -> Result<(Array1<C64>, Array2<C64>)> {
        self.mat
            .eig()
            .map_err(|e| Error::DimensionMismatch(format!("eig failed: {e}")))
    }

    /// Solve (S − z·Id) x = b.
    pub fn solve_shifted(&self, shift: C64, b: &Array1<C64>) -> Result<Array1<C64>> {
        let mut m = self.mat.clone();
        for k in 0..self.dim2() {
            m[(k, k)] -= shift;
        }
        m.solve(b)
            .map_err(|e| Error::DimensionMismatch(format!("shifted solve failed: {e}")))
    }
}

/// Superoperator for ρ ↦ AρB; with column stacking this is Bᵀ ⊗ A.
pub fn sandwich_superop(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<SuperOperatorMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sandwich factors differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let bt = OperatorMatrix {
        mat: b.mat().t().to_owned(),
    };
    SuperOperatorMatrix::from_array(bt.kron(a).into_array())
}

/// Superoperator for the commutator part −i[H, ·].
pub fn commutator_superop(h: &OperatorMatrix) -> Result<SuperOperatorMatrix> {
    let id = OperatorMatrix::identity(h.dim());
    let left = sandwich_superop(h, &id)?;
    let right = sandwich_superop(&id, h)?;
    Ok(left.add(&right.scale_re(-1.0)).scale(C64::new(0.0, -1.0)))
}
