//! Dense tensor-product machinery for an n-site system.
//!
//! Basis convention: product index is row-major with site 0 as the
//! slowest-varying digit, so for three qubits |100> sits at index 4.
//! The doubled space (two copies of the system) indexes as
//! `copy1 * D + copy2` where `D` is the single-copy dimension.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

pub type C64 = Complex64;

/// Dense operators (and the two-copy oracle inputs) stay small by design;
/// anything bigger belongs in the ensemble representation.
pub const DENSE_CAP: usize = 4096;

const NORM_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const EIGENVALUE_FLOOR: f64 = 1e-9;

/// Local dimensions of the n sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDims {
    dims: Vec<usize>,
}

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDims(dims));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    /// Total Hilbert-space dimension `D` (product of the local dimensions).
    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn uniform(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Product index of a digit string (one digit per site, site 0 slowest).
    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.n());
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&g, &d)| acc * d + g)
    }

    /// Digit string of a product index.
    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.n()];
        for site in (0..self.n()).rev() {
            digits[site] = index % self.dims[site];
            index /= self.dims[site];
        }
        digits
    }
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::NotSquare {
                rows: dim,
                cols: bad.len(),
            });
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Outer product `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let dim = u.len();
        debug_assert_eq!(dim, v.len());
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.set(r, c, u[r] * v[c].conj());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m.set(c, r, self.get(r, c).conj());
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| self.get(r, c) * v[c])
                    .sum()
            })
            .collect()
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for k in 0..self.dim {
                let a = self.get(r, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..self.dim {
                    let cur = out.get(r, c);
                    out.set(r, c, cur + a * other.get(k, c));
                }
            }
        }
        out
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn add_mat(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub_mat(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }
}

/// Kronecker product of square factors, left factor slowest-varying.
pub fn kron(factors: &[CMatrix]) -> Result<CMatrix> {
    let mut iter = factors.iter();
    let first = iter.next().ok_or(Error::EmptyFactors)?;
    let mut acc = first.clone();
    for f in iter {
        let (da, db) = (acc.dim(), f.dim());
        let mut out = CMatrix::zeros(da * db);
        for r1 in 0..da {
            for c1 in 0..da {
                let a = acc.get(r1, c1);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for r2 in 0..db {
                    for c2 in 0..db {
                        out.set(r1 * db + r2, c1 * db + c2, a * f.get(r2, c2));
                    }
                }
            }
        }
        acc = out;
    }
    Ok(acc)
}

/// Pure-state vector over the product space.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    dims: SystemDims,
    entries: Vec<C64>,
}

impl ComplexVector {
    pub fn new(dims: SystemDims, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dims.total() {
            return Err(Error::DimMismatch {
                expected: dims.total(),
                got: entries.len(),
            });
        }
        Ok(Self { dims, entries })
    }

    pub fn basis(dims: SystemDims, index: usize) -> Result<Self> {
        let total = dims.total();
        if index >= total {
            return Err(Error::IndexOutOfRange { index, dim: total });
        }
        let mut entries = vec![C64::new(0.0, 0.0); total];
        entries[index] = C64::new(1.0, 0.0);
        Ok(Self { dims, entries })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm, tol });
        }
        Ok(())
    }

    pub fn normalize_mut(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            for e in &mut self.entries {
                *e /= norm;
            }
        }
    }

    /// Inner product `<self|other>` (conjugate-linear in `self`).
    pub fn dot(&self, other: &Self) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch {
                expected: self.dims.total(),
                got: other.dims.total(),
            });
        }
        Ok(dot_slices(&self.entries, &other.entries))
    }
}

#[inline]
pub(crate) fn dot_slices(bra: &[C64], ket: &[C64]) -> C64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

/// Product vector from one local vector per site.
///
/// Local vectors must be unit within 1e-8; the output inherits their norms
/// (exactly-unit inputs give an exactly-unit product).
pub fn product_vector(dims: &SystemDims, locals: &[Vec<C64>]) -> Result<ComplexVector> {
    if locals.len() != dims.n() {
        return Err(Error::DimMismatch {
            expected: dims.n(),
            got: locals.len(),
        });
    }
    for (site, local) in locals.iter().enumerate() {
        if local.len() != dims.dim(site) {
            return Err(Error::DimMismatch {
                expected: dims.dim(site),
                got: local.len(),
            });
        }
        let norm = local.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm,
                tol: NORM_TOL,
            });
        }
    }
    let mut amps = vec![C64::new(1.0, 0.0)];
    for local in locals {
        let mut next = Vec::with_capacity(amps.len() * local.len());
        for &a in &amps {
            for &x in local {
                next.push(a * x);
            }
        }
        amps = next;
    }
    ComplexVector::new(dims.clone(), amps)
}

/// Density operator: a dense matrix for small systems, or a convex mixture
/// of pure states when the matrix would be too large (or the mixture is the
/// natural description).
#[derive(Debug, Clone)]
pub enum DensityForm {
    Dense(CMatrix),
    Ensemble(Vec<(f64, ComplexVector)>),
}

#[derive(Debug, Clone)]
pub struct DensityOperator {
    dims: SystemDims,
    form: DensityForm,
}

impl DensityOperator {
    /// Validated dense constructor: hermitian within 1e-10, unit trace
    /// within 1e-10, eigenvalues above -1e-9 (checked by shifted Cholesky).
    pub fn from_matrix(dims: SystemDims, matrix: CMatrix) -> Result<Self> {
        let total = dims.total();
        if total > DENSE_CAP {
            return Err(Error::DenseTooLarge {
                dim: total,
                max: DENSE_CAP,
            });
        }
        if matrix.dim() != total {
            return Err(Error::DimMismatch {
                expected: total,
                got: matrix.dim(),
            });
        }
        let herm = matrix.hermiticity_deviation();
        if herm > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_dev: herm });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        if !linalg::psd_within(&matrix, EIGENVALUE_FLOOR) {
            return Err(Error::NotPositive {
                bound: EIGENVALUE_FLOOR,
            });
        }
        Ok(Self {
            dims,
            form: DensityForm::Dense(matrix),
        })
    }

    /// Validated ensemble constructor: nonnegative weights summing to 1
    /// within 1e-10, vectors unit within 1e-8.
    ///
    /// Vectors are renormalized exactly on entry so the operator has unit
    /// trace to machine precision regardless of input rounding.
    pub fn from_ensemble(dims: SystemDims, parts: Vec<(f64, ComplexVector)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidWeights {
                detail: "ensemble has no components".into(),
            });
        }
        let mut sum = 0.0;
        for (w, _) in &parts {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidWeights {
                    detail: format!("weight {w} is negative or not finite"),
                });
            }
            sum += w;
        }
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: sum });
        }
        let mut normalized = Vec::with_capacity(parts.len());
        for (w, mut v) in parts {
            if v.dims() != &dims {
                return Err(Error::DimMismatch {
                    expected: dims.total(),
                    got: v.dims().total(),
                });
            }
            v.check_normalized(NORM_TOL)?;
            v.normalize_mut();
            normalized.push((w, v));
        }
        Ok(Self {
            dims,
            form: DensityForm::Ensemble(normalized),
        })
    }

    /// Convex mixture of already-validated states over the same sites.
    pub fn mix(parts: Vec<(f64, DensityOperator)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidWeights {
                detail: "mixture has no components".into(),
            });
        }
        let dims = parts[0].1.dims.clone();
        let mut sum = 0.0;
        for (w, rho) in &parts {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidWeights {
                    detail: format!("weight {w} is negative or not finite"),
                });
            }
            sum += w;
            if rho.dims != dims {
                return Err(Error::DimMismatch {
                    expected: dims.total(),
                    got: rho.dims.total(),
                });
            }
        }
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace: sum });
        }
        let all_ensembles = parts
            .iter()
            .all(|(_, rho)| matches!(rho.form, DensityForm::Ensemble(_)));
        if all_ensembles {
            let mut combined = Vec::new();
            for (w, rho) in parts {
                if let DensityForm::Ensemble(comps) = rho.form {
                    for (p, v) in comps {
                        combined.push((w * p, v));
                    }
                }
            }
            return Ok(Self {
                dims,
                form: DensityForm::Ensemble(combined),
            });
        }
        let total = dims.total();
        let mut acc = CMatrix::zeros(total);
        for (w, rho) in &parts {
            let dense = rho.to_dense()?;
            for (slot, src) in acc.data.iter_mut().zip(dense.data()) {
                *slot += src * C64::new(*w, 0.0);
            }
        }
        Ok(Self {
            dims,
            form: DensityForm::Dense(acc),
        })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn form(&self) -> &DensityForm {
        &self.form
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.form, DensityForm::Dense(_))
    }

    pub fn as_ensemble(&self) -> Option<&[(f64, ComplexVector)]> {
        match &self.form {
            DensityForm::Ensemble(parts) => Some(parts),
            DensityForm::Dense(_) => None,
        }
    }

    /// Dense matrix of the operator (`sum_m w_m |psi_m><psi_m|` for
    /// ensembles). Subject to the dense-size cap.
    pub fn to_dense(&self) -> Result<CMatrix> {
        let total = self.dims.total();
        match &self.form {
            DensityForm::Dense(m) => Ok(m.clone()),
            DensityForm::Ensemble(parts) => {
                if total > DENSE_CAP {
                    return Err(Error::DenseTooLarge {
                        dim: total,
                        max: DENSE_CAP,
                    });
                }
                let mut acc = CMatrix::zeros(total);
                for (w, v) in parts {
                    let e = v.entries();
                    for r in 0..total {
                        if e[r] == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let wr = e[r] * C64::new(*w, 0.0);
                        for c in 0..total {
                            let cur = acc.get(r, c);
                            acc.set(r, c, cur + wr * e[c].conj());
                        }
                    }
                }
                Ok(acc)
            }
        }
    }
}

/// `<bra| rho |ket>`.
pub fn matrix_element(
    rho: &DensityOperator,
    bra: &ComplexVector,
    ket: &ComplexVector,
) -> Result<C64> {
    if bra.dims() != rho.dims() || ket.dims() != rho.dims() {
        return Err(Error::DimMismatch {
            expected: rho.dims().total(),
            got: if bra.dims() != rho.dims() {
                bra.dims().total()
            } else {
                ket.dims().total()
            },
        });
    }
    match rho.form() {
        DensityForm::Dense(m) => Ok(dot_slices(bra.entries(), &m.mul_vec(ket.entries()))),
        DensityForm::Ensemble(parts) => Ok(parts
            .iter()
            .map(|(w, psi)| {
                dot_slices(bra.entries(), psi.entries())
                    * dot_slices(psi.entries(), ket.entries())
                    * C64::new(*w, 0.0)
            })
            .sum()),
    }
}

/// `<v| rho |v>` as a real number; exactly nonnegative on ensembles.
pub fn expectation(rho: &DensityOperator, v: &ComplexVector) -> Result<f64> {
    match rho.form() {
        DensityForm::Dense(_) => Ok(matrix_element(rho, v, v)?.re),
        DensityForm::Ensemble(parts) => {
            if v.dims() != rho.dims() {
                return Err(Error::DimMismatch {
                    expected: rho.dims().total(),
                    got: v.dims().total(),
                });
            }
            Ok(parts
                .iter()
                .map(|(w, psi)| w * dot_slices(psi.entries(), v.entries()).norm_sqr())
                .sum())
        }
    }
}

/// Doubled-space tensor product `|v1> (x) |v2>` as a flat vector of
/// length `D^2`.
pub(crate) fn doubled_vector(v1: &ComplexVector, v2: &ComplexVector) -> Vec<C64> {
    let d = v1.entries().len();
    let mut out = Vec::with_capacity(d * d);
    for &a in v1.entries() {
        for &b in v2.entries() {
            out.push(a * b);
        }
    }
    out
}

/// Permutation operator on two system copies that swaps the listed sites
/// between the copies. Stored as an index map, never as a matrix.
#[derive(Debug, Clone)]
pub struct DoubledPermutation {
    dims: SystemDims,
    sites: Vec<usize>,
    map: Vec<usize>,
}

/// Build the operator swapping `sites` (0-based) between copy 1 and copy 2.
/// An empty list gives the identity; all sites give the full two-copy swap.
pub fn build_swap(dims: &SystemDims, sites: &[usize]) -> Result<DoubledPermutation> {
    let n = dims.n();
    let mut sites = sites.to_vec();
    sites.sort_unstable();
    sites.dedup();
    if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfRange { site: bad, n });
    }
    let total = dims.total();
    let mut map = vec![0usize; total * total];
    for a in 0..total {
        let digits_a = dims.digits_of(a);
        for b in 0..total {
            let mut ga = digits_a.clone();
            let mut gb = dims.digits_of(b);
            for &s in &sites {
                std::mem::swap(&mut ga[s], &mut gb[s]);
            }
            map[a * total + b] = dims.index_of(&ga) * total + dims.index_of(&gb);
        }
    }
    Ok(DoubledPermutation {
        dims: dims.clone(),
        sites,
        map,
    })
}

impl DoubledPermutation {
    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Basis map: the operator sends `|e_t>` to `|e_map[t]>`.
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Apply to a doubled-space vector: `out[map[t]] = v[t]`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.map.len() {
            return Err(Error::DimMismatch {
                expected: self.map.len(),
                got: v.len(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (t, &image) in self.map.iter().enumerate() {
            out[image] = v[t];
        }
        Ok(out)
    }

    /// Apply the adjoint (= inverse, since the operator is a permutation).
    pub fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.map.len() {
            return Err(Error::DimMismatch {
                expected: self.map.len(),
                got: v.len(),
            });
        }
        Ok(self.map.iter().map(|&image| v[image]).collect())
    }

    pub fn is_involution(&self) -> bool {
        self.map.iter().enumerate().all(|(t, &u)| self.map[u] == t)
    }
}
