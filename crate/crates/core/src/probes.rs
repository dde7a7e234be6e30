//! Probes: one pair of single-site vectors `(x_l, x~_l)` per site. The
//! pair at each site must be non-parallel but is *not* required to be
//! orthogonal. Expanding a probe produces the product vectors the
//! criteria take matrix elements in:
//!
//! * `phi` — base vector at every site,
//! * `phi_i` — flipped at site i,
//! * `phi_ij` — flipped at sites i and j.

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{C64, ComplexVector, SystemDims, product_vector};

const NORM_TOL: f64 = 1e-8;
const PARALLEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Probe {
    dims: SystemDims,
    base: Vec<Vec<C64>>,
    flipped: Vec<Vec<C64>>,
    label: String,
}

impl Probe {
    /// `x_l = |0>`, `x~_l = |1>` everywhere.
    pub fn computational(dims: &SystemDims) -> Result<Self> {
        let base = (0..dims.n()).map(|s| unit(dims.dim(s), 0)).collect();
        let flipped = (0..dims.n()).map(|s| unit(dims.dim(s), 1)).collect();
        Self::custom(dims, base, flipped, "computational")
    }

    /// `x_l = (|0>+|1>)/sqrt2`, `x~_l = (|0>-|1>)/sqrt2` everywhere.
    pub fn diagonal_45(dims: &SystemDims) -> Result<Self> {
        let base = (0..dims.n()).map(|s| plus_minus(dims.dim(s), 1.0)).collect();
        let flipped = (0..dims.n())
            .map(|s| plus_minus(dims.dim(s), -1.0))
            .collect();
        Self::custom(dims, base, flipped, "45")
    }

    /// Site 0 carries `(|0>-|1>)/sqrt2` as base and `(|0>+|1>)/sqrt2` as
    /// flipped; every other site the opposite. The sign mismatch makes the
    /// all-base product orthogonal to GHZ while each singly-flipped product
    /// overlaps it.
    pub fn phase_flip(dims: &SystemDims) -> Result<Self> {
        let base = (0..dims.n())
            .map(|s| plus_minus(dims.dim(s), if s == 0 { -1.0 } else { 1.0 }))
            .collect();
        let flipped = (0..dims.n())
            .map(|s| plus_minus(dims.dim(s), if s == 0 { 1.0 } else { -1.0 }))
            .collect();
        Self::custom(dims, base, flipped, "phase-flip")
    }

    /// Independent Haar-random orthonormal pair at every site.
    pub fn random(dims: &SystemDims, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, 0x70726f6265); // probe-draw stream
        let mut base = Vec::with_capacity(dims.n());
        let mut flipped = Vec::with_capacity(dims.n());
        for site in 0..dims.n() {
            let d = dims.dim(site);
            let x = normalized(rng::complex_gaussians(&mut rng, d));
            // Gram-Schmidt a second draw against the first
            let mut y = rng::complex_gaussians(&mut rng, d);
            let overlap: C64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi -= overlap * xi;
            }
            base.push(x);
            flipped.push(normalized(y));
        }
        Self::custom(dims, base, flipped, format!("random:{seed}"))
    }

    /// Arbitrary per-site pairs. Vectors must be unit within 1e-8 (they are
    /// renormalized exactly on entry) and each pair non-parallel.
    pub fn custom(
        dims: &SystemDims,
        base: Vec<Vec<C64>>,
        flipped: Vec<Vec<C64>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = dims.n();
        if base.len() != n || flipped.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: if base.len() != n {
                    base.len()
                } else {
                    flipped.len()
                },
            });
        }
        let mut base = base;
        let mut flipped = flipped;
        for site in 0..n {
            for v in [&mut base[site], &mut flipped[site]] {
                if v.len() != dims.dim(site) {
                    return Err(Error::DimMismatch {
                        expected: dims.dim(site),
                        got: v.len(),
                    });
                }
                let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > NORM_TOL {
                    return Err(Error::NotNormalized {
                        norm,
                        tol: NORM_TOL,
                    });
                }
                for x in v.iter_mut() {
                    *x /= norm;
                }
            }
            let overlap: C64 = base[site]
                .iter()
                .zip(&flipped[site])
                .map(|(a, b)| a.conj() * b)
                .sum();
            if overlap.norm() > 1.0 - PARALLEL_TOL {
                return Err(Error::ParallelPair {
                    site,
                    overlap: overlap.norm(),
                });
            }
        }
        Ok(Self {
            dims: dims.clone(),
            base,
            flipped,
            label: label.into(),
        })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.n()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn base(&self, site: usize) -> &[C64] {
        &self.base[site]
    }

    pub fn flipped(&self, site: usize) -> &[C64] {
        &self.flipped[site]
    }

    /// The `1 + n + n(n-1)/2` product vectors the criteria evaluate.
    pub fn expand(&self) -> ProbeVectors {
        let n = self.n();
        let build = |flips: &[usize]| -> ComplexVector {
            let locals: Vec<Vec<C64>> = (0..n)
                .map(|s| {
                    if flips.contains(&s) {
                        self.flipped[s].clone()
                    } else {
                        self.base[s].clone()
                    }
                })
                .collect();
            product_vector(&self.dims, &locals).expect("probe locals are validated")
        };
        let phi = build(&[]);
        let singles = (0..n).map(|i| build(&[i])).collect();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push(build(&[i, j]));
            }
        }
        ProbeVectors {
            n,
            phi,
            singles,
            pairs,
        }
    }
}

fn unit(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[index] = C64::new(1.0, 0.0);
    v
}

fn plus_minus(dim: usize, sign: f64) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[0] = C64::new(s, 0.0);
    v[1] = C64::new(sign * s, 0.0);
    v
}

fn normalized(mut v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Expanded probe vectors, indexed by which sites are flipped.
#[derive(Debug, Clone)]
pub struct ProbeVectors {
    n: usize,
    phi: ComplexVector,
    singles: Vec<ComplexVector>,
    pairs: Vec<ComplexVector>,
}

impl ProbeVectors {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self) -> &ComplexVector {
        &self.phi
    }

    pub fn single(&self, i: usize) -> &ComplexVector {
        &self.singles[i]
    }

    /// The vector with sites i and j flipped; order of i, j is immaterial.
    pub fn pair(&self, i: usize, j: usize) -> &ComplexVector {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        &self.pairs[pair_index(self.n, lo, hi)]
    }

    pub fn count(&self) -> usize {
        1 + self.singles.len() + self.pairs.len()
    }

    pub fn iter_all(&self) -> impl Iterator<Item = &ComplexVector> {
        std::iter::once(&self.phi)
            .chain(self.singles.iter())
            .chain(self.pairs.iter())
    }
}

/// Row-major offset of the unordered pair (i, j), i < j, among all pairs.
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// The three named probes, in catalog order.
pub fn catalog(dims: &SystemDims) -> Result<Vec<Probe>> {
    Ok(vec![
        Probe::computational(dims)?,
        Probe::diagonal_45(dims)?,
        Probe::phase_flip(dims)?,
    ])
}

/// Catalog plus `count` random probes seeded `seed, seed+1, ...`.
pub fn catalog_with_random(dims: &SystemDims, count: usize, seed: u64) -> Result<Vec<Probe>> {
    let mut probes = catalog(dims)?;
    for i in 0..count {
        probes.push(Probe::random(dims, seed + i as u64)?);
    }
    Ok(probes)
}
