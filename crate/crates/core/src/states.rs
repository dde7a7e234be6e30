//! State constructions used throughout: GHZ/W/anti-W pure states, the
//! noisy one- and two-parameter qubit families built from them, a
//! three-qubit mixture of biseparable pure states, and seeded random
//! states (k-separable by construction, or fully general of given rank).

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{
    C64, CMatrix, ComplexVector, DENSE_CAP, DensityOperator, SystemDims,
};

/// Weight-sum slack for family parameters arriving from scan grids, where
/// the top edge can overshoot 1 by a rounding error.
const GRID_SLACK: f64 = 1e-9;

/// `(|0...0> + |1...1>)/sqrt(2)` on n qubits.
pub fn ghz(n: usize) -> Result<ComplexVector> {
    let dims = SystemDims::qubits(n)?;
    let total = dims.total();
    let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut entries = vec![C64::new(0.0, 0.0); total];
    entries[0] = amp;
    entries[total - 1] = amp;
    ComplexVector::new(dims, entries)
}

/// Equal superposition of the n basis states with a single 1.
pub fn w_state(n: usize) -> Result<ComplexVector> {
    let dims = SystemDims::qubits(n)?;
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut entries = vec![C64::new(0.0, 0.0); dims.total()];
    for site in 0..n {
        entries[1 << (n - 1 - site)] = amp;
    }
    ComplexVector::new(dims, entries)
}

/// Equal superposition of the n basis states with a single 0 (the W state
/// with every qubit flipped).
pub fn anti_w(n: usize) -> Result<ComplexVector> {
    let dims = SystemDims::qubits(n)?;
    let total = dims.total();
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut entries = vec![C64::new(0.0, 0.0); total];
    for site in 0..n {
        entries[(total - 1) ^ (1 << (n - 1 - site))] = amp;
    }
    ComplexVector::new(dims, entries)
}

/// A point in one of the named noisy qubit families. Any weight left over
/// after the named pure parts goes to white noise `I / 2^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyPoint {
    /// `alpha |GHZ><GHZ| + beta |W><W| + noise`.
    GhzW { n: usize, alpha: f64, beta: f64 },
    /// `beta |W><W| + noise`.
    WNoise { n: usize, beta: f64 },
    /// `a |W><W| + b |antiW><antiW| + noise`.
    WAntiW { n: usize, a: f64, b: f64 },
}

impl FamilyPoint {
    pub fn n(&self) -> usize {
        match *self {
            FamilyPoint::GhzW { n, .. }
            | FamilyPoint::WNoise { n, .. }
            | FamilyPoint::WAntiW { n, .. } => n,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            FamilyPoint::GhzW { .. } => "gw",
            FamilyPoint::WNoise { .. } => "w-noise",
            FamilyPoint::WAntiW { .. } => "w-antiw",
        }
    }

    /// The (p1, p2) coordinates as they appear in scan output; one-parameter
    /// families report p2 = 0.
    pub fn params(&self) -> (f64, f64) {
        match *self {
            FamilyPoint::GhzW { alpha, beta, .. } => (alpha, beta),
            FamilyPoint::WNoise { beta, .. } => (beta, 0.0),
            FamilyPoint::WAntiW { a, b, .. } => (a, b),
        }
    }
}

/// Build the density operator for a family point as an ensemble: the named
/// pure states plus, when the weights leave room, all `2^n` basis states
/// carrying the white-noise remainder.
pub fn family_state(point: &FamilyPoint) -> Result<DensityOperator> {
    let n = point.n();
    let dims = SystemDims::qubits(n)?;
    let total = dims.total();
    // the noise part alone is 2^n components of length 2^n
    if total > DENSE_CAP {
        return Err(Error::DenseTooLarge {
            dim: total,
            max: DENSE_CAP,
        });
    }

    let mut named: Vec<(f64, ComplexVector)> = Vec::new();
    let mut push = |w: f64, v: ComplexVector| -> Result<()> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidWeights {
                detail: format!("family weight {w} is negative or not finite"),
            });
        }
        if w > 0.0 {
            named.push((w, v));
        }
        Ok(())
    };
    match *point {
        FamilyPoint::GhzW { alpha, beta, .. } => {
            push(alpha, ghz(n)?)?;
            push(beta, w_state(n)?)?;
        }
        FamilyPoint::WNoise { beta, .. } => {
            push(beta, w_state(n)?)?;
        }
        FamilyPoint::WAntiW { a, b, .. } => {
            push(a, w_state(n)?)?;
            push(b, anti_w(n)?)?;
        }
    }

    let mut sum: f64 = named.iter().map(|(w, _)| w).sum();
    if sum > 1.0 + GRID_SLACK {
        return Err(Error::InvalidWeights {
            detail: format!("family weights sum to {sum}, exceeding 1"),
        });
    }
    if sum > 1.0 {
        // grid-edge rounding: renormalize the named weights onto the simplex
        for (w, _) in &mut named {
            *w /= sum;
        }
        sum = 1.0;
    }

    let noise = (1.0 - sum) / total as f64;
    let mut parts = named;
    if noise > 0.0 {
        for idx in 0..total {
            parts.push((noise, ComplexVector::basis(dims.clone(), idx)?));
        }
    }
    DensityOperator::from_ensemble(dims, parts)
}

/// Three-qubit mixture of one biseparable pure state per bipartition:
/// `p1 |0>(|00>+|11>) + p2` (site 2 split off) `+ p3` (site 3 split off),
/// each normalized. Every such mixture is 2-separable.
pub fn biseparable_triple(p1: f64, p2: f64, p3: f64) -> Result<DensityOperator> {
    let dims = SystemDims::qubits(3)?;
    let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut parts = Vec::new();
    for (w, pair) in [(p1, [0usize, 3]), (p2, [0, 5]), (p3, [0, 6])] {
        let mut entries = vec![C64::new(0.0, 0.0); 8];
        entries[pair[0]] = amp;
        entries[pair[1]] = amp;
        parts.push((w, ComplexVector::new(dims.clone(), entries)?));
    }
    DensityOperator::from_ensemble(dims, parts)
}

/// A set partition of sites `0..n` into non-empty blocks, in canonical
/// form: sites ascending inside each block, blocks ordered by first site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidWeights {
                    detail: "partition contains an empty block".into(),
                });
            }
            for &site in block {
                if site >= n {
                    return Err(Error::SiteOutOfRange { site, n });
                }
                if seen[site] {
                    return Err(Error::InvalidWeights {
                        detail: format!("site {site} appears in two partition blocks"),
                    });
                }
                seen[site] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidWeights {
                detail: "partition does not cover every site".into(),
            });
        }
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

/// Uniformly random partition of `0..n` into exactly `k` blocks, by
/// rejection: label sites uniformly in `0..k` until all labels appear.
/// Acceptance odds are worst at k = n and still fall only like e^{-n}.
pub fn random_partition<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<Partition> {
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    loop {
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut used = vec![false; k];
        for &l in &labels {
            used[l] = true;
        }
        if !used.iter().all(|&u| u) {
            continue;
        }
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (site, &l) in labels.iter().enumerate() {
            blocks[l].push(site);
        }
        return Partition::new(n, blocks);
    }
}

/// Haar-random unit vector on `dim` complex dimensions.
fn haar_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let mut v = rng::complex_gaussians(rng, dim);
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Assemble one pure state that is a product across the partition blocks,
/// with an independent Haar vector on each block.
fn block_product<R: Rng>(
    dims: &SystemDims,
    partition: &Partition,
    rng: &mut R,
) -> Result<ComplexVector> {
    let block_vecs: Vec<Vec<C64>> = partition
        .blocks()
        .iter()
        .map(|block| {
            let block_dim: usize = block.iter().map(|&s| dims.dim(s)).product();
            haar_vector(rng, block_dim)
        })
        .collect();
    let total = dims.total();
    let mut entries = Vec::with_capacity(total);
    for t in 0..total {
        let digits = dims.digits_of(t);
        let mut amp = C64::new(1.0, 0.0);
        for (block, vec) in partition.blocks().iter().zip(&block_vecs) {
            let sub = block
                .iter()
                .fold(0usize, |acc, &s| acc * dims.dim(s) + digits[s]);
            amp *= vec[sub];
        }
        entries.push(amp);
    }
    ComplexVector::new(dims.clone(), entries)
}

/// Seeded mixture of `components` pure states, each a product across a
/// uniformly random k-block partition — k-separable by construction.
/// Mixing weights are flat-Dirichlet.
pub fn random_k_separable(
    dims: &SystemDims,
    k: usize,
    components: usize,
    seed: u64,
) -> Result<DensityOperator> {
    if k < 2 || k > dims.n() {
        return Err(Error::KOutOfRange { k, n: dims.n() });
    }
    let mut rng = rng::seeded(seed);
    let weights = rng::dirichlet_flat(&mut rng, components);
    let mut parts = Vec::with_capacity(components);
    for w in weights {
        let partition = random_partition(dims.n(), k, &mut rng)?;
        parts.push((w, block_product(dims, &partition, &mut rng)?));
    }
    DensityOperator::from_ensemble(dims.clone(), parts)
}

/// Seeded random density matrix of the given rank: the normalized Gram
/// matrix of `rank` complex-Gaussian rows, which is positive by
/// construction.
pub fn random_density(dims: &SystemDims, rank: usize, seed: u64) -> Result<DensityOperator> {
    let total = dims.total();
    if rank == 0 || rank > total {
        return Err(Error::RankOutOfRange { rank, dim: total });
    }
    if total > DENSE_CAP {
        return Err(Error::DenseTooLarge {
            dim: total,
            max: DENSE_CAP,
        });
    }
    let mut rng = rng::seeded(seed);
    let rows: Vec<Vec<C64>> = (0..rank)
        .map(|_| rng::complex_gaussians(&mut rng, total))
        .collect();
    let trace: f64 = rows
        .iter()
        .flat_map(|row| row.iter().map(|x| x.norm_sqr()))
        .sum();
    let mut m = CMatrix::zeros(total);
    for a in 0..total {
        let diag: f64 = rows.iter().map(|row| row[a].norm_sqr()).sum();
        m.set(a, a, C64::new(diag / trace, 0.0));
        for b in (a + 1)..total {
            let v: C64 = rows.iter().map(|row| row[a].conj() * row[b]).sum();
            let scaled = v / trace;
            m.set(a, b, scaled);
            m.set(b, a, scaled.conj());
        }
    }
    DensityOperator::from_matrix(dims.clone(), m)
}
