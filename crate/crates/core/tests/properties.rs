//! Property-based checks of the structural invariants: things that must
//! hold for *every* state and probe, not just the worked examples.

use proptest::prelude::*;

use ksep::criteria::{theorem1, theorem1_with_eps};
use ksep::probes::{Probe, catalog};
use ksep::rng::{complex_gaussians, seeded};
use ksep::states::{random_density, random_k_separable, random_partition};
use ksep::tensor::{
    C64, CMatrix, ComplexVector, DensityOperator, SystemDims, build_swap, kron, matrix_element,
    product_vector,
};

const EPS: f64 = 1e-9;

fn random_matrix(dim: usize, seed: u64) -> CMatrix {
    let entries = complex_gaussians(&mut seeded(seed), dim * dim);
    let mut m = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            m.set(r, c, entries[r * dim + c]);
        }
    }
    m
}

fn qubit_dims(n: usize) -> SystemDims {
    SystemDims::qubits(n).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Grouping does not matter for Kronecker products.
    #[test]
    fn kron_is_associative(seed in 0u64..1_000_000, d1 in 2usize..4, d2 in 2usize..3, d3 in 2usize..3) {
        let a = random_matrix(d1, seed);
        let b = random_matrix(d2, seed ^ 0xABCD);
        let c = random_matrix(d3, seed ^ 0x1234);
        let left = kron(&[kron(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = kron(&[a, kron(&[b, c]).unwrap()]).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
    }

    /// The doubled-space site swap is an involution: applying it twice
    /// returns exactly the input vector.
    #[test]
    fn swap_is_an_involution(seed in 0u64..1_000_000, n in 2usize..4, mask in 1usize..7) {
        let dims = qubit_dims(n);
        let sites: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!sites.is_empty());
        let swap = build_swap(&dims, &sites).unwrap();
        let d2 = dims.total() * dims.total();
        let v = complex_gaussians(&mut seeded(seed), d2);
        let twice = swap.apply(&swap.apply(&v).unwrap()).unwrap();
        prop_assert_eq!(v, twice);
    }

    /// Matrix elements agree between the ensemble form and its densified
    /// matrix.
    #[test]
    fn dense_and_ensemble_matrix_elements_agree(seed in 0u64..1_000_000, n in 2usize..4) {
        let dims = qubit_dims(n);
        let rho = random_k_separable(&dims, 2, 3, seed).unwrap();
        let dense = DensityOperator::from_matrix(dims.clone(), rho.to_dense().unwrap()).unwrap();
        let probe = Probe::random(&dims, seed ^ 0x55).unwrap();
        let vecs = probe.expand();
        for i in 0..n {
            for j in 0..n {
                let a = matrix_element(&rho, vecs.single(i), vecs.single(j)).unwrap();
                let b = matrix_element(&dense, vecs.single(i), vecs.single(j)).unwrap();
                prop_assert!((a - b).norm() <= 1e-10);
            }
        }
    }

    /// Multiplying any local probe vector by a unit phase moves every
    /// report field by less than 1e-10.
    #[test]
    fn reports_are_global_phase_invariant(
        seed in 0u64..1_000_000,
        site in 0usize..3,
        angle in 0.0f64..std::f64::consts::TAU,
        flip_side in proptest::bool::ANY,
    ) {
        let n = 3;
        let dims = qubit_dims(n);
        let rho = random_density(&dims, 4, seed).unwrap();
        let probe = Probe::random(&dims, seed ^ 0x99).unwrap();

        let phase = C64::from_polar(1.0, angle);
        let mut base: Vec<Vec<C64>> = (0..n).map(|l| probe.base(l).to_vec()).collect();
        let mut flipped: Vec<Vec<C64>> = (0..n).map(|l| probe.flipped(l).to_vec()).collect();
        let target = if flip_side { &mut flipped } else { &mut base };
        for entry in &mut target[site] {
            *entry *= phase;
        }
        let rotated = Probe::custom(&dims, base, flipped, "rotated").unwrap();

        let before = theorem1(&rho, &probe, 2).unwrap();
        let after = theorem1(&rho, &rotated, 2).unwrap();
        prop_assert!((before.lhs - after.lhs).abs() < 1e-10);
        prop_assert!((before.rhs_pair - after.rhs_pair).abs() < 1e-10);
        prop_assert!((before.rhs_diag - after.rhs_diag).abs() < 1e-10);
        prop_assert!((before.margin - after.margin).abs() < 1e-10);
    }

    /// Permuting the sites of the state and the probe identically leaves
    /// the report unchanged.
    #[test]
    fn reports_are_site_permutation_covariant(seed in 0u64..1_000_000, rot in 1usize..3) {
        let n = 3;
        let dims = qubit_dims(n);
        // perm[new_site] = old_site, a cyclic rotation
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();

        let rho = random_k_separable(&dims, 2, 3, seed).unwrap();
        let parts = rho.as_ensemble().unwrap();
        let permuted_parts: Vec<(f64, ComplexVector)> = parts
            .iter()
            .map(|(w, psi)| {
                let mut entries = vec![C64::new(0.0, 0.0); dims.total()];
                for idx in 0..dims.total() {
                    let digits = dims.digits_of(idx);
                    let new_digits: Vec<usize> = (0..n).map(|s| digits[perm[s]]).collect();
                    entries[dims.index_of(&new_digits)] = psi.entries()[idx];
                }
                (*w, ComplexVector::new(dims.clone(), entries).unwrap())
            })
            .collect();
        let rho_perm = DensityOperator::from_ensemble(dims.clone(), permuted_parts).unwrap();

        let probe = Probe::random(&dims, seed ^ 0x77).unwrap();
        let probe_perm = Probe::custom(
            &dims,
            (0..n).map(|s| probe.base(perm[s]).to_vec()).collect(),
            (0..n).map(|s| probe.flipped(perm[s]).to_vec()).collect(),
            "permuted",
        )
        .unwrap();

        let before = theorem1(&rho, &probe, 2).unwrap();
        let after = theorem1(&rho_perm, &probe_perm, 2).unwrap();
        prop_assert!((before.lhs - after.lhs).abs() < 1e-10);
        prop_assert!((before.rhs_pair - after.rhs_pair).abs() < 1e-10);
        prop_assert!((before.rhs_diag - after.rhs_diag).abs() < 1e-10);
        prop_assert!((before.margin - after.margin).abs() < 1e-10);
    }

    /// The margin is convex in the state: mixing cannot increase it above
    /// the average of the endpoints.
    #[test]
    fn margin_is_convex_along_segments(seed in 0u64..1_000_000, k in 2usize..4) {
        let dims = qubit_dims(3);
        let rho0 = random_density(&dims, 3, seed).unwrap();
        let rho1 = random_density(&dims, 3, seed ^ 0xF00D).unwrap();
        let mid = DensityOperator::mix(vec![(0.5, rho0.clone()), (0.5, rho1.clone())]).unwrap();
        for probe in catalog(&dims).unwrap() {
            let m0 = theorem1(&rho0, &probe, k).unwrap().margin;
            let m1 = theorem1(&rho1, &probe, k).unwrap().margin;
            let mm = theorem1(&mid, &probe, k).unwrap().margin;
            prop_assert!(mm <= 0.5 * (m0 + m1) + 1e-10);
        }
    }

    /// Detection is monotone in k: a level-k violation implies one at
    /// every level above it.
    #[test]
    fn detection_is_monotone_in_k(seed in 0u64..1_000_000) {
        let dims = qubit_dims(4);
        let rho = random_density(&dims, 2, seed).unwrap();
        for probe in catalog(&dims).unwrap() {
            let mut detected_before = false;
            for k in 2..=4 {
                let report = theorem1_with_eps(&rho, &probe, k, EPS).unwrap();
                prop_assert!(!detected_before || report.detected);
                detected_before = report.detected;
            }
        }
    }

    /// Reports never have negative aggregates, whatever the state.
    #[test]
    fn report_aggregates_are_nonnegative(seed in 0u64..1_000_000, n in 2usize..5) {
        let dims = qubit_dims(n);
        let rank = 1 + seed as usize % dims.total().min(5);
        let rho = random_density(&dims, rank, seed).unwrap();
        let probe = Probe::random(&dims, seed ^ 0x31).unwrap();
        let report = theorem1(&rho, &probe, 2).unwrap();
        prop_assert!(report.lhs >= 0.0);
        prop_assert!(report.rhs_pair >= 0.0);
        prop_assert!(report.rhs_diag >= 0.0);
        prop_assert!(report.detected == (report.margin > EPS));
    }

    /// Expanded probe vectors are unit norm, and there are
    /// 1 + n + n(n-1)/2 of them.
    #[test]
    fn expanded_probe_vectors_are_normalized(seed in 0u64..1_000_000, n in 2usize..5) {
        let dims = qubit_dims(n);
        let probe = Probe::random(&dims, seed).unwrap();
        let vecs = probe.expand();
        prop_assert_eq!(vecs.count(), 1 + n + n * (n - 1) / 2);
        prop_assert!((vecs.phi().norm() - 1.0).abs() <= 1e-12);
        for i in 0..n {
            prop_assert!((vecs.single(i).norm() - 1.0).abs() <= 1e-12);
            for j in (i + 1)..n {
                prop_assert!((vecs.pair(i, j).norm() - 1.0).abs() <= 1e-12);
            }
        }
    }

    /// Random partitions have exactly k disjoint blocks covering 0..n.
    #[test]
    fn random_partitions_are_valid(seed in 0u64..1_000_000, n in 2usize..6, k_off in 0usize..4) {
        let k = 2 + k_off % (n - 1).max(1);
        prop_assume!(k <= n);
        let partition = random_partition(n, k, &mut seeded(seed)).unwrap();
        prop_assert_eq!(partition.blocks().len(), k);
        let mut seen = vec![false; n];
        for block in partition.blocks() {
            prop_assert!(!block.is_empty());
            for &site in block {
                prop_assert!(!seen[site], "site {} appears twice", site);
                seen[site] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    /// Product vectors of normalized locals are normalized.
    #[test]
    fn product_vectors_are_normalized(seed in 0u64..1_000_000, n in 2usize..5) {
        let dims = qubit_dims(n);
        let locals: Vec<Vec<C64>> = (0..n)
            .map(|site| {
                let mut v = complex_gaussians(&mut seeded(seed ^ (site as u64) << 32), 2);
                let norm = (v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
                for z in &mut v {
                    *z /= norm;
                }
                v
            })
            .collect();
        let product = product_vector(&dims, &locals).unwrap();
        prop_assert!((product.norm() - 1.0).abs() <= 1e-8);
    }
}
