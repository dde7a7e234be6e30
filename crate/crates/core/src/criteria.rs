//! The separability criteria themselves.
//!
//! The fast path never builds two copies of the state: for probe vectors
//! `phi`, `phi_i`, `phi_ij` it needs only `a = <phi|rho|phi>`, the
//! diagonals `d_i = <phi_i|rho|phi_i>` and `b_ij = <phi_ij|rho|phi_ij>`,
//! and the off-diagonal moduli `|<phi_i|rho|phi_j>|`. A state that is a
//! mixture of k-block products keeps
//!
//! ```text
//!   sum_{i != j} |<phi_i|rho|phi_j>|
//!     <= sum_{i != j} sqrt(a * b_ij) + (n - k) * sum_i d_i
//! ```
//!
//! so a positive margin (lhs minus the right-hand side) certifies that no
//! such mixture exists: the state is k-nonseparable. `two_copy_oracle`
//! evaluates the same three term families literally on `rho (x) rho` with
//! permutation operators, and exists to guard the fast path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::probes::{Probe, ProbeVectors, pair_index};
use crate::tensor::{
    C64, DensityOperator, build_swap, doubled_vector, dot_slices, expectation, kron,
    matrix_element,
};

/// Detection threshold on the margin: wide enough to swallow the
/// exact-equality case (full product states) at double precision, narrow
/// enough to keep real violations.
pub const DETECTION_EPS: f64 = 1e-9;

/// Largest single-copy dimension the literal two-copy oracle will touch.
pub const ORACLE_CAP: usize = 64;

/// One evaluation of the k-separability inequality.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub k: usize,
    pub lhs: f64,
    pub rhs_pair: f64,
    pub rhs_diag: f64,
    /// `lhs - rhs_pair - (n - k) * rhs_diag`; positive means violation.
    pub margin: f64,
    pub detected: bool,
    pub probe: String,
}

/// One pairwise inequality: `|<phi_i|rho|phi_j>| <= sqrt(a * b_ij)`.
#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub i: usize,
    pub j: usize,
    pub lhs_pair: f64,
    pub rhs_pair: f64,
    pub violated: bool,
}

/// The scalar ingredients every report is assembled from. Computing these
/// once per (state, probe) and re-assembling per k is what makes scans and
/// classification cheap.
#[derive(Debug, Clone)]
pub(crate) struct CriterionTerms {
    pub n: usize,
    /// `<phi|rho|phi>`
    pub a: f64,
    /// `<phi_i|rho|phi_i>` per site
    pub diag: Vec<f64>,
    /// `<phi_ij|rho|phi_ij>` per unordered pair, row-major
    pub pair_diag: Vec<f64>,
    /// `|<phi_i|rho|phi_j>|` per unordered pair, row-major
    pub offdiag_mod: Vec<f64>,
}

pub(crate) fn compute_terms(rho: &DensityOperator, vecs: &ProbeVectors) -> Result<CriterionTerms> {
    let n = vecs.n();
    if vecs.phi().dims() != rho.dims() {
        return Err(Error::DimMismatch {
            expected: rho.dims().total(),
            got: vecs.phi().dims().total(),
        });
    }
    let a = expectation(rho, vecs.phi())?;
    let diag: Vec<f64> = (0..n)
        .map(|i| expectation(rho, vecs.single(i)))
        .collect::<Result<_>>()?;
    let mut pair_diag = Vec::with_capacity(n * (n - 1) / 2);
    let mut offdiag_mod = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pair_diag.push(expectation(rho, vecs.pair(i, j))?);
            offdiag_mod.push(matrix_element(rho, vecs.single(i), vecs.single(j))?.norm());
        }
    }
    Ok(CriterionTerms {
        n,
        a,
        diag,
        pair_diag,
        offdiag_mod,
    })
}

/// Assemble a report at level k. Summation is i-major, j-minor over ordered
/// pairs so that identical terms always add in the same order — reports are
/// bit-identical however the terms were obtained.
pub(crate) fn assemble(
    terms: &CriterionTerms,
    k: usize,
    eps: f64,
    probe: &str,
) -> Result<CriterionReport> {
    let n = terms.n;
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let a = terms.a.max(0.0);
    let geo: Vec<f64> = terms
        .pair_diag
        .iter()
        .map(|&b| (a * b.max(0.0)).sqrt())
        .collect();
    let mut lhs = 0.0;
    let mut rhs_pair = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let idx = pair_index(n, i.min(j), i.max(j));
            lhs += terms.offdiag_mod[idx];
            rhs_pair += geo[idx];
        }
    }
    let rhs_diag: f64 = terms.diag.iter().map(|&d| d.max(0.0)).sum();
    let margin = lhs - rhs_pair - ((n - k) as f64) * rhs_diag;
    Ok(CriterionReport {
        k,
        lhs,
        rhs_pair,
        rhs_diag,
        margin,
        detected: margin > eps,
        probe: probe.to_string(),
    })
}

/// Evaluate the k-separability inequality for one probe.
pub fn theorem1(rho: &DensityOperator, probe: &Probe, k: usize) -> Result<CriterionReport> {
    theorem1_with_eps(rho, probe, k, DETECTION_EPS)
}

pub fn theorem1_with_eps(
    rho: &DensityOperator,
    probe: &Probe,
    k: usize,
    eps: f64,
) -> Result<CriterionReport> {
    let terms = compute_terms(rho, &probe.expand())?;
    assemble(&terms, k, eps, probe.label())
}

/// The uniform-probe special case: the same pair `(x, y)` at every site.
/// Requires identical local dimensions.
pub fn corollary(
    rho: &DensityOperator,
    x: &[C64],
    y: &[C64],
    k: usize,
) -> Result<CriterionReport> {
    corollary_with_eps(rho, x, y, k, DETECTION_EPS)
}

pub fn corollary_with_eps(
    rho: &DensityOperator,
    x: &[C64],
    y: &[C64],
    k: usize,
    eps: f64,
) -> Result<CriterionReport> {
    let dims = rho.dims();
    if !dims.uniform() {
        return Err(Error::HeterogeneousDims(dims.dims().to_vec()));
    }
    let n = dims.n();
    let probe = Probe::custom(
        dims,
        vec![x.to_vec(); n],
        vec![y.to_vec(); n],
        "corollary",
    )?;
    theorem1_with_eps(rho, &probe, k, eps)
}

/// The pairwise inequalities; any violation rules out full separability.
pub fn theorem2(rho: &DensityOperator, probe: &Probe) -> Result<Vec<PairReport>> {
    theorem2_with_eps(rho, probe, DETECTION_EPS)
}

pub fn theorem2_with_eps(
    rho: &DensityOperator,
    probe: &Probe,
    eps: f64,
) -> Result<Vec<PairReport>> {
    let terms = compute_terms(rho, &probe.expand())?;
    Ok(pair_reports(&terms, eps))
}

fn pair_reports(terms: &CriterionTerms, eps: f64) -> Vec<PairReport> {
    let n = terms.n;
    let a = terms.a.max(0.0);
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let idx = pair_index(n, i, j);
            let lhs_pair = terms.offdiag_mod[idx];
            let rhs_pair = (a * terms.pair_diag[idx].max(0.0)).sqrt();
            out.push(PairReport {
                i,
                j,
                lhs_pair,
                rhs_pair,
                violated: lhs_pair - rhs_pair > eps,
            });
        }
    }
    out
}

/// The three term families evaluated literally on two copies of the state,
/// already square-rooted so entries compare termwise with the fast path:
/// `lhs[i][j] ~ |<phi_i|rho|phi_j>|`, `pair[i][j] ~ sqrt(a * b_ij)`,
/// `diag[i] ~ d_i`. Diagonal slots of the pair tables are 0.
#[derive(Debug, Clone)]
pub struct OracleTerms {
    pub n: usize,
    pub lhs: Vec<Vec<f64>>,
    pub pair: Vec<Vec<f64>>,
    pub diag: Vec<f64>,
}

/// Evaluate every term of the inequality from `rho (x) rho` and the site
/// swap operators, with no algebraic shortcuts. Small systems only.
pub fn two_copy_oracle(rho: &DensityOperator, probe: &Probe) -> Result<OracleTerms> {
    let dims = rho.dims().clone();
    if probe.dims() != &dims {
        return Err(Error::DimMismatch {
            expected: dims.total(),
            got: probe.dims().total(),
        });
    }
    let total = dims.total();
    if total > ORACLE_CAP {
        return Err(Error::OracleTooLarge {
            dim: total,
            max: ORACLE_CAP,
        });
    }
    let n = dims.n();
    let dense = rho.to_dense()?;
    let two_copies = kron(&[dense.clone(), dense])?;
    let all_sites: Vec<usize> = (0..n).collect();
    let p_tot = build_swap(&dims, &all_sites)?;
    let p_site: Vec<_> = (0..n)
        .map(|i| build_swap(&dims, &[i]))
        .collect::<Result<_>>()?;
    let vecs = probe.expand();

    // <u| rho2 |w> for doubled vectors, asserting a real result
    let sandwich = |u: &[C64], w: &[C64]| -> f64 {
        let val = dot_slices(u, &two_copies.mul_vec(w));
        assert!(
            val.im.abs() <= 1e-10,
            "two-copy term has imaginary residue {:e}",
            val.im
        );
        val.re.max(0.0)
    };

    let mut lhs = vec![vec![0.0; n]; n];
    let mut pair = vec![vec![0.0; n]; n];
    let mut diag = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let phi_ij = doubled_vector(vecs.single(i), vecs.single(j));
            lhs[i][j] = sandwich(&phi_ij, &p_tot.apply(&phi_ij)?).sqrt();
            let swapped = p_site[i].apply(&phi_ij)?;
            pair[i][j] = sandwich(&swapped, &swapped).sqrt();
        }
        let phi_ii = doubled_vector(vecs.single(i), vecs.single(i));
        let swapped = p_site[i].apply(&phi_ii)?;
        diag[i] = sandwich(&swapped, &swapped).sqrt();
    }
    Ok(OracleTerms { n, lhs, pair, diag })
}

/// A probe's verdict across every level k.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeClassification {
    pub probe: String,
    /// Smallest k with a violation; `None` when nothing is detected.
    pub min_k: Option<usize>,
    /// Margins aligned with k = 2..=n.
    pub margins: Vec<f64>,
    pub theorem2_violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub n: usize,
    /// The levels reported on, always 2..=n.
    pub ks: Vec<usize>,
    pub per_probe: Vec<ProbeClassification>,
    /// Best margin per level over all probes, aligned with `ks`.
    pub best_margin: Vec<f64>,
    /// Probe achieving each best margin (first probe wins ties).
    pub best_probe: Vec<String>,
    /// Smallest detected k over all probes.
    pub min_k: Option<usize>,
}

/// Run every level against every probe and aggregate.
pub fn classify(rho: &DensityOperator, probes: &[Probe]) -> Result<Classification> {
    classify_with_eps(rho, probes, DETECTION_EPS)
}

pub fn classify_with_eps(
    rho: &DensityOperator,
    probes: &[Probe],
    eps: f64,
) -> Result<Classification> {
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    let n = rho.dims().n();
    let ks: Vec<usize> = (2..=n).collect();
    let mut per_probe = Vec::with_capacity(probes.len());
    let mut best_margin = vec![f64::NEG_INFINITY; ks.len()];
    let mut best_probe = vec![String::new(); ks.len()];
    let mut min_k: Option<usize> = None;
    for probe in probes {
        let terms = compute_terms(rho, &probe.expand())?;
        let mut margins = Vec::with_capacity(ks.len());
        let mut probe_min_k = None;
        for (slot, &k) in ks.iter().enumerate() {
            let report = assemble(&terms, k, eps, probe.label())?;
            if report.detected && probe_min_k.is_none() {
                probe_min_k = Some(k);
            }
            if report.margin > best_margin[slot] {
                best_margin[slot] = report.margin;
                best_probe[slot] = probe.label().to_string();
            }
            margins.push(report.margin);
        }
        let theorem2_violated = pair_reports(&terms, eps).iter().any(|p| p.violated);
        if let Some(k) = probe_min_k {
            min_k = Some(min_k.map_or(k, |cur: usize| cur.min(k)));
        }
        per_probe.push(ProbeClassification {
            probe: probe.label().to_string(),
            min_k: probe_min_k,
            margins,
            theorem2_violated,
        });
    }
    Ok(Classification {
        n,
        ks,
        per_probe,
        best_margin,
        best_probe,
        min_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probes::catalog;
    use crate::states::{FamilyPoint, family_state, ghz, random_density, random_k_separable, w_state};
    use crate::tensor::{ComplexVector, DensityOperator, SystemDims};
    use approx::assert_abs_diff_eq;

    fn pure(v: ComplexVector) -> DensityOperator {
        let dims = v.dims().clone();
        DensityOperator::from_ensemble(dims, vec![(1.0, v)]).unwrap()
    }

    /// Closed forms for the W-plus-noise family under the computational
    /// probe, derived by listing which matrix elements survive.
    fn w_noise_expected(n: usize, beta: f64) -> (f64, f64, f64) {
        let pow = (1u64 << n) as f64;
        let lhs = (n as f64 - 1.0) * beta;
        let rhs_pair = (n * (n - 1)) as f64 * (1.0 - beta) / pow;
        let rhs_diag = beta + n as f64 * (1.0 - beta) / pow;
        (lhs, rhs_pair, rhs_diag)
    }

    #[test]
    fn w_noise_report_matches_closed_form() {
        let dims = SystemDims::qubits(3).unwrap();
        let rho = family_state(&FamilyPoint::WNoise { n: 3, beta: 0.6 }).unwrap();
        let probe = Probe::computational(&dims).unwrap();
        let report = theorem1(&rho, &probe, 2).unwrap();
        assert_abs_diff_eq!(report.lhs, 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_pair, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_diag, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(report.margin, 0.15, epsilon = 1e-12);
        assert!(report.detected);

        // same family at other (n, beta) points
        for (n, beta) in [(3usize, 0.8), (4, 0.5), (5, 0.3)] {
            let rho = family_state(&FamilyPoint::WNoise { n, beta }).unwrap();
            let probe = Probe::computational(&SystemDims::qubits(n).unwrap()).unwrap();
            let report = theorem1(&rho, &probe, 2).unwrap();
            let (lhs, rhs_pair, rhs_diag) = w_noise_expected(n, beta);
            assert_abs_diff_eq!(report.lhs, lhs, epsilon = 1e-12);
            assert_abs_diff_eq!(report.rhs_pair, rhs_pair, epsilon = 1e-12);
            assert_abs_diff_eq!(report.rhs_diag, rhs_diag, epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz_detected_by_phase_flip_probe() {
        let dims = SystemDims::qubits(3).unwrap();
        let rho = pure(ghz(3).unwrap());
        let probe = Probe::phase_flip(&dims).unwrap();
        let report = theorem1(&rho, &probe, 2).unwrap();
        assert_abs_diff_eq!(report.lhs, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_pair, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_diag, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(report.margin, 0.75, epsilon = 1e-12);
        assert!(report.detected);

        // the uniform probes miss pure GHZ
        let comp = theorem1(&rho, &Probe::computational(&dims).unwrap(), 2).unwrap();
        assert!(!comp.detected);
    }

    #[test]
    fn maximally_mixed_is_never_detected() {
        let rho = family_state(&FamilyPoint::WNoise { n: 3, beta: 0.0 }).unwrap();
        let dims = SystemDims::qubits(3).unwrap();
        for probe in catalog(&dims).unwrap() {
            for k in 2..=3 {
                let report = theorem1(&rho, &probe, k).unwrap();
                assert_abs_diff_eq!(report.lhs, 0.0, epsilon = 1e-12);
                assert!(report.margin < 0.0);
                assert!(!report.detected);
            }
        }
    }

    #[test]
    fn corollary_matches_uniform_probes() {
        let rho = family_state(&FamilyPoint::GhzW {
            n: 3,
            alpha: 0.3,
            beta: 0.4,
        })
        .unwrap();
        let dims = SystemDims::qubits(3).unwrap();
        let zero = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let one = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let cor = corollary(&rho, &zero, &one, 2).unwrap();
        let thm = theorem1(&rho, &Probe::computational(&dims).unwrap(), 2).unwrap();
        assert_eq!(cor.lhs, thm.lhs);
        assert_eq!(cor.rhs_pair, thm.rhs_pair);
        assert_eq!(cor.rhs_diag, thm.rhs_diag);
        assert_eq!(cor.margin, thm.margin);
        assert_eq!(cor.detected, thm.detected);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = vec![C64::new(s, 0.0), C64::new(s, 0.0)];
        let minus = vec![C64::new(s, 0.0), C64::new(-s, 0.0)];
        let cor45 = corollary(&rho, &plus, &minus, 2).unwrap();
        let thm45 = theorem1(&rho, &Probe::diagonal_45(&dims).unwrap(), 2).unwrap();
        assert_eq!(cor45.margin, thm45.margin);

        // mixed local dimensions are rejected
        let dims23 = SystemDims::new(vec![2, 3]).unwrap();
        let mixed = random_density(&dims23, 2, 1).unwrap();
        assert!(matches!(
            corollary(&mixed, &zero, &one, 2),
            Err(Error::HeterogeneousDims(_))
        ));
    }

    #[test]
    fn pure_w_corollary_margin_is_one() {
        let rho = pure(w_state(3).unwrap());
        let zero = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let one = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let report = corollary(&rho, &zero, &one, 2).unwrap();
        assert_abs_diff_eq!(report.lhs, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_pair, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rhs_diag, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.margin, 1.0, epsilon = 1e-12);
        assert!(report.detected);
    }

    #[test]
    fn theorem2_bell_states() {
        let dims = SystemDims::qubits(2).unwrap();
        let probe = Probe::computational(&dims).unwrap();

        // (|01> + |10>)/sqrt2 violates its pair inequality
        let psi_plus = pure(w_state(2).unwrap());
        let pairs = theorem2(&psi_plus, &probe).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_abs_diff_eq!(pairs[0].lhs_pair, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[0].rhs_pair, 0.0, epsilon = 1e-12);
        assert!(pairs[0].violated);

        // (|00> + |11>)/sqrt2 does not (under this probe)
        let phi_plus = pure(ghz(2).unwrap());
        let pairs = theorem2(&phi_plus, &probe).unwrap();
        assert_abs_diff_eq!(pairs[0].lhs_pair, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pairs[0].rhs_pair, 0.5, epsilon = 1e-12);
        assert!(!pairs[0].violated);
    }

    #[test]
    fn product_states_saturate_theorem2() {
        let dims = SystemDims::qubits(4).unwrap();
        for seed in 0..5u64 {
            // k = n with one component: a full product pure state
            let rho = random_k_separable(&dims, 4, 1, seed).unwrap();
            for probe in catalog(&dims).unwrap() {
                for pair in theorem2(&rho, &probe).unwrap() {
                    assert_abs_diff_eq!(pair.lhs_pair, pair.rhs_pair, epsilon = 1e-12);
                    assert!(!pair.violated);
                }
            }
        }
    }

    #[test]
    fn margin_ladder_steps_by_rhs_diag() {
        let dims = SystemDims::qubits(4).unwrap();
        let rho = random_density(&dims, 5, 3).unwrap();
        let probe = Probe::diagonal_45(&dims).unwrap();
        let reports: Vec<_> = (2..=4)
            .map(|k| theorem1(&rho, &probe, k).unwrap())
            .collect();
        for w in reports.windows(2) {
            let step = w[1].margin - w[0].margin;
            let scale = 1.0f64.max(w[0].rhs_diag.abs());
            assert!((step - w[0].rhs_diag).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn soundness_on_k_separable_draws() {
        let dims = SystemDims::qubits(4).unwrap();
        let probes = catalog(&dims).unwrap();
        for seed in 0..30u64 {
            for k in 2..=4usize {
                let rho = random_k_separable(&dims, k, 3, seed).unwrap();
                for probe in &probes {
                    let report = theorem1(&rho, probe, k).unwrap();
                    assert!(
                        report.margin <= DETECTION_EPS,
                        "false positive: k={k} seed={seed} probe={} margin={}",
                        probe.label(),
                        report.margin
                    );
                }
            }
        }
    }

    #[test]
    fn theorem2_sum_equals_full_level_margin() {
        let dims = SystemDims::qubits(3).unwrap();
        for seed in 0..10u64 {
            let rho = random_density(&dims, 3, seed).unwrap();
            for probe in catalog(&dims).unwrap() {
                let pairs = theorem2(&rho, &probe).unwrap();
                let total: f64 = pairs.iter().map(|p| p.lhs_pair - p.rhs_pair).sum();
                let full = theorem1(&rho, &probe, 3).unwrap();
                assert_abs_diff_eq!(2.0 * total, full.margin, epsilon = 1e-10);
                // superset property: full-level violation implies some pair violation
                if full.detected {
                    assert!(pairs.iter().any(|p| p.violated));
                }
            }
        }
    }

    #[test]
    fn oracle_agrees_termwise_on_mixed_dims() {
        for dims in [
            SystemDims::qubits(2).unwrap(),
            SystemDims::qubits(3).unwrap(),
            SystemDims::new(vec![2, 3]).unwrap(),
        ] {
            for seed in 0..3u64 {
                let rho = random_density(&dims, 4.min(dims.total()), seed).unwrap();
                for probe in catalog(&dims)
                    .unwrap()
                    .into_iter()
                    .chain([Probe::random(&dims, seed + 50).unwrap()])
                {
                    let oracle = two_copy_oracle(&rho, &probe).unwrap();
                    let terms = compute_terms(&rho, &probe.expand()).unwrap();
                    let n = dims.n();
                    for i in 0..n {
                        assert_abs_diff_eq!(oracle.diag[i], terms.diag[i], epsilon = 1e-10);
                        for j in 0..n {
                            if i == j {
                                continue;
                            }
                            let idx = pair_index(n, i.min(j), i.max(j));
                            assert_abs_diff_eq!(
                                oracle.lhs[i][j],
                                terms.offdiag_mod[idx],
                                epsilon = 1e-10
                            );
                            let fast =
                                (terms.a.max(0.0) * terms.pair_diag[idx].max(0.0)).sqrt();
                            assert_abs_diff_eq!(oracle.pair[i][j], fast, epsilon = 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_refuses_large_systems() {
        let dims = SystemDims::qubits(7).unwrap();
        let rho = random_k_separable(&dims, 2, 1, 0).unwrap();
        let probe = Probe::computational(&dims).unwrap();
        assert!(matches!(
            two_copy_oracle(&rho, &probe),
            Err(Error::OracleTooLarge { dim: 128, max: 64 })
        ));
    }

    #[test]
    fn classify_finds_min_k() {
        let dims = SystemDims::qubits(3).unwrap();
        let probes = catalog(&dims).unwrap();

        let ghz_pure = pure(ghz(3).unwrap());
        let c = classify(&ghz_pure, &probes).unwrap();
        assert_eq!(c.min_k, Some(2));
        let phase = c.per_probe.iter().find(|p| p.probe == "phase-flip").unwrap();
        assert_eq!(phase.min_k, Some(2));

        // threshold for (n=4, k=2) is 5/9 > 0.4 > 1/3 = threshold for k=3
        let dims4 = SystemDims::qubits(4).unwrap();
        let rho = family_state(&FamilyPoint::WNoise { n: 4, beta: 0.4 }).unwrap();
        let c = classify(&rho, &[Probe::computational(&dims4).unwrap()]).unwrap();
        assert_eq!(c.per_probe[0].min_k, Some(3));
        assert_eq!(c.ks, vec![2, 3, 4]);
        assert!(c.per_probe[0].margins[0] <= DETECTION_EPS);
        assert!(c.per_probe[0].margins[1] > DETECTION_EPS);
        assert!(c.per_probe[0].margins[2] > DETECTION_EPS);

        let noise = family_state(&FamilyPoint::WNoise { n: 3, beta: 0.0 }).unwrap();
        let c = classify(&noise, &probes).unwrap();
        assert_eq!(c.min_k, None);
        assert!(c.per_probe.iter().all(|p| p.min_k.is_none()));

        assert!(matches!(
            classify(&noise, &[]),
            Err(Error::EmptyProbeSet)
        ));
    }

    #[test]
    fn level_bounds_are_enforced() {
        let dims = SystemDims::qubits(3).unwrap();
        let rho = family_state(&FamilyPoint::WNoise { n: 3, beta: 0.5 }).unwrap();
        let probe = Probe::computational(&dims).unwrap();
        assert!(matches!(
            theorem1(&rho, &probe, 1),
            Err(Error::KOutOfRange { k: 1, n: 3 })
        ));
        assert!(matches!(
            theorem1(&rho, &probe, 4),
            Err(Error::KOutOfRange { k: 4, n: 3 })
        ));

        let dims2 = SystemDims::qubits(2).unwrap();
        let probe2 = Probe::computational(&dims2).unwrap();
        assert!(matches!(
            theorem1(&rho, &probe2, 2),
            Err(Error::DimMismatch { .. })
        ));
    }
}
