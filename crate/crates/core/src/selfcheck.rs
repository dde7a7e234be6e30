//! Reduced-scale consistency checks runnable from the CLI. Each check is a
//! cut-down version of something the test suite proves at full strength,
//! so a user on a new machine can confirm the numerics in seconds.

use crate::criteria::{DETECTION_EPS, compute_terms, theorem1, theorem2, two_copy_oracle};
use crate::measurement::{
    estimated_report, exact_estimate, expected_settings, settings_plan, simulate_shots,
    verify_identities,
};
use crate::probes::{Probe, catalog, pair_index};
use crate::scan::{analytic_w_threshold, bisect_threshold};
use crate::states::{
    FamilyPoint, biseparable_triple, family_state, random_density, random_k_separable,
};
use crate::tensor::SystemDims;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, result: Result<(bool, String), crate::Error>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome {
            name,
            passed,
            detail,
        },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Run every check with RNG draws derived from `seed`. Same seed, same
/// outcomes.
pub fn run_selfcheck(seed: u64) -> Vec<CheckOutcome> {
    vec![
        outcome("two-copy-oracle", oracle_agreement(seed)),
        outcome("separable-soundness", soundness(seed)),
        outcome("biseparable-guard", biseparable_guard()),
        outcome("margin-ladder", margin_ladder(seed)),
        outcome("pair-sum-identity", pair_sum(seed)),
        outcome("w-threshold-bisection", threshold_bisection()),
        outcome("plan-counts", plan_counts()),
        outcome("measurement-identities", measurement_identities()),
        outcome("shot-reproducibility", shot_reproducibility(seed)),
    ]
}

/// Fast-path terms equal the literal two-copy construction.
fn oracle_agreement(seed: u64) -> Result<(bool, String), crate::Error> {
    let mut worst = 0.0f64;
    for dims in [
        SystemDims::qubits(2)?,
        SystemDims::qubits(3)?,
        SystemDims::new(vec![2, 3])?,
    ] {
        for draw in 0..8u64 {
            let rho = random_density(&dims, dims.total().min(4), seed ^ (draw + 1))?;
            for probe in catalog(&dims)?
                .into_iter()
                .chain([Probe::random(&dims, seed + 1000 + draw)?])
            {
                let oracle = two_copy_oracle(&rho, &probe)?;
                let terms = compute_terms(&rho, &probe.expand())?;
                let n = dims.n();
                for i in 0..n {
                    worst = worst.max((oracle.diag[i] - terms.diag[i]).abs());
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let idx = pair_index(n, i.min(j), i.max(j));
                        worst = worst.max((oracle.lhs[i][j] - terms.offdiag_mod[idx]).abs());
                        let fast = (terms.a.max(0.0) * terms.pair_diag[idx].max(0.0)).sqrt();
                        worst = worst.max((oracle.pair[i][j] - fast).abs());
                    }
                }
            }
        }
    }
    Ok((worst <= 1e-10, format!("max term gap {worst:.3e}")))
}

/// Known k-separable states never come out detected at level k.
fn soundness(seed: u64) -> Result<(bool, String), crate::Error> {
    let mut worst = f64::NEG_INFINITY;
    for n in [3usize, 4] {
        let dims = SystemDims::qubits(n)?;
        let probes = catalog(&dims)?;
        for k in 2..=n {
            for draw in 0..10u64 {
                let rho = random_k_separable(&dims, k, 3, seed ^ (0xA5A5 + draw * 7 + k as u64))?;
                for probe in &probes {
                    let report = theorem1(&rho, probe, k)?;
                    worst = worst.max(report.margin);
                    if report.detected {
                        return Ok((
                            false,
                            format!(
                                "{k}-separable state detected at k={k} (margin {:.3e})",
                                report.margin
                            ),
                        ));
                    }
                }
            }
        }
    }
    Ok((true, format!("largest margin over separable draws {worst:.3e}")))
}

/// The three-way biseparable mixture defeats every stock probe at k=2.
fn biseparable_guard() -> Result<(bool, String), crate::Error> {
    let dims = SystemDims::qubits(3)?;
    let probes = catalog(&dims)?;
    let third = 1.0 / 3.0;
    let mut worst = f64::NEG_INFINITY;
    for (p1, p2, p3) in [(third, third, third), (0.5, 0.3, 0.2), (0.9, 0.05, 0.05)] {
        let rho = biseparable_triple(p1, p2, p3)?;
        for probe in &probes {
            let report = theorem1(&rho, probe, 2)?;
            worst = worst.max(report.margin);
            if report.detected {
                return Ok((
                    false,
                    format!("biseparable mixture detected (margin {:.3e})", report.margin),
                ));
            }
        }
    }
    Ok((true, format!("largest margin {worst:.3e}")))
}

/// margin(k+1) - margin(k) equals rhs_diag exactly.
fn margin_ladder(seed: u64) -> Result<(bool, String), crate::Error> {
    let dims = SystemDims::qubits(4)?;
    let mut worst = 0.0f64;
    for draw in 0..6u64 {
        let rho = random_density(&dims, 5, seed ^ (0x17 + draw))?;
        for probe in catalog(&dims)? {
            let reports: Vec<_> = (2..=4)
                .map(|k| theorem1(&rho, &probe, k))
                .collect::<Result<_, _>>()?;
            for pair in reports.windows(2) {
                let step = pair[1].margin - pair[0].margin;
                let scale = pair[0].rhs_diag.abs().max(1.0);
                worst = worst.max((step - pair[0].rhs_diag).abs() / scale);
            }
        }
    }
    Ok((worst <= 1e-12, format!("max ladder deviation {worst:.3e}")))
}

/// Twice the summed per-pair slack equals the k=n margin.
fn pair_sum(seed: u64) -> Result<(bool, String), crate::Error> {
    let dims = SystemDims::qubits(3)?;
    let mut worst = 0.0f64;
    for draw in 0..6u64 {
        let rho = random_density(&dims, 4, seed ^ (0x2E + draw))?;
        for probe in catalog(&dims)? {
            let pairs = theorem2(&rho, &probe)?;
            let total: f64 = pairs.iter().map(|p| p.lhs_pair - p.rhs_pair).sum();
            let full = theorem1(&rho, &probe, 3)?;
            worst = worst.max((2.0 * total - full.margin).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max sum gap {worst:.3e}")))
}

/// Bisection on the mixing axis recovers the closed-form thresholds.
fn threshold_bisection() -> Result<(bool, String), crate::Error> {
    let mut worst = 0.0f64;
    for (n, k) in [(3usize, 2usize), (3, 3), (4, 3), (5, 5)] {
        let dims = SystemDims::qubits(n)?;
        let probe = Probe::computational(&dims)?;
        let analytic = analytic_w_threshold(n, k)?.value();
        let curve = move |beta: f64| family_state(&FamilyPoint::WNoise { n, beta });
        let found = bisect_threshold(curve, 0.0, 1.0, k, &probe, 1e-9, DETECTION_EPS)?;
        worst = worst.max((found - analytic).abs());
    }
    Ok((worst <= 1e-6, format!("max threshold gap {worst:.3e}")))
}

/// Setting counts match `5(n^2-n)/2 + n + 1`.
fn plan_counts() -> Result<(bool, String), crate::Error> {
    for n in 2..=8usize {
        let dims = SystemDims::qubits(n)?;
        let plan = settings_plan(&Probe::computational(&dims)?);
        if plan.settings.len() != expected_settings(n) {
            return Ok((
                false,
                format!(
                    "n={n}: {} settings, expected {}",
                    plan.settings.len(),
                    expected_settings(n)
                ),
            ));
        }
    }
    Ok((true, "counts 8..149 for n=2..8".to_string()))
}

/// Plan operators reproduce the projectors and off-diagonal combinations.
fn measurement_identities() -> Result<(bool, String), crate::Error> {
    let mut worst_op = 0.0f64;
    let mut worst_exp = 0.0f64;
    for n in [2usize, 3] {
        let dims = SystemDims::qubits(n)?;
        for probe in catalog(&dims)?
            .into_iter()
            .chain([Probe::random(&dims, 0xBEEF)?])
        {
            let check = verify_identities(&settings_plan(&probe), &probe)?;
            worst_op = worst_op.max(check.max_operator_dev);
            worst_exp = worst_exp.max(check.max_expectation_dev);
        }
    }
    Ok((
        worst_op <= 1e-12 && worst_exp <= 1e-10,
        format!("operator {worst_op:.3e}, expectation {worst_exp:.3e}"),
    ))
}

/// Same seed, same counts; exact expectations reproduce the fast path
/// bit for bit.
fn shot_reproducibility(seed: u64) -> Result<(bool, String), crate::Error> {
    let rho = family_state(&FamilyPoint::WNoise { n: 3, beta: 0.6 })?;
    let dims = SystemDims::qubits(3)?;
    let probe = Probe::computational(&dims)?;
    let plan = settings_plan(&probe);
    let a = simulate_shots(&rho, &plan, 2000, seed)?;
    let b = simulate_shots(&rho, &plan, 2000, seed)?;
    if a.means != b.means {
        return Ok((false, "same seed produced different sample means".to_string()));
    }
    let reference = theorem1(&rho, &probe, 2)?;
    let report = estimated_report(&exact_estimate(&rho, &probe)?, 2, 3.0, DETECTION_EPS)?;
    let bitwise = report.margin.to_bits() == reference.margin.to_bits()
        && report.lhs.to_bits() == reference.lhs.to_bits()
        && report.rhs_pair.to_bits() == reference.rhs_pair.to_bits()
        && report.rhs_diag.to_bits() == reference.rhs_diag.to_bits();
    Ok((
        bitwise,
        if bitwise {
            format!("margin {:.6} reproduced bit for bit", report.margin)
        } else {
            "exact estimate disagrees with the fast path".to_string()
        },
    ))
}
