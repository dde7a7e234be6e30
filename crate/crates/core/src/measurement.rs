//! Everything needed to run the criterion in a lab: the list of local
//! product observables whose expectations determine every term, an
//! algebraic check that the list really does, a finite-shot simulator,
//! and report assembly with propagated uncertainties.
//!
//! Per site the plan uses `T = |x><x|`, `Q = |x~><x~|`,
//! `M = |x~><x| + |x><x~|` and `Mt = i|x~><x| - i|x><x~|` ("Mt" is the
//! twiddled partner of M throughout). For each site pair the four products
//! M(x)M, Mt(x)Mt, M(x)Mt, Mt(x)M — T everywhere else — combine into
//!
//! ```text
//!   (MM + MtMt)/2  = |phi_i><phi_j| + |phi_j><phi_i|   -> 2 Re <phi_i|rho|phi_j>
//!   (MMt - MtM)/2  = i|phi_j><phi_i| - i|phi_i><phi_j| -> -2 Im <phi_i|rho|phi_j>
//! ```
//!
//! which recovers the off-diagonal modulus as sqrt(<O>^2 + <Ot>^2)/2. The
//! identities are exact algebra and need no orthogonality between x and x~.

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{self, CriterionReport, CriterionTerms};
use crate::error::{Error, Result};
use crate::linalg;
use crate::probes::{Probe, pair_index};
use crate::rng;
use crate::states::random_density;
use crate::tensor::{
    C64, CMatrix, DensityOperator, DensityForm, SystemDims, dot_slices, expectation, kron,
    product_vector,
};

use rand_distr::Distribution;

/// What one product observable is for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObservableRole {
    TDiagonal,
    SingleDiagonal(usize),
    PairDiagonal(usize, usize),
    MM(usize, usize),
    MtMt(usize, usize),
    MMt(usize, usize),
    MtM(usize, usize),
}

impl ObservableRole {
    /// Wire tag ("Mt" stands in for the twiddled M).
    pub fn tag(&self) -> &'static str {
        match self {
            ObservableRole::TDiagonal => "T-diagonal",
            ObservableRole::SingleDiagonal(_) => "single-diagonal",
            ObservableRole::PairDiagonal(..) => "pair-diagonal",
            ObservableRole::MM(..) => "MM",
            ObservableRole::MtMt(..) => "MtMt",
            ObservableRole::MMt(..) => "MMt",
            ObservableRole::MtM(..) => "MtM",
        }
    }

    /// Sites the setting deviates from the all-T pattern on.
    pub fn sites(&self) -> Vec<usize> {
        match *self {
            ObservableRole::TDiagonal => vec![],
            ObservableRole::SingleDiagonal(i) => vec![i],
            ObservableRole::PairDiagonal(i, j)
            | ObservableRole::MM(i, j)
            | ObservableRole::MtMt(i, j)
            | ObservableRole::MMt(i, j)
            | ObservableRole::MtM(i, j) => vec![i, j],
        }
    }
}

/// One measurement setting: a Hermitian factor per site.
#[derive(Debug, Clone)]
pub struct LocalObservable {
    pub role: ObservableRole,
    pub factors: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    pub dims: SystemDims,
    pub probe: String,
    pub settings: Vec<LocalObservable>,
}

impl MeasurementPlan {
    pub fn n(&self) -> usize {
        self.dims.n()
    }
}

/// `5(n^2 - n)/2 + n + 1`.
pub fn expected_settings(n: usize) -> usize {
    5 * (n * n - n) / 2 + n + 1
}

/// The full plan for one probe: one all-T projector, n single-flip
/// projectors, n(n-1)/2 double-flip projectors, and the four M/Mt products
/// per pair. Setting order is fixed: diagonals first, then pairs row-major
/// with MM, MtMt, MMt, MtM.
pub fn settings_plan(probe: &Probe) -> MeasurementPlan {
    let dims = probe.dims().clone();
    let n = dims.n();
    let t: Vec<CMatrix> = (0..n)
        .map(|l| CMatrix::outer(probe.base(l), probe.base(l)))
        .collect();
    let q: Vec<CMatrix> = (0..n)
        .map(|l| CMatrix::outer(probe.flipped(l), probe.flipped(l)))
        .collect();
    let m: Vec<CMatrix> = (0..n)
        .map(|l| {
            CMatrix::outer(probe.flipped(l), probe.base(l))
                .add_mat(&CMatrix::outer(probe.base(l), probe.flipped(l)))
        })
        .collect();
    let i = C64::new(0.0, 1.0);
    let mt: Vec<CMatrix> = (0..n)
        .map(|l| {
            CMatrix::outer(probe.flipped(l), probe.base(l))
                .scaled(i)
                .sub_mat(&CMatrix::outer(probe.base(l), probe.flipped(l)).scaled(i))
        })
        .collect();

    let with = |subs: &[(usize, &CMatrix)]| -> Vec<CMatrix> {
        (0..n)
            .map(|l| {
                subs.iter()
                    .find(|(site, _)| *site == l)
                    .map_or_else(|| t[l].clone(), |(_, f)| (*f).clone())
            })
            .collect()
    };

    let mut settings = Vec::with_capacity(expected_settings(n));
    settings.push(LocalObservable {
        role: ObservableRole::TDiagonal,
        factors: t.clone(),
    });
    for site in 0..n {
        settings.push(LocalObservable {
            role: ObservableRole::SingleDiagonal(site),
            factors: with(&[(site, &q[site])]),
        });
    }
    for a in 0..n {
        for b in (a + 1)..n {
            settings.push(LocalObservable {
                role: ObservableRole::PairDiagonal(a, b),
                factors: with(&[(a, &q[a]), (b, &q[b])]),
            });
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            settings.push(LocalObservable {
                role: ObservableRole::MM(a, b),
                factors: with(&[(a, &m[a]), (b, &m[b])]),
            });
            settings.push(LocalObservable {
                role: ObservableRole::MtMt(a, b),
                factors: with(&[(a, &mt[a]), (b, &mt[b])]),
            });
            settings.push(LocalObservable {
                role: ObservableRole::MMt(a, b),
                factors: with(&[(a, &m[a]), (b, &mt[b])]),
            });
            settings.push(LocalObservable {
                role: ObservableRole::MtM(a, b),
                factors: with(&[(a, &mt[a]), (b, &m[b])]),
            });
        }
    }
    MeasurementPlan {
        dims,
        probe: probe.label().to_string(),
        settings,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityCheck {
    pub ok: bool,
    /// Largest entrywise gap between plan combinations and the rank-2
    /// definitions of the diagonal projectors and O/Ot operators.
    pub max_operator_dev: f64,
    /// Largest gap in the expectation relations on a fixed random state.
    pub max_expectation_dev: f64,
}

/// Rebuild every operator the plan claims to measure and compare against
/// the direct definitions, entrywise and in expectation.
pub fn verify_identities(plan: &MeasurementPlan, probe: &Probe) -> Result<IdentityCheck> {
    let dims = probe.dims().clone();
    if plan.dims != dims {
        return Err(Error::DimMismatch {
            expected: dims.total(),
            got: plan.dims.total(),
        });
    }
    let n = dims.n();
    let vecs = probe.expand();
    let dense_of = |setting: &LocalObservable| -> Result<CMatrix> { kron(&setting.factors) };
    let find = |role: &ObservableRole| -> &LocalObservable {
        plan.settings
            .iter()
            .find(|s| s.role == *role)
            .expect("plan covers every role")
    };

    let mut op_dev = 0.0f64;
    for setting in &plan.settings {
        for factor in &setting.factors {
            op_dev = op_dev.max(factor.max_abs_diff(&factor.adjoint()));
        }
    }

    // diagonal projectors against outer products of the expanded vectors
    let outer_of = |v: &crate::tensor::ComplexVector| CMatrix::outer(v.entries(), v.entries());
    op_dev = op_dev.max(
        dense_of(find(&ObservableRole::TDiagonal))?.max_abs_diff(&outer_of(vecs.phi())),
    );
    for site in 0..n {
        op_dev = op_dev.max(
            dense_of(find(&ObservableRole::SingleDiagonal(site)))?
                .max_abs_diff(&outer_of(vecs.single(site))),
        );
    }

    // O/Ot combinations against their rank-2 definitions, and their
    // expectations against the off-diagonal matrix element
    let rho = random_density(&dims, dims.total().min(4), 0xC0FFEE)?;
    let rho_dense = rho.to_dense()?;
    let expect = |m: &CMatrix| -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..m.dim() {
            for c in 0..m.dim() {
                acc += rho_dense.get(r, c) * m.get(c, r);
            }
        }
        acc.re
    };
    let mut exp_dev = 0.0f64;
    let half = C64::new(0.5, 0.0);
    for a in 0..n {
        for b in (a + 1)..n {
            op_dev = op_dev.max(
                dense_of(find(&ObservableRole::PairDiagonal(a, b)))?
                    .max_abs_diff(&outer_of(vecs.pair(a, b))),
            );
            let mm = dense_of(find(&ObservableRole::MM(a, b)))?;
            let mtmt = dense_of(find(&ObservableRole::MtMt(a, b)))?;
            let mmt = dense_of(find(&ObservableRole::MMt(a, b)))?;
            let mtm = dense_of(find(&ObservableRole::MtM(a, b)))?;
            let o_combo = mm.add_mat(&mtmt).scaled(half);
            let ot_combo = mmt.sub_mat(&mtm).scaled(half);

            let pa = vecs.single(a).entries();
            let pb = vecs.single(b).entries();
            let o_direct = CMatrix::outer(pa, pb).add_mat(&CMatrix::outer(pb, pa));
            let i = C64::new(0.0, 1.0);
            let ot_direct = CMatrix::outer(pb, pa)
                .scaled(i)
                .sub_mat(&CMatrix::outer(pa, pb).scaled(i));
            op_dev = op_dev.max(o_combo.max_abs_diff(&o_direct));
            op_dev = op_dev.max(ot_combo.max_abs_diff(&ot_direct));

            let z = crate::tensor::matrix_element(&rho, vecs.single(a), vecs.single(b))?;
            exp_dev = exp_dev.max((expect(&o_combo) - 2.0 * z.re).abs());
            exp_dev = exp_dev.max((expect(&ot_combo) + 2.0 * z.im).abs());
        }
    }
    Ok(IdentityCheck {
        ok: op_dev <= 1e-12 && exp_dev <= 1e-10,
        max_operator_dev: op_dev,
        max_expectation_dev: exp_dev,
    })
}

#[derive(Debug, Clone)]
pub(crate) struct TermErrors {
    pub a: f64,
    pub diag: Vec<f64>,
    pub pair_diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

/// Sampled (or exact) expectations for every setting of a plan, plus the
/// criterion terms reconstructed from them.
#[derive(Debug, Clone)]
pub struct ShotEstimate {
    pub probe: String,
    /// Shots per setting; 0 marks the exact no-sampling path.
    pub shots: u64,
    pub seed: u64,
    /// Sample mean per setting, aligned with the plan.
    pub means: Vec<f64>,
    /// Standard error per setting.
    pub ses: Vec<f64>,
    pub(crate) terms: CriterionTerms,
    pub(crate) term_errors: TermErrors,
    /// Term labels whose moduli sit below twice their standard error.
    pub unreliable: Vec<String>,
}

/// Sample every setting of the plan on `rho`: diagonalize the local
/// factors, draw multinomial counts over the joint eigenbasis outcomes
/// (one RNG stream per setting, so parallel order cannot matter), and
/// average eigenvalue products.
pub fn simulate_shots(
    rho: &DensityOperator,
    plan: &MeasurementPlan,
    shots: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    if rho.dims() != &plan.dims {
        return Err(Error::DimMismatch {
            expected: plan.dims.total(),
            got: rho.dims().total(),
        });
    }
    let stats: Vec<(f64, f64)> = plan
        .settings
        .par_iter()
        .enumerate()
        .map(|(idx, setting)| sample_setting(rho, &plan.dims, setting, shots, seed, idx as u64))
        .collect::<Result<_>>()?;
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let ses: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let (terms, term_errors, unreliable) = reconstruct(plan, &means, &ses);
    Ok(ShotEstimate {
        probe: plan.probe.clone(),
        shots,
        seed,
        means,
        ses,
        terms,
        term_errors,
        unreliable,
    })
}

fn sample_setting(
    rho: &DensityOperator,
    dims: &SystemDims,
    setting: &LocalObservable,
    shots: u64,
    seed: u64,
    index: u64,
) -> Result<(f64, f64)> {
    let n = dims.n();
    // local eigensystems; ties broken inside hermitian_eigen
    let eigs: Vec<(Vec<f64>, CMatrix)> = setting
        .factors
        .iter()
        .map(linalg::hermitian_eigen)
        .collect();
    let total = dims.total();
    let mut probs = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    let mut min_prob = f64::INFINITY;
    for outcome in 0..total {
        let digits = dims.digits_of(outcome);
        let locals: Vec<Vec<C64>> = (0..n)
            .map(|l| {
                let (_, vecs) = &eigs[l];
                (0..dims.dim(l)).map(|r| vecs.get(r, digits[l])).collect()
            })
            .collect();
        let u = product_vector(dims, &locals)?;
        let p = expectation(rho, &u)?;
        min_prob = min_prob.min(p);
        probs.push(p.max(0.0));
        values.push(digits.iter().zip(&eigs).map(|(&g, (vals, _))| vals[g]).product::<f64>());
    }
    if min_prob < -1e-9 {
        return Err(Error::NegativeProbability { min_prob });
    }
    let mass: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= mass;
    }

    // multinomial counts by binomial chaining: O(outcomes), not O(shots)
    let mut rng = rng::stream(seed, index);
    let mut counts = vec![0u64; total];
    let mut remaining = shots;
    let mut tail = 1.0f64;
    for o in 0..total {
        if remaining == 0 {
            break;
        }
        if o == total - 1 {
            counts[o] = remaining;
            break;
        }
        let q = if tail > 0.0 {
            (probs[o] / tail).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = rand_distr::Binomial::new(remaining, q)
            .expect("clamped probability")
            .sample(&mut rng);
        counts[o] = draw;
        remaining -= draw;
        tail -= probs[o];
    }

    let mean: f64 = counts
        .iter()
        .zip(&values)
        .map(|(&c, &v)| c as f64 * v)
        .sum::<f64>()
        / shots as f64;
    let ss: f64 = counts
        .iter()
        .zip(&values)
        .map(|(&c, &v)| c as f64 * (v - mean) * (v - mean))
        .sum();
    let variance = ss / (shots.max(2) - 1) as f64;
    Ok((mean, (variance / shots as f64).max(0.0).sqrt()))
}

/// Exact expectations through the same plan and reconstruction interfaces;
/// the terms are computed by the criteria fast path itself, so downstream
/// reports match `theorem1` bit for bit.
pub fn exact_estimate(rho: &DensityOperator, probe: &Probe) -> Result<ShotEstimate> {
    let plan = settings_plan(probe);
    if rho.dims() != &plan.dims {
        return Err(Error::DimMismatch {
            expected: plan.dims.total(),
            got: rho.dims().total(),
        });
    }
    let means: Vec<f64> = plan
        .settings
        .iter()
        .map(|setting| {
            let dense = kron(&setting.factors)?;
            Ok(match rho.form() {
                DensityForm::Dense(m) => {
                    let mut acc = C64::new(0.0, 0.0);
                    for r in 0..m.dim() {
                        for c in 0..m.dim() {
                            acc += m.get(r, c) * dense.get(c, r);
                        }
                    }
                    acc.re
                }
                DensityForm::Ensemble(parts) => parts
                    .iter()
                    .map(|(w, psi)| {
                        w * dot_slices(psi.entries(), &dense.mul_vec(psi.entries())).re
                    })
                    .sum(),
            })
        })
        .collect::<Result<_>>()?;
    let n = plan.n();
    let terms = criteria::compute_terms(rho, &probe.expand())?;
    let zeros = TermErrors {
        a: 0.0,
        diag: vec![0.0; n],
        pair_diag: vec![0.0; n * (n - 1) / 2],
        offdiag: vec![0.0; n * (n - 1) / 2],
    };
    Ok(ShotEstimate {
        probe: plan.probe.clone(),
        shots: 0,
        seed: 0,
        ses: vec![0.0; means.len()],
        means,
        terms,
        term_errors: zeros,
        unreliable: Vec::new(),
    })
}

/// Criterion terms from per-setting means: diagonals read off directly,
/// off-diagonal moduli via `sqrt(<O>^2 + <Ot>^2)/2` with delta-method
/// standard errors. Near-zero moduli get flagged instead of bias-corrected.
fn reconstruct(
    plan: &MeasurementPlan,
    means: &[f64],
    ses: &[f64],
) -> (CriterionTerms, TermErrors, Vec<String>) {
    let n = plan.n();
    let pairs = n * (n - 1) / 2;
    let mut a = 0.0;
    let mut a_se = 0.0;
    let mut diag = vec![0.0; n];
    let mut diag_se = vec![0.0; n];
    let mut pair_diag = vec![0.0; pairs];
    let mut pair_diag_se = vec![0.0; pairs];
    // per ordered role: (mean, se) for the four pair products
    let mut combos = vec![[(0.0, 0.0); 4]; pairs];
    for (setting, (&mean, &se)) in plan.settings.iter().zip(means.iter().zip(ses)) {
        match setting.role {
            ObservableRole::TDiagonal => (a, a_se) = (mean, se),
            ObservableRole::SingleDiagonal(i) => (diag[i], diag_se[i]) = (mean, se),
            ObservableRole::PairDiagonal(i, j) => {
                let idx = pair_index(n, i, j);
                (pair_diag[idx], pair_diag_se[idx]) = (mean, se);
            }
            ObservableRole::MM(i, j) => combos[pair_index(n, i, j)][0] = (mean, se),
            ObservableRole::MtMt(i, j) => combos[pair_index(n, i, j)][1] = (mean, se),
            ObservableRole::MMt(i, j) => combos[pair_index(n, i, j)][2] = (mean, se),
            ObservableRole::MtM(i, j) => combos[pair_index(n, i, j)][3] = (mean, se),
        }
    }
    let mut offdiag = vec![0.0; pairs];
    let mut offdiag_se = vec![0.0; pairs];
    let mut unreliable = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let idx = pair_index(n, i, j);
            let [(mm, mm_se), (mtmt, mtmt_se), (mmt, mmt_se), (mtm, mtm_se)] = combos[idx];
            let o = 0.5 * (mm + mtmt);
            let ot = 0.5 * (mmt - mtm);
            let o_se2 = 0.25 * (mm_se * mm_se + mtmt_se * mtmt_se);
            let ot_se2 = 0.25 * (mmt_se * mmt_se + mtm_se * mtm_se);
            let r = 0.5 * o.hypot(ot);
            let se = if r > 0.0 {
                (o * o * o_se2 + ot * ot * ot_se2).sqrt() / (4.0 * r)
            } else {
                // gradient bound: |d r / d o| <= 1/2
                0.5 * (o_se2 + ot_se2).sqrt()
            };
            offdiag[idx] = r;
            offdiag_se[idx] = se;
            if r < 2.0 * se {
                unreliable.push(format!("offdiag({i},{j})"));
            }
        }
    }
    (
        CriterionTerms {
            n,
            a,
            diag,
            pair_diag,
            offdiag_mod: offdiag,
        },
        TermErrors {
            a: a_se,
            diag: diag_se,
            pair_diag: pair_diag_se,
            offdiag: offdiag_se,
        },
        unreliable,
    )
}

/// A criterion report with propagated uncertainties. Detection demands the
/// margin clear the threshold by `z` standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct EstimatedReport {
    pub k: usize,
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs_pair: f64,
    pub rhs_pair_se: f64,
    pub rhs_diag: f64,
    pub rhs_diag_se: f64,
    pub margin: f64,
    pub margin_se: f64,
    pub z: f64,
    pub detected: bool,
    pub probe: String,
    pub shots: u64,
    pub seed: u64,
    pub unreliable: Vec<String>,
}

pub fn estimated_report(
    estimate: &ShotEstimate,
    k: usize,
    z: f64,
    eps: f64,
) -> Result<EstimatedReport> {
    let report: CriterionReport = criteria::assemble(&estimate.terms, k, eps, &estimate.probe)?;
    let n = estimate.terms.n;
    let t = &estimate.terms;
    let e = &estimate.term_errors;

    // sqrt(a * b) errors per pair (delta method away from the axes)
    let a = t.a.max(0.0);
    let mut geo_se2_sum = 0.0;
    for idx in 0..t.pair_diag.len() {
        let b = t.pair_diag[idx].max(0.0);
        let se = if a > 0.0 && b > 0.0 {
            0.5 * (b / a * e.a * e.a + a / b * e.pair_diag[idx] * e.pair_diag[idx]).sqrt()
        } else {
            // one factor sits at zero: bound by the one-se excursion
            ((a + e.a) * (b + e.pair_diag[idx])).sqrt()
        };
        geo_se2_sum += se * se;
    }
    // each unordered pair enters the i-major sums twice, fully correlated
    let lhs_se = 2.0 * e.offdiag.iter().map(|s| s * s).sum::<f64>().sqrt();
    let rhs_pair_se = 2.0 * geo_se2_sum.sqrt();
    let rhs_diag_se = e.diag.iter().map(|s| s * s).sum::<f64>().sqrt();
    let nk = (n - k) as f64;
    let margin_se =
        (lhs_se * lhs_se + rhs_pair_se * rhs_pair_se + nk * nk * rhs_diag_se * rhs_diag_se).sqrt();
    Ok(EstimatedReport {
        k,
        lhs: report.lhs,
        lhs_se,
        rhs_pair: report.rhs_pair,
        rhs_pair_se,
        rhs_diag: report.rhs_diag,
        rhs_diag_se,
        margin: report.margin,
        margin_se,
        z,
        detected: report.margin - z * margin_se > eps,
        probe: estimate.probe.clone(),
        shots: estimate.shots,
        seed: estimate.seed,
        unreliable: estimate.unreliable.clone(),
    })
}
