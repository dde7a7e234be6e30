//! Detection-boundary hunting: the exact threshold along the W-plus-noise
//! path, margin-sign bisection along arbitrary one-parameter state paths,
//! and 1-D/2-D grid sweeps over the named families with CSV output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::criteria::{self, CriterionTerms};
use crate::error::{Error, Result};
use crate::probes::Probe;
use crate::states::{FamilyPoint, family_state};
use crate::tensor::DensityOperator;

/// Noise weight above which a grid point stops being a state.
const FEASIBLE_SLACK: f64 = 1e-9;

/// Exact detection threshold for W-plus-noise under the computational
/// probe, as a reduced fraction and a double.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WThreshold {
    pub numerator: u128,
    pub denominator: u128,
}

impl WThreshold {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

/// `beta* = n(2n-k-1) / (2^n (k-1) + n(2n-k-1))`: above this weight the
/// W-plus-noise state is detectably k-nonseparable.
pub fn analytic_w_threshold(n: usize, k: usize) -> Result<WThreshold> {
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let n128 = n as u128;
    let k128 = k as u128;
    let num = n128 * (2 * n128 - k128 - 1);
    let den = (1u128 << n) * (k128 - 1) + num;
    let g = gcd(num, den);
    Ok(WThreshold {
        numerator: num / g,
        denominator: den / g,
    })
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Locate the detection boundary of `curve(t)` for level `k` and the given
/// probe by bisecting on the margin sign. The bracket must straddle the
/// boundary: not detected at `lo`, detected at `hi`.
pub fn bisect_threshold<F>(
    curve: F,
    lo: f64,
    hi: f64,
    k: usize,
    probe: &Probe,
    tol: f64,
    eps: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<DensityOperator>,
{
    if !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidGrid {
            detail: format!("bisection bracket [{lo}, {hi}] with tol {tol} is invalid"),
        });
    }
    let vecs = probe.expand();
    let margin_at = |t: f64| -> Result<f64> {
        let terms = criteria::compute_terms(&curve(t)?, &vecs)?;
        Ok(criteria::assemble(&terms, k, eps, probe.label())?.margin)
    };
    let lo_margin = margin_at(lo)?;
    let hi_margin = margin_at(hi)?;
    if lo_margin > eps || hi_margin <= eps {
        return Err(Error::NoSignChange {
            lo,
            hi,
            lo_margin,
            hi_margin,
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..60 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if margin_at(mid)? > eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The families a grid scan can sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanFamily {
    GhzW,
    WNoise,
    WAntiW,
}

impl ScanFamily {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "gw" => Ok(Self::GhzW),
            "w-noise" => Ok(Self::WNoise),
            "w-antiw" => Ok(Self::WAntiW),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::GhzW => "gw",
            Self::WNoise => "w-noise",
            Self::WAntiW => "w-antiw",
        }
    }

    /// Number of swept parameters: 1 for w-noise, 2 otherwise.
    pub fn param_count(&self) -> usize {
        match self {
            Self::WNoise => 1,
            _ => 2,
        }
    }

    pub fn point(&self, n: usize, p1: f64, p2: f64) -> FamilyPoint {
        match self {
            Self::GhzW => FamilyPoint::GhzW {
                n,
                alpha: p1,
                beta: p2,
            },
            Self::WNoise => FamilyPoint::WNoise { n, beta: p1 },
            Self::WAntiW => FamilyPoint::WAntiW { n, a: p1, b: p2 },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub family: ScanFamily,
    pub n: usize,
    pub ks: Vec<usize>,
    /// One `(lo, hi)` range per family parameter.
    pub ranges: Vec<(f64, f64)>,
    /// Grid resolution per axis.
    pub resolution: usize,
    pub eps: f64,
}

/// One record per (grid point, k, probe). Infeasible points (weight sum
/// beyond 1) keep their slots with probe = "skipped" and NaN numerics so
/// row counts stay rectangular.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub family: &'static str,
    pub n: usize,
    pub k: usize,
    pub probe: String,
    pub p1: f64,
    pub p2: f64,
    pub lhs: f64,
    pub rhs_pair: f64,
    pub rhs_diag: f64,
    pub margin: f64,
    pub detected: bool,
    /// Best margin over all probes at this (point, k); not a CSV column.
    pub best_margin: f64,
}

#[derive(Debug, Clone)]
pub struct ScanResult {
    pub family: &'static str,
    pub n: usize,
    pub ks: Vec<usize>,
    pub probes: Vec<String>,
    pub ranges: Vec<(f64, f64)>,
    pub resolution: usize,
    pub rows: Vec<ScanRow>,
}

/// Sweep the family over its parameter grid. Points run axis-major (p1
/// outer, p2 inner), then k, then probe; evaluation is parallel over
/// points but the ordering — and every bit of the output — is independent
/// of the worker count.
pub fn grid_scan(spec: &ScanSpec, probes: &[Probe]) -> Result<ScanResult> {
    if probes.is_empty() {
        return Err(Error::EmptyProbeSet);
    }
    if spec.resolution < 2 {
        return Err(Error::InvalidGrid {
            detail: format!("resolution {} is below 2", spec.resolution),
        });
    }
    let axes = spec.family.param_count();
    if spec.ranges.len() != axes {
        return Err(Error::InvalidGrid {
            detail: format!(
                "family {} takes {axes} parameter range(s), got {}",
                spec.family.id(),
                spec.ranges.len()
            ),
        });
    }
    for &(lo, hi) in &spec.ranges {
        if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi < lo {
            return Err(Error::InvalidGrid {
                detail: format!("range [{lo}, {hi}] is not an ordered nonnegative interval"),
            });
        }
    }
    for &k in &spec.ks {
        if k < 2 || k > spec.n {
            return Err(Error::KOutOfRange { k, n: spec.n });
        }
    }

    let expanded: Vec<(String, crate::probes::ProbeVectors)> = probes
        .iter()
        .map(|p| (p.label().to_string(), p.expand()))
        .collect();
    let grid_value = |axis: usize, idx: usize| -> f64 {
        let (lo, hi) = spec.ranges[axis];
        lo + (hi - lo) * idx as f64 / (spec.resolution - 1) as f64
    };
    let points: Vec<(f64, f64)> = if axes == 1 {
        (0..spec.resolution).map(|i| (grid_value(0, i), 0.0)).collect()
    } else {
        (0..spec.resolution)
            .flat_map(|i| (0..spec.resolution).map(move |j| (i, j)))
            .map(|(i, j)| (grid_value(0, i), grid_value(1, j)))
            .collect()
    };

    let rows: Vec<Vec<ScanRow>> = points
        .par_iter()
        .map(|&(p1, p2)| scan_point(spec, &expanded, p1, p2))
        .collect::<Result<_>>()?;

    Ok(ScanResult {
        family: spec.family.id(),
        n: spec.n,
        ks: spec.ks.clone(),
        probes: expanded.into_iter().map(|(label, _)| label).collect(),
        ranges: spec.ranges.clone(),
        resolution: spec.resolution,
        rows: rows.into_iter().flatten().collect(),
    })
}

fn scan_point(
    spec: &ScanSpec,
    probes: &[(String, crate::probes::ProbeVectors)],
    p1: f64,
    p2: f64,
) -> Result<Vec<ScanRow>> {
    let family = spec.family.id();
    let n = spec.n;
    let mut rows = Vec::with_capacity(spec.ks.len() * probes.len());
    if p1 + p2 > 1.0 + FEASIBLE_SLACK {
        for &k in &spec.ks {
            for _ in probes {
                rows.push(ScanRow {
                    family,
                    n,
                    k,
                    probe: "skipped".to_string(),
                    p1,
                    p2,
                    lhs: f64::NAN,
                    rhs_pair: f64::NAN,
                    rhs_diag: f64::NAN,
                    margin: f64::NAN,
                    detected: false,
                    best_margin: f64::NAN,
                });
            }
        }
        return Ok(rows);
    }
    let rho = family_state(&spec.family.point(n, p1, p2))?;
    let terms: Vec<CriterionTerms> = probes
        .iter()
        .map(|(_, vecs)| criteria::compute_terms(&rho, vecs))
        .collect::<Result<_>>()?;
    for &k in &spec.ks {
        let reports: Vec<_> = probes
            .iter()
            .zip(&terms)
            .map(|((label, _), t)| criteria::assemble(t, k, spec.eps, label))
            .collect::<Result<_>>()?;
        let best = reports
            .iter()
            .map(|r| r.margin)
            .fold(f64::NEG_INFINITY, f64::max);
        for report in reports {
            rows.push(ScanRow {
                family,
                n,
                k,
                probe: report.probe,
                p1,
                p2,
                lhs: report.lhs,
                rhs_pair: report.rhs_pair,
                rhs_diag: report.rhs_diag,
                margin: report.margin,
                detected: report.detected,
                best_margin: best,
            });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "family,n,k,probe,p1,p2,lhs,rhs_pair,rhs_diag,margin,detected";

/// Write the scan as CSV: pinned header, doubles at 17 significant digits
/// (so margins re-parse bit-exactly), detected as 0/1.
pub fn write_csv<W: Write>(result: &ScanResult, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            row.family,
            row.n,
            row.k,
            row.probe,
            row.p1,
            row.p2,
            row.lhs,
            row.rhs_pair,
            row.rhs_diag,
            row.margin,
            u8::from(row.detected),
        )?;
    }
    Ok(())
}

pub fn emit_csv(result: &ScanResult, path: &Path) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    write_csv(result, &mut file)?;
    file.flush()?;
    Ok(())
}
