//! JSON file formats for states, probes, and measurement plans.
//!
//! Complex numbers travel as `[re, im]` pairs and matrices as row-major
//! nested lists. A state file carries `dims` plus exactly one of a dense
//! `matrix` or a pure-state `ensemble`; loading runs the same validation
//! as the in-memory constructors, so a bad file is rejected with the
//! violated invariant named.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::MeasurementPlan;
use crate::probes::Probe;
use crate::tensor::{C64, CMatrix, ComplexVector, DensityForm, DensityOperator, SystemDims};

fn pack(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpack(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

fn pack_vector(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(pack).collect()
}

fn unpack_vector(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().copied().map(unpack).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct EnsembleEntry {
    weight: f64,
    vector: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ensemble: Option<Vec<EnsembleEntry>>,
}

pub fn state_to_json(rho: &DensityOperator) -> String {
    let file = StateFile {
        dims: rho.dims().dims().to_vec(),
        matrix: match rho.form() {
            DensityForm::Dense(m) => Some(
                (0..m.dim())
                    .map(|r| (0..m.dim()).map(|c| pack(m.get(r, c))).collect())
                    .collect(),
            ),
            DensityForm::Ensemble(_) => None,
        },
        ensemble: match rho.form() {
            DensityForm::Dense(_) => None,
            DensityForm::Ensemble(parts) => Some(
                parts
                    .iter()
                    .map(|(w, psi)| EnsembleEntry {
                        weight: *w,
                        vector: pack_vector(psi.entries()),
                    })
                    .collect(),
            ),
        },
    };
    serde_json::to_string_pretty(&file).expect("state serialization cannot fail")
}

pub fn state_from_json(text: &str) -> Result<DensityOperator> {
    let file: StateFile = serde_json::from_str(text)?;
    let dims = SystemDims::new(file.dims)?;
    match (file.matrix, file.ensemble) {
        (Some(rows), None) => {
            let matrix = CMatrix::from_rows(
                rows.iter().map(|row| unpack_vector(row)).collect(),
            )?;
            DensityOperator::from_matrix(dims, matrix)
        }
        (None, Some(entries)) => {
            let parts = entries
                .iter()
                .map(|e| {
                    Ok((
                        e.weight,
                        ComplexVector::new(dims.clone(), unpack_vector(&e.vector))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            DensityOperator::from_ensemble(dims, parts)
        }
        (Some(_), Some(_)) => Err(Error::BadFile {
            detail: "state file has both a matrix and an ensemble; exactly one is allowed".into(),
        }),
        (None, None) => Err(Error::BadFile {
            detail: "state file has neither a matrix nor an ensemble".into(),
        }),
    }
}

pub fn load_state(path: &Path) -> Result<DensityOperator> {
    state_from_json(&fs::read_to_string(path)?)
}

pub fn save_state(path: &Path, rho: &DensityOperator) -> Result<()> {
    Ok(fs::write(path, state_to_json(rho))?)
}

#[derive(Debug, Serialize, Deserialize)]
struct ProbeFile {
    dims: Vec<usize>,
    base: Vec<Vec<[f64; 2]>>,
    flipped: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

pub fn probe_to_json(probe: &Probe) -> String {
    let n = probe.dims().n();
    let file = ProbeFile {
        dims: probe.dims().dims().to_vec(),
        base: (0..n).map(|l| pack_vector(probe.base(l))).collect(),
        flipped: (0..n).map(|l| pack_vector(probe.flipped(l))).collect(),
        label: Some(probe.label().to_string()),
    };
    serde_json::to_string_pretty(&file).expect("probe serialization cannot fail")
}

pub fn probe_from_json(text: &str) -> Result<Probe> {
    let file: ProbeFile = serde_json::from_str(text)?;
    let dims = SystemDims::new(file.dims)?;
    Probe::custom(
        &dims,
        file.base.iter().map(|v| unpack_vector(v)).collect(),
        file.flipped.iter().map(|v| unpack_vector(v)).collect(),
        file.label.unwrap_or_else(|| "custom".to_string()),
    )
}

pub fn load_probe(path: &Path) -> Result<Probe> {
    probe_from_json(&fs::read_to_string(path)?)
}

pub fn save_probe(path: &Path, probe: &Probe) -> Result<()> {
    Ok(fs::write(path, probe_to_json(probe))?)
}

#[derive(Debug, Serialize)]
struct PlanSetting {
    role: &'static str,
    sites: Vec<usize>,
    /// One Hermitian matrix per site, row-major.
    factors: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Serialize)]
struct PlanFile<'a> {
    n: usize,
    dims: Vec<usize>,
    probe: &'a str,
    settings: Vec<PlanSetting>,
}

pub fn plan_to_json(plan: &MeasurementPlan) -> String {
    let file = PlanFile {
        n: plan.n(),
        dims: plan.dims.dims().to_vec(),
        probe: &plan.probe,
        settings: plan
            .settings
            .iter()
            .map(|setting| PlanSetting {
                role: setting.role.tag(),
                sites: setting.role.sites(),
                factors: setting
                    .factors
                    .iter()
                    .map(|f| {
                        (0..f.dim())
                            .map(|r| (0..f.dim()).map(|c| pack(f.get(r, c))).collect())
                            .collect()
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("plan serialization cannot fail")
}
