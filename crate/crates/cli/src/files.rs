//! On-disk formats: design descriptors and dense matrices as JSON, results as
//! CSV with fixed headers.

use std::fs;
use std::path::{Path, PathBuf};

use gaseq_core::ga::GaConfig;
use gaseq_core::papr::{cost_f2, PaprConfig};
use gaseq_core::seqcore::{
    reconstruct, welch_cost_f1, ComplexMatrix, Descriptor, IndexSet, MaskSequence, SequenceSet,
    UnitaryFamily, UnitaryKind,
};
use gaseq_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DESCRIPTOR_FORMAT: &str = "gaseq-descriptor";
pub const MATRIX_FORMAT: &str = "gaseq-matrix";
pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Recorded costs must be reproduced to this accuracy.
const COST_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaEcho {
    pub population: usize,
    pub crossover_rate: f64,
    pub mutation_count: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl From<&GaConfig> for GaEcho {
    fn from(c: &GaConfig) -> Self {
        Self {
            population: c.population_size,
            crossover_rate: c.crossover_rate,
            mutation_count: c.mutation_count,
            iterations: c.max_iterations,
            seed: c.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptorFile {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub unitary: String,
    pub n: usize,
    pub m: usize,
    /// Sorted, 0-based row indices.
    pub omega: Vec<usize>,
    /// Phases over `Z_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_f1: Option<f64>,
    /// Mean linear PAPR of the top `delta`% columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_f2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage1: Option<GaEcho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage2: Option<GaEcho>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl DescriptorFile {
    pub fn from_descriptor(d: &Descriptor) -> Self {
        Self {
            format: DESCRIPTOR_FORMAT.into(),
            version: FORMAT_VERSION,
            tool_version: TOOL_VERSION.into(),
            label: None,
            unitary: d.unitary.family().name().into(),
            n: d.n(),
            m: d.m(),
            omega: d.omega.indices().to_vec(),
            mask: d.mask.as_ref().map(|v| v.phases().to_vec()),
            cost_variant: None,
            cost_f1: None,
            cost_f2: None,
            delta: None,
            oversample: None,
            seed: None,
            stage1: None,
            stage2: None,
        }
    }

    /// Checks every structural invariant and returns the descriptor.
    pub fn descriptor(&self) -> CliResult<Descriptor> {
        if self.format != DESCRIPTOR_FORMAT {
            return Err(invalid(format!("format is '{}', expected '{DESCRIPTOR_FORMAT}'", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(invalid(format!("unsupported descriptor version {}", self.version)));
        }
        let family: UnitaryFamily = self.unitary.parse().map_err(|e| invalid(format!("unitary: {e}")))?;
        let kind = UnitaryKind::new(family, self.n).map_err(|e| invalid(format!("unitary: {e}")))?;
        if self.omega.len() != self.m {
            return Err(invalid(format!("omega has {} entries but m = {}", self.omega.len(), self.m)));
        }
        if self.omega.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("omega must be strictly ascending"));
        }
        let omega = IndexSet::new(self.n, self.omega.clone()).map_err(|e| invalid(format!("omega: {e}")))?;
        let mask = match &self.mask {
            None => None,
            Some(phases) => {
                if phases.len() != self.m {
                    return Err(invalid(format!("mask has {} entries but m = {}", phases.len(), self.m)));
                }
                Some(MaskSequence::new(self.n, phases.clone()).map_err(|e| invalid(format!("mask: {e}")))?)
            }
        };
        Descriptor::new(kind, omega, mask).map_err(|e| invalid(e.to_string()))
    }

    pub fn papr_config(&self) -> CliResult<PaprConfig> {
        PaprConfig::new(self.oversample.unwrap_or(PaprConfig::DEFAULT_OVERSAMPLING))
            .map_err(|e| invalid(format!("oversample: {e}")))
    }

    /// Regenerates the set and checks recorded costs against it.
    pub fn reconstruct(&self) -> CliResult<SequenceSet> {
        let d = self.descriptor()?;
        let mut set = reconstruct(&d)?;
        if let Some(label) = &self.label {
            set = set.with_label(label.clone());
        }
        if let Some(recorded) = self.cost_f1 {
            let actual = welch_cost_f1(&set);
            if (actual - recorded).abs() > COST_TOL {
                return Err(invalid(format!("cost_f1 recorded as {recorded} but the set gives {actual}")));
            }
        }
        if let Some(recorded) = self.cost_f2 {
            let delta = self.delta.unwrap_or(GaConfig::DEFAULT_DELTA);
            let actual = cost_f2(&set, delta, self.papr_config()?)?;
            if (actual - recorded).abs() > COST_TOL * actual.abs().max(1.0) {
                return Err(invalid(format!("cost_f2 recorded as {recorded} but the set gives {actual}")));
            }
        }
        Ok(set)
    }
}

/// Dense matrix, row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub format: String,
    pub version: u32,
    pub tool_version: String,
    pub label: String,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_set(set: &SequenceSet) -> Self {
        let a = set.matrix();
        Self {
            format: MATRIX_FORMAT.into(),
            version: FORMAT_VERSION,
            tool_version: TOOL_VERSION.into(),
            label: set.label().into(),
            rows: a.rows(),
            cols: a.cols(),
            entries: a.as_slice().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_set(&self) -> CliResult<SequenceSet> {
        if self.format != MATRIX_FORMAT {
            return Err(invalid(format!("format is '{}', expected '{MATRIX_FORMAT}'", self.format)));
        }
        if self.version != FORMAT_VERSION {
            return Err(invalid(format!("unsupported matrix version {}", self.version)));
        }
        let data = self.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let a = ComplexMatrix::new(self.rows, self.cols, data).map_err(|e| invalid(e.to_string()))?;
        Ok(SequenceSet::from_matrix(a, self.label.clone()))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })
}

pub fn read_descriptor(path: &Path) -> CliResult<DescriptorFile> {
    parse(path, &read(path)?)
}

/// Loads a descriptor or matrix file, told apart by its `format` field.
pub fn load_set(path: &Path) -> CliResult<SequenceSet> {
    let text = read(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    let context = |e: CliError| match e {
        CliError::Validation(msg) => CliError::Validation(format!("{}: {msg}", path.display())),
        other => other,
    };
    match value.get("format").and_then(|f| f.as_str()) {
        Some(DESCRIPTOR_FORMAT) => parse::<DescriptorFile>(path, &text)?.reconstruct().map_err(context),
        Some(MATRIX_FORMAT) => parse::<MatrixFile>(path, &text)?.to_set().map_err(context),
        other => Err(invalid(format!("{}: unknown format {other:?}", path.display()))),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let wrap = |source| CliError::Csv {
        path: path.into(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

pub fn output_dir(out: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.into(),
        source,
    })?;
    Ok(out.to_path_buf())
}
