//! JSON code-definition files.
//!
//! ```json
//! {"q": 8, "reduction_poly": 11, "z": 491, "gamma": 3, "kappa": 4,
//!  "P": [[0,0,0,0],[0,1,11,26],[0,18,4,6]],
//!  "S": [[1,1,1,1],[1,2,3,4],[1,4,5,6]]}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldSpec, GfError};
use crate::qcldpc::{PowerMatrix, QcCode, QcError, ScalingMatrix};

#[derive(Debug, Error)]
pub enum CodeFileError {
    #[error("cannot read or write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed code file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field order {0} is not a power of two in 2..=256")]
    BadOrder(u32),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Code(#[from] QcError),
    #[error("declared {what} = {declared} but the matrices give {actual}")]
    Inconsistent { what: &'static str, declared: usize, actual: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeFile {
    pub q: u32,
    pub reduction_poly: u32,
    pub z: usize,
    pub gamma: usize,
    pub kappa: usize,
    #[serde(rename = "P")]
    pub power: Vec<Vec<u32>>,
    #[serde(rename = "S")]
    pub scaling: Vec<Vec<u32>>,
}

impl CodeFile {
    pub fn from_code(code: &QcCode) -> Self {
        CodeFile {
            q: code.field().q(),
            reduction_poly: code.field().reduction_poly(),
            z: code.z(),
            gamma: code.gamma(),
            kappa: code.kappa(),
            power: code.power().to_rows(),
            scaling: code.scaling().to_rows(),
        }
    }

    pub fn to_code(&self) -> Result<QcCode, CodeFileError> {
        if !self.q.is_power_of_two() || !(2..=256).contains(&self.q) {
            return Err(CodeFileError::BadOrder(self.q));
        }
        let field = FieldSpec::new(self.q.trailing_zeros(), self.reduction_poly)?;
        let power = PowerMatrix::new(self.z, &self.power)?;
        let scaling = ScalingMatrix::new(&field, &self.scaling)?;
        if power.gamma() != self.gamma {
            return Err(CodeFileError::Inconsistent { what: "gamma", declared: self.gamma, actual: power.gamma() });
        }
        if power.kappa() != self.kappa {
            return Err(CodeFileError::Inconsistent { what: "kappa", declared: self.kappa, actual: power.kappa() });
        }
        Ok(QcCode::new(field, power, scaling)?)
    }

    pub fn to_json(&self) -> String {
        let rows = |m: &[Vec<u32>]| {
            m.iter()
                .map(|r| format!("[{}]", r.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")))
                .collect::<Vec<_>>()
                .join(",\n    ")
        };
        format!(
            "{{\n  \"q\": {},\n  \"reduction_poly\": {},\n  \"z\": {},\n  \"gamma\": {},\n  \"kappa\": {},\n  \"P\": [\n    {}\n  ],\n  \"S\": [\n    {}\n  ]\n}}\n",
            self.q,
            self.reduction_poly,
            self.z,
            self.gamma,
            self.kappa,
            rows(&self.power),
            rows(&self.scaling)
        )
    }
}

pub fn parse_code(text: &str) -> Result<QcCode, CodeFileError> {
    serde_json::from_str::<CodeFile>(text)?.to_code()
}

pub fn load_code(path: impl AsRef<Path>) -> Result<QcCode, CodeFileError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| CodeFileError::Io { path: path.display().to_string(), source })?;
    parse_code(&text)
}

pub fn save_code(code: &QcCode, path: impl AsRef<Path>) -> Result<(), CodeFileError> {
    let path = path.as_ref();
    fs::write(path, CodeFile::from_code(code).to_json())
        .map_err(|source| CodeFileError::Io { path: path.display().to_string(), source })
}

/// The three codes shipped with the crate, as `(label, json)`.
pub const SHIPPED_CODES: [(&str, &str); 3] = [
    ("C1", include_str!("../data/codes/c1.json")),
    ("C2", include_str!("../data/codes/c2.json")),
    ("C3", include_str!("../data/codes/c3.json")),
];

pub fn shipped_code(label: &str) -> Option<QcCode> {
    SHIPPED_CODES
        .iter()
        .find(|(l, _)| l.eq_ignore_ascii_case(label))
        .map(|(_, text)| parse_code(text).expect("shipped code files are valid"))
}
