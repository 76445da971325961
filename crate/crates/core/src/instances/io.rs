use serde::{Deserialize, Serialize};

use super::{ProblemInstance, Sense};
use crate::error::{Error, Result};
use crate::scalar::{parse_scalar, Scalar};

/// On-disk form of an instance. Rationals are written as `"p/q"` in lowest
/// terms, or `"p"` when the denominator is 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub rows: Vec<Vec<usize>>,
    pub b: Vec<String>,
    pub w: Vec<String>,
    #[serde(rename = "X")]
    pub x: Vec<u32>,
    pub sense: Sense,
}

impl<T: Scalar> From<&ProblemInstance<T>> for InstanceFile {
    fn from(inst: &ProblemInstance<T>) -> Self {
        InstanceFile {
            n: inst.n(),
            m: inst.m(),
            rows: inst.rows().to_vec(),
            b: inst.b().iter().map(ToString::to_string).collect(),
            w: inst.w().iter().map(ToString::to_string).collect(),
            x: inst.bounds().to_vec(),
            sense: inst.sense(),
        }
    }
}

fn parse_all<T: Scalar>(field: &str, values: &[String]) -> Result<Vec<T>> {
    values
        .iter()
        .enumerate()
        .map(|(k, s)| {
            parse_scalar(s)
                .ok_or_else(|| Error::Parse(format!("{field}[{k}] = {s:?} is not a valid number")))
        })
        .collect()
}

impl InstanceFile {
    pub fn into_instance<T: Scalar>(self) -> Result<ProblemInstance<T>> {
        if self.m != self.rows.len() {
            return Err(Error::Parse(format!(
                "m = {} but {} rows were given",
                self.m,
                self.rows.len()
            )));
        }
        let b = parse_all("b", &self.b)?;
        let w = parse_all("w", &self.w)?;
        ProblemInstance::new(self.n, self.rows, b, w, self.x, self.sense)
    }
}

pub fn to_json<T: Scalar>(inst: &ProblemInstance<T>) -> String {
    serde_json::to_string_pretty(&InstanceFile::from(inst)).expect("instance serializes")
}

pub fn from_json<T: Scalar>(text: &str) -> Result<ProblemInstance<T>> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_instance()
}
