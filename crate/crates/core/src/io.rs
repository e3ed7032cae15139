//! JSON schemas for measure, system and potential files.
//!
//! ```json
//! { "space": ["a", "b"], "weights": [0.5, 0.5] }
//! { "space": ["a", "b"], "map": [1, 0], "weights": [2.0, 8.0], "phi": [0.0, 1.0] }
//! { "phi": [0.0, 1.0] }
//! ```
//!
//! A measure file is read as a signed measure; callers that need a
//! nonnegative one convert with `FiniteMeasure::try_from`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynsys::{DynamicalSystem, Potential, TransferOperator};
use crate::error::{Error, Result};
use crate::measure::{AtomSpace, Measure, SignedMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub space: Vec<String>,
    pub weights: Vec<f64>,
}

impl MeasureFile {
    pub fn into_measure(self) -> Result<SignedMeasure> {
        let space = AtomSpace::new(self.space)?;
        SignedMeasure::new(space, self.weights)
    }

    pub fn from_measure<M: Measure>(m: &M) -> Self {
        MeasureFile { space: m.space().labels().to_vec(), weights: m.weights().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub space: Vec<String>,
    /// 0-based images `alpha(x)`.
    pub map: Vec<usize>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
}

impl SystemFile {
    pub fn into_operator(self) -> Result<(TransferOperator, Option<Potential>)> {
        let space = AtomSpace::new(self.space)?;
        let system = DynamicalSystem::new(space.clone(), self.map)?;
        let op = TransferOperator::new(system, self.weights)?;
        let phi = match self.phi {
            Some(v) => {
                space.check_len(v.len())?;
                Some(Potential::new(v)?)
            }
            None => None,
        };
        Ok((op, phi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<Vec<String>>,
    pub phi: Vec<f64>,
}

impl PotentialFile {
    /// Checks the potential against `space` (labels too, if the file has them).
    pub fn into_potential(self, space: &AtomSpace) -> Result<Potential> {
        if let Some(labels) = self.space {
            space.check_same(&AtomSpace::new(labels)?)?;
        }
        space.check_len(self.phi.len())?;
        Potential::new(self.phi)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_measure(text: &str) -> Result<SignedMeasure> {
    parse::<MeasureFile>(text)?.into_measure()
}

pub fn read_measure(path: &Path) -> Result<SignedMeasure> {
    parse_measure(&read(path)?)
}

pub fn parse_system(text: &str) -> Result<(TransferOperator, Option<Potential>)> {
    parse::<SystemFile>(text)?.into_operator()
}

pub fn read_system(path: &Path) -> Result<(TransferOperator, Option<Potential>)> {
    parse_system(&read(path)?)
}

pub fn parse_potential(text: &str, space: &AtomSpace) -> Result<Potential> {
    parse::<PotentialFile>(text)?.into_potential(space)
}

pub fn read_potential(path: &Path, space: &AtomSpace) -> Result<Potential> {
    parse_potential(&read(path)?, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FiniteMeasure;

    #[test]
    fn measure_file_round_trip() {
        let nu = parse_measure(r#"{"space": ["a", "b", "c"], "weights": [0.5, -1.0, 0]}"#).unwrap();
        assert_eq!(nu.weights(), &[0.5, -1.0, 0.0]);
        assert_eq!(nu.space().labels(), &["a", "b", "c"]);
        let text = serde_json::to_string(&MeasureFile::from_measure(&nu)).unwrap();
        assert_eq!(parse_measure(&text).unwrap(), nu);
        assert!(FiniteMeasure::try_from(nu).is_err());
    }

    #[test]
    fn measure_file_errors() {
        assert!(matches!(parse_measure("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_measure(r#"{"space": ["a"], "weights": [1, 2]}"#),
            Err(Error::SpaceMismatch { .. })
        ));
        assert!(matches!(
            parse_measure(r#"{"space": ["a", "a"], "weights": [1, 2]}"#),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(parse_measure(r#"{"space": ["a"], "weights": [1], "extra": 1}"#).is_err());
    }

    #[test]
    fn system_file() {
        let (op, phi) = parse_system(
            r#"{"space": ["x", "y"], "map": [1, 0], "weights": [2, 8], "phi": [0.5, 0]}"#,
        )
        .unwrap();
        assert_eq!(op.system().map(), &[1, 0]);
        assert_eq!(op.weights(), &[2.0, 8.0]);
        assert_eq!(phi.unwrap().values(), &[0.5, 0.0]);
        let (_, phi) = parse_system(r#"{"space": ["x"], "map": [0], "weights": [1]}"#).unwrap();
        assert!(phi.is_none());
        assert!(matches!(
            parse_system(r#"{"space": ["x"], "map": [1], "weights": [1]}"#),
            Err(Error::MapOutOfRange { .. })
        ));
        assert!(matches!(
            parse_system(r#"{"space": ["x"], "map": [0], "weights": [-1]}"#),
            Err(Error::NegativeWeight { .. })
        ));
    }

    #[test]
    fn potential_file() {
        let space = AtomSpace::new(["x", "y"]).unwrap();
        assert_eq!(parse_potential(r#"{"phi": [1, 2]}"#, &space).unwrap().values(), &[1.0, 2.0]);
        assert!(parse_potential(r#"{"phi": [1]}"#, &space).is_err());
        assert!(parse_potential(r#"{"space": ["y", "x"], "phi": [1, 2]}"#, &space).is_err());
    }
}
