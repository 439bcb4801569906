//! JSON state files.
//!
//! Mixed states are `{"dims": [..], "re": [[..]], "im": [[..]]}`, pure states
//! are `{"dims": [..], "re": [..], "im": [..]}`. A missing `im` reads as zero.

use std::fs;
use std::path::Path;

use purent_core::{c64, DimList, HermitianOp, PureState};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Mixed {
        dims: Vec<usize>,
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Vec<Vec<f64>>,
    },
    Pure {
        dims: Vec<usize>,
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

/// A parsed and validated state.
#[derive(Clone, Debug)]
pub enum State {
    Mixed(HermitianOp),
    Pure(PureState),
}

impl State {
    pub fn dims(&self) -> &DimList {
        match self {
            State::Mixed(r) => r.dims(),
            State::Pure(p) => p.dims(),
        }
    }

    pub fn density(&self) -> HermitianOp {
        match self {
            State::Mixed(r) => r.clone(),
            State::Pure(p) => p.projector(),
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

impl StateFile {
    pub fn from_op(op: &HermitianOp) -> Self {
        let n = op.side();
        let re = (0..n)
            .map(|i| (0..n).map(|j| op.entry(i, j).re).collect())
            .collect();
        let im = (0..n)
            .map(|i| (0..n).map(|j| op.entry(i, j).im).collect())
            .collect();
        StateFile::Mixed {
            dims: op.dims().as_slice().to_vec(),
            re,
            im,
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        StateFile::Pure {
            dims: psi.dims().as_slice().to_vec(),
            re: psi.amplitudes().iter().map(|z| z.re).collect(),
            im: psi.amplitudes().iter().map(|z| z.im).collect(),
        }
    }

    /// Validates Hermiticity, unit trace and positivity (mixed) or the norm
    /// (pure), all within 1e-9.
    pub fn to_state(&self) -> Result<State, CliError> {
        match self {
            StateFile::Mixed { dims, re, im } => {
                let dims = DimList::new(dims.clone()).map_err(input)?;
                let im = if im.is_empty() {
                    re.iter().map(|r| vec![0.0; r.len()]).collect()
                } else {
                    im.clone()
                };
                let op = HermitianOp::from_parts(dims, re, &im).map_err(input)?;
                op.check_state(1e-9).map_err(input)?;
                Ok(State::Mixed(op))
            }
            StateFile::Pure { dims, re, im } => {
                let dims = DimList::new(dims.clone()).map_err(input)?;
                let im = if im.is_empty() {
                    vec![0.0; re.len()]
                } else {
                    im.clone()
                };
                if im.len() != re.len() {
                    return Err(CliError::Input(format!(
                        "{} real and {} imaginary amplitudes",
                        re.len(),
                        im.len()
                    )));
                }
                let amps = re.iter().zip(&im).map(|(&a, &b)| c64::new(a, b)).collect();
                Ok(State::Pure(PureState::new(amps, dims).map_err(input)?))
            }
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(input)?;
        fs::write(path, text + "\n")
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub fn read_state(path: &Path) -> Result<State, CliError> {
    StateFile::read(path)?.to_state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use purent_core::states::{haar_random_pure, horodecki_state};

    #[test]
    fn mixed_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.json");
        let file = StateFile::from_op(&horodecki_state(0.37).unwrap());
        file.write(&path).unwrap();
        assert_eq!(StateFile::read(&path).unwrap(), file);
    }

    #[test]
    fn pure_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let psi = haar_random_pure(DimList::new(vec![3, 3, 3]).unwrap(), 9);
        let file = StateFile::from_pure(&psi);
        file.write(&path).unwrap();
        let back = StateFile::read(&path).unwrap();
        assert_eq!(back, file);
        assert!(matches!(back.to_state().unwrap(), State::Pure(_)));
    }

    #[test]
    fn missing_imaginary_part() {
        let f: StateFile = serde_json::from_str(r#"{"dims":[2],"re":[[0.5,0],[0,0.5]]}"#).unwrap();
        let State::Mixed(r) = f.to_state().unwrap() else {
            panic!("expected mixed")
        };
        assert!((r.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_states() {
        for text in [
            r#"{"dims":[2],"re":[[0.5,0.2],[0,0.5]]}"#,
            r#"{"dims":[2],"re":[[1.5,0],[0,-0.5]]}"#,
            r#"{"dims":[2],"re":[1.0,1.0]}"#,
            r#"{"dims":[3],"re":[[1,0],[0,0]]}"#,
        ] {
            let f: StateFile = serde_json::from_str(text).unwrap();
            assert!(matches!(f.to_state(), Err(CliError::Input(_))), "{text}");
        }
        assert!(serde_json::from_str::<StateFile>(r#"{"dims":[2]}"#).is_err());
    }
}
