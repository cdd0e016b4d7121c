//! JSON model, composite, measurement, scenario and suite files.
//!
//! A model file has the top-level keys `space`, `states`, `observables`,
//! `densities` and `responses`; complex amplitudes are `[re, im]` pairs.
//! Loading validates every invariant and reports the first violation.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::composer::{CompositeFile, CompositeModel};
use crate::error::{Error, Result};
use crate::hvframe::{HVModel, ModelParts};
use crate::pbrcheck::ScenarioFile;
use crate::qcore::ProjectiveMeasurement;
use crate::transforms::EquivalenceSuite;

fn read<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_model(text: &str) -> Result<HVModel> {
    let parts: ModelParts = serde_json::from_str(text)?;
    HVModel::new(parts)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<HVModel> {
    let parts: ModelParts = read(path.as_ref())?;
    HVModel::new(parts)
}

pub fn save_model(path: impl AsRef<Path>, model: &HVModel) -> Result<()> {
    write(path.as_ref(), model)
}

pub fn load_composite(path: impl AsRef<Path>) -> Result<CompositeModel> {
    let file: CompositeFile = read(path.as_ref())?;
    CompositeModel::try_from(file)
}

pub fn save_composite(path: impl AsRef<Path>, composite: &CompositeModel) -> Result<()> {
    write(path.as_ref(), composite)
}

pub fn load_measurement(path: impl AsRef<Path>) -> Result<ProjectiveMeasurement> {
    read(path.as_ref())
}

pub fn save_measurement(path: impl AsRef<Path>, meas: &ProjectiveMeasurement) -> Result<()> {
    write(path.as_ref(), meas)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile> {
    read(path.as_ref())
}

pub fn load_suite(path: impl AsRef<Path>) -> Result<EquivalenceSuite> {
    read(path.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
      "space": {"label": "unit", "cells": [{"id": "lo", "measure": 0.5}, {"id": "hi", "measure": 0.5}]},
      "states": {"zero": [[1.0, 0.0], [0.0, 0.0]]},
      "observables": {"Z": {"outcomes": ["+1", "-1"], "basis": [[[1,0],[0,0]], [[0,0],[1,0]]]}},
      "densities": {"zero": {"lo": WEIGHT, "hi": 1.0}},
      "responses": [{"observable": "Z", "state_tag": "zero", "rows": {"lo": [1.0, ROW], "hi": [1.0, 0.0]}}]
    }"#;

    fn model(weight: &str, row: &str) -> Result<HVModel> {
        parse_model(&BASE.replace("WEIGHT", weight).replace("ROW", row))
    }

    #[test]
    fn valid_file_loads() {
        let m = model("1.0", "0.0").unwrap();
        assert_eq!(m.space().len(), 2);
    }

    #[test]
    fn short_density_names_the_state() {
        let err = model("0.8", "0.0").unwrap_err().to_string();
        assert!(err.contains("density normalised"), "{err}");
        assert!(err.contains("zero"), "{err}");
    }

    #[test]
    fn long_row_names_cell_and_observable() {
        let err = model("1.0", "0.1").unwrap_err().to_string();
        assert!(err.contains("cell `lo`"), "{err}");
        assert!(err.contains("observable `Z`"), "{err}");
    }

    #[test]
    fn syntax_errors_are_parse_errors() {
        assert!(matches!(parse_model("{"), Err(Error::Parse(_))));
    }
}
