//! Controller files: `{"a_c", "b_c", "c_c", "d_c"}` as row-major arrays.

use serde::Deserialize;
use serde_json::{Map, Value};

use super::json::{matrix, to_canonical, FloatStyle};
use super::plant_file::FileError;
use crate::ddp::Plant;
use crate::linalg::Matrix;
use crate::synth::Controller;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    a_c: Vec<Vec<f64>>,
    b_c: Vec<Vec<f64>>,
    c_c: Vec<Vec<f64>>,
    d_c: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerFile {
    pub controller: Controller,
}

fn build(field: &str, rows: &[Vec<f64>], nr: usize, nc: usize) -> Result<Matrix, FileError> {
    let err = |message: String| FileError {
        field: Some(field.into()),
        message,
    };
    if rows.is_empty() && (nr == 0 || nc == 0) {
        return Ok(Matrix::zeros(nr, nc));
    }
    if rows.len() != nr {
        return Err(err(format!("has {} rows, expected {nr}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != nc {
            return Err(err(format!(
                "row {} has {} entries, expected {nc}",
                i + 1,
                r.len()
            )));
        }
        if r.iter().any(|x| !x.is_finite()) {
            return Err(err(format!("row {} has a non-finite entry", i + 1)));
        }
    }
    Ok(Matrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

impl ControllerFile {
    /// Parse against the plant it is meant for; the order is taken from `a_c`.
    pub fn parse(text: &str, plant: &Plant) -> Result<Self, FileError> {
        let raw: Raw = serde_json::from_str(text).map_err(|e| FileError {
            field: None,
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        let s = raw.a_c.len();
        let (m, p) = (plant.m(), plant.p());
        Ok(Self {
            controller: Controller {
                a_c: build("a_c", &raw.a_c, s, s)?,
                b_c: build("b_c", &raw.b_c, s, p)?,
                c_c: build("c_c", &raw.c_c, m, s)?,
                d_c: build("d_c", &raw.d_c, m, p)?,
            },
        })
    }

    pub fn to_canonical(&self) -> String {
        let c = &self.controller;
        let mut map = Map::new();
        map.insert("a_c".into(), matrix(&c.a_c));
        map.insert("b_c".into(), matrix(&c.b_c));
        map.insert("c_c".into(), matrix(&c.c_c));
        map.insert("d_c".into(), matrix(&c.d_c));
        to_canonical(&Value::Object(map), FloatStyle::Shortest)
    }
}
