//! Plant files: nine row-major matrices, optional tolerances and targets.
//!
//! ```json
//! {
//!   "a": [[-1.0, 0.0], [0.0, -2.0]],
//!   "b": [[1.0], [0.0]],
//!   ...
//!   "tolerances": {"rank_rel": 1e-10},
//!   "target_poles": [[-1.0, 2.0], [-1.0, -2.0]]
//! }
//! ```
//!
//! An empty matrix may be written `[]` when it has no rows, or as a list of
//! empty rows when it has no columns.

use std::fmt;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::json::{matrix, num, to_canonical, FloatStyle};
use crate::ddp::Plant;
use crate::linalg::{Matrix, Tolerances};
use crate::spectrum::SpectrumMultiset;

/// What went wrong reading a plant file.
#[derive(Debug, Clone, PartialEq)]
pub struct FileError {
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(k) => write!(f, "field `{k}`: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for FileError {}

fn field_err(field: &str, message: impl Into<String>) -> FileError {
    FileError {
        field: Some(field.into()),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub rank_rel: Option<f64>,
    pub eig_match: Option<f64>,
    pub residual: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: Tolerances) -> Tolerances {
        Tolerances {
            rank_rel: self.rank_rel.unwrap_or(base.rank_rel),
            eig_match: self.eig_match.unwrap_or(base.eig_match),
            residual: self.residual.unwrap_or(base.residual),
        }
    }

    fn is_empty(&self) -> bool {
        self.rank_rel.is_none() && self.eig_match.is_none() && self.residual.is_none()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    d_y: Vec<Vec<f64>>,
    g_y: Vec<Vec<f64>>,
    e: Vec<Vec<f64>>,
    d_z: Vec<Vec<f64>>,
    g_z: Vec<Vec<f64>>,
    #[serde(default)]
    tolerances: Option<ToleranceOverrides>,
    #[serde(default)]
    target_poles: Option<Vec<[f64; 2]>>,
}

/// A parsed and validated plant file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantFile {
    pub plant: Plant,
    pub tolerances: ToleranceOverrides,
    pub target_poles: Option<Vec<[f64; 2]>>,
}

/// Rows and columns as written, `None` where `[]` leaves them open.
fn shape_of(rows: &[Vec<f64>]) -> (usize, Option<usize>) {
    (rows.len(), rows.first().map(|r| r.len()))
}

const DIM_NAMES: [&str; 5] = ["n", "m", "q", "p", "r"];

fn pick(
    dims: &mut [Option<(usize, &'static str)>; 5],
    k: usize,
    field: &'static str,
    what: &str,
    val: usize,
) -> Result<(), FileError> {
    match dims[k] {
        Some((v, src)) if v != val => Err(field_err(
            field,
            format!("has {val} {what}, but `{src}` fixes {} = {v}", DIM_NAMES[k]),
        )),
        Some(_) => Ok(()),
        None => {
            dims[k] = Some((val, field));
            Ok(())
        }
    }
}

fn to_matrix(field: &str, rows: &[Vec<f64>], nr: usize, nc: usize) -> Result<Matrix, FileError> {
    if rows.is_empty() {
        if nr == 0 || nc == 0 {
            return Ok(Matrix::zeros(nr, nc));
        }
        return Err(field_err(field, format!("is empty, expected {nr}x{nc}")));
    }
    if rows.len() != nr {
        return Err(field_err(
            field,
            format!("has {} rows, expected {nr}", rows.len()),
        ));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != nc {
            return Err(field_err(
                field,
                format!("row {} has {} entries, expected {nc}", i + 1, r.len()),
            ));
        }
        if let Some(j) = r.iter().position(|x| !x.is_finite()) {
            return Err(field_err(
                field,
                format!("entry ({}, {}) is not finite", i + 1, j + 1),
            ));
        }
    }
    Ok(Matrix::from_fn(nr, nc, |i, j| rows[i][j]))
}

impl PlantFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        let raw: Raw = serde_json::from_str(text).map_err(|e| FileError {
            field: None,
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: Raw) -> Result<Self, FileError> {
        // Each dimension is fixed by the first matrix that determines it.
        let mut dims: [Option<(usize, &'static str)>; 5] = [None; 5];
        const N: usize = 0;
        const M: usize = 1;
        const Q: usize = 2;
        const P: usize = 3;
        const R: usize = 4;
        let layout: [(&'static str, &Vec<Vec<f64>>, usize, usize); 9] = [
            ("a", &raw.a, N, N),
            ("b", &raw.b, N, M),
            ("h", &raw.h, N, Q),
            ("c", &raw.c, P, N),
            ("d_y", &raw.d_y, P, M),
            ("g_y", &raw.g_y, P, Q),
            ("e", &raw.e, R, N),
            ("d_z", &raw.d_z, R, M),
            ("g_z", &raw.g_z, R, Q),
        ];
        for (name, rows, dr, dc) in layout {
            let (nr, nc) = shape_of(rows);
            if nr > 0 || nc.is_some() {
                pick(&mut dims, dr, name, "rows", nr)?;
            }
            if let Some(nc) = nc {
                pick(&mut dims, dc, name, "columns", nc)?;
            }
        }
        let dim = |k: usize| dims[k].map_or(0, |(v, _)| v);
        let build = |(name, rows, dr, dc): (&str, &Vec<Vec<f64>>, usize, usize)| {
            to_matrix(name, rows, dim(dr), dim(dc))
        };
        let mut mats = layout.into_iter().map(build);
        let mut next = || mats.next().expect("nine matrices");
        let plant = Plant {
            a: next()?,
            b: next()?,
            h: next()?,
            c: next()?,
            d_y: next()?,
            g_y: next()?,
            e: next()?,
            d_z: next()?,
            g_z: next()?,
        }
        .validated()
        .map_err(|e| FileError {
            field: None,
            message: e.to_string(),
        })?;

        let tolerances = raw.tolerances.unwrap_or_default();
        for (name, v) in [
            ("rank_rel", tolerances.rank_rel),
            ("eig_match", tolerances.eig_match),
            ("residual", tolerances.residual),
        ] {
            if let Some(x) = v {
                if !(x.is_finite() && x > 0.0) {
                    return Err(field_err(
                        &format!("tolerances.{name}"),
                        "must be positive and finite",
                    ));
                }
            }
        }
        if let Some(tp) = &raw.target_poles {
            let t =
                SpectrumMultiset::from_pairs(tp, tolerances.apply(Tolerances::default()).eig_match);
            if !t.is_conjugate_closed() {
                return Err(field_err("target_poles", "not closed under conjugation"));
            }
        }
        Ok(Self {
            plant,
            tolerances,
            target_poles: raw.target_poles,
        })
    }

    pub fn from_plant(plant: Plant) -> Self {
        Self {
            plant,
            tolerances: ToleranceOverrides::default(),
            target_poles: None,
        }
    }

    pub fn targets(&self, tol: &Tolerances) -> Option<SpectrumMultiset> {
        self.target_poles
            .as_ref()
            .map(|tp| SpectrumMultiset::from_pairs(tp, tol.eig_match))
    }

    pub fn to_value(&self) -> Value {
        let p = &self.plant;
        let mut map = Map::new();
        for (k, m) in [
            ("a", &p.a),
            ("b", &p.b),
            ("h", &p.h),
            ("c", &p.c),
            ("d_y", &p.d_y),
            ("g_y", &p.g_y),
            ("e", &p.e),
            ("d_z", &p.d_z),
            ("g_z", &p.g_z),
        ] {
            map.insert(k.into(), matrix(m));
        }
        if !self.tolerances.is_empty() {
            let mut t = Map::new();
            for (k, v) in [
                ("rank_rel", self.tolerances.rank_rel),
                ("eig_match", self.tolerances.eig_match),
                ("residual", self.tolerances.residual),
            ] {
                if let Some(x) = v {
                    t.insert(k.into(), num(x));
                }
            }
            map.insert("tolerances".into(), Value::Object(t));
        }
        if let Some(tp) = &self.target_poles {
            map.insert(
                "target_poles".into(),
                Value::Array(
                    tp.iter()
                        .map(|[re, im]| json!([num(*re), num(*im)]))
                        .collect(),
                ),
            );
        }
        Value::Object(map)
    }

    /// The canonical text form.
    pub fn to_canonical(&self) -> String {
        to_canonical(&self.to_value(), FloatStyle::Shortest)
    }
}

/// Parse a comma-separated pole list such as `-1.5,-2,-1+2i,-1-2i`.
pub fn parse_poles(text: &str) -> Result<Vec<Complex64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_complex)
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let bad = || format!("cannot parse `{s}` as a pole (use forms like -2, -1+3i, -0.5-2j)");
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent or leading.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |x: &str| -> Result<f64, String> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => Ok(Complex64::new(
            body[..i].parse::<f64>().map_err(|_| bad())?,
            imag(&body[i..])?,
        )),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "a": [[0, 1], [-2, -3]], "b": [[0], [1]], "h": [[1], [0]],
        "c": [[1, 0]], "d_y": [[0]], "g_y": [[0]],
        "e": [], "d_z": [], "g_z": []
    }"#;

    #[test]
    fn infers_empty_shapes() {
        let f = PlantFile::parse(SMALL).unwrap();
        assert_eq!(f.plant.e.shape(), (0, 2));
        assert_eq!(f.plant.g_z.shape(), (0, 1));
    }

    #[test]
    fn canonical_round_trip() {
        let f = PlantFile::parse(SMALL).unwrap();
        let text = f.to_canonical();
        let g = PlantFile::parse(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(text, g.to_canonical());
    }

    #[test]
    fn reports_the_offending_field() {
        let bad = SMALL.replace(r#""b": [[0], [1]]"#, r#""b": [[0], [1, 2]]"#);
        let err = PlantFile::parse(&bad).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("b"));
        assert!(err.to_string().contains("row 2"), "{err}");

        let bad = SMALL.replace(r#""c": [[1, 0]]"#, r#""c": [[1, 0, 0]]"#);
        let err = PlantFile::parse(&bad).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("c"), "{err}");

        let err = PlantFile::parse("{\"a\": [[1]],\n \"b\": oops}").unwrap_err();
        assert!(err.message.starts_with("line 2"), "{err}");
    }

    #[test]
    fn rejects_unpaired_targets() {
        let text = SMALL.replace("\"g_z\": []", "\"g_z\": [], \"target_poles\": [[-1, 1]]");
        let err = PlantFile::parse(&text).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("target_poles"));
    }

    #[test]
    fn pole_syntax() {
        let p = parse_poles("-1.5, -2, -1+2i,-1-2i, 3j, -1e-3-4.5e1i").unwrap();
        let expect = [
            Complex64::new(-1.5, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(-1.0, 2.0),
            Complex64::new(-1.0, -2.0),
            Complex64::new(0.0, 3.0),
            Complex64::new(-1e-3, -45.0),
        ];
        assert_eq!(p, expect);
        assert!(parse_poles("-1+xi").is_err());
    }
}
