//! CSV and JSON serialization of weight matrices.
//!
//! CSV layout:
//!
//! ```text
//! # kind=simplex K=3 d=2
//! 1.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//!
//! Values carry 17 significant digits so every `f64` round-trips exactly.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PolytopeKind, WeightMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightFormat {
    Csv,
    Json,
}

impl WeightFormat {
    /// `.json` selects JSON; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => WeightFormat::Json,
            _ => WeightFormat::Csv,
        }
    }
}

impl FromStr for WeightFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(WeightFormat::Csv),
            "json" => Ok(WeightFormat::Json),
            other => Err(Error::format(format!("unknown weight format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WeightsJson {
    kind: PolytopeKind,
    #[serde(rename = "K")]
    classes: usize,
    d: usize,
    rows: Vec<Vec<f64>>,
}

impl WeightMatrix {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# kind={} K={} d={}\n",
            self.kind(),
            self.classes(),
            self.dim()
        );
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::format("empty weight file"))?;
        let (kind, classes, dim) = parse_header(header)?;

        let mut data = Vec::with_capacity(classes * dim);
        let mut count = 0;
        for (n, line) in lines.enumerate() {
            let before = data.len();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::format(format!("row {n}: cannot parse `{}`", field.trim()))
                })?;
                data.push(v);
            }
            if data.len() - before != dim {
                return Err(Error::format(format!(
                    "row {n} has {} values, header says d={dim}",
                    data.len() - before
                )));
            }
            count += 1;
        }
        if count != classes {
            return Err(Error::format(format!(
                "file has {count} rows, header says K={classes}"
            )));
        }
        WeightMatrix::from_rows(kind, classes, dim, data)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = WeightsJson {
            kind: self.kind(),
            classes: self.classes(),
            d: self.dim(),
            rows: self.rows().map(<[f64]>::to_vec).collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: WeightsJson = serde_json::from_str(text)?;
        if doc.rows.len() != doc.classes || doc.rows.iter().any(|r| r.len() != doc.d) {
            return Err(Error::format(format!(
                "rows do not match K={} d={}",
                doc.classes, doc.d
            )));
        }
        let data = doc.rows.into_iter().flatten().collect();
        WeightMatrix::from_rows(doc.kind, doc.classes, doc.d, data)
    }
}

fn parse_header(line: &str) -> Result<(PolytopeKind, usize, usize)> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::format("missing `# kind=... K=... d=...` header"))?;
    let (mut kind, mut classes, mut dim) = (None, None, None);
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::format(format!("bad header token `{token}`")))?;
        let bad = || Error::format(format!("bad header value `{token}`"));
        match key {
            "kind" => kind = Some(value.parse::<PolytopeKind>()?),
            "K" => classes = Some(value.parse::<usize>().map_err(|_| bad())?),
            "d" => dim = Some(value.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(Error::format(format!("unknown header key `{key}`"))),
        }
    }
    match (kind, classes, dim) {
        (Some(k), Some(c), Some(d)) => Ok((k, c, d)),
        _ => Err(Error::format("header must define kind, K and d")),
    }
}

pub fn write_weights(w: &WeightMatrix, path: &Path, format: WeightFormat) -> Result<()> {
    let text = match format {
        WeightFormat::Csv => w.to_csv(),
        WeightFormat::Json => w.to_json()?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// Reads either format; JSON is recognised by a leading `{`.
pub fn read_weights(path: &Path) -> Result<WeightMatrix> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        WeightMatrix::from_json(&text)
    } else {
        WeightMatrix::from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::polytope::{build, build_hadamard_with_dim, build_simplex};

    #[test]
    fn csv_header_and_shape() {
        let w = build_simplex(10).unwrap();
        let csv = w.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# kind=simplex K=10 d=9"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.split(',').count() == 9));
    }

    #[test]
    fn csv_rejects_row_count_mismatch() {
        let text = "# kind=orthoplex K=3 d=2\n1,0\n-1,0\n";
        assert!(matches!(WeightMatrix::from_csv(text), Err(Error::Format(_))));
        let text = "# kind=orthoplex K=2 d=2\n1,0\n-1\n";
        assert!(WeightMatrix::from_csv(text).is_err());
        assert!(WeightMatrix::from_csv("1,0\n").is_err());
        assert!(WeightMatrix::from_csv("# kind=cube K=2 d=1\n1\nabc\n").is_err());
    }

    #[test]
    fn json_keys() {
        let w = build_hadamard_with_dim(2, 2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&w.to_json().unwrap()).unwrap();
        assert_eq!(v["kind"], "hadamard");
        assert_eq!(v["K"], 2);
        assert_eq!(v["d"], 2);
        assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn read_detects_format() {
        let dir = tempfile::tempdir().unwrap();
        let w = build(PolytopeKind::Cube, 10).unwrap();
        for (name, fmt) in [("w.csv", WeightFormat::Csv), ("w.json", WeightFormat::Json)] {
            let path = dir.path().join(name);
            assert_eq!(WeightFormat::from_path(&path), fmt);
            write_weights(&w, &path, fmt).unwrap();
            assert_eq!(read_weights(&path).unwrap(), w);
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(k in 2usize..60, kind_ix in 0usize..4) {
            let w = build(PolytopeKind::ALL[kind_ix], k).unwrap();
            prop_assert_eq!(&WeightMatrix::from_csv(&w.to_csv()).unwrap(), &w);
            prop_assert_eq!(&WeightMatrix::from_json(&w.to_json().unwrap()).unwrap(), &w);
        }
    }
}
