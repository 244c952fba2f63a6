//! JSON map definitions:
//! `{ "factors": [ { "b": [re, im], "delta": [re, im], "p": "y^2 - 1" } ] }`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::henon::{make_henon, HenonFactor, HenonMap};
use crate::poly::parse_polynomial;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub b: [f64; 2],
    pub delta: [f64; 2],
    pub p: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub factors: Vec<FactorSpec>,
}

impl MapSpec {
    pub fn from_factors(factors: &[HenonFactor]) -> Self {
        MapSpec {
            factors: factors
                .iter()
                .map(|f| FactorSpec {
                    b: [f.b().re, f.b().im],
                    delta: [f.delta().re, f.delta().im],
                    p: f.p().to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map spec serializes")
    }

    /// Parses JSON text; syntax and schema errors carry line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::MapFile(format!("line {}, column {}: {}", e.line(), e.column(), strip_position(&e)))
        })
    }

    pub fn factors(&self) -> Result<Vec<HenonFactor>> {
        self.factors
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let p = parse_polynomial(&f.p)
                    .map_err(|e| Error::MapFile(format!("factor {k}, field \"p\": {e}")))?;
                HenonFactor::new(
                    Complex64::new(f.b[0], f.b[1]),
                    Complex64::new(f.delta[0], f.delta[1]),
                    p,
                )
                .map_err(|e| match e {
                    Error::InvalidFactor { reason, .. } => Error::InvalidFactor { index: k, reason },
                    other => other,
                })
            })
            .collect()
    }

    pub fn build(&self) -> Result<HenonMap> {
        make_henon(self.factors()?)
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let full = e.to_string();
    match full.rfind(" at line ") {
        Some(k) => full[..k].to_string(),
        None => full,
    }
}

pub fn load_map_spec(path: &Path) -> Result<MapSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MapFile(format!("{}: {e}", path.display())))?;
    MapSpec::parse(&text).map_err(|e| match e {
        Error::MapFile(m) => Error::MapFile(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Reads, validates and constructs the map in `path`.
pub fn load_map(path: &Path) -> Result<HenonMap> {
    load_map_spec(path)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds() {
        let spec = MapSpec::parse(r#"{ "factors": [ { "b": [1, 0], "delta": [1, 0], "p": "y^2" } ] }"#).unwrap();
        let h = spec.build().unwrap();
        assert_eq!(h.degree(), 2);
        let again = MapSpec::parse(&MapSpec::from_factors(h.factors()).to_json()).unwrap();
        assert_eq!(again.factors().unwrap(), h.factors());
    }

    #[test]
    fn json_errors_have_positions() {
        let err = MapSpec::parse("{\n  \"factors\": [ { \"b\": [1, 0], }\n] }").unwrap_err();
        match err {
            Error::MapFile(m) => assert!(m.starts_with("line 2, column"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            MapSpec::parse(r#"{ "factors": [], "extra": 1 }"#),
            Err(Error::MapFile(_))
        ));
    }

    #[test]
    fn polynomial_errors_name_the_factor() {
        let spec = MapSpec::parse(r#"{ "factors": [ { "b": [1, 0], "delta": [1, 0], "p": "y^2 +* 3" } ] }"#)
            .unwrap();
        match spec.build() {
            Err(Error::MapFile(m)) => assert!(m.contains("factor 0") && m.contains("column"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_factor_is_indexed() {
        let spec = MapSpec::parse(
            r#"{ "factors": [ { "b": [1, 0], "delta": [1, 0], "p": "y^2" }, { "b": [0, 0], "delta": [1, 0], "p": "y^2" } ] }"#,
        )
        .unwrap();
        assert!(matches!(spec.build(), Err(Error::InvalidFactor { index: 1, .. })));
    }
}
