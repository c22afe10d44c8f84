//! JSON documents: channels, plain matrices, POVMs and family specifications.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::matlin::{c, ComplexMatrix};

pub const FORMAT_VERSION: u32 = 1;

/// Rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &ComplexMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows) -> Result<ComplexMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if r == 0 || cols == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::Shape("ragged matrix rows".into()));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite matrix entry".into()));
    }
    Ok(ComplexMatrix::from_fn(r, cols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported format_version {v}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDocument {
    pub format_version: u32,
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixRows>,
}

impl ChannelDocument {
    pub fn from_channel(k: &KrausChannel) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            dim_in: k.dim_in(),
            dim_out: k.dim_out(),
            kraus: k.kraus().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        check_version(self.format_version)?;
        let kraus = self
            .kraus
            .iter()
            .map(rows_to_matrix)
            .collect::<Result<Vec<_>>>()?;
        let k = KrausChannel::new(kraus)?;
        if (k.dim_in(), k.dim_out()) != (self.dim_in, self.dim_out) {
            return Err(Error::Shape(format!(
                "declared {}->{} but Kraus operators are {}->{}",
                self.dim_in,
                self.dim_out,
                k.dim_in(),
                k.dim_out()
            )));
        }
        Ok(k)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel document serializes")
    }
}

pub fn load_channel(path: &Path) -> Result<KrausChannel> {
    ChannelDocument::parse(&read(path)?)?.to_channel()
}

/// A single matrix (unitary, generator, density matrix).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub format_version: u32,
    pub matrix: MatrixRows,
}

pub fn load_matrix(path: &Path) -> Result<ComplexMatrix> {
    let doc: MatrixDocument = serde_json::from_str(&read(path)?)?;
    check_version(doc.format_version)?;
    rows_to_matrix(&doc.matrix)
}

/// The unitary of a single-operator channel document or a matrix document.
pub fn load_unitary(path: &Path) -> Result<ComplexMatrix> {
    let text = read(path)?;
    let m = match ChannelDocument::parse(&text) {
        Ok(doc) => {
            check_version(doc.format_version)?;
            match doc.kraus.as_slice() {
                [only] => rows_to_matrix(only)?,
                _ => {
                    return Err(Error::InvalidArgument(
                        "unitary document needs exactly one Kraus operator".into(),
                    ))
                }
            }
        }
        Err(_) => {
            let doc: MatrixDocument = serde_json::from_str(&text)?;
            check_version(doc.format_version)?;
            rows_to_matrix(&doc.matrix)?
        }
    };
    if !m.is_square() || !crate::matlin::is_unitary(&m, 1e-8) {
        return Err(Error::InvalidArgument(format!(
            "{} does not hold a unitary",
            path.display()
        )));
    }
    Ok(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmDocument {
    pub format_version: u32,
    pub elements: Vec<MatrixRows>,
}

pub fn load_povm(path: &Path) -> Result<Vec<ComplexMatrix>> {
    let doc: PovmDocument = serde_json::from_str(&read(path)?)?;
    check_version(doc.format_version)?;
    doc.elements.iter().map(rows_to_matrix).collect()
}

/// Builtin family by name with string parameters; the parameter names each
/// family accepts are fixed per format version.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub format_version: u32,
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

impl FamilySpec {
    /// From `NAME` and `key=value,key=value`.
    pub fn from_flags(name: &str, params: Option<&str>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for item in params.unwrap_or("").split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("family parameter '{item}' is not key=value"))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self {
            format_version: FORMAT_VERSION,
            name: name.to_string(),
            params: map,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let spec: FamilySpec = serde_json::from_str(&read(path)?)?;
        check_version(spec.format_version)?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing, rotation_x};

    #[test]
    fn channel_round_trip_is_exact() {
        for k in [rotation_x(0.3), dephasing(0.5).unwrap()] {
            let doc = ChannelDocument::from_channel(&k);
            let back = ChannelDocument::parse(&doc.to_json()).unwrap();
            assert_eq!(doc, back);
            assert!(back.to_channel().unwrap().approx_eq(&k, 0.0));
        }
    }

    #[test]
    fn seventeen_digit_decimals_survive() {
        let text = r#"{"format_version":1,"dim_in":1,"dim_out":1,
            "kraus":[[[[0.60000000000000009,0.0]]],[[[0.79999999999999993,0.0]]]]}"#;
        let doc = ChannelDocument::parse(text).unwrap();
        let again = ChannelDocument::parse(&doc.to_json()).unwrap();
        assert_eq!(doc.kraus[0][0][0][0].to_bits(), 0.600_000_000_000_000_1f64.to_bits());
        assert_eq!(doc, again);
    }

    #[test]
    fn rejects_bad_documents() {
        let wrong_version = r#"{"format_version":2,"dim_in":1,"dim_out":1,"kraus":[[[[1,0]]]]}"#;
        assert!(ChannelDocument::parse(wrong_version).unwrap().to_channel().is_err());
        let wrong_dims = r#"{"format_version":1,"dim_in":2,"dim_out":2,"kraus":[[[[1,0]]]]}"#;
        assert!(ChannelDocument::parse(wrong_dims).unwrap().to_channel().is_err());
        let not_tp = r#"{"format_version":1,"dim_in":1,"dim_out":1,"kraus":[[[[2,0]]]]}"#;
        assert!(ChannelDocument::parse(not_tp).unwrap().to_channel().is_err());
        assert!(ChannelDocument::parse(r#"{"format_version":1}"#).is_err());
    }

    #[test]
    fn family_flags_parse() {
        let f = FamilySpec::from_flags("unitary-generator", Some("pauli=z, scale=0.5")).unwrap();
        assert_eq!(f.params["pauli"], "z");
        assert_eq!(f.params["scale"], "0.5");
        assert!(FamilySpec::from_flags("rotation", Some("oops")).is_err());
    }
}
