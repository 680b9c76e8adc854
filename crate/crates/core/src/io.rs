//! JSON file formats for models and spin functions.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function_classes::{make_family, FamilyKind};
use crate::model::{Edge, PottsModel, SpinFunction};

/// `{"q": 3, "vertices": ["u", "v"], "edges": [{"u": "u", "v": "v", "J": 0.5}], "fields": {"u": 0.1}}`
///
/// Vertices missing from `fields` get field 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub q: usize,
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeEntry>,
    #[serde(default)]
    pub fields: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub u: String,
    pub v: String,
    #[serde(rename = "J")]
    pub coupling: f64,
}

impl ModelFile {
    pub fn from_model(model: &PottsModel) -> Self {
        let name = |i: usize| model.vertices()[i].clone();
        ModelFile {
            q: model.q(),
            vertices: model.vertices().to_vec(),
            edges: model
                .edges()
                .iter()
                .map(|e| EdgeEntry { u: name(e.u), v: name(e.v), coupling: e.coupling })
                .collect(),
            fields: model.vertices().iter().cloned().zip(model.fields().iter().copied()).collect(),
        }
    }

    pub fn into_model(self) -> Result<PottsModel> {
        let index = |name: &str| {
            self.vertices.iter().position(|v| v == name).ok_or_else(|| Error::UnknownVertex(name.to_string()))
        };
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(Edge::new(index(&e.u)?, index(&e.v)?, e.coupling)))
            .collect::<Result<Vec<_>>>()?;
        let mut fields = vec![0.0; self.vertices.len()];
        for (name, &h) in &self.fields {
            fields[index(name)?] = h;
        }
        PottsModel::new(self.q, self.vertices, edges, fields)
    }
}

pub fn parse_model(json: &str) -> Result<PottsModel> {
    serde_json::from_str::<ModelFile>(json)?.into_model()
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PottsModel> {
    parse_model(&fs::read_to_string(path)?)
}

pub fn model_to_json(model: &PottsModel) -> String {
    serde_json::to_string(&ModelFile::from_model(model)).expect("model serializes")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecKind {
    A,
    B,
    C,
    #[serde(rename = "table")]
    Table,
}

/// A function value given either as a bare real or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl ValueEntry {
    fn to_complex(self) -> Complex64 {
        match self {
            ValueEntry::Real(x) => Complex64::new(x, 0.0),
            ValueEntry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// `{"kind": "A"|"B"|"C"|"table", "q": 4, "values": [[re, im], ...]}`;
/// `values` is required for `C` and `table`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub kind: SpecKind,
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<ValueEntry>>,
}

impl FunctionSpec {
    pub fn from_function(f: &SpinFunction) -> Self {
        FunctionSpec {
            kind: SpecKind::Table,
            q: f.q(),
            values: Some(f.values().iter().map(|z| ValueEntry::Complex([z.re, z.im])).collect()),
        }
    }

    pub fn build(&self) -> Result<SpinFunction> {
        let values = || {
            self.values.as_ref().ok_or_else(|| Error::Parse(format!("function kind {:?} needs \"values\"", self.kind)))
        };
        match self.kind {
            SpecKind::A => make_family(FamilyKind::A, self.q, None),
            SpecKind::B => make_family(FamilyKind::B, self.q, None),
            SpecKind::C => {
                let mut real = Vec::new();
                for v in values().map_err(|e| Error::BadFamilyC(e.to_string()))? {
                    let z = v.to_complex();
                    if z.im != 0.0 {
                        return Err(Error::BadFamilyC(format!("value {z} is not real")));
                    }
                    real.push(z.re);
                }
                make_family(FamilyKind::C, self.q, Some(&real))
            }
            SpecKind::Table => {
                let values = values()?;
                if values.len() != self.q {
                    return Err(Error::FunctionLength { expected: self.q, got: values.len() });
                }
                let values: Vec<Complex64> = values.iter().map(|v| v.to_complex()).collect();
                if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NonFinite("function table entry".into()));
                }
                Ok(SpinFunction::new(values))
            }
        }
    }
}

pub fn parse_function(json: &str) -> Result<SpinFunction> {
    serde_json::from_str::<FunctionSpec>(json)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_file_defaults_missing_fields() {
        let json =
            r#"{"q": 2, "vertices": ["u", "v"], "edges": [{"u": "u", "v": "v", "J": 1.0986}], "fields": {"v": 0.5}}"#;
        let model = parse_model(json).unwrap();
        assert_eq!(model.fields(), &[0.0, 0.5]);
        assert_eq!(model.edges()[0], Edge::new(0, 1, 1.0986));
    }

    #[test]
    fn model_file_errors() {
        let unknown = r#"{"q": 2, "vertices": ["u"], "edges": [{"u": "u", "v": "w", "J": 1}]}"#;
        assert!(matches!(parse_model(unknown), Err(Error::UnknownVertex(_))));
        let negative = r#"{"q": 2, "vertices": ["u", "v"], "edges": [{"u": "u", "v": "v", "J": -0.1}]}"#;
        assert!(matches!(parse_model(negative), Err(Error::NegativeCoupling { .. })));
        assert!(matches!(parse_model("{not json"), Err(Error::Json(_))));
        let bad_field = r#"{"q": 2, "vertices": ["u"], "fields": {"x": 1}}"#;
        assert!(matches!(parse_model(bad_field), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn model_roundtrip() {
        let model = PottsModel::anonymous(3, 3, &[(0, 1, 3f64.ln()), (2, 1, 0.1)], vec![0.3, 0.0, 1e-7]).unwrap();
        assert_eq!(parse_model(&model_to_json(&model)).unwrap(), model);
    }

    #[test]
    fn function_specs() {
        let b = parse_function(r#"{"kind": "B", "q": 4}"#).unwrap();
        assert_eq!(b.q(), 4);
        let t = parse_function(r#"{"kind": "table", "q": 2, "values": [[1, 0], [0, -1]]}"#).unwrap();
        assert_eq!(t.at(1), Complex64::new(0.0, -1.0));
        let c = parse_function(r#"{"kind": "C", "q": 3, "values": [1, 0.5, 0]}"#).unwrap();
        assert_eq!(c, SpinFunction::from_real(&[1.0, 0.5, 0.0]));
        assert!(matches!(parse_function(r#"{"kind": "C", "q": 3, "values": [1, 2, 0]}"#), Err(Error::BadFamilyC(_))));
        assert!(parse_function(r#"{"kind": "table", "q": 3, "values": [1, 2]}"#).is_err());
        assert!(parse_function(r#"{"kind": "table", "q": 3}"#).is_err());
        let roundtrip = FunctionSpec::from_function(&t);
        assert_eq!(roundtrip.build().unwrap(), t);
    }
}
