use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Descriptor, Space};
use crate::error::{Error, Result};

/// On-disk space description. Explicit spaces carry a row-major distance
/// matrix in `distances`; every other kind is regenerated from `parameters`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub name: String,
    pub kind: String,
    pub parameters: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<f64>>,
}

impl SpaceFile {
    pub fn from_space(space: &Space) -> Self {
        let name = space.name().to_string();
        match space.descriptor() {
            Some(Descriptor::Explicit { distances }) => Self {
                name,
                kind: "explicit".into(),
                parameters: serde_json::json!({ "n": space.len() }),
                distances: Some(distances.iter().flatten().copied().collect()),
            },
            Some(d) => {
                let v = serde_json::to_value(d).expect("descriptors serialise");
                Self {
                    name,
                    kind: v["kind"].as_str().unwrap_or_default().to_string(),
                    parameters: v["parameters"].clone(),
                    distances: None,
                }
            }
            None => {
                let n = space.len();
                let flat = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| space.dist(x, y) as f64).collect();
                Self { name, kind: "explicit".into(), parameters: serde_json::json!({ "n": n }), distances: Some(flat) }
            }
        }
    }

    pub fn to_space(&self) -> Result<Space> {
        if self.kind == "explicit" {
            let flat = self.distances.as_ref().ok_or_else(|| Error::InvalidDescriptor("explicit space needs distances".into()))?;
            let n = (flat.len() as f64).sqrt().round() as usize;
            if n * n != flat.len() {
                return Err(Error::NotSquare { row: 0, len: flat.len(), expected: n * n });
            }
            let rows: Vec<Vec<f64>> = flat.chunks(n).map(|r| r.to_vec()).collect();
            return Space::build(self.name.clone(), Descriptor::Explicit { distances: rows });
        }
        let d: Descriptor = serde_json::from_value(serde_json::json!({ "kind": self.kind, "parameters": self.parameters }))?;
        Space::build(self.name.clone(), d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Space> {
        let text = std::fs::read_to_string(path)?;
        let f: SpaceFile = serde_json::from_str(&text)?;
        f.to_space()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Norm;

    #[test]
    fn round_trip() {
        let spaces = [
            Space::build("z", Descriptor::Lattice { lo: vec![-3], hi: vec![3], norm: Norm::L1 }).unwrap(),
            Space::build("e", Descriptor::Explicit { distances: vec![vec![0.0, 1.5], vec![1.5, 0.0]] }).unwrap(),
            Space::build("b", Descriptor::BoxSpace { components: vec![vec![4]], separation: 5 }).unwrap(),
        ];
        for s in &spaces {
            let f = SpaceFile::from_space(s);
            let text = serde_json::to_string(&f).unwrap();
            let back: SpaceFile = serde_json::from_str(&text).unwrap();
            let t = back.to_space().unwrap();
            assert_eq!(t.len(), s.len());
            assert_eq!(t.name(), s.name());
            for x in 0..s.len() {
                for y in 0..s.len() {
                    assert_eq!(t.dist(x, y), s.dist(x, y));
                }
            }
        }
    }
}
