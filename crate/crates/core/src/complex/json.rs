use serde::{Deserialize, Serialize};
use std::path::Path;

use super::PolytopalComplex;
use crate::error::{Error, Result};

/// On-disk form: `d` is the dimension of the complex and `faces[i]` lists
/// the `i`-faces as vertex-index sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub d: usize,
    pub vertices: Vec<String>,
    pub faces: Vec<Vec<Vec<usize>>>,
}

impl ComplexFile {
    pub fn into_complex(self) -> Result<PolytopalComplex> {
        if self.faces.len() != self.d + 1 {
            return Err(Error::InvalidComplex(format!(
                "d = {} but {} face layers given",
                self.d,
                self.faces.len()
            )));
        }
        if self.faces.iter().any(Vec::is_empty) {
            return Err(Error::InvalidComplex("empty face layer".into()));
        }
        PolytopalComplex::from_faces(self.vertices, self.faces)
    }
}

impl PolytopalComplex {
    /// Serializable form with vertices renumbered to `0..|V|`.
    pub fn to_file(&self) -> ComplexFile {
        let ids = self.vertex_ids();
        let mut index = vec![usize::MAX; self.universe_size()];
        for (i, &v) in ids.iter().enumerate() {
            index[v] = i;
        }
        ComplexFile {
            d: self.dim().unwrap_or(0),
            vertices: ids.iter().map(|&v| self.label(v).to_owned()).collect(),
            faces: self
                .faces
                .iter()
                .map(|layer| layer.iter().map(|f| f.iter().map(|&v| index[v]).collect()).collect())
                .collect(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<PolytopalComplex> {
        serde_json::from_str::<ComplexFile>(text)?.into_complex()
    }

    pub fn from_json_file(path: &Path) -> Result<PolytopalComplex> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE_BOUNDARY: &str = r#"{"d": 1, "vertices": ["a", "b", "c"],
        "faces": [[[0], [1], [2]], [[0, 1], [1, 2], [0, 2]]]}"#;

    #[test]
    fn round_trip() {
        let c = PolytopalComplex::from_json_str(TRIANGLE_BOUNDARY).unwrap();
        assert_eq!(c.f_vector(), vec![3, 3]);
        let back = PolytopalComplex::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(back.to_file(), c.to_file());
    }

    #[test]
    fn rejects_bad_files() {
        let wrong_d = TRIANGLE_BOUNDARY.replace("\"d\": 1", "\"d\": 2");
        assert!(PolytopalComplex::from_json_str(&wrong_d).is_err());
        let missing_vertex = r#"{"d": 1, "vertices": ["a", "b", "c"],
            "faces": [[[0], [1]], [[0, 1]]]}"#;
        assert!(PolytopalComplex::from_json_str(missing_vertex).is_err());
        assert!(PolytopalComplex::from_json_str("{").is_err());
    }
}
