//! Document embeddings computed elsewhere (e.g. by a sentence encoder),
//! keyed by document id.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FeaturizeError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct DocEmbeddingStore<T> {
    dimension: usize,
    vectors: BTreeMap<String, Vec<T>>,
}

#[derive(Serialize, Deserialize)]
struct Record<T> {
    id: String,
    vector: Vec<T>,
}

impl<T: Scalar> DocEmbeddingStore<T> {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[T]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    /// Ids from `ids` that have no stored vector, in input order.
    pub fn missing<'a, I: IntoIterator<Item = &'a str>>(&self, ids: I) -> Vec<String> {
        ids.into_iter()
            .filter(|id| !self.vectors.contains_key(*id))
            .map(str::to_owned)
            .collect()
    }

    pub fn from_records(records: impl IntoIterator<Item = (String, Vec<T>)>) -> Result<Self, FeaturizeError> {
        let mut vectors = BTreeMap::new();
        let mut dimension = None;
        for (id, vector) in records {
            let expected = *dimension.get_or_insert(vector.len());
            if vector.len() != expected || expected == 0 {
                return Err(FeaturizeError::RaggedDimensions {
                    id,
                    expected,
                    found: vector.len(),
                });
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(FeaturizeError::InvalidParameter(format!(
                    "non-finite component in embedding {id:?}"
                )));
            }
            if vectors.insert(id.clone(), vector).is_some() {
                return Err(FeaturizeError::DuplicateId(id));
            }
        }
        match dimension {
            Some(dimension) => Ok(Self { dimension, vectors }),
            None => Err(FeaturizeError::NoEmbeddings),
        }
    }

    /// Writes `{"id": ..., "vector": [...]}` lines in id order.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, vector) in &self.vectors {
            let line = serde_json::to_string(&Record {
                id: id.clone(),
                vector: vector.clone(),
            })
            .expect("records serialize");
            writeln!(out, "{line}")?;
        }
        out.flush()
    }
}

pub fn read_precomputed_embeddings<T: Scalar, R: Read>(reader: R) -> Result<DocEmbeddingStore<T>, FeaturizeError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| FeaturizeError::io(Path::new(""), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record<T> = serde_json::from_str(&line).map_err(|e| FeaturizeError::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        records.push((rec.id, rec.vector));
    }
    DocEmbeddingStore::from_records(records)
}

pub fn load_precomputed_embeddings<T: Scalar>(path: &Path) -> Result<DocEmbeddingStore<T>, FeaturizeError> {
    let file = File::open(path).map_err(|e| FeaturizeError::io(path, e))?;
    read_precomputed_embeddings(file)
}

pub fn save_precomputed_embeddings<T: Scalar>(path: &Path, store: &DocEmbeddingStore<T>) -> Result<(), FeaturizeError> {
    let file = File::create(path).map_err(|e| FeaturizeError::io(path, e))?;
    store.write(BufWriter::new(file)).map_err(|e| FeaturizeError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, n: usize) -> String {
        let v: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
        serde_json::json!({"id": id, "vector": v}).to_string()
    }

    #[test]
    fn sentence_encoder_dimension() {
        let text = format!("{}\n{}\n", line("a", 384), line("b", 384));
        let s: DocEmbeddingStore<f64> = read_precomputed_embeddings(text.as_bytes()).unwrap();
        assert_eq!(s.dimension(), 384);
        assert_eq!(s.len(), 2);
        assert_eq!(s.missing(["a", "c"]), vec!["c".to_string()]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let text = format!("{}\n{}\n", line("a", 384), line("b", 383));
        let err = read_precomputed_embeddings::<f64, _>(text.as_bytes()).unwrap_err();
        assert!(matches!(err, FeaturizeError::RaggedDimensions { expected: 384, found: 383, .. }));
    }

    #[test]
    fn duplicate_id_rejected() {
        let text = format!("{}\n{}\n", line("a", 3), line("a", 3));
        assert!(matches!(
            read_precomputed_embeddings::<f64, _>(text.as_bytes()),
            Err(FeaturizeError::DuplicateId(_))
        ));
    }

    #[test]
    fn empty_input_rejected() {
        let err = read_precomputed_embeddings::<f64, _>("".as_bytes()).unwrap_err();
        assert!(matches!(err, FeaturizeError::NoEmbeddings));
        assert_eq!(err.to_string(), "no embeddings");
    }

    #[test]
    fn write_read_round_trip() {
        let text = format!("{}\n{}\n", line("b", 4), line("a", 4));
        let s: DocEmbeddingStore<f64> = read_precomputed_embeddings(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        s.write(&mut buf).unwrap();
        assert_eq!(read_precomputed_embeddings::<f64, _>(buf.as_slice()).unwrap(), s);
    }
}
