use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::Value;

use super::{CorpusError, Dataset, Document};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// One JSON object per line with `id`, `text` and `label` fields.
    Jsonl,
    /// Comma-separated with an `id,text,label` header.
    Csv,
}

impl DatasetFormat {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Jsonl,
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" => Ok(DatasetFormat::Jsonl),
            "csv" => Ok(DatasetFormat::Csv),
            other => Err(format!("unknown dataset format {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    /// Records skipped because their text or label was missing or blank.
    pub dropped: usize,
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<LoadedDataset, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    read_dataset(BufReader::new(file), format).map_err(|e| match e {
        CorpusError::Io { source, .. } => CorpusError::Io {
            path: path.to_owned(),
            source,
        },
        other => other,
    })
}

pub fn read_dataset<R: Read>(reader: R, format: DatasetFormat) -> Result<LoadedDataset, CorpusError> {
    let mut docs = Vec::new();
    let mut dropped = 0usize;
    let mut seen_any = false;
    let mut push = |id: String, text: Option<String>, label: Option<String>| {
        seen_any = true;
        match (non_blank(text), non_blank(label)) {
            (Some(text), Some(label)) => docs.push(Document { id, text, label }),
            _ => dropped += 1,
        }
    };

    match format {
        DatasetFormat::Jsonl => {
            for (i, line) in BufReader::new(reader).lines().enumerate() {
                let line_no = i + 1;
                let line = line.map_err(|source| CorpusError::Io {
                    path: Default::default(),
                    source,
                })?;
                if line.trim().is_empty() {
                    continue;
                }
                let value: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                    line: line_no,
                    reason: e.to_string(),
                })?;
                let obj = value.as_object().ok_or_else(|| CorpusError::Malformed {
                    line: line_no,
                    reason: "expected a JSON object".into(),
                })?;
                let id = match obj.get("id") {
                    Some(Value::String(s)) if !s.is_empty() => s.clone(),
                    Some(Value::Number(n)) => n.to_string(),
                    _ => {
                        return Err(CorpusError::Malformed {
                            line: line_no,
                            reason: "missing string field \"id\"".into(),
                        })
                    }
                };
                let text = string_field(obj.get("text"), "text", line_no)?;
                let label = string_field(obj.get("label"), "label", line_no)?;
                push(id, text, label);
            }
        }
        DatasetFormat::Csv => {
            #[derive(Deserialize)]
            struct Row {
                id: Option<String>,
                text: Option<String>,
                label: Option<String>,
            }
            let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
            for (i, row) in rdr.deserialize::<Row>().enumerate() {
                // header occupies line 1
                let line_no = i + 2;
                let row = row.map_err(|e| CorpusError::Malformed {
                    line: e.position().map_or(line_no, |p| p.line() as usize),
                    reason: e.to_string(),
                })?;
                let id = row.id.filter(|s| !s.is_empty()).ok_or(CorpusError::Malformed {
                    line: line_no,
                    reason: "missing field \"id\"".into(),
                })?;
                push(id, row.text, row.label);
            }
        }
    }

    if !seen_any {
        return Err(CorpusError::NoRecords);
    }
    if docs.is_empty() {
        return Err(CorpusError::NoRecords);
    }
    Ok(LoadedDataset {
        dataset: Dataset::new(docs)?,
        dropped,
    })
}

fn string_field(value: Option<&Value>, name: &str, line: usize) -> Result<Option<String>, CorpusError> {
    match value {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(CorpusError::Malformed {
            line,
            reason: format!("field {name:?} must be a string"),
        }),
    }
}

fn non_blank(s: Option<String>) -> Option<String> {
    s.filter(|s| !s.trim().is_empty())
}

/// Writes a dataset as line-delimited JSON, one document per line.
pub fn write_dataset(path: &Path, dataset: &Dataset) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for doc in dataset.documents() {
        let line = serde_json::to_string(doc).expect("documents serialize");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jsonl(s: &str) -> Result<LoadedDataset, CorpusError> {
        read_dataset(s.as_bytes(), DatasetFormat::Jsonl)
    }

    #[test]
    fn drops_records_missing_label() {
        let loaded = jsonl(
            r#"{"id":"1","text":"equity fund","label":"A"}
{"id":"2","text":"bond fund","label":"B"}
{"id":"3","text":"money market"}
{"id":"4","text":"mixed","label":"A"}
"#,
        )
        .unwrap();
        assert_eq!(loaded.dataset.len(), 3);
        assert_eq!(loaded.dropped, 1);
    }

    #[test]
    fn blank_text_is_dropped() {
        let loaded = jsonl(
            r#"{"id":"1","text":"   ","label":"A"}
{"id":"2","text":"x","label":"A"}"#,
        )
        .unwrap();
        assert_eq!(loaded.dropped, 1);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(jsonl(""), Err(CorpusError::NoRecords)));
        assert!(matches!(jsonl("\n\n"), Err(CorpusError::NoRecords)));
    }

    #[test]
    fn labels_sorted_on_load() {
        let loaded = jsonl(
            r#"{"id":"1","text":"t","label":"B"}
{"id":"2","text":"t","label":"A"}"#,
        )
        .unwrap();
        assert_eq!(loaded.dataset.labels(), ["A", "B"]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = jsonl(
            r#"{"id":"1","text":"t","label":"B"}
not json"#,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }), "{err}");
        let err = jsonl(r#"{"text":"t","label":"B"}"#).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 1, .. }));
    }

    #[test]
    fn duplicate_id_is_an_error() {
        let err = jsonl(
            r#"{"id":"1","text":"t","label":"B"}
{"id":"1","text":"u","label":"A"}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId(_)));
    }

    #[test]
    fn csv_input() {
        let data = "id,text,label\n1,\"growth, income\",A\n2,bonds,\n3,cash,B\n";
        let loaded = read_dataset(data.as_bytes(), DatasetFormat::Csv).unwrap();
        assert_eq!(loaded.dataset.len(), 2);
        assert_eq!(loaded.dropped, 1);
        assert_eq!(loaded.dataset.documents()[0].text, "growth, income");
    }

    #[test]
    fn write_then_load_round_trips() {
        let ds = Dataset::new(vec![
            Document::new("a", "the \"quoted\" text\twith tab", "X"),
            Document::new("b", "ünïcode ✓", "Y"),
        ])
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_dataset(&path, &ds).unwrap();
        let loaded = load_dataset(&path, DatasetFormat::Jsonl).unwrap();
        assert_eq!(loaded.dataset, ds);
        assert_eq!(loaded.dropped, 0);
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_dataset(Path::new("/nonexistent/x.jsonl"), DatasetFormat::Jsonl).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.jsonl"));
    }
}
