use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{Axis, Marker, PoolDims};
use crate::error::{Error, Result};

/// First line of every trial log.
pub const TRIAL_LOG_HEADER: &str = r#"{"format":"chromashape-trials","version":1}"#;

const KNOWN_FIELDS: [&str; 7] = [
    "trial_id",
    "group_id",
    "category_count",
    "categories",
    "target_index",
    "response_index",
    "correct",
];

/// A participant's answer, or the timeout sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Index(usize),
    Timeout,
}

impl Serialize for Response {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Response::Index(i) => s.serialize_u64(*i as u64),
            Response::Timeout => s.serialize_str("timeout"),
        }
    }
}

impl<'de> Deserialize<'de> for Response {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Null => Ok(Response::Timeout),
            Value::String(s) if s == "timeout" => Ok(Response::Timeout),
            Value::Number(n) => n
                .as_u64()
                .map(|i| Response::Index(i as usize))
                .ok_or_else(|| serde::de::Error::custom("response_index must be a non-negative integer")),
            other => Err(serde::de::Error::custom(format!(
                "response_index must be an integer or \"timeout\", got {other}"
            ))),
        }
    }
}

/// One response to a "which category is most correlated" trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    pub group_id: String,
    pub categories: Vec<Marker>,
    pub target_index: usize,
    pub response_index: Response,
}

impl TrialRecord {
    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    /// Timeouts count as incorrect.
    pub fn is_correct(&self) -> bool {
        self.response_index == Response::Index(self.target_index)
    }

    /// Fill `out` with the category indices along `axis`. Returns false when
    /// the trial does not carry that axis.
    pub(crate) fn axis_indices(&self, axis: Axis, dims: &PoolDims, out: &mut Vec<usize>) -> bool {
        out.clear();
        for m in &self.categories {
            match m.index(axis, dims) {
                Some(i) => out.push(i),
                None => return false,
            }
        }
        true
    }

    /// Check the record invariants against pool sizes.
    pub fn validate(&self, dims: &PoolDims) -> Result<()> {
        let k = self.categories.len();
        if !(2..=10).contains(&k) {
            return Err(Error::invalid(format!("category_count {k} outside 2..=10")));
        }
        if self.target_index >= k {
            return Err(Error::invalid(format!("target_index {} out of range for {k} categories", self.target_index)));
        }
        if let Response::Index(r) = self.response_index {
            if r >= k {
                return Err(Error::invalid(format!("response_index {r} out of range for {k} categories")));
            }
        }
        let first = self.categories[0];
        if first.color.is_none() && first.shape.is_none() {
            return Err(Error::invalid("marker carries neither color_id nor shape_id"));
        }
        for m in &self.categories {
            if m.color.is_some() != first.color.is_some() || m.shape.is_some() != first.shape.is_some() {
                return Err(Error::invalid("markers within a trial must all carry the same channels"));
            }
            if let Some(c) = m.color {
                if usize::from(c) >= dims.colors {
                    return Err(Error::UnknownId {
                        kind: "color",
                        id: u32::from(c),
                    });
                }
            }
            if let Some(s) = m.shape {
                if usize::from(s) >= dims.shapes {
                    return Err(Error::UnknownId {
                        kind: "shape",
                        id: u32::from(s),
                    });
                }
            }
        }
        let distinct: BTreeSet<&Marker> = self.categories.iter().collect();
        if distinct.len() != k {
            return Err(Error::invalid("markers within a trial must be pairwise distinct"));
        }
        Ok(())
    }

    fn to_line(&self) -> String {
        let mut v = serde_json::to_value(self).expect("trial serializes");
        let obj = v.as_object_mut().expect("object");
        obj.insert("category_count".into(), self.category_count().into());
        obj.insert("correct".into(), self.is_correct().into());
        Value::Object(reorder(obj)).to_string()
    }
}

fn reorder(obj: &Map<String, Value>) -> Map<String, Value> {
    KNOWN_FIELDS
        .iter()
        .filter_map(|k| obj.get(*k).map(|v| ((*k).to_string(), v.clone())))
        .collect()
}

/// Parsed log plus any non-fatal warnings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialLog {
    pub records: Vec<TrialRecord>,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct RawTrial {
    trial_id: String,
    #[serde(default)]
    group_id: String,
    category_count: usize,
    categories: Vec<Marker>,
    target_index: usize,
    response_index: Response,
    #[serde(default)]
    correct: Option<bool>,
}

fn parse_line(line: &str, dims: &PoolDims, warnings: &mut Vec<String>, lineno: usize, source: &str) -> Result<TrialRecord> {
    let err = |message: String| Error::Parse {
        source_name: source.to_string(),
        line: lineno,
        message,
    };
    let value: Value = serde_json::from_str(line).map_err(|e| err(format!("invalid JSON: {e}")))?;
    let obj = value.as_object().ok_or_else(|| err("record must be a JSON object".into()))?;
    for key in obj.keys().filter(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
        let w = format!("{source}:{lineno}: ignoring unknown field {key:?}");
        log::warn!("{w}");
        warnings.push(w);
    }
    let raw: RawTrial = serde_json::from_value(value).map_err(|e| err(format!("schema mismatch: {e}")))?;
    if raw.category_count != raw.categories.len() {
        return Err(err(format!(
            "category_count {} does not match {} categories",
            raw.category_count,
            raw.categories.len()
        )));
    }
    let record = TrialRecord {
        trial_id: raw.trial_id,
        group_id: raw.group_id,
        categories: raw.categories,
        target_index: raw.target_index,
        response_index: raw.response_index,
    };
    record.validate(dims).map_err(|e| match e {
        Error::UnknownId { kind, id } => err(format!("unknown {kind} id {id}")),
        Error::InvalidArgument(m) => err(m),
        other => other,
    })?;
    if let Some(flag) = raw.correct {
        if flag != record.is_correct() {
            return Err(err(format!(
                "correct={flag} disagrees with target_index/response_index of trial {}",
                record.trial_id
            )));
        }
    }
    Ok(record)
}

/// Parse a trial log. Blank lines are skipped; a non-empty log must begin
/// with [`TRIAL_LOG_HEADER`].
pub fn ingest_trials<R: BufRead>(reader: R, source_name: &str, dims: &PoolDims) -> Result<TrialLog> {
    let mut log = TrialLog::default();
    let mut seen_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            check_header(line, source_name, lineno)?;
            seen_header = true;
            continue;
        }
        let rec = parse_line(line, dims, &mut log.warnings, lineno, source_name)?;
        log.records.push(rec);
    }
    Ok(log)
}

fn check_header(line: &str, source: &str, lineno: usize) -> Result<()> {
    let err = |message: String| Error::Parse {
        source_name: source.to_string(),
        line: lineno,
        message,
    };
    let v: Value = serde_json::from_str(line).map_err(|_| err("missing trial log header".into()))?;
    if v.get("format").and_then(Value::as_str) != Some("chromashape-trials") {
        return Err(err("missing trial log header".into()));
    }
    match v.get("version").and_then(Value::as_u64) {
        Some(1) => Ok(()),
        other => Err(err(format!("unsupported trial log version {other:?}"))),
    }
}

pub fn read_trial_log(path: &Path, dims: &PoolDims) -> Result<TrialLog> {
    let f = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    ingest_trials(BufReader::new(f), &path.display().to_string(), dims)
}

pub fn write_trial_log<W: Write>(mut w: W, records: &[TrialRecord]) -> std::io::Result<()> {
    writeln!(w, "{TRIAL_LOG_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.to_line())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMS: PoolDims = PoolDims { colors: 39, shapes: 39 };

    fn ingest(text: &str) -> Result<TrialLog> {
        ingest_trials(text.as_bytes(), "log", &DIMS)
    }

    fn line(body: &str) -> String {
        format!("{TRIAL_LOG_HEADER}\n{body}\n")
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(ingest("").unwrap().records.is_empty());
        assert!(ingest(&format!("{TRIAL_LOG_HEADER}\n")).unwrap().records.is_empty());
    }

    #[test]
    fn one_valid_line() {
        let text = line(
            r#"{"trial_id":"t1","group_id":"g","category_count":2,"categories":[{"color_id":1},{"color_id":4}],"target_index":0,"response_index":0,"correct":true}"#,
        );
        let log = ingest(&text).unwrap();
        assert_eq!(log.records.len(), 1);
        assert!(log.records[0].is_correct());
        assert!(log.warnings.is_empty());
    }

    #[test]
    fn unknown_color_names_line_and_id() {
        let text = line(
            r#"{"trial_id":"t1","group_id":"g","category_count":2,"categories":[{"color_id":99},{"color_id":4}],"target_index":0,"response_index":1}"#,
        );
        match ingest(&text) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("99"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn timeout_is_incorrect() {
        for resp in [r#""timeout""#, "null"] {
            let text = line(&format!(
                r#"{{"trial_id":"t","category_count":2,"categories":[{{"shape_id":1}},{{"shape_id":2}}],"target_index":0,"response_index":{resp}}}"#
            ));
            let log = ingest(&text).unwrap();
            assert_eq!(log.records[0].response_index, Response::Timeout);
            assert!(!log.records[0].is_correct());
        }
    }

    #[test]
    fn unknown_fields_warn() {
        let text = line(
            r#"{"trial_id":"t","category_count":2,"categories":[{"color_id":1},{"color_id":2}],"target_index":1,"response_index":0,"rt_ms":812}"#,
        );
        let log = ingest(&text).unwrap();
        assert_eq!(log.warnings.len(), 1);
        assert!(log.warnings[0].contains("rt_ms"));
    }

    #[test]
    fn schema_violations_rejected() {
        let bad = [
            r#"{"trial_id":"t","category_count":3,"categories":[{"color_id":1},{"color_id":2}],"target_index":0,"response_index":0}"#,
            r#"{"trial_id":"t","category_count":2,"categories":[{"color_id":1},{"color_id":1}],"target_index":0,"response_index":0}"#,
            r#"{"trial_id":"t","category_count":2,"categories":[{"color_id":1},{"shape_id":1}],"target_index":0,"response_index":0}"#,
            r#"{"trial_id":"t","category_count":2,"categories":[{"color_id":1},{"color_id":2}],"target_index":2,"response_index":0}"#,
            r#"{"trial_id":"t","category_count":2,"categories":[{"color_id":1},{"color_id":2}],"target_index":0,"response_index":1,"correct":true}"#,
            r#"{"trial_id":"t","category_count":1,"categories":[{"color_id":1}],"target_index":0,"response_index":0}"#,
            r#"{"trial_id":"t","category_count":2,"categories":[{},{}],"target_index":0,"response_index":0}"#,
            r#"{"category_count":2}"#,
            "not json",
        ];
        for b in bad {
            assert!(matches!(ingest(&line(b)), Err(Error::Parse { line: 2, .. })), "{b}");
        }
    }

    #[test]
    fn header_required() {
        let text = r#"{"trial_id":"t","category_count":2,"categories":[{"color_id":1},{"color_id":2}],"target_index":0,"response_index":0}"#;
        assert!(matches!(ingest(text), Err(Error::Parse { line: 1, .. })));
        assert!(ingest(r#"{"format":"chromashape-trials","version":9}"#).is_err());
    }

    #[test]
    fn write_read_round_trip() {
        let recs = vec![
            TrialRecord {
                trial_id: "a".into(),
                group_id: "g1".into(),
                categories: vec![Marker::pair(0, 1), Marker::pair(2, 3), Marker::pair(0, 3)],
                target_index: 2,
                response_index: Response::Index(2),
            },
            TrialRecord {
                trial_id: "b".into(),
                group_id: "g1".into(),
                categories: vec![Marker::shape(5), Marker::shape(6)],
                target_index: 0,
                response_index: Response::Timeout,
            },
        ];
        let mut buf = Vec::new();
        write_trial_log(&mut buf, &recs).unwrap();
        let log = ingest_trials(buf.as_slice(), "mem", &DIMS).unwrap();
        assert_eq!(log.records, recs);
        assert!(log.warnings.is_empty());
    }
}
