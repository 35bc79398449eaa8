//! Problems, test suites and model-produced solutions.
//!
//! A corpus file holds one JSON problem record per line:
//!
//! ```text
//! {"id":"p1","statement":"...","source":"codeforces","stdlib_dependence":"low",
//!  "tests":[{"id":"t1","stdin":"3\n","expected_stdout":"6\n"}]}
//! ```
//!
//! Blank lines are ignored. Unknown fields are rejected.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::parse_source;

/// Marker that starts the entry function in a model transcript.
pub const SOLVE_MARKER: &str = "function solve(input)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestCase {
    pub id: String,
    pub stdin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_stdout: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_return: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemSource {
    Codeforces,
    Mbpp,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdlibDependence {
    Low,
    Medium,
    High,
}

impl StdlibDependence {
    pub fn as_str(self) -> &'static str {
        match self {
            StdlibDependence::Low => "low",
            StdlibDependence::Medium => "medium",
            StdlibDependence::High => "high",
        }
    }
}

impl fmt::Display for StdlibDependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub id: String,
    pub statement: String,
    pub tests: Vec<TestCase>,
    pub source: ProblemSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stdlib_dependence: Option<StdlibDependence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_solution: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRecord {
    pub problem_id: String,
    pub raw_model_output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extracted_source: Option<String>,
}

impl SolutionRecord {
    pub fn from_raw(problem_id: impl Into<String>, raw: impl Into<String>) -> SolutionRecord {
        let raw = raw.into();
        SolutionRecord {
            problem_id: problem_id.into(),
            extracted_source: extract_code(&raw).ok(),
            raw_model_output: raw,
        }
    }

    /// The code to judge, extracting it on the fly when it was not stored.
    pub fn source(&self) -> Result<String, ExtractError> {
        match &self.extracted_source {
            Some(s) => Ok(s.clone()),
            None => extract_code(&self.raw_model_output),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("record {record}: {message}")]
    Schema { record: usize, message: String },
    #[error("record {record}: field `{field}`: {message}")]
    Invalid {
        record: usize,
        field: String,
        message: String,
    },
    #[error("record {record}: duplicate id `{id}`")]
    DuplicateId { record: usize, id: String },
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> CorpusError {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn invalid(record: usize, field: impl Into<String>, message: impl Into<String>) -> CorpusError {
        CorpusError::Invalid {
            record,
            field: field.into(),
            message: message.into(),
        }
    }
}

fn decode<T: for<'de> Deserialize<'de>>(line: &str, record: usize) -> Result<T, CorpusError> {
    let de = &mut serde_json::Deserializer::from_str(line);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = if path == "." {
            inner.to_string()
        } else {
            format!("field `{path}`: {inner}")
        };
        CorpusError::Schema { record, message }
    })
}

/// Non-blank lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
}

pub fn validate_problem(problem: &Problem, record: usize) -> Result<(), CorpusError> {
    if problem.id.trim().is_empty() {
        return Err(CorpusError::invalid(record, "id", "must not be empty"));
    }
    if problem.tests.is_empty() {
        return Err(CorpusError::invalid(record, "tests", "must contain at least one test"));
    }
    let mut seen = HashSet::new();
    for (i, test) in problem.tests.iter().enumerate() {
        if !seen.insert(test.id.as_str()) {
            return Err(CorpusError::invalid(
                record,
                format!("tests[{i}].id"),
                format!("duplicate test id `{}`", test.id),
            ));
        }
        if test.expected_stdout.is_none() && test.expected_return.is_none() {
            return Err(CorpusError::invalid(
                record,
                format!("tests[{i}]"),
                "needs expected_stdout or expected_return",
            ));
        }
    }
    Ok(())
}

pub fn parse_corpus(text: &str) -> Result<Vec<Problem>, CorpusError> {
    let mut problems = Vec::new();
    let mut ids = HashSet::new();
    for (record, line) in records(text) {
        let problem: Problem = decode(line, record)?;
        validate_problem(&problem, record)?;
        if !ids.insert(problem.id.clone()) {
            return Err(CorpusError::DuplicateId { record, id: problem.id });
        }
        problems.push(problem);
    }
    Ok(problems)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Problem>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_corpus(&text)
}

pub fn render_corpus(problems: &[Problem]) -> String {
    let mut out = String::new();
    for p in problems {
        out.push_str(&serde_json::to_string(p).expect("problems always serialize"));
        out.push('\n');
    }
    out
}

pub fn save_corpus(path: &Path, problems: &[Problem]) -> Result<(), CorpusError> {
    fs::write(path, render_corpus(problems)).map_err(|e| CorpusError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no code found in model output")]
pub struct ExtractError;

/// Pulls the program out of a model transcript.
///
/// The first fenced block wins; without one the whole text is used. Within
/// that candidate, any prose ahead of `function solve(input)` is cut off,
/// unless the text ahead of the marker is itself valid code (helper
/// functions, globals), in which case it is kept. The result is trimmed, and
/// extracting from an extraction returns it unchanged.
pub fn extract_code(raw: &str) -> Result<String, ExtractError> {
    let candidate = first_fence(raw).unwrap_or(raw).trim();
    let code = match candidate.find(SOLVE_MARKER) {
        Some(at) if parse_source(&candidate[..at]).is_err() => &candidate[at..],
        _ => candidate,
    };
    let code = code.trim();
    if code.is_empty() {
        Err(ExtractError)
    } else {
        Ok(code.to_string())
    }
}

/// Contents of the first ``` fence, skipping its info string. An unclosed
/// fence runs to the end of the text.
fn first_fence(raw: &str) -> Option<&str> {
    let open = raw.find("```")?;
    let after = &raw[open + 3..];
    let body = match after.find('\n') {
        Some(nl) => &after[nl + 1..],
        None => "",
    };
    Some(match body.find("```") {
        Some(close) => &body[..close],
        None => body,
    })
}

#[derive(Debug, Error)]
pub enum SolutionsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Corpus(#[from] CorpusError),
    #[error("duplicate solution for problem `{0}`")]
    Duplicate(String),
}

/// Reads solutions from a directory of `<problem id>.txt` files or from a
/// line-delimited file of [`SolutionRecord`]s.
pub fn load_solutions(path: &Path) -> Result<BTreeMap<String, SolutionRecord>, SolutionsError> {
    let io = |e| SolutionsError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut out = BTreeMap::new();
    if path.is_dir() {
        for entry in fs::read_dir(path).map_err(io)? {
            let file = entry.map_err(io)?.path();
            if file.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(id) = file.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let raw = fs::read_to_string(&file).map_err(|e| SolutionsError::Io {
                path: file.clone(),
                source: e,
            })?;
            out.insert(id.to_string(), SolutionRecord::from_raw(id, raw));
        }
        return Ok(out);
    }
    let text = fs::read_to_string(path).map_err(io)?;
    for (record, line) in records(&text) {
        let sol: SolutionRecord = decode(line, record)?;
        if let Some(src) = &sol.extracted_source {
            if !src.trim_start().starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
                return Err(CorpusError::invalid(record, "extracted_source", "must start with code").into());
            }
        }
        if out.contains_key(&sol.problem_id) {
            return Err(SolutionsError::Duplicate(sol.problem_id));
        }
        out.insert(sol.problem_id.clone(), sol);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = r#"{"id":"p1","statement":"s","source":"mbpp","tests":[{"id":"t1","stdin":"","expected_return":1}]}"#;

    #[test]
    fn loads_single_record() {
        let ps = parse_corpus(VALID).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].tests[0].expected_return, Some(1));
        assert_eq!(ps[0].stdlib_dependence, None);
    }

    #[test]
    fn missing_tests_names_field() {
        let line = r#"{"id":"p1","statement":"s","source":"mbpp"}"#;
        let err = parse_corpus(line).unwrap_err().to_string();
        assert!(err.contains("record 1") && err.contains("`tests`"), "{err}");
    }

    #[test]
    fn nested_type_error_names_path() {
        let line = r#"{"id":"p1","statement":"s","source":"mbpp","tests":[{"id":"t1","stdin":5,"expected_return":1}]}"#;
        let err = parse_corpus(line).unwrap_err().to_string();
        assert!(err.contains("tests[0].stdin"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{VALID}\n\n{VALID}\n");
        match parse_corpus(&text).unwrap_err() {
            CorpusError::DuplicateId { record, id } => {
                assert_eq!(record, 3);
                assert_eq!(id, "p1");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn invariants_enforced() {
        let cases = [
            (r#"{"id":"p","statement":"","source":"other","tests":[]}"#, "tests"),
            (
                r#"{"id":"p","statement":"","source":"other","tests":[{"id":"a","stdin":""}]}"#,
                "tests[0]",
            ),
            (
                r#"{"id":"p","statement":"","source":"other","tests":[{"id":"a","stdin":"","expected_return":0},{"id":"a","stdin":"","expected_return":0}]}"#,
                "tests[1].id",
            ),
            (r#"{"id":" ","statement":"","source":"other","tests":[{"id":"a","stdin":"","expected_return":0}]}"#, "id"),
        ];
        for (line, field) in cases {
            match parse_corpus(line).unwrap_err() {
                CorpusError::Invalid { field: f, .. } => assert_eq!(f, field),
                other => panic!("{line}: {other}"),
            }
        }
    }

    #[test]
    fn round_trip() {
        let text = format!(
            "{VALID}\n{}\n",
            r#"{"id":"p2","statement":"two","tests":[{"id":"a","stdin":"1\n","expected_stdout":"1\n"}],"source":"codeforces","stdlib_dependence":"high","reference_solution":"function solve(input) { print(input); }"}"#
        );
        let ps = parse_corpus(&text).unwrap();
        let again = render_corpus(&ps);
        assert_eq!(parse_corpus(&again).unwrap(), ps);
        assert_eq!(render_corpus(&parse_corpus(&again).unwrap()), again);
    }

    #[test]
    fn extraction_rules() {
        let fenced = "Sure!\n```pylang\nfunction solve(input) { return 0; }\n```\nHope it helps.";
        assert_eq!(extract_code(fenced).unwrap(), "function solve(input) { return 0; }");
        let bare = "function solve(input) {\n  print(1);\n}\n";
        assert_eq!(extract_code(bare).unwrap(), bare.trim());
        let prose = "Here is the solution:\nfunction solve(input) { print(1); }";
        assert_eq!(extract_code(prose).unwrap(), "function solve(input) { print(1); }");
        let helpers = "function twice(x) { return 2 * x; }\nfunction solve(input) { return twice(1); }";
        assert_eq!(extract_code(helpers).unwrap(), helpers);
        assert_eq!(extract_code("  \n\t"), Err(ExtractError));
        assert_eq!(extract_code("```\n\n```"), Err(ExtractError));
        assert_eq!(extract_code("just words").unwrap(), "just words");
        let two = "```\nx = 1;\n```\n```\ny = 2;\n```";
        assert_eq!(extract_code(two).unwrap(), "x = 1;");
    }

    #[test]
    fn solutions_from_directory_and_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("p1.txt"), "```\nfunction solve(input) { return 1; }\n```").unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let sols = load_solutions(dir.path()).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols["p1"].source().unwrap(), "function solve(input) { return 1; }");

        let file = dir.path().join("sols.jsonl");
        fs::write(
            &file,
            "{\"problem_id\":\"a\",\"raw_model_output\":\"x\"}\n{\"problem_id\":\"a\",\"raw_model_output\":\"y\"}\n",
        )
        .unwrap();
        assert!(matches!(load_solutions(&file), Err(SolutionsError::Duplicate(id)) if id == "a"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn transcript() -> impl Strategy<Value = String> {
            let piece = prop_oneof![
                Just("```".to_string()),
                Just("```pylang\n".to_string()),
                Just(SOLVE_MARKER.to_string()),
                Just(" { return 0; }".to_string()),
                Just("x = 1;\n".to_string()),
                Just("function f(a) { return a; }\n".to_string()),
                Just("Here is code:\n".to_string()),
                "[ a-z\n{}();=]{0,12}",
            ];
            prop::collection::vec(piece, 0..8).prop_map(|v| v.concat())
        }

        proptest! {
            #[test]
            fn extraction_is_idempotent(raw in transcript()) {
                if let Ok(once) = extract_code(&raw) {
                    prop_assert_eq!(extract_code(&once), Ok(once.clone()));
                }
            }

            #[test]
            fn mutated_records_rejected(which in 0usize..7) {
                let mut v: serde_json::Value = serde_json::from_str(VALID).unwrap();
                let obj = v.as_object_mut().unwrap();
                match which {
                    0 => { obj.remove("tests"); }
                    1 => { obj.insert("tests".into(), serde_json::json!([])); }
                    2 => { obj.insert("source".into(), serde_json::json!("leetcode")); }
                    3 => { obj.insert("id".into(), serde_json::json!(7)); }
                    4 => { obj.insert("extra".into(), serde_json::json!(true)); }
                    5 => { obj["tests"][0].as_object_mut().unwrap().remove("expected_return"); }
                    _ => { obj.insert("stdlib_dependence".into(), serde_json::json!("extreme")); }
                }
                prop_assert!(parse_corpus(&v.to_string()).is_err());
            }
        }
    }
}
