//! File ingestion and emission: JSONL everywhere, TSV accepted for score
//! and rating files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use xeval_core::metaeval::{SegmentRating, SegmentScores};

use crate::CliError;

fn read_error(path: &Path, message: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("{}: {message}", path.display()))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = File::open(path).map_err(|e| read_error(path, e))?;
    let mut items = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| read_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| read_error(path, format!("line {}: {e}", lineno + 1)))?;
        items.push(item);
    }
    Ok(items)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| read_error(path, e))?;
    let mut writer = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| read_error(path, e))?;
        writeln!(writer, "{line}").map_err(|e| read_error(path, e))?;
    }
    writer.flush().map_err(|e| read_error(path, e))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| read_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| read_error(path, e))
}

fn looks_like_jsonl(path: &Path) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    Ok(text.trim_start().starts_with('{'))
}

/// Reads a metric score file: JSONL `{"instance_id", "score"}` lines or
/// two-column TSV. The metric name is the file stem.
pub fn read_scores(path: &Path) -> Result<SegmentScores, CliError> {
    let metric_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "metric".to_string());
    let mut scores = BTreeMap::new();

    if looks_like_jsonl(path)? {
        #[derive(serde::Deserialize)]
        struct Line {
            instance_id: String,
            score: f64,
        }
        for line in read_jsonl::<Line>(path)? {
            if scores.insert(line.instance_id.clone(), line.score).is_some() {
                return Err(read_error(path, format!("duplicate instance_id {}", line.instance_id)));
            }
        }
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| read_error(path, e))?;
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut columns = line.split('\t');
            let id = columns
                .next()
                .ok_or_else(|| read_error(path, format!("line {}: empty", lineno + 1)))?;
            let value = columns
                .next()
                .ok_or_else(|| read_error(path, format!("line {}: missing score column", lineno + 1)))?;
            let value: f64 = match value.trim().parse() {
                Ok(v) => v,
                // a non-numeric first row is a header
                Err(_) if lineno == 0 => continue,
                Err(e) => return Err(read_error(path, format!("line {}: {e}", lineno + 1))),
            };
            if scores.insert(id.trim().to_string(), value).is_some() {
                return Err(read_error(path, format!("duplicate instance_id {id}")));
            }
        }
    }
    if scores.is_empty() {
        return Err(read_error(path, "no scores found"));
    }
    Ok(SegmentScores { metric_name, scores })
}

/// Reads a ratings file: JSONL `{"instance_id", "rating", "domain"}` lines
/// or three-column TSV (`instance_id<TAB>rating<TAB>domain`).
pub fn read_ratings(path: &Path) -> Result<Vec<SegmentRating>, CliError> {
    if looks_like_jsonl(path)? {
        return read_jsonl(path);
    }
    let text = std::fs::read_to_string(path).map_err(|e| read_error(path, e))?;
    let mut ratings = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let columns: Vec<&str> = line.split('\t').collect();
        if columns.len() < 3 {
            return Err(read_error(
                path,
                format!("line {}: expected instance_id<TAB>rating<TAB>domain", lineno + 1),
            ));
        }
        let rating: f64 = match columns[1].trim().parse() {
            Ok(v) => v,
            Err(_) if lineno == 0 => continue,
            Err(e) => return Err(read_error(path, format!("line {}: {e}", lineno + 1))),
        };
        ratings.push(SegmentRating {
            instance_id: columns[0].trim().to_string(),
            rating,
            domain: columns[2].trim().to_string(),
        });
    }
    if ratings.is_empty() {
        return Err(read_error(path, "no ratings found"));
    }
    Ok(ratings)
}
