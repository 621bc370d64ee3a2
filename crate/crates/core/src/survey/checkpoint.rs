//! Append-only line-delimited checkpoint files. Each completed u-range
//! is one JSON line, fsynced before the range counts as done, so a
//! killed run loses at most the line it was writing.

use std::io::Write;
use std::path::Path;

use super::{RangeRecord, SurveyError};

/// All parseable records in the file, in file order. A missing file is
/// an empty checkpoint. An unparseable final line is the torn tail of a
/// killed write and is dropped; corruption anywhere else is an error, as
/// is any record whose config hash differs from the current run's.
pub(super) fn load_records(
    path: &Path,
    expect_hash: &str,
) -> Result<Vec<RangeRecord>, SurveyError> {
    let contents = match std::fs::read_to_string(path) {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let lines: Vec<&str> = contents.lines().collect();
    let mut out = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RangeRecord>(line) {
            Ok(rec) => {
                if rec.config_hash != expect_hash {
                    return Err(SurveyError::ConfigHashMismatch);
                }
                out.push(rec);
            }
            Err(_) if i + 1 == lines.len() => break,
            Err(e) => {
                return Err(SurveyError::BadConfig(format!(
                    "corrupt checkpoint line {}: {e}",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

pub(super) fn append_record(path: &Path, rec: &RangeRecord) -> Result<(), SurveyError> {
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let mut line = serde_json::to_string(rec).expect("checkpoint record serializes");
    line.push('\n');
    f.write_all(line.as_bytes())?;
    f.sync_all()?;
    Ok(())
}
