//! Table serialization. The CSV layout is one row per congruence bucket,
//! a total row, and the fixed Delaunay heuristic row for comparison;
//! percentages carry one decimal so desk-scale and full-scale output
//! line up column for column.

use serde::Serialize;
use std::fmt::Write as _;

use super::{CurveRecord, FrequencyTable, SurveyOutput, DELAUNAY_ROW, REFERENCE_TOTAL};

fn percent(divisible: u64, count: u64) -> f64 {
    if count == 0 {
        0.0
    } else {
        100.0 * divisible as f64 / count as f64
    }
}

/// CSV with header `restriction,count,p3,p5,p7,p11` (columns following
/// the configured target primes). The Delaunay row has no count and is
/// emitted only when the targets are the canonical 3, 5, 7, 11 the
/// heuristic speaks about.
pub fn table_to_csv(table: &FrequencyTable) -> String {
    let mut s = String::from("restriction,count");
    for q in &table.target_primes {
        let _ = write!(s, ",p{q}");
    }
    s.push('\n');
    for b in &table.buckets {
        let _ = write!(s, "u={} mod {},{}", b.residue, b.modulus, b.count);
        for (i, &d) in b.divisible.iter().enumerate() {
            let _ = i;
            let _ = write!(s, ",{:.1}", percent(d, b.count));
        }
        s.push('\n');
    }
    let _ = write!(s, "total,{}", table.total.count);
    for &d in &table.total.divisible {
        let _ = write!(s, ",{:.1}", percent(d, table.total.count));
    }
    s.push('\n');
    if table.target_primes == [3, 5, 7, 11] {
        s.push_str("delaunay,");
        for v in DELAUNAY_ROW {
            let _ = write!(s, ",{v:.1}");
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct Reference {
    delaunay_percent: [f64; 4],
    survey_percent: [f64; 4],
    survey_curves: u64,
}

#[derive(Serialize)]
struct JsonView<'a> {
    config_hash: &'a str,
    table: &'a FrequencyTable,
    reference: Reference,
    detail: &'a [CurveRecord],
}

/// JSON document with the frequency table, the fixed reference
/// frequencies, and the per-curve detail array.
pub fn survey_to_json(out: &SurveyOutput) -> String {
    serde_json::to_string_pretty(&JsonView {
        config_hash: &out.config_hash,
        table: &out.table,
        reference: Reference {
            delaunay_percent: DELAUNAY_ROW,
            survey_percent: REFERENCE_TOTAL.0,
            survey_curves: REFERENCE_TOTAL.1,
        },
        detail: &out.detail,
    })
    .expect("survey output serializes")
}

#[cfg(test)]
mod tests {
    use super::super::{run_sha_survey, SurveyConfig, SurveyMode};
    use super::*;

    #[test]
    fn csv_layout_is_pinned() {
        let out = run_sha_survey(&SurveyConfig::new(50, SurveyMode::Sha)).unwrap();
        let csv = table_to_csv(&out.table);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "restriction,count,p3,p5,p7,p11");
        assert_eq!(lines.len(), 13);
        assert_eq!(lines[12], "delaunay,,36.1,20.7,14.5,9.2");
        assert!(lines[11].starts_with("total,12,"));
        assert!(lines[1].starts_with("u=1 mod 8,"));
        for line in &lines[1..12] {
            assert_eq!(line.matches(',').count(), 5, "line {line}");
        }
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn json_carries_reference_metadata_and_detail() {
        let out = run_sha_survey(&SurveyConfig::new(50, SurveyMode::Sha)).unwrap();
        let doc = survey_to_json(&out);
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["reference"]["survey_curves"], 102312);
        assert_eq!(v["reference"]["delaunay_percent"][0], 36.1);
        assert_eq!(v["reference"]["survey_percent"][3], 6.2);
        assert_eq!(v["detail"].as_array().unwrap().len(), 12);
        assert_eq!(v["detail"][0]["u"], 3);
        assert_eq!(v["detail"][0]["p"], 73);
        assert_eq!(v["detail"][0]["sha"], 1);
        assert_eq!(v["table"]["total"]["count"], 12);
    }

    #[test]
    fn nondefault_targets_drop_the_heuristic_row() {
        let mut cfg = SurveyConfig::new(50, SurveyMode::Sha);
        cfg.target_primes = vec![3, 5];
        let out = run_sha_survey(&cfg).unwrap();
        let csv = table_to_csv(&out.table);
        assert!(csv.lines().all(|l| !l.starts_with("delaunay")));
        assert!(csv.starts_with("restriction,count,p3,p5\n"));
    }
}
