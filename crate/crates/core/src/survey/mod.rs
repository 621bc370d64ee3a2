//! Family-scale surveys: sieve the admissible u, run Sha or parity
//! computations over disjoint u-intervals, and aggregate into the
//! congruence-bucket frequency table with checkpoint/resume support.

mod checkpoint;
mod emit;
mod runner;
mod sieve;

pub use emit::{survey_to_json, table_to_csv};
pub use sieve::sieve_ns_u;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;
use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::modsym::ModSymError;
use crate::ns::NsError;

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("bad survey config: {0}")]
    BadConfig(String),
    #[error("checkpoint config hash mismatch")]
    ConfigHashMismatch,
    #[error("checkpoint ranges overlap without being identical")]
    OverlappingRanges,
    #[error("run stopped by the range cap before completion")]
    Interrupted,
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    ModSym(#[from] ModSymError),
    #[error(transparent)]
    Family(#[from] NsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurveyMode {
    Sha,
    Parity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurveyConfig {
    pub u_max: u64,
    pub target_primes: Vec<u64>,
    pub mode: SurveyMode,
    pub workers: usize,
    pub checkpoint_path: Option<PathBuf>,
    pub tol: f64,
    /// Test hook: stop after completing this many ranges (simulated kill).
    pub max_ranges: Option<u64>,
}

impl SurveyConfig {
    pub fn new(u_max: u64, mode: SurveyMode) -> Self {
        SurveyConfig {
            u_max,
            target_primes: vec![3, 5, 7, 11],
            mode,
            workers: 1,
            checkpoint_path: None,
            tol: 1e-3,
            max_ranges: None,
        }
    }

    pub fn validate(&self) -> Result<(), SurveyError> {
        // u_max below the smallest admissible u = 3 is a legal empty survey.
        if self.u_max >= (1 << 31) {
            return Err(SurveyError::BadConfig(
                "u_max exceeds the machine-prime sieve range".into(),
            ));
        }
        if self.target_primes.iter().any(|&q| q % 2 == 0) {
            return Err(SurveyError::BadConfig("target primes must be odd".into()));
        }
        if self.workers == 0 {
            return Err(SurveyError::BadConfig("need at least one worker".into()));
        }
        Ok(())
    }

    /// Hash of the fields that determine tallies; checkpoints from runs
    /// with different hashes must never be merged.
    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.u_max.to_le_bytes());
        for &q in &self.target_primes {
            h.update(q.to_le_bytes());
        }
        h.update([match self.mode {
            SurveyMode::Sha => 0u8,
            SurveyMode::Parity => 1u8,
        }]);
        let digest = h.finalize();
        let mut s = String::with_capacity(32);
        for b in &digest[..16] {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

/// One congruence-class tally: count of curves in the class and, per
/// target prime, how many of them have Sha order divisible by it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub modulus: u8,
    pub residue: u8,
    pub count: u64,
    pub divisible: Vec<u64>,
}

impl Bucket {
    fn new(modulus: u8, residue: u8, nprimes: usize) -> Self {
        Bucket { modulus, residue, count: 0, divisible: vec![0; nprimes] }
    }

    pub fn key(&self) -> String {
        format!("mod{}r{}", self.modulus, self.residue)
    }
}

/// Canonical bucket order: u mod 8 in {1,3,5,7}, u mod 3 in {0,1,2},
/// u mod 5 in {0,2,3}. Residues 1,4 mod 5 never occur (5 | u^2+64).
pub(crate) const BUCKET_KEYS: [(u8, u8); 10] = [
    (8, 1),
    (8, 3),
    (8, 5),
    (8, 7),
    (3, 0),
    (3, 1),
    (3, 2),
    (5, 0),
    (5, 2),
    (5, 3),
];

/// Per-curve record for the JSON detail array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub u: u64,
    pub p: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u64>,
    pub parity_predicted: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity_observed: Option<String>,
}

/// Table-1 layout: one row per congruence bucket over each of the three
/// moduli, a total row, and the fixed external reference row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub target_primes: Vec<u64>,
    pub buckets: Vec<Bucket>,
    pub total: Bucket,
    /// u values whose computation failed; excluded from the denominators.
    pub excluded: Vec<u64>,
}

/// Delaunay's heuristic frequencies (percent) for p = 3, 5, 7, 11.
pub const DELAUNAY_ROW: [f64; 4] = [36.1, 20.7, 14.5, 9.2];

/// Observed total-row frequencies at the full survey scale (102312
/// curves), kept as reference metadata next to desk-scale output.
pub const REFERENCE_TOTAL: ([f64; 4], u64) = ([35.8, 19.0, 12.3, 6.2], 102312);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub count: u64,
    pub divisible: Vec<u64>,
}

/// One completed u-range with its partial tallies, as stored per
/// checkpoint line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeRecord {
    pub range: [u64; 2],
    pub buckets: BTreeMap<String, Tally>,
    pub config_hash: String,
    #[serde(default)]
    pub excluded: Vec<u64>,
    #[serde(default)]
    pub curves: Vec<CurveRecord>,
}

/// Accumulated completed ranges; merging is associative, commutative and
/// idempotent so the aggregate is independent of worker scheduling.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub records: Vec<RangeRecord>,
}

/// Full survey result: frequency table plus per-curve detail.
#[derive(Clone, Debug, PartialEq)]
pub struct SurveyOutput {
    pub config_hash: String,
    pub table: FrequencyTable,
    pub detail: Vec<CurveRecord>,
}

/// Parity-survey report: exact degree against the congruence predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub rows: Vec<CurveRecord>,
    pub matches: u64,
    pub mismatches: u64,
    pub conjecture_flagged: u64,
    pub odd_fraction: f64,
    pub excluded: Vec<u64>,
}

/// Sha divisibility frequencies over all admissible u <= u_max, bucketed
/// by the congruence classes of u. Resumes from cfg.checkpoint_path when
/// set; the aggregate is byte-identical for any worker count.
pub fn run_sha_survey(cfg: &SurveyConfig) -> Result<SurveyOutput, SurveyError> {
    runner::run_sha_survey(cfg)
}

/// Exact modular degree against the congruence predictions for every
/// admissible u <= u_max, with conjectural classes flagged separately.
pub fn run_parity_survey(cfg: &SurveyConfig) -> Result<ParityReport, SurveyError> {
    runner::run_parity_survey(cfg)
}

/// Union of two checkpoint sets from the same configuration. Ranges must
/// be pairwise disjoint or exactly identical, which makes the merge
/// associative, commutative and idempotent.
pub fn merge_checkpoints(a: &Checkpoint, b: &Checkpoint) -> Result<Checkpoint, SurveyError> {
    runner::merge_checkpoints(a, b)
}
