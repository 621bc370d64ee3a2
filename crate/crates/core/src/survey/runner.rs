//! Survey execution: deterministic chunking of the u-interval, a worker
//! pool over the chunks, and aggregation of the per-chunk records into
//! the frequency table or parity report. The chunk boundaries and every
//! per-chunk record depend only on the configuration, so the aggregate
//! is identical for any worker count and any kill/resume schedule.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc;

use num_bigint::BigInt;

use super::checkpoint::{append_record, load_records};
use super::sieve::sieve_ns_u;
use super::{
    Bucket, Checkpoint, CurveRecord, FrequencyTable, ParityReport, RangeRecord, SurveyConfig,
    SurveyError, SurveyMode, SurveyOutput, Tally, BUCKET_KEYS,
};
use crate::analytic::bsd_sha;
use crate::modsym::{modular_degree_exact, CacheConfig};
use crate::ns::{
    construct_pair, normalize_u, predict_two_valuation, Parity, Provenance, TwoValuation,
};

/// Fixed chunk width in u; the checkpoint and merge unit.
const CHUNK: u64 = 64;

fn chunks(u_max: u64) -> Vec<[u64; 2]> {
    let mut out = Vec::new();
    let mut lo = 3u64;
    while lo <= u_max {
        let hi = (lo + CHUNK - 1).min(u_max);
        out.push([lo, hi]);
        lo = hi + 1;
    }
    out
}

fn bucket_key(modulus: u8, residue: u8) -> String {
    format!("mod{modulus}r{residue}")
}

fn empty_buckets(nprimes: usize) -> BTreeMap<String, Tally> {
    BUCKET_KEYS
        .iter()
        .map(|&(m, r)| {
            (
                bucket_key(m, r),
                Tally {
                    count: 0,
                    divisible: vec![0; nprimes],
                },
            )
        })
        .collect()
}

/// Count one curve with the given invariant order into its three
/// congruence classes.
fn tally(buckets: &mut BTreeMap<String, Tally>, u: u64, order: u64, primes: &[u64]) {
    for (m, r) in [(8u8, (u % 8) as u8), (3, (u % 3) as u8), (5, (u % 5) as u8)] {
        let t = buckets
            .get_mut(&bucket_key(m, r))
            .expect("admissible u lands in a listed residue class");
        t.count += 1;
        for (i, &q) in primes.iter().enumerate() {
            if order % q == 0 {
                t.divisible[i] += 1;
            }
        }
    }
}

fn parity_name(odd: bool) -> String {
    if odd { "odd" } else { "even" }.to_string()
}

/// The completed record for one u-range: a pure function of the
/// configuration and the range. Per-curve failures are recorded in
/// `excluded` and leave every tally denominator unchanged.
fn compute_range(cfg: &SurveyConfig, us: &[u64], range: [u64; 2], hash: &str) -> RangeRecord {
    let mut buckets = empty_buckets(cfg.target_primes.len());
    let mut excluded = Vec::new();
    let mut curves = Vec::new();
    let cache = CacheConfig::from_env();
    for &u in us {
        // The survey indexes curves by the positive representative; the
        // constructor wants the sign class 3 mod 4.
        let pair = match normalize_u(&BigInt::from(u)).and_then(|n| construct_pair(&n)) {
            Ok(pair) => pair,
            Err(_) => {
                excluded.push(u);
                continue;
            }
        };
        let p = u * u + 64;
        let predicted = predict_two_valuation(pair.parameter.u())
            .map(|pred| parity_name(pred.parity == Parity::Odd))
            .unwrap_or_default();
        match cfg.mode {
            SurveyMode::Sha => match bsd_sha(&pair, 1, cfg.tol) {
                Ok(bsd) => {
                    tally(&mut buckets, u, bsd.sha, &cfg.target_primes);
                    curves.push(CurveRecord {
                        u,
                        p,
                        sha: Some(bsd.sha),
                        degree: None,
                        parity_predicted: predicted,
                        parity_observed: None,
                    });
                }
                Err(_) => excluded.push(u),
            },
            SurveyMode::Parity => match modular_degree_exact(&pair, &cache) {
                Ok(m) => {
                    tally(&mut buckets, u, m, &cfg.target_primes);
                    curves.push(CurveRecord {
                        u,
                        p,
                        sha: None,
                        degree: Some(m),
                        parity_predicted: predicted,
                        parity_observed: Some(parity_name(m % 2 == 1)),
                    });
                }
                Err(_) => excluded.push(u),
            },
        }
    }
    RangeRecord {
        range,
        buckets,
        config_hash: hash.to_string(),
        excluded,
        curves,
    }
}

/// Run the remaining chunks on cfg.workers threads, appending each
/// completed record to the checkpoint before it counts. Returns the new
/// records, or Interrupted when the max_ranges test hook stopped the run
/// before the list was exhausted.
fn run_ranges(
    cfg: &SurveyConfig,
    hash: &str,
    remaining: &[([u64; 2], Vec<u64>)],
) -> Result<Vec<RangeRecord>, SurveyError> {
    if remaining.is_empty() {
        return Ok(Vec::new());
    }
    let allowed = cfg.max_ranges.unwrap_or(u64::MAX);
    let next = AtomicUsize::new(0);
    let started = AtomicU64::new(0);
    let (tx, rx) = mpsc::channel::<RangeRecord>();
    let nworkers = cfg.workers.min(remaining.len());
    let mut out = Vec::new();
    let mut io_err: Option<SurveyError> = None;
    std::thread::scope(|scope| {
        for _ in 0..nworkers {
            let tx = tx.clone();
            let next = &next;
            let started = &started;
            scope.spawn(move || loop {
                if started.fetch_add(1, Ordering::SeqCst) >= allowed {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= remaining.len() {
                    break;
                }
                let (range, us) = &remaining[i];
                let rec = compute_range(cfg, us, *range, hash);
                if tx.send(rec).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for rec in rx {
            if io_err.is_none() {
                if let Some(path) = &cfg.checkpoint_path {
                    if let Err(e) = append_record(path, &rec) {
                        io_err = Some(e);
                        continue;
                    }
                }
                out.push(rec);
            }
        }
    });
    if let Some(e) = io_err {
        return Err(e);
    }
    if out.len() < remaining.len() {
        return Err(SurveyError::Interrupted);
    }
    Ok(out)
}

/// Load any checkpointed records, compute the rest, and return the full
/// sorted record set for u <= u_max.
fn collect_records(cfg: &SurveyConfig) -> Result<Vec<RangeRecord>, SurveyError> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    let all = chunks(cfg.u_max);
    let admissible = sieve_ns_u(cfg.u_max);
    let mut have: Vec<RangeRecord> = Vec::new();
    if let Some(path) = &cfg.checkpoint_path {
        let valid: HashSet<[u64; 2]> = all.iter().copied().collect();
        let mut seen = HashSet::new();
        for rec in load_records(path, &hash)? {
            if valid.contains(&rec.range) && seen.insert(rec.range) {
                have.push(rec);
            }
        }
    }
    let done: HashSet<[u64; 2]> = have.iter().map(|r| r.range).collect();
    let remaining: Vec<([u64; 2], Vec<u64>)> = all
        .iter()
        .filter(|r| !done.contains(*r))
        .map(|&[lo, hi]| {
            let us: Vec<u64> = admissible
                .iter()
                .copied()
                .filter(|&u| lo <= u && u <= hi)
                .collect();
            ([lo, hi], us)
        })
        .collect();
    have.extend(run_ranges(cfg, &hash, &remaining)?);
    have.sort_by_key(|r| r.range[0]);
    Ok(have)
}

fn sorted_excluded(records: &[RangeRecord]) -> Vec<u64> {
    let mut ex: Vec<u64> = records.iter().flat_map(|r| r.excluded.clone()).collect();
    ex.sort_unstable();
    ex.dedup();
    ex
}

fn sorted_detail(records: &[RangeRecord]) -> Vec<CurveRecord> {
    let mut detail: Vec<CurveRecord> = records.iter().flat_map(|r| r.curves.clone()).collect();
    detail.sort_by_key(|c| c.u);
    detail
}

pub(super) fn run_sha_survey(cfg: &SurveyConfig) -> Result<SurveyOutput, SurveyError> {
    if cfg.mode != SurveyMode::Sha {
        return Err(SurveyError::BadConfig(
            "run_sha_survey needs mode = Sha".into(),
        ));
    }
    let records = collect_records(cfg)?;
    let nprimes = cfg.target_primes.len();
    let mut sums = empty_buckets(nprimes);
    for rec in &records {
        for (key, t) in &rec.buckets {
            if let Some(acc) = sums.get_mut(key) {
                acc.count += t.count;
                for (i, d) in t.divisible.iter().enumerate() {
                    acc.divisible[i] += d;
                }
            }
        }
    }
    let mut buckets = Vec::with_capacity(BUCKET_KEYS.len());
    let mut total = Bucket::new(0, 0, nprimes);
    for &(m, r) in BUCKET_KEYS.iter() {
        let t = &sums[&bucket_key(m, r)];
        let mut b = Bucket::new(m, r, nprimes);
        b.count = t.count;
        b.divisible = t.divisible.clone();
        if m == 8 {
            // Each curve lies in exactly one class mod 8.
            total.count += t.count;
            for (i, d) in t.divisible.iter().enumerate() {
                total.divisible[i] += d;
            }
        }
        buckets.push(b);
    }
    Ok(SurveyOutput {
        config_hash: cfg.config_hash(),
        table: FrequencyTable {
            target_primes: cfg.target_primes.clone(),
            buckets,
            total,
            excluded: sorted_excluded(&records),
        },
        detail: sorted_detail(&records),
    })
}

pub(super) fn run_parity_survey(cfg: &SurveyConfig) -> Result<ParityReport, SurveyError> {
    if cfg.mode != SurveyMode::Parity {
        return Err(SurveyError::BadConfig(
            "run_parity_survey needs mode = Parity".into(),
        ));
    }
    let records = collect_records(cfg)?;
    let rows = sorted_detail(&records);
    let mut matches = 0u64;
    let mut mismatches = 0u64;
    let mut conjecture_flagged = 0u64;
    let mut odd = 0u64;
    for row in &rows {
        let m = row.degree.expect("parity rows carry the exact degree");
        let pred = predict_two_valuation(&normalize_u(&BigInt::from(row.u))?)?;
        let v2 = m.trailing_zeros();
        let parity_ok = (m % 2 == 1) == (pred.parity == Parity::Odd);
        let val_ok = match pred.two_adic {
            TwoValuation::ExactlyZero => v2 == 0,
            TwoValuation::ExactlyOne => v2 == 1,
            TwoValuation::AtLeastTwo => v2 >= 2,
        };
        if pred.provenance == Provenance::Conjecture {
            conjecture_flagged += 1;
        }
        if parity_ok && val_ok {
            matches += 1;
        } else {
            mismatches += 1;
        }
        if m % 2 == 1 {
            odd += 1;
        }
    }
    let odd_fraction = if rows.is_empty() {
        0.0
    } else {
        odd as f64 / rows.len() as f64
    };
    Ok(ParityReport {
        rows,
        matches,
        mismatches,
        conjecture_flagged,
        odd_fraction,
        excluded: sorted_excluded(&records),
    })
}

pub(super) fn merge_checkpoints(a: &Checkpoint, b: &Checkpoint) -> Result<Checkpoint, SurveyError> {
    let mut hash: Option<&str> = None;
    for rec in a.records.iter().chain(b.records.iter()) {
        match hash {
            None => hash = Some(&rec.config_hash),
            Some(h) if h != rec.config_hash => return Err(SurveyError::ConfigHashMismatch),
            _ => {}
        }
    }
    let mut by_lo: BTreeMap<u64, &RangeRecord> = BTreeMap::new();
    for rec in a.records.iter().chain(b.records.iter()) {
        if let Some(prev) = by_lo.get(&rec.range[0]) {
            if *prev != rec {
                return Err(SurveyError::OverlappingRanges);
            }
            continue;
        }
        by_lo.insert(rec.range[0], rec);
    }
    let merged: Vec<RangeRecord> = by_lo.into_values().cloned().collect();
    for w in merged.windows(2) {
        if w[0].range[1] >= w[1].range[0] {
            return Err(SurveyError::OverlappingRanges);
        }
    }
    Ok(Checkpoint { records: merged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sha_cfg(u_max: u64) -> SurveyConfig {
        SurveyConfig::new(u_max, SurveyMode::Sha)
    }

    #[test]
    fn chunking_covers_the_closed_interval_once() {
        let cs = chunks(200);
        assert_eq!(cs.first(), Some(&[3u64, 66]));
        assert_eq!(cs.last(), Some(&[195u64, 200]));
        let mut next = 3;
        for [lo, hi] in cs {
            assert_eq!(lo, next);
            assert!(hi >= lo);
            next = hi + 1;
        }
        assert_eq!(next, 201);
        assert!(chunks(2).is_empty());
    }

    #[test]
    fn small_sha_survey_counts_every_admissible_u() {
        let out = run_sha_survey(&sha_cfg(50)).unwrap();
        assert_eq!(out.table.total.count, 12);
        assert!(out.table.excluded.is_empty());
        assert_eq!(out.detail.len(), 12);
        assert!(out.detail.iter().all(|c| c.sha.unwrap_or(0) >= 1));
        let mod8: u64 = out
            .table
            .buckets
            .iter()
            .filter(|b| b.modulus == 8)
            .map(|b| b.count)
            .sum();
        let mod3: u64 = out
            .table
            .buckets
            .iter()
            .filter(|b| b.modulus == 3)
            .map(|b| b.count)
            .sum();
        assert_eq!(mod8, 12);
        assert_eq!(mod3, 12);
    }

    #[test]
    fn worker_count_does_not_change_the_output() {
        let mut one = sha_cfg(120);
        one.workers = 1;
        let mut four = sha_cfg(120);
        four.workers = 4;
        let a = run_sha_survey(&one).unwrap();
        let b = run_sha_survey(&four).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.detail, b.detail);
    }

    #[test]
    fn kill_and_resume_equals_uninterrupted() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("survey.ckpt");
        let mut killed = sha_cfg(200);
        killed.checkpoint_path = Some(path.clone());
        killed.max_ranges = Some(2);
        assert!(matches!(
            run_sha_survey(&killed),
            Err(SurveyError::Interrupted)
        ));
        let lines = std::fs::read_to_string(&path).unwrap();
        assert_eq!(lines.lines().count(), 2);

        let mut resumed = sha_cfg(200);
        resumed.checkpoint_path = Some(path.clone());
        let a = run_sha_survey(&resumed).unwrap();
        let b = run_sha_survey(&sha_cfg(200)).unwrap();
        assert_eq!(a.table, b.table);
        assert_eq!(a.detail, b.detail);
    }

    #[test]
    fn torn_trailing_checkpoint_line_is_dropped() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("survey.ckpt");
        let mut cfg = sha_cfg(150);
        cfg.checkpoint_path = Some(path.clone());
        let full = run_sha_survey(&cfg).unwrap();
        // Simulate a kill mid-write of the final line.
        let contents = std::fs::read_to_string(&path).unwrap();
        let cut = contents.len() - 17;
        std::fs::write(&path, &contents[..cut]).unwrap();
        let again = run_sha_survey(&cfg).unwrap();
        assert_eq!(full.table, again.table);
    }

    #[test]
    fn checkpoints_from_other_configs_are_refused() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("survey.ckpt");
        let mut cfg = sha_cfg(60);
        cfg.checkpoint_path = Some(path.clone());
        run_sha_survey(&cfg).unwrap();
        let mut other = sha_cfg(61);
        other.checkpoint_path = Some(path);
        assert!(matches!(
            run_sha_survey(&other),
            Err(SurveyError::ConfigHashMismatch)
        ));
    }

    #[test]
    fn merge_is_union_idempotent_and_guarded() {
        let cfg = sha_cfg(150);
        let records = collect_records(&cfg).unwrap();
        assert!(records.len() >= 3);
        let a = Checkpoint {
            records: records[..1].to_vec(),
        };
        let b = Checkpoint {
            records: records[1..].to_vec(),
        };
        let ab = merge_checkpoints(&a, &b).unwrap();
        let ba = merge_checkpoints(&b, &a).unwrap();
        assert_eq!(ab.records, records);
        assert_eq!(ba.records, records);
        let aa = merge_checkpoints(&a, &a).unwrap();
        assert_eq!(aa.records, a.records);

        let mut wrong_hash = records[0].clone();
        wrong_hash.config_hash = "feedfacefeedfacefeedfacefeedface".into();
        let w = Checkpoint {
            records: vec![wrong_hash],
        };
        assert!(matches!(
            merge_checkpoints(&a, &w),
            Err(SurveyError::ConfigHashMismatch)
        ));

        let mut tampered = records[0].clone();
        tampered.excluded.push(9999);
        let t = Checkpoint {
            records: vec![tampered],
        };
        assert!(matches!(
            merge_checkpoints(&a, &t),
            Err(SurveyError::OverlappingRanges)
        ));

        let mut straddle = records[1].clone();
        straddle.range = [records[0].range[1], records[1].range[1]];
        let s = Checkpoint {
            records: vec![straddle],
        };
        assert!(matches!(
            merge_checkpoints(&a, &s),
            Err(SurveyError::OverlappingRanges)
        ));
    }

    #[test]
    fn parity_survey_agrees_with_predictions_up_to_forty_five() {
        let cfg = SurveyConfig::new(45, SurveyMode::Parity);
        let report = run_parity_survey(&cfg).unwrap();
        assert_eq!(report.rows.len(), 11);
        assert_eq!(report.matches, 11);
        assert_eq!(report.mismatches, 0);
        assert_eq!(report.conjecture_flagged, 4);
        assert!(report.excluded.is_empty());
        let odd = report
            .rows
            .iter()
            .filter(|r| r.degree.unwrap() % 2 == 1)
            .count();
        assert_eq!(report.odd_fraction, odd as f64 / 11.0);
        assert_eq!(odd, 7);
    }

    #[test]
    fn empty_parity_survey_succeeds() {
        let cfg = SurveyConfig::new(2, SurveyMode::Parity);
        let report = run_parity_survey(&cfg).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.matches, 0);
        assert_eq!(report.mismatches, 0);
        assert_eq!(report.odd_fraction, 0.0);
    }

    #[test]
    fn mode_mismatch_is_a_config_error() {
        assert!(matches!(
            run_parity_survey(&sha_cfg(50)),
            Err(SurveyError::BadConfig(_))
        ));
    }
}
