//! On-disk cache for built spaces and Hecke matrices, keyed by (p, l).
//! Versioned binary format with an 8-byte magic header; any corruption
//! fails closed (the entry is ignored and recomputed).
//!
//! Layout: magic, kind, level, key, body, then a SHA-256 digest of all
//! preceding bytes. Hecke bodies also embed the digest of the space body
//! they were computed against, so rows can never be replayed onto a
//! space with a different basis. Writes go to a temporary file and are
//! renamed into place.

use super::hecke::hecke_operator;
use super::space::{self, ManinSymbolSpace, SparseRow};
use super::ModSymError;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "NSCURVES_CACHE_DIR";

#[derive(Clone, Debug, Default)]
pub struct CacheConfig {
    pub dir: Option<PathBuf>,
    pub level_limit: u64,
}

impl CacheConfig {
    pub fn from_env() -> Self {
        CacheConfig {
            dir: std::env::var_os(CACHE_ENV).map(PathBuf::from),
            level_limit: super::space::DEFAULT_LEVEL_LIMIT,
        }
    }

    pub fn disabled() -> Self {
        CacheConfig {
            dir: None,
            level_limit: super::space::DEFAULT_LEVEL_LIMIT,
        }
    }
}

const MAGIC: &[u8; 8] = b"NSMSYM01";
const KIND_SPACE: u32 = 0;
const KIND_HECKE: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_i64(buf: &mut Vec<u8>, v: i64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn bytes(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        if end > self.buf.len() {
            return None;
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.bytes(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self) -> Option<u64> {
        self.bytes(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn i64(&mut self) -> Option<i64> {
        self.bytes(8).map(|b| i64::from_le_bytes(b.try_into().unwrap()))
    }

    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn put_rows(buf: &mut Vec<u8>, rows: &[SparseRow]) {
    put_u64(buf, rows.len() as u64);
    for row in rows {
        put_u32(buf, row.len() as u32);
        for &(j, c) in row {
            put_u32(buf, j);
            put_i64(buf, c);
        }
    }
}

/// Reads `count` sparse rows with positions below `rank`, strictly
/// ascending, nonzero coefficients.
fn read_rows(r: &mut Reader, count: usize, rank: usize) -> Option<Vec<SparseRow>> {
    if r.u64()? != count as u64 {
        return None;
    }
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.u32()? as usize;
        if len > rank {
            return None;
        }
        let mut row: SparseRow = Vec::with_capacity(len);
        let mut last = None;
        for _ in 0..len {
            let j = r.u32()?;
            let c = r.i64()?;
            if j as usize >= rank || c == 0 || last.is_some_and(|l| j <= l) {
                return None;
            }
            last = Some(j);
            row.push((j, c));
        }
        rows.push(row);
    }
    Some(rows)
}

fn space_body(space: &ManinSymbolSpace) -> Vec<u8> {
    let mut b = Vec::new();
    let rank = space.rank();
    put_u64(&mut b, rank as u64);
    for j in 0..rank {
        put_u32(&mut b, space.basis_coset(j));
    }
    let n = space.table().size();
    let rows: Vec<SparseRow> = (0..n).map(|i| space.coset_coords(i).to_vec()).collect();
    put_rows(&mut b, &rows);
    b
}

fn file_bytes(kind: u32, p: u64, key: u64, body: &[u8]) -> Vec<u8> {
    let mut f = Vec::with_capacity(body.len() + 60);
    f.extend_from_slice(MAGIC);
    put_u32(&mut f, kind);
    put_u64(&mut f, p);
    put_u64(&mut f, key);
    f.extend_from_slice(body);
    let digest = Sha256::digest(&f);
    f.extend_from_slice(&digest);
    f
}

/// Checks magic, kind, level, key and the trailing digest; returns the
/// body slice on success.
fn check_and_strip(kind: u32, p: u64, key: u64, data: &[u8]) -> Option<&[u8]> {
    if data.len() < 8 + 4 + 8 + 8 + 32 {
        return None;
    }
    let (head, digest) = data.split_at(data.len() - 32);
    if Sha256::digest(head).as_slice() != digest {
        return None;
    }
    let mut r = Reader::new(head);
    if r.bytes(8)? != MAGIC || r.u32()? != kind || r.u64()? != p || r.u64()? != key {
        return None;
    }
    Some(&head[r.pos..])
}

fn space_path(cfg: &CacheConfig, p: u64) -> Option<PathBuf> {
    cfg.dir.as_ref().map(|d| d.join(format!("p{}-space.msc", p)))
}

fn hecke_path(cfg: &CacheConfig, p: u64, l: u64) -> Option<PathBuf> {
    cfg.dir.as_ref().map(|d| d.join(format!("p{}-t{}.msc", p, l)))
}

fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().expect("cache paths have a parent");
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().unwrap_or_default().to_string_lossy();
    let tmp = dir.join(format!(".{}.{}.tmp", name, std::process::id()));
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    std::fs::rename(&tmp, path)
}

fn load_space(cfg: &CacheConfig, p: u64) -> Option<ManinSymbolSpace> {
    let data = std::fs::read(space_path(cfg, p)?).ok()?;
    let body = check_and_strip(KIND_SPACE, p, 0, &data)?;
    let mut r = Reader::new(body);
    let rank = r.u64()? as usize;
    if rank > (p + 1) as usize {
        return None;
    }
    let mut basis = Vec::with_capacity(rank);
    for _ in 0..rank {
        basis.push(r.u32()?);
    }
    let coords = read_rows(&mut r, (p + 1) as usize, rank)?;
    if !r.done() {
        return None;
    }
    space::from_parts(p, basis, coords).ok()
}

fn store_space(cfg: &CacheConfig, space: &ManinSymbolSpace) {
    let Some(path) = space_path(cfg, space.p()) else {
        return;
    };
    let bytes = file_bytes(KIND_SPACE, space.p(), 0, &space_body(space));
    let _ = atomic_write(&path, &bytes);
}

/// Builds the space at level p, going through the cache when enabled.
pub(super) fn cached_space(cfg: &CacheConfig, p: u64) -> Result<ManinSymbolSpace, ModSymError> {
    if p > cfg.level_limit {
        return Err(ModSymError::LevelTooLarge(p, cfg.level_limit));
    }
    if let Some(s) = load_space(cfg, p) {
        return Ok(s);
    }
    let s = space::build_space_with_limit(p, cfg.level_limit)?;
    store_space(cfg, &s);
    Ok(s)
}

/// Computes the rows of T_l on the space basis, going through the cache
/// when enabled.
pub(super) fn cached_hecke(
    cfg: &CacheConfig,
    space: &ManinSymbolSpace,
    l: u64,
) -> Result<Vec<SparseRow>, ModSymError> {
    if cfg.dir.is_none() {
        return hecke_operator(space, l);
    }
    let sd: [u8; 32] = Sha256::digest(space_body(space)).into();
    if let Some(rows) = load_hecke(cfg, space, l, &sd) {
        return Ok(rows);
    }
    let rows = hecke_operator(space, l)?;
    store_hecke(cfg, space.p(), l, &sd, &rows);
    Ok(rows)
}

fn load_hecke(
    cfg: &CacheConfig,
    space: &ManinSymbolSpace,
    l: u64,
    space_digest: &[u8; 32],
) -> Option<Vec<SparseRow>> {
    let p = space.p();
    let data = std::fs::read(hecke_path(cfg, p, l)?).ok()?;
    let body = check_and_strip(KIND_HECKE, p, l, &data)?;
    let mut r = Reader::new(body);
    if r.bytes(32)? != space_digest {
        return None;
    }
    let rows = read_rows(&mut r, space.rank(), space.rank())?;
    if !r.done() {
        return None;
    }
    Some(rows)
}

fn store_hecke(cfg: &CacheConfig, p: u64, l: u64, space_digest: &[u8; 32], rows: &[SparseRow]) {
    let Some(path) = hecke_path(cfg, p, l) else {
        return;
    };
    let mut body = Vec::new();
    body.extend_from_slice(space_digest);
    put_rows(&mut body, rows);
    let bytes = file_bytes(KIND_HECKE, p, l, &body);
    let _ = atomic_write(&path, &bytes);
}
