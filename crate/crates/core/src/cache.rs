//! Get-or-compute store for [`PeriodInfo`] keyed by `(sequence hash, q)`.
//!
//! The in-memory map is shared between threads. Optionally every fresh result
//! is appended to a text file (one entry per line, see `docs/formats.md`) so
//! later runs can reuse it. Each line carries a checksum; lines that fail it
//! are dropped on load and the value is recomputed on demand.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use fs2::FileExt;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::ilrs::{IlrsSpec, SpecKey};
use crate::modular::{find_period, PeriodInfo};

const TAG: &str = "period-v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: u64,
    pub computed: u64,
    /// Lines rejected on load because their checksum did not match.
    pub rejected: u64,
}

#[derive(Debug)]
pub struct PeriodCache {
    map: RwLock<HashMap<(SpecKey, u64), PeriodInfo>>,
    store: Option<PathBuf>,
    state_cap: u64,
    hits: AtomicU64,
    computed: AtomicU64,
    rejected: AtomicU64,
}

impl PeriodCache {
    pub fn in_memory(state_cap: u64) -> Self {
        PeriodCache {
            map: RwLock::new(HashMap::new()),
            store: None,
            state_cap,
            hits: AtomicU64::new(0),
            computed: AtomicU64::new(0),
            rejected: AtomicU64::new(0),
        }
    }

    /// Opens (or creates on first write) a persistent cache file.
    pub fn open(path: impl AsRef<Path>, state_cap: u64) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let cache = PeriodCache {
            store: Some(path.clone()),
            ..Self::in_memory(state_cap)
        };
        if path.exists() {
            let file = File::open(&path)?;
            file.lock_shared()?;
            let mut map = cache.map.write().expect("poisoned");
            for line in BufReader::new(&file).lines() {
                let line = line?;
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                match parse_line(&line) {
                    Some((key, info)) => {
                        map.insert((key, info.q), info);
                    }
                    None => {
                        cache.rejected.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
            drop(map);
            FileExt::unlock(&file)?;
        }
        Ok(cache)
    }

    pub fn get(&self, spec: &IlrsSpec, q: u64) -> Option<PeriodInfo> {
        self.map
            .read()
            .expect("poisoned")
            .get(&(spec.key().clone(), q))
            .copied()
    }

    /// Returns the cached value or computes, stores and returns it. Two threads
    /// racing on the same key may both compute; the results are identical.
    pub fn get_or_compute(&self, spec: &IlrsSpec, q: u64) -> Result<PeriodInfo> {
        if let Some(info) = self.get(spec, q) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(info);
        }
        let info = find_period(spec, q, self.state_cap)?;
        self.computed.fetch_add(1, Ordering::Relaxed);
        self.map
            .write()
            .expect("poisoned")
            .insert((spec.key().clone(), q), info);
        if let Some(path) = &self.store {
            append_line(path, spec.key(), &info)?;
        }
        Ok(info)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            computed: self.computed.load(Ordering::Relaxed),
            rejected: self.rejected.load(Ordering::Relaxed),
        }
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn checksum(body: &str) -> String {
    Sha256::digest(body.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub(crate) fn format_line(key: &SpecKey, info: &PeriodInfo) -> String {
    let body = format!(
        "{TAG} {key} {} {} {} {}",
        info.q,
        info.s,
        info.period,
        u8::from(info.bound_check)
    );
    let sum = checksum(&body);
    format!("{body} {sum}")
}

fn parse_line(line: &str) -> Option<(SpecKey, PeriodInfo)> {
    let (body, sum) = line.trim_end().rsplit_once(' ')?;
    if checksum(body) != sum {
        return None;
    }
    let fields: Vec<&str> = body.split(' ').collect();
    let [tag, key, q, s, period, check] = fields[..] else {
        return None;
    };
    if tag != TAG {
        return None;
    }
    let info = PeriodInfo {
        q: q.parse().ok()?,
        s: s.parse().ok()?,
        period: period.parse().ok()?,
        bound_check: match check {
            "0" => false,
            "1" => true,
            _ => return None,
        },
    };
    if info.q < 2 || info.s == 0 || info.period == 0 {
        return None;
    }
    Some((SpecKey::from_hex(key)?, info))
}

fn append_line(path: &Path, key: &SpecKey, info: &PeriodInfo) -> Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.lock_exclusive()?;
    let res = writeln!(file, "{}", format_line(key, info));
    FileExt::unlock(&file)?;
    res?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::DEFAULT_STATE_CAP;

    #[test]
    fn cold_then_warm() {
        let cache = PeriodCache::in_memory(DEFAULT_STATE_CAP);
        let f = IlrsSpec::fibonacci();
        let info = cache.get_or_compute(&f, 10).unwrap();
        assert_eq!((info.s, info.period), (1, 60));
        assert_eq!(cache.stats().computed, 1);
        let again = cache.get_or_compute(&f, 10).unwrap();
        assert_eq!(again, info);
        assert_eq!(cache.stats(), CacheStats { hits: 1, computed: 1, rejected: 0 });
    }

    #[test]
    fn line_round_trip_and_checksum() {
        let f = IlrsSpec::fibonacci();
        let info = find_period(&f, 7, DEFAULT_STATE_CAP).unwrap();
        let line = format_line(f.key(), &info);
        assert_eq!(parse_line(&line), Some((f.key().clone(), info)));
        let tampered = line.replacen(" 16 ", " 17 ", 1);
        assert_ne!(tampered, line);
        assert_eq!(parse_line(&tampered), None);
        assert_eq!(parse_line("garbage"), None);
    }

    #[test]
    fn persistent_store_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("periods.cache");
        let f = IlrsSpec::fibonacci();
        {
            let cache = PeriodCache::open(&path, DEFAULT_STATE_CAP).unwrap();
            cache.get_or_compute(&f, 10).unwrap();
            cache.get_or_compute(&f, 7).unwrap();
        }
        let warm = PeriodCache::open(&path, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(warm.len(), 2);
        warm.get_or_compute(&f, 10).unwrap();
        assert_eq!(warm.stats().computed, 0);

        // Corrupt the q=10 entry: period 60 -> 61 without fixing the checksum.
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace(" 1 60 ", " 1 61 ")).unwrap();
        let cold = PeriodCache::open(&path, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(cold.stats().rejected, 1);
        let info = cold.get_or_compute(&f, 10).unwrap();
        assert_eq!(info.period, 60);
        assert_eq!(cold.stats().computed, 1);
    }
}
