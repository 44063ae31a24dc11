//! Persistent class-number memo.
//!
//! File format: append-only text, one `D<TAB>h<TAB>method` record per line.
//! Repeated discriminants must agree or loading fails.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, RwLock};

use super::class_number::{class_number, class_number_precise, DEFAULT_PRECISION_BITS};
use super::forms::class_number_forms;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    Forms,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::Forms => "forms",
        })
    }
}

impl FromStr for Method {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "analytic" => Ok(Method::Analytic),
            "forms" => Ok(Method::Forms),
            _ => Err(()),
        }
    }
}

/// Class numbers keyed by discriminant. Reads are concurrent; writes to the
/// backing file are serialized through one writer.
#[derive(Debug)]
pub struct ClassNumberCache {
    entries: RwLock<HashMap<i64, (u64, Method)>>,
    writer: Mutex<Option<File>>,
    path: Option<PathBuf>,
    precision_bits: usize,
}

impl Default for ClassNumberCache {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl ClassNumberCache {
    /// A cache that is never persisted.
    pub fn in_memory() -> Self {
        Self {
            entries: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
            path: None,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }

    /// Loads `path` (creating it and its parent directory when missing) and
    /// appends every new entry to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let (d, h, method) = parse_line(&line).ok_or_else(|| Error::CacheFormat {
                    line: i + 1,
                    content: line.clone(),
                })?;
                if let Some(&(prev, _)) = entries.get(&d) {
                    if prev != h {
                        return Err(Error::CacheConflict {
                            discriminant: d,
                            first: prev,
                            second: h,
                        });
                    }
                }
                entries.insert(d, (h, method));
            }
        } else if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            entries: RwLock::new(entries),
            writer: Mutex::new(Some(file)),
            path: Some(path),
            precision_bits: DEFAULT_PRECISION_BITS,
        })
    }

    pub fn with_precision_bits(mut self, bits: usize) -> Self {
        self.precision_bits = bits.max(64);
        self
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, d: i64) -> Option<u64> {
        self.entries.read().unwrap().get(&d).map(|&(h, _)| h)
    }

    /// Records a value; a disagreeing value already present is an error.
    pub fn insert(&self, d: i64, h: u64, method: Method) -> Result<()> {
        {
            let mut entries = self.entries.write().unwrap();
            match entries.get(&d) {
                Some(&(prev, _)) if prev == h => return Ok(()),
                Some(&(prev, _)) => {
                    return Err(Error::CacheConflict {
                        discriminant: d,
                        first: prev,
                        second: h,
                    })
                }
                None => {
                    entries.insert(d, (h, method));
                }
            }
        }
        if let Some(file) = self.writer.lock().unwrap().as_mut() {
            writeln!(file, "{d}\t{h}\t{method}")?;
        }
        Ok(())
    }

    /// Memoized analytic class number, escalating precision on failure.
    pub fn class_number(&self, d: i64) -> Result<u64> {
        if let Some(h) = self.get(d) {
            return Ok(h);
        }
        let h = match class_number(d) {
            Err(Error::PrecisionFailure { .. }) => self.escalate(d)?,
            other => other?,
        };
        self.insert(d, h, Method::Analytic)?;
        Ok(h)
    }

    fn escalate(&self, d: i64) -> Result<u64> {
        match class_number_precise(d, self.precision_bits) {
            Err(Error::PrecisionFailure { .. }) => class_number_precise(d, 2 * self.precision_bits),
            other => other,
        }
    }

    /// Memoized forms-oracle class number.
    pub fn class_number_forms(&self, d: i64, bound: u64) -> Result<u64> {
        if let Some(h) = self.get(d) {
            return Ok(h);
        }
        let h = class_number_forms(d, bound)?;
        self.insert(d, h, Method::Forms)?;
        Ok(h)
    }
}

fn parse_line(line: &str) -> Option<(i64, u64, Method)> {
    let mut parts = line.split('\t');
    let d = parts.next()?.trim().parse().ok()?;
    let h = parts.next()?.trim().parse().ok()?;
    let method = parts.next()?.trim().parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((d, h, method))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("classnumbers.tsv");
        {
            let cache = ClassNumberCache::open(&path).unwrap();
            assert_eq!(cache.class_number(1045), Ok(4));
            assert_eq!(cache.class_number(-23), Ok(3));
            assert_eq!(cache.class_number_forms(40, 1000), Ok(2));
        }
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "1045\t4\tanalytic\n-23\t3\tanalytic\n40\t2\tforms\n");
        let cache = ClassNumberCache::open(&path).unwrap();
        assert_eq!(cache.len(), 3);
        assert_eq!(cache.get(40), Some(2));
    }

    #[test]
    fn conflicting_lines_fail_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        fs::write(&path, "5\t1\tanalytic\n5\t1\tforms\n").unwrap();
        assert!(ClassNumberCache::open(&path).is_ok());
        fs::write(&path, "5\t1\tanalytic\n5\t2\tforms\n").unwrap();
        assert_eq!(
            ClassNumberCache::open(&path).unwrap_err(),
            Error::CacheConflict { discriminant: 5, first: 1, second: 2 }
        );
        fs::write(&path, "5\tone\tanalytic\n").unwrap();
        assert!(matches!(
            ClassNumberCache::open(&path),
            Err(Error::CacheFormat { line: 1, .. })
        ));
    }

    #[test]
    fn insert_rejects_disagreement() {
        let cache = ClassNumberCache::in_memory();
        cache.insert(5, 1, Method::Forms).unwrap();
        cache.insert(5, 1, Method::Analytic).unwrap();
        assert!(matches!(cache.insert(5, 2, Method::Analytic), Err(Error::CacheConflict { .. })));
    }

    #[test]
    fn concurrent_readers_and_writers() {
        let cache = ClassNumberCache::in_memory();
        let ds: Vec<i64> = (-400..-3).filter(|&d| crate::quadratic::is_fundamental(d)).collect();
        std::thread::scope(|s| {
            for chunk in ds.chunks(20) {
                let cache = &cache;
                s.spawn(move || {
                    for &d in chunk {
                        cache.class_number(d).unwrap();
                    }
                });
            }
        });
        assert_eq!(cache.len(), ds.len());
    }
}
