use std::path::PathBuf;

use genuslab::quadratic::{ClassNumberCache, DEFAULT_ORACLE_BOUND, DEFAULT_PRECISION_BITS};

pub const CACHE_FILE: &str = "class_numbers.tsv";
pub const DEFAULT_VERDICT_BOUND: u64 = 1_000_000;

/// Resolved settings. Flags win over environment variables, which win over
/// the defaults below.
#[derive(Debug, Clone)]
pub struct Config {
    pub cache_dir: Option<PathBuf>,
    pub threads: usize,
    pub oracle_bound: u64,
    pub verdict_bound: u64,
    pub precision_bits: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            cache_dir: default_cache_dir(),
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            oracle_bound: DEFAULT_ORACLE_BOUND,
            verdict_bound: DEFAULT_VERDICT_BOUND,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }
}

fn default_cache_dir() -> Option<PathBuf> {
    std::env::var_os("XDG_CACHE_HOME")
        .map(PathBuf::from)
        .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache")))
        .map(|d| d.join("genuslab"))
}

impl Config {
    /// Opens the persistent class-number cache, or an in-memory one with a
    /// warning when the directory cannot be used.
    pub fn open_cache(&self) -> Result<ClassNumberCache, genuslab::Error> {
        let cache = match &self.cache_dir {
            None => ClassNumberCache::in_memory(),
            Some(dir) => match ClassNumberCache::open(dir.join(CACHE_FILE)) {
                Ok(c) => c,
                Err(genuslab::Error::Io(e)) => {
                    eprintln!("warning: cache directory {} unusable ({e}); running without a cache", dir.display());
                    ClassNumberCache::in_memory()
                }
                Err(e) => return Err(e),
            },
        };
        Ok(cache.with_precision_bits(self.precision_bits))
    }
}
