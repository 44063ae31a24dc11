//! Sieve tables shared by the census: smallest prime factor, omega and
//! squarefreeness, plus a segmented omega counter for large ranges.

use crate::arith::{isqrt, primes_up_to};
use crate::par::{self, Strategy};

/// Smallest-prime-factor table on `0..=limit`, built once and then read-only.
#[derive(Debug, Clone)]
pub struct SpfTable {
    spf: Vec<u32>,
    omega: Vec<u8>,
    squarefree: Vec<bool>,
}

impl SpfTable {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let mut omega = vec![0u8; n + 1];
        let mut squarefree = vec![false; n + 1];
        if n >= 1 {
            squarefree[1] = true;
        }
        for i in 2..=n {
            let p = spf[i] as usize;
            let rest = i / p;
            if rest % p == 0 {
                omega[i] = omega[rest];
            } else {
                omega[i] = omega[rest] + 1;
                squarefree[i] = squarefree[rest];
            }
        }
        Self {
            spf,
            omega,
            squarefree,
        }
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    #[inline]
    pub fn is_squarefree(&self, n: u64) -> bool {
        self.squarefree[n as usize]
    }

    #[inline]
    pub fn omega(&self, n: u64) -> u32 {
        self.omega[n as usize] as u32
    }

    /// Distinct primes of `n`, ascending.
    pub fn primes_of(&self, mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        out
    }
}

/// Counts of squarefree `m <= limit` grouped by `omega(m)`; index `k` holds
/// the count for `omega = k`.
pub fn squarefree_omega_counts(limit: u64, strategy: Strategy) -> Vec<u64> {
    const SEGMENT: u64 = 1 << 18;
    if limit == 0 {
        return Vec::new();
    }
    let base = primes_up_to(isqrt(limit));
    let segments = limit.div_ceil(SEGMENT);
    let partial = par::map_range(strategy, 0, segments, |s| {
        let lo = 1 + s * SEGMENT;
        let hi = (lo + SEGMENT - 1).min(limit);
        count_segment(lo, hi, &base)
    });
    let mut total = Vec::new();
    for counts in partial {
        if counts.len() > total.len() {
            total.resize(counts.len(), 0);
        }
        for (k, c) in counts.into_iter().enumerate() {
            total[k] += c;
        }
    }
    total
}

// Squarefree omega histogram on lo..=hi using base primes up to sqrt(hi).
fn count_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo + 1) as usize;
    let mut rest: Vec<u64> = (lo..=hi).collect();
    let mut omega = vec![0u8; len];
    let mut squarefree = vec![true; len];
    for &p in base {
        if p * p > hi {
            break;
        }
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m <= hi {
            let i = (m - lo) as usize;
            omega[i] += 1;
            rest[i] /= p;
            if rest[i] % p == 0 {
                squarefree[i] = false;
            }
            m += p;
        }
    }
    let mut counts = vec![0u64; 16];
    for i in 0..len {
        if !squarefree[i] {
            continue;
        }
        let w = omega[i] as usize + usize::from(rest[i] > 1);
        counts[w] += 1;
    }
    while counts.last() == Some(&0) {
        counts.pop();
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factorize;

    #[test]
    fn table_matches_factorization() {
        let t = SpfTable::new(20_000);
        for n in 1..=20_000u64 {
            let f = factorize(n);
            assert_eq!(t.omega(n), f.len() as u32);
            assert_eq!(t.is_squarefree(n), f.iter().all(|&(_, e)| e == 1));
            assert_eq!(t.primes_of(n), f.iter().map(|&(p, _)| p).collect::<Vec<_>>());
        }
    }

    #[test]
    fn segmented_counts_match_scan() {
        let limit = 100_000u64;
        let mut expected = vec![0u64; 8];
        for n in 1..=limit {
            let f = factorize(n);
            if f.iter().all(|&(_, e)| e == 1) {
                expected[f.len()] += 1;
            }
        }
        while expected.last() == Some(&0) {
            expected.pop();
        }
        assert_eq!(squarefree_omega_counts(limit, Strategy::Sequential), expected);
        assert_eq!(squarefree_omega_counts(limit, Strategy::Parallel), expected);
    }
}
