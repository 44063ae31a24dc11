//! Multiquadratic fields `Q(sqrt r1, ..., sqrt rk)` as F2-subspaces of
//! `Q*/Q*^2`.
//!
//! A squarefree radicand is a bit vector: bit 0 is the sign, bit `i + 1` is
//! the `i`-th prime of the field's prime list.

use serde::Serialize;

use crate::arith::{factor_squarefree, is_squarefree};
use crate::error::{Error, Result};

// Spans are enumerated explicitly for canonical bases; keep them small.
const MAX_ENUMERATED_RANK: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiquadraticField {
    generators: Vec<i64>,
    #[serde(skip)]
    primes: Vec<u64>,
    // row-echelon basis, distinct leading bits
    #[serde(skip)]
    basis: Vec<u64>,
}

impl MultiquadraticField {
    /// The field generated by the square roots of `generators`.
    ///
    /// Every generator must be squarefree and nonzero; `1` is allowed and
    /// contributes nothing.
    pub fn new(generators: Vec<i64>) -> Result<Self> {
        let mut primes = Vec::new();
        for &g in &generators {
            if g == 0 {
                return Err(Error::DegenerateRadicand(0));
            }
            if !is_squarefree(g) {
                return Err(Error::NotSquarefree(g));
            }
            primes.extend_from_slice(factor_squarefree(g.abs())?.primes());
        }
        primes.sort_unstable();
        primes.dedup();
        if primes.len() >= 63 {
            return Err(Error::Overflow(format!("{} primes in one multiquadratic field", primes.len())));
        }
        let mut field = Self { generators, primes, basis: Vec::new() };
        for i in 0..field.generators.len() {
            let v = field.vector(field.generators[i]).expect("prime list covers generators");
            field.push(v);
        }
        Ok(field)
    }

    fn vector(&self, r: i64) -> Option<u64> {
        let mut v = u64::from(r < 0);
        let mut n = r.unsigned_abs();
        for (i, &p) in self.primes.iter().enumerate() {
            if n % p == 0 {
                n /= p;
                v |= 1 << (i + 1);
            }
        }
        (n == 1).then_some(v)
    }

    fn value(&self, v: u64) -> Result<i64> {
        let mut x: i64 = 1;
        for (i, &p) in self.primes.iter().enumerate() {
            if v >> (i + 1) & 1 == 1 {
                x = x
                    .checked_mul(p as i64)
                    .ok_or_else(|| Error::Overflow("multiquadratic radicand".into()))?;
            }
        }
        Ok(if v & 1 == 1 { -x } else { x })
    }

    fn reduce(&self, mut v: u64) -> u64 {
        for &b in &self.basis {
            let lead = 63 - b.leading_zeros();
            if v >> lead & 1 == 1 {
                v ^= b;
            }
        }
        v
    }

    fn push(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.basis.push(r);
        self.basis.sort_unstable_by(|a, b| b.cmp(a));
        true
    }

    /// The generators as given.
    pub fn generators(&self) -> &[i64] {
        &self.generators
    }

    /// Primes dividing some generator.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// F2-rank of the radicand group.
    pub fn rank(&self) -> u32 {
        self.basis.len() as u32
    }

    /// `[F : Q] = 2^rank`.
    pub fn degree(&self) -> u64 {
        1 << self.rank()
    }

    /// Whether `sqrt r` lies in the field.
    pub fn contains(&self, r: i64) -> bool {
        if r == 0 || !is_squarefree(r) {
            return false;
        }
        self.vector(r).is_some_and(|v| self.reduce(v) == 0)
    }

    /// Whether `other` is a subfield.
    pub fn contains_field(&self, other: &MultiquadraticField) -> bool {
        other.generators.iter().all(|&g| self.contains(g))
    }

    pub fn is_totally_real(&self) -> bool {
        self.basis.iter().all(|v| v & 1 == 0)
    }

    fn span(&self) -> Result<Vec<u64>> {
        if self.rank() > MAX_ENUMERATED_RANK {
            return Err(Error::Overflow(format!("span of rank {}", self.rank())));
        }
        let mut span = vec![0u64];
        for &b in &self.basis {
            let doubled: Vec<u64> = span.iter().map(|v| v ^ b).collect();
            span.extend(doubled);
        }
        Ok(span)
    }

    /// All radicands in the field except 1, ascending by absolute value.
    pub fn radicands(&self) -> Result<Vec<i64>> {
        let mut out = self
            .span()?
            .into_iter()
            .filter(|&v| v != 0)
            .map(|v| self.value(v))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable_by_key(|&r| (r.unsigned_abs(), r < 0));
        Ok(out)
    }

    // Greedy basis from the sorted span elements passing `keep`.
    fn greedy_basis(&self, keep: impl Fn(u64) -> bool) -> Result<Vec<i64>> {
        let mut candidates = Vec::new();
        for v in self.span()? {
            if v != 0 && keep(v) {
                candidates.push((self.value(v)?, v));
            }
        }
        candidates.sort_unstable_by_key(|&(r, _)| (r.unsigned_abs(), r < 0));
        let mut acc = Self { generators: Vec::new(), primes: self.primes.clone(), basis: Vec::new() };
        let mut out = Vec::new();
        for (r, v) in candidates {
            if acc.push(v) {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Canonical generators: the greedy basis of the span ordered by
    /// absolute value.
    pub fn canonical_generators(&self) -> Result<Vec<i64>> {
        self.greedy_basis(|_| true)
    }

    /// The maximal totally real subfield, with canonical generators.
    pub fn totally_real_subfield(&self) -> Result<MultiquadraticField> {
        Self::new(self.greedy_basis(|v| v & 1 == 0)?)
    }
}
