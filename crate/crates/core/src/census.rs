//! Census of odd real biquadratic fields by discriminant.
//!
//! Fields are canonical triples `m1 < m2 < m3` of pairwise coprime odd
//! squarefree integers (only `m1` may be 1) with `c^2 (m1 m2 m3)^2 <= X`,
//! `c = 1` when the `mi` agree mod 4 and `c = 4` otherwise.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arith::{factor_squarefree, isqrt, primes_up_to};
use crate::biquadratic::{discriminant_of, genus_number, BiquadraticField};
use crate::error::{Error, Result};
use crate::euclid::{euclidean_verdict, Status, Verdict};
use crate::par::{self, Strategy};
use crate::quadratic::ClassNumberCache;
use crate::sieve::{squarefree_omega_counts, SpfTable};

/// Identity checks run on every field up to this discriminant and on a
/// 1% sample above it.
pub const FULL_CHECK_BOUND: u64 = 100_000_000;

/// Counts by `omega(Delta)` overall and per decade `(10^(k-1), 10^k]`,
/// keyed by `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub by_omega: BTreeMap<u32, u64>,
    pub by_decade: BTreeMap<u32, BTreeMap<u32, u64>>,
}

impl Tally {
    fn add(&mut self, delta: u64, omega: u32) {
        *self.by_omega.entry(omega).or_default() += 1;
        *self
            .by_decade
            .entry(decade(delta))
            .or_default()
            .entry(omega)
            .or_default() += 1;
    }

    fn merge(&mut self, other: Tally) {
        for (w, c) in other.by_omega {
            *self.by_omega.entry(w).or_default() += c;
        }
        for (d, m) in other.by_decade {
            let slot = self.by_decade.entry(d).or_default();
            for (w, c) in m {
                *slot.entry(w).or_default() += c;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.by_omega.values().sum()
    }
}

/// Smallest `k` with `delta <= 10^k`.
pub fn decade(delta: u64) -> u32 {
    let mut k = 0;
    let mut p: u128 = 1;
    while u128::from(delta) > p {
        p *= 10;
        k += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecadeRow {
    /// Upper exponent: the decade is `(10^(k-1), 10^k]`.
    pub decade: u32,
    pub total: u64,
    pub eligible: u64,
    pub eligible_fraction: f64,
    /// Fraction of the decade's fields per `omega`.
    pub omega_fractions: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    #[serde(rename = "X")]
    pub x: u64,
    pub total: u64,
    pub by_omega: BTreeMap<u32, u64>,
    /// Keyed by the genus number `2^(omega - 2)`.
    pub by_genus: BTreeMap<u64, u64>,
    /// Fields with `omega(Delta) <= 4`, a superset of those with a
    /// Euclidean ideal class.
    pub euclid_eligible: u64,
    pub eligible_fraction: f64,
    pub by_decade: Vec<DecadeRow>,
    /// Fields whose discriminant and genus identities were checked.
    pub identity_checks: u64,
}

impl CensusReport {
    fn from_tally(x: u64, tally: &Tally, identity_checks: u64) -> Self {
        let total = tally.total();
        let by_genus = tally.by_omega.iter().map(|(&w, &c)| (1u64 << (w - 2), c)).collect();
        let eligible = |m: &BTreeMap<u32, u64>| m.iter().filter(|(&w, _)| w <= 4).map(|(_, c)| c).sum::<u64>();
        let frac = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let euclid_eligible = eligible(&tally.by_omega);
        let by_decade = tally
            .by_decade
            .iter()
            .map(|(&k, m)| {
                let t: u64 = m.values().sum();
                DecadeRow {
                    decade: k,
                    total: t,
                    eligible: eligible(m),
                    eligible_fraction: frac(eligible(m), t),
                    omega_fractions: m.iter().map(|(&w, &c)| (w, frac(c, t))).collect(),
                }
            })
            .collect();
        Self {
            x,
            total,
            by_omega: tally.by_omega.clone(),
            by_genus,
            euclid_eligible,
            eligible_fraction: frac(euclid_eligible, total),
            by_decade,
            identity_checks,
        }
    }

    /// The count for genus number `2^n`.
    pub fn by_genus_exponent(&self, n: u32) -> u64 {
        self.by_omega.get(&(n + 2)).copied().unwrap_or(0)
    }

    pub fn csv_header(max_omega: u32) -> String {
        let mut h = String::from("X,total");
        for w in 2..=max_omega {
            h.push_str(&format!(",omega_{w}"));
        }
        h.push_str(",eligible_fraction");
        h
    }

    pub fn csv_row(&self, max_omega: u32) -> String {
        let mut r = format!("{},{}", self.x, self.total);
        for w in 2..=max_omega {
            r.push_str(&format!(",{}", self.by_omega.get(&w).copied().unwrap_or(0)));
        }
        r.push_str(&format!(",{:.6}", self.eligible_fraction));
        r
    }

    pub fn max_omega(&self) -> u32 {
        self.by_omega.keys().next_back().copied().unwrap_or(2).max(2)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CensusOptions {
    pub strategy: Strategy,
    /// Run the discriminant and genus-rank identities on enumerated fields.
    pub verify: bool,
    /// Resume file: one line `X<TAB>last m1<TAB>tally JSON`.
    pub checkpoint: Option<PathBuf>,
}

// Bounds on M = m1 m2 m3 for c = 1 and c = 4.
fn product_bounds(x: u64) -> (u64, u64) {
    (isqrt(x), isqrt(x / 16))
}

#[inline]
fn congruent(a: u64, b: u64, c: u64) -> bool {
    a % 4 == b % 4 && b % 4 == c % 4
}

// Deterministic 1% sample above FULL_CHECK_BOUND.
fn sampled(delta: u64, m: u64) -> bool {
    delta <= FULL_CHECK_BOUND || m.wrapping_mul(0x9E37_79B9_7F4A_7C15) % 100 == 0
}

fn verify_field(triple: [u64; 3], delta: u64, omega: u32) -> Result<()> {
    let k = BiquadraticField::from_triple(triple[0], triple[1], triple[2])?;
    let d = discriminant_of(&k)?;
    let g = genus_number(&k)?;
    if d != delta || k.omega() != omega || g != 1 << (omega - 2) {
        return Err(Error::InternalInconsistency(format!(
            "triple {triple:?}: census saw Delta = {delta}, omega = {omega}; field gives {d}, {}",
            k.omega()
        )));
    }
    Ok(())
}

// All fields with the given m1 and m2.
fn visit_m2(
    spf: &SpfTable,
    bounds: (u64, u64),
    m1: u64,
    m2: u64,
    mut f: impl FnMut([u64; 3], u64, u32),
) {
    let p12 = m1 * m2;
    let mut m3 = m2 + 2;
    let hi = bounds.0 / p12;
    while m3 <= hi {
        let m = p12 * m3;
        if spf.is_squarefree(m) {
            let c = if congruent(m1, m2, m3) { 1 } else { 4 };
            if c == 1 || m <= bounds.1 {
                let delta = c * c * m * m;
                f([m1, m2, m3], delta, spf.omega(m) + u32::from(c == 4));
            }
        }
        m3 += 2;
    }
}

fn m2_candidates(spf: &SpfTable, bound: u64, m1: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m2 = if m1 == 1 { 3 } else { m1 + 2 };
    // m3 > m2 and m3 odd, so m1 m2 (m2 + 2) <= bound
    while m1 * m2 * (m2 + 2) <= bound {
        if spf.is_squarefree(m1 * m2) {
            out.push(m2);
        }
        m2 += 2;
    }
    out
}

fn m1_values(spf: &SpfTable, bound: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m1 = 1;
    while m1 * (m1 + 2) * (m1 + 4) <= bound.max(1) {
        if spf.is_squarefree(m1) {
            out.push(m1);
        }
        m1 += 2;
    }
    out
}

/// Visits every field with `Delta <= x`, sequentially.
pub fn for_each_field(x: u64, mut f: impl FnMut([u64; 3], u64, u32)) {
    let bounds = product_bounds(x);
    let spf = SpfTable::new(bounds.0);
    for m1 in m1_values(&spf, bounds.0) {
        for m2 in m2_candidates(&spf, bounds.0, m1) {
            visit_m2(&spf, bounds, m1, m2, &mut f);
        }
    }
}

fn read_checkpoint(path: &Path, x: u64) -> Result<Option<(u64, Tally)>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let line = text.trim();
    if line.is_empty() {
        return Ok(None);
    }
    let mut parts = line.splitn(3, '\t');
    let bad = || Error::Checkpoint(format!("malformed checkpoint {}", path.display()));
    let cx: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let m1: u64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let tally: Tally = serde_json::from_str(parts.next().ok_or_else(bad)?).map_err(|_| bad())?;
    if cx != x {
        return Err(Error::Checkpoint(format!(
            "checkpoint {} is for X = {cx}, not {x}",
            path.display()
        )));
    }
    Ok(Some((m1, tally)))
}

fn write_checkpoint(path: &Path, x: u64, m1: u64, tally: &Tally) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        let json = serde_json::to_string(tally).map_err(|e| Error::Checkpoint(e.to_string()))?;
        writeln!(f, "{x}\t{m1}\t{json}")?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Exact census of fields with `Delta <= x`.
pub fn census(x: u64, opts: &CensusOptions) -> Result<CensusReport> {
    let bounds = product_bounds(x);
    let spf = SpfTable::new(bounds.0);
    let mut tally = Tally::default();
    let mut checks = 0u64;
    let mut resume_after = None;
    if let Some(path) = &opts.checkpoint {
        if let Some((m1, t)) = read_checkpoint(path, x)? {
            resume_after = Some(m1);
            tally = t;
        }
    }
    for m1 in m1_values(&spf, bounds.0) {
        if resume_after.is_some_and(|last| m1 <= last) {
            continue;
        }
        let m2s = m2_candidates(&spf, bounds.0, m1);
        let partial = par::map(opts.strategy, &m2s, |&m2| {
            let mut t = Tally::default();
            let mut checked = 0u64;
            let mut err = None;
            visit_m2(&spf, bounds, m1, m2, |triple, delta, omega| {
                t.add(delta, omega);
                if opts.verify && err.is_none() && sampled(delta, triple[0] ^ triple[1] << 20 ^ triple[2] << 40) {
                    checked += 1;
                    if let Err(e) = verify_field(triple, delta, omega) {
                        err = Some(e);
                    }
                }
            });
            (t, checked, err)
        });
        for (t, c, err) in partial {
            if let Some(e) = err {
                return Err(e);
            }
            tally.merge(t);
            checks += c;
        }
        if let Some(path) = &opts.checkpoint {
            write_checkpoint(path, x, m1, &tally)?;
        }
    }
    Ok(CensusReport::from_tally(x, &tally, checks))
}

/// `S(X)`, with default options.
pub fn count_s(x: u64) -> Result<CensusReport> {
    census(x, &CensusOptions::default())
}

/// Number of fields with `Delta <= x` and genus number `2^n`.
pub fn count_s_by_genus(x: u64, n: u32) -> Result<u64> {
    Ok(count_s(x)?.by_genus_exponent(n))
}

/// Independent count of `S(X)`: for each odd squarefree `M`, assign its
/// primes to three ordered slots, keep assignments that are admissible
/// triples within the bound, and divide by the 6 orderings.
pub fn count_s_ordered(x: u64) -> Result<u64> {
    let bound = isqrt(x);
    let mut ordered = 0u64;
    let mut m = 1;
    while m <= bound {
        if let Ok(f) = factor_squarefree(m as i64) {
            let primes = f.primes();
            for code in 0..3u64.pow(primes.len() as u32) {
                let mut slots = [1u64; 3];
                let mut c = code;
                for &p in primes {
                    slots[(c % 3) as usize] *= p;
                    c /= 3;
                }
                if slots.iter().filter(|&&s| s == 1).count() > 1 {
                    continue;
                }
                let cc = if congruent(slots[0], slots[1], slots[2]) { 1 } else { 4 };
                if u128::from(cc * m) * u128::from(cc * m) <= u128::from(x) {
                    ordered += 1;
                }
            }
        }
        m += 2;
    }
    if ordered % 6 != 0 {
        return Err(Error::InternalInconsistency(format!(
            "{ordered} ordered triples is not a multiple of 6"
        )));
    }
    Ok(ordered / 6)
}

/// Ordered triples `(m1, m2, m3)` with `m1 m2 m3 = M`.
pub fn ordered_factorization_check(m: u64) -> Result<u64> {
    factor_squarefree(i64::try_from(m).map_err(|_| Error::Overflow(m.to_string()))?)?;
    let divisors = |n: u64| -> Vec<u64> { (1..=n).filter(|d| n % d == 0).collect() };
    let mut count = 0;
    for m1 in divisors(m) {
        count += divisors(m / m1).len() as u64;
    }
    Ok(count)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatheSelberg {
    pub n_bound: u64,
    pub n: u32,
    pub exact: u64,
    pub main_term: f64,
    pub ratio: f64,
}

/// `#{m <= N squarefree, omega(m) = n}` against
/// `N / log N * (log log N)^(n-1) / (n-1)!`.
pub fn sathe_selberg_count(big_n: u64, n: u32, strategy: Strategy) -> SatheSelberg {
    let counts = squarefree_omega_counts(big_n, strategy);
    let exact = counts.get(n as usize).copied().unwrap_or(0);
    let main_term = sathe_selberg_main_term(big_n, n);
    SatheSelberg { n_bound: big_n, n, exact, main_term, ratio: exact as f64 / main_term }
}

pub fn sathe_selberg_main_term(big_n: u64, n: u32) -> f64 {
    let l = (big_n as f64).ln();
    let ll = l.ln();
    let fact: f64 = (1..n).map(f64::from).product();
    big_n as f64 / l * ll.powi(n as i32 - 1) / fact
}

/// One leading-coefficient candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub prime_bound: u64,
    /// `prod_{2 < p <= P} (1 - 1/p)^3 (1 + 3/p)`.
    pub truncated_product: f64,
    /// The same product including the factor `5/16` at `p = 2`.
    pub truncated_product_all: f64,
    /// `sum_{p > P} 6/p^2 < 6/P` bounds the relative truncation error.
    pub tail_bound: f64,
    pub candidates: Vec<Candidate>,
}

// log of (1 - 1/p)^3 (1 + 3/p) = log(1 - 6/p^2 + 8/p^3 - 3/p^4), compensated.
fn log_euler_product(primes: impl Iterator<Item = u64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for p in primes {
        let x = 1.0 / p as f64;
        let term = (-6.0 * x * x + 8.0 * x * x * x - 3.0 * x * x * x * x).ln_1p();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            carry += (sum - t) + term;
        } else {
            carry += (term - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Euler-product constant truncated at `P`, with the candidate leading
/// coefficients built from it.
pub fn euler_constant(prime_bound: u64) -> ConstantEstimate {
    let primes = primes_up_to(prime_bound);
    let odd = log_euler_product(primes.iter().copied().filter(|&p| p > 2)).exp();
    let all = odd * 5.0 / 16.0;
    let candidates = vec![
        Candidate { name: "7/1920*prod_all".into(), value: 7.0 / 1920.0 * all },
        Candidate { name: "7/1920*prod_odd".into(), value: 7.0 / 1920.0 * odd },
        Candidate { name: "7/768*prod_all".into(), value: 7.0 / 768.0 * all },
        Candidate { name: "7/768*prod_odd".into(), value: 7.0 / 768.0 * odd },
    ];
    ConstantEstimate {
        prime_bound,
        truncated_product: odd,
        truncated_product_all: all,
        tail_bound: 6.0 / prime_bound as f64,
        candidates,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    #[serde(rename = "X")]
    pub x: u64,
    pub total: u64,
    /// `S(X) / (sqrt X log^2 X)`.
    pub ratio: f64,
}

/// `S(X)/sqrt X = a L^2 + b L + c` with `L = log X`, through three points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub rows: Vec<CoefficientRow>,
    pub candidates: Vec<Candidate>,
    /// "increasing", "decreasing" or "flat" across the grid.
    pub trend: String,
    /// Fit through the last three grid points, when there are three.
    pub fit: Option<QuadraticFit>,
    /// Candidate closest (in ratio) to the fitted leading coefficient, or
    /// to the last raw ratio when no fit is available.
    pub nearest_candidate: String,
    /// Whether the constant with prefactor 7/1920 is nearer than the one
    /// with 7/768 (each taken in its closest product convention).
    pub favours_7_over_1920: bool,
}

fn fit3(points: &[(f64, f64)]) -> QuadraticFit {
    // Lagrange interpolation in L
    let [(l0, y0), (l1, y1), (l2, y2)] = [points[0], points[1], points[2]];
    let d0 = y0 / ((l0 - l1) * (l0 - l2));
    let d1 = y1 / ((l1 - l0) * (l1 - l2));
    let d2 = y2 / ((l2 - l0) * (l2 - l1));
    let a = d0 + d1 + d2;
    let b = -(d0 * (l1 + l2) + d1 * (l0 + l2) + d2 * (l0 + l1));
    let c = d0 * l1 * l2 + d1 * l0 * l2 + d2 * l0 * l1;
    QuadraticFit { a, b, c }
}

fn log_distance(a: f64, b: f64) -> f64 {
    (a / b).ln().abs()
}

/// Compares `S(X)/(sqrt X log^2 X)` on `grid` with the candidate constants.
pub fn coefficient_experiment(grid: &[u64], opts: &CensusOptions) -> Result<CoefficientReport> {
    let mut rows = Vec::new();
    for &x in grid {
        let r = census(x, &CensusOptions { checkpoint: None, ..opts.clone() })?;
        let xf = x as f64;
        rows.push(CoefficientRow { x, total: r.total, ratio: r.total as f64 / (xf.sqrt() * xf.ln().powi(2)) });
    }
    let candidates = euler_constant(1_000_000).candidates;
    let trend = match rows.as_slice() {
        [first, .., last] if last.ratio > first.ratio * (1.0 + 1e-9) => "increasing",
        [first, .., last] if last.ratio < first.ratio * (1.0 - 1e-9) => "decreasing",
        _ => "flat",
    }
    .to_string();
    let fit = (rows.len() >= 3).then(|| {
        let pts: Vec<(f64, f64)> = rows[rows.len() - 3..]
            .iter()
            .map(|r| {
                let xf = r.x as f64;
                (xf.ln(), r.total as f64 / xf.sqrt())
            })
            .collect();
        fit3(&pts)
    });
    let target = fit.as_ref().map(|f| f.a).or(rows.last().map(|r| r.ratio)).unwrap_or(0.0);
    let nearest = candidates
        .iter()
        .min_by(|p, q| log_distance(p.value, target).total_cmp(&log_distance(q.value, target)))
        .map(|c| c.name.clone())
        .unwrap_or_default();
    let best = |prefix: &str| {
        candidates
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .map(|c| log_distance(c.value, target))
            .fold(f64::INFINITY, f64::min)
    };
    let favours_7_over_1920 = best("7/1920") < best("7/768");
    Ok(CoefficientReport { rows, candidates, trend, fit, nearest_candidate: nearest, favours_7_over_1920 })
}

/// Eligible fractions per decade up to `x`.
pub fn density_report(x: u64, opts: &CensusOptions) -> Result<CensusReport> {
    census(x, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictCensus {
    pub bound: u64,
    pub fields: u64,
    pub by_status: BTreeMap<Status, u64>,
    /// Fields whose verdict contradicts a genus-theoretic bound.
    pub violations: Vec<String>,
    pub verdicts: Vec<([u64; 3], Verdict)>,
}

/// Full verdicts, with `h_K`, for every field with `Delta <= bound`.
pub fn verdict_census(bound: u64, cache: &ClassNumberCache, strategy: Strategy) -> Result<VerdictCensus> {
    let mut triples = Vec::new();
    for_each_field(bound, |t, _, _| triples.push(t));
    triples.sort_unstable();
    let results = par::map(strategy, &triples, |t| {
        BiquadraticField::from_triple(t[0], t[1], t[2]).and_then(|k| euclidean_verdict(&k, cache))
    });
    let mut by_status = BTreeMap::new();
    let mut violations = Vec::new();
    let mut verdicts = Vec::new();
    for (t, r) in triples.iter().zip(results) {
        let v = match r {
            Ok(v) => v,
            Err(e) if e.is_internal() => {
                violations.push(format!("{t:?}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        if v.status == Status::Exists && (v.omega > 4 || v.h_k.is_some_and(|h| h > 2)) {
            violations.push(format!("{t:?}: Exists with omega {} and h_K {:?}", v.omega, v.h_k));
        }
        if v.omega > 4 && v.status != Status::NoNonCyclic {
            violations.push(format!("{t:?}: omega {} but {:?}", v.omega, v.status));
        }
        *by_status.entry(v.status).or_default() += 1;
        verdicts.push((*t, v));
    }
    Ok(VerdictCensus { bound, fields: triples.len() as u64, by_status, violations, verdicts })
}
