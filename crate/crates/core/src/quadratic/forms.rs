//! Brute-force class numbers from binary quadratic forms.
//!
//! Kept independent of the analytic formula: no characters, logarithms or
//! units are involved.

use std::collections::HashMap;

use super::is_fundamental;
use crate::arith::isqrt;
use crate::error::{Error, Result};

pub const DEFAULT_ORACLE_BOUND: u64 = 1_000_000;

type Form = (i64, i64, i64);

/// Class number by counting reduced forms (`d < 0`) or orbits of cycles of
/// reduced indefinite forms under `(a, b, c) -> (-a, b, -c)` (`d > 0`).
pub fn class_number_forms(d: i64, bound: u64) -> Result<u64> {
    check(d, bound)?;
    if d < 0 {
        Ok(count_definite(d))
    } else {
        let cycles = indefinite_cycles(d);
        Ok(wide_class_count(&cycles))
    }
}

/// Narrow class number `h+` of a real quadratic field.
pub fn narrow_class_number_forms(d: i64, bound: u64) -> Result<u64> {
    check(d, bound)?;
    if d < 0 {
        return Ok(count_definite(d));
    }
    Ok(indefinite_cycles(d).cycle_count as u64)
}

fn check(d: i64, bound: u64) -> Result<()> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    if d.unsigned_abs() > bound {
        return Err(Error::OracleBoundExceeded {
            discriminant: d,
            bound,
        });
    }
    Ok(())
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    num_integer::gcd(num_integer::gcd(a, b), c)
}

// Reduced primitive positive definite forms: |b| <= a <= c, b >= 0 if |b| = a or a = c.
fn count_definite(d: i64) -> u64 {
    let n = -d;
    let mut count = 0;
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if gcd3(a, b, c) == 1 {
                count += 1;
            }
        }
        a += 1;
    }
    count
}

struct Cycles {
    // cycle index of every reduced form
    index: HashMap<Form, usize>,
    cycle_count: usize,
}

fn sqrt_floor(d: i64) -> i64 {
    isqrt(d as u64) as i64
}

// (a, b, c) with b^2 - 4ac = d is reduced iff 0 < b < sqrt d and
// sqrt d - b < 2|a| < sqrt d + b.
fn is_reduced(d: i64, a: i64, b: i64) -> bool {
    let s = sqrt_floor(d);
    if b <= 0 || b > s {
        return false;
    }
    let two_a = 2 * a.abs();
    let lower = two_a + b; // > sqrt d
    let upper_ok = two_a <= b || (two_a - b) * (two_a - b) < d; // 2|a| - b < sqrt d
    lower * lower > d && upper_ok
}

fn reduced_forms(d: i64) -> Vec<Form> {
    let s = sqrt_floor(d);
    let mut out = Vec::new();
    let mut b = if d % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let n = (d - b * b) / 4;
        let mut a = 1;
        while a * a <= n {
            if n % a == 0 {
                for aa in [a, n / a] {
                    for sign in [1, -1] {
                        let form = (sign * aa, b, -sign * (n / aa));
                        if is_reduced(d, form.0, b) && gcd3(form.0, form.1, form.2) == 1 {
                            out.push(form);
                        }
                    }
                    if a * a == n {
                        break;
                    }
                }
            }
            a += 1;
        }
        b += 2;
    }
    out.sort_unstable();
    out.dedup();
    out
}

// rho(a, b, c) = (c, b', *) with b' ≡ -b (mod 2|c|), sqrt d - 2|c| < b' < sqrt d.
fn rho(d: i64, form: Form) -> Form {
    let (_, b, c) = form;
    let s = sqrt_floor(d);
    let m = 2 * c.abs();
    let r = (-b).rem_euclid(m);
    let b2 = r + (s - r).div_euclid(m) * m;
    (c, b2, (b2 * b2 - d) / (4 * c))
}

fn indefinite_cycles(d: i64) -> Cycles {
    let forms = reduced_forms(d);
    let mut index = HashMap::with_capacity(forms.len());
    let mut cycle_count = 0;
    for &start in &forms {
        if index.contains_key(&start) {
            continue;
        }
        let mut f = start;
        loop {
            index.insert(f, cycle_count);
            f = rho(d, f);
            debug_assert!(is_reduced(d, f.0, f.1), "rho left the reduced set at {f:?}");
            if f == start {
                break;
            }
        }
        cycle_count += 1;
    }
    Cycles { index, cycle_count }
}

fn wide_class_count(cycles: &Cycles) -> u64 {
    let mut partner = vec![usize::MAX; cycles.cycle_count];
    for (&(a, b, c), &i) in &cycles.index {
        partner[i] = cycles.index[&(-a, b, -c)];
    }
    let fixed = partner.iter().enumerate().filter(|&(i, &j)| i == j).count();
    let paired = cycles.cycle_count - fixed;
    (fixed + paired / 2) as u64
}
