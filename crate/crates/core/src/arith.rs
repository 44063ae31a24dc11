//! Exact integer kernel: primality, squarefree factorization, quadratic
//! symbols and a prime sieve.
//!
//! Everything here works on machine integers. Inputs beyond 64 bits are out
//! of scope; the census never produces them.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial-division limit for [`factorize`]; cofactors above it go to Pollard rho.
const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// A squarefree positive integer together with its sorted prime divisors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactoredSquarefree {
    value: u64,
    primes: Vec<u64>,
}

impl FactoredSquarefree {
    /// Builds the value from a strictly increasing list of primes.
    ///
    /// The caller vouches for primality; ordering and distinctness are checked.
    pub fn from_primes(primes: Vec<u64>) -> Result<Self> {
        let mut value: u64 = 1;
        for w in primes.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::NotSquarefree(
                    primes.iter().product::<u64>() as i64,
                ));
            }
        }
        for &p in &primes {
            value = value
                .checked_mul(p)
                .ok_or_else(|| Error::Overflow(format!("product of {primes:?}")))?;
        }
        Ok(Self { value, primes })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> u32 {
        self.primes.len() as u32
    }

    /// Möbius function; never zero since the value is squarefree.
    pub fn mobius(&self) -> i8 {
        if self.primes.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Factors a squarefree positive integer.
///
/// `1` is accepted and has no prime factors.
pub fn factor_squarefree(n: i64) -> Result<FactoredSquarefree> {
    if n < 1 {
        return Err(Error::NonPositive(n));
    }
    let factors = factorize(n as u64);
    if factors.iter().any(|&(_, e)| e > 1) {
        return Err(Error::NotSquarefree(n));
    }
    Ok(FactoredSquarefree {
        value: n as u64,
        primes: factors.into_iter().map(|(p, _)| p).collect(),
    })
}

/// Full factorization `n = prod p^e`, primes ascending. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    for &p in small_primes() {
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        if n < TRIAL_DIVISION_LIMIT * TRIAL_DIVISION_LIMIT || is_prime(n) {
            out.push((n, 1));
        } else {
            let mut big = Vec::new();
            split_large(n, &mut big);
            big.sort_unstable();
            for p in big {
                match out.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => out.push((p, 1)),
                }
            }
        }
    }
    out
}

fn split_large(n: u64, acc: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        acc.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, acc);
    split_large(n / d, acc);
}

fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| primes_up_to(TRIAL_DIVISION_LIMIT))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Brent's variant. `n` must be an odd composite.
fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 0u64;
        const BLOCK: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BLOCK.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = num_integer::gcd(q, n);
                k += BLOCK;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = num_integer::gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Kronecker symbol `(d / n)` for `n >= 1`.
pub fn kronecker_symbol(d: i64, n: u64) -> i8 {
    debug_assert!(n >= 1);
    let mut n = n;
    let mut sign = 1i8;
    let twos = n.trailing_zeros();
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        let r = d.rem_euclid(8);
        if twos % 2 == 1 && (r == 3 || r == 5) {
            sign = -sign;
        }
        n >>= twos;
    }
    let a = (d as i128).rem_euclid(n as i128) as u64;
    sign * jacobi(a, n)
}

// Jacobi symbol for odd n.
fn jacobi(mut a: u64, mut n: u64) -> i8 {
    let mut t = 1i8;
    a %= n;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// The non-principal character modulo 4.
pub fn chi4(n: i64) -> i8 {
    match n.rem_euclid(4) {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// Integer square root, `floor(sqrt(n))`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

pub fn isqrt_u128(n: u128) -> u128 {
    let mut r = (n as f64).sqrt() as u128;
    while r.checked_mul(r).is_none_or(|s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= n) {
        r += 1;
    }
    r
}

/// Returns the root when `n` is a perfect square.
pub fn is_perfect_square(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Sieve of Eratosthenes. Empty for `limit < 2`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n)
        .filter(|&k| !composite[k])
        .map(|k| k as u64)
        .collect()
}

/// Whether `|n|` is squarefree (0 is not).
pub fn is_squarefree(n: i64) -> bool {
    n != 0 && factorize(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn factor_examples() {
        let one = factor_squarefree(1).unwrap();
        assert_eq!(one.value(), 1);
        assert!(one.primes().is_empty());
        assert_eq!(one.omega(), 0);
        assert_eq!(factor_squarefree(1045).unwrap().primes(), &[5, 11, 19]);
        assert_eq!(factor_squarefree(12), Err(Error::NotSquarefree(12)));
        assert_eq!(factor_squarefree(0), Err(Error::NonPositive(0)));
        assert_eq!(factor_squarefree(-3), Err(Error::NonPositive(-3)));
    }

    #[test]
    fn factor_large_semiprimes() {
        // products of primes above the trial-division table
        let p = 1_000_003u64;
        let q = 998_244_353u64;
        assert_eq!(factorize(p * q), vec![(p, 1), (q, 1)]);
        let r = 4_294_967_291u64;
        assert_eq!(factorize(r * 3 * 3), vec![(3, 2), (r, 1)]);
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_215_031_751));
    }

    fn residue_symbol(d: i64, p: u64) -> i8 {
        let a = d.rem_euclid(p as i64) as u64;
        if a == 0 {
            return 0;
        }
        if (1..p).any(|x| x * x % p == a) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(residue_symbol(5, 11), 1);
        assert_eq!(kronecker_symbol(5, 11), 1);
        for d in [-7, 0, 3, 12, 1045] {
            assert_eq!(kronecker_symbol(d, 1), 1);
        }
        // -23 ≡ 1 (mod 8)
        assert_eq!((-23i64).rem_euclid(8), 1);
        assert_eq!(kronecker_symbol(-23, 2), 1);
        assert_eq!(kronecker_symbol(5, 2), -1);
        assert_eq!(kronecker_symbol(12, 2), 0);
    }

    #[test]
    fn kronecker_matches_residues_at_odd_primes() {
        for &p in primes_up_to(200).iter().skip(1) {
            for d in -150..150 {
                assert_eq!(kronecker_symbol(d, p), residue_symbol(d, p), "({d}/{p})");
            }
        }
    }

    #[test]
    fn kronecker_totally_multiplicative() {
        let fundamental: Vec<i64> = (-100..=100)
            .filter(|&d| crate::quadratic::is_fundamental(d))
            .collect();
        assert!(fundamental.len() > 50);
        for &d in &fundamental {
            let row: Vec<i8> = (0..=500).map(|n| if n == 0 { 0 } else { kronecker_symbol(d, n) }).collect();
            for m in 1..=500u64 {
                for n in 1..=500u64 {
                    let mn = m * n;
                    let lhs = kronecker_symbol(d, mn);
                    assert_eq!(lhs, row[m as usize] * row[n as usize], "d={d} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn chi4_examples() {
        assert_eq!(chi4(3), -1);
        assert_eq!(chi4(6), 0);
        assert_eq!(chi4(-7), 1);
        for n in -10_000..=10_000i64 {
            let expected = if n == 0 { 0 } else { kronecker_symbol(-4, n.unsigned_abs()) * if n < 0 { -1 } else { 1 } };
            assert_eq!(chi4(n), expected, "n = {n}");
        }
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(is_perfect_square(0), Some(0));
        assert_eq!(65 * 65, 4225);
        assert_eq!(is_perfect_square(4225), Some(65));
        assert_eq!(32 * 32, 1024);
        assert_eq!(33 * 33, 1089);
        assert_eq!(is_perfect_square(1046), None);
        assert_eq!(is_perfect_square(u64::MAX), None);
        assert_eq!(isqrt(u64::MAX), u32::MAX as u64);
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(primes_up_to(10), vec![2, 3, 5, 7]);
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
        let trial: Vec<u64> = (2..2000u64)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect();
        assert_eq!(primes_up_to(1999), trial);
    }

    #[test]
    fn mobius_matches_parity_below_a_million() {
        // smallest-prime-factor table as an independent factorization route
        let n = 1_000_000usize;
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
        for v in (1..=n).step_by(7) {
            let mut x = v;
            let mut primes = Vec::new();
            let mut squarefree = true;
            while x > 1 {
                let p = spf[x] as usize;
                x /= p;
                if x % p == 0 {
                    squarefree = false;
                    break;
                }
                primes.push(p as u64);
            }
            match factor_squarefree(v as i64) {
                Ok(f) => {
                    assert!(squarefree);
                    assert_eq!(f.primes(), &primes[..]);
                    assert_eq!(f.primes().iter().product::<u64>(), v as u64);
                    let parity = if f.omega() % 2 == 0 { 1 } else { -1 };
                    assert_eq!(f.mobius(), parity);
                }
                Err(e) => {
                    assert!(!squarefree);
                    assert_eq!(e, Error::NotSquarefree(v as i64));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn factorize_reconstructs(n in 1u64..u64::MAX / 4) {
            let f = factorize(n);
            let back: u128 = f.iter().map(|&(p, e)| (p as u128).pow(e)).product();
            prop_assert_eq!(back, n as u128);
            for (p, _) in f {
                prop_assert!(is_prime(p));
            }
        }

        #[test]
        fn squarefree_round_trip(primes in proptest::sample::subsequence(primes_up_to(400), 0..6)) {
            let f = FactoredSquarefree::from_primes(primes.clone()).unwrap();
            let g = factor_squarefree(f.value() as i64).unwrap();
            prop_assert_eq!(g, f);
        }
    }
}
