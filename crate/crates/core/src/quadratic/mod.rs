//! Quadratic fields: discriminants, genus fields, the abelian Hilbert class
//! field candidate, fundamental units and class numbers.

mod cache;
mod class_number;
mod forms;
mod unit;

use std::sync::OnceLock;

pub use cache::{ClassNumberCache, Method};
pub use class_number::{class_number, class_number_precise, DEFAULT_PRECISION_BITS, TOLERANCE};
pub use forms::{class_number_forms, narrow_class_number_forms, DEFAULT_ORACLE_BOUND};
pub use unit::{fundamental_unit, FundamentalUnit};

use crate::arith::{factor_squarefree, is_squarefree};
use crate::error::{Error, Result};

fn check_radicand(m: i64) -> Result<()> {
    if m == 0 || m == 1 {
        return Err(Error::DegenerateRadicand(m));
    }
    if !is_squarefree(m) {
        return Err(Error::NotSquarefree(m));
    }
    Ok(())
}

/// Fundamental discriminant of `Q(sqrt m)`.
pub fn discriminant(m: i64) -> Result<i64> {
    check_radicand(m)?;
    if m.rem_euclid(4) == 1 {
        Ok(m)
    } else {
        m.checked_mul(4)
            .ok_or_else(|| Error::Overflow(format!("4 * {m}")))
    }
}

/// Whether `d` is the discriminant of a quadratic field.
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        }
        _ => false,
    }
}

/// Squarefree radicand `m` with `Q(sqrt m)` of discriminant `d`.
pub fn radicand_of(d: i64) -> Result<i64> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    Ok(if d.rem_euclid(4) == 1 { d } else { d / 4 })
}

/// `p* = (-1)^((p-1)/2) p` for an odd prime.
pub fn prime_star(p: u64) -> i64 {
    if p % 4 == 1 {
        p as i64
    } else {
        -(p as i64)
    }
}

/// Radicands generating the genus field of `Q(sqrt m)`, ascending.
///
/// The 2-part: `2` when `m ≡ 2 (mod 8)`, `-2` when `m ≡ 6 (mod 8)`, and
/// `-1` (the square class of `-4`) when `m ≡ 3 (mod 4)`.
pub fn genus_generators(m: i64) -> Result<Vec<i64>> {
    check_radicand(m)?;
    let odd = factor_squarefree((m.unsigned_abs() >> (m.unsigned_abs() % 2 == 0) as u32) as i64)?;
    let mut gens: Vec<i64> = odd.primes().iter().map(|&p| prime_star(p)).collect();
    match m.rem_euclid(8) {
        2 => gens.push(2),
        6 => gens.push(-2),
        3 | 7 => gens.push(-1),
        _ => {}
    }
    gens.sort_unstable();
    Ok(gens)
}

/// Radicands of the multiquadratic field that equals the Hilbert class field
/// of the real quadratic field `Q(sqrt d)` whenever the latter is abelian
/// over Q.
pub fn hilbert_radicands_if_abelian(d: i64) -> Result<Vec<i64>> {
    if d <= 1 {
        return Err(Error::DegenerateRadicand(d));
    }
    check_radicand(d)?;
    let even = d % 2 == 0;
    let odd = factor_squarefree(if even { d / 2 } else { d })?;
    let (ones, threes): (Vec<u64>, Vec<u64>) = odd.primes().iter().partition(|&&p| p % 4 == 1);
    let mut gens: Vec<i64> = ones.iter().map(|&p| p as i64).collect();
    let paired = |gens: &mut Vec<i64>| {
        if let Some((&first, rest)) = threes.split_first() {
            gens.extend(rest.iter().map(|&p| (first * p) as i64));
        }
    };
    match d.rem_euclid(8) {
        1 | 5 => paired(&mut gens),
        3 | 7 => gens.extend(threes.iter().map(|&p| p as i64)),
        6 => gens.extend(threes.iter().map(|&p| 2 * p as i64)),
        2 => {
            paired(&mut gens);
            gens.push(2);
        }
        _ => unreachable!("squarefree d is not divisible by 4"),
    }
    Ok(gens)
}

/// A quadratic field with its invariants computed on demand.
#[derive(Debug)]
pub struct QuadraticFieldData {
    radicand: i64,
    discriminant: i64,
    class_number: OnceLock<u64>,
    unit: OnceLock<FundamentalUnit>,
}

impl QuadraticFieldData {
    pub fn new(m: i64) -> Result<Self> {
        let discriminant = discriminant(m)?;
        Ok(Self {
            radicand: m,
            discriminant,
            class_number: OnceLock::new(),
            unit: OnceLock::new(),
        })
    }

    pub fn radicand(&self) -> i64 {
        self.radicand
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn class_number(&self) -> Result<u64> {
        if let Some(&h) = self.class_number.get() {
            return Ok(h);
        }
        let h = match class_number(self.discriminant) {
            Err(Error::PrecisionFailure { .. }) => {
                class_number_precise(self.discriminant, DEFAULT_PRECISION_BITS)?
            }
            other => other?,
        };
        Ok(*self.class_number.get_or_init(|| h))
    }

    /// Fundamental unit; `None` for imaginary fields.
    pub fn unit(&self) -> Option<&FundamentalUnit> {
        if self.discriminant < 0 {
            return None;
        }
        Some(self.unit.get_or_init(|| {
            fundamental_unit(self.discriminant).expect("discriminant validated in new()")
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(v: &[i64]) -> BTreeSet<i64> {
        v.iter().copied().collect()
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(discriminant(5), Ok(5));
        assert_eq!(discriminant(15), Ok(60));
        assert_eq!(discriminant(-1), Ok(-4));
        assert_eq!(discriminant(-3), Ok(-3));
        assert_eq!(discriminant(2), Ok(8));
        assert_eq!(discriminant(1), Err(Error::DegenerateRadicand(1)));
        assert_eq!(discriminant(0), Err(Error::DegenerateRadicand(0)));
        assert_eq!(discriminant(18), Err(Error::NotSquarefree(18)));
    }

    #[test]
    fn discriminant_invariants() {
        for m in -2000i64..2000 {
            let Ok(d) = discriminant(m) else { continue };
            assert!(matches!(d.rem_euclid(4), 0 | 1));
            assert!(is_fundamental(d), "{d}");
            assert_eq!(radicand_of(d), Ok(m));
        }
        assert!(!is_fundamental(1));
        assert!(!is_fundamental(4 * 5));
        assert!(!is_fundamental(12 * 4));
        assert_eq!(radicand_of(20), Err(Error::NotFundamental(20)));
    }

    #[test]
    fn genus_generator_examples() {
        assert_eq!(set(&genus_generators(21).unwrap()), set(&[-3, -7]));
        assert_eq!(set(&genus_generators(10).unwrap()), set(&[2, 5]));
        assert_eq!(set(&genus_generators(-5).unwrap()), set(&[-1, 5]));
        assert_eq!(set(&genus_generators(-1).unwrap()), set(&[-1]));
        assert_eq!(set(&genus_generators(-2).unwrap()), set(&[-2]));
        assert_eq!(set(&genus_generators(-6).unwrap()), set(&[-3, 2]));
        assert_eq!(set(&genus_generators(3).unwrap()), set(&[-3, -1]));
        assert_eq!(genus_generators(1), Err(Error::DegenerateRadicand(1)));
    }

    #[test]
    fn genus_generators_multiply_to_discriminant() {
        // product of p* (with 2* read as -4, 8, -8) recovers D
        for m in -3000i64..3000 {
            let Ok(d) = discriminant(m) else { continue };
            let prod: i64 = genus_generators(m)
                .unwrap()
                .iter()
                .map(|&g| match g {
                    -1 => -4,
                    2 => 8,
                    -2 => -8,
                    g => g,
                })
                .product();
            assert_eq!(prod, d, "m = {m}");
        }
    }

    #[test]
    fn odd_genus_rank_is_omega_of_discriminant() {
        use crate::multiquadratic::MultiquadraticField;
        for m in (-2001i64..2001).step_by(2) {
            let Ok(d) = discriminant(m) else { continue };
            let g = MultiquadraticField::new(genus_generators(m).unwrap()).unwrap();
            let omega = crate::arith::factorize(d.unsigned_abs()).len() as u32;
            assert_eq!(g.rank(), omega, "m = {m}");
            assert_eq!(g.degree(), 1u64 << omega);
        }
    }

    #[test]
    fn hilbert_candidate_examples() {
        assert_eq!(set(&hilbert_radicands_if_abelian(21).unwrap()), set(&[21]));
        assert_eq!(set(&hilbert_radicands_if_abelian(5).unwrap()), set(&[5]));
        assert_eq!(set(&hilbert_radicands_if_abelian(10).unwrap()), set(&[5, 2]));
        assert_eq!(set(&hilbert_radicands_if_abelian(15).unwrap()), set(&[3, 5]));
        assert_eq!(set(&hilbert_radicands_if_abelian(6).unwrap()), set(&[6]));
        assert_eq!(set(&hilbert_radicands_if_abelian(2).unwrap()), set(&[2]));
        assert_eq!(
            hilbert_radicands_if_abelian(1),
            Err(Error::DegenerateRadicand(1))
        );
    }

    #[test]
    fn hilbert_candidate_is_inside_the_hilbert_class_field() {
        // The candidate field is totally real and unramified over Q(sqrt d),
        // so its relative degree divides h(d); equality is exactly the
        // abelian case. Class numbers come from the forms oracle.
        use crate::multiquadratic::MultiquadraticField;
        let mut abelian = 0;
        for d in 2i64..=500 {
            let Ok(disc) = discriminant(d) else { continue };
            let cand = MultiquadraticField::new(hilbert_radicands_if_abelian(d).unwrap()).unwrap();
            assert!(cand.contains(d), "candidate must contain Q(sqrt {d})");
            let relative = cand.degree() / 2;
            let h = class_number_forms(disc, DEFAULT_ORACLE_BOUND).unwrap();
            assert_eq!(h % relative, 0, "d = {d}: [C:K] = {relative}, h = {h}");
            if h == relative {
                abelian += 1;
            }
        }
        assert!(abelian > 250);
    }

    #[test]
    fn field_data_is_lazy_and_consistent() {
        let k = QuadraticFieldData::new(1045).unwrap();
        assert_eq!(k.discriminant(), 1045);
        assert_eq!(k.class_number(), Ok(4));
        assert_eq!(k.class_number(), Ok(4));
        assert!(k.unit().is_some());
        let i = QuadraticFieldData::new(-23).unwrap();
        assert!(i.unit().is_none());
        assert_eq!(i.class_number(), Ok(3));
    }
}
