//! Analytic class numbers.
//!
//! Imaginary fields use the exact finite character sum. Real fields use
//! `h = -sum_{a<D} chi(a) log sin(pi a / D) / (2 log eps)`; the float result
//! is accepted only when it sits within [`TOLERANCE`] of an integer.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};

use super::{fundamental_unit, is_fundamental};
use crate::arith::kronecker_symbol;
use crate::error::{Error, Result};

/// Maximum distance from the nearest integer for a certified real class number.
pub const TOLERANCE: f64 = 1e-4;

/// Working precision of the first escalation step.
pub const DEFAULT_PRECISION_BITS: usize = 256;

/// Class number of the quadratic field of fundamental discriminant `d`.
///
/// Real discriminants are evaluated in double precision and may return
/// [`Error::PrecisionFailure`]; see [`class_number_precise`].
pub fn class_number(d: i64) -> Result<u64> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    if d < 0 {
        imaginary(d)
    } else {
        real_f64(d, TOLERANCE)
    }
}

fn imaginary(d: i64) -> Result<u64> {
    let n = d.unsigned_abs();
    let w: u64 = match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let sum: i128 = (1..n)
        .map(|a| i128::from(kronecker_symbol(d, a)) * a as i128)
        .sum();
    let num = w as u128 * sum.unsigned_abs();
    let den = 2 * n as u128;
    if num % den != 0 || num == 0 {
        return Err(Error::InternalInconsistency(format!(
            "character sum for D = {d} gives non-integral class number {num}/{den}"
        )));
    }
    Ok((num / den) as u64)
}

// Neumaier-compensated sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn certify(d: i64, estimate: f64, tolerance: f64, bits: usize) -> Result<u64> {
    let h = estimate.round();
    let residual = (estimate - h).abs();
    if residual.is_nan() || residual >= tolerance || h < 1.0 {
        return Err(Error::PrecisionFailure {
            discriminant: d,
            residual,
            bits,
        });
    }
    Ok(h as u64)
}

pub(super) fn real_f64(d: i64, tolerance: f64) -> Result<u64> {
    let unit = fundamental_unit(d)?;
    let n = d as u64;
    // chi is even for d > 0, so the sum over a < d/2 is half the full sum
    let mut acc = CompensatedSum::default();
    for a in 1..=(n - 1) / 2 {
        let chi = kronecker_symbol(d, a);
        if chi == 0 {
            continue;
        }
        let s = (std::f64::consts::PI * a as f64 / n as f64).sin().ln();
        acc.add(f64::from(chi) * s);
    }
    let estimate = -acc.value() / unit.ln();
    certify(d, estimate, tolerance, f64::MANTISSA_DIGITS as usize)
}

/// Real class number evaluated at `bits` of working precision.
///
/// Imaginary discriminants are exact already and are passed through.
pub fn class_number_precise(d: i64, bits: usize) -> Result<u64> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    if d < 0 {
        return imaginary(d);
    }
    let unit = fundamental_unit(d)?;
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().map_err(|e| Error::Io(format!("{e:?}")))?;
    let p = bits;
    let pi = cc.pi(p, rm);
    let dn = BigFloat::from_u64(d as u64, p);
    let mut acc = BigFloat::from_u64(0, p);
    for a in 1..=(d as u64 - 1) / 2 {
        let chi = kronecker_symbol(d, a);
        if chi == 0 {
            continue;
        }
        let x = pi.mul(&BigFloat::from_u64(a, p), p, rm).div(&dn, p, rm);
        let term = x.sin(p, rm, &mut cc).ln(p, rm, &mut cc);
        acc = if chi > 0 {
            acc.add(&term, p, rm)
        } else {
            acc.sub(&term, p, rm)
        };
    }
    // log eps = log((x + y sqrt m)/scale)
    let ux = BigFloat::parse(&unit.x.to_str_radix(10), Radix::Dec, p, rm, &mut cc);
    let uy = BigFloat::parse(&unit.y.to_str_radix(10), Radix::Dec, p, rm, &mut cc);
    let root = BigFloat::from_u64(unit.radicand as u64, p).sqrt(p, rm);
    let eps = ux
        .add(&uy.mul(&root, p, rm), p, rm)
        .div(&BigFloat::from_u64(u64::from(unit.scale), p), p, rm);
    let estimate = acc.neg().div(&eps.ln(p, rm, &mut cc), p, rm);
    let estimate: f64 = estimate
        .to_string()
        .parse()
        .map_err(|_| Error::InternalInconsistency(format!("unparseable estimate for D = {d}")))?;
    certify(d, estimate, TOLERANCE, bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(class_number(-23), Ok(3));
        assert_eq!(class_number(5), Ok(1));
        assert_eq!(class_number(1045), Ok(4));
        assert_eq!(class_number(-4), Ok(1));
        assert_eq!(class_number(-3), Ok(1));
        assert_eq!(class_number(-20), Ok(2));
        assert_eq!(class_number(40), Ok(2));
        assert_eq!(class_number(4 * 79), Ok(3));
        assert_eq!(class_number(229), Ok(3));
        assert_eq!(class_number(20), Err(Error::NotFundamental(20)));
    }

    #[test]
    fn tight_tolerance_reports_precision_failure() {
        match real_f64(1045, 0.0) {
            Err(Error::PrecisionFailure { discriminant, bits, .. }) => {
                assert_eq!(discriminant, 1045);
                assert_eq!(bits, 53);
            }
            other => panic!("expected PrecisionFailure, got {other:?}"),
        }
    }

    #[test]
    fn precise_path_agrees() {
        for d in [5i64, 8, 12, 40, 229, 1045, 4 * 79, 2849] {
            assert_eq!(class_number_precise(d, 128), class_number(d), "D = {d}");
        }
        assert_eq!(class_number_precise(-23, 128), Ok(3));
    }
}
