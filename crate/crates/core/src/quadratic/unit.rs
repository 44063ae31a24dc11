use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{is_fundamental, radicand_of};
use crate::arith::isqrt;
use crate::error::{Error, Result};

/// The fundamental unit `(x + y sqrt m) / scale` of a real quadratic field,
/// `m` its squarefree radicand.
///
/// `scale` is 2 only when `m ≡ 1 (mod 4)` and both coordinates are odd.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalUnit {
    pub radicand: i64,
    pub x: BigUint,
    pub y: BigUint,
    pub scale: u8,
    pub norm: i8,
}

impl FundamentalUnit {
    /// `x^2 - m y^2 == norm * scale^2`, checked exactly.
    pub fn satisfies_norm_equation(&self) -> bool {
        let x = BigInt::from(self.x.clone());
        let y = BigInt::from(self.y.clone());
        let lhs = &x * &x - BigInt::from(self.radicand) * &y * &y;
        let s = i64::from(self.scale);
        lhs == BigInt::from(i64::from(self.norm) * s * s)
    }

    /// Regulator `log(eps)` in double precision.
    pub fn ln(&self) -> f64 {
        let lx = ln_biguint(&self.x);
        let ly = ln_biguint(&self.y) + 0.5 * (self.radicand as f64).ln();
        let (hi, lo) = if lx >= ly { (lx, ly) } else { (ly, lx) };
        hi + (lo - hi).exp().ln_1p() - f64::from(self.scale).ln()
    }

    /// Trace of the unit, an integer.
    pub fn trace(&self) -> BigUint {
        if self.scale == 2 {
            self.x.clone()
        } else {
            &self.x * 2u32
        }
    }
}

/// Natural log of a big integer; `-inf` for zero.
pub(crate) fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Fundamental unit of the real quadratic field of discriminant `d`.
///
/// Runs the continued fraction of `w = (b + sqrt d) / 2`, `b = d mod 2`, and
/// stops at the first complete quotient whose denominator returns to 2.
/// The preceding convergent `p/q` gives `t + u sqrt d = 2(p - q w') `, with
/// `t^2 - d u^2 = ±4`.
pub fn fundamental_unit(d: i64) -> Result<FundamentalUnit> {
    if d <= 0 || !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    let m = radicand_of(d)?;
    let s = isqrt(d as u64) as i64;
    let b = d.rem_euclid(2);

    let (mut p_prev, mut p) = (BigUint::zero(), BigUint::one());
    let (mut q_prev, mut q) = (BigUint::one(), BigUint::zero());
    let (mut big_p, mut big_q) = (b, 2i64);
    loop {
        let a = (big_p + s) / big_q;
        let ab = BigUint::from(a as u64);
        let p_next = &ab * &p + &p_prev;
        let q_next = &ab * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        big_p = a * big_q - big_p;
        big_q = (d - big_p * big_p) / big_q;
        if big_q == 2 {
            break;
        }
    }

    // t = 2p - b q, u = q
    let t = BigInt::from(&p * 2u32) - BigInt::from(&q * (b as u32));
    let u = BigInt::from(q);
    let lhs = &t * &t - BigInt::from(d) * &u * &u;
    let norm: i8 = if lhs == BigInt::from(4) {
        1
    } else if lhs == BigInt::from(-4) {
        -1
    } else {
        return Err(Error::InternalInconsistency(format!(
            "continued fraction for D = {d} ended on a non-unit (t^2 - D u^2 = {lhs})"
        )));
    };
    let t = t.to_biguint().expect("t > 0");
    let u = u.to_biguint().expect("u > 0");

    let unit = if d == m {
        if t.bit(0) {
            FundamentalUnit { radicand: m, x: t, y: u, scale: 2, norm }
        } else {
            FundamentalUnit { radicand: m, x: t >> 1, y: u >> 1, scale: 1, norm }
        }
    } else {
        // d = 4m: (t + 2u sqrt m)/2
        FundamentalUnit { radicand: m, x: t >> 1, y: u, scale: 1, norm }
    };
    debug_assert!(unit.satisfies_norm_equation());
    Ok(unit)
}
