//! Euclidean-ideal verdicts for odd real biquadratic fields.
//!
//! A Euclidean ideal class forces a cyclic class group. When the Hilbert
//! class field is abelian over Q it equals `L`, so `Cl_K` is elementary
//! 2-abelian and cyclic only for `h_K <= 2`; in that case a Euclidean class
//! exists. Fields whose Hilbert class field is not abelian are left open.

use serde::Serialize;

use crate::biquadratic::{genus_field, real_genus_degree, BiquadraticField};
use crate::brauer::class_number_biquadratic;
use crate::error::{Error, Result};
use crate::quadratic::ClassNumberCache;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Status {
    Exists,
    NoNonCyclic,
    OutsideTheorem,
}

pub const TAG_OMEGA_GT_4: &str = "omega_gt_4";
pub const TAG_ABELIAN_CYCLIC: &str = "abelian_cyclic";
pub const TAG_ABELIAN_NONCYCLIC: &str = "abelian_noncyclic";
pub const TAG_D8_OBSTRUCTION: &str = "d8_obstruction";
pub const TAG_CLASS_NUMBER_ONE: &str = "class_number_one";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(rename = "h_K")]
    pub h_k: Option<u64>,
    pub omega: u32,
    pub hilbert_abelian: Option<bool>,
    pub exceptional_pattern: Option<bool>,
    pub reasons: Vec<&'static str>,
}

/// Whether `H(K)/Q` is abelian, given `h_K`: true iff `h_K = [L : K]`.
pub fn hilbert_abelian_given(k: &BiquadraticField, h_k: u64) -> Result<bool> {
    Ok(h_k == real_genus_degree(k)?)
}

/// Whether `H(K)/Q` is abelian.
pub fn hilbert_abelian(k: &BiquadraticField, cache: &ClassNumberCache) -> Result<bool> {
    hilbert_abelian_given(k, class_number_biquadratic(k, cache)?.h_k)
}

/// For `K = Q(sqrt q, sqrt rs)`: whether `q ≡ 1` and `r ≡ s ≡ 3 (mod 4)`.
pub fn exceptional_pattern(k: &BiquadraticField) -> Result<bool> {
    let [one, a, b] = k.triple();
    if one != 1 {
        return Err(Error::ShapeMismatch);
    }
    let pa = k.product().primes().iter().filter(|&&p| a % p == 0).count();
    let pb = k.product().primes().iter().filter(|&&p| b % p == 0).count();
    let (q, rs) = match (pa, pb) {
        (1, 2) => (a, b),
        (2, 1) => (b, a),
        _ => return Err(Error::ShapeMismatch),
    };
    let pair: Vec<u64> = k.product().primes().iter().copied().filter(|&p| rs % p == 0).collect();
    Ok(q % 4 == 1 && pair.iter().all(|&p| p % 4 == 3))
}

/// The decision cascade.
pub fn euclidean_verdict(k: &BiquadraticField, cache: &ClassNumberCache) -> Result<Verdict> {
    let omega = k.omega();
    let exceptional = exceptional_pattern(k).ok();
    if omega > 4 {
        return Ok(Verdict {
            status: Status::NoNonCyclic,
            h_k: None,
            omega,
            hilbert_abelian: None,
            exceptional_pattern: exceptional,
            reasons: vec![TAG_OMEGA_GT_4],
        });
    }
    let h_k = class_number_biquadratic(k, cache)?.h_k;
    let abelian = hilbert_abelian_given(k, h_k)?;
    let (status, reasons) = match (abelian, h_k) {
        (true, 1) => (Status::Exists, vec![TAG_CLASS_NUMBER_ONE]),
        (true, 2) => (Status::Exists, vec![TAG_ABELIAN_CYCLIC]),
        (true, _) => (Status::NoNonCyclic, vec![TAG_ABELIAN_NONCYCLIC]),
        (false, _) if exceptional == Some(true) => (Status::OutsideTheorem, vec![TAG_D8_OBSTRUCTION]),
        (false, _) => (Status::OutsideTheorem, vec![]),
    };
    let verdict = Verdict {
        status,
        h_k: Some(h_k),
        omega,
        hilbert_abelian: Some(abelian),
        exceptional_pattern: exceptional,
        reasons,
    };
    check_verdict(k, &verdict)?;
    Ok(verdict)
}

/// Post-hoc consistency of a verdict with the genus-theoretic bounds.
pub fn check_verdict(k: &BiquadraticField, v: &Verdict) -> Result<()> {
    let bad = |what: &str| {
        Err(Error::InternalInconsistency(format!("triple {:?}: {what} ({v:?})", k.triple())))
    };
    match v.status {
        Status::Exists => {
            if v.hilbert_abelian != Some(true) || !matches!(v.h_k, Some(1 | 2)) || v.omega > 4 {
                return bad("Exists needs an abelian Hilbert class field, h_K <= 2 and omega <= 4");
            }
        }
        Status::NoNonCyclic => {
            let abelian_big = v.hilbert_abelian == Some(true) && v.h_k.is_some_and(|h| h > 2);
            if v.omega <= 4 && !abelian_big {
                return bad("NoNonCyclic needs omega > 4 or an abelian class group of order > 2");
            }
        }
        Status::OutsideTheorem => {
            if v.hilbert_abelian != Some(false) {
                return bad("OutsideTheorem needs a non-abelian Hilbert class field");
            }
        }
    }
    if v.hilbert_abelian == Some(true) {
        // h_K = [L:K], which is 2^(omega-2) when G(K) is totally real and
        // 2^(omega-3) otherwise (omega >= 3)
        let h = v.h_k.unwrap_or(0);
        let real_genus = genus_field(k)?.is_totally_real();
        let expected = if v.omega <= 2 || real_genus {
            1u64 << (v.omega.max(2) - 2)
        } else {
            1u64 << (v.omega - 3)
        };
        if h != expected {
            return bad("abelian Hilbert class field with h_K != [L:K]");
        }
    }
    Ok(())
}
