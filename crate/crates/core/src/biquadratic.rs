//! Odd real biquadratic fields `Q(sqrt d1, sqrt d2)`.
//!
//! A field is identified by its canonical triple `m1 < m2 < m3` of pairwise
//! coprime odd squarefree integers: the subfields are `Q(sqrt mi mj)`.

use serde::Serialize;

use crate::arith::{factor_squarefree, is_squarefree, FactoredSquarefree};
use crate::error::{Error, Result};
use crate::multiquadratic::MultiquadraticField;
use crate::quadratic::{self, prime_star};

/// Shape of a field among the candidates for a cyclic class group with
/// abelian Hilbert class field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FieldForm {
    /// `Q(sqrt p, sqrt q)`.
    TwoPrimes,
    /// `Q(sqrt q, sqrt rs)`.
    #[serde(rename = "SharedPrimeFree2x1")]
    PrimeAndPair,
    /// `Q(sqrt pq, sqrt qr)`: every pair of subfield radicands shares a prime.
    SharedPrime,
    /// `Q(sqrt pq, sqrt rs)`.
    TwoTimesTwo,
    /// `Q(sqrt pqr, sqrt s)`.
    ThreeTimesOne,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiquadraticField {
    d1: i64,
    d2: i64,
    triple: [u64; 3],
    c: u8,
    product: FactoredSquarefree,
    discriminant: u64,
    subfields: [u64; 3],
}

fn check_radicand(a: i64) -> Result<()> {
    if a < 0 {
        return Err(Error::NotTotallyReal(a));
    }
    if a <= 1 {
        return Err(Error::DegenerateRadicand(a));
    }
    if !is_squarefree(a) {
        return Err(Error::NotSquarefree(a));
    }
    Ok(())
}

impl BiquadraticField {
    /// `Q(sqrt a, sqrt b)` for distinct odd squarefree `a, b > 1`.
    pub fn from_radicands(a: i64, b: i64) -> Result<Self> {
        check_radicand(a)?;
        check_radicand(b)?;
        if a % 2 == 0 {
            return Err(Error::EvenRadicand(a));
        }
        if b % 2 == 0 {
            return Err(Error::EvenRadicand(b));
        }
        if a == b {
            return Err(Error::DegenerateField(a, b));
        }
        let m = num_integer::gcd(a, b);
        let mut triple = [m as u64, (a / m) as u64, (b / m) as u64];
        triple.sort_unstable();
        Self::build(a, b, triple)
    }

    /// The field with canonical triple `(m1, m2, m3)` in any order; `d1, d2`
    /// are its two smallest subfield radicands.
    pub fn from_triple(m1: u64, m2: u64, m3: u64) -> Result<Self> {
        let mut triple = [m1, m2, m3];
        triple.sort_unstable();
        for &m in &triple {
            if m == 0 || m > i64::MAX as u64 || !is_squarefree(m as i64) {
                return Err(Error::NotSquarefree(m as i64));
            }
            if m % 2 == 0 {
                return Err(Error::EvenRadicand(m as i64));
            }
        }
        let [x, y, z] = triple;
        if y == 1 || num_integer::gcd(x, y) != 1 || num_integer::gcd(x, z) != 1 || num_integer::gcd(y, z) != 1 {
            return Err(Error::DegenerateField(x as i64, (y * z) as i64));
        }
        let subs = subfield_radicands(triple)?;
        Self::build(subs[0] as i64, subs[1] as i64, triple)
    }

    fn build(d1: i64, d2: i64, triple: [u64; 3]) -> Result<Self> {
        let overflow = || Error::Overflow(format!("discriminant of triple {triple:?}"));
        let m = triple.iter().try_fold(1u64, |acc, &x| acc.checked_mul(x)).ok_or_else(overflow)?;
        let product = factor_squarefree(m as i64)?;
        let all_congruent = triple.iter().all(|&x| x % 4 == triple[0] % 4);
        let c: u8 = if all_congruent { 1 } else { 4 };
        let discriminant = (u64::from(c))
            .checked_mul(m)
            .and_then(|cm| cm.checked_mul(cm))
            .ok_or_else(overflow)?;
        let subfields = subfield_radicands(triple)?;
        Ok(Self { d1, d2, triple, c, product, discriminant, subfields })
    }

    pub fn d1(&self) -> i64 {
        self.d1
    }

    pub fn d2(&self) -> i64 {
        self.d2
    }

    pub fn triple(&self) -> [u64; 3] {
        self.triple
    }

    /// 1 when `m1 ≡ m2 ≡ m3 (mod 4)`, else 4.
    pub fn c(&self) -> u8 {
        self.c
    }

    /// `m1 m2 m3` with its primes.
    pub fn product(&self) -> &FactoredSquarefree {
        &self.product
    }

    pub fn discriminant(&self) -> u64 {
        self.discriminant
    }

    /// Subfield radicands `m1m2 < m1m3 < m2m3` (in ascending order).
    pub fn subfields(&self) -> [u64; 3] {
        self.subfields
    }

    /// `omega` of the discriminant.
    pub fn omega(&self) -> u32 {
        self.product.omega() + u32::from(self.c == 4)
    }

    /// Whether the defining radicands share a prime.
    pub fn shared_prime(&self) -> bool {
        num_integer::gcd(self.d1, self.d2) > 1
    }
}

fn subfield_radicands([x, y, z]: [u64; 3]) -> Result<[u64; 3]> {
    let mul = |a: u64, b: u64| a.checked_mul(b).ok_or_else(|| Error::Overflow(format!("{a} * {b}")));
    let mut s = [mul(x, y)?, mul(x, z)?, mul(y, z)?];
    s.sort_unstable();
    Ok(s)
}

/// Discriminant `c^2 (m1 m2 m3)^2`, checked against the product of the three
/// subfield discriminants.
pub fn discriminant_of(k: &BiquadraticField) -> Result<u64> {
    let mut conductor_product: u128 = 1;
    for &s in &k.subfields {
        conductor_product *= quadratic::discriminant(s as i64)? as u128;
    }
    if conductor_product != u128::from(k.discriminant) {
        return Err(Error::InternalInconsistency(format!(
            "triple {:?}: c^2 M^2 = {} but D1 D2 D3 = {conductor_product}",
            k.triple, k.discriminant
        )));
    }
    Ok(k.discriminant)
}

/// Generators of the genus field: `p*` for each prime `p` of `m1 m2 m3`,
/// with `-1` adjoined unless `d1 ≡ d2 ≡ 1 (mod 4)`.
pub fn genus_generators(k: &BiquadraticField) -> Result<Vec<i64>> {
    let mut gens: Vec<i64> = k.product.primes().iter().map(|&p| prime_star(p)).collect();
    let both_one = k.d1 % 4 == 1 && k.d2 % 4 == 1;
    if both_one == (k.c == 4) {
        return Err(Error::InternalInconsistency(format!(
            "triple {:?}: radicand congruences disagree with c = {}",
            k.triple, k.c
        )));
    }
    if !both_one {
        gens.push(-1);
    }
    Ok(gens)
}

/// The genus field `G(K)`.
pub fn genus_field(k: &BiquadraticField) -> Result<MultiquadraticField> {
    MultiquadraticField::new(genus_generators(k)?)
}

/// `[G(K) : K] = 2^(omega(Delta) - 2)`, confirmed against the F2 rank.
pub fn genus_number(k: &BiquadraticField) -> Result<u64> {
    let omega = k.omega();
    let g = genus_field(k)?;
    let by_rank = g.degree() / 4;
    if omega < 2 || 1u64 << (omega - 2) != by_rank || !g.contains(k.d1) || !g.contains(k.d2) {
        return Err(Error::InternalInconsistency(format!(
            "triple {:?}: omega = {omega} but [G(K):Q] = {}",
            k.triple,
            g.degree()
        )));
    }
    Ok(by_rank)
}

/// `L`, the maximal totally real subfield of the genus field.
pub fn real_genus_subfield(k: &BiquadraticField) -> Result<MultiquadraticField> {
    genus_field(k)?.totally_real_subfield()
}

/// `[L : K]`.
pub fn real_genus_degree(k: &BiquadraticField) -> Result<u64> {
    Ok(real_genus_subfield(k)?.degree() / 4)
}

/// The shape of `K`, or `None` when it fits none of the candidate forms
/// (in particular whenever `omega(Delta) > 4`).
pub fn classify_form(k: &BiquadraticField) -> Option<FieldForm> {
    if k.omega() > 4 {
        return None;
    }
    let omega = |m: u64| factor_squarefree(m as i64).map(|f| f.omega()).unwrap_or(0);
    let [x, y, z] = k.triple;
    if x == 1 {
        let mut w = [omega(y), omega(z)];
        w.sort_unstable();
        match w {
            [1, 1] => Some(FieldForm::TwoPrimes),
            [1, 2] => Some(FieldForm::PrimeAndPair),
            [2, 2] => Some(FieldForm::TwoTimesTwo),
            [1, 3] => Some(FieldForm::ThreeTimesOne),
            _ => None,
        }
    } else if [x, y, z].iter().all(|&m| omega(m) == 1) {
        Some(FieldForm::SharedPrime)
    } else {
        None
    }
}

/// The stable JSON view of a field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldRecord {
    pub d1: i64,
    pub d2: i64,
    pub triple: [u64; 3],
    pub c: u8,
    pub discriminant: u64,
    pub subfields: [u64; 3],
    pub genus_generators: Vec<i64>,
    pub genus_number: u64,
    #[serde(rename = "L_generators")]
    pub l_generators: Vec<i64>,
    pub form: Option<FieldForm>,
    pub shared_prime: bool,
}

impl FieldRecord {
    pub fn new(k: &BiquadraticField) -> Result<Self> {
        Ok(Self {
            d1: k.d1,
            d2: k.d2,
            triple: k.triple,
            c: k.c,
            discriminant: discriminant_of(k)?,
            subfields: k.subfields,
            genus_generators: genus_generators(k)?,
            genus_number: genus_number(k)?,
            l_generators: real_genus_subfield(k)?.generators().to_vec(),
            form: classify_form(k),
            shared_prime: k.shared_prime(),
        })
    }
}
