//! Exact scalars: arbitrary-precision rationals, values of the form
//! `q·√r` with square-free radicand, and finite sums of such values.
//!
//! The representation of a [`RadicalSum`] over distinct square-free
//! radicands is unique, so a sum is zero exactly when its term map is
//! empty.  Sign queries on nonzero mixed sums go through directed-rounding
//! interval enclosures with doubling precision; uniqueness of the
//! representation guarantees the loop terminates.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (maintained by `num-rational`).
pub type BigRat = num_rational::BigRational;

/// `n/d` as a [`BigRat`].
pub fn rat(n: i64, d: i64) -> BigRat {
    BigRat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as a [`BigRat`].
pub fn rat_int(n: i64) -> BigRat {
    BigRat::from_integer(BigInt::from(n))
}

/// `q^e` for integer (possibly negative) exponent.
pub fn rat_pow(q: &BigRat, e: i64) -> BigRat {
    if e == 0 {
        return BigRat::one();
    }
    let mag = e.unsigned_abs() as u32;
    let num = q.numer().pow(mag);
    let den = q.denom().pow(mag);
    if e > 0 {
        BigRat::new(num, den)
    } else {
        BigRat::new(den, num)
    }
}

/// `2^e` for possibly negative `e`.
pub fn pow2(e: i64) -> BigRat {
    rat_pow(&rat_int(2), e)
}

/// Largest power of two `2^e` with `e <= 0` strictly below `bound`.
///
/// This is the one rule used everywhere a proof asks for "a sufficiently
/// small positive rational": canonical and reproducible.
pub fn largest_pow2_below(bound: &BigRat) -> Result<BigRat> {
    if !bound.is_positive() {
        return Err(Error::InvalidParam(String::from(
            "bound for power-of-two selection must be positive",
        )));
    }
    let mut x = BigRat::one();
    while &x >= bound {
        x = x / rat_int(2);
    }
    Ok(x)
}

const FACTOR_TRIAL_LIMIT: u64 = 65_536;
const RHO_ITERATION_CAP: u64 = 1 << 24;

/// Miller–Rabin with a fixed deterministic witness set.
fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    const WITNESSES: [u64; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    for w in WITNESSES {
        if n == &BigUint::from(w) {
            return true;
        }
        if (n % BigUint::from(w)).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - BigUint::one();
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s as usize;
    'witness: for w in WITNESSES {
        let mut x = BigUint::from(w).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's cycle variant of Pollard rho with a deterministic parameter
/// schedule; `None` once the iteration cap is hit.
fn brent_rho(n: &BigUint) -> Option<BigUint> {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if (n % &two).is_zero() {
        return Some(two);
    }
    let mut budget = RHO_ITERATION_CAP;
    for c in 1u64.. {
        let cb = BigUint::from(c);
        let mut y = BigUint::from(2u32);
        let (mut x, mut ys);
        let mut d = BigUint::one();
        let mut r: u64 = 1;
        let mut q = BigUint::one();
        'outer: loop {
            x = y.clone();
            for _ in 0..r {
                y = (&y * &y + &cb) % n;
            }
            let mut k: u64 = 0;
            while k < r {
                ys = y.clone();
                let m = 128.min(r - k);
                for _ in 0..m {
                    y = (&y * &y + &cb) % n;
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                d = num_integer::gcd(q.clone(), n.clone());
                k += m;
                if budget < m {
                    return None;
                }
                budget -= m;
                if !d.is_one() {
                    if &d == n {
                        // backtrack one by one
                        let mut z = ys;
                        loop {
                            z = (&z * &z + &cb) % n;
                            let diff = if x > z { &x - &z } else { &z - &x };
                            d = num_integer::gcd(diff, n.clone());
                            if !d.is_one() {
                                break;
                            }
                        }
                        if &d == n {
                            break 'outer; // retry with next c
                        }
                    }
                    if &d > &one && &d < n {
                        return Some(d);
                    }
                }
            }
            r *= 2;
        }
    }
    None
}

/// Complete factorization of a cofactor with no prime below the trial
/// limit, by recursive rho splitting.
fn factor_rough(n: &BigUint, out: &mut alloc::vec::Vec<BigUint>) -> Result<()> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime(n) {
        out.push(n.clone());
        return Ok(());
    }
    let root = n.sqrt();
    if &root * &root == *n {
        // each prime of the root appears twice in n
        let mut root_factors = alloc::vec::Vec::new();
        factor_rough(&root, &mut root_factors)?;
        for p in &root_factors {
            out.push(p.clone());
        }
        out.extend(root_factors);
        return Ok(());
    }
    let d = brent_rho(n).ok_or(Error::RadicandTooLarge)?;
    factor_rough(&d, out)?;
    factor_rough(&(n / &d), out)?;
    Ok(())
}

/// Splits `m = outside² · inside` with `inside` square-free.
///
/// Trial division strips small primes; any remaining rough cofactor is
/// fully factored by deterministic Brent rho with an iteration cap, so
/// the square-free part is always genuine.  Inputs that exhaust the cap
/// are reported as errors rather than normalized heuristically.
fn squarefree_split(m: &BigUint) -> Result<(BigUint, BigUint)> {
    let one = BigUint::one();
    if m.is_zero() {
        return Ok((BigUint::zero(), one));
    }
    let mut work = m.clone();
    let mut outside = BigUint::one();
    let mut inside = BigUint::one();
    let mut d: u64 = 2;
    while d <= FACTOR_TRIAL_LIMIT {
        let db = BigUint::from(d);
        if &db * &db > work {
            break;
        }
        if (&work % &db).is_zero() {
            let mut mult = 0u32;
            while (&work % &db).is_zero() {
                work /= &db;
                mult += 1;
            }
            outside *= db.pow(mult / 2);
            if mult % 2 == 1 {
                inside *= d;
            }
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    if !work.is_one() {
        let mut primes = alloc::vec::Vec::new();
        factor_rough(&work, &mut primes)?;
        primes.sort();
        let mut i = 0;
        while i < primes.len() {
            let p = primes[i].clone();
            let mut mult = 0u32;
            while i < primes.len() && primes[i] == p {
                mult += 1;
                i += 1;
            }
            outside *= p.pow(mult / 2);
            if mult % 2 == 1 {
                inside *= p;
            }
        }
    }
    Ok((outside, inside))
}

/// A value `coeff · √radicand` with square-free radicand.
///
/// Canonical form: `coeff = 0` forces `radicand = 1`, and `radicand = 1`
/// exactly when the value is rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    coeff: BigRat,
    radicand: BigUint,
}

impl Radical {
    /// The normalized value `q·√r` (`r` a nonnegative rational).
    ///
    /// Uses `q·√(a/b) = (q/b)·√(a·b)` and then extracts the largest square
    /// factor of `a·b` by trial factorization.
    pub fn new(q: BigRat, r: BigRat) -> Result<Radical> {
        if r.is_negative() {
            return Err(Error::NegativeRadicand);
        }
        if q.is_zero() || r.is_zero() {
            return Ok(Radical::zero());
        }
        let a = r.numer().magnitude().clone();
        let b = r.denom().magnitude().clone();
        let (outside, inside) = squarefree_split(&(a * &b))?;
        let coeff = q * BigRat::new(BigInt::from(outside), BigInt::from(b));
        if coeff.is_zero() || inside.is_one() {
            return Ok(Radical {
                coeff,
                radicand: BigUint::one(),
            });
        }
        Ok(Radical {
            coeff,
            radicand: inside,
        })
    }

    /// `√r` for a nonnegative rational `r`.
    pub fn sqrt_of(r: BigRat) -> Result<Radical> {
        Radical::new(BigRat::one(), r)
    }

    /// The rational value `q` as a radical (radicand 1).
    pub fn from_rational(q: BigRat) -> Radical {
        Radical {
            coeff: q,
            radicand: BigUint::one(),
        }
    }

    pub fn zero() -> Radical {
        Radical {
            coeff: BigRat::zero(),
            radicand: BigUint::one(),
        }
    }

    pub fn one() -> Radical {
        Radical::from_rational(BigRat::one())
    }

    pub fn coeff(&self) -> &BigRat {
        &self.coeff
    }

    pub fn radicand(&self) -> &BigUint {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Rational exactly when the radicand is 1.
    pub fn is_rational(&self) -> bool {
        self.radicand.is_one()
    }

    pub fn as_rational(&self) -> Option<&BigRat> {
        if self.is_rational() {
            Some(&self.coeff)
        } else {
            None
        }
    }

    /// Exact sign: the sign of the coefficient, since `√radicand > 0`.
    pub fn signum(&self) -> i8 {
        if self.coeff.is_zero() {
            0
        } else if self.coeff.is_positive() {
            1
        } else {
            -1
        }
    }

    /// The exact square `coeff²·radicand`, always rational.
    pub fn square(&self) -> BigRat {
        &self.coeff * &self.coeff * BigRat::from_integer(BigInt::from(self.radicand.clone()))
    }

    pub fn abs(&self) -> Radical {
        Radical {
            coeff: self.coeff.abs(),
            radicand: self.radicand.clone(),
        }
    }

    /// Exact total order on real values.
    pub fn cmp_exact(&self, other: &Radical) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let sq = self.square().cmp(&other.square());
        if sa > 0 {
            sq
        } else {
            sq.reverse()
        }
    }

    /// Compares absolute values exactly.
    pub fn cmp_abs(&self, other: &Radical) -> Ordering {
        self.square().cmp(&other.square())
    }

    /// An interval of width at most `2^-bits` guaranteed to contain the
    /// value, from a directed-rounding integer-sqrt enclosure.
    pub fn enclose(&self, bits: u32) -> RatInterval {
        if self.is_zero() {
            return RatInterval::point(BigRat::zero());
        }
        if self.is_rational() {
            return RatInterval::point(self.coeff.clone());
        }
        // width |coeff| * 2^-t <= 2^-bits
        let mut t = bits + 2;
        let abs_c = self.coeff.abs();
        let mut scale = BigRat::one();
        while scale < abs_c {
            scale = scale * rat_int(2);
            t += 1;
        }
        let shifted = &self.radicand << (2 * t as usize);
        let s = shifted.sqrt();
        let den = BigInt::from(BigUint::one() << t as usize);
        let lo_root = BigRat::new(BigInt::from(s.clone()), den.clone());
        let hi_root = BigRat::new(BigInt::from(s + BigUint::one()), den);
        let a = &self.coeff * lo_root;
        let b = &self.coeff * hi_root;
        if a <= b {
            RatInterval::new(a, b)
        } else {
            RatInterval::new(b, a)
        }
    }
}

impl Mul for &Radical {
    type Output = Radical;

    /// Exact product: with `g = gcd` of the radicands, the result has
    /// radicand `(r_a/g)·(r_b/g)` and coefficient `c_a·c_b·g`.
    fn mul(self, rhs: &Radical) -> Radical {
        if self.is_zero() || rhs.is_zero() {
            return Radical::zero();
        }
        let g = num_integer::gcd(self.radicand.clone(), rhs.radicand.clone());
        let radicand = (&self.radicand / &g) * (&rhs.radicand / &g);
        let coeff = &self.coeff * &rhs.coeff * BigRat::from_integer(BigInt::from(g));
        Radical { coeff, radicand }
    }
}

impl Neg for &Radical {
    type Output = Radical;
    fn neg(self) -> Radical {
        if self.is_zero() {
            return Radical::zero();
        }
        Radical {
            coeff: -self.coeff.clone(),
            radicand: self.radicand.clone(),
        }
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "{}*sqrt({})", self.coeff, self.radicand)
        }
    }
}

/// A finite sum `Σ coeff_r · √r` over distinct square-free radicands.
///
/// No stored coefficient is zero and the empty map is the canonical zero,
/// so equality and zero tests are structural.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RadicalSum {
    terms: BTreeMap<BigUint, BigRat>,
}

impl RadicalSum {
    pub fn zero() -> RadicalSum {
        RadicalSum::default()
    }

    pub fn from_radical(r: &Radical) -> RadicalSum {
        let mut s = RadicalSum::zero();
        s.add_radical(r);
        s
    }

    pub fn from_rational(q: BigRat) -> RadicalSum {
        RadicalSum::from_radical(&Radical::from_rational(q))
    }

    /// Adds one normalized radical; coefficients with equal radicand
    /// combine and zero coefficients are removed.
    pub fn add_radical(&mut self, t: &Radical) {
        if t.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(t.radicand.clone())
            .or_insert_with(BigRat::zero);
        *entry += t.coeff.clone();
        if entry.is_zero() {
            self.terms.remove(&t.radicand);
        }
    }

    pub fn add_assign(&mut self, other: &RadicalSum) {
        for (rad, c) in &other.terms {
            let entry = self.terms.entry(rad.clone()).or_insert_with(BigRat::zero);
            *entry += c.clone();
            if entry.is_zero() {
                self.terms.remove(rad);
            }
        }
    }

    pub fn sub_assign(&mut self, other: &RadicalSum) {
        for (rad, c) in &other.terms {
            let entry = self.terms.entry(rad.clone()).or_insert_with(BigRat::zero);
            *entry -= c.clone();
            if entry.is_zero() {
                self.terms.remove(rad);
            }
        }
    }

    pub fn scale(&self, q: &BigRat) -> RadicalSum {
        if q.is_zero() {
            return RadicalSum::zero();
        }
        RadicalSum {
            terms: self
                .terms
                .iter()
                .map(|(r, c)| (r.clone(), c * q))
                .collect(),
        }
    }

    /// True exactly when the term map is empty: the representation over
    /// distinct square-free radicands is unique.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &BigRat)> {
        self.terms.iter()
    }

    pub fn into_radicals(&self) -> Vec<Radical> {
        self.terms
            .iter()
            .map(|(r, c)| Radical {
                coeff: c.clone(),
                radicand: r.clone(),
            })
            .collect()
    }

    /// The exact rational value, when the sum has no irrational part.
    pub fn as_rational(&self) -> Option<BigRat> {
        if self.terms.is_empty() {
            return Some(BigRat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&BigUint::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Interval of width at most `2^-bits` containing the value.
    pub fn enclose(&self, bits: u32) -> RatInterval {
        if self.terms.is_empty() {
            return RatInterval::point(BigRat::zero());
        }
        let n = self.terms.len() as u32;
        let mut extra = 0u32;
        while (1u64 << extra) < n as u64 {
            extra += 1;
        }
        let per_term = bits + extra + 1;
        let mut acc = RatInterval::point(BigRat::zero());
        for (rad, c) in &self.terms {
            let t = Radical {
                coeff: c.clone(),
                radicand: rad.clone(),
            };
            acc = acc.add(&t.enclose(per_term));
        }
        acc
    }

    /// Exact sign by adaptive precision doubling.  A nonzero sum separates
    /// from zero because its representation is unique, so the loop
    /// terminates; the precision cap only guards against corrupted values.
    pub fn signum(&self) -> Result<i8> {
        if self.terms.is_empty() {
            return Ok(0);
        }
        if let Some(q) = self.as_rational() {
            return Ok(if q.is_positive() { 1 } else { -1 });
        }
        if self.terms.values().all(|c| c.is_positive()) {
            return Ok(1);
        }
        if self.terms.values().all(|c| c.is_negative()) {
            return Ok(-1);
        }
        let mut bits = 16u32;
        while bits <= (1 << 20) {
            let iv = self.enclose(bits);
            if iv.lo.is_positive() {
                return Ok(1);
            }
            if iv.hi.is_negative() {
                return Ok(-1);
            }
            bits *= 2;
        }
        Err(Error::PrecisionExhausted)
    }

    /// Exact product; quadratic radicals are closed under multiplication.
    pub fn mul(&self, other: &RadicalSum) -> RadicalSum {
        let mut out = RadicalSum::zero();
        for (ra, ca) in &self.terms {
            for (rb, cb) in &other.terms {
                let t = &Radical {
                    coeff: ca.clone(),
                    radicand: ra.clone(),
                } * &Radical {
                    coeff: cb.clone(),
                    radicand: rb.clone(),
                };
                out.add_radical(&t);
            }
        }
        out
    }
}

impl Add for &RadicalSum {
    type Output = RadicalSum;
    fn add(self, rhs: &RadicalSum) -> RadicalSum {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub for &RadicalSum {
    type Output = RadicalSum;
    fn sub(self, rhs: &RadicalSum) -> RadicalSum {
        let mut out = self.clone();
        out.sub_assign(rhs);
        out
    }
}

impl Neg for &RadicalSum {
    type Output = RadicalSum;
    fn neg(self) -> RadicalSum {
        RadicalSum {
            terms: self
                .terms
                .iter()
                .map(|(r, c)| (r.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl From<Radical> for RadicalSum {
    fn from(r: Radical) -> RadicalSum {
        RadicalSum::from_radical(&r)
    }
}

impl fmt::Display for RadicalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (rad, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if rad.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*sqrt({rad})")?;
            }
        }
        Ok(())
    }
}

/// A closed rational interval `[lo, hi]` used for certified enclosures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: BigRat,
    pub hi: BigRat,
}

impl RatInterval {
    pub fn new(lo: BigRat, hi: BigRat) -> RatInterval {
        debug_assert!(lo <= hi);
        RatInterval { lo, hi }
    }

    pub fn point(v: BigRat) -> RatInterval {
        RatInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn width(&self) -> BigRat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &BigRat) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn scale(&self, q: &BigRat) -> RatInterval {
        let a = &self.lo * q;
        let b = &self.hi * q;
        if a <= b {
            RatInterval::new(a, b)
        } else {
            RatInterval::new(b, a)
        }
    }

    /// Product of two intervals with nonnegative endpoints.
    pub fn mul_nonneg(&self, other: &RatInterval) -> RatInterval {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        RatInterval::new(&self.lo * &other.lo, &self.hi * &other.hi)
    }
}

/// Encloses `u^(1/m)` for nonnegative rational `u` within `2^-bits`.
pub fn nth_root_enclosure(u: &BigRat, m: u32, bits: u32) -> Result<RatInterval> {
    if u.is_negative() {
        return Err(Error::NegativeRadicand);
    }
    if m == 0 {
        return Err(Error::InvalidParam(String::from("zeroth root")));
    }
    if u.is_zero() {
        return Ok(RatInterval::point(BigRat::zero()));
    }
    let s = bits + 2;
    // floor(u * 2^(m*s)) and its m-th roots give directed bounds:
    // root(floor)/2^s <= u^(1/m) < (root(floor(..)+1)+1)/2^s.
    let scaled = u * BigRat::from_integer(BigInt::from(BigUint::one() << (m as usize * s as usize)));
    let floor = scaled.floor().to_integer().magnitude().clone();
    let lo_root = floor.nth_root(m);
    let hi_root = (&floor + BigUint::one()).nth_root(m) + BigUint::one();
    let den = BigInt::from(BigUint::one() << s as usize);
    Ok(RatInterval::new(
        BigRat::new(BigInt::from(lo_root), den.clone()),
        BigRat::new(BigInt::from(hi_root), den),
    ))
}

/// Encloses `u^(p) = u^(a/b)` for nonnegative rational `u` and positive
/// rational exponent `p = a/b`, within roughly `2^-bits`.
pub fn rat_power_enclosure(u: &BigRat, p: &BigRat, bits: u32) -> Result<RatInterval> {
    if u.is_negative() {
        return Err(Error::NegativeRadicand);
    }
    if !p.is_positive() {
        return Err(Error::InvalidParam(String::from("exponent must be positive")));
    }
    let a: u32 = p
        .numer()
        .try_into()
        .map_err(|_| Error::InvalidParam(String::from("exponent numerator too large")))?;
    let b: u32 = p
        .denom()
        .try_into()
        .map_err(|_| Error::InvalidParam(String::from("exponent denominator too large")))?;
    let powered = rat_pow(u, a as i64);
    if b == 1 {
        return Ok(RatInterval::point(powered));
    }
    // extra guard bits to absorb the magnitude of u^a
    let mut guard = 4u32;
    let one = BigRat::one();
    let mut mag = powered.clone();
    while mag > one && guard < 512 {
        mag = mag / rat_int(2);
        guard += 1;
    }
    nth_root_enclosure(&powered, b, bits + guard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn radical(qn: i64, qd: i64, r: u64) -> Radical {
        Radical::new(rat(qn, qd), rat_int(r as i64)).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let a = radical(1, 1, 2);
        assert_eq!(a.coeff(), &rat_int(1));
        assert_eq!(a.radicand(), &BigUint::from(2u32));

        let b = radical(1, 1, 8);
        assert_eq!(b.coeff(), &rat_int(2));
        assert_eq!(b.radicand(), &BigUint::from(2u32));

        let c = Radical::new(rat_int(3), rat(4, 9)).unwrap();
        assert!(c.is_rational());
        assert_eq!(c.as_rational().unwrap(), &rat_int(2));
    }

    #[test]
    fn normalize_rejects_negative() {
        assert_eq!(
            Radical::new(rat_int(1), rat_int(-2)).unwrap_err(),
            Error::NegativeRadicand
        );
    }

    #[test]
    fn zero_is_canonical() {
        let z = Radical::new(rat_int(0), rat_int(7)).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.radicand(), &BigUint::one());
        let z2 = Radical::new(rat_int(5), rat_int(0)).unwrap();
        assert!(z2.is_zero());
    }

    #[test]
    fn mul_examples() {
        let s2 = radical(1, 1, 2);
        let p = &s2 * &s2;
        assert_eq!(p.as_rational().unwrap(), &rat_int(2));

        let s3 = radical(1, 1, 3);
        let q = &s2 * &s3;
        assert_eq!(q.radicand(), &BigUint::from(6u32));
        assert_eq!(q.coeff(), &rat_int(1));

        let a = radical(2, 1, 2);
        let b = radical(3, 1, 6);
        let c = &a * &b;
        assert_eq!(c.coeff(), &rat_int(12));
        assert_eq!(c.radicand(), &BigUint::from(3u32));
    }

    #[test]
    fn sum_add_examples() {
        let s2 = radical(1, 1, 2);
        let mut s = RadicalSum::from_radical(&s2);
        s.add_radical(&s2);
        assert_eq!(s.num_terms(), 1);
        let two_s2 = s.into_radicals();
        assert_eq!(two_s2[0].coeff(), &rat_int(2));

        let mut t = RadicalSum::from_radical(&s2);
        t.add_radical(&-&s2);
        assert!(t.is_zero());

        let mut u = RadicalSum::zero();
        u.add_radical(&radical(1, 1, 3));
        assert_eq!(u.num_terms(), 1);
    }

    #[test]
    fn sign_and_zero_queries() {
        assert_eq!(radical(-3, 1, 2).signum(), -1);
        let mut s = RadicalSum::from_radical(&radical(1, 1, 2));
        s.add_radical(&radical(-1, 1, 3));
        assert!(!s.is_zero());
        // sqrt(2) - sqrt(3) < 0
        assert_eq!(s.signum().unwrap(), -1);
    }

    #[test]
    fn enclosure_of_sqrt2() {
        let s2 = radical(1, 1, 2);
        let iv = s2.enclose(4);
        assert!(iv.width() <= rat(1, 16));
        // interval must straddle sqrt(2): lo^2 <= 2 <= hi^2
        assert!(&iv.lo * &iv.lo <= rat_int(2));
        assert!(&iv.hi * &iv.hi >= rat_int(2));
    }

    #[test]
    fn mixed_sum_excludes_zero_at_precision() {
        // sqrt(2) + sqrt(3) - sqrt(6) is nonzero; the enclosure at modest
        // precision must exclude zero.
        let mut s = RadicalSum::from_radical(&radical(1, 1, 2));
        s.add_radical(&radical(1, 1, 3));
        s.add_radical(&radical(-1, 1, 6));
        let iv = s.enclose(64);
        assert!(!iv.contains_zero());
    }

    #[test]
    fn nth_root_enclosure_contains_value() {
        // 2^(1/3)
        let iv = nth_root_enclosure(&rat_int(2), 3, 20).unwrap();
        assert!(iv.width() <= rat(1, 1 << 18));
        let lo3 = rat_pow(&iv.lo, 3);
        let hi3 = rat_pow(&iv.hi, 3);
        assert!(lo3 <= rat_int(2) && rat_int(2) <= hi3);
    }

    #[test]
    fn squarefree_split_handles_large_smooth_inputs() {
        // 4 * 3^16 * 2^18 is far beyond the rough-cofactor cap but fully
        // smooth, so extraction must succeed.
        let m = BigUint::from(4u32) * BigUint::from(3u32).pow(16) * BigUint::from(2u32).pow(18);
        let (out, inside) = squarefree_split(&m).unwrap();
        assert_eq!(&out * &out * &inside, m);
        assert!(inside.is_one());
    }

    #[test]
    fn largest_pow2_below_examples() {
        assert_eq!(largest_pow2_below(&rat_int(1)).unwrap(), rat(1, 2));
        assert_eq!(largest_pow2_below(&rat(9, 256)).unwrap(), rat(1, 32));
        assert_eq!(largest_pow2_below(&rat_int(3)).unwrap(), rat_int(1));
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(qn in -50i64..50, qd in 1i64..20, rn in 0i64..400, rd in 1i64..40) {
            let r = Radical::new(rat(qn, qd), rat(rn, rd)).unwrap();
            let again = Radical::new(r.coeff().clone(),
                BigRat::from_integer(BigInt::from(r.radicand().clone()))).unwrap();
            prop_assert_eq!(r, again);
        }

        #[test]
        fn mul_commutative_and_square_consistent(
            an in -20i64..20, ar in 0i64..120,
            bn in -20i64..20, br in 0i64..120,
            cn in -20i64..20, cr in 0i64..120,
        ) {
            let a = Radical::new(rat_int(an), rat_int(ar)).unwrap();
            let b = Radical::new(rat_int(bn), rat_int(br)).unwrap();
            let c = Radical::new(rat_int(cn), rat_int(cr)).unwrap();
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            // (a*b)^2 computed rationally equals a^2 * b^2
            prop_assert_eq!((&a * &b).square(), a.square() * b.square());
        }

        #[test]
        fn nonzero_sums_separate_from_zero(
            c2 in -9i64..=9, c3 in -9i64..=9, c5 in -9i64..=9,
        ) {
            prop_assume!(c2 != 0 || c3 != 0 || c5 != 0);
            let mut s = RadicalSum::zero();
            for (c, r) in [(c2, 2), (c3, 3), (c5, 5)] {
                s.add_radical(&Radical::new(rat_int(c), rat_int(r)).unwrap());
            }
            prop_assert!(!s.is_zero());
            prop_assert_ne!(s.signum().unwrap(), 0);
        }

        #[test]
        fn enclosure_straddles_square(qn in -30i64..30, r in 0i64..200, bits in 4u32..48) {
            let v = Radical::new(rat_int(qn), rat_int(r)).unwrap();
            let iv = v.enclose(bits);
            prop_assert!(iv.width() <= pow2(-(bits as i64)));
            // v^2 is rational: the squared interval must straddle it
            let sq = v.square();
            let (a, b) = (&iv.lo * &iv.lo, &iv.hi * &iv.hi);
            let lo = a.clone().min(b.clone());
            let hi = a.max(b);
            if !iv.contains_zero() {
                prop_assert!(lo <= sq && sq <= hi);
            } else {
                prop_assert!(sq <= hi);
            }
        }
    }
}
