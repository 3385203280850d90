//! Finite prefixes, infinite-sequence handles with support and
//! convergence metadata, and certified inner-product / `l_p` reporting.
//!
//! A handle's value rule must be pure and total on the declared range;
//! convergence is never inferred — it is supplied by the family that
//! created the handle, either as a `disjoint beyond N` fact or as an
//! explicit modulus, and every certificate records which one was used.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{pow2, rat_power_enclosure, rat_pow, BigRat, RatInterval, Radical, RadicalSum};
use crate::{Error, Result};

/// A finite sequence prefix with normalized radical entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixVec {
    entries: Vec<Radical>,
}

impl PrefixVec {
    pub fn new(entries: Vec<Radical>) -> PrefixVec {
        PrefixVec { entries }
    }

    pub fn from_rationals(vals: &[BigRat]) -> PrefixVec {
        PrefixVec {
            entries: vals
                .iter()
                .map(|q| Radical::from_rational(q.clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Radical] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &Radical {
        &self.entries[i]
    }

    pub fn push(&mut self, r: Radical) {
        self.entries.push(r);
    }

    /// Exact inner product with another prefix (over the shorter length).
    pub fn inner(&self, other: &PrefixVec) -> RadicalSum {
        let mut acc = RadicalSum::zero();
        for (a, b) in self.entries.iter().zip(&other.entries) {
            acc.add_radical(&(a * b));
        }
        acc
    }

    /// Exact inner product with a rational vector.
    pub fn inner_rationals(&self, x: &[BigRat]) -> RadicalSum {
        let mut acc = RadicalSum::zero();
        for (a, q) in self.entries.iter().zip(x) {
            acc.add_radical(&(a * &Radical::from_rational(q.clone())));
        }
        acc
    }

    /// `Σ entry²`, always rational.
    pub fn norm_sq(&self) -> BigRat {
        self.entries.iter().map(Radical::square).sum()
    }

    /// All entries rational? Then return them.
    pub fn as_rationals(&self) -> Option<Vec<BigRat>> {
        self.entries
            .iter()
            .map(|e| e.as_rational().cloned())
            .collect()
    }
}

/// Declared support of a sequence handle.
#[derive(Clone, Debug)]
pub enum SupportInfo {
    /// Explicit finite support.
    Finite(BTreeSet<u64>),
    /// Every coordinate is nonzero.
    Full,
    /// Per-level index ranges (half-open), e.g. the blocks of a comb.
    Blocks(Vec<LevelRanges>),
}

#[derive(Clone, Debug)]
pub struct LevelRanges {
    pub level: u32,
    pub ranges: Vec<(BigUint, BigUint)>,
}

/// Pair metadata a family attaches between two of its handles.
pub enum PairMeta {
    /// Beyond `N`, at most one of the two sequences is nonzero at each
    /// coordinate; all inner partial sums are constant from `N` on.
    DisjointBeyond(BigUint),
    /// `modulus(ε) = N` such that all partial inner sums beyond `N` vary
    /// by less than `ε`.
    Modulus(Box<dyn Fn(&BigRat) -> u64 + Send + Sync>),
}

/// An infinite-sequence handle: a pure index→value rule plus support and
/// per-partner convergence metadata.
pub struct SeqHandle {
    id: String,
    rule: Box<dyn Fn(&BigUint) -> Radical + Send + Sync>,
    support: SupportInfo,
    /// Rule is defined for indices below this bound (`None`: total).
    defined_to: Option<BigUint>,
    pair_meta: BTreeMap<String, PairMeta>,
}

impl SeqHandle {
    pub fn new(
        id: &str,
        rule: Box<dyn Fn(&BigUint) -> Radical + Send + Sync>,
        support: SupportInfo,
        defined_to: Option<BigUint>,
    ) -> SeqHandle {
        SeqHandle {
            id: id.to_owned(),
            rule,
            support,
            defined_to,
            pair_meta: BTreeMap::new(),
        }
    }

    /// A total handle for a finite prefix (zero beyond its length).
    pub fn from_prefix(id: &str, prefix: PrefixVec) -> SeqHandle {
        let support: BTreeSet<u64> = prefix
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(i, _)| i as u64)
            .collect();
        let entries: Vec<Radical> = prefix.entries().to_vec();
        SeqHandle::new(
            id,
            Box::new(move |m: &BigUint| match m.to_u64() {
                Some(i) if (i as usize) < entries.len() => entries[i as usize].clone(),
                _ => Radical::zero(),
            }),
            SupportInfo::Finite(support),
            None,
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn support(&self) -> &SupportInfo {
        &self.support
    }

    pub fn defined_to(&self) -> Option<&BigUint> {
        self.defined_to.as_ref()
    }

    pub fn attach_meta(&mut self, partner: &str, meta: PairMeta) {
        self.pair_meta.insert(partner.to_owned(), meta);
    }

    pub fn meta_for(&self, partner: &str) -> Option<&PairMeta> {
        self.pair_meta.get(partner)
    }

    /// Value at index `m`; out of the defined range is an error.
    pub fn value(&self, m: &BigUint) -> Result<Radical> {
        if let Some(bound) = &self.defined_to {
            if m >= bound {
                return Err(Error::IndexOutOfRange);
            }
        }
        Ok((self.rule)(m))
    }

    fn value_u64(&self, m: u64) -> Result<Radical> {
        self.value(&BigUint::from(m))
    }

    /// Finite candidate index set below `upto`, when the support descriptor
    /// provides one.
    fn support_below(&self, upto: u64) -> Option<BTreeSet<u64>> {
        match &self.support {
            SupportInfo::Finite(s) => Some(s.iter().copied().filter(|&i| i < upto).collect()),
            SupportInfo::Full => None,
            SupportInfo::Blocks(levels) => {
                let mut out = BTreeSet::new();
                let bound = BigUint::from(upto);
                for lv in levels {
                    for (a, b) in &lv.ranges {
                        let mut i = a.clone();
                        while i < *b && i < bound {
                            out.insert(i.to_u64().expect("below u64 bound"));
                            i += BigUint::one();
                        }
                    }
                }
                Some(out)
            }
        }
    }
}

/// An exact inner-product verdict.
#[derive(Clone, Debug)]
pub enum InnerCertificate {
    /// All partial sums beyond `stable_from` equal `value` exactly.
    Exact {
        value: RadicalSum,
        stable_from: BigUint,
    },
    /// Sampled partial sums, the last of which is within `tail_bound` of
    /// every later partial sum (by the declared modulus or tail formula).
    Partial {
        sums: Vec<RadicalSum>,
        tail_bound: BigRat,
    },
    /// Partial sums escape every bound: `marks` lists (index, lower bound
    /// on |partial sum| at that index) along a strictly increasing
    /// schedule.
    Divergent { marks: Vec<(BigUint, BigRat)> },
}

impl InnerCertificate {
    pub fn exact_value(&self) -> Option<&RadicalSum> {
        match self {
            InnerCertificate::Exact { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, InnerCertificate::Exact { value, .. } if value.is_zero())
    }
}

const ENUM_LIMIT: u64 = 1 << 22;

/// Exact `Σ_{n<upto} x(n)·y(n)`.
pub fn inner_partial(x: &SeqHandle, y: &SeqHandle, upto: u64) -> Result<RadicalSum> {
    let mut acc = RadicalSum::zero();
    match (x.support_below(upto), y.support_below(upto)) {
        (Some(sx), Some(sy)) => {
            for &i in sx.intersection(&sy) {
                acc.add_radical(&(&x.value_u64(i)? * &y.value_u64(i)?));
            }
        }
        (Some(s), None) | (None, Some(s)) => {
            for &i in &s {
                acc.add_radical(&(&x.value_u64(i)? * &y.value_u64(i)?));
            }
        }
        (None, None) => {
            if upto > ENUM_LIMIT {
                return Err(Error::EnumerationTooLarge);
            }
            for i in 0..upto {
                acc.add_radical(&(&x.value_u64(i)? * &y.value_u64(i)?));
            }
        }
    }
    Ok(acc)
}

/// Certified inner product from the attached pair metadata.
///
/// With `disjoint-beyond(N)` the certificate is exact with
/// `stable_from = N`; with a modulus it is a partial certificate whose
/// tail bound is the requested `eps`.  Missing metadata is an error: the
/// caller must supply a modulus.
pub fn inner_certified(x: &SeqHandle, y: &SeqHandle) -> Result<InnerCertificate> {
    inner_certified_with(x, y, &pow2(-16))
}

pub fn inner_certified_with(
    x: &SeqHandle,
    y: &SeqHandle,
    eps: &BigRat,
) -> Result<InnerCertificate> {
    let meta = x.meta_for(y.id()).or_else(|| y.meta_for(x.id()));
    let meta = match meta {
        Some(m) => m,
        None => {
            // finite supports imply disjointness beyond the larger support
            if let (SupportInfo::Finite(sx), SupportInfo::Finite(sy)) = (&x.support, &y.support) {
                let n = sx.iter().chain(sy.iter()).max().map_or(0, |m| m + 1);
                let value = inner_partial(x, y, n)?;
                return Ok(InnerCertificate::Exact {
                    value,
                    stable_from: BigUint::from(n),
                });
            }
            return Err(Error::Unverifiable(String::from(
                "no pair metadata (disjoint-beyond or modulus)",
            )));
        }
    };
    match meta {
        PairMeta::DisjointBeyond(n) => {
            let upto = n.to_u64().ok_or(Error::EnumerationTooLarge)?;
            let value = inner_partial(x, y, upto)?;
            Ok(InnerCertificate::Exact {
                value,
                stable_from: n.clone(),
            })
        }
        PairMeta::Modulus(f) => {
            let n = f(eps);
            let mut sums = Vec::new();
            let mut step = n.max(1) / 4;
            if step == 0 {
                step = 1;
            }
            let mut at = 0u64;
            while at < n {
                sums.push(inner_partial(x, y, at)?);
                at += step;
            }
            sums.push(inner_partial(x, y, n)?);
            Ok(InnerCertificate::Partial {
                sums,
                tail_bound: eps.clone(),
            })
        }
    }
}

/// An `l_p` partial-sum report: an interval enclosing
/// `Σ_{n<upto} |x(n)|^p`, plus a certified tail bound when the family
/// supplies one.
#[derive(Clone, Debug)]
pub struct LpReport {
    pub partial: RatInterval,
    pub tail_bound: Option<BigRat>,
}

/// Encloses `Σ_{n<upto} |x(n)|^p` for positive rational `p`.
///
/// The partial sum is exact (a point interval) when `p` is an even
/// integer, or when `p` is an integer and all touched entries are
/// rational; otherwise it is a directed enclosure at `bits` precision.
pub fn lp_report(x: &SeqHandle, p: &BigRat, upto: u64, bits: u32) -> Result<LpReport> {
    if !p.is_positive() {
        return Err(Error::InvalidParam(String::from("p must be positive")));
    }
    let indices: Vec<u64> = match x.support_below(upto) {
        Some(s) => s.into_iter().collect(),
        None => {
            if upto > ENUM_LIMIT {
                return Err(Error::EnumerationTooLarge);
            }
            (0..upto).collect()
        }
    };
    let mut extra = 0u32;
    while (1u64 << extra) < indices.len().max(1) as u64 {
        extra += 1;
    }
    let per_term = bits + extra + 1;
    let mut acc = RatInterval::point(BigRat::zero());
    let even = p.is_integer() && (p.numer() % num_bigint::BigInt::from(2)).is_zero();
    for i in indices {
        let v = x.value_u64(i)?;
        if v.is_zero() {
            continue;
        }
        let term = if even {
            // |v|^p = (v^2)^(p/2), exact
            let e: i64 = (p.numer() / num_bigint::BigInt::from(2))
                .to_i64()
                .ok_or_else(|| Error::InvalidParam(String::from("p too large")))?;
            RatInterval::point(rat_pow(&v.square(), e))
        } else if p.is_integer() && v.is_rational() {
            let e: i64 = p
                .numer()
                .to_i64()
                .ok_or_else(|| Error::InvalidParam(String::from("p too large")))?;
            RatInterval::point(rat_pow(&v.as_rational().unwrap().abs(), e))
        } else {
            // |v|^p = (v^2)^(p/2)
            let half_p = p / BigRat::from_integer(2.into());
            rat_power_enclosure(&v.square(), &half_p, per_term)?
        };
        acc = acc.add(&term);
    }
    Ok(LpReport {
        partial: acc,
        tail_bound: None,
    })
}

/// Pointwise `min(|x(n)|, |y(n)|)` for `n < upto`.
pub fn min_abs_seq(x: &SeqHandle, y: &SeqHandle, upto: u64) -> Result<PrefixVec> {
    let mut entries = Vec::with_capacity(upto as usize);
    for i in 0..upto {
        let a = x.value_u64(i)?.abs();
        let b = y.value_u64(i)?.abs();
        entries.push(if a.cmp_abs(&b) != core::cmp::Ordering::Greater {
            a
        } else {
            b
        });
    }
    Ok(PrefixVec::new(entries))
}

/// Outcome of a strong-orthogonality check with its evidence.
#[derive(Debug)]
pub struct StrongOrthogonality {
    pub verdict: bool,
    /// Declared bound past which the supports no longer intersect, when
    /// the descriptors prove the intersection finite.
    pub support_intersection_bound: Option<BigUint>,
    pub certificate: Option<InnerCertificate>,
}

/// True iff the declared supports provably intersect in a finite set and
/// the certified inner product is exactly zero.
pub fn strongly_orthogonal(x: &SeqHandle, y: &SeqHandle) -> Result<StrongOrthogonality> {
    if x.id() == y.id() {
        // a nonzero sequence is never strongly orthogonal to itself
        let cert = inner_certified(x, y).ok();
        return Ok(StrongOrthogonality {
            verdict: false,
            support_intersection_bound: None,
            certificate: cert,
        });
    }
    let bound: Option<BigUint> = match (&x.support, &y.support) {
        (SupportInfo::Finite(s), _) | (_, SupportInfo::Finite(s)) => {
            Some(BigUint::from(s.iter().max().map_or(0, |m| m + 1)))
        }
        _ => match x.meta_for(y.id()).or_else(|| y.meta_for(x.id())) {
            Some(PairMeta::DisjointBeyond(n)) => Some(n.clone()),
            _ => None,
        },
    };
    let Some(bound) = bound else {
        return Err(Error::Unverifiable(String::from(
            "support intersection not decidable from descriptors",
        )));
    };
    let cert = inner_certified(x, y)?;
    let verdict = cert.is_exact_zero();
    Ok(StrongOrthogonality {
        verdict,
        support_intersection_bound: Some(bound),
        certificate: Some(cert),
    })
}

/// Spot-checks a declared `disjoint-beyond(N)`: at sampled `m ≥ N` at most
/// one of the two values may be nonzero.
pub fn spot_check_disjoint_beyond(
    x: &SeqHandle,
    y: &SeqHandle,
    n: &BigUint,
    samples: u32,
) -> Result<bool> {
    let mut m = n.clone();
    for _ in 0..samples {
        if let Some(bound) = x.defined_to() {
            if &m >= bound {
                break;
            }
        }
        if let Some(bound) = y.defined_to() {
            if &m >= bound {
                break;
            }
        }
        let a = (x.rule)(&m);
        let b = (y.rule)(&m);
        if !a.is_zero() && !b.is_zero() {
            return Ok(false);
        }
        m += BigUint::one();
    }
    Ok(true)
}
