//! The comb family: a continuum of pairwise orthogonal sequences inside
//! every `l_p` with `p > 2`, plus its full-support variant.
//!
//! Each element follows a branch of the binary tree together with the
//! nodes just off the branch; pairwise disjoint index blocks `F_s` of
//! size `k_n` are attached to the tree nodes in length-then-lexicographic
//! order, consecutively.  Weights are `±ε_n = ±√(r_n/k_n)` with
//! `r_0 = 1`, `r_{n+1} = Σ_{i≤n} r_i`, and `k_n` minimal with
//! `k_n > r_n` and `k_n^{p_n/2-1} ≥ n²·r_n^{p_n/2}` (checked by exact
//! cross-powered integer comparison).
//!
//! Inner products and norms are always computed through per-level
//! aggregates (`2ε_n²k_n = 2r_n`), never by coordinate enumeration: the
//! blocks are far too large to materialize past level two.  Entry queries
//! at individual indices remain available at any laid-out index.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{
    pow2, rat, rat_int, rat_power_enclosure, BigRat, RatInterval, Radical, RadicalSum,
};
use crate::seq::{InnerCertificate, LevelRanges, PairMeta, SeqHandle, SupportInfo};
use crate::{Error, Result};

/// Exponent schedule for the levels.
#[derive(Clone, Debug)]
pub enum PChoice {
    /// `p_n = 2 + 1/(n+1)`.
    Default,
    /// Explicit exponents, strictly decreasing, each greater than 2.
    Explicit(Vec<BigRat>),
}

impl PChoice {
    fn exponent(&self, n: u32) -> Result<BigRat> {
        match self {
            PChoice::Default => Ok(rat_int(2) + rat(1, n as i64 + 1)),
            PChoice::Explicit(v) => v
                .get(n as usize)
                .cloned()
                .ok_or_else(|| Error::InvalidParam(String::from("p schedule too short"))),
        }
    }
}

/// `true` iff `k^(p/2 - 1) ≥ n² · r^(p/2)` with all exponent denominators
/// cleared: writing `p = a/b` in lowest terms, the two sides are raised to
/// `2b`, giving the integer comparison `k^(a-2b) ≥ n^(4b) · r^a`.
pub fn k_condition_holds(n: u32, r: &BigUint, k: &BigUint, p: &BigRat) -> Result<bool> {
    let a: u32 = p
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidParam(String::from("exponent numerator too large")))?;
    let b: u32 = p
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidParam(String::from("exponent denominator too large")))?;
    if a <= 2 * b {
        return Err(Error::InvalidParam(String::from("p must exceed 2")));
    }
    let lhs = k.pow(a - 2 * b);
    let rhs = BigUint::from(n).pow(4 * b) * r.pow(a);
    Ok(lhs >= rhs)
}

fn minimal_k(n: u32, r: &BigUint, p: &BigRat) -> Result<BigUint> {
    let a: u32 = p.numer().to_u32().unwrap();
    let b: u32 = p.denom().to_u32().unwrap();
    if a <= 2 * b {
        return Err(Error::InvalidParam(String::from("p must exceed 2")));
    }
    let m = a - 2 * b;
    let rhs = BigUint::from(n).pow(4 * b) * r.pow(a);
    let floor = r + BigUint::one();
    if rhs.is_zero() {
        return Ok(floor);
    }
    // minimal k with k^m >= rhs
    let mut k = rhs.nth_root(m);
    if k.pow(m) < rhs {
        k += BigUint::one();
    }
    Ok(k.max(floor))
}

/// Level tables and block layout of the comb family.
#[derive(Clone, Debug)]
pub struct CombParams {
    depth: u32,
    p: Vec<BigRat>,
    r: Vec<BigUint>,
    k: Vec<BigUint>,
    eps_sq: Vec<BigRat>,
    /// `offsets[n]` is the first index of level `n`; the final entry is
    /// the total laid-out length.
    offsets: Vec<BigUint>,
}

impl CombParams {
    /// Builds the tables for levels `0..=depth`.  With a budget, the
    /// layout must fit within it.
    pub fn new(depth: u32, p_choice: &PChoice, budget: Option<&BigUint>) -> Result<CombParams> {
        let mut p = Vec::new();
        let mut r: Vec<BigUint> = Vec::new();
        let mut k = Vec::new();
        let mut eps_sq = Vec::new();
        let mut offsets = Vec::new();
        offsets.push(BigUint::zero());
        let mut prev_p: Option<BigRat> = None;
        for n in 0..=depth {
            let pn = p_choice.exponent(n)?;
            if pn <= rat_int(2) {
                return Err(Error::InvalidParam(String::from("p_n must exceed 2")));
            }
            if let Some(prev) = &prev_p {
                if &pn >= prev {
                    return Err(Error::InvalidParam(String::from(
                        "p schedule must be strictly decreasing",
                    )));
                }
            }
            prev_p = Some(pn.clone());
            let rn = if n == 0 {
                BigUint::one()
            } else {
                r.iter().sum()
            };
            let kn = minimal_k(n, &rn, &pn)?;
            debug_assert!(k_condition_holds(n, &rn, &kn, &pn)?);
            eps_sq.push(BigRat::new(
                BigInt::from(rn.clone()),
                BigInt::from(kn.clone()),
            ));
            let width = (BigUint::one() << n as usize) * &kn;
            let end = offsets.last().unwrap() + width;
            if let Some(b) = budget {
                if &end > b {
                    return Err(Error::BlockBudgetExceeded { level: n });
                }
            }
            offsets.push(end);
            p.push(pn);
            r.push(rn);
            k.push(kn);
        }
        Ok(CombParams {
            depth,
            p,
            r,
            k,
            eps_sq,
            offsets,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn r_table(&self) -> &[BigUint] {
        &self.r
    }

    pub fn k_table(&self) -> &[BigUint] {
        &self.k
    }

    pub fn p_table(&self) -> &[BigRat] {
        &self.p
    }

    pub fn eps_sq_table(&self) -> &[BigRat] {
        &self.eps_sq
    }

    /// First index of level `n`.
    pub fn level_offset(&self, n: u32) -> &BigUint {
        &self.offsets[n as usize]
    }

    /// Total number of laid-out indices.
    pub fn total_len(&self) -> &BigUint {
        self.offsets.last().unwrap()
    }

    /// `ε_n` as a normalized radical.
    pub fn eps(&self, n: u32) -> Result<Radical> {
        Radical::sqrt_of(self.eps_sq[n as usize].clone())
    }

    /// The weight on the root block, `√2·ε_0`.
    pub fn root_weight(&self) -> Result<Radical> {
        Radical::sqrt_of(rat_int(2) * &self.eps_sq[0])
    }

    /// Start of the block of node `s` (given as its level and
    /// lexicographic rank among `2^level` nodes).
    pub fn block_start(&self, level: u32, rank: &BigUint) -> BigUint {
        &self.offsets[level as usize] + rank * &self.k[level as usize]
    }

    /// Locates the block containing index `m`: (level, node rank).
    pub fn block_of(&self, m: &BigUint) -> Result<(u32, BigUint)> {
        if m >= self.total_len() {
            return Err(Error::IndexOutOfRange);
        }
        let mut level = 0u32;
        while &self.offsets[level as usize + 1] <= m {
            level += 1;
        }
        let rank = (m - &self.offsets[level as usize]) / &self.k[level as usize];
        Ok((level, rank))
    }
}

/// Tail rule for extending a finite 0/1 prefix to a full branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    AllOnes,
    AllZeros,
}

/// A branch of the binary tree: a finite prefix plus an extension rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombPath {
    bits: Vec<bool>,
    tail: Tail,
}

impl CombPath {
    pub fn new(bits: Vec<bool>, tail: Tail) -> CombPath {
        CombPath { bits, tail }
    }

    /// Prefix bits with the default all-ones tail.
    pub fn from_bits(bits: &[bool]) -> CombPath {
        CombPath {
            bits: bits.to_vec(),
            tail: Tail::AllOnes,
        }
    }

    pub fn bit(&self, n: u32) -> bool {
        match self.bits.get(n as usize) {
            Some(&b) => b,
            None => matches!(self.tail, Tail::AllOnes),
        }
    }

    pub fn prefix_len(&self) -> usize {
        self.bits.len()
    }

    /// Lexicographic rank of `x↾len` among the nodes of its level.
    fn node_rank(&self, len: u32) -> BigUint {
        let mut rank = BigUint::zero();
        for n in 0..len {
            rank <<= 1;
            if self.bit(n) {
                rank += BigUint::one();
            }
        }
        rank
    }

    /// Rank of the off-branch sibling `(x↾(len-1))⌢(1-x(len-1))`.
    fn sibling_rank(&self, len: u32) -> BigUint {
        let own = self.node_rank(len);
        // flip the last bit
        if self.bit(len - 1) {
            own - BigUint::one()
        } else {
            own + BigUint::one()
        }
    }

    /// First index at which the two branches differ; `None` if equal.
    pub fn divergence(&self, other: &CombPath) -> Option<u32> {
        let max = self.prefix_len().max(other.prefix_len()) as u32;
        (0..=max).find(|&n| self.bit(n) != other.bit(n))
    }
}

/// Entry of the element `y_x` at laid-out index `m`.
pub fn comb_entry(params: &CombParams, x: &CombPath, m: &BigUint) -> Result<Radical> {
    let (level, rank) = params.block_of(m)?;
    if level == 0 {
        return params.root_weight();
    }
    if rank == x.node_rank(level) {
        return params.eps(level);
    }
    if rank == x.sibling_rank(level) {
        return Ok(-&params.eps(level)?);
    }
    Ok(Radical::zero())
}

/// Exact partial inner sum of two comb elements through the end of level
/// `upto_level`, computed from per-level aggregates.
pub fn aggregate_partial(
    params: &CombParams,
    x: &CombPath,
    y: &CombPath,
    upto_level: u32,
) -> Result<BigRat> {
    if upto_level > params.depth {
        return Err(Error::DepthExhausted {
            needed: upto_level as usize,
            built: params.depth as usize,
        });
    }
    let div = x.divergence(y);
    let mut acc = BigRat::zero();
    for n in 0..=upto_level {
        let two_rn = rat_int(2) * BigRat::from_integer(BigInt::from(params.r[n as usize].clone()));
        match div {
            None => acc += two_rn,
            Some(nd) => {
                if n <= nd {
                    acc += two_rn;
                } else if n == nd + 1 {
                    acc -= two_rn;
                }
                // levels beyond nd+1: blocks disjoint, contribution zero
            }
        }
    }
    Ok(acc)
}

/// Certified inner product of two comb elements.
///
/// Distinct branches telescope to an exact zero stabilizing at the end of
/// the level just past their divergence; a branch against itself diverges
/// with a strictly increasing mark schedule.
pub fn comb_inner(params: &CombParams, x: &CombPath, y: &CombPath) -> Result<InnerCertificate> {
    match x.divergence(y) {
        None => {
            let mut marks = Vec::new();
            let mut acc = BigRat::zero();
            for n in 0..=params.depth {
                acc += rat_int(2) * BigRat::from_integer(BigInt::from(params.r[n as usize].clone()));
                marks.push((params.offsets[n as usize + 1].clone(), acc.clone()));
            }
            Ok(InnerCertificate::Divergent { marks })
        }
        Some(nd) => {
            if nd + 1 > params.depth {
                return Err(Error::DepthExhausted {
                    needed: nd as usize + 1,
                    built: params.depth as usize,
                });
            }
            let total = aggregate_partial(params, x, y, nd + 1)?;
            debug_assert!(total.is_zero());
            Ok(InnerCertificate::Exact {
                value: RadicalSum::from_rational(total),
                stable_from: params.offsets[nd as usize + 2].clone(),
            })
        }
    }
}

/// `l_p` report for a comb element: first certified level, enclosed
/// partial sum below it, and the `Σ_{n≥n0} 2/n²` tail bound.
#[derive(Clone, Debug)]
pub struct CombLpReport {
    pub n0: u32,
    pub partial: RatInterval,
    pub tail_bound: BigRat,
}

/// Reports `Σ_m |y_x(m)|^p` for `p > 2`.
///
/// `n0` is the first level (at least 1) whose exponent drops strictly
/// below `p`; from there each level contributes at most
/// `2·ε_n^{p_n}·k_n ≤ 2/n²` because `ε_n < 1`, so the tail is bounded by
/// `Σ_{n≥n0} 2/n²` (closed over-approximation `2/(n0-1)`, or 4 when
/// `n0 = 1`).
pub fn comb_lp_report(
    params: &CombParams,
    _x: &CombPath,
    p: &BigRat,
    bits: u32,
) -> Result<CombLpReport> {
    if p <= &rat_int(2) {
        return Err(Error::InvalidParam(String::from(
            "p must exceed 2: every element has divergent square sum",
        )));
    }
    let first = (0..=params.depth).find(|&n| &params.p[n as usize] < p);
    let Some(first) = first else {
        return Err(Error::DepthExhausted {
            needed: params.depth as usize + 1,
            built: params.depth as usize,
        });
    };
    let n0 = first.max(1);
    let half_p = p / rat_int(2);
    let mut partial = RatInterval::point(BigRat::zero());
    for n in 0..n0 {
        let kn = BigRat::from_integer(BigInt::from(params.k[n as usize].clone()));
        let (base, weight_count) = if n == 0 {
            // one block of k_0 entries of magnitude sqrt(2)*eps_0
            (rat_int(2) * &params.eps_sq[0], kn)
        } else {
            // two blocks of k_n entries of magnitude eps_n
            (params.eps_sq[n as usize].clone(), rat_int(2) * kn)
        };
        let enclosed = rat_power_enclosure(&base, &half_p, bits + 8)?;
        partial = partial.add(&enclosed.scale(&weight_count));
    }
    let tail_bound = if n0 == 1 {
        rat_int(4)
    } else {
        rat(2, n0 as i64 - 1)
    };
    Ok(CombLpReport {
        n0,
        partial,
        tail_bound,
    })
}

/// Block-structured support descriptor of a comb element, covering the
/// laid-out levels.
fn comb_support(params: &CombParams, x: &CombPath) -> SupportInfo {
    let mut levels = Vec::new();
    levels.push(LevelRanges {
        level: 0,
        ranges: alloc::vec![(BigUint::zero(), params.k[0].clone())],
    });
    for level in 1..=params.depth {
        let s = params.block_start(level, &x.node_rank(level));
        let t = params.block_start(level, &x.sibling_rank(level));
        let kn = &params.k[level as usize];
        levels.push(LevelRanges {
            level,
            ranges: alloc::vec![(s.clone(), s + kn), (t.clone(), t + kn)],
        });
    }
    SupportInfo::Blocks(levels)
}

/// A handle for `y_x`, valid on the laid-out index range.
pub fn comb_handle(params: &Arc<CombParams>, x: &CombPath, id: &str) -> SeqHandle {
    let p = Arc::clone(params);
    let path = x.clone();
    SeqHandle::new(
        id,
        alloc::boxed::Box::new(move |m: &BigUint| {
            comb_entry(&p, &path, m).unwrap_or_else(|_| Radical::zero())
        }),
        comb_support(params, x),
        Some(params.total_len().clone()),
    )
}

/// Builds a handle pair with the disjoint-beyond metadata implied by the
/// divergence level attached.
pub fn comb_handle_pair(
    params: &Arc<CombParams>,
    x: &CombPath,
    y: &CombPath,
) -> Result<(SeqHandle, SeqHandle)> {
    let mut hx = comb_handle(params, x, "comb-x");
    let hy = comb_handle(params, y, "comb-y");
    if let Some(nd) = x.divergence(y) {
        if nd + 2 <= params.depth + 1 {
            let stable = params.offsets[(nd + 2).min(params.depth + 1) as usize].clone();
            hx.attach_meta("comb-y", PairMeta::DisjointBeyond(stable));
        }
    }
    Ok((hx, hy))
}

/// Brute-force oracle for the minimal `k_n`: scan upward from `r_n + 1`
/// using the exact cross-powered comparison.  Test support; quadratic in
/// the answer, fine for small levels.
pub fn minimal_k_oracle(n: u32, r: &BigUint, p: &BigRat) -> Result<BigUint> {
    let mut k = r + BigUint::one();
    loop {
        if k_condition_holds(n, r, &k, p)? {
            return Ok(k);
        }
        k += BigUint::one();
    }
}

// ---------------------------------------------------------------------
// Full-support variant
// ---------------------------------------------------------------------

/// The full-support comb family: one index per tree node (heap layout,
/// node `j` of level `i` at index `2^i - 1 + j`), off-comb weights
/// `a_i = 2^{-4i}`, comb weights `±b_i` with `b_0` on the root, `+b_i` on
/// the branch node and `-b_i` on the tooth.
///
/// `b_{n+1}²` is solved exactly from
///
/// ```text
/// b_0² + Σ_{i=1}^{n} 2b_i²  -  2b_{n+1}²
///      + Σ_{i=1}^{n+1} a_i²(2^i - 2)  +  Σ_{i>n+1} a_i²(2^i - 4)  =  0
/// ```
///
/// which is the inner product of two elements diverging at level `n`,
/// aggregated per level from the heap layout: level 0 contributes only
/// the shared root `b_0²` (the root is on every comb, so no `a_0` term
/// appears), levels up to the divergence share branch and tooth, the
/// level just past it crosses them, and deeper levels meet in the
/// `2^i - 4` nodes off both combs while the `±b_i·a_i` cross terms cancel
/// pairwise.  The infinite tail is an exact geometric rational.
#[derive(Clone, Debug)]
pub struct FullSupportComb {
    depth: u32,
    a_sq: Vec<BigRat>,
    b_sq: Vec<BigRat>,
    b_rad: Vec<Radical>,
}

/// `Σ_{i>m} a_i²(2^i - 4)` in closed form (`a_i = 2^{-4i}`).
pub fn offcomb_tail(m: u32) -> BigRat {
    let m1 = m as i64 + 1;
    pow2(-7 * m1) * rat(128, 127) - rat_int(4) * pow2(-8 * m1) * rat(256, 255)
}

impl FullSupportComb {
    pub fn new(depth: u32, b0: &BigRat) -> Result<FullSupportComb> {
        if !b0.is_positive() {
            return Err(Error::InvalidParam(String::from("b0 must be positive")));
        }
        let a_sq: Vec<BigRat> = (0..=depth as i64).map(|i| pow2(-8 * i)).collect();
        let mut b_sq = Vec::with_capacity(depth as usize + 1);
        b_sq.push(b0 * b0);
        for n in 0..depth {
            let mut s = b_sq[0].clone();
            for b in &b_sq[1..=n as usize] {
                s += rat_int(2) * b;
            }
            for i in 1..=(n as i64 + 1) {
                s += pow2(-8 * i) * rat_int((1i64 << i) - 2);
            }
            s += offcomb_tail(n + 1);
            b_sq.push(s / rat_int(2));
        }
        let b_rad = b_sq
            .iter()
            .map(|sq| Radical::sqrt_of(sq.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(FullSupportComb {
            depth,
            a_sq,
            b_sq,
            b_rad,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn b_sq(&self, i: u32) -> &BigRat {
        &self.b_sq[i as usize]
    }

    pub fn a(&self, i: u32) -> BigRat {
        pow2(-4 * i as i64)
    }

    pub fn b(&self, i: u32) -> Result<Radical> {
        Ok(self.b_rad[i as usize].clone())
    }

    /// Recomputes the defining identity at stage `n` from scratch; zero
    /// exactly when the stored `b` table is consistent.
    pub fn residual(&self, n: u32) -> Result<BigRat> {
        if n + 1 > self.depth {
            return Err(Error::DepthExhausted {
                needed: n as usize + 1,
                built: self.depth as usize,
            });
        }
        let mut s = self.b_sq[0].clone();
        for i in 1..=n as usize {
            s += rat_int(2) * &self.b_sq[i];
        }
        s -= rat_int(2) * &self.b_sq[n as usize + 1];
        for i in 1..=(n as i64 + 1) {
            s += pow2(-8 * i) * rat_int((1i64 << i) - 2);
        }
        s += offcomb_tail(n + 1);
        Ok(s)
    }

    /// Value of the element for branch `x` at heap index `m`.
    pub fn entry(&self, x: &CombPath, m: u64) -> Result<Radical> {
        let total = (1u64 << (self.depth as u64 + 1)) - 1;
        if m >= total {
            return Err(Error::IndexOutOfRange);
        }
        let level = (64 - (m + 1).leading_zeros() - 1) as u32;
        let node = m + 1 - (1 << level);
        self.entry_by_node(x, level, node)
    }

    pub fn entry_by_node(&self, x: &CombPath, level: u32, node: u64) -> Result<Radical> {
        if level > self.depth {
            return Err(Error::IndexOutOfRange);
        }
        if level == 0 {
            return self.b(0);
        }
        let own = x
            .node_rank(level)
            .to_u64()
            .ok_or(Error::IndexOutOfRange)?;
        let sib = x
            .sibling_rank(level)
            .to_u64()
            .ok_or(Error::IndexOutOfRange)?;
        if node == own {
            self.b(level)
        } else if node == sib {
            Ok(-&self.b(level)?)
        } else {
            Ok(Radical::from_rational(self.a(level)))
        }
    }

    /// Exact inner partial sum of two diverged elements through level `L`
    /// via per-level net aggregates (the `±b_i·a_i` cross terms cancel
    /// within each level, so the net is rational).
    pub fn pair_partial(&self, x: &CombPath, y: &CombPath, upto_level: u32) -> Result<BigRat> {
        if upto_level > self.depth {
            return Err(Error::DepthExhausted {
                needed: upto_level as usize,
                built: self.depth as usize,
            });
        }
        let nd = x.divergence(y);
        let mut acc = self.b_sq[0].clone();
        for i in 1..=upto_level {
            let count_off = rat_int((1i64 << i) - 2);
            let count_off_both = rat_int(((1i64 << i) - 4).max(0));
            match nd {
                None => {
                    acc += rat_int(2) * &self.b_sq[i as usize] + count_off * &self.a_sq[i as usize];
                }
                Some(n) => {
                    if i <= n {
                        acc += rat_int(2) * &self.b_sq[i as usize]
                            + count_off * &self.a_sq[i as usize];
                    } else if i == n + 1 {
                        acc += rat_int(-2) * &self.b_sq[i as usize]
                            + count_off * &self.a_sq[i as usize];
                    } else {
                        acc += count_off_both * &self.a_sq[i as usize];
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Partial certificate for a diverged pair at depth `L`: the partial
    /// sums from the crossing level on, with the strictly shrinking
    /// geometric tail `T(L)`.
    pub fn pair_certificate(
        &self,
        x: &CombPath,
        y: &CombPath,
        upto_level: u32,
    ) -> Result<InnerCertificate> {
        let Some(nd) = x.divergence(y) else {
            return Err(Error::InvalidParam(String::from(
                "certificate requires distinct branches",
            )));
        };
        let mut sums = Vec::new();
        for level in (nd + 1)..=upto_level {
            sums.push(RadicalSum::from_rational(self.pair_partial(x, y, level)?));
        }
        Ok(InnerCertificate::Partial {
            sums,
            tail_bound: offcomb_tail(upto_level),
        })
    }

    /// The four `±b_i·a_i` cross terms of one level past divergence, as an
    /// exact radical sum (must cancel to zero).
    pub fn cross_terms(&self, x: &CombPath, y: &CombPath, level: u32) -> Result<RadicalSum> {
        let mut acc = RadicalSum::zero();
        for (p, q) in [(x, y), (y, x)] {
            for rank in [p.node_rank(level), p.sibling_rank(level)] {
                let node = rank.to_u64().ok_or(Error::IndexOutOfRange)?;
                let vp = self.entry_by_node(p, level, node)?;
                let vq = self.entry_by_node(q, level, node)?;
                // only count nodes where q is off-comb (pure cross term)
                if vq.as_rational().is_some() {
                    acc.add_radical(&(&vp * &vq));
                }
            }
        }
        Ok(acc)
    }

    /// Total handle over the heap-laid-out indices; full support.
    pub fn handle(self: &Arc<Self>, x: &CombPath, id: &str) -> SeqHandle {
        let fam = Arc::clone(self);
        let path = x.clone();
        let total = BigUint::from((1u64 << (self.depth as u64 + 1)) - 1);
        SeqHandle::new(
            id,
            alloc::boxed::Box::new(move |m: &BigUint| {
                m.to_u64()
                    .and_then(|m| fam.entry(&path, m).ok())
                    .unwrap_or_else(Radical::zero)
            }),
            SupportInfo::Full,
            Some(total),
        )
    }
}
