//! Finite sign conditions over nonzero rationals with partial-sum
//! requirements, Hadamard padding, doubling, and the staged build of a
//! full-support family whose height series diverges.
//!
//! A condition is a matrix of nonzero rationals whose columns come in two
//! kinds of segment: explicit columns, and padded ranges that repeat an
//! `ε`-scaled sign pattern (row `i` of the pattern takes sign `-1` on
//! columns whose bit `i` is set).  Padded ranges grow far beyond anything
//! enumerable — their widths are exact big integers — so partial sums and
//! their extrema over a pad are computed in closed form: a complete
//! repeat sums to zero for distinct rows and the intra-repeat prefix
//! stays within `±ε²·2^min(i,j)`, while equal (duplicated) rows
//! accumulate `ε²` per column monotonically.
//!
//! Requirements `({i,j}, k, ε)` demand `|Σ_{n<k} s_i s_j| < ε` and
//! `|Σ_{k≤n<l} s_i s_j| < ε` for every `l` up to the current width; both
//! are tracked incrementally during the build and re-verified from
//! scratch by [`SignCondition::verify`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::exact::{largest_pow2_below, rat, rat_int, rat_pow, BigRat, Radical};
use crate::seq::{SeqHandle, SupportInfo};
use crate::{Error, Result};

/// Pairwise-orthogonal `±1` rows: row `i` of length `2^h` takes `-1`
/// exactly on the columns whose bit `i` is set.  Each distinct pair
/// disagrees on half the columns, `2^h/4` per one-sided pattern.
pub fn hadamard_rows(h: u32) -> Vec<Vec<i8>> {
    let n = 1usize << h;
    (0..h as usize)
        .map(|i| {
            (0..n)
                .map(|t| if t >> i & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect()
}

/// The alternative pad block: an `h×h` matrix with `-δ` on the diagonal
/// and `ε` off it, `δ = (h-2)ε/2`; columns are pairwise orthogonal and
/// every entry is nonzero.  Requires `h ≥ 3`.
pub fn alt_pad_matrix(h: usize, eps: &BigRat) -> Result<Vec<Vec<BigRat>>> {
    if h < 3 {
        return Err(Error::InvalidParam(String::from(
            "alternative pad needs h >= 3 (the diagonal weight vanishes)",
        )));
    }
    if !eps.is_positive() {
        return Err(Error::InvalidParam(String::from("eps must be positive")));
    }
    let delta = rat_int(h as i64 - 2) * eps / rat_int(2);
    Ok((0..h)
        .map(|r| {
            (0..h)
                .map(|c| if r == c { -delta.clone() } else { eps.clone() })
                .collect()
        })
        .collect())
}

/// One run of columns of a condition matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    /// Explicit columns; each has one entry per row that existed when the
    /// segment was created (`dups` doublings ago).
    Explicit { dups: u32, cols: Vec<Vec<BigRat>> },
    /// `repeats` copies of the `ε`-scaled sign pattern on `h_pad` rows.
    Pad {
        h_pad: u32,
        dups: u32,
        eps: BigRat,
        repeats: BigUint,
    },
}

impl Segment {
    pub fn width(&self) -> BigUint {
        match self {
            Segment::Explicit { cols, .. } => BigUint::from(cols.len()),
            Segment::Pad { h_pad, repeats, .. } => repeats << *h_pad as usize,
        }
    }

    fn entry(&self, row: usize, col: &BigUint) -> BigRat {
        match self {
            Segment::Explicit { dups, cols } => {
                use num_traits::ToPrimitive;
                let c = col.to_usize().expect("explicit segments are enumerable");
                cols[c][row >> dups].clone()
            }
            Segment::Pad {
                h_pad, dups, eps, ..
            } => {
                let r = (row >> dups) as u64;
                let mask = (BigUint::one() << *h_pad as usize) - BigUint::one();
                let t = col & mask;
                if t.bit(r) {
                    -eps.clone()
                } else {
                    eps.clone()
                }
            }
        }
    }
}

/// Contribution of one segment to the running pair prefix: total over the
/// segment plus the extrema of the relative prefix within it.
struct SegmentPairSummary {
    total: BigRat,
    rel_max: BigRat,
    rel_min: BigRat,
}

fn pad_pair_summary(seg: &Segment, i: usize, j: usize) -> SegmentPairSummary {
    let Segment::Pad {
        h_pad, dups, eps, ..
    } = seg
    else {
        unreachable!("pad summary on explicit segment");
    };
    let _ = h_pad;
    let (a, b) = (i >> dups, j >> dups);
    let eps_sq = eps * eps;
    if a == b {
        let total = &eps_sq * BigRat::from_integer(BigInt::from(seg.width()));
        SegmentPairSummary {
            rel_max: total.clone(),
            rel_min: BigRat::zero(),
            total,
        }
    } else {
        let swing = eps_sq * rat_pow(&rat_int(2), a.min(b) as i64);
        SegmentPairSummary {
            total: BigRat::zero(),
            rel_max: swing.clone(),
            rel_min: -swing,
        }
    }
}

/// A requirement `({i,j}, k, ε)`: the pair's prefix up to the checkpoint
/// and every partial sum from the checkpoint on must stay strictly below
/// `ε` in magnitude.  States are recomputed from scratch by
/// [`SignCondition::verify`]; the build only keeps a certified lower
/// bound on the minimum slack.
#[derive(Clone, Debug)]
pub struct Requirement {
    pub i: usize,
    pub j: usize,
    pub k: BigUint,
    pub eps: BigRat,
    /// `|Σ_{n<k}|`, fixed when the requirement is added.
    pub prefix_abs: BigRat,
}

/// Metadata of one padded range.
#[derive(Clone, Debug)]
pub struct PadInfo {
    pub offset: BigUint,
    pub width: BigUint,
    pub eps: BigRat,
    pub delta: BigRat,
    pub h_pad: u32,
    pub repeats: BigUint,
}

/// A finite condition: `h` rows of nonzero rationals with requirements.
///
/// Pair and row sums are kept in a shared-accumulator form: most entries
/// of a fresh column are one common tiny value `t`, so each column adds
/// `t²` to a global accumulator once and only the `O(h)` pairs touching
/// the required rows receive corrections.  The true totals are
/// `pair_adj + t2_acc` and `row_adj + r2_acc`.
#[derive(Clone, Debug)]
pub struct SignCondition {
    h: usize,
    width: BigUint,
    segments: Vec<Segment>,
    reqs: Vec<Requirement>,
    pair_adj: BTreeMap<(usize, usize), BigRat>,
    t2_acc: BigRat,
    row_adj: Vec<BigRat>,
    r2_acc: BigRat,
    /// Certified lower bound on every requirement's slack (`None` while
    /// there are no requirements); each append subtracts at most half of
    /// it, so it stays positive.
    slack_lb: Option<BigRat>,
}

impl SignCondition {
    /// Seed condition from explicit nonzero rows of equal length.
    pub fn from_rows(rows: Vec<Vec<BigRat>>) -> Result<SignCondition> {
        let h = rows.len();
        if h == 0 {
            return Err(Error::InvalidParam(String::from("need at least one row")));
        }
        let n = rows[0].len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParam(String::from("ragged seed rows")));
        }
        if rows.iter().flatten().any(Zero::is_zero) {
            return Err(Error::InvalidParam(String::from(
                "seed entries must be nonzero",
            )));
        }
        let cols: Vec<Vec<BigRat>> = (0..n)
            .map(|c| rows.iter().map(|r| r[c].clone()).collect())
            .collect();
        let mut cond = SignCondition {
            h,
            width: BigUint::zero(),
            segments: Vec::new(),
            reqs: Vec::new(),
            pair_adj: (0..h)
                .flat_map(|i| ((i + 1)..h).map(move |j| ((i, j), BigRat::zero())))
                .collect(),
            t2_acc: BigRat::zero(),
            row_adj: alloc::vec![BigRat::zero(); h],
            r2_acc: BigRat::zero(),
            slack_lb: None,
        };
        for col in cols {
            cond.push_seed_column(col);
        }
        Ok(cond)
    }

    /// The default seed: rows `(1), (2), …, (h0)` of length 1.
    pub fn default_seed(h0: usize) -> Result<SignCondition> {
        SignCondition::from_rows((0..h0).map(|i| alloc::vec![rat_int(i as i64 + 1)]).collect())
    }

    pub fn rows(&self) -> usize {
        self.h
    }

    pub fn width(&self) -> &BigUint {
        &self.width
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.reqs
    }

    pub fn pair_total(&self, i: usize, j: usize) -> BigRat {
        if i == j {
            return &self.row_adj[i] + &self.r2_acc;
        }
        let key = (i.min(j), i.max(j));
        &self.pair_adj[&key] + &self.t2_acc
    }

    /// Entry `s_row(col)`.
    pub fn entry(&self, row: usize, col: &BigUint) -> Result<BigRat> {
        if row >= self.h || col >= &self.width {
            return Err(Error::IndexOutOfRange);
        }
        let mut off = BigUint::zero();
        for seg in &self.segments {
            let end = &off + seg.width();
            if col < &end {
                return Ok(seg.entry(row, &(col - off)));
            }
            off = end;
        }
        unreachable!("column inside width")
    }

    /// Working slack bound: below every requirement's true slack.
    fn sigma(&self) -> BigRat {
        self.slack_lb.clone().unwrap_or_else(|| rat_int(1))
    }

    fn store_column(&mut self, col: Vec<BigRat>) {
        match self.segments.last_mut() {
            Some(Segment::Explicit { dups: 0, cols }) => cols.push(col),
            _ => self.segments.push(Segment::Explicit {
                dups: 0,
                cols: alloc::vec![col],
            }),
        }
        self.width += BigUint::one();
    }

    /// Appends a dense column, updating every pair directly.  Only used
    /// for (small) seed matrices.
    fn push_seed_column(&mut self, col: Vec<BigRat>) {
        debug_assert_eq!(col.len(), self.h);
        for ((i, j), adj) in self.pair_adj.iter_mut() {
            *adj += &col[*i] * &col[*j];
        }
        for (i, adj) in self.row_adj.iter_mut().enumerate() {
            *adj += &col[i] * &col[i];
        }
        self.store_column(col);
    }

    /// Appends a column that is the common tiny value `t` everywhere
    /// except rows `i` and `j`: one accumulator add plus `O(h)`
    /// corrections.
    fn push_require_column(&mut self, i: usize, j: usize, vi: BigRat, vj: BigRat, t: BigRat) {
        let t_sq = &t * &t;
        for l in 0..self.h {
            if l == i || l == j {
                continue;
            }
            let key_i = (l.min(i), l.max(i));
            let key_j = (l.min(j), l.max(j));
            let ci = &vi * &t - &t_sq;
            let cj = &vj * &t - &t_sq;
            *self.pair_adj.get_mut(&key_i).unwrap() += ci;
            *self.pair_adj.get_mut(&key_j).unwrap() += cj;
        }
        let key = (i.min(j), i.max(j));
        *self.pair_adj.get_mut(&key).unwrap() += &vi * &vj - &t_sq;
        *self.row_adj.get_mut(i).unwrap() += &vi * &vi - &t_sq;
        *self.row_adj.get_mut(j).unwrap() += &vj * &vj - &t_sq;
        self.t2_acc += &t_sq;
        self.r2_acc += t_sq;
        let mut col = alloc::vec![t; self.h];
        col[i] = vi;
        col[j] = vj;
        self.store_column(col);
    }

    /// Extends by one column so that `({i,j}, N+1, ε)` can be promised.
    ///
    /// With `b = Σ_{n<N} s_i s_j ≠ 0`, row `i` takes `b` and row `j`
    /// takes `-1`, driving the pair's running sum to zero; with `b = 0`
    /// both take a tiny value whose product stays below `min(ε, slack)`.
    /// Every other row takes the largest power of two keeping all new
    /// products strictly inside every requirement's slack.  Old
    /// requirements on `{i,j}` survive because their tail sums collapse
    /// to the (already bounded) negated checkpoint prefix.
    pub fn require_pair(&mut self, i: usize, j: usize, eps: BigRat) -> Result<()> {
        if i == j || i >= self.h || j >= self.h {
            return Err(Error::InvalidParam(String::from("need two distinct rows")));
        }
        if !eps.is_positive() {
            return Err(Error::InvalidParam(String::from("eps must be positive")));
        }
        let (i, j) = (i.min(j), i.max(j));
        let b = self.pair_total(i, j);
        let sigma = self.sigma();
        debug_assert!(sigma.is_positive(), "slack bound exhausted");
        let (vi, vj) = if b.is_zero() {
            let eps_lb = largest_pow2_below(&eps)?;
            let bound = if eps_lb < sigma { eps_lb } else { sigma.clone() };
            let half = bound / rat_int(2);
            // largest power of two whose square stays strictly below half
            let mut t0 = rat_int(1);
            while &t0 * &t0 >= half {
                t0 = t0 / rat_int(2);
            }
            (t0.clone(), t0)
        } else {
            (b.clone(), rat_int(-1))
        };
        let mag = {
            let ab = b.abs();
            if ab > rat_int(1) {
                ab
            } else {
                rat_int(1)
            }
        };
        let t = largest_pow2_below(&(&sigma / (rat_int(2) * mag)))?;
        // every slack shrinks by at most the largest off-pair product;
        // requirements already on {i,j} are untouched, since their tail
        // sums collapse to the (already counted) checkpoint prefix
        let mut mu = (&t * &vi).abs();
        for cand in [(&t * &vj).abs(), (&t * &t).abs()] {
            if cand > mu {
                mu = cand;
            }
        }
        if b.is_zero() {
            let prod = (&vi * &vj).abs();
            if prod > mu {
                mu = prod;
            }
        }
        self.push_require_column(i, j, vi, vj, t);
        let prefix_abs = self.pair_total(i, j).abs();
        if prefix_abs >= eps {
            return Err(Error::InvalidParam(String::from(
                "requirement unsatisfiable at creation",
            )));
        }
        let new_slack_lb = largest_pow2_below(&(&eps - &prefix_abs))?;
        self.reqs.push(Requirement {
            i,
            j,
            k: self.width.clone(),
            eps,
            prefix_abs,
        });
        let mut lb = match &self.slack_lb {
            Some(old) => old - mu,
            None => new_slack_lb.clone(),
        };
        if new_slack_lb < lb {
            lb = new_slack_lb;
        }
        if !lb.is_positive() {
            return Err(Error::InvalidParam(String::from(
                "slack bound exhausted by require_pair",
            )));
        }
        self.slack_lb = Some(lb);
        Ok(())
    }

    /// Appends a padded range: `δ` is the largest power of two whose
    /// square sits strictly below every requirement's slack,
    /// `ε = δ/2^h`, and the `ε`-scaled pattern on `h` rows repeats `M`
    /// times with `M` minimal such that `M·2^h·ε^l > 1`.  Every appended
    /// entry has absolute value exactly `ε ≤ 1`; complete repeats
    /// contribute zero to every distinct pair, and intra-repeat prefixes
    /// move by at most `2^h·ε² = δ·ε < δ²`.
    pub fn pad_block(&mut self, l: u32) -> Result<PadInfo> {
        if l < 1 {
            return Err(Error::InvalidParam(String::from("pad exponent l >= 1")));
        }
        let sigma = self.sigma();
        debug_assert!(sigma.is_positive());
        let mut delta = rat_int(1);
        while &delta * &delta >= sigma {
            delta = delta / rat_int(2);
        }
        let h = self.h as u32;
        let eps = &delta / rat_pow(&rat_int(2), h as i64);
        // minimal M with M · 2^h · eps^l > 1
        let per_repeat = rat_pow(&rat_int(2), h as i64) * rat_pow(&eps, l as i64);
        let threshold = rat_int(1) / per_repeat;
        let repeats = threshold.floor().to_integer().magnitude() + BigUint::one();
        let seg = Segment::Pad {
            h_pad: h,
            dups: 0,
            eps: eps.clone(),
            repeats: repeats.clone(),
        };
        let width = seg.width();
        let offset = self.width.clone();
        // distinct rows: zero total per repeat; row squares grow
        let eps_sq = &eps * &eps;
        let width_rat = BigRat::from_integer(BigInt::from(width.clone()));
        self.r2_acc += &eps_sq * &width_rat;
        // intra-repeat prefixes swing by at most eps²·2^(h-1)
        let swing = eps_sq * rat_pow(&rat_int(2), h as i64 - 1);
        if let Some(lb) = &self.slack_lb {
            let lb = lb - swing;
            if !lb.is_positive() {
                return Err(Error::InvalidParam(String::from(
                    "slack bound exhausted by pad_block",
                )));
            }
            self.slack_lb = Some(lb);
        }
        self.segments.push(seg);
        self.width += &width;
        Ok(PadInfo {
            offset,
            width,
            eps,
            delta,
            h_pad: h,
            repeats,
        })
    }

    /// Doubles the condition: row `i` becomes identical rows `2i` and
    /// `2i+1`, and each requirement on `{i,j}` is copied to `{2i,2j}` and
    /// `{2i+1,2j+1}`.
    pub fn double(&mut self) {
        let h2 = self.h * 2;
        for seg in &mut self.segments {
            match seg {
                Segment::Explicit { dups, .. } => *dups += 1,
                Segment::Pad { dups, .. } => *dups += 1,
            }
        }
        let mut new_reqs = Vec::with_capacity(self.reqs.len() * 2);
        for r in &self.reqs {
            for off in [0usize, 1] {
                new_reqs.push(Requirement {
                    i: 2 * r.i + off,
                    j: 2 * r.j + off,
                    k: r.k.clone(),
                    eps: r.eps.clone(),
                    prefix_abs: r.prefix_abs.clone(),
                });
            }
        }
        self.reqs = new_reqs;
        let mut new_adj = BTreeMap::new();
        for i in 0..h2 {
            for j in (i + 1)..h2 {
                // duplicated rows: the pair total is the parent row square
                let v = if i >> 1 == j >> 1 {
                    &self.row_adj[i >> 1] + &self.r2_acc - &self.t2_acc
                } else {
                    self.pair_adj[&(i >> 1, j >> 1)].clone()
                };
                new_adj.insert((i, j), v);
            }
        }
        self.pair_adj = new_adj;
        let mut new_row_adj = Vec::with_capacity(h2);
        for i in 0..h2 {
            new_row_adj.push(self.row_adj[i >> 1].clone());
        }
        self.row_adj = new_row_adj;
        self.h = h2;
    }

    /// Full from-scratch verification: every entry nonzero (pads by
    /// construction, explicit columns exhaustively), every requirement's
    /// checkpoint prefix and all intermediate spans strictly inside its
    /// bound, and the tracked pair totals consistent with a fresh walk.
    pub fn verify(&self) -> Result<()> {
        for seg in &self.segments {
            match seg {
                Segment::Explicit { cols, .. } => {
                    if cols.iter().flatten().any(Zero::is_zero) {
                        return Err(Error::InvalidParam(String::from(
                            "zero entry in explicit segment",
                        )));
                    }
                }
                Segment::Pad { eps, .. } => {
                    if !eps.is_positive() {
                        return Err(Error::InvalidParam(String::from(
                            "pad weight not positive",
                        )));
                    }
                }
            }
        }
        // group requirements by pair and walk the matrix once per pair
        let mut by_pair: BTreeMap<(usize, usize), Vec<&Requirement>> = BTreeMap::new();
        for r in &self.reqs {
            by_pair.entry((r.i, r.j)).or_default().push(r);
        }
        for ((i, j), reqs) in by_pair {
            self.verify_pair(i, j, &reqs)?;
        }
        Ok(())
    }

    fn verify_pair(&self, i: usize, j: usize, reqs: &[&Requirement]) -> Result<()> {
        struct Active<'a> {
            req: &'a Requirement,
            at_k: BigRat,
            max_span: BigRat,
        }
        fn observe<'a>(
            i: usize,
            j: usize,
            prefix: &BigRat,
            pos: &BigUint,
            active: &mut Vec<Active<'a>>,
            pending: &mut Vec<&'a Requirement>,
        ) -> Result<()> {
            while let Some(r) = pending.last() {
                if &r.k == pos {
                    let r = pending.pop().unwrap();
                    if prefix.abs() >= r.eps {
                        return Err(Error::InvalidParam(alloc::format!(
                            "requirement ({i},{j}): checkpoint prefix {prefix} not below {}",
                            r.eps
                        )));
                    }
                    active.push(Active {
                        req: r,
                        at_k: prefix.clone(),
                        max_span: BigRat::zero(),
                    });
                } else if &r.k < pos {
                    return Err(Error::Unverifiable(String::from(
                        "checkpoint not aligned with a column boundary",
                    )));
                } else {
                    break;
                }
            }
            for a in active.iter_mut() {
                let span = (prefix - &a.at_k).abs();
                if span > a.max_span {
                    a.max_span = span;
                }
            }
            Ok(())
        }

        let mut active: Vec<Active> = Vec::new();
        let mut pending: Vec<&Requirement> = reqs.to_vec();
        pending.sort_by(|a, b| a.k.cmp(&b.k));
        pending.reverse();
        let mut prefix = BigRat::zero();
        let mut pos = BigUint::zero();
        observe(i, j, &prefix, &pos, &mut active, &mut pending)?;
        for seg in &self.segments {
            match seg {
                Segment::Explicit { dups, cols } => {
                    for col in cols {
                        prefix += &col[i >> dups] * &col[j >> dups];
                        pos += BigUint::one();
                        observe(i, j, &prefix, &pos, &mut active, &mut pending)?;
                    }
                }
                Segment::Pad { .. } => {
                    let summary = pad_pair_summary(seg, i, j);
                    for a in active.iter_mut() {
                        for rel in [&summary.rel_max, &summary.rel_min] {
                            let cand = (&prefix + rel - &a.at_k).abs();
                            if cand > a.max_span {
                                a.max_span = cand;
                            }
                        }
                    }
                    prefix += summary.total;
                    pos += seg.width();
                    observe(i, j, &prefix, &pos, &mut active, &mut pending)?;
                }
            }
        }
        if !pending.is_empty() {
            return Err(Error::Unverifiable(String::from(
                "checkpoint beyond matrix width",
            )));
        }
        for a in &active {
            if a.max_span >= a.req.eps {
                return Err(Error::InvalidParam(alloc::format!(
                    "requirement ({i},{j}): span {} not below {}",
                    a.max_span,
                    a.req.eps
                )));
            }
        }
        // incremental totals must agree with the fresh walk
        if prefix != self.pair_total(i, j) {
            return Err(Error::InvalidParam(String::from(
                "tracked pair total inconsistent",
            )));
        }
        Ok(())
    }

    /// `Σ_n (min_i |s_i(n)|)^p` over all laid-out columns, exact: padded
    /// ranges contribute `width·ε^p` since every entry there has absolute
    /// value exactly `ε`.
    pub fn height_series(&self, p: u32) -> BigRat {
        let mut acc = BigRat::zero();
        for seg in &self.segments {
            match seg {
                Segment::Explicit { cols, .. } => {
                    for col in cols {
                        let m = col.iter().map(|v| v.abs()).min().expect("nonempty column");
                        acc += rat_pow(&m, p as i64);
                    }
                }
                Segment::Pad { eps, .. } => {
                    acc +=
                        rat_pow(eps, p as i64) * BigRat::from_integer(BigInt::from(seg.width()));
                }
            }
        }
        acc
    }

    /// A total handle for one row: rational values, full support within
    /// the laid-out width.
    pub fn row_handle(self: &alloc::sync::Arc<Self>, row: usize, id: &str) -> SeqHandle {
        let cond = alloc::sync::Arc::clone(self);
        SeqHandle::new(
            id,
            alloc::boxed::Box::new(move |m: &BigUint| {
                cond.entry(row, m)
                    .map(Radical::from_rational)
                    .unwrap_or_else(|_| Radical::zero())
            }),
            SupportInfo::Full,
            Some(self.width.clone()),
        )
    }
}

/// Record of one build stage.
#[derive(Clone, Debug)]
pub struct StageRecord {
    pub stage: u32,
    pub h_before: usize,
    pub h_after: usize,
    pub requirement_eps: BigRat,
    pub pad: PadInfo,
    /// Matrix width at the end of the stage.  The family restricted to
    /// this stage is read against the full width, not the row count; both
    /// indices are kept in the record.
    pub width_after: BigUint,
}

/// The staged build: final condition plus per-stage records for replay.
#[derive(Clone, Debug)]
pub struct PerfectFamilyBuild {
    pub cond: SignCondition,
    pub stages: Vec<StageRecord>,
}

/// Runs `stages` rounds over a seed: at stage `n` (1-based) every pair of
/// the current `h` rows receives a requirement with `ε = 1/n`, the matrix
/// is padded with exponent `l = n`, and the rows are doubled.
pub fn build_perfect_family(seed: SignCondition, stages: u32) -> Result<PerfectFamilyBuild> {
    let mut cond = seed;
    let mut records = Vec::new();
    for stage in 1..=stages {
        let h_before = cond.rows();
        let eps = rat(1, stage as i64);
        for i in 0..h_before {
            for j in (i + 1)..h_before {
                cond.require_pair(i, j, eps.clone())?;
            }
        }
        let pad = cond.pad_block(stage)?;
        let width_after = cond.width().clone();
        cond.double();
        records.push(StageRecord {
            stage,
            h_before,
            h_after: cond.rows(),
            requirement_eps: eps,
            pad,
            width_after,
        });
    }
    Ok(PerfectFamilyBuild {
        cond,
        stages: records,
    })
}

/// Height-series report for a build.
#[derive(Clone, Debug)]
pub struct HeightReport {
    pub p: u32,
    /// Exact `Σ_n h(n)^p` over the laid-out width.
    pub total: BigRat,
    /// Contribution of each stage's padded range.
    pub per_stage_pad: Vec<BigRat>,
    /// `#{l : p ≤ l ≤ S}` — each such stage's pad alone exceeds 1.
    pub qualifying_stages: u32,
}

/// Computes the exact height series `Σ (min_i |s_i(n)|)^p` and the
/// per-stage lower bounds: the stage-`l` pad contributes
/// `M·2^h·ε^p ≥ M·2^h·ε^l > 1` whenever `p ≤ l`, since `ε ≤ 1`.
pub fn height_series_report(build: &PerfectFamilyBuild, p: u32) -> HeightReport {
    let total = build.cond.height_series(p);
    let per_stage_pad: Vec<BigRat> = build
        .stages
        .iter()
        .map(|s| {
            rat_pow(&s.pad.eps, p as i64) * BigRat::from_integer(BigInt::from(s.pad.width.clone()))
        })
        .collect();
    let qualifying = build
        .stages
        .iter()
        .filter(|s| p >= 1 && p <= s.stage)
        .count() as u32;
    HeightReport {
        p,
        total,
        per_stage_pad,
        qualifying_stages: qualifying,
    }
}

// ---------------------------------------------------------------------
// Almost-disjoint-support conditions and orthogonality restoration
// ---------------------------------------------------------------------

/// One row of an almost-disjoint-support condition: rational values with
/// `s(n) ≠ 0 ⇒ |s(n)| ≥ 1`, plus promises `(β, n)` that from column `n`
/// on this row and row `β` are never both nonzero.
#[derive(Clone, Debug, Default)]
pub struct AdRow {
    pub values: Vec<BigRat>,
    pub promises: Vec<(u64, usize)>,
}

/// A finite family of labeled rows with promises.  Full orthogonality
/// requires every distinct pair to have exact inner product zero; a
/// precondition may satisfy only weak orthogonality, where non-orthogonal
/// pairs carry no promise in either direction.
#[derive(Clone, Debug, Default)]
pub struct AdCondition {
    pub n: usize,
    pub rows: BTreeMap<u64, AdRow>,
}

impl AdCondition {
    pub fn new(n: usize) -> AdCondition {
        AdCondition {
            n,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert_row(&mut self, label: u64, row: AdRow) -> Result<()> {
        if row.values.len() != self.n {
            return Err(Error::InvalidParam(String::from("row length mismatch")));
        }
        if row
            .values
            .iter()
            .any(|v| !v.is_zero() && v.abs() < rat_int(1))
        {
            return Err(Error::InvalidParam(String::from(
                "nonzero entries must have magnitude at least 1",
            )));
        }
        self.rows.insert(label, row);
        Ok(())
    }

    pub fn inner(&self, a: u64, b: u64) -> BigRat {
        let ra = &self.rows[&a].values;
        let rb = &self.rows[&b].values;
        ra.iter().zip(rb).map(|(x, y)| x * y).sum()
    }

    fn has_promise(&self, a: u64, b: u64) -> bool {
        self.rows[&a].promises.iter().any(|&(beta, _)| beta == b)
            || self.rows[&b].promises.iter().any(|&(beta, _)| beta == a)
    }

    /// Checks every promise coordinatewise.
    pub fn check_promises(&self) -> Result<()> {
        for (&alpha, row) in &self.rows {
            for &(beta, from) in &row.promises {
                let other = self
                    .rows
                    .get(&beta)
                    .ok_or_else(|| Error::InvalidParam(String::from("promise to missing row")))?;
                for m in from..self.n {
                    if !row.values[m].is_zero() && !other.values[m].is_zero() {
                        return Err(Error::WeakOrthogonalityViolated { alpha, beta });
                    }
                }
            }
        }
        Ok(())
    }

    /// Weak orthogonality: non-orthogonal pairs carry no promises.
    pub fn check_weak_orthogonality(&self) -> Result<()> {
        let labels: Vec<u64> = self.rows.keys().copied().collect();
        for (ai, &a) in labels.iter().enumerate() {
            for &b in &labels[ai + 1..] {
                if !self.inner(a, b).is_zero() && self.has_promise(a, b) {
                    return Err(Error::WeakOrthogonalityViolated { alpha: a, beta: b });
                }
            }
        }
        Ok(())
    }

    /// Full orthogonality of all distinct pairs.
    pub fn check_full_orthogonality(&self) -> Result<()> {
        let labels: Vec<u64> = self.rows.keys().copied().collect();
        for (ai, &a) in labels.iter().enumerate() {
            for &b in &labels[ai + 1..] {
                if !self.inner(a, b).is_zero() {
                    return Err(Error::WeakOrthogonalityViolated { alpha: a, beta: b });
                }
            }
        }
        Ok(())
    }
}

/// Restores full orthogonality of a weakly orthogonal precondition.
///
/// Every non-orthogonal pair (in label order) gets two fresh columns: the
/// pair's first row takes `(1, 1)`, the second takes `(u, v)` with `u`
/// the smallest integer `≥ 2` such that `|x + u| ≥ 1` and `v = -x - u`
/// (so `|u|, |v| ≥ 1` and `u + v = -x`, where `x` is the pair's current
/// inner sum); every other row takes `(0, 0)`.  Promises survive because
/// the new columns are zero outside the pair, and processed pairs stay at
/// zero because later extensions meet them with a zero on one side.
pub fn extend_to_orthogonal(pre: &AdCondition) -> Result<AdCondition> {
    pre.check_promises()?;
    pre.check_weak_orthogonality()?;
    let mut cond = pre.clone();
    let labels: Vec<u64> = cond.rows.keys().copied().collect();
    let mut bad_pairs = Vec::new();
    for (ai, &a) in labels.iter().enumerate() {
        for &b in &labels[ai + 1..] {
            if !cond.inner(a, b).is_zero() {
                bad_pairs.push((a, b));
            }
        }
    }
    for (a, b) in bad_pairs {
        let x = cond.inner(a, b);
        let mut u = rat_int(2);
        while (&x + &u).abs() < rat_int(1) {
            u += rat_int(1);
        }
        let v = -&x - &u;
        for (&label, row) in cond.rows.iter_mut() {
            if label == a {
                row.values.push(rat_int(1));
                row.values.push(rat_int(1));
            } else if label == b {
                row.values.push(u.clone());
                row.values.push(v.clone());
            } else {
                row.values.push(BigRat::zero());
                row.values.push(BigRat::zero());
            }
        }
        cond.n += 2;
    }
    cond.check_full_orthogonality()?;
    cond.check_promises()?;
    Ok(cond)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> BigRat {
        rat_int(n)
    }

    #[test]
    fn hadamard_examples() {
        assert_eq!(hadamard_rows(1), alloc::vec![alloc::vec![1, -1]]);
        let h2 = hadamard_rows(2);
        assert_eq!(h2[0], alloc::vec![1, -1, 1, -1]);
        assert_eq!(h2[1], alloc::vec![1, 1, -1, -1]);
        // pairwise orthogonal, mismatch counts 2^h/4 per one-sided pattern
        for h in 1..=6u32 {
            let rows = hadamard_rows(h);
            let n = 1usize << h;
            for i in 0..rows.len() {
                for j in (i + 1)..rows.len() {
                    let dot: i64 = (0..n).map(|t| rows[i][t] as i64 * rows[j][t] as i64).sum();
                    assert_eq!(dot, 0);
                    let pm = (0..n)
                        .filter(|&t| rows[i][t] == 1 && rows[j][t] == -1)
                        .count();
                    let mp = (0..n)
                        .filter(|&t| rows[i][t] == -1 && rows[j][t] == 1)
                        .count();
                    assert_eq!(pm, n / 4);
                    assert_eq!(mp, n / 4);
                }
            }
        }
    }

    #[test]
    fn alt_pad_examples() {
        // h = 4, eps = 1: delta = 1, column pair inner = -1 - 1 + 2 = 0
        let m = alt_pad_matrix(4, &r(1)).unwrap();
        assert_eq!(m[0][0], r(-1));
        for c1 in 0..4 {
            for c2 in (c1 + 1)..4 {
                let dot: BigRat = (0..4).map(|row| &m[row][c1] * &m[row][c2]).sum();
                assert!(dot.is_zero());
            }
        }
        // h = 3, eps = 2 -> delta = 1
        let m = alt_pad_matrix(3, &r(2)).unwrap();
        assert_eq!(m[1][1], r(-1));
        // h = 2 rejected
        assert!(alt_pad_matrix(2, &r(1)).is_err());
    }

    #[test]
    fn require_pair_proof_rule() {
        // rows (1),(2): b = 2; appended column (2,-1); running sum 0
        let mut c =
            SignCondition::from_rows(alloc::vec![alloc::vec![r(1)], alloc::vec![r(2)]]).unwrap();
        c.require_pair(0, 1, r(1)).unwrap();
        assert!(c.pair_total(0, 1).is_zero());
        assert_eq!(c.entry(0, &BigUint::from(1u32)).unwrap(), r(2));
        assert_eq!(c.entry(1, &BigUint::from(1u32)).unwrap(), r(-1));
        c.verify().unwrap();

        // rows (1),(-1): b = -1; appended (-1,-1); running sum 0
        let mut c =
            SignCondition::from_rows(alloc::vec![alloc::vec![r(1)], alloc::vec![r(-1)]]).unwrap();
        c.require_pair(0, 1, r(1)).unwrap();
        assert!(c.pair_total(0, 1).is_zero());
        assert_eq!(c.entry(0, &BigUint::from(1u32)).unwrap(), r(-1));
        assert_eq!(c.entry(1, &BigUint::from(1u32)).unwrap(), r(-1));
        c.verify().unwrap();
    }

    #[test]
    fn require_pair_zero_total_case() {
        // orthogonal seed rows: b = 0; both entries tiny with product
        // strictly below min(eps, slacks)
        let mut c = SignCondition::from_rows(alloc::vec![
            alloc::vec![r(1), r(1)],
            alloc::vec![r(1), r(-1)],
        ])
        .unwrap();
        c.require_pair(0, 1, rat(1, 2)).unwrap();
        let e0 = c.entry(0, &BigUint::from(2u32)).unwrap();
        let e1 = c.entry(1, &BigUint::from(2u32)).unwrap();
        assert!(!e0.is_zero() && !e1.is_zero());
        assert!((&e0 * &e1).abs() < rat(1, 2));
        c.verify().unwrap();
    }

    #[test]
    fn pad_block_worked_example() {
        // h = 2, slack 1: delta = 1/2, eps = 1/8, l = 1 needs M = 3
        let mut c =
            SignCondition::from_rows(alloc::vec![alloc::vec![r(1)], alloc::vec![r(2)]]).unwrap();
        c.require_pair(0, 1, r(1)).unwrap();
        let info = c.pad_block(1).unwrap();
        assert_eq!(info.delta, rat(1, 2));
        assert_eq!(info.eps, rat(1, 8));
        assert_eq!(info.repeats, BigUint::from(3u32));
        assert_eq!(info.width, BigUint::from(12u32));
        // appended entries all have magnitude exactly eps
        for col in 2u32..14 {
            for row in 0..2 {
                assert_eq!(c.entry(row, &BigUint::from(col)).unwrap().abs(), rat(1, 8));
            }
        }
        c.verify().unwrap();
    }

    #[test]
    fn pad_pair_summary_matches_enumeration() {
        // closed-form extrema vs brute force for small pads
        for h_pad in 1u32..=4 {
            for reps in 1u64..=3 {
                let seg = Segment::Pad {
                    h_pad,
                    dups: 0,
                    eps: rat(1, 3),
                    repeats: BigUint::from(reps),
                };
                let width = (1u64 << h_pad) * reps;
                for i in 0..h_pad as usize {
                    for j in 0..h_pad as usize {
                        if i == j {
                            continue;
                        }
                        let summary = pad_pair_summary(&seg, i, j);
                        let mut run = BigRat::zero();
                        let mut max = BigRat::zero();
                        let mut min = BigRat::zero();
                        for t in 0..width {
                            let a = seg.entry(i, &BigUint::from(t));
                            let b = seg.entry(j, &BigUint::from(t));
                            run += a * b;
                            if run > max {
                                max = run.clone();
                            }
                            if run < min {
                                min = run.clone();
                            }
                        }
                        assert_eq!(summary.total, run, "total h={h_pad} i={i} j={j}");
                        assert_eq!(summary.rel_max, max, "max h={h_pad} i={i} j={j}");
                        assert_eq!(summary.rel_min, min, "min h={h_pad} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn pad_summary_equal_rows_after_doubling() {
        let seg = Segment::Pad {
            h_pad: 2,
            dups: 1,
            eps: rat(1, 2),
            repeats: BigUint::from(2u32),
        };
        // rows 0 and 1 collapse to pad row 0: every product is eps²
        let s = pad_pair_summary(&seg, 0, 1);
        assert_eq!(s.total, rat(1, 4) * r(8));
        assert_eq!(s.rel_min, BigRat::zero());
        assert_eq!(s.rel_max, s.total);
    }

    #[test]
    fn double_duplicates_rows_and_requirements() {
        let mut c = SignCondition::from_rows(alloc::vec![alloc::vec![r(1), r(2)]]).unwrap();
        c.double();
        assert_eq!(c.rows(), 2);
        for col in 0..2u32 {
            assert_eq!(
                c.entry(0, &BigUint::from(col)).unwrap(),
                c.entry(1, &BigUint::from(col)).unwrap()
            );
        }
        // requirement mapping {i,j} -> {2i,2j}, {2i+1,2j+1}
        let mut c =
            SignCondition::from_rows(alloc::vec![alloc::vec![r(1)], alloc::vec![r(2)]]).unwrap();
        c.require_pair(0, 1, r(1)).unwrap();
        c.double();
        let pairs: Vec<(usize, usize)> = c.requirements().iter().map(|r| (r.i, r.j)).collect();
        assert_eq!(pairs, alloc::vec![(0, 2), (1, 3)]);
        c.verify().unwrap();
    }

    #[test]
    fn small_build_stages() {
        // one stage from two distinct seed rows: h goes 2 -> 4
        let build = build_perfect_family(SignCondition::default_seed(2).unwrap(), 1).unwrap();
        assert_eq!(build.cond.rows(), 4);
        build.cond.verify().unwrap();

        // three stages: every requirement holds, entries nonzero
        let build = build_perfect_family(SignCondition::default_seed(2).unwrap(), 3).unwrap();
        assert_eq!(build.cond.rows(), 16);
        build.cond.verify().unwrap();
        let last = build.stages.last().unwrap();
        assert_eq!(last.requirement_eps, rat(1, 3));
    }

    #[test]
    fn height_series_bounds() {
        let build = build_perfect_family(SignCondition::default_seed(2).unwrap(), 3).unwrap();
        for p in 1..=3u32 {
            let rep = height_series_report(&build, p);
            let qualifying = (p..=3).count() as u32;
            assert_eq!(rep.qualifying_stages, qualifying);
            // each qualifying stage's pad alone exceeds 1
            for (idx, s) in build.stages.iter().enumerate() {
                if p <= s.stage {
                    assert!(rep.per_stage_pad[idx] > r(1));
                }
            }
            assert!(rep.total > BigRat::from_integer(qualifying.into()));
        }
        // p = S+1: no stage qualifies; the exact sum is still reported
        let rep = height_series_report(&build, 4);
        assert_eq!(rep.qualifying_stages, 0);
        assert!(rep.total.is_positive());
    }

    #[test]
    fn min_pad_entry_is_eps() {
        let build = build_perfect_family(SignCondition::default_seed(2).unwrap(), 2).unwrap();
        for s in &build.stages {
            // sample entries inside the padded range
            let base = &s.pad.offset;
            for off in 0..4u32 {
                let col = base + BigUint::from(off);
                for row in 0..build.cond.rows() {
                    let v = build.cond.entry(row, &col).unwrap().abs();
                    assert_eq!(v, s.pad.eps);
                }
            }
        }
    }

    #[test]
    fn extend_to_orthogonal_examples() {
        // rows (1),(1): x = 1, u = 2, v = -3 -> 1 + 2 - 3 = 0
        let mut pre = AdCondition::new(1);
        pre.insert_row(
            0,
            AdRow {
                values: alloc::vec![r(1)],
                promises: alloc::vec![],
            },
        )
        .unwrap();
        pre.insert_row(
            1,
            AdRow {
                values: alloc::vec![r(1)],
                promises: alloc::vec![],
            },
        )
        .unwrap();
        let post = extend_to_orthogonal(&pre).unwrap();
        assert_eq!(post.n, 3);
        assert_eq!(post.rows[&1].values[1], r(2));
        assert_eq!(post.rows[&1].values[2], r(-3));
        assert!(post.inner(0, 1).is_zero());

        // x = -5/2: u = 4, v = -3/2
        let mut pre = AdCondition::new(2);
        pre.insert_row(
            0,
            AdRow {
                values: alloc::vec![r(1), r(0)],
                promises: alloc::vec![],
            },
        )
        .unwrap();
        pre.insert_row(
            1,
            AdRow {
                values: alloc::vec![rat(-5, 2), r(0)],
                promises: alloc::vec![],
            },
        )
        .unwrap();
        let post = extend_to_orthogonal(&pre).unwrap();
        assert_eq!(post.rows[&1].values[2], r(4));
        assert_eq!(post.rows[&1].values[3], rat(-3, 2));
        assert!(post.inner(0, 1).is_zero());

        // already-orthogonal pair untouched
        let mut pre = AdCondition::new(2);
        pre.insert_row(
            0,
            AdRow {
                values: alloc::vec![r(1), r(1)],
                promises: alloc::vec![],
            },
        )
        .unwrap();
        pre.insert_row(
            1,
            AdRow {
                values: alloc::vec![r(1), r(-1)],
                promises: alloc::vec![],
            },
        )
        .unwrap();
        let post = extend_to_orthogonal(&pre).unwrap();
        assert_eq!(post.n, 2);
    }

    #[test]
    fn weak_orthogonality_violation_named() {
        let mut pre = AdCondition::new(1);
        pre.insert_row(
            3,
            AdRow {
                values: alloc::vec![r(1)],
                promises: alloc::vec![(7, 0)],
            },
        )
        .unwrap();
        pre.insert_row(
            7,
            AdRow {
                values: alloc::vec![r(1)],
                promises: alloc::vec![],
            },
        )
        .unwrap();
        match extend_to_orthogonal(&pre) {
            Err(Error::WeakOrthogonalityViolated { alpha: 3, beta: 7 }) => {}
            other => panic!("expected violation naming (3,7), got {other:?}"),
        }
    }

    #[test]
    fn ad_entries_below_one_rejected() {
        let mut pre = AdCondition::new(1);
        assert!(pre
            .insert_row(
                0,
                AdRow {
                    values: alloc::vec![rat(1, 2)],
                    promises: alloc::vec![],
                }
            )
            .is_err());
    }
}
