//! The perfect orthogonal tree: level `n` holds `n` pairwise orthogonal
//! vectors of `R^n`, every entry is `±√(2^k)` or `0`, and exactly one
//! node splits per level.
//!
//! Split scheduling is FIFO over unsplit nodes (oldest first), which
//! reproduces the classical picture — the first branch splits with
//! squared weights 1, 2, 4, 8 — and guarantees every node eventually
//! splits, so the branch set is perfect.  A node that does not split
//! continues with `0`; a split appends `±w` with `w² = (s,s)`, which
//! forces the two children to stay orthogonal to everything, including
//! each other.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::exact::{rat_int, BigRat, Radical, RadicalSum};
use crate::linalg::radical_rank;
use crate::seq::{PairMeta, PrefixVec, SeqHandle, SupportInfo};
use crate::{Error, Result};

#[derive(Clone, Debug)]
struct SplitRecord {
    /// Level size before the split (the new coordinate index).
    level: usize,
    /// Row of the splitting node within that level.
    row: usize,
    /// Squared weight used for the children.
    w_sq: BigRat,
}

/// The tree, built level by level.
pub struct KunenTree {
    /// `levels[i]` is level `i+1` (holding `i+1` vectors of `R^(i+1)`).
    levels: Vec<Vec<PrefixVec>>,
    norms_sq: Vec<Vec<BigRat>>,
    ids: Vec<Vec<u32>>,
    queue: VecDeque<u32>,
    next_id: u32,
    /// Extension count at which each node id was created.
    born_at: Vec<usize>,
    splits: Vec<SplitRecord>,
}

impl KunenTree {
    /// The singleton level `{(1)}`.
    pub fn new() -> KunenTree {
        let root = PrefixVec::from_rationals(&[rat_int(1)]);
        let mut queue = VecDeque::new();
        queue.push_back(0);
        KunenTree {
            levels: alloc::vec![alloc::vec![root]],
            norms_sq: alloc::vec![alloc::vec![rat_int(1)]],
            ids: alloc::vec![alloc::vec![0]],
            queue,
            next_id: 1,
            born_at: alloc::vec![0],
            splits: Vec::new(),
        }
    }

    /// Number of built levels (the deepest level index).
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level `n` (1-based), `n` vectors of `R^n`.
    pub fn level(&self, n: usize) -> Result<&[PrefixVec]> {
        if n == 0 || n > self.depth() {
            return Err(Error::DepthExhausted {
                needed: n,
                built: self.depth(),
            });
        }
        Ok(&self.levels[n - 1])
    }

    pub fn norms_sq(&self, n: usize) -> Result<&[BigRat]> {
        if n == 0 || n > self.depth() {
            return Err(Error::DepthExhausted {
                needed: n,
                built: self.depth(),
            });
        }
        Ok(&self.norms_sq[n - 1])
    }

    /// Squared split weights in order of the splits taken so far.
    pub fn split_weights_sq(&self) -> Vec<BigRat> {
        self.splits.iter().map(|s| s.w_sq.clone()).collect()
    }

    /// Appends one level: the oldest unsplit node `s` splits into
    /// `s⌢(+w)` and `s⌢(-w)` with `w = √(s,s)`; every other node appends
    /// a zero.  Both children join the back of the queue.
    pub fn extend(&mut self) -> Result<()> {
        let cur = self.levels.last().unwrap();
        let cur_norms = self.norms_sq.last().unwrap();
        let cur_ids = self.ids.last().unwrap();
        debug_assert_eq!(self.queue.len(), cur.len());
        let split_id = self.queue.pop_front().expect("queue never empty");
        let row = cur_ids
            .iter()
            .position(|&id| id == split_id)
            .expect("queued node present in current level");
        let w_sq = cur_norms[row].clone();
        let w = Radical::sqrt_of(w_sq.clone())?;
        let mut next = Vec::with_capacity(cur.len() + 1);
        let mut next_norms = Vec::with_capacity(cur.len() + 1);
        let mut next_ids = Vec::with_capacity(cur.len() + 1);
        for (i, node) in cur.iter().enumerate() {
            if i == row {
                for child_sign in [1, -1] {
                    let mut child = node.clone();
                    child.push(if child_sign > 0 { w.clone() } else { -&w });
                    next.push(child);
                    // prefix² + w² doubles the squared norm at a split
                    next_norms.push(&cur_norms[i] + &w_sq);
                    next_ids.push(self.next_id);
                    self.queue.push_back(self.next_id);
                    self.born_at.push(self.levels.len());
                    self.next_id += 1;
                }
            } else {
                let mut same = node.clone();
                same.push(Radical::zero());
                next.push(same);
                next_norms.push(cur_norms[i].clone());
                next_ids.push(cur_ids[i]);
            }
        }
        self.splits.push(SplitRecord {
            level: cur.len(),
            row,
            w_sq,
        });
        self.levels.push(next);
        self.norms_sq.push(next_norms);
        self.ids.push(next_ids);
        Ok(())
    }

    pub fn extend_to(&mut self, depth: usize) -> Result<()> {
        while self.depth() < depth {
            self.extend()?;
        }
        Ok(())
    }

    /// Exact rank certificate for level `n` by fraction-free elimination
    /// over the radical entries.
    pub fn level_rank(&self, n: usize) -> Result<usize> {
        let rows: Vec<Vec<RadicalSum>> = self
            .level(n)?
            .iter()
            .map(|v| v.entries().iter().map(RadicalSum::from_radical).collect())
            .collect();
        Ok(radical_rank(&rows))
    }

    /// All pairwise inner products of level `n`, exact.
    pub fn level_pairwise(&self, n: usize) -> Result<Vec<RadicalSum>> {
        let lv = self.level(n)?;
        let mut out = Vec::new();
        for i in 0..lv.len() {
            for j in (i + 1)..lv.len() {
                out.push(lv[i].inner(&lv[j]));
            }
        }
        Ok(out)
    }

    /// FIFO discipline check: queue length equals the level size, and
    /// every node that has split waited at most (level size at its birth)
    /// extensions.
    pub fn check_queue_discipline(&self) -> bool {
        if self.queue.len() != self.levels.last().unwrap().len() {
            return false;
        }
        for (k, rec) in self.splits.iter().enumerate() {
            let born = self.born_at[self.ids[rec.level - 1][rec.row] as usize];
            if k + 1 < born || (k + 1).saturating_sub(born) > rec.level {
                return false;
            }
        }
        true
    }

    /// Follows the branch from the root, resolving each split with
    /// `selector(new coordinate) = true` for the `+` child.  Returns the
    /// branch prefix at the built depth.
    pub fn branch_prefix(&self, selector: &dyn Fn(usize) -> bool) -> PrefixVec {
        let mut row = 0usize;
        for rec in &self.splits {
            if rec.row == row {
                row = if selector(rec.level) {
                    rec.row
                } else {
                    rec.row + 1
                };
            } else if rec.row < row {
                row += 1;
            }
        }
        self.levels.last().unwrap()[row].clone()
    }

    /// A sequence handle for a branch; values are defined up to the built
    /// depth.
    pub fn branch_handle(&self, selector: &dyn Fn(usize) -> bool, id: &str) -> SeqHandle {
        let prefix = self.branch_prefix(selector);
        SeqHandle::new(
            id,
            Box::new({
                let entries: Vec<Radical> = prefix.entries().to_vec();
                move |m: &BigUint| {
                    use num_traits::ToPrimitive;
                    match m.to_u64() {
                        Some(i) if (i as usize) < entries.len() => entries[i as usize].clone(),
                        _ => Radical::zero(),
                    }
                }
            }),
            SupportInfo::Full,
            Some(BigUint::from(self.depth() as u64)),
        )
    }

    /// Handles for two branches with disjoint-beyond metadata attached at
    /// the level just past their divergence split: beyond it, exactly one
    /// node splits per level, so at most one of the two branches is
    /// nonzero at each coordinate.
    pub fn branch_pair(
        &self,
        sel_a: &dyn Fn(usize) -> bool,
        sel_b: &dyn Fn(usize) -> bool,
    ) -> Result<(SeqHandle, SeqHandle)> {
        let pa = self.branch_prefix(sel_a);
        let pb = self.branch_prefix(sel_b);
        let div = pa
            .entries()
            .iter()
            .zip(pb.entries())
            .position(|(x, y)| x != y);
        let mut ha = self.branch_handle(sel_a, "branch-a");
        let hb = self.branch_handle(sel_b, "branch-b");
        if let Some(c) = div {
            ha.attach_meta(
                "branch-b",
                PairMeta::DisjointBeyond(BigUint::from(c as u64 + 1)),
            );
        }
        Ok((ha, hb))
    }
}

impl Default for KunenTree {
    fn default() -> Self {
        KunenTree::new()
    }
}

/// A per-input maximality witness: a branch prefix whose inner product
/// with the given vector is exactly nonzero.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Branch prefix one level past the vector's support.
    pub prefix: PrefixVec,
    /// Exact inner product of the prefix with the vector; final, since
    /// the greedy extension only meets zeros of the vector.
    pub value: RadicalSum,
    /// The base inner product `(s, x↾n)` of the chosen level-`n` node,
    /// for the `|value| ≥ |(s, x↾n)|` check.
    pub base: RadicalSum,
    /// Level at which the node was chosen.
    pub n: usize,
}

/// Finds a branch not orthogonal to the nonzero rational vector `x` of
/// finite support.
///
/// Chooses `n` = (max support index) + 1, picks `s ∈ T_n` maximizing
/// `|(s, x↾n)|` (nonzero exists since the level has full rank; ties break
/// toward the lower row), then extends greedily: at a split take the
/// child whose new coordinate sign agrees with `x` there — beyond the
/// support, the `+` child.
pub fn maximality_witness(tree: &KunenTree, x: &[BigRat]) -> Result<Witness> {
    let max_idx = match x.iter().rposition(|v| !v.is_zero()) {
        Some(i) => i,
        None => return Err(Error::ZeroVector),
    };
    let n = max_idx + 1;
    if tree.depth() < n + 1 {
        return Err(Error::DepthExhausted {
            needed: n + 1,
            built: tree.depth(),
        });
    }
    let level = tree.level(n)?;
    let mut best_row = 0usize;
    let mut best: Option<RadicalSum> = None;
    for (row, s) in level.iter().enumerate() {
        let v = s.inner_rationals(x);
        let better = match &best {
            None => true,
            Some(b) => {
                // strict |v| > |b|, exactly
                let diff = &v.mul(&v) - &b.mul(b);
                diff.signum()? > 0
            }
        };
        if better {
            best_row = row;
            best = Some(v);
        }
    }
    let base = best.expect("level nonempty");
    if base.is_zero() {
        // cannot happen for nonzero x: the level has rank n
        return Err(Error::ZeroVector);
    }
    // extend one level past the support, greedily
    let mut row = best_row;
    let mut value = base.clone();
    let rec = &tree.splits[n - 1]; // the split extending level n to n+1
    debug_assert_eq!(rec.level, n);
    if rec.row == row {
        let coord = n; // new coordinate index
        let want_plus = match x.get(coord) {
            Some(v) if num_traits::Signed::is_negative(v) => false,
            _ => true,
        };
        row = if want_plus { rec.row } else { rec.row + 1 };
        let child = &tree.levels[n][row];
        if let Some(xv) = x.get(coord) {
            value.add_radical(&(child.entry(coord) * &Radical::from_rational(xv.clone())));
        }
    } else if rec.row < row {
        row += 1;
    }
    let prefix = tree.levels[n][row].clone();
    Ok(Witness {
        prefix,
        value,
        base,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use rand::{Rng, SeedableRng};

    fn sqrt2() -> Radical {
        Radical::new(rat_int(1), rat_int(2)).unwrap()
    }

    fn built(depth: usize) -> KunenTree {
        let mut t = KunenTree::new();
        t.extend_to(depth).unwrap();
        t
    }

    #[test]
    fn first_levels_match_known_weights() {
        let t = built(6);
        let one = Radical::one();
        let two = Radical::from_rational(rat_int(2));
        let zero = Radical::zero();

        let l2 = t.level(2).unwrap();
        assert_eq!(l2[0].entries(), &[one.clone(), one.clone()]);
        assert_eq!(l2[1].entries(), &[one.clone(), -&one]);

        let l3 = t.level(3).unwrap();
        assert_eq!(l3[0].entries(), &[one.clone(), one.clone(), sqrt2()]);
        assert_eq!(l3[1].entries(), &[one.clone(), one.clone(), -&sqrt2()]);
        assert_eq!(l3[2].entries(), &[one.clone(), -&one, zero.clone()]);

        let l4 = t.level(4).unwrap();
        assert_eq!(l4[2].entries(), &[one.clone(), -&one, zero.clone(), sqrt2()]);
        assert_eq!(
            l4[3].entries(),
            &[one.clone(), -&one, zero.clone(), -&sqrt2()]
        );

        let l5 = t.level(5).unwrap();
        assert_eq!(
            l5[0].entries(),
            &[one.clone(), one.clone(), sqrt2(), zero.clone(), two.clone()]
        );
        assert_eq!(
            l5[1].entries(),
            &[one.clone(), one.clone(), sqrt2(), zero.clone(), -&two]
        );
    }

    #[test]
    fn first_branch_split_norms_double() {
        let t = built(9);
        let w = t.split_weights_sq();
        // splits 0, 1, 3, 7 lie on the all-plus branch
        let on_first_branch =
            alloc::vec![w[0].clone(), w[1].clone(), w[3].clone(), w[7].clone()];
        assert_eq!(
            on_first_branch,
            alloc::vec![rat_int(1), rat_int(2), rat_int(4), rat_int(8)]
        );
    }

    #[test]
    fn new_siblings_are_orthogonal_by_construction() {
        // prefix² - norm² = 0, e.g. 1 + 1 - 2 = 0
        let t = built(3);
        let l3 = t.level(3).unwrap();
        assert!(l3[0].inner(&l3[1]).is_zero());
    }

    #[test]
    fn levels_are_orthogonal_full_rank() {
        let t = built(8);
        for n in 1..=8 {
            let lv = t.level(n).unwrap();
            assert_eq!(lv.len(), n);
            for p in t.level_pairwise(n).unwrap() {
                assert!(p.is_zero());
            }
            assert_eq!(t.level_rank(n).unwrap(), n);
        }
    }

    #[test]
    fn queue_discipline_bounds() {
        let t = built(12);
        assert!(t.check_queue_discipline());
    }

    #[test]
    fn branch_pair_certificate() {
        let t = built(6);
        // branches through (1,1,√2,·) and (1,1,-√2,·) differ first at
        // coordinate 2: inner exactly 0, stable from level 3
        let plus = |_: usize| true;
        let minus_at_2 = |coord: usize| coord != 2;
        let (ha, hb) = t.branch_pair(&plus, &minus_at_2).unwrap();
        let cert = crate::seq::inner_certified(&ha, &hb).unwrap();
        match cert {
            crate::seq::InnerCertificate::Exact { value, stable_from } => {
                assert!(value.is_zero());
                assert_eq!(stable_from, BigUint::from(3u32));
            }
            other => panic!("expected exact certificate, got {other:?}"),
        }
        // beyond the divergence, at most one of the branches is nonzero
        assert!(
            crate::seq::spot_check_disjoint_beyond(&ha, &hb, &BigUint::from(3u32), 3).unwrap()
        );
    }

    #[test]
    fn all_plus_branch_prefix() {
        let t = built(4);
        let prefix = t.branch_prefix(&|_| true);
        assert_eq!(
            prefix.entries(),
            &[Radical::one(), Radical::one(), sqrt2(), Radical::zero()]
        );
    }

    #[test]
    fn witness_examples() {
        let t = built(9);
        // x = e_1: n = 2, s = (1,1), value >= 1
        let w = maximality_witness(&t, &[rat_int(0), rat_int(1)]).unwrap();
        assert_eq!(w.n, 2);
        assert_eq!(w.value.as_rational().unwrap(), rat_int(1));

        // x = (1,-1): s = (1,-1), value 2
        let w = maximality_witness(&t, &[rat_int(1), rat_int(-1)]).unwrap();
        assert_eq!(w.value.as_rational().unwrap(), rat_int(2));

        // x = (1,1): s = (1,1), value 2
        let w = maximality_witness(&t, &[rat_int(1), rat_int(1)]).unwrap();
        assert_eq!(w.value.as_rational().unwrap(), rat_int(2));

        // zero vector rejected
        assert!(matches!(
            maximality_witness(&t, &[rat_int(0), rat_int(0)]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn witness_dominates_base_on_random_vectors() {
        let t = built(10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut tried = 0;
        while tried < 50 {
            let len = rng.gen_range(1..=8usize);
            let x: Vec<BigRat> = (0..len)
                .map(|_| rat(rng.gen_range(-5i64..=5), rng.gen_range(1i64..=3)))
                .collect();
            if x.iter().all(Zero::is_zero) {
                continue;
            }
            tried += 1;
            let w = maximality_witness(&t, &x).unwrap();
            assert_ne!(w.value.signum().unwrap(), 0);
            // |value| >= |(s, x↾n)| recomputed independently
            let diff = &w.value.mul(&w.value) - &w.base.mul(&w.base);
            assert!(diff.signum().unwrap() >= 0);
            // value really is the inner product of the returned prefix
            let direct = w.prefix.inner_rationals(&x);
            assert_eq!(direct, w.value);
        }
    }
}
