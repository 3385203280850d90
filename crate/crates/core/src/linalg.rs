//! Exact linear algebra over rationals and radical sums: rank,
//! nullspace, square solves, and dependency certificates.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::exact::{BigRat, RadicalSum};
use crate::{Error, Result};

/// Row echelon form in place; returns the pivot columns.
fn echelon(rows: &mut [Vec<BigRat>]) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = BigRat::new(
            rows[r][c].denom().clone(),
            rows[r][c].numer().clone(),
        );
        for x in rows[r].iter_mut() {
            *x *= inv.clone();
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let sub = &f * &rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank of a rational matrix given as rows.
pub fn rat_rank(rows: &[Vec<BigRat>]) -> usize {
    let mut m: Vec<Vec<BigRat>> = rows.to_vec();
    echelon(&mut m).len()
}

/// Basis of `{ u : rows · u = 0 }` by exact elimination.
pub fn rat_nullspace(rows: &[Vec<BigRat>]) -> Vec<Vec<BigRat>> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigRat>> = rows.to_vec();
    let pivots = echelon(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = alloc::vec![BigRat::zero(); ncols];
        v[fc] = BigRat::from_integer(1.into());
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solves the square system `a · x = rhs`; `None` when singular.
pub fn rat_solve(a: &[Vec<BigRat>], rhs: &[BigRat]) -> Option<Vec<BigRat>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRat>> = a
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = echelon(&mut m);
    if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    let mut x = alloc::vec![BigRat::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = m[r][n].clone();
    }
    Some(x)
}

/// `None` when the rows are independent; otherwise a nonzero coefficient
/// vector witnessing a vanishing combination of the rows.
pub fn rat_row_dependency(rows: &[Vec<BigRat>]) -> Option<Vec<BigRat>> {
    // dependency among rows = nullspace of the transpose
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut t = alloc::vec![alloc::vec![BigRat::zero(); nrows]; ncols];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t[j][i] = v.clone();
        }
    }
    rat_nullspace(&t).into_iter().next()
}

/// Verifies independence, returning a dependency certificate on failure.
pub fn require_independent(rows: &[Vec<BigRat>]) -> Result<()> {
    match rat_row_dependency(rows) {
        None => Ok(()),
        Some(combination) => Err(Error::DependentRows { combination }),
    }
}

/// Exact rank over radical sums by fraction-free elimination.
///
/// Row updates use `row_j := pivot·row_j − row_j[c]·row_pivot`, which stays
/// inside the quadratic extensions generated by the entries; zero tests
/// are structural on the canonical representation.
pub fn radical_rank(rows: &[Vec<RadicalSum>]) -> usize {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<RadicalSum>> = rows.to_vec();
    let mut rank = 0usize;
    let mut r = 0usize;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in (r + 1)..nrows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..ncols {
                let scaled = pivot.mul(&m[i][j]);
                let sub = f.mul(&m[r][j]);
                m[i][j] = &scaled - &sub;
            }
        }
        rank += 1;
        r += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int, Radical};

    fn rv(vals: &[i64]) -> Vec<BigRat> {
        vals.iter().map(|&v| rat_int(v)).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let rows = alloc::vec![rv(&[1, -1, 0]), rv(&[1, 1, -2])];
        assert_eq!(rat_rank(&rows), 2);
        let ns = rat_nullspace(&rows);
        assert_eq!(ns.len(), 1);
        // nullspace is the ones direction
        let v = &ns[0];
        assert_eq!(v[0], v[1]);
        assert_eq!(v[1], v[2]);
    }

    #[test]
    fn solve_square() {
        let a = alloc::vec![rv(&[2, 0]), rv(&[0, 2])];
        let x = rat_solve(&a, &[rat_int(2), rat_int(0)]).unwrap();
        assert_eq!(x, alloc::vec![rat_int(1), rat_int(0)]);
        let singular = alloc::vec![rv(&[1, 1]), rv(&[2, 2])];
        assert!(rat_solve(&singular, &[rat_int(1), rat_int(2)]).is_none());
    }

    #[test]
    fn dependency_certificate_vanishes() {
        let rows = alloc::vec![rv(&[1, 2]), rv(&[2, 4]), rv(&[0, 1])];
        let dep = rat_row_dependency(&rows).unwrap();
        // certificate really is a vanishing combination
        for col in 0..2 {
            let mut s = BigRat::from_integer(0.into());
            for (i, c) in dep.iter().enumerate() {
                s += c * &rows[i][col];
            }
            assert_eq!(s, rat(0, 1));
        }
        assert!(dep.iter().any(|c| !num_traits::Zero::is_zero(c)));
    }

    #[test]
    fn radical_rank_with_sqrt2_entries() {
        let s2 = RadicalSum::from_radical(&Radical::new(rat_int(1), rat_int(2)).unwrap());
        let one = RadicalSum::from_rational(rat_int(1));
        let zero = RadicalSum::zero();
        // (1, 1, s2), (1, 1, -s2), (1, -1, 0) has rank 3
        let rows = alloc::vec![
            alloc::vec![one.clone(), one.clone(), s2.clone()],
            alloc::vec![one.clone(), one.clone(), (-&s2).clone()],
            alloc::vec![one.clone(), (-&one).clone(), zero.clone()],
        ];
        assert_eq!(radical_rank(&rows), 3);
        // duplicated row drops the rank
        let rows2 = alloc::vec![
            alloc::vec![one.clone(), s2.clone()],
            alloc::vec![one.clone(), s2.clone()],
        ];
        assert_eq!(radical_rank(&rows2), 1);
    }
}
