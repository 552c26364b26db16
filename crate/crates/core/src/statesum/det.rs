//! Determinant of the Alexander-type matrix of a decorated diagram.

use crate::diagram::{CornerLabel, CrossingKind, DecoratedDiagram};
use crate::error::Result;
use crate::lattice::{HalfMonomial, MeridianMap};
use crate::ring::GroupRingElement;

use super::{weight_tables, WeightTables};

/// Rows are crossings, columns unmarked regions in id order; each entry
/// sums the signed weights `M * A` of the crossing's corners in that region,
/// with the south corner of a double point and the west corner of a circle
/// crossing negated. Those two flips make every state enter the expansion
/// with the same permutation sign.
pub fn alexander_matrix(dd: &DecoratedDiagram, tables: &WeightTables, rank: usize) -> Vec<Vec<GroupRingElement>> {
    let cols: Vec<usize> = (0..dd.regions.len())
        .filter(|&r| r != dd.marked.0 && r != dd.marked.1)
        .collect();
    dd.crossings
        .iter()
        .enumerate()
        .map(|(i, c)| {
            cols.iter()
                .map(|&r| {
                    let mut e = GroupRingElement::zero(rank);
                    for (k, corner) in c.corners.iter().enumerate() {
                        if corner.region == r {
                            let mut sign = tables.m[i][k];
                            let flip = match c.kind {
                                CrossingKind::Double { .. } => corner.label == CornerLabel::S,
                                CrossingKind::Circle { .. } => corner.label == CornerLabel::W,
                            };
                            if flip {
                                sign = -sign;
                            }
                            e = e.add(&super::signed(sign, &tables.a[i][k]));
                        }
                    }
                    e
                })
                .collect()
        })
        .collect()
}

/// Expansion over column subsets; exponential in `n`, meant for `n <= 8`.
pub fn det_cofactor(a: &[Vec<GroupRingElement>], rank: usize) -> GroupRingElement {
    let n = a.len();
    let mut dp: Vec<Option<GroupRingElement>> = vec![None; 1 << n];
    dp[0] = Some(GroupRingElement::one(rank));
    for mask in 0usize..(1 << n) {
        let Some(cur) = dp[mask].take() else { continue };
        let row = mask.count_ones() as usize;
        if row == n {
            dp[mask] = Some(cur);
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) != 0 || a[row][j].is_zero() {
                continue;
            }
            // inversions added by placing this row in column j
            let above = (mask >> (j + 1)).count_ones();
            let mut term = cur.mul(&a[row][j]);
            if above % 2 == 1 {
                term = term.neg();
            }
            let slot = &mut dp[mask | (1 << j)];
            *slot = Some(match slot.take() {
                Some(x) => x.add(&term),
                None => term,
            });
        }
        dp[mask] = Some(cur);
    }
    dp[(1 << n) - 1].take().unwrap_or_else(|| GroupRingElement::zero(rank))
}

/// Fraction-free elimination. Rows are first shifted by monomials so all
/// exponents are non-negative; the shift is undone at the end.
pub fn det_bareiss(a: &[Vec<GroupRingElement>], rank: usize) -> GroupRingElement {
    let n = a.len();
    let mut m: Vec<Vec<GroupRingElement>> = a.to_vec();
    let mut undo = HalfMonomial::identity(rank);
    for row in &mut m {
        let mut lo: Option<Vec<i64>> = None;
        for e in row.iter() {
            if let Some(h) = e.min_halves() {
                lo = Some(match lo {
                    None => h,
                    Some(l) => l.iter().zip(&h).map(|(x, y)| *x.min(y)).collect(),
                });
            }
        }
        let Some(lo) = lo else {
            return GroupRingElement::zero(rank);
        };
        let s = HalfMonomial::from_halves(lo);
        undo = undo.mul(&s);
        let inv = s.inv();
        for e in row.iter_mut() {
            *e = e.shift(&inv);
        }
    }
    let mut negate = false;
    let mut prev = GroupRingElement::one(rank);
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return GroupRingElement::zero(rank);
            };
            m.swap(k, r);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = GroupRingElement::zero(rank);
        }
        prev = m[k][k].clone();
    }
    let mut d = if n == 0 {
        GroupRingElement::one(rank)
    } else {
        m[n - 1][n - 1].clone()
    };
    if negate {
        d = d.neg();
    }
    d.shift(&undo)
}

const COFACTOR_LIMIT: usize = 8;

/// Signed minor of the matrix with the columns of the two marked regions
/// removed.
pub fn alexander_det(dd: &DecoratedDiagram, merid: &MeridianMap) -> Result<GroupRingElement> {
    let rank = merid.rank();
    let tables = weight_tables(dd, merid)?;
    let a = alexander_matrix(dd, &tables, rank);
    // a disconnected diagram has more free regions than crossings and no state
    if a.first().map_or(dd.regions.len() != 2, |row| row.len() != a.len()) {
        return Ok(GroupRingElement::zero(rank));
    }
    let det = if a.len() <= COFACTOR_LIMIT {
        det_cofactor(&a, rank)
    } else {
        det_bareiss(&a, rank)
    };
    // cofactor sign of the two deleted columns, taken in (left, right) order;
    // with it the ratio to the state sum no longer depends on the base point
    let (u, v) = dd.marked;
    let odd = (u + v) % 2 == 1;
    Ok(if odd != (u > v) { det.neg() } else { det })
}
