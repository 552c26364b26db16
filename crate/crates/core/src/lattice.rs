//! The meridian lattice of a graph complement and monomials with
//! half-integer exponents over a chosen basis.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Incoming and outgoing edge occurrences at one vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexIncidence {
    pub incoming: Vec<String>,
    pub outgoing: Vec<String>,
}

/// A group element `prod b_i^(halves_i / 2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfMonomial {
    halves: Vec<i64>,
}

impl HalfMonomial {
    pub fn identity(rank: usize) -> Self {
        HalfMonomial { halves: vec![0; rank] }
    }

    pub fn from_halves(halves: Vec<i64>) -> Self {
        HalfMonomial { halves }
    }

    /// Integral monomial from ordinary exponents.
    pub fn from_exponents(exps: &[i64]) -> Self {
        HalfMonomial {
            halves: exps.iter().map(|e| 2 * e).collect(),
        }
    }

    /// The `i`-th basis element.
    pub fn generator(rank: usize, i: usize) -> Self {
        let mut m = Self::identity(rank);
        m.halves[i] = 2;
        m
    }

    pub fn halves(&self) -> &[i64] {
        &self.halves
    }

    pub fn rank(&self) -> usize {
        self.halves.len()
    }

    pub fn is_identity(&self) -> bool {
        self.halves.iter().all(|&h| h == 0)
    }

    pub fn is_integral(&self) -> bool {
        self.halves.iter().all(|h| h % 2 == 0)
    }

    pub fn mul(&self, other: &HalfMonomial) -> HalfMonomial {
        assert_eq!(self.rank(), other.rank(), "lattice mismatch");
        HalfMonomial {
            halves: self.halves.iter().zip(&other.halves).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn try_mul(&self, other: &HalfMonomial) -> Result<HalfMonomial> {
        if self.rank() != other.rank() {
            return Err(Error::LatticeMismatch(self.rank(), other.rank()));
        }
        Ok(self.mul(other))
    }

    pub fn inv(&self) -> HalfMonomial {
        HalfMonomial {
            halves: self.halves.iter().map(|h| -h).collect(),
        }
    }

    pub fn div(&self, other: &HalfMonomial) -> HalfMonomial {
        self.mul(&other.inv())
    }

    pub fn pow(&self, n: i64) -> HalfMonomial {
        HalfMonomial {
            halves: self.halves.iter().map(|h| h * n).collect(),
        }
    }

    pub fn sqrt(&self) -> Result<HalfMonomial> {
        if !self.is_integral() {
            return Err(Error::NonSquare);
        }
        Ok(HalfMonomial {
            halves: self.halves.iter().map(|h| h / 2).collect(),
        })
    }

    /// Image under the linear map sending basis element `i` to `images[i]`.
    pub fn map(&self, images: &[HalfMonomial], target_rank: usize) -> HalfMonomial {
        let mut out = vec![0i64; target_rank];
        for (h, img) in self.halves.iter().zip(images) {
            // b_i^(h/2) -> img^(h/2); img is assumed integral when h is odd
            for (o, g) in out.iter_mut().zip(img.halves()) {
                *o += h * g;
            }
        }
        for o in &mut out {
            debug_assert!(*o % 2 == 0, "non half-integral image");
            *o /= 2;
        }
        HalfMonomial { halves: out }
    }

    /// Text like `t^(3/2)*s^(-1)`; the identity prints as `1`.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (h, name) in self.halves.iter().zip(names) {
            if *h == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push('*');
            }
            out.push_str(name);
            if *h != 2 {
                out.push_str("^(");
                if h % 2 == 0 {
                    let _ = write!(out, "{}", h / 2);
                } else {
                    let _ = write!(out, "{}/2", h);
                }
                out.push(')');
            }
        }
        if out.is_empty() {
            out.push('1');
        }
        out
    }
}

/// Names of the basis together with the meridian of every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeridianMap {
    pub names: Vec<String>,
    pub meridians: BTreeMap<String, HalfMonomial>,
}

impl MeridianMap {
    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, edge: &str) -> Result<&HalfMonomial> {
        self.meridians
            .get(edge)
            .ok_or_else(|| Error::UnknownEdge(edge.to_string()))
    }
}

/// `H_1` of the graph complement, presented by edge meridians modulo
/// vertex relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeridianLattice {
    edge_ids: Vec<String>,
    relation_matrix: Vec<Vec<i64>>,
    rank: usize,
    basis: Vec<usize>,
    basis_names: Vec<String>,
    projection: Vec<Vec<i64>>,
}

impl MeridianLattice {
    pub fn edge_ids(&self) -> &[String] {
        &self.edge_ids
    }

    pub fn relation_matrix(&self) -> &[Vec<i64>] {
        &self.relation_matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    /// `k x E` matrix sending edge coordinates to basis coordinates.
    pub fn projection(&self) -> &[Vec<i64>] {
        &self.projection
    }

    fn edge_index(&self, edge: &str) -> Result<usize> {
        self.edge_ids
            .iter()
            .position(|e| e == edge)
            .ok_or_else(|| Error::UnknownEdge(edge.to_string()))
    }

    pub fn meridian(&self, edge: &str) -> Result<HalfMonomial> {
        let j = self.edge_index(edge)?;
        Ok(HalfMonomial::from_exponents(
            &self.projection.iter().map(|row| row[j]).collect::<Vec<_>>(),
        ))
    }

    /// Projects an edge-coordinate exponent vector (in half units).
    pub fn project_halves(&self, halves: &[i64]) -> HalfMonomial {
        HalfMonomial::from_halves(
            self.projection
                .iter()
                .map(|row| row.iter().zip(halves).map(|(p, h)| p * h).sum())
                .collect(),
        )
    }

    pub fn meridian_map(&self) -> MeridianMap {
        let meridians = self
            .edge_ids
            .iter()
            .map(|e| (e.clone(), self.meridian(e).expect("known edge")))
            .collect();
        MeridianMap {
            names: self.basis_names.clone(),
            meridians,
        }
    }

    /// Re-express the lattice in the basis given by the listed edges.
    pub fn with_basis(&self, names: &[String]) -> Result<MeridianLattice> {
        let joined = names.join(",");
        if names.len() != self.rank {
            return Err(Error::InvalidBasis(joined));
        }
        let mut cols = Vec::with_capacity(names.len());
        for n in names {
            let j = self.edge_index(n)?;
            if cols.contains(&j) {
                return Err(Error::InvalidBasis(joined));
            }
            cols.push(j);
        }
        // q[i][c] = coordinate i of the meridian of the c-th new basis edge
        let q: Vec<Vec<i64>> = (0..self.rank)
            .map(|i| cols.iter().map(|&j| self.projection[i][j]).collect())
            .collect();
        let qinv = invert_unimodular(&q).ok_or_else(|| Error::InvalidBasis(joined.clone()))?;
        let projection: Vec<Vec<i64>> = (0..self.rank)
            .map(|r| {
                (0..self.edge_ids.len())
                    .map(|j| (0..self.rank).map(|i| qinv[r][i] * self.projection[i][j]).sum())
                    .collect()
            })
            .collect();
        Ok(MeridianLattice {
            edge_ids: self.edge_ids.clone(),
            relation_matrix: self.relation_matrix.clone(),
            rank: self.rank,
            basis: cols,
            basis_names: names.to_vec(),
            projection,
        })
    }

    /// Edge indices of the basis.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }
}

/// Builds the lattice from the edge list and the per-vertex incidences.
pub fn build_lattice(edges: &[String], vertices: &[VertexIncidence]) -> Result<MeridianLattice> {
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let index: BTreeMap<&str, usize> = edges.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    let e = edges.len();
    let mut rel = Vec::with_capacity(vertices.len());
    for v in vertices {
        let mut row = vec![0i64; e];
        for name in &v.incoming {
            let j = *index
                .get(name.as_str())
                .ok_or_else(|| Error::UnknownEdge(name.clone()))?;
            row[j] += 1;
        }
        for name in &v.outgoing {
            let j = *index
                .get(name.as_str())
                .ok_or_else(|| Error::UnknownEdge(name.clone()))?;
            row[j] -= 1;
        }
        rel.push(row);
    }

    let big: Vec<Vec<BigInt>> = rel
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    if let Some(bad) = smith_invariants(&big).into_iter().find(|d| !d.is_one()) {
        return Err(Error::NonFreeQuotient(bad.to_string()));
    }

    // Eliminate on unit pivots, scanning columns from the last edge back,
    // so the earliest edges survive as basis elements.
    let mut rows = rel.clone();
    let mut used = vec![false; rows.len()];
    let mut pivot_row_of = vec![None; e];
    for j in (0..e).rev() {
        let Some(r) = (0..rows.len()).find(|&r| !used[r] && rows[r][j].abs() == 1) else {
            continue;
        };
        used[r] = true;
        if rows[r][j] == -1 {
            for x in &mut rows[r] {
                *x = -*x;
            }
        }
        let pivot = rows[r].clone();
        for (r2, row) in rows.iter_mut().enumerate() {
            if r2 != r && row[j] != 0 {
                let f = row[j];
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= f * p;
                }
            }
        }
        pivot_row_of[j] = Some(r);
    }
    if rows
        .iter()
        .enumerate()
        .any(|(r, row)| !used[r] && row.iter().any(|&x| x != 0))
    {
        return Err(Error::NonFreeQuotient("elimination stalled".into()));
    }

    let basis: Vec<usize> = (0..e).filter(|&j| pivot_row_of[j].is_none()).collect();
    let k = basis.len();
    let mut projection = vec![vec![0i64; e]; k];
    for (i, &b) in basis.iter().enumerate() {
        projection[i][b] = 1;
    }
    for j in 0..e {
        if let Some(r) = pivot_row_of[j] {
            for (i, &b) in basis.iter().enumerate() {
                projection[i][j] = -rows[r][b];
            }
        }
    }
    for row in &rel {
        for prow in &projection {
            let s: i64 = prow.iter().zip(row).map(|(p, x)| p * x).sum();
            assert_eq!(s, 0, "projection does not kill a relation");
        }
    }
    Ok(MeridianLattice {
        edge_ids: edges.to_vec(),
        relation_matrix: rel,
        rank: k,
        basis_names: basis.iter().map(|&j| edges[j].clone()).collect(),
        basis,
        projection,
    })
}

/// Nonzero diagonal entries of the Smith normal form, as absolute values.
pub fn smith_invariants(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let d = &q * &a[t][j];
                    a[i][j] -= d;
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                    if a[i][t].abs() < a[t][t].abs() {
                        a.swap(t, i);
                    }
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for i in t..rows {
                    let d = &q * &a[i][t];
                    a[i][j] -= d;
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                    if a[t][j].abs() < a[t][t].abs() {
                        for row in a.iter_mut() {
                            row.swap(t, j);
                        }
                    }
                }
            }
            if dirty {
                continue;
            }
            // pivot must divide the rest of the block
            let mut fixed = true;
            'scan: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !a[i][j].is_multiple_of(&a[t][t]) {
                        for jj in t..cols {
                            let v = a[i][jj].clone();
                            a[t][jj] += v;
                        }
                        fixed = false;
                        break 'scan;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        out.push(a[t][t].abs());
        t += 1;
    }
    out
}

fn invert_unimodular(q: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = q.len();
    let mut a: Vec<Vec<BigRational>> = q
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|&x| BigRational::from_integer(x.into())).collect();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let pv = a[c][c].clone();
        det *= &pv;
        for x in a[c].iter_mut() {
            *x /= &pv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..2 * n {
                    let d = &f * &a[c][j];
                    a[r][j] -= d;
                }
            }
        }
    }
    if det.abs() != BigRational::one() {
        return None;
    }
    a.into_iter()
        .map(|row| {
            row[n..]
                .iter()
                .map(|x| {
                    if x.is_integer() {
                        i64::try_from(x.to_integer()).ok()
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect()
}
