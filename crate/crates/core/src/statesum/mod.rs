//! Kauffman states and the multi-variable state sum.

mod det;
mod skein;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::diagram::{
    all_base_points, decorate, BasePoint, CornerLabel, CrossingKind, DecoratedDiagram, Diagram, Sign,
};
use crate::error::{Error, Result};
use crate::lattice::{HalfMonomial, MeridianMap};
use crate::ring::{GroupRingElement, RingFraction};
use crate::rotation::{winding_numbers_in, WindingAssignment};

pub use det::{alexander_det, alexander_matrix, det_bareiss, det_cofactor};
pub use skein::{resolve, retrace_edges, skein_check, skein_coefficients, Resolution, Resolved, SkeinReport};

/// One chosen corner per crossing; `corners[i]` indexes `dd.crossings[i].corners`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KauffmanState {
    pub corners: Vec<usize>,
}

impl KauffmanState {
    pub fn labels(&self, dd: &DecoratedDiagram) -> Vec<(String, CornerLabel)> {
        dd.crossings
            .iter()
            .zip(&self.corners)
            .map(|(c, &k)| (c.id.clone(), c.corners[k].label))
            .collect()
    }
}

/// `M` sign and `A` weight of every corner, parallel to `dd.crossings`.
#[derive(Debug, Clone)]
pub struct WeightTables {
    pub m: Vec<Vec<i64>>,
    pub a: Vec<Vec<GroupRingElement>>,
}

pub fn weight_tables(dd: &DecoratedDiagram, merid: &MeridianMap) -> Result<WeightTables> {
    let mut m = Vec::with_capacity(dd.crossings.len());
    let mut a = Vec::with_capacity(dd.crossings.len());
    for c in &dd.crossings {
        let mut ms = Vec::new();
        let mut as_ = Vec::new();
        for corner in &c.corners {
            let (sign, w) = match &c.kind {
                CrossingKind::Double { sign, over_edge, .. } => {
                    let t = merid.get(over_edge)?;
                    let one = HalfMonomial::identity(t.rank());
                    let (sign_n, heavy) = match sign {
                        Sign::Pos => (-1, t.inv()),
                        Sign::Neg => (-1, t.clone()),
                    };
                    match (corner.label, sign) {
                        (CornerLabel::N, _) => (sign_n, heavy),
                        (CornerLabel::W, Sign::Pos) | (CornerLabel::E, Sign::Neg) => (1, heavy),
                        _ => (1, one),
                    }
                }
                CrossingKind::Circle { edge, .. } => {
                    let t = merid.get(edge)?;
                    let half = t.sqrt().expect("meridians are integral");
                    let w = match corner.label {
                        CornerLabel::W => GroupRingElement::monomial(half.inv(), 1),
                        CornerLabel::E => GroupRingElement::monomial(half, 1),
                        CornerLabel::N => GroupRingElement::binomial(half.inv(), half),
                        CornerLabel::S => unreachable!("circle crossings have no south corner"),
                    };
                    ms.push(1);
                    as_.push(w);
                    continue;
                }
            };
            ms.push(sign);
            as_.push(GroupRingElement::monomial(w, 1));
        }
        m.push(ms);
        a.push(as_);
    }
    Ok(WeightTables { m, a })
}

pub fn state_weight(s: &KauffmanState, tables: &WeightTables, rank: usize) -> (i64, GroupRingElement) {
    let mut sign = 1;
    let mut poly = GroupRingElement::one(rank);
    for (i, &k) in s.corners.iter().enumerate() {
        sign *= tables.m[i][k];
        poly = poly.mul(&tables.a[i][k]);
    }
    (sign, poly)
}

/// Crossing order and per-crossing corner order used by the search.
struct Plan {
    order: Vec<usize>,
    /// for `order[j]`: (corner index, region bit) sorted by region
    choices: Vec<Vec<(usize, usize)>>,
    /// distinct region bits touched by `order[j]`
    touched: Vec<Vec<usize>>,
    /// initial number of crossings touching each region bit
    cover: Vec<u32>,
    n_bits: usize,
}

fn plan(dd: &DecoratedDiagram) -> Result<Plan> {
    let nr = dd.regions.len();
    let mut bit_of = vec![usize::MAX; nr];
    let mut n_bits = 0;
    for (r, b) in bit_of.iter_mut().enumerate() {
        if r != dd.marked.0 && r != dd.marked.1 {
            *b = n_bits;
            n_bits += 1;
        }
    }
    if n_bits > 128 {
        return Err(Error::TooLarge(format!("{n_bits} unmarked regions")));
    }
    let mut order: Vec<usize> = (0..dd.crossings.len()).collect();
    order.sort_by_key(|&i| (dd.crossings[i].corners.len(), i));
    let mut cover = vec![0u32; n_bits];
    let mut choices = Vec::new();
    let mut touched = Vec::new();
    for &i in &order {
        let mut ch: Vec<(usize, usize)> = dd.crossings[i]
            .corners
            .iter()
            .enumerate()
            .filter(|(_, c)| bit_of[c.region] != usize::MAX)
            .map(|(k, c)| (k, c.region))
            .collect();
        ch.sort_by_key(|&(k, r)| (r, k));
        let ch: Vec<(usize, usize)> = ch.into_iter().map(|(k, r)| (k, bit_of[r])).collect();
        let mut t: Vec<usize> = ch.iter().map(|&(_, b)| b).collect();
        t.dedup();
        for &b in &t {
            cover[b] += 1;
        }
        choices.push(ch);
        touched.push(t);
    }
    Ok(Plan {
        order,
        choices,
        touched,
        cover,
        n_bits,
    })
}

/// Backtracking over corner choices. `visit` receives the chosen corner
/// index per position of `plan.order`.
fn search(
    p: &Plan,
    depth: usize,
    used: u128,
    cover: &mut [u32],
    picked: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if depth == p.order.len() {
        visit(picked);
        return;
    }
    for &b in &p.touched[depth] {
        cover[b] -= 1;
    }
    // a free region that no remaining crossing can reach kills the branch
    let dead = |cover: &[u32], used: u128, except: usize| {
        p.touched[depth]
            .iter()
            .any(|&b| b != except && used & (1 << b) == 0 && cover[b] == 0)
    };
    for &(k, b) in &p.choices[depth] {
        if used & (1u128 << b) != 0 {
            continue;
        }
        let next = used | (1u128 << b);
        if dead(cover, next, b) {
            continue;
        }
        picked.push(k);
        search(p, depth + 1, next, cover, picked, visit);
        picked.pop();
    }
    for &b in &p.touched[depth] {
        cover[b] += 1;
    }
}

fn to_state(p: &Plan, picked: &[usize]) -> KauffmanState {
    let mut corners = vec![0; picked.len()];
    for (j, &k) in picked.iter().enumerate() {
        corners[p.order[j]] = k;
    }
    KauffmanState { corners }
}

/// All Kauffman states; empty for disconnected diagrams.
pub fn enumerate_states(dd: &DecoratedDiagram) -> Result<Vec<KauffmanState>> {
    if !dd.connected {
        return Ok(Vec::new());
    }
    let p = plan(dd)?;
    debug_assert_eq!(p.n_bits, p.order.len());
    let mut out = Vec::new();
    let mut cover = p.cover.clone();
    search(&p, 0, 0, &mut cover, &mut Vec::new(), &mut |picked| {
        out.push(to_state(&p, picked))
    });
    Ok(out)
}

/// Number of enumeration workers: `SPATIAL_ALEX_THREADS` if set, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("SPATIAL_ALEX_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count())
            .build()
            .expect("thread pool")
    })
}

const PARALLEL_THRESHOLD: usize = 10;

/// `sum over states of M(s) A(s)`.
pub fn state_polynomial(dd: &DecoratedDiagram, tables: &WeightTables, rank: usize) -> Result<(GroupRingElement, u64)> {
    if !dd.connected {
        return Ok((GroupRingElement::zero(rank), 0));
    }
    let p = plan(dd)?;
    // products along the search order, accumulated per subtree
    fn run(p: &Plan, tables: &WeightTables, rank: usize, prefix: &[usize]) -> (GroupRingElement, u64) {
        let mut cover = p.cover.clone();
        let mut used = 0u128;
        for (j, &k) in prefix.iter().enumerate() {
            for &b in &p.touched[j] {
                cover[b] -= 1;
            }
            let b = p.choices[j].iter().find(|c| c.0 == k).unwrap().1;
            used |= 1 << b;
        }
        let mut partial: Vec<GroupRingElement> = vec![GroupRingElement::one(rank)];
        let mut signs: Vec<i64> = vec![1];
        for (j, &k) in prefix.iter().enumerate() {
            let i = p.order[j];
            partial.push(partial[j].mul(&tables.a[i][k]));
            signs.push(signs[j] * tables.m[i][k]);
        }
        let mut sum = GroupRingElement::zero(rank);
        let mut count = 0u64;
        let base = prefix.len();
        // the visitor sees the full pick list; rebuild products incrementally
        let mut picked = prefix.to_vec();
        let mut stack_poly = partial;
        let mut stack_sign = signs;
        #[allow(clippy::too_many_arguments)]
        fn go(
            p: &Plan,
            tables: &WeightTables,
            depth: usize,
            used: u128,
            cover: &mut [u32],
            picked: &mut Vec<usize>,
            polys: &mut Vec<GroupRingElement>,
            signs: &mut Vec<i64>,
            sum: &mut GroupRingElement,
            count: &mut u64,
        ) {
            if depth == p.order.len() {
                let term = polys.last().unwrap();
                if *signs.last().unwrap() < 0 {
                    *sum = sum.sub(term);
                } else {
                    *sum = sum.add(term);
                }
                *count += 1;
                return;
            }
            for &b in &p.touched[depth] {
                cover[b] -= 1;
            }
            let i = p.order[depth];
            for &(k, b) in &p.choices[depth] {
                if used & (1u128 << b) != 0 {
                    continue;
                }
                let next = used | (1u128 << b);
                if p.touched[depth]
                    .iter()
                    .any(|&x| x != b && next & (1 << x) == 0 && cover[x] == 0)
                {
                    continue;
                }
                let poly = polys.last().unwrap().mul(&tables.a[i][k]);
                let sign = signs.last().unwrap() * tables.m[i][k];
                polys.push(poly);
                signs.push(sign);
                picked.push(k);
                go(p, tables, depth + 1, next, cover, picked, polys, signs, sum, count);
                picked.pop();
                polys.pop();
                signs.pop();
            }
            for &b in &p.touched[depth] {
                cover[b] += 1;
            }
        }
        go(
            p,
            tables,
            base,
            used,
            &mut cover,
            &mut picked,
            &mut stack_poly,
            &mut stack_sign,
            &mut sum,
            &mut count,
        );
        (sum, count)
    }

    if p.order.len() < PARALLEL_THRESHOLD || worker_count() <= 1 {
        return Ok(run(&p, tables, rank, &[]));
    }
    // split on the first two levels
    let mut prefixes = Vec::new();
    for &(k0, b0) in &p.choices[0] {
        for &(k1, b1) in &p.choices[1] {
            if b0 != b1 {
                prefixes.push(vec![k0, k1]);
            }
        }
    }
    let parts: Vec<(GroupRingElement, u64)> =
        pool().install(|| prefixes.par_iter().map(|pre| run(&p, tables, rank, pre)).collect());
    let mut sum = GroupRingElement::zero(rank);
    let mut count = 0;
    for (s, c) in parts {
        sum = sum.add(&s);
        count += c;
    }
    Ok((sum, count))
}

/// `x - x t` for the winding `x` of the region on the right of the base
/// point and the meridian `t` of its edge.
pub fn delta_norm(dd: &DecoratedDiagram, w: &WindingAssignment, merid: &MeridianMap) -> Result<GroupRingElement> {
    if dd.marked.0 == dd.marked.1 {
        return Err(Error::MarkedRegionsCoincide);
    }
    let x = w.get(dd.marked.1);
    let t = merid.get(&dd.base_edge)?;
    Ok(GroupRingElement::binomial(x.clone(), x.mul(t)))
}

/// The state sum at one base point with its ingredients.
#[derive(Debug, Clone)]
pub struct StateSum {
    pub numerator: GroupRingElement,
    pub delta: GroupRingElement,
    pub value: RingFraction,
    pub states: u64,
}

pub fn state_sum(dd: &DecoratedDiagram, merid: &MeridianMap) -> Result<StateSum> {
    let rank = merid.rank();
    let w = winding_numbers_in(&dd.regions, &dd.diagram, merid)?;
    let delta = delta_norm(dd, &w, merid)?;
    let tables = weight_tables(dd, merid)?;
    let (numerator, states) = state_polynomial(dd, &tables, rank)?;
    let value = RingFraction::new(numerator.clone(), delta.clone())?;
    Ok(StateSum {
        numerator,
        delta,
        value,
        states,
    })
}

/// Default base point: the first arc, or the first free loop.
pub fn default_base(d: &Diagram) -> Result<BasePoint> {
    all_base_points(d).into_iter().next().ok_or(Error::EmptyGraph)
}

pub fn state_sum_at(d: &Diagram, base: &BasePoint, merid: &MeridianMap) -> Result<StateSum> {
    state_sum(&decorate(d, base)?, merid)
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub base: BasePoint,
    pub numerator: GroupRingElement,
    pub delta: GroupRingElement,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub value: RingFraction,
    pub entries: Vec<SweepEntry>,
}

fn base_name(b: &BasePoint) -> String {
    match b {
        BasePoint::Arc(a) => a.clone(),
        BasePoint::Loop(l) => l.clone(),
    }
}

/// State sum at every base point; all values must agree.
pub fn base_point_sweep(d: &Diagram, merid: &MeridianMap) -> Result<SweepReport> {
    let mut entries: Vec<SweepEntry> = Vec::new();
    let mut value: Option<RingFraction> = None;
    for b in all_base_points(d) {
        let start = Instant::now();
        let s = state_sum_at(d, &b, merid)?;
        let elapsed = start.elapsed();
        if let Some(v) = &value {
            if !v.fraction_eq(&s.value)? {
                return Err(Error::SweepMismatch(base_name(&entries[0].base), base_name(&b)));
            }
        } else {
            value = Some(s.value.clone());
        }
        entries.push(SweepEntry {
            base: b,
            numerator: s.numerator,
            delta: s.delta,
            elapsed,
        });
    }
    Ok(SweepReport {
        value: value.ok_or(Error::EmptyGraph)?,
        entries,
    })
}

/// Scalar sum helper for callers holding raw coefficient counts.
pub fn signed(sign: i64, p: &GroupRingElement) -> GroupRingElement {
    if sign < 0 {
        p.scale(&BigInt::from(-1))
    } else {
        p.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sum_of(d: &Diagram, base: &BasePoint) -> StateSum {
        let m = d.lattice().unwrap().meridian_map();
        state_sum_at(d, base, &m).unwrap()
    }

    #[test]
    fn circle_sum() {
        let d = fixtures::circle();
        let s = sum_of(&d, &BasePoint::Loop("L".into()));
        assert_eq!(s.states, 1);
        assert!(s.numerator.is_one());
        // x - x t with x = 1 (outside) and t the loop meridian
        let t = HalfMonomial::from_halves(vec![2]);
        assert_eq!(s.delta, GroupRingElement::binomial(HalfMonomial::identity(1), t));
    }

    #[test]
    fn theta_state_count() {
        let d = fixtures::theta();
        let dd = decorate(&d, &BasePoint::Arc("b".into())).unwrap();
        assert_eq!(enumerate_states(&dd).unwrap().len(), 2);
    }

    #[test]
    fn enumeration_matches_search_sum() {
        for d in [
            fixtures::fig5(),
            fixtures::theta(),
            fixtures::trefoil(),
            fixtures::hopf(),
        ] {
            let m = d.lattice().unwrap().meridian_map();
            for b in all_base_points(&d) {
                let dd = decorate(&d, &b).unwrap();
                let tables = weight_tables(&dd, &m).unwrap();
                let mut direct = GroupRingElement::zero(m.rank());
                let states = enumerate_states(&dd).unwrap();
                for s in &states {
                    let (sign, p) = state_weight(s, &tables, m.rank());
                    direct = direct.add(&signed(sign, &p));
                }
                let (fast, n) = state_polynomial(&dd, &tables, m.rank()).unwrap();
                assert_eq!(direct, fast);
                assert_eq!(n as usize, states.len());
            }
        }
    }

    #[test]
    fn disconnected_is_zero() {
        let d = fixtures::fig5_and_circle();
        let s = sum_of(&d, &BasePoint::Arc("t1".into()));
        assert!(s.value.is_zero());
        assert_eq!(s.states, 0);
    }

    #[test]
    fn sweeps_agree() {
        for d in [
            fixtures::circle(),
            fixtures::fig5(),
            fixtures::theta(),
            fixtures::hopf(),
            fixtures::trefoil(),
        ] {
            let m = d.lattice().unwrap().meridian_map();
            base_point_sweep(&d, &m).unwrap();
        }
    }
}
