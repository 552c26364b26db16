//! Resolving one double crossing into two-vertex tangles and comparing the
//! state sums on both sides of the crossing relation.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagram::{ArcDecl, BasePoint, Diagram, EdgeDecl, Node, Sign};
use crate::error::{Error, Result};
use crate::lattice::{HalfMonomial, MeridianMap};
use crate::ring::{GroupRingElement, RingFraction};

use super::state_sum_at;

/// Which two-vertex tangle replaces the crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// two vertices joined by a rung from right to left, meridian `s t^-1`
    H,
    /// both strands merge into one middle edge, meridian `t s`, then split
    MergeSplit,
}

/// A rewritten diagram with the meridians it inherits.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub diagram: Diagram,
    pub meridians: MeridianMap,
}

fn fresh(taken: &BTreeSet<String>, stem: &str) -> String {
    if !taken.contains(stem) {
        return stem.to_string();
    }
    (1..)
        .map(|k| format!("{stem}.{k}"))
        .find(|s| !taken.contains(s))
        .unwrap()
}

/// Regroup arcs into edges after vertices were introduced.
///
/// Arcs keep their ids; an original edge that now forms several paths is
/// split into pieces named after it. Each returned edge maps to the edge it
/// came from.
pub fn retrace_edges(d: &mut Diagram, parent: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>> {
    let inc = d.incidence()?;
    let n = d.arcs.len();
    // successor through a crossing
    let mut next: Vec<Option<usize>> = vec![None; n];
    let mut through = vec![false; n];
    for node in &d.nodes {
        if let Node::Crossing { sw, se, ne, nw, .. } = node {
            for (a, b) in [(sw, ne), (se, nw)] {
                let (ia, ib) = (inc.arc_index[a], inc.arc_index[b]);
                next[ia] = Some(ib);
                through[ib] = true;
            }
        }
    }
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; n];
    for start in 0..n {
        if through[start] {
            continue;
        }
        let mut p = vec![start];
        seen[start] = true;
        let mut cur = start;
        while let Some(x) = next[cur] {
            p.push(x);
            seen[x] = true;
            cur = x;
        }
        paths.push(p);
    }
    // closed paths never meet a vertex and keep their edge
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut p = vec![start];
        seen[start] = true;
        let mut cur = next[start].unwrap();
        while cur != start {
            p.push(cur);
            seen[cur] = true;
            cur = next[cur].unwrap();
        }
        paths.push(p);
    }
    let mut by_edge: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (k, p) in paths.iter().enumerate() {
        by_edge.entry(d.arcs[p[0]].edge.clone()).or_default().push(k);
    }
    let old_order: Vec<String> = d.edges.iter().map(|e| e.id.clone()).collect();
    let mut taken: BTreeSet<String> = old_order.iter().cloned().collect();
    let mut edges = Vec::new();
    let mut origin = BTreeMap::new();
    let loop_edges: BTreeSet<&str> = d.free_loops.iter().map(|l| l.edge.as_str()).collect();
    for e in &old_order {
        let root = parent.get(e).cloned().unwrap_or_else(|| e.clone());
        let Some(ks) = by_edge.get(e) else {
            if loop_edges.contains(e.as_str()) {
                edges.push(EdgeDecl { id: e.clone() });
                origin.insert(e.clone(), root);
            }
            continue;
        };
        for (j, &k) in ks.iter().enumerate() {
            let name = if j == 0 {
                e.clone()
            } else {
                let s = fresh(&taken, &format!("{e}.{j}"));
                taken.insert(s.clone());
                s
            };
            for &a in &paths[k] {
                d.arcs[a].edge = name.clone();
            }
            edges.push(EdgeDecl { id: name.clone() });
            origin.insert(name, root.clone());
        }
    }
    d.edges = edges;
    Ok(origin)
}

/// Replace crossing `crossing` by one of its two resolutions. The strand
/// entering at `sw` carries `t`, the one entering at `se` carries `s`.
pub fn resolve(d: &Diagram, crossing: &str, kind: Resolution, merid: &MeridianMap) -> Result<Resolved> {
    let idx = d
        .nodes
        .iter()
        .position(|n| n.id() == crossing && !n.is_vertex())
        .ok_or_else(|| Error::PatternNotFound(format!("no crossing `{crossing}`")))?;
    let Node::Crossing { sw, se, ne, nw, .. } = d.nodes[idx].clone() else {
        unreachable!()
    };
    let t = merid
        .get(d.arc_edge(&sw).ok_or_else(|| Error::UnknownArc(sw.clone()))?)?
        .clone();
    let s = merid
        .get(d.arc_edge(&se).ok_or_else(|| Error::UnknownArc(se.clone()))?)?
        .clone();
    let mut out = d.clone();
    let mut taken: BTreeSet<String> = d.edges.iter().map(|e| e.id.clone()).collect();
    taken.extend(d.arcs.iter().map(|a| a.id.clone()));
    taken.extend(d.nodes.iter().map(|n| n.id().to_string()));
    taken.extend(d.free_loops.iter().map(|l| l.id.clone()));
    let (stem, m_new) = match kind {
        Resolution::H => ("rung", s.div(&t)),
        Resolution::MergeSplit => ("mid", t.mul(&s)),
    };
    let mid = fresh(&taken, &format!("{crossing}.{stem}"));
    taken.insert(mid.clone());
    let (lo, hi) = match kind {
        Resolution::H => ("l", "r"),
        Resolution::MergeSplit => ("b", "t"),
    };
    let v1 = fresh(&taken, &format!("{crossing}.{lo}"));
    taken.insert(v1.clone());
    let v2 = fresh(&taken, &format!("{crossing}.{hi}"));
    let (n1, n2) = match kind {
        Resolution::H => (
            Node::Vertex {
                id: v1,
                incoming: vec![sw, mid.clone()],
                outgoing: vec![nw],
            },
            Node::Vertex {
                id: v2,
                incoming: vec![se],
                outgoing: vec![mid.clone(), ne],
            },
        ),
        Resolution::MergeSplit => (
            Node::Vertex {
                id: v1,
                incoming: vec![sw, se],
                outgoing: vec![mid.clone()],
            },
            Node::Vertex {
                id: v2,
                incoming: vec![mid.clone()],
                outgoing: vec![nw, ne],
            },
        ),
    };
    out.nodes.splice(idx..=idx, [n1, n2]);
    out.arcs.push(ArcDecl {
        id: mid.clone(),
        edge: mid.clone(),
    });
    out.edges.push(EdgeDecl { id: mid.clone() });
    let origin = retrace_edges(&mut out, &BTreeMap::new())?;
    let mut meridians = BTreeMap::new();
    for (e, root) in &origin {
        let m = if *root == mid {
            m_new.clone()
        } else {
            merid.get(root)?.clone()
        };
        meridians.insert(e.clone(), m);
    }
    out.validate()?;
    Ok(Resolved {
        diagram: out,
        meridians: MeridianMap {
            names: merid.names.clone(),
            meridians,
        },
    })
}

/// Both sides of the crossing relation at one crossing.
#[derive(Debug, Clone)]
pub struct SkeinReport {
    pub crossing: String,
    pub sign: Sign,
    pub lhs: RingFraction,
    pub h: RingFraction,
    pub merge_split: RingFraction,
    pub rhs: RingFraction,
    pub holds: bool,
}

fn half_bracket(u: &HalfMonomial) -> Result<GroupRingElement> {
    let h = u.sqrt()?;
    Ok(GroupRingElement::binomial(h.clone(), h.inv()))
}

/// Coefficients `(c_H, c_MS)` of the relation for a crossing of sign `sign`.
pub fn skein_coefficients(sign: Sign, t: &HalfMonomial, s: &HalfMonomial) -> Result<(RingFraction, RingFraction)> {
    let bt = half_bracket(t)?;
    let bs = half_bracket(s)?;
    let bts = half_bracket(&t.mul(s))?;
    let e = match sign {
        Sign::Pos => -1,
        Sign::Neg => 1,
    };
    let ts_half = t.mul(s).sqrt()?.pow(e);
    let s_half = s.sqrt()?.pow(e);
    let c_h = RingFraction::new(GroupRingElement::monomial(ts_half, -1), bt.mul(&bs))?;
    let c_ms = RingFraction::new(GroupRingElement::monomial(s_half, 1), bt.mul(&bts))?;
    Ok((c_h, c_ms))
}

/// Evaluate the crossing relation at `crossing` with the base point `base`
/// held fixed on all three diagrams.
pub fn skein_check(d: &Diagram, crossing: &str, base: &BasePoint, merid: &MeridianMap) -> Result<SkeinReport> {
    let node = d
        .nodes
        .iter()
        .find(|n| n.id() == crossing && !n.is_vertex())
        .ok_or_else(|| Error::PatternNotFound(format!("no crossing `{crossing}`")))?;
    let Node::Crossing {
        sign, sw, se, ne, nw, ..
    } = node
    else {
        unreachable!()
    };
    if let BasePoint::Arc(a) = base {
        if [sw, se, ne, nw].contains(&a) {
            return Err(Error::BasePointOnSite);
        }
    }
    let t = merid.get(d.arc_edge(sw).ok_or_else(|| Error::UnknownArc(sw.clone()))?)?;
    let s = merid.get(d.arc_edge(se).ok_or_else(|| Error::UnknownArc(se.clone()))?)?;
    let lhs = state_sum_at(d, base, merid)?.value;
    let rh = resolve(d, crossing, Resolution::H, merid)?;
    let rm = resolve(d, crossing, Resolution::MergeSplit, merid)?;
    let h = state_sum_at(&rh.diagram, base, &rh.meridians)?.value;
    let ms = state_sum_at(&rm.diagram, base, &rm.meridians)?.value;
    let (c_h, c_ms) = skein_coefficients(*sign, t, s)?;
    let rhs = c_h.mul(&h).add(&c_ms.mul(&ms));
    let holds = lhs.fraction_eq(&rhs)?;
    Ok(SkeinReport {
        crossing: crossing.to_string(),
        sign: *sign,
        lhs,
        h,
        merge_split: ms,
        rhs,
        holds,
    })
}
