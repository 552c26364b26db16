//! Local relations for the rotation number: vertex expansions, curls,
//! bigons, merge-split pairs and rungs. Each is applied at every site of a
//! diagram and both sides are compared inside the larger homology group.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::diagram::{ArcDecl, Diagram, EdgeDecl, Node, PlanarMap, Side};
use crate::error::{Error, Result};
use crate::lattice::MeridianMap;
use crate::rotation::rot;
use crate::statesum::{resolve, retrace_edges, Resolution};

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Check {
    /// relation number, `i` through `vii`
    pub item: &'static str,
    pub site: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

/// Relation labels in order.
pub fn prop1_items() -> [&'static str; 7] {
    ["i", "ii", "iii", "iv", "v", "vi", "vii"]
}

pub(super) fn fresh(d: &Diagram, stem: &str) -> String {
    let mut taken: BTreeSet<&str> = BTreeSet::new();
    taken.extend(d.arcs.iter().map(|a| a.id.as_str()));
    taken.extend(d.edges.iter().map(|e| e.id.as_str()));
    taken.extend(d.nodes.iter().map(|n| n.id()));
    taken.extend(d.free_loops.iter().map(|l| l.id.as_str()));
    (1..)
        .map(|k| format!("{stem}{k}"))
        .find(|s| !taken.contains(s.as_str()))
        .unwrap()
}

/// New arc that is also a new edge.
pub(super) fn add_edge(d: &mut Diagram, stem: &str) -> String {
    let id = fresh(d, stem);
    d.edges.push(EdgeDecl { id: id.clone() });
    d.arcs.push(ArcDecl {
        id: id.clone(),
        edge: id.clone(),
    });
    id
}

pub(super) fn add_vertex(d: &mut Diagram, stem: &str, incoming: Vec<String>, outgoing: Vec<String>) {
    let id = fresh(d, stem);
    d.nodes.push(Node::Vertex { id, incoming, outgoing });
}

/// Cut `arc`; the returned piece takes the old head slot.
pub(super) fn cut(d: &mut Diagram, arc: &str) -> Result<String> {
    let edge = d
        .arc_edge(arc)
        .ok_or_else(|| Error::UnknownArc(arc.into()))?
        .to_string();
    let b = fresh(d, "p");
    for n in &mut d.nodes {
        let ins: Vec<&mut String> = match n {
            Node::Vertex { incoming, .. } => incoming.iter_mut().collect(),
            Node::Crossing { sw, se, .. } => vec![sw, se],
        };
        for s in ins {
            if s == arc {
                *s = b.clone();
            }
        }
    }
    d.arcs.push(ArcDecl { id: b.clone(), edge });
    Ok(b)
}

pub(super) fn set_vertex(d: &mut Diagram, v: usize, incoming: Vec<String>, outgoing: Vec<String>) {
    let id = d.nodes[v].id().to_string();
    d.nodes[v] = Node::Vertex { id, incoming, outgoing };
}

pub(super) fn vertex_lists(d: &Diagram, v: usize) -> (Vec<String>, Vec<String>) {
    match &d.nodes[v] {
        Node::Vertex { incoming, outgoing, .. } => (incoming.clone(), outgoing.clone()),
        _ => unreachable!(),
    }
}

/// `Rot(big) = Rot(small) * factor`, with the small diagram's edges read as
/// the same-named edges of the big one.
fn compare(
    item: &'static str,
    site: String,
    small: &Diagram,
    big: &Diagram,
    factor: &[(&str, i64)],
) -> Result<Prop1Check> {
    big.validate()?;
    let mb = big.lattice()?.meridian_map();
    let mut ms = BTreeMap::new();
    for e in small.edge_ids() {
        ms.insert(e.clone(), mb.get(&e)?.clone());
    }
    let ms = MeridianMap {
        names: mb.names.clone(),
        meridians: ms,
    };
    let lhs = rot(big, &mb)?;
    let mut rhs = rot(small, &ms)?;
    for (e, k) in factor {
        rhs = rhs.mul(&mb.get(e)?.pow(*k));
    }
    Ok(Prop1Check {
        item,
        site,
        lhs: lhs.render(&mb.names),
        rhs: rhs.render(&mb.names),
        holds: lhs == rhs,
    })
}

fn retraced(mut d: Diagram) -> Result<Diagram> {
    retrace_edges(&mut d, &BTreeMap::new())?;
    Ok(d)
}

fn rung_check(d: &Diagram, c: &str, m: &MeridianMap) -> Result<Vec<Prop1Check>> {
    let base = rot(d, m)?;
    let rl = resolve(d, c, Resolution::H, m)?;
    // rung from left to right
    let idx = d.nodes.iter().position(|n| n.id() == c).unwrap();
    let Node::Crossing { sw, se, ne, nw, .. } = d.nodes[idx].clone() else {
        unreachable!()
    };
    let t = m.get(d.arc_edge(&sw).unwrap())?.clone();
    let s = m.get(d.arc_edge(&se).unwrap())?.clone();
    let mut lr = d.clone();
    let r = add_edge(&mut lr, "rung");
    let l_id = fresh(&lr, &format!("{c}.l"));
    let r_id = fresh(&lr, &format!("{c}.r"));
    lr.nodes.splice(
        idx..=idx,
        [
            Node::Vertex {
                id: l_id,
                incoming: vec![sw],
                outgoing: vec![nw, r.clone()],
            },
            Node::Vertex {
                id: r_id,
                incoming: vec![r.clone(), se],
                outgoing: vec![ne],
            },
        ],
    );
    let origin = retrace_edges(&mut lr, &BTreeMap::new())?;
    lr.validate()?;
    let mut lm = BTreeMap::new();
    for (e, root) in &origin {
        let v = if *root == r { t.div(&s) } else { m.get(root)?.clone() };
        lm.insert(e.clone(), v);
    }
    let lm = MeridianMap {
        names: m.names.clone(),
        meridians: lm,
    };
    let a = rot(&rl.diagram, &rl.meridians)?;
    let b = rot(&lr, &lm)?;
    Ok(vec![
        Prop1Check {
            item: "vii",
            site: format!("{c} rung right-left"),
            lhs: a.render(&m.names),
            rhs: base.render(&m.names),
            holds: a == base,
        },
        Prop1Check {
            item: "vii",
            site: format!("{c} rung left-right"),
            lhs: b.render(&m.names),
            rhs: base.render(&m.names),
            holds: b == base,
        },
    ])
}

/// Every relation at every site of `d`.
pub fn verify_prop1(d: &Diagram) -> Result<Vec<Prop1Check>> {
    d.validate()?;
    let mut out = Vec::new();
    for v in 0..d.nodes.len() {
        if !d.nodes[v].is_vertex() {
            continue;
        }
        let vid = d.nodes[v].id().to_string();
        let (ins, outs) = vertex_lists(d, v);
        // (i) all inputs merge, then all outputs split
        let mut big = d.clone();
        let m = add_edge(&mut big, "m");
        set_vertex(&mut big, v, ins.clone(), vec![m.clone()]);
        add_vertex(&mut big, "w", vec![m], outs.clone());
        out.push(compare("i", vid.clone(), d, &big, &[])?);
        // (ii) a suffix of the outputs branches off later
        for j in 1..outs.len() {
            let mut big = d.clone();
            let m = add_edge(&mut big, "m");
            let mut head = outs[..j].to_vec();
            head.push(m.clone());
            set_vertex(&mut big, v, ins.clone(), head);
            add_vertex(&mut big, "w", vec![m], outs[j..].to_vec());
            out.push(compare("ii", format!("{vid} out {j}"), d, &big, &[])?);
        }
        // (iii) a suffix of the inputs joins earlier
        for j in 1..ins.len() {
            let mut big = d.clone();
            let m = add_edge(&mut big, "m");
            let mut head = ins[..j].to_vec();
            head.push(m.clone());
            set_vertex(&mut big, v, head, outs.clone());
            add_vertex(&mut big, "w", ins[j..].to_vec(), vec![m]);
            out.push(compare("iii", format!("{vid} in {j}"), d, &big, &[])?);
        }
    }
    for a in d.arcs.iter().map(|a| a.id.clone()) {
        // (iv) a curl of a new edge s on either side
        for side in [Side::Right, Side::Left] {
            let mut big = d.clone();
            let a2 = cut(&mut big, &a)?;
            let mid = add_edge(&mut big, "ts");
            let s = add_edge(&mut big, "s");
            let (ins, outs) = match side {
                Side::Right => (vec![a.clone(), s.clone()], vec![a2, s.clone()]),
                Side::Left => (vec![s.clone(), a.clone()], vec![s.clone(), a2]),
            };
            add_vertex(&mut big, "A", ins, vec![mid.clone()]);
            add_vertex(&mut big, "B", vec![mid], outs);
            let big = retraced(big)?;
            let k = if side == Side::Right { -1 } else { 1 };
            out.push(compare("iv", format!("{a} {side:?}"), d, &big, &[(&s, k)])?);
        }
        // (v) the edge doubles into a bigon
        let mut big = d.clone();
        let a2 = cut(&mut big, &a)?;
        let p = add_edge(&mut big, "u");
        let q = add_edge(&mut big, "u");
        add_vertex(&mut big, "A", vec![a.clone()], vec![p.clone(), q.clone()]);
        add_vertex(&mut big, "B", vec![p, q], vec![a2]);
        out.push(compare("v", a.clone(), d, &retraced(big)?, &[])?);
    }
    // (vi) two strands facing each other across a face merge and split
    let map = PlanarMap::build(d)?;
    let mer = d.lattice()?.meridian_map();
    let base = rot(d, &mer)?;
    for f in &map.faces {
        for &x in f.iter().filter(|&&x| x % 2 == 1) {
            for &y in f.iter().filter(|&&y| y % 2 == 0) {
                if x / 2 == y / 2 {
                    continue;
                }
                let (a, b) = (d.arcs[x / 2].id.clone(), d.arcs[y / 2].id.clone());
                let mut big = d.clone();
                let a2 = cut(&mut big, &a)?;
                let b2 = cut(&mut big, &b)?;
                let m = add_edge(&mut big, "m");
                add_vertex(&mut big, "A", vec![a.clone(), b.clone()], vec![m.clone()]);
                add_vertex(&mut big, "B", vec![m.clone()], vec![a2, b2]);
                // pieces keep the colour of the strand they came from
                let ta = mer.get(d.arc_edge(&a).unwrap())?.clone();
                let tb = mer.get(d.arc_edge(&b).unwrap())?.clone();
                let origin = retrace_edges(&mut big, &BTreeMap::new())?;
                big.validate()?;
                let mut bm = BTreeMap::new();
                for (e, root) in &origin {
                    let v = if *root == m {
                        ta.mul(&tb)
                    } else {
                        mer.get(root)?.clone()
                    };
                    bm.insert(e.clone(), v);
                }
                let bm = MeridianMap {
                    names: mer.names.clone(),
                    meridians: bm,
                };
                let lhs = rot(&big, &bm)?;
                out.push(Prop1Check {
                    item: "vi",
                    site: format!("{a} {b}"),
                    lhs: lhs.render(&mer.names),
                    rhs: base.render(&mer.names),
                    holds: lhs == base,
                });
            }
        }
    }
    for n in &d.nodes {
        if !n.is_vertex() {
            out.extend(rung_check(d, n.id(), &mer)?);
        }
    }
    Ok(out)
}

/// Conjunction of one relation over the shipped fixtures and a few built
/// ones; `Ok(false)` names a failure, an error means the item is unknown.
pub fn prop1_holds(item: &str) -> Result<bool> {
    if !prop1_items().contains(&item) {
        return Err(Error::PatternNotFound(format!("no relation `{item}`")));
    }
    let mut corpus: Vec<Diagram> = crate::fixtures::ALL
        .iter()
        .map(|(n, _)| crate::fixtures::by_name(n).unwrap())
        .collect();
    corpus.push(crate::fixtures::fig5_and_circle());
    let mut seen = false;
    for d in &corpus {
        for c in verify_prop1(d)?.iter().filter(|c| c.item == item) {
            seen = true;
            if !c.holds {
                return Ok(false);
            }
        }
    }
    Ok(seen)
}
