//! A string that is equal for two diagrams exactly when they differ only by
//! arc, node and loop names (edge names are kept).

use std::collections::HashMap;

use crate::diagram::{Diagram, Node, PlanarMap, Sign};
use crate::error::Result;

/// Labels of one node component, discovered from a start arc.
struct Labeling {
    code: String,
    arc_label: HashMap<usize, usize>,
}

fn slots(n: &Node) -> Vec<&String> {
    match n {
        Node::Vertex { incoming, outgoing, .. } => incoming.iter().chain(outgoing).collect(),
        Node::Crossing { sw, se, ne, nw, .. } => vec![sw, se, ne, nw],
    }
}

fn label_from(d: &Diagram, map: &PlanarMap, start: usize) -> Labeling {
    let mut arc_label: HashMap<usize, usize> = HashMap::new();
    let mut node_label: HashMap<usize, usize> = HashMap::new();
    let mut node_order = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    arc_label.insert(start, 0);
    queue.push_back(start);
    while let Some(a) = queue.pop_front() {
        for n in [map.inc.head[a].node, map.inc.tail[a].node] {
            if node_label.contains_key(&n) {
                continue;
            }
            node_label.insert(n, node_order.len());
            node_order.push(n);
            for s in slots(&d.nodes[n]) {
                let i = map.inc.arc_index[s];
                if !arc_label.contains_key(&i) {
                    arc_label.insert(i, arc_label.len());
                    queue.push_back(i);
                }
            }
        }
    }
    let mut code = String::new();
    for &n in &node_order {
        let lab = |s: &String| arc_label[&map.inc.arc_index[s]].to_string();
        match &d.nodes[n] {
            Node::Vertex { incoming, outgoing, .. } => {
                let i: Vec<String> = incoming.iter().map(lab).collect();
                let o: Vec<String> = outgoing.iter().map(lab).collect();
                code.push_str(&format!("V[{}|{}]", i.join(","), o.join(",")));
            }
            Node::Crossing {
                sign, sw, se, ne, nw, ..
            } => {
                let s = if *sign == Sign::Pos { '+' } else { '-' };
                code.push_str(&format!("X{s}[{},{},{},{}]", lab(sw), lab(se), lab(ne), lab(nw)));
            }
        }
    }
    let mut by_label: Vec<(usize, usize)> = arc_label.iter().map(|(&a, &l)| (l, a)).collect();
    by_label.sort();
    code.push_str("E[");
    let names: Vec<&str> = by_label.iter().map(|&(_, a)| d.arcs[a].edge.as_str()).collect();
    code.push_str(&names.join(","));
    code.push(']');
    Labeling { code, arc_label }
}

fn face_code(map: &PlanarMap, lab: &Labeling, f: usize) -> String {
    let best = map.faces[f]
        .iter()
        .map(|&x| (lab.arc_label[&(x / 2)], x % 2))
        .min()
        .expect("node faces have darts");
    format!("{}{}", best.0, if best.1 == 0 { 'L' } else { 'R' })
}

pub fn canonical_form(d: &Diagram) -> Result<String> {
    let map = PlanarMap::build(d)?;
    let (outer, container) = map.resolve_outer(d)?;
    let nc = map.components.len();
    let mut labelings: Vec<Option<Labeling>> = (0..nc).map(|_| None).collect();
    let mut own: Vec<String> = vec![String::new(); nc];
    for c in 0..nc {
        if let Some(l) = &map.components[c].free_loop {
            let k = map.inc.loop_index[l];
            let lp = &d.free_loops[k];
            own[c] = format!("O[{}:{:?}]", lp.edge, lp.orientation);
            continue;
        }
        let mut best: Option<(String, Labeling)> = None;
        for (i, _) in d.arcs.iter().enumerate().filter(|(i, _)| map.arc_component[*i] == c) {
            let lab = label_from(d, &map, i);
            let code = format!("{}@{}", lab.code, face_code(&map, &lab, outer[c]));
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                best = Some((code, lab));
            }
        }
        let (code, lab) = best.expect("node component has arcs");
        own[c] = code;
        labelings[c] = Some(lab);
    }
    let mut order: Vec<usize> = (0..nc).collect();
    order.sort_by(|&a, &b| own[a].cmp(&own[b]));
    let mut rank = vec![0; nc];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    let place = |c: usize| -> String {
        match container[c] {
            None => "top".to_string(),
            Some(f) => {
                let host = map.face_component[f];
                let side = match &labelings[host] {
                    Some(lab) => face_code(&map, lab, f),
                    None => {
                        let k = map.loop_component.iter().position(|&x| x == host).unwrap();
                        if map.loop_faces[k].0 == f { "L" } else { "R" }.to_string()
                    }
                };
                format!("{}:{}", rank[host], side)
            }
        }
    };
    let mut parts: Vec<String> = order.iter().map(|&c| format!("{}#{}", own[c], place(c))).collect();
    parts.sort();
    Ok(parts.join(" "))
}

pub fn isomorphic(a: &Diagram, b: &Diagram) -> Result<bool> {
    Ok(canonical_form(a)? == canonical_form(b)?)
}
