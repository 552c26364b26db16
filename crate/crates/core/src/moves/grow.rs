//! Random plane transverse graphs, grown from the theta graph by local
//! surgeries that keep the diagram crossing-free and strongly connected.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{Diagram, PlanarMap};
use crate::error::Result;
use crate::fixtures;
use crate::statesum::retrace_edges;

use super::prop1::{add_edge, add_vertex, cut, set_vertex, vertex_lists};

/// A plane diagram with at most `max_vertices` vertices (and at least 4 when
/// that many are allowed).
pub fn random_plane_graph(seed: u64, max_vertices: usize) -> Result<Diagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = fixtures::theta();
    let goal = rng.gen_range(4.min(max_vertices)..=max_vertices.max(2));
    let mut tries = 0;
    while d.vertex_count() < goal && tries < 100 {
        tries += 1;
        let room = goal - d.vertex_count();
        let mut next = d.clone();
        let grown = match rng.gen_range(0..4) {
            0 => split_vertex(&mut next, &mut rng),
            1 if room >= 2 => curl(&mut next, &mut rng),
            2 if room >= 2 => bigon(&mut next, &mut rng),
            3 if room >= 2 => bridge(&mut next, &mut rng)?,
            _ => false,
        };
        if !grown {
            continue;
        }
        retrace_edges(&mut next, &BTreeMap::new())?;
        next.validate()?;
        d = next;
    }
    Ok(d)
}

fn split_vertex(d: &mut Diagram, rng: &mut ChaCha8Rng) -> bool {
    let vs: Vec<usize> = (0..d.nodes.len()).filter(|&v| d.nodes[v].is_vertex()).collect();
    let v = vs[rng.gen_range(0..vs.len())];
    let (ins, outs) = vertex_lists(d, v);
    let outward = rng.gen_bool(0.5);
    let (len, other) = if outward {
        (outs.len(), ins.len())
    } else {
        (ins.len(), outs.len())
    };
    if len < 2 || len + other < 4 {
        return false;
    }
    let j = rng.gen_range(1..len);
    let m = add_edge(d, "m");
    if outward {
        let mut head = outs[..j].to_vec();
        head.push(m.clone());
        set_vertex(d, v, ins, head);
        add_vertex(d, "w", vec![m], outs[j..].to_vec());
    } else {
        let mut head = ins[..j].to_vec();
        head.push(m.clone());
        set_vertex(d, v, head, outs);
        add_vertex(d, "w", ins[j..].to_vec(), vec![m]);
    }
    true
}

fn pick_arc(d: &Diagram, rng: &mut ChaCha8Rng) -> String {
    d.arcs[rng.gen_range(0..d.arcs.len())].id.clone()
}

fn curl(d: &mut Diagram, rng: &mut ChaCha8Rng) -> bool {
    let a = pick_arc(d, rng);
    let Ok(a2) = cut(d, &a) else { return false };
    let mid = add_edge(d, "ts");
    let s = add_edge(d, "s");
    let (ins, outs) = if rng.gen_bool(0.5) {
        (vec![a, s.clone()], vec![a2, s])
    } else {
        (vec![s.clone(), a], vec![s, a2])
    };
    add_vertex(d, "A", ins, vec![mid.clone()]);
    add_vertex(d, "B", vec![mid], outs);
    true
}

fn bigon(d: &mut Diagram, rng: &mut ChaCha8Rng) -> bool {
    let a = pick_arc(d, rng);
    let Ok(a2) = cut(d, &a) else { return false };
    let p = add_edge(d, "u");
    let q = add_edge(d, "u");
    add_vertex(d, "A", vec![a], vec![p.clone(), q.clone()]);
    add_vertex(d, "B", vec![p, q], vec![a2]);
    true
}

/// Merge two strands that face each other across a region, then split.
fn bridge(d: &mut Diagram, rng: &mut ChaCha8Rng) -> Result<bool> {
    let map = PlanarMap::build(d)?;
    let mut pairs = Vec::new();
    for f in &map.faces {
        for &x in f.iter().filter(|&&x| x % 2 == 1) {
            for &y in f.iter().filter(|&&y| y % 2 == 0) {
                if x / 2 != y / 2 {
                    pairs.push((x / 2, y / 2));
                }
            }
        }
    }
    if pairs.is_empty() {
        return Ok(false);
    }
    let (i, j) = pairs[rng.gen_range(0..pairs.len())];
    let (a, b) = (d.arcs[i].id.clone(), d.arcs[j].id.clone());
    let a2 = cut(d, &a)?;
    let b2 = cut(d, &b)?;
    let m = add_edge(d, "m");
    add_vertex(d, "A", vec![a, b], vec![m.clone()]);
    add_vertex(d, "B", vec![m], vec![a2, b2]);
    Ok(true)
}
