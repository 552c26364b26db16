//! Winding numbers of regions, local `chi` factors, and the rotation number.
//!
//! Crossing an arc of edge `e` from its right side to its left side
//! multiplies the winding number by the meridian of `e`; each component's
//! unbounded face has winding 1.

use std::collections::VecDeque;

use crate::diagram::{faces, Diagram, Node, RegionTable};
use crate::error::{Error, Result};
use crate::lattice::{HalfMonomial, MeridianMap};

/// Winding number of every regular region, indexed by face id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindingAssignment {
    pub faces: Vec<HalfMonomial>,
}

impl WindingAssignment {
    pub fn get(&self, face: usize) -> &HalfMonomial {
        &self.faces[face]
    }
}

pub fn winding_numbers(d: &Diagram, m: &MeridianMap) -> Result<WindingAssignment> {
    let rt = faces(d)?;
    winding_numbers_in(&rt, d, m)
}

pub fn winding_numbers_in(rt: &RegionTable, d: &Diagram, m: &MeridianMap) -> Result<WindingAssignment> {
    let map = &rt.map;
    let nf = map.faces.len();
    // dual graph: (from, to, factor) meaning w(to) = w(from) * factor
    let mut adj: Vec<Vec<(usize, HalfMonomial)>> = vec![Vec::new(); nf];
    let mut link = |right: usize, left: usize, t: &HalfMonomial| {
        adj[right].push((left, t.clone()));
        adj[left].push((right, t.inv()));
    };
    for (i, a) in d.arcs.iter().enumerate() {
        let t = m.get(&a.edge)?;
        link(map.right_face(i), map.left_face(i), t);
    }
    for (k, l) in d.free_loops.iter().enumerate() {
        let t = m.get(&l.edge)?;
        let (lf, rf) = map.loop_faces[k];
        link(rf, lf, t);
    }
    let mut w: Vec<Option<HalfMonomial>> = vec![None; nf];
    for &start in &rt.outer_faces {
        if w[start].is_some() {
            continue;
        }
        w[start] = Some(HalfMonomial::identity(m.rank()));
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let wf = w[f].clone().unwrap();
            for (g, t) in &adj[f] {
                let wg = wf.mul(t);
                match &w[*g] {
                    Some(x) if *x != wg => return Err(Error::InconsistentWinding),
                    Some(_) => {}
                    None => {
                        w[*g] = Some(wg);
                        queue.push_back(*g);
                    }
                }
            }
        }
    }
    Ok(WindingAssignment {
        faces: w
            .into_iter()
            .map(|x| x.ok_or(Error::InconsistentWinding))
            .collect::<Result<_>>()?,
    })
}

/// Square-root product over the sectors between consecutive incoming arcs
/// and between consecutive outgoing arcs of a vertex.
pub fn chi_vertex(rt: &RegionTable, d: &Diagram, node: usize, w: &WindingAssignment) -> HalfMonomial {
    let map = &rt.map;
    let Node::Vertex { incoming, outgoing, .. } = &d.nodes[node] else {
        panic!("chi_vertex on a crossing");
    };
    let rank = w.faces.first().map_or(0, |x| x.rank());
    let mut halves = vec![0i64; rank];
    let mut take = |f: usize| {
        for (h, x) in halves.iter_mut().zip(w.get(f).halves()) {
            *h += x / 2;
        }
    };
    for a in &incoming[..incoming.len() - 1] {
        take(map.right_face(map.inc.arc_index[a]));
    }
    for a in &outgoing[1..] {
        take(map.left_face(map.inc.arc_index[a]));
    }
    HalfMonomial::from_halves(halves)
}

/// `x^(1/2) y^(1/2)` for the south and north corner regions.
pub fn chi_crossing(rt: &RegionTable, d: &Diagram, node: usize, w: &WindingAssignment) -> HalfMonomial {
    let map = &rt.map;
    let Node::Crossing { sw, ne, .. } = &d.nodes[node] else {
        panic!("chi_crossing on a vertex");
    };
    let south = w.get(map.right_face(map.inc.arc_index[sw]));
    let north = w.get(map.left_face(map.inc.arc_index[ne]));
    south.mul(north).sqrt().expect("windings are integral")
}

/// Intermediate quantities of the rotation number.
#[derive(Debug, Clone)]
pub struct Rotation {
    pub windings: WindingAssignment,
    /// `chi` of every node, in node order
    pub chi: Vec<HalfMonomial>,
    /// product of `chi` over the nodes of each component
    pub chi_product: Vec<HalfMonomial>,
    pub rot: HalfMonomial,
}

pub fn rotation(d: &Diagram, m: &MeridianMap) -> Result<Rotation> {
    let rt = faces(d)?;
    rotation_in(&rt, d, m)
}

pub fn rotation_in(rt: &RegionTable, d: &Diagram, m: &MeridianMap) -> Result<Rotation> {
    let w = winding_numbers_in(rt, d, m)?;
    let map = &rt.map;
    let nc = map.components.len();
    let id = HalfMonomial::identity(m.rank());
    let mut chi = Vec::with_capacity(d.nodes.len());
    let mut chi_product = vec![id.clone(); nc];
    for (i, n) in d.nodes.iter().enumerate() {
        let c = if n.is_vertex() {
            chi_vertex(rt, d, i, &w)
        } else {
            chi_crossing(rt, d, i, &w)
        };
        let k = map.node_component[i];
        chi_product[k] = chi_product[k].mul(&c);
        chi.push(c);
    }
    let mut rot = id;
    for f in 0..map.faces.len() {
        rot = rot.mul(w.get(f));
    }
    for p in &chi_product {
        if !p.is_integral() {
            return Err(Error::NonIntegralRotation);
        }
        rot = rot.div(p);
    }
    Ok(Rotation {
        windings: w,
        chi,
        chi_product,
        rot,
    })
}

pub fn rot(d: &Diagram, m: &MeridianMap) -> Result<HalfMonomial> {
    Ok(rotation(d, m)?.rot)
}

/// Whitney-type index: the exponent sum of the rotation number when every
/// meridian is sent to one generator.
pub fn classical_w(d: &Diagram, m: &MeridianMap) -> Result<i64> {
    if d.vertex_count() > 0 {
        return Err(Error::NotALink);
    }
    let r = rot(d, m)?;
    Ok(r.halves().iter().sum::<i64>() / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn render_all(d: &Diagram) -> (Vec<String>, String) {
        let lat = d.lattice().unwrap();
        let m = lat.meridian_map();
        let r = rotation(d, &m).unwrap();
        let mut w: Vec<String> = r.windings.faces.iter().map(|x| x.render(&m.names)).collect();
        w.sort();
        (w, r.rot.render(&m.names))
    }

    #[test]
    fn fig5_values() {
        let (w, rot) = render_all(&fixtures::fig5());
        assert_eq!(w, vec!["1", "s^(-1)", "t", "t*s^(-1)"]);
        assert_eq!(rot, "t*s^(-1)");
    }

    #[test]
    fn fig5_merge_vertex_chi() {
        let d = fixtures::fig5();
        let m = d.lattice().unwrap().meridian_map();
        let r = rotation(&d, &m).unwrap();
        // vertex A merges s and t; its single sector is the lens t s^-1
        assert_eq!(r.chi[0].halves(), &[1, -1]);
        assert_eq!(r.chi_product[0].halves(), &[2, -2]);
    }

    #[test]
    fn circle_values() {
        let (w, rot) = render_all(&fixtures::circle());
        assert_eq!(w, vec!["1", "t"]);
        assert_eq!(rot, "t");
        let cw = fixtures::loop_diagram("t", crate::diagram::Orientation::Cw);
        assert_eq!(render_all(&cw).1, "t^(-1)");
    }

    #[test]
    fn split_product() {
        let (_, rot) = render_all(&fixtures::two_circles());
        assert_eq!(rot, "t*u");
    }

    #[test]
    fn classical_index() {
        let d = fixtures::circle();
        let m = d.lattice().unwrap().meridian_map();
        assert_eq!(classical_w(&d, &m).unwrap(), 1);
        let f = fixtures::fig5();
        let mf = f.lattice().unwrap().meridian_map();
        assert_eq!(classical_w(&f, &mf), Err(Error::NotALink));
    }
}
