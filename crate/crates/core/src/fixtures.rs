//! Shipped example diagrams and small constructors for building more.

use crate::diagram::{ArcDecl, Diagram, EdgeDecl, FaceRef, FreeLoop, Node, Orientation, Sign};

pub const CIRCLE: &str = include_str!("../fixtures/circle.json");
pub const THETA: &str = include_str!("../fixtures/theta.json");
pub const FIG5: &str = include_str!("../fixtures/fig5.json");
pub const HOPF: &str = include_str!("../fixtures/hopf.json");
pub const TREFOIL: &str = include_str!("../fixtures/trefoil.json");

pub const ALL: [(&str, &str); 5] = [
    ("circle", CIRCLE),
    ("theta", THETA),
    ("fig5", FIG5),
    ("hopf", HOPF),
    ("trefoil", TREFOIL),
];

pub fn by_name(name: &str) -> Option<Diagram> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Diagram::parse(text).expect("shipped fixture parses"))
}

pub fn circle() -> Diagram {
    by_name("circle").unwrap()
}

pub fn theta() -> Diagram {
    by_name("theta").unwrap()
}

pub fn fig5() -> Diagram {
    by_name("fig5").unwrap()
}

pub fn hopf() -> Diagram {
    by_name("hopf").unwrap()
}

pub fn trefoil() -> Diagram {
    by_name("trefoil").unwrap()
}

pub fn vertex(id: &str, incoming: &[&str], outgoing: &[&str]) -> Node {
    Node::Vertex {
        id: id.into(),
        incoming: incoming.iter().map(|s| s.to_string()).collect(),
        outgoing: outgoing.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn crossing(id: &str, sign: Sign, sw: &str, se: &str, ne: &str, nw: &str) -> Node {
    Node::Crossing {
        id: id.into(),
        sign,
        sw: sw.into(),
        se: se.into(),
        ne: ne.into(),
        nw: nw.into(),
    }
}

/// Assembles a diagram from `(arc, edge)` pairs; edges are listed in order
/// of first appearance. The result is not validated.
pub fn assemble(arcs: &[(&str, &str)], nodes: Vec<Node>, outer: FaceRef) -> Diagram {
    let mut edges: Vec<EdgeDecl> = Vec::new();
    for (_, e) in arcs {
        if !edges.iter().any(|x| x.id == *e) {
            edges.push(EdgeDecl { id: e.to_string() });
        }
    }
    Diagram {
        edges,
        arcs: arcs
            .iter()
            .map(|(a, e)| ArcDecl {
                id: a.to_string(),
                edge: e.to_string(),
            })
            .collect(),
        nodes,
        free_loops: Vec::new(),
        outer: Some(outer),
        nesting: Vec::new(),
    }
}

/// A single crossingless loop on edge `edge`.
pub fn loop_diagram(edge: &str, orientation: Orientation) -> Diagram {
    let side = match orientation {
        Orientation::Ccw => crate::diagram::Side::Right,
        Orientation::Cw => crate::diagram::Side::Left,
    };
    Diagram {
        edges: vec![EdgeDecl { id: edge.into() }],
        arcs: Vec::new(),
        nodes: Vec::new(),
        free_loops: vec![FreeLoop {
            id: "L".into(),
            edge: edge.into(),
            orientation,
            face: None,
        }],
        outer: Some(FaceRef::on_loop("L", side)),
        nesting: Vec::new(),
    }
}

/// Two side-by-side ccw circles on edges `t` and `u`.
pub fn two_circles() -> Diagram {
    let mut d = loop_diagram("t", Orientation::Ccw);
    d.edges.push(EdgeDecl { id: "u".into() });
    d.free_loops.push(FreeLoop {
        id: "L2".into(),
        edge: "u".into(),
        orientation: Orientation::Ccw,
        face: None,
    });
    d
}

/// fig5 with a separate ccw circle on edge `u` beside it.
pub fn fig5_and_circle() -> Diagram {
    let mut d = fig5();
    d.edges.push(EdgeDecl { id: "u".into() });
    d.free_loops.push(FreeLoop {
        id: "L".into(),
        edge: "u".into(),
        orientation: Orientation::Ccw,
        face: None,
    });
    d
}
