//! Transverse graph diagrams as combinatorial planar maps.
//!
//! Every arc `a` (index `i` in the arc list) owns two darts: `2i` leaves the
//! arc's tail node along the arc, `2i + 1` leaves its head node backwards.
//! Faces are orbits of `d -> sigma^-1(alpha(d))`, so the face of dart `2i` is
//! the face on the left of the arc and the face of `2i + 1` the one on its
//! right.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{malformed, Error, Result};
use crate::lattice::{build_lattice, MeridianLattice, VertexIncidence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeDecl {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcDecl {
    pub id: String,
    pub edge: String,
}

/// What a face reference hangs on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Arc(String),
    Loop(String),
}

/// The face on one side of an arc or free loop.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawFaceRef", into = "RawFaceRef")]
pub struct FaceRef {
    pub anchor: Anchor,
    pub side: Side,
}

impl FaceRef {
    pub fn arc(id: impl Into<String>, side: Side) -> Self {
        FaceRef {
            anchor: Anchor::Arc(id.into()),
            side,
        }
    }

    pub fn on_loop(id: impl Into<String>, side: Side) -> Self {
        FaceRef {
            anchor: Anchor::Loop(id.into()),
            side,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFaceRef {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    arc: Option<String>,
    #[serde(rename = "loop", skip_serializing_if = "Option::is_none", default)]
    loop_id: Option<String>,
    side: Side,
}

impl TryFrom<RawFaceRef> for FaceRef {
    type Error = String;

    fn try_from(r: RawFaceRef) -> std::result::Result<Self, String> {
        let anchor = match (r.arc, r.loop_id) {
            (Some(a), None) => Anchor::Arc(a),
            (None, Some(l)) => Anchor::Loop(l),
            _ => return Err("face reference needs exactly one of `arc`, `loop`".into()),
        };
        Ok(FaceRef { anchor, side: r.side })
    }
}

impl From<FaceRef> for RawFaceRef {
    fn from(f: FaceRef) -> Self {
        let (arc, loop_id) = match f.anchor {
            Anchor::Arc(a) => (Some(a), None),
            Anchor::Loop(l) => (None, Some(l)),
        };
        RawFaceRef {
            arc,
            loop_id,
            side: f.side,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    /// `incoming` left to right below the separating line, `outgoing` left
    /// to right above it.
    Vertex {
        id: String,
        incoming: Vec<String>,
        outgoing: Vec<String>,
    },
    Crossing {
        id: String,
        sign: Sign,
        sw: String,
        se: String,
        ne: String,
        nw: String,
    },
}

impl Node {
    pub fn id(&self) -> &str {
        match self {
            Node::Vertex { id, .. } | Node::Crossing { id, .. } => id,
        }
    }

    pub fn is_vertex(&self) -> bool {
        matches!(self, Node::Vertex { .. })
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Node::Vertex { id, incoming, outgoing } => {
                let mut m = s.serialize_map(Some(4))?;
                m.serialize_entry("id", id)?;
                m.serialize_entry("type", "vertex")?;
                m.serialize_entry("in", incoming)?;
                m.serialize_entry("out", outgoing)?;
                m.end()
            }
            Node::Crossing {
                id,
                sign,
                sw,
                se,
                ne,
                nw,
            } => {
                let mut m = s.serialize_map(Some(7))?;
                m.serialize_entry("id", id)?;
                m.serialize_entry("type", "crossing")?;
                m.serialize_entry("sign", sign)?;
                m.serialize_entry("sw", sw)?;
                m.serialize_entry("se", se)?;
                m.serialize_entry("ne", ne)?;
                m.serialize_entry("nw", nw)?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            id: String,
            #[serde(rename = "type")]
            kind: String,
            #[serde(rename = "in")]
            incoming: Option<Vec<String>>,
            #[serde(rename = "out")]
            outgoing: Option<Vec<String>>,
            sign: Option<Sign>,
            sw: Option<String>,
            se: Option<String>,
            ne: Option<String>,
            nw: Option<String>,
        }
        let r = Raw::deserialize(d)?;
        match r.kind.as_str() {
            "vertex" => Ok(Node::Vertex {
                id: r.id,
                incoming: r.incoming.ok_or_else(|| D::Error::missing_field("in"))?,
                outgoing: r.outgoing.ok_or_else(|| D::Error::missing_field("out"))?,
            }),
            "crossing" => Ok(Node::Crossing {
                id: r.id,
                sign: r.sign.ok_or_else(|| D::Error::missing_field("sign"))?,
                sw: r.sw.ok_or_else(|| D::Error::missing_field("sw"))?,
                se: r.se.ok_or_else(|| D::Error::missing_field("se"))?,
                ne: r.ne.ok_or_else(|| D::Error::missing_field("ne"))?,
                nw: r.nw.ok_or_else(|| D::Error::missing_field("nw"))?,
            }),
            other => Err(D::Error::custom(format!("unknown node type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeLoop {
    pub id: String,
    pub edge: String,
    pub orientation: Orientation,
    /// Face of another component containing the loop; `None` is the
    /// unbounded face.
    pub face: Option<FaceRef>,
}

/// Places a node component inside a face of another component. `side` names
/// the side of `arc` that is this component's own outer face.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Nesting {
    pub arc: String,
    pub side: Side,
    pub face: Option<FaceRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub edges: Vec<EdgeDecl>,
    pub arcs: Vec<ArcDecl>,
    pub nodes: Vec<Node>,
    #[serde(default)]
    pub free_loops: Vec<FreeLoop>,
    pub outer: Option<FaceRef>,
    #[serde(default)]
    pub nesting: Vec<Nesting>,
}

/// Position of an arc end at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotPos {
    In(usize),
    Out(usize),
    Sw,
    Se,
    Ne,
    Nw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub node: usize,
    pub pos: SlotPos,
}

/// Where each arc starts and ends.
#[derive(Debug, Clone)]
pub struct Incidence {
    pub tail: Vec<Slot>,
    pub head: Vec<Slot>,
    pub arc_index: HashMap<String, usize>,
    pub node_index: HashMap<String, usize>,
    pub loop_index: HashMap<String, usize>,
}

impl Diagram {
    pub fn parse(text: &str) -> Result<Diagram> {
        let d: Diagram = serde_json::from_str(text)
            .map_err(|e| malformed(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram serializes")
    }

    pub fn edge_ids(&self) -> Vec<String> {
        self.edges.iter().map(|e| e.id.clone()).collect()
    }

    pub fn arc_edge(&self, arc: &str) -> Option<&str> {
        self.arcs.iter().find(|a| a.id == arc).map(|a| a.edge.as_str())
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_vertex()).count()
    }

    pub fn crossing_count(&self) -> usize {
        self.nodes.len() - self.vertex_count()
    }

    /// Incoming and outgoing edges of every vertex, in node order.
    pub fn vertex_incidences(&self) -> Vec<(String, VertexIncidence)> {
        let edge_of: HashMap<&str, &str> = self.arcs.iter().map(|a| (a.id.as_str(), a.edge.as_str())).collect();
        let lookup = |v: &[String]| v.iter().map(|a| edge_of[a.as_str()].to_string()).collect();
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Vertex { id, incoming, outgoing } => Some((
                    id.clone(),
                    VertexIncidence {
                        incoming: lookup(incoming),
                        outgoing: lookup(outgoing),
                    },
                )),
                _ => None,
            })
            .collect()
    }

    pub fn lattice(&self) -> Result<MeridianLattice> {
        let inc: Vec<VertexIncidence> = self.vertex_incidences().into_iter().map(|(_, v)| v).collect();
        build_lattice(&self.edge_ids(), &inc)
    }

    /// Arc ends. Requires every arc to be attached exactly once at each end.
    pub fn incidence(&self) -> Result<Incidence> {
        let mut arc_index = HashMap::new();
        for (i, a) in self.arcs.iter().enumerate() {
            if arc_index.insert(a.id.clone(), i).is_some() {
                return Err(malformed(format!("arc `{}`", a.id), "duplicate arc id"));
            }
        }
        let mut node_index = HashMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if node_index.insert(n.id().to_string(), i).is_some() {
                return Err(malformed(format!("node `{}`", n.id()), "duplicate node id"));
            }
        }
        let mut loop_index = HashMap::new();
        for (i, l) in self.free_loops.iter().enumerate() {
            if loop_index.insert(l.id.clone(), i).is_some() {
                return Err(malformed(format!("loop `{}`", l.id), "duplicate loop id"));
            }
        }
        let n = self.arcs.len();
        let mut tail: Vec<Option<Slot>> = vec![None; n];
        let mut head: Vec<Option<Slot>> = vec![None; n];
        let mut put = |arc: &str, slot: Slot, into_head: bool| -> Result<()> {
            let &i = arc_index.get(arc).ok_or_else(|| {
                malformed(
                    format!("node `{}`", self.nodes[slot.node].id()),
                    format!("unknown arc `{arc}`"),
                )
            })?;
            let target = if into_head { &mut head[i] } else { &mut tail[i] };
            if target.is_some() {
                return Err(malformed(
                    format!("arc `{arc}`"),
                    if into_head {
                        "arc ends at two slots"
                    } else {
                        "arc starts at two slots"
                    },
                ));
            }
            *target = Some(slot);
            Ok(())
        };
        for (ni, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Vertex { incoming, outgoing, .. } => {
                    for (k, a) in incoming.iter().enumerate() {
                        put(
                            a,
                            Slot {
                                node: ni,
                                pos: SlotPos::In(k),
                            },
                            true,
                        )?;
                    }
                    for (k, a) in outgoing.iter().enumerate() {
                        put(
                            a,
                            Slot {
                                node: ni,
                                pos: SlotPos::Out(k),
                            },
                            false,
                        )?;
                    }
                }
                Node::Crossing { sw, se, ne, nw, .. } => {
                    put(
                        sw,
                        Slot {
                            node: ni,
                            pos: SlotPos::Sw,
                        },
                        true,
                    )?;
                    put(
                        se,
                        Slot {
                            node: ni,
                            pos: SlotPos::Se,
                        },
                        true,
                    )?;
                    put(
                        ne,
                        Slot {
                            node: ni,
                            pos: SlotPos::Ne,
                        },
                        false,
                    )?;
                    put(
                        nw,
                        Slot {
                            node: ni,
                            pos: SlotPos::Nw,
                        },
                        false,
                    )?;
                }
            }
        }
        let mut t = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        for i in 0..n {
            match (tail[i], head[i]) {
                (Some(a), Some(b)) => {
                    t.push(a);
                    h.push(b);
                }
                _ => return Err(Error::DanglingArc(self.arcs[i].id.clone())),
            }
        }
        Ok(Incidence {
            tail: t,
            head: h,
            arc_index,
            node_index,
            loop_index,
        })
    }

    /// Checks every structural invariant, including planarity of each
    /// component and consistency of the outer face declarations.
    pub fn validate(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut edge_set = BTreeSet::new();
        for e in &self.edges {
            if !edge_set.insert(e.id.as_str()) {
                return Err(malformed(format!("edge `{}`", e.id), "duplicate edge id"));
            }
        }
        for a in &self.arcs {
            if !edge_set.contains(a.edge.as_str()) {
                return Err(Error::UnknownEdge(a.edge.clone()));
            }
        }
        for l in &self.free_loops {
            if !edge_set.contains(l.edge.as_str()) {
                return Err(Error::UnknownEdge(l.edge.clone()));
            }
        }
        for n in &self.nodes {
            if let Node::Vertex { id, incoming, outgoing } = n {
                if incoming.is_empty() || outgoing.is_empty() {
                    return Err(Error::SinkOrSourceVertex(id.clone()));
                }
            }
        }
        let inc = self.incidence()?;
        let edge_of = |a: &str| self.arcs[inc.arc_index[a]].edge.as_str();
        for n in &self.nodes {
            if let Node::Crossing { id, sw, se, ne, nw, .. } = n {
                if edge_of(sw) != edge_of(ne) || edge_of(se) != edge_of(nw) {
                    return Err(malformed(
                        format!("crossing `{id}`"),
                        "strands must keep their edge through a crossing",
                    ));
                }
            }
        }
        // each edge is one straight path, one cycle through crossings, or one free loop
        let paths = self.edge_paths_with(&inc)?;
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for p in &paths {
            *seen.entry(self.arcs[p.arcs[0]].edge.as_str()).or_default() += 1;
        }
        for l in &self.free_loops {
            *seen.entry(l.edge.as_str()).or_default() += 1;
        }
        for e in &self.edges {
            match seen.get(e.id.as_str()) {
                Some(1) => {}
                Some(_) => {
                    return Err(malformed(
                        format!("edge `{}`", e.id),
                        "arcs of an edge must form a single path",
                    ))
                }
                None => return Err(malformed(format!("edge `{}`", e.id), "edge is not drawn")),
            }
        }
        let map = PlanarMap::build(self)?;
        map.resolve_outer(self)?;
        Ok(())
    }

    /// Maximal arc chains running straight through crossings.
    pub fn edge_paths(&self) -> Result<Vec<EdgePath>> {
        let inc = self.incidence()?;
        self.edge_paths_with(&inc)
    }

    fn edge_paths_with(&self, inc: &Incidence) -> Result<Vec<EdgePath>> {
        let n = self.arcs.len();
        let mut used = vec![false; n];
        let mut out = Vec::new();
        let next = |a: usize| -> Option<usize> {
            let h = inc.head[a];
            match &self.nodes[h.node] {
                Node::Crossing { ne, nw, .. } => Some(match h.pos {
                    SlotPos::Sw => inc.arc_index[ne],
                    SlotPos::Se => inc.arc_index[nw],
                    _ => unreachable!(),
                }),
                Node::Vertex { .. } => None,
            }
        };
        for start in 0..n {
            if used[start] || !self.nodes[inc.tail[start].node].is_vertex() {
                continue;
            }
            let mut arcs = vec![start];
            used[start] = true;
            let mut cur = start;
            while let Some(nx) = next(cur) {
                if used[nx] {
                    return Err(malformed(
                        format!("arc `{}`", self.arcs[nx].id),
                        "edge path revisits an arc",
                    ));
                }
                used[nx] = true;
                arcs.push(nx);
                cur = nx;
            }
            out.push(EdgePath { arcs, closed: false });
        }
        for start in 0..n {
            if used[start] {
                continue;
            }
            let mut arcs = vec![start];
            used[start] = true;
            let mut cur = start;
            loop {
                let nx = next(cur).expect("cycle through crossings");
                if nx == start {
                    break;
                }
                if used[nx] {
                    return Err(malformed(
                        format!("arc `{}`", self.arcs[nx].id),
                        "edge path revisits an arc",
                    ));
                }
                used[nx] = true;
                arcs.push(nx);
                cur = nx;
            }
            out.push(EdgePath { arcs, closed: true });
        }
        for p in &out {
            let e = &self.arcs[p.arcs[0]].edge;
            if let Some(&bad) = p.arcs.iter().find(|&&a| &self.arcs[a].edge != e) {
                return Err(malformed(
                    format!("arc `{}`", self.arcs[bad].id),
                    "edge changes along a strand",
                ));
            }
        }
        Ok(out)
    }

    /// Partition of nodes, arcs and loops into planar components.
    pub fn connected_components(&self) -> Result<Vec<Component>> {
        let map = PlanarMap::build(self)?;
        Ok(map.components.clone())
    }

    pub fn is_connected(&self) -> Result<bool> {
        Ok(self.connected_components()?.len() == 1)
    }
}

/// Arcs (by index) of one edge in travel order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePath {
    pub arcs: Vec<usize>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub nodes: Vec<String>,
    pub arcs: Vec<String>,
    pub free_loop: Option<String>,
}

/// Face structure of all components.
#[derive(Debug, Clone)]
pub struct PlanarMap {
    pub inc: Incidence,
    /// ccw successor of each dart at its node
    pub sigma: Vec<usize>,
    pub sigma_inv: Vec<usize>,
    pub face_of_dart: Vec<usize>,
    /// dart cycle of each face; empty for the two faces of a free loop
    pub faces: Vec<Vec<usize>>,
    pub face_component: Vec<usize>,
    /// (left, right) faces of each free loop
    pub loop_faces: Vec<(usize, usize)>,
    pub components: Vec<Component>,
    pub node_component: Vec<usize>,
    pub arc_component: Vec<usize>,
    pub loop_component: Vec<usize>,
}

pub fn tail_dart(arc: usize) -> usize {
    2 * arc
}

pub fn head_dart(arc: usize) -> usize {
    2 * arc + 1
}

impl PlanarMap {
    pub fn build(d: &Diagram) -> Result<PlanarMap> {
        let inc = d.incidence()?;
        let nd = 2 * d.arcs.len();
        let mut sigma = vec![usize::MAX; nd];
        let mut sigma_inv = vec![usize::MAX; nd];
        let dart_of = |a: &String, outgoing: bool| {
            let i = inc.arc_index[a];
            if outgoing {
                tail_dart(i)
            } else {
                head_dart(i)
            }
        };
        for node in &d.nodes {
            let cyc: Vec<usize> = match node {
                Node::Vertex { incoming, outgoing, .. } => outgoing
                    .iter()
                    .rev()
                    .map(|a| dart_of(a, true))
                    .chain(incoming.iter().map(|a| dart_of(a, false)))
                    .collect(),
                Node::Crossing { sw, se, ne, nw, .. } => vec![
                    dart_of(sw, false),
                    dart_of(se, false),
                    dart_of(ne, true),
                    dart_of(nw, true),
                ],
            };
            for k in 0..cyc.len() {
                let a = cyc[k];
                let b = cyc[(k + 1) % cyc.len()];
                sigma[a] = b;
                sigma_inv[b] = a;
            }
        }

        // components: union-find over nodes
        let nn = d.nodes.len();
        let mut parent: Vec<usize> = (0..nn).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for i in 0..d.arcs.len() {
            let a = find(&mut parent, inc.tail[i].node);
            let b = find(&mut parent, inc.head[i].node);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut root_comp: BTreeMap<usize, usize> = BTreeMap::new();
        let mut node_component = vec![0; nn];
        let mut components: Vec<Component> = Vec::new();
        for (i, node) in d.nodes.iter().enumerate() {
            let r = find(&mut parent, i);
            let c = *root_comp.entry(r).or_insert_with(|| {
                components.push(Component {
                    nodes: Vec::new(),
                    arcs: Vec::new(),
                    free_loop: None,
                });
                components.len() - 1
            });
            node_component[i] = c;
            components[c].nodes.push(node.id().to_string());
        }
        let arc_component: Vec<usize> = (0..d.arcs.len()).map(|i| node_component[inc.tail[i].node]).collect();
        for (i, a) in d.arcs.iter().enumerate() {
            components[arc_component[i]].arcs.push(a.id.clone());
        }
        let mut loop_component = Vec::new();
        for l in &d.free_loops {
            components.push(Component {
                nodes: Vec::new(),
                arcs: Vec::new(),
                free_loop: Some(l.id.clone()),
            });
            loop_component.push(components.len() - 1);
        }

        let mut face_of_dart = vec![usize::MAX; nd];
        let mut faces = Vec::new();
        let mut face_component = Vec::new();
        for start in 0..nd {
            if face_of_dart[start] != usize::MAX {
                continue;
            }
            let f = faces.len();
            let mut cyc = Vec::new();
            let mut x = start;
            loop {
                face_of_dart[x] = f;
                cyc.push(x);
                x = sigma_inv[x ^ 1];
                if x == start {
                    break;
                }
            }
            faces.push(cyc);
            face_component.push(arc_component[start / 2]);
        }
        let mut loop_faces = Vec::new();
        for (k, _) in d.free_loops.iter().enumerate() {
            let l = faces.len();
            faces.push(Vec::new());
            faces.push(Vec::new());
            face_component.push(loop_component[k]);
            face_component.push(loop_component[k]);
            loop_faces.push((l, l + 1));
        }

        // Euler check per node component
        for (c, comp) in components.iter().enumerate() {
            if comp.free_loop.is_some() {
                continue;
            }
            let nf = face_component.iter().filter(|&&x| x == c).count() as i64;
            let expected = comp.arcs.len() as i64 - comp.nodes.len() as i64 + 2;
            if nf != expected {
                return Err(Error::NonPlanarMap(format!(
                    "component containing `{}` has {nf} faces, expected {expected}",
                    comp.nodes[0]
                )));
            }
        }

        Ok(PlanarMap {
            inc,
            sigma,
            sigma_inv,
            face_of_dart,
            faces,
            face_component,
            loop_faces,
            components,
            node_component,
            arc_component,
            loop_component,
        })
    }

    pub fn left_face(&self, arc: usize) -> usize {
        self.face_of_dart[tail_dart(arc)]
    }

    pub fn right_face(&self, arc: usize) -> usize {
        self.face_of_dart[head_dart(arc)]
    }

    pub fn face_of_ref(&self, d: &Diagram, r: &FaceRef) -> Result<usize> {
        match &r.anchor {
            Anchor::Arc(a) => {
                let &i = self.inc.arc_index.get(a).ok_or_else(|| Error::UnknownArc(a.clone()))?;
                Ok(match r.side {
                    Side::Left => self.left_face(i),
                    Side::Right => self.right_face(i),
                })
            }
            Anchor::Loop(l) => {
                let &i = self.inc.loop_index.get(l).ok_or_else(|| {
                    malformed(
                        "face reference",
                        format!("unknown loop `{l}` in {} loops", d.free_loops.len()),
                    )
                })?;
                let (lf, rf) = self.loop_faces[i];
                Ok(match r.side {
                    Side::Left => lf,
                    Side::Right => rf,
                })
            }
        }
    }

    /// Outer face of every component, and the face (of another component)
    /// containing it, `None` for the unbounded face.
    pub fn resolve_outer(&self, d: &Diagram) -> Result<(Vec<usize>, Vec<Option<usize>>)> {
        let nc = self.components.len();
        let mut outer: Vec<Option<usize>> = vec![None; nc];
        let mut container: Vec<Option<Option<usize>>> = vec![None; nc];
        let decl = d
            .outer
            .as_ref()
            .ok_or_else(|| Error::InconsistentOuter("missing `outer`".into()))?;
        let f = self.face_of_ref(d, decl)?;
        let main = self.face_component[f];
        outer[main] = Some(f);
        container[main] = Some(None);
        for (k, l) in d.free_loops.iter().enumerate() {
            let c = self.loop_component[k];
            let (lf, rf) = self.loop_faces[k];
            if c != main {
                // ccw loops have the unbounded side on the right
                outer[c] = Some(match l.orientation {
                    Orientation::Ccw => rf,
                    Orientation::Cw => lf,
                });
                container[c] = Some(match &l.face {
                    Some(r) => Some(self.face_of_ref(d, r)?),
                    None => None,
                });
            } else {
                let expect = match l.orientation {
                    Orientation::Ccw => rf,
                    Orientation::Cw => lf,
                };
                if f != expect {
                    return Err(Error::InconsistentOuter(format!(
                        "outer face of loop `{}` contradicts its orientation",
                        l.id
                    )));
                }
                if l.face.is_some() {
                    return Err(Error::InconsistentOuter(format!(
                        "loop `{}` carries the outer face and cannot be nested",
                        l.id
                    )));
                }
            }
        }
        for n in &d.nesting {
            let &i = self
                .inc
                .arc_index
                .get(&n.arc)
                .ok_or_else(|| Error::UnknownArc(n.arc.clone()))?;
            let c = self.arc_component[i];
            if outer[c].is_some() {
                return Err(Error::InconsistentOuter(format!(
                    "component of arc `{}` already has an outer face",
                    n.arc
                )));
            }
            outer[c] = Some(match n.side {
                Side::Left => self.left_face(i),
                Side::Right => self.right_face(i),
            });
            container[c] = Some(match &n.face {
                Some(r) => Some(self.face_of_ref(d, r)?),
                None => None,
            });
        }
        let mut out_outer = Vec::with_capacity(nc);
        let mut out_container = Vec::with_capacity(nc);
        for c in 0..nc {
            let (Some(o), Some(k)) = (outer[c], container[c]) else {
                return Err(Error::InconsistentOuter(format!(
                    "component {c} has no outer face declaration"
                )));
            };
            if let Some(f) = k {
                if self.face_component[f] == c {
                    return Err(Error::InconsistentOuter(format!(
                        "component {c} is declared inside itself"
                    )));
                }
            }
            out_outer.push(o);
            out_container.push(k);
        }
        // containment must be acyclic
        for c in 0..nc {
            let mut cur = c;
            for _ in 0..=nc {
                match out_container[cur] {
                    None => break,
                    Some(f) => cur = self.face_component[f],
                }
                if cur == c {
                    return Err(Error::InconsistentOuter("cyclic nesting".into()));
                }
            }
        }
        Ok((out_outer, out_container))
    }
}

/// Regular regions (faces) and one circle region per vertex.
#[derive(Debug, Clone)]
pub struct RegionTable {
    pub map: PlanarMap,
    pub outer_faces: Vec<usize>,
    pub containers: Vec<Option<usize>>,
    /// vertex node index -> region id
    pub circle_regions: BTreeMap<usize, usize>,
    pub names: Vec<String>,
}

impl RegionTable {
    pub fn regular_count(&self) -> usize {
        self.map.faces.len()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_unbounded(&self, face: usize) -> bool {
        let c = self.map.face_component[face];
        self.outer_faces[c] == face && self.containers[c].is_none()
    }
}

pub fn faces(d: &Diagram) -> Result<RegionTable> {
    let map = PlanarMap::build(d)?;
    let (outer_faces, containers) = map.resolve_outer(d)?;
    let mut names: Vec<String> = (0..map.faces.len()).map(|f| format!("f{f}")).collect();
    let mut circle_regions = BTreeMap::new();
    for (i, n) in d.nodes.iter().enumerate() {
        if n.is_vertex() {
            circle_regions.insert(i, names.len());
            names.push(format!("o:{}", n.id()));
        }
    }
    Ok(RegionTable {
        map,
        outer_faces,
        containers,
        circle_regions,
        names,
    })
}

/// Where the base point sits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BasePoint {
    Arc(String),
    Loop(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CornerLabel {
    N,
    S,
    E,
    W,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corner {
    pub label: CornerLabel,
    pub region: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossingKind {
    /// `over_edge` is the edge of the over-strand.
    Double { node: usize, sign: Sign, over_edge: String },
    /// Intersection of incoming arc `arc` with the circle around `vertex`.
    Circle { vertex: usize, arc: usize, edge: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingSite {
    pub id: String,
    pub kind: CrossingKind,
    pub corners: Vec<Corner>,
}

#[derive(Debug, Clone)]
pub struct DecoratedDiagram {
    pub diagram: Diagram,
    pub regions: RegionTable,
    pub base: BasePoint,
    /// edge carrying the base point
    pub base_edge: String,
    /// regions on the (left, right) of the base point
    pub marked: (usize, usize),
    pub crossings: Vec<CrossingSite>,
    pub connected: bool,
}

/// Base points on every arc, then on every free loop.
pub fn all_base_points(d: &Diagram) -> Vec<BasePoint> {
    d.arcs
        .iter()
        .map(|a| BasePoint::Arc(a.id.clone()))
        .chain(d.free_loops.iter().map(|l| BasePoint::Loop(l.id.clone())))
        .collect()
}

pub fn decorate(d: &Diagram, base: &BasePoint) -> Result<DecoratedDiagram> {
    let regions = faces(d)?;
    let map = &regions.map;
    let (marked, base_edge) = match base {
        BasePoint::Arc(a) => {
            let &i = map.inc.arc_index.get(a).ok_or_else(|| Error::UnknownArc(a.clone()))?;
            ((map.left_face(i), map.right_face(i)), d.arcs[i].edge.clone())
        }
        BasePoint::Loop(l) => {
            let &i = map.inc.loop_index.get(l).ok_or_else(|| Error::UnknownArc(l.clone()))?;
            (map.loop_faces[i], d.free_loops[i].edge.clone())
        }
    };
    if marked.0 == marked.1 {
        return Err(Error::MarkedRegionsCoincide);
    }
    let mut crossings = Vec::new();
    for (ni, node) in d.nodes.iter().enumerate() {
        match node {
            Node::Crossing {
                id,
                sign,
                sw,
                se,
                ne,
                nw,
            } => {
                let ix = |a: &String| map.inc.arc_index[a];
                let over = match sign {
                    Sign::Pos => sw,
                    Sign::Neg => se,
                };
                crossings.push(CrossingSite {
                    id: id.clone(),
                    kind: CrossingKind::Double {
                        node: ni,
                        sign: *sign,
                        over_edge: d.arcs[ix(over)].edge.clone(),
                    },
                    corners: vec![
                        Corner {
                            label: CornerLabel::N,
                            region: map.left_face(ix(ne)),
                        },
                        Corner {
                            label: CornerLabel::S,
                            region: map.right_face(ix(sw)),
                        },
                        Corner {
                            label: CornerLabel::E,
                            region: map.right_face(ix(se)),
                        },
                        Corner {
                            label: CornerLabel::W,
                            region: map.left_face(ix(nw)),
                        },
                    ],
                });
            }
            Node::Vertex { id, incoming, .. } => {
                let circle = regions.circle_regions[&ni];
                for a in incoming {
                    let i = map.inc.arc_index[a];
                    crossings.push(CrossingSite {
                        id: format!("{id}/{a}"),
                        kind: CrossingKind::Circle {
                            vertex: ni,
                            arc: i,
                            edge: d.arcs[i].edge.clone(),
                        },
                        corners: vec![
                            Corner {
                                label: CornerLabel::N,
                                region: circle,
                            },
                            Corner {
                                label: CornerLabel::E,
                                region: map.right_face(i),
                            },
                            Corner {
                                label: CornerLabel::W,
                                region: map.left_face(i),
                            },
                        ],
                    });
                }
            }
        }
    }
    let connected = map.components.len() == 1;
    if connected {
        assert_eq!(
            regions.len(),
            crossings.len() + 2,
            "region count must exceed crossing count by two"
        );
    }
    Ok(DecoratedDiagram {
        diagram: d.clone(),
        regions,
        base: base.clone(),
        base_edge,
        marked,
        crossings,
        connected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fixture_counts() {
        let circle = fixtures::circle();
        let rt = faces(&circle).unwrap();
        assert_eq!(rt.regular_count(), 2);
        assert_eq!(circle.connected_components().unwrap().len(), 1);

        let fig5 = fixtures::fig5();
        let rt = faces(&fig5).unwrap();
        assert_eq!(rt.regular_count(), 4);
        assert_eq!(rt.circle_regions.len(), 2);

        let theta = fixtures::theta();
        let rt = faces(&theta).unwrap();
        assert_eq!(rt.regular_count(), 3);
        assert_eq!(rt.len(), 5);
        let dd = decorate(&theta, &BasePoint::Arc("b".into())).unwrap();
        assert_eq!(dd.crossings.len(), 3);
    }

    #[test]
    fn fig5_decoration() {
        let d = fixtures::fig5();
        for b in all_base_points(&d) {
            let dd = decorate(&d, &b).unwrap();
            assert_eq!(dd.crossings.len(), 4);
            assert_eq!(dd.regions.len(), 6);
            let doubles = dd
                .crossings
                .iter()
                .filter(|c| matches!(c.kind, CrossingKind::Double { .. }))
                .count();
            assert_eq!(doubles, 1);
        }
    }

    #[test]
    fn round_trip() {
        for (name, text) in fixtures::ALL {
            let d = Diagram::parse(text).unwrap();
            let again = Diagram::parse(&d.to_json()).unwrap();
            assert_eq!(d, again, "{name}");
            let a: serde_json::Value = serde_json::from_str(text).unwrap();
            let b: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn structural_errors() {
        let mut d = fixtures::theta();
        if let Node::Vertex { outgoing, .. } = &mut d.nodes[0] {
            outgoing.clear();
        }
        assert!(matches!(d.validate(), Err(Error::SinkOrSourceVertex(_))));

        let mut d = fixtures::theta();
        d.arcs.push(ArcDecl {
            id: "z".into(),
            edge: "a".into(),
        });
        assert!(matches!(d.validate(), Err(Error::DanglingArc(_))));

        assert!(matches!(
            Diagram::parse("{\"edges\": 3}"),
            Err(Error::MalformedInput { .. })
        ));
    }

    #[test]
    fn nonplanar_rotation_is_caught() {
        // a 2-in/2-out vertex pair whose rotations cannot be drawn in the plane
        let text = r#"{
          "edges": [{"id": "a"}, {"id": "b"}, {"id": "c"}, {"id": "d"}],
          "arcs": [{"id": "a", "edge": "a"}, {"id": "b", "edge": "b"}, {"id": "c", "edge": "c"}, {"id": "d", "edge": "d"}],
          "nodes": [
            {"id": "u", "type": "vertex", "in": ["c", "d"], "out": ["a", "b"]},
            {"id": "v", "type": "vertex", "in": ["a", "b"], "out": ["d", "c"]}
          ],
          "free_loops": [],
          "outer": {"arc": "a", "side": "left"},
          "nesting": []
        }"#;
        assert!(matches!(Diagram::parse(text), Err(Error::NonPlanarMap(_))));
    }

    #[test]
    fn split_components() {
        let d = fixtures::two_circles();
        assert_eq!(d.connected_components().unwrap().len(), 2);
        let d = fixtures::fig5_and_circle();
        assert_eq!(d.connected_components().unwrap().len(), 2);
        let dd = decorate(&d, &BasePoint::Arc("t1".into())).unwrap();
        assert!(!dd.connected);
    }
}
