//! The rewrites themselves. Each edits a copy of the diagram and then moves
//! face references off arcs the move destroyed.

use std::collections::BTreeSet;

use crate::diagram::{
    head_dart, tail_dart, Anchor, ArcDecl, Diagram, FaceRef, FreeLoop, Nesting, Node, Orientation, PlanarMap, Side,
    Sign, SlotPos,
};
use crate::error::{Error, Result};

use super::{need, Applied, Block, Direction, Effect, MoveKind, MoveSite, SiteAnchor};

fn missing(msg: impl Into<String>) -> Error {
    Error::PatternNotFound(msg.into())
}

fn orientation_of(outer_side: Side) -> Orientation {
    match outer_side {
        Side::Right => Orientation::Ccw,
        Side::Left => Orientation::Cw,
    }
}

fn outer_side_of(o: Orientation) -> Side {
    match o {
        Orientation::Ccw => Side::Right,
        Orientation::Cw => Side::Left,
    }
}

fn side_of_dart(d: usize) -> Side {
    if d.is_multiple_of(2) {
        Side::Left
    } else {
        Side::Right
    }
}

/// Visit every face reference, including the own-outer-face of nested
/// components.
fn for_each_ref(d: &mut Diagram, mut f: impl FnMut(&mut FaceRef) -> Result<()>) -> Result<()> {
    if let Some(r) = d.outer.as_mut() {
        f(r)?;
    }
    for l in &mut d.free_loops {
        if let Some(r) = l.face.as_mut() {
            f(r)?;
        }
    }
    for n in &mut d.nesting {
        if let Some(r) = n.face.as_mut() {
            f(r)?;
        }
        let mut own = FaceRef::arc(n.arc.clone(), n.side);
        f(&mut own)?;
        match own.anchor {
            Anchor::Arc(a) => {
                n.arc = a;
                n.side = own.side;
            }
            Anchor::Loop(_) => return Err(missing("nested component turned into a loop")),
        }
    }
    Ok(())
}

fn rename_refs(d: &mut Diagram, from: &Anchor, to: &Anchor) {
    for_each_ref(d, |r| {
        if &r.anchor == from {
            r.anchor = to.clone();
        }
        Ok(())
    })
    .expect("renaming keeps arc anchors");
}

/// Strand partner of a crossing slot.
fn partner(p: SlotPos) -> SlotPos {
    match p {
        SlotPos::Sw => SlotPos::Ne,
        SlotPos::Ne => SlotPos::Sw,
        SlotPos::Se => SlotPos::Nw,
        SlotPos::Nw => SlotPos::Se,
        other => other,
    }
}

/// Is the strand through slot `p` on top at a crossing of sign `s`?
fn is_over(s: Sign, p: SlotPos) -> bool {
    let sw_ne = matches!(p, SlotPos::Sw | SlotPos::Ne);
    sw_ne == (s == Sign::Pos)
}

struct Edit {
    old: Diagram,
    map: PlanarMap,
    d: Diagram,
    taken: BTreeSet<String>,
    dead: BTreeSet<String>,
    merges: Vec<Vec<(String, Side)>>,
}

impl Edit {
    fn new(d: &Diagram) -> Result<Edit> {
        let map = PlanarMap::build(d)?;
        let mut taken = BTreeSet::new();
        taken.extend(d.arcs.iter().map(|a| a.id.clone()));
        taken.extend(d.nodes.iter().map(|n| n.id().to_string()));
        taken.extend(d.free_loops.iter().map(|l| l.id.clone()));
        Ok(Edit {
            old: d.clone(),
            map,
            d: d.clone(),
            taken,
            dead: BTreeSet::new(),
            merges: Vec::new(),
        })
    }

    /// A face swallowed by a move must be bounded in the plane; if it is the
    /// outer face the move would pass through infinity.
    fn bounded(&self, f: usize) -> Result<()> {
        let (outer, _) = self.map.resolve_outer(&self.old)?;
        if outer.contains(&f) {
            return Err(missing("the move region contains the outer face"));
        }
        Ok(())
    }

    fn fresh(&mut self, prefix: &str) -> String {
        let s = (1..)
            .map(|k| format!("{prefix}{k}"))
            .find(|s| !self.taken.contains(s))
            .unwrap();
        self.taken.insert(s.clone());
        s
    }

    fn node(&self, id: &str) -> Result<usize> {
        self.d
            .nodes
            .iter()
            .position(|n| n.id() == id)
            .ok_or_else(|| missing(format!("no node `{id}`")))
    }

    fn crossing(&self, id: &str) -> Result<(usize, Sign)> {
        let i = self.node(id)?;
        match &self.d.nodes[i] {
            Node::Crossing { sign, .. } => Ok((i, *sign)),
            _ => Err(missing(format!("`{id}` is not a crossing"))),
        }
    }

    fn vertex(&self, id: &str) -> Result<(usize, Vec<String>, Vec<String>)> {
        let i = self.node(id)?;
        match &self.d.nodes[i] {
            Node::Vertex { incoming, outgoing, .. } => Ok((i, incoming.clone(), outgoing.clone())),
            _ => Err(missing(format!("`{id}` is not a vertex"))),
        }
    }

    fn sign(&self, node: usize) -> Sign {
        match &self.d.nodes[node] {
            Node::Crossing { sign, .. } => *sign,
            _ => unreachable!("vertex has no sign"),
        }
    }

    fn slot(&self, node: usize, pos: SlotPos) -> String {
        match (&self.d.nodes[node], pos) {
            (Node::Vertex { incoming, .. }, SlotPos::In(k)) => incoming[k].clone(),
            (Node::Vertex { outgoing, .. }, SlotPos::Out(k)) => outgoing[k].clone(),
            (Node::Crossing { sw, .. }, SlotPos::Sw) => sw.clone(),
            (Node::Crossing { se, .. }, SlotPos::Se) => se.clone(),
            (Node::Crossing { ne, .. }, SlotPos::Ne) => ne.clone(),
            (Node::Crossing { nw, .. }, SlotPos::Nw) => nw.clone(),
            _ => unreachable!("slot does not exist"),
        }
    }

    fn set(&mut self, node: usize, pos: SlotPos, arc: &str) {
        let target = match (&mut self.d.nodes[node], pos) {
            (Node::Vertex { incoming, .. }, SlotPos::In(k)) => &mut incoming[k],
            (Node::Vertex { outgoing, .. }, SlotPos::Out(k)) => &mut outgoing[k],
            (Node::Crossing { sw, .. }, SlotPos::Sw) => sw,
            (Node::Crossing { se, .. }, SlotPos::Se) => se,
            (Node::Crossing { ne, .. }, SlotPos::Ne) => ne,
            (Node::Crossing { nw, .. }, SlotPos::Nw) => nw,
            _ => unreachable!("slot does not exist"),
        };
        *target = arc.to_string();
    }

    fn find_end(&self, arc: &str, head: bool) -> Result<(usize, SlotPos)> {
        for (i, n) in self.d.nodes.iter().enumerate() {
            match n {
                Node::Vertex { incoming, outgoing, .. } => {
                    let list = if head { incoming } else { outgoing };
                    if let Some(k) = list.iter().position(|a| a == arc) {
                        return Ok((i, if head { SlotPos::In(k) } else { SlotPos::Out(k) }));
                    }
                }
                Node::Crossing { sw, se, ne, nw, .. } => {
                    let cands = if head {
                        [(sw, SlotPos::Sw), (se, SlotPos::Se)]
                    } else {
                        [(ne, SlotPos::Ne), (nw, SlotPos::Nw)]
                    };
                    for (a, p) in cands {
                        if a == arc {
                            return Ok((i, p));
                        }
                    }
                }
            }
        }
        Err(Error::UnknownArc(arc.to_string()))
    }

    fn head(&self, arc: &str) -> Result<(usize, SlotPos)> {
        self.find_end(arc, true)
    }

    fn tail(&self, arc: &str) -> Result<(usize, SlotPos)> {
        self.find_end(arc, false)
    }

    fn edge(&self, arc: &str) -> Result<String> {
        self.d
            .arc_edge(arc)
            .map(str::to_string)
            .ok_or_else(|| Error::UnknownArc(arc.to_string()))
    }

    fn new_arc(&mut self, edge: &str) -> String {
        let id = self.fresh("x");
        self.d.arcs.push(ArcDecl {
            id: id.clone(),
            edge: edge.to_string(),
        });
        id
    }

    fn drop_arc(&mut self, id: &str) {
        self.d.arcs.retain(|a| a.id != id);
    }

    fn drop_node(&mut self, id: &str) {
        self.d.nodes.retain(|n| n.id() != id);
    }

    fn push_crossing(&mut self, sign: Sign, sw: &str, se: &str, ne: &str, nw: &str) -> String {
        let id = self.fresh("c");
        self.d.nodes.push(Node::Crossing {
            id: id.clone(),
            sign,
            sw: sw.into(),
            se: se.into(),
            ne: ne.into(),
            nw: nw.into(),
        });
        id
    }

    /// Cut `arc` in two; the new piece takes over the old head slot and is
    /// returned. `arc` is left without a head.
    fn split(&mut self, arc: &str) -> Result<String> {
        let (n, p) = self.head(arc)?;
        let edge = self.edge(arc)?;
        let b = self.new_arc(&edge);
        self.set(n, p, &b);
        Ok(b)
    }

    /// `keep` absorbs `gone`, which must start where `keep` ends.
    fn join(&mut self, keep: &str, gone: &str) -> Result<()> {
        let (n, p) = self.head(gone)?;
        self.set(n, p, keep);
        self.drop_arc(gone);
        self.dead.insert(gone.to_string());
        Ok(())
    }

    fn old_face(&self, arc: &str, side: Side) -> Result<usize> {
        self.map.face_of_ref(&self.old, &FaceRef::arc(arc, side))
    }

    /// Re-point references that hung on dead arcs at a surviving arc of the
    /// same (possibly merged) face.
    fn reanchor(&mut self) -> Result<()> {
        let nf = self.map.faces.len();
        let mut root: Vec<usize> = (0..nf).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            r
        }
        for g in &self.merges {
            let fs: Vec<usize> = g.iter().map(|(a, s)| self.old_face(a, *s)).collect::<Result<_>>()?;
            for w in fs.windows(2) {
                let (a, b) = (find(&mut root, w[0]), find(&mut root, w[1]));
                if a != b {
                    root[a.max(b)] = a.min(b);
                }
            }
        }
        let class: Vec<usize> = (0..nf).map(|f| find(&mut root, f)).collect();
        let Edit { old, map, d, dead, .. } = self;
        let alive: BTreeSet<String> = d.arcs.iter().map(|a| a.id.clone()).collect();
        for_each_ref(d, |r| {
            let Anchor::Arc(a) = &r.anchor else {
                return Ok(());
            };
            if !dead.contains(a) {
                return Ok(());
            }
            let f = map.face_of_ref(old, r)?;
            let order = std::iter::once(f).chain((0..nf).filter(|&g| g != f && class[g] == class[f]));
            for g in order {
                for &x in &map.faces[g] {
                    let id = &old.arcs[x / 2].id;
                    if !dead.contains(id) && alive.contains(id) {
                        *r = FaceRef::arc(id.clone(), side_of_dart(x));
                        return Ok(());
                    }
                }
            }
            Err(missing("a face reference lies inside the move region"))
        })
    }

    fn finish(mut self) -> Result<Diagram> {
        self.reanchor()?;
        Ok(self.d)
    }
}

fn kink_effect(side: Side, sign: Sign) -> (i64, i64) {
    match (side, sign) {
        (Side::Left, Sign::Pos) => (1, -1),
        (Side::Left, Sign::Neg) => (1, 0),
        (Side::Right, Sign::Pos) => (-1, 0),
        (Side::Right, Sign::Neg) => (-1, 1),
    }
}

fn kind_sign(k: MoveKind) -> Sign {
    match k {
        MoveKind::R1Pos | MoveKind::R5Ccw => Sign::Pos,
        _ => Sign::Neg,
    }
}

fn r5_kind(s: Sign) -> MoveKind {
    match s {
        Sign::Pos => MoveKind::R5Ccw,
        Sign::Neg => MoveKind::R5Cw,
    }
}

struct Kink {
    side: Side,
    sign: Sign,
    a1: String,
    a2: String,
    l: String,
}

fn kink_at(d: &Diagram, crossing: &str) -> Result<Kink> {
    kink_keeping(d, crossing, None)
}

/// A one-crossing curve has two lobes that both qualify; `keep` names the
/// strand that should survive.
fn kink_keeping(d: &Diagram, crossing: &str, keep: Option<&str>) -> Result<Kink> {
    let node = d
        .nodes
        .iter()
        .find(|n| n.id() == crossing)
        .ok_or_else(|| missing(format!("no node `{crossing}`")))?;
    let Node::Crossing {
        sign, sw, se, ne, nw, ..
    } = node
    else {
        return Err(missing(format!("`{crossing}` is not a crossing")));
    };
    // the loop must bound a face of its own that is not the outer face;
    // otherwise it is the rest of the diagram that sits inside the curl
    let map = PlanarMap::build(d)?;
    let (outer, _) = map.resolve_outer(d)?;
    let at = d.nodes.iter().position(|n| n.id() == crossing).unwrap();
    let f_out = outer[map.node_component[at]];
    let curl = |l: &str| {
        let i = map.inc.arc_index[l];
        [map.left_face(i), map.right_face(i)]
            .into_iter()
            .any(|f| f != f_out && map.faces[f].iter().all(|&x| x / 2 == i))
    };
    let right = ne == se && curl(ne);
    let left = nw == sw && curl(nw);
    let prefer_left = right && left && keep == Some(se.as_str());
    let (side, a1, a2, l) = if right && !prefer_left {
        (Side::Right, sw, nw, ne)
    } else if left {
        (Side::Left, se, ne, nw)
    } else {
        return Err(missing(format!("`{crossing}` is not a kink")));
    };
    Ok(Kink {
        side,
        sign: *sign,
        a1: a1.clone(),
        a2: a2.clone(),
        l: l.clone(),
    })
}

/// Add a kink; returns the diagram, the crossing id and the edge.
/// Also returns the arc the kink sits on.
fn r1_insert(d: &Diagram, anchor: &SiteAnchor, sign: Sign) -> Result<(Diagram, String, String, String)> {
    let side = need(&anchor.side, "side")?;
    let mut e = Edit::new(d)?;
    let (a, a2, edge) = if let Some(lid) = &anchor.loop_id {
        let k =
            e.d.free_loops
                .iter()
                .position(|l| &l.id == lid)
                .ok_or_else(|| missing(format!("no loop `{lid}`")))?;
        let lp = e.d.free_loops.remove(k);
        let id = if e.old.arcs.iter().any(|a| a.id == lp.id) {
            e.fresh("x")
        } else {
            lp.id.clone()
        };
        e.d.arcs.push(ArcDecl {
            id: id.clone(),
            edge: lp.edge.clone(),
        });
        rename_refs(&mut e.d, &Anchor::Loop(lp.id.clone()), &Anchor::Arc(id.clone()));
        let main = matches!(&e.d.outer, Some(FaceRef { anchor: Anchor::Arc(x), .. }) if *x == id);
        if !main {
            e.d.nesting.push(Nesting {
                arc: id.clone(),
                side: outer_side_of(lp.orientation),
                face: lp.face.clone(),
            });
        }
        (id.clone(), id, lp.edge)
    } else {
        let a = need(&anchor.arc, "arc")?;
        let edge = e.edge(&a)?;
        let a2 = e.split(&a)?;
        (a, a2, edge)
    };
    let l = e.new_arc(&edge);
    let c = match side {
        Side::Right => e.push_crossing(sign, &a, &l, &l, &a2),
        Side::Left => e.push_crossing(sign, &l, &a, &a2, &l),
    };
    Ok((e.finish()?, c, edge, a))
}

/// Remove a kink. Returns the diagram, an anchor re-inserting it, the kink
/// side and the edge.
fn r1_remove(
    d: &Diagram,
    crossing: &str,
    want: Option<Sign>,
    keep: Option<&str>,
) -> Result<(Diagram, SiteAnchor, Kink, String)> {
    let k = kink_keeping(d, crossing, keep)?;
    if want.is_some_and(|s| s != k.sign) {
        return Err(missing(format!("kink `{crossing}` has the other sign")));
    }
    let mut e = Edit::new(d)?;
    let edge = e.edge(&k.a1)?;
    e.drop_node(crossing);
    e.drop_arc(&k.l);
    e.dead.insert(k.l.clone());
    let mut back = SiteAnchor {
        side: Some(k.side),
        sign: Some(k.sign),
        ..SiteAnchor::default()
    };
    if k.a1 != k.a2 {
        e.join(&k.a1, &k.a2)?;
        back.arc = Some(k.a1.clone());
        return Ok((e.finish()?, back, k, edge));
    }
    // a lone kink: the component becomes a free loop
    e.reanchor()?;
    let a = k.a1.clone();
    e.drop_arc(&a);
    let lid = if e.old.free_loops.iter().any(|l| l.id == a) {
        e.fresh("L")
    } else {
        a.clone()
    };
    let (orientation, face) = match &e.d.outer {
        Some(FaceRef {
            anchor: Anchor::Arc(x),
            side,
        }) if *x == a => (orientation_of(*side), None),
        _ => {
            let i =
                e.d.nesting
                    .iter()
                    .position(|n| n.arc == a)
                    .ok_or_else(|| Error::InconsistentOuter(format!("no outer face for `{a}`")))?;
            let n = e.d.nesting.remove(i);
            (orientation_of(n.side), n.face)
        }
    };
    rename_refs(&mut e.d, &Anchor::Arc(a.clone()), &Anchor::Loop(lid.clone()));
    e.d.free_loops.push(FreeLoop {
        id: lid.clone(),
        edge: edge.clone(),
        orientation,
        face,
    });
    back.loop_id = Some(lid);
    Ok((e.d, back, k, edge))
}

/// Which pair of slots a strand takes at a crossing.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Pair {
    SwNe,
    SeNw,
}

impl Pair {
    fn other(self) -> Pair {
        match self {
            Pair::SwNe => Pair::SeNw,
            Pair::SeNw => Pair::SwNe,
        }
    }
}

/// Slots `(sign, sw, se, ne, nw)` of a crossing where strand `a` takes
/// `pair`.
fn layout<'a>(pair: Pair, a: (&'a str, &'a str), b: (&'a str, &'a str), a_over: bool) -> (Sign, [&'a str; 4]) {
    match pair {
        Pair::SwNe => (if a_over { Sign::Pos } else { Sign::Neg }, [a.0, b.0, a.1, b.1]),
        Pair::SeNw => (if a_over { Sign::Neg } else { Sign::Pos }, [b.0, a.0, b.1, a.1]),
    }
}

fn r2_insert(d: &Diagram, anchor: &SiteAnchor) -> Result<(Diagram, String, String)> {
    let a = need(&anchor.arc, "arc")?;
    let sa = need(&anchor.side, "side")?;
    let b = need(&anchor.target, "target")?;
    let sb = need(&anchor.target_side, "target_side")?;
    let over = need(&anchor.over, "over")?;
    if a == b {
        return Err(missing("a finger needs two distinct arcs"));
    }
    if over != a && over != b {
        return Err(missing(format!("`{over}` is neither strand")));
    }
    let mut e = Edit::new(d)?;
    if e.old_face(&a, sa)? != e.old_face(&b, sb)? {
        return Err(missing(format!("`{a}` and `{b}` do not share that face")));
    }
    let (ea, eb) = (e.edge(&a)?, e.edge(&b)?);
    let a2 = e.split(&a)?;
    let x = e.new_arc(&ea);
    let b2 = e.split(&b)?;
    let y = e.new_arc(&eb);
    let pa = if sb == Side::Left { Pair::SwNe } else { Pair::SeNw };
    let a_over = over == a;
    // b meets P first exactly when the two sides differ
    let (bp, bq) = if sa != sb {
        ((b.as_str(), y.as_str()), (y.as_str(), b2.as_str()))
    } else {
        ((y.as_str(), b2.as_str()), (b.as_str(), y.as_str()))
    };
    let (s1, p) = layout(pa, (&a, &x), bp, a_over);
    let (s2, q) = layout(pa.other(), (&x, &a2), bq, a_over);
    let (p, q) = (p.map(str::to_string), q.map(str::to_string));
    let cp = e.push_crossing(s1, &p[0], &p[1], &p[2], &p[3]);
    let cq = e.push_crossing(s2, &q[0], &q[1], &q[2], &q[3]);
    if anchor.after == Some(true) {
        let (from, to) = (FaceRef::arc(a.clone(), sa), FaceRef::arc(a2.clone(), sa));
        for_each_ref(&mut e.d, |r| {
            if *r == from {
                *r = to.clone();
            }
            Ok(())
        })?;
    }
    Ok((e.finish()?, cp, cq))
}

fn r2_remove(d: &Diagram, anchor: &SiteAnchor) -> Result<(Diagram, SiteAnchor)> {
    let p = need(&anchor.crossing, "crossing")?;
    let q = need(&anchor.crossing2, "crossing2")?;
    if p == q {
        return Err(missing("a bigon needs two crossings"));
    }
    let mut e = Edit::new(d)?;
    let (ip, _) = e.crossing(&p)?;
    let (iq, _) = e.crossing(&q)?;
    let map = &e.map;
    let between: Vec<usize> = (0..e.old.arcs.len())
        .filter(|&i| {
            let (t, h) = (map.inc.tail[i].node, map.inc.head[i].node);
            (t == ip && h == iq) || (t == iq && h == ip)
        })
        .collect();
    let mut found = None;
    'outer: for &x in &between {
        for dx in [2 * x, 2 * x + 1] {
            let f = map.face_of_dart[dx];
            let cyc = &map.faces[f];
            if cyc.len() != 2 {
                continue;
            }
            let other = if cyc[0] == dx { cyc[1] } else { cyc[0] };
            let y = other / 2;
            if y != x && between.contains(&y) {
                found = Some((x, dx, y, other));
                break 'outer;
            }
        }
    }
    let (x, dx, y, dy) = found.ok_or_else(|| missing(format!("no bigon between `{p}` and `{q}`")))?;
    e.bounded(e.map.face_of_dart[dx])?;
    let xi = e.old.arcs[x].id.clone();
    let yi = e.old.arcs[y].id.clone();
    let (xt, xtp) = (map.inc.tail[x].node, map.inc.tail[x].pos);
    let (xh, xhp) = (map.inc.head[x].node, map.inc.head[x].pos);
    let (yt, ytp) = (map.inc.tail[y].node, map.inc.tail[y].pos);
    let (yh, yhp) = (map.inc.head[y].node, map.inc.head[y].pos);
    let a1 = e.slot(xt, partner(xtp));
    let a2 = e.slot(xh, partner(xhp));
    let b1 = e.slot(yt, partner(ytp));
    let b2 = e.slot(yh, partner(yhp));
    if a1 == yi || b1 == xi {
        return Err(missing("the two bigon sides lie on one strand"));
    }
    let x_over_t = is_over(e.sign(xt), xtp);
    let x_over_h = is_over(e.sign(xh), xhp);
    if x_over_t != x_over_h {
        return Err(missing("strands alternate over the bigon"));
    }
    let ids: BTreeSet<&String> = [&a1, &a2, &b1, &b2, &xi, &yi].into_iter().collect();
    if ids.len() != 6 {
        return Err(missing("bigon strands are not separate"));
    }
    let sa = side_of_dart(dx).other();
    let sb = side_of_dart(dy).other();
    e.merges.push(vec![
        (a1.clone(), sa),
        (a2.clone(), sa),
        (b1.clone(), sb),
        (b2.clone(), sb),
    ]);
    // The finger splits the face beside the strands in two. When the part
    // past it is bounded only by arcs that disappear, references into it
    // are parked on `a1` and the inverse is told to move them back.
    let f1 = e.old_face(&a1, sa)?;
    let f2 = e.old_face(&a2, sa)?;
    let gone: BTreeSet<&str> = [&a2, &b2, &xi, &yi].into_iter().map(String::as_str).collect();
    let lonely = f1 != f2
        && e.map.faces[f2]
            .iter()
            .all(|&z| gone.contains(e.old.arcs[z / 2].id.as_str()));
    let mut after = false;
    if lonely {
        let (old, map) = (&e.old, &e.map);
        let here = FaceRef::arc(a1.clone(), sa);
        let spare = map.faces[f1]
            .iter()
            .filter(|&&z| !gone.contains(old.arcs[z / 2].id.as_str()))
            .map(|&z| FaceRef::arc(old.arcs[z / 2].id.clone(), side_of_dart(z)))
            .find(|r| *r != here);
        let mut clash = false;
        for_each_ref(&mut e.d, |r| {
            if !matches!(r.anchor, Anchor::Arc(_)) {
                return Ok(());
            }
            let f = map.face_of_ref(old, r)?;
            if f == f2 {
                after = true;
                *r = here.clone();
            } else if *r == here {
                match &spare {
                    Some(s) => *r = s.clone(),
                    None => clash = true,
                }
            }
            Ok(())
        })?;
        if clash && after {
            return Err(missing("both sides of the finger hold references"));
        }
    }
    let before = e.map.components.len();
    e.drop_node(&p);
    e.drop_node(&q);
    for z in [&xi, &yi] {
        e.drop_arc(z);
        e.dead.insert(z.clone());
    }
    e.join(&a1, &a2)?;
    e.join(&b1, &b2)?;
    let out = e.finish()?;
    if PlanarMap::build(&out)?.components.len() != before {
        return Err(missing("removal would split the diagram"));
    }
    let back = SiteAnchor {
        arc: Some(a1.clone()),
        side: Some(sa),
        target: Some(b1.clone()),
        target_side: Some(sb),
        over: Some(if x_over_t { a1 } else { b1 }),
        after: after.then_some(true),
        ..SiteAnchor::default()
    };
    Ok((out, back))
}

fn triangle_side(d: &Diagram, arcs: &BTreeSet<String>, probe: &str) -> Result<Side> {
    let map = PlanarMap::build(d)?;
    let &i = map
        .inc
        .arc_index
        .get(probe)
        .ok_or_else(|| Error::UnknownArc(probe.into()))?;
    for (dart, side) in [(2 * i, Side::Left), (2 * i + 1, Side::Right)] {
        let cyc = &map.faces[map.face_of_dart[dart]];
        let ids: BTreeSet<String> = cyc.iter().map(|&x| d.arcs[x / 2].id.clone()).collect();
        if cyc.len() == 3 && &ids == arcs {
            return Ok(side);
        }
    }
    Err(missing("triangle did not reappear"))
}

fn r3(d: &Diagram, anchor: &SiteAnchor) -> Result<(Diagram, SiteAnchor)> {
    let a = need(&anchor.arc, "arc")?;
    let s = need(&anchor.side, "side")?;
    let mut e = Edit::new(d)?;
    let f = e.old_face(&a, s)?;
    let cyc = e.map.faces[f].clone();
    if cyc.len() != 3 {
        return Err(missing("face is not a triangle"));
    }
    e.bounded(f)?;
    let tri: Vec<usize> = cyc.iter().map(|&x| x / 2).collect();
    let tri_ids: BTreeSet<String> = tri.iter().map(|&i| e.old.arcs[i].id.clone()).collect();
    let corners: BTreeSet<usize> = cyc
        .iter()
        .map(|&x| {
            let i = x / 2;
            if x % 2 == 0 {
                e.map.inc.tail[i].node
            } else {
                e.map.inc.head[i].node
            }
        })
        .collect();
    if tri_ids.len() != 3 || corners.len() != 3 {
        return Err(missing("triangle is degenerate"));
    }
    if corners.iter().any(|&n| e.old.nodes[n].is_vertex()) {
        return Err(missing("triangle touches a vertex"));
    }
    let mut assign = Vec::new();
    // over count per strand
    let mut tops = Vec::new();
    for &i in &tri {
        let id = e.old.arcs[i].id.clone();
        let (xn, xs) = (e.map.inc.tail[i].node, e.map.inc.tail[i].pos);
        let (yn, ys) = (e.map.inc.head[i].node, e.map.inc.head[i].pos);
        let in_a = e.slot(xn, partner(xs));
        let out_a = e.slot(yn, partner(ys));
        if tri_ids.contains(&in_a) || tri_ids.contains(&out_a) {
            return Err(missing("triangle strands run into each other"));
        }
        tops.push(is_over(e.sign(xn), xs) as u8 + is_over(e.sign(yn), ys) as u8);
        assign.push((xn, partner(xs), id.clone()));
        assign.push((xn, xs, out_a));
        assign.push((yn, ys, in_a));
        assign.push((yn, partner(ys), id));
    }
    if !tops.contains(&2) {
        return Err(missing("no strand lies on top of the triangle"));
    }
    for (n, p, arc) in assign {
        e.set(n, p, &arc);
    }
    e.dead.extend(tri_ids.iter().cloned());
    let out = e.finish()?;
    let side = triangle_side(&out, &tri_ids, &a)?;
    Ok((
        out,
        SiteAnchor {
            arc: Some(a),
            side: Some(side),
            ..SiteAnchor::default()
        },
    ))
}

/// The strand crossing all edges on one side of a vertex, nearest first.
struct Pass {
    rightward: bool,
    nodes: Vec<usize>,
    near: Vec<String>,
    far: Vec<String>,
    /// strand arcs strictly between the crossings
    inner: Vec<String>,
    first: String,
    last: String,
}

fn find_pass(e: &Edit, v: usize, block: Block, over: bool) -> Result<Pass> {
    let Node::Vertex { incoming, outgoing, .. } = &e.d.nodes[v] else {
        unreachable!()
    };
    let near = match block {
        Block::Out => outgoing.clone(),
        Block::In => incoming.clone(),
    };
    let mut nodes = Vec::new();
    let mut dirs = Vec::new();
    let mut far = Vec::new();
    let mut ins = Vec::new();
    let mut outs = Vec::new();
    for a in &near {
        let (n, p) = match block {
            Block::Out => e.head(a)?,
            Block::In => e.tail(a)?,
        };
        if e.d.nodes[n].is_vertex() {
            return Err(missing("edge ends at a vertex before any crossing"));
        }
        // a rightward strand takes sw -> ne
        let right = matches!(p, SlotPos::Se | SlotPos::Nw);
        let (sin, sout) = if right {
            (SlotPos::Sw, SlotPos::Ne)
        } else {
            (SlotPos::Se, SlotPos::Nw)
        };
        if is_over(e.sign(n), sin) != over {
            return Err(missing("strand has the wrong height"));
        }
        nodes.push(n);
        dirs.push(right);
        far.push(e.slot(n, partner(p)));
        ins.push(e.slot(n, sin));
        outs.push(e.slot(n, sout));
    }
    let rightward = dirs[0];
    if dirs.iter().any(|&r| r != rightward) {
        return Err(missing("strand changes direction"));
    }
    let k = near.len();
    let mut inner = Vec::new();
    for j in 0..k - 1 {
        let (from, to) = if rightward { (j, j + 1) } else { (j + 1, j) };
        if outs[from] != ins[to] {
            return Err(missing("edges are not crossed consecutively"));
        }
        inner.push(outs[from].clone());
    }
    let (first, last) = if rightward {
        (ins[0].clone(), outs[k - 1].clone())
    } else {
        (ins[k - 1].clone(), outs[0].clone())
    };
    Ok(Pass {
        rightward,
        nodes,
        near,
        far,
        inner,
        first,
        last,
    })
}

fn r4(d: &Diagram, anchor: &SiteAnchor, over: bool, dir: Direction) -> Result<Diagram> {
    let vid = need(&anchor.vertex, "vertex")?;
    let mut e = Edit::new(d)?;
    let (v, incoming, outgoing) = e.vertex(&vid)?;
    let (from, to, targets) = match dir {
        Direction::Insert => (Block::Out, Block::In, incoming),
        Direction::Remove => (Block::In, Block::Out, outgoing),
    };
    let pass = find_pass(&e, v, from, over)?;
    let mut ids: BTreeSet<&String> = BTreeSet::new();
    let all: Vec<&String> = pass
        .near
        .iter()
        .chain(&pass.far)
        .chain(&pass.inner)
        .chain(&targets)
        .chain([&pass.first, &pass.last])
        .collect();
    for x in &all {
        ids.insert(x);
    }
    let distinct_nodes: BTreeSet<usize> = pass.nodes.iter().copied().collect();
    if ids.len() != all.len() || distinct_nodes.len() != pass.nodes.len() {
        return Err(missing("strand and vertex edges overlap"));
    }
    // the corner at v between consecutive edges must be a triangle closed
    // off by the strand, and bounded
    for (j, a) in pass.inner.iter().enumerate() {
        let x = match from {
            Block::In => head_dart(e.map.inc.arc_index[&pass.near[j]]),
            Block::Out => tail_dart(e.map.inc.arc_index[&pass.near[j + 1]]),
        };
        let f = e.map.face_of_dart[x];
        let i = e.map.inc.arc_index[a];
        if e.map.faces[f].iter().all(|&z| z / 2 != i) {
            return Err(missing("something lies between the strand and the vertex"));
        }
        e.bounded(f)?;
    }
    let sigma_edge = e.edge(&pass.first)?;
    for (near, far) in pass.near.iter().zip(&pass.far) {
        e.merges
            .push(vec![(near.clone(), Side::Right), (far.clone(), Side::Right)]);
    }
    let node_ids: Vec<String> = pass.nodes.iter().map(|&n| e.d.nodes[n].id().to_string()).collect();
    for (j, far) in pass.far.iter().enumerate() {
        let pos = match from {
            Block::Out => SlotPos::Out(j),
            Block::In => SlotPos::In(j),
        };
        e.set(v, pos, far);
    }
    for id in &node_ids {
        e.drop_node(id);
    }
    for a in pass.near.iter().chain(&pass.inner) {
        e.drop_arc(a);
        e.dead.insert(a.clone());
    }
    let m = targets.len();
    let mut near_new = Vec::new();
    for (i, t) in targets.iter().enumerate() {
        let edge = e.edge(t)?;
        let n = e.new_arc(&edge);
        let pos = match to {
            Block::In => SlotPos::In(i),
            Block::Out => SlotPos::Out(i),
        };
        e.set(v, pos, &n);
        near_new.push(n);
    }
    let mut pieces = vec![pass.first.clone()];
    for _ in 0..m - 1 {
        pieces.push(e.new_arc(&sigma_edge));
    }
    pieces.push(pass.last.clone());
    let order: Vec<usize> = if pass.rightward {
        (0..m).collect()
    } else {
        (0..m).rev().collect()
    };
    for (step, &i) in order.iter().enumerate() {
        let (up_in, up_out) = match to {
            Block::In => (targets[i].as_str(), near_new[i].as_str()),
            Block::Out => (near_new[i].as_str(), targets[i].as_str()),
        };
        let pair = if pass.rightward { Pair::SwNe } else { Pair::SeNw };
        let (sign, s) = layout(pair, (&pieces[step], &pieces[step + 1]), (up_in, up_out), over);
        let s = s.map(str::to_string);
        e.push_crossing(sign, &s[0], &s[1], &s[2], &s[3]);
    }
    e.finish()
}

fn r5_insert(d: &Diagram, anchor: &SiteAnchor, sign: Sign) -> Result<(Diagram, String)> {
    let vid = need(&anchor.vertex, "vertex")?;
    let block = need(&anchor.block, "block")?;
    let i = need(&anchor.index, "index")?;
    let mut e = Edit::new(d)?;
    let (v, incoming, outgoing) = e.vertex(&vid)?;
    let list = match block {
        Block::In => &incoming,
        Block::Out => &outgoing,
    };
    if i + 1 >= list.len() {
        return Err(missing(format!("vertex `{vid}` has no edges at {i} and {}", i + 1)));
    }
    let (l, r) = (list[i].clone(), list[i + 1].clone());
    let (el, er) = (e.edge(&l)?, e.edge(&r)?);
    let c = match block {
        Block::In => {
            let f1 = e.new_arc(&el);
            let f2 = e.new_arc(&er);
            e.set(v, SlotPos::In(i), &f2);
            e.set(v, SlotPos::In(i + 1), &f1);
            e.push_crossing(sign, &l, &r, &f1, &f2)
        }
        Block::Out => {
            let g1 = e.new_arc(&er);
            let g2 = e.new_arc(&el);
            e.set(v, SlotPos::Out(i), &g1);
            e.set(v, SlotPos::Out(i + 1), &g2);
            e.push_crossing(sign, &g1, &g2, &r, &l)
        }
    };
    Ok((e.finish()?, c))
}

fn r5_remove(d: &Diagram, anchor: &SiteAnchor, want: Sign) -> Result<(Diagram, SiteAnchor)> {
    let cid = need(&anchor.crossing, "crossing")?;
    let mut e = Edit::new(d)?;
    let (c, sign) = e.crossing(&cid)?;
    if sign != want {
        return Err(missing(format!("twist `{cid}` has the other sign")));
    }
    let [sw, se, ne, nw] = [SlotPos::Sw, SlotPos::Se, SlotPos::Ne, SlotPos::Nw].map(|p| e.slot(c, p));
    let below = match (e.head(&nw)?, e.head(&ne)?) {
        ((v1, SlotPos::In(k0)), (v2, SlotPos::In(k1))) if v1 == v2 && k1 == k0 + 1 => Some((v1, k0)),
        _ => None,
    };
    let above = match (e.tail(&sw)?, e.tail(&se)?) {
        ((v1, SlotPos::Out(j0)), (v2, SlotPos::Out(j1))) if v1 == v2 && j1 == j0 + 1 => Some((v1, j0)),
        _ => None,
    };
    let prefer_out = anchor.block == Some(Block::Out);
    let (v, block, k) = match (below, above) {
        (Some((v, k)), _) if !prefer_out => (v, Block::In, k),
        (_, Some((v, j))) => (v, Block::Out, j),
        (Some((v, k)), None) => (v, Block::In, k),
        (None, None) => return Err(missing(format!("`{cid}` is not a vertex twist"))),
    };
    let (g0, g1) = match block {
        Block::In => (&nw, &ne),
        Block::Out => (&sw, &se),
    };
    for side in [Side::Left, Side::Right] {
        let f = e.old_face(g0, side)?;
        let other = &e.old.arcs[..];
        if e.map.faces[f].iter().any(|&z| &other[z / 2].id == g1) {
            e.bounded(f)?;
        }
    }
    let vid = e.d.nodes[v].id().to_string();
    e.drop_node(&cid);
    let gone = match block {
        Block::In => {
            e.set(v, SlotPos::In(k), &sw);
            e.set(v, SlotPos::In(k + 1), &se);
            [ne, nw]
        }
        Block::Out => {
            e.set(v, SlotPos::Out(k), &nw);
            e.set(v, SlotPos::Out(k + 1), &ne);
            [sw, se]
        }
    };
    for a in &gone {
        e.drop_arc(a);
        e.dead.insert(a.clone());
    }
    let out = e.finish()?;
    Ok((
        out,
        SiteAnchor {
            vertex: Some(vid),
            block: Some(block),
            index: Some(k),
            sign: Some(sign),
            ..SiteAnchor::default()
        },
    ))
}

fn site(kind: MoveKind, direction: Direction, anchor: SiteAnchor) -> MoveSite {
    MoveSite {
        kind,
        direction,
        anchor,
    }
}

fn flip(dir: Direction) -> Direction {
    match dir {
        Direction::Insert => Direction::Remove,
        Direction::Remove => Direction::Insert,
    }
}

pub(super) fn dispatch(d: &Diagram, s: &MoveSite) -> Result<Applied> {
    use Direction::*;
    use MoveKind::*;
    let a = &s.anchor;
    let (diagram, inverse, effect) = match (s.kind, s.direction) {
        (R1Pos | R1Neg, Insert) => {
            let sign = kind_sign(s.kind);
            let side = need(&a.side, "side")?;
            let (out, c, edge, main) = r1_insert(d, a, sign)?;
            let (rot, bracket) = kink_effect(side, sign);
            let back = SiteAnchor {
                crossing: Some(c),
                arc: Some(main),
                ..SiteAnchor::default()
            };
            (
                out,
                site(s.kind, Remove, back),
                Effect {
                    edge: Some(edge),
                    rot,
                    bracket,
                },
            )
        }
        (R1Pos | R1Neg, Remove) => {
            let c = need(&a.crossing, "crossing")?;
            let (out, back, k, edge) = r1_remove(d, &c, Some(kind_sign(s.kind)), a.arc.as_deref())?;
            let (rot, bracket) = kink_effect(k.side, k.sign);
            (
                out,
                site(s.kind, Insert, back),
                Effect {
                    edge: Some(edge),
                    rot: -rot,
                    bracket: -bracket,
                },
            )
        }
        (R1Prime, Insert) => {
            let sign = need(&a.sign, "sign")?;
            let side = need(&a.side, "side")?;
            let (d1, c1, edge, main) = r1_insert(d, a, sign)?;
            // on a former free loop both lobes look like kinks; stay on `main`
            let next = SiteAnchor {
                arc: Some(kink_keeping(&d1, &c1, Some(&main))?.a2),
                side: Some(side),
                ..SiteAnchor::default()
            };
            let (d2, c2, _, _) = r1_insert(&d1, &next, sign.flip())?;
            let (r1, b1) = kink_effect(side, sign);
            let (r2, b2) = kink_effect(side, sign.flip());
            let back = SiteAnchor {
                crossing: Some(c1),
                crossing2: Some(c2),
                arc: Some(main),
                ..SiteAnchor::default()
            };
            (
                d2,
                site(R1Prime, Remove, back),
                Effect {
                    edge: Some(edge),
                    rot: r1 + r2,
                    bracket: b1 + b2,
                },
            )
        }
        (R1Prime, Remove) => {
            let c1 = need(&a.crossing, "crossing")?;
            let k1 = kink_at(d, &c1)?;
            let adjacent = |c: &str| -> Option<(bool, Kink)> {
                let k2 = kink_at(d, c).ok()?;
                if k2.a1 == k1.a2 {
                    Some((true, k2))
                } else if k2.a2 == k1.a1 {
                    Some((false, k2))
                } else {
                    None
                }
            };
            let found = match &a.crossing2 {
                Some(c2) => adjacent(c2).map(|x| (c2.clone(), x)),
                None => d
                    .nodes
                    .iter()
                    .filter(|n| n.id() != c1)
                    .find_map(|n| adjacent(n.id()).map(|x| (n.id().to_string(), x))),
            };
            let (c2, (c1_first, k2)) = found.ok_or_else(|| missing(format!("no second kink next to `{c1}`")))?;
            if c2 == c1 || k2.side != k1.side || k2.sign == k1.sign {
                return Err(missing("kinks must share a side and differ in sign"));
            }
            let (d1, _, _, edge) = r1_remove(d, &c1, None, None)?;
            // the first removal joined k1.a2 onto k1.a1
            let keep = if k2.a1 == k1.a2 { k1.a1.clone() } else { k2.a1.clone() };
            let (d2, mut back, _, _) = r1_remove(&d1, &c2, None, Some(&keep))?;
            back.sign = Some(if c1_first { k1.sign } else { k2.sign });
            let (r1, b1) = kink_effect(k1.side, k1.sign);
            let (r2, b2) = kink_effect(k2.side, k2.sign);
            (
                d2,
                site(R1Prime, Insert, back),
                Effect {
                    edge: Some(edge),
                    rot: -(r1 + r2),
                    bracket: -(b1 + b2),
                },
            )
        }
        (R2, Insert) => {
            let (out, p, q) = r2_insert(d, a)?;
            let back = SiteAnchor {
                crossing: Some(p),
                crossing2: Some(q),
                ..SiteAnchor::default()
            };
            (out, site(R2, Remove, back), Effect::none())
        }
        (R2, Remove) => {
            let (out, back) = r2_remove(d, a)?;
            (out, site(R2, Insert, back), Effect::none())
        }
        (R3, dir) => {
            let (out, back) = r3(d, a)?;
            (out, site(R3, flip(dir), back), Effect::none())
        }
        (R4Over | R4Under, dir) => {
            let out = r4(d, a, s.kind == R4Over, dir)?;
            let back = SiteAnchor {
                vertex: a.vertex.clone(),
                ..SiteAnchor::default()
            };
            (out, site(s.kind, flip(dir), back), Effect::none())
        }
        (R5Cw | R5Ccw, Insert) => {
            let (out, c) = r5_insert(d, a, kind_sign(s.kind))?;
            let back = SiteAnchor {
                crossing: Some(c),
                block: a.block,
                ..SiteAnchor::default()
            };
            (out, site(s.kind, Remove, back), Effect::none())
        }
        (R5Cw | R5Ccw, Remove) => {
            let (out, back) = r5_remove(d, a, kind_sign(s.kind))?;
            (out, site(r5_kind(kind_sign(s.kind)), Insert, back), Effect::none())
        }
    };
    Ok(Applied {
        diagram,
        inverse,
        effect,
    })
}
