//! Directed-graph services on the underlying graph of a diagram: strong
//! connectivity, positive balanced colorings, and arborescence counts.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::diagram::{Diagram, Node};
use crate::error::{Error, Result};

/// A directed multigraph. Closed edges (free loops, or strands that never
/// meet a vertex) are kept apart since they have no endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub vertices: Vec<String>,
    /// (edge id, tail, head)
    pub edges: Vec<(String, usize, usize)>,
    pub closed: Vec<String>,
}

impl Digraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Digraph {
        Digraph {
            vertices: (0..n).map(|i| format!("v{i}")).collect(),
            edges: edges
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (format!("e{k}"), a, b))
                .collect(),
            closed: Vec::new(),
        }
    }

    /// Vertices of `d` with one edge per strand between vertices; crossings
    /// are transparent.
    pub fn from_diagram(d: &Diagram) -> Result<Digraph> {
        let inc = d.incidence()?;
        let mut vertices = Vec::new();
        let mut vidx = BTreeMap::new();
        for (i, n) in d.nodes.iter().enumerate() {
            if let Node::Vertex { id, .. } = n {
                vidx.insert(i, vertices.len());
                vertices.push(id.clone());
            }
        }
        let mut edges = Vec::new();
        let mut closed = Vec::new();
        for p in d.edge_paths()? {
            let e = d.arcs[p.arcs[0]].edge.clone();
            if p.closed {
                closed.push(e);
                continue;
            }
            let tail = vidx[&inc.tail[p.arcs[0]].node];
            let head = vidx[&inc.head[*p.arcs.last().unwrap()].node];
            edges.push((e, tail, head));
        }
        closed.extend(d.free_loops.iter().map(|l| l.edge.clone()));
        Ok(Digraph {
            vertices,
            edges,
            closed,
        })
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    fn out_adj(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (k, (_, a, b)) in self.edges.iter().enumerate() {
            adj[*a].push((*b, k));
        }
        adj
    }

    /// Vertices reachable from `v`.
    pub fn reachable(&self, v: usize) -> Vec<bool> {
        let adj = self.out_adj();
        let mut seen = vec![false; self.vertices.len()];
        seen[v] = true;
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Number of weakly connected pieces; each closed edge is its own piece.
    pub fn weak_components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (_, a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            parent[ra] = rb;
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count() + self.closed.len()
    }
}

/// Strong components by Kosaraju; `comp[v]` numbers them.
pub fn strong_components(g: &Digraph) -> Vec<usize> {
    let n = g.vertices.len();
    let adj = g.out_adj();
    let mut radj = vec![Vec::new(); n];
    for (_, a, b) in &g.edges {
        radj[*b].push(*a);
    }
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![(s, 0usize)];
        while let Some((v, i)) = stack.pop() {
            if i < adj[v].len() {
                stack.push((v, i + 1));
                let w = adj[v][i].0;
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut c = 0;
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = c;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &radj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = c;
                    stack.push(w);
                }
            }
        }
        c += 1;
    }
    comp
}

/// One strong component covering every vertex and closed edge.
pub fn strongly_connected_graph(g: &Digraph) -> bool {
    if g.vertices.is_empty() {
        return g.closed.len() == 1;
    }
    if !g.closed.is_empty() {
        return false;
    }
    strong_components(g).iter().all(|&c| c == 0)
}

pub fn strongly_connected(d: &Diagram) -> Result<bool> {
    Ok(strongly_connected_graph(&Digraph::from_diagram(d)?))
}

/// Whether each edge closes up into a directed cycle (head reaches tail).
pub fn edges_on_cycles(g: &Digraph) -> bool {
    let mut cache: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    g.edges
        .iter()
        .all(|(_, a, b)| cache.entry(*b).or_insert_with(|| g.reachable(*b))[*a])
}

pub type Coloring = BTreeMap<String, Rational64>;

/// Edges of a directed path from `from` to `to`, found breadth first.
fn path_edges(g: &Digraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let adj = g.out_adj();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; g.vertices.len()];
    let mut seen = vec![false; g.vertices.len()];
    seen[from] = true;
    let mut q = VecDeque::from([from]);
    while let Some(v) = q.pop_front() {
        if v == to {
            let mut out = Vec::new();
            let mut x = to;
            while let Some((p, e)) = prev[x] {
                out.push(e);
                x = p;
            }
            out.reverse();
            return Some(out);
        }
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((v, e));
                q.push_back(w);
            }
        }
    }
    None
}

/// Positive integer coloring built by pushing flow around directed cycles.
pub fn positive_coloring_graph(g: &Digraph) -> Result<Coloring> {
    let mut c = vec![Rational64::zero(); g.edges.len()];
    for k in 0..g.edges.len() {
        if c[k].is_positive() {
            continue;
        }
        let (name, a, b) = &g.edges[k];
        let mut cycle = path_edges(g, *b, *a).ok_or_else(|| Error::NotStronglyConnected(name.clone()))?;
        cycle.push(k);
        let deficit = c.iter().map(|x| -*x).fold(Rational64::zero(), |m, x| m.max(x));
        let add = Rational64::one() + deficit;
        for e in cycle {
            c[e] += add;
        }
    }
    let mut out: Coloring = g.edges.iter().zip(c).map(|((n, _, _), x)| (n.clone(), x)).collect();
    for e in &g.closed {
        out.insert(e.clone(), Rational64::one());
    }
    Ok(out)
}

pub fn positive_coloring(d: &Diagram) -> Result<Coloring> {
    positive_coloring_graph(&Digraph::from_diagram(d)?)
}

/// Check that in-flow equals out-flow at every vertex.
pub fn check_balance(g: &Digraph, c: &Coloring) -> Result<()> {
    let mut net = vec![Rational64::zero(); g.vertices.len()];
    for (e, a, b) in &g.edges {
        let x = *c.get(e).ok_or_else(|| Error::UnknownEdge(e.clone()))?;
        net[*a] -= x;
        net[*b] += x;
    }
    match net.iter().position(|x| !x.is_zero()) {
        Some(v) => Err(Error::UnbalancedColoring(g.vertices[v].clone())),
        None => Ok(()),
    }
}

fn det_bigint(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return sign;
    }
    sign * &m[n - 1][n - 1]
}

/// Spanning arborescences rooted at `root` with edges oriented away from
/// it, by the directed matrix-tree theorem.
pub fn arborescence_count_graph(g: &Digraph, root: usize) -> BigInt {
    let n = g.vertices.len();
    let mut lap = vec![vec![BigInt::zero(); n]; n];
    for (_, a, b) in &g.edges {
        if a == b {
            continue;
        }
        lap[*b][*b] += 1;
        lap[*a][*b] -= 1;
    }
    let minor: Vec<Vec<BigInt>> = (0..n)
        .filter(|&i| i != root)
        .map(|i| (0..n).filter(|&j| j != root).map(|j| lap[i][j].clone()).collect())
        .collect();
    det_bigint(minor)
}

/// Same count by trying every choice of one incoming edge per non-root vertex.
pub fn arborescence_count_exhaustive(g: &Digraph, root: usize) -> u64 {
    let n = g.vertices.len();
    let mut into: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (_, a, b) in &g.edges {
        if a != b {
            into[*b].push(*a);
        }
    }
    let others: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    let mut parent = vec![usize::MAX; n];
    fn go(k: usize, others: &[usize], into: &[Vec<usize>], parent: &mut [usize], root: usize) -> u64 {
        if k == others.len() {
            // every vertex must climb to the root
            return others.iter().all(|&v| {
                let mut x = v;
                for _ in 0..parent.len() {
                    if x == root {
                        return true;
                    }
                    x = parent[x];
                }
                x == root
            }) as u64;
        }
        let v = others[k];
        let mut total = 0;
        for &p in &into[v] {
            parent[v] = p;
            total += go(k + 1, others, into, parent, root);
        }
        total
    }
    go(0, &others, &into, &mut parent, root)
}

pub fn arborescence_count(d: &Diagram, root: &str) -> Result<BigInt> {
    let g = Digraph::from_diagram(d)?;
    let r = g
        .vertex_index(root)
        .ok_or_else(|| Error::UnknownEdge(root.to_string()))?;
    Ok(arborescence_count_graph(&g, r))
}
