//! The eleven acceptance criteria. Each one prints a pass/fail line; the
//! test fails if any criterion does.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spatial_alex::diagram::{all_base_points, decorate, BasePoint, Diagram, PlanarMap};
use spatial_alex::fixtures;
use spatial_alex::graphalg::{
    arborescence_count, arborescence_count_exhaustive, check_balance, edges_on_cycles, positive_coloring,
    positive_coloring_graph, strongly_connected_graph, Coloring, Digraph,
};
use spatial_alex::invariant::{alexander, alexander_with, moy_relation_check, specialization_check};
use spatial_alex::lattice::{HalfMonomial, MeridianMap};
use spatial_alex::moves::{fuzz, random_plane_graph, Direction, MoveKind};
use spatial_alex::ring::{GroupRingElement, RingFraction};
use spatial_alex::rotation::{rot, rotation};
use spatial_alex::statesum::{
    alexander_det, base_point_sweep, default_base, enumerate_states, skein_check, state_sum, state_sum_at,
};
use spatial_alex::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn merid(d: &Diagram) -> MeridianMap {
    d.lattice().unwrap().meridian_map()
}

fn connected_fixtures() -> Vec<Diagram> {
    fixtures::ALL
        .iter()
        .map(|(n, _)| fixtures::by_name(n).unwrap())
        .collect()
}

/// Diagrams visited by seeded walks from the connected fixtures.
fn fuzzed(count: usize, walk: usize, framed: bool) -> Vec<Diagram> {
    let starts = connected_fixtures();
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let d = &starts[seed as usize % starts.len()];
        for s in fuzz(d, 1000 + seed, walk, framed).unwrap() {
            if out.len() < count {
                out.push(s.diagram);
            }
        }
        seed += 1;
    }
    out
}

/// One diagram per walk: the last one with at most `max` crossings.
fn walk_ends(count: usize, walk: usize, max: usize) -> Vec<Diagram> {
    let starts = connected_fixtures();
    (0..count as u64)
        .map(|seed| {
            let d = &starts[seed as usize % starts.len()];
            let steps = fuzz(d, 2000 + seed, walk, seed % 2 == 0).unwrap();
            steps
                .into_iter()
                .rev()
                .map(|s| s.diagram)
                .find(|x| x.crossing_count() <= max)
                .unwrap_or_else(|| d.clone())
        })
        .collect()
}

fn c1_fig5_rotation() -> Outcome {
    let d = fixtures::fig5();
    let m = merid(&d);
    let t = m.get("t").unwrap().clone();
    let s = m.get("s").unwrap().clone();
    let r = rotation(&d, &m).unwrap();
    let want = t.mul(&s.inv());
    ensure(r.rot == want, || format!("Rot = {}", r.rot.render(&m.names)))?;
    let text = r.rot.render(&m.names);
    ensure(text == "t*s^(-1)", || format!("rendered as {text}"))?;
    let one = HalfMonomial::identity(m.rank());
    let mut expected = vec![one, t.clone(), s.inv(), t.mul(&s.inv())];
    let mut got = r.windings.faces.clone();
    expected.sort();
    got.sort();
    ensure(got == expected, || {
        format!(
            "windings {:?}",
            got.iter().map(|w| w.render(&m.names)).collect::<Vec<_>>()
        )
    })?;
    Ok(format!("Rot = {text}, four regions"))
}

fn c2_unknot() -> Outcome {
    let d = fixtures::circle();
    let v = alexander(&d).map_err(|e| e.to_string())?;
    let h = HalfMonomial::from_halves(vec![1]);
    let want = RingFraction::new(GroupRingElement::one(1), GroupRingElement::binomial(h.clone(), h.inv())).unwrap();
    ensure(v.value.fraction_eq(&want).unwrap(), || {
        format!("got {}", v.value.balanced().render(&v.basis))
    })?;
    Ok(v.value.balanced().render(&v.basis))
}

fn c3_region_count() -> Outcome {
    let mut corpus = connected_fixtures();
    corpus.extend(fuzzed(200, 25, false));
    for (i, d) in corpus.iter().enumerate() {
        ensure(d.is_connected().unwrap(), || format!("diagram {i} is disconnected"))?;
        let dd = decorate(d, &default_base(d).unwrap()).unwrap();
        ensure(dd.regions.len() == dd.crossings.len() + 2, || {
            format!(
                "diagram {i}: {} regions, {} crossings",
                dd.regions.len(),
                dd.crossings.len()
            )
        })?;
        // recount from the raw map: faces plus one circle per vertex against
        // crossings plus one per incoming edge end
        let map = PlanarMap::build(d).unwrap();
        let faces = if d.nodes.is_empty() { 2 } else { map.faces.len() };
        let ends: usize = d.vertex_incidences().iter().map(|(_, v)| v.incoming.len()).sum();
        ensure(faces + d.vertex_count() == d.crossing_count() + ends + 2, || {
            format!("diagram {i}: raw count")
        })?;
    }
    Ok(format!("{} diagrams", corpus.len()))
}

fn sweep_corpus() -> Vec<Diagram> {
    let mut corpus = connected_fixtures();
    corpus.push(fixtures::fig5_and_circle());
    corpus.push(fixtures::two_circles());
    corpus.extend(walk_ends(50, 40, 12));
    corpus
}

fn c4_base_point_sweep() -> Outcome {
    let corpus = sweep_corpus();
    let mut points = 0;
    for (i, d) in corpus.iter().enumerate() {
        ensure(d.crossing_count() <= 12, || format!("diagram {i} too large"))?;
        let m = merid(d);
        let r = base_point_sweep(d, &m).map_err(|e| format!("diagram {i}: {e}"))?;
        ensure(r.entries.len() == all_base_points(d).len(), || {
            format!("diagram {i}: short sweep")
        })?;
        points += r.entries.len();
    }
    Ok(format!("{} diagrams, {points} base points", corpus.len()))
}

fn c5_determinant() -> Outcome {
    let corpus = sweep_corpus();
    let mut cases = 0;
    for (i, d) in corpus.iter().enumerate() {
        let m = merid(d);
        for b in all_base_points(d) {
            let dd = decorate(d, &b).unwrap();
            let s = state_sum(&dd, &m).unwrap();
            let det = alexander_det(&dd, &m).unwrap();
            ensure(s.numerator == det || s.numerator == det.neg(), || {
                format!("diagram {i} at {b:?}")
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (diagram, base point) pairs"))
}

fn c6_spanning_trees() -> Outcome {
    let mut corpus = vec![fixtures::theta()];
    corpus.extend((0..20).map(|seed| random_plane_graph(seed, 6).unwrap()));
    let mut cases = 0;
    for (i, d) in corpus.iter().enumerate() {
        ensure(d.crossing_count() == 0 && d.vertex_count() <= 6, || {
            format!("graph {i} not a small plane graph")
        })?;
        let g = Digraph::from_diagram(d).unwrap();
        ensure(strongly_connected_graph(&g), || {
            format!("graph {i} not strongly connected")
        })?;
        let inc = d.incidence().unwrap();
        for (k, a) in d.arcs.iter().enumerate() {
            let head = d.nodes[inc.head[k].node].id().to_string();
            let dd = decorate(d, &BasePoint::Arc(a.id.clone())).unwrap();
            let states = enumerate_states(&dd).unwrap().len();
            let trees = arborescence_count(d, &head).unwrap();
            let brute = arborescence_count_exhaustive(&g, g.vertex_index(&head).unwrap());
            ensure(trees == brute.into() && states as u64 == brute, || {
                format!(
                    "graph {i} arc {}: {states} states, {trees} trees, {brute} by search",
                    a.id
                )
            })?;
            cases += 1;
        }
    }
    Ok(format!("{} graphs, {cases} base edges", corpus.len()))
}

/// Monomial q with `ratio == q^k` for the meridian q of some edge.
fn edge_power(m: &MeridianMap, ratio: &HalfMonomial, k: i64) -> Option<HalfMonomial> {
    m.meridians.values().find(|t| t.pow(k) == *ratio).cloned()
}

fn c7_moves() -> Outcome {
    let starts = connected_fixtures();
    let mut framed_steps = 0;
    for run in 0..100u64 {
        let d = &starts[run as usize % starts.len()];
        let m = merid(d);
        let delta0 = alexander_with(d, &m, None).unwrap().value;
        let steps = fuzz(d, run, 50, true).unwrap();
        ensure(steps.len() <= 50, || "walk too long".into())?;
        for (i, s) in steps.iter().enumerate() {
            ensure(MoveKind::FRAMED.contains(&s.site.kind), || {
                format!("run {run}: unframed move")
            })?;
            let v = alexander_with(&s.diagram, &m, None).unwrap().value;
            ensure(v.fraction_eq(&delta0).unwrap(), || {
                format!("run {run} step {}: Delta changed", i + 1)
            })?;
            framed_steps += 1;
        }
    }
    let mut kinks = 0;
    for run in 0..30u64 {
        let d = &starts[run as usize % starts.len()];
        let m = merid(d);
        let bracket = |x: &Diagram| state_sum_at(x, &default_base(x).unwrap(), &m).unwrap().value;
        let mut prev_rot = rot(d, &m).unwrap();
        let mut prev_sum = bracket(d);
        for (i, s) in fuzz(d, 500 + run, 40, false).unwrap().iter().enumerate() {
            let r = rot(&s.diagram, &m).unwrap();
            let b = bracket(&s.diagram);
            let ratio = r.div(&prev_rot);
            let at = || format!("run {run} step {} ({})", i + 1, s.site.kind.name());
            match s.site.kind {
                MoveKind::R1Pos | MoveKind::R1Neg => {
                    let mut sign = if s.site.kind == MoveKind::R1Pos { 1 } else { -1 };
                    if s.site.direction == Direction::Remove {
                        sign = -sign;
                    }
                    let up = edge_power(&m, &ratio, 1);
                    let down = edge_power(&m, &ratio, -1);
                    let (t, e) = match (up, down) {
                        (Some(t), _) => (t, 1),
                        (_, Some(t)) => (t, -1),
                        _ => return Err(format!("{}: Rot ratio {}", at(), ratio.render(&m.names))),
                    };
                    // inserting a curl changes Delta by t^(-sign/2), so <D>
                    // moves by t^(-(e + sign)/2) once Rot^(1/2) is taken out;
                    // removal runs it backwards
                    let want = prev_sum.scale_monomial(&t.pow(-(e + sign) / 2));
                    ensure(b.fraction_eq(&want).unwrap(), || format!("{}: <D> ratio", at()))?;
                    kinks += 1;
                }
                MoveKind::R1Prime => {
                    let up = edge_power(&m, &ratio, 2);
                    let down = edge_power(&m, &ratio, -2);
                    let want = match (up, down) {
                        (Some(t), _) => prev_sum.scale_monomial(&t.inv()),
                        (_, Some(t)) => prev_sum.scale_monomial(&t),
                        _ => return Err(format!("{}: Rot ratio {}", at(), ratio.render(&m.names))),
                    };
                    ensure(b.fraction_eq(&want).unwrap(), || format!("{}: <D> ratio", at()))?;
                }
                _ => {
                    ensure(ratio.is_identity(), || format!("{}: Rot changed", at()))?;
                    ensure(b.fraction_eq(&prev_sum).unwrap(), || format!("{}: <D> changed", at()))?;
                }
            }
            prev_rot = r;
            prev_sum = b;
        }
    }
    ensure(kinks > 0, || "no single kinks in the unframed walks".into())?;
    Ok(format!("{framed_steps} framed steps, {kinks} single kinks"))
}

fn c8_skein() -> Outcome {
    let mut corpus = connected_fixtures();
    corpus.push(fixtures::fig5_and_circle());
    corpus.extend(walk_ends(12, 20, 6));
    let mut checks = 0;
    for (i, d) in corpus.iter().enumerate() {
        let m = merid(d);
        for n in d.nodes.iter().filter(|n| !n.is_vertex()) {
            for b in all_base_points(d) {
                match skein_check(d, n.id(), &b, &m) {
                    Err(Error::BasePointOnSite) => {}
                    Ok(r) => {
                        ensure(r.holds, || format!("diagram {i} crossing {} base {b:?}", n.id()))?;
                        checks += 1;
                    }
                    Err(e) => return Err(format!("diagram {i} crossing {}: {e}", n.id())),
                }
            }
        }
    }
    ensure(checks > 0, || "nothing checked".into())?;
    Ok(format!("{checks} (crossing, base point) pairs"))
}

/// A directed cycle through edge `k`: `k` followed by a shortest path from
/// its head back to its tail.
fn cycle_through(g: &Digraph, k: usize) -> Vec<usize> {
    let (_, tail, head) = &g.edges[k];
    let mut prev: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut q = VecDeque::from([*head]);
    let mut seen = BTreeSet::from([*head]);
    while let Some(v) = q.pop_front() {
        if v == *tail {
            break;
        }
        for (j, (_, a, b)) in g.edges.iter().enumerate() {
            if *a == v && seen.insert(*b) {
                prev.insert(*b, (v, j));
                q.push_back(*b);
            }
        }
    }
    let mut out = vec![k];
    let mut x = *tail;
    while x != *head {
        let (p, j) = prev[&x];
        out.push(j);
        x = p;
    }
    out
}

/// Positive balanced coloring: a random positive multiple of a cycle
/// through every edge.
fn random_coloring(d: &Diagram, rng: &mut ChaCha8Rng) -> Coloring {
    let g = Digraph::from_diagram(d).unwrap();
    let mut c = vec![0i64; g.edges.len()];
    for k in 0..g.edges.len() {
        let w = rng.gen_range(1..=3);
        for j in cycle_through(&g, k) {
            c[j] += w;
        }
    }
    let mut out: Coloring = g
        .edges
        .iter()
        .zip(c)
        .map(|((e, _, _), x)| (e.clone(), Rational64::from_integer(x)))
        .collect();
    for e in &g.closed {
        out.insert(e.clone(), Rational64::from_integer(rng.gen_range(1..=4)));
    }
    out
}

fn c9_specialization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let corpus = connected_fixtures();
    let mut pairs = 0;
    for k in 0..20 {
        let d = &corpus[k % corpus.len()];
        let c = if k < corpus.len() {
            positive_coloring(d).unwrap()
        } else {
            random_coloring(d, &mut rng)
        };
        check_balance(&Digraph::from_diagram(d).unwrap(), &c).map_err(|e| e.to_string())?;
        let r = specialization_check(d, &c).map_err(|e| e.to_string())?;
        ensure(r.agree, || format!("pair {k}: specialized and direct values differ"))?;
        pairs += 1;
    }
    let mut moy = 0;
    for d in corpus.iter().filter(|d| d.vertex_count() > 0) {
        let trivalent = d
            .vertex_incidences()
            .iter()
            .all(|(_, v)| v.incoming.len() + v.outgoing.len() == 3);
        if !trivalent {
            continue;
        }
        ensure(d.vertex_count() % 2 == 0, || "odd trivalent vertex count".into())?;
        for j in 0..4 {
            let c = if j == 0 {
                positive_coloring(d).unwrap()
            } else {
                random_coloring(d, &mut rng)
            };
            let r = moy_relation_check(d, &c).map_err(|e| e.to_string())?;
            ensure(r.holds, || "MOY relation fails".into())?;
            moy += 1;
        }
    }
    ensure(moy > 0, || "no trivalent fixture".into())?;
    Ok(format!("{pairs} colorings, {moy} MOY checks"))
}

/// Weakly connected random digraph: a random spanning tree with random
/// orientations plus extra random edges.
fn random_digraph(rng: &mut ChaCha8Rng) -> Digraph {
    let n = rng.gen_range(1..=8);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push(if rng.gen_bool(0.5) { (u, v) } else { (v, u) });
    }
    for _ in 0..rng.gen_range(0..=2 * n) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.push((a, b));
        }
    }
    Digraph::new(n, &edges)
}

/// Strong connectivity by reachability from every vertex.
fn all_pairs_reachable(g: &Digraph) -> bool {
    let n = g.vertices.len();
    (0..n).all(|s| {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for (_, a, b) in &g.edges {
                if *a == v && !seen[*b] {
                    seen[*b] = true;
                    stack.push(*b);
                }
            }
        }
        seen.iter().all(|&x| x)
    })
}

fn c10_strong_connectivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut strong = 0;
    for k in 0..100 {
        let g = random_digraph(&mut rng);
        let a = strongly_connected_graph(&g);
        let b = match positive_coloring_graph(&g) {
            Ok(c) => {
                check_balance(&g, &c).map_err(|e| format!("graph {k}: {e}"))?;
                ensure(c.values().all(|x| *x > Rational64::from_integer(0)), || {
                    format!("graph {k}: non-positive")
                })?;
                true
            }
            Err(_) => false,
        };
        let c = edges_on_cycles(&g);
        let brute = all_pairs_reachable(&g);
        ensure(a == b && b == c && c == brute, || {
            format!("graph {k}: {a} {b} {c} {brute}")
        })?;
        strong += a as usize;
    }
    ensure(strong > 0 && strong < 100, || {
        format!("{strong} of 100 strongly connected")
    })?;
    Ok(format!("100 digraphs, {strong} strongly connected"))
}

fn c11_integrality() -> Outcome {
    let mut corpus = connected_fixtures();
    corpus.push(fixtures::fig5_and_circle());
    corpus.push(fixtures::two_circles());
    corpus.extend(fuzzed(100, 25, false));
    for (i, d) in corpus.iter().enumerate() {
        let m = merid(d);
        let r = rotation(d, &m).unwrap();
        let all = r.chi.iter().fold(HalfMonomial::identity(m.rank()), |acc, x| acc.mul(x));
        ensure(all.is_integral(), || format!("diagram {i}: {}", all.render(&m.names)))?;
    }
    Ok(format!("{} diagrams", corpus.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("fig5 rotation number and windings", c1_fig5_rotation),
        ("unknot normalization", c2_unknot),
        ("regions = crossings + 2", c3_region_count),
        ("base point independence", c4_base_point_sweep),
        ("determinant oracle", c5_determinant),
        ("states = arborescences", c6_spanning_trees),
        ("move behaviour", c7_moves),
        ("skein relations", c8_skein),
        ("specialization coherence", c9_specialization),
        ("strong connectivity equivalences", c10_strong_connectivity),
        ("integrality of chi product", c11_integrality),
    ];
    let results: Vec<Outcome> = std::thread::scope(|sc| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| sc.spawn(move || std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut err = std::io::stderr();
    let mut failed = Vec::new();
    for (k, ((name, _), r)) in criteria.iter().zip(&results).enumerate() {
        let line = match r {
            Ok(info) => format!("criterion {:>2} pass  {name}: {info}", k + 1),
            Err(why) => {
                failed.push(k + 1);
                format!("criterion {:>2} FAIL  {name}: {why}", k + 1)
            }
        };
        writeln!(err, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
