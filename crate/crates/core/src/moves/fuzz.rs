//! Seeded random walks through move space and the per-step checks run on
//! them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagram::{Diagram, Node, PlanarMap, Side, Sign};
use crate::error::{Error, Result};
use crate::invariant::alexander_with;
use crate::lattice::MeridianMap;
use crate::rotation::rot;
use crate::statesum::{default_base, state_sum_at};

use super::{apply, Block, Direction, Effect, MoveKind, MoveSite, SiteAnchor};

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub seed: u64,
    pub moves: usize,
    pub framed: bool,
    /// insertions stop at this many crossings unless nothing else applies
    pub max_crossings: usize,
    pub insert_bias: f64,
}

impl FuzzConfig {
    pub fn new(seed: u64, moves: usize, framed: bool) -> FuzzConfig {
        FuzzConfig {
            seed,
            moves,
            framed,
            max_crossings: 10,
            insert_bias: 0.6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzStep {
    pub site: MoveSite,
    pub effect: Effect,
    #[serde(skip)]
    pub diagram: Diagram,
}

pub fn fuzz(d: &Diagram, seed: u64, moves: usize, framed: bool) -> Result<Vec<FuzzStep>> {
    fuzz_with(d, &FuzzConfig::new(seed, moves, framed))
}

fn anchor() -> SiteAnchor {
    SiteAnchor::default()
}

fn site(kind: MoveKind, direction: Direction, anchor: SiteAnchor) -> MoveSite {
    MoveSite {
        kind,
        direction,
        anchor,
    }
}

fn pick_side(rng: &mut ChaCha8Rng) -> Side {
    if rng.gen_bool(0.5) {
        Side::Left
    } else {
        Side::Right
    }
}

fn pick_sign(rng: &mut ChaCha8Rng) -> Sign {
    if rng.gen_bool(0.5) {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// A few random places to grow a kink.
fn kink_spots(d: &Diagram, rng: &mut ChaCha8Rng, n: usize) -> Vec<SiteAnchor> {
    let total = d.arcs.len() + d.free_loops.len();
    (0..n)
        .map(|_| {
            let k = rng.gen_range(0..total);
            let mut a = anchor();
            if k < d.arcs.len() {
                a.arc = Some(d.arcs[k].id.clone());
            } else {
                a.loop_id = Some(d.free_loops[k - d.arcs.len()].id.clone());
            }
            a.side = Some(pick_side(rng));
            a.sign = Some(pick_sign(rng));
            a
        })
        .collect()
}

fn finger_spots(d: &Diagram, map: &PlanarMap, rng: &mut ChaCha8Rng, n: usize) -> Vec<SiteAnchor> {
    let faces: Vec<&Vec<usize>> = map.faces.iter().filter(|f| f.len() >= 2).collect();
    let mut out = Vec::new();
    if faces.is_empty() {
        return out;
    }
    for _ in 0..n {
        let f = faces[rng.gen_range(0..faces.len())];
        let x = f[rng.gen_range(0..f.len())];
        let y = f[rng.gen_range(0..f.len())];
        if x / 2 == y / 2 {
            continue;
        }
        let side = |z: usize| if z.is_multiple_of(2) { Side::Left } else { Side::Right };
        let (a, b) = (d.arcs[x / 2].id.clone(), d.arcs[y / 2].id.clone());
        let mut s = anchor();
        s.over = Some(if rng.gen_bool(0.5) { a.clone() } else { b.clone() });
        s.arc = Some(a);
        s.side = Some(side(x));
        s.target = Some(b);
        s.target_side = Some(side(y));
        out.push(s);
    }
    out
}

fn twist_spots(d: &Diagram, rng: &mut ChaCha8Rng) -> Vec<SiteAnchor> {
    let mut out = Vec::new();
    for n in &d.nodes {
        if let Node::Vertex { id, incoming, outgoing } = n {
            for (block, len) in [(Block::In, incoming.len()), (Block::Out, outgoing.len())] {
                for i in 0..len.saturating_sub(1) {
                    let mut a = anchor();
                    a.vertex = Some(id.clone());
                    a.block = Some(block);
                    a.index = Some(i);
                    out.push(a);
                }
            }
        }
    }
    out.shuffle(rng);
    out
}

fn triangle_spots(d: &Diagram, map: &PlanarMap) -> Vec<SiteAnchor> {
    map.faces
        .iter()
        .filter(|f| f.len() == 3)
        .map(|f| {
            let mut a = anchor();
            a.arc = Some(d.arcs[f[0] / 2].id.clone());
            a.side = Some(if f[0] % 2 == 0 { Side::Left } else { Side::Right });
            a
        })
        .collect()
}

fn crossing_ids(d: &Diagram) -> Vec<String> {
    d.nodes
        .iter()
        .filter(|n| !n.is_vertex())
        .map(|n| n.id().to_string())
        .collect()
}

fn vertex_ids(d: &Diagram) -> Vec<String> {
    d.nodes
        .iter()
        .filter(|n| n.is_vertex())
        .map(|n| n.id().to_string())
        .collect()
}

/// Crossing pairs joined by an arc.
fn bigon_pairs(d: &Diagram, map: &PlanarMap) -> Vec<SiteAnchor> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for f in &map.faces {
        if f.len() != 2 {
            continue;
        }
        let i = f[0] / 2;
        let (t, h) = (map.inc.tail[i].node, map.inc.head[i].node);
        if t == h || d.nodes[t].is_vertex() || d.nodes[h].is_vertex() {
            continue;
        }
        if seen.insert((t.min(h), t.max(h))) {
            let mut a = anchor();
            a.crossing = Some(d.nodes[t].id().to_string());
            a.crossing2 = Some(d.nodes[h].id().to_string());
            out.push(a);
        }
    }
    out
}

/// Candidate sites of one kind; the walk tries them in order.
fn candidates(d: &Diagram, map: &PlanarMap, kind: MoveKind, insert: bool, rng: &mut ChaCha8Rng) -> Vec<MoveSite> {
    use Direction::*;
    use MoveKind::*;
    let mut out: Vec<MoveSite> = match (kind, insert) {
        (R1Pos | R1Neg | R1Prime, true) => kink_spots(d, rng, 6)
            .into_iter()
            .map(|a| site(kind, Insert, a))
            .collect(),
        (R1Pos | R1Neg | R1Prime | R5Cw | R5Ccw, false) => crossing_ids(d)
            .into_iter()
            .map(|c| {
                let mut a = anchor();
                a.crossing = Some(c);
                site(kind, Remove, a)
            })
            .collect(),
        (R2, true) => finger_spots(d, map, rng, 6)
            .into_iter()
            .map(|a| site(R2, Insert, a))
            .collect(),
        (R2, false) => bigon_pairs(d, map).into_iter().map(|a| site(R2, Remove, a)).collect(),
        (R3, _) => triangle_spots(d, map)
            .into_iter()
            .map(|a| site(R3, Insert, a))
            .collect(),
        (R4Over | R4Under, _) => vertex_ids(d)
            .into_iter()
            .flat_map(|v| {
                [Insert, Remove].map(|dir| {
                    let mut a = anchor();
                    a.vertex = Some(v.clone());
                    site(kind, dir, a)
                })
            })
            .collect(),
        (R5Cw | R5Ccw, true) => twist_spots(d, rng).into_iter().map(|a| site(kind, Insert, a)).collect(),
    };
    out.shuffle(rng);
    out
}

fn weight(kind: MoveKind) -> f64 {
    match kind {
        MoveKind::R1Pos | MoveKind::R1Neg => 1.0,
        MoveKind::R1Prime => 1.0,
        MoveKind::R2 => 3.0,
        MoveKind::R3 => 3.0,
        MoveKind::R4Over | MoveKind::R4Under => 2.0,
        MoveKind::R5Cw | MoveKind::R5Ccw => 1.0,
    }
}

/// Seeded walk of `cfg.moves` moves starting at `d`. Every returned diagram
/// has passed validation.
pub fn fuzz_with(d: &Diagram, cfg: &FuzzConfig) -> Result<Vec<FuzzStep>> {
    if cfg.moves == 0 {
        return Err(Error::MalformedInput {
            location: "fuzz".into(),
            message: "at least one move is required".into(),
        });
    }
    d.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let kinds: &[MoveKind] = if cfg.framed { &MoveKind::FRAMED } else { &MoveKind::ALL };
    let mut cur = d.clone();
    let mut steps = Vec::with_capacity(cfg.moves);
    while steps.len() < cfg.moves {
        let map = PlanarMap::build(&cur)?;
        let room = cur.crossing_count() < cfg.max_crossings;
        let insert = room && rng.gen_bool(cfg.insert_bias);
        let mut done = false;
        // try the preferred direction first, then the other one; past the
        // crossing cap an insert is the last resort
        for (k, dir) in [insert, !insert, true].into_iter().enumerate() {
            if dir && !room && k < 2 || k == 2 && room {
                continue;
            }
            let mut pool: Vec<MoveKind> = kinds.to_vec();
            while !pool.is_empty() && !done {
                let total: f64 = pool.iter().map(|&k| weight(k)).sum();
                let mut x = rng.gen_range(0.0..total);
                let mut at = 0;
                for (i, &k) in pool.iter().enumerate() {
                    at = i;
                    x -= weight(k);
                    if x < 0.0 {
                        break;
                    }
                }
                let kind = pool.remove(at);
                for s in candidates(&cur, &map, kind, dir, &mut rng) {
                    if let Ok(a) = apply(&cur, &s) {
                        cur = a.diagram.clone();
                        steps.push(FuzzStep {
                            site: s,
                            effect: a.effect,
                            diagram: a.diagram,
                        });
                        done = true;
                        break;
                    }
                }
            }
            if done {
                break;
            }
        }
        if !done {
            return Err(Error::PatternNotFound("no move applies".into()));
        }
    }
    Ok(steps)
}

/// Outcome of the checks at one step.
#[derive(Debug, Clone, Serialize)]
pub struct StepCheck {
    pub step: usize,
    pub kind: MoveKind,
    pub crossings: usize,
    pub rot_ok: bool,
    pub bracket_ok: bool,
    /// set on framed walks
    pub delta_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkReport {
    pub steps: Vec<StepCheck>,
    /// net exponent of each edge meridian in `<D_n> / <D_0>`
    pub drift: BTreeMap<String, i64>,
    pub ok: bool,
}

/// Compare `Rot`, `<D>` and (for framed walks) the normalized value with
/// the change each move promises.
pub fn check_walk(start: &Diagram, steps: &[FuzzStep], framed: bool) -> Result<WalkReport> {
    let m: MeridianMap = start.lattice()?.meridian_map();
    let bracket = |d: &Diagram| -> Result<_> { Ok(state_sum_at(d, &default_base(d)?, &m)?.value) };
    let mut prev_rot = rot(start, &m)?;
    let mut prev_sum = bracket(start)?;
    let first_delta = if framed {
        Some(alexander_with(start, &m, None)?.value)
    } else {
        None
    };
    let mut drift: BTreeMap<String, i64> = BTreeMap::new();
    let mut out = Vec::with_capacity(steps.len());
    for (i, s) in steps.iter().enumerate() {
        let d = &s.diagram;
        let r = rot(d, &m)?;
        let b = bracket(d)?;
        let (want_rot, want_sum) = match &s.effect.edge {
            Some(e) => {
                let t = m.get(e)?;
                *drift.entry(e.clone()).or_default() += s.effect.bracket;
                (
                    prev_rot.mul(&t.pow(s.effect.rot)),
                    prev_sum.scale_monomial(&t.pow(s.effect.bracket)),
                )
            }
            None => (prev_rot.clone(), prev_sum.clone()),
        };
        let delta_ok = match &first_delta {
            Some(v) => Some(alexander_with(d, &m, None)?.value.fraction_eq(v)?),
            None => None,
        };
        out.push(StepCheck {
            step: i + 1,
            kind: s.site.kind,
            crossings: d.crossing_count(),
            rot_ok: r == want_rot,
            bracket_ok: b.fraction_eq(&want_sum)?,
            delta_ok,
        });
        prev_rot = r;
        prev_sum = b;
    }
    drift.retain(|_, v| *v != 0);
    let ok = out
        .iter()
        .all(|c| c.rot_ok && c.bracket_ok && c.delta_ok != Some(false));
    Ok(WalkReport { steps: out, drift, ok })
}
