use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;
use std::time::Duration;

use num_rational::Rational64;
use serde_json::{json, Value};

use spatial_alex::diagram::{all_base_points, decorate, faces, BasePoint, Diagram, Side};
use spatial_alex::fixtures;
use spatial_alex::graphalg::{arborescence_count, positive_coloring, Coloring};
use spatial_alex::invariant::{
    alexander_with, moy_relation_check, specialization_check, specialize as specialize_value,
};
use spatial_alex::lattice::{HalfMonomial, MeridianMap};
use spatial_alex::moves::{self, check_walk, parse_script, replay as replay_script, script_to_json, FuzzStep};
use spatial_alex::ring::RingFraction;
use spatial_alex::rotation::{classical_w, rotation, winding_numbers_in};
use spatial_alex::statesum::{
    alexander_det, base_point_sweep, default_base, enumerate_states, skein_check, state_sum, state_sum_at,
};
use spatial_alex::Error;

use crate::report::{Failure, Report};
use crate::{Global, OnOff};

pub struct Source {
    pub name: String,
    pub bytes: Vec<u8>,
    pub diagram: Diagram,
}

const BUILTIN: &str = "fixture:";

/// A diagram file, `-` for stdin, or `fixture:NAME` for a shipped example.
pub fn load(input: &str) -> Result<Source, Failure> {
    let bytes = if let Some(name) = input.strip_prefix(BUILTIN) {
        let d = match name {
            "fig5_and_circle" => fixtures::fig5_and_circle(),
            "two_circles" => fixtures::two_circles(),
            _ => {
                fixtures::by_name(name).ok_or_else(|| Failure::new("UnknownFixture", format!("no fixture `{name}`")))?
            }
        };
        d.to_json().into_bytes()
    } else if input == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::new("Io", format!("stdin: {e}")))?;
        buf
    } else {
        std::fs::read(input).map_err(|e| Failure::new("Io", format!("{input}: {e}")))?
    };
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::new("Io", format!("{input}: not UTF-8")))?;
    let diagram = Diagram::parse(&text)?;
    diagram.validate()?;
    Ok(Source {
        name: input.to_string(),
        bytes,
        diagram,
    })
}

fn meridians(d: &Diagram, g: &Global) -> Result<MeridianMap, Failure> {
    let lat = d.lattice()?;
    Ok(match &g.basis {
        Some(names) => lat.with_basis(names)?.meridian_map(),
        None => lat.meridian_map(),
    })
}

fn mono(x: &HalfMonomial, m: &MeridianMap) -> Value {
    json!({"text": x.render(&m.names), "halves": x.halves()})
}

fn frac(x: &RingFraction, names: &[String]) -> Value {
    let c = x.balanced();
    json!({"text": c.render(names), "num": c.num.to_json(), "den": c.den.to_json()})
}

fn base_name(b: &BasePoint) -> &str {
    match b {
        BasePoint::Arc(a) | BasePoint::Loop(a) => a,
    }
}

fn parse_base(d: &Diagram, id: &str) -> Result<BasePoint, Failure> {
    if d.arcs.iter().any(|a| a.id == id) {
        Ok(BasePoint::Arc(id.to_string()))
    } else if d.free_loops.iter().any(|l| l.id == id) {
        Ok(BasePoint::Loop(id.to_string()))
    } else {
        Err(Error::UnknownArc(id.to_string()).into())
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

pub fn regions(d: &Diagram, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let m = meridians(d, g)?;
    let rt = faces(d)?;
    let w = winding_numbers_in(&rt, d, &m)?;
    let map = &rt.map;
    let mut list = Vec::new();
    for f in 0..map.faces.len() {
        let boundary: Vec<String> = if map.faces[f].is_empty() {
            let k = map
                .loop_faces
                .iter()
                .position(|&(l, r)| l == f || r == f)
                .expect("loop face");
            let side = if map.loop_faces[k].0 == f {
                Side::Left
            } else {
                Side::Right
            };
            vec![format!("{}:{}", d.free_loops[k].id, side_name(side))]
        } else {
            map.faces[f]
                .iter()
                .map(|&x| {
                    let side = if x % 2 == 0 { Side::Left } else { Side::Right };
                    format!("{}:{}", d.arcs[x / 2].id, side_name(side))
                })
                .collect()
        };
        let unbounded = rt.is_unbounded(f);
        rep.line(format!(
            "{}  {}{}  [{}]",
            rt.names[f],
            w.get(f).render(&m.names),
            if unbounded { "  (unbounded)" } else { "" },
            boundary.join(" ")
        ));
        list.push(json!({
            "id": rt.names[f],
            "kind": "regular",
            "winding": mono(w.get(f), &m),
            "unbounded": unbounded,
            "boundary": boundary,
        }));
    }
    for (&node, &r) in &rt.circle_regions {
        rep.line(format!("{}  circle around {}", rt.names[r], d.nodes[node].id()));
        list.push(json!({"id": rt.names[r], "kind": "circle", "vertex": d.nodes[node].id()}));
    }
    rep.data("basis", json!(m.names));
    rep.data("regions", Value::Array(list));
    Ok(())
}

pub fn rot(d: &Diagram, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let m = meridians(d, g)?;
    let r = rotation(d, &m)?;
    rep.data("basis", json!(m.names));
    rep.field("rot", mono(&r.rot, &m), r.rot.render(&m.names));
    let chi: Vec<Value> = d
        .nodes
        .iter()
        .zip(&r.chi)
        .map(|(n, c)| json!({"node": n.id(), "chi": mono(c, &m)}))
        .collect();
    rep.data("chi", Value::Array(chi));
    let all = r
        .chi_product
        .iter()
        .fold(HalfMonomial::identity(m.rank()), |a, x| a.mul(x));
    rep.field("chi_product", mono(&all, &m), all.render(&m.names));
    rep.check("chi product integral", all.is_integral(), "");
    if let Ok(w) = classical_w(d, &m) {
        rep.field("whitney_index", json!(w), w.to_string());
    }
    Ok(())
}

pub fn statesum(d: &Diagram, base: Option<&str>, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let m = meridians(d, g)?;
    let b = match base {
        Some(id) => parse_base(d, id)?,
        None => default_base(d)?,
    };
    let s = state_sum_at(d, &b, &m)?;
    rep.data("basis", json!(m.names));
    rep.field("base", json!(base_name(&b)), base_name(&b));
    rep.field("states", json!(s.states), s.states.to_string());
    rep.field("numerator", s.numerator.to_json(), s.numerator.render(&m.names));
    rep.field("delta", s.delta.to_json(), s.delta.render(&m.names));
    rep.field("value", frac(&s.value, &m.names), s.value.balanced().render(&m.names));
    Ok(())
}

pub fn alexander(d: &Diagram, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let m = meridians(d, g)?;
    let v = alexander_with(d, &m, None)?;
    rep.data("basis", json!(v.basis));
    rep.field("value", frac(&v.value, &v.basis), v.value.balanced().render(&v.basis));
    match &v.polynomial {
        Some(p) => {
            rep.field("polynomial", json!(true), "true");
            rep.field("laurent", p.to_json(), p.render(&v.basis));
        }
        None => rep.field("polynomial", json!(false), "false"),
    }
    rep.field("rot", mono(&v.rot, &m), v.rot.render(&m.names));
    rep.field(
        "raw_sum",
        frac(&v.raw_sum, &v.basis),
        v.raw_sum.balanced().render(&v.basis),
    );
    Ok(())
}

fn parse_coloring(d: &Diagram, spec: &str) -> Result<Coloring, Failure> {
    if spec == "auto" {
        return Ok(positive_coloring(d)?);
    }
    let mut c = Coloring::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (e, x) = part
            .split_once('=')
            .ok_or_else(|| Failure::new("BadColoring", format!("`{part}` is not edge=value")))?;
        let x: Rational64 = x
            .trim()
            .parse()
            .map_err(|_| Failure::new("BadColoring", format!("`{x}` is not a rational number")))?;
        c.insert(e.trim().to_string(), x);
    }
    for e in d.edge_ids() {
        if !c.contains_key(&e) {
            return Err(Failure::new("BadColoring", format!("no color for edge `{e}`")));
        }
    }
    Ok(c)
}

pub fn specialize(d: &Diagram, spec: &str, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let m = meridians(d, g)?;
    let c = parse_coloring(d, spec)?;
    let t = vec!["t".to_string()];
    let shown: Vec<String> = c.iter().map(|(e, x)| format!("{e}={x}")).collect();
    rep.field(
        "coloring",
        json!(c
            .iter()
            .map(|(e, x)| (e.clone(), x.to_string()))
            .collect::<std::collections::BTreeMap<_, _>>()),
        shown.join(","),
    );
    let v = alexander_with(d, &m, None)?;
    let phi = specialize_value(d, &v.value, &m.names, &c)?;
    rep.field("value", frac(&phi, &t), phi.balanced().render(&t));
    let s = specialization_check(d, &c)?;
    rep.field("colored_state_sum", frac(&s.direct, &t), s.direct.balanced().render(&t));
    rep.check("specialized equals one-variable run", s.agree, "");
    let trivalent = d.vertex_count() > 0
        && d.vertex_incidences()
            .iter()
            .all(|(_, v)| v.incoming.len() + v.outgoing.len() == 3);
    if trivalent && c.values().all(|x| x.is_integer()) {
        let r = moy_relation_check(d, &c)?;
        rep.field("moy_colored", frac(&r.colored, &t), r.colored.balanced().render(&t));
        rep.check("MOY relation", r.holds, "");
    }
    Ok(())
}

fn sweep_check(d: &Diagram, m: &MeridianMap, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let connected = d.is_connected()?;
    match base_point_sweep(d, m) {
        Ok(r) => {
            rep.field(
                "statesum",
                frac(&r.value, &m.names),
                r.value.balanced().render(&m.names),
            );
            rep.field("connected", json!(connected), connected.to_string());
            let detail = if g.timing {
                let total: Duration = r.entries.iter().map(|e| e.elapsed).sum();
                format!("{} base points, {:.3} ms", r.entries.len(), total.as_secs_f64() * 1e3)
            } else {
                format!("{} base points", r.entries.len())
            };
            rep.check("base point sweep", true, detail);
        }
        Err(e @ Error::SweepMismatch(..)) => rep.check("base point sweep", false, e.to_string()),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn determinant_check(d: &Diagram, m: &MeridianMap, rep: &mut Report) -> Result<(), Failure> {
    let mut signs = BTreeSet::new();
    let mut bad = Vec::new();
    for b in all_base_points(d) {
        let dd = decorate(d, &b)?;
        let num = state_sum(&dd, m)?.numerator;
        let det = alexander_det(&dd, m)?;
        if num == det {
            signs.insert(1);
        } else if num == det.neg() {
            signs.insert(-1);
        } else {
            bad.push(base_name(&b).to_string());
        }
    }
    let ok = bad.is_empty() && signs.len() <= 1;
    let detail = if !bad.is_empty() {
        format!("differs at {}", bad.join(","))
    } else if signs.len() > 1 {
        "sign depends on the base point".to_string()
    } else {
        format!("sign {}", if signs.contains(&-1) { "-1" } else { "+1" })
    };
    rep.check("determinant oracle", ok, detail);
    Ok(())
}

fn tree_check(d: &Diagram, rep: &mut Report) -> Result<(), Failure> {
    let inc = d.incidence()?;
    let mut bad = Vec::new();
    for (k, a) in d.arcs.iter().enumerate() {
        let head = d.nodes[inc.head[k].node].id();
        let dd = decorate(d, &BasePoint::Arc(a.id.clone()))?;
        let states = enumerate_states(&dd)?.len();
        if arborescence_count(d, head)? != states.into() {
            bad.push(a.id.clone());
        }
    }
    let detail = if bad.is_empty() {
        format!("{} base edges", d.arcs.len())
    } else {
        format!("differs at {}", bad.join(","))
    };
    rep.check("states equal spanning trees", bad.is_empty(), detail);
    Ok(())
}

fn skein_checks(d: &Diagram, m: &MeridianMap, rep: &mut Report) -> Result<(), Failure> {
    let mut n = 0;
    let mut bad = Vec::new();
    for node in d.nodes.iter().filter(|x| !x.is_vertex()) {
        for b in all_base_points(d) {
            match skein_check(d, node.id(), &b, m) {
                Ok(r) => {
                    n += 1;
                    if !r.holds {
                        bad.push(format!("{}@{}", node.id(), base_name(&b)));
                    }
                }
                Err(Error::BasePointOnSite) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    let detail = if bad.is_empty() {
        format!("{n} (crossing, base point) pairs")
    } else {
        format!("fails at {}", bad.join(","))
    };
    rep.check("crossing relations", bad.is_empty(), detail);
    Ok(())
}

pub fn check(d: &Diagram, all: bool, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let m = meridians(d, g)?;
    rep.data("basis", json!(m.names));
    sweep_check(d, &m, g, rep)?;
    if !all {
        return Ok(());
    }
    if g.oracle == OnOff::On {
        determinant_check(d, &m, rep)?;
    }
    if d.crossing_count() == 0 && d.vertex_count() > 0 && d.is_connected()? {
        tree_check(d, rep)?;
    }
    if d.crossing_count() > 0 {
        skein_checks(d, &m, rep)?;
    }
    Ok(())
}

/// Per-step checks of a walk, shared by `fuzz` and `replay`.
fn walk_report(d: &Diagram, steps: &[FuzzStep], framed: bool, rep: &mut Report) -> Result<(), Failure> {
    let w = check_walk(d, steps, framed)?;
    let sites: Vec<_> = steps.iter().map(|s| s.site.clone()).collect();
    let script: Value = serde_json::from_str(&script_to_json(&sites)).expect("script is JSON");
    rep.field("moves", json!(steps.len()), steps.len().to_string());
    if let Some(last) = steps.last() {
        let n = last.diagram.crossing_count();
        rep.field("final_crossings", json!(n), n.to_string());
    }
    let drift: Vec<String> = w.drift.iter().map(|(e, k)| format!("{e}^{k}")).collect();
    rep.field(
        "drift",
        json!(w.drift),
        if drift.is_empty() {
            "none".to_string()
        } else {
            drift.join(" ")
        },
    );
    rep.data("steps", serde_json::to_value(&w.steps).expect("steps serialize"));
    let failed: Vec<usize> = w
        .steps
        .iter()
        .filter(|c| !(c.rot_ok && c.bracket_ok && c.delta_ok != Some(false)))
        .map(|c| c.step)
        .collect();
    let detail = if failed.is_empty() {
        format!("{} steps", w.steps.len())
    } else {
        format!("InvarianceViolation at steps {failed:?}; replay the script to reproduce")
    };
    let name = if framed {
        "normalized value constant"
    } else {
        "rotation number and state sum track the moves"
    };
    rep.check(name, w.ok, detail);
    rep.data("script", script);
    Ok(())
}

pub fn fuzz(
    d: &Diagram,
    seed: u64,
    n: usize,
    framed: bool,
    script: Option<&Path>,
    _g: &Global,
    rep: &mut Report,
) -> Result<(), Failure> {
    let steps = moves::fuzz(d, seed, n, framed)?;
    rep.field("seed", json!(seed), seed.to_string());
    rep.field("framed", json!(framed), framed.to_string());
    walk_report(d, &steps, framed, rep)?;
    if let Some(p) = script {
        let sites: Vec<_> = steps.iter().map(|s| s.site.clone()).collect();
        std::fs::write(p, script_to_json(&sites) + "\n")
            .map_err(|e| Failure::new("Io", format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

pub fn replay(
    d: &Diagram,
    script: &Path,
    framed: bool,
    out: Option<&Path>,
    _g: &Global,
    rep: &mut Report,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(script).map_err(|e| Failure::new("Io", format!("{}: {e}", script.display())))?;
    let sites = parse_script(&text)?;
    let applied = replay_script(d, &sites)?;
    let steps: Vec<FuzzStep> = sites
        .into_iter()
        .zip(applied)
        .map(|(site, a)| FuzzStep {
            site,
            effect: a.effect,
            diagram: a.diagram,
        })
        .collect();
    walk_report(d, &steps, framed, rep)?;
    let last = steps.last().map_or(d, |s| &s.diagram);
    if let Some(p) = out {
        std::fs::write(p, last.to_json() + "\n").map_err(|e| Failure::new("Io", format!("{}: {e}", p.display())))?;
    }
    let v: Value = serde_json::from_str(&last.to_json()).expect("diagram is JSON");
    rep.data("diagram", v);
    Ok(())
}
