//! Local Reidemeister-type rewrites of diagrams, an isomorphism-invariant
//! canonical form, and a seeded random walk through move space.

mod canon;
mod fuzz;
mod grow;
mod prop1;
mod rewrite;

use serde::{Deserialize, Serialize};

use crate::diagram::{Diagram, Side, Sign};
use crate::error::{Error, Result};

pub use canon::{canonical_form, isomorphic};
pub use fuzz::{check_walk, fuzz, fuzz_with, FuzzConfig, FuzzStep, StepCheck, WalkReport};
pub use grow::random_plane_graph;
pub use prop1::{prop1_holds, prop1_items, verify_prop1, Prop1Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    #[serde(rename = "R1+")]
    R1Pos,
    #[serde(rename = "R1-")]
    R1Neg,
    /// two same-side kinks of opposite sign
    #[serde(rename = "R1'")]
    R1Prime,
    R2,
    R3,
    #[serde(rename = "R4over")]
    R4Over,
    #[serde(rename = "R4under")]
    R4Under,
    /// twist of two adjacent edges at a vertex through a negative crossing
    #[serde(rename = "R5cw")]
    R5Cw,
    /// same with a positive crossing
    #[serde(rename = "R5ccw")]
    R5Ccw,
}

impl MoveKind {
    pub const ALL: [MoveKind; 9] = [
        MoveKind::R1Pos,
        MoveKind::R1Neg,
        MoveKind::R1Prime,
        MoveKind::R2,
        MoveKind::R3,
        MoveKind::R4Over,
        MoveKind::R4Under,
        MoveKind::R5Cw,
        MoveKind::R5Ccw,
    ];

    /// Moves between diagrams of the same framed graph.
    pub const FRAMED: [MoveKind; 5] = [
        MoveKind::R1Prime,
        MoveKind::R2,
        MoveKind::R3,
        MoveKind::R4Over,
        MoveKind::R4Under,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::R1Pos => "R1+",
            MoveKind::R1Neg => "R1-",
            MoveKind::R1Prime => "R1'",
            MoveKind::R2 => "R2",
            MoveKind::R3 => "R3",
            MoveKind::R4Over => "R4over",
            MoveKind::R4Under => "R4under",
            MoveKind::R5Cw => "R5cw",
            MoveKind::R5Ccw => "R5ccw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Insert,
    Remove,
}

/// Incoming or outgoing side of a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    In,
    Out,
}

/// Ids locating a move; which fields are read depends on the kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteAnchor {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub arc: Option<String>,
    #[serde(rename = "loop", skip_serializing_if = "Option::is_none", default)]
    pub loop_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub side: Option<Side>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_side: Option<Side>,
    /// arc whose strand passes over
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub over: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub crossing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub crossing2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub vertex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub block: Option<Block>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sign: Option<Sign>,
    /// R2 insert: references on `arc`/`side` move to the piece of `arc`
    /// past the finger
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub after: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub direction: Direction,
    pub anchor: SiteAnchor,
}

/// Expected change: `Rot` gains `m^rot` and the state sum `m^bracket`,
/// with `m` the meridian of `edge`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Effect {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub edge: Option<String>,
    pub rot: i64,
    pub bracket: i64,
}

impl Effect {
    fn none() -> Effect {
        Effect::default()
    }
}

#[derive(Debug, Clone)]
pub struct Applied {
    pub diagram: Diagram,
    /// undoes this move on `diagram`
    pub inverse: MoveSite,
    pub effect: Effect,
}

pub(crate) fn need<T: Clone>(x: &Option<T>, what: &str) -> Result<T> {
    x.clone()
        .ok_or_else(|| Error::PatternNotFound(format!("anchor is missing `{what}`")))
}

/// Apply one move; the result is validated.
pub fn apply(d: &Diagram, site: &MoveSite) -> Result<Applied> {
    let out = rewrite::dispatch(d, site)?;
    out.diagram.validate()?;
    Ok(out)
}

/// Parse a move script (a JSON list of sites).
pub fn parse_script(text: &str) -> Result<Vec<MoveSite>> {
    serde_json::from_str(text).map_err(|e| Error::MalformedInput {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn script_to_json(sites: &[MoveSite]) -> String {
    serde_json::to_string_pretty(sites).expect("sites serialize")
}

/// Apply a script from the start, returning every intermediate diagram.
pub fn replay(d: &Diagram, sites: &[MoveSite]) -> Result<Vec<Applied>> {
    let mut cur = d.clone();
    let mut out = Vec::with_capacity(sites.len());
    for s in sites {
        let a = apply(&cur, s)?;
        cur = a.diagram.clone();
        out.push(a);
    }
    Ok(out)
}
