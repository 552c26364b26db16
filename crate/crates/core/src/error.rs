use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("relation matrix has a non-unit invariant factor {0}; the quotient is not free")]
    NonFreeQuotient(String),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown arc `{0}`")]
    UnknownArc(String),
    #[error("`{0}` is not a valid basis of the meridian lattice")]
    InvalidBasis(String),
    #[error("monomial has an odd exponent; no square root")]
    NonSquare,
    #[error("operands live over lattices of different rank ({0} vs {1})")]
    LatticeMismatch(usize, usize),
    #[error("polynomial is not divisible")]
    Indivisible,
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed input at {location}: {message}")]
    MalformedInput { location: String, message: String },
    #[error("vertex `{0}` is a sink or a source")]
    SinkOrSourceVertex(String),
    #[error("arc `{0}` is not attached at both ends")]
    DanglingArc(String),
    #[error("map fails the Euler check: {0}")]
    NonPlanarMap(String),
    #[error("outer face declaration is inconsistent: {0}")]
    InconsistentOuter(String),
    #[error("the two regions next to the base point coincide")]
    MarkedRegionsCoincide,
    #[error("winding numbers do not close up around the map")]
    InconsistentWinding,
    #[error("rotation number is not integral")]
    NonIntegralRotation,
    #[error("diagram has vertices; not a link diagram")]
    NotALink,
    #[error("edge `{0}` lies on no directed cycle")]
    NotStronglyConnected(String),
    #[error("coloring is not balanced at vertex `{0}`")]
    UnbalancedColoring(String),
    #[error("coloring value on edge `{0}` is not an integer")]
    NonIntegralColoring(String),
    #[error("vertex `{0}` is not trivalent")]
    NotTrivalent(String),
    #[error("move pattern not found: {0}")]
    PatternNotFound(String),
    #[error("orientation incompatible with move: {0}")]
    OrientationIncompatible(String),
    #[error("base point lies on the rewritten tangle")]
    BasePointOnSite,
    #[error("state sums differ between base arcs `{0}` and `{1}`")]
    SweepMismatch(String, String),
    #[error("diagram is not connected")]
    Disconnected,
    #[error("diagram too large: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn malformed(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::MalformedInput {
        location: location.into(),
        message: message.into(),
    }
}
