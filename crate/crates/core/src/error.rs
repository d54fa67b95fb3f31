use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An elementary function or division was applied outside its domain.
    #[error("domain error: {op} at {value:e}")]
    Domain { op: &'static str, value: f64 },

    #[error("tangent moving base is degenerate at ({u}, {v}): |w1 x w2| = {norm:e}")]
    DegenerateBase { u: f64, v: f64, norm: f64 },

    #[error("tangent moving base does not span Dx at ({u}, {v}): residual {residual:e} > {tolerance:e}")]
    TmbResidual { u: f64, v: f64, residual: f64, tolerance: f64 },

    #[error("point ({u}, {v}) is singular (|lambda| = {lambda:e}); use relative quantities")]
    SingularPoint { u: f64, v: f64, lambda: f64 },

    #[error("reparametrization is degenerate at ({u}, {v}): det Dh = {det:e}")]
    DegenerateDiffeo { u: f64, v: f64, det: f64 },

    #[error("lex error at offset {offset}: unexpected {found:?}")]
    Lex { offset: usize, found: char },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unbound name `{0}`")]
    UnboundName(String),

    #[error("bisection did not converge on edge ({u0}, {v0}) -> ({u1}, {v1})")]
    NonConvergence { u0: f64, v0: f64, u1: f64, v1: f64 },

    #[error("insufficient samples: {what} has {found} < {required}")]
    InsufficientSamples { what: String, found: usize, required: usize },

    #[error("rank error: expected rank {expected}, found {found}")]
    Rank { expected: u8, found: u8 },

    #[error("not a front at ({u}, {v}): H_Omega vanishes at a rank-1 point")]
    NotFront { u: f64, v: f64 },

    #[error("offset with l = {l} is not immersed at ({u}, {v}): det = {det:e}")]
    NotImmersed { u: f64, v: f64, l: f64, det: f64 },

    #[error("unknown gallery entry `{0}`")]
    UnknownEntry(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("invalid region: {0}")]
    Region(String),

    /// Frame evaluation failed at a grid node.
    #[error("at node ({u}, {v}): {source}")]
    AtNode {
        u: f64,
        v: f64,
        #[source]
        source: Box<Error>,
    },

    /// Scene validation error located by a JSON pointer.
    #[error("{pointer}: {message}")]
    Scene { pointer: String, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at_node(self, u: f64, v: f64) -> Error {
        match self {
            e @ Error::AtNode { .. } => e,
            e => Error::AtNode { u, v, source: Box::new(e) },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
