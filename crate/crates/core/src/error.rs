use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Variants fall into two groups: validation failures (bad input, unknown
/// ids, out-of-range parameters) and numerical failures (singular systems,
/// divergent propagation, non-convergence). [`Error::exit_code`] maps them
/// onto the command-line contract.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // graph model
    #[error("node list is empty")]
    EmptyNetwork,
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("edge `{0}` -> `{1}` references an unknown node")]
    UnknownEndpoint(String, String),
    #[error("edge `{0}` -> `{1}` has invalid weight {2}")]
    NegativeWeight(String, String, f64),
    #[error("ownership share on `{0}` -> `{1}` must lie in (0, 1], got {2}")]
    ShareOutOfRange(String, String, f64),
    #[error("incoming shares of `{0}` sum to {1} > 1")]
    OwnershipOverflow(String, f64),
    #[error("self-loop on `{0}` is not allowed in ownership mode")]
    SelfLoopInOwnership(String),
    #[error("node `{0}` has invalid value {1}")]
    InvalidNodeValue(String, f64),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("operation requires an ownership-mode network")]
    NotOwnershipNetwork,

    // parameters
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("normalization is undefined on a single-node network")]
    SingletonNetwork,

    // numerics
    #[error("matrix dimensions do not match: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular (pivot {0:e})")]
    SingularMatrix(f64),
    #[error("iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("edge length on `{0}` -> `{1}` is negative")]
    NegativeEdgeLength(String, String),
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("linear solve residual {0:e} exceeds tolerance")]
    ResidualTooLarge(f64),

    // voting games
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("exact enumeration supports at most {limit} players, got {got}")]
    TooManyPlayers { limit: usize, got: usize },
    #[error("exact enumeration supports at most {limit} nodes, got {got}")]
    TooManyNodes { limit: usize, got: usize },
    #[error("every player is powerless; normalization undefined")]
    AllPowerless,
    #[error("game has no vulnerable coalitions")]
    NoVulnerableCoalitions,
    #[error("power redistribution did not settle within {0} rounds")]
    CycleDepthExceeded(usize),

    // concentration
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("shares must be nonnegative and sum to 1 (sum = {0})")]
    InvalidDistribution(f64),
    #[error("k = {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("ownership cycle among controllers: {0:?}")]
    CycleDetected(Vec<String>),

    // flow measures
    #[error("propagation diverges: spectral radius {0} >= 1")]
    DivergentPropagation(f64),
    #[error("attenuation {alpha} must be below 1/spectral radius = {limit}")]
    AttenuationTooLarge { alpha: f64, limit: f64 },

    // optimization
    #[error("`{node}` needs a purchase of {needed} but only {available} is free float")]
    SharesUnavailable { node: String, needed: f64, available: f64 },
    #[error("no control assignment satisfies every target threshold")]
    Infeasible,
    #[error("exact search supports at most {limit} free nodes, got {got}")]
    TooLarge { limit: usize, got: usize },

    // hybrid
    #[error("control draw produced a singular propagation system")]
    SingularDraw,
    #[error("score vectors cover different node sets")]
    MismatchedNodes,

    // io
    #[error("{path}: line {line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("input `{0}` changed since the manifest was recorded")]
    DigestMismatch(String),
    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    /// Stable identifier used in result documents.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            EmptyNetwork => "EmptyNetwork",
            DuplicateNode(_) => "DuplicateNode",
            DuplicateEdge(..) => "DuplicateEdge",
            UnknownEndpoint(..) => "UnknownEndpoint",
            NegativeWeight(..) => "NegativeWeight",
            ShareOutOfRange(..) => "ShareOutOfRange",
            OwnershipOverflow(..) => "OwnershipOverflow",
            SelfLoopInOwnership(_) => "SelfLoopInOwnership",
            InvalidNodeValue(..) => "InvalidNodeValue",
            UnknownNode(_) => "UnknownNode",
            NotOwnershipNetwork => "NotOwnershipNetwork",
            InvalidParameter { .. } => "InvalidParameter",
            SingletonNetwork => "SingletonNetwork",
            DimensionMismatch(_) => "DimensionMismatch",
            SingularMatrix(_) => "SingularMatrix",
            NoConvergence(_) => "NoConvergence",
            ZeroMatrix => "ZeroMatrix",
            NegativeEdgeLength(..) => "NegativeEdgeLength",
            DisconnectedGraph => "DisconnectedGraph",
            ResidualTooLarge(_) => "ResidualTooLarge",
            UnknownPlayer(_) => "UnknownPlayer",
            TooManyPlayers { .. } => "TooManyPlayers",
            TooManyNodes { .. } => "TooManyNodes",
            AllPowerless => "AllPowerless",
            NoVulnerableCoalitions => "NoVulnerableCoalitions",
            CycleDepthExceeded(_) => "CycleDepthExceeded",
            EmptyDistribution => "EmptyDistribution",
            InvalidDistribution(_) => "InvalidDistribution",
            KOutOfRange { .. } => "KOutOfRange",
            CycleDetected(_) => "CycleDetected",
            DivergentPropagation(_) => "DivergentPropagation",
            AttenuationTooLarge { .. } => "AttenuationTooLarge",
            SharesUnavailable { .. } => "SharesUnavailable",
            Infeasible => "Infeasible",
            TooLarge { .. } => "TooLarge",
            SingularDraw => "SingularDraw",
            MismatchedNodes => "MismatchedNodes",
            Parse { .. } => "ParseError",
            Io { .. } => "IoError",
            DigestMismatch(_) => "DigestMismatch",
            Usage(_) => "UsageError",
        }
    }

    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        use Error::*;
        matches!(
            self,
            SingularMatrix(_)
                | NoConvergence(_)
                | ZeroMatrix
                | ResidualTooLarge(_)
                | DivergentPropagation(_)
                | AttenuationTooLarge { .. }
                | CycleDepthExceeded(_)
                | SingularDraw
                | Infeasible
        )
    }

    /// Process exit code: 1 for validation errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
