//! Error types, one enum per subsystem so callers can match on distinct codes.

use thiserror::Error;

/// Errors raised while loading or constructing an assembly model.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed assembly document: {0}")]
    Malformed(String),
    #[error("duplicate part id `{0}`")]
    DuplicatePartId(String),
    #[error("duplicate joint id `{0}`")]
    DuplicateJointId(String),
    #[error("joint `{joint}` references missing part `{part}`")]
    DanglingPartRef { joint: String, part: String },
    #[error("joint `{0}` connects a part to itself")]
    SelfJoint(String),
    #[error("assembly graph is disconnected ({components} components)")]
    Disconnected { components: usize },
}

/// Errors raised by mesh parsing and geometric constraint extraction.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("truncated STL file: {0}")]
    TruncatedFile(String),
    #[error("STL triangle count mismatch: declared {declared}, found {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("non-finite coordinate in STL data")]
    NonFiniteCoordinate,
    #[error("malformed STL data: {0}")]
    MalformedStl(String),
    #[error("mesh `{mesh}`: {detail}")]
    InvalidMesh { mesh: String, detail: String },
    #[error("frame `{0}` is not orthonormal")]
    InvalidFrame(String),
    #[error("parts `{0}` and `{1}` have a free relationship; no constraint to extract")]
    FreePair(String, String),
    #[error("constraint references unknown frame `{0}`")]
    DanglingFrameRef(String),
    #[error("need at least two meshes, got {0}")]
    TooFewMeshes(usize),
    #[error("empty probe set: {0}")]
    EmptyProbeSet(&'static str),
}

/// Errors raised while building the cutset digraph.
#[derive(Debug, Error)]
pub enum DigraphError {
    #[error("weights (tech={tech}, hand={hand}, tol={tol}) must lie in [0,1] and sum to 1")]
    InvalidWeights { tech: f64, hand: f64, tol: f64 },
    #[error("edge weight requested for layer 0")]
    LayerZero,
    #[error("no geometrically feasible full assembly sequence exists")]
    PlanningInfeasible,
    #[error("digraph exceeds the edge cap of {cap} live edges")]
    SizeLimitExceeded { cap: usize },
    #[error("assembly has {joints} joints / {parts} parts; at most {max} are supported")]
    TooLarge { joints: usize, parts: usize, max: usize },
    #[error("missing degree-of-freedom matrix for part `{part}` at joint `{joint}`")]
    MissingDof { part: String, joint: String },
    #[error("missing coordinate frame for joint `{0}`")]
    MissingFrame(String),
    #[error("joint `{0}` is not part of the assembly")]
    UnknownJoint(String),
    #[error("malformed digraph document: {0}")]
    MalformedDocument(String),
}

/// Errors raised by the reduction stage.
#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("reduction fraction {0} outside [0,1]")]
    InvalidFraction(f64),
    #[error("k_paths must be at least 1")]
    InvalidKPaths,
    #[error("digraph has no start-to-end path")]
    NoPath,
}

/// Errors raised by the line balancing solver and its oracle.
#[derive(Debug, Error)]
pub enum BalanceError {
    #[error("phase count {phases} outside [1, {layers}]")]
    InvalidPhaseCount { phases: usize, layers: usize },
    #[error("lambda {0} outside [0,1]")]
    InvalidLambda(f64),
    #[error("equal-contribution factor must be positive, got {0}")]
    InvalidContributionFactor(f64),
    #[error("relative gap {0} outside [0,1)")]
    InvalidGap(f64),
    #[error("operation `{0}` has non-positive time")]
    NonPositiveTime(String),
    #[error("digraph has no start-to-end path; balancing is infeasible")]
    Infeasible,
    #[error("instance has {layers} layers, above the brute-force cap of {cap}")]
    InstanceTooLarge { layers: usize, cap: usize },
}
