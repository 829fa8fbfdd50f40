use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("facet {facet} references node {node}, but the mesh has {n_nodes} nodes")]
    InvalidNodeIndex {
        facet: usize,
        node: usize,
        n_nodes: usize,
    },
    #[error("facet {facet} repeats a node: {nodes:?}")]
    RepeatedNode { facet: usize, nodes: [usize; 3] },
    #[error("edge ({}, {}) is shared by {count} facets (non-manifold)", .edge[0], .edge[1])]
    NonManifoldEdge { edge: [usize; 2], count: usize },
    #[error("facet {facet} duplicates facet {first}")]
    DuplicateFacet { facet: usize, first: usize },
    #[error("facet {facet} is degenerate (signed area {area:e})")]
    DegenerateFacet { facet: usize, area: f64 },
    #[error("edge ({}, {}) is traversed in the same direction by both adjacent facets", .edge[0], .edge[1])]
    InconsistentOrientation { edge: [usize; 2] },
    #[error("point ({x}, {y}) lies outside facet {facet} (min barycentric {min_bary:e})")]
    PointOutsideFacet {
        facet: usize,
        x: f64,
        y: f64,
        min_bary: f64,
    },
    #[error("point ({x}, {y}) lies outside the mesh domain")]
    PointOutsideDomain { x: f64, y: f64 },
    #[error("segment leaves the mesh domain near parameter {t}")]
    SegmentExitsDomain { t: f64 },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("operation not defined for forms of degree {0}")]
    UnsupportedDegree(usize),
    #[error("coefficient vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unsupported quadrature order {0} (supported: 2, 4)")]
    UnsupportedQuadratureOrder(usize),
    #[error("dual {degree}-cell {dual_cell}: consistency residual {residual:e} exceeds tolerance")]
    ConsistencyResidual {
        degree: usize,
        dual_cell: usize,
        residual: f64,
    },
    #[error("dual {degree}-cell {dual_cell}: coefficient recursion left {remaining} unknowns undetermined")]
    Underdetermined {
        degree: usize,
        dual_cell: usize,
        remaining: usize,
    },
    #[error("dual mesh orientation inconsistency at primal {kind} {cell}")]
    DualOrientation { kind: &'static str, cell: usize },
    #[error("the closed-interface variant requires a mesh without boundary")]
    MeshHasBoundary,
    #[error("meshes cover different domains (areas {area_a}, {area_b}, overlay {overlay})")]
    DomainMismatch {
        area_a: f64,
        area_b: f64,
        overlay: f64,
    },
    #[error("the overlay of the two meshes is empty")]
    EmptyOverlay,
    #[error("CGS breakdown after {iterations} iterations (relative residual {residual:e})")]
    SolverBreakdown { iterations: usize, residual: f64 },
    #[error("CGS did not reach the tolerance within {iterations} iterations (relative residual {residual:e})")]
    SolverMaxIterations { iterations: usize, residual: f64 },
    #[error("matrix dimensions do not match: {0}")]
    DimensionMismatch(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
