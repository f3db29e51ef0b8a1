use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("unknown reflection group `{0}` (expected A1^k with k <= 6, A2 or B2)")]
    UnknownGroup(String),
    #[error("invalid face: {0}")]
    InvalidFace(String),
    #[error("theta margin {margin} outside (0, {max}) for this face")]
    InvalidMargin { margin: f64, max: f64 },
    #[error("theta cone failed the Weyl-convexity check")]
    NotWeylConvex,
    #[error("zero vector has no type")]
    ZeroVector,
    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,
    #[error("segment is not regular for the requested face type")]
    IrregularSegment,
    #[error("segment type is not interior to the face")]
    TypeNotInteriorToFace,
    #[error("path is not straight at vertex {0}")]
    NotStraight(usize),
    #[error("path is not longitudinal (segment {0})")]
    NotLongitudinal(usize),
    #[error("theta cones are not nested")]
    NotNested,
    #[error("point lies outside the parallel set")]
    PointOutsideParallelSet,
    #[error("point lies outside the diamond")]
    PointOutsideDiamond,
    #[error("segment meets the diamond")]
    SegmentMeetsDiamond,
    #[error("ray is not theta-regular")]
    RayNotRegular,
    #[error("flag sequence did not stabilize")]
    NotStabilized,
    #[error("ends are not opposite")]
    EndsNotOpposite,
    #[error("no theta-regular witness within the allowed distance")]
    NoRegularWitness,
    #[error("directions lie outside theta")]
    DirectionsOutsideTheta,
    #[error("grid resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, GeomError>;
