use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid layer dimensions: {0}")]
    InvalidLayerDims(String),
    #[error("unmapped class `{0}`")]
    UnmappedClass(String),
    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },
    #[error("filtration is not monotone: simplex #{index} has a missing or later face")]
    NonMonotoneFiltration { index: usize },
    #[error("complex has {size} simplices, dense homology is limited to {limit}")]
    SizeGuard { size: usize, limit: usize },
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("point {0} is not covered at layer 0")]
    UncoveredPoint(usize),
    #[error("schedule has {found} scales but the network has {expected} layers")]
    ScheduleLength { expected: usize, found: usize },
    #[error("layer {layer} is not contained in layer {next}")]
    NestingViolation { layer: usize, next: usize },
    #[error("node has no points")]
    EmptyNode,
}
