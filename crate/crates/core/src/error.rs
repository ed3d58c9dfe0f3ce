use thiserror::Error;

use crate::triangulation::{FaceId, VertexId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("chain is not a cycle (boundary has word norm {0})")]
    NonCycle(i64),

    /// A face boundary image does not fit in a single timezone of the
    /// codomain grid; the domain mesh is too coarse for the map.
    #[error("timezone violation at {}; refine the mesh (larger n)", describe_face(face, corners))]
    TimezoneViolation {
        face: Option<(usize, FaceId)>,
        corners: [VertexId; 3],
    },

    #[error("mesh refinement did not settle on a degree up to n = {n_max}")]
    NoAgreement { n_max: usize },

    #[error("pushed fundamental cycle is not an integer multiple of the codomain cycle")]
    NonMultiple,

    #[error("degenerate projection: |E(zeta(u))| = {norm} below threshold {threshold}")]
    DegenerateProjection { norm: f64, threshold: f64 },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("schema error in {field}: {reason}")]
    Schema { field: String, reason: String },

    #[error("dimension mismatch in {field}: expected {expected}, found {found}")]
    DimensionMismatch {
        field: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {field}")]
    NonFinite { field: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn describe_face(face: &Option<(usize, FaceId)>, corners: &[VertexId; 3]) -> String {
    let c = corners.map(|v| (v.i, v.j));
    match face {
        Some((idx, _)) => format!("face {idx} (rounded corners {c:?})"),
        None => format!("rounded corners {c:?}"),
    }
}
