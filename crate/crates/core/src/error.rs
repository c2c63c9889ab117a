use thiserror::Error;

use crate::geom::ShapeViolation;

/// Errors produced by the capacity toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape set: {0}")]
    Shape(#[from] ShapeViolation),

    #[error("point {x}, {y} is outside the {space} domain")]
    Domain { x: f64, y: f64, space: &'static str },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("{flagged} of {total} walks exceeded the step cap")]
    StepCap { flagged: usize, total: usize },

    #[error("dyadic cover incomplete: shape {index} needs scale {needed} > n_max {n_max}")]
    CoverTooDeep { index: usize, needed: u32, n_max: u32 },

    #[error("transported set leaves the annulus 1/2 < |w| < 1 at y = {y} (min |w| = {min_modulus})")]
    Annulus { y: f64, min_modulus: f64 },

    #[error("the origin lies in the neighborhood; filling is undefined")]
    OriginInNeighborhood,

    #[error("corpus generation gave up after {attempts} rejected draws")]
    Corpus { attempts: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
