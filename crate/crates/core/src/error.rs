use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("body does not pierce the free surface (entirely {0})")]
    NotSurfacePiercing(&'static str),
    #[error("degenerate immersed part: {0}")]
    DegenerateImmersedPart(String),
    #[error("invalid water configuration: {0}")]
    InvalidWater(String),
    #[error("oblique angle too large: k = {k} must be below nu = {nu}")]
    ObliqueAngleTooLarge { k: f64, nu: f64 },
    #[error("invalid wave parameters: {0}")]
    InvalidWave(String),
    #[error("cut-off: propagating root kappa0 = {kappa0} does not exceed k = {k}")]
    CutOff { kappa0: f64, k: f64 },
    #[error("equilibrium is unstable: {0}")]
    Unstable(String),
    #[error("mesh quality: minimum angle {min_angle_deg:.3} deg below 10 deg")]
    MeshQuality { min_angle_deg: f64 },
    #[error("mesh generation failed: {0}")]
    MeshGeneration(String),
    #[error("mesh format: {0}")]
    MeshFormat(String),
    #[error("singular system: smallest pivot {smallest_pivot:e}")]
    SingularSystem { smallest_pivot: f64 },
    #[error("coupled matrix nearly singular: sigma_min/|T| = {ratio:e}")]
    NearlySingularT { ratio: f64 },
    #[error("water not deep enough for the transform: nu*h = {nu_h}")]
    NotDeepEnough { nu_h: f64 },
    #[error("parity restriction requires a mirror-symmetric mesh")]
    ParityUnavailable,
}

pub type Result<T> = std::result::Result<T, Error>;
