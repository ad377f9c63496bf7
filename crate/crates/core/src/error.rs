use thiserror::Error;

/// Errors produced by the flip library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quaternion has norm {norm:e}, cannot invert")]
    ZeroQuaternion { norm: f64 },

    #[error("quaternion is not unit: |q|^2 - 1 = {deviation:e}")]
    NotUnit { deviation: f64 },

    #[error("non-finite quaternion component")]
    NonFinite,

    #[error("rotation axis is not a unit vector (|u| = {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("matrix is not a rotation: orthogonality error {orthogonality:e}, det {det}")]
    NotARotation { orthogonality: f64, det: f64 },

    #[error("both preimages are equidistant from the anchor quaternion")]
    AmbiguousPreimage,

    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),

    #[error("unknown trick `{0}`")]
    UnknownTrick(String),

    #[error("time {0} is outside [0, 1]")]
    DomainError(f64),

    #[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
    Syntax { offset: usize, expected: Vec<String> },

    #[error("invalid time scale {0}: must lie in (0, 1]")]
    InvalidTimeScale(String),

    #[error("not a flip: {0}")]
    InvalidFlip(String),

    #[error("curve cannot be lifted continuously near t = {t}")]
    InsufficientContinuity { t: f64 },

    #[error("lift endpoint {0:?} is not within tolerance of 1, -k, -1 or k")]
    NotALandingLift([f64; 4]),

    #[error("unknown analytic lift `{0}`")]
    UnknownLift(String),

    #[error("spreading homotopy only supports powers of the shove-it")]
    UnsupportedPair,

    #[error("quaternion lies too close to the perpendicular circle (x0^2 + x3^2 = {0:e})")]
    NearPerpendicularCircle(f64),

    #[error("angle samples jump by {jump} at t = {t}")]
    DiscontinuousAngle { t: f64, jump: f64 },

    #[error("lift meets the perpendicular circle near t = {t} (x0^2 + x3^2 = {margin:e})")]
    IntersectsPerpendicularCircle { t: f64, margin: f64 },

    #[error("curve endpoint at t = {t} is off the stabilization circle by {offset:e}")]
    EndpointNotOnParallelCircle { t: f64, offset: f64 },

    #[error("wobble amplitude {0} must lie in [0, 1)")]
    InvalidAmplitude(f64),

    #[error("projection of sample {index} collapses to zero")]
    DegenerateProjection { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
