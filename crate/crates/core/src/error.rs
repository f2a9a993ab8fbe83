use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("feature `{feature}` is observed in fewer than two specs and cannot be imputed")]
    UnimputableFeature { feature: &'static str },
    #[error("feature `{feature}` is not part of the fitted quantile map")]
    MissingFeature { feature: String },
    #[error("{type_code}: value for `{feature}` is missing")]
    MissingValue { type_code: String, feature: &'static str },
    #[error("{type_code}: {reason}")]
    InvalidSpec { type_code: String, reason: String },
    #[error("type code `{0}` appears more than once in the fleet")]
    DuplicateTypeCode(String),
    #[error("fleet has no training members")]
    EmptyTrainingFleet,
    #[error("{type_code}: no feasible flight profile after {attempts} attempts")]
    InfeasibleProfile { type_code: String, attempts: u32 },
    #[error("mass {mass} kg outside ({oew}, {mtow}] kg")]
    MassOutOfBounds { mass: f64, oew: f64, mtow: f64 },
    #[error("flight {flight_id}: fuel exhausted at sample {sample}")]
    FuelExhausted { flight_id: String, sample: usize },
    #[error("{type_code}: {count} flights, at least 10 are required for a split")]
    TooFewFlights { type_code: String, count: usize },
    #[error("{what}: need at least {needed}, got {got}")]
    TooFew { what: &'static str, needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite activation in layer {layer}")]
    NonFiniteActivation { layer: usize },
    #[error("non-finite gradient for parameter {index}")]
    NonFiniteGradient { index: usize },
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("target at row {row} is zero; percentage losses are undefined")]
    ZeroTarget { row: usize },
    #[error("flight {flight_id} appears in more than one subset")]
    FlightLeakage { flight_id: String },
    #[error("type {type_code} is used for training and for generalization")]
    TypeLeakage { type_code: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteActivation { .. } | Error::NonFiniteGradient { .. } | Error::NonFiniteLoss { .. }
        )
    }
}
