use thiserror::Error;

use crate::exact::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("classes do not belong to the same numerical model")]
    ModelMismatch,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{0}")]
    Precondition(String),

    #[error("segment is not normalized: {0}")]
    NotNormalized(String),

    #[error("zero multiplicity for `{0}`")]
    ZeroMultiplicity(String),

    #[error("coefficient product leaves the linear parameter range")]
    NonLinearCoefficient,

    #[error("irrational wall inside ({lo}, {hi}) for {tag}; re-parameterize the segment so walls are rational")]
    IrrationalWall { tag: String, lo: Rat, hi: Rat },

    #[error("no generic representative within nudge depth near wall {wall}")]
    NudgeDepthExceeded { wall: Rat },

    #[error("exponent a·σ_j(t_i)/σ_j(wall) = {exponent} is not a positive integer for a = {a}")]
    Divisibility { a: u64, exponent: Rat },

    #[error("flank {flank} is not in a chamber adjacent to wall {wall}")]
    FlankMisplaced { wall: Rat, flank: Rat },

    #[error("twist coefficients not positive: need lambda > {lambda_min}")]
    Positivity { lambda_min: Rat },

    #[error("pairing condition c_0k = c_1k fails for k = {k}")]
    DegeneratePairing { k: usize },

    #[error("{what} search exceeded its cap; offending member `{witness}`")]
    SearchCap { what: &'static str, witness: String },

    #[error("segment is not uniform: {0}")]
    NotUniform(String),

    #[error("internal property check failed: {0}")]
    PropertyViolation(String),

    #[error("io error: {0}")]
    Io(String),
}
