use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("level {level} is outside the construction (levels start at 3)")]
    Level { level: u64 },

    #[error("level {level} exceeds the configured depth limit {depth_max}")]
    TooDeep { level: u64, depth_max: u32 },

    #[error("point ({x}, {y}) lies outside the unit square")]
    OutsideUnitSquare { x: f64, y: f64 },

    #[error("enumeration too large: level {level} has 2^{} cells, cap is {cap} (raise --cap)", 2 * .level)]
    EnumerationTooLarge { level: u32, cap: u64 },

    #[error("invalid cell address: {0}")]
    Address(String),

    #[error("frame map singular at its center")]
    Singular,

    #[error(
        "quadrature did not converge: estimate {estimate:e}, error {achieved:e}, requested {requested:e}"
    )]
    Quadrature {
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    #[error("gauge undefined: {0}")]
    GaugeDomain(String),

    #[error("cells from different levels ({0} and {1}) in one collection")]
    MixedLevels(u32, u32),
}

pub type Result<T> = std::result::Result<T, Error>;
