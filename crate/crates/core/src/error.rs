use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample index {index} outside trajectory range 0..={duration}")]
    Range { index: i64, duration: u64 },

    #[error("{what} = {value} is outside the valid domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("degenerate geometry: horizontal separation is zero")]
    DegenerateGeometry,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("speed {speed} m/s is not below the sound speed {sound_speed} m/s")]
    UnsupportedRegime { speed: f64, sound_speed: f64 },

    #[error("grid does not cover the required rows: missing n = {missing:?}")]
    Coverage { missing: Vec<i64> },

    #[error("measurement failed: {0}")]
    Measurement(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain { what, value, expected }
    }
}
