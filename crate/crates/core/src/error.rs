use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("volume {0} is odd; pairings require an even number of sites")]
    OddVolume(usize),

    #[error("operator string is not number conserving ({raise} raise vs {lower} lower)")]
    NonConserving { raise: usize, lower: usize },

    #[error("site {site} is outside a volume of {volume}")]
    SiteOutOfRange { site: usize, volume: usize },

    #[error("expected a string of I and Z letters only")]
    NotDiagonal,

    #[error("Z counts differ: {0} vs {1}")]
    MismatchedZCount(usize, usize),

    #[error("volumes differ: {0} vs {1}")]
    VolumeMismatch(usize, usize),

    #[error("channel eigenvalue {value:e} in sector (V={volume}, n_z={n_z}) is too small to invert")]
    SingularChannel { volume: usize, n_z: usize, value: f64 },

    #[error("Z sector {n_z} exceeds the supported maximum of {max}")]
    SectorTooLarge { n_z: usize, max: usize },

    #[error("{what} exceeds cap: {value} > {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("filling {num}/{den} of {volume} sites is not an integer particle number")]
    NonIntegerFilling { num: usize, den: usize, volume: usize },

    #[error("Lanczos did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("shadow table is empty")]
    EmptyTable,

    #[error("observable term {term} acts on volume {term_volume}, table has {table_volume}")]
    TermVolumeMismatch {
        term: usize,
        term_volume: usize,
        table_volume: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
