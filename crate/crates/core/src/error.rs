use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("tortoise map requires r > 2M (M = {mass}, r = {r})")]
    InsideHorizon { mass: f64, r: f64 },

    #[error("invalid end {end:?} for a single-ended scenario")]
    InvalidEnd { end: crate::geometry::End },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid initial data: {0}")]
    InitialData(String),

    #[error("cfl = {0} outside (0, 1]")]
    Cfl(f64),

    #[error("instability: non-finite value at index {index} (xi = {position}) at t = {t}")]
    Instability { index: usize, position: f64, t: f64 },

    #[error("no closed-form solution for {0}")]
    NoClosedForm(&'static str),

    #[error("non-integrable profile: {0}")]
    NonIntegrable(String),

    #[error("extraction failed: {0}")]
    Extraction(String),

    #[error("diagnostics: {0}")]
    Diagnostics(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config schema violation at `{key}`: {message}")]
    ConfigSchema { key: String, message: String },

    #[error("config semantic violation: {0}")]
    ConfigSemantic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used in error objects emitted by the CLI and C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Scenario(_) => "scenario",
            Error::InsideHorizon { .. } => "inside_horizon",
            Error::InvalidEnd { .. } => "invalid_end",
            Error::Grid(_) => "grid",
            Error::InitialData(_) => "initial_data",
            Error::Cfl(_) => "cfl",
            Error::Instability { .. } => "instability",
            Error::NoClosedForm(_) => "no_closed_form",
            Error::NonIntegrable(_) => "non_integrable",
            Error::Extraction(_) => "extraction",
            Error::Diagnostics(_) => "diagnostics",
            Error::ConfigParse { .. } => "config_parse",
            Error::ConfigSchema { .. } => "config_schema",
            Error::ConfigSemantic(_) => "config_semantic",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
