//! Scenario files, the run/batch drivers, the equation calculator and the
//! codec round-trip check behind the `piggyback` binary.

mod calc;
mod config;
mod roundtrip;
mod run;

use std::path::PathBuf;

pub use calc::{calc, CalcResult, EQUATIONS};
pub use config::{
    load_scenario, parse_scenario, preset, preset_names, EmailSection, NetworkSection, NewsSection, RepositorySection,
    ScenarioConfig, Transport,
};
pub use roundtrip::{codec_roundtrip, write_synthetic_corpus, CodecFormat, RoundtripFailure, RoundtripReport};
pub use run::{batch, run, write_outputs, DomainSummary, EmailSummary, NewsPolicySummary, RunOutput, RunSummary};

use crate::analytics::AnalyticsError;
use crate::codec::CodecError;
use crate::email::EmailError;
use crate::model::ModelError;
use crate::news::NewsError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}", file.as_ref().map_or("scenario".to_string(), |p| p.display().to_string()))]
    Config { file: Option<PathBuf>, message: String },
    #[error("no preset or file named {spec:?} (presets: {presets})")]
    UnknownScenario { spec: String, presets: String },
    #[error("unknown equation {name:?}; choose one of {known}")]
    UnknownEquation { name: String, known: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    News(#[from] NewsError),
    #[error(transparent)]
    Email(#[from] EmailError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Self::Invalid { field, reason: reason.into() }
    }
}
