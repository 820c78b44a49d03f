//! Repository replication piggybacked on Usenet news and outbound email.
//!
//! The crate has three layers:
//!
//! * [`model`] evolves a synthetic repository day by day (additions and
//!   updates), which both simulators consume.
//! * [`codec`] builds and parses the archival messages themselves: an
//!   OAI-PMH style X-header block plus a base64 payload, shaped either as a
//!   news article or as a MIME attachment on an existing email.
//! * [`news`] and [`email`] simulate the two replication channels day by
//!   day, while [`analytics`] evaluates the closed-form expressions that the
//!   simulators are checked against.
//!
//! [`cli`] ties these together into scenario files, presets, CSV output and
//! a small calculator.

pub mod analytics;
pub mod carry;
pub mod cli;
pub mod codec;
pub mod email;
pub mod model;
pub mod news;
pub mod seeds;
pub mod series;
pub mod units;

pub use model::{DayDelta, ModelError, Record, Repository, RepositoryProfile};
pub use series::SimTimeSeries;
