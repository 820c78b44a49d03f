//! Closed-form and count-level evaluations of the replication model, used
//! for the calculator and as an oracle for the simulators.

mod fit;
mod news;

pub use fit::{power_law_fit, PowerLawFit};
pub use news::{
    baseline_completions, cycle_durations, max_k, records_on_server_analytic, tr_news_analytic, tr_news_series,
    NewsAnalyticInputs,
};

use crate::carry::DailyRate;
use crate::email::{h_no_history, q_email, EmailError, EmailTrafficModel};
use crate::model::RepositoryProfile;

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("invalid input: `{field}` {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Email(#[from] EmailError),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> AnalyticsError {
    AnalyticsError::Invalid { field, reason: reason.into() }
}

/// A probability as the formula gives it, plus the value clamped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    pub raw: f64,
    pub value: f64,
    pub clamped: bool,
}

impl Probability {
    fn from_raw(raw: f64) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Self { raw, value, clamped: value != raw }
    }
}

/// Both channels' replication probabilities for one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityReport {
    pub day: u64,
    pub p_news: Probability,
    pub p_email: Probability,
}

/// Probability that a given record currently has a live post on the news
/// server: posts still inside the ttl window over the current record count.
pub fn p_replicated_news(q_news: f64, day: u64, n_ttl: u64, records: u64, adds_per_day: u64) -> Result<Probability, AnalyticsError> {
    let denominator = records as f64 + day as f64 * adds_per_day as f64;
    if denominator <= 0.0 {
        return Err(invalid("records", "repository is empty"));
    }
    let expired_before = day.saturating_sub(n_ttl) as f64;
    let numerator = q_news * day as f64 - q_news * expired_before;
    Ok(Probability::from_raw(numerator / denominator))
}

/// Probability that a given record has reached a domain by email, with a
/// history pointer and one record per email.
pub fn p_replicated_email(q_email: f64, day: u64, records: u64, adds_per_day: u64) -> Result<Probability, AnalyticsError> {
    let denominator = records as f64 + day as f64 * adds_per_day as f64;
    if denominator <= 0.0 {
        return Err(invalid("records", "repository is empty"));
    }
    Ok(Probability::from_raw(q_email * day as f64 / denominator))
}

/// Expected records sent to domain `rank` over `days` days: the daily rate
/// times the no-duplicate probability, summed. With a history pointer that
/// probability is 1.
pub fn tr_email_analytic(
    model: &EmailTrafficModel,
    profile: &RepositoryProfile,
    rank: u32,
    days: u64,
    with_history: bool,
) -> Result<f64, AnalyticsError> {
    let q = q_email(model, rank)?;
    if with_history {
        return Ok(q * days as f64);
    }
    let mut total = 0.0;
    let mut h = 1.0;
    for d in 1..=days {
        if d > 1 && h > 0.0 {
            h = h_no_history(d, profile, q)?.value;
        }
        total += q * h;
    }
    Ok(total)
}

/// Expected distinct records held by one domain after each day when every
/// day's attachments are a uniform sample without repeats from the current
/// repository, with the daily count following carry arithmetic. Index `d`
/// holds the expectation after day `d + 1`.
pub fn expected_unique_no_history(profile: &RepositoryProfile, q: f64, days: u64) -> Vec<f64> {
    let rate = DailyRate::new(q);
    // miss[t]: chance that a record from cohort t (0 = initial) is still
    // unseen; cohort sizes are R then R_a per day
    let mut miss: Vec<f64> = Vec::with_capacity(days as usize + 1);
    let mut out = Vec::with_capacity(days as usize);
    miss.push(1.0);
    for d in 1..=days {
        miss.push(1.0);
        let pool = profile.size_on_day(d);
        let k = rate.on_day(d).min(pool);
        let keep = if pool == 0 { 1.0 } else { 1.0 - k as f64 / pool as f64 };
        for m in miss.iter_mut() {
            *m *= keep;
        }
        let unseen = miss[0] * profile.record_count as f64
            + miss[1..].iter().sum::<f64>() * profile.adds_per_day as f64;
        out.push(pool as f64 - unseen);
    }
    out
}
