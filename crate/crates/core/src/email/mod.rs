//! Replication piggybacked on outbound email whose per-domain volume follows
//! a power law in the domain's rank.

mod domains;
mod sim;

use serde::{Deserialize, Serialize};

pub use domains::{load_domain_fixture, builtin_domain_table, parse_domain_fixture, Domain, FIXTURE_PERIOD_DAYS};
pub use sim::{run_scenario, DomainQueue, EmailOutcome, EmailScenario, EmailSimState};

use crate::model::{ModelError, RepositoryProfile};

/// Default absolute tolerance for [`zeta`].
pub const ZETA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum EmailError {
    #[error("zeta({0}) diverges; the exponent must exceed 1")]
    Divergent(f64),
    #[error("invalid email configuration: `{field}` {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("domain fixture line {line}: {reason}")]
    Fixture { line: u64, reason: String },
    #[error("reading domain fixture: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Riemann zeta by direct summation of the first terms plus an
/// Euler-Maclaurin estimate of the tail (the integral, half the boundary
/// term and two derivative corrections). The cut-off grows until the size of
/// the first omitted correction, which bounds the error, is within
/// `tolerance`.
pub fn zeta(b: f64, tolerance: f64) -> Result<f64, EmailError> {
    if b.is_nan() || b <= 1.0 {
        return Err(EmailError::Divergent(b));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(EmailError::Invalid { field: "tolerance", reason: "must be positive".into() });
    }
    let rising = |k: i32| (0..k).map(|i| b + i as f64).product::<f64>();
    let mut n = 8.0f64;
    while rising(5) * n.powf(-b - 5.0) / 30240.0 > tolerance && n < 1e9 {
        n *= 2.0;
    }
    let head: f64 = (1..n as u64).map(|k| (k as f64).powf(-b)).sum();
    let tail = n.powf(1.0 - b) / (b - 1.0) + n.powf(-b) / 2.0 + b * n.powf(-b - 1.0) / 12.0
        - rising(3) * n.powf(-b - 3.0) / 720.0;
    Ok(head + tail)
}

/// The power-law constant that makes the per-rank volumes sum to `volume`.
pub fn derive_c(volume: f64, b: f64) -> Result<f64, EmailError> {
    Ok(volume / zeta(b, ZETA_TOLERANCE)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmailTrafficModel {
    /// Total outbound emails per day.
    pub total_volume: f64,
    /// Power-law exponent.
    pub exponent: f64,
    /// Emails per day to the rank-1 domain; derived from the total when unset.
    pub constant: Option<f64>,
    /// Records attached per email.
    pub granularity: f64,
    /// Number of ranked domains to simulate.
    pub domain_count: u32,
}

impl EmailTrafficModel {
    pub fn new(total_volume: f64, exponent: f64, granularity: f64, domain_count: u32) -> Self {
        Self { total_volume, exponent, constant: None, granularity, domain_count }
    }

    pub fn validate(&self) -> Result<(), EmailError> {
        let bad = |field, reason: &str| Err(EmailError::Invalid { field, reason: reason.into() });
        if !(self.granularity > 0.0) || !self.granularity.is_finite() {
            return bad("granularity", "must be a positive number");
        }
        if !(self.total_volume >= 0.0) {
            return bad("total_volume", "must be non-negative");
        }
        if self.constant.is_some_and(|c| !(c >= 0.0)) {
            return bad("constant", "must be non-negative");
        }
        if self.exponent <= 1.0 && self.constant.is_none() {
            return Err(EmailError::Divergent(self.exponent));
        }
        Ok(())
    }

    pub fn c(&self) -> Result<f64, EmailError> {
        match self.constant {
            Some(c) => Ok(c),
            None => derive_c(self.total_volume, self.exponent),
        }
    }

    /// Emails per day to the domain of rank `rank`.
    pub fn daily_volume(&self, rank: u32) -> Result<f64, EmailError> {
        if rank == 0 {
            return Err(EmailError::Invalid { field: "rank", reason: "ranks start at 1".into() });
        }
        Ok(self.c()? * (rank as f64).powf(-self.exponent))
    }

    /// Model-derived domains of ranks `1..=domain_count`.
    pub fn domains(&self) -> Result<Vec<Domain>, EmailError> {
        let c = self.c()?;
        Ok((1..=self.domain_count)
            .map(|rank| Domain { rank, name: None, daily_emails: c * (rank as f64).powf(-self.exponent) })
            .collect())
    }
}

/// Records per day sent to the domain of rank `rank`.
pub fn q_email(model: &EmailTrafficModel, rank: u32) -> Result<f64, EmailError> {
    Ok(model.daily_volume(rank)? * model.granularity)
}

/// Probability that an attachment made on `day` is not a duplicate when the
/// sender keeps no history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoHistoryProbability {
    pub value: f64,
    /// Some day's rate reached the pool size, so the factor was clamped to 0.
    pub clamped: bool,
}

/// `h(1) = 1`, `h(D) = (P_D - q) / P_D * h(D-1)` with pool
/// `P_D = R + (R_u + R_a) * D`.
pub fn h_no_history(day: u64, profile: &RepositoryProfile, q: f64) -> Result<NoHistoryProbability, EmailError> {
    if day == 0 {
        return Err(EmailError::Invalid { field: "day", reason: "days start at 1".into() });
    }
    let mut h = 1.0;
    let mut clamped = false;
    for d in 2..=day {
        let pool = profile.record_count as f64 + profile.changes_per_day() as f64 * d as f64;
        let factor = if pool > 0.0 { (pool - q) / pool } else { 0.0 };
        if factor <= 0.0 {
            clamped = true;
            h = 0.0;
            break;
        }
        h *= factor;
    }
    Ok(NoHistoryProbability { value: h, clamped })
}
