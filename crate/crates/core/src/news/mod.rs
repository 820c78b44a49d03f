//! Replication to a news server under a bandwidth budget and a post
//! time-to-live.

mod sim;

use serde::{Deserialize, Serialize};

pub use sim::{run_scenario, DayReport, NewsOutcome, NewsSimState};

use crate::model::{ModelError, RepositoryProfile};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NewsError {
    #[error("invalid news configuration: `{field}` {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("step for day {got} applied to simulation at day {expected}")]
    DayMismatch { expected: u64, got: u64 },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> NewsError {
    NewsError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// One baseline, then changes only.
    SingleBaseline,
    /// Groups of baselines separated by a sleep period.
    CyclicBaseline,
    /// Back-to-back baselines.
    ContinuousBaseline,
}

impl std::str::FromStr for PolicyMode {
    type Err = NewsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "single" | "single_baseline" => Ok(Self::SingleBaseline),
            "cyclic" | "cyclic_baseline" => Ok(Self::CyclicBaseline),
            "continuous" | "continuous_baseline" | "repeating" => Ok(Self::ContinuousBaseline),
            _ => Err(invalid("mode", format!("unknown policy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SenderPolicy {
    pub mode: PolicyMode,
    /// Days asleep between baseline groups (cyclic only).
    pub sleep_days: u64,
    /// Baselines sent back to back before each sleep (cyclic only).
    pub copies_target: u32,
    /// Post only metadata rather than record content.
    pub by_reference: bool,
    /// Bytes per post in by-reference mode.
    pub metadata_size: u64,
    /// Keep posting changes while asleep (cyclic only).
    pub sleep_updates: bool,
}

/// What the sender does after each baseline completes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleProgram {
    /// Baselines per awake period; `None` never sleeps.
    pub baselines_per_period: Option<u32>,
    /// Sleep length; `None` sleeps forever.
    pub sleep_days: Option<u64>,
    /// Post changes while asleep.
    pub drain_changes: bool,
}

impl SenderPolicy {
    pub fn single() -> Self {
        Self {
            mode: PolicyMode::SingleBaseline,
            sleep_days: 0,
            copies_target: 1,
            by_reference: false,
            metadata_size: 1000,
            sleep_updates: true,
        }
    }

    pub fn cyclic(sleep_days: u64) -> Self {
        Self { mode: PolicyMode::CyclicBaseline, sleep_days, copies_target: 2, ..Self::single() }
    }

    pub fn continuous() -> Self {
        Self { mode: PolicyMode::ContinuousBaseline, copies_target: 3, ..Self::single() }
    }

    pub fn validate(&self) -> Result<(), NewsError> {
        if self.mode == PolicyMode::CyclicBaseline && self.copies_target == 0 {
            return Err(invalid("copies_target", "must be at least 1"));
        }
        if self.by_reference && self.metadata_size == 0 {
            return Err(invalid("metadata_size", "must be greater than zero in by-reference mode"));
        }
        Ok(())
    }

    pub fn program(&self) -> CycleProgram {
        match self.mode {
            PolicyMode::SingleBaseline => {
                CycleProgram { baselines_per_period: Some(1), sleep_days: None, drain_changes: true }
            }
            PolicyMode::CyclicBaseline if self.sleep_days == 0 => {
                CycleProgram { baselines_per_period: None, sleep_days: Some(0), drain_changes: false }
            }
            PolicyMode::CyclicBaseline => CycleProgram {
                baselines_per_period: Some(self.copies_target.max(1)),
                sleep_days: Some(self.sleep_days),
                drain_changes: self.sleep_updates,
            },
            PolicyMode::ContinuousBaseline => {
                CycleProgram { baselines_per_period: None, sleep_days: Some(0), drain_changes: false }
            }
        }
    }

    pub fn transfer(&self) -> Transfer {
        if self.by_reference {
            Transfer::ByReference { metadata_size: self.metadata_size }
        } else {
            Transfer::FullContent
        }
    }
}

/// What each post carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    /// The base64-encoded record.
    FullContent,
    /// A fixed-size metadata advertisement.
    ByReference { metadata_size: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewsReceiverPolicy {
    /// Days a post survives on the server.
    pub n_ttl: u64,
    /// Largest accepted article, in bytes.
    pub max_article_size: Option<u64>,
}

impl NewsReceiverPolicy {
    pub fn new(n_ttl: u64) -> Self {
        Self { n_ttl, max_article_size: None }
    }

    pub fn validate(&self) -> Result<(), NewsError> {
        if self.n_ttl == 0 {
            return Err(invalid("n_ttl", "must be at least 1 day"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkProfile {
    /// Bytes per day; may be infinite.
    pub bandwidth: f64,
    /// Fraction of each day the link is down.
    pub downtime_fraction: f64,
}

impl NetworkProfile {
    pub fn new(bandwidth: f64, downtime_fraction: f64) -> Self {
        Self { bandwidth, downtime_fraction }
    }

    pub fn validate(&self) -> Result<(), NewsError> {
        if self.bandwidth.is_nan() || self.bandwidth <= 0.0 {
            return Err(invalid("bandwidth", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.downtime_fraction) {
            return Err(invalid("downtime_fraction", "must be in [0, 1)"));
        }
        Ok(())
    }

    pub fn effective_bandwidth(&self) -> f64 {
        self.bandwidth * (1.0 - self.downtime_fraction)
    }
}

/// Records postable per day.
///
/// Full content costs 4/3 of the record size after base64. By-reference
/// posts are charged their metadata size with no 4/3 factor, which is what
/// reproduces the 0.37-day advertising example even though the transfer-time
/// formula includes it.
pub fn q_news(profile: &RepositoryProfile, net: &NetworkProfile, transfer: Transfer) -> Result<f64, NewsError> {
    net.validate()?;
    let nu = net.effective_bandwidth();
    match transfer {
        Transfer::FullContent => {
            if profile.mean_record_size == 0 {
                return Err(invalid("mean_record_size", "must be greater than zero"));
            }
            Ok(nu * 3.0 / (4.0 * profile.mean_record_size as f64))
        }
        Transfer::ByReference { metadata_size } => {
            if metadata_size == 0 {
                return Err(invalid("metadata_size", "must be greater than zero"));
            }
            Ok(nu / metadata_size as f64)
        }
    }
}

/// Days needed to post one baseline of the current repository.
pub fn t_news(profile: &RepositoryProfile, net: &NetworkProfile, transfer: Transfer) -> Result<f64, NewsError> {
    let q = q_news(profile, net, transfer)?;
    if profile.record_count == 0 {
        return Ok(0.0);
    }
    Ok(profile.record_count as f64 / q)
}

/// A baseline can complete before its first posts expire.
pub fn baseline_feasible(t_news: f64, n_ttl: u64) -> bool {
    t_news < n_ttl as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::parse_bandwidth;

    fn active() -> RepositoryProfile {
        RepositoryProfile::new(100_000, 1_000_000, 100, 400)
    }

    #[test]
    fn active_rate() {
        let net = NetworkProfile::new(parse_bandwidth("1.5Mbps").unwrap(), 0.0);
        let q = q_news(&active(), &net, Transfer::FullContent).unwrap();
        assert!((q - 12_150.0).abs() < 1e-9, "{q}");
        let t = t_news(&active(), &net, Transfer::FullContent).unwrap();
        assert!((t - 100_000.0 / 12_150.0).abs() < 1e-9);
        assert!((t - 8.23).abs() < 0.01);
        assert!(baseline_feasible(t, 30));
        let expected = 100_000.0 * 1e6 * 4.0 / 3.0 / 1.62e10;
        assert!((t - expected).abs() < 1e-9);
    }

    #[test]
    fn by_reference_advertising() {
        let net = NetworkProfile::new(parse_bandwidth("0.125Mbps").unwrap(), 0.0);
        let p = RepositoryProfile::new(500_000, 1_000_000, 0, 0);
        let t = t_news(&p, &net, Transfer::ByReference { metadata_size: 1000 }).unwrap();
        assert!((t - 0.37).abs() < 0.01, "{t}");
    }

    #[test]
    fn unbounded_bandwidth() {
        let net = NetworkProfile::new(f64::INFINITY, 0.0);
        assert!(q_news(&active(), &net, Transfer::FullContent).unwrap().is_infinite());
        assert_eq!(t_news(&active(), &net, Transfer::FullContent).unwrap(), 0.0);
    }

    #[test]
    fn empty_repository_takes_no_time() {
        let net = NetworkProfile::new(1e9, 0.0);
        assert_eq!(t_news(&RepositoryProfile::new(0, 10, 0, 0), &net, Transfer::FullContent).unwrap(), 0.0);
    }

    #[test]
    fn downtime_haircut() {
        let net = NetworkProfile::new(4e9, 0.25);
        let q = q_news(&RepositoryProfile::new(1, 1_000_000, 0, 0), &net, Transfer::FullContent).unwrap();
        assert!((q - 2250.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        let net = NetworkProfile::new(1e9, 0.0);
        assert!(q_news(&RepositoryProfile::new(1, 0, 0, 0), &net, Transfer::FullContent).is_err());
        assert!(NetworkProfile::new(0.0, 0.0).validate().is_err());
        assert!(NetworkProfile::new(1.0, 1.0).validate().is_err());
        assert!(NewsReceiverPolicy::new(0).validate().is_err());
        assert!("weekly".parse::<PolicyMode>().is_err());
        assert_eq!("repeating".parse::<PolicyMode>().unwrap(), PolicyMode::ContinuousBaseline);
    }

    #[test]
    fn cyclic_without_sleep_is_continuous() {
        assert_eq!(SenderPolicy::cyclic(0).program(), SenderPolicy::continuous().program());
    }
}
