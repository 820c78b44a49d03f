use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::email::{load_domain_fixture, Domain, EmailScenario, EmailTrafficModel, FIXTURE_PERIOD_DAYS};
use crate::model::RepositoryProfile;
use crate::news::{NetworkProfile, NewsReceiverPolicy, PolicyMode, SenderPolicy};
use crate::units::{Bytes, BytesPerDay};

const PRESETS: [(&str, &str); 3] = [
    ("active", include_str!("../../presets/active.toml")),
    ("mature", include_str!("../../presets/mature.toml")),
    ("new", include_str!("../../presets/new.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transport {
    News,
    Email,
}

impl std::str::FromStr for Transport {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "news" | "nntp" => Ok(Self::News),
            "email" | "smtp" => Ok(Self::Email),
            _ => Err(CliError::invalid("transport", format!("expected news or email, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepositorySection {
    pub record_count: u64,
    pub mean_record_size: Bytes,
    pub adds_per_day: u64,
    pub updates_per_day: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewsSection {
    /// Each listed policy is run separately over the same repository.
    pub policies: Vec<PolicyMode>,
    pub n_ttl: u64,
    pub sleep_days: u64,
    pub copies_target: u32,
    pub sleep_updates: bool,
    pub by_reference: bool,
    pub metadata_size: Bytes,
    pub max_article_size: Option<Bytes>,
}

impl Default for NewsSection {
    fn default() -> Self {
        Self {
            policies: vec![PolicyMode::SingleBaseline, PolicyMode::CyclicBaseline, PolicyMode::ContinuousBaseline],
            n_ttl: 30,
            sleep_days: 3,
            copies_target: 2,
            sleep_updates: true,
            by_reference: false,
            metadata_size: Bytes(1000.0),
            max_article_size: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub bandwidth: BytesPerDay,
    pub downtime_fraction: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self { bandwidth: BytesPerDay(1.5e6 / 8.0 * crate::units::SECONDS_PER_DAY), downtime_fraction: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmailSection {
    pub total_volume: f64,
    pub exponent: f64,
    /// Rank-1 daily volume; derived from `total_volume` when absent.
    pub constant: Option<f64>,
    pub granularity: f64,
    pub with_history: bool,
    pub domain_count: u32,
    /// CSV of observed per-domain volumes used instead of the power law.
    pub domains_fixture: Option<PathBuf>,
    pub fixture_period_days: f64,
    pub include_rank_one: bool,
}

impl Default for EmailSection {
    fn default() -> Self {
        Self {
            total_volume: 16866.0,
            exponent: 1.6,
            constant: None,
            granularity: 1.0,
            with_history: true,
            domain_count: 50,
            domains_fixture: None,
            fixture_period_days: FIXTURE_PERIOD_DAYS,
            include_rank_one: false,
        }
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub transport: Transport,
    #[serde(default = "default_days")]
    pub days: u64,
    #[serde(default)]
    pub seed: u64,
    pub repository: RepositorySection,
    #[serde(default)]
    pub news: NewsSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub email: EmailSection,
    /// Output directory; the command line wins when both are given.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_days() -> u64 {
    2000
}

impl ScenarioConfig {
    pub fn profile(&self) -> RepositoryProfile {
        let r = &self.repository;
        RepositoryProfile::new(r.record_count, r.mean_record_size.0.round() as u64, r.adds_per_day, r.updates_per_day)
    }

    pub fn network(&self) -> NetworkProfile {
        NetworkProfile::new(self.network.bandwidth.0, self.network.downtime_fraction)
    }

    pub fn receiver(&self) -> NewsReceiverPolicy {
        NewsReceiverPolicy {
            n_ttl: self.news.n_ttl,
            max_article_size: self.news.max_article_size.map(|b| b.0.round() as u64),
        }
    }

    pub fn sender(&self, mode: PolicyMode) -> SenderPolicy {
        let n = &self.news;
        SenderPolicy {
            mode,
            sleep_days: if mode == PolicyMode::CyclicBaseline { n.sleep_days } else { 0 },
            copies_target: n.copies_target,
            by_reference: n.by_reference,
            metadata_size: n.metadata_size.0.round() as u64,
            sleep_updates: n.sleep_updates,
        }
    }

    pub fn email_model(&self) -> EmailTrafficModel {
        let e = &self.email;
        EmailTrafficModel { constant: e.constant, ..EmailTrafficModel::new(e.total_volume, e.exponent, e.granularity, e.domain_count) }
    }

    /// The email run settings, reading the domain fixture when one is set.
    /// A relative fixture path is taken relative to `base_dir`.
    pub fn email_scenario(&self, base_dir: Option<&Path>) -> Result<EmailScenario, CliError> {
        let domains: Option<Vec<Domain>> = match &self.email.domains_fixture {
            Some(p) => {
                let path = match base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                Some(load_domain_fixture(&path, self.email.fixture_period_days)?)
            }
            None => None,
        };
        Ok(EmailScenario {
            domains,
            include_rank_one: self.email.include_rank_one,
            ..EmailScenario::new(self.email_model(), self.email.with_history, self.seed)
        })
    }

    /// Re-checks every module's invariants.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::invalid("name", "must be a non-empty file-name-safe string"));
        }
        if self.days == 0 {
            return Err(CliError::invalid("days", "must be at least 1"));
        }
        self.profile().validate()?;
        match self.transport {
            Transport::News => {
                if self.news.policies.is_empty() {
                    return Err(CliError::invalid("news.policies", "list at least one policy"));
                }
                self.receiver().validate()?;
                self.network().validate()?;
                for &mode in &self.news.policies {
                    self.sender(mode).validate()?;
                }
            }
            Transport::Email => {
                if !(self.email.fixture_period_days > 0.0) {
                    return Err(CliError::invalid("email.fixture_period_days", "must be positive"));
                }
                self.email_model().validate()?;
                if self.email.domains_fixture.is_none() {
                    self.email_model().c()?;
                }
            }
        }
        Ok(())
    }
}

/// Names of the built-in scenarios.
pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// A built-in scenario by name.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| n.eq_ignore_ascii_case(name))?;
    Some(toml::from_str(text).expect("built-in presets parse"))
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, CliError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config { file: None, message: e.to_string() })?;
    config.validate()?;
    Ok(config)
}

/// Loads a preset by name or a TOML file by path and validates it.
pub fn load_scenario(spec: &str) -> Result<ScenarioConfig, CliError> {
    if let Some(config) = preset(spec) {
        return Ok(config);
    }
    let path = Path::new(spec);
    if !path.exists() {
        let names: Vec<_> = preset_names().collect();
        return Err(CliError::UnknownScenario { spec: spec.to_string(), presets: names.join(", ") });
    }
    let text = std::fs::read_to_string(path)?;
    let mut config: ScenarioConfig =
        toml::from_str(&text).map_err(|e| CliError::Config { file: Some(path.to_path_buf()), message: e.to_string() })?;
    // fixture paths in a file are relative to that file
    if let (Some(p), Some(dir)) = (&config.email.domains_fixture, path.parent()) {
        if p.is_relative() {
            config.email.domains_fixture = Some(dir.join(p));
        }
    }
    config.validate()?;
    Ok(config)
}
