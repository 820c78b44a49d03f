use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ScenarioConfig, Transport};
use super::CliError;
use crate::email;
use crate::model::make_repository;
use crate::news::{self, q_news, PolicyMode};
use crate::series::{EmailRow, NewsRow, SimTimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewsPolicySummary {
    pub policy: PolicyMode,
    pub q_news: f64,
    pub final_coverage: f64,
    pub final_volume_copies: f64,
    /// Days on which every current record had a live post.
    pub days_at_full_coverage: u64,
    pub last_full_coverage_day: Option<u64>,
    /// Mean records on the server over the last `n_ttl` days.
    pub steady_state_records_on_server: f64,
    pub final_records_on_server: u64,
    pub total_posted: u64,
    pub baseline_completion_days: Vec<u64>,
    pub skipped_oversize: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSummary {
    pub rank: u32,
    pub q_email: f64,
    pub final_coverage: f64,
    /// First day the domain held the whole repository.
    pub full_coverage_day: Option<u64>,
    pub duplicates: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmailSummary {
    pub with_history: bool,
    pub domains: Vec<DomainSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub transport: Transport,
    pub days: u64,
    pub seed: u64,
    pub news: Vec<NewsPolicySummary>,
    pub email: Option<EmailSummary>,
}

impl RunSummary {
    pub fn domain(&self, rank: u32) -> Option<&DomainSummary> {
        self.email.as_ref()?.domains.iter().find(|d| d.rank == rank)
    }

    pub fn policy(&self, mode: PolicyMode) -> Option<&NewsPolicySummary> {
        self.news.iter().find(|p| p.policy == mode)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// One labelled time series per policy (news) or a single one (email).
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub series: Vec<(String, SimTimeSeries)>,
    pub summary: RunSummary,
}

fn policy_label(mode: PolicyMode) -> &'static str {
    match mode {
        PolicyMode::SingleBaseline => "single",
        PolicyMode::CyclicBaseline => "cyclic",
        PolicyMode::ContinuousBaseline => "continuous",
    }
}

fn summarize_news(mode: PolicyMode, q: f64, ttl: u64, out: &news::NewsOutcome) -> NewsPolicySummary {
    let rows: &[NewsRow] = &out.rows;
    let last = rows.last().expect("at least one day");
    let full: Vec<u64> = rows.iter().filter(|r| r.repo_size > 0 && r.coverage_fraction >= 1.0).map(|r| r.day).collect();
    let window = &rows[rows.len().saturating_sub(ttl as usize)..];
    NewsPolicySummary {
        policy: mode,
        q_news: q,
        final_coverage: last.coverage_fraction,
        final_volume_copies: last.volume_copies,
        days_at_full_coverage: full.len() as u64,
        last_full_coverage_day: full.last().copied(),
        steady_state_records_on_server: window.iter().map(|r| r.records_on_server as f64).sum::<f64>()
            / window.len() as f64,
        final_records_on_server: last.records_on_server,
        total_posted: last.total_posted,
        baseline_completion_days: out.completion_days.clone(),
        skipped_oversize: out.skipped_oversize,
    }
}

fn summarize_email(with_history: bool, out: &email::EmailOutcome, rates: &[(u32, f64)]) -> EmailSummary {
    let domains = out
        .completion
        .iter()
        .map(|&(rank, day)| {
            let last: Option<&EmailRow> = out.rows.iter().rev().find(|r| r.rank == rank);
            DomainSummary {
                rank,
                q_email: rates.iter().find(|(r, _)| *r == rank).map_or(0.0, |(_, q)| *q),
                final_coverage: last.map_or(0.0, |r| r.coverage),
                full_coverage_day: day,
                duplicates: last.map_or(0, |r| r.duplicates),
            }
        })
        .collect();
    EmailSummary { with_history, domains }
}

/// Runs a validated scenario.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let profile = config.profile();
    let repo = make_repository(profile, config.seed)?;
    let mut summary = RunSummary {
        scenario: config.name.clone(),
        transport: config.transport,
        days: config.days,
        seed: config.seed,
        news: Vec::new(),
        email: None,
    };
    let mut series = Vec::new();
    match config.transport {
        Transport::News => {
            let receiver = config.receiver();
            let net = config.network();
            for &mode in &config.news.policies {
                let sender = config.sender(mode);
                let q = q_news(&profile, &net, sender.transfer())?;
                let out = news::run_scenario(repo.clone(), sender, receiver, net, config.days)?;
                summary.news.push(summarize_news(mode, q, receiver.n_ttl, &out));
                series.push((format!("news-{}", policy_label(mode)), SimTimeSeries::News(out.rows)));
            }
        }
        Transport::Email => {
            let scenario = config.email_scenario(None)?;
            let domains = match &scenario.domains {
                Some(d) => d.clone(),
                None => scenario.model.domains()?,
            };
            let rates: Vec<(u32, f64)> =
                domains.iter().map(|d| (d.rank, d.daily_emails * scenario.model.granularity)).collect();
            let out = email::run_scenario(repo, &scenario, config.days)?;
            summary.email = Some(summarize_email(scenario.with_history, &out, &rates));
            let label = if scenario.with_history { "email-history" } else { "email-no-history" };
            series.push((label.to_string(), SimTimeSeries::Email(out.rows)));
        }
    }
    Ok(RunOutput { series, summary })
}

/// Writes `<name>-<label>.csv` per series and `<name>-summary.json`.
pub fn write_outputs(dir: &Path, output: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (label, s) in &output.series {
        let path = dir.join(format!("{}-{label}.csv", output.summary.scenario));
        s.write_csv(std::fs::File::create(&path)?)?;
        written.push(path);
    }
    let path = dir.join(format!("{}-summary.json", output.summary.scenario));
    std::fs::write(&path, output.summary.to_json() + "\n")?;
    written.push(path);
    Ok(written)
}

/// Runs scenarios on separate threads; results keep the input order.
pub fn batch(configs: &[ScenarioConfig], jobs: usize) -> Vec<Result<RunOutput, CliError>> {
    let jobs = jobs.max(1);
    let mut results: Vec<Option<Result<RunOutput, CliError>>> = (0..configs.len()).map(|_| None).collect();
    for (chunk_configs, chunk_results) in configs.chunks(jobs).zip(results.chunks_mut(jobs)) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk_configs.iter().map(|c| s.spawn(move || run(c))).collect();
            for (slot, h) in chunk_results.iter_mut().zip(handles) {
                *slot = Some(h.join().unwrap_or_else(|_| Err(CliError::invalid("batch", "scenario thread panicked"))));
            }
        });
    }
    results.into_iter().map(|r| r.expect("every slot filled")).collect()
}
