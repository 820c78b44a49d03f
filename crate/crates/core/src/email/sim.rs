use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Domain, EmailError, EmailTrafficModel};
use crate::carry::DailyRate;
use crate::model::Repository;
use crate::seeds::{sub_seed, Stream};
use crate::series::EmailRow;

/// What one receiving domain has been sent.
#[derive(Debug, Clone)]
pub struct DomainQueue {
    pub domain: Domain,
    emails: DailyRate,
    slots: DailyRate,
    /// Next record in the fixed order, when the sender keeps history.
    pointer: Option<usize>,
    received: Vec<bool>,
    unique: u64,
    duplicates: u64,
    first_complete_day: Option<u64>,
    rng: ChaCha8Rng,
}

impl DomainQueue {
    fn new(domain: Domain, granularity: f64, with_history: bool, seed: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, Stream::EmailDomain, domain.rank as u64));
        Self {
            emails: DailyRate::new(domain.daily_emails),
            slots: DailyRate::new(domain.daily_emails * granularity),
            domain,
            pointer: with_history.then_some(0),
            received: Vec::new(),
            unique: 0,
            duplicates: 0,
            first_complete_day: None,
            rng,
        }
    }

    pub fn rank(&self) -> u32 {
        self.domain.rank
    }

    pub fn unique_received(&self) -> u64 {
        self.unique
    }

    pub fn duplicates(&self) -> u64 {
        self.duplicates
    }

    /// First day the domain held every record then in the repository.
    pub fn first_complete_day(&self) -> Option<u64> {
        self.first_complete_day
    }

    pub fn has(&self, record: usize) -> bool {
        self.received.get(record).copied().unwrap_or(false)
    }

    fn receive(&mut self, record: usize) {
        if self.received[record] {
            self.duplicates += 1;
        } else {
            self.received[record] = true;
            self.unique += 1;
        }
    }

    fn step(&mut self, day: u64, pool: usize) -> EmailRow {
        if self.received.len() < pool {
            self.received.resize(pool, false);
        }
        let emails = self.emails.on_day(day);
        let slots = self.slots.on_day(day);
        let attached = match self.pointer {
            _ if pool == 0 => 0,
            Some(mut p) => {
                for _ in 0..slots {
                    if p >= pool {
                        p = 0;
                    }
                    self.receive(p);
                    p += 1;
                }
                self.pointer = Some(p);
                slots
            }
            None => {
                let k = (slots as usize).min(pool);
                for r in index::sample(&mut self.rng, pool, k) {
                    self.receive(r);
                }
                k as u64
            }
        };
        if self.first_complete_day.is_none() && pool > 0 && self.unique == pool as u64 {
            self.first_complete_day = Some(day);
        }
        EmailRow {
            day,
            rank: self.domain.rank,
            emails_today: emails,
            records_attached: attached,
            unique_received: self.unique,
            coverage: if pool == 0 { 0.0 } else { self.unique as f64 / pool as f64 },
            duplicates: self.duplicates,
        }
    }
}

/// All receiving domains for one email replication run.
#[derive(Debug, Clone)]
pub struct EmailSimState {
    pub day: u64,
    pub with_history: bool,
    pub domains: Vec<DomainQueue>,
}

impl EmailSimState {
    pub fn new(model: &EmailTrafficModel, domains: Vec<Domain>, with_history: bool, seed: u64) -> Result<Self, EmailError> {
        model.validate()?;
        if let Some(d) = domains.iter().find(|d| !(d.daily_emails >= 0.0) || d.daily_emails.is_infinite()) {
            return Err(EmailError::Invalid { field: "daily_emails", reason: format!("rank {} has {}", d.rank, d.daily_emails) });
        }
        let domains = domains.into_iter().map(|d| DomainQueue::new(d, model.granularity, with_history, seed)).collect();
        Ok(Self { day: 0, with_history, domains })
    }

    /// Sends one day of mail against the repository as it stands today.
    pub fn step_day(&mut self, repo: &Repository) -> Vec<EmailRow> {
        self.day += 1;
        let pool = repo.len();
        self.domains.iter_mut().map(|d| d.step(self.day, pool)).collect()
    }

    pub fn domain(&self, rank: u32) -> Option<&DomainQueue> {
        self.domains.iter().find(|d| d.rank() == rank)
    }
}

/// Settings for an email run beyond the traffic model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmailScenario {
    pub model: EmailTrafficModel,
    pub with_history: bool,
    pub seed: u64,
    /// Fixed domain list; model-derived ranks when unset.
    pub domains: Option<Vec<Domain>>,
    /// Rank 1 is the sender's own organisation and is normally left out.
    pub include_rank_one: bool,
}

impl EmailScenario {
    pub fn new(model: EmailTrafficModel, with_history: bool, seed: u64) -> Self {
        Self { model, with_history, seed, domains: None, include_rank_one: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmailOutcome {
    pub rows: Vec<EmailRow>,
    /// `(rank, first day at full coverage)` for every reported domain.
    pub completion: Vec<(u32, Option<u64>)>,
}

impl EmailOutcome {
    pub fn completion_day(&self, rank: u32) -> Option<u64> {
        self.completion.iter().find(|(r, _)| *r == rank).and_then(|(_, d)| *d)
    }

    pub fn coverage_on(&self, rank: u32, day: u64) -> Option<f64> {
        self.rows.iter().find(|r| r.rank == rank && r.day == day).map(|r| r.coverage)
    }

    pub fn final_coverage(&self, rank: u32) -> Option<f64> {
        self.rows.iter().rev().find(|r| r.rank == rank).map(|r| r.coverage)
    }
}

pub fn run_scenario(mut repo: Repository, scenario: &EmailScenario, days: u64) -> Result<EmailOutcome, EmailError> {
    if days == 0 {
        return Err(EmailError::Invalid { field: "days", reason: "must be at least 1".into() });
    }
    let domains = match &scenario.domains {
        Some(d) => d.clone(),
        None => scenario.model.domains()?,
    };
    let mut state = EmailSimState::new(&scenario.model, domains, scenario.with_history, scenario.seed)?;
    let keep = |rank: u32| scenario.include_rank_one || rank != 1;
    let mut rows = Vec::with_capacity(days as usize * state.domains.len());
    for _ in 0..days {
        repo.advance_day()?;
        rows.extend(state.step_day(&repo).into_iter().filter(|r| keep(r.rank)));
    }
    let completion = state
        .domains
        .iter()
        .filter(|d| keep(d.rank()))
        .map(|d| (d.rank(), d.first_complete_day()))
        .collect();
    Ok(EmailOutcome { rows, completion })
}
