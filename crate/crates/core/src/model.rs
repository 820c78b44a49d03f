//! The repository being replicated and its day-by-day evolution.

use std::ops::Range;
use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::seeds::{sub_seed, Stream};

pub const DEFAULT_BASE_URL: &str = "http://repository.example.org/";

const EXTENSIONS: [&str; 5] = ["html", "pdf", "gif", "jpg", "png"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid repository profile: `{field}` {reason}")]
    InvalidProfile { field: &'static str, reason: String },
    #[error("day {day}: {updates} updates requested but only {records} records exist")]
    UpdatesExceedRecords { day: u64, updates: u64, records: u64 },
}

/// Size and change rates of a repository.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryProfile {
    /// Initial number of records.
    pub record_count: u64,
    /// Mean record size in bytes.
    pub mean_record_size: u64,
    /// Records added per day.
    pub adds_per_day: u64,
    /// Existing records updated per day.
    pub updates_per_day: u64,
}

impl RepositoryProfile {
    pub fn new(record_count: u64, mean_record_size: u64, adds_per_day: u64, updates_per_day: u64) -> Self {
        Self { record_count, mean_record_size, adds_per_day, updates_per_day }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.mean_record_size == 0 {
            return Err(ModelError::InvalidProfile {
                field: "mean_record_size",
                reason: "must be greater than zero".into(),
            });
        }
        Ok(())
    }

    /// Changes (additions plus updates) per day.
    pub fn changes_per_day(&self) -> u64 {
        self.adds_per_day + self.updates_per_day
    }

    /// Record count after `day` days.
    pub fn size_on_day(&self, day: u64) -> u64 {
        self.record_count + day * self.adds_per_day
    }

    /// Inclusive bounds of the record-size distribution.
    pub fn size_bounds(&self) -> (u64, u64) {
        let half = self.mean_record_size / 2;
        (self.mean_record_size - half, self.mean_record_size + half)
    }

    /// Allowed deviation of the summed size of `n` records from
    /// `n * mean_record_size` (six standard deviations of the uniform draw).
    pub fn size_sum_tolerance(&self, n: u64) -> f64 {
        let (lo, hi) = self.size_bounds();
        let width = (hi - lo + 1) as f64;
        let sigma = ((width * width - 1.0) / 12.0).sqrt();
        6.0 * sigma * (n as f64).sqrt()
    }
}

/// Where a record's bytes come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordContent {
    /// Pseudo-random filler regenerated from a seed on demand.
    Synthetic { seed: u64 },
    /// Bytes supplied by the caller, e.g. a file read from disk.
    Bytes(Arc<[u8]>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub identifier: String,
    pub size: u64,
    pub content: RecordContent,
    pub created_day: u64,
    pub last_modified_day: u64,
}

impl Record {
    /// A record backed by explicit bytes.
    pub fn from_bytes(identifier: impl Into<String>, bytes: impl Into<Arc<[u8]>>, day: u64) -> Self {
        let bytes = bytes.into();
        Self {
            identifier: identifier.into(),
            size: bytes.len() as u64,
            content: RecordContent::Bytes(bytes),
            created_day: day,
            last_modified_day: day,
        }
    }

    /// The record's bytes; always exactly `size` long.
    pub fn content(&self) -> Vec<u8> {
        match &self.content {
            RecordContent::Bytes(b) => b.to_vec(),
            RecordContent::Synthetic { seed } => {
                let mut out = vec![0u8; self.size as usize];
                ChaCha8Rng::seed_from_u64(*seed).fill_bytes(&mut out);
                out
            }
        }
    }
}

/// Generation options that are not part of the replication profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepositoryOptions {
    pub base_url: String,
    /// Redraw a record's size when it is updated.
    pub resize_on_update: bool,
}

impl Default for RepositoryOptions {
    fn default() -> Self {
        Self { base_url: DEFAULT_BASE_URL.to_string(), resize_on_update: false }
    }
}

/// What changed on one simulated day. Indices refer to
/// [`Repository::records`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DayDelta {
    pub day: u64,
    pub added: Range<usize>,
    pub updated: Vec<usize>,
}

impl DayDelta {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.updated.is_empty()
    }

    pub fn added_records<'a>(&self, repo: &'a Repository) -> &'a [Record] {
        &repo.records[self.added.clone()]
    }

    pub fn updated_identifiers<'a>(&self, repo: &'a Repository) -> Vec<&'a str> {
        self.updated.iter().map(|&i| repo.records[i].identifier.as_str()).collect()
    }

    pub fn added_bytes(&self, repo: &Repository) -> u64 {
        self.added_records(repo).iter().map(|r| r.size).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repository {
    pub profile: RepositoryProfile,
    pub records: Vec<Record>,
    pub current_day: u64,
    seed: u64,
    options: RepositoryOptions,
}

/// Builds a repository of `profile.record_count` synthetic records.
pub fn make_repository(profile: RepositoryProfile, seed: u64) -> Result<Repository, ModelError> {
    Repository::generate(profile, seed, RepositoryOptions::default())
}

impl Repository {
    pub fn generate(profile: RepositoryProfile, seed: u64, options: RepositoryOptions) -> Result<Self, ModelError> {
        profile.validate()?;
        if options.base_url.is_empty() {
            return Err(ModelError::InvalidProfile { field: "base_url", reason: "must not be empty".into() });
        }
        let mut repo = Self { profile, records: Vec::new(), current_day: 0, seed, options };
        repo.records.reserve(profile.record_count as usize);
        for _ in 0..profile.record_count {
            repo.push_record(0);
        }
        Ok(repo)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn base_url(&self) -> &str {
        &self.options.base_url
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_bytes(&self) -> u64 {
        self.records.iter().map(|r| r.size).sum()
    }

    fn record_size(&self, index: u64, version: u64) -> u64 {
        let (lo, hi) = self.profile.size_bounds();
        let stream = if version == 0 { Stream::RecordSizes } else { Stream::Resize };
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(self.seed, stream, index ^ (version << 40)));
        rng.random_range(lo..=hi)
    }

    fn identifier(&self, index: u64) -> String {
        let base = &self.options.base_url;
        let sep = if base.ends_with('/') { "" } else { "/" };
        let ext = EXTENSIONS[(index % EXTENSIONS.len() as u64) as usize];
        format!("{base}{sep}{}/rec{index:07}.{ext}", index / 1000)
    }

    fn push_record(&mut self, day: u64) {
        let index = self.records.len() as u64;
        let record = Record {
            identifier: self.identifier(index),
            size: self.record_size(index, 0),
            content: RecordContent::Synthetic { seed: sub_seed(self.seed, Stream::Content, index) },
            created_day: day,
            last_modified_day: day,
        };
        self.records.push(record);
    }

    /// Advances one day: picks `updates_per_day` distinct existing records to
    /// update, then appends `adds_per_day` new records.
    pub fn advance_day(&mut self) -> Result<DayDelta, ModelError> {
        let day = self.current_day + 1;
        let existing = self.records.len() as u64;
        let updates = self.profile.updates_per_day;
        if updates > existing {
            return Err(ModelError::UpdatesExceedRecords { day, updates, records: existing });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(self.seed, Stream::DayUpdates, day));
        let mut updated: Vec<usize> = index::sample(&mut rng, existing as usize, updates as usize).into_vec();
        updated.sort_unstable();
        for &i in &updated {
            let new_seed = rng.next_u64();
            let new_size = self.options.resize_on_update.then(|| self.record_size(i as u64, day));
            let record = &mut self.records[i];
            record.last_modified_day = day;
            if let RecordContent::Synthetic { seed } = &mut record.content {
                *seed = new_seed;
                if let Some(size) = new_size {
                    record.size = size;
                }
            }
        }
        let start = self.records.len();
        for _ in 0..self.profile.adds_per_day {
            self.push_record(day);
        }
        self.current_day = day;
        Ok(DayDelta { day, added: start..self.records.len(), updated })
    }
}
