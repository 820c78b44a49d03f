use std::collections::VecDeque;

use super::{q_news, CycleProgram, NetworkProfile, NewsError, NewsReceiverPolicy, SenderPolicy, Transfer};
use crate::carry::DailyRate;
use crate::codec::encoded_size;
use crate::model::{DayDelta, Repository};
use crate::series::NewsRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Baseline,
    Change,
}

/// A run of consecutive manifest positions waiting to be posted.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Segment {
    next: usize,
    end: usize,
    kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    /// Posting a baseline; `done` counts baselines finished this period.
    Baseline { done: u32 },
    /// Nothing to snapshot yet; retry at the end of the day.
    Waiting { done: u32 },
    /// Asleep until the end of `until`.
    Sleeping { until: u64 },
    /// Asleep for good, forwarding changes.
    Draining,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct DayPosts {
    day: u64,
    records: Vec<u32>,
}

/// What happened on one simulated day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayReport {
    pub day: u64,
    pub posted: u64,
    pub expired: u64,
    pub records_on_server: u64,
    pub distinct_on_server: u64,
    pub total_posted: u64,
    pub skipped_oversize: u64,
}

/// Sender and server state for one news replication run.
///
/// Every addition or update is appended to a change log (the manifest). A
/// baseline posts the manifest as it stood when the baseline started; while
/// asleep with updates enabled, the sender posts whatever was appended after
/// the last baseline's snapshot.
#[derive(Debug, Clone)]
pub struct NewsSimState {
    pub day: u64,
    sender: SenderPolicy,
    receiver: NewsReceiverPolicy,
    program: CycleProgram,
    rate: DailyRate,
    manifest: Vec<u32>,
    queue: VecDeque<Segment>,
    snapshot_len: usize,
    phase: Phase,
    posted: VecDeque<DayPosts>,
    on_server: u64,
    copies: Vec<u32>,
    distinct: u64,
    total_posted: u64,
    skipped_oversize: u64,
    completion_days: Vec<u64>,
}

impl NewsSimState {
    pub fn new(
        repo: &Repository,
        sender: SenderPolicy,
        receiver: NewsReceiverPolicy,
        net: NetworkProfile,
    ) -> Result<Self, NewsError> {
        sender.validate()?;
        receiver.validate()?;
        let q = q_news(&repo.profile, &net, sender.transfer())?;
        let mut state = Self {
            day: repo.current_day,
            sender,
            receiver,
            program: sender.program(),
            rate: DailyRate::new(q),
            manifest: (0..repo.len() as u32).collect(),
            queue: VecDeque::new(),
            snapshot_len: 0,
            phase: Phase::Waiting { done: 0 },
            posted: VecDeque::new(),
            on_server: 0,
            copies: vec![0; repo.len()],
            distinct: 0,
            total_posted: 0,
            skipped_oversize: 0,
            completion_days: Vec::new(),
        };
        state.start_baseline(0);
        Ok(state)
    }

    /// Records postable per day (real-valued).
    pub fn rate(&self) -> f64 {
        self.rate.rate()
    }

    /// Posts currently held by the server.
    pub fn records_on_server(&self) -> u64 {
        self.on_server
    }

    /// Distinct records with at least one live post.
    pub fn distinct_on_server(&self) -> u64 {
        self.distinct
    }

    pub fn total_posted(&self) -> u64 {
        self.total_posted
    }

    pub fn baselines_completed(&self) -> u64 {
        self.completion_days.len() as u64
    }

    /// Days on which baselines finished, in order.
    pub fn completion_days(&self) -> &[u64] {
        &self.completion_days
    }

    pub fn skipped_oversize(&self) -> u64 {
        self.skipped_oversize
    }

    /// Records waiting to be posted.
    pub fn queue_len(&self) -> usize {
        self.queue.iter().map(|s| s.end - s.next).sum()
    }

    fn start_baseline(&mut self, done: u32) {
        if self.manifest.is_empty() {
            self.phase = Phase::Waiting { done };
            return;
        }
        self.snapshot_len = self.manifest.len();
        self.queue.push_back(Segment { next: 0, end: self.snapshot_len, kind: Kind::Baseline });
        self.phase = Phase::Baseline { done };
    }

    fn queue_changes(&mut self, from: usize) {
        let end = self.manifest.len();
        if from >= end {
            return;
        }
        if let Some(last) = self.queue.back_mut() {
            if last.kind == Kind::Change && last.end == from {
                last.end = end;
                return;
            }
        }
        self.queue.push_back(Segment { next: from, end, kind: Kind::Change });
    }

    /// Returns true when another baseline starts right away.
    fn baseline_finished(&mut self, day: u64) -> bool {
        self.completion_days.push(day);
        let Phase::Baseline { done } = self.phase else { unreachable!("baseline finished outside baseline phase") };
        let done = done + 1;
        let more_in_period = self.program.baselines_per_period.is_none_or(|m| done < m);
        if more_in_period {
            self.start_baseline(done);
            return true;
        }
        match self.program.sleep_days {
            Some(0) => {
                self.start_baseline(0);
                true
            }
            sleep => {
                if self.program.drain_changes {
                    self.queue_changes(self.snapshot_len);
                }
                self.phase = match sleep {
                    Some(s) => Phase::Sleeping { until: day + s },
                    None => Phase::Draining,
                };
                false
            }
        }
    }

    fn oversize(&self, repo: &Repository, record: u32) -> bool {
        let Some(limit) = self.receiver.max_article_size else { return false };
        let wire = match self.sender.transfer() {
            Transfer::FullContent => encoded_size(repo.records[record as usize].size),
            Transfer::ByReference { metadata_size } => metadata_size,
        };
        wire > limit
    }

    /// Advances one day: applies `delta`, posts up to the day's budget,
    /// expires old posts, then moves the cycle along.
    pub fn step_day(&mut self, repo: &Repository, delta: &DayDelta) -> Result<DayReport, NewsError> {
        let day = self.day + 1;
        if delta.day != day {
            return Err(NewsError::DayMismatch { expected: day, got: delta.day });
        }
        self.day = day;

        // 1. changes join the manifest; forwarded right away when draining
        let before = self.manifest.len();
        self.manifest.extend(delta.added.clone().map(|i| i as u32));
        self.manifest.extend(delta.updated.iter().map(|&i| i as u32));
        if self.copies.len() < repo.len() {
            self.copies.resize(repo.len(), 0);
        }
        let forwarding = match self.phase {
            Phase::Draining => true,
            Phase::Sleeping { .. } => self.program.drain_changes,
            _ => false,
        };
        if forwarding {
            self.queue_changes(before);
        }

        // 2. post
        let mut budget = self.rate.on_day(day);
        let unbounded = self.rate.is_unbounded();
        let mut today = Vec::new();
        let skipped_before = self.skipped_oversize;
        while budget > 0 {
            let Some(seg) = self.queue.front_mut() else { break };
            let record = self.manifest[seg.next];
            seg.next += 1;
            let exhausted = seg.next == seg.end;
            let kind = seg.kind;
            if self.oversize(repo, record) {
                self.skipped_oversize += 1;
            } else {
                today.push(record);
                budget -= 1;
            }
            if exhausted {
                self.queue.pop_front();
                // with unlimited bandwidth one baseline per day is the most
                // that makes sense
                if kind == Kind::Baseline && self.baseline_finished(day) && unbounded {
                    break;
                }
            }
        }
        let posted = today.len() as u64;
        for &r in &today {
            let c = &mut self.copies[r as usize];
            if *c == 0 {
                self.distinct += 1;
            }
            *c += 1;
        }
        self.on_server += posted;
        self.total_posted += posted;
        self.posted.push_back(DayPosts { day, records: today });

        // 3. expire
        let mut expired = 0;
        while let Some(front) = self.posted.front() {
            if front.day + self.receiver.n_ttl > day {
                break;
            }
            let batch = self.posted.pop_front().expect("front exists");
            for r in batch.records {
                let c = &mut self.copies[r as usize];
                *c -= 1;
                if *c == 0 {
                    self.distinct -= 1;
                }
                expired += 1;
            }
        }
        self.on_server -= expired;

        // 4. cycle
        match self.phase {
            Phase::Sleeping { until } if day >= until => {
                self.queue.clear();
                self.start_baseline(0);
            }
            Phase::Waiting { done } => self.start_baseline(done),
            _ => {}
        }

        Ok(DayReport {
            day,
            posted,
            expired,
            records_on_server: self.on_server,
            distinct_on_server: self.distinct,
            total_posted: self.total_posted,
            skipped_oversize: self.skipped_oversize - skipped_before,
        })
    }
}

/// Result of a full news run.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsOutcome {
    pub rows: Vec<NewsRow>,
    pub rate: f64,
    pub skipped_oversize: u64,
    pub baselines_completed: u64,
    pub completion_days: Vec<u64>,
}

impl NewsOutcome {
    pub fn final_row(&self) -> Option<&NewsRow> {
        self.rows.last()
    }
}

/// Runs `days` days, advancing `repo` alongside the sender.
pub fn run_scenario(
    mut repo: Repository,
    sender: SenderPolicy,
    receiver: NewsReceiverPolicy,
    net: NetworkProfile,
    days: u64,
) -> Result<NewsOutcome, NewsError> {
    if days == 0 {
        return Err(NewsError::Invalid { field: "days", reason: "must be at least 1".into() });
    }
    let mut state = NewsSimState::new(&repo, sender, receiver, net)?;
    let mut rows = Vec::with_capacity(days as usize);
    for _ in 0..days {
        let delta = repo.advance_day()?;
        let r = state.step_day(&repo, &delta)?;
        let size = repo.len() as u64;
        let frac = |n: u64| if size == 0 { 0.0 } else { n as f64 / size as f64 };
        rows.push(NewsRow {
            day: r.day,
            posted_today: r.posted,
            expired_today: r.expired,
            records_on_server: r.records_on_server,
            repo_size: size,
            coverage_fraction: frac(r.distinct_on_server),
            volume_copies: frac(r.records_on_server),
            total_posted: r.total_posted,
        });
    }
    Ok(NewsOutcome {
        rows,
        rate: state.rate(),
        skipped_oversize: state.skipped_oversize(),
        baselines_completed: state.baselines_completed(),
        completion_days: state.completion_days().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_repository, RepositoryProfile};
    use proptest::prelude::*;

    /// Bandwidth giving exactly `q` full-content records per day.
    fn net_for(q: f64, size: u64) -> NetworkProfile {
        NetworkProfile::new(q * 4.0 * size as f64 / 3.0, 0.0)
    }

    fn run(r: u64, a: u64, u: u64, q: f64, ttl: u64, sender: SenderPolicy, days: u64) -> NewsOutcome {
        let repo = make_repository(RepositoryProfile::new(r, 300, a, u), 4).unwrap();
        run_scenario(repo, sender, NewsReceiverPolicy::new(ttl), net_for(q, 300), days).unwrap()
    }

    #[test]
    fn empty_repository_posts_nothing() {
        let out = run(0, 0, 0, 10.0, 5, SenderPolicy::continuous(), 1);
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].posted_today, 0);
        assert_eq!(out.rows[0].records_on_server, 0);
    }

    #[test]
    fn empty_repository_waits_for_records() {
        let out = run(0, 3, 0, 10.0, 50, SenderPolicy::single(), 10);
        // first records appear on day 1 and are baselined from day 2
        assert_eq!(out.rows[0].posted_today, 0);
        assert_eq!(out.rows[1].posted_today, 6);
        assert_eq!(out.final_row().unwrap().total_posted, 30);
    }

    #[test]
    fn no_expiry_before_ttl() {
        let out = run(1000, 0, 0, 7.0, 100, SenderPolicy::continuous(), 50);
        for row in &out.rows {
            assert_eq!(row.records_on_server, 7 * row.day);
        }
    }

    #[test]
    fn continuous_steady_state() {
        let out = run(1000, 5, 5, 40.0, 10, SenderPolicy::continuous(), 200);
        assert!(out.rows[20..].iter().all(|r| r.records_on_server == 400));
    }

    #[test]
    fn single_steady_state() {
        let out = run(1000, 3, 4, 100.0, 10, SenderPolicy::single(), 200);
        assert!(out.rows[30..].iter().all(|r| r.records_on_server == 70), "{:?}", out.final_row());
        assert_eq!(out.baselines_completed, 1);
    }

    #[test]
    fn single_without_changes_decays_to_nothing() {
        let out = run(100, 0, 0, 50.0, 5, SenderPolicy::single(), 20);
        assert_eq!(out.rows[1].coverage_fraction, 1.0);
        assert_eq!(out.final_row().unwrap().records_on_server, 0);
    }

    #[test]
    fn infeasible_single_baseline_never_complete() {
        // t_news = 1000 / 30 > ttl = 20
        let out = run(1000, 0, 0, 30.0, 20, SenderPolicy::single(), 100);
        assert!(out.rows.iter().all(|r| r.records_on_server < r.repo_size && r.coverage_fraction < 1.0));
    }

    #[test]
    fn cyclic_sleeps_between_baseline_pairs() {
        let mut sender = SenderPolicy::cyclic(5);
        sender.sleep_updates = false;
        let out = run(100, 0, 0, 50.0, 30, sender, 20);
        let posted: Vec<u64> = out.rows.iter().map(|r| r.posted_today).collect();
        // two baselines over days 1-4, asleep 5-9, next pair from day 10
        assert_eq!(&posted[..10], &[50, 50, 50, 50, 0, 0, 0, 0, 0, 50]);
    }

    #[test]
    fn sleeping_forwards_changes_when_enabled() {
        let out = run(100, 2, 1, 50.0, 30, SenderPolicy::cyclic(5), 12);
        // the second baseline snapshots 106 records on day 2 and ends on
        // day 5; leftover budget forwards the 9 changes since the snapshot
        assert_eq!(out.rows[4].posted_today, 6 + 9);
        let asleep: Vec<u64> = out.rows[5..11].iter().map(|r| r.posted_today).collect();
        assert_eq!(asleep, vec![3, 3, 3, 3, 3, 50]);
    }

    #[test]
    fn oversize_records_are_skipped() {
        let repo = make_repository(RepositoryProfile::new(200, 1000, 0, 0), 4).unwrap();
        let limit = encoded_size(1000);
        let expected_skips = repo.records.iter().filter(|r| encoded_size(r.size) > limit).count() as u64;
        assert!(expected_skips > 0);
        let receiver = NewsReceiverPolicy { n_ttl: 10, max_article_size: Some(limit) };
        let out = run_scenario(repo, SenderPolicy::single(), receiver, net_for(1000.0, 1000), 3).unwrap();
        assert_eq!(out.skipped_oversize, expected_skips);
        assert_eq!(out.rows[0].posted_today, 200 - expected_skips);
    }

    #[test]
    fn infinite_bandwidth_posts_one_baseline_per_day() {
        let repo = make_repository(RepositoryProfile::new(50, 10, 0, 0), 1).unwrap();
        let net = NetworkProfile::new(f64::INFINITY, 0.0);
        let out = run_scenario(repo, SenderPolicy::continuous(), NewsReceiverPolicy::new(3), net, 5).unwrap();
        assert!(out.rows.iter().all(|r| r.posted_today == 50));
        assert_eq!(out.final_row().unwrap().records_on_server, 150);
    }

    #[test]
    fn day_mismatch_is_rejected() {
        let repo = make_repository(RepositoryProfile::new(5, 10, 0, 0), 1).unwrap();
        let mut s = NewsSimState::new(&repo, SenderPolicy::single(), NewsReceiverPolicy::new(3), net_for(1.0, 10)).unwrap();
        let delta = DayDelta { day: 7, ..Default::default() };
        assert_eq!(s.step_day(&repo, &delta).unwrap_err(), NewsError::DayMismatch { expected: 1, got: 7 });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn server_window_matches_cumulative_posts(
            r in 0u64..300, a in 0u64..6, u in 0u64..6, q in 0.5f64..120.0,
            ttl in 1u64..25, mode in 0usize..3, sleep in 0u64..8, days in 1u64..150,
        ) {
            let sender = match mode {
                0 => SenderPolicy::single(),
                1 => SenderPolicy::cyclic(sleep),
                _ => SenderPolicy::continuous(),
            };
            let u = u.min(r);
            let out = run(r, a, u, q, ttl, sender, days);
            let tr = |d: u64| if d == 0 { 0 } else { out.rows[d as usize - 1].total_posted };
            let rate = DailyRate::new(out.rate);
            for row in &out.rows {
                prop_assert_eq!(row.records_on_server, tr(row.day) - tr(row.day.saturating_sub(ttl)));
                prop_assert!(row.posted_today <= rate.on_day(row.day));
                prop_assert!(row.coverage_fraction <= 1.0);
            }
        }

        #[test]
        fn cyclic_without_sleep_matches_continuous(
            r in 1u64..200, a in 0u64..5, q in 1.0f64..60.0, ttl in 1u64..20, days in 1u64..100,
        ) {
            let c = run(r, a, 0, q, ttl, SenderPolicy::cyclic(0), days);
            let k = run(r, a, 0, q, ttl, SenderPolicy::continuous(), days);
            prop_assert_eq!(c.rows, k.rows);
        }

        #[test]
        fn more_bandwidth_never_posts_less(
            r in 1u64..200, a in 0u64..5, q in 1.0f64..60.0, extra in 0.0f64..40.0, ttl in 1u64..20,
            days in 1u64..100, single in any::<bool>(),
        ) {
            let sender = if single { SenderPolicy::single() } else { SenderPolicy::continuous() };
            let lo = run(r, a, 0, q, ttl, sender, days);
            let hi = run(r, a, 0, q + extra, ttl, sender, days);
            for (l, h) in lo.rows.iter().zip(&hi.rows) {
                prop_assert!(h.total_posted >= l.total_posted);
            }
        }
    }
}
