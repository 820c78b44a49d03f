use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EmailError;

/// The ranked-domain table covers this many days of outbound mail.
pub const FIXTURE_PERIOD_DAYS: f64 = 30.0;

const BUNDLED_TABLE: &str = include_str!("../../fixtures/top_domains.csv");

/// A receiving domain and its outbound email volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub rank: u32,
    pub name: Option<String>,
    pub daily_emails: f64,
}

#[derive(Debug, Deserialize)]
struct FixtureRow {
    rank: u32,
    emails: f64,
    domain: String,
}

/// Parses `rank,emails,domain` lines. `emails` is the total over
/// `period_days`; the result holds per-day volumes. A header line is
/// optional.
pub fn parse_domain_fixture(text: &str, period_days: f64) -> Result<Vec<Domain>, EmailError> {
    if !(period_days > 0.0) {
        return Err(EmailError::Invalid { field: "period_days", reason: "must be positive".into() });
    }
    let has_header = text.lines().next().is_some_and(|l| l.trim_start().to_ascii_lowercase().starts_with("rank"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out: Vec<Domain> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let record = row.map_err(|e| EmailError::Fixture { line: i as u64 + 1, reason: e.to_string() })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && has_header {
            continue;
        }
        let row: FixtureRow =
            record.deserialize(None).map_err(|e| EmailError::Fixture { line, reason: e.to_string() })?;
        if row.rank == 0 {
            return Err(EmailError::Fixture { line, reason: "rank must be at least 1".into() });
        }
        if !(row.emails >= 0.0) {
            return Err(EmailError::Fixture { line, reason: "email count must be non-negative".into() });
        }
        if out.iter().any(|d| d.rank == row.rank) {
            return Err(EmailError::Fixture { line, reason: format!("duplicate rank {}", row.rank) });
        }
        out.push(Domain { rank: row.rank, name: Some(row.domain), daily_emails: row.emails / period_days });
    }
    out.sort_by_key(|d| d.rank);
    Ok(out)
}

pub fn load_domain_fixture(path: &Path, period_days: f64) -> Result<Vec<Domain>, EmailError> {
    parse_domain_fixture(&std::fs::read_to_string(path)?, period_days)
}

/// The observed top-50 receiving domains over a 30-day window.
pub fn builtin_domain_table() -> Vec<Domain> {
    parse_domain_fixture(BUNDLED_TABLE, FIXTURE_PERIOD_DAYS).expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_table() {
        let t = builtin_domain_table();
        assert_eq!(t.len(), 50);
        assert_eq!(t[0].name.as_deref(), Some("ODU.EDU"));
        assert!((t[0].daily_emails - 220_582.0 / 30.0).abs() < 1e-9);
        assert_eq!(t[2].name.as_deref(), Some("GMAIL.COM"));
        assert_eq!(t[49].rank, 50);
        assert!(t.windows(2).all(|w| w[0].daily_emails >= w[1].daily_emails));
    }

    #[test]
    fn headerless_and_errors() {
        let d = parse_domain_fixture("2,60,A.COM\n1,90,B.ORG\n", 30.0).unwrap();
        assert_eq!(d[0].rank, 1);
        assert_eq!(d[1].daily_emails, 2.0);
        let err = parse_domain_fixture("rank,emails,domain\n1,x,A\n", 30.0).unwrap_err();
        assert!(matches!(err, EmailError::Fixture { line: 2, .. }), "{err}");
        assert!(parse_domain_fixture("1,5,A\n1,6,B\n", 30.0).is_err());
        assert!(parse_domain_fixture("0,5,A\n", 30.0).is_err());
    }
}
