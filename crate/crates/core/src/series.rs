//! Per-day simulation output and its CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewsRow {
    pub day: u64,
    pub posted_today: u64,
    pub expired_today: u64,
    pub records_on_server: u64,
    pub repo_size: u64,
    /// Distinct current records on the server over repository size.
    pub coverage_fraction: f64,
    /// Posts on the server over repository size.
    pub volume_copies: f64,
    #[serde(skip)]
    pub total_posted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmailRow {
    pub day: u64,
    pub rank: u32,
    pub emails_today: u64,
    pub records_attached: u64,
    pub unique_received: u64,
    pub coverage: f64,
    pub duplicates: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimTimeSeries {
    News(Vec<NewsRow>),
    Email(Vec<EmailRow>),
}

impl SimTimeSeries {
    pub fn len(&self) -> usize {
        match self {
            Self::News(r) => r.len(),
            Self::Email(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        match self {
            Self::News(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
            Self::Email(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}
