use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use walkdir::WalkDir;

use super::CliError;
use crate::codec::{
    build_xheaders, encode_email_attachment, encode_news_article, extract_record, ArchivalMessage, EmailMessage,
    LineLimits, NewsArticle, NewsOptions,
};
use crate::model::{Record, DEFAULT_BASE_URL};

const NEWSGROUP: &str = "archive.repository.replica";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CodecFormat {
    News,
    Email,
}

impl std::str::FromStr for CodecFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "news" | "nntp" => Ok(Self::News),
            "email" | "smtp" => Ok(Self::Email),
            _ => Err(CliError::invalid("format", format!("expected news or email, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripFailure {
    pub file: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundtripReport {
    pub format: CodecFormat,
    pub total: usize,
    pub intact: usize,
    pub failures: Vec<RoundtripFailure>,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.intact == self.total
    }
}

fn harvest_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2006, 5, 1, 12, 0, 0).single().expect("valid timestamp")
}

/// The identifier a corpus file is archived under.
fn identifier_for(relative: &Path) -> Result<String, CliError> {
    let rel: Vec<String> = relative.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    let base = url::Url::parse(DEFAULT_BASE_URL).expect("default base URL parses");
    let joined = base
        .join(&format!("corpus/{}", rel.join("/")))
        .map_err(|e| CliError::invalid("corpus", format!("{}: {e}", relative.display())))?;
    Ok(joined.to_string())
}

fn carrier(i: usize) -> EmailMessage {
    EmailMessage::text(
        "DigLib Mgr <dlmgr@repository.example.org>",
        "colleague@partner.example.net",
        "Re: weekly status",
        &format!("<status-{i}@repository.example.org>"),
        harvest_time(),
        "Notes from this week are below.\r\n\r\n-- \r\nDigital Library Manager\r\n",
    )
}

/// Encodes one file, parses the rendered message back and checks the bytes.
fn roundtrip_one(index: usize, relative: &Path, bytes: Vec<u8>, format: CodecFormat, out: Option<&Path>) -> Result<(), String> {
    let identifier = identifier_for(relative).map_err(|e| e.to_string())?;
    let record = Record::from_bytes(identifier, bytes, 0);
    let xh = build_xheaders(&record, DEFAULT_BASE_URL, harvest_time()).map_err(|e| e.to_string())?;
    let (text, ext) = match format {
        CodecFormat::News => {
            let opts = NewsOptions::new(harvest_time(), format!("<record-{index}@repository.example.org>"));
            let article = encode_news_article(&record, NEWSGROUP, &xh, &opts).map_err(|e| e.to_string())?;
            (article.render(), "news")
        }
        CodecFormat::Email => {
            let mail = encode_email_attachment(&carrier(index), &record, &xh, LineLimits::default()).map_err(|e| e.to_string())?;
            (mail.render(), "eml")
        }
    };
    if let Some(dir) = out {
        let name = format!("{index:05}.{ext}");
        std::fs::write(dir.join(name), &text).map_err(|e| e.to_string())?;
    }
    let parsed = match format {
        CodecFormat::News => ArchivalMessage::News(NewsArticle::parse(&text).map_err(|e| e.to_string())?),
        CodecFormat::Email => ArchivalMessage::Email(EmailMessage::parse(&text).map_err(|e| e.to_string())?),
    };
    let (back_xh, payload) = extract_record(&parsed).map_err(|e| e.to_string())?;
    if back_xh != xh {
        return Err("X-headers changed in transit".into());
    }
    if payload.identifier != record.identifier {
        return Err(format!("identifier came back as {:?}", payload.identifier));
    }
    if payload.content != record.content() {
        return Err(format!("content differs ({} bytes in, {} out)", record.size, payload.content.len()));
    }
    Ok(())
}

/// Files under `dir`, sorted, as paths relative to it.
fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::invalid("corpus", e.to_string()))?;
        if entry.file_type().is_file() {
            files.push(entry.path().strip_prefix(dir).expect("walk stays under root").to_path_buf());
        }
    }
    Ok(files)
}

/// Encodes every file under `corpus` in `format`, extracts it again and
/// compares bytes. Rendered messages go to `out` when given.
pub fn codec_roundtrip(corpus: &Path, format: CodecFormat, out: Option<&Path>) -> Result<RoundtripReport, CliError> {
    if !corpus.is_dir() {
        return Err(CliError::invalid("corpus", format!("{} is not a directory", corpus.display())));
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let files = corpus_files(corpus)?;
    let mut failures = Vec::new();
    for (i, rel) in files.iter().enumerate() {
        let bytes = std::fs::read(corpus.join(rel))?;
        if let Err(reason) = roundtrip_one(i, rel, bytes, format, out) {
            failures.push(RoundtripFailure { file: rel.clone(), reason });
        }
    }
    Ok(RoundtripReport { format, total: files.len(), intact: files.len() - failures.len(), failures })
}

const EXTENSIONS: [&str; 6] = ["pdf", "html", "xml", "gif", "jpg", "txt"];

/// Writes `count` pseudo-random files to `dir` with sizes spread
/// log-uniformly over `1..=max_size` bytes; the last file is exactly
/// `max_size`. Returns the paths written.
pub fn write_synthetic_corpus(dir: &Path, count: usize, max_size: u64, seed: u64) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = (max_size.max(1) as f64).ln();
    let mut written = Vec::with_capacity(count);
    for i in 0..count {
        let size = if i + 1 == count { max_size } else { rng.random_range(0.0..=top).exp().round() as u64 };
        let mut bytes = vec![0u8; size as usize];
        rng.fill_bytes(&mut bytes);
        let path = dir.join(format!("record-{:04}.{}", i + 1, EXTENSIONS[i % EXTENSIONS.len()]));
        std::fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
