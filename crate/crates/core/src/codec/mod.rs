//! Archival message construction and extraction.
//!
//! Every archived record travels as a set of human-readable X-headers that
//! describe where it was harvested from, plus a base64 body. The body is an
//! OAI-PMH `GetRecord` response whose DIDL resource carries the record bytes
//! (see [`envelope`]). Two carriers are supported: a standalone news article
//! ([`news`]) and an extra MIME part appended to an existing outbound email
//! ([`email`]).

pub mod base64;
pub mod email;
pub mod envelope;
pub mod headers;
pub mod news;

use chrono::{DateTime, Utc};

pub use self::base64::{decode_base64_body, encode_base64_body, encoded_size};
pub use self::email::{advertise_email, encode_email_attachment, EmailMessage, MessageBody, MimePart};
pub use self::envelope::Payload;
pub use self::headers::{split_long_header, Header};
pub use self::news::{encode_news_article, NewsArticle, NewsOptions};

use crate::model::Record;

pub const DEFAULT_HEADER_LIMIT: usize = 72;
pub const DEFAULT_BODY_LIMIT: usize = 76;

pub const VERB_GET_RECORD: &str = "GetRecord";
pub const METADATA_PREFIX: &str = "oai_didl";
pub const HTTP_OK: &str = "HTTP/1.1 200 OK";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodecError {
    #[error("identifier {0:?} is not ASCII")]
    NonAscii(String),
    #[error("{field} {value:?} is not a valid URL")]
    InvalidUrl { field: &'static str, value: String },
    #[error("base URL must not be empty")]
    EmptyBaseUrl,
    #[error("newsgroup {0:?} does not follow the dotted naming convention")]
    InvalidNewsgroup(String),
    #[error("article of {size} bytes exceeds the {limit}-byte limit")]
    Oversize { size: u64, limit: u64 },
    #[error("message already carries an archive attachment")]
    AlreadyArchived,
    #[error("invalid base64 in {part}: {reason}")]
    Base64 { part: String, reason: String },
    #[error("missing X-header {0}")]
    MissingXHeader(&'static str),
    #[error("malformed GetRecord envelope: {0}")]
    Envelope(String),
    #[error("malformed message: {0}")]
    Malformed(String),
}

/// Line-length limits applied when rendering messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineLimits {
    /// Maximum header line length, name included.
    pub header: usize,
    /// Base64 body line width.
    pub body: usize,
}

impl Default for LineLimits {
    fn default() -> Self {
        Self { header: DEFAULT_HEADER_LIMIT, body: DEFAULT_BODY_LIMIT }
    }
}

/// Provenance headers attached to every archival message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XHeaderSet {
    pub harvest_time: String,
    pub base_url: String,
    pub verb: String,
    pub metadata_prefix: String,
    pub identifier: String,
    pub source_url: String,
    pub http_header: String,
}

impl XHeaderSet {
    pub const NAMES: [&'static str; 7] = [
        "X-Harvest_Time",
        "X-baseURL",
        "X-OAI-PMH_verb",
        "X-OAI-PMH_metadataPrefix",
        "X-OAI-PMH_Identifier",
        "X-sourceURL",
        "X-HTTP-Header",
    ];

    fn values(&self) -> [&str; 7] {
        [
            &self.harvest_time,
            &self.base_url,
            &self.verb,
            &self.metadata_prefix,
            &self.identifier,
            &self.source_url,
            &self.http_header,
        ]
    }

    /// Header lines in canonical order, long values split into `-1`, `-2`, ...
    /// continuation headers.
    pub fn to_headers(&self, limit: usize) -> Vec<Header> {
        Self::NAMES
            .iter()
            .zip(self.values())
            .flat_map(|(name, value)| split_long_header(name, value, limit))
            .map(|(name, value)| Header::new(name, value))
            .collect()
    }

    /// Rendered header block with CRLF line endings.
    pub fn render(&self, limit: usize) -> String {
        self.to_headers(limit).iter().map(|h| h.render("\r\n")).collect()
    }

    /// Collects the X-headers out of a header list, rejoining continuations.
    /// Other headers are ignored.
    pub fn from_headers(headers: &[Header]) -> Result<Self, CodecError> {
        let joined = headers::rejoin_headers(headers);
        let get = |name: &'static str| -> Result<String, CodecError> {
            joined
                .iter()
                .find(|(n, _)| n.eq_ignore_ascii_case(name))
                .map(|(_, v)| v.clone())
                .ok_or(CodecError::MissingXHeader(name))
        };
        Ok(Self {
            harvest_time: get("X-Harvest_Time")?,
            base_url: get("X-baseURL")?,
            verb: get("X-OAI-PMH_verb")?,
            metadata_prefix: get("X-OAI-PMH_metadataPrefix")?,
            identifier: get("X-OAI-PMH_Identifier")?,
            source_url: get("X-sourceURL")?,
            http_header: get("X-HTTP-Header")?,
        })
    }

    /// True when any header in the list is one of ours.
    pub fn present_in(headers: &[Header]) -> bool {
        headers.iter().any(|h| h.name.eq_ignore_ascii_case("X-OAI-PMH_Identifier"))
    }
}

/// Formats a harvest timestamp as ISO-8601 UTC.
pub fn format_harvest_time(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Builds the provenance headers for `record` harvested from `base_url`.
pub fn build_xheaders(record: &Record, base_url: &str, harvest_time: DateTime<Utc>) -> Result<XHeaderSet, CodecError> {
    if base_url.is_empty() {
        return Err(CodecError::EmptyBaseUrl);
    }
    if !record.identifier.is_ascii() {
        return Err(CodecError::NonAscii(record.identifier.clone()));
    }
    if !base_url.is_ascii() {
        return Err(CodecError::NonAscii(base_url.to_string()));
    }
    url::Url::parse(&record.identifier)
        .map_err(|_| CodecError::InvalidUrl { field: "identifier", value: record.identifier.clone() })?;
    url::Url::parse(base_url).map_err(|_| CodecError::InvalidUrl { field: "base URL", value: base_url.to_string() })?;
    let source_url = format!(
        "{base_url}?verb={VERB_GET_RECORD}&identifier={}&metadataPrefix={METADATA_PREFIX}",
        record.identifier
    );
    Ok(XHeaderSet {
        harvest_time: format_harvest_time(harvest_time),
        base_url: base_url.to_string(),
        verb: VERB_GET_RECORD.to_string(),
        metadata_prefix: METADATA_PREFIX.to_string(),
        identifier: record.identifier.clone(),
        source_url,
        http_header: HTTP_OK.to_string(),
    })
}

/// Either carrier shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArchivalMessage {
    News(NewsArticle),
    Email(EmailMessage),
}

/// Recovers the provenance headers and the exact record bytes.
///
/// A message with X-headers but no payload (by-reference advertising) yields
/// an empty payload carrying the identifier from the headers.
pub fn extract_record(message: &ArchivalMessage) -> Result<(XHeaderSet, Payload), CodecError> {
    match message {
        ArchivalMessage::News(article) => news::extract(article),
        ArchivalMessage::Email(mail) => email::extract(mail),
    }
}

/// Decodes a base64 body into a payload; an empty body is an empty payload.
fn payload_from_body(body: &str, part: &str, xh: &XHeaderSet) -> Result<Payload, CodecError> {
    if body.trim().is_empty() {
        return Ok(Payload { identifier: xh.identifier.clone(), content: Vec::new() });
    }
    let bytes = decode_base64_body(body)
        .map_err(|reason| CodecError::Base64 { part: part.to_string(), reason })?;
    Payload::from_envelope(&bytes)
}

/// Encodes a record as a base64 body; empty records produce an empty body.
fn body_for_record(record: &Record, xh: &XHeaderSet, width: usize) -> Vec<String> {
    if record.size == 0 {
        return Vec::new();
    }
    let payload = Payload { identifier: record.identifier.clone(), content: record.content() };
    base64::wrap(&payload.to_envelope(xh), width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn sample_record() -> Record {
        Record::from_bytes("http://beatitude.cs.odu.edu:8080/1000/pg1000-1.pdf", b"%PDF-1.4 sample".to_vec(), 0)
    }

    pub(crate) fn sample_time() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2006, 2, 15, 18, 34, 51).unwrap()
    }

    #[test]
    fn xheaders_match_table_rows() {
        let xh = build_xheaders(&sample_record(), "http://beatitude.cs.odu.edu:8080/modoai/", sample_time()).unwrap();
        assert_eq!(xh.harvest_time, "2006-02-15T18:34:51Z");
        assert_eq!(xh.verb, "GetRecord");
        assert_eq!(xh.metadata_prefix, "oai_didl");
        assert_eq!(xh.identifier, "http://beatitude.cs.odu.edu:8080/1000/pg1000-1.pdf");
        assert_eq!(
            xh.source_url,
            "http://beatitude.cs.odu.edu:8080/modoai/?verb=GetRecord\
             &identifier=http://beatitude.cs.odu.edu:8080/1000/pg1000-1.pdf&metadataPrefix=oai_didl"
        );
        assert_eq!(xh.http_header, "HTTP/1.1 200 OK");
        let block = xh.render(DEFAULT_HEADER_LIMIT);
        assert!(block.is_ascii());
        let names: Vec<&str> = block.lines().map(|l| l.split(':').next().unwrap()).collect();
        for n in XHeaderSet::NAMES {
            assert!(names.contains(&n), "{n} missing from {names:?}");
        }
        assert!(names.contains(&"X-sourceURL-1"));
    }

    #[test]
    fn empty_base_url_rejected() {
        assert_eq!(build_xheaders(&sample_record(), "", sample_time()), Err(CodecError::EmptyBaseUrl));
    }

    #[test]
    fn non_ascii_identifier_rejected() {
        let r = Record::from_bytes("http://example.org/caf\u{e9}.pdf", vec![1], 0);
        assert!(matches!(build_xheaders(&r, "http://example.org/", sample_time()), Err(CodecError::NonAscii(_))));
    }

    #[test]
    fn rendered_block_reparses() {
        let xh = build_xheaders(&sample_record(), "http://beatitude.cs.odu.edu:8080/modoai/", sample_time()).unwrap();
        for limit in [30, 50, 72, 200] {
            let headers = headers::parse_block(&xh.render(limit)).unwrap();
            assert_eq!(XHeaderSet::from_headers(&headers).unwrap(), xh);
        }
    }
}
