//! News articles: header block, blank line, base64 body.

use chrono::{DateTime, Utc};

use super::headers::{self, split_long_header, Header};
use super::{body_for_record, payload_from_body, CodecError, LineLimits, Payload, XHeaderSet};
use crate::model::Record;

/// Non-record inputs to article encoding. Date and Message-ID are supplied by
/// the caller so encoding stays deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsOptions {
    pub from: String,
    pub organization: Option<String>,
    pub date: DateTime<Utc>,
    pub message_id: String,
    pub limits: LineLimits,
    /// Receiver's article size limit in bytes, if any.
    pub max_article_size: Option<u64>,
    /// When false only the X-headers are sent (by-reference advertising).
    pub include_payload: bool,
}

impl NewsOptions {
    pub fn new(date: DateTime<Utc>, message_id: impl Into<String>) -> Self {
        Self {
            from: "DigLib Mgr <dlmgr@repository.example.org>".into(),
            organization: None,
            date,
            message_id: message_id.into(),
            limits: LineLimits::default(),
            max_article_size: None,
            include_payload: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsArticle {
    pub headers: Vec<Header>,
    pub body_lines: Vec<String>,
}

/// Usenet-style group name: at least two dot-separated components of
/// lowercase letters, digits, `+`, `-` or `_`.
pub fn validate_newsgroup(name: &str) -> Result<(), CodecError> {
    let parts: Vec<&str> = name.split('.').collect();
    let ok = parts.len() >= 2
        && parts.iter().all(|p| {
            !p.is_empty()
                && p.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || "+-_".contains(c))
        });
    if ok { Ok(()) } else { Err(CodecError::InvalidNewsgroup(name.to_string())) }
}

pub fn encode_news_article(
    record: &Record,
    newsgroup: &str,
    xh: &XHeaderSet,
    opts: &NewsOptions,
) -> Result<NewsArticle, CodecError> {
    validate_newsgroup(newsgroup)?;
    let body_lines = if opts.include_payload { body_for_record(record, xh, opts.limits.body) } else { Vec::new() };
    let mut standard = vec![
        ("Subject", xh.identifier.clone()),
        ("From", opts.from.clone()),
        ("Date", opts.date.format("%a, %d %b %Y %H:%M:%S +0000 (UTC)").to_string()),
        ("Newsgroups", newsgroup.to_string()),
    ];
    if let Some(org) = &opts.organization {
        standard.push(("Organization", org.clone()));
    }
    standard.push(("Lines", body_lines.len().to_string()));
    standard.push(("Message-ID", opts.message_id.clone()));

    let mut hs: Vec<Header> = standard
        .iter()
        .flat_map(|(n, v)| split_long_header(n, v, opts.limits.header))
        .map(|(n, v)| Header::new(n, v))
        .collect();
    hs.extend(xh.to_headers(opts.limits.header));
    let article = NewsArticle { headers: hs, body_lines };
    if let Some(limit) = opts.max_article_size {
        let size = article.wire_size();
        if size > limit {
            return Err(CodecError::Oversize { size, limit });
        }
    }
    Ok(article)
}

impl NewsArticle {
    fn get(&self, name: &str) -> Option<String> {
        headers::rejoin_headers(&self.headers)
            .into_iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v)
    }

    pub fn subject(&self) -> Option<String> {
        self.get("Subject")
    }

    pub fn newsgroup(&self) -> Option<String> {
        self.get("Newsgroups")
    }

    pub fn message_id(&self) -> Option<String> {
        self.get("Message-ID")
    }

    /// The `Lines` header value, if present and numeric.
    pub fn lines_header(&self) -> Option<usize> {
        self.get("Lines")?.trim().parse().ok()
    }

    pub fn body(&self) -> String {
        self.body_lines.join("\r\n")
    }

    /// Wire form with CRLF line endings.
    pub fn render(&self) -> String {
        let mut out: String = self.headers.iter().map(|h| h.render("\r\n")).collect();
        out.push_str("\r\n");
        for line in &self.body_lines {
            out.push_str(line);
            out.push_str("\r\n");
        }
        out
    }

    pub fn wire_size(&self) -> u64 {
        self.render().len() as u64
    }

    /// Parses the wire form. LF-only input is accepted.
    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let (head, body) = split_head_body(text)?;
        let headers = headers::parse_block(head)?;
        let body_lines = body.lines().map(str::to_string).collect();
        Ok(Self { headers, body_lines })
    }
}

/// Splits a message at its first blank line.
pub(crate) fn split_head_body(text: &str) -> Result<(&str, &str), CodecError> {
    for sep in ["\r\n\r\n", "\n\n"] {
        if let Some(i) = text.find(sep) {
            let nl = sep.len() / 2;
            return Ok((&text[..i + nl], &text[i + sep.len()..]));
        }
    }
    if text.starts_with("\r\n") {
        return Ok(("", &text[2..]));
    }
    if text.starts_with('\n') {
        return Ok(("", &text[1..]));
    }
    Err(CodecError::Malformed("no blank line between headers and body".into()))
}

pub(crate) fn extract(article: &NewsArticle) -> Result<(XHeaderSet, Payload), CodecError> {
    let xh = XHeaderSet::from_headers(&article.headers)?;
    if let Some(n) = article.lines_header() {
        if n != article.body_lines.len() {
            return Err(CodecError::Malformed(format!(
                "Lines header says {n} but body has {} lines",
                article.body_lines.len()
            )));
        }
    }
    let payload = payload_from_body(&article.body(), "article body", &xh)?;
    Ok((xh, payload))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{build_xheaders, extract_record, ArchivalMessage};
    use crate::model::{make_repository, RepositoryProfile};
    use chrono::TimeZone;

    fn opts() -> NewsOptions {
        NewsOptions::new(Utc.with_ymd_and_hms(2006, 8, 10, 14, 3, 45).unwrap(), "<1@repository.example.org>")
    }

    fn time() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2006, 8, 10, 14, 20, 24).unwrap()
    }

    fn article_for(record: &Record, o: &NewsOptions) -> NewsArticle {
        let xh = build_xheaders(record, "http://beatitude.cs.odu.edu:8080/modoai/10/", time()).unwrap();
        encode_news_article(record, "repository.odu.test1", &xh, o).unwrap()
    }

    #[test]
    fn newsgroup_names() {
        assert!(validate_newsgroup("repository.odu.test1").is_ok());
        for bad in ["", "single", "a..b", "Repo.odu", "a.b c", ".a.b"] {
            assert!(validate_newsgroup(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn article_shape() {
        let r = Record::from_bytes("http://beatitude.cs.odu.edu:8080/j_image.jpg", vec![0xFF; 20_000], 0);
        let a = article_for(&r, &opts());
        assert_eq!(a.newsgroup().as_deref(), Some("repository.odu.test1"));
        assert_eq!(a.lines_header(), Some(a.body_lines.len()));
        assert!(a.body_lines.iter().all(|l| l.len() <= 76));
        let text = a.render();
        assert!(text.split("\r\n").take_while(|l| !l.is_empty()).all(|l| l.len() <= 72 && l.is_ascii()));
        for name in ["X-sourceURL:", "X-sourceURL-1:", "X-HTTP-Header:", "Message-ID:", "Date:"] {
            assert!(text.contains(&format!("\r\n{name}")), "{name}");
        }
        let reparsed = NewsArticle::parse(&text).unwrap();
        assert_eq!(reparsed, a);
        let (xh, p) = extract_record(&ArchivalMessage::News(reparsed)).unwrap();
        assert_eq!(xh.identifier, r.identifier);
        assert_eq!(p.content, r.content());
    }

    #[test]
    fn empty_record_gives_empty_body() {
        let r = Record::from_bytes("http://example.org/empty.txt", Vec::<u8>::new(), 0);
        let a = article_for(&r, &opts());
        assert!(a.body_lines.is_empty());
        assert_eq!(a.lines_header(), Some(0));
        let (_, p) = extract(&NewsArticle::parse(&a.render()).unwrap()).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn oversize_and_by_reference() {
        let r = Record::from_bytes("http://example.org/big.bin", vec![1u8; 50_000], 0);
        let mut o = opts();
        o.max_article_size = Some(10_000);
        let xh = build_xheaders(&r, "http://example.org/oai", time()).unwrap();
        assert!(matches!(
            encode_news_article(&r, "repository.odu.test1", &xh, &o),
            Err(CodecError::Oversize { limit: 10_000, .. })
        ));
        o.include_payload = false;
        let a = encode_news_article(&r, "repository.odu.test1", &xh, &o).unwrap();
        let (got, p) = extract(&a).unwrap();
        assert_eq!(got, xh);
        assert!(p.is_empty());
        assert_eq!(p.identifier, r.identifier);
    }

    #[test]
    fn dropped_line_is_detected() {
        let r = Record::from_bytes("http://example.org/x.bin", vec![9u8; 4000], 0);
        let mut a = article_for(&r, &opts());
        a.body_lines.remove(3);
        assert!(extract(&a).is_err());
    }

    #[test]
    fn corpus_of_72_arrives_intact() {
        let repo = make_repository(RepositoryProfile::new(72, 4_000, 0, 0), 11).unwrap();
        let intact = repo
            .records
            .iter()
            .filter(|r| {
                let text = article_for(r, &opts()).render();
                let (_, p) = extract(&NewsArticle::parse(&text).unwrap()).unwrap();
                p.content == r.content() && p.identifier == r.identifier
            })
            .count();
        assert_eq!(intact, 72);
    }
}
