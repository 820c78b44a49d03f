//! Outbound email carriers with an appended archive attachment.

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

use super::headers::{self, Header};
use super::news::split_head_body;
use super::{body_for_record, payload_from_body, CodecError, LineLimits, Payload, XHeaderSet};
use crate::model::Record;

const ARCHIVE_TYPE: &str = "x-application/myxml";

/// One part of a multipart body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MimePart {
    pub headers: Vec<Header>,
    pub body: String,
}

impl MimePart {
    pub fn content_type(&self) -> Option<String> {
        headers::find(&self.headers, "Content-Type").map(Header::unfolded)
    }

    pub fn is_archive(&self) -> bool {
        self.content_type().is_some_and(|t| t.trim_start().to_ascii_lowercase().starts_with(ARCHIVE_TYPE))
    }

    fn render(&self, nl: &str) -> String {
        let mut out: String = self.headers.iter().map(|h| h.render(nl)).collect();
        out.push_str(nl);
        out.push_str(&self.body);
        out
    }

    fn parse(raw: &str, nl: &str) -> Result<Self, CodecError> {
        if let Some(body) = raw.strip_prefix(nl) {
            return Ok(Self { headers: Vec::new(), body: body.to_string() });
        }
        let blank = format!("{nl}{nl}");
        let (head, body) = match raw.find(&blank) {
            Some(i) => (&raw[..i + nl.len()], &raw[i + blank.len()..]),
            None => (raw, ""),
        };
        Ok(Self { headers: headers::parse_block(head)?, body: body.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessageBody {
    Single(String),
    Multipart { boundary: String, preamble: String, parts: Vec<MimePart>, epilogue: String },
}

/// An email message. Rendering a parsed message reproduces its text exactly
/// as long as it uses one line-ending style throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmailMessage {
    pub headers: Vec<Header>,
    pub body: MessageBody,
    pub newline: String,
}

impl EmailMessage {
    /// A plain single-part text message.
    pub fn text(from: &str, to: &str, subject: &str, message_id: &str, date: DateTime<Utc>, body: &str) -> Self {
        let headers = vec![
            Header::new("Date", date.format("%a, %d %b %Y %H:%M:%S +0000").to_string()),
            Header::new("From", from),
            Header::new("To", to),
            Header::new("Subject", subject),
            Header::new("Message-ID", message_id),
            Header::new("MIME-Version", "1.0"),
            Header::new("Content-Type", "TEXT/PLAIN; charset=US-ASCII"),
        ];
        Self { headers, body: MessageBody::Single(body.to_string()), newline: "\r\n".into() }
    }

    pub fn header(&self, name: &str) -> Option<String> {
        headers::find(&self.headers, name).map(Header::unfolded)
    }

    pub fn parts(&self) -> &[MimePart] {
        match &self.body {
            MessageBody::Single(_) => &[],
            MessageBody::Multipart { parts, .. } => parts,
        }
    }

    pub fn archive_part(&self) -> Option<&MimePart> {
        self.parts().iter().find(|p| p.is_archive())
    }

    pub fn render(&self) -> String {
        let nl = self.newline.as_str();
        let mut out: String = self.headers.iter().map(|h| h.render(nl)).collect();
        out.push_str(nl);
        match &self.body {
            MessageBody::Single(body) => out.push_str(body),
            MessageBody::Multipart { boundary, preamble, parts, epilogue } => {
                out.push_str(preamble);
                for part in parts {
                    out.push_str(&format!("--{boundary}{nl}"));
                    out.push_str(&part.render(nl));
                    out.push_str(nl);
                }
                out.push_str(&format!("--{boundary}--"));
                out.push_str(epilogue);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let nl = if text.contains("\r\n") { "\r\n" } else { "\n" };
        let (head, body) = split_head_body(text)?;
        let headers = headers::parse_block(head)?;
        let boundary = headers::find(&headers, "Content-Type")
            .map(Header::unfolded)
            .filter(|t| t.trim_start().to_ascii_lowercase().starts_with("multipart/"))
            .and_then(|t| headers::parameter(&t, "boundary"));
        let body = match boundary {
            None => MessageBody::Single(body.to_string()),
            Some(b) => parse_multipart(body, &b, nl)?,
        };
        Ok(Self { headers, body, newline: nl.to_string() })
    }
}

fn parse_multipart(body: &str, boundary: &str, nl: &str) -> Result<MessageBody, CodecError> {
    let delim = format!("--{boundary}");
    let inner = format!("{nl}{delim}");
    let first = if body.starts_with(&delim) {
        0
    } else {
        body.find(&inner)
            .map(|i| i + nl.len())
            .ok_or_else(|| CodecError::Malformed(format!("boundary {boundary:?} not found")))?
    };
    let preamble = body[..first].to_string();
    let mut rest = &body[first + delim.len()..];
    let mut parts = Vec::new();
    loop {
        if let Some(epilogue) = rest.strip_prefix("--") {
            return Ok(MessageBody::Multipart { boundary: boundary.to_string(), preamble, parts, epilogue: epilogue.to_string() });
        }
        rest = rest
            .strip_prefix(nl)
            .ok_or_else(|| CodecError::Malformed("boundary line not followed by a line break".into()))?;
        let end = rest.find(&inner).ok_or_else(|| CodecError::Malformed("unterminated multipart body".into()))?;
        parts.push(MimePart::parse(&rest[..end], nl)?);
        rest = &rest[end + inner.len()..];
    }
}

fn is_content_header(h: &Header) -> bool {
    h.name.to_ascii_lowercase().starts_with("content-")
}

fn boundary_for(carrier: &str, identifier: &str) -> String {
    let digest = hex::encode(Sha256::digest(format!("{carrier}\0{identifier}").as_bytes()));
    let mut candidate = format!("=_archive_{}", &digest[..24]);
    let mut n = 0;
    while carrier.contains(&candidate) {
        n += 1;
        candidate = format!("=_archive_{}_{n}", &digest[..24]);
    }
    candidate
}

/// Adds the provenance X-headers to `carrier` without any attachment
/// (by-reference advertising).
pub fn advertise_email(carrier: &EmailMessage, xh: &XHeaderSet, limits: LineLimits) -> Result<EmailMessage, CodecError> {
    if XHeaderSet::present_in(&carrier.headers) || carrier.archive_part().is_some() {
        return Err(CodecError::AlreadyArchived);
    }
    let mut out = carrier.clone();
    out.headers.extend(xh.to_headers(limits.header));
    Ok(out)
}

/// Appends `record` to `carrier` as a BASE64 archive part and adds the
/// X-headers. A single-part carrier becomes multipart/mixed with its body as
/// the first part, unchanged.
pub fn encode_email_attachment(
    carrier: &EmailMessage,
    record: &Record,
    xh: &XHeaderSet,
    limits: LineLimits,
) -> Result<EmailMessage, CodecError> {
    let mut out = advertise_email(carrier, xh, limits)?;
    let nl = carrier.newline.clone();
    let lines = body_for_record(record, xh, limits.body);
    let hash = hex::encode(Sha256::digest(record.content()));
    let archive = MimePart {
        headers: vec![
            Header::new("Content-Type", format!("{ARCHIVE_TYPE}; charset=US-ASCII;{nl} name=\"{}\"", record.identifier)),
            Header::new("Content-Transfer-Encoding", "BASE64"),
            Header::new("Content-Description", "application/xml"),
            Header::new("Content-Disposition", format!("attachment; filename=\"{}.xml\"", &hash[..32])),
        ],
        body: if lines.is_empty() { String::new() } else { format!("{}{nl}", lines.join(&nl)) },
    };
    if let MessageBody::Single(text) = &carrier.body {
        let boundary = boundary_for(&carrier.render(), &record.identifier);
        let first = MimePart {
            headers: out.headers.iter().filter(|h| is_content_header(h)).cloned().collect(),
            body: text.clone(),
        };
        out.headers.retain(|h| !is_content_header(h));
        if headers::find(&out.headers, "MIME-Version").is_none() {
            out.headers.push(Header::new("MIME-Version", "1.0"));
        }
        out.headers.push(Header::new("Content-Type", format!("MULTIPART/MIXED; BOUNDARY=\"{boundary}\"")));
        out.body = MessageBody::Multipart { boundary, preamble: String::new(), parts: vec![first], epilogue: nl.clone() };
    }
    if let MessageBody::Multipart { parts, .. } = &mut out.body {
        parts.push(archive);
    }
    Ok(out)
}

pub(crate) fn extract(mail: &EmailMessage) -> Result<(XHeaderSet, Payload), CodecError> {
    let xh = XHeaderSet::from_headers(&mail.headers)?;
    let payload = match mail.parts().iter().position(MimePart::is_archive) {
        Some(i) => {
            let part = &mail.parts()[i];
            let encoding = headers::find(&part.headers, "Content-Transfer-Encoding").map(Header::unfolded);
            if !encoding.is_some_and(|e| e.trim().eq_ignore_ascii_case("base64")) {
                return Err(CodecError::Malformed(format!("attachment part {} is not BASE64", i + 1)));
            }
            payload_from_body(&part.body, &format!("attachment part {}", i + 1), &xh)?
        }
        None => Payload { identifier: xh.identifier.clone(), content: Vec::new() },
    };
    Ok((xh, payload))
}
