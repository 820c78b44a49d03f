//! Synthesized OAI-PMH `GetRecord` response wrapping one record.
//!
//! The resource bytes sit base64-encoded inside a `didl:Resource` element
//! whose `length` and `sha256` attributes let extraction detect damage.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use sha2::{Digest, Sha256};

use super::{CodecError, XHeaderSet};

const RESOURCE_OPEN: &str = "<didl:Resource ";
const RESOURCE_CLOSE: &str = "</didl:Resource>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    pub identifier: String,
    pub content: Vec<u8>,
}

impl Payload {
    pub fn is_empty(&self) -> bool {
        self.content.is_empty()
    }

    pub fn sha256_hex(&self) -> String {
        hex::encode(Sha256::digest(&self.content))
    }

    /// Renders the XML envelope.
    pub fn to_envelope(&self, xh: &XHeaderSet) -> Vec<u8> {
        let id = escape(&self.identifier);
        let mut resource = String::new();
        for chunk in STANDARD.encode(&self.content).as_bytes().chunks(76) {
            resource.push_str(std::str::from_utf8(chunk).expect("base64 is ASCII"));
            resource.push('\n');
        }
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <OAI-PMH xmlns=\"http://www.openarchives.org/OAI/2.0/\" \
             xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
             xsi:schemaLocation=\"http://www.openarchives.org/OAI/2.0/ \
             http://www.openarchives.org/OAI/2.0/OAI-PMH.xsd\">\n\
             <responseDate>{date}</responseDate>\n\
             <request verb=\"{verb}\" identifier=\"{id}\" metadataPrefix=\"{prefix}\">{base}</request>\n\
             <GetRecord>\n<record>\n<header>\n<identifier>{id}</identifier>\n\
             <datestamp>{date}</datestamp>\n</header>\n<metadata>\n\
             <didl:DIDL xmlns:didl=\"urn:mpeg:mpeg21:2002:02-DIDL-NS\">\n\
             <didl:Item>\n<didl:Component>\n\
             {RESOURCE_OPEN}mimeType=\"application/octet-stream\" encoding=\"base64\" \
             length=\"{len}\" sha256=\"{sha}\">\n{resource}{RESOURCE_CLOSE}\n\
             </didl:Component>\n</didl:Item>\n</didl:DIDL>\n</metadata>\n</record>\n\
             </GetRecord>\n</OAI-PMH>\n",
            date = escape(&xh.harvest_time),
            verb = escape(&xh.verb),
            prefix = escape(&xh.metadata_prefix),
            base = escape(&xh.base_url),
            len = self.content.len(),
            sha = self.sha256_hex(),
        )
        .into_bytes()
    }

    /// Parses an envelope produced by [`Payload::to_envelope`], checking the
    /// recorded length and digest.
    pub fn from_envelope(bytes: &[u8]) -> Result<Self, CodecError> {
        let text = std::str::from_utf8(bytes).map_err(|_| CodecError::Envelope("not UTF-8".into()))?;
        let identifier = unescape(between(text, "<identifier>", "</identifier>")?);
        let start = text.find(RESOURCE_OPEN).ok_or_else(|| CodecError::Envelope("no didl:Resource".into()))?;
        let rest = &text[start + RESOURCE_OPEN.len()..];
        let tag_end = rest.find('>').ok_or_else(|| CodecError::Envelope("unterminated didl:Resource".into()))?;
        let attrs = &rest[..tag_end];
        let body_end = rest.find(RESOURCE_CLOSE).ok_or_else(|| CodecError::Envelope("no closing didl:Resource".into()))?;
        let encoded: String = rest[tag_end + 1..body_end].chars().filter(|c| !c.is_ascii_whitespace()).collect();
        let content = STANDARD
            .decode(encoded.as_bytes())
            .map_err(|e| CodecError::Envelope(format!("resource base64: {e}")))?;
        let length: usize = attribute(attrs, "length")?
            .parse()
            .map_err(|_| CodecError::Envelope("bad length attribute".into()))?;
        if length != content.len() {
            return Err(CodecError::Envelope(format!("length {length} but {} bytes decoded", content.len())));
        }
        let payload = Self { identifier, content };
        if attribute(attrs, "sha256")? != payload.sha256_hex() {
            return Err(CodecError::Envelope("sha256 mismatch".into()));
        }
        Ok(payload)
    }
}

fn between<'a>(text: &'a str, open: &str, close: &str) -> Result<&'a str, CodecError> {
    let s = text.find(open).ok_or_else(|| CodecError::Envelope(format!("missing {open}")))? + open.len();
    let e = text[s..].find(close).ok_or_else(|| CodecError::Envelope(format!("missing {close}")))?;
    Ok(&text[s..s + e])
}

fn attribute<'a>(attrs: &'a str, name: &str) -> Result<&'a str, CodecError> {
    let key = format!("{name}=\"");
    let start = attrs
        .split_whitespace()
        .find_map(|a| a.strip_prefix(key.as_str()))
        .ok_or_else(|| CodecError::Envelope(format!("missing {name} attribute")))?;
    start.strip_suffix('"').ok_or_else(|| CodecError::Envelope(format!("unterminated {name}")))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn unescape(s: &str) -> String {
    s.replace("&quot;", "\"").replace("&gt;", ">").replace("&lt;", "<").replace("&amp;", "&")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::build_xheaders;
    use crate::model::Record;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn xh(id: &str) -> XHeaderSet {
        let r = Record::from_bytes(id, vec![], 0);
        build_xheaders(&r, "http://example.org/oai", Utc.with_ymd_and_hms(2006, 8, 10, 14, 20, 24).unwrap()).unwrap()
    }

    #[test]
    fn envelope_looks_like_get_record() {
        let p = Payload { identifier: "http://example.org/a?x=1&y=2".into(), content: b"hello".to_vec() };
        let env = p.to_envelope(&xh(&p.identifier));
        let text = String::from_utf8(env.clone()).unwrap();
        assert!(text.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<OAI-PMH"));
        assert!(text.contains("<request verb=\"GetRecord\""));
        assert!(text.contains("x=1&amp;y=2"));
        assert_eq!(Payload::from_envelope(&env).unwrap(), p);
    }

    #[test]
    fn corruption_is_detected() {
        let p = Payload { identifier: "http://example.org/a".into(), content: vec![0xAB; 300] };
        let env = String::from_utf8(p.to_envelope(&xh(&p.identifier))).unwrap();
        let tampered = env.replacen("q6ur", "q6uq", 1);
        assert_ne!(tampered, env);
        assert!(Payload::from_envelope(tampered.as_bytes()).is_err());
        let short = env.replacen("length=\"300\"", "length=\"299\"", 1);
        assert!(Payload::from_envelope(short.as_bytes()).is_err());
        assert!(Payload::from_envelope(&env.as_bytes()[..env.len() / 2]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(content in proptest::collection::vec(any::<u8>(), 0..3000)) {
            let p = Payload { identifier: "http://example.org/r/1.bin".into(), content };
            let env = p.to_envelope(&xh(&p.identifier));
            prop_assert_eq!(Payload::from_envelope(&env).unwrap(), p);
        }
    }
}
