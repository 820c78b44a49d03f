//! Header lines: splitting long values into numbered continuation headers,
//! parsing header blocks, and rejoining continuations.

use super::CodecError;

/// One header line. `value` is kept raw: folded email headers retain their
/// line breaks so a parsed message re-renders byte for byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub name: String,
    pub value: String,
}

impl Header {
    pub fn new(name: impl Into<String>, value: impl Into<String>) -> Self {
        Self { name: name.into(), value: value.into() }
    }

    pub fn render(&self, newline: &str) -> String {
        format!("{}: {}{newline}", self.name, self.value)
    }

    /// Value with folding whitespace line breaks removed.
    pub fn unfolded(&self) -> String {
        self.value.replace("\r\n", "").replace('\n', "")
    }
}

/// Splits `value` so that every rendered `name: chunk` line fits in `limit`
/// characters. The first chunk keeps `name`; later chunks are named
/// `name-1`, `name-2`, ... Concatenating the chunks gives back `value`.
pub fn split_long_header(name: &str, value: &str, limit: usize) -> Vec<(String, String)> {
    assert!(limit > name.len() + 2, "limit {limit} leaves no room after {name:?}");
    let chars: Vec<char> = value.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    loop {
        let this_name = if out.is_empty() { name.to_string() } else { format!("{name}-{}", out.len()) };
        let room = limit.saturating_sub(this_name.len() + 2).max(1);
        let end = (pos + room).min(chars.len());
        out.push((this_name, chars[pos..end].iter().collect()));
        pos = end;
        if pos >= chars.len() {
            return out;
        }
    }
}

/// Merges `name-1`, `name-2`, ... continuation headers back into their base
/// header. Returns `(name, value)` pairs in first-appearance order.
pub fn rejoin_headers(headers: &[Header]) -> Vec<(String, String)> {
    let mut out: Vec<(String, String, usize)> = Vec::new();
    for h in headers {
        let value = h.unfolded();
        let continued = h.name.rsplit_once('-').and_then(|(base, n)| {
            let n: usize = n.parse().ok()?;
            let idx = out.iter().rposition(|(name, _, _)| name.eq_ignore_ascii_case(base))?;
            (out[idx].2 + 1 == n).then_some(idx)
        });
        match continued {
            Some(idx) => {
                out[idx].1.push_str(&value);
                out[idx].2 += 1;
            }
            None => out.push((h.name.clone(), value, 0)),
        }
    }
    out.into_iter().map(|(n, v, _)| (n, v)).collect()
}

/// Parses a header block (no blank line) with CRLF or LF line endings.
/// Lines starting with whitespace continue the previous header.
pub fn parse_block(block: &str) -> Result<Vec<Header>, CodecError> {
    let mut headers: Vec<Header> = Vec::new();
    let mut rest = block;
    while !rest.is_empty() {
        let (line, newline, tail) = match rest.find('\n') {
            Some(i) if i > 0 && rest.as_bytes()[i - 1] == b'\r' => (&rest[..i - 1], "\r\n", &rest[i + 1..]),
            Some(i) => (&rest[..i], "\n", &rest[i + 1..]),
            None => (rest, "", ""),
        };
        rest = tail;
        if line.starts_with([' ', '\t']) {
            let last = headers
                .last_mut()
                .ok_or_else(|| CodecError::Malformed("continuation line before any header".into()))?;
            last.value.push_str(newline_of_previous(newline));
            last.value.push_str(line);
            continue;
        }
        let (name, value) = line
            .split_once(':')
            .ok_or_else(|| CodecError::Malformed(format!("header line without colon: {line:?}")))?;
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(CodecError::Malformed(format!("bad header name {name:?}")));
        }
        let value = value.strip_prefix(' ').unwrap_or(value);
        headers.push(Header::new(name, value));
    }
    Ok(headers)
}

// A folded value keeps the line break that preceded the continuation.
fn newline_of_previous(newline: &str) -> &str {
    if newline.is_empty() { "\r\n" } else { newline }
}

pub fn find<'a>(headers: &'a [Header], name: &str) -> Option<&'a Header> {
    headers.iter().find(|h| h.name.eq_ignore_ascii_case(name))
}

/// Extracts a `key="value"` or `key=value` parameter from a structured
/// header value such as `multipart/mixed; boundary="x"`.
pub fn parameter(value: &str, key: &str) -> Option<String> {
    for piece in value.split(';').skip(1) {
        let piece = piece.trim();
        let (k, v) = piece.split_once('=')?;
        if k.trim().eq_ignore_ascii_case(key) {
            let v = v.trim();
            return Some(v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v).to_string());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_value_is_untouched() {
        assert_eq!(split_long_header("X-baseURL", "http://a/", 72), vec![("X-baseURL".into(), "http://a/".into())]);
        assert_eq!(split_long_header("X-baseURL", "", 72), vec![("X-baseURL".into(), String::new())]);
    }

    #[test]
    fn source_url_splits_like_the_sample_article() {
        let value = "http://beatitude.cs.odu.edu:8080/modoai/10/?verb=GetRecord&identifier=\
                     http://beatitude.cs.odu.edu:8080/j_image.jpg&metadataPrefix=oai_didl";
        let parts = split_long_header("X-sourceURL", value, 72);
        let names: Vec<&str> = parts.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["X-sourceURL", "X-sourceURL-1", "X-sourceURL-2"]);
        assert!(parts.iter().all(|(n, v)| n.len() + 2 + v.len() <= 72));
        let joined: String = parts.iter().map(|(_, v)| v.as_str()).collect();
        assert_eq!(joined, value);
    }

    #[test]
    fn rejoin_ignores_unrelated_numbered_names() {
        let hs = vec![Header::new("X-Trace", "a"), Header::new("X-Trace-2", "b"), Header::new("X-Trace-1", "c")];
        let joined = rejoin_headers(&hs);
        assert_eq!(joined[0], ("X-Trace".into(), "ac".into()));
        assert_eq!(joined[1], ("X-Trace-2".into(), "b".into()));
    }

    #[test]
    fn folded_headers_round_trip() {
        let block = "Content-Type: x-application/myxml; charset=US-ASCII;\r\n name=\"a\"\r\nX-A: b\r\n";
        let hs = parse_block(block).unwrap();
        assert_eq!(hs.len(), 2);
        assert_eq!(hs[0].unfolded(), "x-application/myxml; charset=US-ASCII; name=\"a\"");
        let rendered: String = hs.iter().map(|h| h.render("\r\n")).collect();
        assert_eq!(rendered, block);
    }

    #[test]
    fn parameters() {
        assert_eq!(parameter("multipart/mixed; boundary=\"abc\"", "boundary").as_deref(), Some("abc"));
        assert_eq!(parameter("MULTIPART/MIXED; BOUNDARY=xyz", "boundary").as_deref(), Some("xyz"));
        assert_eq!(parameter("text/plain", "charset"), None);
    }

    #[test]
    fn ten_thousand_chars_at_72() {
        let value: String = (0..10_000).map(|i| char::from(b'!' + (i * 7 % 90) as u8)).collect();
        let parts = split_long_header("X-sourceURL", &value, 72);
        let rendered: String = parts.iter().map(|(n, v)| Header::new(n.clone(), v.clone()).render("\r\n")).collect();
        let rejoined = rejoin_headers(&parse_block(&rendered).unwrap());
        assert_eq!(rejoined, vec![("X-sourceURL".to_string(), value)]);
    }

    proptest! {
        #[test]
        fn split_then_rejoin_is_identity(value in "[ -~]{0,600}", limit in 14usize..200) {
            let parts = split_long_header("X-sourceURL", &value, limit);
            let joined: String = parts.iter().map(|(_, v)| v.as_str()).collect();
            prop_assert_eq!(&joined, &value);
            let rendered: String = parts.iter().map(|(n, v)| Header::new(n.clone(), v.clone()).render("\r\n")).collect();
            let rejoined = rejoin_headers(&parse_block(&rendered).unwrap());
            prop_assert_eq!(rejoined, vec![("X-sourceURL".to_string(), value)]);
        }
    }
}
