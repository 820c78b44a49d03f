//! Base64 bodies with fixed-width line wrapping.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;

/// Exact encoded length of `n` bytes, without line separators.
pub fn encoded_size(n: u64) -> u64 {
    n.div_ceil(3) * 4
}

/// Standard-alphabet base64 split into lines of at most `width` characters.
pub fn wrap(bytes: &[u8], width: usize) -> Vec<String> {
    assert!(width > 0, "line width must be positive");
    let encoded = STANDARD.encode(bytes);
    encoded
        .as_bytes()
        .chunks(width)
        .map(|c| String::from_utf8(c.to_vec()).expect("base64 is ASCII"))
        .collect()
}

/// Base64 text wrapped at `width` with CRLF separators (no trailing CRLF).
pub fn encode_base64_body(bytes: &[u8], width: usize) -> String {
    wrap(bytes, width).join("\r\n")
}

/// Decodes a wrapped body, ignoring line breaks and surrounding whitespace.
pub fn decode_base64_body(body: &str) -> Result<Vec<u8>, String> {
    let compact: String = body.chars().filter(|c| !c.is_ascii_whitespace()).collect();
    STANDARD.decode(compact.as_bytes()).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn block_sizes() {
        assert_eq!(encoded_size(0), 0);
        assert_eq!(encoded_size(1), 4);
        assert_eq!(encoded_size(3), 4);
        assert_eq!(encoded_size(1_000_000), 1_333_336);
        assert_eq!(encode_base64_body(b"abc", 76), "YWJj");
        assert_eq!(encode_base64_body(b"", 76), "");
    }

    #[test]
    fn twelve_kilobytes() {
        let body = encode_base64_body(&vec![7u8; 12_288], 76);
        let chars = body.replace("\r\n", "");
        assert_eq!(chars.len(), 16_384);
        assert!(body.split("\r\n").all(|l| l.len() <= 76));
    }

    #[test]
    fn truncation_is_detected() {
        let body = encode_base64_body(b"hello world", 76);
        assert!(decode_base64_body(&body[..body.len() - 1]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..2000), width in 4usize..120) {
            let body = encode_base64_body(&bytes, width);
            prop_assert_eq!(decode_base64_body(&body).unwrap(), bytes.clone());
            prop_assert_eq!(body.replace("\r\n", "").len() as u64, encoded_size(bytes.len() as u64));
            let continuous = bytes.len() as f64 * 4.0 / 3.0;
            prop_assert!((encoded_size(bytes.len() as u64) as f64 - continuous).abs() < 4.0);
        }
    }
}
