//! Byte sizes and bandwidths as written in scenario files and on the
//! calculator command line.
//!
//! Sizes use decimal SI prefixes (`KB` = 1000 bytes); binary prefixes are
//! available as `KiB`, `MiB`, ... Bandwidths accept bit rates (`bps`,
//! `Kbps`, `Mbps`, `Gbps`), byte rates per second (`B/s`, `KB/s`, ...) or
//! per day (`B/day`, `GB/day`, ...). A bare number is bytes (per day).

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {what} from {input:?}")]
pub struct UnitError {
    what: &'static str,
    input: String,
}

fn split_number(input: &str) -> Option<(f64, &str)> {
    let s = input.trim();
    let end = s
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-' | '_')))
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    // "1e" followed by a unit letter is not an exponent.
    let (mut num, mut rest) = s.split_at(end);
    while num.ends_with(['e', 'E', '+', '-']) {
        let cut = num.len() - 1;
        rest = &s[cut..];
        num = &s[..cut];
    }
    let value: f64 = num.replace('_', "").parse().ok()?;
    Some((value, rest.trim()))
}

fn byte_multiplier(unit: &str) -> Option<f64> {
    Some(match unit.to_ascii_lowercase().as_str() {
        "" | "b" | "byte" | "bytes" => 1.0,
        "kb" => 1e3,
        "mb" => 1e6,
        "gb" => 1e9,
        "tb" => 1e12,
        "kib" => 1024.0,
        "mib" => 1024.0 * 1024.0,
        "gib" => 1024.0 * 1024.0 * 1024.0,
        "tib" => 1024.0f64.powi(4),
        _ => return None,
    })
}

/// Parses a byte size such as `420KB`, `1MB`, `100 KiB` or `1000`.
pub fn parse_bytes(input: &str) -> Result<f64, UnitError> {
    let err = || UnitError { what: "byte size", input: input.to_string() };
    let (value, unit) = split_number(input).ok_or_else(err)?;
    let mult = byte_multiplier(unit).ok_or_else(err)?;
    let bytes = value * mult;
    if bytes.is_finite() && bytes >= 0.0 {
        Ok(bytes)
    } else {
        Err(err())
    }
}

/// Parses a bandwidth into bytes per day.
pub fn parse_bandwidth(input: &str) -> Result<f64, UnitError> {
    let err = || UnitError { what: "bandwidth", input: input.to_string() };
    let (value, unit) = split_number(input).ok_or_else(err)?;
    let lower = unit.to_ascii_lowercase();
    let per_day = if let Some(prefix) = lower.strip_suffix("bps") {
        let bits = match prefix {
            "" => 1.0,
            "k" => 1e3,
            "m" => 1e6,
            "g" => 1e9,
            _ => return Err(err()),
        };
        value * bits / 8.0 * SECONDS_PER_DAY
    } else if let Some(size) = lower.strip_suffix("/s") {
        value * byte_multiplier(size).ok_or_else(err)? * SECONDS_PER_DAY
    } else if let Some(size) = lower.strip_suffix("/day") {
        value * byte_multiplier(size).ok_or_else(err)?
    } else if lower.is_empty() {
        value
    } else {
        return Err(err());
    };
    if per_day.is_finite() && per_day >= 0.0 {
        Ok(per_day)
    } else if per_day.is_infinite() && per_day > 0.0 {
        Ok(f64::INFINITY)
    } else {
        Err(err())
    }
}

/// A byte count in a scenario file: either a number or a string with units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bytes(pub f64);

/// A bandwidth in a scenario file, stored as bytes per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BytesPerDay(pub f64);

macro_rules! quantity_serde {
    ($ty:ident, $parse:ident, $expect:literal) => {
        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl<'de> Visitor<'de> for V {
                    type Value = $ty;
                    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                        f.write_str($expect)
                    }
                    fn visit_i64<E: de::Error>(self, v: i64) -> Result<$ty, E> {
                        if v < 0 {
                            return Err(E::custom(format!("negative quantity {v}")));
                        }
                        Ok($ty(v as f64))
                    }
                    fn visit_u64<E: de::Error>(self, v: u64) -> Result<$ty, E> {
                        Ok($ty(v as f64))
                    }
                    fn visit_f64<E: de::Error>(self, v: f64) -> Result<$ty, E> {
                        if v < 0.0 || v.is_nan() {
                            return Err(E::custom(format!("negative quantity {v}")));
                        }
                        Ok($ty(v))
                    }
                    fn visit_str<E: de::Error>(self, v: &str) -> Result<$ty, E> {
                        $parse(v).map($ty).map_err(E::custom)
                    }
                }
                d.deserialize_any(V)
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_f64(self.0)
            }
        }
    };
}

quantity_serde!(Bytes, parse_bytes, "a byte count or a string such as \"100KB\"");
quantity_serde!(BytesPerDay, parse_bandwidth, "bytes per day or a string such as \"1.5Mbps\"");
