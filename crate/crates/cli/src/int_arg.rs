use std::fmt;
use std::str::FromStr;

use apsquares_core::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Longest decimal literal accepted on the command line or in a store file.
pub const MAX_DIGITS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseIntegerError {
    #[error("empty integer literal")]
    Empty,
    #[error("invalid character {0:?} in integer literal")]
    InvalidChar(char),
    #[error("integer literal longer than {MAX_DIGITS} digits")]
    TooLong,
}

/// Parses `-?[0-9]+`. No signs other than a leading minus, no separators, no whitespace.
pub fn parse_integer(s: &str) -> Result<Integer, ParseIntegerError> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() {
        return Err(ParseIntegerError::Empty);
    }
    if digits.len() > MAX_DIGITS {
        return Err(ParseIntegerError::TooLong);
    }
    if let Some(c) = digits.chars().find(|c| !c.is_ascii_digit()) {
        return Err(ParseIntegerError::InvalidChar(c));
    }
    let magnitude = Integer::parse_bytes(digits.as_bytes(), 10).ok_or(ParseIntegerError::Empty)?;
    Ok(if s.starts_with('-') { -magnitude } else { magnitude })
}

/// An [`Integer`] command-line argument, stored as a decimal string in JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntArg(pub Integer);

impl FromStr for IntArg {
    type Err = ParseIntegerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_integer(s).map(IntArg)
    }
}

impl fmt::Display for IntArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for IntArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for IntArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
