//! Line-oriented text format for rational sets.
//!
//! One rational per line, written `p/q` or `p` (denominator 1), ASCII digits
//! only. Blank lines and lines starting with `#` are skipped and surrounding
//! whitespace is ignored. Values are reduced on read, so `2/4` and `1/2` name
//! the same element and a set read back is deduplicated.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rational::{reduce, RationalSet, ReducedFraction};

fn parse_part(s: &str, line: usize) -> Result<u64> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse {
            line,
            message: format!("expected an unsigned decimal integer, found {s:?}"),
        });
    }
    s.parse::<u64>().map_err(|_| Error::Parse {
        line,
        message: format!("{s} does not fit in 64 bits"),
    })
}

fn parse_fraction_at(s: &str, line: usize) -> Result<ReducedFraction> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (parse_part(n, line)?, parse_part(d, line)?),
        None => (parse_part(s, line)?, 1),
    };
    reduce(num, den).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })
}

/// Parses a single rational such as `3/4` or `5`.
pub fn parse_fraction(s: &str) -> Result<ReducedFraction> {
    parse_fraction_at(s, 1)
}

pub fn parse_rational_set(input: &str) -> Result<RationalSet> {
    let mut elements = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        elements.push(parse_fraction_at(line, idx + 1)?);
    }
    Ok(RationalSet::from_vec(elements))
}

/// One element per line in canonical order, each terminated by `\n`.
pub fn format_rational_set(set: &RationalSet) -> String {
    let mut out = String::with_capacity(set.len() * 8);
    for f in set {
        writeln!(out, "{f}").expect("writing to a String cannot fail");
    }
    out
}
