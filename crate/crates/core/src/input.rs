//! Text formats accepted from users: one-column series files and index lists.

use crate::error::{invalid, Result};

/// Upper bound on the number of indices a single spec may expand to.
pub const MAX_SPEC_ITEMS: usize = 1 << 20;

/// Parses a one-column numeric file.
///
/// Blank lines are skipped. If the first non-blank line is not a number it is
/// taken as a header. Numbers use `.` as decimal separator; non-finite values
/// are rejected.
pub fn parse_series(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_first = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let parsed = parse_number(line);
        if !seen_first {
            seen_first = true;
            if parsed.is_none() {
                continue;
            }
        }
        match parsed {
            Some(v) if v.is_finite() => values.push(v),
            Some(_) => {
                return Err(invalid(format!(
                    "line {}: non-finite value {line:?}",
                    lineno + 1
                )))
            }
            None => {
                return Err(invalid(format!(
                    "line {}: not a number: {line:?}",
                    lineno + 1
                )))
            }
        }
    }
    Ok(values)
}

fn parse_number(field: &str) -> Option<f64> {
    // f64::from_str also takes "inf"/"nan" spellings; keep those so they can be
    // reported as non-finite rather than mistaken for a header.
    field.parse::<f64>().ok()
}

/// Parses a 1-based index list such as `"1-5"`, `"1,2,7"` or `"1-3,8"`.
///
/// Order of first appearance is kept and duplicates are rejected.
pub fn parse_index_spec(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(invalid("empty index list"));
    }
    let mut out: Vec<usize> = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (parse_index(a)?, parse_index(b)?),
            None => {
                let i = parse_index(part)?;
                (i, i)
            }
        };
        if lo > hi {
            return Err(invalid(format!("descending range {part:?}")));
        }
        if out.len() + (hi - lo + 1) > MAX_SPEC_ITEMS {
            return Err(invalid(format!(
                "index list expands to more than {MAX_SPEC_ITEMS} items"
            )));
        }
        out.extend(lo..=hi);
    }
    let mut sorted = out.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("duplicate index in list"));
    }
    Ok(out)
}

fn parse_index(s: &str) -> Result<usize> {
    let s = s.trim();
    match s.parse::<usize>() {
        Ok(0) => Err(invalid("indices are 1-based; got 0")),
        Ok(i) => Ok(i),
        Err(_) => Err(invalid(format!("not an index: {s:?}"))),
    }
}

/// Parses a comma-separated list of sizes; each entry is a plain integer or a
/// power of two written `2^p`.
pub fn parse_size_list(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(invalid("empty size list"));
    }
    spec.split(',')
        .map(|part| {
            let part = part.trim();
            let size = match part.strip_prefix("2^") {
                Some(p) => {
                    let p: u32 = p
                        .parse()
                        .map_err(|_| invalid(format!("bad exponent in {part:?}")))?;
                    if p >= usize::BITS - 1 {
                        return Err(invalid(format!("size {part:?} too large")));
                    }
                    1usize << p
                }
                None => part
                    .parse()
                    .map_err(|_| invalid(format!("not a size: {part:?}")))?,
            };
            if size == 0 {
                return Err(invalid("size must be positive"));
            }
            Ok(size)
        })
        .collect()
}
