//! Plain-text observation files.
//!
//! One observation per line: a single number, or two comma-separated numbers
//! for a paired two-sample observation. Blank lines and anything after `#`
//! are ignored.

use crate::error::{Error, Result};
use crate::seqlr::Observation;

pub fn parse(text: &str) -> Result<Vec<Observation>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed { line: i + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let mut values = Vec::with_capacity(2);
        for f in &fields {
            let v: f64 = f.parse().map_err(|_| malformed(format!("`{f}` is not a number")))?;
            if !v.is_finite() {
                return Err(malformed(format!("`{f}` is not finite")));
            }
            values.push(v);
        }
        out.push(match values[..] {
            [v] => Observation::Value(v),
            [a, b] => Observation::Pair([a, b]),
            _ => return Err(malformed(format!("expected 1 or 2 values, found {}", values.len()))),
        });
    }
    Ok(out)
}

/// Render observations in the format accepted by [`parse`].
pub fn render(observations: &[Observation]) -> String {
    let mut s = String::new();
    for o in observations {
        match *o {
            Observation::Value(v) => s.push_str(&format!("{v}\n")),
            Observation::Pair([a, b]) => s.push_str(&format!("{a},{b}\n")),
            Observation::Group { group, value } => s.push_str(&format!("# group {group}\n{value}\n")),
        }
    }
    s
}
