//! Independent reader for the bundled plain-text copy of the certificate.
//!
//! Rooted terms are written as words in which `_` precedes each root digit, e.g.
//! `_12_34` is `1234` rooted at positions 1 and 3.

use super::{RootedPair, Transcript};
use crate::error::{Error, Result};
use crate::flag::RootedPermutation;
use crate::perm::parse_permutation;

const BUNDLED: &str = include_str!("../../data/certificate.txt");

pub fn bundled_text() -> &'static str {
    BUNDLED
}

fn parse_error(text: &str) -> Error {
    Error::Parse {
        what: "certificate text",
        text: text.to_string(),
    }
}

fn parse_term(text: &str) -> Result<RootedPermutation> {
    let mut word = String::new();
    let mut roots = Vec::new();
    let mut mark = false;
    for ch in text.trim().chars() {
        match ch {
            '_' if !mark => mark = true,
            d if d.is_ascii_digit() => {
                word.push(d);
                if mark {
                    roots.push(word.len());
                    mark = false;
                }
            }
            _ => return Err(parse_error(text)),
        }
    }
    if mark {
        return Err(parse_error(text));
    }
    RootedPermutation::new(parse_permutation(&word)?, roots)
}

/// Every `(a - b)` group in a definition body.
fn parse_pairs(body: &str) -> Result<Vec<RootedPair>> {
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find('(') {
        let between = rest[..open].trim();
        if !(between.is_empty() || between == "+") {
            return Err(parse_error(between));
        }
        let close = rest[open..].find(')').ok_or_else(|| parse_error(rest))? + open;
        let inner = &rest[open + 1..close];
        let (a, b) = inner.split_once(" - ").ok_or_else(|| parse_error(inner))?;
        out.push((parse_term(a)?, parse_term(b)?));
        rest = &rest[close + 1..];
    }
    if !rest.trim().is_empty() {
        return Err(parse_error(rest));
    }
    Ok(out)
}

fn parse_matrix(header: &str, body: &str) -> Result<(Vec<Vec<i64>>, i64)> {
    let den = header
        .trim()
        .strip_prefix("1/")
        .and_then(|s| s.strip_suffix('*'))
        .ok_or_else(|| parse_error(header))?
        .trim()
        .parse::<i64>()
        .map_err(|_| parse_error(header))?;
    let mut rows = Vec::new();
    for row in body.split(']') {
        let row = row.trim();
        if row.is_empty() {
            continue;
        }
        let cells = row.strip_prefix('[').ok_or_else(|| parse_error(row))?;
        rows.push(
            cells
                .split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| parse_error(c)))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((rows, den))
}

/// Parses the bundled layout: `name := (a - b) + ...` blocks with indented `+`
/// continuation lines, and `M := 1/den *` followed by bracketed integer rows.
pub fn parse_certificate_text(text: &str) -> Result<Transcript> {
    let mut blocks: Vec<(String, String, String)> = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if line.starts_with(char::is_whitespace) {
            let last = blocks.last_mut().ok_or_else(|| parse_error(line))?;
            last.2.push(' ');
            last.2.push_str(trimmed);
        } else {
            let (name, head) = trimmed.split_once(":=").ok_or_else(|| parse_error(line))?;
            blocks.push((name.trim().to_string(), head.trim().to_string(), String::new()));
        }
    }
    let mut x = vec![None; 5];
    let mut y = vec![None; 5];
    let (mut z1, mut z2, mut matrix) = (None, None, None);
    for (name, head, cont) in blocks {
        if name == "M" {
            matrix = Some(parse_matrix(&head, &cont)?);
            continue;
        }
        let pairs = parse_pairs(&format!("{head} {cont}"))?;
        let slot = match name.split_once('_') {
            Some(("x", i)) => i.parse::<usize>().ok().and_then(|i| x.get_mut(i.wrapping_sub(1))),
            Some(("y", i)) => i.parse::<usize>().ok().and_then(|i| y.get_mut(i.wrapping_sub(1))),
            Some(("z", "1")) => Some(&mut z1),
            Some(("z", "2")) => Some(&mut z2),
            _ => None,
        }
        .ok_or_else(|| parse_error(&name))?;
        if slot.replace(pairs).is_some() {
            return Err(parse_error(&name));
        }
    }
    let missing = |what: &str| parse_error(&format!("missing {what}"));
    let (m_numerators, denominator) = matrix.ok_or_else(|| missing("M"))?;
    Ok(Transcript {
        x: x.into_iter().collect::<Option<_>>().ok_or_else(|| missing("x"))?,
        y: y.into_iter().collect::<Option<_>>().ok_or_else(|| missing("y"))?,
        z1: z1.ok_or_else(|| missing("z_1"))?,
        z2: z2.ok_or_else(|| missing("z_2"))?,
        m_numerators,
        denominator,
    })
}
