//! Text formats for relations (`.rel`) and partial functions (`.pfn`).
//!
//! ```text
//! arity 2          arity 2
//! 00               00 -> 0
//! 01               11 -> 1
//! 10
//! ```
//!
//! Tuples are written `x_1 x_2 ... x_n` left to right. Blank lines and lines
//! starting with `#` are ignored. Writers emit members in lexicographic order.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::function::PartialFunction;
use crate::relation::Relation;
use crate::tuple::{BitTuple, MAX_ARITY};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<usize> {
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `arity <n>` header"))?;
    let rest = header
        .strip_prefix("arity")
        .ok_or_else(|| parse_err(line, format!("expected `arity <n>`, found `{header}`")))?;
    let arity: usize = rest
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid arity `{}`", rest.trim())))?;
    if arity == 0 || arity > MAX_ARITY {
        return Err(parse_err(
            line,
            format!("arity {arity} out of range 1..={MAX_ARITY}"),
        ));
    }
    Ok(arity)
}

fn parse_tuple(line: usize, text: &str, arity: usize) -> Result<BitTuple> {
    if text.len() != arity {
        return Err(parse_err(
            line,
            format!("tuple `{text}` has length {}, expected {arity}", text.len()),
        ));
    }
    text.parse()
        .map_err(|_| parse_err(line, format!("tuple `{text}` must use only 0 and 1")))
}

pub fn parse_relation(text: &str) -> Result<Relation> {
    let mut lines = content_lines(text);
    let arity = parse_header(&mut lines)?;
    let mut rel = Relation::empty(arity)?;
    for (line, body) in lines {
        let t = parse_tuple(line, body, arity)?;
        rel.insert(t.bits());
    }
    Ok(rel)
}

pub fn write_relation(rel: &Relation) -> String {
    let mut out = format!("arity {}\n", rel.arity());
    for t in rel.tuples() {
        let _ = writeln!(out, "{t}");
    }
    out
}

pub fn parse_function(text: &str) -> Result<PartialFunction> {
    let mut lines = content_lines(text);
    let arity = parse_header(&mut lines)?;
    let mut table = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, body) in lines {
        let (point, value) = body.split_once("->").ok_or_else(|| {
            parse_err(line, format!("expected `<tuple> -> <0|1>`, found `{body}`"))
        })?;
        let t = parse_tuple(line, point.trim(), arity)?;
        let v = match value.trim() {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(line, format!("value `{other}` must be 0 or 1"))),
        };
        if !seen.insert(t.bits()) {
            return Err(parse_err(line, format!("point {t} is mapped twice")));
        }
        table.push((t, v));
    }
    PartialFunction::from_table(arity, table)
}

pub fn write_function(f: &PartialFunction) -> String {
    let mut out = format!("arity {}\n", f.arity());
    for (t, v) in f.table() {
        let _ = writeln!(out, "{t} -> {}", v as u8);
    }
    out
}
