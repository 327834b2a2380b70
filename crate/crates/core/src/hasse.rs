//! The `diffposet-hasse v1` interchange format.
//!
//! ```text
//! # diffposet-hasse v1
//! rank_sizes: 1 1 2
//! r: 1
//! edge 0:0 1:0
//! edge 1:0 2:0
//! edge 1:0 2:1
//! ```
//!
//! Lines starting with `#` are comments. A comment of the form
//! `# label <n>:<i> <text>` additionally names an element; readers that do
//! not know about labels simply skip it.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::poset::GradedPoset;

pub const FORMAT_TAG: &str = "diffposet-hasse v1";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_element(token: &str, line: usize) -> Result<(usize, usize)> {
    let (n, i) =
        token.split_once(':').ok_or_else(|| parse_err(line, format!("expected <rank>:<index>, got '{token}'")))?;
    let n = n.parse().map_err(|_| parse_err(line, format!("bad rank in '{token}'")))?;
    let i = i.parse().map_err(|_| parse_err(line, format!("bad index in '{token}'")))?;
    Ok((n, i))
}

pub fn parse_hasse(text: &str) -> Result<GradedPoset> {
    let mut sizes: Option<Vec<usize>> = None;
    let mut r: Option<u64> = None;
    let mut edges: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut labels: Vec<(usize, usize, usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim_start().strip_prefix("label ") {
                let rest = rest.trim_start();
                let (token, text) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let (n, i) = parse_element(token, line_no)?;
                labels.push((line_no, n, i, text.trim().to_string()));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("rank_sizes:") {
            if sizes.is_some() {
                return Err(parse_err(line_no, "duplicate rank_sizes header"));
            }
            let parsed = rest
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| parse_err(line_no, format!("bad rank size '{t}'"))))
                .collect::<Result<Vec<_>>>()?;
            if parsed.is_empty() {
                return Err(parse_err(line_no, "rank_sizes is empty"));
            }
            if parsed[0] != 1 {
                return Err(parse_err(line_no, "rank 0 must have size 1"));
            }
            if parsed.contains(&0) {
                return Err(parse_err(line_no, "rank sizes must be positive"));
            }
            edges = vec![Vec::new(); parsed.len() - 1];
            sizes = Some(parsed);
        } else if let Some(rest) = line.strip_prefix("r:") {
            let value: u64 = rest.trim().parse().map_err(|_| parse_err(line_no, format!("bad r '{}'", rest.trim())))?;
            if value == 0 {
                return Err(parse_err(line_no, "r must be positive"));
            }
            r = Some(value);
        } else if let Some(rest) = line.strip_prefix("edge") {
            let sizes = sizes.as_ref().ok_or_else(|| parse_err(line_no, "edge before rank_sizes header"))?;
            let tokens: Vec<&str> = rest.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(parse_err(line_no, "edge needs exactly two endpoints"));
            }
            let (n, i) = parse_element(tokens[0], line_no)?;
            let (m, j) = parse_element(tokens[1], line_no)?;
            if m != n + 1 {
                return Err(parse_err(line_no, format!("edge must join rank n to n+1, got {n} and {m}")));
            }
            if m >= sizes.len() {
                return Err(parse_err(line_no, format!("rank {m} exceeds top rank {}", sizes.len() - 1)));
            }
            if i >= sizes[n] {
                return Err(parse_err(line_no, format!("index {i} out of range for rank {n} (size {})", sizes[n])));
            }
            if j >= sizes[m] {
                return Err(parse_err(line_no, format!("index {j} out of range for rank {m} (size {})", sizes[m])));
            }
            if !seen.insert((n, i, j)) {
                return Err(parse_err(line_no, format!("duplicate edge {n}:{i} {m}:{j}")));
            }
            edges[n].push((i, j));
        } else {
            return Err(parse_err(line_no, format!("unrecognized line '{line}'")));
        }
    }

    let sizes = sizes.ok_or_else(|| parse_err(0, "missing rank_sizes header"))?;
    let mut label_table: Vec<Vec<Option<String>>> = sizes.iter().map(|&p| vec![None; p]).collect();
    for (line_no, n, i, text) in labels {
        if n >= sizes.len() || i >= sizes[n] {
            return Err(parse_err(line_no, format!("label for nonexistent element {n}:{i}")));
        }
        label_table[n][i] = Some(text);
    }
    GradedPoset::new(sizes, edges, r).map_err(|e| parse_err(0, e.to_string()))?.with_labels(label_table)
}

pub fn write_hasse(poset: &GradedPoset) -> String {
    let mut out = String::new();
    writeln!(out, "# {FORMAT_TAG}").unwrap();
    let sizes: Vec<String> = poset.rank_sizes().iter().map(ToString::to_string).collect();
    writeln!(out, "rank_sizes: {}", sizes.join(" ")).unwrap();
    if let Some(r) = poset.r() {
        writeln!(out, "r: {r}").unwrap();
    }
    for (n, rank) in poset.labels().iter().enumerate() {
        for (i, label) in rank.iter().enumerate() {
            if let Some(l) = label {
                writeln!(out, "# label {n}:{i} {l}").unwrap();
            }
        }
    }
    for n in 0..poset.top_rank() {
        for (i, j) in poset.edges(n) {
            writeln!(out, "edge {n}:{i} {}:{j}", n + 1).unwrap();
        }
    }
    out
}
