//! Extended DIMACS text format: `c` comments, one `p rsp <n> <m>` header and
//! `a <u> <v> <length> <delay>` lines with 1-based vertices.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, RspError};
use crate::graph::MultiDigraph;

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(RspError::Parse { line, msg: msg.into() })
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    match tok {
        None => parse_err(line, format!("missing {what}")),
        Some(t) => t.parse().or_else(|_| parse_err(line, format!("bad {what}: {t:?}"))),
    }
}

pub fn parse_graph(text: &str) -> Result<MultiDigraph> {
    let mut graph: Option<MultiDigraph> = None;
    let mut declared_m = 0usize;
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let mut toks = raw.split_whitespace();
        let Some(kind) = toks.next() else { continue };
        match kind {
            "c" => continue,
            "p" => {
                if graph.is_some() {
                    return parse_err(line, "duplicate header");
                }
                if toks.next() != Some("rsp") {
                    return parse_err(line, "expected \"p rsp <n> <m>\"");
                }
                let n: usize = field(toks.next(), line, "vertex count")?;
                declared_m = field(toks.next(), line, "edge count")?;
                graph = Some(MultiDigraph::new(n));
            }
            "a" => {
                let Some(g) = graph.as_mut() else {
                    return parse_err(line, "edge before header");
                };
                let u: usize = field(toks.next(), line, "tail")?;
                let v: usize = field(toks.next(), line, "head")?;
                let length: f64 = field(toks.next(), line, "length")?;
                let delay: f64 = field(toks.next(), line, "delay")?;
                let n = g.n();
                if u == 0 || u > n || v == 0 || v > n {
                    return parse_err(line, format!("vertex out of range 1..={n}"));
                }
                if g.m() == declared_m {
                    return parse_err(line, format!("more than {declared_m} edges"));
                }
                if let Err(e) = g.add_edge(u - 1, v - 1, length, delay) {
                    return parse_err(line, e.to_string());
                }
            }
            other => return parse_err(line, format!("unknown line type {other:?}")),
        }
        if toks.next().is_some() {
            return parse_err(line, "trailing tokens");
        }
    }
    let g = graph.ok_or(RspError::Parse { line: last, msg: "missing header".into() })?;
    if g.m() != declared_m {
        return parse_err(last, format!("header declares {declared_m} edges, found {}", g.m()));
    }
    Ok(g)
}

pub fn read_graph(path: &Path) -> Result<MultiDigraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

/// Text form; reals use the shortest representation that parses back
/// to the same value.
pub fn format_graph(g: &MultiDigraph, comments: &[&str]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(out, "p rsp {} {}", g.n(), g.m());
    for e in g.edges() {
        let _ = writeln!(out, "a {} {} {} {}", e.from + 1, e.to + 1, e.length, e.delay);
    }
    out
}

pub fn write_graph(path: &Path, g: &MultiDigraph, comments: &[&str]) -> Result<()> {
    Ok(std::fs::write(path, format_graph(g, comments))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_every_bit() {
        let g = MultiDigraph::from_edges(3, &[(0, 1, 0.1, 1.0 / 3.0), (1, 2, 1e-300, 7.0), (1, 2, 2.5, 0.0)]).unwrap();
        let back = parse_graph(&format_graph(&g, &["test"])).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.n(), 3);
    }

    fn err_line(text: &str) -> usize {
        match parse_graph(text) {
            Err(RspError::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_report_their_number() {
        assert_eq!(err_line("c x\np rsp 2 1\na 1 3 1 1\n"), 3);
        assert_eq!(err_line("a 1 2 1 1\n"), 1);
        assert_eq!(err_line("p rsp 2 1\na 1 2 x 1\n"), 2);
        assert_eq!(err_line("p rsp 2 1\na 1 2 -1 1\n"), 2);
        assert_eq!(err_line("p rsp 2 1\na 1 2 1 1 9\n"), 2);
        assert_eq!(err_line("p rsp 2 2\na 1 2 1 1\n"), 2);
        assert_eq!(err_line("p rsp 2 0\np rsp 2 0\n"), 2);
        assert_eq!(err_line("p sp 2 0\n"), 1);
        assert_eq!(err_line("x\n"), 1);
    }
}
