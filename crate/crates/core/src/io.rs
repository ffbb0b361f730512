//! Edge-list and Matrix Market readers, edge-list writer.
//!
//! Edge list: one `p q [w]` per line (1-based ids, `w` defaults to 1),
//! `#` starts a comment line, an optional `n <count>` header fixes the node
//! count. Without the header `n` is the largest id seen. `p p w` is a loop.
//!
//! Matrix Market: `coordinate` `real|integer|pattern` `symmetric`; either
//! triangle may be given, diagonal entries become loops.

use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    MatrixMarket,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edgelist" | "edges" | "txt" => Ok(GraphFormat::EdgeList),
            "mtx" | "matrix-market" => Ok(GraphFormat::MatrixMarket),
            other => Err(Error::InvalidArgument(format!(
                "unknown graph format {other:?}"
            ))),
        }
    }
}

pub fn load_graph<R: BufRead>(reader: R, format: GraphFormat) -> Result<WeightedGraph> {
    match format {
        GraphFormat::EdgeList => read_edge_list(reader),
        GraphFormat::MatrixMarket => read_matrix_market(reader),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_id(token: &str, line: usize) -> Result<usize> {
    let id: usize = token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid node id {token:?}")))?;
    if id == 0 {
        return Err(parse_err(line, "node ids are 1-based, got 0"));
    }
    Ok(id)
}

fn parse_weight(token: &str, line: usize) -> Result<f64> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid weight {token:?}")))
}

// Builder errors other than weight errors lose their line number; attach it.
fn with_line(err: Error, line: usize) -> Error {
    match err {
        Error::NodeOutOfRange { .. } | Error::DuplicateEdge { .. } => {
            parse_err(line, err.to_string())
        }
        other => other,
    }
}

fn build(n: usize, triples: Vec<(usize, usize, f64, usize)>) -> Result<WeightedGraph> {
    let mut builder = GraphBuilder::new(n);
    for (p, q, w, line) in triples {
        builder
            .add(p - 1, q - 1, w, line)
            .map_err(|e| with_line(e, line))?;
    }
    Ok(builder.build())
}

fn read_edge_list<R: BufRead>(reader: R) -> Result<WeightedGraph> {
    let mut declared: Option<usize> = None;
    let mut triples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens[0] == "n" {
            if tokens.len() != 2 || declared.is_some() || !triples.is_empty() {
                return Err(parse_err(
                    lineno,
                    "malformed or misplaced `n <count>` header",
                ));
            }
            let n = tokens[1]
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid node count {:?}", tokens[1])))?;
            declared = Some(n);
            continue;
        }
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(parse_err(lineno, "expected `p q [w]`"));
        }
        let p = parse_id(tokens[0], lineno)?;
        let q = parse_id(tokens[1], lineno)?;
        let w = match tokens.get(2) {
            Some(t) => parse_weight(t, lineno)?,
            None => 1.0,
        };
        if let Some(n) = declared {
            if p.max(q) > n {
                return Err(parse_err(
                    lineno,
                    format!("node id {} exceeds declared n = {n}", p.max(q)),
                ));
            }
        }
        triples.push((p, q, w, lineno));
    }
    let n = declared.unwrap_or_else(|| triples.iter().map(|t| t.0.max(t.1)).max().unwrap_or(0));
    build(n, triples)
}

fn read_matrix_market<R: BufRead>(reader: R) -> Result<WeightedGraph> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty Matrix Market file"))?;
    let header = header?.to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(1, "only coordinate storage is supported"));
    }
    let pattern = match fields[3] {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    if fields[4] != "symmetric" {
        return Err(parse_err(1, "matrix must be declared symmetric"));
    }

    let mut size: Option<(usize, usize)> = None;
    let mut triples = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let Some((n, _)) = size else {
            if tokens.len() != 3 {
                return Err(parse_err(lineno, "expected `rows cols nnz`"));
            }
            let nums: Vec<usize> = tokens
                .iter()
                .map(|t| {
                    t.parse()
                        .map_err(|_| parse_err(lineno, "invalid size line"))
                })
                .collect::<Result<_>>()?;
            if nums[0] != nums[1] {
                return Err(parse_err(lineno, "matrix must be square"));
            }
            size = Some((nums[0], nums[2]));
            continue;
        };
        let expected = if pattern { 2 } else { 3 };
        if tokens.len() != expected {
            return Err(parse_err(lineno, format!("expected {expected} fields")));
        }
        let i = parse_id(tokens[0], lineno)?;
        let j = parse_id(tokens[1], lineno)?;
        if i.max(j) > n {
            return Err(parse_err(
                lineno,
                format!("index {} exceeds n = {n}", i.max(j)),
            ));
        }
        let w = if pattern {
            1.0
        } else {
            parse_weight(tokens[2], lineno)?
        };
        if i == j && w == 0.0 {
            continue;
        }
        triples.push((i, j, w, lineno));
    }
    let (n, _) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    build(n, triples)
}

/// Writes `n <count>` followed by one `p q w` line per edge and loop, pairs
/// in lexicographic order. Weights use the shortest round-trip formatting.
pub fn write_edge_list<W: Write>(g: &WeightedGraph, mut out: W) -> Result<()> {
    writeln!(out, "n {}", g.node_count())?;
    let mut entries: Vec<(usize, usize, f64)> = g.edges().collect();
    entries.extend(g.loops().map(|(i, w)| (i, i, w)));
    entries.sort_by_key(|&(p, q, _)| (p, q));
    for (p, q, w) in entries {
        writeln!(out, "{} {} {}", p + 1, q + 1, w)?;
    }
    Ok(())
}
