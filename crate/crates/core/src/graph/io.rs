//! Plain-text edge lists.
//!
//! ```text
//! # optional comments
//! n 4
//! e 0 1
//! e 1 2
//! ```

use std::fmt::Write as _;

use super::Graph;
use crate::error::{Error, Result};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad integer {s:?}")));
        match (n, fields.as_slice()) {
            (None, ["n", count]) => n = Some(num(count)?),
            (None, _) => return Err(err("expected `n <N>` header")),
            (Some(_), ["e", u, v]) => edges.push((num(u)?, num(v)?)),
            (Some(_), _) => return Err(err("expected `e <u> <v>`")),
        }
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        msg: "missing `n <N>` header".into(),
    })?;
    Graph::new(n, edges)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "n {}", g.vertex_count()).unwrap();
    for &(u, v) in g.edges() {
        writeln!(out, "e {u} {v}").unwrap();
    }
    out
}
