use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use gmrf_core::graph::{generate, parse_edge_list, Graph, GraphFamily};
use gmrf_core::{Error, Result};

/// Where a graph comes from: an edge-list file or a generator expression.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Family(GraphFamily, Option<u64>),
}

impl FromStr for GraphSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GraphSource::File(path.into()));
        }
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut seed = None;
        let mut params = Vec::new();
        for p in rest.split(',').filter(|p| !p.is_empty()) {
            match p.trim().strip_prefix("seed=") {
                Some(v) => {
                    seed = Some(v.parse().map_err(|_| Error::Parameter(format!("bad seed {v:?}")))?);
                }
                None => params.push(p),
            }
        }
        let family: GraphFamily = format!("{name}:{}", params.join(",")).parse()?;
        if family.is_random() && seed.is_none() {
            seed = Some(0);
        }
        Ok(GraphSource::Family(family, seed))
    }
}

impl GraphSource {
    pub fn load(&self) -> Result<Graph> {
        match self {
            GraphSource::File(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Parse {
                    line: 0,
                    msg: format!("{}: {e}", path.display()),
                })?;
                parse_edge_list(&text)
            }
            GraphSource::Family(family, seed) => generate(family, *seed),
        }
    }
}
