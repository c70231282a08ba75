use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Graph};
use crate::error::{Error, Result};

/// Graph families with their parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphFamily {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    CompleteBipartite(usize, usize),
    /// Triangular book `K_{1,1,k}`: `k` triangles sharing the spine edge `(0, 1)`.
    Book(usize),
    /// `K_{5,5}` minus a Hamiltonian 10-cycle.
    MobiusLadder,
    RandomTree(usize),
    RandomRegular(usize, usize),
    ErdosRenyi(usize, f64),
}

impl GraphFamily {
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            Self::RandomTree(_) | Self::RandomRegular(..) | Self::ErdosRenyi(..)
        )
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Path(n) => write!(f, "path:{n}"),
            Self::Cycle(n) => write!(f, "cycle:{n}"),
            Self::Complete(n) => write!(f, "complete:{n}"),
            Self::CompleteBipartite(a, b) => write!(f, "bipartite:{a},{b}"),
            Self::Book(k) => write!(f, "book:{k}"),
            Self::MobiusLadder => write!(f, "mobius"),
            Self::RandomTree(n) => write!(f, "tree:{n}"),
            Self::RandomRegular(n, d) => write!(f, "regular:{n},{d}"),
            Self::ErdosRenyi(n, p) => write!(f, "er:{n},{p}"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    /// Parses `name:params`, e.g. `cycle:4`, `bipartite:3,3`, `er:12,0.3`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let params: Vec<&str> = rest.split(',').filter(|p| !p.is_empty()).collect();
        let int = |i: usize| -> Result<usize> {
            params
                .get(i)
                .ok_or_else(|| Error::Parameter(format!("{name}: missing parameter {}", i + 1)))?
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("{name}: bad integer {:?}", params[i])))
        };
        let arity = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{name}: expected {k} parameters, got {}",
                    params.len()
                )))
            }
        };
        let family = match name {
            "path" => {
                arity(1)?;
                Self::Path(int(0)?)
            }
            "cycle" => {
                arity(1)?;
                Self::Cycle(int(0)?)
            }
            "complete" => {
                arity(1)?;
                Self::Complete(int(0)?)
            }
            "bipartite" | "complete_bipartite" => {
                arity(2)?;
                Self::CompleteBipartite(int(0)?, int(1)?)
            }
            "book" => {
                arity(1)?;
                Self::Book(int(0)?)
            }
            "mobius" | "mobius_ladder" => {
                arity(0)?;
                Self::MobiusLadder
            }
            "tree" | "random_tree" => {
                arity(1)?;
                Self::RandomTree(int(0)?)
            }
            "regular" | "random_regular" => {
                arity(2)?;
                Self::RandomRegular(int(0)?, int(1)?)
            }
            "er" | "erdos_renyi" => {
                arity(2)?;
                let p: f64 = params[1]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parameter(format!("er: bad probability {:?}", params[1])))?;
                Self::ErdosRenyi(int(0)?, p)
            }
            _ => return Err(Error::Parameter(format!("unknown graph family {name:?}"))),
        };
        Ok(family)
    }
}

const REGULAR_RETRIES: usize = 10_000;

/// Build a member of `family`. Random families require a seed and are
/// deterministic given it.
pub fn generate(family: &GraphFamily, seed: Option<u64>) -> Result<Graph> {
    let rng = || -> Result<ChaCha8Rng> {
        seed.map(ChaCha8Rng::seed_from_u64)
            .ok_or_else(|| Error::Parameter(format!("{family} requires a seed")))
    };
    match *family {
        GraphFamily::Path(n) => {
            if n == 0 {
                return Err(Error::Parameter("path needs n >= 1".into()));
            }
            Graph::new(n, (1..n).map(|i| (i - 1, i)))
        }
        GraphFamily::Cycle(n) => {
            if n < 3 {
                return Err(Error::Parameter("cycle needs n >= 3".into()));
            }
            Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        GraphFamily::Complete(n) => {
            if n == 0 {
                return Err(Error::Parameter("complete graph needs n >= 1".into()));
            }
            Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
        }
        GraphFamily::CompleteBipartite(a, b) => {
            if a == 0 || b == 0 {
                return Err(Error::Parameter("complete bipartite needs both sides >= 1".into()));
            }
            Graph::new(a + b, (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))))
        }
        GraphFamily::Book(k) => {
            if k == 0 {
                return Err(Error::Parameter("book needs k >= 1".into()));
            }
            let pages = (2..k + 2).flat_map(|p| [(0, p), (1, p)]);
            Graph::new(k + 2, std::iter::once((0, 1)).chain(pages))
        }
        GraphFamily::MobiusLadder => {
            // Hamiltonian cycle 0-5-1-6-2-7-3-8-4-9-0 removed from K_{5,5}.
            let on_cycle = |l: usize, r: usize| r == l + 5 || r == (l + 4) % 5 + 5;
            Graph::new(
                10,
                (0..5).flat_map(|l| (5..10).filter(move |&r| !on_cycle(l, r)).map(move |r| (l, r))),
            )
        }
        GraphFamily::RandomTree(n) => {
            if n == 0 {
                return Err(Error::Parameter("tree needs n >= 1".into()));
            }
            Ok(prufer_tree(n, &mut rng()?))
        }
        GraphFamily::RandomRegular(n, d) => random_regular(n, d, &mut rng()?),
        GraphFamily::ErdosRenyi(n, p) => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("edge probability {p} not in [0,1]")));
            }
            let mut rng = rng()?;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            Graph::new(n, edges)
        }
    }
}

fn prufer_tree(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    if n <= 2 {
        return Graph::simplify(n, (1..n).map(|i| (0, i)));
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, c));
        degree[leaf] -= 1;
        degree[c] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::simplify(n, edges)
}

/// Pairing model with rejection of loops and parallel edges.
fn random_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if d >= n || (n * d) % 2 != 0 {
        return Err(Error::Parameter(format!(
            "no {d}-regular graph on {n} vertices (need d < n and n*d even)"
        )));
    }
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    'attempt: for _ in 0..REGULAR_RETRIES {
        points.shuffle(rng);
        let mut edges: Vec<Edge> = Vec::with_capacity(n * d / 2);
        for pair in points.chunks(2) {
            if pair[0] == pair[1] {
                continue 'attempt;
            }
            edges.push(super::edge(pair[0], pair[1]));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return Graph::new(n, edges);
    }
    Err(Error::Refused(format!(
        "pairing model failed {REGULAR_RETRIES} times for n={n}, d={d}"
    )))
}

/// Random chordal graph: each new vertex is joined to a random subset of a
/// random maximal clique built so far, so every vertex is simplicial when
/// removed in reverse insertion order.
pub fn random_chordal(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cliques: Vec<Vec<usize>> = vec![vec![0]];
    let mut edges = Vec::new();
    for v in 1..n {
        let base = cliques[rng.gen_range(0..cliques.len())].clone();
        let keep: Vec<usize> = base.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        for &u in &keep {
            edges.push((u, v));
        }
        let mut clique = keep.clone();
        clique.push(v);
        if keep.len() == base.len() {
            // the old clique is no longer maximal
            if let Some(pos) = cliques.iter().position(|c| *c == base) {
                cliques.remove(pos);
            }
        }
        cliques.push(clique);
    }
    Graph::simplify(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_and_book_counts() {
        let k4 = generate(&GraphFamily::Complete(4), None).unwrap();
        assert_eq!(k4.edge_count(), 6);
        let book = generate(&GraphFamily::Book(3), None).unwrap();
        assert_eq!((book.vertex_count(), book.edge_count()), (5, 7));
        assert!(book.has_edge(0, 1));
    }

    #[test]
    fn mobius_ladder_is_cubic_bipartite() {
        let g = generate(&GraphFamily::MobiusLadder, None).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (10, 15));
        assert_eq!(g.regular_degree(), Some(3));
        assert!(g.is_bipartite());
        assert_eq!(g.girth(), Some(4));
    }

    #[test]
    fn random_families_are_seeded() {
        assert!(generate(&GraphFamily::RandomTree(5), None).is_err());
        let a = generate(&GraphFamily::RandomRegular(12, 3), Some(7)).unwrap();
        let b = generate(&GraphFamily::RandomRegular(12, 3), Some(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.regular_degree(), Some(3));
        let t = generate(&GraphFamily::RandomTree(9), Some(3)).unwrap();
        assert_eq!(t.edge_count(), 8);
        assert!(t.is_connected());
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate(&GraphFamily::Cycle(2), None).is_err());
        assert!(generate(&GraphFamily::RandomRegular(5, 3), Some(1)).is_err());
        assert!(generate(&GraphFamily::RandomRegular(4, 4), Some(1)).is_err());
        assert!(generate(&GraphFamily::ErdosRenyi(4, 1.5), Some(1)).is_err());
    }

    #[test]
    fn family_strings_round_trip() {
        for s in ["path:3", "cycle:4", "bipartite:2,3", "book:4", "mobius", "regular:20,3"] {
            let f: GraphFamily = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("cycle".parse::<GraphFamily>().is_err());
        assert!("hexagon:3".parse::<GraphFamily>().is_err());
    }

    #[test]
    fn chordal_generator_has_simplicial_order() {
        for seed in 0..20 {
            let g = random_chordal(12, seed);
            // reverse insertion order: earlier neighbours form a clique
            for v in 0..12 {
                let earlier: Vec<usize> =
                    g.neighbors(v).iter().copied().filter(|&u| u < v).collect();
                assert!(g.is_clique(&earlier));
            }
        }
    }
}
