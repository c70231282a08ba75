//! Conditionally independent couplings of Gaussian covariances, clique sums
//! of solutions and the exact solver for chordal graphs.
//!
//! Given positive definite `A` on index set `X` and `B` on `Y` that agree on
//! the overlap `Z = X ∩ Y`, the coupling `D = (Ã + B̃ − C̃)⁻¹` (tildes: inverses
//! padded with zeros to `Q = X ∪ Y`, `C` the common overlap block) restricts
//! to `A` and `B`, and `det D = det A · det B / det C`.

use crate::error::{Error, Result};
use crate::gmrf::{CorrelationSpec, GmrfSolution, Method};
use crate::graph::Graph;
use crate::symmat::SymMatrix;

/// Overlap blocks must agree entrywise to this tolerance.
pub const OVERLAP_TOLERANCE: f64 = 1e-12;

/// Positions of the two input index sets inside `Q = 0..q`.
///
/// Row `i` of the left matrix sits at `left[i]` in `Q`, and likewise for the
/// right matrix. Every index of `Q` must be covered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingLayout {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl CouplingLayout {
    pub fn new(left: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        let q = left.iter().chain(&right).map(|&i| i + 1).max().unwrap_or(0);
        let mut seen = vec![0u8; q];
        for (side, indices) in [(1u8, &left), (2u8, &right)] {
            for &i in indices {
                if seen[i] & side != 0 {
                    return Err(Error::Parameter(format!("index {i} repeated")));
                }
                seen[i] |= side;
            }
        }
        if let Some(i) = seen.iter().position(|&s| s == 0) {
            return Err(Error::Parameter(format!("index {i} not covered")));
        }
        Ok(CouplingLayout { left, right })
    }

    pub fn size(&self) -> usize {
        self.left.iter().chain(&self.right).map(|&i| i + 1).max().unwrap_or(0)
    }

    /// `(position in left, position in right)` for every shared index, in
    /// increasing global order.
    pub fn overlap(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize, usize)> = Vec::new();
        for (i, &gi) in self.left.iter().enumerate() {
            if let Some(j) = self.right.iter().position(|&gj| gj == gi) {
                out.push((gi, i, j));
            }
        }
        out.sort_unstable();
        out.into_iter().map(|(_, i, j)| (i, j)).collect()
    }
}

/// Result of [`couple`].
#[derive(Debug, Clone)]
pub struct Coupled {
    pub matrix: SymMatrix,
    /// `ln det A + ln det B − ln det C`
    pub log_det: f64,
}

pub fn couple(left: &SymMatrix, right: &SymMatrix, layout: &CouplingLayout) -> Result<Coupled> {
    if left.dim() != layout.left.len() || right.dim() != layout.right.len() {
        return Err(Error::Parameter("layout does not match matrix sizes".into()));
    }
    let overlap = layout.overlap();
    let mut mismatch: f64 = 0.0;
    for (a, &(i1, j1)) in overlap.iter().enumerate() {
        for &(i2, j2) in &overlap[..=a] {
            mismatch = mismatch.max((left.get(i1, i2) - right.get(j1, j2)).abs());
        }
    }
    if mismatch > OVERLAP_TOLERANCE {
        return Err(Error::OverlapMismatch(mismatch));
    }

    let fl = left.cholesky()?;
    let fr = right.cholesky()?;
    let (inv_l, inv_r) = (fl.inverse(), fr.inverse());
    let mut precision = SymMatrix::zeros(layout.size());
    let mut accumulate = |inv: &SymMatrix, map: &dyn Fn(usize) -> usize, sign: f64| {
        for i in 0..inv.dim() {
            for j in 0..=i {
                let (p, q) = (map(i), map(j));
                precision.set(p, q, precision.get(p, q) + sign * inv.get(i, j));
            }
        }
    };
    accumulate(&inv_l, &|i| layout.left[i], 1.0);
    accumulate(&inv_r, &|j| layout.right[j], 1.0);
    let mut log_det = fl.logdet() + fr.logdet();
    if !overlap.is_empty() {
        let idx: Vec<usize> = overlap.iter().map(|&(i, _)| i).collect();
        let fc = left.principal(&idx).cholesky()?;
        log_det -= fc.logdet();
        accumulate(&fc.inverse(), &|k| layout.left[idx[k]], -1.0);
    }
    let matrix = precision.inverse()?;
    Ok(Coupled { matrix, log_det })
}

/// Glue two uniform-`x` solutions along cliques `s1 ⊆ V(G1)`, `s2 ⊆ V(G2)`,
/// identifying `s1[i]` with `s2[i]`.
///
/// Vertices of `G1` keep their labels; the remaining vertices of `G2` follow
/// in increasing order.
pub fn clique_sum_solve(
    sol1: &GmrfSolution,
    sol2: &GmrfSolution,
    s1: &[usize],
    s2: &[usize],
) -> Result<GmrfSolution> {
    let (x1, x2) = match (sol1.spec.uniform_x(), sol2.spec.uniform_x()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Parameter("clique sums need uniform-x solutions".into())),
    };
    if x1 != x2 {
        return Err(Error::Parameter(format!("x mismatch: {x1} vs {x2}")));
    }
    let (g1, g2) = (sol1.graph(), sol2.graph());
    if s1.len() != s2.len() {
        return Err(Error::NotClique("overlaps differ in size".into()));
    }
    if !g1.is_clique(s1) || !g2.is_clique(s2) {
        return Err(Error::NotClique(format!("{s1:?} / {s2:?}")));
    }
    let n1 = g1.vertex_count();
    let mut map2 = vec![usize::MAX; g2.vertex_count()];
    for (&a, &b) in s1.iter().zip(s2) {
        map2[b] = a;
    }
    let mut next = n1;
    for slot in map2.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = next;
        next += 1;
    }
    let graph = Graph::simplify(
        next,
        g1.edges()
            .iter()
            .copied()
            .chain(g2.edges().iter().map(|&(u, v)| (map2[u], map2[v]))),
    );
    let layout = CouplingLayout::new((0..n1).collect(), map2)?;
    let coupled = couple(&sol1.a, &sol2.a, &layout)?;
    let spec = CorrelationSpec::uniform(graph, x1)?;
    GmrfSolution::from_covariance(spec, coupled.matrix, 0, Method::CliqueSum)
}

/// Lexicographic breadth-first search; returns the visit order.
pub fn lex_bfs(g: &Graph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for step in 0..n {
        // largest label, ties to the smallest vertex index
        let v = (0..n)
            .filter(|&v| !visited[v])
            .max_by(|&a, &b| labels[a].cmp(&labels[b]).then(b.cmp(&a)))
            .unwrap();
        visited[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !visited[w] {
                labels[w].push(n - step);
            }
        }
    }
    order
}

/// Visit order whose reverse is a perfect elimination ordering, or
/// [`Error::NotChordal`].
pub fn perfect_elimination_order(g: &Graph) -> Result<Vec<usize>> {
    let order = lex_bfs(g);
    let mut position = vec![0; g.vertex_count()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    for (i, &v) in order.iter().enumerate() {
        let earlier: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| position[w] < i)
            .collect();
        if !g.is_clique(&earlier) {
            return Err(Error::NotChordal);
        }
    }
    Ok(order)
}

/// Maximal cliques of a chordal graph, each sorted, in visit order.
pub fn maximal_cliques(g: &Graph) -> Result<Vec<Vec<usize>>> {
    let order = perfect_elimination_order(g)?;
    let mut position = vec![0; g.vertex_count()];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut candidates: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c: Vec<usize> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| position[w] < i)
                .chain(std::iter::once(v))
                .collect();
            c.sort_unstable();
            c
        })
        .collect();
    let all = candidates.clone();
    candidates.retain(|c| {
        !all.iter()
            .any(|d| d.len() > c.len() && c.iter().all(|v| d.binary_search(v).is_ok()))
    });
    Ok(candidates)
}

/// Exact maximizer for a chordal graph: vertices are added in Lex-BFS order
/// and each one is coupled to the clique formed by its earlier neighbours.
pub fn chordal_solve(spec: &CorrelationSpec) -> Result<GmrfSolution> {
    let g = spec.graph();
    let order = perfect_elimination_order(g)?;
    let n = g.vertex_count();
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut current = SymMatrix::identity(1);
    for (i, &v) in order.iter().enumerate().skip(1) {
        let mut clique: Vec<usize> = g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&w| position[w] < i)
            .collect();
        clique.sort_unstable_by_key(|&w| position[w]);
        clique.push(v);
        let block = SymMatrix::from_fn(clique.len(), |a, b| {
            if a == b {
                1.0
            } else {
                spec.weight_between(clique[a], clique[b]).unwrap()
            }
        });
        let layout = CouplingLayout::new(
            (0..i).collect(),
            clique.iter().map(|&w| position[w]).collect(),
        )?;
        current = couple(&current, &block, &layout)?.matrix;
    }
    let a = SymMatrix::from_fn(n.max(1), |u, v| current.get(position[u], position[v]));
    GmrfSolution::from_covariance(spec.clone(), a, 0, Method::ChordalExact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};

    #[test]
    fn independent_standard_normals() {
        let layout = CouplingLayout::new(vec![0, 1], vec![1, 2]).unwrap();
        let d = couple(&SymMatrix::identity(2), &SymMatrix::identity(2), &layout).unwrap();
        assert!(d.matrix.max_abs_diff(&SymMatrix::identity(3)) < 1e-15);
        assert!(d.log_det.abs() < 1e-15);
    }

    #[test]
    fn two_edges_make_a_path() {
        let x = 0.6;
        let k2 = SymMatrix::constant_correlation(2, x);
        let layout = CouplingLayout::new(vec![0, 1], vec![1, 2]).unwrap();
        let d = couple(&k2, &k2, &layout).unwrap().matrix;
        assert!((d.get(0, 2) - x * x).abs() < 1e-14);
        assert!((d.get(0, 1) - x).abs() < 1e-14);
    }

    #[test]
    fn overlap_mismatch_detected() {
        let a = SymMatrix::constant_correlation(2, 0.5);
        let b = SymMatrix::constant_correlation(2, 0.4);
        let layout = CouplingLayout::new(vec![0, 1], vec![0, 1]).unwrap();
        assert!(matches!(couple(&a, &b, &layout), Err(Error::OverlapMismatch(_))));
    }

    #[test]
    fn layout_validation() {
        assert!(CouplingLayout::new(vec![0, 2], vec![2]).is_err());
        assert!(CouplingLayout::new(vec![0, 0], vec![1]).is_err());
    }

    #[test]
    fn four_cycle_is_not_chordal() {
        let c4 = generate(&GraphFamily::Cycle(4), None).unwrap();
        let spec = CorrelationSpec::uniform(c4, 0.3).unwrap();
        assert!(matches!(chordal_solve(&spec), Err(Error::NotChordal)));
    }

    #[test]
    fn book_cliques() {
        let g = generate(&GraphFamily::Book(3), None).unwrap();
        let mut cliques = maximal_cliques(&g).unwrap();
        cliques.sort();
        assert_eq!(cliques, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]]);
    }
}
