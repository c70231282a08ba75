//! Ihara zeta function through the three-term determinant of Bass and through
//! the non-backtracking directed edge matrix, and the zeta bounds on `τ`.

use nalgebra::DMatrix;

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::gmrf::{solve, CorrelationSpec};
use crate::graph::Graph;
use crate::symmat::SymMatrix;

/// Largest directed edge matrix handled by [`zeta_edge`].
pub const MAX_DIRECTED_EDGES: usize = 2000;
/// Highest power in exact trace checks.
pub const MAX_TRACE_POWER: usize = 12;
/// Determinants below this magnitude are treated as poles of `ζ`.
const POLE_TOLERANCE: f64 = 1e-13;

/// `I − xA + (D − I)x²`.
pub fn bass_matrix(g: &Graph, x: f64) -> SymMatrix {
    SymMatrix::from_fn(g.vertex_count().max(1), |i, j| {
        if i == j {
            1.0 + (g.degree(i) as f64 - 1.0) * x * x
        } else if g.has_edge(i, j) {
            -x
        } else {
            0.0
        }
    })
}

/// Sign and log-magnitude of a general determinant.
fn signed_log_det(m: DMatrix<f64>) -> (f64, f64) {
    let lu = m.lu();
    let u = lu.u();
    let mut sign = if lu.p().determinant::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut log = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d < 0.0 {
            sign = -sign;
        }
        log += d.abs().ln();
    }
    (sign, log)
}

/// `ln ζ_G(x)` from the Bass determinant; errors at poles.
pub fn log_zeta_bass(g: &Graph, x: f64) -> Result<(f64, f64)> {
    if g.vertex_count() == 0 {
        return Ok((1.0, 0.0));
    }
    let rows = bass_matrix(g, x).to_rows();
    let n = rows.len();
    let (sign, log_det) = signed_log_det(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
    if log_det < POLE_TOLERANCE.ln() {
        return Err(Error::Pole(x));
    }
    let excess = g.edge_count() as f64 - g.vertex_count() as f64;
    Ok((sign, -(excess * (1.0 - x * x).ln() + log_det)))
}

pub fn zeta_bass(g: &Graph, x: f64) -> Result<f64> {
    let (sign, log) = log_zeta_bass(g, x)?;
    Ok(sign * log.exp())
}

/// Non-backtracking matrix on the `2e(G)` arcs: `M[e][f] = 1` when the head
/// of `e` is the tail of `f` and `f` does not reverse `e`.
#[derive(Debug, Clone)]
pub struct DirectedEdgeMatrix {
    /// arc `2i` is `edges[i]` forwards, `2i + 1` backwards
    arcs: Vec<(usize, usize)>,
    successors: Vec<Vec<usize>>,
}

impl DirectedEdgeMatrix {
    pub fn new(g: &Graph) -> Result<Self> {
        let dim = 2 * g.edge_count();
        if dim > MAX_DIRECTED_EDGES {
            return Err(Error::Refused(format!("{dim} arcs exceed the limit {MAX_DIRECTED_EDGES}")));
        }
        let arcs: Vec<(usize, usize)> = g.edges().iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
        let mut leaving: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
        for (i, &(tail, _)) in arcs.iter().enumerate() {
            leaving[tail].push(i);
        }
        let successors = arcs
            .iter()
            .map(|&(tail, head)| {
                leaving[head]
                    .iter()
                    .copied()
                    .filter(|&f| arcs[f].1 != tail)
                    .collect()
            })
            .collect();
        Ok(DirectedEdgeMatrix { arcs, successors })
    }

    pub fn dim(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn successors(&self, arc: usize) -> &[usize] {
        &self.successors[arc]
    }

    pub fn max_row_sum(&self) -> usize {
        self.successors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (e, succ) in self.successors.iter().enumerate() {
            for &f in succ {
                m[(e, f)] = 1.0;
            }
        }
        m
    }

    /// Exact `tr(M^k)` for `k = 1..=max_power`: closed non-backtracking walks.
    pub fn trace_powers(&self, max_power: usize) -> Result<Vec<u128>> {
        let dim = self.dim();
        let mut traces = vec![0u128; max_power];
        let mut current = vec![0u128; dim];
        let mut next = vec![0u128; dim];
        for start in 0..dim {
            current.fill(0);
            current[start] = 1;
            for trace in traces.iter_mut() {
                next.fill(0);
                for (e, &count) in current.iter().enumerate() {
                    if count == 0 {
                        continue;
                    }
                    for &f in &self.successors[e] {
                        next[f] = next[f]
                            .checked_add(count)
                            .ok_or_else(|| Error::Integrity("walk count overflow".into()))?;
                    }
                }
                std::mem::swap(&mut current, &mut next);
                *trace += current[start];
            }
        }
        Ok(traces)
    }
}

/// `ln ζ_G(x) = −ln det(I − xM)`, with its sign.
pub fn log_zeta_edge(g: &Graph, x: f64) -> Result<(f64, f64)> {
    let m = DirectedEdgeMatrix::new(g)?;
    if m.dim() == 0 {
        return Ok((1.0, 0.0));
    }
    let dense = DMatrix::identity(m.dim(), m.dim()) - m.to_dense() * x;
    let (sign, log_det) = signed_log_det(dense);
    if log_det < POLE_TOLERANCE.ln() {
        return Err(Error::Pole(x));
    }
    Ok((sign, -log_det))
}

pub fn zeta_edge(g: &Graph, x: f64) -> Result<f64> {
    let (sign, log) = log_zeta_edge(g, x)?;
    Ok(sign * log.exp())
}

/// `2e((Δ−1)|x|)^g / (1 − (Δ−1)|x|)`, zero for forests.
fn girth_bound(g: &Graph, x: f64) -> f64 {
    let q = (g.max_degree() as f64 - 1.0).max(0.0) * x.abs();
    match g.girth() {
        Some(girth) => 2.0 * g.edge_count() as f64 * q.powi(girth as i32) / (1.0 - q),
        None => 0.0,
    }
}

/// Zeta bounds on `τ` for `|x| < 1/(Δ−1)`.
pub fn zeta_tau_audit(g: &Graph, x: f64, tol: f64) -> Result<AuditReport> {
    let delta = g.max_degree() as f64;
    if x.abs() >= 1.0 || (delta > 1.0 && x.abs() >= 1.0 / (delta - 1.0)) {
        return Err(Error::NotApplicable(format!("|x| = {} not below 1/(Δ-1)", x.abs())));
    }
    let mut r = AuditReport::new("zeta_tau", g, &[x], tol);
    let m = g.edge_count() as f64;
    let s = 1.0 - x * x;
    let sol = solve(&CorrelationSpec::uniform(g.clone(), x)?)?;

    let z = bass_matrix(g, x).scaled(1.0 / s);
    let t = x / s;
    let mut member = SymMatrix::identity(z.dim());
    for &(u, v) in g.edges() {
        member.set(u, u, member.get(u, u) + t * x);
        member.set(v, v, member.get(v, v) + t * x);
        member.set(u, v, -t);
    }
    r.close("Z_G(x) = I + sum t E_e with t = x/(1-x^2)", z.max_abs_diff(&member), 0.0, tol);
    match z.cholesky() {
        Ok(f) => {
            let min_pivot = f.pivots().into_iter().fold(f64::INFINITY, f64::min);
            r.ge("Z_G(x) positive definite (min pivot)", min_pivot, 0.0);
            r.le("ln det Z_G(x) <= ln det B_G(x)", f.logdet(), -sol.log_tau);
        }
        Err(_) => r.ge("Z_G(x) positive definite (min pivot)", f64::NEG_INFINITY, 0.0),
    }

    let (sign, ln_zeta) = log_zeta_edge(g, x)?;
    if sign < 0.0 {
        r.note("det(I - xM) negative");
    }
    r.ge("ln zeta + e ln(1-x^2) >= ln tau", ln_zeta + m * s.ln(), sol.log_tau);
    r.le("ln zeta <= 2e((D-1)|x|)^g/(1-(D-1)|x|)", ln_zeta, girth_bound(g, x));
    if m > 0.0 {
        let excess = sol.log_tau / m - s.ln();
        let per_edge = girth_bound(g, x) / m;
        if x >= 0.0 || g.is_bipartite() {
            r.le("|ln tau/e - ln(1-x^2)| <= 2((D-1)|x|)^g/(1-(D-1)|x|)", excess.abs(), per_edge);
        } else {
            r.le("ln tau/e - ln(1-x^2) <= 2((D-1)|x|)^g/(1-(D-1)|x|)", excess, per_edge);
            r.note("negative x on a non-bipartite graph: only the upper side is claimed");
        }
    }
    Ok(r)
}
