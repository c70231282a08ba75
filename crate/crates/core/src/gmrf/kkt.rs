use serde::Serialize;

use super::{CorrelationSpec, GmrfSolution};

/// Residuals of the optimality conditions for a candidate solution.
#[derive(Debug, Clone, Serialize)]
pub struct KktReport {
    /// max |A·B − I|
    pub identity: f64,
    /// max |(A⁻¹)[u][v]| over non-edges, with `A⁻¹` recomputed from `A`
    pub off_pattern: f64,
    /// max |A[u][u] − 1| and |A[u][v] − x_uv| over edges
    pub constraint: f64,
    /// max |B[u][u] − (1 + Σ x_uv y_uv)|
    pub diagonal: f64,
    /// edge equations `x_uw = (1 − x_uw²) y_uw + Σ_{v ∈ N(w)∖u} (z_uv − x_uw x_vw) y_vw`
    pub edge_equations: f64,
    /// non-edge equations `z_uw = Σ_{v ∈ N(w)} (z_uv − x_vw z_uw) y_vw`
    pub nonedge_equations: f64,
    pub tol: f64,
    pub pass: bool,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        [
            self.identity,
            self.off_pattern,
            self.constraint,
            self.diagonal,
            self.edge_equations,
            self.nonedge_equations,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn verify_kkt(sol: &GmrfSolution, spec: &CorrelationSpec, tol: f64) -> KktReport {
    let g = spec.graph();
    let n = g.vertex_count();
    let (a, b) = (&sol.a, &sol.b);

    let identity = a
        .product(b)
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        })
        .fold(0.0, f64::max);

    let off_pattern = match a.inverse() {
        Ok(inv) => g
            .non_edges()
            .iter()
            .map(|&(u, v)| inv.get(u, v).abs())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };

    let mut constraint = (0..n).map(|u| (a.get(u, u) - 1.0).abs()).fold(0.0, f64::max);
    for (&(u, v), &x) in g.edges().iter().zip(spec.weights()) {
        constraint = constraint.max((a.get(u, v) - x).abs());
    }

    let y = |u: usize, v: usize| -> f64 { sol.y_between(u, v).unwrap_or(0.0) };
    let x = |u: usize, v: usize| -> f64 { spec.weight_between(u, v).unwrap_or(0.0) };

    let diagonal = (0..n)
        .map(|u| {
            let expected: f64 = 1.0 + g.neighbors(u).iter().map(|&v| x(u, v) * y(u, v)).sum::<f64>();
            (b.get(u, u) - expected).abs()
        })
        .fold(0.0, f64::max);

    let mut edge_equations: f64 = 0.0;
    let mut nonedge_equations: f64 = 0.0;
    for u in 0..n {
        for w in 0..n {
            if u == w {
                continue;
            }
            if g.has_edge(u, w) {
                let xuw = x(u, w);
                let rhs = (1.0 - xuw * xuw) * y(u, w)
                    + g.neighbors(w)
                        .iter()
                        .filter(|&&v| v != u)
                        .map(|&v| (a.get(u, v) - xuw * x(v, w)) * y(v, w))
                        .sum::<f64>();
                edge_equations = edge_equations.max((xuw - rhs).abs());
            } else {
                let zuw = a.get(u, w);
                let rhs: f64 = g
                    .neighbors(w)
                    .iter()
                    .map(|&v| (a.get(u, v) - x(v, w) * zuw) * y(v, w))
                    .sum();
                nonedge_equations = nonedge_equations.max((zuw - rhs).abs());
            }
        }
    }

    let mut report = KktReport {
        identity,
        off_pattern,
        constraint,
        diagonal,
        edge_equations,
        nonedge_equations,
        tol,
        pass: false,
    };
    report.pass = report.max_residual() < tol;
    report
}
