use nalgebra::DMatrix;

use super::{AuditReport, Relation};
use crate::error::{Error, Result};
use crate::gmrf::GmrfSolution;

fn uniform_x(sol: &GmrfSolution, what: &str) -> Result<f64> {
    sol.spec
        .uniform_x()
        .ok_or_else(|| Error::NotApplicable(format!("{what} needs a uniform-x solution")))
}

/// Bounds on `Y_u`, `y` and `z` from Schur complements of a two-vertex block,
/// together with `Σ_{N(u)} y ≥ 0` and `2 Σ y ≤ (n−1)/(1−x)`.
pub fn structural_bounds(sol: &GmrfSolution, tol: f64) -> Result<AuditReport> {
    let x = uniform_x(sol, "structural bounds")?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::NotApplicable(format!("x = {x} not in [0, 1)")));
    }
    let g = sol.graph();
    let n = g.vertex_count();
    let mut r = AuditReport::new("structural", g, &[x], tol);
    let load: Vec<f64> = (0..n).map(|u| sol.vertex_load(u)).collect();
    let upper = x / (1.0 - x * x);

    r.worst(
        "Y_u >= x/(1-x^2)",
        Relation::Ge,
        (0..n)
            .filter(|&u| g.degree(u) > 0)
            .map(|u| (format!("vertex {u}"), load[u], upper)),
    );
    r.worst(
        "(1+xY_u)+(1+xY_v)+2y(u,v) >= 2/(1-x)",
        Relation::Ge,
        g.edges().iter().zip(&sol.y).map(|(&(u, v), &y)| {
            (format!("edge ({u},{v})"), 2.0 + x * (load[u] + load[v]) + 2.0 * y, 2.0 / (1.0 - x))
        }),
    );
    r.worst(
        "(1+xY_u)+(1+xY_v) >= 2/(1-z(u,v))",
        Relation::Ge,
        g.non_edges().into_iter().map(|(u, v)| {
            (format!("pair ({u},{v})"), 2.0 + x * (load[u] + load[v]), 2.0 / (1.0 - sol.z(u, v)))
        }),
    );
    r.worst(
        "sum_{N(u)} y >= 0",
        Relation::Ge,
        (0..n).map(|u| (format!("vertex {u}"), load[u], 0.0)),
    );
    r.le("2 sum y <= (n-1)/(1-x)", 2.0 * sol.y_sum(), (n as f64 - 1.0) / (1.0 - x));
    Ok(r)
}

fn general_det(rows: Vec<Vec<f64>>) -> f64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).lu().determinant()
}

/// Minor identities of the precision matrix: deleting a vertex keeps the
/// determinant, deleting an edge's endpoints multiplies it by `1 − x_e²`, and
/// `det(B − tE_e) = det B (1 − t²(1 − x_e²)²)`.
pub fn precision_identities(sol: &GmrfSolution, t: f64, tol: f64) -> Result<AuditReport> {
    let g = sol.graph();
    let n = g.vertex_count();
    let xs = sol.spec.uniform_x().map(|x| vec![x]).unwrap_or_default();
    let mut r = AuditReport::new("precision_identities", g, &xs, tol);
    if n < 2 {
        r.note("fewer than two vertices");
        return Ok(r);
    }
    let ln_det_b = -sol.log_tau;
    let mut vertex = Vec::new();
    for u in 0..n {
        let rest: Vec<usize> = (0..n).filter(|&w| w != u).collect();
        vertex.push((format!("vertex {u}"), sol.b.principal(&rest).logdet()?, ln_det_b));
    }
    r.worst("ln det B^c(u) = ln det B", Relation::Eq, vertex);

    let mut pair = Vec::new();
    let mut perturbed = Vec::new();
    for (&(u, v), &x) in g.edges().iter().zip(sol.spec.weights()) {
        let at = format!("edge ({u},{v})");
        if n > 2 {
            let rest: Vec<usize> = (0..n).filter(|&w| w != u && w != v).collect();
            pair.push((at.clone(), sol.b.principal(&rest).logdet()?, (1.0 - x * x).ln() + ln_det_b));
        }
        let mut rows = sol.b.to_rows();
        rows[u][u] -= t * x;
        rows[v][v] -= t * x;
        rows[u][v] += t;
        rows[v][u] += t;
        let ratio = general_det(rows) * sol.tau;
        let s = 1.0 - x * x;
        perturbed.push((at, ratio, 1.0 - t * t * s * s));
    }
    if n > 2 {
        r.worst("ln det B^c(u,v) = ln(1-x^2) + ln det B", Relation::Eq, pair);
    }
    r.worst("det(B - tE)/det B = 1 - t^2(1-x^2)^2", Relation::Eq, perturbed);
    Ok(r)
}

/// Consequences of `B` being an M-matrix: the clique bound on `y`, and for
/// `0 < x < 1/(Δ−1)` the M-matrix property itself, type I edges, diagonal
/// dominance and `z < x` on non-edges.
pub fn first_interval_checks(sol: &GmrfSolution, tol: f64) -> Result<AuditReport> {
    let x = uniform_x(sol, "first-interval checks")?;
    let g = sol.graph();
    let mut r = AuditReport::new("first_interval", g, &[x], tol);
    if !(0.0..1.0).contains(&x) || g.edge_count() == 0 {
        return Err(Error::NotApplicable(format!("x = {x} not in [0, 1) or no edges")));
    }
    let min_y = sol.y.iter().copied().fold(f64::INFINITY, f64::min);
    let delta = g.max_degree() as f64;
    let small = x > 0.0 && (delta <= 1.0 || x < 1.0 / (delta - 1.0));
    if small {
        r.ge("min y >= 0 (B is an M-matrix)", min_y, 0.0);
        let upper = x / (1.0 - x * x);
        r.worst(
            "y <= x/(1-x^2)",
            Relation::Le,
            g.edges().iter().zip(&sol.y).map(|(&(u, v), &y)| (format!("edge ({u},{v})"), y, upper)),
        );
        r.worst(
            "B diagonally dominant",
            Relation::Ge,
            (0..g.vertex_count()).map(|u| {
                let off: f64 = g.neighbors(u).iter().map(|&v| sol.b.get(u, v).abs()).sum();
                (format!("vertex {u}"), sol.b.get(u, u), off)
            }),
        );
        r.worst(
            "z(u,v) < x on non-edges",
            Relation::Le,
            g.non_edges().into_iter().map(|(u, v)| (format!("pair ({u},{v})"), sol.z(u, v), x)),
        );
    }
    if min_y >= -tol {
        r.worst(
            "y <= x/((1-x)(1+(r-1)x)) for a clique K_r through the edge",
            Relation::Le,
            g.edges().iter().zip(&sol.y).map(|(&(u, v), &y)| {
                let size = g.largest_clique_through(u, v);
                let bound = x / ((1.0 - x) * (1.0 + (size as f64 - 1.0) * x));
                (format!("edge ({u},{v}) in K_{size}"), y, bound)
            }),
        );
    } else {
        r.note("B is not an M-matrix: clique bound not claimed");
    }
    Ok(r)
}

/// Positivity statements for a graph the caller declares vertex-transitive:
/// `y > 0` on edges (indeed `y ≥ x/(n(1−x))`) and `z < x` on non-edges.
pub fn vertex_transitive_check(sol: &GmrfSolution, tol: f64) -> Result<AuditReport> {
    let x = uniform_x(sol, "vertex-transitive check")?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::NotApplicable(format!("x = {x} not in (0, 1)")));
    }
    let g = sol.graph();
    let n = g.vertex_count() as f64;
    let mut r = AuditReport::new("vertex_transitive", g, &[x], tol);
    let floor = x / (n * (1.0 - x));
    r.worst(
        "y >= x/(n(1-x)) > 0",
        Relation::Ge,
        g.edges().iter().zip(&sol.y).map(|(&(u, v), &y)| (format!("edge ({u},{v})"), y, floor)),
    );
    r.worst(
        "z(u,v) < x on non-edges",
        Relation::Le,
        g.non_edges().into_iter().map(|(u, v)| (format!("pair ({u},{v})"), sol.z(u, v), x)),
    );
    r.note("vertex-transitivity is declared by the caller, not detected");
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::AUDIT_TOL;
    use crate::gmrf::{solve, CorrelationSpec};
    use crate::graph::{generate, GraphFamily};

    fn solved(f: GraphFamily, x: f64) -> GmrfSolution {
        solve(&CorrelationSpec::uniform(generate(&f, None).unwrap(), x).unwrap()).unwrap()
    }

    #[test]
    fn single_edge_is_tight() {
        let x = 0.4;
        let r = structural_bounds(&solved(GraphFamily::Path(2), x), AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.checks[0].margin.abs() < 1e-12);
    }

    #[test]
    fn five_cycle_strict_margins() {
        let r = structural_bounds(&solved(GraphFamily::Cycle(5), 0.9), AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.checks[1].margin > 0.0 && r.checks[2].margin > 0.0);
    }

    #[test]
    fn minors_of_a_book() {
        let r = precision_identities(&solved(GraphFamily::Book(3), 0.45), 0.5, AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.checks.len(), 3);
    }

    #[test]
    fn small_x_regime() {
        let r = first_interval_checks(&solved(GraphFamily::Complete(4), 0.3), AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        // K4 edges sit in K4 itself: y equals the clique bound
        assert!(r.checks.last().unwrap().margin.abs() < 1e-9);
    }

    #[test]
    fn cycles_are_positive() {
        for n in [4, 5, 7] {
            let r = vertex_transitive_check(&solved(GraphFamily::Cycle(n), 0.85), AUDIT_TOL).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
}
