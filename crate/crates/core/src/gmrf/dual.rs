//! Damped Newton ascent on `t ↦ ln det B(t)`, where
//! `B(t) = I + Σ_e t_e E_e` and `E_e` carries `x_e` at `(u,u)`, `(v,v)` and
//! `-1` at `(u,v)`, `(v,u)`.

use super::{CorrelationSpec, GmrfSolution, Method};
use crate::error::{Error, Result};
use crate::symmat::{Cholesky, SymMatrix};

const MAX_HALVINGS: usize = 60;
const ARMIJO: f64 = 1e-4;
/// Parameters this large mean the dual objective is unbounded.
const DIVERGENCE: f64 = 1e10;

fn precision(spec: &CorrelationSpec, t: &[f64]) -> SymMatrix {
    let g = spec.graph();
    let mut b = SymMatrix::identity(g.vertex_count().max(1));
    for ((&(u, v), &x), &te) in g.edges().iter().zip(spec.weights()).zip(t) {
        b.set(u, u, b.get(u, u) + x * te);
        b.set(v, v, b.get(v, v) + x * te);
        b.set(u, v, -te);
    }
    b
}

fn constraint_residual(spec: &CorrelationSpec, a: &SymMatrix) -> f64 {
    let g = spec.graph();
    let diag = (0..g.vertex_count())
        .map(|u| (a.get(u, u) - 1.0).abs())
        .fold(0.0, f64::max);
    g.edges()
        .iter()
        .zip(spec.weights())
        .map(|(&(u, v), &x)| (a.get(u, v) - x).abs())
        .fold(diag, f64::max)
}

/// Gradient `x_e (A_uu + A_vv) − 2 A_uv` and the negated Hessian
/// `tr(A E_e A E_f)`.
fn newton_system(spec: &CorrelationSpec, a: &SymMatrix) -> (Vec<f64>, SymMatrix) {
    let g = spec.graph();
    let terms: Vec<[(usize, usize, f64); 4]> = g
        .edges()
        .iter()
        .zip(spec.weights())
        .map(|(&(u, v), &x)| [(u, u, x), (v, v, x), (u, v, -1.0), (v, u, -1.0)])
        .collect();
    let grad = g
        .edges()
        .iter()
        .zip(spec.weights())
        .map(|(&(u, v), &x)| x * (a.get(u, u) + a.get(v, v)) - 2.0 * a.get(u, v))
        .collect();
    let hess = SymMatrix::from_fn(terms.len(), |e, f| {
        let mut s = 0.0;
        for &(p, q, c) in &terms[e] {
            for &(r, w, d) in &terms[f] {
                // tr(A e_p e_qᵀ A e_r e_wᵀ) = A[w][p] A[q][r]
                s += c * d * a.get(w, p) * a.get(q, r);
            }
        }
        s
    });
    (grad, hess)
}

/// Maximize `ln det B(t)` over edge-supported precision matrices.
///
/// Starts from `t = 0` (`B = I`), so any weights in `(-1, 1)` are accepted;
/// an unbounded ascent is reported as [`Error::InfeasibleSpec`].
pub fn solve_dual_ascent(spec: &CorrelationSpec, tol: f64, max_iters: usize) -> Result<GmrfSolution> {
    spec.check_conditioning()?;
    let m = spec.graph().edge_count();
    let mut t = vec![0.0; m];
    let mut factor: Cholesky = precision(spec, &t).cholesky()?;
    let mut objective = factor.logdet();
    let mut a = factor.inverse();
    let mut residual = constraint_residual(spec, &a);
    let mut iterations = 0;

    while residual >= tol {
        if iterations == max_iters {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        }
        iterations += 1;
        let (grad, hess) = newton_system(spec, &a);
        let direction = match hess.cholesky() {
            Ok(h) => h.solve(&grad),
            Err(_) => grad.clone(),
        };
        let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = t.iter().zip(&direction).map(|(t, d)| t + step * d).collect();
            if let Ok(f) = precision(spec, &trial).cholesky() {
                let value = f.logdet();
                let negligible = step * slope <= 1e-14 * objective.abs().max(1.0);
                if value >= objective + ARMIJO * step * slope || (negligible && value >= objective - 1e-12) {
                    accepted = Some((trial, f, value));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((trial, f, value)) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                residual,
            });
        };
        t = trial;
        factor = f;
        objective = value;
        a = factor.inverse();
        residual = constraint_residual(spec, &a);
        if t.iter().any(|v| v.abs() > DIVERGENCE) {
            return Err(Error::InfeasibleSpec(format!(
                "dual parameters diverge (ln det B = {objective:.3e})"
            )));
        }
    }

    // one polishing step: Newton is quadratic here, keep it only if it helps
    if m > 0 {
        let (grad, hess) = newton_system(spec, &a);
        if let Ok(h) = hess.cholesky() {
            let direction = h.solve(&grad);
            let trial: Vec<f64> = t.iter().zip(&direction).map(|(t, d)| t + d).collect();
            if let Ok(f) = precision(spec, &trial).cholesky() {
                let polished = f.inverse();
                if constraint_residual(spec, &polished) < residual {
                    a = polished;
                }
            }
        }
    }

    GmrfSolution::from_covariance(spec.clone(), a, iterations, Method::DualAscent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphFamily};

    fn uniform(family: GraphFamily, x: f64) -> CorrelationSpec {
        CorrelationSpec::uniform(generate(&family, None).unwrap(), x).unwrap()
    }

    #[test]
    fn single_edge_closed_form() {
        for x in [-0.7, -0.2, 0.3, 0.9] {
            let sol = solve_dual_ascent(&uniform(GraphFamily::Path(2), x), 1e-12, 100).unwrap();
            assert!((sol.tau - (1.0 - x * x)).abs() < 1e-12);
            assert!((sol.y[0] - x / (1.0 - x * x)).abs() < 1e-10);
        }
    }

    #[test]
    fn triangle_is_fully_constrained() {
        let sol = solve_dual_ascent(&uniform(GraphFamily::Complete(3), 0.5), 1e-12, 100).unwrap();
        assert!((sol.tau - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_correlation_is_identity() {
        let sol = solve_dual_ascent(&uniform(GraphFamily::Cycle(5), 0.0), 1e-12, 100).unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.tau, 1.0);
    }

    #[test]
    fn infeasible_triangle_is_reported() {
        let err = solve_dual_ascent(&uniform(GraphFamily::Complete(3), -0.6), 1e-10, 500).unwrap_err();
        assert!(matches!(err, Error::InfeasibleSpec(_) | Error::NoConvergence { .. }), "{err:?}");
    }

    #[test]
    fn refuses_near_boundary() {
        let spec = uniform(GraphFamily::Path(2), 1.0 - 1e-7);
        assert!(matches!(solve_dual_ascent(&spec, 1e-10, 10), Err(Error::Refused(_))));
    }
}
