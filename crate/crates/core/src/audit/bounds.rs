use super::{AuditReport, Relation, DERIVATIVE_TOL};
use crate::error::{Error, Result};
use crate::gmrf::{complete, log_tau, solve, CorrelationSpec, GmrfSolution};
use crate::graph::{generate, hom_density, small_targets, Graph, GraphFamily};

fn solved(g: &Graph, x: f64) -> Result<GmrfSolution> {
    solve(&CorrelationSpec::uniform(g.clone(), x)?)
}

/// Slack on hypotheses phrased through `y_e`, which is only known to solver
/// accuracy.
const HYPOTHESIS_SLACK: f64 = 1e-9;

/// `ln τ(G, x) ≥ e(G) ln(1 − x²)`, also at `−x` for bipartite graphs.
pub fn sidorenko_check(g: &Graph, x: f64, tol: f64) -> Result<AuditReport> {
    let bipartite = g.is_bipartite();
    if x < 0.0 && !bipartite {
        return Err(Error::NotApplicable(format!("negative x = {x} on a non-bipartite graph")));
    }
    let mut r = AuditReport::new("sidorenko", g, &[x], tol);
    let floor = g.edge_count() as f64 * (1.0 - x * x).ln();
    r.ge("ln tau >= e ln(1-x^2)", log_tau(g, x)?, floor);
    if bipartite && x != 0.0 {
        r.ge("ln tau(-x) >= e ln(1-x^2)", log_tau(g, -x)?, floor);
    }
    Ok(r)
}

/// First interval `[0, 1/(Δ−1)]`; the whole of `[0, 1)` when `Δ ≤ 1`.
fn in_first_interval(g: &Graph, x: f64) -> bool {
    let delta = g.max_degree();
    x >= 0.0 && (delta <= 1 || x <= 1.0 / (delta as f64 - 1.0))
}

/// Second interval `[1/(d̄−1), 1)`, empty when `d̄ ≤ 1`.
fn in_second_interval(g: &Graph, x: f64) -> bool {
    let dbar = g.average_degree();
    dbar > 1.0 && x >= 1.0 / (dbar - 1.0)
}

/// Central-difference check of `(ln τ)' = −2 Σ y_e`, extrapolated from steps
/// `h` and `h/2`, and on the two
/// intervals where it is claimed, `2 Σ y_e ≤ 2 e(G) x/(1−x²)`.
pub fn log_derivative_check(g: &Graph, x: f64, h: f64, tol: f64) -> Result<AuditReport> {
    if !(x > 0.0 && x < 1.0) || x + h >= 1.0 || x - h <= -1.0 {
        return Err(Error::NotApplicable(format!("x = {x}, h = {h}")));
    }
    let mut r = AuditReport::new("log_derivative", g, &[x, h], tol);
    let sol = solved(g, x)?;
    let two_sum = 2.0 * sol.y_sum();
    let central = |h: f64| -> Result<f64> { Ok((log_tau(g, x + h)? - log_tau(g, x - h)?) / (2.0 * h)) };
    // one Richardson step: the h² term grows like (1 − x)⁻³ and dominates near 1
    let derivative = (4.0 * central(0.5 * h)? - central(h)?) / 3.0;
    r.close("d/dx ln tau = -2 sum y", derivative, -two_sum, DERIVATIVE_TOL);
    let cap = 2.0 * g.edge_count() as f64 * x / (1.0 - x * x);
    if in_first_interval(g, x) || in_second_interval(g, x) {
        r.le("2 sum y <= 2 e x/(1-x^2)", two_sum, cap);
    } else {
        r.note("x lies outside both intervals; comparison with the single edge not claimed");
    }
    Ok(r)
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
    }
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, eps, 50)
}

/// `α(d̄, x) = ∫_u^x 2(t(d̄−1) − 1) / (d̄(1 − t²)) dt` with `u = 1/(d̄−1)`,
/// by adaptive Simpson quadrature to `1e-10`.
///
/// For `d̄ = 2` the lower limit is `u = 1` and any `x ∈ (0, 1)` is accepted;
/// the integral then runs backwards over a negative integrand.
pub fn alpha_integral(dbar: f64, x: f64) -> Result<f64> {
    if !(dbar >= 2.0) || !(x < 1.0) {
        return Err(Error::NotApplicable(format!("alpha({dbar}, {x})")));
    }
    let u = 1.0 / (dbar - 1.0);
    let degenerate = dbar == 2.0;
    if (degenerate && x <= 0.0) || (!degenerate && x < u) {
        return Err(Error::NotApplicable(format!("x = {x} below 1/(dbar-1) = {u}")));
    }
    let f = move |t: f64| 2.0 * (t * (dbar - 1.0) - 1.0) / (dbar * (1.0 - t * t));
    if degenerate {
        // the integrand reduces to −1/(1+t), regular at t = 1
        return Ok(-integrate(&|t| -1.0 / (1.0 + t), x, u, 1e-10));
    }
    if x == u {
        return Ok(0.0);
    }
    Ok(integrate(&f, u, x, 1e-10))
}

/// (a) first-interval two-sided bound through the girth; (b) second-interval
/// lower bound by `α(d̄, x)`.
pub fn tightness_bounds(g: &Graph, x: f64, tol: f64) -> Result<AuditReport> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::NotApplicable("graph has no edges".into()));
    }
    let delta = g.max_degree() as f64;
    let dbar = g.average_degree();
    let first = x >= 0.0 && (delta <= 1.0 || x < 1.0 / (delta - 1.0));
    // for d̄ ≤ 2 the second regime (1/(d̄−1), 1) is empty
    let second = dbar > 2.0 && x >= 1.0 / (dbar - 1.0) && x < 1.0;
    if !first && !second {
        return Err(Error::NotApplicable(format!("x = {x} outside both regimes")));
    }
    let mut r = AuditReport::new("tightness", g, &[x], tol);
    let excess = log_tau(g, x)? / m as f64 - (1.0 - x * x).ln();
    if first {
        let q = (delta - 1.0).max(0.0) * x;
        let bound = match g.girth() {
            Some(girth) => 2.0 * q.powi(girth as i32) / (1.0 - q),
            None => 0.0,
        };
        r.le("|ln tau/e - ln(1-x^2)| <= 2((D-1)x)^g/(1-(D-1)x)", excess.abs(), bound);
    }
    if second {
        r.ge("ln tau/e - ln(1-x^2) >= alpha(dbar, x)", excess, alpha_integral(dbar, x)?);
    }
    Ok(r)
}

/// Deletion and contraction bounds under their hypotheses on `y_e`, and the
/// unconditional counterpart through `z = z_{G−e}(u, v)`.
pub fn deletion_contraction_audit(g: &Graph, (u, v): (usize, usize), x: f64, tol: f64) -> Result<AuditReport> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::NotApplicable(format!("x = {x} not in [0, 1)")));
    }
    let minus = g.delete_edge(u, v)?;
    let sol = solved(g, x)?;
    let y = sol.y_between(u, v).expect("edge present");
    let upper = x / (1.0 - x * x);
    let ln_edge = (1.0 - x * x).ln();
    let mut r = AuditReport::new("deletion_contraction", g, &[x], tol);
    let minus_sol = solved(&minus, x)?;
    if y.abs() <= upper + HYPOTHESIS_SLACK {
        r.ge("ln tau(G) >= ln(1-x^2) + ln tau(G-e)", sol.log_tau, ln_edge + minus_sol.log_tau);
    } else {
        r.note("|y_e| > x/(1-x^2): deletion bound not claimed");
    }
    if y >= upper - HYPOTHESIS_SLACK {
        let contracted = g.contract_edge(u, v)?;
        r.ge("ln tau(G) >= ln(1-x^2) + ln tau(G/e)", sol.log_tau, ln_edge + log_tau(&contracted, x)?);
    } else {
        r.note("y_e < x/(1-x^2): contraction bound not claimed");
    }
    let z = minus_sol.z(u, v);
    let factor = 2.0 * (1.0 - z * x).ln() - (1.0 - z * z).ln() - ln_edge;
    r.ge("ln tau(G-e) >= ln((1-zx)^2/((1-z^2)(1-x^2))) + ln tau(G)", minus_sol.log_tau, factor + sol.log_tau);
    r.note(&format!("y_e = {y:.12e}, z = {z:.12e}"));
    Ok(r)
}

/// Monotonicity, log-concavity, the Oppenheim sum inequality and
/// `τ(x1·x2) ≥ τ(x1)`.
pub fn convexity_suite(g: &Graph, x1: f64, x2: f64, alpha: f64, tol: f64) -> Result<AuditReport> {
    if !(0.0 <= x1 && x1 < x2 && x2 < 1.0 && alpha > 0.0 && alpha < 1.0) {
        return Err(Error::NotApplicable(format!("x1 = {x1}, x2 = {x2}, alpha = {alpha}")));
    }
    let mut r = AuditReport::new("convexity", g, &[x1, x2, alpha], tol);
    let l1 = log_tau(g, x1)?;
    let l2 = log_tau(g, x2)?;
    let lm = log_tau(g, alpha * x1 + (1.0 - alpha) * x2)?;
    let lp = log_tau(g, x1 * x2)?;
    r.le("ln tau(x2) <= ln tau(x1)", l2, l1);
    r.ge("ln tau(a x1 + (1-a) x2) >= a ln tau(x1) + (1-a) ln tau(x2)", lm, alpha * l1 + (1.0 - alpha) * l2);
    let (t1, t2) = (l1.exp(), l2.exp());
    r.le("tau(x1) + tau(x2) <= tau(x1 x2) + tau(x1) tau(x2)", t1 + t2, lp.exp() + t1 * t2);
    r.ge("ln tau(x1 x2) >= ln tau(x1)", lp, l1);
    Ok(r)
}

/// Per-vertex comparison of a `d`-regular graph with `K_{d+1}`, and for
/// bipartite graphs with `K_{d,d}`.
pub fn regular_comparison(g: &Graph, x: f64, tol: f64) -> Result<AuditReport> {
    let d = match g.regular_degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::NotApplicable("graph is not regular of positive degree".into())),
    };
    let mut r = AuditReport::new("regular_comparison", g, &[x], tol);
    let per_vertex = log_tau(g, x)? / g.vertex_count() as f64;
    if x > 0.0 && x < 1.0 {
        r.le("ln tau(G)/v(G) <= ln tau(K_{d+1})/(d+1)", per_vertex, complete::log_tau(d + 1, x) / (d + 1) as f64);
    } else {
        r.note("complete-graph comparison needs x in (0, 1)");
    }
    if g.is_bipartite() {
        if d > 12 {
            r.note("K_{d,d} comparison skipped for d > 12");
        } else {
            let kdd = generate(&GraphFamily::CompleteBipartite(d, d), None)?;
            r.le("ln tau(G)/v(G) <= ln tau(K_{d,d})/(2d)", per_vertex, log_tau(&kdd, x)? / (2 * d) as f64);
        }
    }
    Ok(r)
}

/// Differential entropy bookkeeping for the field of a uniform-`x` solution.
pub fn entropy_report(sol: &GmrfSolution, tol: f64) -> Result<AuditReport> {
    let x = sol
        .spec
        .uniform_x()
        .ok_or_else(|| Error::NotApplicable("entropy report needs uniform x".into()))?;
    let g = sol.graph();
    let mut r = AuditReport::new("entropy", g, &[x], tol);
    let c = (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    let n = g.vertex_count() as f64;
    let m = g.edge_count() as f64;
    let total = 0.5 * n * c + 0.5 * sol.log_tau;
    let edge = c + 0.5 * (1.0 - x * x).ln();
    let point = 0.5 * c;
    let degree_sum: f64 = (0..g.vertex_count()).map(|u| g.degree(u) as f64 - 1.0).sum();
    let gap = total - m * edge + degree_sum * point;
    r.ge("entropy gap >= 0", gap, 0.0);
    let direct = 0.5 * (sol.log_tau - m * (1.0 - x * x).ln());
    r.close("entropy gap = (ln tau - e ln(1-x^2))/2", gap, direct, tol * (1.0 + total.abs()));
    if x < 0.0 && !g.is_bipartite() {
        r.note("negative x on a non-bipartite graph: the determinant bound is not established");
    }
    Ok(r)
}

/// Largest `v(G)` for which the homomorphism hypothesis is brute-forced.
const HYPOTHESIS_MAX_VERTICES: usize = 8;

/// `Σ α_i ln τ(G_i, x) ≥ 0` for a family declared to satisfy the matching
/// homomorphism-density inequality. For small graphs the declaration is
/// cross-checked against every target on at most four vertices.
pub fn multiplicative_inequality_check(pairs: &[(Graph, f64)], x: f64, tol: f64) -> Result<AuditReport> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::Parameter("empty family".into()))?;
    let mut r = AuditReport::new("multiplicative", &first.0, &[x], tol);
    let mut total = 0.0;
    for (g, a) in pairs {
        total += a * log_tau(g, x)?;
    }
    r.ge("sum a_i ln tau(G_i) >= 0", total, 0.0);
    if pairs.iter().all(|(g, _)| g.vertex_count() <= HYPOTHESIS_MAX_VERTICES) {
        let mut worst: Option<(String, f64)> = None;
        for (k, h) in small_targets(4).iter().enumerate() {
            let mut s = 0.0;
            for (g, a) in pairs {
                let t = hom_density(g, h)?;
                s += if t == 0.0 {
                    if *a > 0.0 {
                        f64::NEG_INFINITY
                    } else if *a < 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    a * t.ln()
                };
            }
            if worst.as_ref().is_none_or(|w| s < w.1) {
                worst = Some((format!("target #{k}"), s));
            }
        }
        if let Some((at, s)) = worst {
            r.worst("declared hypothesis on targets with <= 4 vertices", Relation::Ge, [(at, s, 0.0)]);
        }
    } else {
        r.note("hypothesis not cross-checked: graphs too large for brute force");
    }
    if pairs.len() > 1 {
        r.note(&format!("family of {} graphs; report inputs list the first", pairs.len()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::AUDIT_TOL;

    fn family(f: GraphFamily) -> Graph {
        generate(&f, None).unwrap()
    }

    /// Antiderivative from the partial fractions
    /// `(t(d−1) − 1)/(1 − t²) = ((d−2)/2)/(1−t) − (d/2)/(1+t)`.
    fn alpha_oracle(d: f64, x: f64) -> f64 {
        let f = |t: f64| (2.0 / d) * (-(d - 2.0) / 2.0 * (1.0 - t).ln() - d / 2.0 * (1.0 + t).ln());
        f(x) - f(1.0 / (d - 1.0))
    }

    #[test]
    fn alpha_matches_antiderivative() {
        assert_eq!(alpha_integral(3.0, 0.5).unwrap(), 0.0);
        for (d, x) in [(3.0, 0.6), (3.0, 0.95), (4.5, 0.5), (10.0, 0.2)] {
            let a = alpha_integral(d, x).unwrap();
            assert!(a > 0.0);
            assert!((a - alpha_oracle(d, x)).abs() < 1e-9, "{d} {x}");
        }
        // average degree 2: -ln((1+x)/2)
        let a = alpha_integral(2.0, 0.95).unwrap();
        assert!((a - (2.0f64 / 1.95).ln()).abs() < 1e-10);
        assert!(alpha_integral(3.0, 0.4).is_err());
    }

    #[test]
    fn tree_is_tight() {
        let t = generate(&GraphFamily::RandomTree(7), Some(3)).unwrap();
        let r = sidorenko_check(&t, 0.7, AUDIT_TOL).unwrap();
        assert!(r.pass);
        assert!(r.margin().abs() < 1e-9);
    }

    #[test]
    fn four_cycle_margin() {
        let x = 0.375f64.sqrt();
        let r = sidorenko_check(&family(GraphFamily::Cycle(4)), x, AUDIT_TOL).unwrap();
        assert_eq!(r.checks.len(), 2);
        let expected = 0.1875f64.ln() - 4.0 * 0.625f64.ln();
        assert!((r.checks[0].margin - expected).abs() < 1e-9);
    }

    #[test]
    fn single_edge_derivative() {
        let r = log_derivative_check(&family(GraphFamily::Path(2)), 0.5, 1e-4, AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.checks[0].rhs + 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn eight_cycle_near_one() {
        // d̄ = 2 leaves no second regime; x = 0.95 < 1/(Δ−1) is first-regime
        let g = family(GraphFamily::Cycle(8));
        let r = tightness_bounds(&g, 0.95, AUDIT_TOL).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn petersen_like_first_regime() {
        let g = family(GraphFamily::Complete(4));
        let r = tightness_bounds(&g, 0.2, AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn tree_edge_deletion_is_equality() {
        let g = family(GraphFamily::Path(4));
        let r = deletion_contraction_audit(&g, (1, 2), 0.6, AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.checks[0].margin.abs() < 1e-9);
    }

    #[test]
    fn triangle_counterpart() {
        let g = family(GraphFamily::Complete(3));
        let r = deletion_contraction_audit(&g, (0, 1), 0.5, AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        let last = r.checks.last().unwrap();
        let expected_rhs = (0.875f64 * 0.875 / (0.9375 * 0.75)).ln() + 0.5f64.ln();
        assert!((last.rhs - expected_rhs).abs() < 1e-9);
        assert!((last.lhs - 0.5625f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn convexity_on_five_cycle() {
        let r = convexity_suite(&family(GraphFamily::Cycle(5)), 0.3, 0.8, 0.5, AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.checks.len(), 4);
    }

    #[test]
    fn complete_graph_comparison_is_equality() {
        let r = regular_comparison(&family(GraphFamily::Complete(5)), 0.4, AUDIT_TOL).unwrap();
        assert!(r.checks[0].margin.abs() < 1e-9);
        let c6 = regular_comparison(&family(GraphFamily::Cycle(6)), 0.4, AUDIT_TOL).unwrap();
        assert!(c6.pass && c6.checks.len() == 2);
        assert!(regular_comparison(&family(GraphFamily::Path(3)), 0.4, AUDIT_TOL).is_err());
    }

    #[test]
    fn entropy_of_edge_is_zero() {
        let sol = solved(&family(GraphFamily::Path(2)), 0.3).unwrap();
        let r = entropy_report(&sol, AUDIT_TOL).unwrap();
        assert!(r.pass);
        assert!(r.checks[0].lhs.abs() < 1e-12);
    }

    #[test]
    fn multiplicative_examples() {
        let c4 = family(GraphFamily::Cycle(4));
        let k2 = family(GraphFamily::Path(2));
        let r = multiplicative_inequality_check(&[(c4, 1.0), (k2.clone(), -4.0)], 0.5, AUDIT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        let r = multiplicative_inequality_check(&[(k2.clone(), 1.0), (k2, -1.0)], 0.5, AUDIT_TOL).unwrap();
        assert_eq!(r.checks[0].lhs, 0.0);
        // a triangle is not a Sidorenko graph: the declaration is refuted
        let k3 = family(GraphFamily::Complete(3));
        let k2 = family(GraphFamily::Path(2));
        let r = multiplicative_inequality_check(&[(k3, 1.0), (k2, -3.0)], 0.5, AUDIT_TOL).unwrap();
        assert!(!r.checks[1].pass);
    }
}
