use std::fmt::Write as _;

use gmrf_core::audit::{run_battery, BatteryOptions};
use gmrf_core::coupling::chordal_solve;
use gmrf_core::gmrf::{
    solve, solve_dual_ascent, solve_recoupling, CorrelationSpec, GmrfSolution, DEFAULT_MAX_ITERS, DEFAULT_MAX_SWEEPS,
};
use gmrf_core::graph::{generate, write_edge_list, Graph, GraphFamily};
use gmrf_core::ldp::{ldp_estimate, EdgeIntervalRegion, LdpEstimate};
use gmrf_core::series::tau_series;
use gmrf_core::trees::{count_spanning_trees, log_spanning_tree_count, mckay_audit, EXACT_LIMIT};
use gmrf_core::zeta::{log_zeta_bass, log_zeta_edge, DirectedEdgeMatrix};
use gmrf_core::{Error, Result};
use rayon::prelude::*;
use serde_json::json;

use crate::{Grid, SolveMethod};

/// Output text and whether the command succeeded in the sense of its exit code.
pub type Output = (String, bool);

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Parameter(e.to_string()))
}

fn grid_points(grid: &Grid) -> Result<Vec<f64>> {
    if grid.steps == 0 || grid.from > grid.to {
        return Err(Error::Parameter("grid needs steps >= 1 and from <= to".into()));
    }
    if grid.steps == 1 {
        return Ok(vec![grid.from]);
    }
    let h = (grid.to - grid.from) / (grid.steps - 1) as f64;
    Ok((0..grid.steps).map(|i| grid.from + h * i as f64).collect())
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.12e}")
    } else {
        "nan".into()
    }
}

pub fn solve_cmd(g: &Graph, x: f64, method: SolveMethod, tol: f64) -> Result<Output> {
    let spec = CorrelationSpec::uniform(g.clone(), x)?;
    let sol = match method {
        SolveMethod::Dual => solve_dual_ascent(&spec, tol, DEFAULT_MAX_ITERS)?,
        SolveMethod::Recoupling => solve_recoupling(&spec, tol, DEFAULT_MAX_SWEEPS)?,
        SolveMethod::Chordal => chordal_solve(&spec)?,
    };
    let text = serde_json::to_string_pretty(&sol.to_json()).expect("solution serializes");
    Ok((text + "\n", true))
}

pub fn verify(g: &Graph, x: f64, tol: f64, vertex_transitive: bool, as_json: bool) -> Result<Output> {
    let opts = BatteryOptions {
        tol,
        vertex_transitive,
        ..Default::default()
    };
    let entries = run_battery(g, x, &opts)?;
    let pass = entries.iter().all(|e| e.pass());
    let mut out = String::new();
    if as_json {
        for e in &entries {
            writeln!(out, "{}", serde_json::to_string(e).expect("entry serializes")).unwrap();
        }
        return Ok((out, pass));
    }
    writeln!(out, "{:<22} {:<6} {:>6} {:>14}", "claim", "status", "checks", "min margin").unwrap();
    for e in &entries {
        match (&e.report, &e.skipped) {
            (Some(r), _) => {
                let status = if r.pass { "pass" } else { "FAIL" };
                let margin = if r.checks.is_empty() { "-".into() } else { format!("{:.3e}", r.margin()) };
                writeln!(out, "{:<22} {:<6} {:>6} {:>14}", e.claim, status, r.checks.len(), margin).unwrap();
                for c in r.failures() {
                    let at = c.at.as_deref().map(|a| format!(" at {a}")).unwrap_or_default();
                    writeln!(out, "    {}: lhs {:.6e} rhs {:.6e}{at}", c.name, c.lhs, c.rhs).unwrap();
                }
            }
            (None, why) => {
                writeln!(out, "{:<22} {:<6} {:>6} {:>14}  {}", e.claim, "skip", 0, "-", why.as_deref().unwrap_or(""))
                    .unwrap();
            }
        }
    }
    let failed = entries.iter().filter(|e| !e.pass()).count();
    writeln!(out, "{} claims, {failed} failed", entries.len()).unwrap();
    Ok((out, pass))
}

struct SweepRow {
    x: f64,
    log_tau: f64,
    sum_y: f64,
    sidorenko: f64,
    min_y: f64,
    max_excess: f64,
}

fn sweep_row(g: &Graph, x: f64) -> SweepRow {
    let nan = SweepRow {
        x,
        log_tau: f64::NAN,
        sum_y: f64::NAN,
        sidorenko: f64::NAN,
        min_y: f64::NAN,
        max_excess: f64::NAN,
    };
    let Ok(sol) = CorrelationSpec::uniform(g.clone(), x).and_then(|s| solve(&s)) else {
        return nan;
    };
    let cap = x / (1.0 - x * x);
    SweepRow {
        x,
        log_tau: sol.log_tau,
        sum_y: sol.y_sum(),
        sidorenko: sol.log_tau - g.edge_count() as f64 * (1.0 - x * x).ln(),
        min_y: sol.y.iter().copied().fold(f64::INFINITY, f64::min),
        max_excess: sol.y.iter().map(|y| y - cap).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Rows are computed in parallel and written in grid order; infeasible
/// points are written as `nan`.
pub fn sweep(g: &Graph, grid: &Grid, jobs: usize) -> Result<Output> {
    let xs = grid_points(grid)?;
    let rows: Vec<SweepRow> = pool(jobs)?.install(|| xs.par_iter().map(|&x| sweep_row(g, x)).collect());
    let mut out = String::from("x,ln_tau,sum_y,sidorenko_margin,min_y,max_y_excess\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(r.x),
            num(r.log_tau),
            num(r.sum_y),
            num(r.sidorenko),
            num(r.min_y),
            num(r.max_excess)
        )
        .unwrap();
    }
    Ok((out, true))
}

pub fn zeta(g: &Graph, grid: &Grid, traces: Option<usize>, jobs: usize) -> Result<Output> {
    if let Some(k) = traces {
        let m = DirectedEdgeMatrix::new(g)?;
        let mut out = String::from("k,trace\n");
        for (i, t) in m.trace_powers(k)?.iter().enumerate() {
            writeln!(out, "{},{t}", i + 1).unwrap();
        }
        return Ok((out, true));
    }
    let xs = grid_points(grid)?;
    let e = g.edge_count() as f64;
    let rows: Vec<String> = pool(jobs)?.install(|| {
        xs.par_iter()
            .map(|&x| {
                let signed = |r: Result<(f64, f64)>| r.map(|(s, l)| s * l.exp()).unwrap_or(f64::NAN);
                let bass = signed(log_zeta_bass(g, x));
                let edge = signed(log_zeta_edge(g, x));
                let tau = CorrelationSpec::uniform(g.clone(), x)
                    .and_then(|s| solve(&s))
                    .map(|s| s.tau)
                    .unwrap_or(f64::NAN);
                let bound = bass * (1.0 - x * x).powf(e);
                format!("{},{},{},{},{}", num(x), num(bass), num(edge), num(tau), num(bound))
            })
            .collect()
    });
    let mut out = String::from("x,zeta_bass,zeta_edge,tau,zeta_times_one_minus_x2_pow_e\n");
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok((out, true))
}

pub fn trees(g: &Graph) -> Result<Output> {
    let value = match g.regular_degree() {
        Some(d) if d >= 3 && g.is_connected() => {
            let r = mckay_audit(g, d, gmrf_core::audit::AUDIT_TOL)?;
            let pass = r.certificate.pass;
            return Ok((serde_json::to_string_pretty(&r).expect("report serializes") + "\n", pass));
        }
        _ if g.vertex_count() <= EXACT_LIMIT => {
            let c = count_spanning_trees(g)?;
            json!({ "n": g.vertex_count(), "count": c.to_str_radix(10), "log_count": log_spanning_tree_count(g) })
        }
        _ => json!({ "n": g.vertex_count(), "log_count": log_spanning_tree_count(g) }),
    };
    Ok((serde_json::to_string_pretty(&value).expect("json") + "\n", true))
}

pub fn ldp(g: &Graph, lo: f64, hi: f64, ns: &[usize], samples: u64, seed: u64, jobs: usize) -> Result<Output> {
    let region = EdgeIntervalRegion::new(g.clone(), lo, hi)?;
    let rows = ldp_estimate(&region, ns, samples, seed, jobs)?;
    let mut out = format!("{}\n", LdpEstimate::CSV_HEADER);
    for r in &rows {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    Ok((out, true))
}

pub fn series(g: &Graph, order: usize) -> Result<Output> {
    let s = tau_series(g, order)?;
    let coeffs: Vec<String> = s.coefficients.iter().map(|c| c.to_string()).collect();
    // coefficients are written as bare integers of any size
    let text = format!(
        "{{\"order\":{order},\"sweeps\":{},\"coefficients\":[{}]}}\n",
        s.sweeps,
        coeffs.join(",")
    );
    Ok((text, true))
}

struct Extreme {
    value: f64,
    seed: u64,
    at: (usize, usize),
    graph: Graph,
}

impl Extreme {
    fn to_json(&self) -> serde_json::Value {
        json!({
            "value": self.value,
            "seed": self.seed,
            "pair": [self.at.0, self.at.1],
            "edge_list": write_edge_list(&self.graph),
        })
    }
}

fn keep(slot: &mut Option<Extreme>, candidate: Extreme, better: impl Fn(f64, f64) -> bool) {
    if slot.as_ref().is_none_or(|e| better(candidate.value, e.value)) {
        *slot = Some(candidate);
    }
}

/// Over `count` members of a random family: the smallest entry of `A_G(x)`
/// and the largest `y_e − x/(1−x²)`, with the graphs attaining them.
pub fn scan(family: &GraphFamily, x: f64, count: u64, seed: u64, jobs: usize) -> Result<Output> {
    if !family.is_random() {
        return Err(Error::Parameter(format!("{family} is not a random family")));
    }
    let results: Vec<(u64, Result<GmrfSolution>)> = pool(jobs)?.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let s = seed + i;
                (s, generate(family, Some(s)).and_then(|g| solve(&CorrelationSpec::uniform(g, x)?)))
            })
            .collect()
    });
    let cap = x / (1.0 - x * x);
    let (mut min_entry, mut max_excess) = (None, None);
    let (mut solved, mut failed) = (0, 0);
    for (s, r) in results {
        let sol = match r {
            Ok(sol) => sol,
            Err(Error::InfeasibleSpec(_)) | Err(Error::NotPositiveDefinite { .. }) => {
                failed += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        solved += 1;
        let g = sol.graph();
        for (u, v) in g.non_edges() {
            let candidate = Extreme {
                value: sol.z(u, v),
                seed: s,
                at: (u, v),
                graph: g.clone(),
            };
            keep(&mut min_entry, candidate, |a, b| a < b);
        }
        for (&(u, v), &y) in g.edges().iter().zip(&sol.y) {
            let candidate = Extreme {
                value: y - cap,
                seed: s,
                at: (u, v),
                graph: g.clone(),
            };
            keep(&mut max_excess, candidate, |a, b| a > b);
        }
    }
    let value = json!({
        "family": family.to_string(),
        "x": x,
        "count": count,
        "solved": solved,
        "infeasible": failed,
        "min_entry": min_entry.as_ref().map(Extreme::to_json),
        "max_y_excess": max_excess.as_ref().map(Extreme::to_json),
    });
    Ok((serde_json::to_string_pretty(&value).expect("json") + "\n", true))
}
