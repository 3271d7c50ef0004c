//! Experiment drivers: uniform convergence sweeps, the norm-equivalence
//! witness, and the coercivity probe, each with CSV output.

use crate::assembly::{error_vs_exact, solve_on_mesh, Method};
use crate::estimators::{counterexample_ratio, estimate_div2, estimate_divcurl, CounterexampleRow};
use crate::fespace::Field;
use crate::io::{fmt_sci, write_csv};
use crate::linsolve::{cg_solve, lambda_max_estimate, lambda_min_estimate};
use crate::mesh::{mesh_stats, refine_uniform, BoundaryTag, Triangulation};
use crate::problem::ProblemSpec;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// One level of a uniform convergence sweep.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h_max: f64,
    pub dofs: usize,
    /// Energy-norm error of the method.
    pub error_total: f64,
    pub error_l2_u: f64,
    /// log2 of the successive error ratios; NaN on the first level.
    pub rate_total: f64,
    pub rate_l2: f64,
    pub estimators: BTreeMap<String, f64>,
    pub effectivities: BTreeMap<String, f64>,
    pub breakdown: bool,
}

/// Options of a convergence sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub levels: usize,
    /// Estimator names to evaluate per level (e.g. `eta1`..`eta6`, `zeta`).
    pub estimators: Vec<String>,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            levels: 4,
            estimators: Vec::new(),
            tol: 1e-10,
            maxit: 50_000,
        }
    }
}

/// Uniform refinement sweep: solve, measure errors against the exact
/// solution, evaluate the requested estimators. Solver breakdown at one
/// level is recorded and the sweep continues.
pub fn run_convergence(
    mesh0: &Arc<Triangulation>,
    p: &ProblemSpec,
    method: Method,
    opts: &SweepOptions,
) -> Result<Vec<ConvergenceRow>> {
    if p.exact.is_none() {
        return Err(Error::MissingExact(p.name.clone()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut mesh = Arc::clone(mesh0);
    for level in 0..opts.levels {
        if level > 0 {
            mesh = Arc::new(refine_uniform(&mesh)?);
        }
        let stats = mesh_stats(&mesh);
        let sol = solve_on_mesh(&mesh, method, p, opts.tol, opts.maxit)?;
        let refs: Vec<&Field> = sol.fields.iter().collect();
        let err = error_vs_exact(method, &refs, p)?;
        let mut estimators = BTreeMap::new();
        let mut effectivities = BTreeMap::new();
        for name in &opts.estimators {
            let report = match method {
                Method::Div2 => {
                    let idx: usize = name
                        .strip_prefix("eta")
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| {
                            Error::UnknownName(format!("estimator '{name}' for div2"))
                        })?;
                    estimate_div2(refs[0], refs[1], p, &[idx])?
                }
                Method::DivCurl3 | Method::DivCurl2 => estimate_divcurl(&refs, p, method)?,
                Method::GalerkinCr => {
                    return Err(Error::InvalidArgument(
                        "the Galerkin baseline carries no estimator".into(),
                    ))
                }
            };
            estimators.insert(name.clone(), report.global[name]);
            if let Some(e) = report.effectivity.get(name) {
                effectivities.insert(name.clone(), *e);
            }
        }
        let (rate_total, rate_l2) = match rows.last() {
            Some(prev) if prev.error_total > 0.0 && err.total > 0.0 => (
                (prev.error_total / err.total).log2(),
                (prev.error_l2_u / err.l2_u).log2(),
            ),
            _ => (f64::NAN, f64::NAN),
        };
        rows.push(ConvergenceRow {
            level,
            h_max: stats.h_max,
            dofs: sol.dofs,
            error_total: err.total,
            error_l2_u: err.l2_u,
            rate_total,
            rate_l2,
            estimators,
            effectivities,
            breakdown: sol.report.breakdown || !sol.report.converged,
        });
    }
    Ok(rows)
}

/// CSV columns: level, h_max, dofs, error_total, rate, error_l2_u, rate_l2,
/// breakdown, then est_<name> and eff_<name> per estimator.
pub fn convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let est_names: Vec<String> = rows
        .first()
        .map(|r| r.estimators.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = vec![
        "level".to_string(),
        "h_max".to_string(),
        "dofs".to_string(),
        "error_total".to_string(),
        "rate".to_string(),
        "error_l2_u".to_string(),
        "rate_l2".to_string(),
        "breakdown".to_string(),
    ];
    for n in &est_names {
        header.push(format!("est_{n}"));
        header.push(format!("eff_{n}"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let data: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.level.to_string(),
                fmt_sci(r.h_max),
                r.dofs.to_string(),
                fmt_sci(r.error_total),
                fmt_sci(r.rate_total),
                fmt_sci(r.error_l2_u),
                fmt_sci(r.rate_l2),
                (r.breakdown as u8).to_string(),
            ];
            for n in &est_names {
                row.push(fmt_sci(r.estimators.get(n).copied().unwrap_or(f64::NAN)));
                row.push(fmt_sci(
                    r.effectivities.get(n).copied().unwrap_or(f64::NAN),
                ));
            }
            row
        })
        .collect();
    write_csv(path, &header_refs, &data)
}

/// Result of the norm-equivalence witness run.
#[derive(Debug, Clone)]
pub struct CounterexampleOutcome {
    pub rows: Vec<CounterexampleRow>,
    pub edge: usize,
    /// Set when the final/initial ratio dropped below 0.05.
    pub verdict: Option<String>,
}

/// Default edge for the witness: the interior edge whose midpoint is closest
/// to the domain centroid (ties broken by index).
pub fn central_interior_edge(mesh: &Triangulation) -> Option<usize> {
    let mut cx = 0.0;
    let mut cy = 0.0;
    for v in &mesh.vertices {
        cx += v[0];
        cy += v[1];
    }
    cx /= mesh.num_vertices() as f64;
    cy /= mesh.num_vertices() as f64;
    (0..mesh.num_edges())
        .filter(|&e| mesh.boundary_tag[e] == BoundaryTag::Interior)
        .min_by(|&a, &b| {
            let d = |e: usize| {
                let m = mesh.edge_midpoint(e);
                (m[0] - cx).hypot(m[1] - cy)
            };
            d(a).partial_cmp(&d(b)).unwrap().then(a.cmp(&b))
        })
}

/// Run the witness and, when the decay threshold is met, produce the verdict
/// line. The diffusion/convection/reaction data of the witness is fixed to
/// the Laplacian case internally.
pub fn run_counterexample(
    mesh: &Arc<Triangulation>,
    edge: Option<usize>,
    levels: usize,
) -> Result<CounterexampleOutcome> {
    let edge = match edge {
        Some(e) => e,
        None => central_interior_edge(mesh).ok_or_else(|| {
            Error::InvalidArgument("mesh has no interior edge".into())
        })?,
    };
    let rows = counterexample_ratio(mesh, edge, levels)?;
    let verdict = match (rows.first(), rows.last()) {
        (Some(first), Some(last)) if last.ratio / first.ratio < 0.05 => Some(format!(
            "uniform coercivity violated: ratio decayed by factor {:.1} over {} levels",
            first.ratio / last.ratio,
            rows.len()
        )),
        _ => None,
    };
    Ok(CounterexampleOutcome {
        rows,
        edge,
        verdict,
    })
}

pub fn counterexample_csv(path: &Path, outcome: &CounterexampleOutcome) -> Result<()> {
    let header = ["level", "j_div", "triple_norm_sq", "ratio"];
    let rows: Vec<Vec<String>> = outcome
        .rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                fmt_sci(r.j_div),
                fmt_sci(r.triple_norm_sq),
                fmt_sci(r.ratio),
            ]
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// One level of the coercivity probe.
#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub level: usize,
    pub h_max: f64,
    pub dofs: usize,
    pub lambda_min: f64,
    /// lambda_min / lambda_max: a scale-free conditioning signal that decays
    /// when the discrete functional loses control at coarse mesh sizes.
    pub spectrum_ratio: f64,
    pub cg_breakdown: bool,
    pub cg_converged: bool,
}

/// Probe discrete coercivity across a refinement sweep: assemble the system,
/// estimate the extremal eigenvalues, and run CG on the actual load. The
/// least-squares forms are positive semidefinite by construction, so failure
/// shows up as a collapsing smallest eigenvalue or CG breakdown rather than
/// a sign change.
pub fn run_coercivity_probe(
    mesh0: &Arc<Triangulation>,
    p: &ProblemSpec,
    method: Method,
    levels: usize,
    power_iters: usize,
) -> Result<Vec<ProbeRow>> {
    let mut mesh = Arc::clone(mesh0);
    let mut rows = Vec::new();
    for level in 0..levels {
        if level > 0 {
            mesh = Arc::new(refine_uniform(&mesh)?);
        }
        let disc = crate::assembly::discretize(&mesh, method, p)?;
        let lmin = lambda_min_estimate(&disc.system, power_iters)?;
        let lmax = lambda_max_estimate(&disc.system, power_iters.min(500))?;
        let cg = cg_solve(&disc.system, 1e-10, 10_000)?;
        rows.push(ProbeRow {
            level,
            h_max: mesh_stats(&mesh).h_max,
            dofs: disc.system.dof_count(),
            lambda_min: lmin,
            spectrum_ratio: if lmax > 0.0 { lmin / lmax } else { f64::NAN },
            cg_breakdown: cg.breakdown,
            cg_converged: cg.converged,
        });
    }
    Ok(rows)
}

/// First level at which the probe reports a strictly positive smallest
/// eigenvalue and a clean CG solve; `None` when no level qualifies.
pub fn first_spd_level(rows: &[ProbeRow]) -> Option<usize> {
    rows.iter()
        .find(|r| r.lambda_min > 0.0 && !r.cg_breakdown && r.cg_converged)
        .map(|r| r.level)
}

pub fn probe_csv(path: &Path, rows: &[ProbeRow]) -> Result<()> {
    let header = [
        "level",
        "h_max",
        "dofs",
        "lambda_min",
        "spectrum_ratio",
        "cg_breakdown",
        "cg_converged",
    ];
    let data: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                fmt_sci(r.h_max),
                r.dofs.to_string(),
                fmt_sci(r.lambda_min),
                fmt_sci(r.spectrum_ratio),
                (r.cg_breakdown as u8).to_string(),
                (r.cg_converged as u8).to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, &data)
}

/// Least-squares slope of `log10(y)` against `log10(x)`.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a.log10(), b.log10()))
        .collect();
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return f64::NAN;
    }
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// CSV trace of an adaptive run.
pub fn adapt_csv(path: &Path, trace: &crate::adapt::AdaptTrace) -> Result<()> {
    let header = [
        "iteration",
        "dofs",
        "estimate",
        "true_error",
        "marked_fraction",
        "h_min",
        "breakdown",
    ];
    let rows: Vec<Vec<String>> = trace
        .records
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                r.dofs.to_string(),
                fmt_sci(r.estimate),
                r.true_error.map(fmt_sci).unwrap_or_default(),
                fmt_sci(r.marked_fraction),
                fmt_sci(r.h_min),
                (r.breakdown as u8).to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_structured_square, Side};
    use crate::problem::builtin_problem;
    use std::collections::BTreeMap as Map;

    #[test]
    fn slope_fit_recovers_exponent() {
        let x = [10.0, 100.0, 1000.0];
        let y: Vec<f64> = x.iter().map(|&v: &f64| 3.0 * v.powf(-0.5)).collect();
        let s = fit_loglog_slope(&x, &y);
        assert!((s + 0.5).abs() < 1e-12);
    }

    #[test]
    fn convergence_rows_have_rates() {
        let mesh = Arc::new(make_structured_square(4, &Side::ALL).unwrap());
        let p = builtin_problem("poisson-sine", &Map::new()).unwrap();
        let rows = run_convergence(
            &mesh,
            &p,
            Method::Div2,
            &SweepOptions {
                levels: 3,
                estimators: vec!["eta4".into()],
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].rate_total.is_nan());
        assert!(rows[1].rate_total > 0.7);
        assert!(rows[2].rate_total > 0.8);
        assert!(rows[2].estimators["eta4"] > 0.0);
    }

    #[test]
    fn probe_reports_positive_for_poisson() {
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let p = builtin_problem("poisson-sine", &Map::new()).unwrap();
        let rows = run_coercivity_probe(&mesh, &p, Method::Div2, 2, 500).unwrap();
        assert_eq!(first_spd_level(&rows), Some(0));
        for r in &rows {
            assert!(r.lambda_min > 0.0);
            assert!(!r.cg_breakdown);
        }
    }
}
