//! Dörfler marking and the estimator-driven adaptive refinement loop.

use crate::assembly::{error_vs_exact, solve_on_mesh, Method};
use crate::estimators::{estimate_div2, estimate_divcurl};
use crate::mesh::{bisect_marked, mesh_stats, Triangulation};
use crate::problem::ProblemSpec;
use crate::{Error, Result};
use std::sync::Arc;

/// Bulk-chasing marking: smallest set of elements (greedy by descending
/// indicator, ties broken by lower element index) whose indicator sum reaches
/// `theta` times the total. The returned set is nonempty whenever the
/// indicator vector is nonempty.
pub fn dorfler_mark(local: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "marking fraction theta = {theta} outside [0, 1]"
        )));
    }
    if local.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "indicators must be nonnegative".into(),
        ));
    }
    let total: f64 = local.iter().sum();
    let mut order: Vec<usize> = (0..local.len()).collect();
    order.sort_by(|&a, &b| {
        local[b]
            .partial_cmp(&local[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for k in order {
        marked.push(k);
        acc += local[k];
        if acc >= theta * total {
            break;
        }
    }
    marked.sort_unstable();
    Ok(marked)
}

/// Options of the adaptive loop.
#[derive(Debug, Clone)]
pub struct AdaptOptions {
    pub theta: f64,
    /// Estimator driving the marking: `eta1`..`eta6` for div2, `zeta` for
    /// divcurl3, `xi` for divcurl2.
    pub estimator: String,
    pub max_dofs: usize,
    pub tol: f64,
    pub maxit: usize,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            theta: 0.5,
            estimator: "eta4".into(),
            max_dofs: 10_000,
            tol: 1e-10,
            maxit: 50_000,
        }
    }
}

/// One record per adaptive iteration.
#[derive(Debug, Clone)]
pub struct AdaptRecord {
    pub iteration: usize,
    pub dofs: usize,
    pub estimate: f64,
    pub true_error: Option<f64>,
    pub marked_fraction: f64,
    pub h_min: f64,
    pub breakdown: bool,
}

/// Trace of the adaptive loop; `aborted` is set when the solver broke down
/// and the loop stopped with a partial trace.
#[derive(Debug, Clone, Default)]
pub struct AdaptTrace {
    pub records: Vec<AdaptRecord>,
    pub aborted: bool,
}

impl AdaptTrace {
    /// Final mesh of the loop (after the last refinement).
    pub fn dofs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.dofs as f64).collect()
    }

    pub fn errors(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.true_error).collect()
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.estimate).collect()
    }
}

fn default_estimator(method: Method) -> &'static str {
    match method {
        Method::DivCurl3 => "zeta",
        Method::DivCurl2 => "xi",
        _ => "eta4",
    }
}

/// Solve-estimate-mark-bisect until the dof count reaches `max_dofs` or the
/// solver breaks down. Returns the trace together with the final mesh.
pub fn adapt_loop(
    mesh0: &Arc<Triangulation>,
    p: &ProblemSpec,
    method: Method,
    opts: &AdaptOptions,
) -> Result<(AdaptTrace, Arc<Triangulation>)> {
    if method == Method::GalerkinCr {
        return Err(Error::InvalidArgument(
            "the adaptive loop drives the least-squares methods; the Galerkin \
             baseline has no estimator here"
                .into(),
        ));
    }
    let est_name = if opts.estimator.is_empty() {
        default_estimator(method).to_string()
    } else {
        opts.estimator.clone()
    };
    let mut mesh = Arc::clone(mesh0);
    let mut trace = AdaptTrace::default();
    for iteration in 0.. {
        let sol = solve_on_mesh(&mesh, method, p, opts.tol, opts.maxit)?;
        let refs: Vec<&crate::fespace::Field> = sol.fields.iter().collect();
        let report = match method {
            Method::Div2 => {
                let idx: usize = est_name
                    .strip_prefix("eta")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| {
                        Error::UnknownName(format!("estimator '{est_name}' for div2"))
                    })?;
                estimate_div2(refs[0], refs[1], p, &[idx])?
            }
            _ => estimate_divcurl(&refs, p, method)?,
        };
        let local = report.local[&est_name].clone();
        let global = report.global[&est_name];

        let marked = dorfler_mark(&local, opts.theta)?;
        let marked_fraction = marked.len() as f64 / local.len() as f64;
        trace.records.push(AdaptRecord {
            iteration,
            dofs: sol.dofs,
            estimate: global,
            true_error: report.true_error,
            marked_fraction,
            h_min: mesh_stats(&mesh).h_min,
            breakdown: sol.report.breakdown,
        });
        if sol.report.breakdown {
            trace.aborted = true;
            break;
        }
        if sol.dofs >= opts.max_dofs {
            break;
        }
        mesh = Arc::new(bisect_marked(&mesh, &marked)?);
    }
    Ok((trace, mesh))
}

/// Uniform-refinement reference trace with the same record layout.
pub fn uniform_trace(
    mesh0: &Arc<Triangulation>,
    p: &ProblemSpec,
    method: Method,
    levels: usize,
    opts: &AdaptOptions,
) -> Result<AdaptTrace> {
    let mut mesh = Arc::clone(mesh0);
    let mut trace = AdaptTrace::default();
    for iteration in 0..levels {
        let sol = solve_on_mesh(&mesh, method, p, opts.tol, opts.maxit)?;
        let true_error = if p.exact.is_some() {
            let refs: Vec<&crate::fespace::Field> = sol.fields.iter().collect();
            Some(error_vs_exact(method, &refs, p)?.total)
        } else {
            None
        };
        trace.records.push(AdaptRecord {
            iteration,
            dofs: sol.dofs,
            estimate: f64::NAN,
            true_error,
            marked_fraction: 1.0,
            h_min: mesh_stats(&mesh).h_min,
            breakdown: sol.report.breakdown,
        });
        if sol.report.breakdown {
            trace.aborted = true;
            break;
        }
        if iteration + 1 < levels {
            mesh = Arc::new(crate::mesh::refine_uniform(&mesh)?);
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_structured_square, Side};
    use crate::problem::builtin_problem;
    use std::collections::BTreeMap as Map;

    #[test]
    fn dorfler_examples() {
        // theta = 1 marks everything with positive indicator (plus possibly
        // nothing else): greedy stops once the full sum is reached.
        let marked = dorfler_mark(&[1.0, 0.0, 2.0], 1.0).unwrap();
        assert_eq!(marked, vec![0, 2]);
        // theta = 0 still returns a nonempty set: the largest indicator.
        let marked = dorfler_mark(&[1.0, 3.0, 2.0], 0.0).unwrap();
        assert_eq!(marked, vec![1]);
        // Hand-evaluated greedy rule.
        let marked = dorfler_mark(&[4.0, 3.0, 2.0, 1.0], 0.6).unwrap();
        assert_eq!(marked, vec![0, 1]);
        assert!(dorfler_mark(&[1.0], 1.5).is_err());
        assert!(dorfler_mark(&[-1.0], 0.5).is_err());
    }

    #[test]
    fn dorfler_tie_break_is_deterministic() {
        let marked = dorfler_mark(&[2.0, 2.0, 2.0, 2.0], 0.5).unwrap();
        assert_eq!(marked, vec![0, 1]);
    }

    #[test]
    fn adapt_poisson_error_decreases() {
        let mesh = Arc::new(make_structured_square(4, &Side::ALL).unwrap());
        let p = builtin_problem("poisson-sine", &Map::new()).unwrap();
        let opts = AdaptOptions {
            max_dofs: 1500,
            ..Default::default()
        };
        let (trace, _) = adapt_loop(&mesh, &p, Method::Div2, &opts).unwrap();
        assert!(!trace.aborted);
        assert!(trace.records.len() >= 3);
        let errs: Vec<f64> = trace
            .records
            .iter()
            .map(|r| r.true_error.unwrap())
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0] * 1.02, "errors {errs:?}");
        }
        // Dofs strictly increase.
        for w in trace.records.windows(2) {
            assert!(w[1].dofs > w[0].dofs);
        }
    }

    #[test]
    fn single_iteration_when_budget_below_initial() {
        let mesh = Arc::new(make_structured_square(4, &Side::ALL).unwrap());
        let p = builtin_problem("poisson-sine", &Map::new()).unwrap();
        let opts = AdaptOptions {
            max_dofs: 1,
            ..Default::default()
        };
        let (trace, _) = adapt_loop(&mesh, &p, Method::Div2, &opts).unwrap();
        assert_eq!(trace.records.len(), 1);
    }
}
