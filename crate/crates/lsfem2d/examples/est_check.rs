use lsfem2d::adapt::{adapt_loop, uniform_trace, AdaptOptions};
use lsfem2d::assembly::{solve_on_mesh, Method};
use lsfem2d::estimators::{estimate_div2, estimate_divcurl};
use lsfem2d::experiments::fit_loglog_slope;
use lsfem2d::mesh::{make_lshape, make_structured_square, refine_uniform, Side};
use lsfem2d::problem::builtin_problem;
use std::collections::BTreeMap;
use std::sync::Arc;

fn main() {
    let t0 = std::time::Instant::now();
    let p = builtin_problem("poisson-sine", &BTreeMap::new()).unwrap();
    // Criterion 6: effectivities over n=8..64.
    let mut mesh = Arc::new(make_structured_square(8, &Side::ALL).unwrap());
    let mut eff: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut est_hist: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut err_hist = Vec::new();
    for lvl in 0..4 {
        if lvl > 0 { mesh = Arc::new(refine_uniform(&mesh).unwrap()); }
        let sol = solve_on_mesh(&mesh, Method::Div2, &p, 1e-10, 50000).unwrap();
        let rep = estimate_div2(&sol.fields[0], &sol.fields[1], &p, &[1,2,3,4,5,6]).unwrap();
        err_hist.push(rep.true_error.unwrap());
        for (k, v) in &rep.effectivity { eff.entry(k.clone()).or_default().push(*v); }
        for (k, v) in &rep.global { est_hist.entry(k.clone()).or_default().push(*v); }
        let sol3 = solve_on_mesh(&mesh, Method::DivCurl3, &p, 1e-10, 50000).unwrap();
        let refs: Vec<_> = sol3.fields.iter().collect();
        let rep3 = estimate_divcurl(&refs, &p, Method::DivCurl3).unwrap();
        eff.entry("zeta".into()).or_default().push(rep3.effectivity["zeta"]);
        est_hist.entry("zeta".into()).or_default().push(rep3.global["zeta"]);
    }
    println!("true errors: {err_hist:?}");
    let err_rate = fit_loglog_slope(&[1.,2.,4.,8.], &err_hist);
    println!("err rate vs 1/h: {err_rate:.3}");
    for (k, v) in &eff {
        let maxmin = v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min);
        let est_rate = fit_loglog_slope(&[1.,2.,4.,8.], &est_hist[k]);
        println!("{k}: eff {v:?} band {maxmin:.3} est_rate {est_rate:.3} (err {err_rate:.3})");
    }
    println!("-- elapsed {:?}", t0.elapsed());

    // Criterion 9: lshape adaptive vs uniform.
    let p = builtin_problem("lshape-singular", &BTreeMap::new()).unwrap();
    let mesh0 = Arc::new(make_lshape(1).unwrap());
    let opts = AdaptOptions { theta: 0.5, estimator: "eta4".into(), max_dofs: 20000, tol: 1e-10, maxit: 60000 };
    let (trace, _) = adapt_loop(&mesh0, &p, Method::Div2, &opts).unwrap();
    println!("adaptive iterations: {}", trace.records.len());
    for r in &trace.records {
        println!("  it {} dofs {:6} est {:.4e} err {:.4e} hmin {:.4e}", r.iteration, r.dofs, r.estimate, r.true_error.unwrap(), r.h_min);
    }
    let slope_a = fit_loglog_slope(&trace.dofs(), &trace.errors().unwrap());
    let ut = uniform_trace(&mesh0, &p, Method::Div2, 6, &opts).unwrap();
    for r in &ut.records {
        println!("  uniform it {} dofs {:6} err {:.4e}", r.iteration, r.dofs, r.true_error.unwrap());
    }
    let slope_u = fit_loglog_slope(&ut.dofs(), &ut.errors().unwrap());
    println!("slopes: adaptive {slope_a:.3} uniform {slope_u:.3}");
    println!("elapsed {:?}", t0.elapsed());
}
