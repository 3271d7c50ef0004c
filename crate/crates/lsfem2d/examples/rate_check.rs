use lsfem2d::assembly::Method;
use lsfem2d::experiments::{run_convergence, SweepOptions};
use lsfem2d::mesh::{make_structured_square, Side};
use lsfem2d::problem::builtin_problem;
use std::collections::BTreeMap;
use std::sync::Arc;

fn main() {
    let p = builtin_problem("poisson-sine", &BTreeMap::new()).unwrap();
    let mesh = Arc::new(make_structured_square(8, &Side::ALL).unwrap());
    let t0 = std::time::Instant::now();
    for method in [Method::Div2, Method::DivCurl3, Method::DivCurl2] {
        let rows = run_convergence(&mesh, &p, method, &SweepOptions {
            levels: 4,
            estimators: vec![],
            ..Default::default()
        }).unwrap();
        println!("== {method:?}");
        for r in &rows {
            println!("  level {} dofs {:6} err {:.4e} rate {:.3} l2 {:.4e} rate_l2 {:.3} bd {}",
                     r.level, r.dofs, r.error_total, r.rate_total, r.error_l2_u, r.rate_l2, r.breakdown);
        }
    }
    println!("elapsed {:?}", t0.elapsed());
}
