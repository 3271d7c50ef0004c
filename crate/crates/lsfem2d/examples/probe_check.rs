use lsfem2d::assembly::Method;
use lsfem2d::experiments::*;
use lsfem2d::mesh::{make_structured_square, Side};
use lsfem2d::problem::builtin_problem;
use std::collections::BTreeMap;
use std::sync::Arc;

fn main() {
    let t0 = std::time::Instant::now();
    // Criterion 4: helmholtz divcurl3 from n=1.
    let p = builtin_problem("helmholtz-indefinite", &BTreeMap::new()).unwrap();
    let mesh1 = Arc::new(make_structured_square(1, &Side::ALL).unwrap());
    for method in [Method::DivCurl3, Method::Div2] {
        let rows = run_coercivity_probe(&mesh1, &p, method, 5, 3000).unwrap();
        println!("== helmholtz {method:?}");
        for r in &rows {
            println!("  lvl {} dofs {:6} lmin {:.4e} ratio {:.3e} bd {} conv {}",
                r.level, r.dofs, r.lambda_min, r.spectrum_ratio, r.cg_breakdown, r.cg_converged);
        }
    }
    // Criterion 5: counterexample on n=4 square.
    let mesh4 = Arc::new(make_structured_square(4, &Side::ALL).unwrap());
    let out = run_counterexample(&mesh4, None, 4).unwrap();
    println!("== counterexample edge {}", out.edge);
    for r in &out.rows {
        println!("  lvl {} J {:.5e} T {:.5e} ratio {:.5e}", r.level, r.j_div, r.triple_norm_sq, r.ratio);
    }
    println!("  verdict: {:?}", out.verdict);
    println!("  final/initial ratio: {:.4}", out.rows.last().unwrap().ratio / out.rows[0].ratio);
    // Criterion 11: probe with betas.
    for beta in [10.0, 40.0, 160.0] {
        let p = builtin_problem("convection", &BTreeMap::from([
            ("beta1".to_string(), beta), ("beta2".to_string(), 0.0)])).unwrap();
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let rows = run_coercivity_probe(&mesh, &p, Method::Div2, 5, 3000).unwrap();
        println!("== convection beta={beta}");
        for r in &rows {
            println!("  lvl {} dofs {:6} lmin {:.4e} ratio {:.3e} bd {} conv {}",
                r.level, r.dofs, r.lambda_min, r.spectrum_ratio, r.cg_breakdown, r.cg_converged);
        }
        println!("  first spd level: {:?}", first_spd_level(&rows));
    }
    println!("elapsed {:?}", t0.elapsed());
}
