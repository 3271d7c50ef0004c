//! A posteriori error estimators for the least-squares methods, the
//! CR-to-P2 enrichment operator, and the numerical witness that the plain
//! div functional is not uniformly coercive on the broken space.
//!
//! The two-field method ships six estimators. All share the least-squares
//! residual; they differ in how the nonconformity of the CR potential is
//! measured: `eta1`/`eta2` use the broken-gradient distance to the enriched
//! conforming potential, `eta3`/`eta4` the scaled function jumps
//! `h_F^{-1} ||[u]||_F^2`, and `eta5`/`eta6` the scaled tangential jumps of
//! the broken gradient `h_F ||[grad u . t]||_F^2` (the jump of the gradient's
//! tangential trace measures the distance of `grad_h u` to H(curl) and is
//! equivalent to the function-jump term up to fixed constants; a plain trace
//! of `u` itself would not scale consistently). Odd-numbered estimators
//! evaluate the residual at the enriched potential, even-numbered ones at
//! the CR potential itself.

use crate::assembly::{
    error_vs_exact, functional_value_local, LsFunctional, Method,
};
use crate::fespace::{build_space, Field, SpaceKind};
use crate::geometry::{add, dot, rot_ccw, scale, sub};
use crate::linsolve::cg_on_matrix;
use crate::mesh::{refine_uniform, BoundaryTag, Triangulation};
use crate::problem::ProblemSpec;
use crate::quadrature::edge_rule;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Global and per-element estimator values.
#[derive(Debug, Clone, Default)]
pub struct EstimatorReport {
    /// Estimator name -> global value (not squared).
    pub global: BTreeMap<String, f64>,
    /// Estimator name -> per-element squared indicators; edge contributions
    /// are split half/half between the two adjacent elements, boundary edges
    /// go fully to their single element.
    pub local: BTreeMap<String, Vec<f64>>,
    /// Estimator name -> global value / true energy-norm error, present when
    /// the problem carries an exact solution.
    pub effectivity: BTreeMap<String, f64>,
    /// True energy error used for the effectivities, if available.
    pub true_error: Option<f64>,
}

impl EstimatorReport {
    /// Check the partition identity `global^2 = sum(local)` for all entries.
    pub fn partition_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (name, &g) in &self.global {
            let s: f64 = self.local[name].iter().sum();
            let scale = (g * g).max(1e-300);
            worst = worst.max((g * g - s).abs() / scale);
        }
        worst
    }
}

/// Averaging enrichment from CR to conforming P2: vertex values are averaged
/// over the adjacent triangles (zero on Dirichlet vertices), edge midpoint
/// values take the single-valued CR midpoint trace (zero on Dirichlet edges).
pub fn enrich_to_p2(u_cr: &Field) -> Result<Field> {
    if u_cr.space.kind != SpaceKind::CrD {
        return Err(Error::Mismatch("enrich_to_p2 expects a CR field".into()));
    }
    let mesh = &u_cr.space.mesh;
    let p2 = Arc::new(build_space(mesh, SpaceKind::P2D)?);
    let mut out = Field::zeros(&p2);

    let mut vertex_sum = vec![0.0; mesh.num_vertices()];
    let mut vertex_cnt = vec![0usize; mesh.num_vertices()];
    for k in 0..mesh.num_triangles() {
        for i in 0..3 {
            let v = mesh.triangles[k][i];
            let mut l = [0.0; 3];
            l[i] = 1.0;
            vertex_sum[v] += u_cr.eval_scalar(k, l)?;
            vertex_cnt[v] += 1;
        }
    }
    for v in 0..mesh.num_vertices() {
        if let Some(d) = p2.vertex_dof[v] {
            out.coeffs[d] = vertex_sum[v] / vertex_cnt[v] as f64;
        }
    }
    for e in 0..mesh.num_edges() {
        if let Some(d) = p2.edge_dof[e] {
            let k = mesh.edge_tris[e][0]
                .or(mesh.edge_tris[e][1])
                .expect("edge with no adjacent triangle");
            let bary = edge_point_bary(mesh, k, e, 0.5);
            out.coeffs[d] = u_cr.eval_scalar(k, bary)?;
        }
    }
    Ok(out)
}

/// Barycentric coordinates in triangle `k` of the point at parameter `t`
/// along edge `e` (from the lower to the higher vertex).
fn edge_point_bary(mesh: &Triangulation, k: usize, e: usize, t: f64) -> [f64; 3] {
    let [a, b] = mesh.edges[e];
    let tri = mesh.triangles[k];
    let mut l = [0.0; 3];
    for i in 0..3 {
        if tri[i] == a {
            l[i] = 1.0 - t;
        } else if tri[i] == b {
            l[i] = t;
        }
    }
    l
}

/// Squared jump terms of one edge, both in the scaling used by the
/// estimators: `func` is `h_F^{-1} ||[u]||_F^2`, `tang` is
/// `h_F ||[grad u . t_F]||_F^2`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeJumpTerms {
    pub edge: usize,
    pub func: f64,
    pub tang: f64,
}

/// Signed mean `(1/|F|) int_F [u] ds` of the jump on one edge (Dirichlet
/// edges take the trace itself, Neumann edges are zero by convention).
pub fn jump_mean(u: &Field, e: usize) -> Result<f64> {
    let rule = edge_rule(2)?;
    let mut mean = 0.0;
    for (pt, w) in rule.points.iter().zip(&rule.weights) {
        mean += w * jump_value(u, e, pt[0])?;
    }
    Ok(mean)
}

fn jump_value(u: &Field, e: usize, t: f64) -> Result<f64> {
    let mesh = &u.space.mesh;
    match mesh.boundary_tag[e] {
        BoundaryTag::Neumann => Ok(0.0),
        BoundaryTag::Dirichlet => {
            let k = mesh.edge_tris[e][0].or(mesh.edge_tris[e][1]).unwrap();
            u.eval_scalar(k, edge_point_bary(mesh, k, e, t))
        }
        BoundaryTag::Interior => {
            let km = mesh.edge_tris[e][0].unwrap();
            let kp = mesh.edge_tris[e][1].unwrap();
            Ok(u.eval_scalar(km, edge_point_bary(mesh, km, e, t))?
                - u.eval_scalar(kp, edge_point_bary(mesh, kp, e, t))?)
        }
    }
}

/// Per-edge jump terms of a CR field over interior and Dirichlet edges.
pub fn edge_jump_terms(u: &Field) -> Result<Vec<EdgeJumpTerms>> {
    if u.space.kind != SpaceKind::CrD {
        return Err(Error::Mismatch("edge_jump_terms expects a CR field".into()));
    }
    let mesh = &u.space.mesh;
    let rule = edge_rule(2)?;
    let mut out = Vec::new();
    for e in 0..mesh.num_edges() {
        if mesh.boundary_tag[e] == BoundaryTag::Neumann {
            continue;
        }
        let h = mesh.h_edge[e];
        // Function jump: linear in t, 2-point Gauss integrates its square
        // exactly.
        let mut func = 0.0;
        for (pt, w) in rule.points.iter().zip(&rule.weights) {
            let j = jump_value(u, e, pt[0])?;
            func += w * h * j * j;
        }
        // Tangential jump of the broken gradient: constant per edge.
        let tf = mesh.edge_tangent(e);
        let tj = match mesh.boundary_tag[e] {
            BoundaryTag::Interior => {
                let km = mesh.edge_tris[e][0].unwrap();
                let kp = mesh.edge_tris[e][1].unwrap();
                dot(sub(u.grad_at(km, [1.0 / 3.0; 3])?, u.grad_at(kp, [1.0 / 3.0; 3])?), tf)
            }
            _ => {
                let k = mesh.edge_tris[e][0].or(mesh.edge_tris[e][1]).unwrap();
                dot(u.grad_at(k, [1.0 / 3.0; 3])?, tf)
            }
        };
        out.push(EdgeJumpTerms {
            edge: e,
            func: func / h,
            tang: h * h * tj * tj,
        });
    }
    Ok(out)
}

/// Distribute per-edge squared contributions onto elements (half/half on
/// interior edges).
fn scatter_edge_terms(
    mesh: &Triangulation,
    terms: &[EdgeJumpTerms],
    pick: impl Fn(&EdgeJumpTerms) -> f64,
) -> Vec<f64> {
    let mut local = vec![0.0; mesh.num_triangles()];
    for t in terms {
        let adj: Vec<usize> = mesh.edge_tris[t.edge].iter().flatten().copied().collect();
        let share = pick(t) / adj.len() as f64;
        for k in adj {
            local[k] += share;
        }
    }
    local
}

/// Energy of the broken-gradient distance `||A^{1/2} grad_h (u - uc)||^2`,
/// split per element.
fn grad_diff_energy(u: &Field, uc: &Field, p: &ProblemSpec) -> Result<Vec<f64>> {
    let mesh = &u.space.mesh;
    let rule = crate::quadrature::triangle_rule(4)?;
    let mut local = vec![0.0; mesh.num_triangles()];
    for (k, lk) in local.iter_mut().enumerate() {
        let area = mesh.area(k);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.bary_to_xy(k, *l);
            let a = p.eval_a(x[0], x[1]);
            let d = sub(u.grad_at(k, *l)?, uc.grad_at(k, *l)?);
            *lk += w * 2.0 * area * dot(a.mul_vec(d), d);
        }
    }
    Ok(local)
}

/// The six estimators of the two-field div method. `which` selects a subset
/// by number (1..=6); the enriched potential is computed once if any of
/// `eta1`, `eta3`, `eta5` (residual at the conforming potential) or
/// `eta1`/`eta2` (gradient-distance term) is requested.
pub fn estimate_div2(
    sigma: &Field,
    u_cr: &Field,
    p: &ProblemSpec,
    which: &[usize],
) -> Result<EstimatorReport> {
    for &i in which {
        if !(1..=6).contains(&i) {
            return Err(Error::InvalidArgument(format!(
                "estimator index {i} out of 1..=6"
            )));
        }
    }
    let mesh = &u_cr.space.mesh;
    let needs_enriched = which.iter().any(|&i| i <= 2 || i % 2 == 1);
    let u_c = if needs_enriched {
        Some(enrich_to_p2(u_cr)?)
    } else {
        None
    };

    let grad_term = if which.iter().any(|&i| i <= 2) {
        Some(grad_diff_energy(u_cr, u_c.as_ref().unwrap(), p)?)
    } else {
        None
    };
    let jump_terms = edge_jump_terms(u_cr)?;
    let func_local = scatter_edge_terms(mesh, &jump_terms, |t| t.func);
    let tang_local = scatter_edge_terms(mesh, &jump_terms, |t| t.tang);
    let resid_cr = if which.iter().any(|&i| i % 2 == 0) {
        Some(functional_value_local(
            LsFunctional::Div2,
            &[sigma, u_cr],
            p,
            true,
        )?)
    } else {
        None
    };
    let resid_c = if which.iter().any(|&i| i % 2 == 1) {
        Some(functional_value_local(
            LsFunctional::Div2,
            &[sigma, u_c.as_ref().unwrap()],
            p,
            true,
        )?)
    } else {
        None
    };

    let mut report = EstimatorReport::default();
    if p.exact.is_some() {
        report.true_error = Some(error_vs_exact(Method::Div2, &[sigma, u_cr], p)?.total);
    }
    for &i in which {
        let nc: &[f64] = match i {
            1 | 2 => grad_term.as_ref().unwrap(),
            3 | 4 => &func_local,
            _ => &tang_local,
        };
        let resid: &[f64] = if i % 2 == 0 {
            resid_cr.as_ref().unwrap()
        } else {
            resid_c.as_ref().unwrap()
        };
        let local: Vec<f64> = nc.iter().zip(resid).map(|(a, b)| a + b).collect();
        let global = local.iter().sum::<f64>().sqrt();
        let name = format!("eta{i}");
        if let Some(err) = report.true_error {
            if err > 0.0 {
                report.effectivity.insert(name.clone(), global / err);
            }
        }
        report.local.insert(name.clone(), local);
        report.global.insert(name, global);
    }
    Ok(report)
}

/// Built-in estimators of the div-curl methods: the functional value itself,
/// named `zeta` for the three-field and `xi` for the restricted two-field
/// method.
pub fn estimate_divcurl(
    fields: &[&Field],
    p: &ProblemSpec,
    method: Method,
) -> Result<EstimatorReport> {
    let (functional, name) = match method {
        Method::DivCurl3 => (LsFunctional::DivCurl3, "zeta"),
        Method::DivCurl2 => (LsFunctional::DivCurl2, "xi"),
        other => {
            return Err(Error::Mismatch(format!(
                "estimate_divcurl applies to the div-curl methods, not {other}"
            )))
        }
    };
    let local = functional_value_local(functional, fields, p, true)?;
    let global = local.iter().sum::<f64>().sqrt();
    let mut report = EstimatorReport::default();
    if p.exact.is_some() {
        let err = error_vs_exact(method, fields, p)?.total;
        report.true_error = Some(err);
        if err > 0.0 {
            report.effectivity.insert(name.to_string(), global / err);
        }
    }
    report.local.insert(name.to_string(), local);
    report.global.insert(name.to_string(), global);
    Ok(report)
}

/// One level of the norm-equivalence witness.
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleRow {
    pub level: usize,
    /// Value of the homogeneous div functional at the constructed pair.
    pub j_div: f64,
    /// Squared triple norm of the pair.
    pub triple_norm_sq: f64,
    pub ratio: f64,
}

/// Numerical witness that no constant `C` satisfies
/// `C |||(tau, v)|||^2 <= ||grad_h v + tau||^2 + ||div tau||^2`
/// uniformly over the broken space (case A = I, b = 0, c = 0).
///
/// The construction takes the CR basis function `w` of one interior edge of
/// the coarse mesh, splits its broken gradient on a sequence of uniformly
/// refined meshes as `grad_h w = grad alpha + curl beta` (discrete Helmholtz
/// split with conforming P1 potentials), and evaluates the pair
/// `v = w - alpha`, `tau = -curl beta`. The flux is exactly divergence-free,
/// the functional value tends to zero with refinement, but the triple norm
/// stays bounded below, so the ratio decays.
pub fn counterexample_ratio(
    coarse: &Arc<Triangulation>,
    edge: usize,
    levels: usize,
) -> Result<Vec<CounterexampleRow>> {
    if edge >= coarse.num_edges() {
        return Err(Error::InvalidArgument(format!(
            "edge {edge} out of range (mesh has {} edges)",
            coarse.num_edges()
        )));
    }
    if coarse.boundary_tag[edge] != BoundaryTag::Interior {
        return Err(Error::InvalidArgument(format!(
            "edge {edge} is a boundary edge; the witness needs an interior edge"
        )));
    }
    if levels == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }

    // CR basis of the chosen edge on the coarse mesh: gradient per coarse cell.
    let cr = Arc::new(build_space(coarse, SpaceKind::CrD)?);
    let dof = cr.edge_dof[edge].expect("interior edges always carry a CR dof");
    let mut w = Field::zeros(&cr);
    w.coeffs[dof] = 1.0;
    let grad_w_coarse: Vec<[f64; 2]> = (0..coarse.num_triangles())
        .map(|k| w.grad_at(k, [1.0 / 3.0; 3]))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut mesh = Arc::clone(coarse);
    // Composition of parent maps down to the coarse mesh.
    let mut to_coarse: Vec<usize> = (0..coarse.num_triangles()).collect();
    for level in 1..=levels {
        let fine = Arc::new(refine_uniform(&mesh)?);
        let parent = fine.parent.clone().unwrap();
        to_coarse = parent.iter().map(|&pk| to_coarse[pk]).collect();
        mesh = fine;

        let gw: Vec<[f64; 2]> = to_coarse
            .iter()
            .map(|&ck| grad_w_coarse[ck])
            .collect();

        // alpha in P1 with zero Dirichlet trace; beta in P1 constrained on
        // the Neumann part (grounded at one vertex when that part is empty).
        let alpha_space = Arc::new(build_space(&mesh, SpaceKind::P1D)?);
        let has_neumann = mesh
            .boundary_tag
            .iter()
            .any(|&t| t == BoundaryTag::Neumann);
        let beta_space = Arc::new(build_space(
            &mesh,
            if has_neumann {
                SpaceKind::P1N
            } else {
                SpaceKind::P1Free
            },
        )?);
        let ground = !has_neumann;

        let galpha = p1_projection(&alpha_space, &gw, false, false)?;
        let gbeta = p1_projection(&beta_space, &gw, true, ground)?;

        let mut j = 0.0;
        let mut triple = 0.0;
        for k in 0..mesh.num_triangles() {
            let area = mesh.area(k);
            let gv = sub(gw[k], galpha[k]);
            let tau = scale(-1.0, rot_ccw(gbeta[k]));
            let r = add(gv, tau);
            // div tau vanishes identically: tau is the rotated gradient of a
            // continuous piecewise linear, cellwise constant with continuous
            // normal traces.
            j += area * dot(r, r);
            triple += area * (dot(gv, gv) + dot(tau, tau));
        }
        rows.push(CounterexampleRow {
            level,
            j_div: j,
            triple_norm_sq: triple,
            ratio: j / triple,
        });
    }
    Ok(rows)
}

/// Galerkin projection of a cellwise-constant vector field onto gradients of
/// the P1 space: solve `(grad q_h, grad phi) = (g, R phi)` where `R` is the
/// identity or the 90-degree rotation (for the curl part), and return the
/// per-cell gradient of the solution. Grounding pins the first free dof of an
/// unconstrained space.
fn p1_projection(
    space: &Arc<crate::fespace::FeSpace>,
    cell_field: &[[f64; 2]],
    rotate: bool,
    ground: bool,
) -> Result<Vec<[f64; 2]>> {
    let mesh = &space.mesh;
    let n = space.dof_count;
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for k in 0..mesh.num_triangles() {
        let gl = mesh.grad_lambda(k);
        let area = mesh.area(k);
        let dofs = space.local_dofs(k);
        for i in 0..3 {
            let Some(di) = dofs[i].dof else { continue };
            let gi = if rotate { rot_ccw(gl[i]) } else { gl[i] };
            rhs[di] += area * dot(cell_field[k], gi);
            for j in 0..3 {
                let Some(dj) = dofs[j].dof else { continue };
                triplets.push((di, dj, area * dot(gl[i], gl[j])));
            }
        }
    }
    if ground {
        // Pin dof 0 (the nullspace is the constants; the gradient is
        // unaffected by the choice of representative).
        triplets.retain(|&(r, c, _)| r != 0 && c != 0);
        triplets.push((0, 0, 1.0));
        rhs[0] = 0.0;
    }
    let a = CsrMatrix::from_triplets(n, triplets);
    let rep = cg_on_matrix(&a, &rhs, 1e-13, 20 * n + 2000)?;
    if !rep.converged {
        return Err(Error::Numerical(format!(
            "projection solve stalled at relative residual {:.2e}",
            rep.relative_residual
        )));
    }
    let q = Field::from_coeffs(space, rep.solution)?;
    (0..mesh.num_triangles())
        .map(|k| q.grad_at(k, [1.0 / 3.0; 3]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::interpolate_scalar;
    use crate::mesh::{make_structured_square, Side};
    use crate::problem::builtin_problem;
    use std::collections::BTreeMap as Map;

    #[test]
    fn enrichment_reproduces_continuous_p1() {
        // A continuous P1 function with zero Dirichlet trace, seen as a CR
        // field, is reproduced exactly by the enrichment.
        let mesh = Arc::new(make_structured_square(3, &[Side::Left]).unwrap());
        let g = |x: f64, _: f64| x; // zero on the left side
        let cr = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
        let u = interpolate_scalar(&cr, g).unwrap();
        let uc = enrich_to_p2(&u).unwrap();
        let rule = crate::quadrature::triangle_rule(4).unwrap();
        let mut diff = 0.0;
        for k in 0..mesh.num_triangles() {
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let d = sub(
                    u.grad_at(k, *l).unwrap(),
                    uc.grad_at(k, *l).unwrap(),
                );
                diff += w * 2.0 * mesh.area(k) * dot(d, d);
            }
        }
        assert!(diff.sqrt() < 1e-13);
    }

    #[test]
    fn enrichment_of_single_basis_averages_traces() {
        // Hand enumeration on the n=2 all-Dirichlet square: for the CR basis
        // of an interior edge F, the enriched value at an interior endpoint z
        // of F is the average of theta_F over all triangles around z.
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let cr = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
        let p2 = Arc::new(build_space(&mesh, SpaceKind::P2D).unwrap());
        for e in 0..mesh.num_edges() {
            let Some(d) = cr.edge_dof[e] else { continue };
            let mut u = Field::zeros(&cr);
            u.coeffs[d] = 1.0;
            let uc = enrich_to_p2(&u).unwrap();
            for &v in &mesh.edges[e] {
                let Some(pd) = p2.vertex_dof[v] else { continue };
                // Average the per-triangle traces by hand.
                let mut sum = 0.0;
                let mut cnt = 0;
                for k in 0..mesh.num_triangles() {
                    if let Some(i) = mesh.triangles[k].iter().position(|&w| w == v) {
                        let mut l = [0.0; 3];
                        l[i] = 1.0;
                        sum += u.eval_scalar(k, l).unwrap();
                        cnt += 1;
                    }
                }
                assert!((uc.coeffs[pd] - sum / cnt as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn jump_means_vanish_for_cr() {
        let mesh = Arc::new(make_structured_square(3, &[Side::Left, Side::Top]).unwrap());
        let cr = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
        let mut state = 5u64;
        let mut rng = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut u = Field::zeros(&cr);
        for c in &mut u.coeffs {
            *c = rng();
        }
        for e in 0..mesh.num_edges() {
            match mesh.boundary_tag[e] {
                BoundaryTag::Neumann => {}
                _ => {
                    assert!(jump_mean(&u, e).unwrap().abs() < 1e-12, "edge {e}");
                }
            }
        }
    }

    #[test]
    fn counterexample_rejects_boundary_edge() {
        let mesh = Arc::new(make_structured_square(4, &Side::ALL).unwrap());
        let be = (0..mesh.num_edges())
            .find(|&e| mesh.boundary_tag[e] != BoundaryTag::Interior)
            .unwrap();
        assert!(counterexample_ratio(&mesh, be, 2).is_err());
    }

    #[test]
    fn counterexample_ratio_decays() {
        let mesh = Arc::new(make_structured_square(4, &Side::ALL).unwrap());
        // Interior edge closest to the center.
        let e = (0..mesh.num_edges())
            .filter(|&e| mesh.boundary_tag[e] == BoundaryTag::Interior)
            .min_by(|&a, &b| {
                let da = {
                    let m = mesh.edge_midpoint(a);
                    (m[0] - 0.5).hypot(m[1] - 0.5)
                };
                let db = {
                    let m = mesh.edge_midpoint(b);
                    (m[0] - 0.5).hypot(m[1] - 0.5)
                };
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .unwrap();
        let rows = counterexample_ratio(&mesh, e, 3).unwrap();
        assert_eq!(rows.len(), 3);
        for w in rows.windows(2) {
            assert!(w[1].ratio < w[0].ratio, "{rows:?}");
        }
        // The triple norm stays bounded below while the functional decays.
        assert!(rows.last().unwrap().triple_norm_sq > 0.5 * rows[0].triple_norm_sq);
    }

    #[test]
    fn estimators_report_partition_identity() {
        let mesh = Arc::new(make_structured_square(4, &Side::ALL).unwrap());
        let p = builtin_problem("poisson-sine", &Map::new()).unwrap();
        let sol = crate::assembly::solve_on_mesh(&mesh, Method::Div2, &p, 1e-11, 4000).unwrap();
        let rep = estimate_div2(
            &sol.fields[0],
            &sol.fields[1],
            &p,
            &[1, 2, 3, 4, 5, 6],
        )
        .unwrap();
        assert!(rep.partition_defect() < 1e-12);
        // eta1 <= sqrt(2) eta2 and vice versa.
        let e1 = rep.global["eta1"];
        let e2 = rep.global["eta2"];
        assert!(e1 <= 2.0_f64.sqrt() * e2 + 1e-14);
        assert!(e2 <= 2.0_f64.sqrt() * e1 + 1e-14);
        for i in 1..=6 {
            assert!(rep.global[&format!("eta{i}")] > 0.0);
        }
    }
}
