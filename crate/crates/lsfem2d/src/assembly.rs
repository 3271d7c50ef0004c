//! Assembly of the least-squares bilinear forms, the nonconforming Galerkin
//! baseline, functional values, norms, and errors against exact solutions.
//!
//! Matrices are integrated with the degree-4 triangle rule; right-hand sides
//! and error norms use the degree-6 rule so that load quadrature never shows
//! up in the error-equation and rate checks.

use crate::fespace::{build_space, FeSpace, Field, SpaceKind};
use crate::geometry::{add, dot, rot_ccw, scale, sub, Mat2};
use crate::linsolve::{cg_solve, SolveReport};
use crate::mesh::Triangulation;
use crate::problem::ProblemSpec;
use crate::quadrature::triangle_rule;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::ops::Range;
use std::sync::Arc;

/// Discretization method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Two-field potential-flux div least squares on RT0 x CR.
    Div2,
    /// Three-field potential-flux-intensity div-curl least squares on
    /// RT0 x N0 x CR.
    DivCurl3,
    /// Two-field potential-flux div-curl least squares with a conforming
    /// vector P1 flux space (restricted: smooth constant A only).
    DivCurl2,
    /// Plain nonconforming Galerkin baseline on CR.
    GalerkinCr,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Div2 => "div2",
            Method::DivCurl3 => "divcurl3",
            Method::DivCurl2 => "divcurl2",
            Method::GalerkinCr => "galerkin-cr",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "div2" => Ok(Method::Div2),
            "divcurl3" => Ok(Method::DivCurl3),
            "divcurl2" => Ok(Method::DivCurl2),
            "galerkin-cr" => Ok(Method::GalerkinCr),
            other => Err(Error::UnknownName(format!("method '{other}'"))),
        }
    }
}

/// Least-squares functional selector; the three-field functional comes in
/// three algebraically equivalent variants that square different pairs of
/// the redundant first-order relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsFunctional {
    Div2,
    /// Squares (flux + A grad u) and (flux - A intensity).
    DivCurl3,
    /// Squares (grad u + intensity) and (flux - A intensity).
    DivCurl3GradPsi,
    /// Squares (flux + A grad u) and (grad u + intensity).
    DivCurl3GradBoth,
    DivCurl2,
}

/// Assembled symmetric system with block layout metadata.
#[derive(Debug, Clone)]
pub struct LsSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub blocks: Vec<(String, Range<usize>)>,
    pub method: Method,
}

impl LsSystem {
    pub fn block(&self, name: &str) -> Option<Range<usize>> {
        self.blocks
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r.clone())
    }

    pub fn dof_count(&self) -> usize {
        self.matrix.n
    }
}

const MATRIX_QUAD_DEGREE: usize = 4;
const RHS_QUAD_DEGREE: usize = 6;
const ERROR_QUAD_DEGREE: usize = 6;

fn check_same_mesh(spaces: &[&FeSpace]) -> Result<()> {
    for w in spaces.windows(2) {
        if !Arc::ptr_eq(&w[0].mesh, &w[1].mesh) && !w[0].mesh.same_geometry(&w[1].mesh) {
            return Err(Error::Mismatch(
                "spaces are built on different meshes".into(),
            ));
        }
    }
    Ok(())
}

fn expect_kind(space: &FeSpace, kind: SpaceKind, role: &str) -> Result<()> {
    if space.kind != kind {
        return Err(Error::Mismatch(format!(
            "{role} space must be {kind:?}, got {:?}",
            space.kind
        )));
    }
    Ok(())
}

/// Per-cell geometric data shared by the assembly loops.
struct CellCtx {
    area: f64,
    gl: [[f64; 2]; 3],
    verts: [[f64; 2]; 3],
    rt_sign: [f64; 3],
}

impl CellCtx {
    fn new(mesh: &Triangulation, k: usize) -> CellCtx {
        let t = mesh.triangles[k];
        CellCtx {
            area: mesh.area(k),
            gl: mesh.grad_lambda(k),
            verts: [
                mesh.vertices[t[0]],
                mesh.vertices[t[1]],
                mesh.vertices[t[2]],
            ],
            rt_sign: [
                mesh.tri_edge_signs[k][0] as f64,
                mesh.tri_edge_signs[k][1] as f64,
                mesh.tri_edge_signs[k][2] as f64,
            ],
        }
    }

    fn xy(&self, l: [f64; 3]) -> [f64; 2] {
        let mut x = [0.0, 0.0];
        for i in 0..3 {
            x = add(x, scale(l[i], self.verts[i]));
        }
        x
    }

    /// CR basis values at a barycentric point.
    fn cr_vals(&self, l: [f64; 3]) -> [f64; 3] {
        [1.0 - 2.0 * l[0], 1.0 - 2.0 * l[1], 1.0 - 2.0 * l[2]]
    }

    /// CR basis gradients (constant per cell).
    fn cr_grads(&self) -> [[f64; 2]; 3] {
        [
            scale(-2.0, self.gl[0]),
            scale(-2.0, self.gl[1]),
            scale(-2.0, self.gl[2]),
        ]
    }

    /// Signed RT0 basis vectors at a physical point and their divergences.
    fn rt_vals(&self, x: [f64; 2]) -> ([[f64; 2]; 3], [f64; 3]) {
        let inv2a = 1.0 / (2.0 * self.area);
        let mut vals = [[0.0; 2]; 3];
        let mut divs = [0.0; 3];
        for i in 0..3 {
            vals[i] = scale(self.rt_sign[i] * inv2a, sub(x, self.verts[i]));
            divs[i] = self.rt_sign[i] / self.area;
        }
        (vals, divs)
    }

    /// Signed N0 basis vectors at a physical point and their scalar curls.
    fn n0_vals(&self, x: [f64; 2]) -> ([[f64; 2]; 3], [f64; 3]) {
        let inv2a = 1.0 / (2.0 * self.area);
        let mut vals = [[0.0; 2]; 3];
        let mut curls = [0.0; 3];
        for i in 0..3 {
            vals[i] = scale(self.rt_sign[i] * inv2a, rot_ccw(sub(x, self.verts[i])));
            curls[i] = self.rt_sign[i] / self.area;
        }
        (vals, curls)
    }
}

/// Coefficient values at one quadrature point.
struct CoeffCtx {
    a: Mat2,
    a_inv: Mat2,
    a_sqrt: Mat2,
    a_isqrt: Mat2,
    b: [f64; 2],
    c: f64,
}

impl CoeffCtx {
    fn at(p: &ProblemSpec, x: [f64; 2]) -> CoeffCtx {
        let a = p.eval_a(x[0], x[1]);
        let a_sqrt = a.spd_sqrt();
        CoeffCtx {
            a,
            a_inv: a.inverse(),
            a_sqrt,
            a_isqrt: a_sqrt.inverse(),
            b: (p.b_vec)(x[0], x[1]),
            c: (p.c)(x[0], x[1]),
        }
    }
}

/// Two-field div least squares: minimize
/// `||A^{1/2} grad_h v + A^{-1/2} tau||^2 + ||div tau + X_h v - f||^2`
/// over RT0_N x CR_D.
pub fn assemble_div2(
    sigma_space: &FeSpace,
    u_space: &FeSpace,
    p: &ProblemSpec,
) -> Result<LsSystem> {
    expect_kind(sigma_space, SpaceKind::Rt0N, "flux")?;
    expect_kind(u_space, SpaceKind::CrD, "potential")?;
    check_same_mesh(&[sigma_space, u_space])?;
    let mesh = &sigma_space.mesh;
    let ns = sigma_space.dof_count;
    let nu = u_space.dof_count;
    let n = ns + nu;
    let rule = triangle_rule(MATRIX_QUAD_DEGREE)?;
    let rhs_rule = triangle_rule(RHS_QUAD_DEGREE)?;

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for k in 0..mesh.num_triangles() {
        let ctx = CellCtx::new(mesh, k);
        let mut dofs = [None; 6];
        for (i, ld) in sigma_space.local_dofs(k).iter().enumerate() {
            dofs[i] = ld.dof;
        }
        for (i, ld) in u_space.local_dofs(k).iter().enumerate() {
            dofs[3 + i] = ld.dof.map(|d| ns + d);
        }
        let cr_g = ctx.cr_grads();

        // Residual rows: [R1x, R1y, R2] where R1 is the A-weighted flux
        // relation and R2 the divergence relation.
        let rows_at = |l: [f64; 3], co: &CoeffCtx, ctx: &CellCtx| -> [[f64; 3]; 6] {
            let x = ctx.xy(l);
            let (rt_v, rt_d) = ctx.rt_vals(x);
            let cr_v = ctx.cr_vals(l);
            let mut rows = [[0.0; 3]; 6];
            for i in 0..3 {
                let r1 = co.a_isqrt.mul_vec(rt_v[i]);
                rows[i] = [r1[0], r1[1], rt_d[i]];
            }
            for j in 0..3 {
                let r1 = co.a_sqrt.mul_vec(cr_g[j]);
                rows[3 + j] = [r1[0], r1[1], dot(co.b, cr_g[j]) + co.c * cr_v[j]];
            }
            rows
        };

        let mut local_m = vec![vec![0.0_f64; 6]; 6];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let co = CoeffCtx::at(p, ctx.xy(*l));
            let rows = rows_at(*l, &co, &ctx);
            let wj = w * 2.0 * ctx.area;
            for i in 0..6 {
                for j in 0..6 {
                    local_m[i][j] += wj * dot3(rows[i], rows[j]);
                }
            }
        }
        let mut local_rhs = [0.0_f64; 6];
        for (l, w) in rhs_rule.points.iter().zip(&rhs_rule.weights) {
            let x = ctx.xy(*l);
            let co = CoeffCtx::at(p, x);
            let rows = rows_at(*l, &co, &ctx);
            let fv = (p.f)(x[0], x[1]);
            let wj = w * 2.0 * ctx.area;
            for i in 0..6 {
                local_rhs[i] += wj * fv * rows[i][2];
            }
        }
        push_rows(&mut triplets, &mut rhs, &dofs, &local_m, &local_rhs);
    }

    Ok(LsSystem {
        matrix: CsrMatrix::from_triplets(n, triplets),
        rhs,
        blocks: vec![("sigma".into(), 0..ns), ("u".into(), ns..ns + nu)],
        method: Method::Div2,
    })
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn push_rows(
    triplets: &mut Vec<(usize, usize, f64)>,
    rhs: &mut [f64],
    dofs: &[Option<usize>],
    local_m: &[Vec<f64>],
    local_rhs: &[f64],
) {
    for (i, &di) in dofs.iter().enumerate() {
        let Some(di) = di else { continue };
        rhs[di] += local_rhs[i];
        for (j, &dj) in dofs.iter().enumerate() {
            let Some(dj) = dj else { continue };
            if local_m[i][j] != 0.0 {
                triplets.push((di, dj, local_m[i][j]));
            }
        }
    }
}

/// Three-field div-curl least squares: minimize
/// `||A^{-1/2}(tau + A grad_h v)||^2 + ||A^{-1/2} tau - A^{1/2} psi||^2
///  + ||curl psi||^2 + ||div tau + G_rst(psi, tau, v) - f||^2`
/// over RT0_N x N0_D x CR_D, with the convection term
/// `G_rst = b.(r grad_h v - s psi - t A^{-1} tau) + c v`.
pub fn assemble_divcurl3(
    sigma_space: &FeSpace,
    phi_space: &FeSpace,
    u_space: &FeSpace,
    p: &ProblemSpec,
) -> Result<LsSystem> {
    expect_kind(sigma_space, SpaceKind::Rt0N, "flux")?;
    expect_kind(phi_space, SpaceKind::N0D, "intensity")?;
    expect_kind(u_space, SpaceKind::CrD, "potential")?;
    check_same_mesh(&[sigma_space, phi_space, u_space])?;
    let mesh = &sigma_space.mesh;
    let ns = sigma_space.dof_count;
    let nu = u_space.dof_count;
    let np = phi_space.dof_count;
    let n = ns + nu + np;
    let [wr, ws, wt] = p.convection_weights;
    let rule = triangle_rule(MATRIX_QUAD_DEGREE)?;
    let rhs_rule = triangle_rule(RHS_QUAD_DEGREE)?;

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for k in 0..mesh.num_triangles() {
        let ctx = CellCtx::new(mesh, k);
        // Block order sigma, u, phi.
        let mut dofs = [None; 9];
        for (i, ld) in sigma_space.local_dofs(k).iter().enumerate() {
            dofs[i] = ld.dof;
        }
        for (i, ld) in u_space.local_dofs(k).iter().enumerate() {
            dofs[3 + i] = ld.dof.map(|d| ns + d);
        }
        for (i, ld) in phi_space.local_dofs(k).iter().enumerate() {
            dofs[6 + i] = ld.dof.map(|d| ns + nu + d);
        }
        let cr_g = ctx.cr_grads();

        // Rows: [R1x, R1y, R2x, R2y, R3, R4].
        let rows_at = |l: [f64; 3], co: &CoeffCtx, ctx: &CellCtx| -> [[f64; 6]; 9] {
            let x = ctx.xy(l);
            let (rt_v, rt_d) = ctx.rt_vals(x);
            let (n0_v, n0_c) = ctx.n0_vals(x);
            let cr_v = ctx.cr_vals(l);
            let mut rows = [[0.0; 6]; 9];
            for i in 0..3 {
                let r1 = co.a_isqrt.mul_vec(rt_v[i]);
                let conv = -wt * dot(co.b, co.a_inv.mul_vec(rt_v[i]));
                rows[i] = [r1[0], r1[1], r1[0], r1[1], 0.0, rt_d[i] + conv];
            }
            for j in 0..3 {
                let r1 = co.a_sqrt.mul_vec(cr_g[j]);
                let conv = wr * dot(co.b, cr_g[j]) + co.c * cr_v[j];
                rows[3 + j] = [r1[0], r1[1], 0.0, 0.0, 0.0, conv];
            }
            for m in 0..3 {
                let r2 = co.a_sqrt.mul_vec(n0_v[m]);
                let conv = -ws * dot(co.b, n0_v[m]);
                rows[6 + m] = [0.0, 0.0, -r2[0], -r2[1], n0_c[m], conv];
            }
            rows
        };

        let mut local_m = vec![vec![0.0_f64; 9]; 9];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let co = CoeffCtx::at(p, ctx.xy(*l));
            let rows = rows_at(*l, &co, &ctx);
            let wj = w * 2.0 * ctx.area;
            for i in 0..9 {
                for j in 0..9 {
                    let mut v = 0.0;
                    for t in 0..6 {
                        v += rows[i][t] * rows[j][t];
                    }
                    local_m[i][j] += wj * v;
                }
            }
        }
        let mut local_rhs = [0.0_f64; 9];
        for (l, w) in rhs_rule.points.iter().zip(&rhs_rule.weights) {
            let x = ctx.xy(*l);
            let co = CoeffCtx::at(p, x);
            let rows = rows_at(*l, &co, &ctx);
            let fv = (p.f)(x[0], x[1]);
            let wj = w * 2.0 * ctx.area;
            for i in 0..9 {
                local_rhs[i] += wj * fv * rows[i][5];
            }
        }
        push_rows(&mut triplets, &mut rhs, &dofs, &local_m, &local_rhs);
    }

    Ok(LsSystem {
        matrix: CsrMatrix::from_triplets(n, triplets),
        rhs,
        blocks: vec![
            ("sigma".into(), 0..ns),
            ("u".into(), ns..ns + nu),
            ("phi".into(), ns + nu..n),
        ],
        method: Method::DivCurl3,
    })
}

/// Guard for the restricted two-field div-curl method: the conforming flux
/// space only approximates fluxes that are H^1-regular, which fails for
/// discontinuous diffusion; spatially varying A would additionally require
/// derivatives of A in the curl term, so the method is restricted to constant
/// coefficient matrices here.
fn check_divcurl2_coefficient(p: &ProblemSpec) -> Result<Mat2> {
    if !p.a.is_smooth() {
        return Err(Error::Restriction(format!(
            "problem '{}' has a discontinuous diffusion coefficient: its exact flux is \
             H(div)-conforming but not H^1-regular, so a continuous flux space is the \
             wrong approximation space and the div-curl functional would not vanish \
             even at the exact solution",
            p.name
        )));
    }
    match &p.a {
        crate::problem::Diffusion::Constant(m) => Ok(*m),
        _ => Err(Error::Restriction(format!(
            "problem '{}' has a spatially varying diffusion coefficient; the restricted \
             two-field div-curl method is implemented for constant A only (the curl of \
             A^{{-1}} tau would otherwise involve derivatives of A)",
            p.name
        ))),
    }
}

/// Restricted two-field div-curl least squares on a conforming vector P1 flux
/// space: minimize
/// `||A^{-1/2} tau + A^{1/2} grad_h v||^2 + ||curl(A^{-1} tau)||^2
///  + ||div tau + X_h v - f||^2`.
pub fn assemble_divcurl2(
    sigma_space: &FeSpace,
    u_space: &FeSpace,
    p: &ProblemSpec,
) -> Result<LsSystem> {
    expect_kind(sigma_space, SpaceKind::VecP1Flux, "flux")?;
    expect_kind(u_space, SpaceKind::CrD, "potential")?;
    check_same_mesh(&[sigma_space, u_space])?;
    let a_const = check_divcurl2_coefficient(p)?;
    let mesh = &sigma_space.mesh;
    // Tangential constraints were eliminated componentwise when the space was
    // built, which encodes gamma_t(A^{-1} tau) = 0 only if A does not rotate
    // the constrained directions.
    let has_dirichlet = mesh
        .boundary_tag
        .iter()
        .any(|&t| t == crate::mesh::BoundaryTag::Dirichlet);
    if has_dirichlet && !a_const.is_diagonal(1e-12) {
        return Err(Error::Restriction(
            "tangential flux constraints on Dirichlet edges are imposed componentwise, \
             which requires a diagonal diffusion matrix"
                .into(),
        ));
    }

    let ns = sigma_space.dof_count;
    let nu = u_space.dof_count;
    let n = ns + nu;
    let a_inv = a_const.inverse();
    let rule = triangle_rule(MATRIX_QUAD_DEGREE)?;
    let rhs_rule = triangle_rule(RHS_QUAD_DEGREE)?;

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for k in 0..mesh.num_triangles() {
        let ctx = CellCtx::new(mesh, k);
        let mut dofs = [None; 9];
        for (i, ld) in sigma_space.local_dofs(k).iter().enumerate() {
            dofs[i] = ld.dof;
        }
        for (i, ld) in u_space.local_dofs(k).iter().enumerate() {
            dofs[6 + i] = ld.dof.map(|d| ns + d);
        }
        let cr_g = ctx.cr_grads();

        // Rows: [R1x, R1y, Rcurl, Rdiv]. Vector P1 basis for (vertex i,
        // component c) is lambda_i e_c with constant per-cell derivatives.
        let rows_at = |l: [f64; 3], co: &CoeffCtx, ctx: &CellCtx| -> [[f64; 4]; 9] {
            let cr_v = ctx.cr_vals(l);
            let mut rows = [[0.0; 4]; 9];
            for i in 0..3 {
                for c in 0..2 {
                    let mut basis = [0.0, 0.0];
                    basis[c] = l[i];
                    let r1 = co.a_isqrt.mul_vec(basis);
                    // curl(A^{-1} lambda_i e_c) = (A^{-1})_{1c} d lambda_i/dx
                    //                           - (A^{-1})_{0c} d lambda_i/dy
                    let curl = a_inv.m[1][c] * ctx.gl[i][0] - a_inv.m[0][c] * ctx.gl[i][1];
                    let div = ctx.gl[i][c];
                    rows[2 * i + c] = [r1[0], r1[1], curl, div];
                }
            }
            for j in 0..3 {
                let r1 = co.a_sqrt.mul_vec(cr_g[j]);
                rows[6 + j] = [
                    r1[0],
                    r1[1],
                    0.0,
                    dot(co.b, cr_g[j]) + co.c * cr_v[j],
                ];
            }
            rows
        };

        let mut local_m = vec![vec![0.0_f64; 9]; 9];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let co = CoeffCtx::at(p, ctx.xy(*l));
            let rows = rows_at(*l, &co, &ctx);
            let wj = w * 2.0 * ctx.area;
            for i in 0..9 {
                for j in 0..9 {
                    let mut v = 0.0;
                    for t in 0..4 {
                        v += rows[i][t] * rows[j][t];
                    }
                    local_m[i][j] += wj * v;
                }
            }
        }
        let mut local_rhs = [0.0_f64; 9];
        for (l, w) in rhs_rule.points.iter().zip(&rhs_rule.weights) {
            let x = ctx.xy(*l);
            let co = CoeffCtx::at(p, x);
            let rows = rows_at(*l, &co, &ctx);
            let fv = (p.f)(x[0], x[1]);
            let wj = w * 2.0 * ctx.area;
            for i in 0..9 {
                local_rhs[i] += wj * fv * rows[i][3];
            }
        }
        push_rows(&mut triplets, &mut rhs, &dofs, &local_m, &local_rhs);
    }

    Ok(LsSystem {
        matrix: CsrMatrix::from_triplets(n, triplets),
        rhs,
        blocks: vec![("sigma".into(), 0..ns), ("u".into(), ns..n)],
        method: Method::DivCurl2,
    })
}

/// Plain nonconforming Galerkin form
/// `a_h(w, v) = (A grad_h w, grad_h v) + (b.grad_h w + c w, v)`;
/// nonsymmetric whenever b is nonzero. Comparison baseline only.
pub fn assemble_galerkin_cr(u_space: &FeSpace, p: &ProblemSpec) -> Result<LsSystem> {
    expect_kind(u_space, SpaceKind::CrD, "potential")?;
    let mesh = &u_space.mesh;
    let n = u_space.dof_count;
    let rule = triangle_rule(MATRIX_QUAD_DEGREE)?;
    let rhs_rule = triangle_rule(RHS_QUAD_DEGREE)?;

    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; n];
    for k in 0..mesh.num_triangles() {
        let ctx = CellCtx::new(mesh, k);
        let dofs: Vec<Option<usize>> =
            u_space.local_dofs(k).iter().map(|ld| ld.dof).collect();
        let cr_g = ctx.cr_grads();
        let mut local = [[0.0_f64; 3]; 3];
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = ctx.xy(*l);
            let co = CoeffCtx::at(p, x);
            let cr_v = ctx.cr_vals(*l);
            let wj = w * 2.0 * ctx.area;
            for i in 0..3 {
                // test i
                for j in 0..3 {
                    // trial j
                    let diff = dot(co.a.mul_vec(cr_g[j]), cr_g[i]);
                    let low = (dot(co.b, cr_g[j]) + co.c * cr_v[j]) * cr_v[i];
                    local[i][j] += wj * (diff + low);
                }
            }
        }
        let mut local_rhs = [0.0_f64; 3];
        for (l, w) in rhs_rule.points.iter().zip(&rhs_rule.weights) {
            let x = ctx.xy(*l);
            let cr_v = ctx.cr_vals(*l);
            let fv = (p.f)(x[0], x[1]);
            let wj = w * 2.0 * ctx.area;
            for i in 0..3 {
                local_rhs[i] += wj * fv * cr_v[i];
            }
        }
        for (i, &di) in dofs.iter().enumerate() {
            let Some(di) = di else { continue };
            rhs[di] += local_rhs[i];
            for (j, &dj) in dofs.iter().enumerate() {
                let Some(dj) = dj else { continue };
                if local[i][j] != 0.0 {
                    triplets.push((di, dj, local[i][j]));
                }
            }
        }
    }

    Ok(LsSystem {
        matrix: CsrMatrix::from_triplets(n, triplets),
        rhs,
        blocks: vec![("u".into(), 0..n)],
        method: Method::GalerkinCr,
    })
}

/// Pointwise residuals of the selected functional for given fields.
/// Returns the squared residual density at one quadrature point.
struct FieldResiduals<'a> {
    functional: LsFunctional,
    p: &'a ProblemSpec,
    f_included: bool,
}

impl<'a> FieldResiduals<'a> {
    fn density(
        &self,
        k: usize,
        l: [f64; 3],
        x: [f64; 2],
        fields: &[&Field],
    ) -> Result<f64> {
        let co = CoeffCtx::at(self.p, x);
        let fv = if self.f_included {
            (self.p.f)(x[0], x[1])
        } else {
            0.0
        };
        Ok(match self.functional {
            LsFunctional::Div2 => {
                let (sigma, u) = (fields[0], fields[1]);
                let tau = sigma.eval_vector(k, l)?;
                let g = u.grad_at(k, l)?;
                let uv = u.eval_scalar(k, l)?;
                let r1 = add(co.a_sqrt.mul_vec(g), co.a_isqrt.mul_vec(tau));
                let r2 = sigma.cell_div(k)? + dot(co.b, g) + co.c * uv - fv;
                dot(r1, r1) + r2 * r2
            }
            LsFunctional::DivCurl3
            | LsFunctional::DivCurl3GradPsi
            | LsFunctional::DivCurl3GradBoth => {
                let (sigma, u, phi) = (fields[0], fields[1], fields[2]);
                let tau = sigma.eval_vector(k, l)?;
                let psi = phi.eval_vector(k, l)?;
                let g = u.grad_at(k, l)?;
                let uv = u.eval_scalar(k, l)?;
                let curl = phi.cell_curl(k)?;
                let [wr, ws, wt] = self.p.convection_weights;
                let conv = dot(
                    co.b,
                    sub(
                        scale(wr, g),
                        add(scale(ws, psi), scale(wt, co.a_inv.mul_vec(tau))),
                    ),
                ) + co.c * uv;
                let r_div = sigma.cell_div(k)? + conv - fv;
                // flux-potential: A^{-1/2}(tau + A grad v)
                let fp = add(co.a_isqrt.mul_vec(tau), co.a_sqrt.mul_vec(g));
                // flux-intensity: A^{-1/2} tau - A^{1/2} psi
                let fi = sub(co.a_isqrt.mul_vec(tau), co.a_sqrt.mul_vec(psi));
                // potential-intensity: A^{1/2}(grad v + psi)
                let pi = co.a_sqrt.mul_vec(add(g, psi));
                let first_two = match self.functional {
                    LsFunctional::DivCurl3 => dot(fp, fp) + dot(fi, fi),
                    LsFunctional::DivCurl3GradPsi => dot(pi, pi) + dot(fi, fi),
                    _ => dot(fp, fp) + dot(pi, pi),
                };
                first_two + curl * curl + r_div * r_div
            }
            LsFunctional::DivCurl2 => {
                let (sigma, u) = (fields[0], fields[1]);
                let a_const = check_divcurl2_coefficient(self.p)?;
                let a_inv = a_const.inverse();
                let tau = sigma.eval_vector(k, l)?;
                let g = u.grad_at(k, l)?;
                let uv = u.eval_scalar(k, l)?;
                let r1 = add(co.a_isqrt.mul_vec(tau), co.a_sqrt.mul_vec(g));
                let gm = vec_p1_gradient(sigma, k)?;
                let curl = a_inv.m[1][0] * gm[0][0] + a_inv.m[1][1] * gm[1][0]
                    - a_inv.m[0][0] * gm[0][1]
                    - a_inv.m[0][1] * gm[1][1];
                let r2 = sigma.cell_div(k)? + dot(co.b, g) + co.c * uv - fv;
                dot(r1, r1) + curl * curl + r2 * r2
            }
        })
    }
}

/// Jacobian matrix `d tau_i / d x_j` of a vector P1 field on one cell.
fn vec_p1_gradient(f: &Field, k: usize) -> Result<[[f64; 2]; 2]> {
    if f.space.kind != SpaceKind::VecP1Flux {
        return Err(Error::Mismatch("expected a vector P1 field".into()));
    }
    let gl = f.space.mesh.grad_lambda(k);
    let mut g = [[0.0; 2]; 2];
    let lds = f.space.local_dofs(k);
    for i in 0..3 {
        for c in 0..2 {
            if let Some(d) = lds[2 * i + c].dof {
                let coeff = f.coeffs[d];
                g[c][0] += coeff * gl[i][0];
                g[c][1] += coeff * gl[i][1];
            }
        }
    }
    Ok(g)
}

fn functional_arity(functional: LsFunctional) -> usize {
    match functional {
        LsFunctional::Div2 | LsFunctional::DivCurl2 => 2,
        _ => 3,
    }
}

/// Value of the selected least-squares functional for the given fields.
/// With `f_included = false` this is the homogeneous functional, i.e. the
/// quadratic form of the method evaluated at the fields.
pub fn functional_value(
    functional: LsFunctional,
    fields: &[&Field],
    p: &ProblemSpec,
    f_included: bool,
) -> Result<f64> {
    if fields.len() != functional_arity(functional) {
        return Err(Error::Mismatch(format!(
            "functional expects {} fields, got {}",
            functional_arity(functional),
            fields.len()
        )));
    }
    let mesh = &fields[0].space.mesh;
    let rule = triangle_rule(MATRIX_QUAD_DEGREE)?;
    let fr = FieldResiduals {
        functional,
        p,
        f_included,
    };
    let mut total = 0.0;
    for k in 0..mesh.num_triangles() {
        let area = mesh.area(k);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.bary_to_xy(k, *l);
            total += w * 2.0 * area * fr.density(k, *l, x, fields)?;
        }
    }
    Ok(total)
}

/// Per-element split of the functional value (squared contributions).
pub fn functional_value_local(
    functional: LsFunctional,
    fields: &[&Field],
    p: &ProblemSpec,
    f_included: bool,
) -> Result<Vec<f64>> {
    if fields.len() != functional_arity(functional) {
        return Err(Error::Mismatch(format!(
            "functional expects {} fields, got {}",
            functional_arity(functional),
            fields.len()
        )));
    }
    let mesh = &fields[0].space.mesh;
    let rule = triangle_rule(MATRIX_QUAD_DEGREE)?;
    let fr = FieldResiduals {
        functional,
        p,
        f_included,
    };
    let mut local = vec![0.0; mesh.num_triangles()];
    for (k, lk) in local.iter_mut().enumerate() {
        let area = mesh.area(k);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let x = mesh.bary_to_xy(k, *l);
            *lk += w * 2.0 * area * fr.density(k, *l, x, fields)?;
        }
    }
    Ok(local)
}

/// Natural energy norm of a tuple of discrete fields:
/// `div2`: `(||grad_h v||^2 + ||tau||^2 + ||div tau||^2)^{1/2}`;
/// `divcurl3` adds the intensity H(curl) part;
/// `divcurl2` uses the flux Sigma-norm (L2 + div + curl of A^{-1} tau).
pub fn triple_norm(method: Method, fields: &[&Field], p: &ProblemSpec) -> Result<f64> {
    let mesh = &fields[0].space.mesh;
    let rule = triangle_rule(MATRIX_QUAD_DEGREE)?;
    let mut total = 0.0;
    for k in 0..mesh.num_triangles() {
        let area = mesh.area(k);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let wj = w * 2.0 * area;
            let d = match method {
                Method::Div2 => {
                    let tau = fields[0].eval_vector(k, *l)?;
                    let g = fields[1].grad_at(k, *l)?;
                    let dv = fields[0].cell_div(k)?;
                    dot(g, g) + dot(tau, tau) + dv * dv
                }
                Method::DivCurl3 => {
                    let tau = fields[0].eval_vector(k, *l)?;
                    let g = fields[1].grad_at(k, *l)?;
                    let psi = fields[2].eval_vector(k, *l)?;
                    let dv = fields[0].cell_div(k)?;
                    let cu = fields[2].cell_curl(k)?;
                    dot(g, g) + dot(tau, tau) + dv * dv + dot(psi, psi) + cu * cu
                }
                Method::DivCurl2 => {
                    let a_const = check_divcurl2_coefficient(p)?;
                    let a_inv = a_const.inverse();
                    let tau = fields[0].eval_vector(k, *l)?;
                    let g = fields[1].grad_at(k, *l)?;
                    let dv = fields[0].cell_div(k)?;
                    let gm = vec_p1_gradient(fields[0], k)?;
                    let curl = a_inv.m[1][0] * gm[0][0] + a_inv.m[1][1] * gm[1][0]
                        - a_inv.m[0][0] * gm[0][1]
                        - a_inv.m[0][1] * gm[1][1];
                    dot(g, g) + dot(tau, tau) + dv * dv + curl * curl
                }
                Method::GalerkinCr => {
                    let g = fields[0].grad_at(k, *l)?;
                    dot(g, g)
                }
            };
            total += wj * d;
        }
    }
    Ok(total.sqrt())
}

/// Componentwise errors against the exact solution, degree-6 quadrature.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    /// Energy-norm error of the method (triple norm for div2, Y-norm for
    /// divcurl3, Sigma-norm + broken gradient for divcurl2, broken H1 for
    /// the Galerkin baseline).
    pub total: f64,
    /// L2 error of the potential.
    pub l2_u: f64,
    pub components: BTreeMap<String, f64>,
}

pub fn error_vs_exact(
    method: Method,
    fields: &[&Field],
    p: &ProblemSpec,
) -> Result<ErrorReport> {
    let exact = p
        .exact
        .as_ref()
        .ok_or_else(|| Error::MissingExact(p.name.clone()))?;
    let mesh = &fields[0].space.mesh;
    let rule = triangle_rule(ERROR_QUAD_DEGREE)?;

    let mut grad2 = 0.0;
    let mut ul2 = 0.0;
    let mut sig2 = 0.0;
    let mut div2 = 0.0;
    let mut phi2 = 0.0;
    let mut curl2 = 0.0;
    let (u_field, sigma_field, phi_field): (&Field, Option<&Field>, Option<&Field>) =
        match method {
            Method::GalerkinCr => (fields[0], None, None),
            Method::Div2 | Method::DivCurl2 => (fields[1], Some(fields[0]), None),
            Method::DivCurl3 => (fields[1], Some(fields[0]), Some(fields[2])),
        };

    for k in 0..mesh.num_triangles() {
        let area = mesh.area(k);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let wj = w * 2.0 * area;
            let x = mesh.bary_to_xy(k, *l);
            let gu = (exact.grad_u)(x[0], x[1]);
            let gh = u_field.grad_at(k, *l)?;
            let dg = sub(gu, gh);
            grad2 += wj * dot(dg, dg);
            let du = (exact.u)(x[0], x[1]) - u_field.eval_scalar(k, *l)?;
            ul2 += wj * du * du;
            if let Some(sf) = sigma_field {
                let s = (exact.sigma)(x[0], x[1]);
                let sh = sf.eval_vector(k, *l)?;
                let ds = sub(s, sh);
                sig2 += wj * dot(ds, ds);
                let dd = (exact.div_sigma)(x[0], x[1]) - sf.cell_div(k)?;
                div2 += wj * dd * dd;
            }
            if let Some(pf) = phi_field {
                // Exact intensity is -grad u with zero curl.
                let ph = pf.eval_vector(k, *l)?;
                let dp = add(gu, ph);
                phi2 += wj * dot(dp, dp);
                let c = pf.cell_curl(k)?;
                curl2 += wj * c * c;
            }
            if method == Method::DivCurl2 {
                let sf = sigma_field.unwrap();
                let a_const = check_divcurl2_coefficient(p)?;
                let a_inv = a_const.inverse();
                let gm = vec_p1_gradient(sf, k)?;
                // Exact curl(A^{-1} sigma) = -curl(grad u) = 0.
                let c = a_inv.m[1][0] * gm[0][0] + a_inv.m[1][1] * gm[1][0]
                    - a_inv.m[0][0] * gm[0][1]
                    - a_inv.m[0][1] * gm[1][1];
                curl2 += wj * c * c;
            }
        }
    }

    let total = match method {
        Method::GalerkinCr => grad2.sqrt(),
        Method::Div2 => (grad2 + sig2 + div2).sqrt(),
        Method::DivCurl3 => (grad2 + sig2 + div2 + phi2 + curl2).sqrt(),
        Method::DivCurl2 => (grad2 + sig2 + div2 + curl2).sqrt(),
    };
    let mut components = BTreeMap::new();
    components.insert("grad_u".into(), grad2.sqrt());
    components.insert("u_l2".into(), ul2.sqrt());
    if sigma_field.is_some() {
        components.insert("sigma_l2".into(), sig2.sqrt());
        components.insert("div_sigma".into(), div2.sqrt());
    }
    if phi_field.is_some() {
        components.insert("phi_l2".into(), phi2.sqrt());
    }
    if phi_field.is_some() || method == Method::DivCurl2 {
        components.insert("curl".into(), curl2.sqrt());
    }
    Ok(ErrorReport {
        total,
        l2_u: ul2.sqrt(),
        components,
    })
}

/// Assembled system together with the spaces of its blocks, ready to solve.
pub struct Discretization {
    pub method: Method,
    pub system: LsSystem,
    pub spaces: Vec<Arc<FeSpace>>,
}

/// Build the spaces for `method` on `mesh` and assemble its system.
pub fn discretize(
    mesh: &Arc<Triangulation>,
    method: Method,
    p: &ProblemSpec,
) -> Result<Discretization> {
    let (system, spaces) = match method {
        Method::Div2 => {
            let ss = Arc::new(build_space(mesh, SpaceKind::Rt0N)?);
            let su = Arc::new(build_space(mesh, SpaceKind::CrD)?);
            (assemble_div2(&ss, &su, p)?, vec![ss, su])
        }
        Method::DivCurl3 => {
            let ss = Arc::new(build_space(mesh, SpaceKind::Rt0N)?);
            let sp = Arc::new(build_space(mesh, SpaceKind::N0D)?);
            let su = Arc::new(build_space(mesh, SpaceKind::CrD)?);
            (assemble_divcurl3(&ss, &sp, &su, p)?, vec![ss, su, sp])
        }
        Method::DivCurl2 => {
            let ss = Arc::new(build_space(mesh, SpaceKind::VecP1Flux)?);
            let su = Arc::new(build_space(mesh, SpaceKind::CrD)?);
            (assemble_divcurl2(&ss, &su, p)?, vec![ss, su])
        }
        Method::GalerkinCr => {
            let su = Arc::new(build_space(mesh, SpaceKind::CrD)?);
            (assemble_galerkin_cr(&su, p)?, vec![su])
        }
    };
    Ok(Discretization {
        method,
        system,
        spaces,
    })
}

/// Solved discrete problem: fields in block order (sigma, u[, phi]) for the
/// least-squares methods, just (u) for the Galerkin baseline.
pub struct Solution {
    pub method: Method,
    pub fields: Vec<Field>,
    pub report: SolveReport,
    pub dofs: usize,
}

/// Split a solution vector of `sys` into per-block fields.
pub fn split_fields(
    disc: &Discretization,
    solution: &[f64],
) -> Result<Vec<Field>> {
    disc.system
        .blocks
        .iter()
        .zip(&disc.spaces)
        .map(|((_, range), space)| {
            Field::from_coeffs(space, solution[range.clone()].to_vec())
        })
        .collect()
}

/// Discretize and solve with Jacobi-CG (dense fallback for the nonsymmetric
/// Galerkin baseline).
pub fn solve_on_mesh(
    mesh: &Arc<Triangulation>,
    method: Method,
    p: &ProblemSpec,
    tol: f64,
    maxit: usize,
) -> Result<Solution> {
    let disc = discretize(mesh, method, p)?;
    let report = if method == Method::GalerkinCr {
        crate::linsolve::direct_solve_small(&disc.system)?
    } else {
        cg_solve(&disc.system, tol, maxit)?
    };
    let fields = split_fields(&disc, &report.solution)?;
    Ok(Solution {
        method,
        fields,
        report,
        dofs: disc.system.dof_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_structured_square, Side};
    use crate::problem::builtin_problem;
    use std::collections::BTreeMap as Map;

    fn poisson() -> ProblemSpec {
        builtin_problem("poisson-sine", &Map::new()).unwrap()
    }

    #[test]
    fn div2_matrix_symmetric_positive_diagonal() {
        let mesh = Arc::new(make_structured_square(3, &Side::ALL).unwrap());
        let p = poisson();
        let disc = discretize(&mesh, Method::Div2, &p).unwrap();
        assert!(disc.system.matrix.asymmetry() <= 1e-12);
        for d in disc.system.matrix.diagonal() {
            assert!(d > 0.0);
        }
    }

    #[test]
    fn galerkin_symmetry_depends_on_convection() {
        let mesh = Arc::new(make_structured_square(3, &Side::ALL).unwrap());
        let p = poisson();
        let su = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
        let sys = assemble_galerkin_cr(&su, &p).unwrap();
        assert!(sys.matrix.asymmetry() <= 1e-12);

        let pc = builtin_problem(
            "convection",
            &Map::from([("beta1".to_string(), 1.0), ("beta2".to_string(), 0.0)]),
        )
        .unwrap();
        let sys = assemble_galerkin_cr(&su, &pc).unwrap();
        assert!(sys.matrix.asymmetry() > 1e-8);
    }

    #[test]
    fn single_rt_dof_energy_matches_quadrature_oracle() {
        // On the n=1 all-Dirichlet square with A=I, b=0, c=0 the diagonal
        // entry of a unit RT dof tau is ||tau||^2 + ||div tau||^2.
        let mesh = Arc::new(make_structured_square(1, &Side::ALL).unwrap());
        let p = poisson();
        let ss = Arc::new(build_space(&mesh, SpaceKind::Rt0N).unwrap());
        let su = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
        let sys = assemble_div2(&ss, &su, &p).unwrap();
        // Oracle: high-order quadrature of the basis function itself.
        let rule = triangle_rule(6).unwrap();
        for d in 0..ss.dof_count {
            let mut f = Field::zeros(&ss);
            f.coeffs[d] = 1.0;
            let mut want = 0.0;
            for k in 0..mesh.num_triangles() {
                let area = mesh.area(k);
                let dv = f.cell_div(k).unwrap();
                for (l, w) in rule.points.iter().zip(&rule.weights) {
                    let v = f.eval_vector(k, *l).unwrap();
                    want += w * 2.0 * area * (dot(v, v) + dv * dv);
                }
            }
            let got = sys.matrix.get(d, d);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                "dof {d}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let mut p = poisson();
        p.f = std::sync::Arc::new(|_, _| 0.0);
        for method in [Method::Div2, Method::DivCurl3, Method::DivCurl2] {
            let sol = solve_on_mesh(&mesh, method, &p, 1e-12, 1000).unwrap();
            for f in &sol.fields {
                for c in &f.coeffs {
                    assert!(c.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn homogeneous_functional_equals_quadratic_form() {
        // J(tau, v; 0) = x' B x for the coefficient vector x of (tau, v).
        let mesh = Arc::new(make_structured_square(2, &[Side::Left, Side::Bottom]).unwrap());
        let p = builtin_problem(
            "convection",
            &Map::from([("beta1".to_string(), 1.5), ("beta2".to_string(), -0.5)]),
        )
        .unwrap();
        let disc = discretize(&mesh, Method::Div2, &p).unwrap();
        let n = disc.system.dof_count();
        let mut state = 7u64;
        let mut rng = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let x: Vec<f64> = (0..n).map(|_| rng()).collect();
        let fields = split_fields(&disc, &x).unwrap();
        let refs: Vec<&Field> = fields.iter().collect();
        let j = functional_value(LsFunctional::Div2, &refs, &p, false).unwrap();
        let mut bx = vec![0.0; n];
        disc.system.matrix.mul_vec(&x, &mut bx);
        let xbx: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
        assert!(
            (j - xbx).abs() <= 1e-12 * xbx.abs().max(1.0),
            "J = {j}, x'Bx = {xbx}"
        );
    }

    #[test]
    fn divcurl3_quadratic_form_matches_functional() {
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let p = builtin_problem("helmholtz-indefinite", &Map::new()).unwrap();
        let disc = discretize(&mesh, Method::DivCurl3, &p).unwrap();
        let n = disc.system.dof_count();
        let mut state = 99u64;
        let mut rng = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let x: Vec<f64> = (0..n).map(|_| rng()).collect();
        let fields = split_fields(&disc, &x).unwrap();
        let refs: Vec<&Field> = fields.iter().collect();
        let j = functional_value(LsFunctional::DivCurl3, &refs, &p, false).unwrap();
        let mut bx = vec![0.0; n];
        disc.system.matrix.mul_vec(&x, &mut bx);
        let xbx: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
        assert!((j - xbx).abs() <= 1e-11 * xbx.abs().max(1.0));
    }

    #[test]
    fn representable_solution_has_zero_functional() {
        // u = x with Dirichlet only on the left side is in CR_D; the flux
        // (-1, 0) lives in the unconstrained RT space of an all-Dirichlet
        // tagging of the same grid.
        let mesh_u = Arc::new(make_structured_square(3, &[Side::Left]).unwrap());
        let mesh_s = Arc::new(make_structured_square(3, &Side::ALL).unwrap());
        let su = Arc::new(build_space(&mesh_u, SpaceKind::CrD).unwrap());
        let ss = Arc::new(build_space(&mesh_s, SpaceKind::Rt0N).unwrap());
        let u = crate::fespace::interpolate_scalar(&su, |x, _| x).unwrap();
        let sigma = crate::fespace::interpolate_vector(&ss, |_, _| [-1.0, 0.0]).unwrap();
        let mut p = poisson();
        p.f = std::sync::Arc::new(|_, _| 0.0);
        let j = functional_value(LsFunctional::Div2, &[&sigma, &u], &p, true).unwrap();
        let scale = triple_norm(Method::Div2, &[&sigma, &u], &p).unwrap().powi(2);
        assert!(j <= 1e-20 * scale, "J = {j}, scale = {scale}");
    }

    #[test]
    fn triple_norm_of_unit_flux() {
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let ss = Arc::new(build_space(&mesh, SpaceKind::Rt0N).unwrap());
        let su = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
        let tau = crate::fespace::interpolate_vector(&ss, |_, _| [1.0, 0.0]).unwrap();
        let v = Field::zeros(&su);
        let p = poisson();
        let t = triple_norm(Method::Div2, &[&tau, &v], &p).unwrap();
        assert!((t * t - 1.0).abs() < 1e-12);
        let zero = triple_norm(Method::Div2, &[&Field::zeros(&ss), &v], &p).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn divcurl2_guard() {
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let p = builtin_problem("jump-diffusion", &Map::new()).unwrap();
        match discretize(&mesh, Method::DivCurl2, &p) {
            Err(Error::Restriction(_)) => {}
            other => panic!("expected restriction error, got {:?}", other.is_ok()),
        }
        // poisson-sine is accepted.
        assert!(discretize(&mesh, Method::DivCurl2, &poisson()).is_ok());
    }

    #[test]
    fn interpolant_error_halves_under_refinement() {
        let p = poisson();
        let e = p.exact.clone().unwrap();
        let mut totals = Vec::new();
        for n in [4usize, 8] {
            let mesh = Arc::new(make_structured_square(n, &Side::ALL).unwrap());
            let ss = Arc::new(build_space(&mesh, SpaceKind::Rt0N).unwrap());
            let su = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
            let sig = crate::fespace::interpolate_vector(&ss, |x, y| (e.sigma)(x, y)).unwrap();
            let u = crate::fespace::interpolate_scalar(&su, |x, y| (e.u)(x, y)).unwrap();
            let rep = error_vs_exact(Method::Div2, &[&sig, &u], &p).unwrap();
            assert!(rep.total > 0.0 && rep.l2_u < 0.05);
            totals.push(rep.total);
        }
        // First-order decay of the triple-norm interpolation error.
        assert!(
            totals[1] < 0.62 * totals[0],
            "totals {totals:?}"
        );
    }
}
