//! Finite element spaces on a triangulation: Crouzeix-Raviart (CR),
//! lowest-order Raviart-Thomas (RT0), lowest-order 2D Nedelec (N0), Lagrange
//! P0/P1/P2, and a constrained vector-valued P1 flux space.
//!
//! Homogeneous essential constraints are eliminated when the space is built:
//! constrained degrees of freedom simply do not appear in the global
//! numbering, so assembled systems stay symmetric positive definite without
//! penalty terms.

use crate::geometry::{add, dot, rot_ccw, scale, sub};
use crate::mesh::{BoundaryTag, Triangulation};
use crate::quadrature::edge_rule;
use crate::{Error, Result};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Crouzeix-Raviart, edge-midpoint dofs, zero mean on Dirichlet edges.
    CrD,
    /// Raviart-Thomas RT0 with normal dofs, zero normal trace on Neumann edges.
    Rt0N,
    /// Nedelec N0 (2D) with tangential dofs, zero tangential trace on Dirichlet edges.
    N0D,
    /// Piecewise constants.
    P0,
    /// Conforming P1, zero on the closed Dirichlet boundary.
    P1D,
    /// Conforming P1 without constraints.
    P1Free,
    /// Conforming P1, zero on the closed Neumann boundary.
    P1N,
    /// Conforming P2, zero on the closed Dirichlet boundary.
    P2D,
    /// Continuous piecewise-linear 2-vectors with `tau . n = 0` on Neumann
    /// edges and `tau . t = 0` on Dirichlet edges, imposed componentwise; all
    /// boundary edges must be axis-aligned.
    VecP1Flux,
}

impl SpaceKind {
    pub fn is_vector_valued(self) -> bool {
        matches!(self, SpaceKind::Rt0N | SpaceKind::N0D | SpaceKind::VecP1Flux)
    }

    /// Number of local dofs per triangle.
    pub fn dofs_per_cell(self) -> usize {
        match self {
            SpaceKind::P0 => 1,
            SpaceKind::CrD | SpaceKind::Rt0N | SpaceKind::N0D => 3,
            SpaceKind::P1D | SpaceKind::P1Free | SpaceKind::P1N => 3,
            SpaceKind::P2D | SpaceKind::VecP1Flux => 6,
        }
    }
}

/// One local dof slot: the global index (None if eliminated) and the
/// orientation sign relating the local basis to the global one.
#[derive(Debug, Clone, Copy)]
pub struct LocalDof {
    pub dof: Option<usize>,
    pub sign: f64,
}

/// Degrees of freedom of one space on one mesh.
#[derive(Debug, Clone)]
pub struct FeSpace {
    pub kind: SpaceKind,
    pub mesh: Arc<Triangulation>,
    pub dof_count: usize,
    /// Per-edge dof (CR/RT/N0 and the midpoint dofs of P2).
    pub edge_dof: Vec<Option<usize>>,
    /// Per-vertex dof (P1 family and the vertex dofs of P2).
    pub vertex_dof: Vec<Option<usize>>,
    /// Per-vertex component dofs, VecP1Flux only.
    pub vertex_comp_dof: Vec<[Option<usize>; 2]>,
    /// Flattened per-cell dof table, `dofs_per_cell` entries per triangle.
    pub cell_dofs: Vec<LocalDof>,
}

impl FeSpace {
    pub fn local_dofs(&self, k: usize) -> &[LocalDof] {
        let s = self.kind.dofs_per_cell();
        &self.cell_dofs[k * s..(k + 1) * s]
    }
}

fn vertex_on_tag(mesh: &Triangulation, tag: BoundaryTag) -> Vec<bool> {
    let mut flag = vec![false; mesh.num_vertices()];
    for (e, &t) in mesh.boundary_tag.iter().enumerate() {
        if t == tag {
            flag[mesh.edges[e][0]] = true;
            flag[mesh.edges[e][1]] = true;
        }
    }
    flag
}

/// Build the dof layout of `kind` on `mesh`.
pub fn build_space(mesh: &Arc<Triangulation>, kind: SpaceKind) -> Result<FeSpace> {
    let nt = mesh.num_triangles();
    let ne = mesh.num_edges();
    let nv = mesh.num_vertices();
    let mut space = FeSpace {
        kind,
        mesh: Arc::clone(mesh),
        dof_count: 0,
        edge_dof: Vec::new(),
        vertex_dof: Vec::new(),
        vertex_comp_dof: Vec::new(),
        cell_dofs: Vec::new(),
    };

    let mut next = 0usize;
    match kind {
        SpaceKind::CrD | SpaceKind::Rt0N | SpaceKind::N0D => {
            let skip = match kind {
                SpaceKind::CrD | SpaceKind::N0D => BoundaryTag::Dirichlet,
                _ => BoundaryTag::Neumann,
            };
            space.edge_dof = (0..ne)
                .map(|e| {
                    if mesh.boundary_tag[e] == skip {
                        None
                    } else {
                        next += 1;
                        Some(next - 1)
                    }
                })
                .collect();
            for k in 0..nt {
                for i in 0..3 {
                    let e = mesh.tri_edges[k][i];
                    let sign = if kind == SpaceKind::CrD {
                        1.0
                    } else {
                        mesh.tri_edge_signs[k][i] as f64
                    };
                    space.cell_dofs.push(LocalDof {
                        dof: space.edge_dof[e],
                        sign,
                    });
                }
            }
        }
        SpaceKind::P0 => {
            for k in 0..nt {
                space.cell_dofs.push(LocalDof {
                    dof: Some(k),
                    sign: 1.0,
                });
            }
            next = nt;
        }
        SpaceKind::P1D | SpaceKind::P1Free | SpaceKind::P1N => {
            let constrained = match kind {
                SpaceKind::P1D => vertex_on_tag(mesh, BoundaryTag::Dirichlet),
                SpaceKind::P1N => vertex_on_tag(mesh, BoundaryTag::Neumann),
                _ => vec![false; nv],
            };
            space.vertex_dof = constrained
                .iter()
                .map(|&c| {
                    if c {
                        None
                    } else {
                        next += 1;
                        Some(next - 1)
                    }
                })
                .collect();
            for k in 0..nt {
                for i in 0..3 {
                    space.cell_dofs.push(LocalDof {
                        dof: space.vertex_dof[mesh.triangles[k][i]],
                        sign: 1.0,
                    });
                }
            }
        }
        SpaceKind::P2D => {
            let on_dirichlet = vertex_on_tag(mesh, BoundaryTag::Dirichlet);
            space.vertex_dof = on_dirichlet
                .iter()
                .map(|&c| {
                    if c {
                        None
                    } else {
                        next += 1;
                        Some(next - 1)
                    }
                })
                .collect();
            space.edge_dof = (0..ne)
                .map(|e| {
                    if mesh.boundary_tag[e] == BoundaryTag::Dirichlet {
                        None
                    } else {
                        next += 1;
                        Some(next - 1)
                    }
                })
                .collect();
            for k in 0..nt {
                for i in 0..3 {
                    space.cell_dofs.push(LocalDof {
                        dof: space.vertex_dof[mesh.triangles[k][i]],
                        sign: 1.0,
                    });
                }
                for i in 0..3 {
                    space.cell_dofs.push(LocalDof {
                        dof: space.edge_dof[mesh.tri_edges[k][i]],
                        sign: 1.0,
                    });
                }
            }
        }
        SpaceKind::VecP1Flux => {
            // constrain[v] = [x fixed, y fixed]
            let mut fixed = vec![[false, false]; nv];
            for (e, &t) in mesh.boundary_tag.iter().enumerate() {
                if t == BoundaryTag::Interior {
                    continue;
                }
                let tang = mesh.edge_tangent(e);
                let axis = if tang[1].abs() < 1e-12 {
                    0 // horizontal edge: tangent along x, normal along y
                } else if tang[0].abs() < 1e-12 {
                    1 // vertical edge
                } else {
                    return Err(Error::Restriction(format!(
                        "the conforming flux space imposes its boundary conditions \
                         componentwise and requires axis-aligned boundary edges; \
                         edge {e} has tangent ({:.3}, {:.3})",
                        tang[0], tang[1]
                    )));
                };
                // Dirichlet: tangential component zero; Neumann: normal zero.
                let comp = match t {
                    BoundaryTag::Dirichlet => axis,
                    BoundaryTag::Neumann => 1 - axis,
                    BoundaryTag::Interior => unreachable!(),
                };
                fixed[mesh.edges[e][0]][comp] = true;
                fixed[mesh.edges[e][1]][comp] = true;
            }
            space.vertex_comp_dof = fixed
                .iter()
                .map(|f| {
                    let mut d = [None, None];
                    for c in 0..2 {
                        if !f[c] {
                            next += 1;
                            d[c] = Some(next - 1);
                        }
                    }
                    d
                })
                .collect();
            for k in 0..nt {
                for i in 0..3 {
                    for c in 0..2 {
                        space.cell_dofs.push(LocalDof {
                            dof: space.vertex_comp_dof[mesh.triangles[k][i]][c],
                            sign: 1.0,
                        });
                    }
                }
            }
        }
    }
    space.dof_count = next;
    Ok(space)
}

/// A discrete function: coefficients over the dofs of a space.
#[derive(Debug, Clone)]
pub struct Field {
    pub space: Arc<FeSpace>,
    pub coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros(space: &Arc<FeSpace>) -> Field {
        Field {
            space: Arc::clone(space),
            coeffs: vec![0.0; space.dof_count],
        }
    }

    pub fn from_coeffs(space: &Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Field> {
        if coeffs.len() != space.dof_count {
            return Err(Error::Mismatch(format!(
                "coefficient vector length {} does not match dof count {}",
                coeffs.len(),
                space.dof_count
            )));
        }
        Ok(Field {
            space: Arc::clone(space),
            coeffs,
        })
    }

    fn check_cell(&self, k: usize) -> Result<()> {
        if k >= self.space.mesh.num_triangles() {
            return Err(Error::InvalidArgument(format!(
                "triangle index {k} out of range"
            )));
        }
        Ok(())
    }

    /// Local coefficient (sign applied, constrained dofs read as zero).
    fn local_coeffs6(&self, k: usize) -> [f64; 6] {
        let mut c = [0.0; 6];
        for (i, ld) in self.space.local_dofs(k).iter().enumerate() {
            if let Some(d) = ld.dof {
                c[i] = ld.sign * self.coeffs[d];
            }
        }
        c
    }

    /// Evaluate a scalar-valued field at a barycentric point of triangle `k`.
    pub fn eval_scalar(&self, k: usize, l: [f64; 3]) -> Result<f64> {
        self.check_cell(k)?;
        let c = self.local_coeffs6(k);
        Ok(match self.space.kind {
            SpaceKind::CrD => (0..3).map(|i| c[i] * (1.0 - 2.0 * l[i])).sum(),
            SpaceKind::P0 => c[0],
            SpaceKind::P1D | SpaceKind::P1Free | SpaceKind::P1N => {
                (0..3).map(|i| c[i] * l[i]).sum()
            }
            SpaceKind::P2D => {
                let mut v = 0.0;
                for i in 0..3 {
                    v += c[i] * l[i] * (2.0 * l[i] - 1.0);
                    v += c[3 + i] * 4.0 * l[(i + 1) % 3] * l[(i + 2) % 3];
                }
                v
            }
            _ => {
                return Err(Error::Mismatch(
                    "eval_scalar on a vector-valued space".into(),
                ))
            }
        })
    }

    /// Evaluate a vector-valued field at a barycentric point of triangle `k`.
    pub fn eval_vector(&self, k: usize, l: [f64; 3]) -> Result<[f64; 2]> {
        self.check_cell(k)?;
        let mesh = &self.space.mesh;
        let c = self.local_coeffs6(k);
        Ok(match self.space.kind {
            SpaceKind::Rt0N => {
                let x = mesh.bary_to_xy(k, l);
                let inv2a = 1.0 / (2.0 * mesh.area(k));
                let t = mesh.triangles[k];
                let mut v = [0.0, 0.0];
                for i in 0..3 {
                    let p = mesh.vertices[t[i]];
                    v = add(v, scale(c[i] * inv2a, sub(x, p)));
                }
                v
            }
            SpaceKind::N0D => {
                let x = mesh.bary_to_xy(k, l);
                let inv2a = 1.0 / (2.0 * mesh.area(k));
                let t = mesh.triangles[k];
                let mut v = [0.0, 0.0];
                for i in 0..3 {
                    let p = mesh.vertices[t[i]];
                    v = add(v, scale(c[i] * inv2a, rot_ccw(sub(x, p))));
                }
                v
            }
            SpaceKind::VecP1Flux => {
                let mut v = [0.0, 0.0];
                for i in 0..3 {
                    v[0] += c[2 * i] * l[i];
                    v[1] += c[2 * i + 1] * l[i];
                }
                v
            }
            _ => {
                return Err(Error::Mismatch(
                    "eval_vector on a scalar-valued space".into(),
                ))
            }
        })
    }

    /// Gradient of a scalar field at a barycentric point (constant per cell
    /// except for P2).
    pub fn grad_at(&self, k: usize, l: [f64; 3]) -> Result<[f64; 2]> {
        self.check_cell(k)?;
        let gl = self.space.mesh.grad_lambda(k);
        let c = self.local_coeffs6(k);
        Ok(match self.space.kind {
            SpaceKind::CrD => {
                let mut g = [0.0, 0.0];
                for i in 0..3 {
                    g = add(g, scale(-2.0 * c[i], gl[i]));
                }
                g
            }
            SpaceKind::P1D | SpaceKind::P1Free | SpaceKind::P1N => {
                let mut g = [0.0, 0.0];
                for i in 0..3 {
                    g = add(g, scale(c[i], gl[i]));
                }
                g
            }
            SpaceKind::P2D => {
                let mut g = [0.0, 0.0];
                for i in 0..3 {
                    g = add(g, scale(c[i] * (4.0 * l[i] - 1.0), gl[i]));
                    let a = (i + 1) % 3;
                    let b = (i + 2) % 3;
                    g = add(g, scale(4.0 * c[3 + i] * l[a], gl[b]));
                    g = add(g, scale(4.0 * c[3 + i] * l[b], gl[a]));
                }
                g
            }
            SpaceKind::P0 => [0.0, 0.0],
            _ => {
                return Err(Error::Mismatch(
                    "grad_at on a vector-valued space".into(),
                ))
            }
        })
    }

    /// Divergence on cell `k` (constant for RT0 and vector P1).
    pub fn cell_div(&self, k: usize) -> Result<f64> {
        self.check_cell(k)?;
        let c = self.local_coeffs6(k);
        Ok(match self.space.kind {
            SpaceKind::Rt0N => {
                let inv_a = 1.0 / self.space.mesh.area(k);
                (0..3).map(|i| c[i] * inv_a).sum()
            }
            SpaceKind::VecP1Flux => {
                let gl = self.space.mesh.grad_lambda(k);
                (0..3).map(|i| c[2 * i] * gl[i][0] + c[2 * i + 1] * gl[i][1]).sum()
            }
            _ => {
                return Err(Error::Mismatch(
                    "cell_div requires an H(div)-type space".into(),
                ))
            }
        })
    }

    /// Scalar curl on cell `k` (constant for N0 and vector P1).
    pub fn cell_curl(&self, k: usize) -> Result<f64> {
        self.check_cell(k)?;
        let c = self.local_coeffs6(k);
        Ok(match self.space.kind {
            SpaceKind::N0D => {
                let inv_a = 1.0 / self.space.mesh.area(k);
                (0..3).map(|i| c[i] * inv_a).sum()
            }
            SpaceKind::VecP1Flux => {
                let gl = self.space.mesh.grad_lambda(k);
                // curl tau = d tau_y / dx - d tau_x / dy
                (0..3)
                    .map(|i| c[2 * i + 1] * gl[i][0] - c[2 * i] * gl[i][1])
                    .sum()
            }
            _ => {
                return Err(Error::Mismatch(
                    "cell_curl requires an H(curl)-type space".into(),
                ))
            }
        })
    }
}

/// Interpolate a scalar function into CR/P0/P1/P2 dofs. Edge-mean dofs use
/// 3-point Gauss; constrained dofs are dropped (the interpolant has zero
/// trace there by construction of the space).
pub fn interpolate_scalar<G>(space: &Arc<FeSpace>, g: G) -> Result<Field>
where
    G: Fn(f64, f64) -> f64,
{
    let mesh = &space.mesh;
    let mut field = Field::zeros(space);
    match space.kind {
        SpaceKind::CrD => {
            let rule = edge_rule(3)?;
            for e in 0..mesh.num_edges() {
                if let Some(d) = space.edge_dof[e] {
                    let [a, b] = mesh.edges[e];
                    let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                    let mut mean = 0.0;
                    for (pt, w) in rule.points.iter().zip(&rule.weights) {
                        let x = add(scale(1.0 - pt[0], pa), scale(pt[0], pb));
                        mean += w * g(x[0], x[1]);
                    }
                    field.coeffs[d] = mean;
                }
            }
        }
        SpaceKind::P0 => {
            for k in 0..mesh.num_triangles() {
                let x = mesh.bary_to_xy(k, [1.0 / 3.0; 3]);
                field.coeffs[k] = g(x[0], x[1]);
            }
        }
        SpaceKind::P1D | SpaceKind::P1Free | SpaceKind::P1N => {
            for v in 0..mesh.num_vertices() {
                if let Some(d) = space.vertex_dof[v] {
                    let p = mesh.vertices[v];
                    field.coeffs[d] = g(p[0], p[1]);
                }
            }
        }
        SpaceKind::P2D => {
            for v in 0..mesh.num_vertices() {
                if let Some(d) = space.vertex_dof[v] {
                    let p = mesh.vertices[v];
                    field.coeffs[d] = g(p[0], p[1]);
                }
            }
            for e in 0..mesh.num_edges() {
                if let Some(d) = space.edge_dof[e] {
                    let m = mesh.edge_midpoint(e);
                    field.coeffs[d] = g(m[0], m[1]);
                }
            }
        }
        _ => {
            return Err(Error::Mismatch(
                "interpolate_scalar on a vector-valued space".into(),
            ))
        }
    }
    Ok(field)
}

/// Interpolate a vector function: RT0 dofs are edge normal fluxes
/// `int_F g . n_F`, N0 dofs are tangential circulations `int_F g . t_F`
/// (3-point Gauss), vector P1 dofs are point values.
pub fn interpolate_vector<G>(space: &Arc<FeSpace>, g: G) -> Result<Field>
where
    G: Fn(f64, f64) -> [f64; 2],
{
    let mesh = &space.mesh;
    let mut field = Field::zeros(space);
    match space.kind {
        SpaceKind::Rt0N | SpaceKind::N0D => {
            let rule = edge_rule(3)?;
            for e in 0..mesh.num_edges() {
                if let Some(d) = space.edge_dof[e] {
                    let [a, b] = mesh.edges[e];
                    let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
                    let dir = if space.kind == SpaceKind::Rt0N {
                        mesh.edge_normal(e)
                    } else {
                        mesh.edge_tangent(e)
                    };
                    let mut integral = 0.0;
                    for (pt, w) in rule.points.iter().zip(&rule.weights) {
                        let x = add(scale(1.0 - pt[0], pa), scale(pt[0], pb));
                        integral += w * dot(g(x[0], x[1]), dir);
                    }
                    field.coeffs[d] = integral * mesh.h_edge[e];
                }
            }
        }
        SpaceKind::VecP1Flux => {
            for v in 0..mesh.num_vertices() {
                let p = mesh.vertices[v];
                let val = g(p[0], p[1]);
                for c in 0..2 {
                    if let Some(d) = space.vertex_comp_dof[v][c] {
                        field.coeffs[d] = val[c];
                    }
                }
            }
        }
        _ => {
            return Err(Error::Mismatch(
                "interpolate_vector on a scalar-valued space".into(),
            ))
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{make_structured_square, Side};

    fn square(n: usize, sides: &[Side]) -> Arc<Triangulation> {
        Arc::new(make_structured_square(n, sides).unwrap())
    }

    #[test]
    fn dof_counts() {
        let m = square(1, &Side::ALL);
        assert_eq!(build_space(&m, SpaceKind::CrD).unwrap().dof_count, 1);
        assert_eq!(build_space(&m, SpaceKind::Rt0N).unwrap().dof_count, 5);

        let m2 = square(2, &Side::ALL);
        // Interior edges of the n=2 mesh: 16 - 8 boundary = 8.
        assert_eq!(build_space(&m2, SpaceKind::CrD).unwrap().dof_count, 8);
        assert_eq!(build_space(&m2, SpaceKind::N0D).unwrap().dof_count, 8);
        assert_eq!(build_space(&m2, SpaceKind::Rt0N).unwrap().dof_count, 16);
        assert_eq!(build_space(&m2, SpaceKind::P0).unwrap().dof_count, 8);
        // 9 vertices, 8 on the boundary.
        assert_eq!(build_space(&m2, SpaceKind::P1D).unwrap().dof_count, 1);
        assert_eq!(build_space(&m2, SpaceKind::P1Free).unwrap().dof_count, 9);
        assert_eq!(build_space(&m2, SpaceKind::P2D).unwrap().dof_count, 1 + 8);

        let mixed = square(2, &[Side::Left]);
        // Dirichlet edges: 2 on the left; Neumann: 6.
        assert_eq!(build_space(&mixed, SpaceKind::CrD).unwrap().dof_count, 8 + 6);
        assert_eq!(build_space(&mixed, SpaceKind::Rt0N).unwrap().dof_count, 8 + 2);
        assert_eq!(build_space(&mixed, SpaceKind::N0D).unwrap().dof_count, 8 + 6);
        // Left boundary vertices constrained: 3 of 9.
        assert_eq!(build_space(&mixed, SpaceKind::P1D).unwrap().dof_count, 6);
        // Every boundary vertex except (0, 0.5) touches a Neumann edge.
        assert_eq!(build_space(&mixed, SpaceKind::P1N).unwrap().dof_count, 2);
    }

    #[test]
    fn cr_nodal_property() {
        let m = square(2, &Side::ALL);
        let space = Arc::new(build_space(&m, SpaceKind::CrD).unwrap());
        for k in 0..m.num_triangles() {
            for (i, ld) in space.local_dofs(k).iter().enumerate() {
                let Some(d) = ld.dof else { continue };
                let mut f = Field::zeros(&space);
                f.coeffs[d] = 1.0;
                // Midpoint of local edge i has barycentric 0 at vertex i.
                let mut l = [0.5; 3];
                l[i] = 0.0;
                assert!((f.eval_scalar(k, l).unwrap() - 1.0).abs() < 1e-14);
                for j in 0..3 {
                    if j != i && space.local_dofs(k)[j].dof != Some(d) {
                        let mut lj = [0.5; 3];
                        lj[j] = 0.0;
                        assert!(f.eval_scalar(k, lj).unwrap().abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn rt_reproduces_constants() {
        let m = square(2, &Side::ALL); // no Neumann edges: full RT0
        let space = Arc::new(build_space(&m, SpaceKind::Rt0N).unwrap());
        let f = interpolate_vector(&space, |_, _| [1.0, 0.0]).unwrap();
        for k in 0..m.num_triangles() {
            for l in [[0.2, 0.3, 0.5], [1.0 / 3.0; 3]] {
                let v = f.eval_vector(k, l).unwrap();
                assert!((v[0] - 1.0).abs() < 1e-13 && v[1].abs() < 1e-13);
            }
            assert!(f.cell_div(k).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn rt_divergence_of_linear_field() {
        // I_rt of g = (x, y): divergence of the interpolant is 2 per cell.
        let m = square(3, &Side::ALL);
        let space = Arc::new(build_space(&m, SpaceKind::Rt0N).unwrap());
        let f = interpolate_vector(&space, |x, y| [x, y]).unwrap();
        for k in 0..m.num_triangles() {
            assert!((f.cell_div(k).unwrap() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nedelec_contains_rotation_field() {
        // g = (-y, x) lies in N0; pick tags so no tangential constraint is
        // active where g has nonzero tangential trace.
        let m = square(2, &[Side::Bottom]);
        let space = Arc::new(build_space(&m, SpaceKind::N0D).unwrap());
        let f = interpolate_vector(&space, |x, y| [-y, x]).unwrap();
        for k in 0..m.num_triangles() {
            assert!((f.cell_curl(k).unwrap() - 2.0).abs() < 1e-12);
            let v = f.eval_vector(k, [0.25, 0.25, 0.5]).unwrap();
            let x = m.bary_to_xy(k, [0.25, 0.25, 0.5]);
            assert!((v[0] + x[1]).abs() < 1e-12 && (v[1] - x[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn cr_reproduces_linears() {
        let m = square(2, &Side::ALL);
        let space = Arc::new(build_space(&m, SpaceKind::CrD).unwrap());
        let f = interpolate_scalar(&space, |x, _| x).unwrap();
        // Interior dofs carry midpoint x-values; on each cell the interpolant
        // agrees with x except where a Dirichlet-edge dof was dropped.
        for e in 0..m.num_edges() {
            if let Some(d) = space.edge_dof[e] {
                let mp = m.edge_midpoint(e);
                assert!((f.coeffs[d] - mp[0]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn p2_reproduces_quadratics() {
        let m = square(2, &[Side::Left]);
        let space = Arc::new(build_space(&m, SpaceKind::P2D).unwrap());
        let g = |x: f64, y: f64| x * x + 0.5 * x * y;
        let f = interpolate_scalar(&space, g).unwrap();
        for k in 0..m.num_triangles() {
            let contains_constrained = space.local_dofs(k).iter().any(|d| d.dof.is_none());
            if contains_constrained {
                continue;
            }
            let l = [0.3, 0.45, 0.25];
            let x = m.bary_to_xy(k, l);
            assert!((f.eval_scalar(k, l).unwrap() - g(x[0], x[1])).abs() < 1e-13);
            let grad = f.grad_at(k, l).unwrap();
            assert!((grad[0] - (2.0 * x[0] + 0.5 * x[1])).abs() < 1e-12);
            assert!((grad[1] - 0.5 * x[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn vec_p1_flux_constraints() {
        let m = square(2, &[Side::Left, Side::Right]);
        let space = Arc::new(build_space(&m, SpaceKind::VecP1Flux).unwrap());
        // Left/right are Dirichlet (vertical, tangent y): y-component fixed.
        // Top/bottom are Neumann (horizontal, normal y): y-component fixed.
        // So every boundary vertex has its y-component constrained, interior
        // vertices are free in both components.
        let mut count = 0;
        for v in 0..m.num_vertices() {
            let p = m.vertices[v];
            let on_boundary = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
            let d = space.vertex_comp_dof[v];
            assert!(d[0].is_some());
            assert_eq!(d[1].is_none(), on_boundary);
            count += d.iter().filter(|x| x.is_some()).count();
        }
        assert_eq!(count, space.dof_count);
    }

    #[test]
    fn interpolation_round_trip_random_coeffs() {
        // coeffs -> function -> interpolate -> coeffs is the identity.
        let m = square(2, &[Side::Left, Side::Top]);
        let mut state = 42u64;
        let mut rng = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for kind in [
            SpaceKind::CrD,
            SpaceKind::Rt0N,
            SpaceKind::N0D,
            SpaceKind::P1D,
            SpaceKind::P2D,
        ] {
            let space = Arc::new(build_space(&m, kind).unwrap());
            let mut f = Field::zeros(&space);
            for c in &mut f.coeffs {
                *c = rng();
            }
            // Point-evaluate f via a cell lookup.
            let locate = |x: f64, y: f64| -> usize {
                for k in 0..m.num_triangles() {
                    let gl = m.grad_lambda(k);
                    let t = m.triangles[k];
                    let p0 = m.vertices[t[0]];
                    let l1 = gl[1][0] * (x - p0[0]) + gl[1][1] * (y - p0[1]);
                    let l2 = gl[2][0] * (x - p0[0]) + gl[2][1] * (y - p0[1]);
                    let l0 = 1.0 - l1 - l2;
                    if l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12 {
                        return k;
                    }
                }
                panic!("point outside mesh");
            };
            let bary = |k: usize, x: f64, y: f64| -> [f64; 3] {
                let gl = m.grad_lambda(k);
                let t = m.triangles[k];
                let p0 = m.vertices[t[0]];
                let l1 = gl[1][0] * (x - p0[0]) + gl[1][1] * (y - p0[1]);
                let l2 = gl[2][0] * (x - p0[0]) + gl[2][1] * (y - p0[1]);
                [1.0 - l1 - l2, l1, l2]
            };
            let g = if kind.is_vector_valued() {
                let fc = f.clone();
                let back = interpolate_vector(&space, move |x, y| {
                    let k = locate(x, y);
                    fc.eval_vector(k, bary(k, x, y)).unwrap()
                })
                .unwrap();
                back
            } else {
                let fc = f.clone();
                interpolate_scalar(&space, move |x, y| {
                    let k = locate(x, y);
                    fc.eval_scalar(k, bary(k, x, y)).unwrap()
                })
                .unwrap()
            };
            for (a, b) in f.coeffs.iter().zip(&g.coeffs) {
                assert!(
                    (a - b).abs() < 1e-12,
                    "{kind:?}: round trip {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn cr_interpolation_rate_for_quadratic() {
        // || v - I_cr v || per cell is O(h^2): the rate under refinement is
        // close to 2. The function vanishes on the Dirichlet part so no
        // constrained dof truncates it.
        let g = |x: f64, y: f64| x * x + x * y;
        let mut errors = Vec::new();
        for n in [4usize, 8, 16] {
            let m = square(n, &[Side::Left]);
            let space = Arc::new(build_space(&m, SpaceKind::CrD).unwrap());
            let f = interpolate_scalar(&space, g).unwrap();
            let rule = crate::quadrature::triangle_rule(6).unwrap();
            let mut err2 = 0.0;
            for k in 0..m.num_triangles() {
                let scale = 2.0 * m.area(k);
                for (l, w) in rule.points.iter().zip(&rule.weights) {
                    let x = m.bary_to_xy(k, *l);
                    let d = f.eval_scalar(k, *l).unwrap() - g(x[0], x[1]);
                    err2 += w * scale * d * d;
                }
            }
            errors.push(err2.sqrt());
        }
        let rate1 = (errors[0] / errors[1]).log2();
        let rate2 = (errors[1] / errors[2]).log2();
        assert!(rate1 > 1.8 && rate2 > 1.8, "rates {rate1}, {rate2}");
    }
}
