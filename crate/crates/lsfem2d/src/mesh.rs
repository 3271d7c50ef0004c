//! Conforming 2D triangular meshes with boundary tagging and refinement.
//!
//! Edge orientation convention: every edge is stored as `[lo, hi]` with
//! `lo < hi`; its unit tangent points from `lo` to `hi` and its unit normal
//! `n_F` is the tangent rotated by 90 degrees clockwise. For an interior edge
//! the adjacent triangle whose outward normal coincides with `n_F` is stored
//! first (`K-`); jumps are understood as `v|K- - v|K+`.

use crate::geometry::{cross, norm, rot_cw, sub};
use crate::{Error, Result};
use std::collections::HashMap;

/// Classification of a mesh edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// Sides of the unit square, used to assign boundary tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "bottom" => Ok(Side::Bottom),
            "top" => Ok(Side::Top),
            other => Err(Error::UnknownName(format!("boundary side '{other}'"))),
        }
    }
}

/// A conforming triangulation. Immutable after construction; refinement
/// operations produce a new mesh carrying a parent map.
#[derive(Debug, Clone)]
pub struct Triangulation {
    /// Vertex coordinates.
    pub vertices: Vec<[f64; 2]>,
    /// Triangles as counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Edges as `[lo, hi]` vertex pairs, `lo < hi`, sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    /// Per triangle, the global edge index opposite each local vertex.
    pub tri_edges: Vec<[usize; 3]>,
    /// +1 if the triangle traverses the edge lo->hi in its ccw boundary walk
    /// (then its outward normal on that edge equals `n_F`), else -1.
    pub tri_edge_signs: Vec<[i8; 3]>,
    /// Per edge boundary classification.
    pub boundary_tag: Vec<BoundaryTag>,
    /// Adjacent triangles per edge: `[K-, K+]`; `K+` is `None` on the boundary.
    pub edge_tris: Vec<[Option<usize>; 2]>,
    /// Edge lengths.
    pub h_edge: Vec<f64>,
    /// Per triangle, the local index (0..3) of its newest-vertex bisection edge.
    pub refinement_edge: Vec<u8>,
    /// For refined meshes, the parent triangle index in the previous mesh.
    pub parent: Option<Vec<usize>>,
}

impl Triangulation {
    /// Build connectivity from raw cells. Triangle orientation is fixed to ccw;
    /// boundary edges are tagged by the supplied closure (given the endpoint
    /// vertex indices and coordinates). The refinement edge of each triangle
    /// is its longest edge (lowest local index on ties).
    pub fn from_cells<F>(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        parent: Option<Vec<usize>>,
        tag: F,
    ) -> Result<Triangulation>
    where
        F: Fn(usize, usize, [f64; 2], [f64; 2]) -> BoundaryTag,
    {
        for t in &mut triangles {
            let a = signed_area(&vertices, *t);
            if a < 0.0 {
                t.swap(1, 2);
            } else if a == 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "degenerate triangle {:?}",
                    t
                )));
            }
        }

        let mut edge_set: Vec<[usize; 2]> = Vec::with_capacity(triangles.len() * 3 / 2);
        for t in &triangles {
            for i in 0..3 {
                let a = t[(i + 1) % 3];
                let b = t[(i + 2) % 3];
                edge_set.push([a.min(b), a.max(b)]);
            }
        }
        edge_set.sort_unstable();
        edge_set.dedup();
        let edge_id: HashMap<[usize; 2], usize> = edge_set
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect();

        let ne = edge_set.len();
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        let mut tri_edge_signs = vec![[0i8; 3]; triangles.len()];
        let mut edge_tris: Vec<[Option<usize>; 2]> = vec![[None, None]; ne];

        for (k, t) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = t[(i + 1) % 3];
                let b = t[(i + 2) % 3];
                let e = edge_id[&[a.min(b), a.max(b)]];
                tri_edges[k][i] = e;
                let sign = if a < b { 1 } else { -1 };
                tri_edge_signs[k][i] = sign;
                let slot = if sign == 1 { 0 } else { 1 };
                if edge_tris[e][slot].is_some() {
                    return Err(Error::InvalidMesh(format!(
                        "edge {:?} traversed twice in the same direction",
                        edge_set[e]
                    )));
                }
                edge_tris[e][slot] = Some(k);
            }
        }

        let mut boundary_tag = vec![BoundaryTag::Interior; ne];
        let mut h_edge = vec![0.0; ne];
        for (e, pair) in edge_set.iter().enumerate() {
            let pa = vertices[pair[0]];
            let pb = vertices[pair[1]];
            h_edge[e] = norm(sub(pb, pa));
            let n_adj = edge_tris[e].iter().filter(|t| t.is_some()).count();
            match n_adj {
                2 => {}
                1 => boundary_tag[e] = tag(pair[0], pair[1], pa, pb),
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge {:?} has {n_adj} adjacent triangles",
                        pair
                    )))
                }
            }
        }

        let refinement_edge = triangles
            .iter()
            .zip(&tri_edges)
            .map(|(_, es)| {
                let mut best = 0u8;
                for i in 1..3 {
                    if h_edge[es[i as usize]] > h_edge[es[best as usize]] + 1e-14 {
                        best = i;
                    }
                }
                best
            })
            .collect();

        let mesh = Triangulation {
            vertices,
            triangles,
            edges: edge_set,
            tri_edges,
            tri_edge_signs,
            boundary_tag,
            edge_tris,
            h_edge,
            refinement_edge,
            parent,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self, k: usize) -> f64 {
        signed_area(&self.vertices, self.triangles[k])
    }

    /// Unit tangent of edge `e`, pointing from the lower to the higher vertex.
    pub fn edge_tangent(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e];
        let d = sub(self.vertices[b], self.vertices[a]);
        [d[0] / self.h_edge[e], d[1] / self.h_edge[e]]
    }

    /// Unit normal of edge `e`: the tangent rotated 90 degrees clockwise.
    pub fn edge_normal(&self, e: usize) -> [f64; 2] {
        rot_cw(self.edge_tangent(e))
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e];
        [
            0.5 * (self.vertices[a][0] + self.vertices[b][0]),
            0.5 * (self.vertices[a][1] + self.vertices[b][1]),
        ]
    }

    /// Barycentric gradients of the three vertex hat functions on triangle `k`.
    pub fn grad_lambda(&self, k: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[k];
        let p = [
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        ];
        let a2 = 2.0 * self.area(k);
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            let d = sub(p[(i + 2) % 3], p[(i + 1) % 3]);
            g[i] = [-d[1] / a2, d[0] / a2];
        }
        g
    }

    /// Map barycentric coordinates on triangle `k` to physical coordinates.
    pub fn bary_to_xy(&self, k: usize, l: [f64; 3]) -> [f64; 2] {
        let t = self.triangles[k];
        let mut x = [0.0; 2];
        for i in 0..3 {
            x[0] += l[i] * self.vertices[t[i]][0];
            x[1] += l[i] * self.vertices[t[i]][1];
        }
        x
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_tag[e] != BoundaryTag::Interior
    }

    /// True if two meshes describe the same geometry (used to allow fields on
    /// the same grid with different boundary tags to interoperate).
    pub fn same_geometry(&self, other: &Triangulation) -> bool {
        self.vertices == other.vertices && self.triangles == other.triangles
    }

    /// Check all structural invariants.
    pub fn validate(&self) -> Result<()> {
        let nv = self.num_vertices();
        let ne = self.num_edges();
        let nt = self.num_triangles();
        if nv as i64 - ne as i64 + nt as i64 != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler relation violated: V - E + T = {} - {} + {} != 1",
                nv, ne, nt
            )));
        }
        for k in 0..nt {
            if self.area(k) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {k} not ccw")));
            }
            if self.refinement_edge[k] > 2 {
                return Err(Error::InvalidMesh(format!(
                    "triangle {k} refinement edge out of range"
                )));
            }
        }
        let mut has_dirichlet = false;
        for e in 0..ne {
            let n_adj = self.edge_tris[e].iter().filter(|t| t.is_some()).count();
            match self.boundary_tag[e] {
                BoundaryTag::Interior => {
                    if n_adj != 2 {
                        return Err(Error::InvalidMesh(format!(
                            "interior edge {e} has {n_adj} adjacent triangles"
                        )));
                    }
                }
                BoundaryTag::Dirichlet => {
                    has_dirichlet = true;
                    if n_adj != 1 {
                        return Err(Error::InvalidMesh(format!(
                            "boundary edge {e} has {n_adj} adjacent triangles"
                        )));
                    }
                }
                BoundaryTag::Neumann => {
                    if n_adj != 1 {
                        return Err(Error::InvalidMesh(format!(
                            "boundary edge {e} has {n_adj} adjacent triangles"
                        )));
                    }
                }
            }
            // K- must traverse lo->hi so that its outward normal equals n_F.
            if let Some(k) = self.edge_tris[e][0] {
                let i = self.tri_edges[k].iter().position(|&x| x == e).unwrap();
                if self.tri_edge_signs[k][i] != 1 {
                    return Err(Error::InvalidMesh(format!(
                        "edge {e}: stored K- does not traverse lo->hi"
                    )));
                }
            }
        }
        if !has_dirichlet {
            return Err(Error::InvalidMesh(
                "Dirichlet boundary part is empty".into(),
            ));
        }
        Ok(())
    }
}

fn signed_area(vertices: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let a = vertices[t[0]];
    let b = vertices[t[1]];
    let c = vertices[t[2]];
    0.5 * cross(sub(b, a), sub(c, a))
}

fn square_side(pa: [f64; 2], pb: [f64; 2], x0: f64, x1: f64, y0: f64, y1: f64) -> Option<Side> {
    let tol = 1e-12;
    if (pa[0] - x0).abs() < tol && (pb[0] - x0).abs() < tol {
        Some(Side::Left)
    } else if (pa[0] - x1).abs() < tol && (pb[0] - x1).abs() < tol {
        Some(Side::Right)
    } else if (pa[1] - y0).abs() < tol && (pb[1] - y0).abs() < tol {
        Some(Side::Bottom)
    } else if (pa[1] - y1).abs() < tol && (pb[1] - y1).abs() < tol {
        Some(Side::Top)
    } else {
        None
    }
}

/// Uniform n x n triangulation of the unit square; each cell is cut along the
/// bottom-left to top-right diagonal. Sides listed in `dirichlet_sides` get
/// Dirichlet tags, the remaining sides Neumann.
pub fn make_structured_square(n: usize, dirichlet_sides: &[Side]) -> Result<Triangulation> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh subdivision n must be >= 1".into()));
    }
    if dirichlet_sides.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one Dirichlet side is required".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let dir: Vec<Side> = dirichlet_sides.to_vec();
    Triangulation::from_cells(vertices, triangles, None, move |_, _, pa, pb| {
        match square_side(pa, pb, 0.0, 1.0, 0.0, 1.0) {
            Some(s) if dir.contains(&s) => BoundaryTag::Dirichlet,
            Some(_) => BoundaryTag::Neumann,
            None => BoundaryTag::Dirichlet,
        }
    })
}

/// L-shaped domain `(-1,1)^2` minus the closed lower-right quadrant
/// `[0,1) x (-1,0]`, with `n` subdivisions per unit length and the whole
/// boundary tagged Dirichlet. The reentrant corner sits at the origin.
pub fn make_lshape(n: usize) -> Result<Triangulation> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh subdivision n must be >= 1".into()));
    }
    let m = 2 * n;
    let h = 1.0 / n as f64;
    let coord = |i: usize| -1.0 + i as f64 * h;
    // Keep a grid cell unless it lies in the removed quadrant.
    let mut vmap = vec![usize::MAX; (m + 1) * (m + 1)];
    let gidx = |i: usize, j: usize| j * (m + 1) + i;
    let keep_cell = |i: usize, j: usize| !(coord(i) >= -1e-12 && coord(j + 1) <= 1e-12);

    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for j in 0..m {
        for i in 0..m {
            if !keep_cell(i, j) {
                continue;
            }
            let corners = [gidx(i, j), gidx(i + 1, j), gidx(i, j + 1), gidx(i + 1, j + 1)];
            for &c in &corners {
                if vmap[c] == usize::MAX {
                    vmap[c] = vertices.len();
                    vertices.push([coord(c % (m + 1)), coord(c / (m + 1))]);
                }
            }
            let v00 = vmap[gidx(i, j)];
            let v10 = vmap[gidx(i + 1, j)];
            let v01 = vmap[gidx(i, j + 1)];
            let v11 = vmap[gidx(i + 1, j + 1)];
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Triangulation::from_cells(vertices, triangles, None, |_, _, _, _| BoundaryTag::Dirichlet)
}

/// Tag lookup for refined meshes: a child boundary edge is either an intact
/// parent edge or one half of a split parent edge.
struct TagInherit {
    parent_tags: HashMap<[usize; 2], BoundaryTag>,
    midpoint_edge: HashMap<usize, [usize; 2]>,
    parent_nv: usize,
}

impl TagInherit {
    fn tag(&self, mut a: usize, mut b: usize) -> BoundaryTag {
        // Normalize so that a is an original vertex if any.
        if a >= self.parent_nv && b < self.parent_nv {
            std::mem::swap(&mut a, &mut b);
        }
        let key = if b >= self.parent_nv {
            // Half edge: b is a midpoint of some parent edge.
            self.midpoint_edge[&b]
        } else {
            [a.min(b), a.max(b)]
        };
        *self
            .parent_tags
            .get(&key)
            .expect("child boundary edge does not lie on a parent boundary edge")
    }
}

fn boundary_tag_map(mesh: &Triangulation) -> HashMap<[usize; 2], BoundaryTag> {
    mesh.edges
        .iter()
        .zip(&mesh.boundary_tag)
        .filter(|(_, &t)| t != BoundaryTag::Interior)
        .map(|(&e, &t)| (e, t))
        .collect()
}

/// Red refinement: every triangle is split into four congruent children by
/// connecting edge midpoints. Boundary tags are inherited.
pub fn refine_uniform(mesh: &Triangulation) -> Result<Triangulation> {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    let mut midpoint = vec![usize::MAX; mesh.num_edges()];
    let mut midpoint_edge = HashMap::new();
    for e in 0..mesh.num_edges() {
        midpoint[e] = vertices.len();
        midpoint_edge.insert(vertices.len(), mesh.edges[e]);
        vertices.push(mesh.edge_midpoint(e));
    }
    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    let mut parent = Vec::with_capacity(4 * mesh.num_triangles());
    for (k, t) in mesh.triangles.iter().enumerate() {
        // Midpoint opposite vertex i.
        let m = [
            midpoint[mesh.tri_edges[k][0]],
            midpoint[mesh.tri_edges[k][1]],
            midpoint[mesh.tri_edges[k][2]],
        ];
        triangles.push([t[0], m[2], m[1]]);
        triangles.push([m[2], t[1], m[0]]);
        triangles.push([m[1], m[0], t[2]]);
        triangles.push([m[0], m[1], m[2]]);
        parent.extend_from_slice(&[k, k, k, k]);
    }
    let inherit = TagInherit {
        parent_tags: boundary_tag_map(mesh),
        midpoint_edge,
        parent_nv: nv,
    };
    Triangulation::from_cells(vertices, triangles, Some(parent), move |a, b, _, _| {
        inherit.tag(a, b)
    })
}

/// Newest-vertex bisection of the marked triangles with recursive closure so
/// the result is conforming. Boundary tags are inherited; each child's
/// refinement edge is the edge opposite the newly created vertex.
pub fn bisect_marked(mesh: &Triangulation, marked: &[usize]) -> Result<Triangulation> {
    for &k in marked {
        if k >= mesh.num_triangles() {
            return Err(Error::InvalidArgument(format!(
                "marked triangle {k} out of range"
            )));
        }
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }

    // Closure on the set of edges to bisect: if any edge of a triangle is
    // scheduled, its refinement edge must be scheduled too.
    let ne = mesh.num_edges();
    let mut cut = vec![false; ne];
    for &k in marked {
        cut[mesh.tri_edges[k][mesh.refinement_edge[k] as usize]] = true;
    }
    loop {
        let mut changed = false;
        for k in 0..mesh.num_triangles() {
            let re = mesh.tri_edges[k][mesh.refinement_edge[k] as usize];
            if !cut[re] && mesh.tri_edges[k].iter().any(|&e| cut[e]) {
                cut[re] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    let mut midpoint = vec![usize::MAX; ne];
    let mut midpoint_edge = HashMap::new();
    for e in 0..ne {
        if cut[e] {
            midpoint[e] = vertices.len();
            midpoint_edge.insert(vertices.len(), mesh.edges[e]);
            vertices.push(mesh.edge_midpoint(e));
        }
    }

    // Children are (triangle, local refinement edge) pairs; original edges of
    // the parent stay identifiable so the recursion can cut them as well.
    struct Child {
        verts: [usize; 3],
        // Global parent-mesh edge id for each local edge, MAX for new edges.
        orig_edges: [usize; 3],
        refine: u8,
    }

    let mut triangles = Vec::new();
    let mut ref_edges = Vec::new();
    let mut parent = Vec::new();
    for k in 0..mesh.num_triangles() {
        let mut stack = vec![Child {
            verts: mesh.triangles[k],
            orig_edges: mesh.tri_edges[k],
            refine: mesh.refinement_edge[k],
        }];
        while let Some(c) = stack.pop() {
            let re = c.refine as usize;
            let ge = c.orig_edges[re];
            if ge == usize::MAX || !cut[ge] {
                triangles.push(c.verts);
                ref_edges.push(c.refine);
                parent.push(k);
                continue;
            }
            let m = midpoint[ge];
            let p = c.verts[re]; // peak
            let a = c.verts[(re + 1) % 3];
            let b = c.verts[(re + 2) % 3];
            let ea = c.orig_edges[(re + 2) % 3]; // edge (p, a)
            let eb = c.orig_edges[(re + 1) % 3]; // edge (b, p)
            // Child containing a: (a, m, p); new vertex m is local 1, so its
            // refinement edge (p, a) is local 1.
            stack.push(Child {
                verts: [a, m, p],
                orig_edges: [usize::MAX, ea, usize::MAX],
                refine: 1,
            });
            // Child containing b: (m, b, p); new vertex m is local 0.
            stack.push(Child {
                verts: [m, b, p],
                orig_edges: [eb, usize::MAX, usize::MAX],
                refine: 0,
            });
        }
    }

    let inherit = TagInherit {
        parent_tags: boundary_tag_map(mesh),
        midpoint_edge,
        parent_nv: nv,
    };
    let mut out = Triangulation::from_cells(vertices, triangles, Some(parent), move |a, b, _, _| {
        inherit.tag(a, b)
    })?;
    // from_cells assigns longest-edge refinement edges; overwrite with the
    // newest-vertex rule computed during bisection.
    out.refinement_edge = ref_edges;
    Ok(out)
}

/// Summary statistics of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub num_vertices: usize,
    pub num_edges: usize,
    pub num_triangles: usize,
    pub h_max: f64,
    pub h_min: f64,
    /// Smallest interior angle over all triangles, in degrees.
    pub min_angle: f64,
}

pub fn mesh_stats(mesh: &Triangulation) -> MeshStats {
    let h_max = mesh.h_edge.iter().cloned().fold(0.0_f64, f64::max);
    let h_min = mesh.h_edge.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut min_angle = f64::INFINITY;
    for t in &mesh.triangles {
        let p = [
            mesh.vertices[t[0]],
            mesh.vertices[t[1]],
            mesh.vertices[t[2]],
        ];
        for i in 0..3 {
            let u = sub(p[(i + 1) % 3], p[i]);
            let v = sub(p[(i + 2) % 3], p[i]);
            let cosang = crate::geometry::dot(u, v) / (norm(u) * norm(v));
            min_angle = min_angle.min(cosang.clamp(-1.0, 1.0).acos());
        }
    }
    MeshStats {
        num_vertices: mesh.num_vertices(),
        num_edges: mesh.num_edges(),
        num_triangles: mesh.num_triangles(),
        h_max,
        h_min,
        min_angle: min_angle.to_degrees(),
    }
}

/// Interior angle of the domain at a boundary vertex (sum of incident
/// triangle angles). Used by tests to locate reentrant corners.
pub fn boundary_vertex_angle(mesh: &Triangulation, v: usize) -> Option<f64> {
    let on_boundary = mesh
        .edges
        .iter()
        .zip(&mesh.boundary_tag)
        .any(|(e, &t)| t != BoundaryTag::Interior && (e[0] == v || e[1] == v));
    if !on_boundary {
        return None;
    }
    let mut total = 0.0;
    for t in &mesh.triangles {
        if let Some(i) = t.iter().position(|&w| w == v) {
            let p = [
                mesh.vertices[t[i]],
                mesh.vertices[t[(i + 1) % 3]],
                mesh.vertices[t[(i + 2) % 3]],
            ];
            let u = sub(p[1], p[0]);
            let w = sub(p[2], p[0]);
            total += (crate::geometry::dot(u, w) / (norm(u) * norm(w)))
                .clamp(-1.0, 1.0)
                .acos();
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let m = make_structured_square(1, &Side::ALL).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.num_triangles(), 2);

        let m2 = make_structured_square(2, &Side::ALL).unwrap();
        assert_eq!(
            (m2.num_vertices(), m2.num_edges(), m2.num_triangles()),
            (9, 16, 8)
        );
        assert_eq!(
            m2.num_vertices() as i64 - m2.num_edges() as i64 + m2.num_triangles() as i64,
            1
        );
    }

    #[test]
    fn edge_count_closed_form() {
        // Count edges of the generated mesh and compare with 3n^2 + 2n.
        for n in [1usize, 2, 3, 4, 7] {
            let m = make_structured_square(n, &Side::ALL).unwrap();
            assert_eq!(m.num_edges(), 3 * n * n + 2 * n, "n = {n}");
        }
    }

    #[test]
    fn zero_subdivision_is_invalid() {
        assert!(make_structured_square(0, &Side::ALL).is_err());
        assert!(make_structured_square(2, &[]).is_err());
        assert!(make_lshape(0).is_err());
    }

    #[test]
    fn lshape_counts_and_corner() {
        let m = make_lshape(1).unwrap();
        assert_eq!(m.num_triangles(), 6);
        let m2 = make_lshape(2).unwrap();
        assert_eq!(m2.num_triangles(), 24);
        assert_eq!(
            m2.num_vertices() as i64 - m2.num_edges() as i64 + m2.num_triangles() as i64,
            1
        );
        // Exactly one boundary vertex with interior angle 3*pi/2.
        for mesh in [&m, &m2] {
            let mut reentrant = 0;
            for v in 0..mesh.num_vertices() {
                if let Some(a) = boundary_vertex_angle(mesh, v) {
                    if (a - 1.5 * std::f64::consts::PI).abs() < 1e-10 {
                        reentrant += 1;
                        let p = mesh.vertices[v];
                        assert!(p[0].abs() < 1e-14 && p[1].abs() < 1e-14);
                    }
                }
            }
            assert_eq!(reentrant, 1);
        }
    }

    #[test]
    fn uniform_refinement() {
        let m = make_structured_square(1, &Side::ALL).unwrap();
        let r = refine_uniform(&m).unwrap();
        assert_eq!(r.num_triangles(), 8);
        let s0 = mesh_stats(&m);
        let s1 = mesh_stats(&r);
        assert!((s0.h_max - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!((s1.h_max - 0.5 * s0.h_max).abs() < 1e-14);
        assert_eq!(
            r.num_vertices() as i64 - r.num_edges() as i64 + r.num_triangles() as i64,
            1
        );
        assert!((s0.min_angle - 45.0).abs() < 1e-9);
    }

    #[test]
    fn refinement_preserves_dirichlet_points() {
        let m = make_structured_square(2, &[Side::Left, Side::Top]).unwrap();
        let r = refine_uniform(&m).unwrap();
        let dirichlet_points = |mesh: &Triangulation| {
            let mut pts: Vec<[f64; 2]> = Vec::new();
            for (e, &t) in mesh.boundary_tag.iter().enumerate() {
                if t == BoundaryTag::Dirichlet {
                    pts.push(mesh.vertices[mesh.edges[e][0]]);
                    pts.push(mesh.vertices[mesh.edges[e][1]]);
                    pts.push(mesh.edge_midpoint(e));
                }
            }
            pts
        };
        // Every coarse Dirichlet point stays on a fine Dirichlet edge: fine
        // Dirichlet edges cover the same sides.
        for p in dirichlet_points(&m) {
            let on_fine = dirichlet_points(&r)
                .iter()
                .any(|q| (q[0] - p[0]).abs() + (q[1] - p[1]).abs() < 1e-12)
                || r.boundary_tag.iter().zip(&r.edges).any(|(&t, &[a, b])| {
                    t == BoundaryTag::Dirichlet && {
                        let pa = r.vertices[a];
                        let pb = r.vertices[b];
                        // p collinear and between pa, pb
                        (crate::geometry::cross(sub(pb, pa), sub(p, pa))).abs() < 1e-12
                            && crate::geometry::dot(sub(p, pa), sub(p, pb)) <= 1e-12
                    }
                });
            assert!(on_fine);
        }
    }

    #[test]
    fn bisect_empty_is_identity() {
        let m = make_structured_square(2, &Side::ALL).unwrap();
        let r = bisect_marked(&m, &[]).unwrap();
        assert_eq!(r.num_triangles(), m.num_triangles());
        assert_eq!(r.triangles, m.triangles);
    }

    #[test]
    fn bisect_all_bisects_every_parent() {
        let m = make_structured_square(2, &Side::ALL).unwrap();
        let marked: Vec<usize> = (0..m.num_triangles()).collect();
        let r = bisect_marked(&m, &marked).unwrap();
        assert!(r.num_triangles() >= 2 * m.num_triangles());
        r.validate().unwrap();
        let parent = r.parent.as_ref().unwrap();
        for k in 0..m.num_triangles() {
            assert!(parent.iter().filter(|&&p| p == k).count() >= 2);
        }
    }

    #[test]
    fn bisect_single_closure_conforms() {
        let m = make_structured_square(4, &Side::ALL).unwrap();
        let r = bisect_marked(&m, &[5]).unwrap();
        r.validate().unwrap();
        assert!(r.num_triangles() > m.num_triangles());
        // Areas sum to the domain area.
        let total: f64 = (0..r.num_triangles()).map(|k| r.area(k)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_bisection_keeps_angles_bounded() {
        let mut m = make_structured_square(2, &Side::ALL).unwrap();
        for round in 0..6 {
            let marked: Vec<usize> = (0..m.num_triangles()).step_by(3).collect();
            m = bisect_marked(&m, &marked).unwrap();
            let s = mesh_stats(&m);
            assert!(s.min_angle > 20.0, "round {round}: min angle {}", s.min_angle);
        }
    }

    #[test]
    fn neighbor_orientation_convention() {
        let m = make_structured_square(3, &[Side::Left]).unwrap();
        for e in 0..m.num_edges() {
            if let [Some(km), Some(_)] = m.edge_tris[e] {
                // Outward normal of K- on e equals n_F.
                let i = m.tri_edges[km].iter().position(|&x| x == e).unwrap();
                assert_eq!(m.tri_edge_signs[km][i], 1);
            }
        }
    }
}
