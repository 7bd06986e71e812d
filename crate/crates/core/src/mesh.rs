//! Conforming simplicial meshes of rectangles and boxes.
//!
//! Besides cells, the mesh carries explicit face and edge tables: bubble
//! unknowns live on faces and the convection operator is edge based.
//!
//! Conventions:
//! - local face `i` of a cell is the face opposite local vertex `i`;
//! - a face normal is the unit outward normal of its owner cell, which is the
//!   lowest-numbered adjacent cell;
//! - an edge tangent `τ_E = x_hi - x_lo` points from the lower to the higher
//!   global vertex index.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{self, Point};

/// Local vertex pairs of the edges of a triangle.
pub const LOCAL_EDGES_2D: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
/// Local vertex pairs of the edges of a tetrahedron.
pub const LOCAL_EDGES_3D: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn local_edges(dim: usize) -> &'static [(usize, usize)] {
    if dim == 2 {
        &LOCAL_EDGES_2D
    } else {
        &LOCAL_EDGES_3D
    }
}

/// Triangulation pattern for a rectangle split into `nx × ny` squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// Two triangles per rectangle, cut along the lower-left to upper-right diagonal.
    RightDiagonal,
    /// Four triangles per rectangle meeting at an added center vertex.
    Crisscross,
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" | "right-diagonal" | "rightdiagonal" => Ok(Pattern::RightDiagonal),
            "crisscross" | "criss-cross" => Ok(Pattern::Crisscross),
            other => Err(Error::InvalidMeshParameter(format!("unknown pattern '{other}'"))),
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pattern::RightDiagonal => write!(f, "right-diagonal"),
            Pattern::Crisscross => write!(f, "crisscross"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Face {
    /// Sorted global vertex ids; the first `dim` entries are used.
    pub vertices: [usize; 3],
    /// Unit normal, outward for `owner`.
    pub normal: Point,
    pub measure: f64,
    pub barycenter: Point,
    pub owner: usize,
    pub neighbor: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.owner).chain(self.neighbor)
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    /// Global vertex ids with `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    /// `x_hi - x_lo`, a non-unit tangent of length `|E|`.
    pub tangent: Point,
    pub length: f64,
}

/// Geometric quantities of one affine simplex.
#[derive(Clone, Debug)]
pub struct CellGeometry {
    pub volume: f64,
    /// Gradients of the barycentric coordinates; `dim + 1` are used.
    pub grad_lambda: [Point; 4],
    /// Barycenter of the face opposite local vertex `i`.
    pub face_barycenters: [Point; 4],
    pub barycenter: Point,
}

impl CellGeometry {
    /// Geometry of the simplex spanned by `points` (`dim + 1` of them).
    pub fn from_points(dim: usize, points: &[Point]) -> std::result::Result<Self, f64> {
        assert!(dim == 2 || dim == 3);
        assert_eq!(points.len(), dim + 1);
        let e: Vec<Point> = (1..=dim).map(|m| linalg::sub(&points[m], &points[0])).collect();
        let mut grad_lambda = [[0.0; 3]; 4];
        let det;
        if dim == 2 {
            det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
            if det.abs() <= f64::EPSILON * 16.0 * (linalg::norm(&e[0]) * linalg::norm(&e[1])) {
                return Err(det / 2.0);
            }
            // rows of the inverse of [e0 e1]
            grad_lambda[1] = [e[1][1] / det, -e[1][0] / det, 0.0];
            grad_lambda[2] = [-e[0][1] / det, e[0][0] / det, 0.0];
        } else {
            let c01 = cross(&e[1], &e[2]);
            let c12 = cross(&e[2], &e[0]);
            let c20 = cross(&e[0], &e[1]);
            det = linalg::dot(&e[0], &c01);
            let scale = linalg::norm(&e[0]) * linalg::norm(&e[1]) * linalg::norm(&e[2]);
            if det.abs() <= f64::EPSILON * 64.0 * scale {
                return Err(det / 6.0);
            }
            grad_lambda[1] = linalg::scale(&c01, 1.0 / det);
            grad_lambda[2] = linalg::scale(&c12, 1.0 / det);
            grad_lambda[3] = linalg::scale(&c20, 1.0 / det);
        }
        let mut g0 = [0.0; 3];
        for g in &grad_lambda[1..=dim] {
            linalg::axpy(&mut g0, -1.0, g);
        }
        grad_lambda[0] = g0;
        let volume = det.abs() / if dim == 2 { 2.0 } else { 6.0 };

        let barycenter = linalg::centroid(points);
        let mut face_barycenters = [[0.0; 3]; 4];
        for (i, fb) in face_barycenters.iter_mut().enumerate().take(dim + 1) {
            let others: Vec<Point> = (0..=dim).filter(|&j| j != i).map(|j| points[j]).collect();
            *fb = linalg::centroid(&others);
        }
        Ok(CellGeometry {
            volume,
            grad_lambda,
            face_barycenters,
            barycenter,
        })
    }
}

fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Conforming triangulation (2D) or tetrahedralization (3D).
#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<[usize; 4]>,
    faces: Vec<Face>,
    edges: Vec<Edge>,
    cell_faces: Vec<[usize; 4]>,
    cell_edges: Vec<[usize; 6]>,
    geometry: Vec<CellGeometry>,
    boundary_vertex: Vec<bool>,
}

impl SimplicialMesh {
    /// Builds the face/edge tables and cell geometry from raw connectivity.
    pub fn new(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMeshParameter(format!("dimension {dim}")));
        }
        let nv = dim + 1;
        let mut cell_arr = Vec::with_capacity(cells.len());
        let mut geometry = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != nv || cell.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMeshParameter(format!("malformed cell {c}")));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let geo = CellGeometry::from_points(dim, &pts)
                .map_err(|measure| Error::DegenerateCell { cell: c, measure })?;
            let mut arr = [usize::MAX; 4];
            arr[..nv].copy_from_slice(cell);
            cell_arr.push(arr);
            geometry.push(geo);
        }

        let mut face_map: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut cell_faces = vec![[usize::MAX; 4]; cell_arr.len()];
        for (c, cell) in cell_arr.iter().enumerate() {
            let geo = &geometry[c];
            for i in 0..nv {
                let mut key = [usize::MAX; 3];
                let mut k = 0;
                for (j, &v) in cell[..nv].iter().enumerate() {
                    if j != i {
                        key[k] = v;
                        k += 1;
                    }
                }
                key[..dim].sort_unstable();
                let fid = match face_map.get(&key) {
                    Some(&fid) => {
                        let face = &mut faces[fid];
                        if face.neighbor.is_some() {
                            return Err(Error::InvalidMeshParameter(format!(
                                "face {key:?} shared by more than two cells"
                            )));
                        }
                        face.neighbor = Some(c);
                        fid
                    }
                    None => {
                        let g = geo.grad_lambda[i];
                        let gnorm = linalg::norm(&g);
                        let fid = faces.len();
                        faces.push(Face {
                            vertices: key,
                            normal: linalg::scale(&g, -1.0 / gnorm),
                            measure: dim as f64 * geo.volume * gnorm,
                            barycenter: geo.face_barycenters[i],
                            owner: c,
                            neighbor: None,
                        });
                        face_map.insert(key, fid);
                        fid
                    }
                };
                cell_faces[c][i] = fid;
            }
        }

        let mut edge_map: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = vec![[usize::MAX; 6]; cell_arr.len()];
        for (c, cell) in cell_arr.iter().enumerate() {
            for (le, &(a, b)) in local_edges(dim).iter().enumerate() {
                let (va, vb) = (cell[a], cell[b]);
                let key = if va < vb { [va, vb] } else { [vb, va] };
                let eid = *edge_map.entry(key).or_insert_with(|| {
                    let tangent = linalg::sub(&vertices[key[1]], &vertices[key[0]]);
                    edges.push(Edge {
                        vertices: key,
                        tangent,
                        length: linalg::norm(&tangent),
                    });
                    edges.len() - 1
                });
                cell_edges[c][le] = eid;
            }
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        for f in faces.iter().filter(|f| f.is_boundary()) {
            for &v in &f.vertices[..dim] {
                boundary_vertex[v] = true;
            }
        }

        Ok(SimplicialMesh {
            dim,
            vertices,
            cells: cell_arr,
            faces,
            edges,
            cell_faces,
            cell_edges,
            geometry,
            boundary_vertex,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Global vertex ids of cell `c`.
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..=self.dim]
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Face ids of cell `c`, local face `i` opposite local vertex `i`.
    pub fn cell_faces(&self, c: usize) -> &[usize] {
        &self.cell_faces[c][..=self.dim]
    }

    /// Edge ids of cell `c` in the order of [`local_edges`].
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c][..local_edges(self.dim).len()]
    }

    /// Cached geometry of a cell; panics on an out-of-range id.
    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    pub fn cell_geometry(&self, c: usize) -> Result<&CellGeometry> {
        self.geometry.get(c).ok_or(Error::InvalidCell(c))
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    /// `+1` if the stored normal of face `f` points out of cell `c`, `-1` otherwise.
    pub fn face_sign(&self, f: usize, c: usize) -> f64 {
        if self.faces[f].owner == c {
            1.0
        } else {
            -1.0
        }
    }

    pub fn total_measure(&self) -> f64 {
        self.geometry.iter().map(|g| g.volume).sum()
    }

    /// `max_T |T|^(1/d)`.
    pub fn h(&self) -> f64 {
        let p = 1.0 / self.dim as f64;
        self.geometry.iter().map(|g| g.volume.powf(p)).fold(0.0, f64::max)
    }

    pub fn n_interior_vertices(&self) -> usize {
        self.boundary_vertex.iter().filter(|b| !**b).count()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    /// Maps a point given in barycentric coordinates of cell `c` to physical space.
    pub fn map_to_physical(&self, c: usize, bary: &[f64]) -> Point {
        let mut x = [0.0; 3];
        for (i, &v) in self.cell(c).iter().enumerate() {
            linalg::axpy(&mut x, bary[i], &self.vertices[v]);
        }
        x
    }
}

fn check_count(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidMeshParameter(format!("{name} must be at least 1")))
    } else {
        Ok(())
    }
}

/// Uniform triangulation of `[x0,x1] × [y0,y1]` split into `nx × ny` rectangles.
pub fn uniform_rectangle_mesh(
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
    pattern: Pattern,
) -> Result<SimplicialMesh> {
    check_count("nx", nx)?;
    check_count("ny", ny)?;
    if !(x_range.1 > x_range.0 && y_range.1 > y_range.0) {
        return Err(Error::InvalidMeshParameter("empty rectangle".into()));
    }
    let dx = (x_range.1 - x_range.0) / nx as f64;
    let dy = (y_range.1 - y_range.0) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) + nx * ny);
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([x_range.0 + i as f64 * dx, y_range.0 + j as f64 * dy, 0.0]);
        }
    }
    let grid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (grid(i, j), grid(i + 1, j), grid(i, j + 1), grid(i + 1, j + 1));
            match pattern {
                Pattern::RightDiagonal => {
                    cells.push(vec![v00, v10, v11]);
                    cells.push(vec![v00, v11, v01]);
                }
                Pattern::Crisscross => {
                    let c = vertices.len();
                    vertices.push([
                        x_range.0 + (i as f64 + 0.5) * dx,
                        y_range.0 + (j as f64 + 0.5) * dy,
                        0.0,
                    ]);
                    cells.push(vec![v00, v10, c]);
                    cells.push(vec![v10, v11, c]);
                    cells.push(vec![v11, v01, c]);
                    cells.push(vec![v01, v00, c]);
                }
            }
        }
    }
    SimplicialMesh::new(2, vertices, cells)
}

/// Uniform tetrahedralization of a box: each of the `n[0]·n[1]·n[2]` sub-boxes
/// is cut into six tetrahedra sharing its main diagonal (Kuhn split).
pub fn uniform_box_mesh(ranges: [(f64, f64); 3], n: [usize; 3]) -> Result<SimplicialMesh> {
    for (axis, &k) in n.iter().enumerate() {
        check_count(&format!("n[{axis}]"), k)?;
        if ranges[axis].1 <= ranges[axis].0 {
            return Err(Error::InvalidMeshParameter("empty box".into()));
        }
    }
    let step: Vec<f64> = (0..3).map(|a| (ranges[a].1 - ranges[a].0) / n[a] as f64).collect();
    let idx = |i: usize, j: usize, k: usize| (k * (n[1] + 1) + j) * (n[0] + 1) + i;
    let mut vertices = Vec::with_capacity((n[0] + 1) * (n[1] + 1) * (n[2] + 1));
    for k in 0..=n[2] {
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                vertices.push([
                    ranges[0].0 + i as f64 * step[0],
                    ranges[1].0 + j as f64 * step[1],
                    ranges[2].0 + k as f64 * step[2],
                ]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * n[0] * n[1] * n[2]);
    for k in 0..n[2] {
        for j in 0..n[1] {
            for i in 0..n[0] {
                for perm in PERMS {
                    let mut corner = [i, j, k];
                    let mut tet = vec![idx(corner[0], corner[1], corner[2])];
                    for axis in perm {
                        corner[axis] += 1;
                        tet.push(idx(corner[0], corner[1], corner[2]));
                    }
                    cells.push(tet);
                }
            }
        }
    }
    SimplicialMesh::new(3, vertices, cells)
}

/// Splits every triangle into four congruent children through its edge midpoints.
pub fn quad_refine(mesh: &SimplicialMesh) -> Result<SimplicialMesh> {
    if mesh.dim() != 2 {
        return Err(Error::Unsupported("quad refinement is only defined for triangles".into()));
    }
    let mut vertices = mesh.vertices().to_vec();
    let midpoint: Vec<usize> = mesh
        .edges()
        .iter()
        .map(|e| {
            let m = linalg::scale(&linalg::add(mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1])), 0.5);
            vertices.push(m);
            vertices.len() - 1
        })
        .collect();
    let mut cells = Vec::with_capacity(4 * mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let v = mesh.cell(c);
        let e = mesh.cell_edges(c);
        // LOCAL_EDGES_2D = (0,1), (0,2), (1,2)
        let (m01, m02, m12) = (midpoint[e[0]], midpoint[e[1]], midpoint[e[2]]);
        cells.push(vec![v[0], m01, m02]);
        cells.push(vec![m01, v[1], m12]);
        cells.push(vec![m02, m12, v[2]]);
        cells.push(vec![m12, m02, m01]);
    }
    SimplicialMesh::new(2, vertices, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square(n: usize, p: Pattern) -> SimplicialMesh {
        uniform_rectangle_mesh((0.0, 1.0), (0.0, 1.0), n, n, p).unwrap()
    }

    #[test]
    fn right_diagonal_counts() {
        let m = unit_square(16, Pattern::RightDiagonal);
        assert_eq!(m.n_cells(), 512);
        assert_eq!(m.n_vertices(), 289);
        let m = unit_square(1, Pattern::RightDiagonal);
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.n_interior_faces(), 1);
    }

    #[test]
    fn crisscross_counts() {
        let m = uniform_rectangle_mesh((-0.5, 0.5), (-0.5, 0.5), 32, 16, Pattern::Crisscross).unwrap();
        assert_eq!(m.n_cells(), 2048);
        assert_eq!(m.n_vertices(), 33 * 17 + 32 * 16);
        assert_relative_eq!(m.total_measure(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(uniform_rectangle_mesh((0.0, 1.0), (0.0, 1.0), 0, 3, Pattern::RightDiagonal).is_err());
        assert!(uniform_box_mesh([(0.0, 1.0); 3], [0, 1, 1]).is_err());
    }

    #[test]
    fn box_counts_and_volume() {
        let m = uniform_box_mesh([(0.0, 1.0); 3], [8; 3]).unwrap();
        assert_eq!(m.n_cells(), 3072);
        assert_eq!(m.n_vertices(), 729);
        let m = uniform_box_mesh([(0.0, 1.0); 3], [1; 3]).unwrap();
        assert_eq!(m.n_cells(), 6);
        assert_relative_eq!(m.total_measure(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn box_connectivity_audit() {
        let m = uniform_box_mesh([(0.0, 1.0); 3], [2; 3]).unwrap();
        assert_eq!(m.n_cells(), 48);
        // count how many cells reference each face, independent of the face table
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        for c in 0..m.n_cells() {
            let v = m.cell(c);
            for i in 0..4 {
                let mut key: Vec<usize> = (0..4).filter(|&j| j != i).map(|j| v[j]).collect();
                key.sort_unstable();
                *count.entry(key).or_default() += 1;
            }
        }
        assert_eq!(count.len(), m.n_faces());
        for (key, n) in count {
            let on_boundary = (0..3).any(|axis| {
                key.iter().all(|&v| m.vertex(v)[axis] == 0.0) || key.iter().all(|&v| m.vertex(v)[axis] == 1.0)
            });
            assert_eq!(n, if on_boundary { 1 } else { 2 }, "face {key:?}");
        }
    }

    #[test]
    fn refinement_counts_and_area() {
        let base = unit_square(8, Pattern::RightDiagonal);
        assert_eq!(base.n_cells(), 128);
        let r1 = quad_refine(&base).unwrap();
        assert_eq!(r1.n_cells(), 512);
        let r2 = quad_refine(&r1).unwrap();
        let grid32 = unit_square(32, Pattern::RightDiagonal);
        assert_eq!(r2.n_cells(), grid32.n_cells());
        assert_eq!(r2.n_vertices(), grid32.n_vertices());
        assert_eq!(r2.n_faces(), grid32.n_faces());
        assert_relative_eq!(r2.total_measure(), 1.0, max_relative = 1e-12);
        assert!(quad_refine(&uniform_box_mesh([(0.0, 1.0); 3], [1; 3]).unwrap()).is_err());
    }

    #[test]
    fn single_triangle_refinement() {
        let m = SimplicialMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [2.0, 0.3, 0.0], [0.4, 1.7, 0.0]],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let r = quad_refine(&m).unwrap();
        assert_eq!(r.n_cells(), 4);
        let parent = m.geometry(0).volume;
        let children: f64 = (0..4).map(|c| r.geometry(c).volume).sum();
        assert!((parent - children).abs() <= 1e-14);
        for c in 0..4 {
            assert_relative_eq!(r.geometry(c).volume, parent / 4.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn refinement_has_no_hanging_vertices() {
        let base = uniform_rectangle_mesh((0.0, 2.0), (0.0, 1.0), 3, 2, Pattern::Crisscross).unwrap();
        let r = quad_refine(&base).unwrap();
        // conformity: every face is shared by at most two cells and the
        // boundary faces cover exactly the domain perimeter
        let perimeter: f64 = r.faces().iter().filter(|f| f.is_boundary()).map(|f| f.measure).sum();
        assert_relative_eq!(perimeter, 6.0, max_relative = 1e-12);
        for f in r.faces() {
            for &v in &f.vertices[..2] {
                for c in f.cells() {
                    assert!(r.cell(c).contains(&v));
                }
            }
        }
    }

    #[test]
    fn reference_geometry() {
        let g = CellGeometry::from_points(2, &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        assert_relative_eq!(g.volume, 0.5);
        assert_relative_eq!(g.grad_lambda[0][0], -1.0);
        assert_relative_eq!(g.grad_lambda[0][1], -1.0);
        let g = CellGeometry::from_points(
            3,
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        )
        .unwrap();
        assert_relative_eq!(g.volume, 1.0 / 6.0, max_relative = 1e-15);
        assert!(CellGeometry::from_points(2, &[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn degenerate_cell_reported_with_id() {
        let err = SimplicialMesh::new(
            2,
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0]],
            vec![vec![0, 1, 2], vec![0, 1, 3]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateCell { cell: 1, .. }));
    }

    #[test]
    fn barycentric_gradients_are_dual_to_vertices() {
        let m = uniform_box_mesh([(0.0, 1.0), (0.0, 2.0), (-1.0, 0.5)], [2, 3, 1]).unwrap();
        for c in 0..m.n_cells() {
            let g = m.geometry(c);
            let pts = m.cell_points(c);
            for i in 0..4 {
                for j in 0..4 {
                    // λ_i(x_j) - λ_i(x_0) = ∇λ_i · (x_j - x_0)
                    let d = linalg::dot(&g.grad_lambda[i], &linalg::sub(&pts[j], &pts[0]));
                    let expected = f64::from(u8::from(i == j)) - f64::from(u8::from(i == 0));
                    assert!((d - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn interior_normals_point_out_of_owner() {
        let m = unit_square(3, Pattern::Crisscross);
        for f in m.faces() {
            let g = m.geometry(f.owner);
            let outward = linalg::sub(&f.barycenter, &g.barycenter);
            assert!(linalg::dot(&outward, &f.normal) > 0.0);
            if let Some(nb) = f.neighbor {
                let inward = linalg::sub(&f.barycenter, &m.geometry(nb).barycenter);
                assert!(linalg::dot(&inward, &f.normal) < 0.0);
            }
        }
    }

    #[test]
    fn edge_tangents_follow_index_order() {
        let m = unit_square(2, Pattern::RightDiagonal);
        for e in m.edges() {
            assert!(e.vertices[0] < e.vertices[1]);
            let t = linalg::sub(m.vertex(e.vertices[1]), m.vertex(e.vertices[0]));
            assert_eq!(t, e.tangent);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gradients_sum_to_zero(pts in proptest::collection::vec(-3.0f64..3.0, 9)) {
                let p: Vec<Point> = (0..3).map(|i| [pts[3 * i], pts[3 * i + 1], 0.0]).collect();
                if let Ok(g) = CellGeometry::from_points(2, &p) {
                    prop_assume!(g.volume > 1e-3);
                    let s = linalg::add(&linalg::add(&g.grad_lambda[0], &g.grad_lambda[1]), &g.grad_lambda[2]);
                    let scale: f64 = g.grad_lambda.iter().map(linalg::norm).fold(0.0, f64::max);
                    prop_assert!(linalg::norm(&s) <= 1e-13 * scale.max(1.0));
                }
            }

            #[test]
            fn volume_additivity(nx in 1usize..7, ny in 1usize..7, criss in any::<bool>(), w in 0.5f64..3.0) {
                let p = if criss { Pattern::Crisscross } else { Pattern::RightDiagonal };
                let m = uniform_rectangle_mesh((-1.0, -1.0 + w), (0.0, 2.0), nx, ny, p).unwrap();
                prop_assert!((m.total_measure() - 2.0 * w).abs() <= 1e-12 * 2.0 * w);
                for c in 0..m.n_cells() {
                    prop_assert!(m.geometry(c).volume > 0.0);
                }
            }
        }
    }
}
