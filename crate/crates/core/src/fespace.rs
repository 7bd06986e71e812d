//! Discrete spaces: vector P1, normal face bubbles, P0 pressure and the
//! lowest-order Raviart–Thomas space used to represent BDM images of bubbles.
//!
//! Coefficient layouts (always over *all* mesh entities, boundary included):
//! - `VectorP1`: `dim` values per vertex, vertex-major (`dim * v + k`);
//! - `BrBubble`: one value per face, the coefficient of `φ_F n_F`;
//! - `BrFull`: the `VectorP1` block followed by the `BrBubble` block;
//! - `P0Pressure`: one value per cell; `P0Vector`: `dim` values per cell;
//! - `Rt0`: one value per face, the coefficient of the flux-normalized `φ_F^RT`.
//!
//! Solvers only carry unknowns for interior vertices and faces; the mapping
//! between the two numberings is [`DofLayout`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Point};
use crate::mesh::SimplicialMesh;
use crate::quadrature::QuadratureRule;

/// `Π_h(φ_F n_F) = bubble_interpolation_factor(d) · |F| · φ_F^RT`.
///
/// The factor is `∫_F φ_F / |F|`, i.e. `1/6` on segments and `1/60` on
/// triangles, since the BDM interpolant keeps the face moments of the normal
/// component and `φ_F` projects onto a constant over `F`.
pub fn bubble_interpolation_factor(dim: usize) -> f64 {
    match dim {
        2 => 1.0 / 6.0,
        3 => 1.0 / 60.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Index maps from mesh entities to unknowns of the reduced BR system.
#[derive(Clone, Debug)]
pub struct DofLayout {
    dim: usize,
    vertex_index: Vec<Option<usize>>,
    face_index: Vec<Option<usize>>,
    interior_vertices: Vec<usize>,
    interior_faces: Vec<usize>,
    n_cells: usize,
}

impl DofLayout {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let mut vertex_index = vec![None; mesh.n_vertices()];
        let mut interior_vertices = Vec::new();
        for (v, slot) in vertex_index.iter_mut().enumerate() {
            if !mesh.is_boundary_vertex(v) {
                *slot = Some(interior_vertices.len());
                interior_vertices.push(v);
            }
        }
        let mut face_index = vec![None; mesh.n_faces()];
        let mut interior_faces = Vec::new();
        for (f, slot) in face_index.iter_mut().enumerate() {
            if !mesh.face(f).is_boundary() {
                *slot = Some(interior_faces.len());
                interior_faces.push(f);
            }
        }
        DofLayout {
            dim: mesh.dim(),
            vertex_index,
            face_index,
            interior_vertices,
            interior_faces,
            n_cells: mesh.n_cells(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N_v`, the number of interior vertices.
    pub fn n_interior_vertices(&self) -> usize {
        self.interior_vertices.len()
    }

    /// `N_f`, the number of bubble unknowns (interior faces).
    pub fn n_bubble(&self) -> usize {
        self.interior_faces.len()
    }

    /// `d · N_v`.
    pub fn n_linear(&self) -> usize {
        self.dim * self.interior_vertices.len()
    }

    /// `N_t`.
    pub fn n_pressure(&self) -> usize {
        self.n_cells
    }

    pub fn bubble_offset(&self) -> usize {
        0
    }

    pub fn linear_offset(&self) -> usize {
        self.n_bubble()
    }

    pub fn pressure_offset(&self) -> usize {
        self.n_bubble() + self.n_linear()
    }

    /// Size of the full (bubble, linear, pressure) system.
    pub fn n_full(&self) -> usize {
        self.pressure_offset() + self.n_pressure()
    }

    /// Size of the condensed (linear, pressure) system, `d·N_v + N_t`.
    pub fn n_condensed(&self) -> usize {
        self.n_linear() + self.n_pressure()
    }

    /// Index of component `k` at vertex `v` within the linear block.
    pub fn linear_dof(&self, v: usize, k: usize) -> Option<usize> {
        self.vertex_index[v].map(|i| self.dim * i + k)
    }

    pub fn bubble_dof(&self, f: usize) -> Option<usize> {
        self.face_index[f]
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    pub fn interior_faces(&self) -> &[usize] {
        &self.interior_faces
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    VectorP1,
    BrBubble,
    BrFull,
    P0Pressure,
    P0Vector,
    Rt0,
}

impl Space {
    pub fn len(self, mesh: &SimplicialMesh) -> usize {
        let d = mesh.dim();
        match self {
            Space::VectorP1 => d * mesh.n_vertices(),
            Space::BrBubble | Space::Rt0 => mesh.n_faces(),
            Space::BrFull => d * mesh.n_vertices() + mesh.n_faces(),
            Space::P0Pressure => mesh.n_cells(),
            Space::P0Vector => d * mesh.n_cells(),
        }
    }
}

/// Value and gradient of a field at a point; `gradient[k][m] = ∂_m v_k`.
/// Scalar fields use component 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Evaluation {
    pub value: Point,
    pub gradient: [[f64; 3]; 3],
}

impl Evaluation {
    pub fn divergence(&self) -> f64 {
        self.gradient[0][0] + self.gradient[1][1] + self.gradient[2][2]
    }
}

/// Coefficient vector tagged with its space.
#[derive(Clone, Debug)]
pub struct FeField<'m> {
    mesh: &'m SimplicialMesh,
    space: Space,
    coeffs: Vec<f64>,
}

impl<'m> FeField<'m> {
    pub fn zeros(mesh: &'m SimplicialMesh, space: Space) -> Self {
        FeField {
            mesh,
            space,
            coeffs: vec![0.0; space.len(mesh)],
        }
    }

    pub fn new(mesh: &'m SimplicialMesh, space: Space, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.len(mesh) {
            return Err(Error::InvalidArgument(format!(
                "{space:?} field needs {} coefficients, got {}",
                space.len(mesh),
                coeffs.len()
            )));
        }
        Ok(FeField { mesh, space, coeffs })
    }

    pub fn mesh(&self) -> &'m SimplicialMesh {
        self.mesh
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Assembles a BR field from its linear and bubble parts.
    pub fn from_parts(linear: &FeField<'m>, bubble: &FeField<'m>) -> Result<Self> {
        if linear.space != Space::VectorP1 || bubble.space != Space::BrBubble {
            return Err(Error::InvalidArgument("from_parts expects (VectorP1, BrBubble)".into()));
        }
        let mut coeffs = linear.coeffs.clone();
        coeffs.extend_from_slice(&bubble.coeffs);
        FeField::new(linear.mesh, Space::BrFull, coeffs)
    }

    /// Unique decomposition `v = v_l + v_b` of a BR field.
    pub fn split(&self) -> Result<(FeField<'m>, FeField<'m>)> {
        if self.space != Space::BrFull {
            return Err(Error::InvalidArgument("split expects a BrFull field".into()));
        }
        let nl = Space::VectorP1.len(self.mesh);
        Ok((
            FeField::new(self.mesh, Space::VectorP1, self.coeffs[..nl].to_vec())?,
            FeField::new(self.mesh, Space::BrBubble, self.coeffs[nl..].to_vec())?,
        ))
    }

    /// Linear part of a `VectorP1` or `BrFull` field.
    pub fn linear_part(&self) -> &[f64] {
        match self.space {
            Space::VectorP1 | Space::BrFull => &self.coeffs[..Space::VectorP1.len(self.mesh)],
            _ => &[],
        }
    }

    /// Bubble part of a `BrBubble` or `BrFull` field.
    pub fn bubble_part(&self) -> &[f64] {
        match self.space {
            Space::BrBubble => &self.coeffs,
            Space::BrFull => &self.coeffs[Space::VectorP1.len(self.mesh)..],
            _ => &[],
        }
    }

    pub fn vertex_value(&self, v: usize) -> Point {
        let d = self.mesh.dim();
        let lin = self.linear_part();
        let mut out = [0.0; 3];
        out[..d].copy_from_slice(&lin[d * v..d * v + d]);
        out
    }

    /// Evaluates the field in cell `c` at barycentric coordinates `bary`.
    pub fn evaluate(&self, c: usize, bary: &[f64]) -> Result<Evaluation> {
        let mesh = self.mesh;
        if c >= mesh.n_cells() {
            return Err(Error::InvalidCell(c));
        }
        let d = mesh.dim();
        let mut ev = Evaluation::default();
        match self.space {
            Space::P0Pressure => ev.value[0] = self.coeffs[c],
            Space::P0Vector => ev.value[..d].copy_from_slice(&self.coeffs[d * c..d * c + d]),
            Space::Rt0 => {
                let x = mesh.map_to_physical(c, bary);
                for (i, &f) in mesh.cell_faces(c).iter().enumerate() {
                    let (val, div) = rt_basis(mesh, c, i, &x);
                    linalg::axpy(&mut ev.value, self.coeffs[f], &val);
                    let s = self.coeffs[f] * div / d as f64;
                    for k in 0..d {
                        ev.gradient[k][k] += s;
                    }
                }
            }
            Space::VectorP1 | Space::BrBubble | Space::BrFull => {
                let geo = mesh.geometry(c);
                let lin = self.linear_part();
                if !lin.is_empty() {
                    for (i, &v) in mesh.cell(c).iter().enumerate() {
                        for k in 0..d {
                            let a = lin[d * v + k];
                            ev.value[k] += a * bary[i];
                            for m in 0..d {
                                ev.gradient[k][m] += a * geo.grad_lambda[i][m];
                            }
                        }
                    }
                }
                let bub = self.bubble_part();
                if !bub.is_empty() {
                    for (i, &f) in mesh.cell_faces(c).iter().enumerate() {
                        let a = bub[f];
                        if a == 0.0 {
                            continue;
                        }
                        let n = mesh.face(f).normal;
                        let phi = bubble_value(d, i, bary);
                        let grad = bubble_gradient(d, &geo.grad_lambda, i, bary);
                        for k in 0..d {
                            ev.value[k] += a * phi * n[k];
                            for m in 0..d {
                                ev.gradient[k][m] += a * n[k] * grad[m];
                            }
                        }
                    }
                }
            }
        }
        Ok(ev)
    }

    /// `Σ_T p_T |T| / |Ω|` for a P0 pressure.
    pub fn volume_mean(&self) -> f64 {
        assert_eq!(self.space, Space::P0Pressure);
        let m = self.mesh;
        let s: f64 = (0..m.n_cells()).map(|c| self.coeffs[c] * m.geometry(c).volume).sum();
        s / m.total_measure()
    }

    /// Shifts a P0 pressure to zero volume-weighted mean.
    pub fn remove_mean(&mut self) {
        let mean = self.volume_mean();
        self.coeffs.iter_mut().for_each(|p| *p -= mean);
    }
}

/// `φ_F` for the face opposite local vertex `i`: the product of the other
/// barycentric coordinates.
pub fn bubble_value(dim: usize, i: usize, bary: &[f64]) -> f64 {
    (0..=dim).filter(|&j| j != i).map(|j| bary[j]).product()
}

pub fn bubble_gradient(dim: usize, grad_lambda: &[Point; 4], i: usize, bary: &[f64]) -> Point {
    let mut g = [0.0; 3];
    for m in (0..=dim).filter(|&m| m != i) {
        let coef: f64 = (0..=dim).filter(|&j| j != i && j != m).map(|j| bary[j]).product();
        linalg::axpy(&mut g, coef, &grad_lambda[m]);
    }
    g
}

/// Value at physical point `x` and divergence of the global RT0 basis
/// function of local face `i` restricted to cell `c`. The basis has unit
/// flux through its face in the direction of the stored face normal.
pub fn rt_basis(mesh: &SimplicialMesh, c: usize, i: usize, x: &Point) -> (Point, f64) {
    let d = mesh.dim() as f64;
    let geo = mesh.geometry(c);
    let f = mesh.cell_faces(c)[i];
    let s = mesh.face_sign(f, c);
    let xi = mesh.vertex(mesh.cell(c)[i]);
    let val = linalg::scale(&linalg::sub(x, xi), s / (d * geo.volume));
    (val, s * d / (d * geo.volume))
}

/// Vertex interpolant of `g` (boundary vertices included).
pub fn nodal_interpolate<'m>(mesh: &'m SimplicialMesh, g: impl Fn(&Point) -> Point) -> FeField<'m> {
    let d = mesh.dim();
    let mut coeffs = Vec::with_capacity(d * mesh.n_vertices());
    for x in mesh.vertices() {
        let v = g(x);
        coeffs.extend_from_slice(&v[..d]);
    }
    FeField {
        mesh,
        space: Space::VectorP1,
        coeffs,
    }
}

/// `Π_h v = v_l + Π_h v_b`, with the bubble part represented in RT0.
#[derive(Clone, Debug)]
pub struct BdmImage<'m> {
    pub linear: FeField<'m>,
    pub rt: FeField<'m>,
}

impl BdmImage<'_> {
    pub fn evaluate(&self, c: usize, bary: &[f64]) -> Result<Evaluation> {
        let a = self.linear.evaluate(c, bary)?;
        let b = self.rt.evaluate(c, bary)?;
        let mut out = a;
        for k in 0..3 {
            out.value[k] += b.value[k];
            for m in 0..3 {
                out.gradient[k][m] += b.gradient[k][m];
            }
        }
        Ok(out)
    }

    /// Constant divergence of `Π_h v` on cell `c`.
    pub fn cell_divergence(&self, c: usize) -> f64 {
        let bary = vec![1.0 / (self.linear.mesh.dim() + 1) as f64; self.linear.mesh.dim() + 1];
        self.evaluate(c, &bary).map(|e| e.divergence()).unwrap_or(f64::NAN)
    }
}

/// Canonical BDM1 interpolation of a BR field.
pub fn bdm_interpolate<'m>(v: &FeField<'m>) -> Result<BdmImage<'m>> {
    let (linear, bubble) = v.split()?;
    let mesh = v.mesh;
    let c = bubble_interpolation_factor(mesh.dim());
    let rt: Vec<f64> = bubble
        .coeffs
        .iter()
        .zip(mesh.faces())
        .map(|(a, f)| c * f.measure * a)
        .collect();
    Ok(BdmImage {
        linear,
        rt: FeField::new(mesh, Space::Rt0, rt)?,
    })
}

/// Cellwise L² projection onto piecewise constants of a vector function,
/// using the degree-4 rule.
pub fn p0_project<'m>(mesh: &'m SimplicialMesh, w: impl Fn(&Point) -> Point) -> FeField<'m> {
    let d = mesh.dim();
    let rule = QuadratureRule::degree4(d);
    let mut coeffs = vec![0.0; d * mesh.n_cells()];
    for c in 0..mesh.n_cells() {
        let mut acc = [0.0; 3];
        for (bary, wq) in rule.iter() {
            let x = mesh.map_to_physical(c, bary);
            linalg::axpy(&mut acc, wq, &w(&x));
        }
        coeffs[d * c..d * c + d].copy_from_slice(&acc[..d]);
    }
    FeField {
        mesh,
        space: Space::P0Vector,
        coeffs,
    }
}

/// Cellwise mean of a discrete velocity field; exact for BR fields.
pub fn p0_project_field<'m>(field: &FeField<'m>) -> Result<FeField<'m>> {
    let mesh = field.mesh;
    let d = mesh.dim();
    let rule = QuadratureRule::collapsed_gauss(d, d);
    let mut coeffs = vec![0.0; d * mesh.n_cells()];
    for c in 0..mesh.n_cells() {
        let mut acc = [0.0; 3];
        for (bary, wq) in rule.iter() {
            let e = field.evaluate(c, bary)?;
            linalg::axpy(&mut acc, wq, &e.value);
        }
        coeffs[d * c..d * c + d].copy_from_slice(&acc[..d]);
    }
    FeField::new(mesh, Space::P0Vector, coeffs)
}

pub type VectorFn = Arc<dyn Fn(&Point, f64) -> Point + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(&Point, f64) -> [[f64; 3]; 3] + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;

/// Analytic velocity, velocity gradient, pressure and forcing, all functions
/// of `(x, t)`. Boundary data is the trace of the velocity.
#[derive(Clone)]
pub struct ExactSolution {
    pub velocity: VectorFn,
    pub gradient: TensorFn,
    pub pressure: ScalarFn,
    pub forcing: VectorFn,
}

impl ExactSolution {
    pub fn boundary(&self) -> VectorFn {
        self.velocity.clone()
    }
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ExactSolution { .. }")
    }
}
