//! Bilinear and linear forms on the Bernardi–Raugel space.
//!
//! Every assembly routine works in the *extended* numbering that covers all
//! mesh entities: linear dof `dim * v + k` for every vertex `v`, bubble dof
//! `f` for every face, pressure dof `c` for every cell. Rows are test
//! functions and columns trial functions. Restriction to interior unknowns
//! and the Dirichlet lift happen in [`crate::schemes`].

use crate::error::{Error, Result};
use crate::fespace::{bubble_gradient, bubble_interpolation_factor, bubble_value, FeField, Space};
use crate::linalg::{self, factorial, Point};
use crate::mesh::{local_edges, CellGeometry, SimplicialMesh};
use crate::quadrature::{barycentric_monomial_integral, QuadratureRule};
use crate::sparse::{CsrMatrix, Triplets};

/// Velocity dof in the extended numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dof {
    Linear(usize),
    Bubble(usize),
}

/// The four velocity blocks of a form on `V_h × V_h`.
#[derive(Clone, Debug)]
pub struct BrBlocks {
    pub bb: CsrMatrix,
    pub bl: CsrMatrix,
    pub lb: CsrMatrix,
    pub ll: CsrMatrix,
}

impl BrBlocks {
    pub fn zeros(mesh: &SimplicialMesh) -> Self {
        let nl = mesh.dim() * mesh.n_vertices();
        let nf = mesh.n_faces();
        BrBlocks {
            bb: CsrMatrix::zeros(nf, nf),
            bl: CsrMatrix::zeros(nf, nl),
            lb: CsrMatrix::zeros(nl, nf),
            ll: CsrMatrix::zeros(nl, nl),
        }
    }

    /// `self + s * other`, block by block.
    pub fn add_scaled(&self, s: f64, other: &BrBlocks) -> BrBlocks {
        BrBlocks {
            bb: self.bb.add_scaled(s, &other.bb),
            bl: self.bl.add_scaled(s, &other.bl),
            lb: self.lb.add_scaled(s, &other.lb),
            ll: self.ll.add_scaled(s, &other.ll),
        }
    }

    pub fn scaled(&self, s: f64) -> BrBlocks {
        BrBlocks {
            bb: self.bb.scaled(s),
            bl: self.bl.scaled(s),
            lb: self.lb.scaled(s),
            ll: self.ll.scaled(s),
        }
    }

    /// `(v, A u)` for BR coefficient vectors in the `BrFull` layout.
    pub fn bilinear(&self, v: &[f64], u: &[f64]) -> f64 {
        let nl = self.ll.nrows();
        let (ul, ub) = u.split_at(nl);
        let (vl, vb) = v.split_at(nl);
        let dot = |a: &[f64], b: Vec<f64>| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        dot(vl, self.ll.mul_vec(ul)) + dot(vl, self.lb.mul_vec(ub)) + dot(vb, self.bl.mul_vec(ul)) + dot(vb, self.bb.mul_vec(ub))
    }
}

struct BlockBuilder {
    bb: Triplets,
    bl: Triplets,
    lb: Triplets,
    ll: Triplets,
}

impl BlockBuilder {
    fn new(mesh: &SimplicialMesh) -> Self {
        let nl = mesh.dim() * mesh.n_vertices();
        let nf = mesh.n_faces();
        BlockBuilder {
            bb: Triplets::new(nf, nf),
            bl: Triplets::new(nf, nl),
            lb: Triplets::new(nl, nf),
            ll: Triplets::new(nl, nl),
        }
    }

    #[inline]
    fn push(&mut self, row: Dof, col: Dof, v: f64) {
        match (row, col) {
            (Dof::Bubble(i), Dof::Bubble(j)) => self.bb.push(i, j, v),
            (Dof::Bubble(i), Dof::Linear(j)) => self.bl.push(i, j, v),
            (Dof::Linear(i), Dof::Bubble(j)) => self.lb.push(i, j, v),
            (Dof::Linear(i), Dof::Linear(j)) => self.ll.push(i, j, v),
        }
    }

    fn finish(self) -> BrBlocks {
        BrBlocks {
            bb: self.bb.to_csr(),
            bl: self.bl.to_csr(),
            lb: self.lb.to_csr(),
            ll: self.ll.to_csr(),
        }
    }
}

fn checked_geometry(mesh: &SimplicialMesh, c: usize) -> Result<&CellGeometry> {
    let geo = mesh.cell_geometry(c)?;
    if !(geo.volume > 0.0) {
        return Err(Error::DegenerateCell { cell: c, measure: geo.volume });
    }
    Ok(geo)
}

/// `∫_T ∇(Π_{a∈A} λ_a) · ∇(Π_{b∈B} λ_b)` for local index sets `A`, `B`.
fn grad_product_integral(dim: usize, geo: &CellGeometry, a_set: &[usize], b_set: &[usize]) -> f64 {
    let mut total = 0.0;
    for (ia, &a) in a_set.iter().enumerate() {
        for (ib, &b) in b_set.iter().enumerate() {
            let mut exps = [0u32; 4];
            for (k, &x) in a_set.iter().enumerate() {
                if k != ia {
                    exps[x] += 1;
                }
            }
            for (k, &x) in b_set.iter().enumerate() {
                if k != ib {
                    exps[x] += 1;
                }
            }
            let g = linalg::dot(&geo.grad_lambda[a], &geo.grad_lambda[b]);
            total += g * barycentric_monomial_integral(dim, &exps[..=dim], geo.volume);
        }
    }
    total
}

/// Local vertices of the face opposite local vertex `i`.
fn face_set(dim: usize, i: usize) -> Vec<usize> {
    (0..=dim).filter(|&j| j != i).collect()
}

/// `∫_T φ_F` for a face bubble: `d!/(2d-1)! |T|`.
fn bubble_mean_factor(dim: usize) -> f64 {
    factorial(dim as u32) / factorial(2 * dim as u32 - 1)
}

/// Viscous couplings of the modified form `a_h`: the vector P1 stiffness and
/// the mixed bubble/linear blocks. The bubble block is left empty; see
/// [`assemble_bubble_diag`] and [`assemble_bubble_full`].
pub fn assemble_grad_grad(mesh: &SimplicialMesh) -> Result<BrBlocks> {
    let d = mesh.dim();
    let mut out = BlockBuilder::new(mesh);
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        let verts = mesh.cell(c);
        for (i, &vi) in verts.iter().enumerate() {
            for (j, &vj) in verts.iter().enumerate() {
                let a = geo.volume * linalg::dot(&geo.grad_lambda[i], &geo.grad_lambda[j]);
                for k in 0..d {
                    out.push(Dof::Linear(d * vi + k), Dof::Linear(d * vj + k), a);
                }
            }
        }
        for (g, &f) in mesh.cell_faces(c).iter().enumerate() {
            let n = mesh.face(f).normal;
            let fs = face_set(d, g);
            for (j, &vj) in verts.iter().enumerate() {
                let a = grad_product_integral(d, geo, &fs, &[j]);
                for k in 0..d {
                    out.push(Dof::Bubble(f), Dof::Linear(d * vj + k), a * n[k]);
                    out.push(Dof::Linear(d * vj + k), Dof::Bubble(f), a * n[k]);
                }
            }
        }
    }
    Ok(out.finish())
}

/// The diagonal form `a_h^b`: `(∇(φ_F n_F), ∇(φ_F n_F))` for every face.
pub fn assemble_bubble_diag(mesh: &SimplicialMesh) -> Result<CsrMatrix> {
    let d = mesh.dim();
    let mut diag = vec![0.0; mesh.n_faces()];
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        for (g, &f) in mesh.cell_faces(c).iter().enumerate() {
            let fs = face_set(d, g);
            diag[f] += grad_product_integral(d, geo, &fs, &fs);
        }
    }
    Ok(CsrMatrix::from_diagonal(&diag))
}

/// The full bubble block `(∇(φ_F n_F), ∇(φ_G n_G))` of the unmodified form.
pub fn assemble_bubble_full(mesh: &SimplicialMesh) -> Result<CsrMatrix> {
    let d = mesh.dim();
    let mut t = Triplets::new(mesh.n_faces(), mesh.n_faces());
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        let faces = mesh.cell_faces(c);
        for (g, &fg) in faces.iter().enumerate() {
            for (h, &fh) in faces.iter().enumerate() {
                let nn = linalg::dot(&mesh.face(fg).normal, &mesh.face(fh).normal);
                let a = grad_product_integral(d, geo, &face_set(d, g), &face_set(d, h));
                t.push(fg, fh, nn * a);
            }
        }
    }
    Ok(t.to_csr())
}

/// Divergence couplings `-(∇·v, q)`.
#[derive(Clone, Debug)]
pub struct DivBlocks {
    /// Rows bubble, columns pressure.
    pub bp: CsrMatrix,
    /// Rows linear, columns pressure.
    pub lp: CsrMatrix,
}

pub fn assemble_div(mesh: &SimplicialMesh) -> Result<DivBlocks> {
    let d = mesh.dim();
    let nl = d * mesh.n_vertices();
    let mut bp = Triplets::new(mesh.n_faces(), mesh.n_cells());
    let mut lp = Triplets::new(nl, mesh.n_cells());
    let kappa = bubble_mean_factor(d);
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        for (i, &v) in mesh.cell(c).iter().enumerate() {
            for k in 0..d {
                lp.push(d * v + k, c, -geo.volume * geo.grad_lambda[i][k]);
            }
        }
        for (g, &f) in mesh.cell_faces(c).iter().enumerate() {
            // Σ_{a∈F} ∇λ_a = -∇λ_g
            let grad = linalg::scale(&geo.grad_lambda[g], -kappa * geo.volume);
            bp.push(f, c, -linalg::dot(&mesh.face(f).normal, &grad));
        }
    }
    Ok(DivBlocks {
        bp: bp.to_csr(),
        lp: lp.to_csr(),
    })
}

/// Bernoulli function `B(s) = s / (e^s - 1)`, `B(0) = 1`.
///
/// Uses a Taylor series near zero, `expm1` for moderate arguments and the
/// asymptotic forms `s e^{-s}` and `-s (1 + e^s)` beyond `|s| = 40`, so it
/// neither overflows nor loses accuracy for any finite input.
pub fn bernoulli(s: f64) -> Result<f64> {
    if s.is_nan() {
        return Err(Error::InvalidArgument("Bernoulli function of NaN".into()));
    }
    let a = s.abs();
    Ok(if a < 1e-4 {
        let s2 = s * s;
        1.0 - 0.5 * s + s2 / 12.0 - s2 * s2 / 720.0
    } else if s > 40.0 {
        if s.is_infinite() {
            0.0
        } else {
            s * (-s).exp()
        }
    } else if s < -40.0 {
        -s * (1.0 + s.exp())
    } else {
        s / s.exp_m1()
    })
}

/// Cellwise constant convection field with the artificial diffusion `ε`.
#[derive(Clone, Debug)]
pub struct ConvectionField {
    values: Vec<Point>,
    eps: f64,
}

impl ConvectionField {
    pub fn from_cells(values: Vec<Point>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!("EAFE diffusion must be positive, got {eps}")));
        }
        if let Some(c) = values.iter().position(|b| b.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite convection field in cell {c}")));
        }
        Ok(ConvectionField { values, eps })
    }

    pub fn constant(mesh: &SimplicialMesh, b: Point, eps: f64) -> Result<Self> {
        Self::from_cells(vec![b; mesh.n_cells()], eps)
    }

    /// `P_h v^l`: the cell average of the linear part of `v`.
    pub fn cell_average_of_linear(v: &FeField, eps: f64) -> Result<Self> {
        let mesh = v.mesh();
        let d = mesh.dim();
        let lin = v.linear_part();
        if lin.is_empty() {
            return Err(Error::InvalidArgument("convection field needs a velocity with a linear part".into()));
        }
        let values = (0..mesh.n_cells())
            .map(|c| {
                let mut b = [0.0; 3];
                for &vi in mesh.cell(c) {
                    for k in 0..d {
                        b[k] += lin[d * vi + k];
                    }
                }
                linalg::scale(&b, 1.0 / (d + 1) as f64)
            })
            .collect();
        Self::from_cells(values, eps)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn value(&self, c: usize) -> &Point {
        &self.values[c]
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }
}

/// How the diagonal of the local EAFE matrix is completed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EafeDiagonal {
    /// Row sums vanish, so constants are annihilated. This is what the
    /// edge-average definition of the form produces.
    #[default]
    RowSum,
    /// Column sums vanish: `b(λ_i, λ_i) = -Σ_{j≠i} b(λ_i, λ_j)`.
    ColumnSum,
}

impl EafeDiagonal {
    pub fn name(self) -> &'static str {
        match self {
            EafeDiagonal::RowSum => "row-sum",
            EafeDiagonal::ColumnSum => "column-sum",
        }
    }
}

impl std::fmt::Display for EafeDiagonal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EafeDiagonal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row-sum" => Ok(EafeDiagonal::RowSum),
            "column-sum" => Ok(EafeDiagonal::ColumnSum),
            other => Err(Error::InvalidArgument(format!("unknown EAFE diagonal '{other}' (row-sum or column-sum)"))),
        }
    }
}

/// Local EAFE matrix on cell `c`, `m[i][j] = b_{h,T}(λ_j, λ_i)`.
pub fn eafe_local(
    mesh: &SimplicialMesh,
    c: usize,
    b: &Point,
    eps: f64,
    diagonal: EafeDiagonal,
) -> Result<[[f64; 4]; 4]> {
    let d = mesh.dim();
    let geo = checked_geometry(mesh, c)?;
    let verts = mesh.cell(c);
    let mut m = [[0.0; 4]; 4];
    for &(i, j) in local_edges(d) {
        let a = geo.volume * linalg::dot(&geo.grad_lambda[i], &geo.grad_lambda[j]);
        let tau = linalg::sub(mesh.vertex(verts[j]), mesh.vertex(verts[i]));
        let s = linalg::dot(b, &tau) / eps;
        m[i][j] = eps * a * bernoulli(s)?;
        m[j][i] = eps * a * bernoulli(-s)?;
    }
    for i in 0..=d {
        m[i][i] = -(0..=d)
            .filter(|&j| j != i)
            .map(|j| match diagonal {
                EafeDiagonal::RowSum => m[i][j],
                EafeDiagonal::ColumnSum => m[j][i],
            })
            .sum::<f64>();
    }
    Ok(m)
}

/// `b_h^EAFE` on the vector P1 space, the scalar matrix acting on each
/// velocity component.
pub fn assemble_eafe(mesh: &SimplicialMesh, conv: &ConvectionField, diagonal: EafeDiagonal) -> Result<CsrMatrix> {
    let d = mesh.dim();
    let nl = d * mesh.n_vertices();
    let mut t = Triplets::new(nl, nl);
    for c in 0..mesh.n_cells() {
        let m = eafe_local(mesh, c, conv.value(c), conv.eps(), diagonal)?;
        let verts = mesh.cell(c);
        for (i, &vi) in verts.iter().enumerate() {
            for (j, &vj) in verts.iter().enumerate() {
                for k in 0..d {
                    t.push(d * vi + k, d * vj + k, m[i][j]);
                }
            }
        }
    }
    Ok(t.to_csr())
}

/// `∫_T φ^RT` for local face `i` of cell `c`, in the global face orientation.
fn rt_cell_integral(mesh: &SimplicialMesh, c: usize, i: usize) -> Point {
    let geo = mesh.geometry(c);
    let s = mesh.face_sign(mesh.cell_faces(c)[i], c);
    let xi = mesh.vertex(mesh.cell(c)[i]);
    linalg::scale(&linalg::sub(&geo.barycenter, xi), s / mesh.dim() as f64)
}

/// Stabilization `(b·∇v^l, Π_h w^b)`: rows bubble test, columns linear trial.
pub fn assemble_conv_stab(mesh: &SimplicialMesh, conv: &ConvectionField) -> Result<CsrMatrix> {
    let d = mesh.dim();
    let cd = bubble_interpolation_factor(d);
    let mut t = Triplets::new(mesh.n_faces(), d * mesh.n_vertices());
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        let b = conv.value(c);
        for (g, &f) in mesh.cell_faces(c).iter().enumerate() {
            let rt = rt_cell_integral(mesh, c, g);
            let scale = cd * mesh.face(f).measure;
            for (j, &vj) in mesh.cell(c).iter().enumerate() {
                let bg = linalg::dot(b, &geo.grad_lambda[j]);
                if bg == 0.0 {
                    continue;
                }
                for k in 0..d {
                    t.push(f, d * vj + k, scale * bg * rt[k]);
                }
            }
        }
    }
    Ok(t.to_csr())
}

/// Right-hand side blocks in the extended numbering.
#[derive(Clone, Debug)]
pub struct LoadVectors {
    /// One entry per face.
    pub bubble: Vec<f64>,
    /// `dim` entries per vertex.
    pub linear: Vec<f64>,
}

/// `(f, Π_h v)` when `postprocessed`, otherwise `(f, v)`; degree-4 quadrature.
pub fn assemble_load(mesh: &SimplicialMesh, f: &dyn Fn(&Point) -> Point, postprocessed: bool) -> Result<LoadVectors> {
    let d = mesh.dim();
    let rule = QuadratureRule::degree4(d);
    let cd = bubble_interpolation_factor(d);
    let mut bubble = vec![0.0; mesh.n_faces()];
    let mut linear = vec![0.0; d * mesh.n_vertices()];
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        let verts = mesh.cell(c);
        let faces = mesh.cell_faces(c);
        for (bary, w) in rule.iter() {
            let x = mesh.map_to_physical(c, bary);
            let fx = f(&x);
            let wv = w * geo.volume;
            for (i, &v) in verts.iter().enumerate() {
                for k in 0..d {
                    linear[d * v + k] += wv * fx[k] * bary[i];
                }
            }
            for (g, &fc) in faces.iter().enumerate() {
                let val = if postprocessed {
                    let (rt, _) = crate::fespace::rt_basis(mesh, c, g, &x);
                    linalg::scale(&rt, cd * mesh.face(fc).measure)
                } else {
                    linalg::scale(&mesh.face(fc).normal, bubble_value(d, g, bary))
                };
                bubble[fc] += wv * linalg::dot(&fx, &val);
            }
        }
    }
    Ok(LoadVectors { bubble, linear })
}

/// Lumped inner product `(u, v)_h` (or `(u, Π_h v)_h` when `postprocessed`)
/// from the face-barycenter rule. The bubble block is diagonal in both cases
/// and is assembled only on its diagonal.
pub fn assemble_lumped_mass(mesh: &SimplicialMesh, postprocessed: bool) -> Result<BrBlocks> {
    let d = mesh.dim();
    let df = d as f64;
    let cd = bubble_interpolation_factor(d);
    let bub_at_own = df.powi(-(d as i32));
    let mut out = BlockBuilder::new(mesh);
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        let w = geo.volume / (d + 1) as f64;
        let verts = mesh.cell(c);
        let faces = mesh.cell_faces(c);
        // λ_a(x_{F_i}) = 1/d for a ≠ i, 0 otherwise
        let lam = |a: usize, i: usize| if a == i { 0.0 } else { 1.0 / df };
        for (a, &va) in verts.iter().enumerate() {
            for (b, &vb) in verts.iter().enumerate() {
                let m: f64 = (0..=d).map(|i| lam(a, i) * lam(b, i)).sum::<f64>() * w;
                for k in 0..d {
                    out.push(Dof::Linear(d * va + k), Dof::Linear(d * vb + k), m);
                }
            }
        }
        for (g, &fg) in faces.iter().enumerate() {
            let n = mesh.face(fg).normal;
            // trial bubble against linear test: only the point x_{F_g} sees φ_G
            for (a, &va) in verts.iter().enumerate() {
                let m = w * bub_at_own * lam(a, g);
                for k in 0..d {
                    out.push(Dof::Linear(d * va + k), Dof::Bubble(fg), m * n[k]);
                }
            }
            if postprocessed {
                let scale = cd * mesh.face(fg).measure;
                let s = mesh.face_sign(fg, c);
                let xg = mesh.vertex(verts[g]);
                for (b, &vb) in verts.iter().enumerate() {
                    let mut acc = [0.0; 3];
                    for i in 0..=d {
                        let rt = linalg::scale(&linalg::sub(&geo.face_barycenters[i], xg), s / (df * geo.volume));
                        linalg::axpy(&mut acc, lam(b, i), &rt);
                    }
                    for k in 0..d {
                        out.push(Dof::Bubble(fg), Dof::Linear(d * vb + k), w * scale * acc[k]);
                    }
                }
                // n_F · φ^RT_F(x_F) = 1/|F|
                out.push(Dof::Bubble(fg), Dof::Bubble(fg), w * cd * bub_at_own);
            } else {
                for (b, &vb) in verts.iter().enumerate() {
                    let m = w * bub_at_own * lam(b, g);
                    for k in 0..d {
                        out.push(Dof::Bubble(fg), Dof::Linear(d * vb + k), m * n[k]);
                    }
                }
                out.push(Dof::Bubble(fg), Dof::Bubble(fg), w * bub_at_own * bub_at_own);
            }
        }
    }
    Ok(out.finish())
}

/// Local BR basis on one cell at one point: the `dim·(dim+1)` linear
/// functions followed by the `dim+1` bubbles.
struct PointBasis {
    dofs: Vec<Dof>,
    values: Vec<Point>,
    grads: Vec<[[f64; 3]; 3]>,
    /// Values of `Π_h` applied to each basis function.
    tests: Vec<Point>,
}

fn point_basis(mesh: &SimplicialMesh, c: usize, bary: &[f64]) -> PointBasis {
    let d = mesh.dim();
    let geo = mesh.geometry(c);
    let cd = bubble_interpolation_factor(d);
    let x = mesh.map_to_physical(c, bary);
    let n = d * (d + 1) + d + 1;
    let mut pb = PointBasis {
        dofs: Vec::with_capacity(n),
        values: Vec::with_capacity(n),
        grads: Vec::with_capacity(n),
        tests: Vec::with_capacity(n),
    };
    for (i, &v) in mesh.cell(c).iter().enumerate() {
        for k in 0..d {
            let mut val = [0.0; 3];
            val[k] = bary[i];
            let mut g = [[0.0; 3]; 3];
            g[k] = geo.grad_lambda[i];
            pb.dofs.push(Dof::Linear(d * v + k));
            pb.values.push(val);
            pb.grads.push(g);
            pb.tests.push(val);
        }
    }
    for (i, &f) in mesh.cell_faces(c).iter().enumerate() {
        let nrm = mesh.face(f).normal;
        let phi = bubble_value(d, i, bary);
        let gphi = bubble_gradient(d, &geo.grad_lambda, i, bary);
        let mut g = [[0.0; 3]; 3];
        for k in 0..d {
            g[k] = linalg::scale(&gphi, nrm[k]);
        }
        let (rt, _) = crate::fespace::rt_basis(mesh, c, i, &x);
        pb.dofs.push(Dof::Bubble(f));
        pb.values.push(linalg::scale(&nrm, phi));
        pb.grads.push(g);
        pb.tests.push(linalg::scale(&rt, cd * mesh.face(f).measure));
    }
    pb
}

/// Classical convection `(w·∇u, Π_h v)` with a BR convecting field `w`,
/// integrated exactly by a collapsed Gauss rule of degree `2·dim`.
pub fn assemble_classical_convection(mesh: &SimplicialMesh, w: &FeField) -> Result<BrBlocks> {
    if w.space() != Space::BrFull && w.space() != Space::VectorP1 {
        return Err(Error::InvalidArgument("convecting field must be a BR or P1 velocity".into()));
    }
    let d = mesh.dim();
    let rule = QuadratureRule::collapsed_gauss(d, 2 * d);
    let mut out = BlockBuilder::new(mesh);
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        let n = d * (d + 1) + d + 1;
        let mut local = vec![0.0; n * n];
        let mut dofs = Vec::new();
        for (bary, wq) in rule.iter() {
            let wv = w.evaluate(c, bary)?.value;
            let pb = point_basis(mesh, c, bary);
            for (j, g) in pb.grads.iter().enumerate() {
                // (w·∇) u_j
                let mut conv = [0.0; 3];
                for k in 0..d {
                    conv[k] = linalg::dot(&g[k], &wv);
                }
                for (i, t) in pb.tests.iter().enumerate() {
                    local[i * n + j] += wq * geo.volume * linalg::dot(&conv, t);
                }
            }
            dofs = pb.dofs;
        }
        for (i, &ri) in dofs.iter().enumerate() {
            for (j, &cj) in dofs.iter().enumerate() {
                out.push(ri, cj, local[i * n + j]);
            }
        }
    }
    Ok(out.finish())
}

/// Exact `(Π_h u, Π_h v)`.
pub fn assemble_bdm_mass(mesh: &SimplicialMesh) -> Result<BrBlocks> {
    let d = mesh.dim();
    let rule = QuadratureRule::collapsed_gauss(d, 2);
    let mut out = BlockBuilder::new(mesh);
    for c in 0..mesh.n_cells() {
        let geo = checked_geometry(mesh, c)?;
        let n = d * (d + 1) + d + 1;
        let mut local = vec![0.0; n * n];
        let mut dofs = Vec::new();
        for (bary, wq) in rule.iter() {
            let pb = point_basis(mesh, c, bary);
            for (i, ti) in pb.tests.iter().enumerate() {
                for (j, tj) in pb.tests.iter().enumerate() {
                    local[i * n + j] += wq * geo.volume * linalg::dot(ti, tj);
                }
            }
            dofs = pb.dofs;
        }
        for (i, &ri) in dofs.iter().enumerate() {
            for (j, &cj) in dofs.iter().enumerate() {
                out.push(ri, cj, local[i * n + j]);
            }
        }
    }
    Ok(out.finish())
}
