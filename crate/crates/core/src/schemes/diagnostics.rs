//! Post-solve checks: discrete incompressibility and an inf-sup estimate.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fespace::{FeField, Space};
use crate::forms::{self, BrBlocks, LoadVectors};
use crate::linalg;
use crate::mesh::SimplicialMesh;

use super::BlockSaddleSystem;

/// `max_T |∫_T ∇·u_h| / (Σ_{F⊂∂T} |F| · U_max)` with `U_max` the largest
/// vertex speed.
pub fn divergence_residual(velocity: &FeField) -> Result<f64> {
    if velocity.space() != Space::BrFull {
        return Err(Error::InvalidArgument("divergence residual needs a BR velocity".into()));
    }
    let mesh = velocity.mesh();
    let d = mesh.dim();
    let div = forms::assemble_div(mesh)?;
    let lin = velocity.linear_part();
    let bub = velocity.bubble_part();
    let mut per_cell = div.lp.transpose().mul_vec(lin);
    for (r, b) in per_cell.iter_mut().zip(div.bp.transpose().mul_vec(bub)) {
        *r += b;
    }
    let umax = (0..mesh.n_vertices())
        .map(|v| linalg::norm2(&lin[d * v..d * v + d]))
        .fold(0.0, f64::max);
    let umax = if umax > 0.0 { umax } else { 1.0 };
    let mut worst: f64 = 0.0;
    for (c, r) in per_cell.iter().enumerate() {
        let perimeter: f64 = mesh.cell_faces(c).iter().map(|&f| mesh.face(f).measure).sum();
        worst = worst.max(r.abs() / (perimeter * umax));
    }
    Ok(worst)
}

/// Discrete inf-sup estimate `β = sqrt(λ_2)` of
/// `M_p^{-1/2} B A⁻¹ Bᵀ M_p^{-1/2}`, where `A` is the matrix of `a_h` on
/// interior BR unknowns, `B` the divergence block and `M_p` the P0 mass.
/// The smallest eigenvalue belongs to constant pressures and is skipped.
/// Dense; meant for small meshes.
pub fn inf_sup_constant(mesh: &SimplicialMesh) -> Result<f64> {
    let mut viscous = forms::assemble_grad_grad(mesh)?;
    viscous.bb = forms::assemble_bubble_diag(mesh)?;
    inf_sup_with(mesh, &viscous)
}

fn inf_sup_with(mesh: &SimplicialMesh, viscous: &BrBlocks) -> Result<f64> {
    let div = forms::assemble_div(mesh)?;
    let zero = LoadVectors {
        bubble: vec![0.0; mesh.n_faces()],
        linear: vec![0.0; mesh.dim() * mesh.n_vertices()],
    };
    let lift = vec![0.0; zero.linear.len()];
    let sys = BlockSaddleSystem::from_extended(mesh, viscous, &div, 1.0, &zero, &lift);
    let (nb, nl, np) = (sys.layout.n_bubble(), sys.layout.n_linear(), sys.layout.n_pressure());
    let nv = nb + nl;
    let mut a = DMatrix::<f64>::zeros(nv, nv);
    for (m, r0, c0) in [(&sys.a_bb, 0, 0), (&sys.a_bl, 0, nb), (&sys.a_lb, nb, 0), (&sys.a_ll, nb, nb)] {
        for (i, j, v) in m.iter() {
            a[(r0 + i, c0 + j)] += v;
        }
    }
    let mut bt = DMatrix::<f64>::zeros(nv, np);
    for (m, r0) in [(&sys.a_bp, 0), (&sys.a_lp, nb)] {
        for (i, j, v) in m.iter() {
            bt[(r0 + i, j)] += v;
        }
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("viscous matrix is not positive definite".into()))?;
    let ainv_bt = chol.solve(&bt);
    let s = bt.transpose() * ainv_bt;
    let scale: Vec<f64> = (0..np).map(|c| 1.0 / mesh.geometry(c).volume.sqrt()).collect();
    let scaled = DMatrix::from_fn(np, np, |i, j| scale[i] * s[(i, j)] * scale[j]);
    let sym = (&scaled + scaled.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig.get(1).copied().unwrap_or(0.0).max(0.0).sqrt())
}
