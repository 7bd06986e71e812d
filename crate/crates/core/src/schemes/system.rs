//! Block saddle-point systems on interior unknowns, static condensation and
//! bubble recovery.

use crate::error::{Error, Result};
use crate::fespace::{DofLayout, FeField, Space};
use crate::forms::{BrBlocks, DivBlocks, LoadVectors};
use crate::linsolve::linear_solve;
use crate::mesh::SimplicialMesh;
use crate::sparse::{CsrMatrix, Triplets};

/// The 3×3 block system in the order (bubble, linear, pressure):
///
/// ```text
/// | A_bb A_bl A_bp | U_b   F_b
/// | A_lb A_ll A_lp | U_l = F_l
/// | A_pb A_pl  0   | P     F_p
/// ```
///
/// `A_pb = A_bpᵀ` and `A_pl = A_lpᵀ`. `F_p` is nonzero only through the
/// Dirichlet lift.
#[derive(Clone, Debug)]
pub struct BlockSaddleSystem {
    pub layout: DofLayout,
    pub a_bb: CsrMatrix,
    pub a_bl: CsrMatrix,
    pub a_lb: CsrMatrix,
    pub a_ll: CsrMatrix,
    pub a_bp: CsrMatrix,
    pub a_lp: CsrMatrix,
    pub a_pb: CsrMatrix,
    pub a_pl: CsrMatrix,
    pub f_b: Vec<f64>,
    pub f_l: Vec<f64>,
    pub f_p: Vec<f64>,
}

/// Keeps rows and columns that map to unknowns. Columns without an unknown
/// are moved to the right-hand side using `lift` when it is given.
fn restrict(
    m: &CsrMatrix,
    rows: &dyn Fn(usize) -> Option<usize>,
    cols: &dyn Fn(usize) -> Option<usize>,
    shape: (usize, usize),
    lift: Option<&[f64]>,
    rhs: &mut [f64],
) -> CsrMatrix {
    let mut t = Triplets::new(shape.0, shape.1);
    for (i, j, v) in m.iter() {
        let Some(r) = rows(i) else { continue };
        match cols(j) {
            Some(c) => t.push(r, c, v),
            None => {
                if let Some(g) = lift {
                    rhs[r] -= v * g[j];
                }
            }
        }
    }
    t.to_csr()
}

impl BlockSaddleSystem {
    /// Restricts extended-numbering blocks to interior unknowns.
    ///
    /// `div` holds `-(∇·v, q)` and is scaled by `div_scale` in both the
    /// momentum and the constraint rows. `lift` is the nodal Dirichlet lift in
    /// the `VectorP1` layout; boundary bubbles are lifted by zero.
    pub fn from_extended(
        mesh: &SimplicialMesh,
        velocity: &BrBlocks,
        div: &DivBlocks,
        div_scale: f64,
        load: &LoadVectors,
        lift: &[f64],
    ) -> Self {
        let layout = DofLayout::new(mesh);
        let d = mesh.dim();
        let (nb, nl, np) = (layout.n_bubble(), layout.n_linear(), layout.n_pressure());
        let lin = |e: usize| layout.linear_dof(e / d, e % d);
        let bub = |f: usize| layout.bubble_dof(f);
        let pre = |c: usize| Some(c);

        let mut f_b = vec![0.0; nb];
        for (f, &v) in load.bubble.iter().enumerate() {
            if let Some(i) = bub(f) {
                f_b[i] += v;
            }
        }
        let mut f_l = vec![0.0; nl];
        for (e, &v) in load.linear.iter().enumerate() {
            if let Some(i) = lin(e) {
                f_l[i] += v;
            }
        }
        let mut f_p = vec![0.0; np];

        let a_bb = restrict(&velocity.bb, &bub, &bub, (nb, nb), None, &mut f_b);
        let a_bl = restrict(&velocity.bl, &bub, &lin, (nb, nl), Some(lift), &mut f_b);
        let a_lb = restrict(&velocity.lb, &lin, &bub, (nl, nb), None, &mut f_l);
        let a_ll = restrict(&velocity.ll, &lin, &lin, (nl, nl), Some(lift), &mut f_l);
        let bp = div.bp.scaled(div_scale);
        let lp = div.lp.scaled(div_scale);
        let a_bp = restrict(&bp, &bub, &pre, (nb, np), None, &mut f_b);
        let a_lp = restrict(&lp, &lin, &pre, (nl, np), None, &mut f_l);
        let a_pb = restrict(&bp.transpose(), &pre, &bub, (np, nb), None, &mut f_p);
        let a_pl = restrict(&lp.transpose(), &pre, &lin, (np, nl), Some(lift), &mut f_p);
        BlockSaddleSystem {
            layout,
            a_bb,
            a_bl,
            a_lb,
            a_ll,
            a_bp,
            a_lp,
            a_pb,
            a_pl,
            f_b,
            f_l,
            f_p,
        }
    }

    /// True when static condensation applies.
    pub fn is_condensable(&self) -> bool {
        self.a_bb.is_structurally_diagonal()
    }

    /// Eliminates the (diagonal) bubble block.
    pub fn condense(&self) -> Result<CondensedSystem> {
        if !self.is_condensable() {
            return Err(Error::NonDiagonalBubbleBlock);
        }
        let diag = self.a_bb.diagonal();
        let mut dinv = Vec::with_capacity(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            if v == 0.0 || !v.is_finite() {
                return Err(Error::ZeroBubbleDiagonal {
                    face: self.layout.interior_faces()[i],
                });
            }
            dinv.push(1.0 / v);
        }
        let lb_d = self.a_lb.scale_columns(&dinv);
        let pb_d = self.a_pb.scale_columns(&dinv);
        let s_ll = self.a_ll.add_scaled(-1.0, &lb_d.matmul(&self.a_bl));
        let s_lp = self.a_lp.add_scaled(-1.0, &lb_d.matmul(&self.a_bp));
        let s_pl = self.a_pl.add_scaled(-1.0, &pb_d.matmul(&self.a_bl));
        let s_pp = pb_d.matmul(&self.a_bp).scaled(-1.0);
        let g_l: Vec<f64> = self.f_l.iter().zip(lb_d.mul_vec(&self.f_b)).map(|(a, b)| a - b).collect();
        let g_p: Vec<f64> = self.f_p.iter().zip(pb_d.mul_vec(&self.f_b)).map(|(a, b)| a - b).collect();

        let nl = self.layout.n_linear();
        let n = nl + self.layout.n_pressure();
        let mut t = Triplets::new(n, n);
        for (i, j, v) in s_ll.iter() {
            t.push(i, j, v);
        }
        for (i, j, v) in s_lp.iter() {
            t.push(i, nl + j, v);
        }
        for (i, j, v) in s_pl.iter() {
            t.push(nl + i, j, v);
        }
        for (i, j, v) in s_pp.iter() {
            t.push(nl + i, nl + j, v);
        }
        let mut rhs = g_l;
        rhs.extend(g_p);
        Ok(CondensedSystem {
            matrix: t.to_csr(),
            rhs,
            n_linear: nl,
            dinv,
            s_pp,
        })
    }

    /// Bubble recovery `U_b = A_bb⁻¹ (F_b − A_bl U_l − A_bp P)`.
    pub fn recover_bubbles(&self, dinv: &[f64], ul: &[f64], p: &[f64]) -> Vec<f64> {
        let bl = self.a_bl.mul_vec(ul);
        let bp = self.a_bp.mul_vec(p);
        (0..self.f_b.len()).map(|i| dinv[i] * (self.f_b[i] - bl[i] - bp[i])).collect()
    }

    /// The assembled 3×3 system and its right-hand side.
    pub fn full_matrix(&self) -> (CsrMatrix, Vec<f64>) {
        let (nb, nl, np) = (self.layout.n_bubble(), self.layout.n_linear(), self.layout.n_pressure());
        let n = nb + nl + np;
        let mut t = Triplets::new(n, n);
        let blocks = [
            (&self.a_bb, 0, 0),
            (&self.a_bl, 0, nb),
            (&self.a_bp, 0, nb + nl),
            (&self.a_lb, nb, 0),
            (&self.a_ll, nb, nb),
            (&self.a_lp, nb, nb + nl),
            (&self.a_pb, nb + nl, 0),
            (&self.a_pl, nb + nl, nb),
        ];
        for (m, r0, c0) in blocks {
            for (i, j, v) in m.iter() {
                t.push(r0 + i, c0 + j, v);
            }
        }
        let mut rhs = self.f_b.clone();
        rhs.extend_from_slice(&self.f_l);
        rhs.extend_from_slice(&self.f_p);
        (t.to_csr(), rhs)
    }

    /// Solves via condensation, pinning the first pressure dof.
    pub fn solve_condensed(&self, label: &str) -> Result<BlockSolution> {
        let cs = self.condense()?;
        let x = solve_pinned(&cs.matrix, &cs.rhs, cs.n_linear, label)?;
        let (ul, p) = x.split_at(cs.n_linear);
        let ub = self.recover_bubbles(&cs.dinv, ul, p);
        Ok(BlockSolution {
            ub,
            ul: ul.to_vec(),
            p: p.to_vec(),
            condensed: true,
        })
    }

    /// Solves the full 3×3 system, pinning the first pressure dof.
    pub fn solve_full(&self, label: &str) -> Result<BlockSolution> {
        let (m, rhs) = self.full_matrix();
        let (nb, nl) = (self.layout.n_bubble(), self.layout.n_linear());
        let x = solve_pinned(&m, &rhs, nb + nl, label)?;
        Ok(BlockSolution {
            ub: x[..nb].to_vec(),
            ul: x[nb..nb + nl].to_vec(),
            p: x[nb + nl..].to_vec(),
            condensed: false,
        })
    }

    /// Condensed solve when the bubble block is diagonal, full solve otherwise.
    pub fn solve(&self, label: &str) -> Result<BlockSolution> {
        if self.is_condensable() {
            self.solve_condensed(label)
        } else {
            self.solve_full(label)
        }
    }
}

/// The reduced (linear, pressure) system.
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub n_linear: usize,
    /// Inverse of the bubble diagonal.
    pub dinv: Vec<f64>,
    /// `−A_pb A_bb⁻¹ A_bp`.
    pub s_pp: CsrMatrix,
}

impl CondensedSystem {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Interior unknowns of a solved block system (pressure not yet shifted).
#[derive(Clone, Debug)]
pub struct BlockSolution {
    pub ub: Vec<f64>,
    pub ul: Vec<f64>,
    pub p: Vec<f64>,
    pub condensed: bool,
}

impl BlockSolution {
    /// The unknown vector used for Picard increments: `(U_l, P)` after
    /// condensation, `(U_b, U_l, P)` otherwise.
    pub fn iterate_vector(&self) -> Vec<f64> {
        let mut x = Vec::new();
        if !self.condensed {
            x.extend_from_slice(&self.ub);
        }
        x.extend_from_slice(&self.ul);
        x.extend_from_slice(&self.p);
        x
    }

    /// Extended BR velocity (lift included) and zero-mean pressure.
    pub fn to_fields<'m>(&self, mesh: &'m SimplicialMesh, layout: &DofLayout, lift: &[f64]) -> Result<(FeField<'m>, FeField<'m>)> {
        let d = mesh.dim();
        let mut lin = lift.to_vec();
        for (i, &v) in layout.interior_vertices().iter().enumerate() {
            lin[d * v..d * v + d].copy_from_slice(&self.ul[d * i..d * i + d]);
        }
        let mut bub = vec![0.0; mesh.n_faces()];
        for (i, &f) in layout.interior_faces().iter().enumerate() {
            bub[f] = self.ub[i];
        }
        let mut coeffs = lin;
        coeffs.extend(bub);
        let velocity = FeField::new(mesh, Space::BrFull, coeffs)?;
        let mut pressure = FeField::new(mesh, Space::P0Pressure, self.p.clone())?;
        pressure.remove_mean();
        Ok((velocity, pressure))
    }
}

/// Solves with unknown `pin` fixed to zero (its row and column removed).
pub fn solve_pinned(a: &CsrMatrix, rhs: &[f64], pin: usize, label: &str) -> Result<Vec<f64>> {
    let n = a.nrows();
    let map = |i: usize| -> Option<usize> {
        match i.cmp(&pin) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        }
    };
    let mut t = Triplets::new(n - 1, n - 1);
    for (i, j, v) in a.iter() {
        if let (Some(r), Some(c)) = (map(i), map(j)) {
            t.push(r, c, v);
        }
    }
    let b: Vec<f64> = (0..n).filter(|&i| i != pin).map(|i| rhs[i]).collect();
    let y = linear_solve(&t.to_csr(), &b, label)?;
    let mut x = Vec::with_capacity(n);
    x.extend_from_slice(&y[..pin]);
    x.push(0.0);
    x.extend_from_slice(&y[pin..]);
    Ok(x)
}
