//! Point location on simplicial meshes through a uniform bucket grid.

use crate::linalg::Point;
use crate::mesh::SimplicialMesh;

const TOL: f64 = 1e-10;

pub struct PointLocator<'m> {
    mesh: &'m SimplicialMesh,
    lo: Point,
    cell_size: Point,
    dims: [usize; 3],
    buckets: Vec<Vec<usize>>,
}

impl<'m> PointLocator<'m> {
    pub fn new(mesh: &'m SimplicialMesh) -> Self {
        let d = mesh.dim();
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..d {
            lo[k] = mesh.vertices().iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
            hi[k] = mesh.vertices().iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
        }
        let per_axis = ((mesh.n_cells() as f64).powf(1.0 / d as f64).ceil() as usize).max(1);
        let mut dims = [1; 3];
        let mut cell_size = [1.0; 3];
        for k in 0..d {
            dims[k] = per_axis;
            cell_size[k] = ((hi[k] - lo[k]) / per_axis as f64).max(f64::MIN_POSITIVE);
        }
        let mut loc = PointLocator {
            mesh,
            lo,
            cell_size,
            dims,
            buckets: vec![Vec::new(); dims.iter().product()],
        };
        for c in 0..mesh.n_cells() {
            let pts = mesh.cell_points(c);
            let mut a = [0usize; 3];
            let mut b = [0usize; 3];
            for k in 0..d {
                let min = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
                let max = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
                a[k] = loc.axis_index(k, min - TOL);
                b[k] = loc.axis_index(k, max + TOL);
            }
            for i in a[0]..=b[0] {
                for j in a[1]..=b[1] {
                    for l in a[2]..=b[2] {
                        let idx = loc.flat([i, j, l]);
                        loc.buckets[idx].push(c);
                    }
                }
            }
        }
        loc
    }

    fn axis_index(&self, k: usize, x: f64) -> usize {
        let i = ((x - self.lo[k]) / self.cell_size[k]).floor();
        (i.max(0.0) as usize).min(self.dims[k] - 1)
    }

    fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[2] * self.dims[1] + idx[1]) * self.dims[0] + idx[0]
    }

    /// Barycentric coordinates of `x` in cell `c`.
    pub fn barycentric(&self, c: usize, x: &Point) -> [f64; 4] {
        let geo = self.mesh.geometry(c);
        let d = self.mesh.dim();
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate().take(d + 1) {
            let mut s = 1.0 / (d + 1) as f64;
            for k in 0..d {
                s += geo.grad_lambda[i][k] * (x[k] - geo.barycenter[k]);
            }
            *o = s;
        }
        out
    }

    /// A cell containing `x` and the barycentric coordinates there. Points
    /// slightly outside the mesh snap to the nearest candidate cell.
    pub fn locate(&self, x: &Point) -> Option<(usize, [f64; 4])> {
        let d = self.mesh.dim();
        let mut idx = [0usize; 3];
        for (k, i) in idx.iter_mut().enumerate().take(d) {
            *i = self.axis_index(k, x[k]);
        }
        let mut best: Option<(usize, [f64; 4], f64)> = None;
        for &c in &self.buckets[self.flat(idx)] {
            let bary = self.barycentric(c, x);
            let worst = bary[..=d].iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= -TOL {
                return Some((c, bary));
            }
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((c, bary, worst));
            }
        }
        best.filter(|b| b.2 > -1e-6).map(|(c, mut bary, _)| {
            // clamp and renormalize
            let mut s = 0.0;
            for b in bary[..=d].iter_mut() {
                *b = b.max(0.0);
                s += *b;
            }
            bary[..=d].iter_mut().for_each(|b| *b /= s);
            (c, bary)
        })
    }
}
