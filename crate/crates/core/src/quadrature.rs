//! Quadrature on simplices in barycentric coordinates.
//!
//! Weights are normalized to sum to one, so `∫_T f ≈ |T| Σ_q w_q f(x_q)`.

use crate::linalg::factorial;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Simplex dimension (1, 2 or 3).
    pub dim: usize,
    /// Barycentric coordinates, `dim + 1` entries used.
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.iter().map(move |p| &p[..=self.dim]).zip(self.weights.iter().copied())
    }

    /// Symmetric rule exact for polynomials of degree 4: the 6-point rule on
    /// triangles and the 11-point rule on tetrahedra.
    pub fn degree4(dim: usize) -> Self {
        match dim {
            2 => {
                let mut points = Vec::new();
                let mut weights = Vec::new();
                for (a, w) in [(0.445_948_490_915_965, 0.223_381_589_678_011), (0.091_576_213_509_771, 0.109_951_743_655_322)] {
                    let b = 1.0 - 2.0 * a;
                    for p in [[a, a, b, 0.0], [a, b, a, 0.0], [b, a, a, 0.0]] {
                        points.push(p);
                        weights.push(w);
                    }
                }
                QuadratureRule { dim, points, weights }
            }
            3 => {
                let mut points = vec![[0.25; 4]];
                let mut weights = vec![-74.0 / 5625.0 * 6.0];
                let (a, b) = (1.0 / 14.0, 11.0 / 14.0);
                for k in 0..4 {
                    let mut p = [a; 4];
                    p[k] = b;
                    points.push(p);
                    weights.push(343.0 / 45000.0 * 6.0);
                }
                let s = (5.0f64 / 14.0).sqrt();
                let (a, b) = ((1.0 + s) / 4.0, (1.0 - s) / 4.0);
                for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                    let mut p = [b; 4];
                    p[i] = a;
                    p[j] = a;
                    points.push(p);
                    weights.push(56.0 / 2250.0 * 6.0);
                }
                QuadratureRule { dim, points, weights }
            }
            _ => Self::collapsed_gauss(dim, 4),
        }
    }

    /// Conical product rule (Gauss–Legendre through the Duffy map) exact for
    /// polynomials of total degree `degree` on a `dim`-simplex.
    pub fn collapsed_gauss(dim: usize, degree: usize) -> Self {
        let n = (degree + dim).div_ceil(2).max(1);
        let (x, w) = gauss_legendre_unit(n);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                for (xi, wi) in x.iter().zip(&w) {
                    points.push([1.0 - xi, *xi, 0.0, 0.0]);
                    weights.push(*wi);
                }
            }
            2 => {
                for (a, wa) in x.iter().zip(&w) {
                    for (b, wb) in x.iter().zip(&w) {
                        let (px, py) = (*a, b * (1.0 - a));
                        points.push([1.0 - px - py, px, py, 0.0]);
                        weights.push(2.0 * wa * wb * (1.0 - a));
                    }
                }
            }
            3 => {
                for (a, wa) in x.iter().zip(&w) {
                    for (b, wb) in x.iter().zip(&w) {
                        for (c, wc) in x.iter().zip(&w) {
                            let px = *a;
                            let py = b * (1.0 - a);
                            let pz = c * (1.0 - a) * (1.0 - b);
                            points.push([1.0 - px - py - pz, px, py, pz]);
                            weights.push(6.0 * wa * wb * wc * (1.0 - a) * (1.0 - a) * (1.0 - b));
                        }
                    }
                }
            }
            _ => panic!("unsupported simplex dimension {dim}"),
        }
        QuadratureRule { dim, points, weights }
    }

    /// Face-barycenter rule: `∫_T f ≈ |T|/(d+1) Σ_{F⊂∂T} f(x_F)`. Point `i`
    /// is the barycenter of the face opposite local vertex `i`.
    pub fn face_barycenters(dim: usize) -> Self {
        let mut points = Vec::with_capacity(dim + 1);
        for i in 0..=dim {
            let mut p = [0.0; 4];
            for (j, pj) in p.iter_mut().enumerate().take(dim + 1) {
                if j != i {
                    *pj = 1.0 / dim as f64;
                }
            }
            points.push(p);
        }
        QuadratureRule {
            dim,
            points,
            weights: vec![1.0 / (dim + 1) as f64; dim + 1],
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            t = 0.0;
            dp = 1.0;
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Exact `∫_T Π λ_i^{α_i} dx` over a `dim`-simplex of measure `volume`.
pub fn barycentric_monomial_integral(dim: usize, exponents: &[u32], volume: f64) -> f64 {
    let total: u32 = exponents.iter().sum();
    let num: f64 = exponents.iter().map(|&a| factorial(a)).product();
    factorial(dim as u32) * num / factorial(dim as u32 + total) * volume
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All exponent vectors with `dim + 1` entries and total degree ≤ p.
    fn monomials(dim: usize, p: u32) -> Vec<Vec<u32>> {
        let mut out = vec![vec![]];
        for _ in 0..=dim {
            let mut next = Vec::new();
            for m in &out {
                let used: u32 = m.iter().sum();
                for a in 0..=(p - used) {
                    let mut mm = m.clone();
                    mm.push(a);
                    next.push(mm);
                }
            }
            out = next;
        }
        out
    }

    fn check_exact(rule: &QuadratureRule, degree: u32) {
        for alpha in monomials(rule.dim, degree) {
            let exact = barycentric_monomial_integral(rule.dim, &alpha, 1.0);
            let approx: f64 = rule
                .iter()
                .map(|(p, w)| w * alpha.iter().zip(p).map(|(&a, &l)| l.powi(a as i32)).product::<f64>())
                .sum();
            assert!((exact - approx).abs() <= 1e-13, "{alpha:?}: {exact} vs {approx}");
        }
    }

    #[test]
    fn gauss_legendre_weights() {
        for n in 1..8 {
            let (x, w) = gauss_legendre_unit(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            // exact for x^(2n-1)
            let k = 2 * n - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_rules_are_degree_four() {
        check_exact(&QuadratureRule::degree4(2), 4);
        check_exact(&QuadratureRule::degree4(3), 4);
        assert_eq!(QuadratureRule::degree4(2).len(), 6);
        assert_eq!(QuadratureRule::degree4(3).len(), 11);
    }

    #[test]
    fn collapsed_rules() {
        for dim in 1..=3 {
            for p in [0u32, 1, 3, 6] {
                check_exact(&QuadratureRule::collapsed_gauss(dim, p as usize), p);
            }
        }
    }

    #[test]
    fn face_barycenter_rule_orders() {
        // second order in 2D, first order in 3D
        check_exact(&QuadratureRule::face_barycenters(2), 2);
        check_exact(&QuadratureRule::face_barycenters(3), 1);
        let r = QuadratureRule::face_barycenters(3);
        let exact = barycentric_monomial_integral(3, &[2, 0, 0, 0], 1.0);
        let approx: f64 = r.iter().map(|(p, w)| w * p[0] * p[0]).sum();
        assert!((exact - approx).abs() > 1e-3);
    }

    #[test]
    fn monomial_formula() {
        // ∫ over reference triangle of λ1 λ2 = 1/24 (area 1/2)
        assert!((barycentric_monomial_integral(2, &[0, 1, 1], 0.5) - 1.0 / 24.0).abs() < 1e-16);
        assert!((barycentric_monomial_integral(3, &[1, 0, 0, 0], 1.0) - 0.25).abs() < 1e-16);
    }
}
