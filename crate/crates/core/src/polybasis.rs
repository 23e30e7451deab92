//! Scaled monomials `((x - x_P) / h_P)^α` on elements, faces and edges.
//!
//! Multi-indices are ordered by total degree, then lexicographically with
//! the first exponent decreasing: in 2D `1, ξ, η, ξ², ξη, η², ...`; in 3D
//! `1, ξ, η, ζ, ξ², ξη, ξζ, η², ηζ, ζ², ...`. The degree-`s` basis is a
//! prefix of the degree-`s + 1` basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, VemError};
use crate::geometry::{Point, QuadratureRule};

/// Largest Gram condition number accepted by [`ScaledMonomialBasis::orthonormalize`].
pub const MAX_GRAM_CONDITION: f64 = 1e14;

/// Number of monomials of degree at most `s` in `dim` variables (0 for `s < 0`).
pub fn poly_dim(dim: usize, s: isize) -> usize {
    if s < 0 {
        return 0;
    }
    let s = s as usize;
    match dim {
        1 => s + 1,
        2 => (s + 1) * (s + 2) / 2,
        3 => (s + 1) * (s + 2) * (s + 3) / 6,
        _ => panic!("dimension {dim} not supported"),
    }
}

fn exponents(dim: usize, degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(poly_dim(dim, degree as isize));
    for d in 0..=degree {
        match dim {
            1 => out.push([d, 0, 0]),
            2 => {
                for b in 0..=d {
                    out.push([d - b, b, 0]);
                }
            }
            _ => {
                for a in (0..=d).rev() {
                    for b in (0..=d - a).rev() {
                        out.push([a, b, d - a - b]);
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMonomialBasis {
    pub dim: usize,
    pub center: Point,
    pub h: f64,
    pub degree: usize,
    pub exps: Vec<[usize; 3]>,
}

/// Highest polynomial degree a basis may have.
pub const MAX_DEGREE: usize = 16;

impl ScaledMonomialBasis {
    pub fn new(dim: usize, center: Point, h: f64, degree: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension {dim} not supported");
        assert!(h > 0.0, "scaling length must be positive");
        assert!(degree <= MAX_DEGREE, "degree {degree} above {MAX_DEGREE}");
        ScaledMonomialBasis {
            dim,
            center,
            h,
            degree,
            exps: exponents(dim, degree),
        }
    }

    /// Same center and scaling, different degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        Self::new(self.dim, self.center, self.h, degree)
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn index_of(&self, e: [usize; 3]) -> Option<usize> {
        let d = e[0] + e[1] + e[2];
        if d > self.degree {
            return None;
        }
        let start = poly_dim(self.dim, d as isize - 1);
        self.exps[start..].iter().position(|x| *x == e).map(|i| start + i)
    }

    fn scaled(&self, x: &Point) -> [f64; 3] {
        let mut s = [0.0; 3];
        for d in 0..self.dim {
            s[d] = (x[d] - self.center[d]) / self.h;
        }
        s
    }

    fn powers(&self, x: &Point) -> [[f64; MAX_DEGREE + 1]; 3] {
        let s = self.scaled(x);
        let mut out = [[1.0; MAX_DEGREE + 1]; 3];
        for (d, row) in out.iter_mut().enumerate() {
            for i in 1..=self.degree {
                row[i] = row[i - 1] * s[d];
            }
        }
        out
    }

    pub fn eval(&self, x: &Point) -> Vec<f64> {
        let pw = self.powers(x);
        self.exps
            .iter()
            .map(|e| pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]])
            .collect()
    }

    /// Gradients `∇m_α(x)`.
    pub fn grad(&self, x: &Point) -> Vec<Point> {
        let pw = self.powers(x);
        let inv = 1.0 / self.h;
        self.exps
            .iter()
            .map(|e| {
                let mut g = [0.0; 3];
                for d in 0..self.dim {
                    if e[d] > 0 {
                        let mut v = e[d] as f64 * inv;
                        for c in 0..3 {
                            v *= if c == d { pw[c][e[c] - 1] } else { pw[c][e[c]] };
                        }
                        g[d] = v;
                    }
                }
                g
            })
            .collect()
    }

    /// Values at all points: row `q`, column `α`.
    pub fn eval_matrix(&self, points: &[Point]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.len());
        for (q, x) in points.iter().enumerate() {
            for (j, v) in self.eval(x).into_iter().enumerate() {
                m[(q, j)] = v;
            }
        }
        m
    }

    /// Map from coefficients in this basis to coefficients of `∂_d` in the
    /// degree `s - 1` basis.
    pub fn derivative_map(&self, d: usize) -> DMatrix<f64> {
        let lower = self.with_degree(self.degree.saturating_sub(1));
        let rows = poly_dim(self.dim, self.degree as isize - 1);
        let mut m = DMatrix::zeros(rows, self.len());
        for (j, e) in self.exps.iter().enumerate() {
            if e[d] > 0 {
                let mut f = *e;
                f[d] -= 1;
                let i = lower.index_of(f).expect("lower-degree monomial");
                m[(i, j)] = e[d] as f64 / self.h;
            }
        }
        m
    }

    /// Map from coefficients in this basis to coefficients of the Laplacian
    /// in the degree `s - 2` basis (empty when `s < 2`).
    pub fn laplacian_map(&self) -> DMatrix<f64> {
        let rows = poly_dim(self.dim, self.degree as isize - 2);
        let mut m = DMatrix::zeros(rows, self.len());
        if rows == 0 {
            return m;
        }
        let lower = self.with_degree(self.degree - 2);
        let h2 = self.h * self.h;
        for (j, e) in self.exps.iter().enumerate() {
            for d in 0..self.dim {
                if e[d] >= 2 {
                    let mut f = *e;
                    f[d] -= 2;
                    let i = lower.index_of(f).expect("lower-degree monomial");
                    m[(i, j)] += (e[d] * (e[d] - 1)) as f64 / h2;
                }
            }
        }
        m
    }

    /// `∫ m_i m_j` under `rule`.
    pub fn gram(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let v = self.eval(x);
            for i in 0..n {
                let wi = w * v[i];
                for j in 0..=i {
                    g[(i, j)] += wi * v[j];
                }
            }
        }
        g.fill_upper_triangle_with_lower_triangle();
        g
    }

    /// Lower-triangular `R` with `m̃_i = Σ_j R_ij m_j` orthonormal in `L²`.
    pub fn orthonormalize(&self, rule: &QuadratureRule) -> Result<DMatrix<f64>> {
        let g = self.gram(rule);
        check_gram(&g, self.degree)?;
        let chol = g
            .clone()
            .cholesky()
            .ok_or(VemError::IllConditioned {
                degree: self.degree,
                cond: f64::INFINITY,
            })?;
        let l = chol.l();
        let n = self.len();
        let r = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor is nonsingular");
        Ok(r)
    }

    /// Coefficients of the polynomial `Σ c_α m_α` sampled from a closure.
    pub fn interpolate_moments<F: Fn(&Point) -> f64>(&self, rule: &QuadratureRule, f: F) -> DVector<f64> {
        let mut b = DVector::zeros(self.len());
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let fx = f(x);
            for (j, v) in self.eval(x).into_iter().enumerate() {
                b[j] += w * fx * v;
            }
        }
        b
    }

    pub fn eval_poly(&self, coeffs: &DVector<f64>, x: &Point) -> f64 {
        self.eval(x).iter().zip(coeffs.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn grad_poly(&self, coeffs: &DVector<f64>, x: &Point) -> Point {
        let mut g = [0.0; 3];
        for (gm, c) in self.grad(x).iter().zip(coeffs.iter()) {
            for d in 0..3 {
                g[d] += c * gm[d];
            }
        }
        g
    }
}

/// Rejects Gram matrices that are not numerically positive definite.
pub fn check_gram(g: &DMatrix<f64>, degree: usize) -> Result<()> {
    let eig = SymmetricEigen::new(g.clone()).eigenvalues;
    let max = eig.max();
    let min = eig.min();
    if !(min > 0.0) || max / min > MAX_GRAM_CONDITION {
        return Err(VemError::IllConditioned {
            degree,
            cond: if min > 0.0 { max / min } else { f64::INFINITY },
        });
    }
    Ok(())
}

/// `L²` projection: coefficients `c` with `G c = b`, `b_j = ∫ v m_j`.
pub fn l2_project(gram: &DMatrix<f64>, moments: &DVector<f64>) -> Result<DVector<f64>> {
    if moments.len() != gram.nrows() {
        return Err(VemError::LengthMismatch {
            expected: gram.nrows(),
            got: moments.len(),
        });
    }
    let chol = gram.clone().cholesky().ok_or(VemError::IllConditioned {
        degree: 0,
        cond: f64::INFINITY,
    })?;
    Ok(chol.solve(moments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon2D;
    use proptest::prelude::*;

    fn unit_square() -> Polygon2D {
        Polygon2D::straight(0, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    #[test]
    fn counts_match_dimension_formulas() {
        for k in 1..=4usize {
            assert_eq!(ScaledMonomialBasis::new(1, [0.0; 3], 1.0, k).len(), k + 1);
            assert_eq!(ScaledMonomialBasis::new(2, [0.0; 3], 1.0, k).len(), (k + 1) * (k + 2) / 2);
            assert_eq!(
                ScaledMonomialBasis::new(3, [0.0; 3], 1.0, k).len(),
                (k * k * k + 6 * k * k + 11 * k + 6) / 6
            );
        }
        assert_eq!(ScaledMonomialBasis::new(3, [0.0; 3], 1.0, 2).len(), 10);
        assert_eq!(poly_dim(2, -1), 0);
    }

    #[test]
    fn ordering_is_graded() {
        let b = ScaledMonomialBasis::new(2, [0.0; 3], 1.0, 2);
        assert_eq!(b.exps, vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0], [1, 1, 0], [0, 2, 0]]);
        let b3 = ScaledMonomialBasis::new(3, [0.0; 3], 1.0, 1);
        assert_eq!(b3.exps, vec![[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]);
    }

    #[test]
    fn laplacian_of_xi_squared() {
        let h = 0.3;
        let b = ScaledMonomialBasis::new(2, [0.2, 0.1, 0.0], h, 2);
        let lap = b.laplacian_map();
        let j = b.index_of([2, 0, 0]).unwrap();
        assert_eq!(lap.nrows(), 1);
        assert!((lap[(0, j)] - 2.0 / (h * h)).abs() < 1e-12);
        let g = b.grad(&[0.7, -0.4, 0.0]);
        assert_eq!(g[0], [0.0; 3]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = ScaledMonomialBasis::new(3, [0.1, 0.2, 0.3], 0.7, 3);
        let x = [0.4, -0.2, 0.9];
        let g = b.grad(&x);
        let eps = 1e-6;
        for d in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[d] += eps;
            xm[d] -= eps;
            let (vp, vm) = (b.eval(&xp), b.eval(&xm));
            for j in 0..b.len() {
                assert!(((vp[j] - vm[j]) / (2.0 * eps) - g[j][d]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn orthonormal_basis_on_unit_square() {
        let sq = unit_square();
        let rule = sq.domain_rule(4).unwrap();
        let b0 = ScaledMonomialBasis::new(2, [0.5, 0.5, 0.0], 2f64.sqrt(), 0);
        let r0 = b0.orthonormalize(&rule).unwrap();
        assert!((r0[(0, 0)] - 1.0).abs() < 1e-14);
        let b1 = b0.with_degree(1);
        let r = b1.orthonormalize(&rule).unwrap();
        let g = b1.gram(&rule);
        let id = &r * g * r.transpose();
        assert!((id - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn projection_of_cubic_is_orthogonal_to_linears() {
        let sq = unit_square();
        let rule = sq.domain_rule(6).unwrap();
        let b = ScaledMonomialBasis::new(2, [0.5, 0.5, 0.0], 2f64.sqrt(), 1);
        let m = b.interpolate_moments(&rule, |x| x[0].powi(3));
        let c = l2_project(&b.gram(&rule), &m).unwrap();
        let resid = b.interpolate_moments(&rule, |x| x[0].powi(3) - b.eval_poly(&c, x));
        assert!(resid.amax() < 1e-10);
        assert!(l2_project(&b.gram(&rule), &DVector::zeros(2)).is_err());
        let zero = l2_project(&b.gram(&rule), &DVector::zeros(3)).unwrap();
        assert_eq!(zero.amax(), 0.0);
    }

    #[test]
    fn distorted_high_degree_is_rejected() {
        let sliver = Polygon2D::straight(0, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1e-7], [0.0, 1e-7]]);
        let rule = sliver.domain_rule(12).unwrap();
        let b = ScaledMonomialBasis::new(2, [0.5, 5e-8, 0.0], 1.0, 5);
        assert!(matches!(b.orthonormalize(&rule), Err(VemError::IllConditioned { .. })));
    }

    fn random_pentagon(seed: [f64; 5]) -> Polygon2D {
        let pts = (0..5)
            .map(|i| {
                let th = i as f64 * std::f64::consts::TAU / 5.0 + 0.3 * seed[i];
                let r = 1.0 + 0.3 * seed[(i + 2) % 5];
                [r * th.cos(), r * th.sin()]
            })
            .collect();
        Polygon2D::straight(0, pts)
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(coeffs in prop::collection::vec(-2.0..2.0f64, 10),
                                    seed in prop::array::uniform5(-1.0..1.0f64)) {
            let poly = random_pentagon(seed);
            let (_, c, h) = poly.measures().unwrap();
            let b = ScaledMonomialBasis::new(2, [c[0], c[1], 0.0], h, 3);
            let rule = poly.domain_rule(6).unwrap();
            let p = DVector::from_vec(coeffs);
            let m = b.interpolate_moments(&rule, |x| b.eval_poly(&p, x));
            let q = l2_project(&b.gram(&rule), &m).unwrap();
            prop_assert!((q - p).amax() < 1e-10);
            let r = b.orthonormalize(&rule).unwrap();
            let id = &r * b.gram(&rule) * r.transpose();
            prop_assert!((id - DMatrix::identity(10, 10)).amax() < 1e-10);
        }

        #[test]
        fn coefficients_are_affine_invariant(shift in prop::array::uniform2(-5.0..5.0f64),
                                             lambda in 0.01..100.0f64,
                                             seed in prop::array::uniform5(-1.0..1.0f64)) {
            let poly = random_pentagon(seed);
            let moved = Polygon2D::straight(0, poly.vertices.iter()
                .map(|v| [lambda * v[0] + shift[0], lambda * v[1] + shift[1]]).collect());
            let coeffs = |p: &Polygon2D| {
                let (area, c, h) = p.measures().unwrap();
                let b = ScaledMonomialBasis::new(2, [c[0], c[1], 0.0], h, 2);
                let rule = p.domain_rule(6).unwrap();
                let target = b.with_degree(3);
                // datum: a fixed scaled monomial of degree 3, projected to degree 2
                let m = b.interpolate_moments(&rule, |x| target.eval(x)[7]) / area;
                l2_project(&(b.gram(&rule) / area), &m).unwrap()
            };
            prop_assert!((coeffs(&poly) - coeffs(&moved)).amax() < 1e-9);
        }
    }
}
