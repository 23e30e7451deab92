//! Quadrature rules: Gauss–Legendre on intervals, collapsed Gauss on
//! triangles, and the generic [`QuadratureRule`] container used everywhere.

use super::Point;

/// Points and weights; weights carry the measure of the integration domain.
#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Point, w: f64) {
        self.points.push(p);
        self.weights.push(w);
    }

    pub fn extend(&mut self, other: &QuadratureRule) {
        self.points.extend_from_slice(&other.points);
        self.weights.extend_from_slice(&other.weights);
    }

    /// Sum of the weights.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(&Point) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z_old = z;
            z = z_old - p1 / dp;
            if (z - z_old).abs() < 1e-15 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wt;
        w[n - 1 - i] = 0.5 * wt;
    }
    (x, w)
}

/// Number of Gauss points exact for polynomials of degree `order`.
pub fn points_for_order(order: usize) -> usize {
    order / 2 + 1
}

/// Collapsed (Duffy) Gauss rule on a flat triangle, exact to `order`.
pub fn triangle_rule(a: &Point, b: &Point, c: &Point, order: usize) -> QuadratureRule {
    let n = points_for_order(order + 1);
    let (x, wx) = gauss_legendre(n);
    let area = triangle_area(a, b, c);
    let mut rule = QuadratureRule::new();
    for (u, wu) in x.iter().zip(&wx) {
        for (v, wv) in x.iter().zip(&wx) {
            // (u, v) in the unit square -> (s, t) in the reference triangle
            let s = u;
            let t = v * (1.0 - u);
            let jac = 1.0 - u;
            let mut p = [0.0; 3];
            for d in 0..3 {
                p[d] = a[d] + s * (b[d] - a[d]) + t * (c[d] - a[d]);
            }
            rule.push(p, 2.0 * area * wu * wv * jac);
        }
    }
    rule
}

/// Triangle split into `n²` congruent pieces, each with [`triangle_rule`].
pub fn subdivided_triangle_rule(
    a: &Point,
    b: &Point,
    c: &Point,
    n: usize,
    order: usize,
) -> QuadratureRule {
    let at = |i: usize, j: usize| -> Point {
        let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
        let mut p = [0.0; 3];
        for d in 0..3 {
            p[d] = a[d] + s * (b[d] - a[d]) + t * (c[d] - a[d]);
        }
        p
    };
    let mut rule = QuadratureRule::new();
    for i in 0..n {
        for j in 0..n - i {
            rule.extend(&triangle_rule(&at(i, j), &at(i + 1, j), &at(i, j + 1), order));
            if i + j + 1 < n {
                rule.extend(&triangle_rule(
                    &at(i + 1, j),
                    &at(i + 1, j + 1),
                    &at(i, j + 1),
                    order,
                ));
            }
        }
    }
    rule
}

/// Unsigned area of a triangle in 3-space.
pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let u = super::sub(b, a);
    let v = super::sub(c, a);
    0.5 * super::norm(&super::cross(&u, &v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = 1.0 / (p as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn triangle_rule_is_exact() {
        let a = [0.0, 0.0, 0.0];
        let b = [2.0, 0.0, 0.0];
        let c = [0.0, 1.0, 0.0];
        let rule = triangle_rule(&a, &b, &c, 4);
        assert!((rule.measure() - 1.0).abs() < 1e-14);
        // int_T x^a y^b = 2^{a+1} * a! b! / (a+b+2)!  for this triangle (legs 2 and 1)
        let v = rule.integrate(|p| p[0] * p[0] * p[1]);
        let exact = 2f64.powi(3) * 2.0 * 1.0 / 120.0;
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn subdivided_rule_keeps_exactness() {
        let a = [0.0, 0.0, 1.0];
        let b = [1.0, 0.0, 1.0];
        let c = [0.0, 1.0, 1.0];
        let rule = subdivided_triangle_rule(&a, &b, &c, 3, 3);
        assert!((rule.measure() - 0.5).abs() < 1e-14);
        let v = rule.integrate(|p| p[0] * p[1] * p[1]);
        assert!((v - 2.0 / 120.0).abs() < 1e-15);
    }
}
