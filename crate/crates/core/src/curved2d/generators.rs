//! Generating points on an equilateral triangle erected on the chord of a
//! curved edge. The values at the two chord endpoints and at the generating
//! points fix a unique polynomial of degree `k` in the plane, whose
//! restriction to the curve is the edge trace.

use nalgebra::DMatrix;

use crate::error::{Result, VemError};
use crate::geometry::{p2, OrientedCurve};
use crate::polybasis::ScaledMonomialBasis;

/// `(k + 1)(k + 2) / 2 - 2`.
pub fn generator_count(k: usize) -> usize {
    (k + 1) * (k + 2) / 2 - 2
}

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub degree: usize,
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub apex: [f64; 2],
    /// Generating points: the apex first, then the remaining lattice points
    /// with decreasing apex weight.
    pub points: Vec<[f64; 2]>,
}

/// Builds the generating points for a curved edge running from `start` to
/// `end` counterclockwise around its element. The triangle sits on the
/// side of the chord where the curve bulges; for a straight curve it is
/// placed outside the element.
pub fn build_generator_set(curve: &OrientedCurve, start: [f64; 2], end: [f64; 2], k: usize) -> GeneratorSet {
    let d = [end[0] - start[0], end[1] - start[1]];
    let len = d[0].hypot(d[1]);
    let outward = [d[1] / len, -d[0] / len];
    let mid = [0.5 * (start[0] + end[0]), 0.5 * (start[1] + end[1])];
    let g = curve.eval(0.5);
    let bulge = (g[0] - mid[0]) * outward[0] + (g[1] - mid[1]) * outward[1];
    let side = if bulge < -1e-12 * len { -1.0 } else { 1.0 };
    let height = side * 0.5 * 3f64.sqrt() * len;
    let apex = [mid[0] + height * outward[0], mid[1] + height * outward[1]];
    let mut points = Vec::with_capacity(generator_count(k));
    for c in (0..=k).rev() {
        for a in (0..=k - c).rev() {
            let b = k - c - a;
            if c == 0 && (a == 0 || b == 0) {
                continue;
            }
            let (wa, wb, wc) = (a as f64 / k as f64, b as f64 / k as f64, c as f64 / k as f64);
            points.push([
                wa * start[0] + wb * end[0] + wc * apex[0],
                wa * start[1] + wb * end[1] + wc * apex[1],
            ]);
        }
    }
    GeneratorSet {
        degree: k,
        start,
        end,
        apex,
        points,
    }
}

impl GeneratorSet {
    /// Matrix from `[v(start), v(end), generator values]` to the coefficients
    /// of the interpolating polynomial in `basis`.
    pub fn midwife(&self, basis: &ScaledMonomialBasis) -> Result<DMatrix<f64>> {
        let n = basis.len();
        let mut v = DMatrix::zeros(n, n);
        let nodes = [self.start, self.end].into_iter().chain(self.points.iter().copied());
        for (r, x) in nodes.enumerate() {
            let m = basis.eval(&p2(x));
            for j in 0..n {
                v[(r, j)] = m[j];
            }
        }
        v.try_inverse().ok_or(VemError::RankDeficient {
            what: "generating point interpolation",
            rank: n - 1,
            expected: n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Curve;
    use std::f64::consts::PI;

    fn quarter_arc() -> OrientedCurve {
        let arc = Curve::arc([0.0, 0.0], 1.0, 0.0, PI / 2.0).unwrap();
        OrientedCurve::attach(&arc, [1.0, 0.0], [0.0, 1.0]).unwrap()
    }

    #[test]
    fn counts() {
        let c = quarter_arc();
        for (k, n) in [(1, 1), (2, 4), (3, 8), (4, 13)] {
            assert_eq!(generator_count(k), n);
            assert_eq!(build_generator_set(&c, [1.0, 0.0], [0.0, 1.0], k).points.len(), n);
        }
    }

    #[test]
    fn triangle_is_equilateral_on_bulge_side() {
        let g = build_generator_set(&quarter_arc(), [1.0, 0.0], [0.0, 1.0], 1);
        let q = 2f64.sqrt();
        let da = (g.apex[0] - 1.0).hypot(g.apex[1]);
        let db = g.apex[0].hypot(g.apex[1] - 1.0);
        assert!((da - q).abs() < 1e-14 && (db - q).abs() < 1e-14);
        // the arc bulges away from the origin
        assert!(g.apex[0] + g.apex[1] > 1.0);
    }

    #[test]
    fn midwife_reproduces_quadratics() {
        let g = build_generator_set(&quarter_arc(), [1.0, 0.0], [0.0, 1.0], 2);
        let basis = ScaledMonomialBasis::new(2, [0.4, 0.4, 0.0], 1.3, 2);
        let w = g.midwife(&basis).unwrap();
        let p = |x: [f64; 2]| 1.0 - 2.0 * x[0] + x[0] * x[1] + 3.0 * x[1] * x[1];
        let vals: Vec<f64> = [g.start, g.end].iter().chain(&g.points).map(|x| p(*x)).collect();
        let c = &w * nalgebra::DVector::from_vec(vals);
        let x = [0.3, -0.7];
        assert!((basis.eval_poly(&c, &p2(x)) - p(x)).abs() < 1e-12);
    }

    #[test]
    fn apex_moves_the_trace_on_a_curved_edge_only() {
        let basis = ScaledMonomialBasis::new(2, [0.4, 0.4, 0.0], 1.0, 1);
        let arc = quarter_arc();
        let g = build_generator_set(&arc, [1.0, 0.0], [0.0, 1.0], 1);
        let w = g.midwife(&basis).unwrap();
        // unit change in the apex value, endpoints held at zero
        let c = w.column(2).into_owned();
        let on_arc = basis.eval_poly(&c, &p2(arc.eval(0.5)));
        let on_chord = basis.eval_poly(&c, &[0.5, 0.5, 0.0]);
        // (x + y - 1) / √3 vanishes at both endpoints and is 1 at the apex
        let expected = (2f64.sqrt() - 1.0) / 3f64.sqrt();
        assert!(on_chord.abs() < 1e-14);
        assert!((on_arc - expected).abs() < 1e-12, "{on_arc} vs {expected}");
    }
}
