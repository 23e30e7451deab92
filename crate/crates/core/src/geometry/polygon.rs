//! Planar polygons with straight or curved edges: measures, boundary
//! quadrature and star-fan domain quadrature.

use super::curve::OrientedCurve;
use super::quadrature::{gauss_legendre, points_for_order, QuadratureRule};
use super::{diameter, p2, Point};
use crate::error::{Result, VemError};

/// Minimum number of Gauss points per curved piece.
const CURVED_MIN_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeShape {
    Straight,
    /// Oriented to run from the edge's start vertex to its end vertex.
    Curved(OrientedCurve),
}

/// A polygon in the plane, vertices counterclockwise; edge `i` joins vertex
/// `i` to vertex `i + 1`.
#[derive(Debug, Clone)]
pub struct Polygon2D {
    /// Element (or face) id used in error messages.
    pub id: usize,
    pub vertices: Vec<[f64; 2]>,
    pub edges: Vec<EdgeShape>,
}

/// Boundary quadrature with per-point geometric data.
#[derive(Debug, Clone, Default)]
pub struct BoundaryRule {
    /// Arc-length weights.
    pub rule: QuadratureRule,
    /// Unit outward normals.
    pub normals: Vec<Point>,
    /// Unit tangents in the counterclockwise direction.
    pub tangents: Vec<Point>,
    /// Local edge index of each point.
    pub edge: Vec<usize>,
    /// Edge parameter in `[0, 1]` (from the edge's start vertex).
    pub param: Vec<f64>,
}

impl BoundaryRule {
    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    pub fn append(&mut self, other: BoundaryRule) {
        self.rule.extend(&other.rule);
        self.normals.extend(other.normals);
        self.tangents.extend(other.tangents);
        self.edge.extend(other.edge);
        self.param.extend(other.param);
    }
}

impl Polygon2D {
    pub fn straight(id: usize, vertices: Vec<[f64; 2]>) -> Self {
        let n = vertices.len();
        Polygon2D {
            id,
            vertices,
            edges: vec![EdgeShape::Straight; n],
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_endpoints(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn is_curved(&self) -> bool {
        self.edges.iter().any(|e| matches!(e, EdgeShape::Curved(_)))
    }

    /// Same vertices with every curved edge replaced by its chord.
    pub fn chord_polygon(&self) -> Polygon2D {
        Polygon2D::straight(self.id, self.vertices.clone())
    }

    /// Signed area of the chord polygon (shoelace).
    pub fn chord_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut a = 0.0;
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            a += p[0] * q[1] - q[0] * p[1];
        }
        0.5 * a
    }

    /// Vertex average, used as the fan apex.
    pub fn vertex_mean(&self) -> [f64; 2] {
        let n = self.vertices.len() as f64;
        let mut c = [0.0; 2];
        for v in &self.vertices {
            c[0] += v[0] / n;
            c[1] += v[1] / n;
        }
        c
    }

    /// Quadrature on edge `i`, exact for polynomials of degree `order` on
    /// straight edges.
    pub fn edge_rule(&self, i: usize, order: usize) -> BoundaryRule {
        let mut out = BoundaryRule::default();
        match &self.edges[i] {
            EdgeShape::Straight => {
                let (a, b) = self.edge_endpoints(i);
                let d = [b[0] - a[0], b[1] - a[1]];
                let len = d[0].hypot(d[1]);
                let tau = [d[0] / len, d[1] / len, 0.0];
                let nrm = [tau[1], -tau[0], 0.0];
                let (x, w) = gauss_legendre(points_for_order(order));
                for (s, ws) in x.iter().zip(&w) {
                    out.rule.push(p2([a[0] + s * d[0], a[1] + s * d[1]]), ws * len);
                    out.normals.push(nrm);
                    out.tangents.push(tau);
                    out.edge.push(i);
                    out.param.push(*s);
                }
            }
            EdgeShape::Curved(c) => {
                let (x, w) = gauss_legendre(points_for_order(order).max(CURVED_MIN_POINTS));
                for (t0, t1) in c.pieces() {
                    for (s, ws) in x.iter().zip(&w) {
                        let t = t0 + s * (t1 - t0);
                        let d = c.deriv(t);
                        let speed = d[0].hypot(d[1]);
                        let tau = [d[0] / speed, d[1] / speed, 0.0];
                        out.rule.push(p2(c.eval(t)), ws * (t1 - t0) * speed);
                        out.normals.push([tau[1], -tau[0], 0.0]);
                        out.tangents.push(tau);
                        out.edge.push(i);
                        out.param.push(t);
                    }
                }
            }
        }
        out
    }

    pub fn boundary_rule(&self, order: usize) -> BoundaryRule {
        let mut out = BoundaryRule::default();
        for i in 0..self.edges.len() {
            out.append(self.edge_rule(i, order));
        }
        out
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_rule(1).rule.measure()
    }

    /// Domain quadrature exact for degree `order` on straight-sided polygons.
    ///
    /// Each boundary point `y` spawns a radial Gauss line from the apex `c`:
    /// `∫_P F = Σ w (y - c)·n ∫_0^1 s F(c + s (y - c)) ds`, which is the fan
    /// sub-triangulation for straight edges and the curved sector otherwise.
    pub fn domain_rule(&self, order: usize) -> Result<QuadratureRule> {
        self.domain_rule_from(order, self.vertex_mean())
    }

    pub fn domain_rule_from(&self, order: usize, apex: [f64; 2]) -> Result<QuadratureRule> {
        let bnd = self.boundary_rule(order);
        let (xs, ws) = gauss_legendre(points_for_order(order + 1));
        let scale = diameter(&self.vertices.iter().map(|v| p2(*v)).collect::<Vec<_>>());
        let mut rule = QuadratureRule::new();
        for q in 0..bnd.len() {
            let y = bnd.rule.points[q];
            let r = [y[0] - apex[0], y[1] - apex[1]];
            let height = r[0] * bnd.normals[q][0] + r[1] * bnd.normals[q][1];
            if height < -1e-12 * scale {
                return Err(VemError::NotStarShaped { element: self.id });
            }
            let wq = bnd.rule.weights[q] * height;
            for (s, w) in xs.iter().zip(&ws) {
                rule.push(p2([apex[0] + s * r[0], apex[1] + s * r[1]]), wq * s * w);
            }
        }
        Ok(rule)
    }

    /// Area via the boundary integral `½ ∮ x·n ds`.
    pub fn area(&self) -> f64 {
        let bnd = self.boundary_rule(2);
        let mut a = 0.0;
        for q in 0..bnd.len() {
            let y = bnd.rule.points[q];
            a += 0.5 * bnd.rule.weights[q] * (y[0] * bnd.normals[q][0] + y[1] * bnd.normals[q][1]);
        }
        a
    }

    /// Area, centroid and diameter.
    pub fn measures(&self) -> Result<(f64, [f64; 2], f64)> {
        let area = self.area();
        if !(area > 0.0) {
            return Err(VemError::DegenerateElement {
                element: self.id,
                measure: area,
            });
        }
        let rule = self.domain_rule(1)?;
        let cx = rule.integrate(|p| p[0]) / area;
        let cy = rule.integrate(|p| p[1]) / area;
        Ok((area, [cx, cy], self.diameter()))
    }

    /// Largest distance between vertices and sample points of curved edges.
    pub fn diameter(&self) -> f64 {
        diameter(&self.outline(16))
    }

    /// Vertices plus `per_curve - 1` interior samples on each curved edge,
    /// in boundary order.
    pub fn outline(&self, per_curve: usize) -> Vec<Point> {
        let mut pts = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            pts.push(p2(self.vertices[i]));
            if let EdgeShape::Curved(c) = e {
                for j in 1..per_curve {
                    pts.push(p2(c.eval(j as f64 / per_curve as f64)));
                }
            }
        }
        pts
    }

    /// Shortest edge length (curved edges measured by arc length).
    pub fn min_edge_length(&self) -> f64 {
        (0..self.edges.len())
            .map(|i| self.edge_rule(i, 0).rule.measure())
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::super::curve::Curve;
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn quarter_disk() -> Polygon2D {
        let arc = Curve::arc([0.0, 0.0], 1.0, 0.0, PI / 2.0).unwrap();
        let oc = OrientedCurve::attach(&arc, [1.0, 0.0], [0.0, 1.0]).unwrap();
        Polygon2D {
            id: 0,
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            edges: vec![EdgeShape::Straight, EdgeShape::Curved(oc), EdgeShape::Straight],
        }
    }

    #[test]
    fn unit_square_measures() {
        let sq = Polygon2D::straight(0, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let (a, c, h) = sq.measures().unwrap();
        assert!((a - 1.0).abs() < 1e-15);
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
        assert!((h - 2f64.sqrt()).abs() < 1e-15);
        let rule = sq.domain_rule(2).unwrap();
        assert!((rule.integrate(|p| p[0] * p[0] * p[1]) - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn pentagon_area_matches_shoelace() {
        let p = Polygon2D::straight(
            0,
            vec![[0.0, 0.0], [3.0, 0.0], [3.0, 2.0], [1.5, 4.0], [0.0, 2.0]],
        );
        let rule = p.domain_rule(0).unwrap();
        assert!((rule.measure() - p.chord_area()).abs() < 1e-12 * p.chord_area());
    }

    #[test]
    fn quarter_disk_area_and_boundary() {
        let q = quarter_disk();
        assert!((q.area() - PI / 4.0).abs() < 1e-10);
        let rule = q.domain_rule(4).unwrap();
        assert!((rule.measure() - PI / 4.0).abs() < 1e-8);
        let arc = q.edge_rule(1, 8);
        assert!((arc.rule.measure() - PI / 2.0).abs() < 1e-10);
        assert!((arc.rule.integrate(|p| p[0]) - 1.0).abs() < 1e-9);
        // outward normal on the arc is radial
        for (p, n) in arc.rule.points.iter().zip(&arc.normals) {
            assert!((p[0] - n[0]).abs() < 1e-12 && (p[1] - n[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn reentrant_fan_is_rejected() {
        // arrow shape: the vertex mean sees one edge from behind
        let p = Polygon2D::straight(
            3,
            vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [3.9, 0.1], [0.0, 0.1]],
        );
        assert!(matches!(p.domain_rule(2), Err(VemError::NotStarShaped { element: 3 })));
    }
}
