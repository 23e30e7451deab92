//! Polyhedral elements with planar faces and at most one sphere patch.

use std::f64::consts::PI;

use super::mesh::{FaceFrame, Mesh3D, SurfacePatch};
use super::polygon::{BoundaryRule, Polygon2D};
use super::quadrature::{gauss_legendre, points_for_order, subdivided_triangle_rule, QuadratureRule};
use super::{add, cross, diameter, dot, norm, normalize, scale, sub, Point};
use crate::error::{Result, VemError};

/// Largest angle between sphere points inside one quadrature piece.
const SPHERE_PIECE: f64 = PI / 8.0;

#[derive(Debug, Clone)]
pub enum FaceGeometry {
    Flat { polygon: Polygon2D, frame: FaceFrame },
    Sphere { center: Point, radius: f64, corners: Vec<Point> },
}

#[derive(Debug, Clone)]
pub struct PolyFace {
    /// Global face id.
    pub face: usize,
    /// `+1` when the face frame normal points out of the element.
    pub sign: f64,
    pub geometry: FaceGeometry,
}

impl PolyFace {
    pub fn is_sphere(&self) -> bool {
        matches!(self.geometry, FaceGeometry::Sphere { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub id: usize,
    pub faces: Vec<PolyFace>,
    pub vertices: Vec<Point>,
    /// Vertex mean; apex of the face cones.
    pub apex: Point,
}

fn slerp(center: &Point, radius: f64, a: &Point, b: &Point, t: f64) -> Point {
    let ua = normalize(&sub(a, center));
    let ub = normalize(&sub(b, center));
    let om = dot(&ua, &ub).clamp(-1.0, 1.0).acos();
    if om < 1e-15 {
        return *a;
    }
    let (sa, sb) = (((1.0 - t) * om).sin() / om.sin(), (t * om).sin() / om.sin());
    add(center, &scale(&add(&scale(&ua, sa), &scale(&ub, sb)), radius))
}

fn angle_between(center: &Point, a: &Point, b: &Point) -> f64 {
    let ua = normalize(&sub(a, center));
    let ub = normalize(&sub(b, center));
    dot(&ua, &ub).clamp(-1.0, 1.0).acos()
}

/// Surface quadrature on a sphere patch bounded by great arcs through
/// `corners`, with unit radial normals.
fn sphere_patch_rule(center: &Point, radius: f64, corners: &[Point], order: usize) -> (QuadratureRule, Vec<Point>) {
    let mut mean = [0.0; 3];
    for p in corners {
        mean = add(&mean, &normalize(&sub(p, center)));
    }
    let apex = add(center, &scale(&normalize(&mean), radius));
    let mut rule = QuadratureRule::new();
    let mut normals = Vec::new();
    let n = corners.len();
    for i in 0..n {
        let (a, b) = (corners[i], corners[(i + 1) % n]);
        let pieces = (angle_between(center, &a, &b) / SPHERE_PIECE).ceil().max(1.0) as usize;
        for j in 0..pieces {
            let p = slerp(center, radius, &a, &b, j as f64 / pieces as f64);
            let q = slerp(center, radius, &a, &b, (j + 1) as f64 / pieces as f64);
            let span = angle_between(center, &apex, &p)
                .max(angle_between(center, &apex, &q))
                .max(angle_between(center, &p, &q));
            let m = (span / SPHERE_PIECE).ceil().max(1.0) as usize;
            let tn = cross(&sub(&p, &apex), &sub(&q, &apex));
            if norm(&tn) == 0.0 {
                continue;
            }
            let dist = dot(&normalize(&tn), &sub(&apex, center)).abs();
            let flat = subdivided_triangle_rule(&apex, &p, &q, m, order + 6);
            for (x, w) in flat.points.iter().zip(&flat.weights) {
                let r = sub(x, center);
                let rn = norm(&r);
                let y = add(center, &scale(&r, radius / rn));
                rule.push(y, w * radius * radius * dist / (rn * rn * rn));
                normals.push(scale(&r, 1.0 / rn));
            }
        }
    }
    (rule, normals)
}

impl Polyhedron {
    pub fn from_mesh(mesh: &Mesh3D, e: usize) -> Result<Self> {
        let vids = mesh.element_vertices(e);
        let vertices: Vec<Point> = vids.iter().map(|&v| mesh.vertices[v]).collect();
        let mut apex = [0.0; 3];
        for v in &vertices {
            apex = add(&apex, &scale(v, 1.0 / vertices.len() as f64));
        }
        let mut faces = Vec::new();
        for &f in &mesh.elements[e].faces {
            let face = &mesh.faces[f];
            let sphere = face.surface.and_then(|s| match &mesh.surfaces[s] {
                SurfacePatch::Sphere { center, radius } => Some((*center, *radius)),
                SurfacePatch::Flat => None,
            });
            let pf = match sphere {
                Some((center, radius)) => {
                    let corners: Vec<Point> =
                        face.vertices.iter().map(|&v| mesh.vertices[v]).collect();
                    let mut mid = [0.0; 3];
                    for p in &corners {
                        mid = add(&mid, &normalize(&sub(p, &center)));
                    }
                    let out = dot(&normalize(&mid), &sub(&corners[0], &apex));
                    PolyFace {
                        face: f,
                        sign: if out >= 0.0 { 1.0 } else { -1.0 },
                        geometry: FaceGeometry::Sphere {
                            center,
                            radius,
                            corners,
                        },
                    }
                }
                None => {
                    let frame = face.frame.clone();
                    let h = dot(&sub(&frame.origin, &apex), &frame.normal);
                    if h.abs() < 1e-14 {
                        return Err(VemError::NotStarShaped { element: e });
                    }
                    PolyFace {
                        face: f,
                        sign: h.signum(),
                        geometry: FaceGeometry::Flat {
                            polygon: mesh.face_polygon(f)?,
                            frame,
                        },
                    }
                }
            };
            faces.push(pf);
        }
        Ok(Polyhedron {
            id: e,
            faces,
            vertices,
            apex,
        })
    }

    pub fn has_sphere(&self) -> bool {
        self.faces.iter().any(|f| f.is_sphere())
    }

    /// Surface rule of local face `i` with outward unit normals.
    pub fn face_rule(&self, i: usize, order: usize) -> Result<(QuadratureRule, Vec<Point>)> {
        let pf = &self.faces[i];
        match &pf.geometry {
            FaceGeometry::Flat { polygon, frame } => {
                let r2 = polygon.domain_rule(order)?;
                let mut rule = QuadratureRule::new();
                for (p, w) in r2.points.iter().zip(&r2.weights) {
                    rule.push(frame.to_global([p[0], p[1]]), *w);
                }
                let n = scale(&frame.normal, pf.sign);
                let normals = vec![n; rule.len()];
                Ok((rule, normals))
            }
            FaceGeometry::Sphere {
                center,
                radius,
                corners,
            } => {
                let (rule, normals) = sphere_patch_rule(center, *radius, corners, order);
                let normals = normals.into_iter().map(|n| scale(&n, pf.sign)).collect();
                Ok((rule, normals))
            }
        }
    }

    /// Concatenated face rules; `edge` holds the local face index.
    pub fn boundary_rule(&self, order: usize) -> Result<BoundaryRule> {
        let mut out = BoundaryRule::default();
        for i in 0..self.faces.len() {
            let (rule, normals) = self.face_rule(i, order)?;
            out.edge.extend(std::iter::repeat(i).take(rule.len()));
            out.param.extend(std::iter::repeat(0.0).take(rule.len()));
            out.tangents.extend(std::iter::repeat([0.0; 3]).take(rule.len()));
            out.rule.extend(&rule);
            out.normals.extend(normals);
        }
        Ok(out)
    }

    /// Corners of an axis-aligned box, if the element is one.
    fn as_box(&self) -> Option<(Point, Point)> {
        if self.vertices.len() != 8 || self.faces.len() != 6 || self.has_sphere() {
            return None;
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            for d in 0..3 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let tol = 1e-14 * diameter(&self.vertices);
        let on = |a: f64, b: f64, c: f64| (a - b).abs() <= tol || (a - c).abs() <= tol;
        let mut corners = std::collections::BTreeSet::new();
        for v in &self.vertices {
            if !(0..3).all(|d| on(v[d], lo[d], hi[d])) {
                return None;
            }
            corners.insert([0, 1, 2].map(|d| (v[d] - lo[d]).abs() > tol));
        }
        (corners.len() == 8).then_some((lo, hi))
    }

    /// Volume quadrature by cones from the apex over every face; tensor
    /// Gauss on axis-aligned boxes.
    pub fn domain_rule(&self, order: usize) -> Result<QuadratureRule> {
        if let Some((lo, hi)) = self.as_box() {
            let (xs, ws) = gauss_legendre(points_for_order(order));
            let mut rule = QuadratureRule::new();
            let len = [0, 1, 2].map(|d| hi[d] - lo[d]);
            let jac = len[0] * len[1] * len[2];
            for (a, wa) in xs.iter().zip(&ws) {
                for (b, wb) in xs.iter().zip(&ws) {
                    for (c, wc) in xs.iter().zip(&ws) {
                        let t = [*a, *b, *c];
                        let p = [0, 1, 2].map(|d| lo[d] + len[d] * t[d]);
                        rule.push(p, jac * wa * wb * wc);
                    }
                }
            }
            return Ok(rule);
        }
        let bnd = self.boundary_rule(order)?;
        let (xs, ws) = gauss_legendre(points_for_order(order + 2));
        let h = diameter(&self.vertices);
        let mut rule = QuadratureRule::new();
        for q in 0..bnd.len() {
            let y = bnd.rule.points[q];
            let r = sub(&y, &self.apex);
            let height = dot(&r, &bnd.normals[q]);
            if height < -1e-12 * h {
                return Err(VemError::NotStarShaped { element: self.id });
            }
            let wq = bnd.rule.weights[q] * height;
            for (s, w) in xs.iter().zip(&ws) {
                rule.push(add(&self.apex, &scale(&r, *s)), wq * s * s * w);
            }
        }
        Ok(rule)
    }

    /// Volume via `⅓ ∮ x·n`, centroid, diameter.
    pub fn measures(&self) -> Result<(f64, Point, f64)> {
        let bnd = self.boundary_rule(2)?;
        let mut vol = 0.0;
        for q in 0..bnd.len() {
            vol += bnd.rule.weights[q] * dot(&sub(&bnd.rule.points[q], &self.apex), &bnd.normals[q]) / 3.0;
        }
        if !(vol > 0.0) {
            return Err(VemError::DegenerateElement {
                element: self.id,
                measure: vol,
            });
        }
        let rule = self.domain_rule(1)?;
        let mut c = [0.0; 3];
        for d in 0..3 {
            c[d] = rule.integrate(|p| p[d]) / vol;
        }
        let mut pts = self.vertices.clone();
        for (i, f) in self.faces.iter().enumerate() {
            if f.is_sphere() {
                pts.extend(self.face_rule(i, 0)?.0.points);
            }
        }
        Ok((vol, c, diameter(&pts)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate;

    #[test]
    fn unit_cube_measures() {
        let mesh = generate::cube_mesh(1).unwrap();
        let p = Polyhedron::from_mesh(&mesh, 0).unwrap();
        let (v, c, h) = p.measures().unwrap();
        assert!((v - 1.0).abs() < 1e-14);
        for d in 0..3 {
            assert!((c[d] - 0.5).abs() < 1e-14);
        }
        assert!((h - 3f64.sqrt()).abs() < 1e-14);
        let rule = p.domain_rule(3).unwrap();
        assert!((rule.integrate(|x| x[0] * x[0] * x[1] * x[2]) - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn box_rule_is_exact() {
        let mesh = generate::cube_mesh(2).unwrap();
        let p = Polyhedron::from_mesh(&mesh, 3).unwrap();
        assert!(p.as_box().is_some());
        let f = |x: &Point| x[0].powi(3) * x[1] * x[1] + x[2].powi(5) - x[0] * x[2];
        let tensor = p.domain_rule(5).unwrap().integrate(f);
        let mut q = p.clone();
        q.vertices[0][0] += 1e-3;
        assert!(q.as_box().is_none());
        let exact = {
            let (lo, hi) = p.as_box().unwrap();
            let i = |a: f64, b: f64, n: i32| (b.powi(n + 1) - a.powi(n + 1)) / (n + 1) as f64;
            let l = [0, 1, 2].map(|d| hi[d] - lo[d]);
            i(lo[0], hi[0], 3) * i(lo[1], hi[1], 2) * l[2] + i(lo[2], hi[2], 5) * l[0] * l[1]
                - i(lo[0], hi[0], 1) * i(lo[2], hi[2], 1) * l[1]
        };
        assert!((tensor - exact).abs() < 1e-15, "{tensor} {exact}");
    }

    #[test]
    fn octant_volume() {
        let mesh = generate::octant_mesh(0).unwrap();
        let p = Polyhedron::from_mesh(&mesh, 0).unwrap();
        let (v, _, _) = p.measures().unwrap();
        assert!((v - PI / 6.0).abs() < 1e-10, "{v}");
        let rule = p.domain_rule(4).unwrap();
        // ∫ z over the unit-ball octant = π/16
        assert!((rule.integrate(|x| x[2]) - PI / 16.0).abs() < 1e-10);
    }
}
