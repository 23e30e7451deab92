//! Finite elements on a ribbon of triangles around a circular boundary,
//! coupled with virtual elements inside.
//!
//! Ribbon triangles carry full polynomials of degree `k`, described by the
//! same boundary unknowns as the polygons (vertex values, edge moments)
//! plus interior moments up to `k - 3`, which makes them unisolvent. All
//! integrals on a triangle are taken over its intersection with the
//! domain, and no stabilization is needed there.
//!
//! The curve carries a natural (Neumann) condition: test functions do not
//! vanish on it, so an essential condition there would need a boundary
//! term. The straight sides of a sector may be of either kind.

use nalgebra::{DMatrix, DVector};

use super::CurvedStrategy;
use crate::discrete::{Discretization, ErrorNorms, FluxField, Integrals, ScalarField, VectorField};
use crate::error::{Result, VemError};
use crate::geometry::{build_ribbon, BoundaryTag, Curve, EdgeShape, Point, QuadratureRule, Ribbon};
use crate::polybasis::poly_dim;
use crate::solver::{CsrMatrix, Triplets};
use crate::vem2d::space::build_element_space_with;
use crate::vem2d::{build_element_space, enumerate_dofs, local_load, local_stiffness, DofMap, EdgeUnknowns, ElementSpace, StiffnessOptions};

/// A ribbon triangle restricted to the domain.
#[derive(Debug, Clone)]
pub struct RibbonTriangle {
    /// Unknowns of the whole triangle.
    pub element: ElementSpace,
    /// Inverse of the square unknowns-of-monomials matrix.
    pub dinv: DMatrix<f64>,
    pub domain: QuadratureRule,
    /// Boundary points on the domain boundary, with outward normals.
    pub boundary: QuadratureRule,
    pub normals: Vec<Point>,
}

#[derive(Debug, Clone)]
pub enum RibbonElement {
    Polygon(ElementSpace),
    Triangle(RibbonTriangle),
}

#[derive(Debug, Clone)]
pub struct RibbonDiscretization {
    pub ribbon: Ribbon,
    pub degree: usize,
    pub elements: Vec<RibbonElement>,
    pub dofmap: DofMap,
    /// Condition on the straight sides of a sector.
    pub sides: BoundaryTag,
}

impl RibbonTriangle {
    /// Local stiffness `D⁻ᵀ A D⁻¹` with `A` the gradient Gram matrix over the clipped region.
    pub fn stiffness(&self) -> DMatrix<f64> {
        let basis = &self.element.space.basis;
        let n = basis.len();
        let mut a = DMatrix::zeros(n, n);
        for (x, w) in self.domain.points.iter().zip(&self.domain.weights) {
            let g = basis.grad(x);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
        }
        let k = self.dinv.transpose() * a * &self.dinv;
        (&k + k.transpose()) * 0.5
    }

    /// `∫_{Ω_T} f φ_i` for the local basis `φ_i`.
    pub fn load(&self, f: ScalarField) -> DVector<f64> {
        let basis = &self.element.space.basis;
        let mut b = DVector::zeros(basis.len());
        for (x, w) in self.domain.points.iter().zip(&self.domain.weights) {
            b += DVector::from_vec(basis.eval(x)) * (w * f(x));
        }
        self.dinv.transpose() * b
    }
}

impl RibbonDiscretization {
    /// Ribbon of `n_segments` pieces around `curve` (default thickness: one
    /// chord), with condition `sides` on the straight sides of a sector.
    pub fn new(curve: &Curve, n_segments: usize, thickness: Option<f64>, k: usize, sides: BoundaryTag) -> Result<Self> {
        let mut ribbon = build_ribbon(curve, n_segments, thickness)?;
        let Curve::Arc { center, radius, .. } = *curve else { unreachable!("checked by build_ribbon") };
        // the outer polygon lies outside the domain: natural condition, no data
        ribbon.mesh.set_all_boundary(BoundaryTag::Neumann);
        if sides == BoundaryTag::Dirichlet {
            let inside = |v: usize| {
                let x = ribbon.mesh.vertices[v];
                (x[0] - center[0]).hypot(x[1] - center[1]) <= radius * (1.0 + 1e-9)
            };
            for g in 0..ribbon.mesh.edges.len() {
                let [a, b] = ribbon.mesh.edges[g];
                // side edges may straddle the curve; their unknowns outside
                // the domain take values of the extension of the data
                if ribbon.mesh.boundary[g].is_some() && (inside(a) || inside(b)) {
                    ribbon.mesh.boundary[g] = Some(BoundaryTag::Dirichlet);
                }
            }
        }
        let mesh = &ribbon.mesh;
        let order = 2 * k + 2;
        let mut elements = Vec::with_capacity(mesh.n_elements());
        let mut interior = Vec::with_capacity(mesh.n_elements());
        for e in 0..mesh.n_elements() {
            let poly = mesh.polygon(e)?;
            let ids = &mesh.elements[e].vertices;
            match &ribbon.clipped[e] {
                None => {
                    interior.push(poly_dim(2, k as isize - 2));
                    elements.push(RibbonElement::Polygon(build_element_space(poly, ids, k, CurvedStrategy::Ribbon)?));
                }
                Some(region) => {
                    interior.push(poly_dim(2, k as isize - 3));
                    let element = build_element_space_with(poly, ids, k, CurvedStrategy::Ribbon, k as isize - 3)?;
                    let dinv = element.space.dofs_of_poly.clone().try_inverse().ok_or(VemError::RankDeficient {
                        what: "ribbon triangle unknowns",
                        rank: 0,
                        expected: element.space.n_poly(),
                    })?;
                    let domain = region.polygon.domain_rule(order)?;
                    let mut boundary = QuadratureRule::new();
                    let mut normals = Vec::new();
                    for (i, on) in region.on_boundary.iter().enumerate() {
                        // straight pieces lie on the sides of a sector
                        let straight = matches!(region.polygon.edges[i], EdgeShape::Straight);
                        if *on && !(straight && sides == BoundaryTag::Dirichlet) {
                            let r = region.polygon.edge_rule(i, order);
                            boundary.extend(&r.rule);
                            normals.extend(r.normals);
                        }
                    }
                    elements.push(RibbonElement::Triangle(RibbonTriangle {
                        element,
                        dinv,
                        domain,
                        boundary,
                        normals,
                    }));
                }
            }
        }
        let layouts: Vec<_> = elements.iter().map(|e| Self::space_of(e).layout.clone()).collect();
        let areas: Vec<f64> = elements.iter().map(|e| Self::space_of(e).area).collect();
        let edge_content = vec![EdgeUnknowns::Moments(k - 1); mesh.edges.len()];
        let dofmap = enumerate_dofs(mesh, &edge_content, &interior, &layouts, &areas);
        Ok(RibbonDiscretization {
            ribbon,
            degree: k,
            elements,
            dofmap,
            sides,
        })
    }

    fn space_of(e: &RibbonElement) -> &ElementSpace {
        match e {
            RibbonElement::Polygon(s) => s,
            RibbonElement::Triangle(t) => &t.element,
        }
    }

    fn local(&self, e: usize, uh: &DVector<f64>) -> DVector<f64> {
        let map = &self.dofmap.element_dofs[e];
        DVector::from_iterator(map.len(), map.iter().map(|&i| uh[i]))
    }
}

impl Discretization for RibbonDiscretization {
    fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs()
    }

    fn assemble(&self, opts: &StiffnessOptions, f: ScalarField) -> Result<(CsrMatrix, DVector<f64>)> {
        let n = self.n_dofs();
        let mut trip = Triplets::new(n);
        let mut rhs = DVector::zeros(n);
        for (e, el) in self.elements.iter().enumerate() {
            let (k, load) = match el {
                RibbonElement::Polygon(s) => (local_stiffness(&s.space, opts)?.stiffness, local_load(&s.space, f)?),
                RibbonElement::Triangle(t) => (t.stiffness(), t.load(f)),
            };
            let map = &self.dofmap.element_dofs[e];
            trip.scatter(map, &k)?;
            for (a, &g) in map.iter().enumerate() {
                rhs[g] += load[a];
            }
        }
        Ok((trip.to_csr(), rhs))
    }

    fn interpolate(&self, u: ScalarField) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.n_dofs());
        for (e, el) in self.elements.iter().enumerate() {
            let vals = Self::space_of(el).interpolate(u);
            for (a, &g) in self.dofmap.element_dofs[e].iter().enumerate() {
                out[g] = vals[a];
            }
        }
        Ok(out)
    }

    /// Unknowns on Dirichlet sides of a sector.
    fn dirichlet(&self, g: ScalarField) -> Result<Vec<(usize, f64)>> {
        if self.sides != BoundaryTag::Dirichlet {
            return Ok(vec![]);
        }
        let all = self.interpolate(g)?;
        Ok(self.dofmap.dirichlet_dofs().into_iter().map(|i| (i, all[i])).collect())
    }

    fn neumann(&self, gn: FluxField) -> Result<(DVector<f64>, Integrals)> {
        let mut rhs = DVector::zeros(self.n_dofs());
        let mut ints = Integrals::default();
        let mesh = &self.ribbon.mesh;
        for (e, el) in self.elements.iter().enumerate() {
            let map = &self.dofmap.element_dofs[e];
            match el {
                // polygons touch the domain boundary only along the straight
                // sides of a sector
                RibbonElement::Polygon(s) => {
                    let bnd = &s.space.boundary;
                    for q in 0..bnd.len() {
                        let g = mesh.element_edges[e][bnd.edge[q]].0;
                        if mesh.boundary[g] != Some(BoundaryTag::Neumann) {
                            continue;
                        }
                        let v = gn(&bnd.rule.points[q], &bnd.normals[q]) * bnd.rule.weights[q];
                        ints.signed += v;
                        ints.absolute += v.abs();
                        for (a, &i) in map.iter().enumerate() {
                            rhs[i] += v * s.space.trace[(q, a)];
                        }
                    }
                }
                RibbonElement::Triangle(t) => {
                    let basis = &t.element.space.basis;
                    let mut b = DVector::zeros(basis.len());
                    for (q, (x, w)) in t.boundary.points.iter().zip(&t.boundary.weights).enumerate() {
                        let v = gn(x, &t.normals[q]) * w;
                        ints.signed += v;
                        ints.absolute += v.abs();
                        b += DVector::from_vec(basis.eval(x)) * v;
                    }
                    let local = t.dinv.transpose() * b;
                    for (a, &i) in map.iter().enumerate() {
                        rhs[i] += local[a];
                    }
                }
            }
        }
        Ok((rhs, ints))
    }

    fn source_integrals(&self, f: ScalarField) -> Result<Integrals> {
        let mut ints = Integrals::default();
        for el in &self.elements {
            let r = match el {
                RibbonElement::Polygon(s) => &s.space.domain,
                RibbonElement::Triangle(t) => &t.domain,
            };
            for (x, w) in r.points.iter().zip(&r.weights) {
                let v = w * f(x);
                ints.signed += v;
                ints.absolute += v.abs();
            }
        }
        Ok(ints)
    }

    /// Boundary vertices of the inner polygon (inside the domain) come first.
    fn pin_candidates(&self) -> Vec<usize> {
        let inner: Vec<usize> = self
            .ribbon
            .inner
            .iter()
            .filter_map(|p| self.ribbon.mesh.vertices.iter().position(|v| v == p))
            .collect();
        let mut out = inner.clone();
        out.extend(self.dofmap.boundary_vertex_dofs().into_iter().filter(|i| !inner.contains(i)));
        out
    }

    fn errors(&self, uh: &DVector<f64>, u: ScalarField, grad: VectorField) -> Result<ErrorNorms> {
        let (mut l2, mut h1) = (0.0, 0.0);
        for (e, el) in self.elements.iter().enumerate() {
            let local = self.local(e, uh);
            let (space, coeff, gcoeff, rule) = match el {
                RibbonElement::Polygon(s) => {
                    let proj = crate::projectors::dofi_projector(&s.space)?;
                    let pg = crate::projectors::grad_l2(&s.space, self.degree - 1)?;
                    (&s.space, proj * &local, Some(pg.iter().map(|p| p * &local).collect::<Vec<_>>()), &s.space.domain)
                }
                RibbonElement::Triangle(t) => (&t.element.space, &t.dinv * &local, None, &t.domain),
            };
            let low = space.basis.with_degree(self.degree - 1);
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                let d = u(x) - dot(&space.basis.eval(x), &coeff);
                let g = grad(x);
                let gh = match &gcoeff {
                    Some(gc) => {
                        let m = low.eval(x);
                        [dot(&m, &gc[0]), dot(&m, &gc[1])]
                    }
                    None => space.basis.grad(x).iter().zip(coeff.iter()).fold([0.0; 2], |acc, (g, c)| {
                        [acc[0] + c * g[0], acc[1] + c * g[1]]
                    }),
                };
                l2 += w * d * d;
                h1 += w * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
            }
        }
        Ok(ErrorNorms {
            l2: l2.sqrt(),
            h1: h1.sqrt(),
        })
    }
}

fn dot(a: &[f64], b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn interior_triangle_matches_cotangent_formula() {
        // integrating over the whole triangle gives the classical P1 matrix
        let c = Curve::arc([0.0, 0.0], 1.0, 0.0, TAU).unwrap();
        let r = RibbonDiscretization::new(&c, 16, Some(0.2), 1, BoundaryTag::Neumann).unwrap();
        let t = r
            .elements
            .iter()
            .find_map(|e| match e {
                RibbonElement::Triangle(t) => Some(t),
                _ => None,
            })
            .expect("ribbon has triangles");
        // replace the clipped rule by the full-triangle rule
        let full = t.element.space.domain.clone();
        let tri = RibbonTriangle {
            domain: full,
            ..t.clone()
        };
        let k = tri.stiffness();
        let v = &t.element.poly.vertices;
        let cot = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
            let u = [b[0] - a[0], b[1] - a[1]];
            let w = [c[0] - a[0], c[1] - a[1]];
            (u[0] * w[0] + u[1] * w[1]) / (u[0] * w[1] - u[1] * w[0]).abs()
        };
        // K_ij = -cot(angle opposite edge ij) / 2
        for (i, j, o) in [(0, 1, 2), (1, 2, 0), (0, 2, 1)] {
            let expected = -0.5 * cot(v[o], v[i], v[j]);
            assert!((k[(i, j)] - expected).abs() < 1e-12, "{} vs {expected}", k[(i, j)]);
        }
    }

    #[test]
    fn clipped_areas_tile_the_disk() {
        let c = Curve::arc([0.0, 0.0], 1.0, 0.0, TAU).unwrap();
        let r = RibbonDiscretization::new(&c, 16, None, 2, BoundaryTag::Neumann).unwrap();
        let total = r.source_integrals(&|_| 1.0).unwrap().signed;
        assert!((total - std::f64::consts::PI).abs() < 1e-10);
    }
}
