//! Local unknowns of a polygon and everything computable from them.
//!
//! Unknowns, in local order:
//! - vertex values;
//! - on every straight edge, `∫_{-1/2}^{1/2} v(x(s)) s^j ds` for
//!   `j ≤ k - 2`, where `x(s)` runs from the endpoint with the smaller
//!   global id (`s = -1/2`) to the other one; this is the edge mean of `v`
//!   against edge-scaled monomials;
//! - interior moments `(1/|P|) ∫_P v m_β`, `|β| ≤ k - 2`;
//! - values at generating points, for a curved edge treated with generators.

use nalgebra::{DMatrix, DVector};

use crate::curved2d::{build_generator_set, subset_polynomial, CurvedStrategy, GeneratorSet};
use crate::error::{Result, VemError};
use crate::geometry::quadrature::{gauss_legendre, points_for_order};
use crate::geometry::{p2, EdgeShape, Point, Polygon2D};
use crate::polybasis::{poly_dim, ScaledMonomialBasis};
use crate::projectors::LocalSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalDof {
    Vertex(usize),
    EdgeMoment { edge: usize, j: usize },
    Interior(usize),
    Slot(usize),
}

#[derive(Debug, Clone)]
pub struct ElementSpace {
    pub poly: Polygon2D,
    pub layout: Vec<LocalDof>,
    pub space: LocalSpace,
    pub area: f64,
    pub centroid: [f64; 2],
    pub diameter: f64,
    pub generators: Option<GeneratorSet>,
    /// Curved local edge and the matrix from local unknowns to the
    /// coefficients of the polynomial whose restriction is the trace there.
    pub curved: Option<(usize, DMatrix<f64>)>,
    /// Per local edge: runs from the smaller to the larger global vertex id.
    pub forward: Vec<bool>,
}

/// Inverse of the map from the coefficients of `Σ c_p s^p` on `[-1/2, 1/2]`
/// to its endpoint values and moments against `s^j`, `j ≤ k - 2`.
pub fn edge_reconstruction(k: usize) -> DMatrix<f64> {
    let n = k + 1;
    let mut m = DMatrix::zeros(n, n);
    for p in 0..n {
        m[(0, p)] = (-0.5f64).powi(p as i32);
        m[(1, p)] = 0.5f64.powi(p as i32);
        for j in 0..k.saturating_sub(1) {
            let e = (p + j + 1) as i32;
            m[(2 + j, p)] = (0.5f64.powi(e) - (-0.5f64).powi(e)) / e as f64;
        }
    }
    m.try_inverse().expect("edge moment system is unisolvent")
}

/// Edge quadrature on `[-1/2, 1/2]` exact for degree `order`.
pub(crate) fn centered_gauss(order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(points_for_order(order));
    x.into_iter().zip(w).map(|(x, w)| (x - 0.5, w)).collect()
}

impl ElementSpace {
    pub fn n_dofs(&self) -> usize {
        self.layout.len()
    }

    /// Endpoints of local edge `i` in global orientation.
    pub fn oriented_edge(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let (a, b) = self.poly.edge_endpoints(i);
        if self.forward[i] {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Local unknowns of a function.
    pub fn interpolate(&self, f: &dyn Fn(&Point) -> f64) -> DVector<f64> {
        self.interpolate_mapped(f, &|_, x| x)
    }

    /// Same as [`interpolate`](Self::interpolate), with points on edge
    /// moments passed through `map(local edge, point)` first.
    pub fn interpolate_mapped(&self, f: &dyn Fn(&Point) -> f64, map: &dyn Fn(usize, [f64; 2]) -> [f64; 2]) -> DVector<f64> {
        let k = self.space.degree;
        let gauss = centered_gauss(2 * k + 4);
        let interior = self.space.basis.clone();
        let rule = &self.space.domain;
        DVector::from_iterator(
            self.layout.len(),
            self.layout.iter().map(|dof| match *dof {
                LocalDof::Vertex(i) => f(&p2(self.poly.vertices[i])),
                LocalDof::EdgeMoment { edge, j } => {
                    let (a, b) = self.oriented_edge(edge);
                    gauss
                        .iter()
                        .map(|(s, w)| {
                            let x = [0.5 * (a[0] + b[0]) + s * (b[0] - a[0]), 0.5 * (a[1] + b[1]) + s * (b[1] - a[1])];
                            w * f(&p2(map(edge, x))) * s.powi(j as i32)
                        })
                        .sum()
                }
                LocalDof::Interior(j) => {
                    let mut acc = 0.0;
                    for (x, w) in rule.points.iter().zip(&rule.weights) {
                        acc += w * f(x) * interior.eval(x)[j];
                    }
                    acc / self.area
                }
                LocalDof::Slot(j) => {
                    let g = self.generators.as_ref().expect("slots come with generators");
                    f(&p2(g.points[j]))
                }
            }),
        )
    }
}

/// Builds the local space of polygon `poly` whose vertices carry global ids
/// `ids`. A curved edge is handled according to `strategy`.
pub fn build_element_space(poly: Polygon2D, ids: &[usize], k: usize, strategy: CurvedStrategy) -> Result<ElementSpace> {
    build_element_space_with(poly, ids, k, strategy, k as isize - 2)
}

/// Same as [`build_element_space`] with interior moments up to
/// `interior_degree`. Projectors need `k - 2`; triangles carrying plain
/// polynomials use `k - 3`.
pub fn build_element_space_with(
    poly: Polygon2D,
    ids: &[usize],
    k: usize,
    strategy: CurvedStrategy,
    interior_degree: isize,
) -> Result<ElementSpace> {
    if k == 0 {
        return Err(VemError::Config("degree must be at least 1".into()));
    }
    let nv = poly.n_vertices();
    if ids.len() != nv {
        return Err(VemError::LengthMismatch {
            expected: nv,
            got: ids.len(),
        });
    }
    let (area, centroid, h) = poly.measures()?;
    let basis = ScaledMonomialBasis::new(2, p2(centroid), h, k);
    let order = 2 * k + 2;
    let domain = poly.domain_rule(order)?;
    let boundary = poly.boundary_rule(order);
    let forward: Vec<bool> = (0..nv).map(|i| ids[i] < ids[(i + 1) % nv]).collect();
    let curved_edge = poly.edges.iter().position(|e| matches!(e, EdgeShape::Curved(_)));
    if poly.edges.iter().filter(|e| matches!(e, EdgeShape::Curved(_))).count() > 1 {
        return Err(VemError::Unsupported(format!("element {} has more than one curved edge", poly.id)));
    }
    if curved_edge.is_some() && !matches!(strategy, CurvedStrategy::Generators | CurvedStrategy::Subset | CurvedStrategy::SubsetMfd) {
        return Err(VemError::Unsupported(format!(
            "strategy '{strategy}' does not build curved polygons (element {})",
            poly.id
        )));
    }

    // layout
    let mut layout: Vec<LocalDof> = (0..nv).map(LocalDof::Vertex).collect();
    let mut edge_col = vec![usize::MAX; nv];
    for i in 0..nv {
        if Some(i) == curved_edge {
            continue;
        }
        edge_col[i] = layout.len();
        for j in 0..k - 1 {
            layout.push(LocalDof::EdgeMoment { edge: i, j });
        }
    }
    let interior_start = layout.len();
    let n_int = poly_dim(2, interior_degree);
    layout.extend((0..n_int).map(LocalDof::Interior));
    let generators = match (curved_edge, strategy) {
        (Some(ci), CurvedStrategy::Generators) => {
            let EdgeShape::Curved(oc) = &poly.edges[ci] else { unreachable!() };
            let (a, b) = poly.edge_endpoints(ci);
            Some(build_generator_set(oc, a, b, k))
        }
        _ => None,
    };
    let slot_start = layout.len();
    if let Some(g) = &generators {
        layout.extend((0..g.points.len()).map(LocalDof::Slot));
    }
    let ncols = layout.len();
    let npoly = basis.len();

    // unknowns of each monomial
    let gram = basis.gram(&domain);
    let gauss = centered_gauss(2 * k);
    let mut d = DMatrix::zeros(ncols, npoly);
    for (r, dof) in layout.iter().enumerate() {
        let row: Vec<f64> = match *dof {
            LocalDof::Vertex(i) => basis.eval(&p2(poly.vertices[i])),
            LocalDof::EdgeMoment { edge, j } => {
                let (a, b) = if forward[edge] {
                    poly.edge_endpoints(edge)
                } else {
                    let (a, b) = poly.edge_endpoints(edge);
                    (b, a)
                };
                let mut acc = vec![0.0; npoly];
                for (s, w) in &gauss {
                    let x = [0.5 * (a[0] + b[0]) + s * (b[0] - a[0]), 0.5 * (a[1] + b[1]) + s * (b[1] - a[1])];
                    let m = basis.eval(&p2(x));
                    let ws = w * s.powi(j as i32);
                    for (c, v) in acc.iter_mut().zip(m) {
                        *c += ws * v;
                    }
                }
                acc
            }
            LocalDof::Interior(j) => gram.row(j).iter().map(|g| g / area).collect(),
            LocalDof::Slot(j) => basis.eval(&p2(generators.as_ref().unwrap().points[j])),
        };
        for (c, v) in row.into_iter().enumerate() {
            d[(r, c)] = v;
        }
    }

    // polynomial carrying the trace on the curved edge
    let curved = match curved_edge {
        None => None,
        Some(ci) => {
            let cj = (ci + 1) % nv;
            let m = match strategy {
                CurvedStrategy::Generators => {
                    let w = generators.as_ref().unwrap().midwife(&basis)?;
                    let mut m = DMatrix::zeros(npoly, ncols);
                    m.column_mut(ci).copy_from(&w.column(0));
                    m.column_mut(cj).copy_from(&w.column(1));
                    for s in 0..w.ncols() - 2 {
                        m.column_mut(slot_start + s).copy_from(&w.column(2 + s));
                    }
                    m
                }
                CurvedStrategy::Subset => subset_polynomial(&d, Some([ci, cj]))?,
                _ => subset_polynomial(&d, None)?,
            };
            Some((ci, m))
        }
    };

    // traces at boundary points
    let rec = edge_reconstruction(k);
    let nq = boundary.len();
    let mut trace = DMatrix::zeros(nq, ncols);
    let mut tangent = DMatrix::zeros(nq, ncols);
    for q in 0..nq {
        let i = boundary.edge[q];
        if let Some((ci, m)) = &curved {
            if *ci == i {
                let y = boundary.rule.points[q];
                let tau = boundary.tangents[q];
                let val = basis.eval(&y);
                let grad = basis.grad(&y);
                for c in 0..ncols {
                    let mut tv = 0.0;
                    let mut td = 0.0;
                    for p in 0..npoly {
                        tv += val[p] * m[(p, c)];
                        td += (grad[p][0] * tau[0] + grad[p][1] * tau[1]) * m[(p, c)];
                    }
                    trace[(q, c)] = tv;
                    tangent[(q, c)] = td;
                }
                continue;
            }
        }
        let t = boundary.param[q];
        let (s, sign) = if forward[i] { (t - 0.5, 1.0) } else { (0.5 - t, -1.0) };
        let (a, b) = poly.edge_endpoints(i);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let (ca, cb) = if forward[i] { (i, (i + 1) % nv) } else { ((i + 1) % nv, i) };
        let mut cols = vec![ca, cb];
        cols.extend((0..k - 1).map(|j| edge_col[i] + j));
        for (r, &c) in cols.iter().enumerate() {
            let mut v = 0.0;
            let mut dv = 0.0;
            for p in 0..=k {
                v += s.powi(p as i32) * rec[(p, r)];
                if p > 0 {
                    dv += p as f64 * s.powi(p as i32 - 1) * rec[(p, r)];
                }
            }
            trace[(q, c)] += v;
            tangent[(q, c)] += dv * sign / len;
        }
    }

    let mut moments = DMatrix::zeros(n_int, ncols);
    for j in 0..n_int {
        moments[(j, interior_start + j)] = area;
    }
    let space = LocalSpace {
        dim: 2,
        degree: k,
        n_vertices: nv,
        basis,
        measure: area,
        domain,
        boundary,
        trace,
        trace_tangent: Some(tangent),
        moments,
        dofs_of_poly: d,
        slots: (0..layout.len()).filter(|&c| matches!(layout[c], LocalDof::Slot(_))).collect(),
    };
    Ok(ElementSpace {
        poly,
        layout,
        space,
        area,
        centroid,
        diameter: h,
        generators,
        curved,
        forward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, OrientedCurve};
    use std::f64::consts::PI;

    pub(crate) fn unit_square() -> Polygon2D {
        Polygon2D::straight(0, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

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
    fn dof_counts_on_square() {
        for (k, n) in [(1, 4), (2, 9), (3, 15)] {
            let e = build_element_space(unit_square(), &[0, 1, 2, 3], k, CurvedStrategy::Generators).unwrap();
            assert_eq!(e.n_dofs(), n);
        }
    }

    #[test]
    fn curved_counts() {
        let g = build_element_space(quarter_disk(), &[0, 1, 2], 2, CurvedStrategy::Generators).unwrap();
        assert_eq!(g.n_dofs(), 3 + 2 + 1 + 4);
        // triangle-like: 2k + 1 + k(k-1)/2 unknowns, as many as quadratics
        let s = build_element_space(quarter_disk(), &[0, 1, 2], 2, CurvedStrategy::Subset).unwrap();
        assert_eq!(s.n_dofs(), 6);
    }

    #[test]
    fn edge_reconstruction_reproduces_cubics() {
        let k = 3;
        let rec = edge_reconstruction(k);
        let p = |s: f64| 0.2 - s + 3.0 * s * s - 2.0 * s * s * s;
        let mut data = vec![p(-0.5), p(0.5)];
        for j in 0..k - 1 {
            data.push(centered_gauss(8).iter().map(|(s, w)| w * p(*s) * s.powi(j as i32)).sum());
        }
        let c = rec * DVector::from_vec(data);
        let expected = [0.2, -1.0, 3.0, -2.0];
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn traces_reproduce_polynomials() {
        let cases = [
            (unit_square(), vec![0, 1, 2, 3], CurvedStrategy::Generators),
            (unit_square(), vec![3, 0, 2, 1], CurvedStrategy::Generators),
            (quarter_disk(), vec![0, 1, 2], CurvedStrategy::Generators),
            (quarter_disk(), vec![2, 0, 1], CurvedStrategy::Subset),
            (quarter_disk(), vec![0, 1, 2], CurvedStrategy::SubsetMfd),
        ];
        for (poly, ids, strategy) in cases {
            for k in 1..=3 {
                let e = build_element_space(poly.clone(), &ids, k, strategy).unwrap();
                let td = &e.space.trace * &e.space.dofs_of_poly;
                let direct = e.space.boundary_eval();
                assert!((td - direct).abs().max() < 1e-11, "{strategy} k={k}");
                // tangential derivatives of the reconstructed trace
                let tt = e.space.trace_tangent.as_ref().unwrap() * &e.space.dofs_of_poly;
                for q in 0..e.space.boundary.len() {
                    let g = e.space.basis.grad(&e.space.boundary.rule.points[q]);
                    let tau = e.space.boundary.tangents[q];
                    for p in 0..e.space.n_poly() {
                        let exact = g[p][0] * tau[0] + g[p][1] * tau[1];
                        assert!((tt[(q, p)] - exact).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn interpolation_matches_dof_matrix() {
        let e = build_element_space(quarter_disk(), &[0, 1, 2], 3, CurvedStrategy::Generators).unwrap();
        let c = DVector::from_fn(e.space.n_poly(), |i, _| (i as f64 * 0.7).sin());
        let basis = e.space.basis.clone();
        let vals = e.interpolate(&|x| basis.eval_poly(&c, x));
        assert!((vals - &e.space.dofs_of_poly * &c).abs().max() < 1e-12);
    }

    #[test]
    fn several_curved_edges_are_rejected() {
        let mut p = quarter_disk();
        p.edges[0] = p.edges[1].clone();
        assert!(build_element_space(p, &[0, 1, 2], 1, CurvedStrategy::Subset).is_err());
    }
}
