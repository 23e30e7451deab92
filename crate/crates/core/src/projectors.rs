//! Polynomial projectors as dense matrices from local unknowns to
//! monomial coefficients.
//!
//! Every projector is computed from a [`LocalSpace`], which describes an
//! element purely through what is computable from its unknowns: the trace
//! on boundary quadrature points, the interior moments and the dof values
//! of monomials.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VemError};
use crate::geometry::{BoundaryRule, EdgeShape, Polygon2D, QuadratureRule};
use crate::polybasis::{poly_dim, ScaledMonomialBasis};

/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Computable description of one element.
#[derive(Debug, Clone)]
pub struct LocalSpace {
    pub dim: usize,
    pub degree: usize,
    /// Vertex values occupy the first `n_vertices` unknowns.
    pub n_vertices: usize,
    /// Degree-`k` scaled monomials of the element.
    pub basis: ScaledMonomialBasis,
    pub measure: f64,
    pub domain: QuadratureRule,
    pub boundary: BoundaryRule,
    /// Trace values at boundary points, one row per point.
    pub trace: DMatrix<f64>,
    /// Tangential derivative of the trace at boundary points (2D only).
    pub trace_tangent: Option<DMatrix<f64>>,
    /// `∫_P v m_β` for `|β| ≤ k - 2`, one row per `β`.
    pub moments: DMatrix<f64>,
    /// Local unknown values of each monomial (`D`), one column per monomial.
    pub dofs_of_poly: DMatrix<f64>,
    /// Columns holding generator values of a curved edge.
    pub slots: Vec<usize>,
}

impl LocalSpace {
    pub fn n_cols(&self) -> usize {
        self.dofs_of_poly.nrows()
    }

    pub fn n_poly(&self) -> usize {
        self.basis.len()
    }

    /// Monomial values at boundary points.
    pub fn boundary_eval(&self) -> DMatrix<f64> {
        self.basis.eval_matrix(&self.boundary.rule.points)
    }

    /// `∫_P ∇m_i·∇m_j`.
    pub fn stiffness_gram(&self) -> DMatrix<f64> {
        let n = self.n_poly();
        let mut g = DMatrix::zeros(n, n);
        for (x, w) in self.domain.points.iter().zip(&self.domain.weights) {
            let gr = self.basis.grad(x);
            for i in 0..n {
                for j in 0..=i {
                    g[(i, j)] += w * (gr[i][0] * gr[j][0] + gr[i][1] * gr[j][1] + gr[i][2] * gr[j][2]);
                }
            }
        }
        g.fill_upper_triangle_with_lower_triangle();
        g
    }
}

/// Pseudo-inverse with a rank check against `expected`.
pub fn pinv_checked(a: &DMatrix<f64>, expected: usize, what: &'static str) -> Result<DMatrix<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = RANK_TOL * smax;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    if rank < expected || smax == 0.0 {
        return Err(VemError::RankDeficient {
            what,
            rank,
            expected,
        });
    }
    let mut p = svd.pseudo_inverse(tol).map_err(|_| VemError::RankDeficient {
        what,
        rank,
        expected,
    })?;
    // the SVD loses digits when singular values nearly coincide; Newton-Schulz
    // steps X <- 2X - XAX restore them and keep truncated directions at zero
    for _ in 0..2 {
        p = &p * 2.0 - &p * a * &p;
    }
    Ok(p)
}

/// Energy projector onto `ℙ_k`, constant fixed by boundary averages.
pub fn pinabla(space: &LocalSpace) -> Result<DMatrix<f64>> {
    let n = space.n_poly();
    let ncols = space.n_cols();
    let mut g = space.stiffness_gram();
    let mut rhs = DMatrix::zeros(n, ncols);
    let bnd = &space.boundary;
    let lap = space.basis.laplacian_map();
    // boundary term  ∫_∂P v ∂m_i/∂n
    for q in 0..bnd.len() {
        let y = &bnd.rule.points[q];
        let w = bnd.rule.weights[q];
        let nq = &bnd.normals[q];
        let gr = space.basis.grad(y);
        for i in 1..n {
            let dn = w * (gr[i][0] * nq[0] + gr[i][1] * nq[1] + gr[i][2] * nq[2]);
            if dn != 0.0 {
                for c in 0..ncols {
                    rhs[(i, c)] += dn * space.trace[(q, c)];
                }
            }
        }
    }
    // volume term  -∫_P v Δm_i
    if lap.nrows() > 0 {
        rhs -= lap.transpose() * &space.moments;
    }
    // row 0: ∫_∂P (Π v - v) = 0
    let e = space.boundary_eval();
    for j in 0..n {
        g[(0, j)] = (0..bnd.len()).map(|q| bnd.rule.weights[q] * e[(q, j)]).sum();
    }
    for c in 0..ncols {
        rhs[(0, c)] = (0..bnd.len()).map(|q| bnd.rule.weights[q] * space.trace[(q, c)]).sum();
    }
    let lu = g.lu();
    lu.solve(&rhs).ok_or(VemError::DegenerateElement {
        element: usize::MAX,
        measure: space.measure,
    })
}

/// `L²` projection of `∇v` onto `[ℙ_s]^d`, one matrix per component.
pub fn grad_l2(space: &LocalSpace, s: usize) -> Result<Vec<DMatrix<f64>>> {
    let k = space.degree as isize;
    if s as isize > k - 1 {
        return Err(VemError::ProjectionDegree {
            requested: s,
            needed: s as isize - 1,
            available: k - 2,
            max: k - 1,
        });
    }
    let target = space.basis.with_degree(s);
    let mass = target.gram(&space.domain);
    let chol = mass.clone().cholesky().ok_or(VemError::IllConditioned {
        degree: s,
        cond: f64::INFINITY,
    })?;
    let ncols = space.n_cols();
    let ns = target.len();
    let bnd = &space.boundary;
    let mut out = Vec::with_capacity(space.dim);
    for d in 0..space.dim {
        let mut rhs = DMatrix::zeros(ns, ncols);
        for q in 0..bnd.len() {
            let w = bnd.rule.weights[q] * bnd.normals[q][d];
            if w == 0.0 {
                continue;
            }
            let m = target.eval(&bnd.rule.points[q]);
            for j in 0..ns {
                for c in 0..ncols {
                    rhs[(j, c)] += w * m[j] * space.trace[(q, c)];
                }
            }
        }
        if s > 0 {
            // ∂_d m_j has degree s - 1 ≤ k - 2: interior moments suffice
            let der = target.derivative_map(d);
            let rows = der.nrows();
            rhs -= der.transpose() * space.moments.rows(0, rows);
        }
        out.push(chol.solve(&rhs));
    }
    Ok(out)
}

/// Least-squares projector on the dof vector (`Π^D = D⁺`), computed with
/// unit-norm columns (`D⁺ = S (DS)⁺` for full column rank).
pub fn dofi_projector(space: &LocalSpace) -> Result<DMatrix<f64>> {
    let d = &space.dofs_of_poly;
    let norms: Vec<f64> = d.column_iter().map(|c| c.norm().max(f64::MIN_POSITIVE)).collect();
    let mut scaled = d.clone();
    for (j, n) in norms.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / n);
    }
    let mut p = pinv_checked(&scaled, space.n_poly(), "dof matrix")?;
    for (j, n) in norms.iter().enumerate() {
        p.row_mut(j).scale_mut(1.0 / n);
    }
    Ok(p)
}

/// Minimum number of straight lines covering the boundary of a straight polygon.
pub fn min_covering_lines(poly: &Polygon2D) -> usize {
    let h = poly.diameter();
    let n = poly.n_vertices();
    let mut lines: Vec<([f64; 2], [f64; 2])> = Vec::new();
    for i in 0..n {
        let (a, b) = poly.edge_endpoints(i);
        let d = [b[0] - a[0], b[1] - a[1]];
        let l = d[0].hypot(d[1]);
        let dir = [d[0] / l, d[1] / l];
        let same = lines.iter().any(|(p, t)| {
            let cross = (t[0] * dir[1] - t[1] * dir[0]).abs();
            let off = (t[0] * (a[1] - p[1]) - t[1] * (a[0] - p[0])).abs();
            cross <= 1e-9 && off <= 1e-9 * h
        });
        if !same {
            lines.push((a, dir));
        }
    }
    lines.len()
}

/// Serendipity projector on a straight polygon.
///
/// For `k < S(P)` the boundary equations `∫_∂P (v - Πv) q = 0` determine
/// the result. Otherwise interior moment equations of degree up to `r`
/// are added (default `r = k - 2`), and the joint system, with boundary
/// rows divided by `|∂P|` and interior rows by `|P|`, is solved in the
/// least-squares sense. Both unknowns and test polynomials are expressed
/// in an `L²(P)`-orthonormal basis, which avoids squaring the condition
/// number of the monomial Gram matrix.
pub fn serendipity(space: &LocalSpace, poly: &Polygon2D, r: Option<isize>) -> Result<DMatrix<f64>> {
    if poly.edges.iter().any(|e| matches!(e, EdgeShape::Curved(_))) {
        return Err(VemError::Unsupported("serendipity projector on curved polygons".into()));
    }
    let k = space.degree as isize;
    let s = min_covering_lines(poly) as isize;
    let n = space.n_poly();
    let ncols = space.n_cols();
    let bnd = &space.boundary;
    let perimeter = bnd.rule.measure();
    // unknowns and test functions in an L²(P)-orthonormal basis; the
    // Cholesky factor keeps the graded order, so ℙ_r is still a prefix
    let mass = space.basis.gram(&space.domain);
    let l = mass
        .cholesky()
        .ok_or(VemError::IllConditioned {
            degree: space.degree,
            cond: f64::INFINITY,
        })?
        .l();
    let linv = l.clone().try_inverse().ok_or(VemError::IllConditioned {
        degree: space.degree,
        cond: f64::INFINITY,
    })?;
    let e = space.boundary_eval() * linv.transpose();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, ncols);
    for q in 0..bnd.len() {
        let w = bnd.rule.weights[q] / perimeter;
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += w * e[(q, i)] * e[(q, j)];
            }
            for c in 0..ncols {
                b[(i, c)] += w * e[(q, i)] * space.trace[(q, c)];
            }
        }
    }
    let to_monomials = linv.transpose();
    if k < s {
        return pinv_checked(&a, n, "serendipity boundary system").map(|p| to_monomials * p * b);
    }
    let (lo, hi) = (k - s, k - 2);
    let r = r.unwrap_or(hi);
    if r < lo || r > hi {
        return Err(VemError::SerendipityRange { r, lo, hi });
    }
    let nr = poly_dim(2, r);
    let mut big_a = DMatrix::zeros(n + nr, n);
    let mut big_b = DMatrix::zeros(n + nr, ncols);
    big_a.rows_mut(0, n).copy_from(&a);
    big_b.rows_mut(0, n).copy_from(&b);
    for i in 0..nr {
        big_a[(n + i, i)] = 1.0 / space.measure;
    }
    big_b
        .rows_mut(n, nr)
        .copy_from(&(linv.view((0, 0), (nr, nr)) * space.moments.rows(0, nr) / space.measure));
    Ok(to_monomials * pinv_checked(&big_a, n, "serendipity system")? * big_b)
}

/// All projector matrices of one element.
#[derive(Debug, Clone)]
pub struct ProjectorMatrices {
    pub pnabla: DMatrix<f64>,
    /// Gradient projection onto `[ℙ_{k-1}]^d`.
    pub pgrad: Vec<DMatrix<f64>>,
    /// `None` when the dof matrix does not identify `ℙ_k`.
    pub pdofi: Option<DMatrix<f64>>,
    pub pserendip: Option<DMatrix<f64>>,
    pub d: DMatrix<f64>,
}

impl ProjectorMatrices {
    pub fn compute(space: &LocalSpace) -> Result<Self> {
        Ok(ProjectorMatrices {
            pnabla: pinabla(space)?,
            pgrad: grad_l2(space, space.degree - 1)?,
            pdofi: dofi_projector(space).ok(),
            pserendip: None,
            d: space.dofs_of_poly.clone(),
        })
    }
}

/// Coefficients of a polynomial from its local values, used to map
/// closed-form polynomials into local unknowns in tests and Dirichlet data.
pub fn poly_dofs(space: &LocalSpace, coeffs: &DVector<f64>) -> DVector<f64> {
    &space.dofs_of_poly * coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curved2d::CurvedStrategy;
    use crate::geometry::{p2, Curve, OrientedCurve, Point};
    use crate::vem2d::build_element_space;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn square() -> Polygon2D {
        Polygon2D::straight(0, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    fn quarter_disk() -> Polygon2D {
        let arc = Curve::arc([0.0, 0.0], 1.0, 0.0, PI / 2.0).unwrap();
        let oc = OrientedCurve::attach(&arc, [1.0, 0.0], [0.0, 1.0]).unwrap();
        Polygon2D {
            id: 0,
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            edges: vec![EdgeShape::Straight, EdgeShape::Curved(oc), EdgeShape::Straight],
        }
    }

    fn value(space: &LocalSpace, c: &DVector<f64>, x: [f64; 2]) -> f64 {
        space.basis.eval(&p2(x)).iter().zip(c.iter()).map(|(a, b)| a * b).sum()
    }

    fn space_of(poly: Polygon2D, k: usize, strategy: CurvedStrategy) -> LocalSpace {
        let ids: Vec<usize> = (0..poly.n_vertices()).collect();
        build_element_space(poly, &ids, k, strategy).unwrap().space
    }

    #[test]
    fn hat_function_on_unit_square() {
        let space = space_of(square(), 1, CurvedStrategy::Generators);
        let hat = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let c = pinabla(&space).unwrap() * &hat;
        for x in [[0.0, 0.0], [0.3, 0.8], [1.0, 1.0]] {
            let expected = 0.75 - 0.5 * (x[0] + x[1]);
            assert!((value(&space, &c, x) - expected).abs() < 1e-13);
        }
        let g = grad_l2(&space, 0).unwrap();
        let m0 = space.basis.with_degree(0).eval(&p2([0.5, 0.5]))[0];
        for comp in &g {
            assert!(((comp * &hat)[0] * m0 + 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn pseudo_inverse_with_close_singular_values() {
        // singular values 10508, 10487, 5223: the plain SVD inverse is off by 1e-8
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[
                5243.781082521688, 255.34318473871815, 212.82418009576784,
                255.34318473871838, 10495.118907289354, -13.56434062634409,
                212.82418009576773, -13.564340626343864, 10479.24355322394,
            ],
        );
        let p = pinv_checked(&a, 3, "test").unwrap();
        assert!((p * a - DMatrix::<f64>::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn gradient_degree_above_k_minus_one_is_refused() {
        let space = space_of(square(), 2, CurvedStrategy::Generators);
        match grad_l2(&space, 2) {
            Err(VemError::ProjectionDegree { requested: 2, max: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn covering_lines() {
        let tri = Polygon2D::straight(0, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(min_covering_lines(&tri), 3);
        let sq = Polygon2D::straight(0, vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(min_covering_lines(&sq), 4);
        let hex: Vec<[f64; 2]> = (0..6).map(|i| [(i as f64 * PI / 3.0).cos(), (i as f64 * PI / 3.0).sin()]).collect();
        assert_eq!(min_covering_lines(&Polygon2D::straight(0, hex)), 6);
    }

    #[test]
    fn serendipity_range_on_square() {
        // four lines cover the square: for k = 4 the range is r ∈ [0, 2]
        let space = space_of(square(), 4, CurvedStrategy::Generators);
        let d = &space.dofs_of_poly;
        for r in [0, 1, 2] {
            let p = serendipity(&space, &square(), Some(r)).unwrap();
            assert!((p * d - DMatrix::identity(15, 15)).amax() < 1e-9, "r = {r}");
        }
        for r in [-1, 3] {
            assert!(matches!(
                serendipity(&space, &square(), Some(r)),
                Err(VemError::SerendipityRange { lo: 0, hi: 2, .. })
            ));
        }
        // k = 3 < 4 lines: boundary data alone suffice
        let space = space_of(square(), 3, CurvedStrategy::Generators);
        let p = serendipity(&space, &square(), None).unwrap();
        assert!((p * &space.dofs_of_poly - DMatrix::identity(10, 10)).amax() < 1e-10);
    }

    fn convex_polygon(n: usize, jitter: &[f64], scale: f64, shift: [f64; 2]) -> Polygon2D {
        let v = (0..n)
            .map(|i| {
                let t = 2.0 * PI * (i as f64 + 0.4 * jitter[i]) / n as f64;
                [shift[0] + scale * t.cos(), shift[1] + scale * t.sin()]
            })
            .collect();
        Polygon2D::straight(0, v)
    }

    fn check_identity(space: &LocalSpace, p: &DMatrix<f64>, what: &str) {
        let n = space.n_poly();
        let err = (p * &space.dofs_of_poly - DMatrix::identity(n, n)).amax();
        assert!(err < 1e-10, "{what}: |PD - I| = {err:e}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn projectors_preserve_polynomials(
            n in 3usize..8,
            jitter in proptest::collection::vec(-1.0f64..1.0, 8),
            scale in 0.01f64..10.0,
            shift in proptest::array::uniform2(-5.0f64..5.0),
            k in 1usize..4,
        ) {
            let poly = convex_polygon(n, &jitter, scale, shift);
            let space = space_of(poly.clone(), k, CurvedStrategy::Generators);
            check_identity(&space, &pinabla(&space).unwrap(), "energy");
            check_identity(&space, &dofi_projector(&space).unwrap(), "dof");
            check_identity(&space, &serendipity(&space, &poly, None).unwrap(), "serendipity");
            // gradient projection returns the exact gradient
            let low = space.basis.with_degree(k - 1);
            for (d, pg) in grad_l2(&space, k - 1).unwrap().iter().enumerate() {
                let der = space.basis.derivative_map(d);
                let exact = DMatrix::from_fn(low.len(), space.n_poly(), |i, j| if i < der.nrows() { der[(i, j)] } else { 0.0 });
                let err = (pg * &space.dofs_of_poly - exact).amax();
                prop_assert!(err < 1e-8, "gradient {d}: {err:e}");
            }
        }

        #[test]
        fn energy_projector_is_orthogonal_and_fixes_the_mean(
            n in 3usize..8,
            jitter in proptest::collection::vec(-1.0f64..1.0, 8),
            k in 1usize..4,
            coef in proptest::array::uniform3(-2.0f64..2.0),
        ) {
            let poly = convex_polygon(n, &jitter, 1.0, [0.3, -0.2]);
            let ids: Vec<usize> = (0..n).collect();
            let el = build_element_space(poly, &ids, k, CurvedStrategy::Generators).unwrap();
            let space = &el.space;
            // v of degree k + 1 with closed-form gradient
            let p = (k + 1) as i32;
            let v = |x: &Point| coef[0] * x[0].powi(p) + coef[1] * x[1].powi(p) + coef[2] * x[0] * x[1].powi(p - 1);
            let grad = |x: &Point| {
                let pf = p as f64;
                [
                    coef[0] * pf * x[0].powi(p - 1) + coef[2] * x[1].powi(p - 1),
                    coef[1] * pf * x[1].powi(p - 1) + coef[2] * (pf - 1.0) * x[0] * x[1].powi(p - 2),
                ]
            };
            // a one-column space carrying the exact trace and moments of v
            let mut exact = space.clone();
            exact.trace = DMatrix::from_fn(space.boundary.len(), 1, |q, _| v(&space.boundary.rule.points[q]));
            let low = space.basis.with_degree(k.saturating_sub(2));
            let nm = space.moments.nrows();
            exact.moments = DMatrix::from_fn(nm, 1, |b, _| {
                space.domain.points.iter().zip(&space.domain.weights).map(|(x, w)| w * v(x) * low.eval(x)[b]).sum()
            });
            exact.dofs_of_poly = DMatrix::zeros(1, space.n_poly());
            let c = pinabla(&exact).unwrap().column(0).into_owned();
            let pi = pinabla(space).unwrap();
            let nb = space.n_poly();
            for j in 1..nb {
                let mut s = 0.0;
                for (x, w) in space.domain.points.iter().zip(&space.domain.weights) {
                    let gm = space.basis.grad(x);
                    let gp = space.basis.grad(x).iter().zip(c.iter()).fold([0.0; 2], |a, (g, ci)| [a[0] + ci * g[0], a[1] + ci * g[1]]);
                    let g = grad(x);
                    s += w * ((g[0] - gp[0]) * gm[j][0] + (g[1] - gp[1]) * gm[j][1]);
                }
                prop_assert!(s.abs() < 1e-10, "orthogonality defect {s:e} against m_{j}");
            }
            // boundary mean of Π∇v - v vanishes for any dof vector
            let r = DVector::from_fn(space.n_cols(), |i, _| ((i * 7919) % 13) as f64 - 6.0);
            let pr = &pi * &r;
            let bnd = &space.boundary;
            let e = space.boundary_eval() * &pr - &space.trace * &r;
            let defect: f64 = (0..bnd.len()).map(|q| bnd.rule.weights[q] * e[q]).sum();
            prop_assert!(defect.abs() < 1e-10 * bnd.rule.measure());
            // energy and dof projectors agree on polynomials
            let poly_c = DVector::from_fn(nb, |i, _| (i as f64 + 1.0).recip());
            let d = &space.dofs_of_poly * &poly_c;
            let diff = (&pi * &d - dofi_projector(space).unwrap() * &d).amax();
            prop_assert!(diff < 1e-10);
        }

        #[test]
        fn curved_energy_projector_preserves_polynomials(k in 1usize..4, which in 0usize..3) {
            let strategy = [CurvedStrategy::Generators, CurvedStrategy::Subset, CurvedStrategy::SubsetMfd][which];
            let space = space_of(quarter_disk(), k, strategy);
            check_identity(&space, &pinabla(&space).unwrap(), "energy");
        }
    }
}
