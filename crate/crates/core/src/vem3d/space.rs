//! Local unknowns of a polyhedron and everything computable from them.
//!
//! Unknowns, in local order:
//! - vertex values, vertices sorted by global id;
//! - on every straight edge, `∫_{-1/2}^{1/2} v(x(s)) s^j ds` for `j ≤ k - 2`,
//!   with `x(s)` running from the smaller global vertex id to the larger;
//! - on every flat face, `(1/|f|) ∫_f v m_β` for the scaled monomials of the
//!   face in its frame, `|β| ≤ k - 2`;
//! - interior moments `(1/|P|) ∫_P v m_β`, `|β| ≤ k - 2`.
//!
//! Edges of a curved face carry no unknowns and the curved face carries
//! none either. On a flat face the trace used by the projectors is the
//! energy projection of the face unknowns: moments of order `k - 1` on
//! faces are not available. On the curved face the trace is the polynomial
//! fitted to every unknown except the interior moments of degree `k - 2`;
//! for a cone over a spherical triangle (three flat faces) that system is
//! square.

use nalgebra::DMatrix;

use crate::curved2d::CurvedStrategy;
use crate::error::{Result, VemError};
use crate::geometry::{p2, Mesh3D, Point, Polyhedron};
use crate::polybasis::{poly_dim, ScaledMonomialBasis};
use crate::projectors::{pinabla, pinv_checked, LocalSpace};
use crate::vem2d::space::centered_gauss;
use crate::vem2d::{build_element_space, ElementSpace, LocalDof};

/// Two-dimensional space of a flat face, in the face frame.
#[derive(Debug, Clone)]
pub struct FaceSpace {
    pub face: usize,
    pub element: ElementSpace,
    /// Energy projector of the face, from face unknowns to face monomials.
    pub pinabla: DMatrix<f64>,
}

/// Builds the space of flat face `f`. A face with an edge on a curved
/// face uses the fitted polynomial on that edge.
pub fn build_face_space(mesh: &Mesh3D, f: usize, k: usize) -> Result<FaceSpace> {
    if mesh.faces[f].surface.is_some() {
        return Err(VemError::Unsupported(format!("face {f} is curved and has no face space")));
    }
    let poly = mesh.face_polygon(f)?;
    let strategy = if poly.is_curved() {
        CurvedStrategy::Subset
    } else {
        CurvedStrategy::Generators
    };
    let element = build_element_space(poly, &mesh.faces[f].vertices, k, strategy)?;
    let pinabla = pinabla(&element.space)?;
    Ok(FaceSpace {
        face: f,
        element,
        pinabla,
    })
}

/// Local unknowns, addressed by global ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalDof3D {
    Vertex(usize),
    EdgeMoment { edge: usize, j: usize },
    FaceMoment { face: usize, j: usize },
    Interior(usize),
}

#[derive(Debug, Clone)]
pub struct PolyhedronSpace {
    pub poly: Polyhedron,
    pub layout: Vec<LocalDof3D>,
    pub space: LocalSpace,
    pub volume: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// Local index of the curved face and the matrix from local unknowns to
    /// the coefficients of the polynomial giving the trace there.
    pub curved: Option<(usize, DMatrix<f64>)>,
}

impl PolyhedronSpace {
    pub fn n_dofs(&self) -> usize {
        self.layout.len()
    }

    /// Local unknowns of `u`.
    pub fn interpolate(&self, mesh: &Mesh3D, faces: &[Option<FaceSpace>], u: &dyn Fn(&Point) -> f64) -> Vec<f64> {
        let k = self.space.degree;
        self.layout
            .iter()
            .map(|dof| functional(mesh, faces, &self.space, dof, k, &|x| vec![u(x)])[0])
            .collect()
    }
}

/// Value of one unknown on a vector of functions given by `eval`.
fn functional(
    mesh: &Mesh3D,
    faces: &[Option<FaceSpace>],
    space: &LocalSpace,
    dof: &LocalDof3D,
    k: usize,
    eval: &dyn Fn(&Point) -> Vec<f64>,
) -> Vec<f64> {
    let accumulate = |acc: &mut Vec<f64>, v: Vec<f64>, w: f64| {
        if acc.is_empty() {
            acc.resize(v.len(), 0.0);
        }
        for (a, b) in acc.iter_mut().zip(v) {
            *a += w * b;
        }
    };
    let mut acc = Vec::new();
    match *dof {
        LocalDof3D::Vertex(v) => return eval(&mesh.vertices[v]),
        LocalDof3D::EdgeMoment { edge, j } => {
            let [a, b] = mesh.edges[edge];
            let (a, b) = (mesh.vertices[a], mesh.vertices[b]);
            for (s, w) in centered_gauss(2 * k + 4) {
                let x = [0, 1, 2].map(|d| 0.5 * (a[d] + b[d]) + s * (b[d] - a[d]));
                accumulate(&mut acc, eval(&x), w * s.powi(j as i32));
            }
        }
        LocalDof3D::FaceMoment { face, j } => {
            let fs = faces[face].as_ref().expect("flat faces have spaces");
            let frame = &mesh.faces[face].frame;
            let fsp = &fs.element.space;
            for (x, w) in fsp.domain.points.iter().zip(&fsp.domain.weights) {
                let m = fsp.basis.eval(x)[j];
                accumulate(&mut acc, eval(&frame.to_global([x[0], x[1]])), w * m / fs.element.area);
            }
        }
        LocalDof3D::Interior(j) => {
            for (x, w) in space.domain.points.iter().zip(&space.domain.weights) {
                let m = space.basis.eval(x)[j];
                accumulate(&mut acc, eval(x), w * m / space.measure);
            }
        }
    }
    acc
}

/// Builds the local space of element `e`; `faces[f]` holds the space of
/// every flat face `f`.
pub fn build_polyhedron_space(mesh: &Mesh3D, e: usize, k: usize, faces: &[Option<FaceSpace>]) -> Result<PolyhedronSpace> {
    if k == 0 {
        return Err(VemError::Config("degree must be at least 1".into()));
    }
    let poly = Polyhedron::from_mesh(mesh, e)?;
    let (volume, centroid, h) = poly.measures().map_err(|err| match err {
        VemError::DegenerateElement { measure, .. } => VemError::DegenerateElement { element: e, measure },
        other => other,
    })?;
    let basis = ScaledMonomialBasis::new(3, centroid, h, k);
    let order = 2 * k + 2;
    let domain = poly.domain_rule(order)?;
    let boundary = poly.boundary_rule(order)?;
    let element_faces = &mesh.elements[e].faces;
    let curved: Vec<usize> = (0..element_faces.len())
        .filter(|&i| mesh.faces[element_faces[i]].surface.is_some())
        .collect();
    if curved.len() > 1 {
        return Err(VemError::Unsupported(format!("element {e} has more than one curved face")));
    }
    let curved_face = curved.first().copied();

    // layout
    let vertices = mesh.element_vertices(e);
    let nv = vertices.len();
    let mut layout: Vec<LocalDof3D> = vertices.iter().map(|&v| LocalDof3D::Vertex(v)).collect();
    for g in mesh.element_edges(e) {
        if !mesh.edge_curved[g] {
            layout.extend((0..k - 1).map(|j| LocalDof3D::EdgeMoment { edge: g, j }));
        }
    }
    let nf = poly_dim(2, k as isize - 2);
    for &f in element_faces {
        if mesh.faces[f].surface.is_none() {
            layout.extend((0..nf).map(|j| LocalDof3D::FaceMoment { face: f, j }));
        }
    }
    let interior_start = layout.len();
    let n_int = poly_dim(3, k as isize - 2);
    layout.extend((0..n_int).map(LocalDof3D::Interior));
    let ncols = layout.len();
    let npoly = basis.len();
    let col = |dof: LocalDof3D| layout.iter().position(|d| *d == dof);

    let mut moments = DMatrix::zeros(n_int, ncols);
    for j in 0..n_int {
        moments[(j, interior_start + j)] = volume;
    }
    let mut space = LocalSpace {
        dim: 3,
        degree: k,
        n_vertices: nv,
        basis,
        measure: volume,
        domain,
        boundary,
        trace: DMatrix::zeros(0, ncols),
        trace_tangent: None,
        moments,
        dofs_of_poly: DMatrix::zeros(ncols, npoly),
        slots: Vec::new(),
    };

    // unknowns of each monomial
    let mut d = DMatrix::zeros(ncols, npoly);
    for (r, dof) in layout.iter().enumerate() {
        let row = functional(mesh, faces, &space, dof, k, &|x| space.basis.eval(x));
        for (c, v) in row.into_iter().enumerate() {
            d[(r, c)] = v;
        }
    }

    // each face trace through the local columns of the element
    let mut face_cols: Vec<Vec<usize>> = Vec::with_capacity(element_faces.len());
    for &f in element_faces {
        let Some(fs) = &faces[f] else {
            face_cols.push(vec![]);
            continue;
        };
        let cols = fs
            .element
            .layout
            .iter()
            .map(|dof| match *dof {
                LocalDof::Vertex(i) => col(LocalDof3D::Vertex(mesh.faces[f].vertices[i])),
                LocalDof::EdgeMoment { edge, j } => col(LocalDof3D::EdgeMoment {
                    edge: mesh.face_edges[f][edge].0,
                    j,
                }),
                LocalDof::Interior(j) => col(LocalDof3D::FaceMoment { face: f, j }),
                LocalDof::Slot(_) => None,
            })
            .collect::<Option<Vec<usize>>>()
            .ok_or_else(|| VemError::InvalidMesh(format!("face {f} unknowns do not match element {e}")))?;
        face_cols.push(cols);
    }

    // polynomial fitted on the curved face, from all unknowns but the
    // top-degree interior moments
    let fitted = match curved_face {
        None => None,
        Some(i) => {
            let keep: Vec<usize> = (0..ncols)
                .filter(|&r| !matches!(layout[r], LocalDof3D::Interior(j) if j >= poly_dim(3, k as isize - 3)))
                .collect();
            let sub = d.select_rows(keep.iter());
            let fit = pinv_checked(&sub, npoly, "curved-face polynomial fit")?;
            let mut m = DMatrix::zeros(npoly, ncols);
            for (a, &r) in keep.iter().enumerate() {
                m.column_mut(r).copy_from(&fit.column(a));
            }
            Some((i, m))
        }
    };

    let bnd = &space.boundary;
    let nq = bnd.len();
    let mut trace = DMatrix::zeros(nq, ncols);
    for q in 0..nq {
        let i = bnd.edge[q];
        let x = &bnd.rule.points[q];
        if let Some((ci, m)) = &fitted {
            if *ci == i {
                let vals = space.basis.eval(x);
                for c in 0..ncols {
                    trace[(q, c)] = (0..npoly).map(|p| vals[p] * m[(p, c)]).sum();
                }
                continue;
            }
        }
        let f = element_faces[i];
        let fs = faces[f].as_ref().expect("flat faces have spaces");
        let m = fs.element.space.basis.eval(&p2(mesh.faces[f].frame.to_local(x)));
        for (a, &c) in face_cols[i].iter().enumerate() {
            trace[(q, c)] += (0..m.len()).map(|p| m[p] * fs.pinabla[(p, a)]).sum::<f64>();
        }
    }
    space.trace = trace;
    space.dofs_of_poly = d;
    Ok(PolyhedronSpace {
        poly,
        layout,
        space,
        volume,
        centroid,
        diameter: h,
        curved: fitted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate::{cube_mesh, octant_mesh};
    use crate::projectors::dofi_projector;

    fn spaces(mesh: &Mesh3D, k: usize) -> Vec<Option<FaceSpace>> {
        (0..mesh.faces.len())
            .map(|f| (mesh.faces[f].surface.is_none()).then(|| build_face_space(mesh, f, k).unwrap()))
            .collect()
    }

    #[test]
    fn unit_cube_counts() {
        let mesh = cube_mesh(1).unwrap();
        for (k, n) in [(1, 8), (2, 8 + 12 + 6 + 1), (3, 8 + 24 + 18 + 4)] {
            let s = build_polyhedron_space(&mesh, 0, k, &spaces(&mesh, k)).unwrap();
            assert_eq!(s.n_dofs(), n, "k={k}");
        }
    }

    #[test]
    fn tetra_like_fit_is_square() {
        let mesh = octant_mesh(0).unwrap();
        for k in 1..=4 {
            let s = build_polyhedron_space(&mesh, 0, k, &spaces(&mesh, k)).unwrap();
            let top = poly_dim(3, k as isize - 2) - poly_dim(3, k as isize - 3);
            // (3k + 1) + 3 k(k-1)/2 + k(k-1)(k-2)/6 unknowns enter the fit
            let used = (3 * k + 1) + 3 * k * (k - 1) / 2 + k * (k - 1) * k.saturating_sub(2) / 6;
            assert_eq!(s.n_dofs() - top, used);
            assert_eq!(used, poly_dim(3, k as isize));
        }
    }

    #[test]
    fn traces_and_unknowns_reproduce_polynomials() {
        for mesh in [cube_mesh(1).unwrap(), octant_mesh(1).unwrap()] {
            for k in 1..=3 {
                let fs = spaces(&mesh, k);
                for e in 0..mesh.n_elements() {
                    let s = build_polyhedron_space(&mesh, e, k, &fs).unwrap();
                    let td = &s.space.trace * &s.space.dofs_of_poly;
                    assert!((td - s.space.boundary_eval()).abs().max() < 1e-10, "k={k} e={e}");
                    let pd = dofi_projector(&s.space).unwrap() * &s.space.dofs_of_poly;
                    let eye = DMatrix::<f64>::identity(s.space.n_poly(), s.space.n_poly());
                    let err = (pd - eye).abs().max();
                    assert!(err < 1e-9, "k={k} e={e}: {err}");
                }
            }
        }
    }

    #[test]
    fn interpolation_matches_dof_matrix() {
        let mesh = octant_mesh(1).unwrap();
        let fs = spaces(&mesh, 2);
        let s = build_polyhedron_space(&mesh, 3, 2, &fs).unwrap();
        let c: Vec<f64> = (0..s.space.n_poly()).map(|i| (i as f64 * 0.3).cos()).collect();
        let basis = s.space.basis.clone();
        let vals = s.interpolate(&mesh, &fs, &|x| basis.eval(x).iter().zip(&c).map(|(a, b)| a * b).sum());
        let direct = &s.space.dofs_of_poly * nalgebra::DVector::from_vec(c);
        for (a, b) in vals.iter().zip(direct.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
