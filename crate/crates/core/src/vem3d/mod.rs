//! Virtual elements on polyhedral meshes, with at most one curved
//! boundary face per element.

pub mod space;

use nalgebra::DVector;

use crate::discrete::{Discretization, ErrorNorms, FluxField, Integrals, ScalarField, VectorField};
use crate::error::{Result, VemError};
use crate::geometry::{BoundaryTag, Mesh3D};
use crate::polybasis::poly_dim;
use crate::projectors::{dofi_projector, grad_l2, pinabla};
use crate::solver::{CsrMatrix, Triplets};
use crate::vem2d::{local_load, local_stiffness, ElementMatrices, StiffnessOptions};

pub use space::{build_face_space, build_polyhedron_space, FaceSpace, LocalDof3D, PolyhedronSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind3D {
    Vertex(usize),
    EdgeMoment { edge: usize, j: usize },
    FaceMoment { face: usize, j: usize },
    Interior { element: usize, j: usize },
}

/// Global numbering: vertices, then straight-edge moments, flat-face
/// moments and interior moments.
#[derive(Debug, Clone)]
pub struct DofMap3D {
    pub kinds: Vec<DofKind3D>,
    pub element_dofs: Vec<Vec<usize>>,
    /// Tag of the boundary part carrying each unknown; Dirichlet wins.
    pub boundary: Vec<Option<BoundaryTag>>,
}

impl DofMap3D {
    pub fn n_dofs(&self) -> usize {
        self.kinds.len()
    }

    fn build(mesh: &Mesh3D, k: usize, elements: &[PolyhedronSpace]) -> Self {
        let mut kinds: Vec<DofKind3D> = (0..mesh.vertices.len()).map(DofKind3D::Vertex).collect();
        let mut edge_base = vec![usize::MAX; mesh.edges.len()];
        for g in 0..mesh.edges.len() {
            if !mesh.edge_curved[g] {
                edge_base[g] = kinds.len();
                kinds.extend((0..k - 1).map(|j| DofKind3D::EdgeMoment { edge: g, j }));
            }
        }
        let nf = poly_dim(2, k as isize - 2);
        let mut face_base = vec![usize::MAX; mesh.faces.len()];
        for f in 0..mesh.faces.len() {
            if mesh.faces[f].surface.is_none() {
                face_base[f] = kinds.len();
                kinds.extend((0..nf).map(|j| DofKind3D::FaceMoment { face: f, j }));
            }
        }
        let ni = poly_dim(3, k as isize - 2);
        let mut interior_base = Vec::with_capacity(elements.len());
        for e in 0..elements.len() {
            interior_base.push(kinds.len());
            kinds.extend((0..ni).map(|j| DofKind3D::Interior { element: e, j }));
        }
        let element_dofs = elements
            .iter()
            .enumerate()
            .map(|(e, el)| {
                el.layout
                    .iter()
                    .map(|dof| match *dof {
                        LocalDof3D::Vertex(v) => v,
                        LocalDof3D::EdgeMoment { edge, j } => edge_base[edge] + j,
                        LocalDof3D::FaceMoment { face, j } => face_base[face] + j,
                        LocalDof3D::Interior(j) => interior_base[e] + j,
                    })
                    .collect()
            })
            .collect();

        let mut boundary = vec![None; kinds.len()];
        let mut mark = |i: usize, tag: BoundaryTag| {
            if boundary[i] != Some(BoundaryTag::Dirichlet) {
                boundary[i] = Some(tag);
            }
        };
        for (f, face) in mesh.faces.iter().enumerate() {
            let Some(tag) = mesh.boundary[f] else { continue };
            for &v in &face.vertices {
                mark(v, tag);
            }
            for &(g, _) in &mesh.face_edges[f] {
                if edge_base[g] != usize::MAX {
                    (0..k - 1).for_each(|j| mark(edge_base[g] + j, tag));
                }
            }
            if face_base[f] != usize::MAX {
                (0..nf).for_each(|j| mark(face_base[f] + j, tag));
            }
        }
        DofMap3D {
            kinds,
            element_dofs,
            boundary,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Discretization3D {
    pub mesh: Mesh3D,
    pub degree: usize,
    /// Space of every flat face, `None` on curved faces.
    pub faces: Vec<Option<FaceSpace>>,
    pub elements: Vec<PolyhedronSpace>,
    pub dofmap: DofMap3D,
}

impl Discretization3D {
    pub fn new(mesh: &Mesh3D, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(VemError::Config("degree must be at least 1".into()));
        }
        // the fitted trace on a curved face involves interior unknowns, so
        // test functions do not vanish there: natural conditions only
        if let Some(f) = (0..mesh.faces.len())
            .find(|&f| mesh.faces[f].surface.is_some() && mesh.boundary[f] == Some(BoundaryTag::Dirichlet))
        {
            return Err(VemError::Unsupported(format!(
                "Dirichlet data on curved face {f}; curved faces take natural conditions (use --bc mixed or neumann)"
            )));
        }
        let faces = (0..mesh.faces.len())
            .map(|f| match mesh.faces[f].surface {
                Some(_) => Ok(None),
                None => build_face_space(mesh, f, k).map(Some),
            })
            .collect::<Result<Vec<_>>>()?;
        let elements = (0..mesh.n_elements())
            .map(|e| build_polyhedron_space(mesh, e, k, &faces))
            .collect::<Result<Vec<_>>>()?;
        let dofmap = DofMap3D::build(mesh, k, &elements);
        Ok(Discretization3D {
            mesh: mesh.clone(),
            degree: k,
            faces,
            elements,
            dofmap,
        })
    }

    pub fn element_matrices(&self, opts: &StiffnessOptions) -> Result<Vec<ElementMatrices>> {
        self.elements.iter().map(|el| local_stiffness(&el.space, opts)).collect()
    }

    fn local(&self, e: usize, uh: &DVector<f64>) -> DVector<f64> {
        let map = &self.dofmap.element_dofs[e];
        DVector::from_iterator(map.len(), map.iter().map(|&i| uh[i]))
    }
}

impl Discretization for Discretization3D {
    fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs()
    }

    fn assemble(&self, opts: &StiffnessOptions, f: ScalarField) -> Result<(CsrMatrix, DVector<f64>)> {
        let n = self.n_dofs();
        let mut trip = Triplets::new(n);
        let mut rhs = DVector::zeros(n);
        for (e, mats) in self.element_matrices(opts)?.into_iter().enumerate() {
            let map = &self.dofmap.element_dofs[e];
            trip.scatter(map, &mats.stiffness)?;
            let load = local_load(&self.elements[e].space, f)?;
            for (a, &g) in map.iter().enumerate() {
                rhs[g] += load[a];
            }
        }
        Ok((trip.to_csr(), rhs))
    }

    fn interpolate(&self, u: ScalarField) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.n_dofs());
        for (e, el) in self.elements.iter().enumerate() {
            let vals = el.interpolate(&self.mesh, &self.faces, u);
            for (a, &g) in self.dofmap.element_dofs[e].iter().enumerate() {
                out[g] = vals[a];
            }
        }
        Ok(out)
    }

    fn dirichlet(&self, g: ScalarField) -> Result<Vec<(usize, f64)>> {
        let mut fixed: Vec<Option<f64>> = vec![None; self.n_dofs()];
        for (e, el) in self.elements.iter().enumerate() {
            let map = &self.dofmap.element_dofs[e];
            let on = |i: &usize| self.dofmap.boundary[*i] == Some(BoundaryTag::Dirichlet) && fixed[*i].is_none();
            if !map.iter().any(on) {
                continue;
            }
            let vals = el.interpolate(&self.mesh, &self.faces, g);
            for (a, &i) in map.iter().enumerate() {
                if self.dofmap.boundary[i] == Some(BoundaryTag::Dirichlet) && fixed[i].is_none() {
                    fixed[i] = Some(vals[a]);
                }
            }
        }
        Ok(fixed.into_iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect())
    }

    /// Flux tested against the computable trace: the face energy projection
    /// on flat faces, the fitted polynomial on a curved face.
    fn neumann(&self, gn: FluxField) -> Result<(DVector<f64>, Integrals)> {
        let mut rhs = DVector::zeros(self.n_dofs());
        let mut ints = Integrals::default();
        for (e, el) in self.elements.iter().enumerate() {
            let bnd = &el.space.boundary;
            let map = &self.dofmap.element_dofs[e];
            let faces = &self.mesh.elements[e].faces;
            for q in 0..bnd.len() {
                if self.mesh.boundary[faces[bnd.edge[q]]] != Some(BoundaryTag::Neumann) {
                    continue;
                }
                let v = gn(&bnd.rule.points[q], &bnd.normals[q]) * bnd.rule.weights[q];
                ints.signed += v;
                ints.absolute += v.abs();
                for (a, &i) in map.iter().enumerate() {
                    rhs[i] += v * el.space.trace[(q, a)];
                }
            }
        }
        Ok((rhs, ints))
    }

    fn source_integrals(&self, f: ScalarField) -> Result<Integrals> {
        let mut ints = Integrals::default();
        for el in &self.elements {
            let r = &el.space.domain;
            for (x, w) in r.points.iter().zip(&r.weights) {
                let v = w * f(x);
                ints.signed += v;
                ints.absolute += v.abs();
            }
        }
        Ok(ints)
    }

    fn pin_candidates(&self) -> Vec<usize> {
        self.mesh.boundary_vertices()
    }

    fn errors(&self, uh: &DVector<f64>, u: ScalarField, grad: VectorField) -> Result<ErrorNorms> {
        let (mut l2, mut h1) = (0.0, 0.0);
        for (e, el) in self.elements.iter().enumerate() {
            let space = &el.space;
            let local = self.local(e, uh);
            let proj = match dofi_projector(space) {
                Ok(p) => p,
                Err(_) => pinabla(space)?,
            };
            let c = proj * &local;
            let gc: Vec<DVector<f64>> = grad_l2(space, self.degree - 1)?.iter().map(|p| p * &local).collect();
            let low = space.basis.with_degree(self.degree - 1);
            for (x, w) in space.domain.points.iter().zip(&space.domain.weights) {
                let d = u(x) - space.basis.eval_poly(&c, x);
                let m = low.eval(x);
                let g = grad(x);
                for (dim, gd) in gc.iter().enumerate() {
                    let gh: f64 = m.iter().zip(gd.iter()).map(|(a, b)| a * b).sum();
                    h1 += w * (g[dim] - gh).powi(2);
                }
                l2 += w * d * d;
            }
        }
        Ok(ErrorNorms {
            l2: l2.sqrt(),
            h1: h1.sqrt(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{solve_poisson, ProblemData, RunOptions};
    use crate::geometry::generate::{cube_mesh, octant_mesh};
    use crate::geometry::SurfacePatch;
    use crate::problems::Solution;

    #[test]
    fn single_cube_reproduces_linear_data() {
        let d = Discretization3D::new(&cube_mesh(1).unwrap(), 1).unwrap();
        let u = |x: &[f64; 3]| x[0];
        let data = ProblemData {
            f: &|_| 0.0,
            dirichlet: &u,
            neumann: &|_, _| 0.0,
        };
        let sol = solve_poisson(&d, &data, &RunOptions::default()).unwrap();
        let exact = d.interpolate(&u).unwrap();
        assert!((sol.dofs - exact).amax() < 1e-10);
    }

    #[test]
    fn cube_counts_and_constant_nullspace() {
        let d = Discretization3D::new(&cube_mesh(1).unwrap(), 2).unwrap();
        assert_eq!(d.n_dofs(), 27);
        let k = &d.element_matrices(&StiffnessOptions::default()).unwrap()[0].stiffness;
        // face and interior moments of a constant are not all ones
        let ones = d.interpolate(&|_| 1.0).unwrap();
        assert!((k * ones).amax() < 1e-12);
    }

    /// Cube mesh whose faces on `z = 1` are declared curved (but stay flat),
    /// Neumann there and Dirichlet elsewhere.
    fn cube_with_flat_curved_top(n: usize) -> Mesh3D {
        let m = cube_mesh(n).unwrap();
        let top = |f: &crate::geometry::Face3D| f.vertices.iter().all(|&v| m.vertices[v][2] == 1.0);
        let faces = m.faces.iter().map(|f| (f.vertices.clone(), top(f).then_some(0))).collect();
        let tags = (0..m.faces.len())
            .filter(|&f| m.boundary[f].is_some())
            .map(|f| (f, if top(&m.faces[f]) { BoundaryTag::Neumann } else { BoundaryTag::Dirichlet }))
            .collect();
        Mesh3D::new(m.vertices.clone(), vec![SurfacePatch::Flat], faces, m.elements.clone(), &tags, None).unwrap()
    }

    #[test]
    fn flat_declared_curved_face_reproduces_polynomials() {
        for (n, k, u) in [(1, 1, Solution::Poly1), (2, 1, Solution::Poly1), (2, 2, Solution::Poly2)] {
            let d = Discretization3D::new(&cube_with_flat_curved_top(n), k).unwrap();
            assert!(d.elements.iter().any(|e| e.curved.is_some()));
            let value = |p: &[f64; 3]| u.value(3, p);
            let data = ProblemData {
                f: &|p| u.source(3, p),
                dirichlet: &value,
                neumann: &|p, nrm| u.flux(3, p, nrm),
            };
            let sol = solve_poisson(&d, &data, &RunOptions::default()).unwrap();
            let err = (sol.dofs - d.interpolate(&value).unwrap()).amax();
            assert!(err < 1e-9, "n={n} k={k}: {err:e}");
        }
    }

    #[test]
    fn dirichlet_curved_faces_are_rejected() {
        let mesh = octant_mesh(1).unwrap();
        assert!(matches!(Discretization3D::new(&mesh, 1), Err(VemError::Unsupported(_))));
    }

    #[test]
    fn octant_boundary_tags() {
        let mut mesh = octant_mesh(1).unwrap();
        mesh.set_all_boundary(BoundaryTag::Neumann);
        let d = Discretization3D::new(&mesh, 2).unwrap();
        // the origin and every sphere vertex lie on the boundary
        assert_eq!(d.pin_candidates().len(), d.mesh.vertices.len());
        assert!(d.dofmap.boundary.iter().any(|b| b.is_none()));
    }
}
