//! Virtual elements on polygonal meshes.

pub mod dofs;
pub mod space;
pub mod stiffness;

use nalgebra::DVector;

use crate::curved2d::{generator_count, CurvedStrategy};
use crate::discrete::{Discretization, ErrorNorms, FluxField, Integrals, ScalarField, VectorField};
use crate::error::{Result, VemError};
use crate::geometry::{p2, BoundaryTag, Curve, Mesh2D, Point};
use crate::polybasis::poly_dim;
use crate::projectors::{dofi_projector, grad_l2, pinabla};
use crate::solver::{CsrMatrix, Triplets};

pub use dofs::{enumerate_dofs, DofKind, DofMap, EdgeUnknowns};
pub use space::{build_element_space, ElementSpace, LocalDof};
pub use stiffness::{local_load, local_stiffness, Consistency, ElementMatrices, Stabilization, StiffnessOptions};

#[derive(Debug, Clone)]
pub struct Discretization2D {
    pub mesh: Mesh2D,
    pub degree: usize,
    pub strategy: CurvedStrategy,
    pub elements: Vec<ElementSpace>,
    pub dofmap: DofMap,
    /// Chord meshes only: per edge, the boundary curve the chord replaced.
    pub chord_curves: Vec<Option<Curve>>,
}

impl Discretization2D {
    pub fn new(mesh: &Mesh2D, k: usize, strategy: CurvedStrategy) -> Result<Self> {
        let (mesh, chord_curves) = match strategy {
            CurvedStrategy::Facet => {
                let chords = mesh.edge_curve.iter().map(|c| c.map(|i| mesh.curves[i].clone())).collect();
                (mesh.facet(), chords)
            }
            CurvedStrategy::Ribbon => {
                return Err(VemError::Unsupported(
                    "the ribbon strategy has its own discretization".into(),
                ))
            }
            _ => (mesh.clone(), vec![None; mesh.edges.len()]),
        };
        // Subset reconstructions define traces for natural conditions only;
        // essential data on a curved edge is assigned through generator slots.
        let edge_strategy = |g: usize| match mesh.boundary[g] {
            Some(BoundaryTag::Dirichlet) => CurvedStrategy::Generators,
            _ => strategy,
        };
        let mut elements = Vec::with_capacity(mesh.n_elements());
        for e in 0..mesh.n_elements() {
            let s = match mesh.elements[e].curved_edge {
                Some((local, _)) => edge_strategy(mesh.element_edges[e][local].0),
                None => strategy,
            };
            elements.push(build_element_space(mesh.polygon(e)?, &mesh.elements[e].vertices, k, s)?);
        }
        let edge_content: Vec<EdgeUnknowns> = (0..mesh.edges.len())
            .map(|g| match (mesh.edge_curve[g], edge_strategy(g)) {
                (Some(_), CurvedStrategy::Generators) => EdgeUnknowns::Generators(generator_count(k)),
                (Some(_), _) => EdgeUnknowns::Generators(0),
                (None, _) => EdgeUnknowns::Moments(k - 1),
            })
            .collect();
        let interior = vec![poly_dim(2, k as isize - 2); mesh.n_elements()];
        let layouts: Vec<_> = elements.iter().map(|e| e.layout.clone()).collect();
        let areas: Vec<f64> = elements.iter().map(|e| e.area).collect();
        let dofmap = enumerate_dofs(&mesh, &edge_content, &interior, &layouts, &areas);
        Ok(Discretization2D {
            mesh,
            degree: k,
            strategy,
            elements,
            dofmap,
            chord_curves,
        })
    }

    pub fn element_matrices(&self, opts: &StiffnessOptions) -> Result<Vec<ElementMatrices>> {
        self.elements
            .iter()
            .enumerate()
            .map(|(e, el)| {
                local_stiffness(&el.space, opts).map_err(|err| match err {
                    VemError::DegenerateElement { measure, .. } => VemError::DegenerateElement { element: e, measure },
                    other => other,
                })
            })
            .collect()
    }

    fn global_edge(&self, e: usize, local: usize) -> usize {
        self.mesh.element_edges[e][local].0
    }

    /// Point on the true boundary matching a point on a chord, with the
    /// outward normal there.
    fn on_true_boundary(&self, g: usize, x: [f64; 2], chord_normal: &Point) -> ([f64; 2], Point) {
        match &self.chord_curves[g] {
            None => (x, *chord_normal),
            Some(c) => {
                let t = c.project(x);
                let n = c.right_normal(t);
                let s = if n[0] * chord_normal[0] + n[1] * chord_normal[1] < 0.0 { -1.0 } else { 1.0 };
                (c.eval(t), [s * n[0], s * n[1], 0.0])
            }
        }
    }

    fn element_norms(&self, e: usize, local: &DVector<f64>, u: ScalarField, grad: VectorField) -> Result<(f64, f64)> {
        let space = &self.elements[e].space;
        let proj = match dofi_projector(space) {
            Ok(p) => p,
            Err(_) => pinabla(space)?,
        };
        let c = proj * local;
        let pg = grad_l2(space, space.degree - 1)?;
        let gc: Vec<DVector<f64>> = pg.iter().map(|p| p * local).collect();
        let low = space.basis.with_degree(space.degree - 1);
        let (mut l2, mut h1) = (0.0, 0.0);
        for (x, w) in space.domain.points.iter().zip(&space.domain.weights) {
            let d = u(x) - space.basis.eval_poly(&c, x);
            let g = grad(x);
            let m = low.eval(x);
            let gx: f64 = m.iter().zip(gc[0].iter()).map(|(a, b)| a * b).sum();
            let gy: f64 = m.iter().zip(gc[1].iter()).map(|(a, b)| a * b).sum();
            l2 += w * d * d;
            h1 += w * ((g[0] - gx).powi(2) + (g[1] - gy).powi(2));
        }
        Ok((l2, h1))
    }
}

impl Discretization for Discretization2D {
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
            let vals = el.interpolate(u);
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
            if !map.iter().any(|&i| self.dofmap.boundary[i] == Some(BoundaryTag::Dirichlet)) {
                continue;
            }
            let to_curve = |i: usize, x: [f64; 2]| self.on_true_boundary(self.global_edge(e, i), x, &[0.0; 3]).0;
            let vals = el.interpolate_mapped(g, &to_curve);
            for (a, &i) in map.iter().enumerate() {
                if self.dofmap.boundary[i] == Some(BoundaryTag::Dirichlet) && fixed[i].is_none() {
                    fixed[i] = Some(vals[a]);
                }
            }
        }
        Ok(fixed.into_iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).collect())
    }

    fn neumann(&self, gn: FluxField) -> Result<(DVector<f64>, Integrals)> {
        let mut rhs = DVector::zeros(self.n_dofs());
        let mut ints = Integrals::default();
        for (e, el) in self.elements.iter().enumerate() {
            let bnd = &el.space.boundary;
            let map = &self.dofmap.element_dofs[e];
            for q in 0..bnd.len() {
                let g = self.global_edge(e, bnd.edge[q]);
                if self.mesh.boundary[g] != Some(BoundaryTag::Neumann) {
                    continue;
                }
                let y = bnd.rule.points[q];
                let (x, n) = self.on_true_boundary(g, [y[0], y[1]], &bnd.normals[q]);
                let v = gn(&p2(x), &n) * bnd.rule.weights[q];
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
        self.dofmap.boundary_vertex_dofs()
    }

    fn errors(&self, uh: &DVector<f64>, u: ScalarField, grad: VectorField) -> Result<ErrorNorms> {
        let (mut l2, mut h1) = (0.0, 0.0);
        for e in 0..self.elements.len() {
            let local = DVector::from_iterator(
                self.dofmap.element_dofs[e].len(),
                self.dofmap.element_dofs[e].iter().map(|&i| uh[i]),
            );
            let (a, b) = self.element_norms(e, &local, u, grad)?;
            l2 += a;
            h1 += b;
        }
        Ok(ErrorNorms {
            l2: l2.sqrt(),
            h1: h1.sqrt(),
        })
    }
}
