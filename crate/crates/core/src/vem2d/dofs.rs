//! Global numbering of unknowns.
//!
//! Order: one value per mesh vertex, then per edge its moments (straight
//! edges) or generator values (curved edges), then the interior moments of
//! every element.

use crate::geometry::{BoundaryTag, Mesh2D};
use crate::vem2d::space::LocalDof;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Vertex(usize),
    EdgeMoment { edge: usize, j: usize },
    Interior { element: usize, j: usize },
    Generator { edge: usize, slot: usize },
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub kinds: Vec<DofKind>,
    /// Normalization of each functional: 1 for point values, `1/|e|` for
    /// edge moments, `1/|P|` for interior moments.
    pub scale: Vec<f64>,
    pub element_dofs: Vec<Vec<usize>>,
    /// Tag of the boundary part carrying each unknown; Dirichlet wins at
    /// vertices shared with Neumann edges.
    pub boundary: Vec<Option<BoundaryTag>>,
}

/// Per-edge content beyond the endpoint values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeUnknowns {
    Moments(usize),
    Generators(usize),
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.kinds.len()
    }

    /// Unknowns on Dirichlet boundary parts.
    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs())
            .filter(|&i| self.boundary[i] == Some(BoundaryTag::Dirichlet))
            .collect()
    }

    /// Vertex unknowns on the boundary, by vertex id.
    pub fn boundary_vertex_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs())
            .filter(|&i| matches!(self.kinds[i], DofKind::Vertex(_)) && self.boundary[i].is_some())
            .collect()
    }
}

/// Numbers the unknowns of `mesh`. `edge_content[g]` says what edge `g`
/// carries, `interior[e]` how many interior moments element `e` has, and
/// `layouts[e]` the local order of element `e`.
pub fn enumerate_dofs(
    mesh: &Mesh2D,
    edge_content: &[EdgeUnknowns],
    interior: &[usize],
    layouts: &[Vec<LocalDof>],
    areas: &[f64],
) -> DofMap {
    let nv = mesh.vertices.len();
    let mut kinds: Vec<DofKind> = (0..nv).map(DofKind::Vertex).collect();
    let mut scale = vec![1.0; nv];
    let mut boundary = vec![None; nv];
    for (g, e) in mesh.edges.iter().enumerate() {
        if let Some(tag) = mesh.boundary[g] {
            for &v in e {
                if boundary[v] != Some(BoundaryTag::Dirichlet) {
                    boundary[v] = Some(tag);
                }
            }
        }
    }
    let mut edge_base = Vec::with_capacity(mesh.edges.len());
    for (g, e) in mesh.edges.iter().enumerate() {
        edge_base.push(kinds.len());
        let (a, b) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        match edge_content[g] {
            EdgeUnknowns::Moments(m) => {
                for j in 0..m {
                    kinds.push(DofKind::EdgeMoment { edge: g, j });
                    scale.push(1.0 / len);
                    boundary.push(mesh.boundary[g]);
                }
            }
            EdgeUnknowns::Generators(m) => {
                for slot in 0..m {
                    kinds.push(DofKind::Generator { edge: g, slot });
                    scale.push(1.0);
                    boundary.push(mesh.boundary[g]);
                }
            }
        }
    }
    let mut interior_base = Vec::with_capacity(interior.len());
    for (e, &m) in interior.iter().enumerate() {
        interior_base.push(kinds.len());
        for j in 0..m {
            kinds.push(DofKind::Interior { element: e, j });
            scale.push(1.0 / areas[e]);
            boundary.push(None);
        }
    }
    let element_dofs = layouts
        .iter()
        .enumerate()
        .map(|(e, layout)| {
            let verts = &mesh.elements[e].vertices;
            layout
                .iter()
                .map(|dof| match *dof {
                    LocalDof::Vertex(i) => verts[i],
                    LocalDof::EdgeMoment { edge, j } => edge_base[mesh.element_edges[e][edge].0] + j,
                    LocalDof::Interior(j) => interior_base[e] + j,
                    LocalDof::Slot(s) => {
                        let ce = mesh.elements[e].curved_edge.expect("slots live on curved edges").0;
                        edge_base[mesh.element_edges[e][ce].0] + s
                    }
                })
                .collect()
        })
        .collect();
    DofMap {
        kinds,
        scale,
        element_dofs,
        boundary,
    }
}
