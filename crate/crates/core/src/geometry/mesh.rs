//! Mesh containers with derived edge/face topology.

use std::collections::{BTreeMap, HashMap};

use super::curve::{Curve, OrientedCurve};
use super::polygon::{EdgeShape, Polygon2D};
use super::{cross, dot, norm, normalize, scale, sub, Point};
use crate::error::{Result, VemError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for BoundaryTag {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(BoundaryTag::Dirichlet),
            "neumann" => Ok(BoundaryTag::Neumann),
            other => Err(VemError::Config(format!("unknown boundary tag `{other}`"))),
        }
    }
}

impl std::fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryTag::Dirichlet => "dirichlet",
            BoundaryTag::Neumann => "neumann",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element2D {
    /// Vertex ids, counterclockwise.
    pub vertices: Vec<usize>,
    /// `(local edge index, curve id)` of the curved boundary edge, if any.
    pub curved_edge: Option<(usize, usize)>,
}

/// Planar polygonal mesh.
#[derive(Debug, Clone)]
pub struct Mesh2D {
    pub vertices: Vec<[f64; 2]>,
    pub curves: Vec<Curve>,
    pub elements: Vec<Element2D>,
    /// Global edges as `[min id, max id]`.
    pub edges: Vec<[usize; 2]>,
    /// Per element, per local edge: `(global edge, traversed min -> max)`.
    pub element_edges: Vec<Vec<(usize, bool)>>,
    pub edge_elements: Vec<Vec<usize>>,
    pub edge_curve: Vec<Option<usize>>,
    /// Tag of each boundary edge; `None` for interior edges.
    pub boundary: Vec<Option<BoundaryTag>>,
}

impl Mesh2D {
    /// Builds topology. Boundary edges without an entry in `tags` receive
    /// `default_tag`; tags on interior edges are rejected.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        curves: Vec<Curve>,
        elements: Vec<Element2D>,
        tags: &HashMap<[usize; 2], BoundaryTag>,
        default_tag: Option<BoundaryTag>,
    ) -> Result<Self> {
        let mut edge_index: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut element_edges = Vec::with_capacity(elements.len());
        let mut edge_elements: Vec<Vec<usize>> = Vec::new();
        for (e, el) in elements.iter().enumerate() {
            let n = el.vertices.len();
            if n < 3 {
                return Err(VemError::InvalidMesh(format!("element {e} has {n} vertices")));
            }
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (el.vertices[i], el.vertices[(i + 1) % n]);
                if a >= vertices.len() || b >= vertices.len() {
                    return Err(VemError::InvalidMesh(format!(
                        "element {e} references a missing vertex"
                    )));
                }
                if a == b {
                    return Err(VemError::InvalidMesh(format!("element {e} repeats vertex {a}")));
                }
                let key = [a.min(b), a.max(b)];
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_elements.push(Vec::new());
                    edges.len() - 1
                });
                edge_elements[id].push(e);
                local.push((id, a < b));
            }
            element_edges.push(local);
        }

        let mut edge_curve = vec![None; edges.len()];
        for (e, el) in elements.iter().enumerate() {
            if let Some((le, cid)) = el.curved_edge {
                if le >= el.vertices.len() || cid >= curves.len() {
                    return Err(VemError::InvalidMesh(format!(
                        "element {e}: curved edge ({le}, {cid}) out of range"
                    )));
                }
                let g = element_edges[e][le].0;
                if edge_elements[g].len() != 1 {
                    return Err(VemError::InvalidMesh(format!(
                        "element {e}: curved edge {le} is not on the boundary"
                    )));
                }
                edge_curve[g] = Some(cid);
            }
        }

        let mut boundary = vec![None; edges.len()];
        for (g, key) in edges.iter().enumerate() {
            let on_boundary = edge_elements[g].len() == 1;
            match (on_boundary, tags.get(key)) {
                (true, Some(t)) => boundary[g] = Some(*t),
                (true, None) => {
                    boundary[g] = Some(default_tag.ok_or_else(|| {
                        VemError::InvalidMesh(format!("boundary edge {key:?} has no tag"))
                    })?)
                }
                (false, Some(_)) => {
                    return Err(VemError::InvalidMesh(format!(
                        "interior edge {key:?} carries a boundary tag"
                    )))
                }
                (false, None) => {}
            }
        }
        for key in tags.keys() {
            if !edge_index.contains_key(key) {
                return Err(VemError::InvalidMesh(format!("tagged edge {key:?} does not exist")));
            }
        }

        let mesh = Mesh2D {
            vertices,
            curves,
            elements,
            edges,
            element_edges,
            edge_elements,
            edge_curve,
            boundary,
        };
        for e in 0..mesh.elements.len() {
            let poly = mesh.polygon(e)?;
            let area = poly.area();
            if !(area > 0.0) {
                return Err(VemError::DegenerateElement {
                    element: e,
                    measure: area,
                });
            }
        }
        Ok(mesh)
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn is_boundary_edge(&self, g: usize) -> bool {
        self.edge_elements[g].len() == 1
    }

    /// Geometry of element `e`, curved edge oriented counterclockwise.
    pub fn polygon(&self, e: usize) -> Result<Polygon2D> {
        let el = &self.elements[e];
        let vertices: Vec<[f64; 2]> = el.vertices.iter().map(|&v| self.vertices[v]).collect();
        let n = vertices.len();
        let mut edges = vec![EdgeShape::Straight; n];
        if let Some((le, cid)) = el.curved_edge {
            let oc = OrientedCurve::attach(&self.curves[cid], vertices[le], vertices[(le + 1) % n])?;
            edges[le] = EdgeShape::Curved(oc);
        }
        Ok(Polygon2D {
            id: e,
            vertices,
            edges,
        })
    }

    /// Replaces every boundary tag.
    pub fn set_all_boundary(&mut self, tag: BoundaryTag) {
        for b in self.boundary.iter_mut().flatten() {
            *b = tag;
        }
    }

    /// Boundary vertices in increasing id order.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut on = vec![false; self.vertices.len()];
        for (g, e) in self.edges.iter().enumerate() {
            if self.boundary[g].is_some() {
                on[e[0]] = true;
                on[e[1]] = true;
            }
        }
        (0..on.len()).filter(|&v| on[v]).collect()
    }

    /// Same mesh with every curve dropped (curved edges become chords).
    pub fn facet(&self) -> Mesh2D {
        let mut m = self.clone();
        for el in &mut m.elements {
            el.curved_edge = None;
        }
        m.edge_curve = vec![None; m.edges.len()];
        m
    }
}

/// Geometry attached to a boundary face.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfacePatch {
    Sphere { center: Point, radius: f64 },
    /// A planar face treated as curved (no face dofs; its edges carry none either).
    Flat,
}

/// Orthonormal frame on a planar face; `normal` follows the vertex listing.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFrame {
    pub origin: Point,
    pub e1: Point,
    pub e2: Point,
    pub normal: Point,
}

impl FaceFrame {
    pub fn to_local(&self, x: &Point) -> [f64; 2] {
        let d = sub(x, &self.origin);
        [dot(&d, &self.e1), dot(&d, &self.e2)]
    }

    pub fn to_global(&self, u: [f64; 2]) -> Point {
        let mut p = self.origin;
        for d in 0..3 {
            p[d] += u[0] * self.e1[d] + u[1] * self.e2[d];
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face3D {
    pub vertices: Vec<usize>,
    pub surface: Option<usize>,
    pub frame: FaceFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element3D {
    pub faces: Vec<usize>,
}

/// Polyhedral mesh.
#[derive(Debug, Clone)]
pub struct Mesh3D {
    pub vertices: Vec<Point>,
    pub surfaces: Vec<SurfacePatch>,
    pub faces: Vec<Face3D>,
    pub elements: Vec<Element3D>,
    /// Global edges as `[min id, max id]`.
    pub edges: Vec<[usize; 2]>,
    /// Edges lying on a curved face carry no dofs.
    pub edge_curved: Vec<bool>,
    /// Per face, per local edge: `(global edge, traversed min -> max)`.
    pub face_edges: Vec<Vec<(usize, bool)>>,
    pub face_elements: Vec<Vec<usize>>,
    /// Tag of each boundary face; `None` for interior faces.
    pub boundary: Vec<Option<BoundaryTag>>,
}

/// Newell normal of a closed vertex loop (length = twice the area).
fn newell(points: &[Point]) -> Point {
    let mut n = [0.0; 3];
    for i in 0..points.len() {
        let (a, b) = (points[i], points[(i + 1) % points.len()]);
        n = super::add(&n, &cross(&a, &b));
    }
    n
}

fn face_frame(points: &[Point]) -> Result<FaceFrame> {
    let n = newell(points);
    if !(norm(&n) > 0.0) {
        return Err(VemError::InvalidMesh("face with zero area".into()));
    }
    let normal = normalize(&n);
    let mut origin = [0.0; 3];
    for p in points {
        origin = super::add(&origin, &scale(p, 1.0 / points.len() as f64));
    }
    let d = sub(&points[1], &points[0]);
    let e1 = normalize(&sub(&d, &scale(&normal, dot(&d, &normal))));
    let e2 = cross(&normal, &e1);
    Ok(FaceFrame {
        origin,
        e1,
        e2,
        normal,
    })
}

impl Mesh3D {
    pub fn new(
        vertices: Vec<Point>,
        surfaces: Vec<SurfacePatch>,
        faces: Vec<(Vec<usize>, Option<usize>)>,
        elements: Vec<Element3D>,
        tags: &HashMap<usize, BoundaryTag>,
        default_tag: Option<BoundaryTag>,
    ) -> Result<Self> {
        let mut built = Vec::with_capacity(faces.len());
        let mut edge_index: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut face_edges = Vec::with_capacity(faces.len());
        for (f, (vs, surf)) in faces.into_iter().enumerate() {
            if vs.len() < 3 || vs.iter().any(|&v| v >= vertices.len()) {
                return Err(VemError::InvalidMesh(format!("face {f} has invalid vertices")));
            }
            if let Some(s) = surf {
                if s >= surfaces.len() {
                    return Err(VemError::InvalidMesh(format!("face {f}: unknown surface {s}")));
                }
            }
            let pts: Vec<Point> = vs.iter().map(|&v| vertices[v]).collect();
            let frame = face_frame(&pts)
                .map_err(|_| VemError::InvalidMesh(format!("face {f} has zero area")))?;
            let mut local = Vec::with_capacity(vs.len());
            for i in 0..vs.len() {
                let (a, b) = (vs[i], vs[(i + 1) % vs.len()]);
                let key = [a.min(b), a.max(b)];
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                local.push((id, a < b));
            }
            face_edges.push(local);
            built.push(Face3D {
                vertices: vs,
                surface: surf,
                frame,
            });
        }
        let mut edge_curved = vec![false; edges.len()];
        for (f, face) in built.iter().enumerate() {
            if face.surface.is_some() {
                for &(g, _) in &face_edges[f] {
                    edge_curved[g] = true;
                }
            }
        }
        let mut face_elements = vec![Vec::new(); built.len()];
        for (e, el) in elements.iter().enumerate() {
            if el.faces.len() < 4 && !el.faces.iter().any(|&f| f < built.len() && built[f].surface.is_some()) {
                return Err(VemError::InvalidMesh(format!("element {e} has fewer than 4 faces")));
            }
            for &f in &el.faces {
                if f >= built.len() {
                    return Err(VemError::InvalidMesh(format!("element {e}: unknown face {f}")));
                }
                face_elements[f].push(e);
            }
        }
        let mut boundary = vec![None; built.len()];
        for f in 0..built.len() {
            match face_elements[f].len() {
                0 => return Err(VemError::InvalidMesh(format!("face {f} belongs to no element"))),
                1 => {
                    boundary[f] = Some(match tags.get(&f) {
                        Some(t) => *t,
                        None => default_tag.ok_or_else(|| {
                            VemError::InvalidMesh(format!("boundary face {f} has no tag"))
                        })?,
                    })
                }
                2 => {
                    if built[f].surface.is_some() {
                        return Err(VemError::InvalidMesh(format!(
                            "curved face {f} is not on the boundary"
                        )));
                    }
                    if tags.contains_key(&f) {
                        return Err(VemError::InvalidMesh(format!(
                            "interior face {f} carries a boundary tag"
                        )));
                    }
                }
                n => {
                    return Err(VemError::InvalidMesh(format!("face {f} shared by {n} elements")))
                }
            }
        }
        for e in 0..elements.len() {
            let mut seen = vec![0usize; edges.len()];
            for &f in &elements[e].faces {
                for &(g, _) in &face_edges[f] {
                    seen[g] += 1;
                }
            }
            if seen.iter().any(|&c| c != 0 && c != 2) {
                return Err(VemError::InvalidMesh(format!("element {e} is not closed")));
            }
        }
        Ok(Mesh3D {
            vertices,
            surfaces,
            faces: built,
            elements,
            edges,
            edge_curved,
            face_edges,
            face_elements,
            boundary,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn set_all_boundary(&mut self, tag: BoundaryTag) {
        for b in self.boundary.iter_mut().flatten() {
            *b = tag;
        }
    }

    /// Sorted vertex ids of element `e`.
    pub fn element_vertices(&self, e: usize) -> Vec<usize> {
        let mut vs: Vec<usize> = self.elements[e]
            .faces
            .iter()
            .flat_map(|&f| self.faces[f].vertices.iter().copied())
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Sorted global edge ids of element `e`.
    pub fn element_edges(&self, e: usize) -> Vec<usize> {
        let mut es: Vec<usize> = self.elements[e]
            .faces
            .iter()
            .flat_map(|&f| self.face_edges[f].iter().map(|x| x.0))
            .collect();
        es.sort_unstable();
        es.dedup();
        es
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut on = vec![false; self.vertices.len()];
        for (f, face) in self.faces.iter().enumerate() {
            if self.boundary[f].is_some() {
                for &v in &face.vertices {
                    on[v] = true;
                }
            }
        }
        (0..on.len()).filter(|&v| on[v]).collect()
    }

    /// Planar description of a flat face in its frame. Edges shared with a
    /// sphere face become circular arcs, edges of a flat-declared curved
    /// face become two-point polylines.
    pub fn face_polygon(&self, f: usize) -> Result<Polygon2D> {
        let face = &self.faces[f];
        let frame = &face.frame;
        let n = face.vertices.len();
        let verts: Vec<[f64; 2]> = face
            .vertices
            .iter()
            .map(|&v| frame.to_local(&self.vertices[v]))
            .collect();
        let mut edges = vec![EdgeShape::Straight; n];
        for i in 0..n {
            let (g, _) = self.face_edges[f][i];
            if !self.edge_curved[g] || face.surface.is_some() {
                continue;
            }
            let (a, b) = (verts[i], verts[(i + 1) % n]);
            let curve = match self.edge_surface(g) {
                Some(SurfacePatch::Sphere { center, radius }) => {
                    let off = dot(&sub(center, &frame.origin), &frame.normal);
                    if off.abs() > 1e-10 * radius {
                        return Err(VemError::InvalidMesh(format!(
                            "face {f}: plane does not pass through the sphere center"
                        )));
                    }
                    let c = frame.to_local(center);
                    let a0 = (a[1] - c[1]).atan2(a[0] - c[0]);
                    let mut da = (b[1] - c[1]).atan2(b[0] - c[0]) - a0;
                    while da > std::f64::consts::PI {
                        da -= std::f64::consts::TAU;
                    }
                    while da < -std::f64::consts::PI {
                        da += std::f64::consts::TAU;
                    }
                    Curve::arc(c, *radius, a0, a0 + da)?
                }
                _ => Curve::polyline(vec![a, b])?,
            };
            edges[i] = EdgeShape::Curved(OrientedCurve::attach(&curve, a, b)?);
        }
        Ok(Polygon2D {
            id: f,
            vertices: verts,
            edges,
        })
    }

    /// Surface of a curved face containing edge `g`, if any.
    pub fn edge_surface(&self, g: usize) -> Option<&SurfacePatch> {
        let [a, b] = self.edges[g];
        self.faces.iter().find_map(|face| {
            let s = face.surface?;
            let vs = &face.vertices;
            let n = vs.len();
            (0..n)
                .any(|i| {
                    let (p, q) = (vs[i], vs[(i + 1) % n]);
                    (p == a && q == b) || (p == b && q == a)
                })
                .then(|| &self.surfaces[s])
        })
    }
}
