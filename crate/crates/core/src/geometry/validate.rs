//! Mesh quality and conformity diagnostics.

use serde::Serialize;

use super::io::MeshFile;
use super::mesh::{Mesh2D, Mesh3D};
use super::polyhedron::Polyhedron;
use super::{dist, Point};

#[derive(Debug, Clone, Serialize)]
pub struct ElementDiagnostics {
    pub element: usize,
    /// Fan from the centroid has no inverted piece.
    pub star_shaped: bool,
    /// Shortest edge over element diameter.
    pub edge_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub rho_geom: f64,
    pub min_edge_ratio: f64,
    pub elements: Vec<ElementDiagnostics>,
    pub conformity: Vec<String>,
}

pub fn validate_mesh(mesh: &MeshFile, rho_geom: f64) -> ValidationReport {
    match mesh {
        MeshFile::Planar(m) => validate_mesh2d(m, rho_geom),
        MeshFile::Solid(m) => validate_mesh3d(m, rho_geom),
    }
}

/// Pairs of distinct vertices closer than `tol`.
fn coincident(points: &[Point], tol: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
    let mut out = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if points[b][0] - points[a][0] > tol {
                break;
            }
            if dist(&points[a], &points[b]) <= tol {
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    out
}

fn finish(rho_geom: f64, elements: Vec<ElementDiagnostics>, conformity: Vec<String>) -> ValidationReport {
    let min_edge_ratio = elements
        .iter()
        .map(|d| d.edge_ratio)
        .fold(f64::INFINITY, f64::min);
    let pass = conformity.is_empty()
        && elements
            .iter()
            .all(|d| d.star_shaped && d.edge_ratio >= rho_geom);
    ValidationReport {
        pass,
        rho_geom,
        min_edge_ratio,
        elements,
        conformity,
    }
}

pub fn validate_mesh2d(mesh: &Mesh2D, rho_geom: f64) -> ValidationReport {
    let mut elements = Vec::with_capacity(mesh.n_elements());
    let mut scale: f64 = 0.0;
    for e in 0..mesh.n_elements() {
        let Ok(poly) = mesh.polygon(e) else {
            elements.push(ElementDiagnostics {
                element: e,
                star_shaped: false,
                edge_ratio: 0.0,
            });
            continue;
        };
        let h = poly.diameter();
        scale = scale.max(h);
        let star_shaped = match poly.measures() {
            Ok((_, c, _)) => poly.domain_rule_from(0, c).is_ok(),
            Err(_) => false,
        };
        elements.push(ElementDiagnostics {
            element: e,
            star_shaped,
            edge_ratio: poly.min_edge_length() / h,
        });
    }

    let mut conformity = Vec::new();
    for (g, els) in mesh.edge_elements.iter().enumerate() {
        let [a, b] = mesh.edges[g];
        if els.len() > 2 {
            conformity.push(format!("edge ({a}, {b}) shared by {} elements", els.len()));
        }
        if els.len() == 2 {
            let dir = |e: usize| {
                mesh.element_edges[e]
                    .iter()
                    .find(|x| x.0 == g)
                    .map(|x| x.1)
                    .unwrap_or(false)
            };
            if dir(els[0]) == dir(els[1]) {
                conformity.push(format!(
                    "edge ({a}, {b}) traversed in the same direction by elements {} and {}",
                    els[0], els[1]
                ));
            }
        }
    }
    let pts: Vec<Point> = mesh.vertices.iter().map(|v| [v[0], v[1], 0.0]).collect();
    for (a, b) in coincident(&pts, 1e-12 * scale.max(1e-300)) {
        conformity.push(format!("vertices {a} and {b} coincide"));
    }
    // vertices lying inside a boundary edge indicate a non-matching interface
    for (g, e) in mesh.edges.iter().enumerate() {
        if mesh.boundary[g].is_none() || mesh.edge_curve[g].is_some() {
            continue;
        }
        let (p, q) = (pts[e[0]], pts[e[1]]);
        let len = dist(&p, &q);
        for (v, x) in pts.iter().enumerate() {
            if v == e[0] || v == e[1] {
                continue;
            }
            let t = ((x[0] - p[0]) * (q[0] - p[0]) + (x[1] - p[1]) * (q[1] - p[1])) / (len * len);
            let d = ((q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0])).abs() / len;
            if t > 1e-9 && t < 1.0 - 1e-9 && d < 1e-12 * len && !is_boundary_vertex(mesh, v) {
                conformity.push(format!("vertex {v} hangs on edge ({}, {})", e[0], e[1]));
            }
        }
    }
    finish(rho_geom, elements, conformity)
}

fn is_boundary_vertex(mesh: &Mesh2D, v: usize) -> bool {
    mesh.edges
        .iter()
        .zip(&mesh.boundary)
        .any(|(e, b)| b.is_some() && (e[0] == v || e[1] == v))
}

pub fn validate_mesh3d(mesh: &Mesh3D, rho_geom: f64) -> ValidationReport {
    let mut elements = Vec::with_capacity(mesh.n_elements());
    let mut scale: f64 = 0.0;
    for e in 0..mesh.n_elements() {
        let diag = Polyhedron::from_mesh(mesh, e).and_then(|p| {
            let (_, _, h) = p.measures()?;
            let star = p.domain_rule(0).is_ok();
            let min_edge = mesh
                .element_edges(e)
                .iter()
                .map(|&g| {
                    let [a, b] = mesh.edges[g];
                    dist(&mesh.vertices[a], &mesh.vertices[b])
                })
                .fold(f64::INFINITY, f64::min);
            Ok((star, min_edge / h, h))
        });
        let (star_shaped, edge_ratio) = match diag {
            Ok((s, r, h)) => {
                scale = scale.max(h);
                (s, r)
            }
            Err(_) => (false, 0.0),
        };
        elements.push(ElementDiagnostics {
            element: e,
            star_shaped,
            edge_ratio,
        });
    }
    let mut conformity = Vec::new();
    for (a, b) in coincident(&mesh.vertices, 1e-12 * scale.max(1e-300)) {
        conformity.push(format!("vertices {a} and {b} coincide"));
    }
    for (f, face) in mesh.faces.iter().enumerate() {
        if face.surface.is_some() {
            continue;
        }
        let h = super::diameter(&face.vertices.iter().map(|&v| mesh.vertices[v]).collect::<Vec<_>>());
        for &v in &face.vertices {
            let off = super::dot(&super::sub(&mesh.vertices[v], &face.frame.origin), &face.frame.normal);
            if off.abs() > 1e-10 * h {
                conformity.push(format!("face {f} is not planar (offset {off:e})"));
                break;
            }
        }
    }
    finish(rho_geom, elements, conformity)
}
