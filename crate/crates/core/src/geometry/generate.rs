//! Built-in benchmark meshes.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::curve::Curve;
use super::mesh::{BoundaryTag, Element2D, Element3D, Mesh2D, Mesh3D, SurfacePatch};
use super::{normalize, Point};
use crate::error::{Result, VemError};

/// `n × n` quads on `[0, 1]²`.
pub fn square_mesh(n: usize) -> Result<Mesh2D> {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut elements = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            elements.push(Element2D {
                vertices: vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                curved_edge: None,
            });
        }
    }
    Mesh2D::new(vertices, vec![], elements, &HashMap::new(), Some(BoundaryTag::Dirichlet))
}

/// Clips a convex polygon to the half-plane `n·x ≤ c`.
fn clip(poly: &[[f64; 2]], n: [f64; 2], c: f64) -> Vec<[f64; 2]> {
    let side = |p: &[f64; 2]| n[0] * p[0] + n[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sp, sq) = (side(&p), side(&q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

fn voronoi_cells(sites: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
    sites
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut cell = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
            for (j, t) in sites.iter().enumerate() {
                if i == j {
                    continue;
                }
                let n = [t[0] - s[0], t[1] - s[1]];
                let c = 0.5 * (n[0] * (t[0] + s[0]) + n[1] * (t[1] + s[1]));
                cell = clip(&cell, n, c);
            }
            cell
        })
        .collect()
}

fn polygon_centroid(p: &[[f64; 2]]) -> [f64; 2] {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..p.len() {
        let (u, v) = (p[i], p[(i + 1) % p.len()]);
        let w = u[0] * v[1] - v[0] * u[1];
        a += w;
        cx += (u[0] + v[0]) * w;
        cy += (u[1] + v[1]) * w;
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

/// Centroidal Voronoi tessellation of `[0, 1]²` with `cells` cells
/// (Lloyd iterations from seeded random sites).
pub fn voronoi_mesh(cells: usize, seed: u64, lloyd_steps: usize) -> Result<Mesh2D> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sites: Vec<[f64; 2]> = (0..cells)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    for _ in 0..lloyd_steps {
        sites = voronoi_cells(&sites).iter().map(|c| polygon_centroid(c)).collect();
    }
    let polys = voronoi_cells(&sites);
    let tol = 1e-9 / (cells as f64).sqrt();
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut elements = Vec::with_capacity(polys.len());
    for poly in &polys {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for p in poly {
            let found = vertices
                .iter()
                .position(|v| (v[0] - p[0]).hypot(v[1] - p[1]) < tol);
            let id = found.unwrap_or_else(|| {
                vertices.push(*p);
                vertices.len() - 1
            });
            if ids.last() != Some(&id) && ids.first() != Some(&id) {
                ids.push(id);
            }
        }
        if ids.len() < 3 {
            return Err(VemError::InvalidMesh("collapsed Voronoi cell".into()));
        }
        elements.push(Element2D {
            vertices: ids,
            curved_edge: None,
        });
    }
    // a vertex of one cell lying inside another cell's edge is inserted there
    let n_el = elements.len();
    for e in 0..n_el {
        let mut i = 0;
        while i < elements[e].vertices.len() {
            let vs = &elements[e].vertices;
            let (a, b) = (vs[i], vs[(i + 1) % vs.len()]);
            let (pa, pb) = (vertices[a], vertices[b]);
            let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            let hit = (0..vertices.len()).find(|&v| {
                if v == a || v == b {
                    return false;
                }
                let p = vertices[v];
                let t = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / (len * len);
                let d = ((pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0])).abs() / len;
                t > 1e-9 && t < 1.0 - 1e-9 && d < tol
            });
            match hit {
                Some(v) => elements[e].vertices.insert(i + 1, v),
                None => i += 1,
            }
        }
    }
    Mesh2D::new(vertices, vec![], elements, &HashMap::new(), Some(BoundaryTag::Dirichlet))
}

/// Maps the square `[-1, 1]²` onto the unit disk, sending the square's
/// boundary onto the circle.
fn square_to_disk(u: [f64; 2]) -> [f64; 2] {
    let r2 = u[0].hypot(u[1]);
    if r2 == 0.0 {
        return [0.0, 0.0];
    }
    let s = u[0].abs().max(u[1].abs()) / r2;
    [u[0] * s, u[1] * s]
}

/// Mesh of a disk sector obtained by mapping an `nx × ny` grid on
/// `[x0, x0 + w] × [y0, y0 + w]` (a subset of `[-1, 1]²`).
/// Grid cells with two edges on the circle are split along the diagonal
/// so that each element has at most one curved edge.
fn mapped_disk(x0: f64, y0: f64, n: usize, w: f64) -> Result<Mesh2D> {
    let (nx, ny) = (n, n);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let grid = |i: usize, j: usize| [x0 + i as f64 * w / n as f64, y0 + j as f64 * w / n as f64];
    let unit = |x: f64| (x.abs() - 1.0).abs() < 1e-12;
    let on_circle = |u: [f64; 2]| unit(u[0]) || unit(u[1]);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(square_to_disk(grid(i, j)));
        }
    }
    let mut curves = Vec::new();
    let mut elements = Vec::new();
    let mut push = |vs: Vec<(usize, usize)>, elements: &mut Vec<Element2D>| -> Result<()> {
        let n = vs.len();
        let mut curved = None;
        for k in 0..n {
            let (a, b) = (vs[k], vs[(k + 1) % n]);
            let (ua, ub) = (grid(a.0, a.1), grid(b.0, b.1));
            // an edge is on the circle when both ends lie on the same square side
            let same_side = (unit(ua[0]) && (ua[0] - ub[0]).abs() < 1e-12)
                || (unit(ua[1]) && (ua[1] - ub[1]).abs() < 1e-12);
            if on_circle(ua) && on_circle(ub) && same_side {
                if curved.is_some() {
                    return Err(VemError::InvalidMesh("two curved edges in one element".into()));
                }
                let pa = square_to_disk(ua);
                let pb = square_to_disk(ub);
                let a0 = pa[1].atan2(pa[0]);
                let mut da = pb[1].atan2(pb[0]) - a0;
                if da > PI {
                    da -= TAU;
                }
                if da < -PI {
                    da += TAU;
                }
                curves.push(Curve::arc([0.0, 0.0], 1.0, a0, a0 + da)?);
                curved = Some((k, curves.len() - 1));
            }
        }
        elements.push(Element2D {
            vertices: vs.iter().map(|&(i, j)| id(i, j)).collect(),
            curved_edge: curved,
        });
        Ok(())
    };
    for j in 0..ny {
        for i in 0..nx {
            let quad = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let arcs = (0..4)
                .filter(|&k| {
                    let (ua, ub) = (grid(quad[k].0, quad[k].1), grid(quad[(k + 1) % 4].0, quad[(k + 1) % 4].1));
                    on_circle(ua) && on_circle(ub)
                })
                .count();
            if arcs >= 2 {
                // split through the corner vertex on the circle
                let corner = (0..4)
                    .find(|&k| {
                        let u = grid(quad[k].0, quad[k].1);
                        unit(u[0]) && unit(u[1])
                    })
                    .expect("corner cell");
                let c = quad[corner];
                let o = quad[(corner + 2) % 4];
                let p = quad[(corner + 1) % 4];
                let q = quad[(corner + 3) % 4];
                push(vec![o, q, c], &mut elements)?;
                push(vec![o, c, p], &mut elements)?;
            } else {
                push(quad.to_vec(), &mut elements)?;
            }
        }
    }
    Mesh2D::new(vertices, curves, elements, &HashMap::new(), Some(BoundaryTag::Dirichlet))
}

/// Quarter of the unit disk in the first quadrant, `n × n` mapped cells.
pub fn quarter_disk_mesh(n: usize) -> Result<Mesh2D> {
    mapped_disk(0.0, 0.0, n, 1.0)
}

/// Unit disk, `n × n` mapped cells (`n` even).
pub fn disk_mesh(n: usize) -> Result<Mesh2D> {
    mapped_disk(-1.0, -1.0, n, 2.0)
}

/// `n³` hexahedra on `[0, 1]³`.
pub fn cube_mesh(n: usize) -> Result<Mesh3D> {
    let vid = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
    let mut vertices = Vec::new();
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    let mut faces: Vec<(Vec<usize>, Option<usize>)> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut face_id = |vs: Vec<usize>, faces: &mut Vec<(Vec<usize>, Option<usize>)>| -> usize {
        let mut key = vs.clone();
        key.sort_unstable();
        *index.entry(key).or_insert_with(|| {
            faces.push((vs, None));
            faces.len() - 1
        })
    };
    let mut elements = Vec::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let v = |a: usize, b: usize, c: usize| vid(i + a, j + b, k + c);
                let fs = vec![
                    face_id(vec![v(0, 0, 0), v(0, 1, 0), v(1, 1, 0), v(1, 0, 0)], &mut faces),
                    face_id(vec![v(0, 0, 1), v(1, 0, 1), v(1, 1, 1), v(0, 1, 1)], &mut faces),
                    face_id(vec![v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(0, 0, 1)], &mut faces),
                    face_id(vec![v(0, 1, 0), v(0, 1, 1), v(1, 1, 1), v(1, 1, 0)], &mut faces),
                    face_id(vec![v(0, 0, 0), v(0, 0, 1), v(0, 1, 1), v(0, 1, 0)], &mut faces),
                    face_id(vec![v(1, 0, 0), v(1, 1, 0), v(1, 1, 1), v(1, 0, 1)], &mut faces),
                ];
                elements.push(Element3D { faces: fs });
            }
        }
    }
    Mesh3D::new(vertices, vec![], faces, elements, &HashMap::new(), Some(BoundaryTag::Dirichlet))
}

/// Octant of the unit ball as cones from the origin over the spherical
/// triangle `(e_x, e_y, e_z)` refined `level` times (`4^level` elements).
pub fn octant_mesh(level: usize) -> Result<Mesh3D> {
    let mut vertices: Vec<Point> = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut tris = vec![[1usize, 2, 3]];
    let mut mid: HashMap<[usize; 2], usize> = HashMap::new();
    for _ in 0..level {
        let mut next = Vec::with_capacity(4 * tris.len());
        for t in &tris {
            let mut m = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = [a.min(b), a.max(b)];
                m[k] = *mid.entry(key).or_insert_with(|| {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    vertices.push(normalize(&[pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]]));
                    vertices.len() - 1
                });
            }
            next.push([t[0], m[0], m[2]]);
            next.push([m[0], t[1], m[1]]);
            next.push([m[2], m[1], t[2]]);
            next.push([m[0], m[1], m[2]]);
        }
        tris = next;
    }
    let mut faces: Vec<(Vec<usize>, Option<usize>)> = Vec::new();
    let mut side: HashMap<[usize; 2], usize> = HashMap::new();
    let mut elements = Vec::new();
    for t in &tris {
        let mut fs = vec![faces.len()];
        faces.push((vec![t[0], t[1], t[2]], Some(0)));
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let key = [a.min(b), a.max(b)];
            let f = *side.entry(key).or_insert_with(|| {
                faces.push((vec![0, a, b], None));
                faces.len() - 1
            });
            fs.push(f);
        }
        elements.push(Element3D { faces: fs });
    }
    let surfaces = vec![SurfacePatch::Sphere {
        center: [0.0; 3],
        radius: 1.0,
    }];
    Mesh3D::new(vertices, surfaces, faces, elements, &HashMap::new(), Some(BoundaryTag::Dirichlet))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts() {
        let m = square_mesh(4).unwrap();
        assert_eq!(m.n_elements(), 16);
        assert_eq!(m.vertices.len(), 25);
        assert_eq!(m.edges.len(), 40);
        assert_eq!(m.boundary.iter().flatten().count(), 16);
    }

    #[test]
    fn voronoi_has_requested_cells_and_unit_area() {
        let m = voronoi_mesh(32, 7, 30).unwrap();
        assert_eq!(m.n_elements(), 32);
        let total: f64 = (0..32).map(|e| m.polygon(e).unwrap().area()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (g, els) in m.edge_elements.iter().enumerate() {
            assert!(els.len() == 2 || m.boundary[g].is_some());
        }
    }

    #[test]
    fn disk_meshes_cover_the_disk() {
        for n in [1, 2, 4] {
            let q = quarter_disk_mesh(n).unwrap();
            let a: f64 = (0..q.n_elements()).map(|e| q.polygon(e).unwrap().area()).sum();
            assert!((a - PI / 4.0).abs() < 1e-12, "n={n}: {a}");
        }
        let d = disk_mesh(4).unwrap();
        let a: f64 = (0..d.n_elements()).map(|e| d.polygon(e).unwrap().area()).sum();
        assert!((a - PI).abs() < 1e-12);
    }

    #[test]
    fn octant_counts() {
        let m = octant_mesh(1).unwrap();
        assert_eq!(m.n_elements(), 4);
        assert_eq!(m.boundary.iter().flatten().count(), 4 + 6);
    }
}
