//! Quadrilateral ribbon straddling a circular boundary.
//!
//! The domain is the disk (closed arc) or the circular sector (open arc)
//! bounded by the curve. Points `b_i` on the arc are offset along the
//! normal to an inner point inside the domain and an outer point outside
//! it; the quads between consecutive offsets are split into triangles and
//! every triangle keeps its intersection with the domain. The region
//! enclosed by the inner points is split into straight polygons.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use super::curve::{Curve, OrientedCurve};
use super::mesh::{BoundaryTag, Element2D, Mesh2D};
use super::polygon::{EdgeShape, Polygon2D};
use crate::error::{Result, VemError};

/// Intersection of a ribbon triangle with the domain.
#[derive(Debug, Clone)]
pub struct ClippedRegion {
    pub polygon: Polygon2D,
    /// Per edge of `polygon`: lies on the domain boundary.
    pub on_boundary: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Ribbon {
    /// Interior polygons followed by ribbon triangles; covers the
    /// superimposed polygon. Every outer edge is tagged Dirichlet.
    pub mesh: Mesh2D,
    /// `Some` for ribbon triangles.
    pub clipped: Vec<Option<ClippedRegion>>,
    pub inner: Vec<[f64; 2]>,
    pub outer: Vec<[f64; 2]>,
    pub thickness: f64,
}

impl Ribbon {
    pub fn n_triangles(&self) -> usize {
        self.clipped.iter().flatten().count()
    }

    /// Area of the domain covered by the mesh: interior polygons plus clipped regions.
    pub fn covered_area(&self) -> Result<f64> {
        let mut a = 0.0;
        for (e, c) in self.clipped.iter().enumerate() {
            a += match c {
                Some(r) => r.polygon.area(),
                None => self.mesh.polygon(e)?.area(),
            };
        }
        Ok(a)
    }
}

struct Disk {
    center: [f64; 2],
    radius: f64,
}

impl Disk {
    fn inside(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.radius
    }

    fn angle(&self, p: [f64; 2]) -> f64 {
        (p[1] - self.center[1]).atan2(p[0] - self.center[0])
    }

    /// Parameters in `(0, 1)` where segment `p -> q` crosses the circle.
    fn crossings(&self, p: [f64; 2], q: [f64; 2]) -> Vec<f64> {
        let d = [q[0] - p[0], q[1] - p[1]];
        let f = [p[0] - self.center[0], p[1] - self.center[1]];
        let a = d[0] * d[0] + d[1] * d[1];
        let b = 2.0 * (f[0] * d[0] + f[1] * d[1]);
        let c = f[0] * f[0] + f[1] * f[1] - self.radius * self.radius;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return vec![];
        }
        let s = disc.sqrt();
        let mut ts: Vec<f64> = [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
            .into_iter()
            .filter(|t| *t > 1e-14 && *t < 1.0 - 1e-14)
            .collect();
        ts.dedup();
        ts
    }
}

/// Clips a counterclockwise triangle to the disk. `outer_edge[i]` marks
/// triangle edges on the boundary of the superimposed polygon; their parts
/// inside the disk lie on the straight domain boundary.
fn clip_triangle(id: usize, tri: [[f64; 2]; 3], disk: &Disk, outer_edge: [bool; 3]) -> Result<ClippedRegion> {
    let lerp = |p: [f64; 2], q: [f64; 2], t: f64| [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
    // inside pieces of the triangle boundary, in order
    let mut pieces: Vec<([f64; 2], [f64; 2], bool)> = Vec::new();
    for i in 0..3 {
        let (p, q) = (tri[i], tri[(i + 1) % 3]);
        let mut cuts = vec![0.0];
        cuts.extend(disk.crossings(p, q));
        cuts.push(1.0);
        for w in cuts.windows(2) {
            if disk.inside(lerp(p, q, 0.5 * (w[0] + w[1]))) {
                pieces.push((lerp(p, q, w[0]), lerp(p, q, w[1]), outer_edge[i]));
            }
        }
    }
    if pieces.is_empty() {
        return Err(VemError::EmptyClip(id));
    }
    let gap = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]) > 1e-13 * disk.radius;
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut on_boundary = Vec::new();
    let m = pieces.len();
    for j in 0..m {
        let (a, b, flag) = pieces[j];
        let next = pieces[(j + 1) % m].0;
        vertices.push(a);
        edges.push(EdgeShape::Straight);
        on_boundary.push(flag);
        if gap(b, next) {
            let a0 = disk.angle(b);
            let mut a1 = disk.angle(next);
            while a1 <= a0 {
                a1 += TAU;
            }
            let arc = Curve::arc(disk.center, disk.radius, a0, a1)?;
            vertices.push(b);
            edges.push(EdgeShape::Curved(OrientedCurve::attach(&arc, b, next)?));
            on_boundary.push(true);
        }
    }
    let polygon = Polygon2D {
        id,
        vertices,
        edges,
    };
    let tri_area = 0.5
        * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]));
    if polygon.area() <= 1e-12 * tri_area {
        return Err(VemError::EmptyClip(id));
    }
    Ok(ClippedRegion {
        polygon,
        on_boundary,
    })
}

/// Builds the ribbon around a circular arc with `n_segments` pieces.
/// `thickness` defaults to the chord length of one piece.
pub fn build_ribbon(curve: &Curve, n_segments: usize, thickness: Option<f64>) -> Result<Ribbon> {
    let Curve::Arc {
        center,
        radius,
        angle0,
        angle1,
    } = *curve
    else {
        return Err(VemError::Unsupported("ribbons are built around circular arcs only".into()));
    };
    if n_segments < 3 {
        return Err(VemError::Ribbon(format!("{n_segments} segments, need at least 3")));
    }
    let closed = curve.is_closed();
    let (lo, hi) = (angle0.min(angle1), angle0.max(angle1));
    if !closed && hi - lo > PI + 1e-12 {
        return Err(VemError::Ribbon("sector wider than a half disk is not convex".into()));
    }
    let n = n_segments;
    let dth = (hi - lo) / n as f64;
    let chord = 2.0 * radius * (0.5 * dth).sin();
    let tau = thickness.unwrap_or(chord);
    if !(tau > 0.0) {
        return Err(VemError::Ribbon(format!("thickness {tau} must be positive")));
    }
    let (r_in, r_out) = (radius - 0.5 * tau, radius + 0.5 * tau);
    if r_in <= 0.0 {
        return Err(VemError::Ribbon(format!(
            "inner offset collapses: thickness {tau} exceeds the diameter"
        )));
    }
    if r_out * (0.5 * dth).cos() <= radius {
        return Err(VemError::Ribbon("outer polygon cuts into the domain".into()));
    }
    let rays = if closed { n } else { n + 1 };
    let at = |r: f64, i: usize| {
        let th = lo + i as f64 * dth;
        [center[0] + r * th.cos(), center[1] + r * th.sin()]
    };
    let mut vertices = Vec::with_capacity(3 * rays + 1);
    let apex = if closed {
        None
    } else {
        vertices.push(center);
        Some(0)
    };
    let base = vertices.len();
    let mid = |i: usize| base + i % rays;
    let inn = |i: usize| base + rays + i % rays;
    let out = |i: usize| base + 2 * rays + i % rays;
    for r in [0.5 * r_in, r_in, r_out] {
        for i in 0..rays {
            vertices.push(at(r, i));
        }
    }
    let inner: Vec<[f64; 2]> = (0..rays).map(|i| vertices[inn(i)]).collect();
    let outer: Vec<[f64; 2]> = (0..rays).map(|i| vertices[out(i)]).collect();

    let mut elements = Vec::new();
    let mut central: Vec<usize> = apex.into_iter().collect();
    central.extend((0..rays).map(mid));
    elements.push(Element2D {
        vertices: central,
        curved_edge: None,
    });
    for i in 0..n {
        elements.push(Element2D {
            vertices: vec![mid(i), inn(i), inn(i + 1), mid(i + 1)],
            curved_edge: None,
        });
    }
    let n_interior = elements.len();
    let disk = Disk {
        center,
        radius,
    };
    let mut clipped = vec![None; n_interior];
    for i in 0..n {
        let first = !closed && i == 0;
        let last = !closed && i == n - 1;
        let tris = [
            ([inn(i), out(i), out(i + 1)], [first, false, false]),
            ([inn(i), out(i + 1), inn(i + 1)], [false, last, false]),
        ];
        for (t, flags) in tris {
            let id = elements.len();
            let pts = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
            clipped.push(Some(clip_triangle(id, pts, &disk, flags)?));
            elements.push(Element2D {
                vertices: t.to_vec(),
                curved_edge: None,
            });
        }
    }
    let mesh = Mesh2D::new(vertices, vec![], elements, &HashMap::new(), Some(BoundaryTag::Dirichlet))?;
    Ok(Ribbon {
        mesh,
        clipped,
        inner,
        outer,
        thickness: tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_ribbon_counts_and_tiling() {
        let c = Curve::arc([0.0, 0.0], 1.0, 0.0, TAU).unwrap();
        let r = build_ribbon(&c, 16, Some(0.2)).unwrap();
        assert_eq!(r.n_triangles(), 32);
        assert_eq!(r.inner.len(), 16);
        for p in &r.inner {
            assert!(p[0].hypot(p[1]) < 1.0);
        }
        for p in &r.outer {
            assert!(p[0].hypot(p[1]) > 1.0);
        }
        for c in r.clipped.iter().flatten() {
            assert!(c.polygon.area() > 0.0);
        }
        assert!((r.covered_area().unwrap() - PI).abs() < 1e-10 * PI);
    }

    #[test]
    fn sector_ribbon_tiles_quarter_disk() {
        let c = Curve::arc([0.0, 0.0], 1.0, 0.0, PI / 2.0).unwrap();
        let r = build_ribbon(&c, 6, None).unwrap();
        assert_eq!(r.n_triangles(), 12);
        assert!((r.covered_area().unwrap() - PI / 4.0).abs() < 1e-10);
        let flagged: usize = r
            .clipped
            .iter()
            .flatten()
            .map(|c| c.on_boundary.iter().zip(&c.polygon.edges).filter(|(f, e)| **f && matches!(e, EdgeShape::Straight)).count())
            .sum();
        assert_eq!(flagged, 2);
    }

    #[test]
    fn thick_ribbon_is_rejected() {
        let c = Curve::arc([0.0, 0.0], 1.0, 0.0, TAU).unwrap();
        assert!(matches!(build_ribbon(&c, 8, Some(2.0)), Err(VemError::Ribbon(_))));
    }
}
