//! Mesh representation, measures, quadrature on straight and curved
//! domains, mesh validation and ribbon construction.

pub mod curve;
pub mod generate;
pub mod io;
pub mod mesh;
pub mod polygon;
pub mod polyhedron;
pub mod quadrature;
pub mod ribbon;
pub mod validate;

pub use curve::{Curve, OrientedCurve};
pub use mesh::{BoundaryTag, Element2D, Element3D, Face3D, Mesh2D, Mesh3D, SurfacePatch};
pub use polygon::{BoundaryRule, EdgeShape, Polygon2D};
pub use polyhedron::Polyhedron;
pub use quadrature::QuadratureRule;
pub use ribbon::{build_ribbon, Ribbon};
pub use validate::{validate_mesh, ValidationReport};

/// Points are stored in 3-space; planar data uses `z = 0`.
pub type Point = [f64; 3];

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(a: &Point) -> Point {
    scale(a, 1.0 / norm(a))
}

pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    norm(&sub(a, b))
}

pub(crate) fn p2(x: [f64; 2]) -> Point {
    [x[0], x[1], 0.0]
}

/// Largest pairwise distance in a point cloud.
pub(crate) fn diameter(points: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            h = h.max(dist(a, b));
        }
    }
    h
}
