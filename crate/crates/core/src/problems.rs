//! Built-in benchmark domains and manufactured solutions, addressed by id.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Result, VemError};
use crate::geometry::generate::{cube_mesh, disk_mesh, octant_mesh, quarter_disk_mesh, square_mesh, voronoi_mesh};
use crate::geometry::io::MeshFile;
use crate::geometry::{BoundaryTag, Curve, Mesh2D, Mesh3D, Point};

/// Seed and smoothing steps of the built-in centroidal polygon meshes.
pub const VORONOI_SEED: u64 = 7;
pub const LLOYD_STEPS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Square,
    Voronoi,
    QuarterDisk,
    Disk,
    Cube,
    Octant,
}

impl Domain {
    pub const ALL: [Domain; 6] = [
        Domain::Square,
        Domain::Voronoi,
        Domain::QuarterDisk,
        Domain::Disk,
        Domain::Cube,
        Domain::Octant,
    ];

    pub fn dim(self) -> usize {
        match self {
            Domain::Cube | Domain::Octant => 3,
            _ => 2,
        }
    }

    /// Mesh of refinement level `level`; each level halves the mesh size.
    pub fn mesh(self, level: usize) -> Result<MeshFile> {
        let p = |e: usize| 1usize << e;
        Ok(match self {
            Domain::Square => MeshFile::Planar(square_mesh(p(level + 2))?),
            Domain::Voronoi => MeshFile::Planar(voronoi_mesh(32 * p(2 * level), VORONOI_SEED, LLOYD_STEPS)?),
            Domain::QuarterDisk => MeshFile::Planar(quarter_disk_mesh(p(level + 1))?),
            Domain::Disk => MeshFile::Planar(disk_mesh(p(level + 2))?),
            Domain::Cube => MeshFile::Solid(cube_mesh(p(level + 1))?),
            Domain::Octant => MeshFile::Solid(octant_mesh(level)?),
        })
    }

    /// Circular boundary arc and the number of arc pieces at `level`, for
    /// ribbon discretizations; matches the boundary of [`Domain::mesh`].
    pub fn ribbon_curve(self, level: usize) -> Result<(Curve, usize)> {
        let n = match self {
            Domain::QuarterDisk => 2 << (level + 1),
            Domain::Disk => 4 << (level + 2),
            _ => return Err(VemError::Unsupported(format!("domain '{self}' has no circular boundary"))),
        };
        let curve = match self {
            Domain::QuarterDisk => Curve::arc([0.0, 0.0], 1.0, 0.0, PI / 2.0)?,
            _ => Curve::arc([0.0, 0.0], 1.0, 0.0, 2.0 * PI)?,
        };
        Ok((curve, n))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Square => "square",
            Domain::Voronoi => "voronoi",
            Domain::QuarterDisk => "quarter-disk",
            Domain::Disk => "disk",
            Domain::Cube => "cube",
            Domain::Octant => "octant",
        })
    }
}

impl FromStr for Domain {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        Domain::ALL
            .into_iter()
            .find(|d| d.to_string() == s)
            .ok_or_else(|| VemError::Config(format!("unknown domain '{s}'")))
    }
}

/// Manufactured solutions of `-Δu = f`, valid in 2D (`z = 0`) and 3D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solution {
    /// `u = x`.
    X,
    /// Affine.
    Poly1,
    /// Quadratic.
    Poly2,
    /// Cubic.
    Poly3,
    /// `x² - y²`.
    Harmonic2,
    /// Product of `sin(πx_i)` over the coordinates.
    SinSin,
    /// `eˣ sin y`, harmonic.
    ExpSin,
}

impl Solution {
    pub const ALL: [Solution; 7] = [
        Solution::X,
        Solution::Poly1,
        Solution::Poly2,
        Solution::Poly3,
        Solution::Harmonic2,
        Solution::SinSin,
        Solution::ExpSin,
    ];

    /// Polynomial degree, `None` for transcendental solutions.
    pub fn degree(self) -> Option<usize> {
        match self {
            Solution::X | Solution::Poly1 => Some(1),
            Solution::Poly2 | Solution::Harmonic2 => Some(2),
            Solution::Poly3 => Some(3),
            Solution::SinSin | Solution::ExpSin => None,
        }
    }

    pub fn value(self, dim: usize, p: &Point) -> f64 {
        let [x, y, z] = *p;
        match self {
            Solution::X => x,
            Solution::Poly1 => 1.0 + 2.0 * x - 3.0 * y + 0.5 * z,
            Solution::Poly2 => x * x + y * z + x * y - 0.5 * y * y + x,
            Solution::Poly3 => x * x * x - 2.0 * x * y * y + y * y * y / 3.0 + x * x * z + y * z,
            Solution::Harmonic2 => x * x - y * y,
            Solution::SinSin => {
                let s = (PI * x).sin() * (PI * y).sin();
                if dim == 3 {
                    s * (PI * z).sin()
                } else {
                    s
                }
            }
            Solution::ExpSin => x.exp() * y.sin(),
        }
    }

    pub fn grad(self, dim: usize, p: &Point) -> Point {
        let [x, y, z] = *p;
        match self {
            Solution::X => [1.0, 0.0, 0.0],
            Solution::Poly1 => [2.0, -3.0, 0.5],
            Solution::Poly2 => [2.0 * x + y + 1.0, z + x - y, y],
            Solution::Poly3 => [
                3.0 * x * x - 2.0 * y * y + 2.0 * x * z,
                -4.0 * x * y + y * y + z,
                x * x + y,
            ],
            Solution::Harmonic2 => [2.0 * x, -2.0 * y, 0.0],
            Solution::SinSin => {
                let (sx, cx) = (PI * x).sin_cos();
                let (sy, cy) = (PI * y).sin_cos();
                let (sz, cz) = if dim == 3 { (PI * z).sin_cos() } else { (1.0, 0.0) };
                [PI * cx * sy * sz, PI * sx * cy * sz, PI * sx * sy * cz]
            }
            Solution::ExpSin => [x.exp() * y.sin(), x.exp() * y.cos(), 0.0],
        }
    }

    /// `f = -Δu`.
    pub fn source(self, dim: usize, p: &Point) -> f64 {
        let [x, _, z] = *p;
        match self {
            Solution::X | Solution::Poly1 | Solution::Harmonic2 | Solution::ExpSin => 0.0,
            // Δ(x² + xy - y²/2 + yz + x) = 2 - 1
            Solution::Poly2 => -1.0,
            // Δ = 6x - 4x + 2y + 2z
            Solution::Poly3 => -(2.0 * x + 2.0 * p[1] + 2.0 * z),
            Solution::SinSin => dim as f64 * PI * PI * self.value(dim, p),
        }
    }

    /// Outward flux `∇u·n`.
    pub fn flux(self, dim: usize, p: &Point, n: &Point) -> f64 {
        let g = self.grad(dim, p);
        g[0] * n[0] + g[1] * n[1] + g[2] * n[2]
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solution::X => "x",
            Solution::Poly1 => "poly1",
            Solution::Poly2 => "poly2",
            Solution::Poly3 => "poly3",
            Solution::Harmonic2 => "harmonic2",
            Solution::SinSin => "sinsin",
            Solution::ExpSin => "expsin",
        })
    }
}

impl FromStr for Solution {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        Solution::ALL
            .into_iter()
            .find(|d| d.to_string() == s)
            .ok_or_else(|| VemError::Config(format!("unknown solution '{s}'")))
    }
}

/// Which boundary parts carry essential data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    Dirichlet,
    Neumann,
    /// Neumann on curved parts, Dirichlet on straight or flat ones.
    Mixed,
}

impl BoundaryMode {
    pub fn apply_2d(self, mesh: &mut Mesh2D) {
        for g in 0..mesh.edges.len() {
            if mesh.boundary[g].is_some() {
                mesh.boundary[g] = Some(self.tag(mesh.edge_curve[g].is_some()));
            }
        }
    }

    pub fn apply_3d(self, mesh: &mut Mesh3D) {
        for f in 0..mesh.faces.len() {
            if mesh.boundary[f].is_some() {
                mesh.boundary[f] = Some(self.tag(mesh.faces[f].surface.is_some()));
            }
        }
    }

    pub fn apply(self, mesh: &mut MeshFile) {
        match mesh {
            MeshFile::Planar(m) => self.apply_2d(m),
            MeshFile::Solid(m) => self.apply_3d(m),
        }
    }

    fn tag(self, curved: bool) -> BoundaryTag {
        match (self, curved) {
            (BoundaryMode::Dirichlet, _) | (BoundaryMode::Mixed, false) => BoundaryTag::Dirichlet,
            _ => BoundaryTag::Neumann,
        }
    }

    /// Condition on straight sides of a ribbon sector.
    pub fn sides(self) -> BoundaryTag {
        self.tag(false)
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMode::Dirichlet => "dirichlet",
            BoundaryMode::Neumann => "neumann",
            BoundaryMode::Mixed => "mixed",
        })
    }
}

impl FromStr for BoundaryMode {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        [BoundaryMode::Dirichlet, BoundaryMode::Neumann, BoundaryMode::Mixed]
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| VemError::Config(format!("unknown boundary mode '{s}'")))
    }
}

/// A `<domain>:<solution>` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Problem {
    pub domain: Domain,
    pub solution: Solution,
}

impl FromStr for Problem {
    type Err = VemError;

    fn from_str(s: &str) -> Result<Self> {
        let (d, u) = s
            .split_once(':')
            .ok_or_else(|| VemError::Config(format!("problem '{s}' is not of the form <domain>:<solution>")))?;
        Ok(Problem {
            domain: d.parse()?,
            solution: u.parse()?,
        })
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.domain, self.solution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(u: Solution, dim: usize, p: &Point) -> f64 {
        let h = 1e-3;
        let mut s = 0.0;
        for d in 0..dim {
            let mut a = *p;
            let mut b = *p;
            a[d] += h;
            b[d] -= h;
            s += (u.value(dim, &a) - 2.0 * u.value(dim, p) + u.value(dim, &b)) / (h * h);
        }
        s
    }

    #[test]
    fn sources_match_finite_differences() {
        let p = [0.31, 0.57, 0.23];
        for u in Solution::ALL {
            for dim in [2, 3] {
                let q = if dim == 2 { [p[0], p[1], 0.0] } else { p };
                let fd = -fd_laplacian(u, dim, &q);
                assert!((fd - u.source(dim, &q)).abs() < 1e-4, "{u} in {dim}D: {fd} vs {}", u.source(dim, &q));
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = [0.31, 0.57, 0.23];
        for u in Solution::ALL {
            let g = u.grad(3, &p);
            for d in 0..3 {
                let mut a = p;
                let mut b = p;
                a[d] += 1e-6;
                b[d] -= 1e-6;
                let fd = (u.value(3, &a) - u.value(3, &b)) / 2e-6;
                assert!((fd - g[d]).abs() < 1e-6, "{u} d{d}");
            }
        }
    }

    #[test]
    fn ids_round_trip() {
        for d in Domain::ALL {
            assert_eq!(d.to_string().parse::<Domain>().unwrap(), d);
        }
        let p: Problem = "quarter-disk:harmonic2".parse().unwrap();
        assert_eq!(p.to_string(), "quarter-disk:harmonic2");
        assert!("disk".parse::<Problem>().is_err());
        assert!("disk:nope".parse::<Problem>().is_err());
    }
}
