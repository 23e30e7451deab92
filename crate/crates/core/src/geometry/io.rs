//! Line-oriented mesh text format.
//!
//! ```text
//! vemmesh <dim> <degree-hint>
//! vertex <id> <x> <y> [<z>]
//! curve <id> arc <cx> <cy> <r> <a0> <a1>
//! elem2d <id> <v0> <v1> ... [edgecurve <local-edge> <curve-id>]
//! surface <id> sphere <cx> <cy> <cz> <r>
//! surface <id> flat
//! face <id> <v0> <v1> ... [surface <surface-id>]
//! elem3d <id> <f0> <f1> ...
//! btag edge <v0> <v1> dirichlet|neumann
//! btag face <face-id> dirichlet|neumann
//! ```
//!
//! Ids of each record kind must be `0..n` (any order). Blank lines and
//! text after `#` are ignored. When no `btag` record is present every
//! boundary entity is Dirichlet; otherwise every boundary entity must be
//! tagged.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use super::curve::Curve;
use super::mesh::{BoundaryTag, Element2D, Element3D, Mesh2D, Mesh3D, SurfacePatch};
use crate::error::{Result, VemError};

/// A parsed mesh of either dimension.
#[derive(Debug, Clone)]
pub enum MeshFile {
    Planar(Mesh2D),
    Solid(Mesh3D),
}

impl MeshFile {
    pub fn dim(&self) -> usize {
        match self {
            MeshFile::Planar(_) => 2,
            MeshFile::Solid(_) => 3,
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> VemError {
    VemError::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let t = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    t.parse()
        .map_err(|_| err(line, format!("cannot parse {what} from `{t}`")))
}

fn dense<T>(map: BTreeMap<usize, T>, what: &str) -> Result<Vec<T>> {
    let n = map.len();
    if let Some((&last, _)) = map.iter().next_back() {
        if last + 1 != n {
            return Err(VemError::InvalidMesh(format!("{what} ids are not 0..{n}")));
        }
    }
    Ok(map.into_values().collect())
}

pub fn parse_mesh(text: &str) -> Result<MeshFile> {
    let mut dim = None;
    let mut vertices: BTreeMap<usize, [f64; 3]> = BTreeMap::new();
    let mut curves: BTreeMap<usize, Curve> = BTreeMap::new();
    let mut elems2: BTreeMap<usize, Element2D> = BTreeMap::new();
    let mut surfaces: BTreeMap<usize, SurfacePatch> = BTreeMap::new();
    let mut faces: BTreeMap<usize, (Vec<usize>, Option<usize>)> = BTreeMap::new();
    let mut elems3: BTreeMap<usize, Element3D> = BTreeMap::new();
    let mut edge_tags: HashMap<[usize; 2], BoundaryTag> = HashMap::new();
    let mut face_tags: HashMap<usize, BoundaryTag> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tok = body.split_whitespace();
        let kind = tok.next().unwrap_or("");
        if dim.is_none() && kind != "vemmesh" {
            return Err(err(line, "expected `vemmesh` header"));
        }
        let dup = |line| err(line, "duplicate id");
        match kind {
            "vemmesh" => {
                if dim.is_some() {
                    return Err(err(line, "repeated header"));
                }
                let d: usize = num(tok.next(), line, "dimension")?;
                if d != 2 && d != 3 {
                    return Err(err(line, format!("dimension {d} not supported")));
                }
                let _degree: usize = num(tok.next(), line, "degree hint")?;
                dim = Some(d);
            }
            "vertex" => {
                let id: usize = num(tok.next(), line, "vertex id")?;
                let x = num(tok.next(), line, "x")?;
                let y = num(tok.next(), line, "y")?;
                let z = match tok.next() {
                    Some(t) => num(Some(t), line, "z")?,
                    None => 0.0,
                };
                if vertices.insert(id, [x, y, z]).is_some() {
                    return Err(dup(line));
                }
            }
            "curve" => {
                let id: usize = num(tok.next(), line, "curve id")?;
                match tok.next() {
                    Some("arc") => {
                        let cx = num(tok.next(), line, "cx")?;
                        let cy = num(tok.next(), line, "cy")?;
                        let r = num(tok.next(), line, "radius")?;
                        let a0 = num(tok.next(), line, "angle0")?;
                        let a1 = num(tok.next(), line, "angle1")?;
                        let c = Curve::arc([cx, cy], r, a0, a1).map_err(|e| err(line, e.to_string()))?;
                        if curves.insert(id, c).is_some() {
                            return Err(dup(line));
                        }
                    }
                    other => return Err(err(line, format!("unknown curve kind {other:?}"))),
                }
            }
            "elem2d" => {
                let id: usize = num(tok.next(), line, "element id")?;
                let mut vs = Vec::new();
                let mut curved = None;
                while let Some(t) = tok.next() {
                    if t == "edgecurve" {
                        let le = num(tok.next(), line, "local edge")?;
                        let cid = num(tok.next(), line, "curve id")?;
                        curved = Some((le, cid));
                    } else {
                        vs.push(num(Some(t), line, "vertex id")?);
                    }
                }
                let el = Element2D {
                    vertices: vs,
                    curved_edge: curved,
                };
                if elems2.insert(id, el).is_some() {
                    return Err(dup(line));
                }
            }
            "surface" => {
                let id: usize = num(tok.next(), line, "surface id")?;
                let s = match tok.next() {
                    Some("sphere") => {
                        let cx = num(tok.next(), line, "cx")?;
                        let cy = num(tok.next(), line, "cy")?;
                        let cz = num(tok.next(), line, "cz")?;
                        let radius: f64 = num(tok.next(), line, "radius")?;
                        if !(radius > 0.0) {
                            return Err(err(line, "sphere radius must be positive"));
                        }
                        SurfacePatch::Sphere {
                            center: [cx, cy, cz],
                            radius,
                        }
                    }
                    Some("flat") => SurfacePatch::Flat,
                    other => return Err(err(line, format!("unknown surface kind {other:?}"))),
                };
                if surfaces.insert(id, s).is_some() {
                    return Err(dup(line));
                }
            }
            "face" => {
                let id: usize = num(tok.next(), line, "face id")?;
                let mut vs = Vec::new();
                let mut surf = None;
                while let Some(t) = tok.next() {
                    if t == "surface" {
                        surf = Some(num(tok.next(), line, "surface id")?);
                    } else {
                        vs.push(num(Some(t), line, "vertex id")?);
                    }
                }
                if faces.insert(id, (vs, surf)).is_some() {
                    return Err(dup(line));
                }
            }
            "elem3d" => {
                let id: usize = num(tok.next(), line, "element id")?;
                let fs = tok
                    .map(|t| num(Some(t), line, "face id"))
                    .collect::<Result<Vec<usize>>>()?;
                if elems3.insert(id, Element3D { faces: fs }).is_some() {
                    return Err(dup(line));
                }
                continue;
            }
            "btag" => match tok.next() {
                Some("edge") => {
                    let a: usize = num(tok.next(), line, "vertex id")?;
                    let b: usize = num(tok.next(), line, "vertex id")?;
                    let t = BoundaryTag::from_str(tok.next().unwrap_or(""))
                        .map_err(|e| err(line, e.to_string()))?;
                    edge_tags.insert([a.min(b), a.max(b)], t);
                }
                Some("face") => {
                    let f: usize = num(tok.next(), line, "face id")?;
                    let t = BoundaryTag::from_str(tok.next().unwrap_or(""))
                        .map_err(|e| err(line, e.to_string()))?;
                    face_tags.insert(f, t);
                }
                other => return Err(err(line, format!("unknown btag target {other:?}"))),
            },
            other => return Err(err(line, format!("unknown record `{other}`"))),
        }
        if tok.next().is_some() {
            return Err(err(line, "trailing tokens"));
        }
    }

    let dim = dim.ok_or_else(|| err(0, "empty mesh file"))?;
    let vertices = dense(vertices, "vertex")?;
    match dim {
        2 => {
            if !faces.is_empty() || !elems3.is_empty() || !surfaces.is_empty() || !face_tags.is_empty() {
                return Err(VemError::InvalidMesh("3D records in a 2D mesh".into()));
            }
            let default = edge_tags.is_empty().then_some(BoundaryTag::Dirichlet);
            let verts = vertices.iter().map(|v| [v[0], v[1]]).collect();
            Ok(MeshFile::Planar(Mesh2D::new(
                verts,
                dense(curves, "curve")?,
                dense(elems2, "element")?,
                &edge_tags,
                default,
            )?))
        }
        _ => {
            if !curves.is_empty() || !elems2.is_empty() || !edge_tags.is_empty() {
                return Err(VemError::InvalidMesh("2D records in a 3D mesh".into()));
            }
            let default = face_tags.is_empty().then_some(BoundaryTag::Dirichlet);
            Ok(MeshFile::Solid(Mesh3D::new(
                vertices,
                dense(surfaces, "surface")?,
                dense(faces, "face")?,
                dense(elems3, "element")?,
                &face_tags,
                default,
            )?))
        }
    }
}

pub fn read_mesh(path: &std::path::Path) -> Result<MeshFile> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn write_mesh2d(mesh: &Mesh2D) -> String {
    let mut s = String::from("vemmesh 2 0\n");
    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(s, "vertex {i} {} {}", v[0], v[1]);
    }
    for (i, c) in mesh.curves.iter().enumerate() {
        match c {
            Curve::Arc {
                center,
                radius,
                angle0,
                angle1,
            } => {
                let _ = writeln!(
                    s,
                    "curve {i} arc {} {} {radius} {angle0} {angle1}",
                    center[0], center[1]
                );
            }
            Curve::Polyline { .. } => {
                let _ = writeln!(s, "# curve {i}: polyline curves are not serializable");
            }
        }
    }
    for (i, el) in mesh.elements.iter().enumerate() {
        let _ = write!(s, "elem2d {i}");
        for v in &el.vertices {
            let _ = write!(s, " {v}");
        }
        if let Some((le, cid)) = el.curved_edge {
            let _ = write!(s, " edgecurve {le} {cid}");
        }
        s.push('\n');
    }
    for (g, e) in mesh.edges.iter().enumerate() {
        if let Some(t) = mesh.boundary[g] {
            let _ = writeln!(s, "btag edge {} {} {t}", e[0], e[1]);
        }
    }
    s
}

pub fn write_mesh3d(mesh: &Mesh3D) -> String {
    let mut s = String::from("vemmesh 3 0\n");
    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(s, "vertex {i} {} {} {}", v[0], v[1], v[2]);
    }
    for (i, p) in mesh.surfaces.iter().enumerate() {
        match p {
            SurfacePatch::Sphere { center, radius } => {
                let _ = writeln!(
                    s,
                    "surface {i} sphere {} {} {} {radius}",
                    center[0], center[1], center[2]
                );
            }
            SurfacePatch::Flat => {
                let _ = writeln!(s, "surface {i} flat");
            }
        }
    }
    for (i, f) in mesh.faces.iter().enumerate() {
        let _ = write!(s, "face {i}");
        for v in &f.vertices {
            let _ = write!(s, " {v}");
        }
        if let Some(sid) = f.surface {
            let _ = write!(s, " surface {sid}");
        }
        s.push('\n');
    }
    for (i, el) in mesh.elements.iter().enumerate() {
        let _ = write!(s, "elem3d {i}");
        for f in &el.faces {
            let _ = write!(s, " {f}");
        }
        s.push('\n');
    }
    for (f, t) in mesh.boundary.iter().enumerate() {
        if let Some(t) = t {
            let _ = writeln!(s, "btag face {f} {t}");
        }
    }
    s
}
