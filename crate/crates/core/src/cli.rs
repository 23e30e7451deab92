//! Runs behind the command line: single solves, convergence studies, the
//! patch-test suite and projector diagnostics, with versioned reports.
//!
//! Reports contain no timings unless asked for, so reruns with the same
//! configuration print identical bytes.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Serialize, Serializer};

use crate::curved2d::{CurvedStrategy, RibbonDiscretization};
use crate::discrete::{shift_pinned, solve_poisson, Discretization, ErrorNorms, ProblemData, RunOptions};
use crate::error::{Result, VemError};
use crate::geometry::io::{read_mesh, MeshFile};
use crate::geometry::Polyhedron;
use crate::problems::{BoundaryMode, Domain, Problem, Solution};
use crate::projectors::{dofi_projector, grad_l2, pinabla, serendipity, LocalSpace};
use crate::solver::SolverKind;
use crate::vem2d::{Consistency, Discretization2D, Stabilization};
use crate::vem3d::Discretization3D;

pub const SCHEMA: &str = "polyvem-report/1";

/// Max dof error below which a polynomial solution counts as reproduced.
pub const PATCH_TOL: f64 = 1e-8;

/// Errors below this at every level mark a study as exact.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    /// Mesh file replacing the built-in mesh of the problem's domain.
    pub mesh: Option<PathBuf>,
    pub degree: usize,
    /// Overrides the boundary tags; `None` keeps those of a mesh file
    /// (everything Dirichlet on built-in meshes).
    pub bc: Option<BoundaryMode>,
    pub strategy: CurvedStrategy,
    pub run: RunOptions,
    pub timings: bool,
}

impl RunConfig {
    pub fn new(problem: Problem, degree: usize) -> Self {
        RunConfig {
            problem,
            mesh: None,
            degree,
            bc: None,
            strategy: CurvedStrategy::Generators,
            run: RunOptions::default(),
            timings: false,
        }
    }

    fn bc_label(&self) -> String {
        match (self.bc, &self.mesh) {
            (Some(bc), _) => bc.to_string(),
            (None, Some(_)) => "file".into(),
            (None, None) => BoundaryMode::Dirichlet.to_string(),
        }
    }
}

/// Mesh of the run at `level`, boundary tags set by the boundary mode.
pub fn load_mesh(cfg: &RunConfig, level: usize) -> Result<MeshFile> {
    let mut mesh = match &cfg.mesh {
        Some(path) => read_mesh(path)?,
        None => cfg.problem.domain.mesh(level)?,
    };
    if mesh.dim() != cfg.problem.domain.dim() {
        return Err(VemError::Config(format!(
            "problem '{}' is {}D but the mesh is {}D",
            cfg.problem,
            cfg.problem.domain.dim(),
            mesh.dim()
        )));
    }
    if let Some(bc) = cfg.bc {
        bc.apply(&mut mesh);
    }
    Ok(mesh)
}

pub fn build_discretization(
    cfg: &RunConfig,
    mesh: &MeshFile,
    strategy: CurvedStrategy,
    level: usize,
) -> Result<Box<dyn Discretization>> {
    let k = cfg.degree;
    match (mesh, strategy) {
        (MeshFile::Planar(_), CurvedStrategy::Ribbon) => {
            if cfg.mesh.is_some() {
                return Err(VemError::Unsupported("the ribbon strategy builds its own mesh; drop --mesh".into()));
            }
            let mode = cfg.bc.unwrap_or(BoundaryMode::Dirichlet);
            if mode == BoundaryMode::Dirichlet {
                return Err(VemError::Unsupported(
                    "the ribbon carries a natural condition on the curve; use --bc mixed or neumann".into(),
                ));
            }
            let (curve, n) = cfg.problem.domain.ribbon_curve(level)?;
            Ok(Box::new(RibbonDiscretization::new(&curve, n, None, k, mode.sides())?))
        }
        (MeshFile::Planar(m), s) => Ok(Box::new(Discretization2D::new(m, k, s)?)),
        (MeshFile::Solid(m), CurvedStrategy::Generators | CurvedStrategy::Subset | CurvedStrategy::SubsetMfd) => {
            Ok(Box::new(Discretization3D::new(m, k)?))
        }
        (MeshFile::Solid(_), s) => Err(VemError::Unsupported(format!("strategy '{s}' on polyhedral meshes"))),
    }
}

/// Largest element diameter.
pub fn mesh_size(mesh: &MeshFile) -> Result<f64> {
    let mut h: f64 = 0.0;
    match mesh {
        MeshFile::Planar(m) => {
            for e in 0..m.n_elements() {
                h = h.max(m.polygon(e)?.diameter());
            }
        }
        MeshFile::Solid(m) => {
            for e in 0..m.n_elements() {
                h = h.max(Polyhedron::from_mesh(m, e)?.measures()?.2);
            }
        }
    }
    Ok(h)
}

fn has_curves(mesh: &MeshFile) -> bool {
    match mesh {
        MeshFile::Planar(m) => m.edge_curve.iter().any(|c| c.is_some()),
        MeshFile::Solid(m) => !m.surfaces.is_empty(),
    }
}

fn n_elements(mesh: &MeshFile) -> usize {
    match mesh {
        MeshFile::Planar(m) => m.n_elements(),
        MeshFile::Solid(m) => m.n_elements(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub setup_s: f64,
    pub solve_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub schema: &'static str,
    pub problem: String,
    pub mesh: String,
    pub degree: usize,
    /// Boundary mode, or `file` for the tags of a mesh file.
    pub bc: String,
    pub strategy: CurvedStrategy,
    pub stab: Stabilization,
    pub stab_coeff: f64,
    pub consistency: Consistency,
    pub n_elements: usize,
    pub n_dofs: usize,
    pub h: f64,
    pub l2: f64,
    pub h1: f64,
    /// Largest difference between computed and interpolated unknowns.
    pub max_dof_error: f64,
    /// Polynomial solutions of degree at most `k`: whether they are reproduced.
    pub patch_pass: Option<bool>,
    pub solver: SolverKind,
    pub iterations: usize,
    pub residual: f64,
    pub pinned: Option<usize>,
    pub compatibility: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

/// Discrete solution and what it is compared against.
pub struct Outcome {
    pub dofs: DVector<f64>,
    pub exact: DVector<f64>,
    pub errors: ErrorNorms,
    pub pinned: Option<usize>,
}

/// Solves with `disc` and measures errors; a pinned solution is shifted so
/// the pinned unknown matches the exact one.
pub fn solve_and_measure(disc: &dyn Discretization, solution: Solution, dim: usize, run: &RunOptions) -> Result<(Outcome, crate::discrete::Solution)> {
    let value = |p: &[f64; 3]| solution.value(dim, p);
    let grad = |p: &[f64; 3]| solution.grad(dim, p);
    let f = |p: &[f64; 3]| solution.source(dim, p);
    let flux = |p: &[f64; 3], n: &[f64; 3]| solution.flux(dim, p, n);
    let data = ProblemData {
        f: &f,
        dirichlet: &value,
        neumann: &flux,
    };
    let sol = solve_poisson(disc, &data, run)?;
    let exact = disc.interpolate(&value)?;
    let dofs = match sol.pinned {
        Some(pin) => shift_pinned(disc, &sol, exact[pin])?,
        None => sol.dofs.clone(),
    };
    let errors = disc.errors(&dofs, &value, &grad)?;
    Ok((
        Outcome {
            dofs,
            exact,
            errors,
            pinned: sol.pinned,
        },
        sol,
    ))
}

pub fn run_solve(cfg: &RunConfig, level: usize) -> Result<SolveSummary> {
    let start = Instant::now();
    let mesh = load_mesh(cfg, level)?;
    let disc = build_discretization(cfg, &mesh, cfg.strategy, level)?;
    let setup = start.elapsed().as_secs_f64();
    let (out, sol) = solve_and_measure(disc.as_ref(), cfg.problem.solution, mesh.dim(), &cfg.run)?;
    let solve_s = start.elapsed().as_secs_f64() - setup;
    let max_dof_error = (&out.dofs - &out.exact).amax();
    // chords change the domain, so the baseline is not expected to be exact
    let chords = cfg.strategy == CurvedStrategy::Facet && has_curves(&mesh);
    let patch_pass = cfg
        .problem
        .solution
        .degree()
        .filter(|d| *d <= cfg.degree && !chords)
        .map(|_| max_dof_error <= PATCH_TOL);
    Ok(SolveSummary {
        schema: SCHEMA,
        problem: cfg.problem.to_string(),
        mesh: match &cfg.mesh {
            Some(p) => p.display().to_string(),
            None => format!("{}@l{level}", cfg.problem.domain),
        },
        degree: cfg.degree,
        bc: cfg.bc_label(),
        strategy: cfg.strategy,
        stab: cfg.run.stiffness.stab,
        stab_coeff: cfg.run.stiffness.stab_coeff,
        consistency: cfg.run.stiffness.consistency,
        n_elements: n_elements(&mesh),
        n_dofs: disc.n_dofs(),
        h: mesh_size(&mesh)?,
        l2: out.errors.l2,
        h1: out.errors.h1,
        max_dof_error,
        patch_pass,
        solver: sol.report.method,
        iterations: sol.report.iterations,
        residual: sol.report.residual,
        pinned: out.pinned,
        compatibility: sol.compatibility,
        timings: cfg.timings.then_some(Timings { setup_s: setup, solve_s }),
    })
}

/// Observed convergence order, or a marker for errors at round-off level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    Slope(f64),
    Exact,
}

impl Rate {
    pub fn slope(self) -> Option<f64> {
        match self {
            Rate::Slope(s) => Some(s),
            Rate::Exact => None,
        }
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Slope(s) => write!(f, "{s:.4}"),
            Rate::Exact => f.write_str("exact"),
        }
    }
}

impl Serialize for Rate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rate::Slope(v) => s.serialize_f64(*v),
            Rate::Exact => s.serialize_str("exact"),
        }
    }
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_rate(h: &[f64], e: &[f64]) -> Rate {
    if e.iter().all(|v| *v < EXACT_TOL) {
        return Rate::Exact;
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Rate::Slope(sxy / sxx)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub n_dofs: usize,
    pub l2: f64,
    pub h1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub strategy: CurvedStrategy,
    pub rows: Vec<LevelRow>,
    pub rate_l2: Rate,
    pub rate_h1: Rate,
}

impl Series {
    fn from_rows(strategy: CurvedStrategy, rows: Vec<LevelRow>) -> Self {
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let l2: Vec<f64> = rows.iter().map(|r| r.l2).collect();
        let h1: Vec<f64> = rows.iter().map(|r| r.h1).collect();
        Series {
            strategy,
            rate_l2: fitted_rate(&h, &l2),
            rate_h1: fitted_rate(&h, &h1),
            rows,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceSummary {
    pub schema: &'static str,
    pub problem: String,
    pub degree: usize,
    pub bc: String,
    pub stab: Stabilization,
    pub consistency: Consistency,
    pub series: Vec<Series>,
}

/// Errors of `strategy` on every level.
pub fn run_series(cfg: &RunConfig, strategy: CurvedStrategy, levels: &[usize]) -> Result<Series> {
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let mesh = load_mesh(cfg, level)?;
        let disc = build_discretization(cfg, &mesh, strategy, level)?;
        let (out, _) = solve_and_measure(disc.as_ref(), cfg.problem.solution, mesh.dim(), &cfg.run)?;
        rows.push(LevelRow {
            level,
            h: mesh_size(&mesh)?,
            n_dofs: disc.n_dofs(),
            l2: out.errors.l2,
            h1: out.errors.h1,
        });
    }
    Ok(Series::from_rows(strategy, rows))
}

/// Convergence study; planar meshes with curved edges also get the chord
/// baseline on the same node sets.
pub fn run_convergence(cfg: &RunConfig, levels: &[usize], baseline: bool) -> Result<ConvergenceSummary> {
    if levels.len() < 3 {
        return Err(VemError::Config(format!("a study needs at least 3 levels, got {}", levels.len())));
    }
    if cfg.mesh.is_some() {
        return Err(VemError::Config("a study refines built-in meshes; drop --mesh".into()));
    }
    let mut series = vec![run_series(cfg, cfg.strategy, levels)?];
    let curved = match load_mesh(cfg, levels[0])? {
        m @ MeshFile::Planar(_) => has_curves(&m),
        MeshFile::Solid(_) => false,
    };
    if baseline && curved && cfg.strategy != CurvedStrategy::Facet {
        series.push(run_series(cfg, CurvedStrategy::Facet, levels)?);
    }
    Ok(ConvergenceSummary {
        schema: SCHEMA,
        problem: cfg.problem.to_string(),
        degree: cfg.degree,
        bc: cfg.bc_label(),
        stab: cfg.run.stiffness.stab,
        consistency: cfg.run.stiffness.consistency,
        series,
    })
}

/// Parses `l0..l3` (or `0..3`) into the inclusive list of levels.
pub fn parse_study(s: &str) -> Result<Vec<usize>> {
    let bad = || VemError::Config(format!("cannot parse study '{s}', expected l<a>..l<b>"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let level = |t: &str| t.trim().trim_start_matches('l').parse::<usize>().map_err(|_| bad());
    let (a, b) = (level(a)?, level(b)?);
    if b < a {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchCase {
    pub case: String,
    pub degree: usize,
    pub max_dof_error: f64,
    pub pass: bool,
}

/// Patch tests with solutions of degree `k`: square and centroidal polygon
/// meshes, the quarter disk under every curved strategy, the cube, and the
/// octant with natural conditions on the sphere.
pub fn patch_suite() -> Result<Vec<PatchCase>> {
    let poly = |k: usize| [Solution::Poly1, Solution::Poly2, Solution::Poly3][k - 1];
    let mut cases: Vec<(Domain, BoundaryMode, CurvedStrategy, usize)> = Vec::new();
    for k in 1..=3 {
        cases.push((Domain::Square, BoundaryMode::Dirichlet, CurvedStrategy::Generators, k));
        cases.push((Domain::Voronoi, BoundaryMode::Dirichlet, CurvedStrategy::Generators, k));
        cases.push((Domain::QuarterDisk, BoundaryMode::Dirichlet, CurvedStrategy::Generators, k));
        for s in [CurvedStrategy::Generators, CurvedStrategy::Subset, CurvedStrategy::SubsetMfd, CurvedStrategy::Ribbon] {
            cases.push((Domain::QuarterDisk, BoundaryMode::Mixed, s, k));
            cases.push((Domain::Disk, BoundaryMode::Neumann, s, k));
        }
        cases.push((Domain::Cube, BoundaryMode::Dirichlet, CurvedStrategy::Generators, k));
    }
    for k in 1..=2 {
        cases.push((Domain::Octant, BoundaryMode::Mixed, CurvedStrategy::Subset, k));
        cases.push((Domain::Octant, BoundaryMode::Neumann, CurvedStrategy::Subset, k));
    }
    let mut out = Vec::with_capacity(cases.len());
    for (domain, bc, strategy, k) in cases {
        // below level 2 every sphere vertex also lies on a flat face
        let level = if domain == Domain::Octant { 2 } else { 0 };
        let problem = Problem {
            domain,
            solution: poly(k),
        };
        let mut cfg = RunConfig::new(problem, k);
        cfg.bc = Some(bc);
        cfg.strategy = strategy;
        let mesh = load_mesh(&cfg, level)?;
        let disc = build_discretization(&cfg, &mesh, strategy, level)?;
        let (o, _) = solve_and_measure(disc.as_ref(), problem.solution, domain.dim(), &cfg.run)?;
        let err = (&o.dofs - &o.exact).amax();
        let label = if domain.dim() == 3 { "-".to_string() } else { strategy.to_string() };
        out.push(PatchCase {
            case: format!("{domain}/{bc}/{label}"),
            degree: k,
            max_dof_error: err,
            pass: err <= PATCH_TOL,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectorRow {
    pub element: usize,
    pub n_dofs: usize,
    pub pinabla: f64,
    pub grad_l2: f64,
    pub dofi: Option<f64>,
    pub serendipity: Option<f64>,
}

fn identity_defect(p: &DMatrix<f64>, space: &LocalSpace) -> f64 {
    let n = space.n_poly();
    (p * &space.dofs_of_poly - DMatrix::<f64>::identity(n, n)).amax()
}

/// Polynomial-reproduction defects `max |P D - I|` of every projector on
/// every element (`grad_l2` against the exact derivative map).
pub fn projector_defects(cfg: &RunConfig, level: usize) -> Result<Vec<ProjectorRow>> {
    let mesh = load_mesh(cfg, level)?;
    let k = cfg.degree;
    let spaces: Vec<(LocalSpace, Option<crate::geometry::Polygon2D>)> = match &mesh {
        MeshFile::Planar(m) => {
            let d = Discretization2D::new(m, k, cfg.strategy)?;
            d.elements.into_iter().map(|e| (e.space, (!e.poly.is_curved()).then_some(e.poly))).collect()
        }
        MeshFile::Solid(m) => Discretization3D::new(m, k)?.elements.into_iter().map(|e| (e.space, None)).collect(),
    };
    let mut rows = Vec::with_capacity(spaces.len());
    for (e, (space, poly)) in spaces.iter().enumerate() {
        let mut grad: f64 = 0.0;
        let low = space.basis.with_degree(k - 1);
        for (d, pg) in grad_l2(space, k - 1)?.iter().enumerate() {
            let der = space.basis.derivative_map(d);
            let exact = DMatrix::from_fn(low.len(), space.n_poly(), |i, j| if i < der.nrows() { der[(i, j)] } else { 0.0 });
            grad = grad.max((pg * &space.dofs_of_poly - exact).amax());
        }
        rows.push(ProjectorRow {
            element: e,
            n_dofs: space.n_cols(),
            pinabla: identity_defect(&pinabla(space)?, space),
            grad_l2: grad,
            dofi: dofi_projector(space).ok().map(|p| identity_defect(&p, space)),
            serendipity: match poly {
                Some(p) => Some(identity_defect(&serendipity(space, p, None)?, space)),
                None => None,
            },
        });
    }
    Ok(rows)
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn solve_csv(s: &SolveSummary) -> String {
    let mut out = format!("# {}\n", s.schema);
    out.push_str("problem,mesh,degree,bc,strategy,stab,stab_coeff,consistency,n_elements,n_dofs,h,l2,h1,max_dof_error,patch_pass,solver,iterations,residual,pinned,compatibility");
    if s.timings.is_some() {
        out.push_str(",setup_s,solve_s");
    }
    out.push('\n');
    let _ = write!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{:e},{:e},{:e},{:e},{},{},{},{:e},{},{}",
        s.problem,
        s.mesh,
        s.degree,
        s.bc,
        s.strategy,
        serde_plain(&s.stab),
        s.stab_coeff,
        serde_plain(&s.consistency),
        s.n_elements,
        s.n_dofs,
        s.h,
        s.l2,
        s.h1,
        s.max_dof_error,
        opt(&s.patch_pass),
        serde_plain(&s.solver),
        s.iterations,
        s.residual,
        opt(&s.pinned),
        opt(&s.compatibility.map(|c| format!("{c:e}"))),
    );
    if let Some(t) = &s.timings {
        let _ = write!(out, ",{},{}", t.setup_s, t.solve_s);
    }
    out.push('\n');
    out
}

pub fn convergence_csv(s: &ConvergenceSummary) -> String {
    let mut out = format!("# {} {} k={} bc={}\n", s.schema, s.problem, s.degree, s.bc);
    out.push_str("strategy,level,h,n_dofs,l2,h1,rate_l2,rate_h1\n");
    for series in &s.series {
        let mut prev: Option<&LevelRow> = None;
        for r in &series.rows {
            let step = |a: f64, b: f64, ha: f64, hb: f64| {
                if a < EXACT_TOL && b < EXACT_TOL {
                    "exact".to_string()
                } else {
                    format!("{:.4}", (a / b).ln() / (ha / hb).ln())
                }
            };
            let (rl2, rh1) = match prev {
                Some(p) => (step(p.l2, r.l2, p.h, r.h), step(p.h1, r.h1, p.h, r.h)),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                out,
                "{},{},{:e},{},{:e},{:e},{},{}",
                series.strategy, r.level, r.h, r.n_dofs, r.l2, r.h1, rl2, rh1
            );
            prev = Some(r);
        }
        let _ = writeln!(out, "{},fit,,,,,{},{}", series.strategy, series.rate_l2, series.rate_h1);
    }
    out
}

pub fn patch_csv(cases: &[PatchCase]) -> String {
    let mut out = format!("# {}\ncase,degree,max_dof_error,pass\n", SCHEMA);
    for c in cases {
        let _ = writeln!(out, "{},{},{:e},{}", c.case, c.degree, c.max_dof_error, c.pass);
    }
    out
}

pub fn projectors_csv(rows: &[ProjectorRow]) -> String {
    let mut out = format!("# {}\nelement,n_dofs,pinabla,grad_l2,dofi,serendipity\n", SCHEMA);
    for r in rows {
        let e = |v: &Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{},{}",
            r.element,
            r.n_dofs,
            r.pinabla,
            r.grad_l2,
            e(&r.dofi),
            e(&r.serendipity)
        );
    }
    out
}

/// Kebab-case name of a unit enum, as serialized.
fn serde_plain<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| VemError::Config(format!("cannot serialize report: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn study_ranges() {
        assert_eq!(parse_study("l0..l3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_study("1..2").unwrap(), vec![1, 2]);
        assert!(parse_study("l3..l1").is_err());
        assert!(parse_study("l0-l3").is_err());
    }

    #[test]
    fn fitted_rate_of_power_law() {
        let h = [0.5, 0.25, 0.125];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((fitted_rate(&h, &e).slope().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fitted_rate(&h, &[1e-12, 1e-13, 1e-12]), Rate::Exact);
    }

    #[test]
    fn linear_solution_on_square_flags_the_patch_test() {
        let cfg = RunConfig::new("square:x".parse().unwrap(), 1);
        let s = run_solve(&cfg, 0).unwrap();
        assert!(s.l2 < 1e-10);
        assert_eq!(s.patch_pass, Some(true));
    }
}
