use std::process::Command;

use polyvem::cli::{run_series, RunConfig};
use polyvem::curved2d::CurvedStrategy;
use polyvem::discrete::{solve_poisson, Discretization, ProblemData, RunOptions};
use polyvem::geometry::io::{parse_mesh, write_mesh2d, write_mesh3d, MeshFile};
use polyvem::geometry::BoundaryTag;
use polyvem::problems::{Domain, Problem, Solution};
use polyvem::solver::SolverKind;
use polyvem::vem2d::Discretization2D;
use polyvem::vem3d::Discretization3D;

fn write(mesh: &MeshFile) -> String {
    match mesh {
        MeshFile::Planar(m) => write_mesh2d(m),
        MeshFile::Solid(m) => write_mesh3d(m),
    }
}

#[test]
fn cg_agrees_with_dense_cholesky() {
    let MeshFile::Planar(mesh) = Domain::Square.mesh(0).unwrap() else {
        unreachable!()
    };
    let disc = Discretization2D::new(&mesh, 2, CurvedStrategy::Generators).unwrap();
    assert!((60..=140).contains(&disc.n_dofs()), "{}", disc.n_dofs());
    let u = Solution::SinSin;
    let data = ProblemData {
        f: &|p| u.source(2, p),
        dirichlet: &|p| u.value(2, p),
        neumann: &|p, n| u.flux(2, p, n),
    };
    let mut opts = RunOptions::default();
    let cg = solve_poisson(&disc, &data, &opts).unwrap();
    opts.solver.kind = SolverKind::Dense;
    let dense = solve_poisson(&disc, &data, &opts).unwrap();
    let diff = (&cg.dofs - &dense.dofs).amax() / dense.dofs.amax();
    assert!(diff < 1e-9, "{diff:e}");
}

fn two_level_h1_rate(domain: Domain, levels: [usize; 2]) -> f64 {
    let cfg = RunConfig::new(
        Problem {
            domain,
            solution: Solution::SinSin,
        },
        1,
    );
    let s = run_series(&cfg, CurvedStrategy::Generators, &levels).unwrap();
    let (a, b) = (&s.rows[0], &s.rows[1]);
    (a.h1 / b.h1).ln() / (a.h / b.h).ln()
}

#[test]
fn square_first_order_rate() {
    // 8x8 against 16x16
    let rate = two_level_h1_rate(Domain::Square, [1, 2]);
    assert!((0.8..=1.2).contains(&rate), "{rate}");
}

#[test]
fn cube_first_order_rate() {
    // 4^3 against 8^3
    let rate = two_level_h1_rate(Domain::Cube, [1, 2]);
    assert!((0.8..=1.2).contains(&rate), "{rate}");
}

#[test]
fn neumann_face_load_integrates_the_flux() {
    let MeshFile::Solid(mut mesh) = Domain::Cube.mesh(0).unwrap() else {
        unreachable!()
    };
    mesh.set_all_boundary(BoundaryTag::Neumann);
    let disc = Discretization3D::new(&mesh, 1).unwrap();
    // the basis sums to one, so the load entries add up to the boundary integral
    let (load, ints) = disc.neumann(&|_, _| 1.0).unwrap();
    assert!((load.sum() - 6.0).abs() < 1e-12, "{}", load.sum());
    assert!((ints.signed - 6.0).abs() < 1e-12);
    let (load, _) = disc.neumann(&|p, _| p[0]).unwrap();
    assert!((load.sum() - 3.0).abs() < 1e-12, "{}", load.sum());
}

#[test]
fn mesh_text_round_trips() {
    for domain in Domain::ALL {
        let mesh = domain.mesh(1).unwrap();
        let text = write(&mesh);
        let back = parse_mesh(&text).unwrap();
        assert_eq!(write(&back), text, "{domain:?}");
    }
}

fn polyvem(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_polyvem")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn cli_reruns_are_byte_identical() {
    let args = [
        "solve",
        "--problem",
        "quarter-disk:harmonic2",
        "--degree",
        "2",
        "--curved-strategy",
        "subset",
        "--bc",
        "mixed",
    ];
    let first = polyvem(&args);
    assert_eq!(first, polyvem(&args));
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["patch_pass"], serde_json::Value::Bool(true));
}

#[test]
fn cli_solves_on_a_written_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quarter.mesh");
    let path = path.to_str().unwrap();
    polyvem(&["mesh", "--domain", "quarter-disk", "--level", "1", "--bc", "mixed", "-o", path]);
    let out = polyvem(&["solve", "--problem", "quarter-disk:poly2", "--mesh", path, "--degree", "2", "--curved-strategy", "subset-mfd"]);
    let report: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(report["bc"], "file");
    assert_eq!(report["patch_pass"], serde_json::Value::Bool(true));
}
