use polyvem::discrete::{shift_pinned, solve_poisson, Discretization, ProblemData, RunOptions};
use polyvem::geometry::io::MeshFile;
use polyvem::geometry::{BoundaryTag, Mesh3D};
use polyvem::problems::{BoundaryMode, Domain, Solution};
use polyvem::vem3d::Discretization3D;

fn solution_of_degree(k: usize) -> Solution {
    [Solution::Poly1, Solution::Poly2, Solution::Poly3][k - 1]
}

fn max_dof_error(disc: &dyn Discretization, u: Solution) -> f64 {
    let value = |p: &[f64; 3]| u.value(3, p);
    let f = |p: &[f64; 3]| u.source(3, p);
    let flux = |p: &[f64; 3], n: &[f64; 3]| u.flux(3, p, n);
    let data = ProblemData {
        f: &f,
        dirichlet: &value,
        neumann: &flux,
    };
    let sol = solve_poisson(disc, &data, &RunOptions::default()).unwrap();
    let exact = disc.interpolate(&value).unwrap();
    let dofs = match sol.pinned {
        Some(pin) => shift_pinned(disc, &sol, exact[pin]).unwrap(),
        None => sol.dofs,
    };
    (dofs - exact).amax()
}

fn solid(domain: Domain, level: usize) -> Mesh3D {
    match domain.mesh(level).unwrap() {
        MeshFile::Solid(m) => m,
        MeshFile::Planar(_) => unreachable!(),
    }
}

#[test]
fn cube_passes_the_patch_test() {
    let mesh = solid(Domain::Cube, 0);
    assert_eq!(mesh.n_elements(), 8);
    for k in 1..=3 {
        let disc = Discretization3D::new(&mesh, k).unwrap();
        let err = max_dof_error(&disc, solution_of_degree(k));
        assert!(err < 1e-9, "k={k}: {err:e}");
    }
}

#[test]
fn quadratic_on_cube_is_exact() {
    // x² + yz is harmonic up to the constant source -2
    let mesh = solid(Domain::Cube, 0);
    let disc = Discretization3D::new(&mesh, 2).unwrap();
    let u = |p: &[f64; 3]| p[0] * p[0] + p[1] * p[2];
    let data = ProblemData {
        f: &|_| -2.0,
        dirichlet: &u,
        neumann: &|_, _| 0.0,
    };
    let sol = solve_poisson(&disc, &data, &RunOptions::default()).unwrap();
    let err = (sol.dofs - disc.interpolate(&u).unwrap()).amax();
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn pure_neumann_cube_passes_the_patch_test() {
    let mut mesh = solid(Domain::Cube, 0);
    mesh.set_all_boundary(BoundaryTag::Neumann);
    for k in 1..=2 {
        let disc = Discretization3D::new(&mesh, k).unwrap();
        let err = max_dof_error(&disc, solution_of_degree(k));
        assert!(err < 1e-9, "k={k}: {err:e}");
    }
}

#[test]
fn octant_passes_the_patch_test() {
    for level in [0, 1, 2] {
        // the fitted trace on the sphere face is a natural-condition construction
        for mode in [BoundaryMode::Mixed, BoundaryMode::Neumann] {
            let mut mesh = solid(Domain::Octant, level);
            mode.apply_3d(&mut mesh);
            for k in 1..=2 {
                let disc = Discretization3D::new(&mesh, k).unwrap();
                let err = max_dof_error(&disc, solution_of_degree(k));
                assert!(err < 1e-8, "level {level} {mode} k={k}: {err:e}");
            }
        }
    }
}
