use polyvem::curved2d::{CurvedStrategy, RibbonDiscretization};
use polyvem::discrete::{shift_pinned, solve_poisson, Discretization, ProblemData, RunOptions};
use polyvem::geometry::io::MeshFile;
use polyvem::geometry::BoundaryTag;
use polyvem::problems::{BoundaryMode, Domain, Solution};
use polyvem::vem2d::Discretization2D;

fn solution_of_degree(k: usize) -> Solution {
    [Solution::Poly1, Solution::Poly2, Solution::Poly3][k - 1]
}

fn max_dof_error(disc: &dyn Discretization, u: Solution) -> f64 {
    let value = |p: &[f64; 3]| u.value(2, p);
    let f = |p: &[f64; 3]| u.source(2, p);
    let flux = |p: &[f64; 3], n: &[f64; 3]| u.flux(2, p, n);
    let data = ProblemData {
        f: &f,
        dirichlet: &value,
        neumann: &flux,
    };
    let sol = solve_poisson(disc, &data, &RunOptions::default()).unwrap();
    let exact = disc.interpolate(&value).unwrap();
    // pure Neumann: compare up to the constant fixed at the pinned unknown
    let dofs = match sol.pinned {
        Some(pin) => shift_pinned(disc, &sol, exact[pin]).unwrap(),
        None => sol.dofs,
    };
    (dofs - exact).amax()
}

fn planar(domain: Domain) -> polyvem::geometry::Mesh2D {
    match domain.mesh(0).unwrap() {
        MeshFile::Planar(m) => m,
        MeshFile::Solid(_) => unreachable!(),
    }
}

#[test]
fn straight_meshes_pass_the_patch_test() {
    for domain in [Domain::Square, Domain::Voronoi] {
        let mesh = planar(domain);
        for k in 1..=3 {
            let disc = Discretization2D::new(&mesh, k, CurvedStrategy::Generators).unwrap();
            let err = max_dof_error(&disc, solution_of_degree(k));
            assert!(err < 1e-9, "{domain} k={k}: {err:e}");
        }
    }
}

#[test]
fn curved_strategies_pass_the_patch_test() {
    let base = planar(Domain::QuarterDisk);
    for mode in [BoundaryMode::Dirichlet, BoundaryMode::Mixed] {
        let mut mesh = base.clone();
        mode.apply_2d(&mut mesh);
        for strategy in [CurvedStrategy::Generators, CurvedStrategy::Subset, CurvedStrategy::SubsetMfd] {
            for k in 1..=3 {
                let disc = Discretization2D::new(&mesh, k, strategy).unwrap();
                let err = max_dof_error(&disc, solution_of_degree(k));
                assert!(err < 1e-8, "{mode} {strategy} k={k}: {err:e}");
            }
        }
    }
}

#[test]
fn ribbon_passes_the_patch_test() {
    let (curve, n) = Domain::QuarterDisk.ribbon_curve(0).unwrap();
    for k in 1..=3 {
        let disc = RibbonDiscretization::new(&curve, n, None, k, BoundaryTag::Dirichlet).unwrap();
        let err = max_dof_error(&disc, solution_of_degree(k));
        assert!(err < 1e-8, "k={k}: {err:e}");
    }
}

#[test]
fn pure_neumann_disk_passes_the_patch_test() {
    let mut mesh = planar(Domain::Disk);
    BoundaryMode::Neumann.apply_2d(&mut mesh);
    let (curve, n) = Domain::Disk.ribbon_curve(0).unwrap();
    for k in 1..=3 {
        let u = solution_of_degree(k);
        for strategy in [CurvedStrategy::Generators, CurvedStrategy::Subset, CurvedStrategy::SubsetMfd] {
            let disc = Discretization2D::new(&mesh, k, strategy).unwrap();
            let err = max_dof_error(&disc, u);
            assert!(err < 1e-8, "{strategy} k={k}: {err:e}");
        }
        let disc = RibbonDiscretization::new(&curve, n, None, k, BoundaryTag::Neumann).unwrap();
        let err = max_dof_error(&disc, u);
        assert!(err < 1e-8, "ribbon k={k}: {err:e}");
    }
}

#[test]
fn pure_neumann_square_passes_the_patch_test() {
    let mut mesh = planar(Domain::Square);
    BoundaryMode::Neumann.apply_2d(&mut mesh);
    for k in 1..=3 {
        let disc = Discretization2D::new(&mesh, k, CurvedStrategy::Generators).unwrap();
        let err = max_dof_error(&disc, solution_of_degree(k));
        assert!(err < 1e-8, "k={k}: {err:e}");
    }
}
