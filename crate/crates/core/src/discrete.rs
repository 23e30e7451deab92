//! Common interface of the discretizations and the Poisson solve built on it.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Result, VemError};
use crate::geometry::Point;
use crate::solver::{solve, CsrMatrix, LinearSystem, SolveReport, SolverOptions};
use crate::vem2d::StiffnessOptions;

pub type ScalarField<'a> = &'a dyn Fn(&Point) -> f64;
pub type VectorField<'a> = &'a dyn Fn(&Point) -> Point;
/// Boundary flux as a function of the point and the outward unit normal.
pub type FluxField<'a> = &'a dyn Fn(&Point, &Point) -> f64;

/// Default tolerance of the Neumann compatibility check.
pub const COMPAT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `H¹` seminorm.
    pub h1: f64,
}

/// `∫ g` and `∫ |g|` over some part of the domain or boundary.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integrals {
    pub signed: f64,
    pub absolute: f64,
}

pub trait Discretization {
    fn n_dofs(&self) -> usize;

    /// Global stiffness and source load.
    fn assemble(&self, opts: &StiffnessOptions, f: ScalarField) -> Result<(CsrMatrix, DVector<f64>)>;

    /// Unknowns of a function defined on the whole domain.
    fn interpolate(&self, u: ScalarField) -> Result<DVector<f64>>;

    /// Values of the unknowns on Dirichlet boundary parts.
    fn dirichlet(&self, g: ScalarField) -> Result<Vec<(usize, f64)>>;

    /// Boundary load on Neumann parts and the integrals of the flux there.
    fn neumann(&self, g: FluxField) -> Result<(DVector<f64>, Integrals)>;

    fn source_integrals(&self, f: ScalarField) -> Result<Integrals>;

    /// Boundary vertex unknowns, candidates for pinning a pure Neumann problem.
    fn pin_candidates(&self) -> Vec<usize>;

    fn errors(&self, uh: &DVector<f64>, u: ScalarField, grad: VectorField) -> Result<ErrorNorms>;
}

pub struct ProblemData<'a> {
    pub f: ScalarField<'a>,
    pub dirichlet: ScalarField<'a>,
    pub neumann: FluxField<'a>,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub stiffness: StiffnessOptions,
    pub solver: SolverOptions,
    pub compat_tol: f64,
    /// Index into [`Discretization::pin_candidates`].
    pub pin: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            stiffness: StiffnessOptions::default(),
            solver: SolverOptions::default(),
            compat_tol: COMPAT_TOL,
            pin: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub dofs: DVector<f64>,
    pub report: SolveReport,
    /// Unknown fixed to zero when no Dirichlet boundary exists.
    pub pinned: Option<usize>,
    /// Relative compatibility residual of pure Neumann data.
    pub compatibility: Option<f64>,
}

/// `|∫f + ∫g| / (∫|f| + ∫|g|)`, zero for vanishing data.
pub fn compatibility_residual(source: Integrals, flux: Integrals) -> f64 {
    let scale = source.absolute + flux.absolute;
    if scale == 0.0 {
        0.0
    } else {
        (source.signed + flux.signed).abs() / scale
    }
}

/// Assembles, constrains and solves `-Δu = f` with the boundary parts
/// tagged in the mesh.
pub fn solve_poisson(disc: &dyn Discretization, data: &ProblemData, opts: &RunOptions) -> Result<Solution> {
    let (matrix, mut rhs) = disc.assemble(&opts.stiffness, data.f)?;
    let mut constraints = disc.dirichlet(data.dirichlet)?;
    let (nload, flux) = disc.neumann(data.neumann)?;
    rhs += nload;
    let mut pinned = None;
    let mut compatibility = None;
    if constraints.is_empty() {
        let source = disc.source_integrals(data.f)?;
        let residual = compatibility_residual(source, flux);
        if residual > opts.compat_tol {
            return Err(VemError::IncompatibleNeumann {
                residual,
                tol: opts.compat_tol,
            });
        }
        compatibility = Some(residual);
        let cands = disc.pin_candidates();
        let pin = *cands.get(opts.pin).ok_or_else(|| {
            VemError::Config(format!("pin index {} out of {} boundary vertices", opts.pin, cands.len()))
        })?;
        constraints.push((pin, 0.0));
        pinned = Some(pin);
    }
    let mut sys = LinearSystem {
        matrix,
        rhs,
        constraints,
    };
    sys.apply_constraints();
    let (dofs, report) = solve(&sys, &opts.solver)?;
    Ok(Solution {
        dofs,
        report,
        pinned,
        compatibility,
    })
}

/// Adds the constant that makes the pinned unknown equal `value`.
pub fn shift_pinned(disc: &dyn Discretization, sol: &Solution, value: f64) -> Result<DVector<f64>> {
    let Some(pin) = sol.pinned else {
        return Ok(sol.dofs.clone());
    };
    let ones = disc.interpolate(&|_| 1.0)?;
    let c = value - sol.dofs[pin];
    Ok(&sol.dofs + ones * c)
}
