//! Local stiffness (consistency plus stabilization) and load.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, VemError};
use crate::geometry::Point;
use crate::projectors::{dofi_projector, grad_l2, pinabla, LocalSpace, ProjectorMatrices};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Consistency {
    #[serde(rename = "pinabla")]
    PiNabla,
    GradL2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stabilization {
    Dofi,
    BoundaryL2,
    Tangential,
}

impl std::str::FromStr for Consistency {
    type Err = VemError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pinabla" => Ok(Consistency::PiNabla),
            "grad-l2" => Ok(Consistency::GradL2),
            _ => Err(VemError::Config(format!("unknown consistency '{s}'"))),
        }
    }
}

impl std::str::FromStr for Stabilization {
    type Err = VemError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dofi" => Ok(Stabilization::Dofi),
            "boundary-l2" => Ok(Stabilization::BoundaryL2),
            "tangential" => Ok(Stabilization::Tangential),
            _ => Err(VemError::Config(format!("unknown stabilization '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StiffnessOptions {
    pub consistency: Consistency,
    pub stab: Stabilization,
    pub stab_coeff: f64,
}

impl Default for StiffnessOptions {
    fn default() -> Self {
        StiffnessOptions {
            consistency: Consistency::PiNabla,
            stab: Stabilization::Dofi,
            stab_coeff: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub consistency: DMatrix<f64>,
    pub stability: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub load: DVector<f64>,
    pub projectors: ProjectorMatrices,
}

fn symmetrize(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

/// `Σ_q w_q r_q r_qᵀ` for the rows `r_q` of `rows`.
fn weighted_gram(rows: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut scaled = rows.clone();
    for (q, w) in weights.iter().enumerate() {
        scaled.row_mut(q).scale_mut(*w);
    }
    rows.transpose() * scaled
}

/// Local stiffness of an element. The load is left at zero.
pub fn local_stiffness(space: &LocalSpace, opts: &StiffnessOptions) -> Result<ElementMatrices> {
    let k = space.degree;
    let n = space.n_cols();
    let pn = pinabla(space)?;
    let pgrad = grad_l2(space, k - 1)?;
    let consistency = match opts.consistency {
        Consistency::PiNabla => pn.transpose() * space.stiffness_gram() * &pn,
        Consistency::GradL2 => {
            let mass = space.basis.with_degree(k - 1).gram(&space.domain);
            let mut c = DMatrix::zeros(n, n);
            for p in &pgrad {
                c += p.transpose() * &mass * p;
            }
            c
        }
    };
    let h = space.basis.h;
    let stability = match opts.stab {
        Stabilization::Dofi => {
            let r = DMatrix::identity(n, n) - &space.dofs_of_poly * &pn;
            // a^P scales like length^(d-2); the diameter overweights flat
            // or cube-like polyhedra, so 3D uses the volume length instead
            let scale = match space.dim {
                2 => 1.0,
                d => space.domain.integrate(|_| 1.0).powf(1.0 / d as f64).powi(d as i32 - 2),
            };
            r.transpose() * r * scale
        }
        Stabilization::BoundaryL2 | Stabilization::Tangential if space.dim != 2 => {
            return Err(VemError::Unsupported(
                "boundary stabilizations are implemented for polygons only".into(),
            ))
        }
        Stabilization::BoundaryL2 => {
            let r = &space.trace - space.boundary_eval() * &pn;
            weighted_gram(&r, &space.boundary.rule.weights) / h
        }
        Stabilization::Tangential => {
            let tt = space.trace_tangent.as_ref().ok_or(VemError::Unsupported(
                "tangential stabilization needs tangential traces".into(),
            ))?;
            let nq = space.boundary.len();
            let mut et = DMatrix::zeros(nq, space.n_poly());
            for q in 0..nq {
                let g = space.basis.grad(&space.boundary.rule.points[q]);
                let t = space.boundary.tangents[q];
                for p in 0..space.n_poly() {
                    et[(q, p)] = g[p][0] * t[0] + g[p][1] * t[1] + g[p][2] * t[2];
                }
            }
            let r = tt - et * &pn;
            weighted_gram(&r, &space.boundary.rule.weights) * h
        }
    };
    // boundary terms only see generated polynomials on the curve, and
    // several slot vectors give the same one: penalize slots directly
    let stability = match opts.stab {
        Stabilization::Dofi => stability,
        _ if space.slots.is_empty() => stability,
        _ => {
            let r = DMatrix::identity(n, n) - &space.dofs_of_poly * &pn;
            let rows = r.select_rows(space.slots.iter());
            stability + rows.transpose() * rows
        }
    };
    let consistency = symmetrize(consistency);
    let stability = symmetrize(stability) * opts.stab_coeff;
    let stiffness = &consistency + &stability;
    Ok(ElementMatrices {
        consistency,
        stability,
        stiffness,
        load: DVector::zeros(n),
        projectors: ProjectorMatrices {
            pnabla: pn,
            pgrad,
            pdofi: dofi_projector(space).ok(),
            pserendip: None,
            d: space.dofs_of_poly.clone(),
        },
    })
}

/// Local load: for `k ≥ 2` the `L²` projection `f̄` of `f` onto `ℙ_{k-2}`
/// tested against the interior moments, plus `f - f̄` tested against the
/// energy projection (zero for `f ∈ ℙ_{k-2}`, and it keeps the `L²` error
/// at order `k+1` when `k = 2`); for `k = 1` the element mean of `f` times
/// the vertex average of the test function.
pub fn local_load(space: &LocalSpace, f: &dyn Fn(&Point) -> f64) -> Result<DVector<f64>> {
    let n = space.n_cols();
    let k = space.degree;
    if k == 1 {
        let total = space.domain.integrate(|x| f(x));
        let mut load = DVector::zeros(n);
        for i in 0..space.n_vertices {
            load[i] = total / space.n_vertices as f64;
        }
        return Ok(load);
    }
    let low = space.basis.with_degree(k - 2);
    let b = low.interpolate_moments(&space.domain, |x| f(x));
    let coeffs = crate::polybasis::l2_project(&low.gram(&space.domain), &b)?;
    let mut load = space.moments.transpose() * &coeffs;
    let proj = pinabla(space)?;
    let mut rest = DVector::zeros(space.n_poly());
    for (x, w) in space.domain.points.iter().zip(&space.domain.weights) {
        let r = f(x) - low.eval_poly(&coeffs, x);
        for (a, m) in space.basis.eval(x).into_iter().enumerate() {
            rest[a] += w * r * m;
        }
    }
    load += proj.transpose() * rest;
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curved2d::CurvedStrategy;
    use crate::geometry::Polygon2D;
    use crate::vem2d::space::build_element_space;

    fn square(k: usize) -> LocalSpace {
        let p = Polygon2D::straight(0, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        build_element_space(p, &[0, 1, 2, 3], k, CurvedStrategy::Generators).unwrap().space
    }

    #[test]
    fn unit_square_k1_spectrum() {
        let s = square(1);
        let m = local_stiffness(&s, &StiffnessOptions::default()).unwrap();
        let ev = m.stiffness.clone().symmetric_eigen().eigenvalues;
        let zeros = ev.iter().filter(|e| e.abs() < 1e-12).count();
        assert_eq!(zeros, 1);
        assert!(ev.iter().all(|e| *e > -1e-12));
        let ones = DVector::from_element(4, 1.0);
        assert!((&m.stiffness * ones).norm() < 1e-12);
    }

    #[test]
    fn load_rules() {
        let s = square(1);
        let l = local_load(&s, &|_| 1.0).unwrap();
        assert!(l.iter().all(|v| (v - 0.25).abs() < 1e-14));
        let s2 = square(2);
        let l2 = local_load(&s2, &|_| 1.0).unwrap();
        // only the interior moment sees the load, with weight |P|
        assert!((l2[8] - 1.0).abs() < 1e-13);
        assert!(l2.rows(0, 8).norm() < 1e-14);
        assert!(local_load(&s2, &|_| 0.0).unwrap().norm() == 0.0);
    }
}
