//! Sparse symmetric systems and their solution.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, VemError};

/// Largest system the dense solver accepts.
pub const DENSE_LIMIT: usize = 2000;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

/// Coordinate-format accumulator.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Triplets {
            n,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.entries.push((i, j, v));
    }

    /// Scatters a local matrix through a local-to-global index map.
    pub fn scatter(&mut self, map: &[usize], local: &DMatrix<f64>) -> Result<()> {
        if local.nrows() != map.len() || local.ncols() != map.len() {
            return Err(VemError::Assembly(format!(
                "local matrix {}x{} against {} indices",
                local.nrows(),
                local.ncols(),
                map.len()
            )));
        }
        if let Some(bad) = map.iter().find(|&&g| g >= self.n) {
            return Err(VemError::Assembly(format!("global index {bad} out of range {}", self.n)));
        }
        for (a, &i) in map.iter().enumerate() {
            for (b, &j) in map.iter().enumerate() {
                let v = local[(a, b)];
                // diagonals are always stored so constrained rows keep their identity entry
                if v != 0.0 || a == b {
                    self.entries.push((i, j, v));
                }
            }
        }
        Ok(())
    }

    /// Sums duplicates; entries summed in insertion order so the result
    /// does not depend on sorting stability.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by_key(|&t| (self.entries[t].0, self.entries[t].1, t));
        let mut row_ptr = vec![0; self.n + 1];
        let mut cols = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for t in order {
            let (i, j, v) = self.entries[t];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            cols,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.cols[p]];
            }
            y[i] = s;
        }
        y
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(p) => self.values[self.row_ptr[i] + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| self.get(i, i))
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                a[(i, self.cols[p])] += self.values[p];
            }
        }
        a
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m = m.max((self.values[p] - self.get(self.cols[p], i)).abs());
            }
        }
        m
    }
}

/// Global system with fixed values.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: DVector<f64>,
    /// `(dof, value)` pairs.
    pub constraints: Vec<(usize, f64)>,
}

impl LinearSystem {
    /// Symmetric elimination: moves the known columns to the right-hand
    /// side, then replaces constrained rows and columns by identity.
    pub fn apply_constraints(&mut self) {
        let n = self.matrix.n;
        let mut fixed = vec![None; n];
        for &(i, v) in &self.constraints {
            fixed[i] = Some(v);
        }
        let mut known = DVector::zeros(n);
        for (i, f) in fixed.iter().enumerate() {
            if let Some(v) = f {
                known[i] = *v;
            }
        }
        let shift = self.matrix.mul(&known);
        self.rhs -= shift;
        let a = &mut self.matrix;
        for i in 0..n {
            for p in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.cols[p];
                if fixed[i].is_some() || fixed[j].is_some() {
                    a.values[p] = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        for (i, f) in fixed.iter().enumerate() {
            if let Some(v) = f {
                self.rhs[i] = *v;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Cg,
    Dense,
}

impl std::str::FromStr for SolverKind {
    type Err = VemError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(SolverKind::Cg),
            "dense" => Ok(SolverKind::Dense),
            _ => Err(VemError::Config(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            kind: SolverKind::Cg,
            tol: 1e-12,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: SolverKind,
    pub iterations: usize,
    /// `‖Ax - b‖ / ‖b‖` recomputed after the solve.
    pub residual: f64,
}

pub fn solve(sys: &LinearSystem, opts: &SolverOptions) -> Result<(DVector<f64>, SolveReport)> {
    let (x, iterations) = match opts.kind {
        SolverKind::Cg => pcg(&sys.matrix, &sys.rhs, opts.tol, opts.max_iter)?,
        SolverKind::Dense => (dense(&sys.matrix, &sys.rhs)?, 0),
    };
    let residual = relative_residual(&sys.matrix, &x, &sys.rhs);
    let limit = 10.0 * opts.tol.max(f64::EPSILON);
    if residual > limit {
        return Err(VemError::ResidualCheck { residual, limit });
    }
    Ok((
        x,
        SolveReport {
            method: opts.kind,
            iterations,
            residual,
        },
    ))
}

pub fn relative_residual(a: &CsrMatrix, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let r = b - a.mul(x);
    let nb = b.norm();
    if nb == 0.0 {
        r.norm()
    } else {
        r.norm() / nb
    }
}

/// Iterations without a new smallest residual after which a CG cycle is
/// considered stalled (at least this many, or the system size).
const STALL_WINDOW: usize = 100;
const MAX_RESTARTS: usize = 4;

/// Jacobi-preconditioned conjugate gradients.
///
/// A cycle ends when the recursive residual reaches `tol` or stalls; the
/// next cycle restarts from the true residual, which removes the drift
/// between the two. When round-off keeps the true residual above `tol`,
/// the iterate is accepted within the `10·tol` margin of [`solve`].
pub fn pcg(a: &CsrMatrix, b: &DVector<f64>, tol: f64, max_iter: usize) -> Result<(DVector<f64>, usize)> {
    let n = a.n;
    let nb = b.norm();
    let mut x = DVector::zeros(n);
    if nb == 0.0 {
        return Ok((x, 0));
    }
    let inv_diag = a.diagonal().map(|d| if d > 0.0 { 1.0 / d } else { 1.0 });
    let window = STALL_WINDOW.max(n);
    let mut history = Vec::new();
    let mut it = 0;
    for _ in 0..=MAX_RESTARTS {
        let mut r = b - a.mul(&x);
        let true_rel = r.norm() / nb;
        if true_rel <= tol {
            return Ok((x, it));
        }
        let mut z = r.component_mul(&inv_diag);
        let mut p = z.clone();
        let mut rz = r.dot(&z);
        let (mut best, mut best_at) = (true_rel, it);
        while it < max_iter {
            let ap = a.mul(&p);
            let curvature = p.dot(&ap);
            if curvature <= 0.0 {
                return Err(VemError::NotPositiveDefinite {
                    iteration: it,
                    curvature,
                });
            }
            let alpha = rz / curvature;
            x.axpy(alpha, &p, 1.0);
            r.axpy(-alpha, &ap, 1.0);
            it += 1;
            let rel = r.norm() / nb;
            history.push(rel);
            if rel < best {
                (best, best_at) = (rel, it);
            }
            if rel <= tol || it - best_at > window {
                break;
            }
            z = r.component_mul(&inv_diag);
            let rz_new = r.dot(&z);
            p = &z + (rz_new / rz) * &p;
            rz = rz_new;
        }
        if it >= max_iter {
            break;
        }
    }
    let final_rel = relative_residual(a, &x, b);
    if final_rel <= tol || (it < max_iter && final_rel <= 10.0 * tol) {
        return Ok((x, it));
    }
    Err(VemError::NotConverged {
        iterations: it,
        residual: final_rel,
        history,
    })
}

/// Symmetric positive definite factorization of the full matrix.
pub fn dense(a: &CsrMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
    if a.n > DENSE_LIMIT {
        return Err(VemError::Config(format!(
            "dense solver limited to {DENSE_LIMIT} unknowns, system has {}",
            a.n
        )));
    }
    let chol = a.to_dense().cholesky().ok_or(VemError::NotPositiveDefinite {
        iteration: 0,
        curvature: f64::NAN,
    })?;
    Ok(chol.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr(a: &[&[f64]]) -> CsrMatrix {
        let mut t = Triplets::new(a.len());
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    t.add(i, j, *v);
                }
            }
        }
        t.to_csr()
    }

    #[test]
    fn identity_system() {
        let a = csr(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let (x, _) = pcg(&a, &b, 1e-12, 10).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two() {
        let a = csr(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        for kind in [SolverKind::Cg, SolverKind::Dense] {
            let sys = LinearSystem {
                matrix: a.clone(),
                rhs: b.clone(),
                constraints: vec![],
            };
            let opts = SolverOptions {
                kind,
                ..Default::default()
            };
            let (x, rep) = solve(&sys, &opts).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-13 && (x[1] - 1.0).abs() < 1e-13);
            assert!(rep.residual < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_detected() {
        let a = csr(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(pcg(&a, &b, 1e-12, 10), Err(VemError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn iteration_cap_reports_history() {
        let n = 50;
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.add(i, i, 2.0);
            if i + 1 < n {
                t.add(i, i + 1, -1.0);
                t.add(i + 1, i, -1.0);
            }
        }
        let b = DVector::from_element(n, 1.0);
        match pcg(&t.to_csr(), &b, 1e-14, 3) {
            Err(VemError::NotConverged { iterations, history, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn duplicates_are_summed_and_constraints_eliminated() {
        let mut t = Triplets::new(3);
        let local = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        t.scatter(&[0, 1], &local).unwrap();
        t.scatter(&[1, 2], &local).unwrap();
        let a = t.to_csr();
        assert_eq!(a.get(1, 1), 2.0);
        assert_eq!(a.asymmetry(), 0.0);
        let mut sys = LinearSystem {
            matrix: a,
            rhs: DVector::zeros(3),
            constraints: vec![(0, 0.0), (2, 1.0)],
        };
        sys.apply_constraints();
        let (x, _) = solve(&sys, &SolverOptions::default()).unwrap();
        assert!((x[1] - 0.5).abs() < 1e-14);
        assert!(t.scatter(&[0, 7], &local).is_err());
    }
}
