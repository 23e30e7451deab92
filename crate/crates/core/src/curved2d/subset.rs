//! Polynomial fitted to the unknowns of an element with a curved edge.
//!
//! The unknowns available on such an element (vertex values, moments on
//! straight edges, interior moments) identify a polynomial of degree `k`
//! whenever the element has at least two straight edges. The fit keeps the
//! two endpoint values of the curved edge exact so that neighbouring
//! elements see a continuous trace; the MFD-like variant drops that
//! constraint.

use nalgebra::DMatrix;

use crate::error::{Result, VemError};
use crate::projectors::{pinv_checked, RANK_TOL};

/// Matrix from local unknowns to the coefficients of the fitted polynomial.
///
/// `d` holds one row per local unknown (the unknown's value on each
/// monomial). With `endpoints = Some([i, j])`, rows `i` and `j` are matched
/// exactly and the rest in the least-squares sense; with `None` every row
/// enters the least-squares fit.
pub fn subset_polynomial(d: &DMatrix<f64>, endpoints: Option<[usize; 2]>) -> Result<DMatrix<f64>> {
    let (nrows, n) = d.shape();
    let Some(ends) = endpoints else {
        return pinv_checked(d, n, "unknowns restricted to polynomials");
    };
    if nrows < n {
        return Err(VemError::RankDeficient {
            what: "curved-edge polynomial fit",
            rank: nrows,
            expected: n,
        });
    }
    let rest: Vec<usize> = (0..nrows).filter(|r| !ends.contains(r)).collect();
    let c = d.select_rows(ends.iter());
    let a = d.select_rows(rest.iter());
    let sel_c = DMatrix::<f64>::identity(nrows, nrows).select_rows(ends.iter());
    let sel_a = DMatrix::<f64>::identity(nrows, nrows).select_rows(rest.iter());

    // particular solution and null space of the two constraints
    let c_pinv = pinv_checked(&c, 2, "curved-edge endpoint constraints")?;
    let mut padded = DMatrix::zeros(n, n + 2);
    padded.columns_mut(0, 2).copy_from(&c.transpose());
    padded.columns_mut(2, n).fill_with_identity();
    let q = padded.qr().q();
    let z = q.columns(2, n - 2).into_owned();
    let az = &a * &z;
    let az_pinv = pinv_checked(&az, n - 2, "curved-edge polynomial fit")?;
    let particular = &c_pinv * &sel_c;
    Ok(&particular + &z * az_pinv * (sel_a - &a * &particular))
}

/// Relative misfit between `values` and the unknowns of the polynomial
/// fitted to them.
pub fn fit_residual(d: &DMatrix<f64>, s: &DMatrix<f64>, values: &nalgebra::DVector<f64>) -> f64 {
    let r = d * (s * values) - values;
    r.norm() / values.norm().max(RANK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    /// Rows of `[1, x, y]` at the vertices of the unit square.
    fn square_d() -> DMatrix<f64> {
        DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0])
    }

    #[test]
    fn hand_normal_equations() {
        // curved edge from (1,0) to (1,1); data (0, 1, 1, 0.5)
        let s = subset_polynomial(&square_d(), Some([1, 2])).unwrap();
        let p = &s * DVector::from_vec(vec![0.0, 1.0, 1.0, 0.5]);
        assert!((p[0] - 0.25).abs() < 1e-14, "{p}");
        assert!((p[1] - 0.75).abs() < 1e-14);
        assert!(p[2].abs() < 1e-14);
    }

    #[test]
    fn affine_data_is_reproduced() {
        let d = square_d();
        let u = DVector::from_vec(vec![0.3, -1.2, 2.0]);
        let vals = &d * &u;
        for ends in [Some([1, 2]), None] {
            let s = subset_polynomial(&d, ends).unwrap();
            assert!((&s * &vals - &u).norm() < 1e-13);
            assert!(fit_residual(&d, &s, &vals) < 1e-13);
        }
    }

    #[test]
    fn too_few_rows_are_rejected() {
        let d = square_d().rows(0, 2).into_owned();
        assert!(matches!(subset_polynomial(&d, Some([0, 1])), Err(VemError::RankDeficient { .. })));
    }
}
