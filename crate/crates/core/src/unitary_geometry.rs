//! Closed forms for pairs of unitary channels.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::matlin::{self, ComplexMatrix};

/// Largest eigen-angle magnitude.
pub fn norm_max(u: &ComplexMatrix) -> Result<f64> {
    Ok(matlin::unitary_eig_angles(u)?
        .into_iter()
        .fold(0.0, |a, t| a.max(t.abs())))
}

/// Half-width of the smallest arc of the unit circle holding every eigenvalue
/// of `u`. Equals `min_gamma max_j |theta_j + gamma|` over global phases.
pub fn norm_g(u: &ComplexMatrix) -> Result<f64> {
    let angles = matlin::unitary_eig_angles(u)?;
    Ok(enclosing_half_arc(&angles))
}

/// Half-width of the smallest arc containing the given angles (radians).
pub fn enclosing_half_arc(angles: &[f64]) -> f64 {
    if angles.len() < 2 {
        return 0.0;
    }
    let mut a: Vec<f64> = angles.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
    a.sort_by(f64::total_cmp);
    let mut widest_gap = a[0] + 2.0 * PI - a[a.len() - 1];
    for w in a.windows(2) {
        widest_gap = widest_gap.max(w[1] - w[0]);
    }
    ((2.0 * PI - widest_gap) / 2.0).max(0.0)
}

pub fn c_func(u: &ComplexMatrix) -> Result<f64> {
    Ok(norm_g(u)?.min(FRAC_PI_2))
}

/// Angle between the unitary channels of `u1` and `u2`.
pub fn theta_qc_unitary(u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<f64> {
    if u1.shape() != u2.shape() {
        return Err(Error::Shape("unitaries differ in dimension".into()));
    }
    c_func(&(u1.adjoint() * u2))
}

/// `cos` of [`theta_qc_unitary`]: the channel fidelity of two unitary channels.
pub fn fidelity_unitary(u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<f64> {
    Ok(theta_qc_unitary(u1, u2)?.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::{c, exp_i_hermitian, pauli_x, I, ONE};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn four_quarter_turns() {
        let u = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![ONE, I, -ONE, -I]));
        assert_relative_eq!(norm_g(&u).unwrap(), 3.0 * PI / 4.0, epsilon = 1e-12);
        assert_relative_eq!(c_func(&u).unwrap(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn global_phase_invariant() {
        let h = pauli_x().scale(0.4);
        let u = exp_i_hermitian(&h, 1.0).unwrap();
        let v = u.scale(1.0) * c(0.3f64.cos(), 0.3f64.sin());
        assert_relative_eq!(norm_g(&u).unwrap(), norm_g(&v).unwrap(), epsilon = 1e-12);
        assert_relative_eq!(norm_g(&u).unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn norm_max_diagonal() {
        let u = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            c(0.1f64.cos(), 0.1f64.sin()),
            c(0.5f64.cos(), 0.5f64.sin()),
        ]));
        assert_relative_eq!(norm_max(&u).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(norm_g(&u).unwrap(), 0.2, epsilon = 1e-12);
        assert_relative_eq!(
            norm_max(&matlin::identity(3)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn arc_across_branch_cut() {
        assert_relative_eq!(
            enclosing_half_arc(&[PI - 0.1, -PI + 0.1]),
            0.1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rejects_dimension_mismatch() {
        assert!(theta_qc_unitary(&matlin::identity(2), &matlin::identity(3)).is_err());
    }
}
