//! Dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from row-major rows; every row must have the same length.
pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Shape("ragged rows".into()));
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.ncols() != b.nrows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a * b)
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(h: &ComplexMatrix, rel_tol: f64) -> bool {
    if !h.is_square() {
        return false;
    }
    let scale = h.norm().max(1.0);
    max_abs_diff(h, &h.adjoint()) <= rel_tol * scale
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol
}

fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !is_hermitian(h, 1e-12) {
        return Err(Error::Shape("matrix is not Hermitian".into()));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Column `k` of the returned matrix is the eigenvector of eigenvalue `k`.
pub fn herm_eig(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    require_hermitian(h)?;
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Hermitian eigensolver did not converge".into()))?;
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

pub fn herm_eigvals(h: &ComplexMatrix) -> Result<Vec<f64>> {
    herm_eig(h).map(|(v, _)| v)
}

pub fn lambda_min(h: &ComplexMatrix) -> Result<f64> {
    let v = herm_eigvals(h)?;
    v.first()
        .copied()
        .ok_or_else(|| Error::Shape("empty matrix".into()))
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn sym_eig(a: &RealMatrix) -> Result<(Vec<f64>, RealMatrix)> {
    let sym = (a + a.transpose()).scale(0.5);
    let eig = SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = RealMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigenphases `theta` of a unitary, with eigenvalues written `exp(-i theta)`
/// and `theta` in `(-pi, pi]`. Sorted ascending.
pub fn unitary_eig_angles(u: &ComplexMatrix) -> Result<Vec<f64>> {
    if !u.is_square() {
        return Err(Error::Shape("unitary must be square".into()));
    }
    if !is_unitary(u, 1e-10) {
        return Err(Error::Shape("matrix is not unitary within 1e-10".into()));
    }
    let schur = Schur::try_new(u.clone(), EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut angles: Vec<f64> = t
        .diagonal()
        .iter()
        .map(|z| {
            let th = -z.arg();
            if th <= -std::f64::consts::PI {
                th + 2.0 * std::f64::consts::PI
            } else {
                th
            }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, EIG_EPS, EIG_MAX_ITER)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

pub fn op_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.into_iter().fold(0.0, f64::max))
}

pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.into_iter().sum())
}

/// Square root of a positive semidefinite matrix; small negative eigenvalues
/// from rounding are clipped to zero.
pub fn sqrt_psd(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = herm_eig(h)?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if vals.first().is_some_and(|&v| v < -1e-9 * scale) {
        return Err(Error::Shape("matrix is not positive semidefinite".into()));
    }
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| c(v.max(0.0).sqrt(), 0.0)),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian matrix.
/// Each eigenvalue of `H` appears twice in its spectrum.
pub fn real_embed(h: &ComplexMatrix) -> Result<RealMatrix> {
    require_hermitian(h)?;
    let n = h.nrows();
    Ok(RealMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    }))
}

/// `exp(-i x H)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &ComplexMatrix, x: f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = herm_eig(h)?;
    let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| Complex64::from_polar(1.0, -x * v)),
    ));
    Ok(&vecs * d * vecs.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn herm_eig_reconstructs() {
        let h = pauli_x().scale(0.7) + pauli_y().scale(-0.2) + pauli_z().scale(0.1);
        let (vals, vecs) = herm_eig(&h).unwrap();
        assert!(vals[0] <= vals[1]);
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            vals.iter().map(|&v| c(v, 0.0)),
        ));
        assert!(max_abs_diff(&(&vecs * d * vecs.adjoint()), &h) < 1e-12);
        assert_relative_eq!(vals[1], (0.49f64 + 0.04 + 0.01).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(herm_eig(&m), Err(Error::Shape(_))));
    }

    #[test]
    fn unitary_angles_branch_cut() {
        let u = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, I, -ONE, -I]));
        let a = unitary_eig_angles(&u).unwrap();
        let expect = [-PI / 2.0, 0.0, PI / 2.0, PI];
        for (x, y) in a.iter().zip(expect) {
            assert_relative_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn unitary_angles_reject_non_unitary() {
        let m = identity(2).scale(1.1);
        assert!(unitary_eig_angles(&m).is_err());
    }

    #[test]
    fn real_embed_doubles_spectrum() {
        let h = pauli_y() + pauli_z().scale(0.5);
        let e = real_embed(&h).unwrap();
        let (vals, _) = sym_eig(&e).unwrap();
        let hv = herm_eigvals(&h).unwrap();
        assert_relative_eq!(vals[0], hv[0], epsilon = 1e-12);
        assert_relative_eq!(vals[1], hv[0], epsilon = 1e-12);
        assert_relative_eq!(vals[2], hv[1], epsilon = 1e-12);
        assert_relative_eq!(vals[3], hv[1], epsilon = 1e-12);
    }

    #[test]
    fn norms() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), ZERO, ZERO, c(0.0, -4.0)]);
        assert_relative_eq!(op_norm(&m).unwrap(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(trace_norm(&m).unwrap(), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let h = identity(2) + pauli_x().scale(0.5);
        let r = sqrt_psd(&h).unwrap();
        assert!(max_abs_diff(&(&r * &r), &h) < 1e-12);
    }

    #[test]
    fn from_rows_rejects_ragged() {
        assert!(from_rows(&[vec![ONE], vec![ONE, ONE]]).is_err());
    }

    #[test]
    fn kron_dims() {
        let k = kron(&identity(2), &pauli_x());
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k[(0, 1)], ONE);
        assert_eq!(k[(2, 3)], ONE);
    }
}
