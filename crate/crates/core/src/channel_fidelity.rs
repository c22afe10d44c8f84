//! Channel fidelity, angle and Bures distance from the Kraus-mixing SDP
//!
//! ```text
//! F = max_{||W|| <= 1} 1/2 lambda_min(K_W + K_W^dag),  K_W = sum_ij w_ij F1_i^dag F2_j
//! ```
//!
//! over rectangular contractions `W`.

use serde::Serialize;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::matlin::{self, c, ComplexMatrix};
use crate::sdp_core::{
    self, dense_to_triplets, lmi_contraction, lmi_opnorm_ub, lmi_spectral_lb, AffineMatrix,
    ComplexVarMatrix, SdpOptions, SdpProblem, Sense,
};

#[derive(Clone, Debug)]
pub struct FidelityResult {
    /// Clamped into `[0, 1]`.
    pub fidelity: f64,
    pub angle: f64,
    pub bures: f64,
    /// Unclamped SDP objective.
    pub raw: f64,
    /// Optimal mixing contraction, `q1 x q2`.
    pub w_opt: ComplexMatrix,
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiamondBounds {
    pub lower: f64,
    pub upper: f64,
}

pub(crate) fn check_pair(a: &KrausChannel, b: &KrausChannel) -> Result<()> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::Shape(format!(
            "channels map {}->{} and {}->{}",
            a.dim_in(),
            a.dim_out(),
            b.dim_in(),
            b.dim_out()
        )));
    }
    Ok(())
}

/// `sum_ij w_ij F1_i^dag F2_j`.
pub fn k_w(a: &KrausChannel, b: &KrausChannel, w: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_pair(a, b)?;
    if w.shape() != (a.kraus_count(), b.kraus_count()) {
        return Err(Error::Shape(format!(
            "W is {}x{}, Kraus counts are {} and {}",
            w.nrows(),
            w.ncols(),
            a.kraus_count(),
            b.kraus_count()
        )));
    }
    let d = a.dim_in();
    let mut k = ComplexMatrix::zeros(d, d);
    for (i, f1) in a.kraus().iter().enumerate() {
        let f1h = f1.adjoint();
        let mixed = b
            .kraus()
            .iter()
            .enumerate()
            .fold(ComplexMatrix::zeros(a.dim_out(), d), |acc, (j, f2)| {
                acc + f2 * w[(i, j)]
            });
        k += f1h * mixed;
    }
    Ok(k)
}

/// Coefficients `G_ij = F1_i^dag F2_j` of the map `W -> K_W`, indexed `[i][j]`.
pub(crate) fn gram_blocks(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> Vec<Vec<ComplexMatrix>> {
    a.iter()
        .map(|f1| {
            let f1h = f1.adjoint();
            b.iter().map(|f2| &f1h * f2).collect()
        })
        .collect()
}

/// Affine `K_W` and `K_W + K_W^dag` for a variable matrix `W` with coefficient
/// matrices `g[i][j]`.
pub(crate) fn kw_pencils(
    w: &ComplexVarMatrix,
    g: &[Vec<ComplexMatrix>],
    d: usize,
) -> (AffineMatrix, AffineMatrix) {
    let mut k = AffineMatrix::zero(d, d);
    let mut herm = AffineMatrix::zero(d, d);
    for j in 0..w.cols {
        for i in 0..w.rows {
            let idx = j * w.rows + i;
            let gij = &g[i][j];
            let gh = gij.adjoint();
            k.add_term(w.re[idx], dense_to_triplets(gij));
            k.add_term(w.im[idx], dense_to_triplets(&(gij * c(0.0, 1.0))));
            herm.add_term(w.re[idx], dense_to_triplets(&(gij + &gh)));
            herm.add_term(w.im[idx], dense_to_triplets(&((gij - &gh) * c(0.0, 1.0))));
        }
    }
    (k, herm)
}

/// Kraus directions lighter than this fraction of the total are dropped before
/// solving; they only make the programs degenerate.
pub(crate) const KRAUS_DROP: f64 = 1e-24;

/// Both channels in orthogonal Kraus form with the isometries back to the
/// caller's representation.
pub(crate) fn orthogonal_pair(
    a: &KrausChannel,
    b: &KrausChannel,
) -> Result<(KrausChannel, ComplexMatrix, KrausChannel, ComplexMatrix)> {
    let (ao, va) = a.orthogonal_form(KRAUS_DROP)?;
    let (bo, vb) = b.orthogonal_form(KRAUS_DROP)?;
    Ok((ao, va, bo, vb))
}

/// A mixing matrix for the orthogonal forms expressed in the original Kraus
/// sets: `conj(Va) W Vb^T`, again a contraction.
pub(crate) fn pull_back(w: &ComplexMatrix, va: &ComplexMatrix, vb: &ComplexMatrix) -> ComplexMatrix {
    va.conjugate() * w * vb.transpose()
}

/// The fidelity program on the orthogonal Kraus forms: maximize `t/2` subject
/// to `||W|| <= 1` and `K_W + K_W^dag >= t I`. Also returns the mixing matrix
/// variable and the isometries back to the caller's Kraus sets.
pub fn fidelity_problem(
    a: &KrausChannel,
    b: &KrausChannel,
) -> Result<(SdpProblem, ComplexVarMatrix, ComplexMatrix, ComplexMatrix)> {
    check_pair(a, b)?;
    let (a, va, b, vb) = orthogonal_pair(a, b)?;
    let d = a.dim_in();
    let mut prob = SdpProblem::new(Sense::Maximize);
    let w = prob.add_complex_matrix(a.kraus_count(), b.kraus_count());
    let t = prob.add_var();
    prob.set_objective(t, 0.5);
    let g = gram_blocks(a.kraus(), b.kraus());
    let (_, herm) = kw_pencils(&w, &g, d);
    prob.add_lmi(lmi_contraction(&w.affine())?)?;
    prob.add_lmi(lmi_spectral_lb(&herm, t)?)?;
    Ok((prob, w, va, vb))
}

pub fn fidelity(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<FidelityResult> {
    let (prob, w, va, vb) = fidelity_problem(a, b)?;
    let sol = sdp_core::solve(&prob, &SdpOptions::with_tol(tol))?.require_optimal()?;
    Ok(FidelityResult::from_raw(
        sol.value,
        pull_back(&w.value(&sol.y), &va, &vb),
        sol.gap,
        sol.iterations,
    ))
}

impl FidelityResult {
    pub(crate) fn from_raw(raw: f64, w_opt: ComplexMatrix, gap: f64, iterations: usize) -> Self {
        let f = clamp_unit(raw);
        Self {
            fidelity: f,
            angle: f.acos(),
            bures: bures_from_fidelity(f),
            raw,
            w_opt,
            gap,
            iterations,
        }
    }
}

/// Solves both orders and fails if they disagree by more than `2 tol` plus a
/// small solver allowance; returns the first order's result.
pub fn fidelity_checked(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<FidelityResult> {
    let ab = fidelity(a, b, tol)?;
    let ba = fidelity(b, a, tol)?;
    let diff = (ab.raw - ba.raw).abs();
    if diff > 2.0 * tol + ab.gap + ba.gap + 1e-9 {
        return Err(Error::Numeric(format!(
            "fidelity is asymmetric by {diff:.3e}"
        )));
    }
    Ok(ab)
}

pub(crate) fn clamp_unit(f: f64) -> f64 {
    f.clamp(0.0, 1.0)
}

/// `arccos F`.
pub fn angle(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<f64> {
    Ok(fidelity(a, b, tol)?.angle)
}

/// `sqrt(2 - 2F)`.
pub fn bures(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<f64> {
    Ok(fidelity(a, b, tol)?.bures)
}

pub fn bures_from_fidelity(f: f64) -> f64 {
    (2.0 - 2.0 * clamp_unit(f)).sqrt()
}

/// `||2I - K_W - K_W^dag|| = 2 - lambda_min(K_W + K_W^dag)` for a contraction
/// `W`: the squared distance between the Kraus representations mixed by `W`.
/// Its minimum over contractions is the squared Bures distance.
pub fn bures_kraus_min(a: &KrausChannel, b: &KrausChannel, w: &ComplexMatrix) -> Result<f64> {
    if matlin::op_norm(w)? > 1.0 + 1e-8 {
        return Err(Error::InvalidArgument("W is not a contraction".into()));
    }
    let k = k_w(a, b, w)?;
    Ok(2.0 - matlin::lambda_min(&(&k + k.adjoint()))?)
}

/// Bounds on the diamond norm of `a - b`: `2(1-F) <= ||a-b|| <= 2 sqrt(1-F^2)`.
pub fn diamond_bounds(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<DiamondBounds> {
    Ok(diamond_bounds_from_fidelity(fidelity(a, b, tol)?.fidelity))
}

pub fn diamond_bounds_from_fidelity(f: f64) -> DiamondBounds {
    let f = clamp_unit(f);
    DiamondBounds {
        lower: 2.0 * (1.0 - f),
        upper: 2.0 * (1.0 - f * f).sqrt(),
    }
}

/// `min_{||W|| <= 1} ||I - K_W||` with its minimizer.
pub fn min_norm_i_minus_kw(
    a: &KrausChannel,
    b: &KrausChannel,
    tol: f64,
) -> Result<(f64, ComplexMatrix)> {
    check_pair(a, b)?;
    let (a, va, b, vb) = orthogonal_pair(a, b)?;
    let (a, b) = (&a, &b);
    let d = a.dim_in();
    let mut prob = SdpProblem::new(Sense::Minimize);
    let w = prob.add_complex_matrix(a.kraus_count(), b.kraus_count());
    let u = prob.add_var();
    prob.set_objective(u, 1.0);
    let g = gram_blocks(a.kraus(), b.kraus());
    let (k, _) = kw_pencils(&w, &g, d);
    let resid = AffineMatrix::identity(d).plus(&k.scaled(-1.0))?;
    prob.add_lmi(lmi_contraction(&w.affine())?)?;
    prob.add_lmi(lmi_opnorm_ub(&resid, u)?)?;
    let sol = sdp_core::solve(&prob, &SdpOptions::with_tol(tol))?.require_optimal()?;
    Ok((sol.value, pull_back(&w.value(&sol.y), &va, &vb)))
}
