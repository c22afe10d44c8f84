//! Brute-force and alternative-formulation checks that share no code path with
//! the fidelity program: state fidelity, minimum output fidelity over probe
//! states, unitary minimum overlap, diamond norm and Fisher spot checks.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel_fisher::ChannelFamily;
use crate::channels::{max_entangled, KrausChannel};
use crate::error::{Error, Result};
use crate::matlin::{self, c, kron, ComplexMatrix};
use crate::sdp_core::{self, AffineMatrix, LmiBlock, SdpOptions, SdpProblem, Sense};

/// Largest channel input dimension the probe search accepts.
pub const PROBE_MAX_DIM: usize = 4;
/// Largest unitary dimension for the overlap search.
pub const OVERLAP_MAX_DIM: usize = 8;

/// A validated density matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        if !matlin::is_hermitian(&matrix, 1e-10) {
            return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
        }
        let tr = matlin::trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix has trace {tr}")));
        }
        if matlin::lambda_min(&matrix)? < -1e-10 {
            return Err(Error::InvalidArgument("density matrix is not PSD".into()));
        }
        Ok(Self { matrix })
    }

    pub fn pure(amps: &[Complex64]) -> Result<Self> {
        Self::new(crate::channels::pure_state(amps)?)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// `Tr sqrt(sqrt(r1) r2 sqrt(r1))`, computed as `||sqrt(r1) sqrt(r2)||_1`.
fn fidelity_psd(r1: &ComplexMatrix, r2: &ComplexMatrix) -> Result<f64> {
    let s1 = matlin::sqrt_psd(r1)?;
    let s2 = matlin::sqrt_psd(r2)?;
    matlin::trace_norm(&(s1 * s2))
}

/// Uhlmann fidelity of two states.
pub fn state_fidelity(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::Shape(format!(
            "states of dimension {} and {}",
            r1.dim(),
            r2.dim()
        )));
    }
    Ok(fidelity_psd(&r1.matrix, &r2.matrix)?.clamp(0.0, 1.0))
}

// ---- simplex search ----

/// Downhill simplex with dimension-adapted coefficients. Returns the best
/// point, its value and the number of evaluations.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if vals[n] - vals[0] <= ftol * (vals[0].abs() + ftol) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / nf;
            }
        }
        // Points along the line from the centroid through the worst vertex.
        let xr = lerp(&centroid, &pts[n], -alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = lerp(&centroid, &pts[n], -beta);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = lerp(&centroid, &pts[n], -gamma);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = lerp(&centroid, &pts[n], gamma);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            pts[i] = lerp(&pts[0], &pts[i], delta);
            vals[i] = f(&pts[i]);
        }
        evals += n;
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (pts[best].clone(), vals[best], evals)
}

/// Simplex runs restarted around the incumbent until they stop improving.
fn polish(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], max_evals: usize) -> (Vec<f64>, f64, usize) {
    let (mut x, mut fx, mut evals) = nelder_mead(f, x0, 0.3, max_evals, 1e-12);
    let mut step = 0.05;
    for _ in 0..6 {
        let (y, fy, e) = nelder_mead(f, &x, step, max_evals, 1e-14);
        evals += e;
        let gained = fx - fy;
        if fy < fx {
            x = y;
            fx = fy;
        }
        if gained <= 1e-13 {
            break;
        }
        step *= 0.3;
    }
    (x, fx, evals)
}

/// Complex vector from interleaved real and imaginary parts.
fn complex_vec(x: &[f64]) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_fn(x.len() / 2, |i, _| c(x[2 * i], x[2 * i + 1]))
}

fn random_start(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Runs `restarts` independent searches; stream `i` of the seeded generator
/// drives restart `i`. The best value wins, ties go to the lowest index.
fn multistart(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    len: usize,
    restarts: usize,
    seed: u64,
) -> MinSearch {
    let runs: Vec<(Vec<f64>, f64, usize)> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let x0 = random_start(len, &mut rng);
            polish(f, &x0, 4000 * len)
        })
        .collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.1 < runs[best].1 {
            best = i;
        }
    }
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (x, value, _) = runs.into_iter().nth(best).expect("at least one restart");
    let v = complex_vec(&x);
    let probe: Vec<[f64; 2]> = v.unscale(v.norm()).iter().map(|z| [z.re, z.im]).collect();
    MinSearch {
        value,
        best_restart: best,
        restarts,
        evaluations,
        probe,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinSearch {
    pub value: f64,
    pub best_restart: usize,
    pub restarts: usize,
    pub evaluations: usize,
    /// Normalized minimizing vector as `[re, im]` pairs.
    pub probe: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct ProbeSearch {
    pub restarts: usize,
    pub seed: u64,
    /// Defaults to the system dimension.
    pub ancilla_dim: Option<usize>,
}

impl Default for ProbeSearch {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 42,
            ancilla_dim: None,
        }
    }
}

fn check_restarts(restarts: usize) -> Result<()> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be >= 1".into()));
    }
    Ok(())
}

/// Minimum over pure probes on system (x) ancilla of the fidelity between the
/// two extended-channel outputs.
pub fn min_output_fidelity(
    a: &KrausChannel,
    b: &KrausChannel,
    search: &ProbeSearch,
) -> Result<MinSearch> {
    check_restarts(search.restarts)?;
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::Shape("channels have different dimensions".into()));
    }
    let d = a.dim_in();
    if d > PROBE_MAX_DIM {
        return Err(Error::Cap(format!(
            "probe search supports input dimension <= {PROBE_MAX_DIM}, got {d}"
        )));
    }
    let anc = search.ancilla_dim.unwrap_or(d);
    if anc == 0 || anc > PROBE_MAX_DIM {
        return Err(Error::Cap(format!("ancilla dimension {anc} outside [1, {PROBE_MAX_DIM}]")));
    }
    // With outputs A A^dag and B B^dag, where the columns of A and B are the
    // vectors (F_i (x) I) v, the fidelity is the trace norm of A^dag B. Its
    // entries are v^dag G_ij v with G_ij = (F_i (x) I)^dag (G_j (x) I).
    let id = matlin::identity(anc);
    let ea: Vec<ComplexMatrix> = a.kraus().iter().map(|f| kron(f, &id)).collect();
    let eb: Vec<ComplexMatrix> = b.kraus().iter().map(|f| kron(f, &id)).collect();
    let grams: Vec<Vec<ComplexMatrix>> = ea
        .iter()
        .map(|fa| eb.iter().map(|fb| fa.adjoint() * fb).collect())
        .collect();
    let objective = |x: &[f64]| -> f64 {
        let v = complex_vec(x);
        let n2 = v.norm_squared();
        if !(n2 > 1e-24) {
            return 2.0;
        }
        let m = ComplexMatrix::from_fn(ea.len(), eb.len(), |i, j| {
            v.dotc(&(&grams[i][j] * &v)) / n2
        });
        m.singular_values().sum()
    };
    Ok(multistart(&objective, 2 * d * anc, search.restarts, search.seed))
}

/// `min |<psi|U|psi>|` over pure states.
pub fn min_overlap_unitary(u: &ComplexMatrix, restarts: usize, seed: u64) -> Result<MinSearch> {
    check_restarts(restarts)?;
    if !u.is_square() || !matlin::is_unitary(u, 1e-8) {
        return Err(Error::InvalidArgument("matrix is not unitary".into()));
    }
    let d = u.nrows();
    if d > OVERLAP_MAX_DIM {
        return Err(Error::Cap(format!(
            "overlap search supports dimension <= {OVERLAP_MAX_DIM}, got {d}"
        )));
    }
    let objective = |x: &[f64]| -> f64 {
        let v = complex_vec(x);
        let n2 = v.norm_squared();
        if !(n2 > 1e-24) {
            return 2.0;
        }
        (v.adjoint() * u * &v)[(0, 0)].norm() / n2
    };
    let mut found = multistart(&objective, 2 * d, restarts, seed);
    found.value = found.value.max(0.0);
    Ok(found)
}

/// Hermitian matrix variables `M = sum_k y_k E_k` over the real basis of
/// `n x n` Hermitian matrices; returns the pencil and the basis matrices.
fn hermitian_variable(prob: &mut SdpProblem, n: usize) -> (AffineMatrix, Vec<(usize, ComplexMatrix)>) {
    let mut m = AffineMatrix::zero(n, n);
    let mut basis = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut push = |z: Complex64| {
                let v = prob.add_var();
                let mut e = ComplexMatrix::zeros(n, n);
                e[(i, j)] = z;
                e[(j, i)] = z.conj();
                m.add_dense_term(v, &e);
                basis.push((v, e));
            };
            push(matlin::ONE);
            if i != j {
                push(c(0.0, 1.0));
            }
        }
    }
    (m, basis)
}

/// Diamond norm of `a - b`: `2 max <J, W>` over `0 <= W <= rho (x) I`, with
/// `J` the Choi matrix of the difference and `rho` a density matrix.
pub fn diamond_norm(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<f64> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::Shape("channels have different dimensions".into()));
    }
    let (din, dout) = (a.dim_in(), a.dim_out());
    let j = a.choi() - b.choi();
    let mut prob = SdpProblem::new(Sense::Maximize);
    let (w, basis) = hermitian_variable(&mut prob, din * dout);
    for (v, e) in &basis {
        prob.set_objective(*v, 2.0 * e.dot(&j).re);
    }
    // rho = I/din + traceless part.
    let eye_out = matlin::identity(dout);
    let mut rho_ext = AffineMatrix::constant(&kron(&(matlin::identity(din) * c(1.0 / din as f64, 0.0)), &eye_out));
    for i in 0..din {
        for k in i..din {
            if i == k && i + 1 == din {
                continue;
            }
            let mut pieces: Vec<ComplexMatrix> = Vec::new();
            if i == k {
                let mut e = ComplexMatrix::zeros(din, din);
                e[(i, i)] = matlin::ONE;
                e[(din - 1, din - 1)] = -matlin::ONE;
                pieces.push(e);
            } else {
                for z in [matlin::ONE, c(0.0, 1.0)] {
                    let mut e = ComplexMatrix::zeros(din, din);
                    e[(i, k)] = z;
                    e[(k, i)] = z.conj();
                    pieces.push(e);
                }
            }
            for e in pieces {
                let v = prob.add_var();
                rho_ext.add_dense_term(v, &kron(&e, &eye_out));
            }
        }
    }
    prob.add_lmi(LmiBlock::new(w.clone())?)?;
    prob.add_lmi(LmiBlock::new(rho_ext.plus(&w.scaled(-1.0))?)?)?;
    let sol = sdp_core::solve(&prob, &SdpOptions::with_tol(tol))?.require_optimal()?;
    Ok(sol.value.max(0.0))
}

/// Probe state for the Fisher spot checks.
#[derive(Clone, Debug)]
pub enum Probe {
    /// Maximally entangled state with an ancilla of the system's size.
    MaxEntangled,
    /// Any state on system (x) ancilla; the ancilla size is inferred.
    State(DensityMatrix),
}

fn probe_output(k: &KrausChannel, probe: &Probe) -> Result<ComplexMatrix> {
    let d = k.dim_in();
    let (rho, anc) = match probe {
        Probe::MaxEntangled => (max_entangled(d), d),
        Probe::State(s) => {
            if s.dim() % d != 0 {
                return Err(Error::Shape(format!(
                    "probe dimension {} is not a multiple of the input dimension {d}",
                    s.dim()
                )));
            }
            (s.matrix().clone(), s.dim() / d)
        }
    };
    k.extend(anc)?.apply(&rho)
}

fn check_fd(family: &dyn ChannelFamily, x: f64, h: f64) -> Result<(f64, f64)> {
    if !(1e-6..=1e-1).contains(&h) {
        return Err(Error::InvalidArgument(format!("step {h} outside [1e-6, 1e-1]")));
    }
    let (a, b) = family.domain();
    let lo = (x - h / 2.0).max(a).min(b - h);
    if lo < a || x < a || x > b {
        return Err(Error::InvalidArgument(format!("x = {x} outside [{a}, {b}]")));
    }
    Ok((lo, lo + h))
}

/// Finite-difference classical Fisher information `4 arccos^2(BC) / h^2` of the
/// outcome distribution, `BC` the Bhattacharyya coefficient of the two
/// outcome distributions at `x -/+ h/2`.
pub fn classical_fisher_check(
    family: &dyn ChannelFamily,
    x: f64,
    povm: &[ComplexMatrix],
    probe: &Probe,
    h: f64,
) -> Result<f64> {
    let (lo, hi) = check_fd(family, x, h)?;
    let r_lo = probe_output(&family.evaluate(lo)?, probe)?;
    let r_hi = probe_output(&family.evaluate(hi)?, probe)?;
    let n = r_lo.nrows();
    if povm.is_empty() {
        return Err(Error::InvalidArgument("empty POVM".into()));
    }
    let mut sum = ComplexMatrix::zeros(n, n);
    for e in povm {
        if e.shape() != (n, n) {
            return Err(Error::Shape(format!("POVM element is not {n}x{n}")));
        }
        if !matlin::is_hermitian(e, 1e-9) || matlin::lambda_min(e)? < -1e-9 {
            return Err(Error::InvalidArgument("POVM element is not PSD".into()));
        }
        sum += e;
    }
    if matlin::max_abs_diff(&sum, &matlin::identity(n)) > 1e-9 {
        return Err(Error::InvalidArgument("POVM elements do not sum to I".into()));
    }
    let prob = |r: &ComplexMatrix, e: &ComplexMatrix| (e * r).trace().re.max(0.0);
    let bc: f64 = povm.iter().map(|e| (prob(&r_lo, e) * prob(&r_hi, e)).sqrt()).sum();
    let theta = bc.clamp(-1.0, 1.0).acos();
    Ok(4.0 * theta * theta / (h * h))
}

/// Finite-difference Fisher information of the output state for a fixed probe,
/// `4 arccos^2(F) / h^2` with `F` the state fidelity at `x -/+ h/2`.
pub fn state_fisher(family: &dyn ChannelFamily, x: f64, probe: &Probe, h: f64) -> Result<f64> {
    let (lo, hi) = check_fd(family, x, h)?;
    let r_lo = probe_output(&family.evaluate(lo)?, probe)?;
    let r_hi = probe_output(&family.evaluate(hi)?, probe)?;
    let f = fidelity_psd(&r_lo, &r_hi)?.clamp(-1.0, 1.0);
    let theta = f.acos();
    Ok(4.0 * theta * theta / (h * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_fisher::{ConstantFamily, UnitaryFamily};
    use crate::channels::{dephasing, identity, rotation_x, unitary_channel};
    use crate::matlin::{pauli_x, pauli_z};
    use approx::assert_relative_eq;

    #[test]
    fn state_fidelity_examples() {
        let zero = DensityMatrix::pure(&[matlin::ONE, matlin::ZERO]).unwrap();
        let one = DensityMatrix::pure(&[matlin::ZERO, matlin::ONE]).unwrap();
        let mixed = DensityMatrix::new(matlin::identity(2) * c(0.5, 0.0)).unwrap();
        assert_relative_eq!(state_fidelity(&zero, &zero).unwrap(), 1.0, epsilon = 1e-12);
        assert!(state_fidelity(&zero, &one).unwrap() < 1e-7);
        assert_relative_eq!(
            state_fidelity(&mixed, &zero).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-7
        );
        assert!(DensityMatrix::new(matlin::identity(2)).is_err());
    }

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5;
        let (x, fx, _) = polish(&f, &[0.0, 0.0], 5000);
        assert_relative_eq!(fx, 0.5, epsilon = 1e-10);
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn probe_search_examples() {
        let search = ProbeSearch {
            restarts: 8,
            ..Default::default()
        };
        let id = identity(2).unwrap();
        let r = min_output_fidelity(&id, &rotation_x(0.3), &search).unwrap();
        assert_relative_eq!(r.value, 0.3f64.cos(), epsilon = 1e-4);
        let r = min_output_fidelity(&id, &dephasing(0.5).unwrap(), &search).unwrap();
        assert_relative_eq!(r.value, 0.75f64.sqrt(), epsilon = 1e-4);
        let r = min_output_fidelity(&id, &id, &search).unwrap();
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn overlap_examples() {
        let ones = min_overlap_unitary(&matlin::identity(3), 4, 1).unwrap();
        assert_relative_eq!(ones.value, 1.0, epsilon = 1e-9);
        let rot = matlin::exp_i_hermitian(&pauli_x(), -0.3).unwrap();
        assert_relative_eq!(min_overlap_unitary(&rot, 8, 1).unwrap().value, 0.3f64.cos(), epsilon = 1e-4);
        assert!(min_overlap_unitary(&pauli_z(), 8, 1).unwrap().value < 1e-4);
        assert!(min_overlap_unitary(&(pauli_z() * c(2.0, 0.0)), 1, 1).is_err());
    }

    #[test]
    fn diamond_examples() {
        let id = identity(2).unwrap();
        let flip = unitary_channel(&pauli_x()).unwrap();
        assert!(diamond_norm(&id, &id, 1e-9).unwrap() < 1e-7);
        assert_relative_eq!(diamond_norm(&id, &flip, 1e-9).unwrap(), 2.0, epsilon = 1e-7);
        assert_relative_eq!(
            diamond_norm(&id, &dephasing(0.5).unwrap(), 1e-9).unwrap(),
            0.5,
            epsilon = 1e-7
        );
    }

    #[test]
    fn ramsey_fisher() {
        let fam = UnitaryFamily::new(pauli_z() * c(0.5, 0.0), (0.0, 3.0)).unwrap();
        let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let povm = [
            (matlin::identity(2) + pauli_x()) * c(0.5, 0.0),
            (matlin::identity(2) - pauli_x()) * c(0.5, 0.0),
        ];
        let probe = Probe::State(plus);
        let j = classical_fisher_check(&fam, std::f64::consts::FRAC_PI_2, &povm, &probe, 1e-3).unwrap();
        assert_relative_eq!(j, 1.0, epsilon = 1e-3);
        let js = state_fisher(&fam, std::f64::consts::FRAC_PI_2, &probe, 1e-3).unwrap();
        assert_relative_eq!(js, 1.0, epsilon = 1e-3);
        let coarse = [matlin::identity(2)];
        assert!(classical_fisher_check(&fam, 1.0, &coarse, &probe, 1e-3).unwrap() < 1e-6);
        let constant = ConstantFamily {
            channel: dephasing(0.3).unwrap(),
            domain: (0.0, 1.0),
        };
        let povm4 = [matlin::identity(4)];
        assert!(classical_fisher_check(&constant, 0.5, &povm4, &Probe::MaxEntangled, 1e-3).unwrap() < 1e-6);
    }
}
