//! Infeasible-start primal-dual interior-point method (Nesterov-Todd direction with
//! Mehrotra predictor-corrector) for the real-embedded problem pair
//!
//! ```text
//! (P) min <C, X>  s.t. <A_k, X> = b_k, X >= 0
//! (D) max b'y     s.t. S = C - sum_k y_k A_k >= 0
//! ```
//!
//! An LMI `A0 + sum y_k B_k >= 0` maps to `C = A0`, `A_k = -B_k`.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::model::{LmiBlock, SdpProblem, Sense, Triplets};
use crate::error::{Error, Result};
use crate::matlin::RealMatrix;

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    /// Target for the duality gap and the relative residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Print one line per iteration to stderr.
    pub trace: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 150,
            trace: false,
        }
    }
}

impl SdpOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericFailure,
}

impl std::fmt::Display for SdpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::Unbounded => "unbounded",
            SdpStatus::NumericFailure => "numeric-failure",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Objective at `y`, in the caller's sense.
    pub value: f64,
    /// Objective of the matrix (dual) certificate, in the caller's sense.
    pub bound: f64,
    pub y: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpSolution {
    pub fn require_optimal(self) -> Result<Self> {
        if self.status == SdpStatus::Optimal {
            Ok(self)
        } else {
            Err(Error::Solver {
                status: self.status.to_string(),
                detail: format!(
                    "after {} iterations: gap {:.3e}, residuals {:.3e}/{:.3e}",
                    self.iterations, self.gap, self.primal_residual, self.dual_residual
                ),
            })
        }
    }
}

enum Coef {
    Sparse(Vec<(usize, usize, f64)>),
    Dense(RealMatrix),
}

impl Coef {
    fn inner(&self, y: &RealMatrix) -> f64 {
        match self {
            Coef::Sparse(t) => t.iter().map(|&(i, j, a)| a * y[(i, j)]).sum(),
            Coef::Dense(a) => a.dot(y),
        }
    }

    fn axpy(&self, s: f64, target: &mut RealMatrix) {
        match self {
            Coef::Sparse(t) => {
                for &(i, j, a) in t {
                    target[(i, j)] += s * a;
                }
            }
            Coef::Dense(a) => *target += a * s,
        }
    }

    /// `X A Sinv`.
    fn sandwich(&self, x: &RealMatrix, sinv: &RealMatrix) -> RealMatrix {
        let n = x.nrows();
        match self {
            Coef::Sparse(t) if t.len() <= n => {
                let mut p = RealMatrix::zeros(n, n);
                for &(i, j, a) in t {
                    for col in 0..n {
                        let s = a * sinv[(j, col)];
                        if s != 0.0 {
                            p.column_mut(col).axpy(s, &x.column(i), 1.0);
                        }
                    }
                }
                p
            }
            _ => {
                let mut a = RealMatrix::zeros(n, n);
                self.axpy(1.0, &mut a);
                x * (a * sinv)
            }
        }
    }
}

/// Degenerate problems (rank-deficient optimal `X`) leave the primal residual
/// stuck near this level in double precision while `y` stays exactly feasible
/// and the gap keeps closing, so the primal test is never tighter than this.
const PRIMAL_RESIDUAL_FLOOR: f64 = 1e-8;

struct RealBlock {
    n: usize,
    c: RealMatrix,
    vars: Vec<(usize, Coef)>,
}

fn accumulate(t: &Triplets, into: &mut BTreeMap<(usize, usize), Complex64>) {
    for &(i, j, z) in t {
        *into.entry((i, j)).or_default() += z;
    }
}

fn check_hermitian(m: &BTreeMap<(usize, usize), Complex64>) -> Result<()> {
    let scale = m.values().fold(1.0f64, |a, z| a.max(z.norm()));
    for (&(i, j), z) in m {
        let w = m.get(&(j, i)).copied().unwrap_or_default();
        if (z - w.conj()).norm() > 1e-12 * scale {
            return Err(Error::Shape(format!(
                "LMI coefficient is not Hermitian at ({i}, {j})"
            )));
        }
    }
    Ok(())
}

fn embed_entries(
    m: &BTreeMap<(usize, usize), Complex64>,
    n: usize,
    real: bool,
    sign: f64,
) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (&(i, j), z) in m {
        let (re, im) = (sign * z.re, sign * z.im);
        if real {
            if re != 0.0 {
                out.push((i, j, re));
            }
            continue;
        }
        if re != 0.0 {
            out.push((i, j, re));
            out.push((i + n, j + n, re));
        }
        if im != 0.0 {
            out.push((i, j + n, -im));
            out.push((i + n, j, im));
        }
    }
    out
}

fn embed_block(blk: &LmiBlock, n_vars: usize) -> Result<RealBlock> {
    let n = blk.dim;
    let mut constant = BTreeMap::new();
    accumulate(&blk.pencil.constant, &mut constant);
    let mut per_var: BTreeMap<usize, BTreeMap<(usize, usize), Complex64>> = BTreeMap::new();
    for (v, t) in &blk.pencil.terms {
        if *v >= n_vars {
            return Err(Error::InvalidArgument(
                "LMI references unknown variable".into(),
            ));
        }
        accumulate(t, per_var.entry(*v).or_default());
    }
    check_hermitian(&constant)?;
    for m in per_var.values() {
        check_hermitian(m)?;
    }
    let real = constant.values().all(|z| z.im == 0.0)
        && per_var.values().all(|m| m.values().all(|z| z.im == 0.0));
    let nr = if real { n } else { 2 * n };
    let mut c = RealMatrix::zeros(nr, nr);
    for (i, j, a) in embed_entries(&constant, n, real, 1.0) {
        c[(i, j)] += a;
    }
    let mut vars = Vec::new();
    for (v, m) in per_var {
        let t = embed_entries(&m, n, real, -1.0);
        if t.is_empty() {
            continue;
        }
        let coef = if t.len() * 4 > nr * nr {
            let mut d = RealMatrix::zeros(nr, nr);
            for (i, j, a) in t {
                d[(i, j)] += a;
            }
            Coef::Dense(d)
        } else {
            Coef::Sparse(t)
        };
        vars.push((v, coef));
    }
    Ok(RealBlock { n: nr, c, vars })
}

struct State {
    x: Vec<RealMatrix>,
    s: Vec<RealMatrix>,
    y: DVector<f64>,
}

fn dot_blocks(a: &[RealMatrix], b: &[RealMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob_blocks(a: &[RealMatrix]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn sym(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()) * 0.5
}

/// Largest `alpha` with `x + alpha d >= 0`, or infinity.
fn max_step(x: &RealMatrix, d: &RealMatrix) -> Option<f64> {
    let chol = Cholesky::new(x.clone())?;
    let l = chol.l();
    let z1 = l.solve_lower_triangular(d)?;
    let z = l.solve_lower_triangular(&z1.transpose())?;
    let eig = SymmetricEigen::try_new(sym(&z), 1e-15, 10_000)?;
    let lmin = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Some(if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    })
}

/// Nesterov-Todd scaling: `G' S G = G^-1 X G^-T = diag(d)` and `W = G G'`,
/// so that `W S W = X`.
struct NtScaling {
    g: RealMatrix,
    d: DVector<f64>,
    w: RealMatrix,
}

fn nt_scaling(x: &RealMatrix, s: &RealMatrix) -> Option<NtScaling> {
    let lx = Cholesky::new(x.clone())?.l();
    let ls = Cholesky::new(s.clone())?.l();
    let svd = (ls.transpose() * &lx).svd(false, true);
    let vt = svd.v_t?;
    let d = svd.singular_values;
    if d.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let mut g = lx * vt.transpose();
    for (k, mut col) in g.column_iter_mut().enumerate() {
        col /= d[k].sqrt();
    }
    let w = sym(&(&g * g.transpose()));
    Some(NtScaling { g, d, w })
}

struct Problem {
    blocks: Vec<RealBlock>,
    b: DVector<f64>,
    m: usize,
}

impl Problem {
    fn op_a(&self, y: &[RealMatrix]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (blk, yj) in self.blocks.iter().zip(y) {
            for (k, a) in &blk.vars {
                out[*k] += a.inner(yj);
            }
        }
        out
    }

    fn op_at(&self, y: &DVector<f64>) -> Vec<RealMatrix> {
        self.blocks
            .iter()
            .map(|blk| {
                let mut out = RealMatrix::zeros(blk.n, blk.n);
                for (k, a) in &blk.vars {
                    if y[*k] != 0.0 {
                        a.axpy(y[*k], &mut out);
                    }
                }
                out
            })
            .collect()
    }

    fn schur(&self, x: &[RealMatrix], sinv: &[RealMatrix]) -> RealMatrix {
        let mut h = RealMatrix::zeros(self.m, self.m);
        for ((blk, xj), sj) in self.blocks.iter().zip(x).zip(sinv) {
            let rows: Vec<Vec<f64>> = (0..blk.vars.len())
                .into_par_iter()
                .map(|a| {
                    let p = blk.vars[a].1.sandwich(xj, sj);
                    blk.vars[a..].iter().map(|(_, cb)| cb.inner(&p)).collect()
                })
                .collect();
            for (a, row) in rows.iter().enumerate() {
                let ka = blk.vars[a].0;
                for (off, v) in row.iter().enumerate() {
                    let kb = blk.vars[a + off].0;
                    h[(ka, kb)] += v;
                    if ka != kb {
                        h[(kb, ka)] += v;
                    }
                }
            }
        }
        h
    }
}

/// Cholesky factor of the Schur matrix after symmetric diagonal scaling, with
/// a growing diagonal shift when the plain factorization breaks down.
struct SchurFactor {
    chol: Cholesky<f64, nalgebra::Dyn>,
    scale: DVector<f64>,
    shifted: bool,
}

impl SchurFactor {
    fn new(h: &RealMatrix) -> Option<Self> {
        let n = h.nrows();
        let scale = DVector::from_iterator(
            n,
            h.diagonal().iter().map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }),
        );
        let scaled = RealMatrix::from_fn(n, n, |i, j| h[(i, j)] * scale[i] * scale[j]);
        let mut reg = 0.0;
        for _ in 0..6 {
            let mut hh = scaled.clone();
            for i in 0..n {
                hh[(i, i)] += reg;
            }
            if let Some(chol) = Cholesky::new(hh) {
                return Some(Self {
                    chol,
                    scale,
                    shifted: reg > 0.0,
                });
            }
            reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
        }
        None
    }

    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        let z = self.chol.solve(&r.component_mul(&self.scale));
        z.component_mul(&self.scale)
    }
}

pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    if !(1e-12..=1e-2).contains(&opts.tol) {
        return Err(Error::InvalidArgument(format!(
            "solver tolerance {} outside [1e-12, 1e-2]",
            opts.tol
        )));
    }
    let m = problem.n_vars;
    let blocks = problem
        .blocks
        .iter()
        .map(|b| embed_block(b, m))
        .collect::<Result<Vec<_>>>()?;
    let sign = match problem.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let b = DVector::from_iterator(m, problem.objective.iter().map(|v| sign * v));
    let mut touched = vec![false; m];
    for blk in &blocks {
        for (k, _) in &blk.vars {
            touched[*k] = true;
        }
    }
    if let Some(k) = (0..m).find(|&k| !touched[k]) {
        let status = if b[k] != 0.0 {
            SdpStatus::Unbounded
        } else {
            SdpStatus::NumericFailure
        };
        return Ok(SdpSolution {
            status,
            value: f64::NAN,
            bound: f64::NAN,
            y: vec![0.0; m],
            gap: f64::INFINITY,
            iterations: 0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
        });
    }
    let prob = Problem { blocks, b, m };
    // The projected variant is slower on well-posed programs, so it is only
    // the second attempt.
    let mut sol = run(&prob, opts, false);
    if sol.status == SdpStatus::NumericFailure {
        let second = run(&prob, opts, true);
        if second.status != SdpStatus::NumericFailure {
            sol = second;
        }
    }
    sol.value *= sign;
    sol.bound *= sign;
    Ok(sol)
}

fn run(prob: &Problem, opts: &SdpOptions, project: bool) -> SdpSolution {
    let blocks = &prob.blocks;
    let b = &prob.b;
    let ntot: usize = blocks.iter().map(|bl| bl.n).sum();
    let cs: Vec<RealMatrix> = blocks.iter().map(|bl| bl.c.clone()).collect();
    let norm_c = frob_blocks(&cs);
    let norm_b = b.norm();

    let mut xi = 10.0f64.max((ntot as f64).sqrt());
    let mut eta = xi.max(norm_c);
    for blk in blocks {
        for (k, a) in &blk.vars {
            let mut d = RealMatrix::zeros(blk.n, blk.n);
            a.axpy(1.0, &mut d);
            let na = d.norm();
            xi = xi.max((1.0 + b[*k].abs()) / (1.0 + na));
            eta = eta.max(na);
        }
    }
    let mut st = State {
        x: blocks
            .iter()
            .map(|bl| RealMatrix::identity(bl.n, bl.n) * xi)
            .collect(),
        s: blocks
            .iter()
            .map(|bl| RealMatrix::identity(bl.n, bl.n) * eta)
            .collect(),
        y: DVector::zeros(prob.m),
    };

    let mut out = SdpSolution {
        status: SdpStatus::NumericFailure,
        value: f64::NAN,
        bound: f64::NAN,
        y: vec![0.0; prob.m],
        gap: f64::INFINITY,
        iterations: 0,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
    };
    let mut stalls = 0;
    let gram = if project {
        let eyes: Vec<RealMatrix> = blocks
            .iter()
            .map(|bl| RealMatrix::identity(bl.n, bl.n))
            .collect();
        SchurFactor::new(&prob.schur(&eyes, &eyes))
    } else {
        None
    };

    for iter in 0..=opts.max_iter {
        let aty = prob.op_at(&st.y);
        let rd: Vec<RealMatrix> = (0..blocks.len())
            .map(|j| &cs[j] - &aty[j] - &st.s[j])
            .collect();
        let ax = prob.op_a(&st.x);
        let rp = b - &ax;
        let pobj = dot_blocks(&cs, &st.x);
        let dobj = b.dot(&st.y);
        let xs = dot_blocks(&st.x, &st.s);
        let mu = xs / ntot as f64;
        let rel_p = rp.norm() / (1.0 + norm_b);
        let rel_d = frob_blocks(&rd) / (1.0 + norm_c);
        let gap = (pobj - dobj).abs().max(xs.abs());

        out.iterations = iter;
        out.value = dobj;
        out.bound = pobj;
        out.y = st.y.iter().copied().collect();
        out.gap = gap;
        out.primal_residual = rel_p;
        out.dual_residual = rel_d;

        if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
            out.status = SdpStatus::NumericFailure;
            return out;
        }
        if rel_p <= opts.tol.max(PRIMAL_RESIDUAL_FLOOR)
            && rel_d <= opts.tol
            && gap <= opts.tol * dobj.abs().max(1.0)
        {
            out.status = SdpStatus::Optimal;
            return out;
        }
        let at_s: Vec<RealMatrix> = (0..blocks.len()).map(|j| &aty[j] + &st.s[j]).collect();
        if dobj > 1e6 && dobj > 1e8 * frob_blocks(&at_s).max(1e-300) {
            out.status = SdpStatus::Unbounded;
            return out;
        }
        if pobj < -1e6 && -pobj > 1e8 * ax.norm().max(1e-300) {
            out.status = SdpStatus::Infeasible;
            return out;
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(nt) = (0..blocks.len())
            .map(|j| nt_scaling(&st.x[j], &st.s[j]))
            .collect::<Option<Vec<_>>>()
        else {
            break;
        };
        let ws: Vec<RealMatrix> = nt.iter().map(|n| n.w.clone()).collect();
        let h = prob.schur(&ws, &ws);
        let Some(chol) = SchurFactor::new(&h) else {
            break;
        };
        let w_rd_w: Vec<RealMatrix> = (0..blocks.len())
            .map(|j| sym(&(&ws[j] * &rd[j] * &ws[j])))
            .collect();
        let a_wrdw = prob.op_a(&w_rd_w);

        // In the scaled space X and S both become diag(d); the complementarity
        // equation is a diagonal Lyapunov equation for dX~ + dS~.
        let direction = |sigma_mu: f64, corr: Option<&[RealMatrix]>| {
            let t: Vec<RealMatrix> = (0..blocks.len())
                .map(|j| {
                    let d = &nt[j].d;
                    let n = d.len();
                    let mut r = RealMatrix::zeros(n, n);
                    if let Some(c) = corr {
                        r -= &c[j];
                    }
                    for i in 0..n {
                        r[(i, i)] += 2.0 * (sigma_mu - d[i] * d[i]);
                    }
                    RealMatrix::from_fn(n, n, |a, b| r[(a, b)] / (d[a] + d[b]))
                })
                .collect();
            let gtg: Vec<RealMatrix> = (0..blocks.len())
                .map(|j| sym(&(&nt[j].g * &t[j] * nt[j].g.transpose())))
                .collect();
            let rhs = &rp - prob.op_a(&gtg) + &a_wrdw;
            let mut dy = chol.solve(&rhs);
            for _ in 0..2 {
                let r = &rhs - &h * &dy;
                dy += chol.solve(&r);
            }
            let build = |dy: &DVector<f64>| {
                let atdy = prob.op_at(dy);
                let ds: Vec<RealMatrix> = (0..blocks.len()).map(|j| &rd[j] - &atdy[j]).collect();
                let dx: Vec<RealMatrix> = (0..blocks.len())
                    .map(|j| sym(&(&gtg[j] - &ws[j] * &ds[j] * &ws[j])))
                    .collect();
                (dx, ds)
            };
            // Refine against the operator that actually produces dX so that
            // A(dX) matches the primal residual.
            let (mut dx, mut ds) = build(&dy);
            let small = |e: &DVector<f64>| e.norm() <= 1e-3 * rp.norm() + 1e-15 * (1.0 + norm_b);
            let mut e = &rp - prob.op_a(&dx);
            for _ in 0..3 {
                if small(&e) {
                    break;
                }
                dy += chol.solve(&e);
                (dx, ds) = build(&dy);
                e = &rp - prob.op_a(&dx);
            }
            // A shifted Schur factor leaves part of the residual behind near a
            // degenerate optimum; project it out with the fixed constraint
            // Gram matrix.
            if let (true, Some(gram)) = (chol.shifted && !small(&e), &gram) {
                for (d, f) in dx.iter_mut().zip(prob.op_at(&gram.solve(&e))) {
                    *d += f;
                }
            }
            // Scaled directions.
            let sds: Vec<RealMatrix> = (0..blocks.len())
                .map(|j| sym(&(nt[j].g.transpose() * &ds[j] * &nt[j].g)))
                .collect();
            let sdx: Vec<RealMatrix> = (0..blocks.len()).map(|j| &t[j] - &sds[j]).collect();
            (dx, dy, ds, sdx, sds)
        };
        let steps = |dx: &[RealMatrix], ds: &[RealMatrix]| -> Option<(f64, f64)> {
            let mut ap = f64::INFINITY;
            let mut ad = f64::INFINITY;
            for j in 0..blocks.len() {
                ap = ap.min(max_step(&st.x[j], &dx[j])?);
                ad = ad.min(max_step(&st.s[j], &ds[j])?);
            }
            Some((ap, ad))
        };

        let (dxa, _, dsa, sdxa, sdsa) = direction(0.0, None);
        let Some((apa, ada)) = steps(&dxa, &dsa) else {
            break;
        };
        let (apa, ada) = (apa.min(1.0), ada.min(1.0));
        let mut mu_aff = 0.0;
        for j in 0..blocks.len() {
            let dg = RealMatrix::from_diagonal(&nt[j].d);
            mu_aff += (&dg + &sdxa[j] * apa).dot(&(&dg + &sdsa[j] * ada));
        }
        mu_aff /= ntot as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let corr: Vec<RealMatrix> = (0..blocks.len())
            .map(|j| {
                let p = &sdxa[j] * &sdsa[j];
                &p + p.transpose()
            })
            .collect();
        let (mut dx, mut dy, mut ds, _, _) = direction(sigma * mu, Some(&corr));
        let Some((mut ap, mut ad)) = steps(&dx, &ds) else {
            break;
        };
        // A short corrected step signals lost centrality: compare with a
        // plain centering direction and keep the longer step.
        if ap.min(ad) < 0.2 {
            let (cx, cy, cs, _, _) = direction(sigma.max(0.5) * mu, None);
            if let Some((cp, cd)) = steps(&cx, &cs) {
                if cp.min(cd) > ap.min(ad) {
                    (dx, dy, ds, ap, ad) = (cx, cy, cs, cp, cd);
                }
            }
        }
        let tau = 0.98;
        let ap = (tau * ap).min(1.0);
        let ad = (tau * ad).min(1.0);
        if opts.trace {
            eprintln!(
                "{iter:3} p {pobj:+.12e} d {dobj:+.12e} gap {gap:.2e} rp {rel_p:.2e} rd {rel_d:.2e} \
                 sigma {sigma:.2e} ap {ap:.3} ad {ad:.3}"
            );
        }
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        for j in 0..blocks.len() {
            st.x[j] += &dx[j] * ap;
            st.s[j] += &ds[j] * ad;
        }
        st.y += dy * ad;
    }
    out.status = SdpStatus::NumericFailure;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::{c, ComplexMatrix, ONE};
    use crate::sdp_core::model::{
        lmi_contraction, lmi_opnorm_ub, lmi_quad_epigraph, lmi_spectral_lb, AffineMatrix,
    };
    use approx::assert_relative_eq;

    fn scalar_lmi(c0: f64, terms: &[(usize, f64)]) -> LmiBlock {
        let mut p = AffineMatrix::zero(1, 1);
        p.constant.push((0, 0, c(c0, 0.0)));
        for &(v, a) in terms {
            p.add_term(v, vec![(0, 0, c(a, 0.0))]);
        }
        LmiBlock::new(p).unwrap()
    }

    #[test]
    fn linear_program() {
        // max x + y s.t. x <= 1, y <= 2, x >= 0, y >= 0
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.add_var();
        let y = p.add_var();
        p.set_objective(x, 1.0);
        p.set_objective(y, 1.0);
        p.add_lmi(scalar_lmi(1.0, &[(x, -1.0)])).unwrap();
        p.add_lmi(scalar_lmi(2.0, &[(y, -1.0)])).unwrap();
        p.add_lmi(scalar_lmi(0.0, &[(x, 1.0)])).unwrap();
        p.add_lmi(scalar_lmi(0.0, &[(y, 1.0)])).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_relative_eq!(s.value, 3.0, epsilon = 1e-8);
        assert!(s.gap <= 1e-9 * 3.0);
    }

    #[test]
    fn max_eigenvalue_by_minimization() {
        // min t s.t. t I - H >= 0 gives lambda_max(H)
        let h = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, -2.0), c(0.0, 2.0), c(-1.0, 0.0)],
        );
        let mut p = SdpProblem::new(Sense::Minimize);
        let t = p.add_var();
        p.set_objective(t, 1.0);
        let pencil = AffineMatrix::constant(&h).scaled(-1.0);
        let mut blk = pencil;
        blk.add_term(t, vec![(0, 0, ONE), (1, 1, ONE)]);
        p.add_lmi(LmiBlock::new(blk).unwrap()).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_relative_eq!(s.value, 5f64.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn contraction_and_spectral_builders() {
        // max Re w  s.t. |w| <= 1 via lambda_min([[Re w]]) >= t
        let mut p = SdpProblem::new(Sense::Maximize);
        let w = p.add_complex_matrix(1, 1);
        let t = p.add_var();
        p.set_objective(t, 1.0);
        p.add_lmi(lmi_contraction(&w.affine()).unwrap()).unwrap();
        let k = w.affine();
        let herm = k.plus(&k.adjoint()).unwrap().scaled(0.5);
        p.add_lmi(lmi_spectral_lb(&herm, t).unwrap()).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_relative_eq!(s.value, 1.0, epsilon = 1e-8);
        assert_relative_eq!(s.y[w.re[0]], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn opnorm_and_epigraph() {
        // min s s.t. ||diag(1,2) - x I|| <= u, u^2 <= s  -> x = 1.5, s = 0.25
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_var();
        let u = p.add_var();
        let s = p.add_var();
        p.set_objective(s, 1.0);
        let mut m = AffineMatrix::zero(2, 2);
        m.constant = vec![(0, 0, ONE), (1, 1, c(2.0, 0.0))];
        m.add_term(x, vec![(0, 0, -ONE), (1, 1, -ONE)]);
        p.add_lmi(lmi_opnorm_ub(&m, u).unwrap()).unwrap();
        p.add_lmi(lmi_quad_epigraph(u, s).unwrap()).unwrap();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert_relative_eq!(sol.value, 0.25, epsilon = 1e-8);
        assert_relative_eq!(sol.y[x], 1.5, epsilon = 1e-5);
    }

    #[test]
    fn detects_infeasible() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let y = p.add_var();
        p.add_lmi(scalar_lmi(-1.0, &[(y, 1.0)])).unwrap();
        p.add_lmi(scalar_lmi(-1.0, &[(y, -1.0)])).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Infeasible);
        assert!(s.require_optimal().is_err());
    }

    #[test]
    fn detects_unbounded() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let y = p.add_var();
        p.set_objective(y, 1.0);
        p.add_lmi(scalar_lmi(0.0, &[(y, 1.0)])).unwrap();
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Unbounded);
    }

    #[test]
    fn rejects_non_hermitian_pencil() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let y = p.add_var();
        let mut a = AffineMatrix::identity(2);
        a.add_term(y, vec![(0, 1, ONE)]);
        p.add_lmi(LmiBlock::new(a).unwrap()).unwrap();
        assert!(matches!(
            solve(&p, &SdpOptions::default()),
            Err(Error::Shape(_))
        ));
    }
}
