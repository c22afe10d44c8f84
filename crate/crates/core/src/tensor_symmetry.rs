//! Fidelity of tensor powers reduced by permutation symmetry.
//!
//! For `a^{(x)N}` and `b^{(x)N}` the mixing problem is invariant under
//! permuting the `N` copies, so an optimal contraction commutes with the
//! symmetric group. Such a contraction is block diagonal over irreducible
//! representations `lambda`, acting as `W_lambda (x) I` on each isotypic
//! component. The reduced problem has one small contraction per `lambda` and
//! one spectral constraint per irreducible block of the input space.
//!
//! Isotypic components are split with Jucys-Murphy elements; bases for the
//! different standard tableaux of a shape are linked with Young's orthogonal
//! form so that the same `W_lambda` acts consistently on every copy.

use std::collections::{BTreeMap, VecDeque};

use crate::channel_fidelity::{check_pair, orthogonal_pair, pull_back, FidelityResult};
use crate::channels::{check_power_caps, tensor_power, KrausChannel};
use crate::error::{Error, Result};
use crate::matlin::{self, c, kron, ComplexMatrix, RealMatrix};
use crate::sdp_core::{
    self, dense_to_triplets, lmi_contraction, lmi_spectral_lb, AffineMatrix, ComplexVarMatrix,
    SdpOptions, SdpProblem, Sense,
};

/// Partitions of `n` with at most `max_rows` parts, largest first.
pub fn partitions(n: usize, max_rows: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cap: usize, rows: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        if rows == 0 {
            return;
        }
        for part in (1..=left.min(cap)).rev() {
            cur.push(part);
            rec(left - part, part, rows - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_rows, &mut Vec::new(), &mut out);
    out
}

/// Standard Young tableau stored as the `(row, col)` box of each entry.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tableau(pub Vec<(usize, usize)>);

impl Tableau {
    /// Rows filled left to right, top to bottom.
    pub fn row_reading(shape: &[usize]) -> Self {
        let mut boxes = Vec::new();
        for (r, &len) in shape.iter().enumerate() {
            for col in 0..len {
                boxes.push((r, col));
            }
        }
        Tableau(boxes)
    }

    pub fn content(&self, k: usize) -> i64 {
        let (r, col) = self.0[k];
        col as i64 - r as i64
    }

    /// Tableau with entries `k` and `k+1` exchanged, when still standard.
    pub fn swapped(&self, k: usize) -> Option<Self> {
        let (r1, c1) = self.0[k];
        let (r2, c2) = self.0[k + 1];
        if r1 == r2 || c1 == c2 {
            return None;
        }
        let mut t = self.clone();
        t.0.swap(k, k + 1);
        Some(t)
    }
}

/// All standard tableaux of a shape in breadth-first order from the
/// row-reading tableau, each with the predecessor and the swap linking them.
fn tableau_tree(shape: &[usize]) -> Vec<(Tableau, Option<(usize, usize)>)> {
    let n: usize = shape.iter().sum();
    let root = Tableau::row_reading(shape);
    let mut seen = BTreeMap::new();
    seen.insert(root.clone(), 0usize);
    let mut out = vec![(root, None)];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for k in 0..n.saturating_sub(1) {
            if let Some(t) = out[i].0.swapped(k) {
                if !seen.contains_key(&t) {
                    seen.insert(t.clone(), out.len());
                    queue.push_back(out.len());
                    out.push((t, Some((i, k))));
                }
            }
        }
    }
    out
}

/// `(C^q)^{(x)n}` with the first factor most significant in the index.
#[derive(Clone, Copy, Debug)]
pub struct TensorSpace {
    pub q: usize,
    pub n: usize,
}

impl TensorSpace {
    pub fn dim(&self) -> usize {
        self.q.pow(self.n as u32)
    }

    fn swap_index(&self, idx: usize, a: usize, b: usize) -> usize {
        let pa = self.q.pow((self.n - 1 - a) as u32);
        let pb = self.q.pow((self.n - 1 - b) as u32);
        let da = (idx / pa) % self.q;
        let db = (idx / pb) % self.q;
        idx - da * pa - db * pb + db * pa + da * pb
    }

    /// Applies the transposition of factors `a` and `b` to every column of `v`.
    pub fn transpose_factors(&self, v: &RealMatrix, a: usize, b: usize) -> RealMatrix {
        let mut out = RealMatrix::zeros(v.nrows(), v.ncols());
        for idx in 0..v.nrows() {
            out.row_mut(self.swap_index(idx, a, b))
                .copy_from(&v.row(idx));
        }
        out
    }

    /// Orthonormal basis of the joint eigenspace of the Jucys-Murphy elements
    /// with the contents of `t`.
    pub fn tableau_subspace(&self, t: &Tableau) -> Result<RealMatrix> {
        let mut v = RealMatrix::identity(self.dim(), self.dim());
        for k in 1..self.n {
            if v.ncols() == 0 {
                break;
            }
            let mut xv = RealMatrix::zeros(v.nrows(), v.ncols());
            for j in 0..k {
                xv += self.transpose_factors(&v, j, k);
            }
            let m = v.transpose() * xv;
            let (vals, vecs) = matlin::sym_eig(&m)?;
            let target = t.content(k) as f64;
            let keep: Vec<usize> = (0..vals.len())
                .filter(|&i| (vals[i] - target).abs() < 0.5)
                .collect();
            if keep.iter().any(|&i| (vals[i] - target).abs() > 1e-6) {
                return Err(Error::Numeric(
                    "Jucys-Murphy spectrum is not integral".into(),
                ));
            }
            let sel = RealMatrix::from_fn(vecs.nrows(), keep.len(), |r, col| vecs[(r, keep[col])]);
            v = v * sel;
        }
        Ok(v)
    }

    /// Bases for every standard tableau of `shape`, related by Young's
    /// orthogonal form. Returns an empty list when the shape does not occur.
    pub fn isotypic_bases(&self, shape: &[usize]) -> Result<Vec<RealMatrix>> {
        let tree = tableau_tree(shape);
        let root = self.tableau_subspace(&tree[0].0)?;
        if root.ncols() == 0 {
            return Ok(Vec::new());
        }
        let mut bases: Vec<RealMatrix> = vec![root];
        for (t, link) in tree.iter().skip(1) {
            let (parent, k) = link.expect("non-root tableau has a parent");
            let pt = &tree[parent].0;
            let r = (pt.content(k + 1) - pt.content(k)) as f64;
            let vp = &bases[parent];
            let moved = self.transpose_factors(vp, k, k + 1);
            let next = (moved - vp * (1.0 / r)) * (1.0 / (1.0 - 1.0 / (r * r)).sqrt());
            debug_assert_eq!(t.0.len(), self.n);
            bases.push(next);
        }
        Ok(bases)
    }
}

/// Fidelity of `a^{(x)n}` and `b^{(x)n}` through the symmetry-reduced program.
/// `w_opt` is returned in the product Kraus ordering of [`tensor_power`].
pub fn fidelity_tensor_power(
    a: &KrausChannel,
    b: &KrausChannel,
    n: usize,
    tol: f64,
) -> Result<FidelityResult> {
    check_pair(a, b)?;
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    check_power_caps(a, n)?;
    check_power_caps(b, n)?;
    let (a, va, b, vb) = orthogonal_pair(a, b)?;
    let (a, b) = (&a, &b);
    let an = tensor_power(a, n)?;
    let bn = tensor_power(b, n)?;
    let env1 = TensorSpace {
        q: a.kraus_count(),
        n,
    };
    let env2 = TensorSpace {
        q: b.kraus_count(),
        n,
    };
    let sys = TensorSpace { q: a.dim_in(), n };
    let d = sys.dim();

    struct Sector {
        v1: Vec<RealMatrix>,
        v2: Vec<RealMatrix>,
        g: Vec<Vec<ComplexMatrix>>,
    }
    let rotate = |kraus: &[ComplexMatrix], v: &RealMatrix, col: usize| {
        kraus.iter().enumerate().fold(
            ComplexMatrix::zeros(kraus[0].nrows(), kraus[0].ncols()),
            |acc, (i, f)| {
                let s = v[(i, col)];
                if s == 0.0 {
                    acc
                } else {
                    acc + f * c(s, 0.0)
                }
            },
        )
    };

    let mut sectors = Vec::new();
    for shape in partitions(n, env1.q.min(env2.q)) {
        let v1 = env1.isotypic_bases(&shape)?;
        let v2 = env2.isotypic_bases(&shape)?;
        if v1.is_empty() || v2.is_empty() {
            continue;
        }
        let (m1, m2) = (v1[0].ncols(), v2[0].ncols());
        let rot1: Vec<Vec<ComplexMatrix>> = v1
            .iter()
            .map(|v| {
                (0..m1)
                    .map(|col| rotate(an.kraus(), v, col).adjoint())
                    .collect()
            })
            .collect();
        let rot2: Vec<Vec<ComplexMatrix>> = v2
            .iter()
            .map(|v| (0..m2).map(|col| rotate(bn.kraus(), v, col)).collect())
            .collect();
        let g = (0..m1)
            .map(|i| {
                (0..m2)
                    .map(|j| {
                        (0..v1.len()).fold(ComplexMatrix::zeros(d, d), |acc, t| {
                            acc + &rot1[t][i] * &rot2[t][j]
                        })
                    })
                    .collect()
            })
            .collect();
        sectors.push(Sector { v1, v2, g });
    }
    if sectors.is_empty() {
        return Err(Error::Numeric("no common symmetry sector".into()));
    }

    let sys_blocks: Vec<RealMatrix> = partitions(n, sys.q)
        .iter()
        .map(|shape| sys.tableau_subspace(&Tableau::row_reading(shape)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|v| v.ncols() > 0)
        .collect();

    let mut prob = SdpProblem::new(Sense::Maximize);
    let t = prob.add_var();
    prob.set_objective(t, 0.5);
    let wvars: Vec<ComplexVarMatrix> = sectors
        .iter()
        .map(|s| prob.add_complex_matrix(s.v1[0].ncols(), s.v2[0].ncols()))
        .collect();
    for w in &wvars {
        prob.add_lmi(lmi_contraction(&w.affine())?)?;
    }
    for vs in &sys_blocks {
        let vc = vs.map(|x| c(x, 0.0));
        let vct = vc.adjoint();
        let ds = vs.ncols();
        let mut herm = AffineMatrix::zero(ds, ds);
        for (s, w) in sectors.iter().zip(&wvars) {
            for j in 0..w.cols {
                for i in 0..w.rows {
                    let idx = j * w.rows + i;
                    let gc = &vct * &s.g[i][j] * &vc;
                    let gh = gc.adjoint();
                    herm.add_term(w.re[idx], dense_to_triplets(&(&gc + &gh)));
                    herm.add_term(w.im[idx], dense_to_triplets(&((&gc - &gh) * c(0.0, 1.0))));
                }
            }
        }
        prob.add_lmi(lmi_spectral_lb(&herm, t)?)?;
    }
    let sol = sdp_core::solve(&prob, &SdpOptions::with_tol(tol))?.require_optimal()?;

    let mut w_full = ComplexMatrix::zeros(env1.dim(), env2.dim());
    for (s, w) in sectors.iter().zip(&wvars) {
        let wl = w.value(&sol.y);
        for (v1, v2) in s.v1.iter().zip(&s.v2) {
            let v1c = v1.map(|x| c(x, 0.0));
            let v2c = v2.map(|x| c(x, 0.0));
            w_full += v1c * &wl * v2c.transpose();
        }
    }
    let kron_power = |v: &ComplexMatrix| (1..n).fold(v.clone(), |acc, _| kron(&acc, v));
    Ok(FidelityResult::from_raw(
        sol.value,
        pull_back(&w_full, &kron_power(&va), &kron_power(&vb)),
        sol.gap,
        sol.iterations,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_fidelity::{fidelity, k_w};
    use crate::channels::{dephasing, mix, rotation_x};
    use approx::assert_relative_eq;

    /// Number of semistandard tableaux of `shape` with entries at most `q`.
    fn hook_content(shape: &[usize], q: usize) -> usize {
        let mut num = 1.0;
        let mut den = 1.0;
        for (r, &len) in shape.iter().enumerate() {
            for col in 0..len {
                let arm = len - col - 1;
                let leg = shape.iter().skip(r + 1).filter(|&&l| l > col).count();
                num *= (q as f64) + col as f64 - r as f64;
                den *= (arm + leg + 1) as f64;
            }
        }
        (num / den).round() as usize
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partitions(4, 4).len(), 5);
        assert_eq!(partitions(4, 2).len(), 3);
        assert_eq!(partitions(6, 2).len(), 4);
    }

    #[test]
    fn isotypic_dimensions_match_hook_content() {
        let sp = TensorSpace { q: 3, n: 4 };
        let mut total = 0;
        for shape in partitions(4, 3) {
            let bases = sp.isotypic_bases(&shape).unwrap();
            let m = bases[0].ncols();
            assert_eq!(m, hook_content(&shape, 3), "shape {shape:?}");
            total += m * bases.len();
        }
        assert_eq!(total, 81);
    }

    #[test]
    fn bases_are_orthonormal_and_disjoint() {
        let sp = TensorSpace { q: 2, n: 4 };
        let mut all = Vec::new();
        for shape in partitions(4, 2) {
            all.extend(sp.isotypic_bases(&shape).unwrap());
        }
        let stacked = RealMatrix::from_fn(16, all.iter().map(|v| v.ncols()).sum(), |r, col| {
            let mut k = col;
            for v in &all {
                if k < v.ncols() {
                    return v[(r, k)];
                }
                k -= v.ncols();
            }
            unreachable!()
        });
        let gram = stacked.transpose() * &stacked;
        assert!((gram - RealMatrix::identity(16, 16)).abs().max() < 1e-10);
    }

    #[test]
    fn transposition_acts_as_orthogonal_form() {
        let sp = TensorSpace { q: 3, n: 3 };
        let shape = [2, 1];
        let bases = sp.isotypic_bases(&shape).unwrap();
        // s_1 on the row-reading tableau: contents 0, 1, -1, axial distance -2
        let moved = sp.transpose_factors(&bases[0], 1, 2);
        let expect = &bases[0] * (-0.5) + &bases[1] * (0.75f64).sqrt();
        assert!((moved - expect).abs().max() < 1e-10);
    }

    #[test]
    fn matches_full_program() {
        let a = rotation_x(0.3);
        let b = dephasing(0.5).unwrap();
        let m0 = mix(&[a.clone(), b.clone()], &[0.7, 0.3]).unwrap();
        let m1 = mix(&[a.clone(), b.clone()], &[0.6, 0.4]).unwrap();
        for (x, y) in [(&a, &b), (&m0, &m1)] {
            for n in 1..=2 {
                let red = fidelity_tensor_power(x, y, n, 1e-10).unwrap();
                let full = fidelity(
                    &tensor_power(x, n).unwrap(),
                    &tensor_power(y, n).unwrap(),
                    1e-10,
                )
                .unwrap();
                assert_relative_eq!(red.raw, full.raw, epsilon = 1e-8);
                let xn = tensor_power(x, n).unwrap();
                let yn = tensor_power(y, n).unwrap();
                let k = k_w(&xn, &yn, &red.w_opt).unwrap();
                let lam = matlin::lambda_min(&(&k + k.adjoint())).unwrap() / 2.0;
                assert!(lam >= red.raw - 1e-7);
                assert!(matlin::op_norm(&red.w_opt).unwrap() <= 1.0 + 1e-7);
            }
        }
    }

    #[test]
    fn worked_pair_vanishes_at_six_copies() {
        let a = rotation_x(0.3);
        let b = dephasing(0.5).unwrap();
        let f5 = fidelity_tensor_power(&a, &b, 5, 1e-10).unwrap().raw;
        let f6 = fidelity_tensor_power(&a, &b, 6, 1e-10).unwrap().raw;
        assert!(f5 > 1e-3);
        assert!(f6.abs() <= 1e-7);
    }
}
