//! Modeling layer: real scalar variables, complex affine matrices, Hermitian LMIs.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matlin::{ComplexMatrix, ONE};

pub type VarId = usize;

/// Sparse complex coefficient matrix as `(row, col, value)` triplets.
/// Duplicate positions are summed.
pub type Triplets = Vec<(usize, usize, Complex64)>;

/// `constant + sum_k y_k * coeff_k` with complex matrix coefficients.
#[derive(Clone, Debug)]
pub struct AffineMatrix {
    pub rows: usize,
    pub cols: usize,
    pub constant: Triplets,
    pub terms: Vec<(VarId, Triplets)>,
}

impl AffineMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            constant: Vec::new(),
            terms: Vec::new(),
        }
    }

    pub fn constant(m: &ComplexMatrix) -> Self {
        let mut a = Self::zero(m.nrows(), m.ncols());
        a.constant = dense_to_triplets(m);
        a
    }

    pub fn identity(n: usize) -> Self {
        let mut a = Self::zero(n, n);
        a.constant = (0..n).map(|i| (i, i, ONE)).collect();
        a
    }

    /// Adds `y_var * coeff`.
    pub fn add_term(&mut self, var: VarId, coeff: Triplets) {
        if !coeff.is_empty() {
            self.terms.push((var, coeff));
        }
    }

    pub fn add_dense_term(&mut self, var: VarId, coeff: &ComplexMatrix) {
        self.add_term(var, dense_to_triplets(coeff));
    }

    pub fn adjoint(&self) -> Self {
        let flip = |t: &Triplets| t.iter().map(|&(i, j, z)| (j, i, z.conj())).collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            constant: flip(&self.constant),
            terms: self.terms.iter().map(|(v, t)| (*v, flip(t))).collect(),
        }
    }

    pub fn plus(&self, other: &AffineMatrix) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape("affine matrices differ in shape".into()));
        }
        let mut out = self.clone();
        out.constant.extend(other.constant.iter().copied());
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let sc = |t: &Triplets| t.iter().map(|&(i, j, z)| (i, j, z * s)).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            constant: sc(&self.constant),
            terms: self.terms.iter().map(|(v, t)| (*v, sc(t))).collect(),
        }
    }

    pub fn eval(&self, y: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for &(i, j, z) in &self.constant {
            m[(i, j)] += z;
        }
        for (v, t) in &self.terms {
            for &(i, j, z) in t {
                m[(i, j)] += z * y[*v];
            }
        }
        m
    }

    fn max_var(&self) -> Option<VarId> {
        self.terms.iter().map(|(v, _)| *v).max()
    }
}

pub fn dense_to_triplets(m: &ComplexMatrix) -> Triplets {
    let mut t = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z.re != 0.0 || z.im != 0.0 {
                t.push((i, j, z));
            }
        }
    }
    t
}

/// A matrix of complex decision variables, each entry a pair of real scalars.
#[derive(Clone, Debug)]
pub struct ComplexVarMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Column-major variable ids of the real parts.
    pub re: Vec<VarId>,
    /// Column-major variable ids of the imaginary parts.
    pub im: Vec<VarId>,
}

impl ComplexVarMatrix {
    pub fn affine(&self) -> AffineMatrix {
        let mut a = AffineMatrix::zero(self.rows, self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                let k = j * self.rows + i;
                a.add_term(self.re[k], vec![(i, j, ONE)]);
                a.add_term(self.im[k], vec![(i, j, Complex64::new(0.0, 1.0))]);
            }
        }
        a
    }

    pub fn value(&self, y: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            let k = j * self.rows + i;
            Complex64::new(y[self.re[k]], y[self.im[k]])
        })
    }
}

/// Hermitian affine pencil required to be positive semidefinite.
#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub dim: usize,
    pub pencil: AffineMatrix,
}

impl LmiBlock {
    pub fn new(pencil: AffineMatrix) -> Result<Self> {
        if pencil.rows != pencil.cols {
            return Err(Error::Shape("LMI pencil must be square".into()));
        }
        Ok(Self {
            dim: pencil.rows,
            pencil,
        })
    }

    /// Assembles a block matrix from a square grid of affine pieces.
    pub fn from_grid(grid: &[Vec<AffineMatrix>]) -> Result<Self> {
        let nb = grid.len();
        if grid.iter().any(|row| row.len() != nb) {
            return Err(Error::Shape("block grid must be square".into()));
        }
        let heights: Vec<usize> = grid.iter().map(|row| row[0].rows).collect();
        let widths: Vec<usize> = (0..nb).map(|j| grid[0][j].cols).collect();
        let mut off_r = vec![0; nb + 1];
        let mut off_c = vec![0; nb + 1];
        for b in 0..nb {
            off_r[b + 1] = off_r[b] + heights[b];
            off_c[b + 1] = off_c[b] + widths[b];
        }
        if off_r[nb] != off_c[nb] {
            return Err(Error::Shape("block grid is not square".into()));
        }
        let mut pencil = AffineMatrix::zero(off_r[nb], off_c[nb]);
        for (bi, row) in grid.iter().enumerate() {
            for (bj, piece) in row.iter().enumerate() {
                if piece.rows != heights[bi] || piece.cols != widths[bj] {
                    return Err(Error::Shape("block grid pieces do not line up".into()));
                }
                let shift = |t: &Triplets| {
                    t.iter()
                        .map(|&(i, j, z)| (i + off_r[bi], j + off_c[bj], z))
                        .collect::<Triplets>()
                };
                pencil.constant.extend(shift(&piece.constant));
                for (v, t) in &piece.terms {
                    pencil.terms.push((*v, shift(t)));
                }
            }
        }
        Self::new(pencil)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Linear objective over real scalars subject to Hermitian LMIs.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub blocks: Vec<LmiBlock>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            n_vars: 0,
            objective: Vec::new(),
            sense,
            blocks: Vec::new(),
        }
    }

    pub fn add_var(&mut self) -> VarId {
        self.n_vars += 1;
        self.objective.push(0.0);
        self.n_vars - 1
    }

    pub fn add_complex_matrix(&mut self, rows: usize, cols: usize) -> ComplexVarMatrix {
        let n = rows * cols;
        let re = (0..n).map(|_| self.add_var()).collect();
        let im = (0..n).map(|_| self.add_var()).collect();
        ComplexVarMatrix { rows, cols, re, im }
    }

    pub fn set_objective(&mut self, var: VarId, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn add_lmi(&mut self, block: LmiBlock) -> Result<()> {
        if block.pencil.max_var().is_some_and(|v| v >= self.n_vars) {
            return Err(Error::InvalidArgument(
                "LMI references unknown variable".into(),
            ));
        }
        self.blocks.push(block);
        Ok(())
    }

    /// Sparse triplet listing `block var row col re im`; `var` is `-` for the constant.
    pub fn dump_triplets(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# vars {} sense {:?} objective {:?}",
            self.n_vars, self.sense, self.objective
        );
        for (b, blk) in self.blocks.iter().enumerate() {
            let _ = writeln!(s, "# block {b} dim {}", blk.dim);
            for &(i, j, z) in &blk.pencil.constant {
                let _ = writeln!(s, "{b} - {i} {j} {:e} {:e}", z.re, z.im);
            }
            for (v, t) in &blk.pencil.terms {
                for &(i, j, z) in t {
                    let _ = writeln!(s, "{b} {v} {i} {j} {:e} {:e}", z.re, z.im);
                }
            }
        }
        s
    }
}

/// `[[I, W^dag], [W, I]] >= 0`, i.e. `||W|| <= 1`.
pub fn lmi_contraction(w: &AffineMatrix) -> Result<LmiBlock> {
    LmiBlock::from_grid(&[
        vec![AffineMatrix::identity(w.cols), w.adjoint()],
        vec![w.clone(), AffineMatrix::identity(w.rows)],
    ])
}

/// `P - t I >= 0` for a Hermitian pencil `P`, i.e. `lambda_min(P) >= t`.
pub fn lmi_spectral_lb(p: &AffineMatrix, t: VarId) -> Result<LmiBlock> {
    let mut pencil = p.clone();
    pencil.add_term(t, (0..p.rows).map(|i| (i, i, -ONE)).collect());
    LmiBlock::new(pencil)
}

/// `[[t I, M^dag], [M, t I]] >= 0`, i.e. `||M|| <= t`.
pub fn lmi_opnorm_ub(m: &AffineMatrix, t: VarId) -> Result<LmiBlock> {
    let ti = |n: usize| {
        let mut a = AffineMatrix::zero(n, n);
        a.add_term(t, (0..n).map(|i| (i, i, ONE)).collect());
        a
    };
    LmiBlock::from_grid(&[vec![ti(m.cols), m.adjoint()], vec![m.clone(), ti(m.rows)]])
}

/// `[[1, u], [u, s]] >= 0`, i.e. `u^2 <= s`.
pub fn lmi_quad_epigraph(u: VarId, s: VarId) -> Result<LmiBlock> {
    let mut p = AffineMatrix::zero(2, 2);
    p.constant.push((0, 0, ONE));
    p.add_term(u, vec![(0, 1, ONE), (1, 0, ONE)]);
    p.add_term(s, vec![(1, 1, ONE)]);
    LmiBlock::new(p)
}
