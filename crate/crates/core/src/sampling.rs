//! Seeded random unitaries, channels and contractions for tests and oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channels::KrausChannel;
use crate::error::Result;
use crate::matlin::{self, c, ComplexMatrix};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut SampleRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) / 2f64.sqrt()
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix).
pub fn unitary(d: usize, rng: &mut SampleRng) -> ComplexMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { matlin::ONE };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with Gaussian entries.
pub fn hermitian(d: usize, rng: &mut SampleRng) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Random channel with `k` Kraus operators: `F_i = G_i S^{-1/2}` with
/// `S = sum_i G_i^dag G_i`.
pub fn channel(d: usize, k: usize, rng: &mut SampleRng) -> Result<KrausChannel> {
    let gs: Vec<ComplexMatrix> = (0..k).map(|_| ginibre(d, d, rng)).collect();
    let mut s = ComplexMatrix::zeros(d, d);
    for g in &gs {
        s += g.adjoint() * g;
    }
    let (vals, vecs) = matlin::herm_eig(&s)?;
    let inv_sqrt = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        vals.iter().map(|v| c(1.0 / v.sqrt(), 0.0)),
    ));
    let s_inv_sqrt = &vecs * inv_sqrt * vecs.adjoint();
    KrausChannel::new(gs.iter().map(|g| g * &s_inv_sqrt).collect())
}

/// Random contraction: a Ginibre matrix scaled to operator norm `u` in `[0, 1]`.
pub fn contraction(rows: usize, cols: usize, rng: &mut SampleRng) -> Result<ComplexMatrix> {
    let g = ginibre(rows, cols, rng);
    let n = matlin::op_norm(&g)?;
    let u: f64 = rand::Rng::gen_range(rng, 0.0..=1.0);
    Ok(if n > 0.0 { g * c(u / n, 0.0) } else { g })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_valid_and_seeded() {
        let mut r = rng(7);
        let u = unitary(3, &mut r);
        assert!(matlin::is_unitary(&u, 1e-12));
        let k = channel(2, 3, &mut r).unwrap();
        assert!(k.tp_deviation() < 1e-12);
        let w = contraction(2, 3, &mut r).unwrap();
        assert!(matlin::op_norm(&w).unwrap() <= 1.0 + 1e-12);
        let again = unitary(3, &mut rng(7));
        assert_eq!(matlin::max_abs_diff(&u, &again), 0.0);
    }
}
