//! Quantum channels in Kraus form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matlin::{self, c, ComplexMatrix};

/// Largest Kraus count any constructed channel may have.
pub const MAX_KRAUS: usize = 1024;
/// Largest input or output dimension any constructed channel may have.
pub const MAX_DIM: usize = 128;
/// Trace-preservation tolerance used by validation.
pub const TP_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes, caps, and trace preservation within [`TP_TOL`].
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let ch = Self::from_parts(kraus)?;
        let dev = ch.tp_deviation();
        if dev > TP_TOL {
            return Err(Error::InvalidChannel(format!(
                "sum of F^dag F deviates from identity by {dev:.3e}"
            )));
        }
        Ok(ch)
    }

    fn from_parts(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("zero dimension".into()));
        }
        if kraus.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::Shape("Kraus operators differ in shape".into()));
        }
        if kraus.len() > MAX_KRAUS {
            return Err(Error::Cap(format!(
                "{} Kraus operators exceeds cap {MAX_KRAUS}",
                kraus.len()
            )));
        }
        if dim_in > MAX_DIM || dim_out > MAX_DIM {
            return Err(Error::Cap(format!(
                "dimension {}x{} exceeds cap {MAX_DIM}",
                dim_out, dim_in
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    /// Largest entry of `sum F^dag F - I`.
    pub fn tp_deviation(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s += k.adjoint() * k;
        }
        matlin::max_abs_diff(&s, &matlin::identity(self.dim_in))
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::Shape(format!(
                "state is {}x{}, channel input is {}",
                rho.nrows(),
                rho.ncols(),
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }

    /// Choi matrix `sum_ij |i><j| (x) K(|i><j|)`, input factor first.
    pub fn choi(&self) -> ComplexMatrix {
        let n = self.dim_in * self.dim_out;
        let mut j = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            let v =
                nalgebra::DVector::from_fn(n, |idx, _| k[(idx % self.dim_out, idx / self.dim_out)]);
            j += &v * v.adjoint();
        }
        j
    }

    /// Channel equality: Choi matrices agree entrywise within `tol`.
    pub fn approx_eq(&self, other: &KrausChannel, tol: f64) -> bool {
        self.dim_in == other.dim_in
            && self.dim_out == other.dim_out
            && matlin::max_abs_diff(&self.choi(), &other.choi()) <= tol
    }

    /// The single Kraus operator, when this channel is unitary.
    pub fn as_unitary(&self) -> Option<&ComplexMatrix> {
        match self.kraus.as_slice() {
            [u] if matlin::is_unitary(u, 1e-10) => Some(u),
            _ => None,
        }
    }

    /// Equivalent Kraus set `E_k = sum_i V_ik F_i` with `tr(E_k^dag E_l)`
    /// diagonal, heaviest first, omitting directions whose weight is below
    /// `rel_drop` times the total. Returns the channel and the `q x r` isometry `V`.
    pub fn orthogonal_form(&self, rel_drop: f64) -> Result<(KrausChannel, ComplexMatrix)> {
        let q = self.kraus.len();
        let gram = ComplexMatrix::from_fn(q, q, |i, j| {
            self.kraus[i].zip_fold(&self.kraus[j], c(0.0, 0.0), |acc, a, b| acc + a.conj() * b)
        });
        let gram = (&gram + gram.adjoint()) * c(0.5, 0.0);
        let (vals, vecs) = matlin::herm_eig(&gram)?;
        let total: f64 = vals.iter().map(|v| v.max(0.0)).sum();
        let keep: Vec<usize> = (0..q).rev().filter(|&k| vals[k] > rel_drop * total).collect();
        if keep.is_empty() {
            return Err(Error::InvalidChannel("all Kraus operators vanish".into()));
        }
        let v = ComplexMatrix::from_fn(q, keep.len(), |i, k| vecs[(i, keep[k])]);
        let kraus = (0..keep.len())
            .map(|k| {
                self.kraus
                    .iter()
                    .enumerate()
                    .fold(ComplexMatrix::zeros(self.dim_out, self.dim_in), |acc, (i, f)| {
                        acc + f * v[(i, k)]
                    })
            })
            .collect();
        Ok((KrausChannel::from_parts(kraus)?, v))
    }

    /// `self (x) id_d`, the channel acting on a `d`-dimensional ancilla as identity.
    pub fn extend(&self, d: usize) -> Result<KrausChannel> {
        tensor(self, &identity(d)?)
    }
}

pub fn identity(d: usize) -> Result<KrausChannel> {
    KrausChannel::from_parts(vec![matlin::identity(d)])
}

pub fn unitary_channel(u: &ComplexMatrix) -> Result<KrausChannel> {
    if !matlin::is_unitary(u, 1e-10) {
        return Err(Error::InvalidChannel("matrix is not unitary".into()));
    }
    KrausChannel::new(vec![u.clone()])
}

/// Unitary channel of `exp(i theta X)`.
pub fn rotation_x(theta: f64) -> KrausChannel {
    let u = matlin::identity(2).scale(theta.cos()) + matlin::pauli_x() * c(0.0, theta.sin());
    KrausChannel::from_parts(vec![u]).expect("2x2 unitary")
}

/// `rho -> (1+eta)/2 rho + (1-eta)/2 Z rho Z`, always with two Kraus operators.
pub fn dephasing(eta: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!(
            "dephasing parameter {eta} outside [0, 1]"
        )));
    }
    KrausChannel::new(vec![
        matlin::identity(2).scale(((1.0 + eta) / 2.0).sqrt()),
        matlin::pauli_z().scale(((1.0 - eta) / 2.0).sqrt()),
    ])
}

/// Qubit depolarizing channel `rho -> (1-p) rho + p tr(rho) I/2`.
pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing parameter {p} outside [0, 1]"
        )));
    }
    let a = (1.0 - 0.75 * p).sqrt();
    let b = (p / 4.0).sqrt();
    KrausChannel::new(vec![
        matlin::identity(2).scale(a),
        matlin::pauli_x().scale(b),
        matlin::pauli_y().scale(b),
        matlin::pauli_z().scale(b),
    ])
}

/// Convex mixture; the Kraus set is the concatenation of `sqrt(w_c) F_j^(c)`.
pub fn mix(channels: &[KrausChannel], weights: &[f64]) -> Result<KrausChannel> {
    if channels.is_empty() || channels.len() != weights.len() {
        return Err(Error::InvalidArgument(
            "mixture needs one weight per channel".into(),
        ));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidArgument("negative mixture weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "mixture weights sum to {total}"
        )));
    }
    let dims = (channels[0].dim_in, channels[0].dim_out);
    if channels.iter().any(|ch| (ch.dim_in, ch.dim_out) != dims) {
        return Err(Error::Shape("mixed channels differ in dimension".into()));
    }
    let kraus = channels
        .iter()
        .zip(weights)
        .flat_map(|(ch, &w)| ch.kraus.iter().map(move |k| k.scale(w.sqrt())))
        .collect();
    KrausChannel::from_parts(kraus)
}

/// `a (x) b`; Kraus operators ordered with the index of `a` most significant.
pub fn tensor(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel> {
    let count = a.kraus.len() * b.kraus.len();
    if count > MAX_KRAUS {
        return Err(Error::Cap(format!(
            "{count} Kraus operators exceeds cap {MAX_KRAUS}"
        )));
    }
    let (di, dout) = (a.dim_in * b.dim_in, a.dim_out * b.dim_out);
    if di > MAX_DIM || dout > MAX_DIM {
        return Err(Error::Cap(format!(
            "dimension {dout}x{di} exceeds cap {MAX_DIM}"
        )));
    }
    let kraus = a
        .kraus
        .iter()
        .flat_map(|x| b.kraus.iter().map(move |y| matlin::kron(x, y)))
        .collect();
    KrausChannel::from_parts(kraus)
}

pub fn tensor_power(k: &KrausChannel, n: usize) -> Result<KrausChannel> {
    if n == 0 {
        return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
    }
    check_power_caps(k, n)?;
    let mut out = k.clone();
    for _ in 1..n {
        out = tensor(&out, k)?;
    }
    Ok(out)
}

/// Errors when `k` to the power `n` would exceed the Kraus or dimension caps.
pub fn check_power_caps(k: &KrausChannel, n: usize) -> Result<()> {
    let over = |base: usize, cap: usize| {
        (0..n)
            .try_fold(1usize, |acc, _| acc.checked_mul(base).filter(|&v| v <= cap))
            .is_none()
    };
    if over(k.kraus.len(), MAX_KRAUS) {
        return Err(Error::Cap(format!(
            "{} Kraus operators to the power {n} exceeds cap {MAX_KRAUS}",
            k.kraus.len()
        )));
    }
    if over(k.dim_in.max(k.dim_out), MAX_DIM) {
        return Err(Error::Cap(format!(
            "dimension {} to the power {n} exceeds cap {MAX_DIM}",
            k.dim_in.max(k.dim_out)
        )));
    }
    Ok(())
}

/// `second o first`.
pub fn compose(second: &KrausChannel, first: &KrausChannel) -> Result<KrausChannel> {
    if second.dim_in != first.dim_out {
        return Err(Error::Shape(format!(
            "cannot compose: first outputs {}, second takes {}",
            first.dim_out, second.dim_in
        )));
    }
    let kraus = second
        .kraus
        .iter()
        .flat_map(|s| first.kraus.iter().map(move |f| s * f))
        .collect();
    KrausChannel::from_parts(kraus)
}

/// Pure state `|psi><psi|` from an unnormalized amplitude vector.
pub fn pure_state(amps: &[Complex64]) -> Result<ComplexMatrix> {
    let v = nalgebra::DVector::from_column_slice(amps);
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidArgument("zero state vector".into()));
    }
    let v = v.unscale(n);
    Ok(&v * v.adjoint())
}

/// Maximally entangled state on `d (x) d`.
pub fn max_entangled(d: usize) -> ComplexMatrix {
    let amps: Vec<Complex64> = (0..d * d)
        .map(|i| {
            if i % (d + 1) == 0 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .collect();
    pure_state(&amps).expect("nonzero vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matlin::{max_abs_diff, pauli_x};
    use approx::assert_relative_eq;

    #[test]
    fn orthogonal_form_drops_zero_operators() {
        let m = mix(&[rotation_x(0.3), dephasing(0.5).unwrap()], &[1.0, 0.0]).unwrap();
        let (o, v) = m.orthogonal_form(1e-24).unwrap();
        assert_eq!(o.kraus_count(), 1);
        assert_eq!(v.shape(), (3, 1));
        assert!(o.approx_eq(&m, 1e-12));
        let d = depolarizing(0.3).unwrap();
        let (o, v) = d.orthogonal_form(1e-24).unwrap();
        assert_eq!(o.kraus_count(), 4);
        assert!(o.approx_eq(&d, 1e-12));
        assert!((v.adjoint() * &v - matlin::identity(4)).norm() < 1e-12);
    }

    #[test]
    fn dephasing_has_two_kraus_even_at_one() {
        let d = dephasing(1.0).unwrap();
        assert_eq!(d.kraus_count(), 2);
        assert!(d.approx_eq(&identity(2).unwrap(), 1e-12));
    }

    #[test]
    fn dephasing_rejects_out_of_range() {
        assert!(matches!(dephasing(1.5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn new_rejects_non_tp() {
        let r = KrausChannel::new(vec![matlin::identity(2).scale(0.9)]);
        assert!(matches!(r, Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn new_rejects_mixed_shapes() {
        let r = KrausChannel::new(vec![matlin::identity(2), matlin::identity(3)]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn choi_trace_is_dim_in() {
        let ch = depolarizing(0.3).unwrap();
        assert_relative_eq!(matlin::trace(&ch.choi()).re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn apply_rotation() {
        let ch = rotation_x(std::f64::consts::FRAC_PI_2);
        let rho = pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let out = ch.apply(&rho).unwrap();
        assert_relative_eq!(out[(1, 1)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mix_weights_validated() {
        let a = identity(2).unwrap();
        assert!(mix(&[a.clone(), a.clone()], &[0.5, 0.6]).is_err());
        let m = mix(&[a.clone(), dephasing(0.0).unwrap()], &[0.5, 0.5]).unwrap();
        assert_eq!(m.kraus_count(), 3);
        assert!(m.approx_eq(&dephasing(0.5).unwrap(), 1e-12));
    }

    #[test]
    fn tensor_power_caps() {
        let d = depolarizing(0.1).unwrap();
        assert!(matches!(tensor_power(&d, 6), Err(Error::Cap(_))));
        assert_eq!(tensor_power(&d, 5).unwrap().kraus_count(), 1024);
        assert!(matches!(
            tensor_power(&rotation_x(0.1), 8),
            Err(Error::Cap(_))
        ));
    }

    #[test]
    fn compose_unitaries() {
        let a = rotation_x(0.2);
        let b = rotation_x(0.5);
        let ab = compose(&a, &b).unwrap();
        assert!(ab.approx_eq(&rotation_x(0.7), 1e-12));
    }

    #[test]
    fn as_unitary_detects() {
        assert!(rotation_x(0.3).as_unitary().is_some());
        assert!(dephasing(0.5).unwrap().as_unitary().is_none());
        let u = unitary_channel(&pauli_x()).unwrap();
        assert!(max_abs_diff(u.as_unitary().unwrap(), &pauli_x()) == 0.0);
    }

    #[test]
    fn max_entangled_is_pure() {
        let p = max_entangled(2);
        assert!(max_abs_diff(&(&p * &p), &p) < 1e-12);
    }
}
