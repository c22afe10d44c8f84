//! Channel Fisher information as the second-order coefficient of the Bures
//! distance along a one-parameter family, and path lengths built from it.
//!
//! ```text
//! J(x) = lim 4 B^2(K_x, K_{x+dx}) / dx^2 = lim 8 (1 - F(K_x, K_{x+dx})) / dx^2
//! ```

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel_fidelity::fidelity;
use crate::channels::{self, check_power_caps, KrausChannel};
use crate::error::{Error, Result};
use crate::matlin::{self, ComplexMatrix};
use crate::tensor_symmetry::fidelity_tensor_power;

/// A smooth one-parameter family of channels with a fixed Kraus count.
///
/// `evaluate` must be a pure function of `x`: grid points are evaluated in
/// parallel.
pub trait ChannelFamily: Send + Sync {
    fn evaluate(&self, x: f64) -> Result<KrausChannel>;

    fn domain(&self) -> (f64, f64);

    fn kraus_count(&self) -> usize;

    /// An equivalent family over a parameter in which the channel depends
    /// smoothly on its argument up to the endpoints. Path lengths do not depend
    /// on the parameterization, so they are integrated in this chart.
    fn smooth_chart(&self) -> Option<Box<dyn ChannelFamily + '_>> {
        None
    }
}

fn checked_eval(family: &dyn ChannelFamily, x: f64) -> Result<KrausChannel> {
    let (a, b) = family.domain();
    if !(a..=b).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "parameter {x} outside family domain [{a}, {b}]"
        )));
    }
    let k = family.evaluate(x)?;
    if k.kraus_count() != family.kraus_count() {
        return Err(Error::InvalidArgument(format!(
            "family has {} Kraus operators at x = {x}, expected {}",
            k.kraus_count(),
            family.kraus_count()
        )));
    }
    Ok(k)
}

/// `x -> K` for every `x`.
pub struct ConstantFamily {
    pub channel: KrausChannel,
    pub domain: (f64, f64),
}

impl ChannelFamily for ConstantFamily {
    fn evaluate(&self, _x: f64) -> Result<KrausChannel> {
        Ok(self.channel.clone())
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn kraus_count(&self) -> usize {
        self.channel.kraus_count()
    }
}

/// `x -> exp(-i x H) rho exp(i x H)`.
pub struct UnitaryFamily {
    generator: ComplexMatrix,
    domain: (f64, f64),
}

impl UnitaryFamily {
    pub fn new(generator: ComplexMatrix, domain: (f64, f64)) -> Result<Self> {
        if !generator.is_square() || !matlin::is_hermitian(&generator, 1e-10) {
            return Err(Error::InvalidArgument("generator must be Hermitian".into()));
        }
        check_domain(domain)?;
        Ok(Self { generator, domain })
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }
}

impl ChannelFamily for UnitaryFamily {
    fn evaluate(&self, x: f64) -> Result<KrausChannel> {
        channels::unitary_channel(&matlin::exp_i_hermitian(&self.generator, x)?)
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn kraus_count(&self) -> usize {
        1
    }
}

/// `x -> rotation_x(x)`.
pub struct RotationFamily {
    pub domain: (f64, f64),
}

impl ChannelFamily for RotationFamily {
    fn evaluate(&self, x: f64) -> Result<KrausChannel> {
        Ok(channels::rotation_x(x))
    }
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn kraus_count(&self) -> usize {
        1
    }
}

/// `x -> dephasing(x)` on `[0, 1]`.
pub struct DephasingFamily;

impl ChannelFamily for DephasingFamily {
    fn evaluate(&self, x: f64) -> Result<KrausChannel> {
        channels::dephasing(x)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn kraus_count(&self) -> usize {
        2
    }
}

/// `x -> depolarizing(x)` on `[0, 1]`.
pub struct DepolarizingFamily;

impl ChannelFamily for DepolarizingFamily {
    fn evaluate(&self, x: f64) -> Result<KrausChannel> {
        channels::depolarizing(x)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn kraus_count(&self) -> usize {
        4
    }
}

/// Convex path `x -> (1-x) a + x b` on `[0, 1]`.
///
/// The Kraus operators scale with `sqrt(x)`, so the Fisher information blows
/// up like `1/x` at the ends. Its smooth chart is [`AngularMixture`].
pub struct MixturePath {
    a: KrausChannel,
    b: KrausChannel,
}

impl MixturePath {
    pub fn new(a: KrausChannel, b: KrausChannel) -> Result<Self> {
        crate::channel_fidelity::check_pair(&a, &b)?;
        Ok(Self { a, b })
    }

    pub fn endpoints(&self) -> (&KrausChannel, &KrausChannel) {
        (&self.a, &self.b)
    }
}

impl ChannelFamily for MixturePath {
    fn evaluate(&self, x: f64) -> Result<KrausChannel> {
        channels::mix(&[self.a.clone(), self.b.clone()], &[1.0 - x, x])
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn kraus_count(&self) -> usize {
        self.a.kraus_count() + self.b.kraus_count()
    }
    fn smooth_chart(&self) -> Option<Box<dyn ChannelFamily + '_>> {
        Some(Box::new(AngularMixture {
            a: self.a.clone(),
            b: self.b.clone(),
        }))
    }
}

/// The mixture path with `x = sin^2(phi)`, `phi` in `[0, pi/2]`: Kraus operators
/// `cos(phi) F_a` and `sin(phi) F_b`.
pub struct AngularMixture {
    pub a: KrausChannel,
    pub b: KrausChannel,
}

impl ChannelFamily for AngularMixture {
    fn evaluate(&self, phi: f64) -> Result<KrausChannel> {
        let (s, c) = phi.sin_cos();
        let (ws, wc) = (s * s, c * c);
        let total = ws + wc;
        channels::mix(&[self.a.clone(), self.b.clone()], &[wc / total, ws / total])
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, FRAC_PI_2)
    }
    fn kraus_count(&self) -> usize {
        self.a.kraus_count() + self.b.kraus_count()
    }
}

fn check_domain((a, b): (f64, f64)) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument(format!("bad domain [{a}, {b}]")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfiMethod {
    FiniteDiff,
    Richardson,
    Analytic,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QfiEstimate {
    pub value: f64,
    pub step: f64,
    pub method: QfiMethod,
    pub error_budget: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct QfiOptions {
    pub sdp_tol: f64,
    pub richardson: bool,
    /// Number of parallel copies `N`; the family is replaced by `K_x^(x)N`.
    pub copies: usize,
    /// Refuse when the fidelity noise `8 tol / h^2` alone exceeds this.
    pub accuracy: Option<f64>,
}

impl Default for QfiOptions {
    fn default() -> Self {
        Self {
            sdp_tol: 1e-9,
            richardson: true,
            copies: 1,
            accuracy: None,
        }
    }
}

fn pair_fidelity(a: &KrausChannel, b: &KrausChannel, copies: usize, tol: f64) -> Result<f64> {
    Ok(if copies == 1 {
        fidelity(a, b, tol)?.raw
    } else {
        fidelity_tensor_power(a, b, copies, tol)?.raw
    })
}

/// `8 (1 - F(K_lo, K_hi)) / (hi - lo)^2`.
fn fd_quotient(
    family: &dyn ChannelFamily,
    lo: f64,
    hi: f64,
    copies: usize,
    tol: f64,
) -> Result<f64> {
    let f = pair_fidelity(&checked_eval(family, lo)?, &checked_eval(family, hi)?, copies, tol)?;
    let h = hi - lo;
    Ok(8.0 * (1.0 - f) / (h * h))
}

fn check_step(h: f64, tol: f64, accuracy: Option<f64>) -> Result<()> {
    if !(1e-6..=1e-1).contains(&h) {
        return Err(Error::InvalidArgument(format!("step {h} outside [1e-6, 1e-1]")));
    }
    if tol > h * h * 1e-3 {
        return Err(Error::InvalidArgument(format!(
            "solver tolerance {tol} too loose for step {h}; need tol <= h^2 * 1e-3"
        )));
    }
    if let Some(acc) = accuracy {
        let noise = 8.0 * tol / (h * h);
        if noise > acc {
            return Err(Error::InvalidArgument(format!(
                "fidelity noise {noise:.3e} exceeds requested accuracy {acc:.3e}"
            )));
        }
    }
    Ok(())
}

/// Fisher information at `x` from the symmetric pair `(x - h/2, x + h/2)`,
/// optionally Richardson-combined with the half step: `(4 J_{h/2} - J_h) / 3`.
pub fn qfi(family: &dyn ChannelFamily, x: f64, h: f64, opts: &QfiOptions) -> Result<QfiEstimate> {
    check_step(h, opts.sdp_tol, opts.accuracy)?;
    if opts.copies == 0 {
        return Err(Error::InvalidArgument("copies must be >= 1".into()));
    }
    let (a, b) = family.domain();
    if x - h / 2.0 < a || x + h / 2.0 > b {
        return Err(Error::InvalidArgument(format!(
            "pair around {x} with step {h} leaves domain [{a}, {b}]"
        )));
    }
    let tol = opts.sdp_tol;
    let j_h = fd_quotient(family, x - h / 2.0, x + h / 2.0, opts.copies, tol)?;
    let noise = 8.0 * tol / (h * h);
    let (raw, method, budget) = if opts.richardson {
        let j_h2 = fd_quotient(family, x - h / 4.0, x + h / 4.0, opts.copies, tol)?;
        (
            (4.0 * j_h2 - j_h) / 3.0,
            QfiMethod::Richardson,
            (16.0 * noise + noise) / 3.0 + (j_h2 - j_h).abs() / 3.0,
        )
    } else {
        (j_h, QfiMethod::FiniteDiff, noise)
    };
    if raw < -(1e-6 + budget) {
        return Err(Error::Numeric(format!(
            "negative Fisher information {raw:.3e} beyond error budget {budget:.3e}"
        )));
    }
    Ok(QfiEstimate {
        value: raw.max(0.0),
        step: h,
        method,
        error_budget: budget,
    })
}

/// `(lambda_max - lambda_min)^2` of the generator of `exp(-i x H)`.
pub fn qfi_unitary(generator: &ComplexMatrix) -> Result<f64> {
    let ev = matlin::herm_eigvals(generator)?;
    let spread = ev.last().copied().unwrap_or(0.0) - ev.first().copied().unwrap_or(0.0);
    Ok(spread * spread)
}

/// [`qfi_unitary`] as an estimate.
pub fn qfi_analytic(family: &UnitaryFamily) -> Result<QfiEstimate> {
    Ok(QfiEstimate {
        value: qfi_unitary(family.generator())?,
        step: 0.0,
        method: QfiMethod::Analytic,
        error_budget: 0.0,
    })
}

/// Cramer-Rao bound `1 / sqrt(n J)` on the standard deviation of an unbiased
/// estimator after `n` independent uses.
pub fn precision_bound(j: f64, n_repeats: u64) -> Result<f64> {
    if n_repeats == 0 {
        return Err(Error::InvalidArgument("n_repeats must be >= 1".into()));
    }
    if !(j > 0.0) {
        return Err(Error::InvalidArgument(
            "zero Fisher information: parameter not locally estimable".into(),
        ));
    }
    Ok(1.0 / (n_repeats as f64 * j).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathVariant {
    /// Fisher information of the `N`-fold tensor power at every grid point.
    Exact,
    /// `N` times the single-copy length, using `J(K^(x)N) <= N^2 J(K)`.
    Scaled,
}

#[derive(Clone, Copy, Debug)]
pub struct PathOptions {
    /// Finite-difference step of each grid-point estimate.
    pub step: f64,
    pub sdp_tol: f64,
    /// Stop refining once the Simpson estimates on the grid and on every other
    /// grid point differ by less than this.
    pub refine_tol: f64,
    pub max_grid: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            step: 1e-2,
            sdp_tol: 1e-9,
            refine_tol: 1e-3,
            max_grid: 321,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathLength {
    pub value: f64,
    pub copies: usize,
    pub variant: PathVariant,
    /// Grid size of the reported value.
    pub grid: usize,
    /// Difference to the embedded half-grid estimate.
    pub refine_delta: f64,
    pub converged: bool,
    /// Loosest solver tolerance any grid point needed.
    pub loosest_tol: f64,
    /// Length that solver noise alone can produce; values below it are
    /// indistinguishable from zero.
    pub resolution: f64,
}

/// Composite Simpson rule on an odd number of uniform samples.
pub fn simpson(values: &[f64], a: f64, b: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

/// Symmetric pair of width `h` around `x`, shifted to stay inside `[a, b]`.
fn pair_in_domain(x: f64, h: f64, (a, b): (f64, f64)) -> (f64, f64) {
    let lo = (x - h / 2.0).max(a).min(b - h);
    (lo, lo + h)
}

/// Smallest grid size `>= grid` with `grid = 1 (mod 4)`, so that every other
/// point is again a Simpson grid.
fn simpson_grid(grid: usize) -> usize {
    grid + (5 - grid % 4) % 4
}

/// `1/2 int sqrt(J(K_x^(x)N)) dx` (exact) or `N/2 int sqrt(J(K_x)) dx` (scaled)
/// by composite Simpson, doubling the grid until the estimate is stable.
pub fn path_length(
    family: &dyn ChannelFamily,
    copies: usize,
    grid: usize,
    variant: PathVariant,
    opts: &PathOptions,
) -> Result<PathLength> {
    if copies == 0 {
        return Err(Error::InvalidArgument("copies must be >= 1".into()));
    }
    if grid < 5 {
        return Err(Error::InvalidArgument("path grid needs at least 5 points".into()));
    }
    let chart = family.smooth_chart();
    let fam: &dyn ChannelFamily = chart.as_deref().unwrap_or(family);
    let dom = fam.domain();
    check_domain(dom)?;
    let h = opts.step.min((dom.1 - dom.0) / 4.0);
    check_step(h, opts.sdp_tol, None)?;
    let eval_copies = match variant {
        PathVariant::Exact => {
            if let Err(e) = check_power_caps(&checked_eval(fam, dom.0)?, copies) {
                return Err(Error::Cap(format!("{e}; use the scaled variant")));
            }
            copies
        }
        PathVariant::Scaled => 1,
    };
    // Points whose program stalls short of `sdp_tol` are retried at looser
    // tolerances, never past what the step allows.
    let tol_cap = h * h * 1e-3;
    let integrand = |x: f64| -> Result<(f64, f64)> {
        let (lo, hi) = pair_in_domain(x, h, dom);
        let mut tol = opts.sdp_tol;
        loop {
            match fd_quotient(fam, lo, hi, eval_copies, tol) {
                Ok(j) => return Ok((j.max(0.0).sqrt(), tol)),
                Err(Error::Solver { .. }) if tol < tol_cap => tol = (tol * 10.0).min(tol_cap),
                Err(e) => return Err(e),
            }
        }
    };
    let scale = match variant {
        PathVariant::Exact => 0.5,
        PathVariant::Scaled => 0.5 * copies as f64,
    };

    let mut g = simpson_grid(grid);
    let at = |g: usize, i: usize| dom.0 + (dom.1 - dom.0) * i as f64 / (g - 1) as f64;
    let mut loosest_tol = opts.sdp_tol;
    let mut track = |pts: Vec<(f64, f64)>| -> Vec<f64> {
        pts.into_iter()
            .map(|(v, t)| {
                loosest_tol = loosest_tol.max(t);
                v
            })
            .collect()
    };
    let mut values = track(
        (0..g)
            .into_par_iter()
            .map(|i| integrand(at(g, i)))
            .collect::<Result<_>>()?,
    );
    loop {
        let fine = scale * simpson(&values, dom.0, dom.1);
        let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
        let delta = (fine - scale * simpson(&coarse, dom.0, dom.1)).abs();
        let converged = delta < opts.refine_tol;
        let next = 2 * g - 1;
        if converged || next > opts.max_grid {
            return Ok(PathLength {
                value: fine,
                copies,
                variant,
                grid: g,
                refine_delta: delta,
                converged,
                loosest_tol,
                resolution: scale * (dom.1 - dom.0) * (8.0 * loosest_tol).sqrt() / h,
            });
        }
        let mids = track(
            (0..g - 1)
                .into_par_iter()
                .map(|i| integrand(at(next, 2 * i + 1)))
                .collect::<Result<_>>()?,
        );
        let mut merged = Vec::with_capacity(next);
        for i in 0..g - 1 {
            merged.push(values[i]);
            merged.push(mids[i]);
        }
        merged.push(values[g - 1]);
        values = merged;
        g = next;
    }
}
