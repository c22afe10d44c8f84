//! Lower bounds on the number of uses needed to discriminate two channels
//! perfectly, and a direct search for that number.
//!
//! Perfect discrimination with `N` parallel uses needs the angle between the
//! `N`-fold tensor powers to reach `pi/2`, i.e. `2 - 2 cos(theta_N) = 2`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::channel_fidelity::{self, check_pair, fidelity, k_w, min_norm_i_minus_kw};
use crate::channel_fisher::{path_length, ChannelFamily, PathLength, PathOptions, PathVariant};
use crate::channels::{check_power_caps, KrausChannel};
use crate::document::ChannelDocument;
use crate::error::{Error, Result};
use crate::matlin::{self, ComplexMatrix};
use crate::sdp_core::{
    self, lmi_contraction, lmi_opnorm_ub, lmi_quad_epigraph, AffineMatrix, LmiBlock, SdpOptions,
    SdpProblem, Sense,
};
use crate::tensor_symmetry::fidelity_tensor_power;

/// Default for the fidelity at or below which two channels count as
/// orthogonal; also the zero-angle cut of the angle bound.
pub const ORTHO_THRESHOLD: f64 = 1e-7;
/// Subtracted before taking ceilings so that exact integer ratios do not round up.
pub const CEIL_SLACK: f64 = 1e-9;
/// Search cap for the parallel bounds.
pub const PARALLEL_CAP: u64 = 1_000_000;

/// `ceil(pi / (2 theta))`.
pub fn lb_angle_from_theta(theta: f64, ortho: f64) -> Result<u64> {
    if !(theta > ortho) {
        return Err(Error::NotFound(format!(
            "angle {theta:.3e} is zero at tolerance: never perfectly distinguishable by this bound"
        )));
    }
    Ok(((FRAC_PI_2 / theta) - CEIL_SLACK).ceil().max(1.0) as u64)
}

/// Angle bound from a fidelity computed at solver tolerance `tol`. A fidelity
/// within `10 tol` of one is an unresolvable angle, not a huge bound.
pub fn lb_angle_from_fidelity(f: f64, tol: f64, ortho: f64) -> Result<u64> {
    if 1.0 - f <= 10.0 * tol {
        return Err(Error::NotFound(format!(
            "fidelity {f} is one within solver tolerance: angle not resolvable"
        )));
    }
    lb_angle_from_theta(f.acos(), ortho)
}

/// Angle bound with the angle it was computed from.
pub fn lb_angle(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<(u64, f64)> {
    let f = fidelity(a, b, tol)?;
    Ok((lb_angle_from_fidelity(f.fidelity, tol, ORTHO_THRESHOLD)?, f.angle))
}

/// `||2I - K_W - K_W^dag||` and `||I - K_W||` for a contraction `W`.
pub fn parallel_coefficients(
    a: &KrausChannel,
    b: &KrausChannel,
    w: &ComplexMatrix,
) -> Result<(f64, f64)> {
    if matlin::op_norm(w)? > 1.0 + 1e-8 {
        return Err(Error::InvalidArgument("W is not a contraction".into()));
    }
    let k = k_w(a, b, w)?;
    let id = matlin::identity(a.dim_in());
    let c1 = matlin::op_norm(&(id.scale(2.0) - &k - k.adjoint()))?;
    let c2 = matlin::op_norm(&(id - k))?;
    Ok((c1, c2))
}

/// `N ||2I - K_W - K_W^dag|| + N(N-1) ||I - K_W||^2`, an upper bound on
/// `2 - 2 cos(theta_N)` for every contraction `W`.
pub fn nparallel_upper_bound(
    a: &KrausChannel,
    b: &KrausChannel,
    n: u64,
    w: &ComplexMatrix,
) -> Result<f64> {
    let (c1, c2) = parallel_coefficients(a, b, w)?;
    let n = n as f64;
    Ok(n * c1 + n * (n - 1.0) * c2 * c2)
}

/// Smallest `N >= 1` with `N c1 + N(N-1) c2sq >= 2`.
pub fn smallest_n_quadratic(c1: f64, c2sq: f64) -> Option<u64> {
    let value = |n: u64| {
        let n = n as f64;
        n * c1 + n * (n - 1.0) * c2sq
    };
    if value(PARALLEL_CAP) < 2.0 {
        return None;
    }
    // c2sq N^2 + (c1 - c2sq) N - 2 = 0
    let root = if c2sq > 0.0 {
        let bq = c1 - c2sq;
        (-bq + (bq * bq + 8.0 * c2sq).sqrt()) / (2.0 * c2sq)
    } else {
        2.0 / c1
    };
    let mut n = (root - CEIL_SLACK).ceil().max(1.0) as u64;
    while n > 1 && value(n - 1) >= 2.0 {
        n -= 1;
    }
    while value(n) < 2.0 {
        n += 1;
    }
    Some(n)
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedWBound {
    /// `None` when no `N` up to the cap reaches 2.
    pub n: Option<u64>,
    pub norm_two_minus_herm: f64,
    pub norm_i_minus_kw: f64,
}

/// Parallel bound with the contraction minimizing `||I - K_W||`, held fixed
/// for every `N`.
pub fn lb_parallel_fixed_w(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<FixedWBound> {
    let (_, w) = min_norm_i_minus_kw(a, b, tol)?;
    let (c1, c2) = parallel_coefficients(a, b, &w)?;
    Ok(FixedWBound {
        n: smallest_n_quadratic(c1, c2 * c2),
        norm_two_minus_herm: c1,
        norm_i_minus_kw: c2,
    })
}

/// `min_{||W|| <= 1} N ||2I - K_W - K_W^dag|| + N(N-1) ||I - K_W||^2`.
pub fn parallel_min_at(a: &KrausChannel, b: &KrausChannel, n: u64, tol: f64) -> Result<f64> {
    check_pair(a, b)?;
    let (a, _, b, _) = channel_fidelity::orthogonal_pair(a, b)?;
    let d = a.dim_in();
    let mut prob = SdpProblem::new(Sense::Minimize);
    let w = prob.add_complex_matrix(a.kraus_count(), b.kraus_count());
    let t1 = prob.add_var();
    let nf = n as f64;
    prob.set_objective(t1, nf);
    let g = channel_fidelity::gram_blocks(a.kraus(), b.kraus());
    let (k, herm) = channel_fidelity::kw_pencils(&w, &g, d);
    let two_minus = AffineMatrix::identity(d).scaled(2.0).plus(&herm.scaled(-1.0))?;
    let mut t1_eye = AffineMatrix::zero(d, d);
    t1_eye.add_dense_term(t1, &matlin::identity(d));
    prob.add_lmi(lmi_contraction(&w.affine())?)?;
    // t1 I -/+ (2I - K_W - K_W^dag) >= 0; the second side is implied by
    // ||W|| <= 1 and kept as a guard.
    prob.add_lmi(LmiBlock::new(t1_eye.plus(&two_minus.scaled(-1.0))?)?)?;
    prob.add_lmi(LmiBlock::new(t1_eye.plus(&two_minus)?)?)?;
    if n > 1 {
        let t2 = prob.add_var();
        let s = prob.add_var();
        prob.set_objective(s, nf * (nf - 1.0));
        let resid = AffineMatrix::identity(d).plus(&k.scaled(-1.0))?;
        prob.add_lmi(lmi_opnorm_ub(&resid, t2)?)?;
        prob.add_lmi(lmi_quad_epigraph(t2, s)?)?;
    }
    let sol = sdp_core::solve(&prob, &SdpOptions::with_tol(tol))?.require_optimal()?;
    Ok(sol.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerNBound {
    pub n: Option<u64>,
    /// `(N, optimal value)` for every `N` solved.
    pub trace: Vec<(u64, f64)>,
}

/// Parallel bound with the contraction re-optimized for each `N`, searched
/// upward from `N = 1`.
pub fn lb_parallel_per_n(
    a: &KrausChannel,
    b: &KrausChannel,
    max_n: u64,
    tol: f64,
    ortho: f64,
) -> Result<PerNBound> {
    let mut trace = Vec::new();
    let mut n = 1;
    while n <= max_n {
        let v = parallel_min_at(a, b, n, tol)
            .map_err(|e| Error::Numeric(format!("per-N parallel program at N = {n}: {e}")))?;
        trace.push((n, v));
        if v >= 2.0 - ortho {
            return Ok(PerNBound { n: Some(n), trace });
        }
        n += 1;
    }
    Ok(PerNBound { n: None, trace })
}

#[derive(Clone, Debug, Serialize)]
pub struct PathBound {
    pub n: Option<u64>,
    pub variant: PathVariant,
    pub lengths: Vec<PathLength>,
}

/// Fails unless the family runs from `a` to `b` (Choi entries within 1e-8).
pub fn check_endpoints(a: &KrausChannel, b: &KrausChannel, family: &dyn ChannelFamily) -> Result<()> {
    let (lo, hi) = family.domain();
    if family.evaluate(lo)?.approx_eq(a, 1e-8) && family.evaluate(hi)?.approx_eq(b, 1e-8) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "path endpoints do not match the channel pair".into(),
        ))
    }
}

/// Smallest `N` whose path length reaches `pi/2`. The scaled variant is linear
/// in `N` and needs one evaluation. The exact variant starts from the scaled
/// answer, below which it cannot succeed.
pub fn lb_path(
    a: &KrausChannel,
    b: &KrausChannel,
    family: &dyn ChannelFamily,
    variant: PathVariant,
    grid: usize,
    max_n: u64,
    opts: &PathOptions,
) -> Result<PathBound> {
    check_endpoints(a, b, family)?;
    let target = FRAC_PI_2 - 1e-6;
    let single = path_length(family, 1, grid, PathVariant::Scaled, opts)?;
    let scaled_n = if single.value > single.resolution {
        let n = ((target / single.value) - CEIL_SLACK).ceil().max(1.0);
        (n <= PARALLEL_CAP as f64).then_some(n as u64)
    } else {
        None
    };
    let mut lengths = vec![single.clone()];
    match variant {
        PathVariant::Scaled => {
            if let Some(n) = scaled_n {
                let mut at_n = single;
                at_n.copies = n as usize;
                at_n.value *= n as f64;
                lengths.push(at_n);
            }
            Ok(PathBound {
                n: scaled_n,
                variant,
                lengths,
            })
        }
        PathVariant::Exact => {
            let Some(start) = scaled_n else {
                return Ok(PathBound {
                    n: None,
                    variant,
                    lengths,
                });
            };
            lengths.clear();
            for n in start..=max_n {
                let l = path_length(family, n as usize, grid, PathVariant::Exact, opts)?;
                let done = l.value >= target;
                lengths.push(l);
                if done {
                    return Ok(PathBound {
                        n: Some(n),
                        variant,
                        lengths,
                    });
                }
            }
            Ok(PathBound {
                n: None,
                variant,
                lengths,
            })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectSearch {
    pub n: Option<u64>,
    /// `(N, fidelity of the N-fold powers)`.
    pub trace: Vec<(u64, f64)>,
    /// Why the search stopped without reaching orthogonality.
    pub stopped: Option<String>,
}

/// Smallest `N <= max_n` with `F(a^(x)N, b^(x)N) <= ortho`.
pub fn direct_min_n(
    a: &KrausChannel,
    b: &KrausChannel,
    max_n: u64,
    tol: f64,
    ortho: f64,
) -> Result<DirectSearch> {
    check_pair(a, b)?;
    let mut trace = Vec::new();
    for n in 1..=max_n {
        let caps = check_power_caps(a, n as usize).and(check_power_caps(b, n as usize));
        if let Err(e) = caps {
            return Ok(DirectSearch {
                n: None,
                trace,
                stopped: Some(e.to_string()),
            });
        }
        let f = if n == 1 {
            fidelity(a, b, tol)?.fidelity
        } else {
            fidelity_tensor_power(a, b, n as usize, tol)?.fidelity
        };
        trace.push((n, f));
        if f <= ortho {
            return Ok(DirectSearch {
                n: Some(n),
                trace,
                stopped: None,
            });
        }
    }
    Ok(DirectSearch {
        n: None,
        trace,
        stopped: Some(format!("no orthogonality up to N = {max_n}")),
    })
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub sdp_tol: f64,
    pub ortho_threshold: f64,
    pub max_n: u64,
    pub grid: usize,
    pub path: PathOptions,
    /// Path variants to evaluate when a family is given.
    pub path_variants: Vec<PathVariant>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            sdp_tol: 1e-9,
            ortho_threshold: ORTHO_THRESHOLD,
            max_n: 8,
            grid: 41,
            path: PathOptions::default(),
            path_variants: vec![PathVariant::Scaled, PathVariant::Exact],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub pair: [ChannelDocument; 2],
    pub fidelity: Option<f64>,
    pub theta: Option<f64>,
    pub lb_angle: Option<u64>,
    pub lb_parallel_fixed_w: Option<u64>,
    pub lb_parallel_per_n: Option<u64>,
    /// Tightest path bound over the evaluated variants.
    pub lb_path: Option<u64>,
    pub direct_min_n: Option<u64>,
    pub fixed_w: Option<FixedWBound>,
    pub per_n: Option<PerNBound>,
    pub paths: Vec<PathBound>,
    pub direct: Option<DirectSearch>,
    /// `(bound, message)` for every bound that could not be computed.
    pub errors: Vec<(String, String)>,
    /// Ordering invariants that failed.
    pub violations: Vec<String>,
}

/// Runs every applicable bound; failures are recorded per bound.
pub fn report(
    a: &KrausChannel,
    b: &KrausChannel,
    family: Option<&dyn ChannelFamily>,
    opts: &ReportOptions,
) -> Result<BoundReport> {
    check_pair(a, b)?;
    if let Some(fam) = family {
        check_endpoints(a, b, fam)?;
    }
    let tol = opts.sdp_tol;
    let mut r = BoundReport {
        pair: [ChannelDocument::from_channel(a), ChannelDocument::from_channel(b)],
        fidelity: None,
        theta: None,
        lb_angle: None,
        lb_parallel_fixed_w: None,
        lb_parallel_per_n: None,
        lb_path: None,
        direct_min_n: None,
        fixed_w: None,
        per_n: None,
        paths: Vec::new(),
        direct: None,
        errors: Vec::new(),
        violations: Vec::new(),
    };
    let fail = |r: &mut BoundReport, name: &str, e: Error| {
        r.errors.push((name.to_string(), e.to_string()));
    };

    match fidelity(a, b, tol) {
        Ok(f) => {
            r.fidelity = Some(f.fidelity);
            r.theta = Some(f.angle);
            match lb_angle_from_fidelity(f.fidelity, tol, opts.ortho_threshold) {
                Ok(n) => r.lb_angle = Some(n),
                Err(e) => fail(&mut r, "lb_angle", e),
            }
        }
        Err(e) => fail(&mut r, "fidelity", e),
    }
    match lb_parallel_fixed_w(a, b, tol) {
        Ok(fw) => {
            r.lb_parallel_fixed_w = fw.n;
            r.fixed_w = Some(fw);
        }
        Err(e) => fail(&mut r, "lb_parallel_fixed_w", e),
    }
    // The per-N value never exceeds the fixed-contraction value, so the
    // fixed-contraction answer bounds where the search can stop.
    let per_n_cap = r.lb_parallel_fixed_w.unwrap_or(1).max(opts.max_n) + 64;
    if r.fixed_w.as_ref().is_some_and(|fw| fw.n.is_none()) {
        r.errors.push((
            "lb_parallel_per_n".into(),
            "fixed-contraction bound is unbounded, so is the per-N bound".into(),
        ));
    } else {
        match lb_parallel_per_n(a, b, per_n_cap, tol, opts.ortho_threshold) {
            Ok(p) => {
                r.lb_parallel_per_n = p.n;
                r.per_n = Some(p);
            }
            Err(e) => fail(&mut r, "lb_parallel_per_n", e),
        }
    }
    if let Some(fam) = family {
        for &variant in &opts.path_variants {
            match lb_path(a, b, fam, variant, opts.grid, opts.max_n, &opts.path) {
                Ok(p) => r.paths.push(p),
                Err(e) => fail(&mut r, &format!("lb_path_{variant:?}").to_lowercase(), e),
            }
        }
        r.lb_path = r.paths.iter().filter_map(|p| p.n).max();
    }
    match direct_min_n(a, b, opts.max_n, tol, opts.ortho_threshold) {
        Ok(d) => {
            r.direct_min_n = d.n;
            r.direct = Some(d);
        }
        Err(e) => fail(&mut r, "direct_min_n", e),
    }

    if let Some(direct) = r.direct_min_n {
        for (name, lb) in [
            ("lb_angle", r.lb_angle),
            ("lb_parallel_fixed_w", r.lb_parallel_fixed_w),
            ("lb_parallel_per_n", r.lb_parallel_per_n),
            ("lb_path", r.lb_path),
        ] {
            if let Some(lb) = lb.filter(|&lb| lb > direct) {
                r.violations.push(format!("{name} = {lb} exceeds direct_min_n = {direct}"));
            }
        }
    }
    if let (Some(fixed), Some(per_n)) = (r.lb_parallel_fixed_w, r.lb_parallel_per_n) {
        if per_n < fixed {
            r.violations.push(format!(
                "lb_parallel_per_n = {per_n} below lb_parallel_fixed_w = {fixed}"
            ));
        }
    }
    Ok(r)
}
