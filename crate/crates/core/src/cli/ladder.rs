//! The worked example: rotation about x by 0.3 against dephasing 0.5, with the
//! mixture path between them.

use serde::Serialize;

use crate::channel_fisher::{MixturePath, PathVariant};
use crate::channels::{dephasing, rotation_x};
use crate::discrimination::{report, BoundReport};
use crate::error::Result;

use super::config::RunConfig;

pub const ROTATION_ANGLE: f64 = 0.3;
pub const DEPHASING: f64 = 0.5;

/// Expected ladder of the worked example.
pub const EXPECTED: [(&str, u64); 5] = [
    ("lb_angle", 3),
    ("lb_path", 4),
    ("lb_parallel_fixed_w", 5),
    ("lb_parallel_per_n", 6),
    ("direct_min_n", 6),
];

#[derive(Clone, Debug, Serialize)]
pub struct LadderRow {
    pub bound: String,
    pub expected: u64,
    pub computed: Option<u64>,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Ladder {
    pub rotation_angle: f64,
    pub dephasing: f64,
    pub rows: Vec<LadderRow>,
    pub all_pass: bool,
    pub report: BoundReport,
}

fn show(n: Option<u64>) -> String {
    n.map_or_else(|| "none".to_string(), |n| n.to_string())
}

/// Runs every bound on the worked example and compares with [`EXPECTED`].
/// The path row passes when either variant hits the expected value.
pub fn worked_example(cfg: &RunConfig) -> Result<Ladder> {
    let a = rotation_x(ROTATION_ANGLE);
    let b = dephasing(DEPHASING)?;
    let family = MixturePath::new(a.clone(), b.clone())?;
    let r = report(&a, &b, Some(&family), &cfg.report_options())?;
    let path_of = |v: PathVariant| r.paths.iter().find(|p| p.variant == v).and_then(|p| p.n);
    let (scaled, exact) = (path_of(PathVariant::Scaled), path_of(PathVariant::Exact));
    let mut rows = Vec::new();
    for (name, expected) in EXPECTED {
        let (computed, detail) = match name {
            "lb_angle" => (
                r.lb_angle,
                r.theta.map_or(String::new(), |t| format!("angle {t:.10}")),
            ),
            "lb_path" => {
                let hit = [scaled, exact].into_iter().flatten().find(|&n| n == expected);
                (
                    hit.or(r.lb_path),
                    format!("scaled {}, exact {}", show(scaled), show(exact)),
                )
            }
            "lb_parallel_fixed_w" => (
                r.lb_parallel_fixed_w,
                r.fixed_w.as_ref().map_or(String::new(), |f| {
                    format!(
                        "c1 {:.6}, c2 {:.6}",
                        f.norm_two_minus_herm, f.norm_i_minus_kw
                    )
                }),
            ),
            "lb_parallel_per_n" => (
                r.lb_parallel_per_n,
                r.per_n.as_ref().map_or(String::new(), |p| {
                    p.trace
                        .last()
                        .map_or(String::new(), |(n, v)| format!("value {v:.6} at N = {n}"))
                }),
            ),
            _ => (
                r.direct_min_n,
                r.direct.as_ref().map_or(String::new(), |d| {
                    d.trace
                        .last()
                        .map_or(String::new(), |(n, f)| format!("fidelity {f:.3e} at N = {n}"))
                }),
            ),
        };
        rows.push(LadderRow {
            bound: name.to_string(),
            expected,
            computed,
            pass: computed == Some(expected),
            detail,
        });
    }
    Ok(Ladder {
        rotation_angle: ROTATION_ANGLE,
        dephasing: DEPHASING,
        all_pass: rows.iter().all(|r| r.pass),
        rows,
        report: r,
    })
}

pub fn render(l: &Ladder) -> String {
    let mut s = format!(
        "rotation_x({}) vs dephasing({})\n{:<22}{:>9}{:>9}  {:<6}detail\n",
        l.rotation_angle, l.dephasing, "bound", "expected", "computed", "check"
    );
    for r in &l.rows {
        s += &format!(
            "{:<22}{:>9}{:>9}  {:<6}{}\n",
            r.bound,
            r.expected,
            show(r.computed),
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    for (name, msg) in &l.report.errors {
        s += &format!("error {name}: {msg}\n");
    }
    for v in &l.report.violations {
        s += &format!("violation: {v}\n");
    }
    s
}
