//! Run configuration and builtin channel families.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::channel_fisher::{
    ChannelFamily, DephasingFamily, DepolarizingFamily, MixturePath, PathOptions, RotationFamily,
    UnitaryFamily,
};
use crate::discrimination::{ReportOptions, ORTHO_THRESHOLD};
use crate::document::{load_channel, load_matrix, FamilySpec};
use crate::error::{Error, Result};
use crate::matlin::{self, c};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub sdp_tol: f64,
    pub ortho_threshold: f64,
    /// Finite-difference step of point Fisher estimates.
    pub fd_step: f64,
    /// Finite-difference step inside path-length integrands.
    pub path_step: f64,
    pub grid: usize,
    pub max_n: u64,
    pub seed: u64,
    pub output: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sdp_tol: 1e-9,
            ortho_threshold: ORTHO_THRESHOLD,
            fd_step: 1e-3,
            path_step: PathOptions::default().step,
            grid: 41,
            max_n: 8,
            seed: 42,
            output: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(1e-12..=1e-2).contains(&self.sdp_tol) {
            return bad("--sdp-tol must lie in [1e-12, 1e-2]");
        }
        if !(1e-12..=1e-2).contains(&self.ortho_threshold) {
            return bad("--ortho-threshold must lie in [1e-12, 1e-2]");
        }
        if !(1e-6..=1e-1).contains(&self.fd_step) {
            return bad("--fd-step must lie in [1e-6, 1e-1]");
        }
        if !(1e-6..=1e-1).contains(&self.path_step) {
            return bad("--path-step must lie in [1e-6, 1e-1]");
        }
        if self.grid < 5 {
            return bad("--grid must be at least 5");
        }
        if self.max_n == 0 || self.max_n > 64 {
            return bad("--max-n must lie in [1, 64]");
        }
        Ok(())
    }

    pub fn path_options(&self) -> PathOptions {
        PathOptions {
            step: self.path_step,
            sdp_tol: self.sdp_tol,
            ..PathOptions::default()
        }
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            sdp_tol: self.sdp_tol,
            ortho_threshold: self.ortho_threshold,
            max_n: self.max_n,
            grid: self.grid,
            path: self.path_options(),
            ..ReportOptions::default()
        }
    }
}

pub const FAMILY_NAMES: [&str; 5] = [
    "unitary-generator",
    "rotation",
    "dephasing",
    "depolarizing",
    "mixture-path",
];

struct Params<'a> {
    spec: &'a FamilySpec,
    allowed: &'a [&'a str],
}

impl Params<'_> {
    fn check(&self) -> Result<()> {
        for k in self.spec.params.keys() {
            if !self.allowed.contains(&k.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "family {} does not take parameter '{k}' (accepts: {})",
                    self.spec.name,
                    self.allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.spec.params.get(key).map(String::as_str)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.str(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("parameter {key}={v} is not a number"))),
        }
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.str(key).ok_or_else(|| {
            Error::InvalidArgument(format!("family {} needs parameter '{key}'", self.spec.name))
        })
    }
}

/// Builds a builtin family. Files named in parameters resolve relative to the
/// working directory.
///
/// - `unitary-generator`: `generator=FILE` or `pauli=x|y|z`, `scale` (1), `lo` (0), `hi` (pi)
/// - `rotation`: `lo` (-pi), `hi` (pi)
/// - `dephasing`, `depolarizing`: no parameters, domain `[0, 1]`
/// - `mixture-path`: `a=FILE`, `b=FILE`, domain `[0, 1]`
pub fn build_family(spec: &FamilySpec) -> Result<Box<dyn ChannelFamily>> {
    let p = |allowed| Params { spec, allowed };
    match spec.name.as_str() {
        "unitary-generator" => {
            let p = p(&["generator", "pauli", "scale", "lo", "hi"]);
            p.check()?;
            let base = match (p.str("generator"), p.str("pauli")) {
                (Some(file), None) => load_matrix(Path::new(file))?,
                (None, Some("x")) => matlin::pauli_x(),
                (None, Some("y")) => matlin::pauli_y(),
                (None, Some("z")) => matlin::pauli_z(),
                (None, Some(other)) => {
                    return Err(Error::InvalidArgument(format!("unknown pauli '{other}'")))
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "unitary-generator needs exactly one of generator=FILE or pauli=x|y|z"
                            .into(),
                    ))
                }
            };
            let scale = p.f64_or("scale", 1.0)?;
            let domain = (p.f64_or("lo", 0.0)?, p.f64_or("hi", PI)?);
            Ok(Box::new(UnitaryFamily::new(base * c(scale, 0.0), domain)?))
        }
        "rotation" => {
            let p = p(&["lo", "hi"]);
            p.check()?;
            let domain = (p.f64_or("lo", -PI)?, p.f64_or("hi", PI)?);
            if !(domain.0 < domain.1) {
                return Err(Error::InvalidArgument("rotation domain needs lo < hi".into()));
            }
            Ok(Box::new(RotationFamily { domain }))
        }
        "dephasing" => {
            p(&[]).check()?;
            Ok(Box::new(DephasingFamily))
        }
        "depolarizing" => {
            p(&[]).check()?;
            Ok(Box::new(DepolarizingFamily))
        }
        "mixture-path" => {
            let p = p(&["a", "b"]);
            p.check()?;
            let a = load_channel(Path::new(p.required("a")?))?;
            let b = load_channel(Path::new(p.required("b")?))?;
            Ok(Box::new(MixturePath::new(a, b)?))
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown family '{other}' (builtin: {})",
            FAMILY_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.grid, 41);
        assert_eq!(cfg.seed, 42);
        let bad = RunConfig {
            sdp_tol: 1.0,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn builtin_families() {
        let spec = FamilySpec::from_flags("unitary-generator", Some("pauli=z,scale=0.5")).unwrap();
        let fam = build_family(&spec).unwrap();
        assert_eq!(fam.domain(), (0.0, PI));
        assert_eq!(fam.kraus_count(), 1);
        let spec = FamilySpec::from_flags("dephasing", None).unwrap();
        assert_eq!(build_family(&spec).unwrap().kraus_count(), 2);
        let spec = FamilySpec::from_flags("dephasing", Some("lo=0")).unwrap();
        assert!(build_family(&spec).is_err());
        let spec = FamilySpec::from_flags("spiral", None).unwrap();
        assert!(build_family(&spec).is_err());
    }
}
