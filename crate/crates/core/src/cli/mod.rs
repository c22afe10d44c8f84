//! Command-line front end. [`run`] parses arguments, dispatches one command and
//! returns the process exit code: 0 on success, 1 when a computation fails,
//! 2 on usage errors.

pub mod config;
pub mod ladder;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::channel_fidelity::{self, diamond_bounds_from_fidelity, fidelity, fidelity_problem};
use crate::channel_fisher::{
    path_length, precision_bound, qfi, ChannelFamily, MixturePath, PathVariant, QfiOptions,
};
use crate::channels::KrausChannel;
use crate::discrimination::{self, BoundReport, ReportOptions};
use crate::document::{
    load_channel, load_matrix, load_povm, load_unitary, matrix_to_rows, FamilySpec, FORMAT_VERSION,
};
use crate::error::{Error, Result};
use crate::oracles::{self, DensityMatrix, Probe, ProbeSearch};
use crate::unitary_geometry;

pub use config::{build_family, OutputFormat, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "chanmetric",
    version,
    about = "Fidelity, angle and Bures distance of quantum channels, and discrimination bounds"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Duality-gap tolerance of every semidefinite program.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub sdp_tol: f64,
    /// Fidelity at or below which two channels count as orthogonal.
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub ortho_threshold: f64,
    /// Finite-difference step of point Fisher estimates.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub fd_step: f64,
    /// Finite-difference step inside path-length integrands.
    #[arg(long, global = true, default_value_t = 1e-2)]
    pub path_step: f64,
    /// Initial Simpson grid of path lengths.
    #[arg(long, global = true, default_value_t = 41)]
    pub grid: usize,
    /// Largest number of uses the searches try.
    #[arg(long, global = true, default_value_t = 8)]
    pub max_n: u64,
    /// Seed of the randomized oracles.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
}

impl GlobalArgs {
    pub fn config(&self) -> RunConfig {
        RunConfig {
            sdp_tol: self.sdp_tol,
            ortho_threshold: self.ortho_threshold,
            fd_step: self.fd_step,
            path_step: self.path_step,
            grid: self.grid,
            max_n: self.max_n,
            seed: self.seed,
            output: self.output,
        }
    }
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// First channel document.
    pub a: PathBuf,
    /// Second channel document.
    pub b: PathBuf,
    /// Write the fidelity program as sparse triplets to this file.
    #[arg(long)]
    pub dump_sdp: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct FamilyArgs {
    /// Builtin family: unitary-generator, rotation, dephasing, depolarizing, mixture-path.
    #[arg(long)]
    pub family: Option<String>,
    /// Family file with `format_version`, `name` and `params`.
    #[arg(long)]
    pub family_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FamilySelect {
    #[command(flatten)]
    pub which: FamilyArgs,
    /// Family parameters as `key=value,key=value`.
    #[arg(long, conflicts_with = "family_file")]
    pub params: Option<String>,
}

impl FamilySelect {
    fn spec(&self) -> Result<FamilySpec> {
        match (&self.which.family, &self.which.family_file) {
            (Some(name), None) => FamilySpec::from_flags(name, self.params.as_deref()),
            (None, Some(path)) => FamilySpec::load(path),
            _ => Err(Error::InvalidArgument(
                "give exactly one of --family or --family-file".into(),
            )),
        }
    }

    fn build(&self) -> Result<Box<dyn ChannelFamily>> {
        build_family(&self.spec()?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Exact,
    Scaled,
}

impl From<VariantArg> for PathVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Exact => PathVariant::Exact,
            VariantArg::Scaled => PathVariant::Scaled,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathKind {
    /// `(1 - x) A + x B`.
    Mixture,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Angle of the unitary channel of a unitary document to the identity.
    Cu { file: PathBuf },
    /// Channel fidelity with the optimal mixing contraction.
    Fidelity {
        #[command(flatten)]
        pair: PairArgs,
        /// Solve both orders and fail if they disagree.
        #[arg(long)]
        checked: bool,
    },
    /// Angle `arccos F` between two channels.
    Angle {
        #[command(flatten)]
        pair: PairArgs,
        /// Read unitaries and use the closed form instead of the program.
        #[arg(long)]
        unitary: bool,
    },
    /// Bures distance `sqrt(2 - 2F)`.
    Bures {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Diamond-norm interval implied by the fidelity.
    DiamondBounds {
        #[command(flatten)]
        pair: PairArgs,
        /// Also compute the diamond norm itself.
        #[arg(long)]
        oracle: bool,
    },
    /// Fisher information of a family at a point.
    Qfi {
        #[command(flatten)]
        family: FamilySelect,
        #[arg(long)]
        x: f64,
        /// Step of the symmetric pair; defaults to --fd-step.
        #[arg(long)]
        step: Option<f64>,
        /// Parallel copies.
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Plain finite difference without the Richardson combination.
        #[arg(long)]
        no_richardson: bool,
        /// Also report the precision bound after this many repetitions.
        #[arg(long)]
        repeats: Option<u64>,
    },
    /// Length of a family's path in the angle metric.
    PathLength {
        #[command(flatten)]
        family: FamilySelect,
        /// Parallel copies.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Exact)]
        variant: VariantArg,
    },
    /// Every lower bound on the uses needed to tell A from B perfectly.
    Discriminate {
        a: PathBuf,
        b: PathBuf,
        /// Path from A to B for the path bound.
        #[arg(long, value_enum)]
        path: Option<PathKind>,
        /// Only this path variant (default both).
        #[arg(long, value_enum, requires = "path")]
        variant: Option<VariantArg>,
    },
    /// Ladder of bounds for rotation_x(0.3) against dephasing(0.5), checked
    /// against the expected values 3, 4, 5, 6 and 6.
    ReproducePaper,
    /// Brute-force and independent reference computations.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Uhlmann fidelity of two density-matrix documents.
    StateFidelity { a: PathBuf, b: PathBuf },
    /// Minimum over probe states of the output fidelity.
    MinOutputFidelity {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Ancilla dimension (default the input dimension).
        #[arg(long)]
        ancilla_dim: Option<usize>,
    },
    /// Minimum over states of `|<v|U|v>|` for a unitary document.
    MinOverlap {
        file: PathBuf,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Diamond norm of A - B.
    Diamond { a: PathBuf, b: PathBuf },
    /// Classical Fisher information of a measurement on the probe output.
    ClassicalFisher {
        #[command(flatten)]
        family: FamilySelect,
        #[arg(long)]
        x: f64,
        /// POVM document.
        #[arg(long)]
        povm: PathBuf,
        /// Probe density-matrix document (default maximally entangled).
        #[arg(long)]
        probe: Option<PathBuf>,
        /// Defaults to --fd-step.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Fisher information of the probe output state.
    StateFisher {
        #[command(flatten)]
        family: FamilySelect,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        probe: Option<PathBuf>,
        #[arg(long)]
        step: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cu { .. } => "cu",
            Command::Fidelity { .. } => "fidelity",
            Command::Angle { .. } => "angle",
            Command::Bures { .. } => "bures",
            Command::DiamondBounds { .. } => "diamond-bounds",
            Command::Qfi { .. } => "qfi",
            Command::PathLength { .. } => "path-length",
            Command::Discriminate { .. } => "discriminate",
            Command::ReproducePaper => "reproduce-paper",
            Command::Oracle(o) => match o {
                OracleCommand::StateFidelity { .. } => "oracle state-fidelity",
                OracleCommand::MinOutputFidelity { .. } => "oracle min-output-fidelity",
                OracleCommand::MinOverlap { .. } => "oracle min-overlap",
                OracleCommand::Diamond { .. } => "oracle diamond",
                OracleCommand::ClassicalFisher { .. } => "oracle classical-fisher",
                OracleCommand::StateFisher { .. } => "oracle state-fisher",
            },
        }
    }
}

/// A command's result as JSON plus its text rendering.
pub struct Outcome {
    pub result: Value,
    pub text: String,
}

/// JSON of a serializable result; every result type here serializes.
fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn kv(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn simple(rows: Vec<(&str, f64)>) -> Outcome {
    let mut map = serde_json::Map::new();
    for (k, v) in &rows {
        map.insert(k.to_string(), to_value(v));
    }
    Outcome {
        text: kv(&rows.iter().map(|(k, v)| (*k, fmt(*v))).collect::<Vec<_>>()),
        result: Value::Object(map),
    }
}

fn load_pair(p: &PairArgs) -> Result<(KrausChannel, KrausChannel)> {
    let a = load_channel(&p.a)?;
    let b = load_channel(&p.b)?;
    if let Some(path) = &p.dump_sdp {
        let (prob, ..) = fidelity_problem(&a, &b)?;
        std::fs::write(path, prob.dump_triplets())?;
    }
    Ok((a, b))
}

fn load_probe(path: &Option<PathBuf>) -> Result<Probe> {
    match path {
        None => Ok(Probe::MaxEntangled),
        Some(p) => Ok(Probe::State(DensityMatrix::new(load_matrix(p)?)?)),
    }
}

fn render_report(r: &BoundReport) -> String {
    let show = |n: Option<u64>| n.map_or_else(|| "none".to_string(), |n| n.to_string());
    let mut rows = vec![
        ("fidelity", r.fidelity.map_or("none".into(), fmt)),
        ("angle", r.theta.map_or("none".into(), fmt)),
        ("lb_angle", show(r.lb_angle)),
        ("lb_parallel_fixed_w", show(r.lb_parallel_fixed_w)),
        ("lb_parallel_per_n", show(r.lb_parallel_per_n)),
    ];
    let path_names: Vec<String> = r
        .paths
        .iter()
        .map(|p| format!("lb_path_{}", to_value(&p.variant).as_str().unwrap_or("?")))
        .collect();
    for (p, name) in r.paths.iter().zip(&path_names) {
        rows.push((name.as_str(), show(p.n)));
    }
    rows.push(("direct_min_n", show(r.direct_min_n)));
    let mut s = kv(&rows);
    for (name, msg) in &r.errors {
        s += &format!("error {name}: {msg}\n");
    }
    for v in &r.violations {
        s += &format!("violation: {v}\n");
    }
    s
}

/// Runs one parsed command.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let tol = cfg.sdp_tol;
    Ok(match command {
        Command::Cu { file } => {
            let u = load_unitary(file)?;
            simple(vec![
                ("c", unitary_geometry::c_func(&u)?),
                ("norm_g", unitary_geometry::norm_g(&u)?),
                ("norm_max", unitary_geometry::norm_max(&u)?),
            ])
        }
        Command::Fidelity { pair, checked } => {
            let (a, b) = load_pair(pair)?;
            let f = if *checked {
                channel_fidelity::fidelity_checked(&a, &b, tol)?
            } else {
                fidelity(&a, &b, tol)?
            };
            let result = json!({
                "fidelity": f.fidelity,
                "angle": f.angle,
                "bures": f.bures,
                "raw": f.raw,
                "gap": f.gap,
                "iterations": f.iterations,
                "w_opt": matrix_to_rows(&f.w_opt),
            });
            Outcome {
                text: kv(&[
                    ("fidelity", fmt(f.fidelity)),
                    ("angle", fmt(f.angle)),
                    ("bures", fmt(f.bures)),
                    ("gap", fmt(f.gap)),
                    ("iterations", f.iterations.to_string()),
                ]),
                result,
            }
        }
        Command::Angle { pair, unitary } => {
            if *unitary {
                if pair.dump_sdp.is_some() {
                    return Err(Error::InvalidArgument(
                        "--dump-sdp has no program to dump with --unitary".into(),
                    ));
                }
                let u1 = load_unitary(&pair.a)?;
                let u2 = load_unitary(&pair.b)?;
                let angle = unitary_geometry::theta_qc_unitary(&u1, &u2)?;
                simple(vec![("angle", angle), ("fidelity", angle.cos())])
            } else {
                let (a, b) = load_pair(pair)?;
                let f = fidelity(&a, &b, tol)?;
                simple(vec![("angle", f.angle), ("fidelity", f.fidelity)])
            }
        }
        Command::Bures { pair } => {
            let (a, b) = load_pair(pair)?;
            let f = fidelity(&a, &b, tol)?;
            simple(vec![("bures", f.bures), ("fidelity", f.fidelity)])
        }
        Command::DiamondBounds { pair, oracle } => {
            let (a, b) = load_pair(pair)?;
            let f = fidelity(&a, &b, tol)?;
            let db = diamond_bounds_from_fidelity(f.fidelity);
            let mut rows = vec![
                ("lower", db.lower),
                ("upper", db.upper),
                ("fidelity", f.fidelity),
            ];
            if *oracle {
                rows.push(("diamond_norm", oracles::diamond_norm(&a, &b, tol)?));
            }
            simple(rows)
        }
        Command::Qfi {
            family,
            x,
            step,
            copies,
            no_richardson,
            repeats,
        } => {
            let fam = family.build()?;
            let opts = QfiOptions {
                sdp_tol: tol,
                richardson: !no_richardson,
                copies: *copies,
                accuracy: None,
            };
            let est = qfi(fam.as_ref(), *x, step.unwrap_or(cfg.fd_step), &opts)?;
            let mut result = to_value(&est);
            let mut text = kv(&[
                ("qfi", fmt(est.value)),
                ("error_budget", fmt(est.error_budget)),
                ("step", fmt(est.step)),
                ("method", to_value(&est.method).as_str().unwrap_or("").to_string()),
            ]);
            if let Some(n) = repeats {
                let p = precision_bound(est.value, *n)?;
                result["precision_bound"] = to_value(&p);
                text += &kv(&[("precision_bound", fmt(p))]);
            }
            Outcome { result, text }
        }
        Command::PathLength { family, n, variant } => {
            let fam = family.build()?;
            let l = path_length(fam.as_ref(), *n, cfg.grid, (*variant).into(), &cfg.path_options())?;
            Outcome {
                text: kv(&[
                    ("length", fmt(l.value)),
                    ("copies", l.copies.to_string()),
                    ("grid", l.grid.to_string()),
                    ("refine_delta", fmt(l.refine_delta)),
                    ("converged", l.converged.to_string()),
                    ("resolution", fmt(l.resolution)),
                ]),
                result: to_value(&l),
            }
        }
        Command::Discriminate {
            a,
            b,
            path,
            variant,
        } => {
            let a = load_channel(a)?;
            let b = load_channel(b)?;
            let family = match path {
                Some(PathKind::Mixture) => Some(MixturePath::new(a.clone(), b.clone())?),
                None => None,
            };
            let mut opts: ReportOptions = cfg.report_options();
            if let Some(v) = variant {
                opts.path_variants = vec![(*v).into()];
            }
            let r = discrimination::report(
                &a,
                &b,
                family.as_ref().map(|f| f as &dyn ChannelFamily),
                &opts,
            )?;
            Outcome {
                text: render_report(&r),
                result: to_value(&r),
            }
        }
        Command::ReproducePaper => {
            let l = ladder::worked_example(cfg)?;
            Outcome {
                text: ladder::render(&l),
                result: to_value(&l),
            }
        }
        Command::Oracle(o) => oracle(o, cfg)?,
    })
}

fn oracle(command: &OracleCommand, cfg: &RunConfig) -> Result<Outcome> {
    let tol = cfg.sdp_tol;
    Ok(match command {
        OracleCommand::StateFidelity { a, b } => {
            let r1 = DensityMatrix::new(load_matrix(a)?)?;
            let r2 = DensityMatrix::new(load_matrix(b)?)?;
            simple(vec![("fidelity", oracles::state_fidelity(&r1, &r2)?)])
        }
        OracleCommand::MinOutputFidelity {
            a,
            b,
            restarts,
            ancilla_dim,
        } => {
            let search = ProbeSearch {
                restarts: *restarts,
                seed: cfg.seed,
                ancilla_dim: *ancilla_dim,
            };
            let m = oracles::min_output_fidelity(&load_channel(a)?, &load_channel(b)?, &search)?;
            Outcome {
                text: kv(&[
                    ("min_output_fidelity", fmt(m.value)),
                    ("best_restart", m.best_restart.to_string()),
                    ("evaluations", m.evaluations.to_string()),
                ]),
                result: to_value(&m),
            }
        }
        OracleCommand::MinOverlap { file, restarts } => {
            let m = oracles::min_overlap_unitary(&load_unitary(file)?, *restarts, cfg.seed)?;
            Outcome {
                text: kv(&[
                    ("min_overlap", fmt(m.value)),
                    ("best_restart", m.best_restart.to_string()),
                    ("evaluations", m.evaluations.to_string()),
                ]),
                result: to_value(&m),
            }
        }
        OracleCommand::Diamond { a, b } => simple(vec![(
            "diamond_norm",
            oracles::diamond_norm(&load_channel(a)?, &load_channel(b)?, tol)?,
        )]),
        OracleCommand::ClassicalFisher {
            family,
            x,
            povm,
            probe,
            step,
        } => {
            let fam = family.build()?;
            let v = oracles::classical_fisher_check(
                fam.as_ref(),
                *x,
                &load_povm(povm)?,
                &load_probe(probe)?,
                step.unwrap_or(cfg.fd_step),
            )?;
            simple(vec![("classical_fisher", v)])
        }
        OracleCommand::StateFisher {
            family,
            x,
            probe,
            step,
        } => {
            let fam = family.build()?;
            let v = oracles::state_fisher(
                fam.as_ref(),
                *x,
                &load_probe(probe)?,
                step.unwrap_or(cfg.fd_step),
            )?;
            simple(vec![("state_fisher", v)])
        }
    })
}

/// `{format_version, command, config, result}`.
pub fn envelope(command: &str, cfg: &RunConfig, result: Value) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "command": command,
        "config": to_value(cfg),
        "result": result,
    })
}

pub fn error_document(e: &Error) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "error": { "kind": e.kind(), "message": e.to_string() },
    })
}

fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        2
    } else {
        1
    }
}

/// Caps the global thread pool from `CHANMETRIC_THREADS`.
fn configure_threads() -> Result<()> {
    let Some(v) = std::env::var_os("CHANMETRIC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::InvalidArgument("CHANMETRIC_THREADS must be a positive integer".into())
        })?;
    // A pool built earlier in the process (tests) stays as it is.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and writes to `out`
/// and `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                2
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    let cfg = cli.global.config();
    let json = cfg.output == OutputFormat::Json;
    let outcome = configure_threads()
        .and_then(|_| cfg.validate())
        .and_then(|_| execute(&cli.command, &cfg));
    match outcome {
        Ok(o) => {
            if json {
                let doc = envelope(cli.command.name(), &cfg, o.result);
                let text = serde_json::to_string_pretty(&doc).expect("envelope serializes");
                let _ = writeln!(out, "{text}");
            } else {
                let _ = write!(out, "{}", o.text);
            }
            0
        }
        Err(e) => {
            if json {
                let _ = writeln!(err, "{}", error_document(&e));
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            exit_code(&e)
        }
    }
}
