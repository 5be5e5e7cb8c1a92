//! Config loading and subcommand dispatch for the `dslab` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dslab_core::arith::{vec_gcd, IntVec, PhiMode};
use dslab_core::checks::{run_suite, SuiteConfig};
use dslab_core::measures::{
    find_window, measure_a, measure_intersection, overlap_ratio_scan, window_edges,
    window_pair_sum, WindowOutcome,
};
use dslab_core::montecarlo::{
    counterexample_demo, empirical_union_measure, hit_fraction, HitParams,
};
use dslab_core::psi::PsiSpec;
use dslab_core::report::{rational_text, FORMAT_VERSION};
use dslab_core::sampling::DEFAULT_BITS;
use dslab_core::series;
use dslab_core::torus::{linearly_independent, ApproxSet, NumeratorMode};
use dslab_core::{Rational, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dslab_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable diagnostic for stderr.
    pub fn to_json(&self) -> Json {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

fn missing(field: &str, command: &str) -> CliError {
    CliError::Config(format!("`{field}` is required for `{command}`"))
}

/// A rational read as `"a/b"` or an integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rat(#[serde(with = "rational_text")] pub Rational);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    pub q: IntVec,
    pub epsilon: Rat,
    #[serde(default = "coprime_mode")]
    pub numerators: NumeratorMode,
}

fn coprime_mode() -> NumeratorMode {
    NumeratorMode::Coprime
}

/// Everything a run needs; every field is optional in the file and
/// checked per command.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_min: Option<u64>,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub h_prim: Option<u64>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(rename = "X", skip_serializing_if = "Option::is_none")]
    pub x: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Rat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_mode: Option<PhiMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coprime: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<IntVec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerators: Option<NumeratorMode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetConfig>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub big_n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Rat>,
    /// Where the report goes; not part of the echo.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    /// Worker threads; not part of the echo, since output is independent of it.
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn apply(&mut self, o: &Overrides) {
        macro_rules! over {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f.clone(); } )* };
        }
        over!(n, m, q_max, seed, out, threads);
    }

    fn dims(&self, command: &str) -> Result<(usize, u32), CliError> {
        let n = self.n.ok_or_else(|| missing("n", command))?;
        let m = self.m.ok_or_else(|| missing("m", command))?;
        if n == 0 || m == 0 {
            return Err(CliError::Config("n and m must be at least 1".into()));
        }
        Ok((n, m))
    }

    fn psi(&self, command: &str) -> Result<&PsiSpec, CliError> {
        let psi = self.psi.as_ref().ok_or_else(|| missing("psi", command))?;
        psi.validate()?;
        Ok(psi)
    }

    fn seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| missing("seed", command))
    }

    fn need<T: Clone>(v: &Option<T>, field: &str, command: &str) -> Result<T, CliError> {
        v.clone().ok_or_else(|| missing(field, command))
    }
}

#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub m: Option<u32>,
    #[arg(long = "Q", global = true)]
    pub q_max: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the parallel parts.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SeriesKind {
    Ds,
    DsFactored,
    CapitalPsi,
    Catlin,
    Khintchine,
    Kg,
    Bv,
    HausdorffDs,
    HausdorffCatlin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum McKind {
    Hit,
    Union,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Exact measure of one approximation set.
    Measure,
    /// Exact measure of the intersection of two sets.
    Intersect,
    /// Overlap bounds for all pairs k < l ≤ Q, as JSON lines.
    OverlapScan,
    /// Partial sums of a named series.
    Series {
        #[arg(value_enum)]
        kind: SeriesKind,
    },
    /// Window search over dyadic pair sums.
    Window,
    /// Monte Carlo estimates.
    Mc {
        #[arg(value_enum)]
        kind: McKind,
    },
    /// Divisor-pileup example with exact union and MC cross-check.
    Counterexample,
    /// The invariant suite; exits nonzero when a check fails.
    Lemmas,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Measure => "measure".into(),
            Command::Intersect => "intersect".into(),
            Command::OverlapScan => "overlap-scan".into(),
            Command::Series { kind } => {
                format!("series {}", kind.to_possible_value().unwrap().get_name())
            }
            Command::Window => "window".into(),
            Command::Mc { kind } => format!("mc {}", kind.to_possible_value().unwrap().get_name()),
            Command::Counterexample => "counterexample".into(),
            Command::Lemmas => "lemmas".into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dslab",
    version,
    about = "Exact and Monte Carlo experiments on coprime approximation sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// The rendered report and whether every check passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

/// Merges the config file with command-line flags.
pub fn resolve(overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut config = match &overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(overrides);
    Ok(config)
}

fn envelope(command: &Command, config: &RunConfig, result: Json) -> String {
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "command": command.name(),
        "config": config,
        "result": result,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("reports serialize");
    text.push('\n');
    text
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("reports serialize")
}

fn approx_set(n: usize, m: u32, set: &SetConfig) -> Result<ApproxSet<Rational>, CliError> {
    Ok(ApproxSet::new(
        n,
        m,
        set.q.clone(),
        set.epsilon.0.clone(),
        set.numerators.clone(),
    )?)
}

/// Exact radial values `Ψ(1..=k)` from a one-dimensional spec.
fn radial_values(psi: &PsiSpec, k: u64) -> Result<Vec<Rational>, CliError> {
    psi.check_dimension(1)?;
    (1..=k)
        .map(|d| Ok(psi.eval_exact(&IntVec(vec![d as i64]))?))
        .collect()
}

/// Runs one command; the report is rendered but not written.
pub fn run(command: &Command, config: &RunConfig) -> Result<Outcome, CliError> {
    let name = command.name();
    let name = name.as_str();
    let done = |result: Json| Outcome {
        text: envelope(command, config, result),
        success: true,
    };
    match command {
        Command::Measure => {
            let (n, m) = config.dims(name)?;
            let set = SetConfig {
                q: RunConfig::need(&config.q, "q", name)?,
                epsilon: RunConfig::need(&config.epsilon, "epsilon", name)?,
                numerators: config.numerators.clone().unwrap_or(NumeratorMode::Coprime),
            };
            let set = approx_set(n, m, &set)?;
            let mu = measure_a(&set)?;
            Ok(done(
                json!({ "measure": mu.to_json(), "gcd": vec_gcd(&set.q)? }),
            ))
        }
        Command::Intersect => {
            let (n, m) = config.dims(name)?;
            let [a, b] = config.sets.as_slice() else {
                return Err(CliError::Config(
                    "`intersect` needs exactly two entries in `sets`".into(),
                ));
            };
            let (a, b) = (approx_set(n, m, a)?, approx_set(n, m, b)?);
            let both = measure_intersection(&a, &b)?;
            let product = measure_a(&a)? * measure_a(&b)?;
            Ok(done(json!({
                "measure": both.to_json(),
                "product_of_measures": product.to_json(),
                "independent_directions": linearly_independent(&a.q, &b.q),
            })))
        }
        Command::OverlapScan => {
            let k_max = RunConfig::need(&config.q_max, "Q", name)?;
            let values = radial_values(config.psi(name)?, k_max)?;
            let scan = overlap_ratio_scan(|d| values[d as usize - 1].clone(), k_max);
            let header = json!({
                "format_version": FORMAT_VERSION,
                "command": name,
                "config": config,
                "pairs": scan.len(),
            });
            let mut text = serde_json::to_string(&header).expect("reports serialize");
            text.push('\n');
            for entry in &scan {
                text.push_str(&serde_json::to_string(entry).expect("reports serialize"));
                text.push('\n');
            }
            Ok(Outcome {
                text,
                success: true,
            })
        }
        Command::Series { kind } => {
            let psi = config.psi(name)?;
            let (n, m) = config.dims(name)?;
            let q_max = || RunConfig::need(&config.q_max, "Q", name);
            let t_max = || RunConfig::need(&config.t_max, "t_max", name);
            let s = || RunConfig::need(&config.s, "s", name).map(|r| r.0);
            let phi_mode = config.phi_mode.unwrap_or_default();
            let report = match kind {
                SeriesKind::Ds => to_json(&series::ds_sum(psi, n, m, q_max()?)?),
                SeriesKind::DsFactored => {
                    let h = RunConfig::need(&config.h_prim, "H", name)?;
                    let d = RunConfig::need(&config.d_max, "D", name)?;
                    to_json(&series::ds_sum_factored(psi, n, m, h, d)?)
                }
                SeriesKind::CapitalPsi => {
                    let h = RunConfig::need(&config.h_prim, "H", name)?;
                    let d = RunConfig::need(&config.d, "d", name)?;
                    to_json(&series::capital_psi(psi, n, m, d, h)?)
                }
                SeriesKind::Catlin => to_json(&series::catlin_sum(
                    psi,
                    n,
                    m,
                    q_max()?,
                    t_max()?,
                    phi_mode,
                )?),
                SeriesKind::Khintchine => to_json(&series::khintchine_sum(psi, m, q_max()?)?),
                SeriesKind::Kg => to_json(&series::kg_sum(psi, n, m, q_max()?)?),
                SeriesKind::Bv => to_json(&series::bv_sum(psi, n, m, q_max()?)?),
                SeriesKind::HausdorffDs => {
                    to_json(&series::hausdorff_ds_sum(psi, n, m, &s()?, q_max()?)?)
                }
                SeriesKind::HausdorffCatlin => to_json(&series::hausdorff_catlin_sum(
                    psi,
                    n,
                    m,
                    &s()?,
                    q_max()?,
                    t_max()?,
                    phi_mode,
                )?),
            };
            Ok(done(report))
        }
        Command::Window => {
            let m = RunConfig::need(&config.m, "m", name)?;
            let x = RunConfig::need(&config.x, "X", name)?;
            let y_max = RunConfig::need(&config.q_max, "Q", name)?;
            if m == 0 || x == 0 || y_max < x {
                return Err(CliError::Config("window needs m ≥ 1 and 1 ≤ X ≤ Q".into()));
            }
            let values = radial_values(config.psi(name)?, y_max)?;
            let psi = |d: u64| values[d as usize - 1].clone();
            let outcome = find_window(psi, m, x, y_max)?;
            let pair_sum = match &outcome {
                WindowOutcome::Found { y, .. } | WindowOutcome::Overshoot { y, .. } => {
                    Some(window_pair_sum(psi, x, *y, m)?.to_json())
                }
                WindowOutcome::Exhausted { .. } => None,
            };
            let (lo, hi): (Rational, Rational) = window_edges(m);
            Ok(done(json!({
                "window": outcome,
                "edges": [lo.to_json(), hi.to_json()],
                "pair_sum": pair_sum,
            })))
        }
        Command::Mc { kind } => {
            let (n, m) = config.dims(name)?;
            let seed = config.seed(name)?;
            let samples = RunConfig::need(&config.samples, "samples", name)?;
            let report = match kind {
                McKind::Hit => {
                    let psi = config.psi(name)?;
                    let mut params = HitParams::new(
                        n,
                        m,
                        RunConfig::need(&config.q_max, "Q", name)?,
                        RunConfig::need(&config.k, "K", name)?,
                        samples,
                        seed,
                        config.coprime.unwrap_or(false),
                    );
                    params.q_min = config.q_min.unwrap_or(0);
                    params.precision_bits = config.precision_bits.unwrap_or(DEFAULT_BITS);
                    hit_fraction(psi, &params)?
                }
                McKind::Union => {
                    if config.sets.is_empty() {
                        return Err(missing("sets", name));
                    }
                    let sets = config
                        .sets
                        .iter()
                        .map(|s| approx_set(n, m, s))
                        .collect::<Result<Vec<_>, _>>()?;
                    empirical_union_measure(&sets, samples, seed)?
                }
            };
            Ok(done(to_json(&report)))
        }
        Command::Counterexample => {
            let big_n = RunConfig::need(&config.big_n, "N", name)?;
            let eta = RunConfig::need(&config.eta, "eta", name)?;
            let samples = RunConfig::need(&config.samples, "samples", name)?;
            let report = counterexample_demo(big_n, &eta.0, samples, config.seed(name)?)?;
            Ok(done(to_json(&report)))
        }
        Command::Lemmas => {
            let defaults = SuiteConfig::default();
            let suite = SuiteConfig {
                seed: config.seed(name)?,
                mc_samples: config.samples.unwrap_or(defaults.mc_samples),
            };
            let outcomes = run_suite(&suite);
            let failed: Vec<&str> = outcomes
                .iter()
                .filter(|o| !o.passed)
                .map(|o| o.name)
                .collect();
            let result = json!({
                "passed": failed.is_empty(),
                "failed": failed,
                "checks": outcomes,
            });
            Ok(Outcome {
                text: envelope(command, config, result),
                success: failed.is_empty(),
            })
        }
    }
}
