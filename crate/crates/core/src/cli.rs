//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when inputs fail validation, 3 when a run
//! fails (or, with `--strict`, does not converge).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::certifier::{self, CertifyConfig, MappingClassReport};
use crate::datadep::{self, ClassConstants, DataDepClass, DataDepConfig, DataDependenceReport};
use crate::error::Error;
use crate::geometry::{delta_distance, hausdorff, FiniteSet, Point};
use crate::mappings::MultiMap;
use crate::solver::{self, Descent, IterationConfig, IterationTrace};
use crate::transform;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "multifix", version, about = "Fixed points of multivalued mappings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate contractive-class constants of a mapping on its grid.
    Certify(CertifyArgs),
    /// Run the Krasnoselskii or Górnicki iteration from a start point.
    Solve(SolveArgs),
    /// Run the δ-residual descent towards an end point.
    Endpoint(EndpointArgs),
    /// Check the data-dependence bound between a mapping and a perturbation.
    Datadep(DatadepArgs),
    /// Print H(A,B) and δ(A,B) for two point sets.
    Hausdorff(HausdorffArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Mapping JSON file.
    #[arg(long)]
    pub mapping: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exit with a runtime error when the run does not converge or the bound
    /// does not hold.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Comma-separated enrichment constants to scan.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = certifier::DEFAULT_PAIRS_CAP)]
    pub pairs_cap: usize,
    #[arg(long, default_value_t = certifier::DEFAULT_CRR_STEPS)]
    pub crr_steps: u32,
    #[arg(long, requires = "descent_b")]
    pub descent_a: Option<f64>,
    #[arg(long, requires = "descent_a")]
    pub descent_b: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Krasnoselskii,
    Gornicki,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Start point, comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x0: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Method::Krasnoselskii)]
    pub method: Method,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub descent_a: Option<f64>,
    #[arg(long)]
    pub descent_b: Option<f64>,
    /// JSON summary file; defaults to `--out` with a `.json` extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EndpointArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x0: Vec<f64>,
    #[arg(long)]
    pub descent_a: f64,
    #[arg(long)]
    pub descent_b: f64,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DatadepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Perturbed mapping JSON file.
    #[arg(long)]
    pub perturbed: PathBuf,
    #[arg(long, value_parser = parse_class)]
    pub class: DataDepClass,
    /// Class constants as inline JSON or a path to a JSON file.
    #[arg(long, conflicts_with = "auto_certify", required_unless_present = "auto_certify")]
    pub constants: Option<String>,
    /// Read the constants off a certification of the mapping.
    #[arg(long)]
    pub auto_certify: bool,
    /// Treat the perturbation as certified in the class and also compare
    /// H(F(S),F(T)) with the bound.
    #[arg(long)]
    pub perturbed_in_class: bool,
    /// Residual tolerance of the per-start iterations.
    #[arg(long)]
    pub iter_eps: Option<f64>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args)]
pub struct HausdorffArgs {
    /// First point set JSON file.
    pub a: PathBuf,
    /// Second point set JSON file.
    pub b: PathBuf,
}

fn parse_class(s: &str) -> std::result::Result<DataDepClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Summary written next to a trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descent: Option<Descent>,
    pub config: IterationConfig,
    pub converged: bool,
    pub steps: usize,
    pub final_point: Point,
    pub final_residual: Option<f64>,
    pub trace: IterationTrace,
}

/// Report emitted by `datadep`, with the certification used when
/// `--auto-certify` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatadepOutput {
    pub holds: bool,
    pub report: DataDependenceReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<MappingClassReport>,
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: Error,
}

impl Failure {
    fn validation(error: impl Into<Error>) -> Self {
        Failure { code: EXIT_VALIDATION, error: error.into() }
    }

    fn runtime(error: impl Into<Error>) -> Self {
        Failure { code: EXIT_RUNTIME, error: error.into() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` and runs the command. Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.error);
            f.code
        }
    }
}

pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Certify(args) => run_certify(args),
        Command::Solve(args) => run_solve(args),
        Command::Endpoint(args) => run_endpoint(args),
        Command::Datadep(args) => run_datadep(args),
        Command::Hausdorff(args) => run_hausdorff(args),
    }
}

fn run_certify(args: CertifyArgs) -> CliResult<i32> {
    let map = load_mapping(&args.common.mapping)?;
    let cfg = certify_config(&args.sampling, args.common.seed)?;
    let report = certifier::certify(&map, &cfg).map_err(Failure::runtime)?;
    emit_json(args.common.out.as_deref(), &report)?;
    Ok(EXIT_OK)
}

fn run_solve(args: SolveArgs) -> CliResult<i32> {
    let map = load_mapping(&args.common.mapping)?;
    let cfg = iteration_config(&args.common, solver::DEFAULT_EPS)?;
    let x0 = start_point(&map, args.x0)?;
    let (trace, lambda, descent) = match args.method {
        Method::Krasnoselskii => {
            let lambda = transform::resolve_lambda(args.lambda, args.b).map_err(Failure::validation)?;
            let trace = solver::krasnoselskii_iterate(&map, lambda, x0, &cfg).map_err(Failure::validation)?;
            (trace, Some(lambda), None)
        }
        Method::Gornicki => {
            if args.lambda.is_some() || args.b.is_some() {
                return Err(Failure::validation(Error::invalid(
                    "--lambda and --b apply to the Krasnoselskii method only",
                )));
            }
            let descent = descent_from(args.descent_a, args.descent_b)?.ok_or_else(|| {
                Failure::validation(Error::invalid("gornicki needs --descent-a and --descent-b"))
            })?;
            let trace =
                solver::solve_gornicki(&map, x0, descent.a, descent.b, &cfg).map_err(Failure::validation)?;
            (trace, None, Some(descent))
        }
    };
    let method = match args.method {
        Method::Krasnoselskii => "krasnoselskii",
        Method::Gornicki => "gornicki",
    };
    finish_trace(method, trace, lambda, descent, cfg, &args.common, args.summary)
}

fn run_endpoint(args: EndpointArgs) -> CliResult<i32> {
    let map = load_mapping(&args.common.mapping)?;
    let cfg = iteration_config(&args.common, solver::DEFAULT_EPS)?;
    let x0 = start_point(&map, args.x0)?;
    let descent = Descent::new(args.descent_a, args.descent_b).map_err(Failure::validation)?;
    let trace = solver::endpoint_iterate(&map, x0, descent, &cfg).map_err(Failure::validation)?;
    finish_trace("endpoint", trace, None, Some(descent), cfg, &args.common, args.summary)
}

fn finish_trace(
    method: &str,
    trace: IterationTrace,
    lambda: Option<f64>,
    descent: Option<Descent>,
    config: IterationConfig,
    common: &CommonArgs,
    summary_path: Option<PathBuf>,
) -> CliResult<i32> {
    let summary = SolveSummary {
        method: method.to_string(),
        lambda,
        descent,
        config,
        converged: trace.converged(),
        steps: trace.steps(),
        final_point: trace.last_point().clone(),
        final_residual: trace.final_residual(),
        trace,
    };
    match &common.out {
        Some(csv) => {
            write_file(csv, &summary.trace.to_csv())?;
            let json = summary_path.unwrap_or_else(|| csv.with_extension("json"));
            emit_json(Some(&json), &summary)?;
        }
        None => emit_json(summary_path.as_deref(), &summary)?,
    }
    if !summary.converged {
        eprintln!("warning: iteration did not converge ({:?})", summary.trace.verdict);
        if common.strict {
            return Ok(EXIT_RUNTIME);
        }
    }
    Ok(EXIT_OK)
}

fn run_datadep(args: DatadepArgs) -> CliResult<i32> {
    let t = load_mapping(&args.common.mapping)?;
    let s = load_mapping(&args.perturbed)?;
    let mut cfg = DataDepConfig {
        fixed_eps: args.common.eps.unwrap_or(datadep::DEFAULT_FIXED_EPS),
        perturbed_in_class: args.perturbed_in_class,
        ..DataDepConfig::default()
    };
    cfg.iteration = iteration_config(&args.common, args.iter_eps.unwrap_or(cfg.iteration.eps))?;
    if !(cfg.fixed_eps > 0.0) {
        return Err(Failure::validation(Error::invalid("eps must be positive")));
    }

    let (constants, certification) = if args.auto_certify {
        let ccfg = certify_config(&args.sampling, args.common.seed)?;
        let report = certifier::certify(&t, &ccfg).map_err(Failure::runtime)?;
        let constants = ClassConstants::from_report(&report, args.class).map_err(Failure::runtime)?;
        (constants, Some(report))
    } else {
        let text = args.constants.as_deref().unwrap_or_default();
        let constants = parse_constants(text)?;
        if constants.class() != args.class {
            return Err(Failure::validation(Error::invalid(format!(
                "constants are for class {:?}, but --class is {:?}",
                constants.class(),
                args.class
            ))));
        }
        (constants, None)
    };

    let report = datadep::verify_data_dependence(&t, &s, constants, &cfg).map_err(Failure::runtime)?;
    let out = DatadepOutput { holds: report.holds, report, certification };
    emit_json(args.common.out.as_deref(), &out)?;
    if !out.holds && args.common.strict {
        return Ok(EXIT_RUNTIME);
    }
    Ok(EXIT_OK)
}

fn run_hausdorff(args: HausdorffArgs) -> CliResult<i32> {
    let a = load_set(&args.a)?;
    let b = load_set(&args.b)?;
    let h = hausdorff(&a, &b).map_err(Failure::validation)?;
    let d = delta_distance(&a, &b).map_err(Failure::validation)?;
    println!("{h:?} {d:?}");
    Ok(EXIT_OK)
}

fn parse_constants(text: &str) -> CliResult<ClassConstants> {
    let json =
        if text.trim_start().starts_with('{') { text.to_string() } else { read_input(Path::new(text))? };
    let c: ClassConstants = serde_json::from_str(&json).map_err(Failure::validation)?;
    Ok(c)
}

fn certify_config(s: &SamplingArgs, seed: u64) -> CliResult<CertifyConfig> {
    let mut cfg =
        CertifyConfig { pairs_cap: s.pairs_cap, seed, crr_steps: s.crr_steps, ..Default::default() };
    if let Some(grid) = &s.b_grid {
        certifier::validate_b_grid(grid).map_err(Failure::validation)?;
        cfg.b_grid = grid.clone();
    }
    if cfg.pairs_cap == 0 {
        return Err(Failure::validation(Error::invalid("pairs cap must be at least 1")));
    }
    if cfg.crr_steps == 0 {
        return Err(Failure::validation(Error::invalid("crr steps must be at least 1")));
    }
    cfg.descent = descent_from(s.descent_a, s.descent_b)?;
    Ok(cfg)
}

fn descent_from(a: Option<f64>, b: Option<f64>) -> CliResult<Option<Descent>> {
    match (a, b) {
        (Some(a), Some(b)) => Descent::new(a, b).map(Some).map_err(Failure::validation),
        (None, None) => Ok(None),
        _ => Err(Failure::validation(Error::invalid("--descent-a and --descent-b go together"))),
    }
}

fn iteration_config(common: &CommonArgs, default_eps: f64) -> CliResult<IterationConfig> {
    let d = IterationConfig::default();
    let cfg = IterationConfig {
        mu: common.mu.unwrap_or(d.mu),
        eps: common.eps.unwrap_or(default_eps),
        max_iter: common.max_iter.unwrap_or(d.max_iter),
        seed: common.seed,
    };
    cfg.validate().map_err(Failure::validation)?;
    Ok(cfg)
}

fn start_point(map: &MultiMap, coords: Vec<f64>) -> CliResult<Point> {
    let x0 = Point::new(coords).map_err(Failure::validation)?;
    map.evaluate(&x0).map_err(Failure::validation)?;
    Ok(x0)
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::validation(Error::invalid(format!("cannot read {}: {e}", path.display()))))
}

fn load_mapping(path: &Path) -> CliResult<MultiMap> {
    let text = read_input(path)?;
    MultiMap::from_json(&text)
        .map_err(|e| Failure::validation(Error::invalid(format!("{}: {e}", path.display()))))
}

fn load_set(path: &Path) -> CliResult<FiniteSet> {
    let text = read_input(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::validation(Error::invalid(format!("{}: {e}", path.display()))))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(Failure::runtime)
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::runtime)?;
    text.push('\n');
    match path {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
