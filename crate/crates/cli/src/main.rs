//! `infostab` command-line front end.
//!
//! Every subcommand prints a JSON (or CSV) result on stdout and, with `--out`,
//! writes the same document to a file. Exit status: 0 pass, 2 fail, 1 error.

use std::error::Error as StdError;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infostab::entropy::{
    degree_alpha, measure_slack, recursive_build, semi_symmetry_defect, shannon,
    system_certificate, two_symbol_entropy, MeasureSystem,
};
use infostab::harness::{
    gen_instance, negative_log_grid, run_batch, sweep_constants, ExperimentConfig,
};
use infostab::oracle::{chebyshev_fit_log, chebyshev_fit_power, MIN_POWER_ALPHA};
use infostab::stability::{deviation_grid, Domain};
use infostab::{
    certify_closed, certify_open, closed_bound_factor, extract_candidate, k_alpha, sup_residual,
    Alpha, ClosedFunction, Evaluate, NoiseKind, OpenTriangleSampler, PerturbationSpec,
    ProbabilityVector, SamplingScheme, SimplexSampler, Tabulated, UnitIntervalFunction,
};
use serde::Serialize;
use serde_json::json;

type CliResult<T> = Result<T, Box<dyn StdError>>;

#[derive(Parser)]
#[command(
    name = "infostab",
    version,
    about = "Stability certificates for the fundamental equation of information of degree alpha"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate K(alpha) and T(alpha) as CSV.
    Constants(ConstantsArgs),
    /// Sampled sup of the equation residual.
    Residual(InstanceArgs),
    /// Constructive candidate solution.
    Extract(InstanceArgs),
    /// Certify sup |f - candidate| <= bound.
    Certify(CertifyArgs),
    /// Shannon and degree-alpha entropies of probability vectors.
    Entropy(EntropyArgs),
    /// Build I_n by the alpha-recursion and compare with the closed form.
    Recursive(RecursiveArgs),
    /// Per-n stability report of a recursively generated measure system.
    SystemCertify(SystemArgs),
    /// Minimax fit next to the constructive candidate.
    OracleFit(InstanceArgs),
    /// Generate an instance: manifest and tabulated dump.
    Gen(GenArgs),
    /// Run a batch of experiment configs.
    Batch(BatchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    UniformIid,
    SmoothBump,
}

impl From<NoiseArg> for NoiseKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::UniformIid => NoiseKind::UniformIid,
            NoiseArg::SmoothBump => NoiseKind::SmoothBump,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Halton,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Open,
    Closed,
}

/// `power(a,b)`, `log(lambda,c)` or a path to a two-column CSV table.
#[derive(Clone, Debug)]
enum InputSpec {
    Power(f64, f64),
    Log(f64, f64),
    Table(PathBuf),
}

impl FromStr for InputSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let pair = |body: &str| -> Result<(f64, f64), String> {
            let parts: Vec<&str> = body.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [x, y] => Ok((
                    x.parse().map_err(|e| format!("`{x}`: {e}"))?,
                    y.parse().map_err(|e| format!("`{y}`: {e}"))?,
                )),
                _ => Err(format!("expected two numbers in `{t}`")),
            }
        };
        if let Some(body) = t.strip_prefix("power(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = pair(body)?;
            Ok(InputSpec::Power(a, b))
        } else if let Some(body) = t.strip_prefix("log(").and_then(|r| r.strip_suffix(')')) {
            let (l, c) = pair(body)?;
            Ok(InputSpec::Log(l, c))
        } else {
            Ok(InputSpec::Table(PathBuf::from(t)))
        }
    }
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Flat TOML experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha_guard: Option<f64>,
    /// `power(a,b)`, `log(lambda,c)` or a CSV table of `x,value` rows.
    #[arg(long)]
    input: Option<InputSpec>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    noise_kind: Option<NoiseArg>,
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long)]
    deviation_points: Option<usize>,
    #[arg(long, value_enum)]
    domain: Option<DomainArg>,
    /// Boundary value at 0 of a closed instance.
    #[arg(long, allow_hyphen_values = true)]
    f0: Option<f64>,
    /// Boundary value at 1 of a closed instance.
    #[arg(long, allow_hyphen_values = true)]
    f1: Option<f64>,
    /// Write the JSON result here as well.
    #[arg(long, alias = "report")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Write the certificate together with its diagnostics here.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Exponents to tabulate; a default sweep when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Vec<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the sweep summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct VectorArgs {
    /// Inline probability vector, e.g. `0.5,0.25,0.25`; repeatable.
    #[arg(long = "p", allow_hyphen_values = true)]
    p: Vec<String>,
    /// File with one comma-separated vector per line.
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl VectorArgs {
    fn vectors(&self) -> CliResult<Vec<ProbabilityVector>> {
        let mut out = self
            .p
            .iter()
            .map(|s| ProbabilityVector::parse(s))
            .collect::<infostab::Result<Vec<_>>>()?;
        if let Some(path) = &self.csv {
            for line in fs::read_to_string(path)?.lines() {
                let line = line.trim();
                if !line.is_empty() && !line.starts_with('#') {
                    out.push(ProbabilityVector::parse(line)?);
                }
            }
        }
        if out.is_empty() {
            return Err("no probability vectors given (use --p or --csv)".into());
        }
        Ok(out)
    }
}

#[derive(Args)]
struct EntropyArgs {
    #[command(flatten)]
    vectors: VectorArgs,
    /// Also evaluate the entropy of this degree.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecursiveArgs {
    #[command(flatten)]
    vectors: VectorArgs,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Two-symbol function `f(x) = I2(1-x, x)`; the degree-alpha entropy when absent.
    #[arg(long)]
    input: Option<InputSpec>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    n_max: usize,
    /// Noise added to the two-symbol entropy.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "uniform-iid")]
    noise_kind: NoiseArg,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Slack sequence eps_1, eps_2, ...; measured from the system when absent.
    #[arg(long, value_delimiter = ',')]
    slack: Vec<f64>,
    /// Probability vectors sampled per n.
    #[arg(long, default_value_t = 10_000)]
    vectors: usize,
    /// Residual samples used when measuring the slack.
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = infostab::sampling::DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Write the tabulated instance as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// Experiment config files.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    /// Concurrent items; all cores when unset.
    #[arg(long, env = "INFOSTAB_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// The instance a subcommand works on.
struct Subject {
    config: ExperimentConfig,
    alpha: Alpha,
    function: UnitIntervalFunction,
    closed: Option<ClosedFunction<UnitIntervalFunction>>,
}

impl InstanceArgs {
    fn config(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field { cfg.$field = v.into(); }
            )*};
        }
        set!(
            alpha,
            alpha_guard,
            epsilon,
            noise_seed,
            samples,
            margin,
            seed,
            deviation_points
        );
        if let Some(k) = self.noise_kind {
            cfg.noise_kind = k.into();
        }
        if let Some(s) = self.scheme {
            cfg.scheme = match s {
                SchemeArg::Halton => SamplingScheme::HaltonQuasiRandom,
                SchemeArg::Uniform => SamplingScheme::UniformRejection,
            };
        }
        if let Some(d) = self.domain {
            cfg.domain = match d {
                DomainArg::Open => Domain::Open,
                DomainArg::Closed => Domain::Closed,
            };
        }
        if self.f0.is_some() {
            cfg.f0 = self.f0;
        }
        if self.f1.is_some() {
            cfg.f1 = self.f1;
        }
        match self.input {
            Some(InputSpec::Power(a, b)) => (cfg.a, cfg.b) = (a, b),
            Some(InputSpec::Log(l, c)) => (cfg.lambda, cfg.c) = (l, c),
            _ => {}
        }
        Ok(cfg)
    }

    fn subject(&self) -> CliResult<Subject> {
        let config = self.config()?;
        let alpha = config.alpha()?;
        match &self.input {
            Some(InputSpec::Power(..)) if alpha.is_zero() => {
                return Err("power(a,b) needs alpha != 0; use log(lambda,c)".into())
            }
            Some(InputSpec::Log(..)) if !alpha.is_zero() => {
                return Err("log(lambda,c) needs alpha = 0".into())
            }
            _ => {}
        }
        if let Some(InputSpec::Table(path)) = &self.input {
            config.validate()?;
            let function = UnitIntervalFunction::Tabulated(Tabulated::load(path)?)
                .perturbed(config.perturbation())?;
            let closed = match config.domain {
                Domain::Open => None,
                Domain::Closed => Some(ClosedFunction {
                    interior: function.clone(),
                    at_zero: config.f0.ok_or("a closed table needs --f0")?,
                    at_one: config.f1.ok_or("a closed table needs --f1")?,
                }),
            };
            return Ok(Subject {
                config,
                alpha,
                function,
                closed,
            });
        }
        let instance = gen_instance(&config)?;
        Ok(Subject {
            config,
            alpha,
            function: instance.function,
            closed: instance.closed,
        })
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn print_stdout(text: &str) -> CliResult<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    print_stdout(&text)
}

enum Outcome {
    Pass,
    Fail,
}

impl From<bool> for Outcome {
    fn from(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

fn constants(args: &ConstantsArgs) -> CliResult<Outcome> {
    let grid = if args.alpha.is_empty() {
        let mut g = negative_log_grid(-30.0, -1e-6, 10_000);
        g.push(0.0);
        g.extend(
            (1..=1000)
                .map(|i| 5.0 * (i as f64 - 0.5) / 1000.0)
                .filter(|a| (a - 1.0).abs() >= 0.01),
        );
        g
    } else {
        args.alpha.clone()
    };
    let sweep = sweep_constants(&grid)?;
    match &args.out {
        Some(path) => sweep.write_csv(fs::File::create(path)?)?,
        None => {
            let mut buf = Vec::new();
            sweep.write_csv(&mut buf)?;
            print_stdout(&String::from_utf8(buf)?)?;
        }
    }
    if let Some(path) = &args.summary {
        let summary = json!({
            "rows": sweep.rows.len(),
            "negative_grid_max": sweep.negative_grid_max,
            "negative_supremum": sweep.negative_supremum,
            "max_relation_residual": sweep.max_relation_residual,
        });
        fs::write(path, serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    Ok(Outcome::Pass)
}

fn residual(args: &InstanceArgs) -> CliResult<Outcome> {
    let s = args.subject()?;
    let summary = sup_residual(&s.function, s.alpha, &s.config.sampler()?)?;
    emit(&summary, args.out.as_deref())?;
    Ok(Outcome::Pass)
}

fn extract(args: &InstanceArgs) -> CliResult<Outcome> {
    let s = args.subject()?;
    let candidate = extract_candidate(&s.function, s.alpha)?;
    emit(
        &json!({
            "alpha": s.alpha.value(),
            "candidate": candidate,
            "k_alpha": k_alpha(s.alpha)?,
            "c_amplification": infostab::stability::c_amplification(s.alpha),
        }),
        args.out.as_deref(),
    )?;
    Ok(Outcome::Pass)
}

fn certify(args: &CertifyArgs) -> CliResult<Outcome> {
    let s = args.instance.subject()?;
    let sampler = s.config.sampler()?;
    let opts = s.config.certify_options();
    let cert = match &s.closed {
        None => certify_open(&s.function, s.alpha, &sampler, &opts)?,
        Some(closed) => certify_closed(closed, s.alpha, &sampler, &opts)?,
    };
    if let Some(path) = &args.diagnostics {
        fs::write(path, serde_json::to_string_pretty(&cert)? + "\n")?;
    }
    emit(&cert.certificate, args.instance.out.as_deref())?;
    Ok(cert.certificate.pass.into())
}

fn oracle_fit(args: &InstanceArgs) -> CliResult<Outcome> {
    let s = args.subject()?;
    let grid = deviation_grid(s.config.margin, s.config.deviation_points);
    let oracle = if s.alpha.is_zero() {
        Some(serde_json::to_value(chebyshev_fit_log(
            &s.function,
            &grid,
        )?)?)
    } else if s.alpha.value().abs() > MIN_POWER_ALPHA {
        Some(serde_json::to_value(chebyshev_fit_power(
            &s.function,
            s.alpha,
            &grid,
        )?)?)
    } else {
        None
    };
    let candidate = extract_candidate(&s.function, s.alpha)?;
    let mut dev = 0f64;
    for &x in &grid {
        dev = dev.max((s.function.eval(x)? - candidate.eval(s.alpha, x)?).abs());
    }
    emit(
        &json!({
            "alpha": s.alpha.value(),
            "grid_points": grid.len(),
            "oracle": oracle,
            "constructive": { "candidate": candidate, "sup_deviation": dev },
        }),
        args.out.as_deref(),
    )?;
    Ok(Outcome::Pass)
}

fn entropy(args: &EntropyArgs) -> CliResult<Outcome> {
    let alpha = args.alpha.map(Alpha::new).transpose()?;
    let rows = args
        .vectors
        .vectors()?
        .iter()
        .map(|p| {
            Ok(json!({
                "p": p,
                "shannon": shannon(p),
                "degree_alpha": alpha.map(|a| degree_alpha(p, a)).transpose()?,
            }))
        })
        .collect::<infostab::Result<Vec<_>>>()?;
    emit(
        &json!({ "alpha": args.alpha, "rows": rows }),
        args.out.as_deref(),
    )?;
    Ok(Outcome::Pass)
}

fn two_symbol(input: &Option<InputSpec>, alpha: Alpha) -> CliResult<UnitIntervalFunction> {
    Ok(match input {
        None => two_symbol_entropy(alpha),
        Some(InputSpec::Power(a, b)) => UnitIntervalFunction::power(*a, *b, alpha),
        Some(InputSpec::Log(l, c)) => UnitIntervalFunction::log(*l, *c),
        Some(InputSpec::Table(path)) => UnitIntervalFunction::Tabulated(Tabulated::load(path)?),
    })
}

fn recursive(args: &RecursiveArgs) -> CliResult<Outcome> {
    let alpha = Alpha::new(args.alpha)?;
    let i2 = two_symbol(&args.input, alpha)?;
    let vectors = args.vectors.vectors()?;
    let mut rows = Vec::new();
    for p in &vectors {
        let built = recursive_build(&i2, alpha, p)?;
        let closed = degree_alpha(p, alpha)?;
        rows.push(json!({ "p": p, "recursive": built, "degree_alpha": closed, "gap": (built - closed).abs() }));
    }
    let triples: Vec<ProbabilityVector> = vectors.into_iter().filter(|p| p.len() == 3).collect();
    let semi = if triples.is_empty() {
        None
    } else {
        Some(semi_symmetry_defect(
            |p| recursive_build(&i2, alpha, p),
            &triples,
        )?)
    };
    emit(
        &json!({ "alpha": args.alpha, "rows": rows, "semi_symmetry_defect": semi }),
        args.out.as_deref(),
    )?;
    Ok(Outcome::Pass)
}

fn system_certify(args: &SystemArgs) -> CliResult<Outcome> {
    let alpha = Alpha::new(args.alpha)?;
    let i2 = two_symbol_entropy(alpha).perturbed(PerturbationSpec {
        epsilon: args.epsilon,
        kind: args.noise_kind.into(),
        seed: args.noise_seed,
    })?;
    let simplex = SimplexSampler::new(args.vectors, args.margin, args.seed);
    let slack = if args.slack.is_empty() {
        let triangle = OpenTriangleSampler::new(
            args.samples,
            args.margin / 2.0,
            args.seed,
            SamplingScheme::HaltonQuasiRandom,
        )?;
        measure_slack(&i2, alpha, args.n_max, &triangle, &simplex)?
    } else {
        args.slack.clone()
    };
    let system = MeasureSystem::new(i2, alpha, slack)?;
    let report = system_certificate(&system, args.n_max, &simplex)?;
    emit(&report, args.out.as_deref())?;
    Ok(report.pass.into())
}

fn gen(args: &GenArgs) -> CliResult<Outcome> {
    let mut cfg = args.instance.config()?;
    cfg.manifest_path = args.instance.out.clone();
    cfg.table_path = args.table.clone();
    if let Some(InputSpec::Table(_)) = args.instance.input {
        return Err("gen builds instances from power(a,b) or log(lambda,c)".into());
    }
    let instance = gen_instance(&cfg)?;
    let mut manifest = serde_json::to_value(&instance.manifest)?;
    if let Some(alpha) = cfg.alpha().ok().filter(|_| cfg.domain == Domain::Closed) {
        manifest["closed_bound_factor"] = json!(closed_bound_factor(alpha)?);
    }
    print_stdout(&(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(Outcome::Pass)
}

fn batch(args: &BatchArgs) -> CliResult<Outcome> {
    let configs = args
        .configs
        .iter()
        .map(ExperimentConfig::load)
        .collect::<infostab::Result<Vec<_>>>()?;
    let report = run_batch(&configs, args.workers)?;
    emit(&report, args.out.as_deref())?;
    if report.errors > 0 {
        return Err(format!(
            "{} of {} configs could not be run",
            report.errors, report.total
        )
        .into());
    }
    Ok((report.failed == 0).into())
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    match &cli.command {
        Command::Constants(a) => constants(a),
        Command::Residual(a) => residual(a),
        Command::Extract(a) => extract(a),
        Command::Certify(a) => certify(a),
        Command::Entropy(a) => entropy(a),
        Command::Recursive(a) => recursive(a),
        Command::SystemCertify(a) => system_certify(a),
        Command::OracleFit(a) => oracle_fit(a),
        Command::Gen(a) => gen(a),
        Command::Batch(a) => batch(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
