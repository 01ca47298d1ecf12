//! `hodgekit` command-line driver.
//!
//! Every command writes one JSON document (to `--output` or stdout). Exit
//! codes: 0 on success, 1 on a domain error or a failed acceptance run,
//! 2 on usage errors.

use clap::{Args, Parser, Subcommand};
use hodgekit::family::{verify_commutation, DifferenceScheme, Family, FamilySpec, ParamGrid};
use hodgekit::norms::{estimate_green_operator_norm, norm_report, NormFamily};
use hodgekit::oracle::{circle_eigenvalue_sweep, convergence_sweep, oracle_form, Manifold, Quantity};
use hodgekit::suite::{run_suite_with_determinism, Bound, Check, SuiteConfig};
use hodgekit::{io, build_metric, Cochain, CochainRecord, HodgeError, HodgeSystem, Scheme, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "hodgekit", version, about = "Discrete Hodge decomposition and primitive operator")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalArgs {
    /// Mass-matrix scheme.
    #[arg(long, global = true, default_value = "whitney")]
    metric: Scheme,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Relative residual demanded from linear solves.
    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive)]
    solver_tol: f64,
    /// Eigenvalues below this fraction of λ_max count as harmonic.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    rank_cutoff: f64,
    /// Threshold for exactness tests.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive)]
    exactness_tol: f64,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
enum Command {
    /// Split a cochain into exact, coexact and harmonic parts.
    Decompose {
        /// Mesh file (OFF or line graph) or `corpus:<name>`.
        mesh: String,
        cochain: PathBuf,
        #[arg(long)]
        degree: usize,
    },
    /// Coexact primitive δGω of an exact cochain.
    Primitive { mesh: String, cochain: PathBuf },
    /// L², H^s and C^k norms of a cochain.
    Norms {
        mesh: String,
        cochain: PathBuf,
        #[arg(long, default_value_t = 2)]
        s: i64,
        #[arg(long, default_value_t = 1)]
        k: i64,
    },
    /// Empirical H^{s-2} → H^s norm of the Green operator.
    GreenNorm {
        mesh: String,
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 2)]
        s: i64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Commutation and convergence checks on a registry family.
    FamilyVerify {
        mesh: String,
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        #[arg(long, default_value = "centered")]
        scheme: DifferenceScheme,
        #[arg(long, default_value_t = 2)]
        kmax: u32,
    },
    /// Convergence of discrete operators to the Fourier oracle.
    SpectralCompare {
        #[arg(long, default_value = "t2")]
        manifold: Manifold,
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        resolutions: Vec<usize>,
        /// Oracle form, or `eigenvalue` for the first circle eigenvalue.
        #[arg(long)]
        form: String,
        #[arg(long, default_value = "primitive")]
        quantity: QuantityArg,
    },
    /// Run the acceptance suite.
    CorpusTest,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "lowercase")]
enum QuantityArg {
    Green,
    Primitive,
    Laplacian,
}

impl From<QuantityArg> for Quantity {
    fn from(q: QuantityArg) -> Self {
        match q {
            QuantityArg::Green => Quantity::Green,
            QuantityArg::Primitive => Quantity::Primitive,
            QuantityArg::Laplacian => Quantity::Laplacian,
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Decompose { .. } => "decompose",
            Command::Primitive { .. } => "primitive",
            Command::Norms { .. } => "norms",
            Command::GreenNorm { .. } => "green-norm",
            Command::FamilyVerify { .. } => "family-verify",
            Command::SpectralCompare { .. } => "spectral-compare",
            Command::CorpusTest => "corpus-test",
        }
    }
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    version: &'static str,
    command: &'static str,
    config: Value,
    seed: u64,
    passed: bool,
    checks: Vec<Check>,
    result: Value,
}

struct Outcome {
    checks: Vec<Check>,
    result: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn tolerances(g: &GlobalArgs) -> Tolerances {
    Tolerances {
        rank_cutoff: g.rank_cutoff,
        solver: g.solver_tol,
        exactness: g.exactness_tol,
    }
}

fn system_for(mesh: &str, g: &GlobalArgs) -> hodgekit::Result<HodgeSystem> {
    let complex = io::load_mesh(mesh)?;
    Ok(HodgeSystem::with_tolerances(build_metric(complex, g.metric)?, tolerances(g)))
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

fn record(c: &Cochain) -> CochainRecord {
    CochainRecord::from_cochain(c)
}

fn decompose(system: &HodgeSystem, omega: &Cochain) -> hodgekit::Result<Outcome> {
    let metric = system.metric();
    let dec = system.decompose(omega)?;
    let norm = metric.l2_norm(omega)?;
    let parts = [&dec.exact, &dec.coexact, &dec.harmonic];
    let mut orthogonality = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            orthogonality = orthogonality.max(metric.inner(parts[i], parts[j])?.abs());
        }
    }
    let orthogonality = relative(orthogonality, norm * norm);
    let reconstruction = relative(dec.residual, norm);
    let alpha_residual = match &dec.primitive {
        Some(a) => Some(relative(
            metric.l2_norm(&metric.complex().d(a)?.sub(&dec.exact)?)?,
            metric.l2_norm(&dec.exact)?,
        )),
        None => None,
    };
    let beta_residual = match &dec.copotential {
        Some(b) => Some(relative(
            metric.l2_norm(&metric.delta(b)?.sub(&dec.coexact)?)?,
            metric.l2_norm(&dec.coexact)?,
        )),
        None => None,
    };
    let mut checks = vec![
        Check::new("reconstruction ‖ω − Σ parts‖ / ‖ω‖", reconstruction, Bound::AtMost(1e-8)),
        Check::new("orthogonality max |⟨a,b⟩| / ‖ω‖²", orthogonality, Bound::AtMost(1e-8)),
    ];
    if let Some(r) = alpha_residual {
        checks.push(Check::new("‖dα − exact‖ / ‖exact‖", r, Bound::AtMost(1e-8)));
    }
    if let Some(r) = beta_residual {
        checks.push(Check::new("‖δβ − coexact‖ / ‖coexact‖", r, Bound::AtMost(1e-8)));
    }
    Ok(Outcome {
        checks,
        result: json!({
            "exact": record(&dec.exact),
            "coexact": record(&dec.coexact),
            "harmonic": record(&dec.harmonic),
            "alpha": dec.primitive.as_ref().map(record),
            "beta": dec.copotential.as_ref().map(record),
            "residuals": {
                "reconstruction": reconstruction,
                "orthogonality": orthogonality,
                "alpha": alpha_residual,
                "beta": beta_residual,
            },
        }),
    })
}

fn primitive(system: &HodgeSystem, omega: &Cochain) -> hodgekit::Result<Outcome> {
    let metric = system.metric();
    let exactness = system.is_exact(omega, system.tolerances().exactness)?;
    let alpha = system.primitive(omega)?;
    let d_residual = relative(
        metric.l2_norm(&metric.complex().d(&alpha)?.sub(omega)?)?,
        metric.l2_norm(omega)?,
    );
    let dec = system.decompose(&alpha)?;
    let kernel = relative(
        metric.l2_norm(&dec.exact.add(&dec.harmonic)?)?,
        metric.l2_norm(&alpha)?,
    );
    Ok(Outcome {
        checks: vec![
            Check::new("‖dα − ω‖ / ‖ω‖", d_residual, Bound::AtMost(1e-8)),
            Check::new("‖P_ker d α‖ / ‖α‖", kernel, Bound::AtMost(1e-8)),
        ],
        result: json!({
            "primitive": record(&alpha),
            "exactness": exactness,
            "residuals": { "d": d_residual, "kernel_projection": kernel },
        }),
    })
}

fn family_verify(system: &HodgeSystem, cmd: &Command, seed: u64) -> hodgekit::Result<Outcome> {
    let Command::FamilyVerify { family, degree, t0, t1, steps, scheme, kmax, .. } = cmd else {
        unreachable!("called for family-verify only")
    };
    let params = hodgekit::family::family_definition(family)?.params;
    let spec = FamilySpec {
        family: family.clone(),
        degree: *degree,
        grid: ParamGrid::uniform(*t0, *t1, *steps, params)?,
        seed,
    };
    let fam = Family::new(spec, system.metric().complex())?;
    let report = verify_commutation(&fam, system, *scheme, *kmax)?;
    let mut checks: Vec<Check> = report
        .linearity
        .iter()
        .map(|c| {
            Check::new(
                format!("direction {} h={} ‖G(Δ_hω) − Δ_h(Gω)‖ relative", c.direction, c.h),
                c.max_residual,
                Bound::AtMost(1e-10),
            )
        })
        .collect();
    let rate_bound = match scheme {
        DifferenceScheme::Centered => Bound::Within(1.8, 2.2),
        DifferenceScheme::Forward => Bound::AtLeast(0.9),
    };
    for s in report.convergence.iter().filter(|s| s.rate_expected) {
        let label = format!("direction {} C^{} proxy rate", s.direction, s.k);
        checks.push(match s.rate {
            Some(r) => Check::new(label, r, rate_bound),
            None => Check {
                label,
                measured: None,
                bound: rate_bound,
                passed: false,
                error: Some("rate fit failed".into()),
            },
        });
    }
    Ok(Outcome {
        checks,
        result: to_value(&report),
    })
}

fn execute(cli: &Cli) -> hodgekit::Result<Outcome> {
    let g = &cli.global;
    Ok(match &cli.command {
        Command::Decompose { mesh, cochain, degree } => {
            let system = system_for(mesh, g)?;
            let omega = io::read_cochain(cochain, system.metric().complex())?;
            if omega.degree() != *degree {
                return Err(HodgeError::CochainMalformed(format!(
                    "cochain has degree {}, --degree is {degree}",
                    omega.degree()
                )));
            }
            decompose(&system, &omega)?
        }
        Command::Primitive { mesh, cochain } => {
            let system = system_for(mesh, g)?;
            let omega = io::read_cochain(cochain, system.metric().complex())?;
            primitive(&system, &omega)?
        }
        Command::Norms { mesh, cochain, s, k } => {
            let system = system_for(mesh, g)?;
            let metric = system.metric();
            let omega = io::read_cochain(cochain, metric.complex())?;
            let reports = vec![
                norm_report(metric, &omega, NormFamily::L2, 0)?,
                norm_report(metric, &omega, NormFamily::Hs, *s)?,
                norm_report(metric, &omega, NormFamily::Ck, *k)?,
            ];
            Outcome {
                checks: Vec::new(),
                result: to_value(&reports),
            }
        }
        Command::GreenNorm { mesh, degree, s, trials } => {
            let system = system_for(mesh, g)?;
            let estimate = estimate_green_operator_norm(&system, *degree, *s, *trials, g.seed)?;
            Outcome {
                checks: vec![Check::new("estimate finite", estimate.estimate, Bound::AtLeast(0.0))],
                result: to_value(&estimate),
            }
        }
        cmd @ Command::FamilyVerify { mesh, .. } => {
            let system = system_for(mesh, g)?;
            family_verify(&system, cmd, g.seed)?
        }
        Command::SpectralCompare { manifold, resolutions, form, quantity } => {
            let report = if form == "eigenvalue" {
                if *manifold != Manifold::T1 {
                    return Err(HodgeError::Parameter("the eigenvalue sweep runs on the circle (t1)".into()));
                }
                circle_eigenvalue_sweep(resolutions, g.metric)?
            } else {
                let f = oracle_form(form)?;
                if f.manifold() != *manifold {
                    return Err(HodgeError::Parameter(format!("form '{form}' does not live on {manifold:?}")));
                }
                convergence_sweep(&f, (*quantity).into(), resolutions, g.metric)?
            };
            Outcome {
                checks: Vec::new(),
                result: to_value(&report),
            }
        }
        Command::CorpusTest => {
            let config = SuiteConfig {
                seed: g.seed,
                scheme: g.metric,
                tolerances: tolerances(g),
            };
            let report = run_suite_with_determinism(config)?;
            for c in &report.criteria {
                eprintln!("{}", c.summary_line());
            }
            let checks = report
                .criteria
                .iter()
                .map(|c| Check::new(format!("criterion {} {}", c.id, c.name), f64::from(u8::from(c.passed)), Bound::Equal(1.0)))
                .collect();
            Outcome {
                checks,
                result: to_value(&report.criteria),
            }
        }
    })
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("stdout: {e}")),
                _ => Ok(()),
            }
        }
    }
}

fn error_json(command: &str, code: &str, message: &str) -> String {
    let doc = json!({
        "schema": hodgekit::SCHEMA,
        "version": hodgekit::VERSION,
        "command": command,
        "error": { "code": code, "message": message },
    });
    serde_json::to_string_pretty(&doc).expect("error documents serialize")
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HODGEKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("HODGEKIT_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot configure {n} worker threads: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let command = cli.command.name();
    let output = cli.global.output.as_ref();
    match execute(&cli) {
        Ok(outcome) => {
            let passed = outcome.checks.iter().all(|c| c.passed);
            let report = Report {
                schema: hodgekit::SCHEMA,
                version: hodgekit::VERSION,
                command,
                config: json!({ "global": &cli.global, "command": &cli.command }),
                seed: cli.global.seed,
                passed,
                checks: outcome.checks,
                result: outcome.result,
            };
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            match emit(&text, output) {
                Ok(()) if passed || command != "corpus-test" => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
                Err(msg) => {
                    eprintln!("{}", error_json(command, "output", &msg));
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            let text = error_json(command, e.code(), &e.to_string());
            if emit(&text, output).is_err() {
                eprintln!("{text}");
            }
            ExitCode::from(1)
        }
    }
}
