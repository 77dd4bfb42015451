//! `extremal`: estimate extremal-dependence measures, simulate domination of
//! sample maxima and run the identity suites from the command line.
//!
//! Exit codes: 0 success, 1 numeric failure (or a failed check),
//! 2 configuration error, 3 capability error.

mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use extremal_core::checks::{run_suite, CheckLine, CheckOptions, Suite};
use extremal_core::domination::{
    convergence_sweep_lambda, convergence_sweep_mu, fmt_f64, simulate_domination, MaximaMode, SweepReport,
};
use extremal_core::families::Family;
use extremal_core::measures::{
    estimate_lambda, estimate_lambda_self, estimate_mu, estimate_mu_direct, estimate_mu_psi, theta, theta_mc,
    upper_tail_coefficient, xi_finite_difference, EstimatorResult, Method, Xi,
};
use extremal_core::oracles::{exact_domination_h0_hinf, mu_quadrature, xi_closed_form};
use extremal_core::quadrature::QuadratureSpec;
use extremal_core::{DistributionSpec, Error, SpectralModel, StreamKey};

use config::{Format, Settings};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_N: u64 = 1_000_000;

#[derive(Parser)]
#[command(name = "extremal", version, about = "Extremal-dependence measures of max-stable distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate mu(H,Q), lambda(Q,H), theta(H), the tail coefficient or xi_H.
    Measure {
        #[arg(value_enum)]
        what: MeasureKind,
        #[command(flatten)]
        settings: Settings,
    },
    /// Simulate marginal and complete domination of sample maxima.
    Dominate {
        #[command(flatten)]
        settings: Settings,
    },
    /// Finite-n sequences converging to mu or lambda.
    Converge {
        #[arg(value_enum)]
        what: SweepKind,
        #[command(flatten)]
        settings: Settings,
    },
    /// Run an identity suite: bounds, bivariate, subsets, kleje, indep or all.
    Check {
        suite: String,
        #[command(flatten)]
        settings: Settings,
    },
    /// Deterministic reference computations.
    Oracle {
        #[arg(value_enum)]
        what: OracleKind,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    Mu,
    Lambda,
    Theta,
    TailCoef,
    Xi,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Mu,
    Lambda,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Quadrature,
    Xi,
    ExactDomination,
}

enum Failure {
    Config(String),
    Core(Error),
    Io(std::io::Error),
    ChecksFailed(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Core(Error::InvalidParameter(_) | Error::Parse(_)) => 2,
            Failure::Core(Error::Capability(_)) => 3,
            Failure::Core(Error::Numeric(_)) | Failure::Io(_) | Failure::ChecksFailed(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => format!("i/o error: {e}"),
            Failure::ChecksFailed(k) => format!("{k} check(s) failed"),
        }
    }
}

/// A rendered result: JSON always, CSV body and plain text when meaningful.
struct Report {
    json: Value,
    csv: Option<String>,
    text: Option<String>,
    default: Format,
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, Failure> {
    v.as_deref().ok_or_else(|| Failure::Config(format!("missing --{flag}")))
}

fn parse_spec(v: &Option<String>, flag: &str) -> Result<DistributionSpec, Failure> {
    Ok(DistributionSpec::parse(required(v, flag)?)?)
}

fn parse_max_stable(v: &Option<String>, flag: &str) -> Result<SpectralModel, Failure> {
    let spec = parse_spec(v, flag)?;
    spec.as_max_stable()
        .cloned()
        .ok_or_else(|| Failure::Config(format!("--{flag} must be a max-stable model, got {spec}")))
}

fn estimator_json(measure: &str, r: &EstimatorResult, s: &Settings, h: &str, q: Option<&str>) -> Value {
    json!({
        "measure": measure,
        "estimate": r.estimate,
        "std_error": r.std_error,
        "n_samples": r.n_samples,
        "method": r.method.to_string(),
        "skipped": r.skipped,
        "seed": s.seed,
        "model_H": h,
        "model_Q": q,
        "version": VERSION,
        "config": s,
    })
}

fn estimator_csv(measure: &str, r: &EstimatorResult) -> String {
    format!(
        "measure,estimate,std_error,n_samples,method\n{measure},{},{},{},{}\n",
        fmt_f64(r.estimate),
        fmt_f64(r.std_error),
        r.n_samples,
        r.method
    )
}

fn envelope(command: &str, s: &Settings, result: Value) -> Value {
    json!({
        "command": command,
        "version": VERSION,
        "seed": s.seed,
        "config": s,
        "result": result,
    })
}

fn measure(what: MeasureKind, s: &mut Settings) -> Result<Report, Failure> {
    let seed = s.seed.expect("validated");
    let key = StreamKey::new(seed, 1, 0);
    let estimator = |name: &str, r: EstimatorResult, s: &Settings, h: &SpectralModel, q: Option<String>| Report {
        json: estimator_json(name, &r, s, &h.to_string(), q.as_deref()),
        csv: Some(estimator_csv(name, &r)),
        text: None,
        default: Format::Json,
    };
    match what {
        MeasureKind::Mu => {
            let n = *s.n.get_or_insert(DEFAULT_N);
            let method = s.method.get_or_insert_with(|| "spectral".into()).clone();
            let h = parse_max_stable(&s.h, "H")?;
            let q = parse_spec(&s.q, "Q")?;
            let r = match method.as_str() {
                "spectral" => estimate_mu(&h, &q, n, key)?,
                "direct" => estimate_mu_direct(&h, &q, n, key)?,
                "psi" => estimate_mu_psi(&h, &q, n, key)?,
                "quadrature" => {
                    let qm = parse_max_stable(&s.q, "Q")?;
                    let spec = quadrature_spec(s)?;
                    EstimatorResult::exact(mu_quadrature(&h, &qm, &spec)?, Method::Quadrature)
                }
                other => return Err(Failure::Config(format!("unknown method `{other}` for mu"))),
            };
            Ok(estimator("mu", r, s, &h, Some(q.to_string())))
        }
        MeasureKind::Lambda => {
            let n = *s.n.get_or_insert(DEFAULT_N);
            let method = s.method.get_or_insert_with(|| "spectral".into()).clone();
            let h = parse_max_stable(&s.h, "H")?;
            let (r, q) = match method.as_str() {
                "spectral" => {
                    let q = parse_spec(&s.q, "Q")?;
                    (estimate_lambda(&h, &q, n, key)?, q.to_string())
                }
                "self" => {
                    if let Some(q) = &s.q {
                        let q = DistributionSpec::parse(q)?;
                        if q.as_max_stable() != Some(&h) {
                            return Err(Failure::Config("method `self` needs Q equal to H".into()));
                        }
                    }
                    (estimate_lambda_self(&h, n, key)?, h.to_string())
                }
                other => return Err(Failure::Config(format!("unknown method `{other}` for lambda"))),
            };
            Ok(estimator("lambda", r, s, &h, Some(q)))
        }
        MeasureKind::Theta => {
            let n = *s.n.get_or_insert(DEFAULT_N);
            let h = parse_max_stable(&s.h, "H")?;
            let r = match s.method.as_deref() {
                None | Some("closed_form") => theta(&h, n, key)?,
                Some("spectral") => theta_mc(&h, n, key)?,
                Some(other) => return Err(Failure::Config(format!("unknown method `{other}` for theta"))),
            };
            Ok(estimator("theta", r, s, &h, None))
        }
        MeasureKind::TailCoef => {
            let h = parse_max_stable(&s.h, "H")?;
            let r = EstimatorResult::exact(upper_tail_coefficient(&h)?, Method::ClosedForm);
            Ok(estimator("tail_coef", r, s, &h, None))
        }
        MeasureKind::Xi => {
            let h = parse_max_stable(&s.h, "H")?;
            let x1 = *s.x1.get_or_insert(1.0);
            let x2 = *s.x2.get_or_insert(1.0);
            let steps = s.h_list.get_or_insert_with(|| vec![1e-2, 1e-3, 1e-4]).clone();
            let mut rows = Vec::new();
            let mut csv = String::from("h,xi,singular\n");
            for step in steps {
                let xi = xi_finite_difference(&h, x1, x2, step)?;
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    fmt_f64(step),
                    xi.value().map(fmt_f64).unwrap_or_default(),
                    matches!(xi, Xi::Singular { .. })
                );
                rows.push(json!({"h": step, "xi": xi}));
            }
            let oracle = match xi_closed_form(&h, x1, x2) {
                Ok(x) => json!(x),
                Err(Error::Capability(_)) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            Ok(Report {
                json: json!({
                    "measure": "xi",
                    "x1": x1,
                    "x2": x2,
                    "finite_difference": rows,
                    "closed_form": oracle,
                    "seed": s.seed,
                    "model_H": h.to_string(),
                    "model_Q": Value::Null,
                    "version": VERSION,
                    "config": &*s,
                }),
                csv: Some(csv),
                text: None,
                default: Format::Json,
            })
        }
    }
}

fn quadrature_spec(s: &mut Settings) -> Result<QuadratureSpec, Failure> {
    let tol = *s.abs_tol.get_or_insert(1e-9);
    let max = *s.max_subdivisions.get_or_insert(5_000);
    Ok(QuadratureSpec::new(1, tol, max)?)
}

fn dominate(s: &mut Settings) -> Result<Report, Failure> {
    let seed = s.seed.expect("validated");
    let f = parse_spec(&s.f, "F")?;
    let g = match &s.g {
        Some(_) => parse_spec(&s.g, "G")?,
        None => f.clone(),
    };
    let n_list = s.n_list.get_or_insert_with(|| vec![1, 10, 100, 1000]).clone();
    let reps = *s.reps.get_or_insert(DEFAULT_N);
    let mode = if *s.brute_force.get_or_insert(false) {
        MaximaMode::BruteForce
    } else {
        MaximaMode::Auto
    };
    let report = simulate_domination(&f, &g, &n_list, reps, StreamKey::new(seed, 2, 0), mode)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(Failure::Io)?;
    Ok(Report {
        json: envelope("dominate", s, json!(report)),
        csv: Some(String::from_utf8(csv).expect("ascii")),
        text: None,
        default: Format::Csv,
    })
}

fn converge(what: SweepKind, s: &mut Settings) -> Result<Report, Failure> {
    let seed = s.seed.expect("validated");
    let h = parse_max_stable(&s.h, "H")?;
    let q = parse_spec(&s.q, "Q")?;
    let n_list = s.n_list.get_or_insert_with(|| vec![10, 100, 1000]).clone();
    let n = *s.n.get_or_insert(DEFAULT_N);
    let key = StreamKey::new(seed, 3, 0);
    let (name, r): (&str, SweepReport) = match what {
        SweepKind::Mu => ("converge mu", convergence_sweep_mu(&h, &q, &n_list, n, key)?),
        SweepKind::Lambda => ("converge lambda", convergence_sweep_lambda(&h, &q, &n_list, n, key)?),
    };
    let mut csv = String::from("n,estimate,std_error,reference,reference_se\n");
    for row in &r.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.n,
            fmt_f64(row.estimate),
            fmt_f64(row.std_error),
            fmt_f64(r.reference.estimate),
            fmt_f64(r.reference.std_error)
        );
    }
    Ok(Report {
        json: envelope(name, s, json!(r)),
        csv: Some(csv),
        text: None,
        default: Format::Csv,
    })
}

fn check(suite: &str, s: &mut Settings) -> Result<(Report, usize), Failure> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::parse(suite).ok_or_else(|| {
            Failure::Config(format!(
                "unknown suite `{suite}` (expected bounds, bivariate, subsets, kleje, indep or all)"
            ))
        })?]
    };
    let mut opts = CheckOptions::new(s.seed.expect("validated"));
    opts.n = *s.n.get_or_insert(opts.n);
    opts.reps = *s.reps.get_or_insert(opts.reps);
    if let Some(d) = s.d {
        if s.h.is_none() && s.q.is_none() {
            s.h = Some(format!("logistic({d}, 1.5)"));
            s.q = Some(format!("h0({d})"));
        }
    }
    opts.h = s.h.as_ref().map(|_| parse_max_stable(&s.h, "H")).transpose()?;
    opts.q = s.q.as_ref().map(|_| parse_spec(&s.q, "Q")).transpose()?;
    if let (Some(d), Some(h)) = (s.d, &opts.h) {
        if h.dim() != d {
            return Err(Failure::Config(format!("--d {d} does not match H = {h}")));
        }
    }
    let mut lines: Vec<CheckLine> = Vec::new();
    for suite in suites {
        lines.extend(run_suite(suite, &opts)?);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    let mut text = String::new();
    let mut csv = String::from("status,suite,name,relation,measured,tolerance\n");
    for l in &lines {
        let _ = writeln!(text, "{l}");
        let _ = writeln!(
            csv,
            "{},{},\"{}\",\"{}\",{},{}",
            if l.pass { "PASS" } else { "FAIL" },
            l.suite,
            l.name,
            l.relation,
            fmt_f64(l.measured),
            fmt_f64(l.tolerance)
        );
    }
    let _ = writeln!(text, "{} passed, {failed} failed", lines.len() - failed);
    Ok((
        Report {
            json: envelope(&format!("check {suite}"), s, json!({"lines": lines, "failed": failed})),
            csv: Some(csv),
            text: Some(text),
            default: Format::Json,
        },
        failed,
    ))
}

fn oracle(what: OracleKind, s: &mut Settings) -> Result<Report, Failure> {
    match what {
        OracleKind::Quadrature => {
            let h = parse_max_stable(&s.h, "H")?;
            let q = parse_max_stable(&s.q, "Q")?;
            let spec = quadrature_spec(s)?;
            let r = EstimatorResult::exact(mu_quadrature(&h, &q, &spec)?, Method::Quadrature);
            Ok(Report {
                json: estimator_json("mu", &r, s, &h.to_string(), Some(&q.to_string())),
                csv: Some(estimator_csv("mu", &r)),
                text: None,
                default: Format::Json,
            })
        }
        OracleKind::Xi => {
            let h = parse_max_stable(&s.h, "H")?;
            let x1 = *s.x1.get_or_insert(1.0);
            let x2 = *s.x2.get_or_insert(1.0);
            let xi = xi_closed_form(&h, x1, x2)?;
            Ok(Report {
                json: envelope("oracle xi", s, json!({"x1": x1, "x2": x2, "xi": xi})),
                csv: Some(format!(
                    "x1,x2,xi,singular\n{},{},{},{}\n",
                    fmt_f64(x1),
                    fmt_f64(x2),
                    xi.value().map(fmt_f64).unwrap_or_default(),
                    matches!(xi, Xi::Singular { .. })
                )),
                text: None,
                default: Format::Json,
            })
        }
        OracleKind::ExactDomination => {
            let family = match s.family.get_or_insert_with(|| "h0".into()).as_str() {
                "h0" => Family::Independence,
                "hinf" => Family::Comonotone,
                other => return Err(Failure::Config(format!("--family must be h0 or hinf, got `{other}`"))),
            };
            let d = *s.d.get_or_insert(2);
            let n_list = s.n_list.get_or_insert_with(|| vec![1, 10, 100]).clone();
            let mut rows = Vec::new();
            let mut csv = String::from("n,pi_marginal,pi_complete,n_pi_marginal,n_pi_complete\n");
            for n in n_list {
                let (pi, pibar) = exact_domination_h0_hinf(&family, d, n)?;
                let nf = n as f64;
                let _ = writeln!(
                    csv,
                    "{n},{},{},{},{}",
                    fmt_f64(pi),
                    fmt_f64(pibar),
                    fmt_f64(nf * pi),
                    fmt_f64(nf * pibar)
                );
                rows.push(json!({"n": n, "pi_marginal": pi, "pi_complete": pibar}));
            }
            Ok(Report {
                json: envelope("oracle exact-domination", s, json!(rows)),
                csv: Some(csv),
                text: None,
                default: Format::Csv,
            })
        }
    }
}

fn render(report: &Report, s: &Settings, command: &str) -> String {
    let config = serde_json::to_string(s).expect("serialisable");
    let header = format!("# extremal {VERSION}\n# command: {command}\n# config: {config}\n");
    match (s.format, &report.text) {
        (None, Some(text)) => format!("{header}{text}"),
        (format, _) => match format.unwrap_or(report.default) {
            Format::Json => {
                let mut out = serde_json::to_string_pretty(&report.json).expect("serialisable");
                out.push('\n');
                out
            }
            Format::Csv => format!("{header}{}", report.csv.as_deref().unwrap_or("")),
        },
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let (name, mut settings) = match &command {
        Command::Measure { what, settings } => (
            format!("measure {}", what.to_possible_value().expect("named").get_name()),
            settings.clone(),
        ),
        Command::Dominate { settings } => ("dominate".to_string(), settings.clone()),
        Command::Converge { what, settings } => (
            format!("converge {}", what.to_possible_value().expect("named").get_name()),
            settings.clone(),
        ),
        Command::Check { suite, settings } => (format!("check {suite}"), settings.clone()),
        Command::Oracle { what, settings } => (
            format!("oracle {}", what.to_possible_value().expect("named").get_name()),
            settings.clone(),
        ),
    };
    if let Some(path) = settings.config.clone() {
        settings = settings.or(Settings::load(&path).map_err(Failure::Config)?);
    }
    if settings.seed.is_none() {
        return Err(Failure::Config(
            "missing --seed (every run needs an explicit seed)\n\n\
             Usage: extremal <COMMAND> --seed <SEED> [OPTIONS]"
                .into(),
        ));
    }
    if let Some(t) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot configure {t} threads: {e}")))?;
    }

    let start = Instant::now();
    let mut failed = 0;
    let report = match command {
        Command::Measure { what, .. } => measure(what, &mut settings)?,
        Command::Dominate { .. } => dominate(&mut settings)?,
        Command::Converge { what, .. } => converge(what, &mut settings)?,
        Command::Check { suite, .. } => {
            let (r, k) = check(&suite, &mut settings)?;
            failed = k;
            r
        }
        Command::Oracle { what, .. } => oracle(what, &mut settings)?,
    };
    let text = render(&report, &settings, &name);
    match &settings.out {
        Some(path) => std::fs::write(path, text).map_err(Failure::Io)?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Failure::Io)?,
    }
    eprintln!("{name}: finished in {:.3} s", start.elapsed().as_secs_f64());
    if failed > 0 {
        return Err(Failure::ChecksFailed(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
