//! Command-line front end: loads metric specification documents, runs tensor
//! reports, characterization checks, the identity audit and geodesic
//! comparisons, and emits JSON-lines or CSV.
//!
//! Exit codes: 0 when every check passed, 1 when any check failed, 2 on
//! input or validation errors (with a machine-readable `{"error": ...}`
//! record on the output stream).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use finsler_lab::alphabeta::PhiFamily;
use finsler_lab::error::Error;
use finsler_lab::exec;
use finsler_lab::fields::{ChartPoint, FiberVector, MetricSpec};
use finsler_lab::geodesics::{compare_traces, integrate_geodesic};
use finsler_lab::identity::audit_identity;
use finsler_lab::projective::{
    check_douglas_ode, check_douglas_quadratic, check_isotropic_berwald,
    check_isotropic_mean_berwald, check_killing_constant_length, check_matsumoto_douglas,
    check_riemann_projective, check_spray_proportional, check_projective_characterization, CheckVerdict,
    SamplePlan,
};
use finsler_lab::report::{to_json_line, trace_to_csv, trace_to_json_lines, TensorRecord};
use finsler_lab::spray::spray_point_data;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ToleranceTier {
    /// Pure fiber algebra (1e-10).
    Fiber,
    /// Mixed analytic pipelines (1e-7).
    Analytic,
    /// Finite-difference comparisons (1e-4).
    Fd,
}

impl ToleranceTier {
    fn value(self) -> f64 {
        match self {
            ToleranceTier::Fiber => finsler_lab::tol::TIER_FIBER,
            ToleranceTier::Analytic => finsler_lab::tol::TIER_ANALYTIC,
            ToleranceTier::Fd => finsler_lab::tol::TIER_FD,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "finsler-lab",
    about = "spray, curvature and projective-equivalence checks for (alpha,beta)-metrics",
    version
)]
struct Cli {
    /// Write the report stream to a file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Chart points per sample plan.
    #[arg(long, global = true, default_value_t = 8)]
    points: usize,

    /// Fiber vectors per chart point.
    #[arg(long, global = true, default_value_t = 16)]
    fibers: usize,

    /// Seed for all sample draws.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Geodesic integration step.
    #[arg(long, global = true, default_value_t = 1e-3)]
    dt: f64,

    /// Geodesic integration horizon.
    #[arg(long, global = true, default_value_t = 1.0)]
    t_end: f64,

    /// Override every check tolerance with one of the named tiers.
    #[arg(long, global = true, value_enum)]
    tolerance_tier: Option<ToleranceTier>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-sample tensor report (g, spray, curvature norms, residuals).
    Tensors { spec: PathBuf },
    /// Douglas-type characterization for the spec's phi-family.
    DouglasCheck { spec: PathBuf },
    /// Projective-relatedness checks for a metric pair.
    ProjectiveCheck { spec_f: PathBuf, spec_fbar: PathBuf },
    /// Killing / isotropic-Berwald / isotropic-mean-Berwald checks.
    IsotropyCheck { spec: PathBuf },
    /// Audit of the closed-form transport-residual coefficient tables.
    VerifyIdentity { spec_f: PathBuf, spec_fbar: PathBuf },
    /// Integrate geodesics; with a second spec, compare traces as point sets.
    Geodesics {
        spec: PathBuf,
        spec_other: Option<PathBuf>,
        /// Start point, comma-separated (default: domain center).
        #[arg(long)]
        x0: Option<String>,
        /// Initial velocity, comma-separated (default: first axis).
        #[arg(long)]
        y0: Option<String>,
    },
}

fn load_spec(path: &PathBuf) -> Result<MetricSpec, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
    MetricSpec::from_json(&text)
}

fn parse_vector(text: &str, n: usize, what: &str) -> Result<Vec<f64>, Error> {
    let vals: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| Error::InvalidSpec(format!("{what}: {e}")))?;
    if vals.len() != n {
        return Err(Error::InvalidSpec(format!(
            "{what}: expected {n} components, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

fn retolerate(mut v: CheckVerdict, tier: Option<ToleranceTier>) -> CheckVerdict {
    if let Some(t) = tier {
        v.tolerance = t.value();
        v.pass = v.residual < v.tolerance;
    }
    v
}

struct Report {
    lines: Vec<String>,
    all_pass: bool,
}

impl Report {
    fn new() -> Self {
        Report {
            lines: Vec::new(),
            all_pass: true,
        }
    }

    fn push_verdict(&mut self, v: CheckVerdict) -> Result<(), Error> {
        self.all_pass &= v.pass;
        self.lines.push(to_json_line(&v)?);
        Ok(())
    }

    fn push_record<T: serde::Serialize>(&mut self, rec: &T) -> Result<(), Error> {
        self.lines.push(to_json_line(rec)?);
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<Report, Error> {
    if cli.points == 0 || cli.fibers == 0 {
        return Err(Error::InvalidSpec(
            "--points and --fibers must be at least 1".into(),
        ));
    }
    let tier = cli.tolerance_tier;
    let mut report = Report::new();
    match &cli.command {
        Command::Tensors { spec } => {
            let spec = load_spec(spec)?;
            let plan = SamplePlan::generate(&spec.domain, cli.points, cli.fibers, cli.seed);
            let mut samples = Vec::new();
            for (pi, x) in plan.points.iter().enumerate() {
                for (fi, y) in plan.fibers(pi).into_iter().enumerate() {
                    samples.push((pi, fi, x.clone(), y));
                }
            }
            let rows = exec::map_samples(&samples, |(pi, fi, x, y)| {
                spray_point_data(&spec, x, y)
                    .map(|d| TensorRecord::from_point_data(*pi, *fi, &x.coords, &y.coords, &d))
            });
            let mut used = 0usize;
            let mut skipped = 0usize;
            if cli.format == Format::Csv {
                report.lines.push(
                    "point_index,fiber_index,F,B_norm,D_norm,E_norm,spray_cross,g_euler,douglas_trace"
                        .to_string(),
                );
            }
            for row in rows {
                match row {
                    Ok(rec) => {
                        used += 1;
                        match cli.format {
                            Format::Json => report.push_record(&rec)?,
                            Format::Csv => report.lines.push(format!(
                                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                                rec.point_index,
                                rec.fiber_index,
                                rec.f,
                                rec.b_norm,
                                rec.d_norm,
                                rec.e_norm,
                                rec.residuals.spray_cross,
                                rec.residuals.g_euler,
                                rec.residuals.douglas_trace
                            )),
                        }
                    }
                    Err(Error::SingularEvaluation(_)) | Err(Error::NonPositiveDefinite(_)) => {
                        skipped += 1
                    }
                    Err(e) => return Err(e),
                }
            }
            if cli.format == Format::Json {
                #[derive(serde::Serialize)]
                struct Summary {
                    summary: &'static str,
                    samples_used: usize,
                    skipped: usize,
                    seed: u64,
                }
                report.push_record(&Summary {
                    summary: "tensors",
                    samples_used: used,
                    skipped,
                    seed: cli.seed,
                })?;
            }
        }
        Command::DouglasCheck { spec } => {
            let spec = load_spec(spec)?;
            let plan = SamplePlan::generate(&spec.domain, cli.points, cli.fibers, cli.seed);
            match spec.phi {
                PhiFamily::Quadratic { k, .. } => {
                    let v = retolerate(check_douglas_quadratic(&spec, &plan)?, tier);
                    report.push_verdict(v)?;
                    let ode =
                        retolerate(check_douglas_ode(&spec.phi, 2.0 * k, 0.0, -3.0 * k)?, tier);
                    report.push_verdict(ode)?;
                }
                PhiFamily::Matsumoto => {
                    let v = retolerate(check_matsumoto_douglas(&spec, &plan)?, tier);
                    report.push_verdict(v)?;
                }
            }
        }
        Command::ProjectiveCheck { spec_f, spec_fbar } => {
            let f = load_spec(spec_f)?;
            let g = load_spec(spec_fbar)?;
            if f.dim != g.dim {
                return Err(Error::InvalidSpec(
                    "paired specs must share the chart dimension".into(),
                ));
            }
            let domain = intersect_domains(&f, &g)?;
            let plan = SamplePlan::generate(&domain, cli.points, cli.fibers, cli.seed);
            report.push_verdict(retolerate(check_spray_proportional(&f, &g, &plan)?, tier))?;
            report.push_verdict(retolerate(check_riemann_projective(&f, &g, &plan)?, tier))?;
            let families_match = matches!(f.phi, PhiFamily::Quadratic { .. })
                && g.phi == PhiFamily::Matsumoto
                && f.dim >= 3;
            if families_match {
                report.push_verdict(retolerate(check_projective_characterization(&f, &g, &plan)?, tier))?;
            }
        }
        Command::IsotropyCheck { spec } => {
            let spec = load_spec(spec)?;
            let plan = SamplePlan::generate(&spec.domain, cli.points, cli.fibers, cli.seed);
            report.push_verdict(retolerate(
                check_killing_constant_length(&spec, &plan)?,
                tier,
            ))?;
            report.push_verdict(retolerate(
                check_isotropic_mean_berwald(&spec, &plan)?,
                tier,
            ))?;
            report.push_verdict(retolerate(check_isotropic_berwald(&spec, &plan)?, tier))?;
        }
        Command::VerifyIdentity { spec_f, spec_fbar } => {
            let f = load_spec(spec_f)?;
            let g = load_spec(spec_fbar)?;
            let domain = intersect_domains(&f, &g)?;
            let plan = SamplePlan::generate(&domain, cli.points, cli.fibers, cli.seed);
            let audit = audit_identity(&f, &g, &plan)?;
            report.push_record(&audit)?;
            // acceptable outcomes: tables confirmed, or a located defect;
            // a residual with no located group is a failed audit, as is a
            // drifting derived table set
            let located = audit.tables_confirmed || !audit.mismatched_groups.is_empty();
            let derived_ok = audit.max_residual_derived < finsler_lab::tol::IDENTITY_AUDIT;
            report.all_pass &= located && derived_ok && audit.samples_used > 0;
        }
        Command::Geodesics {
            spec,
            spec_other,
            x0,
            y0,
        } => {
            let f = load_spec(spec)?;
            let n = f.dim;
            let x0v = match x0 {
                Some(t) => parse_vector(t, n, "--x0")?,
                None => f
                    .domain
                    .min
                    .iter()
                    .zip(&f.domain.max)
                    .map(|(lo, hi)| 0.5 * (lo + hi))
                    .collect(),
            };
            let y0v = match y0 {
                Some(t) => parse_vector(t, n, "--y0")?,
                None => {
                    let mut v = vec![0.0; n];
                    v[0] = 1.0;
                    v
                }
            };
            let x0p = ChartPoint::new(x0v)?;
            let y0p = FiberVector::new(y0v)?;
            #[derive(serde::Serialize)]
            struct TraceSummary<'a> {
                trace_of: &'a str,
                exit: finsler_lab::geodesics::TraceExit,
                points: usize,
            }
            let tr = integrate_geodesic(&f, &x0p, &y0p, cli.t_end, cli.dt)?;
            match cli.format {
                Format::Csv => report.lines.push(trace_to_csv(&tr).trim_end().to_string()),
                Format::Json => {
                    report
                        .lines
                        .push(trace_to_json_lines(&tr)?.trim_end().to_string());
                    report.push_record(&TraceSummary {
                        trace_of: &tr.spec_id,
                        exit: tr.exit,
                        points: tr.points.len(),
                    })?;
                }
            }
            if let Some(other) = spec_other {
                let g = load_spec(other)?;
                if g.dim != n {
                    return Err(Error::InvalidSpec(
                        "paired specs must share the chart dimension".into(),
                    ));
                }
                let tr2 = integrate_geodesic(&g, &x0p, &y0p, cli.t_end, cli.dt)?;
                match cli.format {
                    Format::Csv => report.lines.push(trace_to_csv(&tr2).trim_end().to_string()),
                    Format::Json => {
                        report
                            .lines
                            .push(trace_to_json_lines(&tr2)?.trim_end().to_string());
                        report.push_record(&TraceSummary {
                            trace_of: &tr2.spec_id,
                            exit: tr2.exit,
                            points: tr2.points.len(),
                        })?;
                    }
                }
                let d = compare_traces(&tr, &tr2)?;
                #[derive(serde::Serialize)]
                struct Distance {
                    pointset_distance: f64,
                    spec_a: String,
                    spec_b: String,
                }
                if cli.format == Format::Json {
                    report.push_record(&Distance {
                        pointset_distance: d,
                        spec_a: tr.spec_id.clone(),
                        spec_b: tr2.spec_id.clone(),
                    })?;
                } else {
                    report.lines.push(format!("pointset_distance,{d:.16e}"));
                }
            }
        }
    }
    Ok(report)
}

fn intersect_domains(f: &MetricSpec, g: &MetricSpec) -> Result<finsler_lab::fields::Domain, Error> {
    let min: Vec<f64> = f
        .domain
        .min
        .iter()
        .zip(&g.domain.min)
        .map(|(a, b)| a.max(*b))
        .collect();
    let max: Vec<f64> = f
        .domain
        .max
        .iter()
        .zip(&g.domain.max)
        .map(|(a, b)| a.min(*b))
        .collect();
    if min.iter().zip(&max).any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::InvalidSpec("chart domains do not overlap".into()));
    }
    Ok(finsler_lab::fields::Domain { min, max })
}

fn emit(cli: &Cli, body: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, body),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(body.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    exec::init_threads_from_env();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let mut body = report.lines.join("\n");
            body.push('\n');
            if emit(&cli, &body).is_err() {
                return ExitCode::from(2);
            }
            if report.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let record = format!("{{\"error\": {}}}\n", serde_json::json!(e.to_string()));
            let _ = emit(&cli, &record);
            ExitCode::from(2)
        }
    }
}
