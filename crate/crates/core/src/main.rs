use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use halfspace_thermal::fd::{validate_field, FdGrid, ValidationPlan};
use halfspace_thermal::field::{evaluate_grid, temperature_at, EvalConfig, FieldResult};
use halfspace_thermal::model::{PhysicalPoint, ScaledPoint};
use halfspace_thermal::{identity_integral, Error, MaterialScales, ProblemConfig};

/// Transient heat conduction on a half-space with temperature data on
/// `y > 0` and flux data on `y < 0`.
#[derive(Debug, Parser)]
#[command(name = "halfspace-thermal", version, about)]
struct Cli {
    /// Problem configuration (JSON).
    #[arg(long, global = true, conflicts_with = "scenario")]
    config: Option<PathBuf>,

    /// Bundled problem, used when no --config is given.
    #[arg(long, global = true, value_enum, default_value_t = Scenario::Insulated)]
    scenario: Scenario,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Relative tolerance of the β-quadrature, in [1e-14, 1e-2].
    #[arg(long, global = true)]
    rel_tol: Option<f64>,

    /// Worker threads for grid evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,

    /// Read x, y in metres and t in seconds, report temperature in kelvin.
    #[arg(long, global = true)]
    physical: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scenario {
    /// Step temperature, perfect insulator.
    Insulated,
    /// Step temperature and step flux (T0 = T0' = 1).
    Imperfect,
    /// Ramp up and down on the temperature side, perfect insulator.
    RampInsulated,
    /// Ramp up and down on the temperature side, step flux.
    RampImperfect,
}

impl Scenario {
    fn json(self) -> &'static str {
        match self {
            Scenario::Insulated => include_str!("../scenarios/insulated.json"),
            Scenario::Imperfect => include_str!("../scenarios/imperfect.json"),
            Scenario::RampInsulated => include_str!("../scenarios/ramp-insulated.json"),
            Scenario::RampImperfect => include_str!("../scenarios/ramp-imperfect.json"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Temperature at every combination of the given x, y and t.
    Eval(EvalArgs),
    /// Temperature along lines of constant x.
    Slice(SliceArgs),
    /// Temperature on a rectangular grid at one time.
    Grid(GridArgs),
    /// Check that (1/(π√2)) ∫ G(β, θ) dβ equals 1 - H(θ).
    Identity(IdentityArgs),
    /// Compare with the finite-difference solver.
    Validate(ValidateArgs),
}

/// A list of values: `v`, `v1,v2,...` or `start:end:count`.
#[derive(Debug, Clone, PartialEq)]
struct Values(Vec<f64>);

fn parse_values(s: &str) -> Result<Values, String> {
    let num = |t: &str| -> Result<f64, String> {
        let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{t}` is not finite"))
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, end, count] => {
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("`{count}` is not a point count"))?;
            if n == 0 {
                return Err("range has no points".into());
            }
            halfspace_thermal::field::linspace(num(start)?, num(end)?, n)
        }
        [_] => s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(num)
            .collect::<Result<_, _>>()?,
        _ => return Err(format!("`{s}` is neither a list nor start:end:count")),
    };
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(Values(values))
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true)]
    x: Values,
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true)]
    y: Values,
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true)]
    t: Values,
    /// Also report the two integrals and the closed-form term.
    #[arg(long)]
    terms: bool,
}

#[derive(Debug, Args)]
struct SliceArgs {
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true, default_value = "0.05,0.2")]
    x: Values,
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true, default_value = "-1:1:41")]
    y: Values,
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true, default_value = "0.02")]
    t: Values,
    #[arg(long)]
    terms: bool,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.02)]
    t: f64,
    #[arg(long, value_parser = parse_values, default_value = "0:0.3:31")]
    x: Values,
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true, default_value = "-0.3:0.3:61")]
    y: Values,
}

#[derive(Debug, Args)]
struct IdentityArgs {
    /// Angles in radians, |θ| >= 1e-3.
    #[arg(
        long,
        value_parser = parse_values,
        allow_hyphen_values = true,
        default_value = "-1.5707963267948966,-1,-0.3,-0.01,0.01,0.3,1,1.5707963267948966"
    )]
    theta: Values,
    /// Largest accepted residual.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0.02)]
    t: f64,
    #[arg(long, value_parser = parse_values, default_value = "0.05,0.2")]
    x: Values,
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true, default_value = "-1:1:41")]
    y: Values,
    /// Finite-difference spacing.
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Finite-difference time step.
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    /// Mesh grading exponent; 1 is uniform.
    #[arg(long, default_value_t = 2.0)]
    grading: f64,
    /// Largest accepted absolute difference.
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
}

enum Failure {
    Config(String),
    Numerical(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Validation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Validation(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::OutsideHalfSpace { .. } | Error::Config(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

/// Unit handling at the command-line boundary.
struct Units {
    scales: Option<MaterialScales>,
}

impl Units {
    fn to_scaled(&self, x: f64, y: f64, t: f64) -> Result<(f64, f64, f64), Failure> {
        match &self.scales {
            None => Ok((x, y, t)),
            Some(m) => {
                let p = m.nondimensionalize(PhysicalPoint {
                    x,
                    y,
                    t,
                    temperature: m.t_star_kelvin,
                })?;
                Ok((p.x, p.y, p.t))
            }
        }
    }

    fn temperature(&self, v: f64) -> Result<f64, Failure> {
        match &self.scales {
            None => Ok(v),
            Some(m) => Ok(m
                .redimensionalize(ScaledPoint {
                    x: 0.0,
                    y: 0.0,
                    t: 0.0,
                    temperature: v,
                })?
                .temperature),
        }
    }

    fn spread(&self, e: f64) -> f64 {
        self.scales.map_or(e, |m| e * m.t_star_kelvin)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

/// Round to 12 significant digits so JSON carries the same digits as CSV.
fn round12(v: f64) -> Value {
    if v.is_finite() {
        json!(fmt(v).parse::<f64>().unwrap_or(v))
    } else {
        Value::Null
    }
}

struct Context {
    spec: halfspace_thermal::ProblemSpec,
    eval: EvalConfig,
    units: Units,
    format: Format,
}

struct Row {
    x: f64,
    y: f64,
    t: f64,
    field: FieldResult,
}

fn eval_points(ctx: &Context, points: &[(f64, f64, f64)]) -> Result<Vec<Row>, Failure> {
    points
        .iter()
        .map(|&(x, y, t)| {
            let (xs, ys, ts) = ctx.units.to_scaled(x, y, t)?;
            let field = temperature_at(xs, ys, ts, &ctx.spec, &ctx.eval)?;
            Ok(Row { x, y, t, field })
        })
        .collect()
}

fn product(xs: &[f64], ys: &[f64], ts: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(xs.len() * ys.len() * ts.len());
    for &x in xs {
        for &y in ys {
            for &t in ts {
                out.push((x, y, t));
            }
        }
    }
    out
}

fn write_rows(ctx: &Context, rows: &[Row], terms: bool, w: &mut dyn Write) -> Result<(), Failure> {
    match ctx.format {
        Format::Csv => {
            write!(w, "x,y,t,temperature,error_estimate")?;
            if terms {
                write!(w, ",dirichlet_integral,neumann_integral,closed_form")?;
            }
            writeln!(w)?;
            for r in rows {
                write!(
                    w,
                    "{},{},{},{},{}",
                    fmt(r.x),
                    fmt(r.y),
                    fmt(r.t),
                    fmt(ctx.units.temperature(r.field.value)?),
                    fmt(ctx.units.spread(r.field.error_estimate))
                )?;
                if terms {
                    let f = &r.field.terms;
                    write!(
                        w,
                        ",{},{},{}",
                        fmt(f.dirichlet_integral),
                        fmt(f.neumann_integral),
                        fmt(f.closed_form)
                    )?;
                }
                writeln!(w)?;
            }
        }
        Format::Json => {
            let items = rows
                .iter()
                .map(|r| {
                    let mut o = json!({
                        "x": round12(r.x),
                        "y": round12(r.y),
                        "t": round12(r.t),
                        "temperature": round12(ctx.units.temperature(r.field.value)?),
                        "error_estimate": round12(ctx.units.spread(r.field.error_estimate)),
                    });
                    if terms {
                        let f = &r.field.terms;
                        o["dirichlet_integral"] = round12(f.dirichlet_integral);
                        o["neumann_integral"] = round12(f.neumann_integral);
                        o["closed_form"] = round12(f.closed_form);
                    }
                    Ok(o)
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            write_json(w, &Value::Array(items))?;
        }
    }
    Ok(())
}

fn write_json(w: &mut dyn Write, v: &Value) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)
}

fn cmd_grid(ctx: &Context, args: &GridArgs, w: &mut dyn Write) -> Result<(), Failure> {
    let (xs, ys) = (&args.x.0, &args.y.0);
    let (Some(&x0), Some(&x1), Some(&y0), Some(&y1)) = (xs.first(), xs.last(), ys.first(), ys.last()) else {
        return Err(Failure::Config("empty grid range".into()));
    };
    let (sx0, sy0, t) = ctx.units.to_scaled(x0, y0, args.t)?;
    let (sx1, sy1, _) = ctx.units.to_scaled(x1, y1, args.t)?;
    let grid = evaluate_grid((sx0, sx1), (sy0, sy1), xs.len(), ys.len(), t, &ctx.spec, &ctx.eval)?;
    let nx = xs.len();
    let temps = grid
        .values
        .iter()
        .map(|&v| if v.is_nan() { Ok(v) } else { ctx.units.temperature(v) })
        .collect::<Result<Vec<_>, Failure>>()?;
    match ctx.format {
        Format::Csv => {
            writeln!(w, "x,y,t,temperature,error_estimate")?;
            for (j, y) in ys.iter().enumerate() {
                for (i, x) in xs.iter().enumerate() {
                    let k = j * nx + i;
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        fmt(*x),
                        fmt(*y),
                        fmt(args.t),
                        fmt(temps[k]),
                        fmt(ctx.units.spread(grid.error_estimates[k]))
                    )?;
                }
            }
        }
        Format::Json => {
            let matrix = |v: &[f64]| -> Value {
                v.chunks(nx)
                    .map(|row| row.iter().map(|&e| round12(e)).collect::<Value>())
                    .collect()
            };
            let errors: Vec<f64> = grid.error_estimates.iter().map(|&e| ctx.units.spread(e)).collect();
            let doc = json!({
                "t": round12(args.t),
                "x": xs.iter().map(|&v| round12(v)).collect::<Vec<_>>(),
                "y": ys.iter().map(|&v| round12(v)).collect::<Vec<_>>(),
                "temperature": matrix(&temps),
                "error_estimate": matrix(&errors),
                "flagged": grid.flagged.iter().map(|(k, m)| json!({"x": round12(xs[k % nx]), "y": round12(ys[k / nx]), "error": m})).collect::<Vec<_>>(),
            });
            write_json(w, &doc)?;
        }
    }
    if let Some((k, msg)) = grid.flagged.first() {
        return Err(Failure::Numerical(format!(
            "{} grid cells failed, first at (x = {}, y = {}): {msg}",
            grid.flagged.len(),
            xs[k % nx],
            ys[k / nx]
        )));
    }
    Ok(())
}

fn cmd_identity(ctx: &Context, args: &IdentityArgs, w: &mut dyn Write) -> Result<(), Failure> {
    let mut rows = Vec::new();
    let mut worst: Option<(f64, f64)> = None;
    let mut failed = Vec::new();
    for &theta in &args.theta.0 {
        if theta.abs() > FRAC_PI_2 + 1e-15 {
            return Err(Failure::Config(format!("theta = {theta} lies outside [-pi/2, pi/2]")));
        }
        let theta = theta.clamp(-FRAC_PI_2, FRAC_PI_2);
        match identity_integral(theta, &ctx.eval.quadrature) {
            Ok(r) => {
                if worst.is_none_or(|(_, res)| r.residual() > res) {
                    worst = Some((theta, r.residual()));
                }
                rows.push((theta, r.value, r.expected, r.residual(), r.error_estimate, None));
            }
            Err(e @ (Error::InvalidInput(_) | Error::Config(_))) => return Err(e.into()),
            Err(e) => {
                log::warn!("identity at theta = {theta}: {e}");
                failed.push(theta);
                rows.push((theta, f64::NAN, f64::NAN, f64::NAN, f64::NAN, Some(e.to_string())));
            }
        }
    }
    match ctx.format {
        Format::Csv => {
            writeln!(w, "theta,value,expected,residual,error_estimate")?;
            for (theta, v, x, res, e, _) in &rows {
                writeln!(w, "{},{},{},{},{}", fmt(*theta), fmt(*v), fmt(*x), fmt(*res), fmt(*e))?;
            }
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(theta, v, x, res, e, err)| {
                    json!({
                        "theta": round12(*theta),
                        "value": round12(*v),
                        "expected": round12(*x),
                        "residual": round12(*res),
                        "error_estimate": round12(*e),
                        "error": err,
                    })
                })
                .collect();
            write_json(w, &Value::Array(items))?;
        }
    }
    if !failed.is_empty() {
        return Err(Failure::Numerical(format!(
            "identity did not converge at theta = {failed:?}"
        )));
    }
    match worst {
        Some((theta, res)) if res > args.tol => Err(Failure::Validation(format!(
            "FAIL: residual {res:.3e} at theta = {theta} exceeds {:.1e}",
            args.tol
        ))),
        Some((theta, res)) => {
            eprintln!("PASS: largest residual {res:.3e} at theta = {theta}");
            Ok(())
        }
        None => Ok(()),
    }
}

fn cmd_validate(ctx: &Context, args: &ValidateArgs, w: &mut dyn Write) -> Result<(), Failure> {
    if ctx.units.scales.is_some() {
        return Err(Failure::Config(
            "validate works in scaled units only; drop --physical".into(),
        ));
    }
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::Config(format!("--tol must be positive, got {}", args.tol)));
    }
    let grid = FdGrid {
        h: args.h,
        dt: args.dt,
        grading: args.grading,
        ..FdGrid::default()
    };
    let plan = ValidationPlan {
        t: args.t,
        xs: args.x.0.clone(),
        ys: args.y.0.clone(),
        tolerance: args.tol,
    };
    let report = validate_field(&ctx.spec, &grid, &plan, &ctx.eval)?;
    let c = &report.comparison;
    match ctx.format {
        Format::Csv => {
            writeln!(w, "x,y,finite_difference,semi_analytical,abs_diff")?;
            for p in &c.points {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt(p.x),
                    fmt(p.y),
                    fmt(p.reference),
                    fmt(p.candidate),
                    fmt(p.abs_diff)
                )?;
            }
        }
        Format::Json => {
            let points: Vec<Value> = c
                .points
                .iter()
                .map(|p| {
                    json!({
                        "x": round12(p.x),
                        "y": round12(p.y),
                        "finite_difference": round12(p.reference),
                        "semi_analytical": round12(p.candidate),
                        "abs_diff": round12(p.abs_diff),
                    })
                })
                .collect();
            let doc = json!({
                "t": round12(args.t),
                "grid": {"a": grid.a, "b": grid.b, "h": grid.h, "dt": grid.dt, "grading": grid.grading},
                "steps": report.steps,
                "far_boundary_max": round12(report.far_boundary_max),
                "max_diff": round12(c.max_diff),
                "mean_diff": round12(c.mean_diff),
                "tolerance": round12(c.tolerance),
                "passed": c.passed,
                "points": points,
            });
            write_json(w, &doc)?;
        }
    }
    let summary = format!(
        "max diff {:.3e}, mean diff {:.3e} over {} points (tolerance {:.1e}, h = {}, dt = {}, grading = {})",
        c.max_diff,
        c.mean_diff,
        c.points.len(),
        c.tolerance,
        grid.h,
        grid.dt,
        grid.grading
    );
    if c.passed {
        eprintln!("PASS: {summary}");
        Ok(())
    } else {
        Err(Failure::Validation(format!("FAIL: {summary}")))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => ProblemConfig::from_path(path)?,
        None => ProblemConfig::from_json(cli.scenario.json())?,
    };
    let spec = config.problem()?;
    let mut eval = EvalConfig::default();
    if let Some(tol) = cli.rel_tol {
        eval = eval.with_rel_tol(tol);
        eval.validate()?;
    }
    if cli.parallel == 0 {
        return Err(Failure::Config("--parallel must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.parallel)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    let ctx = Context {
        spec,
        eval,
        units: Units {
            scales: cli.physical.then_some(config.material),
        },
        format: cli.format,
    };

    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                Failure::Config(format!("cannot create {}: {e}", path.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = match &cli.command {
        Command::Eval(a) => {
            let rows = eval_points(&ctx, &product(&a.x.0, &a.y.0, &a.t.0))?;
            write_rows(&ctx, &rows, a.terms, &mut *out)
        }
        Command::Slice(a) => {
            let rows = eval_points(&ctx, &product(&a.x.0, &a.y.0, &a.t.0))?;
            write_rows(&ctx, &rows, a.terms, &mut *out)
        }
        Command::Grid(a) => cmd_grid(&ctx, a, &mut *out),
        Command::Identity(a) => cmd_identity(&ctx, a, &mut *out),
        Command::Validate(a) => cmd_validate(&ctx, a, &mut *out),
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HALFSPACE_THERMAL_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f @ Failure::Validation(_)) => {
            eprintln!("{}", f.message());
            ExitCode::from(f.code())
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0.5").unwrap().0, vec![0.5]);
        assert_eq!(parse_values("-1,2").unwrap().0, vec![-1.0, 2.0]);
        assert_eq!(parse_values("-1:1:3").unwrap().0, vec![-1.0, 0.0, 1.0]);
        assert!(parse_values("0:1:0").is_err());
        assert!(parse_values("").is_err());
        assert!(parse_values("1:2").is_err());
        assert!(parse_values("a").is_err());
        assert!(parse_values("inf").is_err());
    }

    #[test]
    fn json_rounding_matches_csv_digits() {
        assert_eq!(round12(1.0 / 3.0), json!(0.333333333333));
        assert_eq!(round12(f64::NAN), Value::Null);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
