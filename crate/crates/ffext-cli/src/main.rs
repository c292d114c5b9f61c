//! `ffext` — command-line front end for finite-field extension and
//! distance experiments.
//!
//! Subcommands: `field` (construction facts), `variety` (zero-set
//! analysis), `extension` (operator-norm sweeps to CSV/JSON),
//! `distance` (distance-set experiments and lemma measurements), and
//! `verify` (the named check suites).
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on
//! configuration errors. All randomness is seeded (default 42), so
//! identical invocations produce identical reports apart from the CSV
//! timestamp line, which `--no-timestamp` suppresses.

mod orders;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ffext::ascent::RstarOptions;
use ffext::curves::{contains_line, parse_poly, variety_of, LineWitness};
use ffext::distance::{falconer_experiment, FalconerRow, LevelSetFamily, SetGenerator};
use ffext::extension::{autocorrelation_profile, build_extension_report, SurfaceMeasure};
use ffext::field::Field;
use ffext::fourier::LpExponent;
use ffext::verify::{
    double_decay_check, field_for_order, keylemma_check, restriction_check, run_suite,
    LemmaCheck, SuiteKind, SuiteReport,
};
use ffext::Tolerances;
use output::{Format, Sink};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ffext",
    version,
    about = "Fourier extension and distance-set experiments over F_q^2"
)]
struct Cli {
    /// Worker threads; the FFEXT_JOBS environment variable overrides
    /// this flag.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print construction facts for one field.
    Field(FieldArgs),
    /// Analyze the zero set of a bivariate polynomial.
    Variety(VarietyArgs),
    /// Sweep operator-norm estimates over a range of field orders.
    Extension(ExtensionArgs),
    /// Run distance-set experiments or lemma measurements.
    Distance(DistanceArgs),
    /// Run the named check suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct FieldArgs {
    /// Characteristic (an odd prime).
    #[arg(long)]
    p: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    k: u32,
}

#[derive(Args)]
struct VarietyArgs {
    /// Field order (an odd prime power).
    #[arg(long)]
    q: u64,
    /// Polynomial in x1, x2, e.g. "x1^2 + x2^2 - 1".
    #[arg(long)]
    poly: String,
    /// Emit the analysis as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExtensionArgs {
    /// Field orders: "a:b" takes every odd prime power in the range, a
    /// comma list is taken literally.
    #[arg(long)]
    q: String,
    /// Polynomial whose zero set carries the surface measure.
    #[arg(long)]
    poly: String,
    /// Input exponent p (a number, or "inf").
    #[arg(long = "p-exp", default_value = "2")]
    p_exp: String,
    /// Output exponent r (a number, or "inf").
    #[arg(long = "r-exp", default_value = "4")]
    r_exp: String,
    /// Random ascent restarts per order.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Omit the timestamp comment so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct DistanceArgs {
    /// Field orders: "a:b" range of odd prime powers, or a comma list.
    #[arg(long)]
    q: String,
    /// |E| (requires --size-f; incompatible with --exponent).
    #[arg(long)]
    size_e: Option<usize>,
    /// |F| (requires --size-e; incompatible with --exponent).
    #[arg(long)]
    size_f: Option<usize>,
    /// Use |E| = |F| = ceil(q^EXPONENT) at each order (default 4/3).
    #[arg(long)]
    exponent: Option<f64>,
    /// Seeded draws per generator and order.
    #[arg(long, default_value_t = 20)]
    trials: u32,
    /// Comma list of generators: uniform, line-concentrated,
    /// subfield-grid, circle-union.
    #[arg(long, default_value = "uniform")]
    generators: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Measure one bound instead of running the experiment; emits JSON
    /// regardless of --format.
    #[arg(long, value_enum)]
    lemma: Option<LemmaKind>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Omit the timestamp comment so reruns are byte-identical.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LemmaKind {
    /// max_{m≠0} |Σ_t |V_t|·V̂_t(m)| against the constant 4.
    Keylemma,
    /// Worst pair-decay identity error over nonzero frequency pairs.
    DoubleDecay,
    /// Worst restriction-energy ratio over seeded random sets.
    Restriction,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Field orders (comma list or "a:b" range); defaults per suite.
    #[arg(long)]
    q: Option<String>,
    /// Roundoff tolerance for identity checks (pinned constants and
    /// estimate tolerances are unaffected).
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the machine-readable JSON summary here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Fourier,
    Curves,
    Extension,
    Distance,
    All,
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe (e.g. `head`) closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_jobs(cli.jobs)?;
    match cli.command {
        Command::Field(args) => cmd_field(&args),
        Command::Variety(args) => cmd_variety(&args),
        Command::Extension(args) => cmd_extension(&args),
        Command::Distance(args) => cmd_distance(&args),
        Command::Verify(args) => cmd_verify(&args),
    }
}

fn configure_jobs(flag: Option<usize>) -> Result<()> {
    let jobs = match std::env::var("FFEXT_JOBS") {
        Ok(text) => Some(
            text.parse::<usize>()
                .with_context(|| format!("FFEXT_JOBS={text:?} is not a thread count"))?,
        ),
        Err(_) => flag,
    };
    if let Some(n) = jobs {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("rayon pool configuration")?;
    }
    Ok(())
}

fn cmd_field(args: &FieldArgs) -> Result<ExitCode> {
    let field = ffext::field::construct_field(args.p, args.k)?;
    let q = field.q();
    println!("q = {} = {}^{}", q, field.p(), field.k());
    if field.k() == 1 {
        println!("modulus: none (prime field)");
    } else {
        println!("modulus: {}", render_modulus(&field));
    }
    let direct = field.gauss_sum();
    let closed = field.gauss_sum_closed_form();
    println!("G1 (direct summation) = {}", fmt_complex(direct));
    println!("G1 (closed form)      = {}", fmt_complex(closed));
    println!("|G1| = {:.12} (sqrt q = {:.12})", direct.norm(), (q as f64).sqrt());
    let eta_m1 = field.eta(field.neg(field.one()));
    let g2 = direct * direct;
    println!("G1^2 = {} (eta(-1)*q = {})", fmt_complex(g2), i64::from(eta_m1) * q as i64);
    println!("residue class: q = {} (mod 4)", q % 4);
    Ok(ExitCode::SUCCESS)
}

fn render_modulus(field: &Field) -> String {
    // Coefficients ascending; the leading term is monic.
    let coeffs = field.modulus();
    let mut terms: Vec<String> = Vec::new();
    for (deg, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coeff = if c == 1 && deg > 0 { String::new() } else { c.to_string() };
        let var = match deg {
            0 => String::new(),
            1 => "x".to_string(),
            d => format!("x^{d}"),
        };
        terms.push(match (coeff.is_empty(), var.is_empty()) {
            (true, _) => var,
            (false, true) => coeff,
            (false, false) => format!("{coeff}*{var}"),
        });
    }
    terms.join(" + ")
}

fn fmt_complex(z: ffext::fourier::Complex64) -> String {
    format!("{:.12}{}{:.12}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
}

fn cmd_variety(args: &VarietyArgs) -> Result<ExitCode> {
    let field = field_for_order(args.q)?;
    let poly = parse_poly(&field, &args.poly)?;
    let v = variety_of(&poly);
    let profile = autocorrelation_profile(&v);
    let (katz, katz_witness) = ffext::curves::katz_max_ratio(&v);
    let witness = contains_line(&poly);

    let plane = (field.q() * field.q()) as f64;
    if args.json {
        let json = serde_json::json!({
            "q": field.q(),
            "poly": poly.to_text(),
            "degree": poly.degree(),
            "cardinality": v.cardinality(),
            "size_over_q": v.size_ratio(),
            "size_over_plane": v.cardinality() as f64 / plane,
            "schwartz_zippel_usage": v.schwartz_zippel_margin(),
            "line_witness": witness.as_ref().map(LineWitness::to_json),
            "autocorrelation": {
                "energy": profile.energy,
                "max": profile.max,
                "second_max": profile.second_max,
                "bezout_threshold": profile.bezout_threshold,
                "exceptional": profile.exceptional,
            },
            "katz_ratio": katz,
            "katz_witness": [katz_witness.x1.index(), katz_witness.x2.index()],
        });
        println!("{}", serde_json::to_string_pretty(&json)?);
        return Ok(ExitCode::SUCCESS);
    }

    println!("q = {}", field.q());
    println!("polynomial: {} (degree {})", poly.to_text(), poly.degree());
    println!("|V| = {}", v.cardinality());
    println!("|V|/q = {:.6}", v.size_ratio());
    println!("|V|/q^2 = {:.6}", v.cardinality() as f64 / plane);
    println!("Schwartz-Zippel usage |V|/(d*q) = {:.6} (bound 1)", v.schwartz_zippel_margin());
    match &witness {
        Some(LineWitness::Slope { a, b }) => {
            println!("contains line: yes, x2 = {}*x1 + {}", field.render(*a), field.render(*b));
        }
        Some(LineWitness::Vertical { c }) => {
            println!("contains line: yes, x1 = {}", field.render(*c));
        }
        None => println!("contains line: no"),
    }
    println!(
        "autocorrelation: energy {}, max {} (threshold {}), second max {}, exceptional {}",
        profile.energy,
        profile.max,
        profile.bezout_threshold,
        profile.second_max,
        profile.exceptional.len()
    );
    println!(
        "Katz ratio: max |S(m)|/sqrt(q) = {:.6} at m=({},{})",
        katz,
        katz_witness.x1.index(),
        katz_witness.x2.index()
    );
    Ok(ExitCode::SUCCESS)
}

/// Flat CSV row for one extension-sweep order.
#[derive(Serialize)]
struct ExtensionCsvRow {
    q: u64,
    poly: String,
    cardinality: usize,
    size_ratio: f64,
    contains_line: bool,
    p_exp: String,
    r_exp: String,
    rstar_lower: f64,
    winning_start: String,
    rstar_energy_bound: f64,
    additive_energy: u64,
    point_mass_ratio: f64,
    line_test_ratio: Option<f64>,
    autocorrelation_max: u32,
    autocorrelation_second_max: u32,
    exceptional_count: usize,
    seed: u64,
}

fn cmd_extension(args: &ExtensionArgs) -> Result<ExitCode> {
    let sink = Sink::new(args.out.clone(), args.format, args.no_timestamp)?;
    let orders = orders::parse_orders(&args.q)?;
    let p_exp = parse_exponent(&args.p_exp)?;
    let r_exp = parse_exponent(&args.r_exp)?;

    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for &q in &orders {
        let field = field_for_order(q)?;
        let poly = parse_poly(&field, &args.poly)
            .with_context(|| format!("polynomial {:?} over q = {q}", args.poly))?;
        let sigma = SurfaceMeasure::new(variety_of(&poly))
            .with_context(|| format!("zero set of {:?} over q = {q}", args.poly))?;
        let mut opts = RstarOptions::new(p_exp, r_exp);
        opts.restarts = args.restarts;
        opts.seed = args.seed;
        let (report, estimate) = build_extension_report(&sigma, &opts)?;
        csv_rows.push(ExtensionCsvRow {
            q: report.q,
            poly: report.poly_text.clone(),
            cardinality: report.cardinality,
            size_ratio: report.size_ratio,
            contains_line: report.contains_line,
            p_exp: fmt_exponent(p_exp),
            r_exp: fmt_exponent(r_exp),
            rstar_lower: report.rstar_lower,
            winning_start: estimate.winning_start.clone(),
            rstar_energy_bound: report.rstar_energy_bound,
            additive_energy: u64::try_from(report.additive_energy)
                .expect("desk-scale energies fit in 64 bits"),
            point_mass_ratio: report.point_mass_ratio,
            line_test_ratio: report.line_test_ratio,
            autocorrelation_max: report.autocorrelation_max,
            autocorrelation_second_max: report.autocorrelation_second_max,
            exceptional_count: report.exceptional_points.len(),
            seed: args.seed,
        });
        json_rows.push(serde_json::json!({
            "report": report,
            "winning_start": estimate.winning_start,
            "best_nonnegative": estimate.best_nonnegative,
            "exhaustive_floor": estimate.exhaustive_floor,
            "starts_run": estimate.starts_run,
            "seed": args.seed,
        }));
    }
    sink.write(&csv_rows, &serde_json::Value::Array(json_rows))?;
    Ok(ExitCode::SUCCESS)
}

fn parse_exponent(text: &str) -> Result<LpExponent> {
    let trimmed = text.trim();
    if trimmed.eq_ignore_ascii_case("inf") || trimmed.eq_ignore_ascii_case("infinity") {
        return Ok(LpExponent::Infinity);
    }
    let value: f64 = trimmed
        .parse()
        .with_context(|| format!("exponent {text:?} is neither a number nor \"inf\""))?;
    LpExponent::new(value).map_err(|e| anyhow!("{e}"))
}

fn fmt_exponent(e: LpExponent) -> String {
    match e {
        LpExponent::Infinity => "inf".to_string(),
        LpExponent::Finite(v) if v.fract() == 0.0 => format!("{}", v as u64),
        LpExponent::Finite(v) => format!("{v}"),
    }
}

fn cmd_distance(args: &DistanceArgs) -> Result<ExitCode> {
    let sink = Sink::new(args.out.clone(), args.format, args.no_timestamp)?;
    let orders = orders::parse_orders(&args.q)?;

    if let Some(lemma) = args.lemma {
        let tol = Tolerances::default();
        let mut checks: Vec<LemmaCheck> = Vec::new();
        for &q in &orders {
            let field = field_for_order(q)?;
            let fam = LevelSetFamily::circle(&field);
            checks.push(match lemma {
                LemmaKind::Keylemma => keylemma_check(&fam),
                LemmaKind::DoubleDecay => double_decay_check(&fam, &tol, args.seed)?,
                LemmaKind::Restriction => restriction_check(&fam, args.trials, args.seed)?,
            });
        }
        let json = serde_json::to_value(&checks)?;
        // Lemma measurements are JSON-shaped; write them as such even
        // under the default CSV format.
        let json_sink = Sink::new(args.out.clone(), Format::Json, args.no_timestamp)?;
        json_sink.write::<LemmaCheck>(&[], &json)?;
        return Ok(ExitCode::SUCCESS);
    }

    let generators = parse_generators(&args.generators)?;
    let mut rows: Vec<FalconerRow> = Vec::new();
    for &q in &orders {
        let field = field_for_order(q)?;
        let (size_e, size_f) = resolve_sizes(args, q)?;
        rows.extend(falconer_experiment(
            &field,
            size_e,
            size_f,
            args.trials,
            args.seed,
            &generators,
        )?);
    }
    rows.sort_by_key(|r| (r.q, r.trial));
    let json = serde_json::to_value(&rows)?;
    sink.write(&rows, &json)?;
    Ok(ExitCode::SUCCESS)
}

fn resolve_sizes(args: &DistanceArgs, q: u64) -> Result<(usize, usize)> {
    match (args.size_e, args.size_f, args.exponent) {
        (Some(_), Some(_), Some(_)) => bail!("--exponent conflicts with explicit sizes"),
        (Some(e), Some(f), None) => Ok((e, f)),
        (None, None, exponent) => {
            let e = exponent.unwrap_or(4.0 / 3.0);
            if !(0.0..=2.0).contains(&e) {
                bail!("--exponent must lie in [0, 2]; got {e}");
            }
            let size = (q as f64).powf(e).ceil() as usize;
            Ok((size, size))
        }
        _ => bail!("--size-e and --size-f must be given together"),
    }
}

fn parse_generators(text: &str) -> Result<Vec<SetGenerator>> {
    text.split(',')
        .map(|part| match part.trim() {
            "uniform" => Ok(SetGenerator::Uniform),
            "line-concentrated" => Ok(SetGenerator::LineConcentrated),
            "subfield-grid" => Ok(SetGenerator::SubfieldGrid),
            "circle-union" => Ok(SetGenerator::CircleUnion),
            other => bail!(
                "unknown generator {other:?} (expected uniform, line-concentrated, \
                 subfield-grid, or circle-union)"
            ),
        })
        .collect()
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let kinds: Vec<SuiteKind> = match args.suite {
        SuiteArg::Fourier => vec![SuiteKind::Fourier],
        SuiteArg::Curves => vec![SuiteKind::Curves],
        SuiteArg::Extension => vec![SuiteKind::Extension],
        SuiteArg::Distance => vec![SuiteKind::Distance],
        SuiteArg::All => vec![
            SuiteKind::Fourier,
            SuiteKind::Curves,
            SuiteKind::Extension,
            SuiteKind::Distance,
        ],
    };
    let orders = args.q.as_deref().map(orders::parse_orders).transpose()?;
    let mut tol = Tolerances::default();
    if let Some(t) = args.tolerance {
        if !(t > 0.0) {
            bail!("--tolerance must be positive");
        }
        tol.identity = t;
        tol.estimate = tol.estimate.max(t);
    }

    let mut reports: Vec<SuiteReport> = Vec::new();
    for kind in kinds {
        let suite_orders: &[u64] = match &orders {
            Some(list) => list,
            None => kind.default_orders(),
        };
        reports.push(run_suite(kind, suite_orders, &tol, args.seed)?);
    }

    let mut failed = 0usize;
    let mut total = 0usize;
    for report in &reports {
        for check in &report.checks {
            total += 1;
            if !check.pass {
                failed += 1;
            }
            println!(
                "{} {}/{} q={} measured={:.6e} bound={:.6e}",
                if check.pass { "PASS" } else { "FAIL" },
                report.suite,
                check.name,
                check.q,
                check.measured,
                check.bound
            );
        }
    }
    println!("{total} checks, {failed} failed");
    if let Some(path) = &args.out {
        let json = serde_json::to_value(&reports)?;
        std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&json)?))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
