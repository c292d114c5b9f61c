//! Named check suites bundling the identities and bounds of the other
//! modules into machine-readable pass/fail records.
//!
//! Each suite runs over a list of field orders and produces one
//! [`CheckResult`] per named check per order. Identity checks compare
//! two computation paths against a roundoff tolerance; bound checks
//! compare a measured quantity against a pinned constant. A
//! [`LemmaCheck`] packages a single maximum-with-witness measurement
//! for the three headline bounds of the distance machinery.

use crate::ascent::{estimate_rstar, RstarOptions};
use crate::curves::{parse_poly, variety_of, BivariatePoly, CurveError};
use crate::distance::{
    counting_function, double_decay_sum, keylemma_max, nu_via_fourier, nu_zero_decomposition,
    restriction_max_ratio, second_moment_decomposition, sphere_ft_explicit,
    sphere_ft_square_form, DistanceError, LevelSetFamily, PointSetPair,
};
use crate::extension::{
    line_indicator_on, necessary_conditions, rstar_energy_value, ExtensionError, SurfaceMeasure,
};
use crate::field::{construct_field, prime_power_split, Field, FieldError};
use crate::fourier::{
    plane_point, plane_points, FourierError, LpExponent, PlaneFunction, PlanePoint, Space,
};
use crate::Tolerances;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Errors raised while assembling or running a suite.
#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("q = {0} is not a power of a single odd prime")]
    UnsupportedOrder(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// One named measurement with its bound and verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub q: u64,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Passes when `measured <= bound`.
    fn le(name: &str, q: u64, measured: f64, bound: f64) -> Self {
        CheckResult { name: name.to_string(), q, measured, bound, pass: measured <= bound }
    }

    /// Passes when `measured >= bound`.
    fn ge(name: &str, q: u64, measured: f64, bound: f64) -> Self {
        CheckResult { name: name.to_string(), q, measured, bound, pass: measured >= bound }
    }
}

/// All results of one suite run.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.to_string(), seed, checks, passed }
    }
}

/// A single maximum-with-witness measurement against a pinned constant.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck {
    pub lemma: String,
    pub q: u64,
    pub max_abs_value: f64,
    pub bound: f64,
    pub ratio: f64,
    pub witness: String,
}

impl LemmaCheck {
    fn new(lemma: &str, q: u64, max_abs_value: f64, bound: f64, witness: String) -> Self {
        LemmaCheck {
            lemma: lemma.to_string(),
            q,
            max_abs_value,
            bound,
            ratio: max_abs_value / bound,
            witness,
        }
    }
}

/// The available suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Fourier,
    Curves,
    Extension,
    Distance,
}

impl SuiteKind {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Fourier => "fourier",
            SuiteKind::Curves => "curves",
            SuiteKind::Extension => "extension",
            SuiteKind::Distance => "distance",
        }
    }

    /// Orders used when the caller does not supply a list.
    #[must_use]
    pub fn default_orders(self) -> &'static [u64] {
        match self {
            SuiteKind::Fourier => &[3, 5, 7, 9],
            SuiteKind::Curves => &[5, 7, 9, 11, 13],
            SuiteKind::Extension => &[5, 7, 9, 11, 13],
            SuiteKind::Distance => &[5, 9, 13],
        }
    }
}

/// Builds the field for an odd prime-power order.
pub fn field_for_order(q: u64) -> Result<Field, VerifyError> {
    let (p, k) = prime_power_split(q).ok_or(VerifyError::UnsupportedOrder(q))?;
    if p == 2 {
        return Err(VerifyError::UnsupportedOrder(q));
    }
    Ok(construct_field(p, k)?)
}

/// Runs one suite over the given orders.
pub fn run_suite(
    kind: SuiteKind,
    orders: &[u64],
    tol: &Tolerances,
    seed: u64,
) -> Result<SuiteReport, VerifyError> {
    let mut checks = Vec::new();
    for &q in orders {
        let field = field_for_order(q)?;
        match kind {
            SuiteKind::Fourier => fourier_checks(&field, tol, seed, &mut checks)?,
            SuiteKind::Curves => curves_checks(&field, tol, seed, &mut checks)?,
            SuiteKind::Extension => extension_checks(&field, tol, seed, &mut checks)?,
            SuiteKind::Distance => distance_checks(&field, tol, seed, &mut checks)?,
        }
    }
    Ok(SuiteReport::new(kind.name(), seed, checks))
}

/// Runs every suite, each over its default orders unless overridden.
pub fn run_all_suites(
    orders: Option<&[u64]>,
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<SuiteReport>, VerifyError> {
    [SuiteKind::Fourier, SuiteKind::Curves, SuiteKind::Extension, SuiteKind::Distance]
        .into_iter()
        .map(|kind| run_suite(kind, orders.unwrap_or_else(|| kind.default_orders()), tol, seed))
        .collect()
}

fn rng_for(seed: u64, q: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((q << 8) | lane);
    rng
}

fn random_function(field: &Field, space: Space, rng: &mut ChaCha8Rng) -> PlaneFunction {
    PlaneFunction::from_fn(field, space, |_| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_points(field: &Field, size: usize, rng: &mut ChaCha8Rng) -> Vec<PlanePoint> {
    let plane = (field.q() * field.q()) as usize;
    sample(rng, plane, size.min(plane))
        .into_iter()
        .map(|i| plane_point(field, i))
        .collect()
}

/// A random polynomial of total degree exactly `d`, built from a sparse
/// draw of monomials plus one forced top-degree term.
fn random_poly(field: &Field, d: u32, rng: &mut ChaCha8Rng) -> BivariatePoly {
    let q = field.q();
    let mut terms: Vec<((u32, u32), crate::field::FieldElement)> = Vec::new();
    for i in 0..=d {
        for j in 0..=(d - i) {
            if rng.gen_bool(0.5) {
                let c = field.element(rng.gen_range(0..q) as usize).unwrap();
                terms.push(((i, j), c));
            }
        }
    }
    let top_i = rng.gen_range(0..=d);
    let top_c = field.element(rng.gen_range(1..q) as usize).unwrap();
    terms.retain(|&((i, j), _)| (i, j) != (top_i, d - top_i));
    terms.push(((top_i, d - top_i), top_c));
    BivariatePoly::from_terms(field, terms).expect("forced top-degree term keeps the polynomial nonzero")
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn fourier_checks(
    field: &Field,
    tol: &Tolerances,
    seed: u64,
    out: &mut Vec<CheckResult>,
) -> Result<(), VerifyError> {
    let q = field.q();
    let q2 = (q * q) as f64;
    let mut rng = rng_for(seed, q, 0);
    let mut plancherel = 0.0f64;
    let mut inversion = 0.0f64;
    let mut convolution = 0.0f64;
    for _ in 0..5 {
        let f = random_function(field, Space::Dx, &mut rng);
        let g = random_function(field, Space::Dx, &mut rng);
        let f_hat = f.forward_ft()?;
        let lhs: f64 = f_hat.values().iter().map(|v| v.norm_sqr()).sum();
        let rhs: f64 = f.values().iter().map(|v| v.norm_sqr()).sum::<f64>() / q2;
        plancherel = plancherel.max((lhs - rhs).abs());

        let back = f_hat.inverse_ft()?;
        inversion = inversion.max(max_abs(
            f.values().iter().zip(back.values()).map(|(a, b)| (a - b).norm()),
        ));

        let conv_hat = f.convolve(&g)?.forward_ft()?;
        let g_hat = g.forward_ft()?;
        convolution = convolution.max(max_abs(conv_hat.values().iter().zip(
            f_hat.values().iter().zip(g_hat.values()),
        ).map(|(c, (a, b))| (c - a * b).norm())));
    }
    out.push(CheckResult::le("plancherel-error", q, plancherel, tol.identity));
    out.push(CheckResult::le("inversion-error", q, inversion, tol.identity));
    out.push(CheckResult::le("convolution-theorem-error", q, convolution, tol.identity));

    let direct = field.gauss_sum();
    let closed = field.gauss_sum_closed_form();
    out.push(CheckResult::le("gauss-closed-form-error", q, (direct - closed).norm(), tol.identity));
    let fourth = direct.powu(4);
    out.push(CheckResult::le(
        "gauss-fourth-power-error",
        q,
        (fourth - Complex64::new(q2, 0.0)).norm() / q2,
        tol.identity,
    ));
    Ok(())
}

fn curves_checks(
    field: &Field,
    tol: &Tolerances,
    seed: u64,
    out: &mut Vec<CheckResult>,
) -> Result<(), VerifyError> {
    let q = field.q();
    let mut rng = rng_for(seed, q, 1);
    let max_degree = 4u32.min(field.p() as u32 - 1);

    // A degree-d zero set uses at most the full d·q budget.
    let mut sz_violations = 0u32;
    for _ in 0..100 {
        let d = rng.gen_range(1..=max_degree);
        let poly = random_poly(field, d, &mut rng);
        let v = variety_of(&poly);
        if v.schwartz_zippel_margin() > 1.0 + 1e-12 {
            sz_violations += 1;
        }
    }
    out.push(CheckResult::le("schwartz-zippel-violations", q, f64::from(sz_violations), 0.0));

    // Curves without a common component meet in at most deg·deg points.
    // Sparse random pairs over a small field do occasionally share a line
    // outright — a genuine common component, certified symbolically — and
    // such pairs sit outside the bound's hypothesis, so they are excluded.
    // Every remaining excess count is a violation.
    let mut bezout_violations = 0u32;
    for _ in 0..100 {
        let d1 = rng.gen_range(1..=max_degree);
        let d2 = rng.gen_range(1..=max_degree);
        let pa = random_poly(field, d1, &mut rng);
        let pb = random_poly(field, d2, &mut rng);
        let report = crate::curves::intersect_count(&variety_of(&pa), &variety_of(&pb))?;
        if report.count as u64 > report.bezout_bound
            && crate::curves::shared_line(&pa, &pb).is_none()
        {
            bezout_violations += 1;
        }
    }
    out.push(CheckResult::le("bezout-violations", q, f64::from(bezout_violations), 0.0));

    // The parabola's character sums all have modulus exactly sqrt(q).
    let parabola = variety_of(&parse_poly(field, "x2 - x1^2")?);
    let (katz, _) = crate::curves::katz_max_ratio(&parabola);
    out.push(CheckResult::le("parabola-katz-deviation", q, (katz - 1.0).abs(), tol.identity));

    // The circle has q − η(−1) points.
    let circle = variety_of(&parse_poly(field, "x1^2 + x2^2 - 1")?);
    let expected = q as f64 - f64::from(field.eta(field.neg(field.one())));
    out.push(CheckResult::le(
        "circle-count-deviation",
        q,
        (circle.cardinality() as f64 - expected).abs(),
        0.0,
    ));

    // Line detection: present on a split quadric, absent on the parabola.
    let mut detection_misses = 0u32;
    if crate::curves::contains_line(&parse_poly(field, "x1*x2")?).is_none() {
        detection_misses += 1;
    }
    if crate::curves::contains_line(parabola.poly()).is_some() {
        detection_misses += 1;
    }
    for _ in 0..3 {
        let a = field.element(rng.gen_range(0..q) as usize).unwrap();
        let b = field.element(rng.gen_range(0..q) as usize).unwrap();
        let line = BivariatePoly::from_terms(
            field,
            [((0, 1), field.one()), ((1, 0), field.neg(a)), ((0, 0), field.neg(b))],
        )?;
        if crate::curves::contains_line(&line).is_none() {
            detection_misses += 1;
        }
    }
    out.push(CheckResult::le("line-detection-misses", q, f64::from(detection_misses), 0.0));
    Ok(())
}

fn extension_checks(
    field: &Field,
    tol: &Tolerances,
    seed: u64,
    out: &mut Vec<CheckResult>,
) -> Result<(), VerifyError> {
    let q = field.q();
    let mut rng = rng_for(seed, q, 2);
    let p2 = LpExponent::new(2.0)?;
    let r4 = LpExponent::new(4.0)?;

    let circle = SurfaceMeasure::new(variety_of(&parse_poly(field, "x1^2 + x2^2 - 1")?))?;
    let parabola = SurfaceMeasure::new(variety_of(&parse_poly(field, "x2 - x1^2")?))?;

    // The fourth power of the extended function equals the squared
    // L² norm of the self-convolved weighted measure.
    let mut l4_error = 0.0f64;
    for sigma in [&circle, &parabola] {
        for _ in 0..3 {
            let f: Vec<Complex64> = (0..sigma.cardinality())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let ext = sigma.extend(&f)?;
            let lhs = ext.norm_lp(r4).powi(4);
            let fdsigma = sigma.weighted_density(&f)?;
            let conv = fdsigma.convolve(&fdsigma)?;
            let rhs = conv.norm_lp(p2).powi(2);
            l4_error = l4_error.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    out.push(CheckResult::le("l4-convolution-identity-error", q, l4_error, tol.identity * 1e2));

    // The additive-energy closed form reproduces the measured L⁴ ratio
    // of the constant function.
    let mut energy_error = 0.0f64;
    for sigma in [&circle, &parabola] {
        let ones = vec![Complex64::new(1.0, 0.0); sigma.cardinality()];
        let measured = sigma.rstar_ratio(&ones, p2, r4)?;
        energy_error = energy_error.max((measured - rstar_energy_value(sigma)).abs());
    }
    out.push(CheckResult::le("energy-closed-form-error", q, energy_error, tol.identity * 1e2));

    // Line-free curves stay uniformly bounded at (2 -> 4).
    let opts = RstarOptions::new(p2, r4);
    for (name, sigma) in [("circle-rstar24", &circle), ("parabola-rstar24", &parabola)] {
        let est = estimate_rstar(sigma, &opts);
        out.push(CheckResult::le(name, q, est.ratio, 3.0));
    }

    // A curve containing a line blows up at the line-test rate.
    let hyperbola = variety_of(&parse_poly(field, "x1*x2")?);
    let witness = crate::curves::contains_line(hyperbola.poly())
        .expect("x1*x2 vanishes on the axes");
    let line_f = line_indicator_on(&hyperbola, witness);
    let sigma_h = SurfaceMeasure::new(hyperbola)?;
    let measured = sigma_h.rstar_ratio(&line_f, p2, r4)?;
    out.push(CheckResult::ge("line-blowup-ratio", q, measured, 0.5 * (q as f64).powf(0.25)));

    // Necessary-condition arithmetic on two pinned corners.
    let mut admissibility_misses = 0u32;
    let tight = necessary_conditions(p2, r4, 1.0, 0)?;
    if !tight.admissible || (tight.r_required - 4.0).abs() > 1e-12 {
        admissibility_misses += 1;
    }
    let blocked = necessary_conditions(p2, r4, 1.0, 1)?;
    if blocked.admissible {
        admissibility_misses += 1;
    }
    out.push(CheckResult::le("admissibility-misses", q, f64::from(admissibility_misses), 0.0));
    Ok(())
}

fn distance_checks(
    field: &Field,
    tol: &Tolerances,
    seed: u64,
    out: &mut Vec<CheckResult>,
) -> Result<(), VerifyError> {
    let q = field.q();
    let fam = LevelSetFamily::circle(field);
    let mut rng = rng_for(seed, q, 3);

    // Levels partition the plane.
    let partition_defect =
        (fam.level_sizes().iter().sum::<usize>() as f64 - (q * q) as f64).abs();
    out.push(CheckResult::le("partition-defect", q, partition_defect, 0.0));

    // The closed-form circle transform equals the direct one everywhere.
    let mut formula_error = 0.0f64;
    let mut square_error = 0.0f64;
    for t in field.elements() {
        let direct = fam.ft(t);
        for m in plane_points(field) {
            let explicit = sphere_ft_explicit(&fam, t, m)?;
            formula_error = formula_error.max((explicit - direct.value(m)).norm());
            if q % 4 == 1 {
                let sq = sphere_ft_square_form(&fam, t, m)?;
                square_error = square_error.max((sq - direct.value(m)).norm());
            }
        }
    }
    out.push(CheckResult::le("explicit-formula-error", q, formula_error, tol.identity));
    if q % 4 == 1 {
        out.push(CheckResult::le("square-form-error", q, square_error, tol.identity));
    }

    // Pair decay: identity on all pairs for small q, a seeded sample
    // beyond.
    let mut decay_error = 0.0f64;
    let nonzero: Vec<PlanePoint> = plane_points(field).skip(1).collect();
    if q <= 13 {
        for &m in &nonzero {
            for &xi in &nonzero {
                let (lhs, rhs) = double_decay_sum(&fam, m, xi)?;
                decay_error = decay_error.max((lhs - rhs).norm());
            }
        }
    } else {
        for _ in 0..2000 {
            let m = nonzero[rng.gen_range(0..nonzero.len())];
            let xi = nonzero[rng.gen_range(0..nonzero.len())];
            let (lhs, rhs) = double_decay_sum(&fam, m, xi)?;
            decay_error = decay_error.max((lhs - rhs).norm());
        }
    }
    out.push(CheckResult::le("double-decay-error", q, decay_error, tol.identity));

    // Level sizes stay within the square-root window.
    out.push(CheckResult::le("weil-ratio", q, fam.max_weil_ratio(), 2.0));

    // The weighted transform sum stays uniformly bounded, for every
    // degree the characteristic admits.
    for d in [2u32, 3, 4] {
        if u64::from(d) >= field.p() {
            continue;
        }
        let dfam = if d == 2 {
            LevelSetFamily::circle(field)
        } else {
            LevelSetFamily::diagonal(field, d, field.one(), field.one())?
        };
        let (max, _) = keylemma_max(&dfam);
        out.push(CheckResult::le(&format!("keylemma-max-d{d}"), q, max, 4.0));
    }

    // Counting-function mass and the spectral path.
    let mut mass_defect = 0.0f64;
    let mut nu_error = 0.0f64;
    let mut second_moment_rel = 0.0f64;
    let mut nu_zero_error = 0.0f64;
    for _ in 0..3 {
        let e = random_points(field, 40, &mut rng);
        let f = random_points(field, 40, &mut rng);
        let sizes = (e.len(), f.len());
        let pair = PointSetPair::new(field, e, f, "verify")?;
        let nu = counting_function(&pair, &fam);
        mass_defect =
            mass_defect.max((nu.total() as f64 - (sizes.0 * sizes.1) as f64).abs());
        for t in field.elements().take(3) {
            let via_ft = nu_via_fourier(&pair, &fam, t)?;
            nu_error = nu_error.max((via_ft - nu.value(t) as f64).abs());
        }
        let sm = second_moment_decomposition(&pair, &fam)?;
        let rebuilt = sm.piece_i + sm.piece_ii + sm.piece_iii;
        second_moment_rel = second_moment_rel
            .max((rebuilt - sm.direct as f64).abs() / (sm.direct as f64).max(1.0));
        if q % 4 == 1 {
            let dec = nu_zero_decomposition(&pair, &fam)?;
            nu_zero_error = nu_zero_error.max((dec.reconstructed - dec.direct as f64).abs());
        }
    }
    out.push(CheckResult::le("nu-mass-defect", q, mass_defect, 0.0));
    out.push(CheckResult::le("nu-fourier-error", q, nu_error, tol.estimate));
    out.push(CheckResult::le("second-moment-relative-error", q, second_moment_rel, 1e-8));
    if q % 4 == 1 {
        out.push(CheckResult::le("nu-zero-identity-error", q, nu_zero_error, tol.estimate));
    }

    // Restriction energies of random sets stay under the constant.
    let mut restriction = 0.0f64;
    let plane = (q * q) as usize;
    for _ in 0..20 {
        let size = rng.gen_range(1..=plane);
        let h = random_points(field, size, &mut rng);
        let (ratio, _) = restriction_max_ratio(&h, &fam)?;
        restriction = restriction.max(ratio);
    }
    out.push(CheckResult::le("restriction-max-ratio", q, restriction, 4.0));
    Ok(())
}

/// Measures max_{m≠0} |Σ_t |V_t|·V̂_t(m)| against the constant 4.
#[must_use]
pub fn keylemma_check(fam: &LevelSetFamily) -> LemmaCheck {
    let (max, witness) = keylemma_max(fam);
    LemmaCheck::new(
        "keylemma-bounded-sum",
        fam.field().q(),
        max,
        4.0,
        format!("m=({},{})", witness.x1.index(), witness.x2.index()),
    )
}

/// Measures the worst pair-decay identity error over a seeded sample of
/// nonzero frequency pairs (all pairs when q ≤ 13).
pub fn double_decay_check(
    fam: &LevelSetFamily,
    tol: &Tolerances,
    seed: u64,
) -> Result<LemmaCheck, VerifyError> {
    let field = fam.field().clone();
    let q = field.q();
    let nonzero: Vec<PlanePoint> = plane_points(&field).skip(1).collect();
    let mut worst = (0.0f64, nonzero[0], nonzero[0]);
    let mut consider = |m: PlanePoint, xi: PlanePoint| -> Result<(), VerifyError> {
        let (lhs, rhs) = double_decay_sum(fam, m, xi)?;
        let err = (lhs - rhs).norm();
        if err > worst.0 {
            worst = (err, m, xi);
        }
        Ok(())
    };
    if q <= 13 {
        for &m in &nonzero {
            for &xi in &nonzero {
                consider(m, xi)?;
            }
        }
    } else {
        let mut rng = rng_for(seed, q, 4);
        for _ in 0..2000 {
            let m = nonzero[rng.gen_range(0..nonzero.len())];
            let xi = nonzero[rng.gen_range(0..nonzero.len())];
            consider(m, xi)?;
        }
    }
    Ok(LemmaCheck::new(
        "double-decay-identity",
        q,
        worst.0,
        tol.identity,
        format!(
            "m=({},{}), xi=({},{})",
            worst.1.x1.index(),
            worst.1.x2.index(),
            worst.2.x1.index(),
            worst.2.x2.index()
        ),
    ))
}

/// Measures the worst restriction-energy ratio over seeded random sets.
pub fn restriction_check(
    fam: &LevelSetFamily,
    trials: u32,
    seed: u64,
) -> Result<LemmaCheck, VerifyError> {
    let field = fam.field().clone();
    let q = field.q();
    let plane = (q * q) as usize;
    let mut rng = rng_for(seed, q, 5);
    let mut worst = (0.0f64, field.one(), 0usize);
    for trial in 0..trials {
        let size = rng.gen_range(1..=plane);
        let h = random_points(&field, size, &mut rng);
        let (ratio, t) = restriction_max_ratio(&h, fam)?;
        if ratio > worst.0 {
            worst = (ratio, t, trial as usize);
        }
    }
    Ok(LemmaCheck::new(
        "restriction-energy-ratio",
        q,
        worst.0,
        4.0,
        format!("t={}, trial={}", worst.1.index(), worst.2),
    ))
}

/// Distance-set ratio floor across one uniform run, for quick reporting.
pub fn distance_ratio_floor(
    field: &Field,
    size: usize,
    trials: u32,
    seed: u64,
) -> Result<f64, VerifyError> {
    let rows = crate::distance::falconer_experiment(
        field,
        size,
        size,
        trials,
        seed,
        &[crate::distance::SetGenerator::Uniform],
    )?;
    Ok(rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_are_validated() {
        assert!(field_for_order(9).is_ok());
        assert!(matches!(field_for_order(6), Err(VerifyError::UnsupportedOrder(6))));
        assert!(matches!(field_for_order(8), Err(VerifyError::UnsupportedOrder(8))));
        assert!(matches!(field_for_order(1), Err(VerifyError::UnsupportedOrder(1))));
    }

    #[test]
    fn fourier_suite_passes_on_small_orders() {
        let report =
            run_suite(SuiteKind::Fourier, &[3, 5, 9], &Tolerances::default(), 42).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.checks.len(), 3 * 5);
        assert!(report.checks.iter().all(|c| c.pass));
    }

    #[test]
    fn curves_suite_passes_on_small_orders() {
        let report =
            run_suite(SuiteKind::Curves, &[5, 7], &Tolerances::default(), 42).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.checks.len(), 2 * 5);
    }

    #[test]
    fn extension_suite_passes_on_small_orders() {
        let report =
            run_suite(SuiteKind::Extension, &[5], &Tolerances::default(), 42).unwrap();
        assert!(report.passed, "{report:?}");
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"line-blowup-ratio"));
        assert!(names.contains(&"circle-rstar24"));
    }

    #[test]
    fn distance_suite_passes_and_respects_residue_class() {
        let report =
            run_suite(SuiteKind::Distance, &[5, 7], &Tolerances::default(), 42).unwrap();
        assert!(report.passed, "{report:?}");
        let q5: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.q == 5)
            .map(|c| c.name.as_str())
            .collect();
        let q7: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| c.q == 7)
            .map(|c| c.name.as_str())
            .collect();
        assert!(q5.contains(&"square-form-error"));
        assert!(q5.contains(&"nu-zero-identity-error"));
        assert!(!q7.contains(&"square-form-error"));
        assert!(!q7.contains(&"nu-zero-identity-error"));
        // d = 3, 4 require d < p.
        assert!(q5.contains(&"keylemma-max-d3"));
        assert!(q7.contains(&"keylemma-max-d3"));
    }

    #[test]
    fn json_serialization_has_the_pinned_shape() {
        let report =
            run_suite(SuiteKind::Fourier, &[3], &Tolerances::default(), 42).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["suite"], "fourier");
        let first = &json["checks"][0];
        for key in ["name", "q", "measured", "bound", "pass"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }

        let field = field_for_order(5).unwrap();
        let fam = LevelSetFamily::circle(&field);
        let lemma = serde_json::to_value(keylemma_check(&fam)).unwrap();
        for key in ["lemma", "q", "max_abs_value", "bound", "ratio", "witness"] {
            assert!(lemma.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn lemma_checks_report_consistent_ratios() {
        let field = field_for_order(9).unwrap();
        let fam = LevelSetFamily::circle(&field);
        let tol = Tolerances::default();

        let kc = keylemma_check(&fam);
        assert!((kc.ratio - kc.max_abs_value / kc.bound).abs() < 1e-15);
        assert!(kc.max_abs_value <= kc.bound);

        let dd = double_decay_check(&fam, &tol, 42).unwrap();
        assert!(dd.max_abs_value <= dd.bound, "decay error {}", dd.max_abs_value);

        let rc = restriction_check(&fam, 10, 42).unwrap();
        assert!(rc.max_abs_value <= rc.bound, "restriction ratio {}", rc.max_abs_value);
        assert!(rc.witness.starts_with("t="));
    }

    #[test]
    fn all_suites_run_with_default_orders() {
        // Use one tiny order everywhere to keep this test quick; the
        // per-suite defaults are exercised by the command-line tests.
        let reports = run_all_suites(Some(&[5]), &Tolerances::default(), 42).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.passed));
        let names: Vec<&str> = reports.iter().map(|r| r.suite.as_str()).collect();
        assert_eq!(names, vec!["fourier", "curves", "extension", "distance"]);
    }

    #[test]
    fn distance_ratio_floor_is_one_on_the_full_plane() {
        let field = field_for_order(5).unwrap();
        let floor = distance_ratio_floor(&field, 25, 2, 42).unwrap();
        assert_eq!(floor, 1.0);
    }
}
