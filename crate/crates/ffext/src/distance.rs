//! Level-set families of a diagonal polynomial, the distance counting
//! function, and the identities behind the two-dimensional distance
//! theorem.
//!
//! For P(x) = a₁x₁^d + a₂x₂^d the plane partitions into level sets
//! V_t = {P(x) = t}. The distance machinery rests on exact identities
//! about the transforms V̂_t:
//!
//! * the explicit radius-t circle formula
//!   V̂_t(m) = q⁻¹δ₀(m) + q⁻³G₁² Σ_{s≠0} χ(‖m‖₂/(4s) + st),
//! * Σ_t V̂_t(m)V̂_t(ξ) = q⁻³ Σ_{s≠0} χ(s(‖m‖₂ − ‖ξ‖₂)) for m, ξ ≠ 0,
//! * the weighted sum Σ_t |V_t|·V̂_t(m), bounded uniformly in q,
//! * the exact three-piece decompositions of ν(0) and of Σ_t ν(t)².
//!
//! Every identity is computable by two independent routes; the check
//! suites and the experiment harness drive them across fields and
//! seeded random point sets.

use crate::curves::{BivariatePoly, CurveError, Variety};
use crate::field::{Field, FieldElement};
use crate::fourier::{
    dot, plane_index, plane_point, plane_points, FourierError, PlaneFunction, PlanePoint, Space,
};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::OnceLock;
use thiserror::Error;

/// Errors from level-set and distance computations.
#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("the level-set family needs a diagonal polynomial a1*x1^d + a2*x2^d with d >= 2")]
    NonDiagonalPolynomial,
    #[error("this formula applies only to the polynomial x1^2 + x2^2")]
    WrongPolynomial,
    #[error("this identity requires q = 1 (mod 4); got q = {q}")]
    WrongResidueClass { q: u64 },
    #[error("the frequency must be nonzero")]
    ZeroFrequency,
    #[error("the radius t = 0 level is excluded here")]
    ZeroRadius,
    #[error("distance exponent n must satisfy 2 <= n < p; got n = {n}, p = {p}")]
    BadExponent { n: u64, p: u64 },
    #[error("set sizes must be between 1 and q^2 = {max}; got |E| = {size_e}, |F| = {size_f}")]
    BadSizes { size_e: usize, size_f: usize, max: usize },
    #[error("generator unavailable: {0}")]
    GeneratorUnavailable(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// The plane partitioned by the values of a diagonal polynomial.
pub struct LevelSetFamily {
    field: Field,
    poly: BivariatePoly,
    degree: u32,
    coeffs: (FieldElement, FieldElement),
    /// Plane index -> index of the level P(x).
    level_of: Vec<u32>,
    /// One variety per t, indexed by t's element index; levels may be
    /// empty.
    varieties: Vec<Variety>,
    ft_cache: OnceLock<Vec<PlaneFunction>>,
}

impl LevelSetFamily {
    /// The default family: P = x₁² + x₂², the circles.
    pub fn circle(field: &Field) -> Self {
        let one = field.one();
        LevelSetFamily::diagonal(field, 2, one, one)
            .expect("x1^2 + x2^2 is a valid diagonal polynomial for every odd q")
    }

    /// P = a₁x₁^d + a₂x₂^d with nonzero coefficients and 2 ≤ d < p.
    pub fn diagonal(
        field: &Field,
        d: u32,
        a1: FieldElement,
        a2: FieldElement,
    ) -> Result<Self, DistanceError> {
        if d < 2 || a1 == field.zero() || a2 == field.zero() {
            return Err(DistanceError::NonDiagonalPolynomial);
        }
        let poly = BivariatePoly::from_terms(field, [((d, 0), a1), ((0, d), a2)])?;
        Ok(Self::build(field.clone(), poly, d, (a1, a2)))
    }

    /// Accepts an already-parsed polynomial, which must be diagonal.
    pub fn from_poly(poly: &BivariatePoly) -> Result<Self, DistanceError> {
        let (d, a1, a2) =
            poly.diagonal_shape().ok_or(DistanceError::NonDiagonalPolynomial)?;
        if d < 2 {
            return Err(DistanceError::NonDiagonalPolynomial);
        }
        Ok(Self::build(poly.field().clone(), poly.clone(), d, (a1, a2)))
    }

    fn build(
        field: Field,
        poly: BivariatePoly,
        degree: u32,
        coeffs: (FieldElement, FieldElement),
    ) -> Self {
        let q = field.q() as usize;
        // P(x) in one pass via value tables of u -> a·u^d.
        let pow1: Vec<FieldElement> =
            field.elements().map(|u| field.mul(coeffs.0, field.pow(u, degree as u64))).collect();
        let pow2: Vec<FieldElement> =
            field.elements().map(|u| field.mul(coeffs.1, field.pow(u, degree as u64))).collect();
        let mut level_of = Vec::with_capacity(q * q);
        let mut buckets: Vec<Vec<PlanePoint>> = vec![Vec::new(); q];
        for pt in plane_points(&field) {
            let t = field.add(pow1[pt.x1.index()], pow2[pt.x2.index()]);
            level_of.push(t.index() as u32);
            buckets[t.index()].push(pt);
        }
        let varieties = buckets
            .into_iter()
            .enumerate()
            .map(|(t_idx, points)| {
                let t = field.element(t_idx).expect("bucket index is a field index");
                let shifted = poly
                    .shift_constant(t)
                    .expect("a diagonal polynomial minus a constant is never zero");
                Variety::from_parts(shifted, points)
            })
            .collect();
        LevelSetFamily { field, poly, degree, coeffs, level_of, varieties, ft_cache: OnceLock::new() }
    }

    #[must_use]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[must_use]
    pub fn poly(&self) -> &BivariatePoly {
        &self.poly
    }

    #[must_use]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Whether this is the x₁² + x₂² family, the one with the closed
    /// Fourier formulas.
    #[must_use]
    pub fn is_circle(&self) -> bool {
        self.degree == 2 && self.coeffs.0 == self.field.one() && self.coeffs.1 == self.field.one()
    }

    /// P(x), via the precomputed level table.
    #[must_use]
    pub fn level_of(&self, x: PlanePoint) -> FieldElement {
        FieldElement::from_index(self.level_of[plane_index(&self.field, x)] as usize)
    }

    #[must_use]
    pub fn variety(&self, t: FieldElement) -> &Variety {
        &self.varieties[t.index()]
    }

    pub fn varieties(&self) -> impl Iterator<Item = (FieldElement, &Variety)> {
        self.field.elements().map(move |t| (t, &self.varieties[t.index()]))
    }

    /// |V_t| for every t, indexed by element index; sums to q².
    #[must_use]
    pub fn level_sizes(&self) -> Vec<usize> {
        self.varieties.iter().map(Variety::cardinality).collect()
    }

    /// max_{t≠0} ||V_t| − q| / √q.
    #[must_use]
    pub fn max_weil_ratio(&self) -> f64 {
        let q = self.field.q() as f64;
        self.varieties
            .iter()
            .skip(1)
            .map(|v| (v.cardinality() as f64 - q).abs() / q.sqrt())
            .fold(0.0, f64::max)
    }

    /// V̂_t = forward transform of the indicator of V_t, cached for all
    /// t on first use (O(q⁴) total).
    pub fn ft(&self, t: FieldElement) -> &PlaneFunction {
        let cache = self.ft_cache.get_or_init(|| {
            self.varieties
                .iter()
                .map(|v| {
                    PlaneFunction::indicator(&self.field, Space::Dx, v.points())
                        .forward_ft()
                        .expect("indicators live in dx space")
                })
                .collect()
        });
        &cache[t.index()]
    }
}

/// The value G₁² = η(−1)·q, exact.
fn gauss_square(field: &Field) -> f64 {
    let eta = field.eta(field.neg(field.one()));
    eta as f64 * field.q() as f64
}

/// The closed-form circle transform
/// q⁻¹δ₀(m) + q⁻³G₁² Σ_{s≠0} χ(‖m‖₂/(4s) + st); O(q) per point.
pub fn sphere_ft_explicit(
    fam: &LevelSetFamily,
    t: FieldElement,
    m: PlanePoint,
) -> Result<Complex64, DistanceError> {
    if !fam.is_circle() {
        return Err(DistanceError::WrongPolynomial);
    }
    let f = fam.field();
    let q = f.q() as f64;
    let norm_m = fam.level_of(m);
    let inv4 = f.inv(f.from_int(4)).expect("4 is nonzero in odd characteristic");
    let mut sum = Complex64::new(0.0, 0.0);
    for s in f.elements().skip(1) {
        let arg = f.add(f.mul(norm_m, f.mul(inv4, f.inv(s).unwrap())), f.mul(s, t));
        sum += f.chi(arg);
    }
    let mut value = sum * (gauss_square(f) / (q * q * q));
    if m.x1 == f.zero() && m.x2 == f.zero() {
        value += Complex64::new(1.0 / q, 0.0);
    }
    Ok(value)
}

/// The q ≡ 1 (mod 4) specialization: G₁² = q exactly, so
/// V̂_t(m) = q⁻¹δ₀(m) + q⁻² Σ_{s≠0} χ(‖m‖₂/(4s) + st).
pub fn sphere_ft_square_form(
    fam: &LevelSetFamily,
    t: FieldElement,
    m: PlanePoint,
) -> Result<Complex64, DistanceError> {
    if !fam.is_circle() {
        return Err(DistanceError::WrongPolynomial);
    }
    let f = fam.field();
    if f.q() % 4 != 1 {
        return Err(DistanceError::WrongResidueClass { q: f.q() });
    }
    let q = f.q() as f64;
    let norm_m = fam.level_of(m);
    let inv4 = f.inv(f.from_int(4)).expect("4 is nonzero in odd characteristic");
    let mut sum = Complex64::new(0.0, 0.0);
    for s in f.elements().skip(1) {
        let arg = f.add(f.mul(norm_m, f.mul(inv4, f.inv(s).unwrap())), f.mul(s, t));
        sum += f.chi(arg);
    }
    let mut value = sum / (q * q);
    if m.x1 == f.zero() && m.x2 == f.zero() {
        value += Complex64::new(1.0 / q, 0.0);
    }
    Ok(value)
}

/// The weighted transform sum Σ_t |V_t|·V̂_t(m) and its exact split into
/// the uniform part q·Σ_t V̂_t(m) (zero for m ≠ 0) and the fluctuation
/// part Σ_t R_t·V̂_t(m) with R_t = |V_t| − q.
#[derive(Debug, Clone, Copy)]
pub struct KeylemmaSum {
    pub total: Complex64,
    /// q·q⁻² Σ_x χ(−x·m); vanishes identically for m ≠ 0.
    pub uniform_part: Complex64,
    /// q⁻² Σ_x R_{P(x)}·χ(−x·m); equals `total` for m ≠ 0.
    pub fluctuation_part: Complex64,
}

/// Evaluates the weighted sum at one nonzero frequency in O(q²).
pub fn keylemma_sum(fam: &LevelSetFamily, m: PlanePoint) -> Result<KeylemmaSum, DistanceError> {
    let f = fam.field();
    if m.x1 == f.zero() && m.x2 == f.zero() {
        return Err(DistanceError::ZeroFrequency);
    }
    let q = f.q() as f64;
    let sizes = fam.level_sizes();
    let mut total = Complex64::new(0.0, 0.0);
    let mut uniform = Complex64::new(0.0, 0.0);
    for x in plane_points(f) {
        let phase = f.chi(f.neg(dot(f, m, x)));
        let weight = sizes[fam.level_of(x).index()] as f64;
        total += phase * weight;
        uniform += phase;
    }
    let q2 = q * q;
    Ok(KeylemmaSum {
        total: total / q2,
        uniform_part: uniform * (q / q2),
        fluctuation_part: (total - uniform * q) / q2,
    })
}

/// max_{m≠0} |Σ_t |V_t|·V̂_t(m)| with its witness frequency, via a single
/// dense transform of the weight x ↦ |V_{P(x)}| (O(q⁴) total).
pub fn keylemma_max(fam: &LevelSetFamily) -> (f64, PlanePoint) {
    let f = fam.field();
    let sizes = fam.level_sizes();
    let weight = PlaneFunction::from_fn(f, Space::Dx, |x| {
        Complex64::new(sizes[fam.level_of(x).index()] as f64, 0.0)
    });
    let hat = weight.forward_ft().expect("weight lives in dx space");
    let mut best = (-1.0, PlanePoint::new(f.zero(), f.zero()));
    for (idx, v) in hat.values().iter().enumerate().skip(1) {
        let n = v.norm();
        if n > best.0 {
            best = (n, plane_point(f, idx));
        }
    }
    best
}

/// Both sides of the pair-decay identity
/// Σ_t V̂_t(m)V̂_t(ξ) = q⁻³ Σ_{s≠0} χ(s(‖m‖₂ − ‖ξ‖₂)), circle family,
/// m, ξ ≠ 0. The right side collapses to (q−1)/q³ on equal radii and
/// −1/q³ otherwise.
pub fn double_decay_sum(
    fam: &LevelSetFamily,
    m: PlanePoint,
    xi: PlanePoint,
) -> Result<(Complex64, Complex64), DistanceError> {
    let f = fam.field();
    if !fam.is_circle() {
        return Err(DistanceError::WrongPolynomial);
    }
    let zero = f.zero();
    if (m.x1 == zero && m.x2 == zero) || (xi.x1 == zero && xi.x2 == zero) {
        return Err(DistanceError::ZeroFrequency);
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    for t in f.elements() {
        let vt = fam.ft(t);
        lhs += vt.value(m) * vt.value(xi);
    }
    let diff = f.sub(fam.level_of(m), fam.level_of(xi));
    let mut rhs = Complex64::new(0.0, 0.0);
    for s in f.elements().skip(1) {
        rhs += f.chi(f.mul(s, diff));
    }
    let q = f.q() as f64;
    rhs /= q * q * q;
    Ok((lhs, rhs))
}

/// A pair of nonempty point sets with a provenance tag for reports.
#[derive(Debug, Clone)]
pub struct PointSetPair {
    field: Field,
    e: Vec<PlanePoint>,
    f: Vec<PlanePoint>,
    source: String,
}

impl PointSetPair {
    pub fn new(
        field: &Field,
        e: Vec<PlanePoint>,
        f: Vec<PlanePoint>,
        source: impl Into<String>,
    ) -> Result<Self, DistanceError> {
        let max = (field.q() * field.q()) as usize;
        if e.is_empty() || f.is_empty() || e.len() > max || f.len() > max {
            return Err(DistanceError::BadSizes { size_e: e.len(), size_f: f.len(), max });
        }
        Ok(PointSetPair { field: field.clone(), e, f, source: source.into() })
    }

    fn from_indices(field: &Field, e: &[usize], f: &[usize], source: String) -> Self {
        let to_points =
            |idx: &[usize]| idx.iter().map(|&i| plane_point(field, i)).collect::<Vec<_>>();
        PointSetPair { field: field.clone(), e: to_points(e), f: to_points(f), source }
    }

    #[must_use]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[must_use]
    pub fn e(&self) -> &[PlanePoint] {
        &self.e
    }

    #[must_use]
    pub fn f(&self) -> &[PlanePoint] {
        &self.f
    }

    #[must_use]
    pub fn source(&self) -> &str {
        &self.source
    }
}

/// ν(t) = #{(x, y) ∈ E × F : P(x − y) = t} for every t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuFunction {
    values: Vec<u64>,
}

impl NuFunction {
    /// Count at level t.
    #[must_use]
    pub fn value(&self, t: FieldElement) -> u64 {
        self.values[t.index()]
    }

    #[must_use]
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Σ_t ν(t) = |E|·|F|.
    #[must_use]
    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }

    /// The support {t : ν(t) > 0}, i.e. the distance set, as indices.
    #[must_use]
    pub fn support_indices(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v > 0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// The exact counting function by the O(|E||F|) double loop.
#[must_use]
pub fn counting_function(pair: &PointSetPair, fam: &LevelSetFamily) -> NuFunction {
    let field = pair.field();
    let mut values = vec![0u64; field.q() as usize];
    for &x in pair.e() {
        for &y in pair.f() {
            let d = crate::fourier::point_sub(field, x, y);
            values[fam.level_of(d).index()] += 1;
        }
    }
    NuFunction { values }
}

/// ν(t) recomputed through the transform identity
/// ν(t) = q⁴ Σ_m conj(Ê)(m)·F̂(m)·V̂_t(m); must agree with the double
/// loop up to floating-point error.
pub fn nu_via_fourier(
    pair: &PointSetPair,
    fam: &LevelSetFamily,
    t: FieldElement,
) -> Result<f64, DistanceError> {
    let field = pair.field();
    let e_hat = PlaneFunction::indicator(field, Space::Dx, pair.e()).forward_ft()?;
    let f_hat = PlaneFunction::indicator(field, Space::Dx, pair.f()).forward_ft()?;
    let v_hat = fam.ft(t);
    let mut acc = Complex64::new(0.0, 0.0);
    for idx in 0..e_hat.values().len() {
        acc += e_hat.value_at_index(idx).conj() * f_hat.value_at_index(idx) * v_hat.value_at_index(idx);
    }
    let q = field.q() as f64;
    Ok((acc * q.powi(4)).re)
}

/// The distance set {(x₁−y₁)^n + (x₂−y₂)^n : x ∈ E, y ∈ F} as sorted
/// element indices; stops early once all q values appear.
pub fn distance_set(
    pair: &PointSetPair,
    n: u64,
) -> Result<Vec<FieldElement>, DistanceError> {
    let field = pair.field();
    if n < 2 || n >= field.p() {
        return Err(DistanceError::BadExponent { n, p: field.p() });
    }
    // u -> u^n, tabulated once.
    let powers: Vec<FieldElement> = field.elements().map(|u| field.pow(u, n)).collect();
    let q = field.q() as usize;
    let mut seen = vec![false; q];
    let mut count = 0usize;
    'outer: for &x in pair.e() {
        for &y in pair.f() {
            let d1 = field.sub(x.x1, y.x1);
            let d2 = field.sub(x.x2, y.x2);
            let t = field.add(powers[d1.index()], powers[d2.index()]);
            if !seen[t.index()] {
                seen[t.index()] = true;
                count += 1;
                if count == q {
                    break 'outer;
                }
            }
        }
    }
    Ok(seen
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s)
        .map(|(i, _)| field.element(i).unwrap())
        .collect())
}

/// The exact three-piece identity for ν(0) when q ≡ 1 (mod 4):
/// ν(0) = q⁻¹|E||F| + q³ Σ_{m∈V₀} conj(Ê)F̂ − q² Σ_m conj(Ê)F̂,
/// where V₀ (the zero circle, origin included) has 2q − 1 points.
#[derive(Debug, Clone, Copy)]
pub struct NuZeroDecomposition {
    pub direct: u64,
    pub mass_term: f64,
    pub zero_circle_term: f64,
    pub full_sum_term: f64,
    /// mass + zero-circle + full-sum; equals `direct` exactly.
    pub reconstructed: f64,
}

pub fn nu_zero_decomposition(
    pair: &PointSetPair,
    fam: &LevelSetFamily,
) -> Result<NuZeroDecomposition, DistanceError> {
    let field = pair.field();
    if !fam.is_circle() {
        return Err(DistanceError::WrongPolynomial);
    }
    if field.q() % 4 != 1 {
        return Err(DistanceError::WrongResidueClass { q: field.q() });
    }
    let q = field.q() as f64;
    let e_hat = PlaneFunction::indicator(field, Space::Dx, pair.e()).forward_ft()?;
    let f_hat = PlaneFunction::indicator(field, Space::Dx, pair.f()).forward_ft()?;
    let w = |idx: usize| e_hat.value_at_index(idx).conj() * f_hat.value_at_index(idx);

    let zero = field.zero();
    let mut zero_circle = Complex64::new(0.0, 0.0);
    for &m in fam.variety(zero).points() {
        zero_circle += w(plane_index(field, m));
    }
    let mut full = Complex64::new(0.0, 0.0);
    for idx in 0..e_hat.values().len() {
        full += w(idx);
    }

    let mass_term = pair.e().len() as f64 * pair.f().len() as f64 / q;
    let zero_circle_term = (zero_circle * q.powi(3)).re;
    let full_sum_term = -(full * q.powi(2)).re;
    let direct = counting_function(pair, fam).value(zero);
    Ok(NuZeroDecomposition {
        direct,
        mass_term,
        zero_circle_term,
        full_sum_term,
        reconstructed: mass_term + zero_circle_term + full_sum_term,
    })
}

/// Σ_{m∈V_t} |Ĥ(m)|² against the benchmark q⁻³|H|^{3/2}, t ≠ 0.
#[derive(Debug, Clone, Copy)]
pub struct RestrictionEnergy {
    pub energy: f64,
    pub bound: f64,
    pub ratio: f64,
}

pub fn restriction_energy(
    h: &[PlanePoint],
    fam: &LevelSetFamily,
    t: FieldElement,
) -> Result<RestrictionEnergy, DistanceError> {
    if t == fam.field().zero() {
        return Err(DistanceError::ZeroRadius);
    }
    let field = fam.field();
    let h_hat = PlaneFunction::indicator(field, Space::Dx, h).forward_ft()?;
    let energy: f64 = fam
        .variety(t)
        .points()
        .iter()
        .map(|&m| h_hat.value(m).norm_sqr())
        .sum();
    let q = field.q() as f64;
    let bound = (h.len() as f64).powf(1.5) / q.powi(3);
    Ok(RestrictionEnergy { energy, bound, ratio: energy / bound })
}

/// max over t ≠ 0 of the restriction-energy ratio, with its witness t.
pub fn restriction_max_ratio(
    h: &[PlanePoint],
    fam: &LevelSetFamily,
) -> Result<(f64, FieldElement), DistanceError> {
    let field = fam.field();
    let h_hat = PlaneFunction::indicator(field, Space::Dx, h).forward_ft()?;
    let q = field.q() as f64;
    let bound = (h.len() as f64).powf(1.5) / q.powi(3);
    let mut best = (f64::NEG_INFINITY, field.one());
    for t in field.elements().skip(1) {
        let energy: f64 = fam
            .variety(t)
            .points()
            .iter()
            .map(|&m| h_hat.value(m).norm_sqr())
            .sum();
        let ratio = energy / bound;
        if ratio > best.0 {
            best = (ratio, t);
        }
    }
    Ok(best)
}

/// The exact second-moment decomposition of Σ_t ν(t)² for the circle
/// family. With W(m) = conj(Ê)(m)·F̂(m) and S_t = Σ_{m≠0} W(m)V̂_t(m):
///
/// ```text
/// Σ_t ν(t)²  =  I + II + III                  (exact)
/// I    = q⁻⁴|E|²|F|² Σ_t |V_t|²
/// II   = 2q²|E||F| Σ_t |V_t|·S_t
/// III  = q⁸ Σ_t S_t²  =  III₁ + III₂          (circle)
/// III₁ = −q⁵ (Σ_{m≠0} W)²
/// III₂ = q⁶ Σ_k (Σ_{m≠0, ‖m‖₂=k} W)²
///      = q⁶ Σ_k (Σ_{m∈V_k} W)²  −  2q²|E||F| Σ_{m∈V₀} W  +  q⁻²|E|²|F|²
/// ```
#[derive(Debug, Clone, Copy)]
pub struct SecondMomentDecomposition {
    pub direct: u128,
    pub piece_i: f64,
    pub piece_ii: f64,
    pub piece_iii: f64,
    pub piece_iii_1: f64,
    pub piece_iii_2: f64,
    /// q⁶ Σ_k (Σ_{m∈V_k} W)², the leading regrouped term.
    pub regrouped_main: f64,
    /// −2q²|E||F| Σ_{m∈V₀} W.
    pub regrouped_cross: f64,
    /// q⁻²|E|²|F|².
    pub regrouped_tail: f64,
}

pub fn second_moment_decomposition(
    pair: &PointSetPair,
    fam: &LevelSetFamily,
) -> Result<SecondMomentDecomposition, DistanceError> {
    if !fam.is_circle() {
        return Err(DistanceError::WrongPolynomial);
    }
    let field = pair.field();
    let q = field.q() as f64;
    let qn = field.q() as usize;
    let ef = pair.e().len() as f64 * pair.f().len() as f64;

    let nu = counting_function(pair, fam);
    let direct: u128 = nu.values().iter().map(|&v| (v as u128) * (v as u128)).sum();

    let e_hat = PlaneFunction::indicator(field, Space::Dx, pair.e()).forward_ft()?;
    let f_hat = PlaneFunction::indicator(field, Space::Dx, pair.f()).forward_ft()?;
    let w: Vec<Complex64> = (0..qn * qn)
        .map(|idx| e_hat.value_at_index(idx).conj() * f_hat.value_at_index(idx))
        .collect();

    // S_t = Σ_{m≠0} W(m)·V̂_t(m), through the cached transforms.
    let sizes = fam.level_sizes();
    let mut s = vec![Complex64::new(0.0, 0.0); qn];
    for (t, _) in fam.varieties() {
        let vt = fam.ft(t);
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in 1..w.len() {
            acc += w[idx] * vt.value_at_index(idx);
        }
        s[t.index()] = acc;
    }

    let piece_i =
        ef * ef / q.powi(4) * sizes.iter().map(|&n| (n as f64) * (n as f64)).sum::<f64>();
    let piece_ii = (2.0 * q * q * ef
        * s.iter()
            .enumerate()
            .map(|(t, &st)| st * sizes[t] as f64)
            .sum::<Complex64>())
    .re;
    let piece_iii = (q.powi(8) * s.iter().map(|&st| st * st).sum::<Complex64>()).re;

    // Everything below regroups III with the pair-decay identity.
    let w_nonzero: Complex64 = w.iter().skip(1).sum();
    let piece_iii_1 = -(q.powi(5) * w_nonzero * w_nonzero).re;

    let mut by_level = vec![Complex64::new(0.0, 0.0); qn];
    for idx in 1..w.len() {
        by_level[fam.level_of(plane_point(field, idx)).index() as usize] += w[idx];
    }
    let piece_iii_2 =
        (q.powi(6) * by_level.iter().map(|&z| z * z).sum::<Complex64>()).re;

    // Σ_{m∈V_k} W for every k: the m ≠ 0 buckets plus W(0) in its level.
    let mut by_level_full = by_level;
    by_level_full[fam.level_of(plane_point(field, 0)).index() as usize] += w[0];
    let regrouped_main =
        (q.powi(6) * by_level_full.iter().map(|&z| z * z).sum::<Complex64>()).re;
    let zero_level: Complex64 = fam
        .variety(field.zero())
        .points()
        .iter()
        .map(|&m| w[plane_index(field, m)])
        .sum();
    let regrouped_cross = -(2.0 * q * q * ef * zero_level).re;
    let regrouped_tail = ef * ef / (q * q);

    Ok(SecondMomentDecomposition {
        direct,
        piece_i,
        piece_ii,
        piece_iii,
        piece_iii_1,
        piece_iii_2,
        regrouped_main,
        regrouped_cross,
        regrouped_tail,
    })
}

/// Named, seeded constructions of point sets for distance experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetGenerator {
    /// Uniform sample without replacement from the plane.
    Uniform,
    /// Points of randomly chosen affine lines, topped up uniformly.
    LineConcentrated,
    /// The prime-subfield grid F_p × F_p (q = p² only), topped up
    /// uniformly past its q points.
    SubfieldGrid,
    /// Union of random circles with nonzero radii, topped up uniformly.
    CircleUnion,
}

impl SetGenerator {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            SetGenerator::Uniform => "uniform",
            SetGenerator::LineConcentrated => "line-concentrated",
            SetGenerator::SubfieldGrid => "subfield-grid",
            SetGenerator::CircleUnion => "circle-union",
        }
    }

    fn id(self) -> u64 {
        match self {
            SetGenerator::Uniform => 0,
            SetGenerator::LineConcentrated => 1,
            SetGenerator::SubfieldGrid => 2,
            SetGenerator::CircleUnion => 3,
        }
    }
}

/// One experiment row: one (generator, trial) draw and its distance set.
#[derive(Debug, Clone, Serialize)]
pub struct FalconerRow {
    pub q: u64,
    pub residue_class: u64,
    pub size_e: usize,
    pub size_f: usize,
    /// |E||F| / q^{8/3}.
    pub product_vs_q83: f64,
    pub distance_count: usize,
    /// |Δ(E, F)| / q.
    pub ratio: f64,
    pub generator: String,
    pub seed: u64,
    pub trial: u32,
}

fn draw_set(
    field: &Field,
    fam: &LevelSetFamily,
    generator: SetGenerator,
    size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>, DistanceError> {
    let q = field.q() as usize;
    let plane = q * q;
    match generator {
        SetGenerator::Uniform => Ok(sample(rng, plane, size).into_vec()),
        SetGenerator::LineConcentrated => {
            let mut chosen: Vec<usize> = Vec::with_capacity(size);
            let mut in_set = vec![false; plane];
            let lines: Vec<crate::curves::LineWitness> = crate::curves::all_lines(field).collect();
            while chosen.len() < size {
                let line = &lines[rng.gen_range(0..lines.len())];
                for pt in line.points(field) {
                    if chosen.len() == size {
                        break;
                    }
                    let idx = plane_index(field, pt);
                    if !in_set[idx] {
                        in_set[idx] = true;
                        chosen.push(idx);
                    }
                }
            }
            Ok(chosen)
        }
        SetGenerator::SubfieldGrid => {
            if field.k() != 2 {
                return Err(DistanceError::GeneratorUnavailable(format!(
                    "the subfield grid needs q = p^2; this field has q = {}^{}",
                    field.p(),
                    field.k()
                )));
            }
            let p = field.p() as usize;
            let grid: Vec<usize> = (0..p * p).map(|i| (i / p) * q + (i % p)).collect();
            let take = size.min(grid.len());
            let mut chosen: Vec<usize> = sample(rng, grid.len(), take)
                .into_iter()
                .map(|i| grid[i])
                .collect();
            let mut in_set = vec![false; plane];
            for &i in &chosen {
                in_set[i] = true;
            }
            while chosen.len() < size {
                let idx = rng.gen_range(0..plane);
                if !in_set[idx] {
                    in_set[idx] = true;
                    chosen.push(idx);
                }
            }
            Ok(chosen)
        }
        SetGenerator::CircleUnion => {
            let mut chosen: Vec<usize> = Vec::with_capacity(size);
            let mut in_set = vec![false; plane];
            while chosen.len() < size {
                let center = plane_point(field, rng.gen_range(0..plane));
                let radius = field.element(rng.gen_range(1..q)).unwrap();
                for &x in fam.variety(radius).points() {
                    if chosen.len() == size {
                        break;
                    }
                    let shifted = crate::fourier::point_add(field, x, center);
                    let idx = plane_index(field, shifted);
                    if !in_set[idx] {
                        in_set[idx] = true;
                        chosen.push(idx);
                    }
                }
            }
            Ok(chosen)
        }
    }
}

/// Runs `trials` seeded draws per generator and reports the distance
/// set of each; rows come back ordered by (generator, trial) and are
/// bit-for-bit reproducible for a fixed seed.
pub fn falconer_experiment(
    field: &Field,
    size_e: usize,
    size_f: usize,
    trials: u32,
    seed: u64,
    generators: &[SetGenerator],
) -> Result<Vec<FalconerRow>, DistanceError> {
    let plane = (field.q() * field.q()) as usize;
    if size_e == 0 || size_f == 0 || size_e > plane || size_f > plane {
        return Err(DistanceError::BadSizes { size_e, size_f, max: plane });
    }
    let fam = LevelSetFamily::circle(field);
    let q = field.q() as f64;
    let threshold = q.powf(8.0 / 3.0);

    // Fail fast on configuration errors before spawning trials.
    if field.k() != 2 && generators.contains(&SetGenerator::SubfieldGrid) {
        return Err(DistanceError::GeneratorUnavailable(format!(
            "the subfield grid needs q = p^2; this field has q = {}^{}",
            field.p(),
            field.k()
        )));
    }

    let jobs: Vec<(SetGenerator, u32)> = generators
        .iter()
        .flat_map(|&g| (0..trials).map(move |trial| (g, trial)))
        .collect();
    let rows: Result<Vec<FalconerRow>, DistanceError> = jobs
        .par_iter()
        .map(|&(generator, trial)| {
            let mut rng_e = ChaCha8Rng::seed_from_u64(seed);
            rng_e.set_stream((generator.id() << 32) | (u64::from(trial) << 1));
            let mut rng_f = ChaCha8Rng::seed_from_u64(seed);
            rng_f.set_stream((generator.id() << 32) | (u64::from(trial) << 1) | 1);
            let e = draw_set(field, &fam, generator, size_e, &mut rng_e)?;
            let f = draw_set(field, &fam, generator, size_f, &mut rng_f)?;
            let pair = PointSetPair::from_indices(
                field,
                &e,
                &f,
                format!("seeded-{}({seed})", generator.name()),
            );
            let distances = distance_count(&pair, &fam);
            Ok(FalconerRow {
                q: field.q(),
                residue_class: field.q() % 4,
                size_e,
                size_f,
                product_vs_q83: (size_e as f64) * (size_f as f64) / threshold,
                distance_count: distances,
                ratio: distances as f64 / q,
                generator: generator.name().to_string(),
                seed,
                trial,
            })
        })
        .collect();
    rows
}

/// |Δ(E, F)| for the family's polynomial, with early exit at q.
#[must_use]
pub fn distance_count(pair: &PointSetPair, fam: &LevelSetFamily) -> usize {
    let field = pair.field();
    let q = field.q() as usize;
    let mut seen = vec![false; q];
    let mut count = 0usize;
    for &x in pair.e() {
        for &y in pair.f() {
            let t = fam.level_of(crate::fourier::point_sub(field, x, y));
            if !seen[t.index()] {
                seen[t.index()] = true;
                count += 1;
                if count == q {
                    return count;
                }
            }
        }
    }
    count
}
