//! Surface measures on plane varieties and the extension operator.
//!
//! A variety V carries the normalized measure with density q²/|V| on V,
//! so its total mass is exactly 1. The extension of a function f on V is
//!
//! ```text
//! (f dσ)^∨(m) = |V|⁻¹ Σ_{x∈V} χ(m·x) f(x),
//! ```
//!
//! a function on the frequency side, measured there with counting
//! measure. The operator-norm ratio
//!
//! ```text
//! ‖(f dσ)^∨‖_{L^r(dm)} / ‖f‖_{L^p(V,dσ)}
//! ```
//!
//! is the basic observable: bounded uniformly in q for line-free curves
//! at (p, r) = (2, 4), blowing up like q^{1/4} as soon as V contains a
//! line. This module provides the exact ratio for explicit test
//! functions, the additive-energy route to the f ≡ 1 value of the L⁴
//! norm, the sum-count autocorrelation profile, and the closed-form
//! admissibility thresholds on (p, r). The numerical search for the
//! operator norm lives in [`crate::ascent`].

use crate::ascent::{estimate_rstar, RstarEstimate, RstarOptions};
use crate::curves::{contains_line, LineWitness, Variety};
use crate::field::Field;
use crate::fourier::{
    plane_index, plane_point, FourierError, LpExponent, PlaneFunction, Space,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Errors from surface-measure and extension-operator computations.
#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("the variety is empty; it carries no probability measure")]
    EmptyVariety,
    #[error("expected {expected} values (one per variety point), found {found}")]
    SupportViolation { expected: usize, found: usize },
    #[error("the zero function has no ratio")]
    ZeroFunction,
    #[error("argument out of range: {0}")]
    BadRange(String),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// The normalized measure dσ = (q²/|V|)·1_V on a nonempty variety.
#[derive(Clone)]
pub struct SurfaceMeasure {
    variety: Variety,
    density: PlaneFunction,
}

impl SurfaceMeasure {
    pub fn new(variety: Variety) -> Result<Self, ExtensionError> {
        if variety.cardinality() == 0 {
            return Err(ExtensionError::EmptyVariety);
        }
        let field = variety.field().clone();
        let weight = field.q() as f64 * field.q() as f64 / variety.cardinality() as f64;
        let entries: Vec<_> = variety
            .points()
            .iter()
            .map(|&pt| (pt, Complex64::new(weight, 0.0)))
            .collect();
        let density = PlaneFunction::sparse(&field, Space::Dx, &entries);
        Ok(SurfaceMeasure { variety, density })
    }

    #[must_use]
    pub fn variety(&self) -> &Variety {
        &self.variety
    }

    #[must_use]
    pub fn field(&self) -> &Field {
        self.variety.field()
    }

    #[must_use]
    pub fn cardinality(&self) -> usize {
        self.variety.cardinality()
    }

    /// The density (q²/|V|)·1_V as a plane function.
    #[must_use]
    pub fn density(&self) -> &PlaneFunction {
        &self.density
    }

    /// q⁻² Σ_x density(x); equals 1 by construction.
    #[must_use]
    pub fn total_mass(&self) -> f64 {
        let q2 = (self.field().q() * self.field().q()) as f64;
        self.density.values().iter().map(|v| v.re).sum::<f64>() / q2
    }

    /// The density f·dσ as a plane function, for f given on the variety
    /// points in their stored order.
    pub fn weighted_density(&self, f: &[Complex64]) -> Result<PlaneFunction, ExtensionError> {
        self.check_support(f)?;
        let field = self.field().clone();
        let weight = field.q() as f64 * field.q() as f64 / self.cardinality() as f64;
        let entries: Vec<_> = self
            .variety
            .points()
            .iter()
            .zip(f)
            .map(|(&pt, &v)| (pt, v * weight))
            .collect();
        Ok(PlaneFunction::sparse(&field, Space::Dx, &entries))
    }

    /// The extension (f dσ)^∨(m) = |V|⁻¹ Σ_{x∈V} χ(m·x) f(x) at every
    /// frequency; O(|V|·q²).
    pub fn extend(&self, f: &[Complex64]) -> Result<PlaneFunction, ExtensionError> {
        self.check_support(f)?;
        let field = self.field().clone();
        let q = field.q() as usize;
        let inv_card = 1.0 / self.cardinality() as f64;
        let points = self.variety.points();
        let values: Vec<Complex64> = (0..q * q)
            .into_par_iter()
            .with_min_len(64)
            .map(|idx| {
                let m = plane_point(&field, idx);
                let mut acc = Complex64::new(0.0, 0.0);
                for (&x, &fv) in points.iter().zip(f) {
                    acc += field.chi(crate::fourier::dot(&field, m, x)) * fv;
                }
                acc * inv_card
            })
            .collect();
        Ok(PlaneFunction::from_values(&field, Space::Dm, values)?)
    }

    /// ‖f‖_{L^p(V,dσ)} = (|V|⁻¹ Σ_{x∈V} |f(x)|^p)^{1/p}; max for p = ∞.
    pub fn norm_on_surface(&self, f: &[Complex64], p: LpExponent) -> Result<f64, ExtensionError> {
        self.check_support(f)?;
        Ok(match p {
            LpExponent::Infinity => f.iter().map(|v| v.norm()).fold(0.0, f64::max),
            LpExponent::Finite(p) => {
                let mean =
                    f.iter().map(|v| v.norm().powf(p)).sum::<f64>() / self.cardinality() as f64;
                mean.powf(1.0 / p)
            }
        })
    }

    /// The test-function ratio ‖(f dσ)^∨‖_{L^r(dm)} / ‖f‖_{L^p(V,dσ)}.
    pub fn rstar_ratio(
        &self,
        f: &[Complex64],
        p: LpExponent,
        r: LpExponent,
    ) -> Result<f64, ExtensionError> {
        let denom = self.norm_on_surface(f, p)?;
        if denom == 0.0 {
            return Err(ExtensionError::ZeroFunction);
        }
        let top = self.extend(f)?.norm_lp(r);
        Ok(top / denom)
    }

    fn check_support(&self, f: &[Complex64]) -> Result<(), ExtensionError> {
        if f.len() != self.cardinality() {
            return Err(ExtensionError::SupportViolation {
                expected: self.cardinality(),
                found: f.len(),
            });
        }
        Ok(())
    }
}

/// Sum-representation counts of a variety: entry a holds
/// #{(b, c) ∈ V × V : b + c = a}.
#[derive(Debug, Clone)]
pub struct AutocorrelationProfile {
    /// One count per plane index.
    pub counts: Vec<u32>,
    /// Σ_a counts(a)², the number of quadruples with b + c = b' + c'.
    pub energy: u128,
    /// Largest count and the lowest plane index achieving it.
    pub max: u32,
    pub argmax: usize,
    /// Largest count over all other plane indices.
    pub second_max: u32,
    /// deg(P)²: counts above this cannot come from transverse
    /// curve-translate intersections.
    pub bezout_threshold: u32,
    /// All (plane index, count) with count above the threshold.
    pub exceptional: Vec<(usize, u32)>,
}

/// Computes the sum-count profile in O(|V|²).
#[must_use]
pub fn autocorrelation_profile(v: &Variety) -> AutocorrelationProfile {
    let field = v.field();
    let q2 = (field.q() * field.q()) as usize;
    let mut counts = vec![0u32; q2];
    for &b in v.points() {
        for &c in v.points() {
            let a = crate::fourier::point_add(field, b, c);
            counts[plane_index(field, a)] += 1;
        }
    }
    let energy = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let (mut max, mut argmax) = (0u32, 0usize);
    for (i, &c) in counts.iter().enumerate() {
        if c > max {
            max = c;
            argmax = i;
        }
    }
    let second_max = counts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != argmax)
        .map(|(_, &c)| c)
        .max()
        .unwrap_or(0);
    let bezout_threshold = v.poly().degree() * v.poly().degree();
    let exceptional = counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > bezout_threshold)
        .map(|(i, &c)| (i, c))
        .collect();
    AutocorrelationProfile {
        counts,
        energy,
        max,
        argmax,
        second_max,
        bezout_threshold,
        exceptional,
    }
}

/// #{(a,b,c,d) ∈ V⁴ : a + b = c + d}, exactly.
#[must_use]
pub fn additive_energy(v: &Variety) -> u128 {
    autocorrelation_profile(v).energy
}

/// The exact value of ‖(dσ)^∨‖₄, i.e. the (·→4) ratio of f ≡ 1,
/// computed from the additive energy: (q²·E)^{1/4} / |V|.
pub fn rstar_energy_value(sigma: &SurfaceMeasure) -> f64 {
    let q = sigma.field().q() as f64;
    let e = additive_energy(sigma.variety()) as f64;
    (q * q * e).powf(0.25) / sigma.cardinality() as f64
}

/// Closed-form admissibility thresholds on r for an extension estimate
/// with exponents (p, r) on a variety of size |V| ~ q^s.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NecessaryConditions {
    /// r must reach 4/s (constant test function).
    pub constant_test: f64,
    /// r must reach 2p/(s(p−1)) (point-mass test function).
    pub point_mass_test: f64,
    /// r must reach p(2−α)/((p−1)(s−α)) when V contains a positive
    /// proportion of an α-dimensional affine subspace; +∞ at s = α, and
    /// vacuous (negative) when s < α. Present only for α = 1.
    pub subspace_test: Option<f64>,
    /// The binding threshold: max of the applicable bounds.
    pub r_required: f64,
    /// Whether the requested r meets every applicable bound.
    pub admissible: bool,
}

/// Evaluates the admissibility inequalities; α ∈ {0, 1}, 0 < s < 2.
pub fn necessary_conditions(
    p: LpExponent,
    r: LpExponent,
    s: f64,
    alpha: u32,
) -> Result<NecessaryConditions, ExtensionError> {
    if !(s > 0.0 && s < 2.0) {
        return Err(ExtensionError::BadRange(format!(
            "variety dimension s must lie in (0, 2), got {s}"
        )));
    }
    if alpha > 1 {
        return Err(ExtensionError::BadRange(format!(
            "subspace dimension must be 0 or 1, got {alpha}"
        )));
    }
    let pv = p.value();
    let constant_test = 4.0 / s;
    // p = 1 forces r = ∞; p = ∞ is the limit 2/s.
    let point_mass_test = if pv.is_infinite() { 2.0 / s } else { 2.0 * pv / (s * (pv - 1.0)) };
    let subspace_test = (alpha == 1).then(|| {
        if pv.is_infinite() {
            (2.0 - alpha as f64) / (s - alpha as f64)
        } else {
            pv * (2.0 - alpha as f64) / ((pv - 1.0) * (s - alpha as f64))
        }
    });
    let mut r_required = constant_test.max(point_mass_test);
    if let Some(t) = subspace_test {
        r_required = r_required.max(t);
    }
    let admissible = r.value() >= r_required;
    Ok(NecessaryConditions { constant_test, point_mass_test, subspace_test, r_required, admissible })
}

/// The dual-side ratio ‖ĝ‖_{L^{p'}(V,dσ)} / ‖g‖_{L^{r'}(dm)} for a
/// frequency-side function g; its supremum over g equals the supremum of
/// [`SurfaceMeasure::rstar_ratio`] over f by duality.
pub fn restriction_ratio(
    g: &PlaneFunction,
    sigma: &SurfaceMeasure,
    p: LpExponent,
    r: LpExponent,
) -> Result<f64, ExtensionError> {
    let denom = g.norm_lp(r.dual());
    if denom == 0.0 {
        return Err(ExtensionError::ZeroFunction);
    }
    let g_hat = g.dual_ft()?;
    let on_v: Vec<Complex64> =
        sigma.variety().points().iter().map(|&pt| g_hat.value(pt)).collect();
    let top = sigma.norm_on_surface(&on_v, p.dual())?;
    Ok(top / denom)
}

/// Everything measured about one variety at one exponent pair.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub q: u64,
    pub poly_text: String,
    pub cardinality: usize,
    pub size_ratio: f64,
    pub contains_line: bool,
    pub p_exp: f64,
    pub r_exp: f64,
    /// Best ratio found by the multi-start ascent (a lower bound on the
    /// operator norm).
    pub rstar_lower: f64,
    /// Exact f ≡ 1 value of the (·→4) ratio via additive energy.
    pub rstar_energy_bound: f64,
    pub additive_energy: u128,
    pub point_mass_ratio: f64,
    /// Ratio of the full-line indicator when a line lies in V.
    pub line_test_ratio: Option<f64>,
    /// Plane coordinates and counts of sum-representation spikes above
    /// the Bezout threshold.
    pub exceptional_points: Vec<ExceptionalPoint>,
    pub autocorrelation_max: u32,
    pub autocorrelation_second_max: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalPoint {
    pub point: [usize; 2],
    pub count: u32,
}

/// Runs the full battery for one surface measure: the ascent estimate,
/// the analytic test-function values, and the autocorrelation summary.
pub fn build_extension_report(
    sigma: &SurfaceMeasure,
    opts: &RstarOptions,
) -> Result<(ExtensionReport, RstarEstimate), ExtensionError> {
    let field = sigma.field().clone();
    let v = sigma.variety();
    let estimate = estimate_rstar(sigma, opts);
    let profile = autocorrelation_profile(v);
    let witness = contains_line(v.poly());

    let delta: Vec<Complex64> = (0..sigma.cardinality())
        .map(|i| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0))
        .collect();
    let point_mass_ratio = sigma.rstar_ratio(&delta, opts.p, opts.r)?;

    let line_test_ratio = match witness {
        Some(line) => {
            let line_pts: std::collections::HashSet<usize> = line
                .points(&field)
                .iter()
                .map(|&pt| plane_index(&field, pt))
                .collect();
            let f: Vec<Complex64> = v
                .points()
                .iter()
                .map(|&pt| {
                    let inside = line_pts.contains(&plane_index(&field, pt));
                    Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
                })
                .collect();
            Some(sigma.rstar_ratio(&f, opts.p, opts.r)?)
        }
        None => None,
    };

    let exceptional_points = profile
        .exceptional
        .iter()
        .map(|&(idx, count)| {
            let pt = plane_point(&field, idx);
            ExceptionalPoint { point: [pt.x1.index(), pt.x2.index()], count }
        })
        .collect();

    let report = ExtensionReport {
        q: field.q(),
        poly_text: v.poly().to_text(),
        cardinality: v.cardinality(),
        size_ratio: v.size_ratio(),
        contains_line: witness.is_some(),
        p_exp: opts.p.value(),
        r_exp: opts.r.value(),
        rstar_lower: estimate.ratio,
        rstar_energy_bound: rstar_energy_value(sigma),
        additive_energy: profile.energy,
        point_mass_ratio,
        line_test_ratio,
        exceptional_points,
        autocorrelation_max: profile.max,
        autocorrelation_second_max: profile.second_max,
    };
    Ok((report, estimate))
}

/// The closed-form ratio of the full-line indicator on a variety
/// containing a line: q^{1/4}·(q/|V|)^{1/2} at (p, r) = (2, 4).
#[must_use]
pub fn line_test_closed_form(q: u64, cardinality: usize) -> f64 {
    (q as f64).powf(0.25) * ((q as f64) / cardinality as f64).sqrt()
}

/// The closed-form point-mass ratio q^{2/r}·|V|^{1/p − 1}.
#[must_use]
pub fn point_mass_closed_form(q: u64, cardinality: usize, p: LpExponent, r: LpExponent) -> f64 {
    let qr = match r {
        LpExponent::Infinity => 1.0,
        LpExponent::Finite(r) => (q as f64).powf(2.0 / r),
    };
    let vp = match p {
        LpExponent::Infinity => (cardinality as f64).powf(-1.0),
        LpExponent::Finite(p) => (cardinality as f64).powf(1.0 / p - 1.0),
    };
    qr * vp
}

/// Returns the values of f = indicator of the line inside V, ordered by
/// the variety's points. Empty when the witness line is not inside V.
#[must_use]
pub fn line_indicator_on(v: &Variety, line: LineWitness) -> Vec<Complex64> {
    let field = v.field();
    let line_pts: std::collections::HashSet<usize> =
        line.points(field).iter().map(|&pt| plane_index(field, pt)).collect();
    v.points()
        .iter()
        .map(|&pt| {
            Complex64::new(
                if line_pts.contains(&plane_index(field, pt)) { 1.0 } else { 0.0 },
                0.0,
            )
        })
        .collect()
}
