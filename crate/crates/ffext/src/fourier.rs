//! Complex-valued functions on the plane F_q^2 and their exact Fourier
//! analysis.
//!
//! Two measure conventions coexist and are tracked by a space tag:
//!
//! * function side (`Space::Dx`): normalized counting measure, so
//!   integrals are q^{-2} * sum over the plane;
//! * frequency side (`Space::Dm`): plain counting measure.
//!
//! With chi the canonical additive character and m.x the F_q dot product,
//!
//! * forward:  f^(m)  = q^{-2} sum_x chi(-m.x) f(x)      (Dx -> Dm)
//! * inverse:  f(x)   =        sum_m chi(m.x)  g(m)      (Dm -> Dx)
//! * dual:     g^(x)  =        sum_m chi(-x.m) g(m)      (Dm -> Dx)
//! * convolution: (f*h)(y) = q^{-2} sum_x f(y-x) h(x)    (Dx, Dx) -> Dx
//!
//! so inversion after the forward transform is the identity, Plancherel
//! reads sum_m |f^|^2 = q^{-2} sum_x |f|^2, and (f*h)^ = f^ h^. All sums
//! are evaluated exactly as written: there is no fast-transform path, only
//! an optional sparse-support path that skips structural zeros.

use crate::field::{Field, FieldElement};
pub use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

/// Which measure convention a `PlaneFunction` lives under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// Function side: normalized counting measure dx.
    #[serde(rename = "dx")]
    Dx,
    /// Frequency side: counting measure dm.
    #[serde(rename = "dm")]
    Dm,
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Space::Dx => "dx",
            Space::Dm => "dm",
        })
    }
}

/// A point of the plane F_q^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x1: FieldElement,
    pub x2: FieldElement,
}

impl PlanePoint {
    #[must_use]
    pub fn new(x1: FieldElement, x2: FieldElement) -> Self {
        PlanePoint { x1, x2 }
    }
}

/// Row-major index of a plane point: x1 * q + x2.
#[must_use]
pub fn plane_index(field: &Field, pt: PlanePoint) -> usize {
    pt.x1.index() * field.q() as usize + pt.x2.index()
}

/// Inverse of `plane_index`.
#[must_use]
pub fn plane_point(field: &Field, index: usize) -> PlanePoint {
    let q = field.q() as usize;
    PlanePoint {
        x1: field.element(index / q).expect("plane index in range"),
        x2: field.element(index % q).expect("plane index in range"),
    }
}

/// All q^2 plane points in row-major order.
pub fn plane_points(field: &Field) -> impl Iterator<Item = PlanePoint> + '_ {
    field
        .elements()
        .flat_map(move |x1| field.elements().map(move |x2| PlanePoint { x1, x2 }))
}

/// Dot product m.x = m1 x1 + m2 x2 in F_q.
#[must_use]
pub fn dot(field: &Field, m: PlanePoint, x: PlanePoint) -> FieldElement {
    field.add(field.mul(m.x1, x.x1), field.mul(m.x2, x.x2))
}

/// Componentwise difference of plane points.
#[must_use]
pub fn point_sub(field: &Field, a: PlanePoint, b: PlanePoint) -> PlanePoint {
    PlanePoint {
        x1: field.sub(a.x1, b.x1),
        x2: field.sub(a.x2, b.x2),
    }
}

/// Componentwise sum of plane points.
#[must_use]
pub fn point_add(field: &Field, a: PlanePoint, b: PlanePoint) -> PlanePoint {
    PlanePoint {
        x1: field.add(a.x1, b.x1),
        x2: field.add(a.x2, b.x2),
    }
}

/// An L^p exponent in [1, infinity].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self, FourierError> {
        if p.is_nan() || p < 1.0 {
            return Err(FourierError::BadExponent(p));
        }
        if p.is_infinite() {
            return Ok(LpExponent::Infinity);
        }
        Ok(LpExponent::Finite(p))
    }

    /// Holder dual: 1 <-> infinity, p -> p / (p - 1).
    #[must_use]
    pub fn dual(self) -> Self {
        match self {
            LpExponent::Infinity => LpExponent::Finite(1.0),
            LpExponent::Finite(p) if p == 1.0 => LpExponent::Infinity,
            LpExponent::Finite(p) => LpExponent::Finite(p / (p - 1.0)),
        }
    }

    /// Numeric value, infinite for the sup norm.
    #[must_use]
    pub fn value(self) -> f64 {
        match self {
            LpExponent::Finite(p) => p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }
}

/// Errors from plane-function construction and operations.
#[derive(Debug, Error)]
pub enum FourierError {
    #[error("operation requires the {expected} space but the function lives in {found}")]
    SpaceMismatch { expected: Space, found: Space },
    #[error("the two functions live over different fields")]
    FieldMismatch,
    #[error("value vector has length {found}, expected q^2 = {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("L^p exponent must satisfy p >= 1, got {0}")]
    BadExponent(f64),
    #[error("malformed serialized plane function: {0}")]
    Format(String),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// A complex-valued function on F_q^2, tagged with its measure convention.
///
/// Values are stored densely in row-major order. An optional sorted
/// support lists the indices that may be nonzero; off-support entries are
/// exactly zero, which the transform kernels exploit.
#[derive(Clone)]
pub struct PlaneFunction {
    field: Field,
    space: Space,
    values: Vec<Complex64>,
    support: Option<Vec<u32>>,
}

impl PlaneFunction {
    #[must_use]
    pub fn zeros(field: &Field, space: Space) -> Self {
        let n = (field.q() * field.q()) as usize;
        PlaneFunction {
            field: field.clone(),
            space,
            values: vec![Complex64::new(0.0, 0.0); n],
            support: Some(Vec::new()),
        }
    }

    #[must_use]
    pub fn constant(field: &Field, space: Space, c: Complex64) -> Self {
        let n = (field.q() * field.q()) as usize;
        PlaneFunction {
            field: field.clone(),
            space,
            values: vec![c; n],
            support: None,
        }
    }

    /// Dense constructor; the vector must have exactly q^2 entries.
    pub fn from_values(field: &Field, space: Space, values: Vec<Complex64>) -> Result<Self, FourierError> {
        let n = (field.q() * field.q()) as usize;
        if values.len() != n {
            return Err(FourierError::LengthMismatch { expected: n, found: values.len() });
        }
        Ok(PlaneFunction { field: field.clone(), space, values, support: None })
    }

    /// Dense constructor from a pointwise rule.
    #[must_use]
    pub fn from_fn(field: &Field, space: Space, mut f: impl FnMut(PlanePoint) -> Complex64) -> Self {
        let values = plane_points(field).map(|pt| f(pt)).collect();
        PlaneFunction { field: field.clone(), space, values, support: None }
    }

    /// Sparse constructor; duplicate points accumulate.
    #[must_use]
    pub fn sparse(field: &Field, space: Space, entries: &[(PlanePoint, Complex64)]) -> Self {
        let mut out = PlaneFunction::zeros(field, space);
        let mut support: Vec<u32> = Vec::with_capacity(entries.len());
        for &(pt, v) in entries {
            let idx = plane_index(field, pt);
            out.values[idx] += v;
            support.push(idx as u32);
        }
        support.sort_unstable();
        support.dedup();
        out.support = Some(support);
        out
    }

    /// Indicator of a point set.
    #[must_use]
    pub fn indicator(field: &Field, space: Space, points: &[PlanePoint]) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let entries: Vec<(PlanePoint, Complex64)> = points.iter().map(|&p| (p, one)).collect();
        let mut out = PlaneFunction::sparse(field, space, &entries);
        // Re-set in case of duplicates: an indicator is {0,1}-valued.
        if let Some(sup) = &out.support {
            for &i in sup {
                out.values[i as usize] = one;
            }
        }
        out
    }

    /// Unit mass at a single point.
    #[must_use]
    pub fn point_mass(field: &Field, space: Space, at: PlanePoint) -> Self {
        PlaneFunction::sparse(field, space, &[(at, Complex64::new(1.0, 0.0))])
    }

    #[must_use]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[must_use]
    pub fn space(&self) -> Space {
        self.space
    }

    #[must_use]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Sorted support indices, when tracked.
    #[must_use]
    pub fn support(&self) -> Option<&[u32]> {
        self.support.as_deref()
    }

    #[must_use]
    pub fn value(&self, pt: PlanePoint) -> Complex64 {
        self.values[plane_index(&self.field, pt)]
    }

    #[must_use]
    pub fn value_at_index(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Pointwise map into a new dense function in the same space.
    #[must_use]
    pub fn map(&self, mut f: impl FnMut(PlanePoint, Complex64) -> Complex64) -> Self {
        let values = plane_points(&self.field)
            .zip(self.values.iter())
            .map(|(pt, &v)| f(pt, v))
            .collect();
        PlaneFunction { field: self.field.clone(), space: self.space, values, support: None }
    }

    fn expect_space(&self, expected: Space) -> Result<(), FourierError> {
        if self.space != expected {
            return Err(FourierError::SpaceMismatch { expected, found: self.space });
        }
        Ok(())
    }

    /// Entries to feed a transform: the support if tracked, otherwise all
    /// entries with exact zeros skipped (adding zero terms is a no-op).
    fn active_entries(&self) -> Vec<(u32, Complex64)> {
        match &self.support {
            Some(sup) => sup.iter().map(|&i| (i, self.values[i as usize])).collect(),
            None => self
                .values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
                .map(|(i, &v)| (i as u32, v))
                .collect(),
        }
    }

    /// Shared kernel: out[w] = prefactor * sum_in chi(sign * w.in) v_in.
    fn transform_kernel(&self, conjugate_phase: bool, prefactor: f64, out_space: Space) -> PlaneFunction {
        let field = &self.field;
        let q = field.q() as usize;
        let n = q * q;
        let entries = self.active_entries();
        let values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .with_min_len(64)
            .map(|w_idx| {
                let w = plane_point(field, w_idx);
                let mut acc = Complex64::new(0.0, 0.0);
                for &(x_idx, v) in &entries {
                    let x = plane_point(field, x_idx as usize);
                    let phase = field.chi(dot(field, w, x));
                    let phase = if conjugate_phase { phase.conj() } else { phase };
                    acc += phase * v;
                }
                prefactor * acc
            })
            .collect();
        PlaneFunction { field: field.clone(), space: out_space, values, support: None }
    }

    /// Forward transform f^(m) = q^{-2} sum_x chi(-m.x) f(x).
    pub fn forward_ft(&self) -> Result<PlaneFunction, FourierError> {
        self.expect_space(Space::Dx)?;
        let q2 = (self.field.q() * self.field.q()) as f64;
        Ok(self.transform_kernel(true, 1.0 / q2, Space::Dm))
    }

    /// Inversion f(x) = sum_m chi(m.x) g(m).
    pub fn inverse_ft(&self) -> Result<PlaneFunction, FourierError> {
        self.expect_space(Space::Dm)?;
        Ok(self.transform_kernel(false, 1.0, Space::Dx))
    }

    /// Dual transform g^(x) = sum_m chi(-x.m) g(m), with no prefactor.
    pub fn dual_ft(&self) -> Result<PlaneFunction, FourierError> {
        self.expect_space(Space::Dm)?;
        Ok(self.transform_kernel(true, 1.0, Space::Dx))
    }

    /// Normalized convolution (f*h)(y) = q^{-2} sum_x f(y-x) h(x).
    pub fn convolve(&self, other: &PlaneFunction) -> Result<PlaneFunction, FourierError> {
        self.expect_space(Space::Dx)?;
        other.expect_space(Space::Dx)?;
        if self.field.as_ref() != other.field.as_ref() {
            return Err(FourierError::FieldMismatch);
        }
        let field = &self.field;
        let q = field.q() as usize;
        let n = q * q;
        let q2 = (n as f64).recip();
        // Convolution is symmetric (sum_x f(y-x) h(x) = sum_x h(y-x) f(x)),
        // so walk the sparser factor and look the other one up.
        let (walk, lookup) = {
            let a = self.active_entries();
            let b = other.active_entries();
            if a.len() <= b.len() {
                (a, other)
            } else {
                (b, self)
            }
        };
        let values: Vec<Complex64> = (0..n)
            .into_par_iter()
            .with_min_len(64)
            .map(|y_idx| {
                let y = plane_point(field, y_idx);
                let mut acc = Complex64::new(0.0, 0.0);
                for &(x_idx, v) in &walk {
                    let x = plane_point(field, x_idx as usize);
                    let d = point_sub(field, y, x);
                    acc += lookup.values[plane_index(field, d)] * v;
                }
                acc * q2
            })
            .collect();
        Ok(PlaneFunction { field: field.clone(), space: Space::Dx, values, support: None })
    }

    /// L^p norm under the measure of the function's space: normalized
    /// counting measure on the Dx side, counting measure on the Dm side,
    /// and the maximum modulus for p = infinity.
    #[must_use]
    pub fn norm_lp(&self, p: LpExponent) -> f64 {
        match p {
            LpExponent::Infinity => self.values.iter().map(|v| v.norm()).fold(0.0, f64::max),
            LpExponent::Finite(p) => {
                let sum: f64 = if p == 2.0 {
                    self.values.iter().map(|v| v.norm_sqr()).sum()
                } else if p == 4.0 {
                    self.values.iter().map(|v| { let s = v.norm_sqr(); s * s }).sum()
                } else if p == 1.0 {
                    self.values.iter().map(|v| v.norm()).sum()
                } else {
                    self.values.iter().map(|v| v.norm().powf(p)).sum()
                };
                let measure_sum = match self.space {
                    Space::Dx => sum / (self.values.len() as f64),
                    Space::Dm => sum,
                };
                measure_sum.powf(1.0 / p)
            }
        }
    }

    /// JSON form carrying the field header, the space tag, and the dense
    /// value grid as [re, im] pairs in row-major order.
    #[must_use]
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.field.p(),
            "k": self.field.k(),
            "modulus": self.field.modulus(),
            "space": self.space,
            "values": self.values.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self, FourierError> {
        #[derive(Deserialize)]
        struct Repr {
            p: u64,
            k: u32,
            modulus: Vec<u64>,
            space: Space,
            values: Vec<[f64; 2]>,
        }
        let repr: Repr = serde_json::from_value(value.clone())
            .map_err(|e| FourierError::Format(e.to_string()))?;
        let field = crate::field::construct_field_with_modulus(repr.p, repr.k, &repr.modulus)?;
        let values = repr.values.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        PlaneFunction::from_values(&field, repr.space, values)
    }

    /// CSV rows `x1,x2,re,im` with a header, points in row-major order and
    /// coordinates given as canonical indices.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x1,x2,re,im")?;
        for (pt, v) in plane_points(&self.field).zip(self.values.iter()) {
            writeln!(w, "{},{},{},{}", pt.x1.index(), pt.x2.index(), v.re, v.im)?;
        }
        Ok(())
    }

    /// Reads the `write_csv` format; rows may appear in any order and
    /// omitted points default to zero.
    pub fn read_csv<R: BufRead>(field: &Field, space: Space, r: R) -> Result<Self, FourierError> {
        let q = field.q() as usize;
        let mut values = vec![Complex64::new(0.0, 0.0); q * q];
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| FourierError::Format(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("x1")) {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 4 {
                return Err(FourierError::Format(format!("line {}: expected 4 fields", lineno + 1)));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| FourierError::Format(format!("line {}: {e}", lineno + 1)));
            let x1 = parse(parts[0])? as usize;
            let x2 = parse(parts[1])? as usize;
            if x1 >= q || x2 >= q {
                return Err(FourierError::Format(format!("line {}: coordinate out of range", lineno + 1)));
            }
            values[x1 * q + x2] = Complex64::new(parse(parts[2])?, parse(parts[3])?);
        }
        PlaneFunction::from_values(field, space, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::construct_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-10;

    fn random_function(field: &Field, space: Space, rng: &mut ChaCha8Rng) -> PlaneFunction {
        let n = (field.q() * field.q()) as usize;
        let values = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        PlaneFunction::from_values(field, space, values).unwrap()
    }

    #[test]
    fn point_mass_transforms_to_flat_modulus() {
        let f = construct_field(5, 1).unwrap();
        let origin = PlanePoint::new(f.zero(), f.zero());
        let delta = PlaneFunction::point_mass(&f, Space::Dx, origin);
        let hat = delta.forward_ft().unwrap();
        for v in hat.values() {
            assert!((v - Complex64::new(1.0 / 25.0, 0.0)).norm() < TOL);
        }
    }

    #[test]
    fn constant_transforms_to_point_mass_at_zero() {
        let f = construct_field(7, 1).unwrap();
        let one = PlaneFunction::constant(&f, Space::Dx, Complex64::new(1.0, 0.0));
        let hat = one.forward_ft().unwrap();
        for (idx, v) in hat.values().iter().enumerate() {
            let expected = if idx == 0 { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < TOL);
        }
    }

    #[test]
    fn inversion_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(3, 1), (5, 1), (3, 2)] {
            let f = construct_field(p, k).unwrap();
            let g = random_function(&f, Space::Dx, &mut rng);
            let back = g.forward_ft().unwrap().inverse_ft().unwrap();
            let worst = g
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(worst < TOL, "q={}: round-trip error {worst}", f.q());
        }
    }

    #[test]
    fn plancherel_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, k) in [(5, 1), (3, 2), (11, 1)] {
            let f = construct_field(p, k).unwrap();
            let g = random_function(&f, Space::Dx, &mut rng);
            let lhs = g.forward_ft().unwrap().norm_lp(LpExponent::Finite(2.0));
            let rhs = g.norm_lp(LpExponent::Finite(2.0));
            assert!((lhs - rhs).abs() < TOL, "q={}: {lhs} vs {rhs}", f.q());
        }
    }

    #[test]
    fn convolution_theorem_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (p, k) in [(5, 1), (3, 2)] {
            let field = construct_field(p, k).unwrap();
            let f = random_function(&field, Space::Dx, &mut rng);
            let h = random_function(&field, Space::Dx, &mut rng);
            let lhs = f.convolve(&h).unwrap().forward_ft().unwrap();
            let fh = f.forward_ft().unwrap();
            let hh = h.forward_ft().unwrap();
            let worst = lhs
                .values()
                .iter()
                .zip(fh.values().iter().zip(hh.values()))
                .map(|(l, (a, b))| (l - a * b).norm())
                .fold(0.0, f64::max);
            assert!(worst < TOL, "q={}: convolution mismatch {worst}", field.q());
        }
    }

    #[test]
    fn convolution_is_symmetric_and_walk_order_free() {
        // One sparse and one dense factor exercises the factor-picking path.
        let field = construct_field(5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let dense = random_function(&field, Space::Dx, &mut rng);
        let pts = [
            PlanePoint::new(field.from_int(1), field.from_int(2)),
            PlanePoint::new(field.from_int(4), field.from_int(0)),
        ];
        let sparse = PlaneFunction::indicator(&field, Space::Dx, &pts);
        let ab = dense.convolve(&sparse).unwrap();
        let ba = sparse.convolve(&dense).unwrap();
        let worst = ab
            .values()
            .iter()
            .zip(ba.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < TOL);
    }

    #[test]
    fn dual_is_inverse_at_negated_argument() {
        let field = construct_field(7, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let g = random_function(&field, Space::Dm, &mut rng);
        let dual = g.dual_ft().unwrap();
        let inv = g.inverse_ft().unwrap();
        for pt in plane_points(&field) {
            let minus = PlanePoint::new(field.neg(pt.x1), field.neg(pt.x2));
            assert!((dual.value(pt) - inv.value(minus)).norm() < TOL);
        }
    }

    #[test]
    fn sparse_and_dense_transforms_agree() {
        let field = construct_field(3, 2).unwrap();
        let pts = [
            PlanePoint::new(field.element(0).unwrap(), field.element(4).unwrap()),
            PlanePoint::new(field.element(7).unwrap(), field.element(1).unwrap()),
            PlanePoint::new(field.element(2).unwrap(), field.element(2).unwrap()),
        ];
        let sparse = PlaneFunction::indicator(&field, Space::Dx, &pts);
        let dense = PlaneFunction::from_values(&field, Space::Dx, sparse.values().to_vec()).unwrap();
        assert!(sparse.support().is_some());
        assert!(dense.support().is_none());
        let a = sparse.forward_ft().unwrap();
        let b = dense.forward_ft().unwrap();
        let worst = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < TOL);
    }

    #[test]
    fn norms_follow_the_measure_convention() {
        let field = construct_field(5, 1).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let dx = PlaneFunction::constant(&field, Space::Dx, one);
        let dm = PlaneFunction::constant(&field, Space::Dm, one);
        // Normalized measure gives mass 1; counting measure gives q^2.
        assert!((dx.norm_lp(LpExponent::Finite(1.0)) - 1.0).abs() < TOL);
        assert!((dm.norm_lp(LpExponent::Finite(1.0)) - 25.0).abs() < TOL);
        assert!((dx.norm_lp(LpExponent::Infinity) - 1.0).abs() < TOL);
        // A point mass on the Dx side has L^p norm q^{-2/p}.
        let delta = PlaneFunction::point_mass(&field, Space::Dx, PlanePoint::new(field.zero(), field.zero()));
        let expected = 25f64.powf(-1.0 / 3.0);
        assert!((delta.norm_lp(LpExponent::Finite(3.0)) - expected).abs() < TOL);
    }

    #[test]
    fn lp_exponent_validation_and_duality() {
        assert!(matches!(LpExponent::new(0.5), Err(FourierError::BadExponent(_))));
        assert!(matches!(LpExponent::new(f64::NAN), Err(FourierError::BadExponent(_))));
        let four = LpExponent::new(4.0).unwrap();
        assert!((four.dual().value() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(LpExponent::new(1.0).unwrap().dual(), LpExponent::Infinity);
        assert_eq!(LpExponent::Infinity.dual(), LpExponent::Finite(1.0));
    }

    #[test]
    fn space_checks_are_enforced() {
        let field = construct_field(3, 1).unwrap();
        let dx = PlaneFunction::zeros(&field, Space::Dx);
        let dm = PlaneFunction::zeros(&field, Space::Dm);
        assert!(matches!(dm.forward_ft(), Err(FourierError::SpaceMismatch { .. })));
        assert!(matches!(dx.inverse_ft(), Err(FourierError::SpaceMismatch { .. })));
        assert!(matches!(dx.dual_ft(), Err(FourierError::SpaceMismatch { .. })));
        assert!(matches!(dx.convolve(&dm), Err(FourierError::SpaceMismatch { .. })));
        let other = construct_field(5, 1).unwrap();
        let other_dx = PlaneFunction::zeros(&other, Space::Dx);
        assert!(matches!(dx.convolve(&other_dx), Err(FourierError::FieldMismatch)));
        let short = PlaneFunction::from_values(&field, Space::Dx, vec![Complex64::new(0.0, 0.0); 3]);
        assert!(matches!(short, Err(FourierError::LengthMismatch { expected: 9, found: 3 })));
    }

    #[test]
    fn json_round_trip_preserves_everything() {
        let field = construct_field(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = random_function(&field, Space::Dm, &mut rng);
        let back = PlaneFunction::from_json(&g.to_json()).unwrap();
        assert_eq!(back.space(), Space::Dm);
        assert_eq!(back.field().modulus(), field.modulus());
        assert_eq!(back.values(), g.values());
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let field = construct_field(5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let g = random_function(&field, Space::Dx, &mut rng);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = PlaneFunction::read_csv(&field, Space::Dx, buf.as_slice()).unwrap();
        let worst = g
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12);
    }
}
