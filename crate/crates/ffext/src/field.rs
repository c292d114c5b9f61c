//! Arithmetic for the finite field F_q, q = p^k with p an odd prime.
//!
//! Elements are residue polynomials in a power basis over a deterministic
//! modulus: the lexicographically smallest monic irreducible of degree k
//! (coefficients compared low degree first). Construction builds discrete
//! log/antilog tables over a fixed generator, so multiplication, inversion,
//! and powers are O(1) lookups; addition works digit by digit in base p.
//!
//! On top of the raw arithmetic the module exposes the three character-level
//! primitives the rest of the crate is built on:
//!
//! * `trace` — the F_p-linear trace a + a^p + ... + a^(p^(k-1)),
//! * `chi` — the canonical additive character exp(2*pi*i*Tr(a)/p),
//! * `eta` — the quadratic character a^((q-1)/2) mapped into {0, +1, -1},
//!
//! plus the Gauss sum of (eta, chi) both as a direct sum and in closed form.
//!
//! # Example
//!
//! ```
//! use ffext::field::construct_field;
//!
//! let f9 = construct_field(3, 2).unwrap();
//! assert_eq!(f9.q(), 9);
//! assert_eq!(f9.modulus(), &[1, 0, 1]); // x^2 + 1
//! let t = f9.element(3).unwrap(); // the basis element x
//! assert_eq!(f9.mul(t, t), f9.from_int(-1)); // x^2 = -1 mod x^2 + 1
//! ```

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;
use thiserror::Error;

/// Largest permitted field order. Dense tables are q-sized and plane-level
/// structures are q^2-sized, so this cap keeps worst-case memory modest.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 14;

/// Errors from field construction and arithmetic.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported; the characteristic must be odd")]
    EvenCharacteristic,
    #[error("field order {order} exceeds the cap {cap}")]
    CapExceeded { order: u64, cap: u64 },
    #[error("extension degree must be at least 1")]
    BadExtensionDegree,
    #[error("modulus {0:?} is not a monic irreducible of the right degree")]
    BadModulus(Vec<u64>),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// An element of a specific `FieldSpec`, stored as its canonical index:
/// the base-p encoding sum_i c_i p^i of its coordinate vector.
///
/// Elements carry no back-reference to their field; all arithmetic goes
/// through `FieldSpec` methods, and mixing fields is a caller error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct FieldElement(u32);

impl FieldElement {
    /// Canonical index in 0..q.
    #[must_use]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(index: usize) -> Self {
        FieldElement(index as u32)
    }
}

/// Shared handle to a constructed field.
pub type Field = Arc<FieldSpec>;

/// A concrete F_q with all lookup tables built.
pub struct FieldSpec {
    p: u64,
    k: u32,
    q: u64,
    /// Monic modulus, k+1 coefficients, low degree first. For k = 1 this is x.
    modulus: Vec<u64>,
    /// exp[i] = g^i for a fixed generator g, i in 0..q-1.
    exp: Vec<u32>,
    /// log[a] for a != 0; log[0] is a sentinel and never read.
    log: Vec<u32>,
    /// Tr(a) as a residue in 0..p.
    trace: Vec<u32>,
    /// eta(a) in {0, +1, -1}.
    eta: Vec<i8>,
    /// -a, indexed by a.
    neg: Vec<u32>,
    /// chi(a) = exp(2 pi i Tr(a) / p), indexed by a.
    chi: Vec<Complex64>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

impl std::fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Builds F_{p^k} with the default order cap.
pub fn construct_field(p: u64, k: u32) -> Result<Field, FieldError> {
    construct_field_with_cap(p, k, DEFAULT_ORDER_CAP)
}

/// Builds F_{p^k}, refusing orders above `cap`.
pub fn construct_field_with_cap(p: u64, k: u32, cap: u64) -> Result<Field, FieldError> {
    let q = check_shape(p, k, cap)?;
    let modulus = if k == 1 {
        vec![0, 1]
    } else {
        smallest_irreducible(p, k)
    };
    Ok(Arc::new(FieldSpec::build(p, k, q, modulus)))
}

/// Builds F_{p^k} over a caller-supplied monic irreducible modulus
/// (low degree first, k+1 coefficients). Used when deserializing data
/// that pins the basis it was written in.
pub fn construct_field_with_modulus(p: u64, k: u32, modulus: &[u64]) -> Result<Field, FieldError> {
    let q = check_shape(p, k, DEFAULT_ORDER_CAP)?;
    let ok = modulus.len() == k as usize + 1
        && *modulus.last().unwrap() == 1
        && modulus.iter().all(|&c| c < p)
        && (k == 1 || is_irreducible(modulus, p));
    if !ok {
        return Err(FieldError::BadModulus(modulus.to_vec()));
    }
    Ok(Arc::new(FieldSpec::build(p, k, q, modulus.to_vec())))
}

fn check_shape(p: u64, k: u32, cap: u64) -> Result<u64, FieldError> {
    if p == 2 {
        return Err(FieldError::EvenCharacteristic);
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if k == 0 {
        return Err(FieldError::BadExtensionDegree);
    }
    let q = p
        .checked_pow(k)
        .ok_or(FieldError::CapExceeded { order: u64::MAX, cap })?;
    if q > cap {
        return Err(FieldError::CapExceeded { order: q, cap });
    }
    Ok(q)
}

impl FieldSpec {
    fn build(p: u64, k: u32, q: u64, modulus: Vec<u64>) -> FieldSpec {
        let qe = q as usize;
        let generator = find_generator(p, k, q, &modulus);

        // Antilog table by repeated multiplication of the generator.
        let mut exp = Vec::with_capacity(qe - 1);
        let mut acc = vec![1u64; 1];
        for _ in 0..q - 1 {
            exp.push(encode(&acc, p) as u32);
            acc = poly_mul_mod(&acc, &generator, &modulus, p);
        }
        let mut log = vec![u32::MAX; qe];
        for (i, &e) in exp.iter().enumerate() {
            debug_assert_eq!(log[e as usize], u32::MAX, "generator power repeated");
            log[e as usize] = i as u32;
        }
        debug_assert!(log[1..].iter().all(|&v| v != u32::MAX));

        let mut spec = FieldSpec {
            p,
            k,
            q,
            modulus,
            exp,
            log,
            trace: Vec::new(),
            eta: Vec::new(),
            neg: Vec::new(),
            chi: Vec::new(),
        };

        spec.neg = (0..qe)
            .map(|a| {
                let mut out = 0u64;
                let mut x = a as u64;
                let mut pw = 1u64;
                for _ in 0..k {
                    let d = x % p;
                    out += if d == 0 { 0 } else { p - d } * pw;
                    x /= p;
                    pw *= p;
                }
                out as u32
            })
            .collect();

        // Tr(a) = a + a^p + ... + a^(p^(k-1)); the result lies in the prime
        // subfield, whose elements are exactly the indices below p.
        spec.trace = (0..qe)
            .map(|a| {
                let a = FieldElement(a as u32);
                let mut frob = a;
                let mut sum = a;
                for _ in 1..k {
                    frob = spec.pow(frob, p);
                    sum = spec.add(sum, frob);
                }
                debug_assert!((sum.0 as u64) < p, "trace escaped the prime subfield");
                sum.0
            })
            .collect();

        let half = (q - 1) / 2;
        let one = FieldElement(1);
        spec.eta = (0..qe)
            .map(|a| {
                if a == 0 {
                    0
                } else if spec.pow(FieldElement(a as u32), half) == one {
                    1
                } else {
                    -1
                }
            })
            .collect();

        let roots: Vec<Complex64> = (0..p)
            .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / p as f64))
            .collect();
        spec.chi = spec.trace.iter().map(|&t| roots[t as usize]).collect();

        spec
    }

    #[must_use]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[must_use]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[must_use]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Monic modulus coefficients, low degree first (length k+1).
    #[must_use]
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    #[must_use]
    pub fn zero(&self) -> FieldElement {
        FieldElement(0)
    }

    #[must_use]
    pub fn one(&self) -> FieldElement {
        FieldElement(1)
    }

    /// The element with the given canonical index, if it is in range.
    #[must_use]
    pub fn element(&self, index: usize) -> Option<FieldElement> {
        (index < self.q as usize).then(|| FieldElement(index as u32))
    }

    /// All q elements in canonical index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q as u32).map(FieldElement)
    }

    /// Embeds an integer via its residue mod p (prime-subfield constants).
    #[must_use]
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p as i64) as u32)
    }

    /// Element from its coordinate vector (low degree first, length <= k).
    #[must_use]
    pub fn from_coeffs(&self, coeffs: &[u64]) -> FieldElement {
        assert!(coeffs.len() <= self.k as usize, "too many coordinates");
        let mut idx = 0u64;
        let mut pw = 1u64;
        for &c in coeffs {
            idx += (c % self.p) * pw;
            pw *= self.p;
        }
        FieldElement(idx as u32)
    }

    /// Coordinate vector of `a`, low degree first, length k.
    #[must_use]
    pub fn coeffs(&self, a: FieldElement) -> Vec<u64> {
        let mut x = a.0 as u64;
        (0..self.k)
            .map(|_| {
                let d = x % self.p;
                x /= self.p;
                d
            })
            .collect()
    }

    /// True when `a` lies in the prime subfield F_p (constant coordinates).
    #[must_use]
    pub fn in_prime_subfield(&self, a: FieldElement) -> bool {
        (a.0 as u64) < self.p
    }

    #[must_use]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.k == 1 {
            let s = a.0 as u64 + b.0 as u64;
            return FieldElement(if s >= self.p { (s - self.p) as u32 } else { s as u32 });
        }
        let mut x = a.0 as u64;
        let mut y = b.0 as u64;
        let mut pw = 1u64;
        let mut out = 0u64;
        for _ in 0..self.k {
            let s = (x % self.p + y % self.p) % self.p;
            out += s * pw;
            x /= self.p;
            y /= self.p;
            pw *= self.p;
        }
        FieldElement(out as u32)
    }

    #[must_use]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.index()])
    }

    #[must_use]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[must_use]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement(0);
        }
        let n = self.q as u32 - 1;
        let mut s = self.log[a.index()] + self.log[b.index()];
        if s >= n {
            s -= n;
        }
        FieldElement(self.exp[s as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let n = self.q as u32 - 1;
        let l = self.log[a.index()];
        let s = if l == 0 { 0 } else { n - l };
        Ok(FieldElement(self.exp[s as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^e with the convention a^0 = 1 (including a = 0).
    #[must_use]
    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement(1);
        }
        if a.0 == 0 {
            return FieldElement(0);
        }
        let n = self.q - 1;
        let s = (self.log[a.index()] as u64 * (e % n)) % n;
        FieldElement(self.exp[s as usize])
    }

    /// Tr(a) as a residue in 0..p.
    #[must_use]
    pub fn trace(&self, a: FieldElement) -> u64 {
        self.trace[a.index()] as u64
    }

    /// Canonical additive character chi(a) = exp(2 pi i Tr(a) / p).
    #[must_use]
    pub fn chi(&self, a: FieldElement) -> Complex64 {
        self.chi[a.index()]
    }

    /// Quadratic character: 0 at zero, +1 on nonzero squares, -1 otherwise.
    #[must_use]
    pub fn eta(&self, a: FieldElement) -> i8 {
        self.eta[a.index()]
    }

    /// Gauss sum of (eta, chi), computed term by term over the units.
    #[must_use]
    pub fn gauss_sum(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 1..self.q as usize {
            let e = self.eta[t] as f64;
            acc += e * self.chi[t];
        }
        acc
    }

    /// Closed form of the Gauss sum:
    /// (-1)^(k-1) sqrt(q) when p = 1 mod 4, and (-1)^(k-1) i^k sqrt(q)
    /// when p = 3 mod 4.
    #[must_use]
    pub fn gauss_sum_closed_form(&self) -> Complex64 {
        let root_q = (self.q as f64).sqrt();
        let sign = if self.k % 2 == 1 { 1.0 } else { -1.0 };
        if self.p % 4 == 1 {
            Complex64::new(sign * root_q, 0.0)
        } else {
            let i_pow_k = match self.k % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            sign * root_q * i_pow_k
        }
    }

    /// Renders an element: the residue itself for prime fields, otherwise
    /// the coordinate vector, low degree first.
    #[must_use]
    pub fn render(&self, a: FieldElement) -> String {
        if self.k == 1 {
            format!("{}", a.0)
        } else {
            let cs: Vec<String> = self.coeffs(a).iter().map(|c| c.to_string()).collect();
            format!("[{}]", cs.join(","))
        }
    }
}

/// Trial-division primality for the small orders this crate handles.
#[must_use]
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Factors n as p^k for prime p, if possible.
#[must_use]
pub fn prime_power_split(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut m = n;
            let mut k = 0;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            return (m == 1).then_some((p, k));
        }
        p += 1;
    }
    Some((n, 1))
}

// --- raw polynomial arithmetic over F_p, used only during construction ---

/// Coefficients low degree first; trailing zeros trimmed.
fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn encode(poly: &[u64], p: u64) -> u64 {
    let mut idx = 0;
    for &c in poly.iter().rev() {
        idx = idx * p + c;
    }
    idx
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// Remainder of a by a monic divisor b.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db && !(r.len() == 1 && r[0] == 0) {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for i in 0..db {
                let sub = (lead * b[i]) % p;
                let slot = &mut r[shift + i];
                *slot = (*slot + p - sub) % p;
            }
        }
        r.pop();
        r = trim(r);
        if r.len() <= db {
            break;
        }
    }
    trim(r)
}

fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    poly_rem(&poly_mul(a, b, p), modulus, p)
}

fn is_zero_poly(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

/// Irreducibility by trial division against every monic polynomial of
/// degree at most deg/2.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let mut c = vec![0u64; d];
        loop {
            let mut divisor = c.clone();
            divisor.push(1);
            if is_zero_poly(&poly_rem(poly, &divisor, p)) {
                return false;
            }
            // Odometer over coefficient vectors.
            let mut i = 0;
            loop {
                if i == d {
                    break;
                }
                c[i] += 1;
                if c[i] < p {
                    break;
                }
                c[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
    }
    true
}

/// Lexicographically smallest monic irreducible of degree k, comparing
/// coefficient vectors low degree first.
fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    let d = k as usize;
    let mut c = vec![0u64; d];
    loop {
        let mut candidate = c.clone();
        candidate.push(1);
        if is_irreducible(&candidate, p) {
            return candidate;
        }
        // Lexicographic successor: the highest-degree coordinate varies fastest.
        let mut i = d;
        loop {
            if i == 0 {
                unreachable!("no irreducible of degree {k} over F_{p}");
            }
            i -= 1;
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
        }
    }
}

fn factor_distinct_primes(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn poly_pow_mod(base: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, modulus, p);
        }
        b = poly_mul_mod(&b, &b, modulus, p);
        e >>= 1;
    }
    acc
}

/// First element (in canonical index order) of multiplicative order q - 1.
fn find_generator(p: u64, k: u32, q: u64, modulus: &[u64]) -> Vec<u64> {
    let factors = factor_distinct_primes(q - 1);
    'outer: for idx in 2..q {
        let mut digits = Vec::with_capacity(k as usize);
        let mut x = idx;
        for _ in 0..k {
            digits.push(x % p);
            x /= p;
        }
        let digits = trim(digits);
        for &f in &factors {
            let power = poly_pow_mod(&digits, (q - 1) / f, modulus, p);
            if power == vec![1] {
                continue 'outer;
            }
        }
        return digits;
    }
    unreachable!("the unit group of a finite field is cyclic");
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    #[test]
    fn construction_rejects_bad_shapes() {
        assert_eq!(construct_field(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(construct_field(1, 1).unwrap_err(), FieldError::NotPrime(1));
        assert_eq!(construct_field(2, 3).unwrap_err(), FieldError::EvenCharacteristic);
        assert_eq!(construct_field(3, 0).unwrap_err(), FieldError::BadExtensionDegree);
        assert!(matches!(
            construct_field(3, 9).unwrap_err(),
            FieldError::CapExceeded { order: 19683, .. }
        ));
        // 3^9 fits under a raised cap.
        assert_eq!(construct_field_with_cap(3, 9, 1 << 15).unwrap().q(), 19683);
    }

    #[test]
    fn moduli_are_the_expected_minima() {
        assert_eq!(construct_field(5, 1).unwrap().modulus(), &[0, 1]);
        // x^2 + 1 is irreducible over F_3 because -1 is not a square mod 3.
        assert_eq!(construct_field(3, 2).unwrap().modulus(), &[1, 0, 1]);
        // Over F_5, x^2 + 1 factors as (x-2)(x+2); x^2 + x + 1 is the minimum.
        assert_eq!(construct_field(5, 2).unwrap().modulus(), &[1, 1, 1]);
        // Over F_3, x^3 + 1 and x^3 + x^2 + 1 have roots; x^3 + 2x^2 + 1 does not.
        assert_eq!(construct_field(3, 3).unwrap().modulus(), &[1, 0, 2, 1]);
        // 11^2 = 121 is the largest order the verification sweeps use.
        assert_eq!(construct_field(11, 2).unwrap().q(), 121);
    }

    #[test]
    fn modulus_override_is_validated() {
        assert!(construct_field_with_modulus(3, 2, &[1, 0, 1]).is_ok());
        // x^2 + 2x + 1 = (x+1)^2 is reducible.
        assert!(matches!(
            construct_field_with_modulus(3, 2, &[1, 2, 1]).unwrap_err(),
            FieldError::BadModulus(_)
        ));
        assert!(construct_field_with_modulus(3, 2, &[1, 0, 2]).is_err());
    }

    #[test]
    fn field_axioms_hold_exhaustively() {
        for (p, k) in [(7, 1), (3, 2), (3, 3)] {
            let f = construct_field(p, k).unwrap();
            let els: Vec<FieldElement> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.zero()), a);
                assert_eq!(f.mul(a, f.one()), a);
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if a != f.zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_of_zero_fails() {
        let f = construct_field(7, 1).unwrap();
        assert_eq!(f.inv(f.zero()).unwrap_err(), FieldError::ZeroInverse);
    }

    #[test]
    fn frobenius_is_additive_over_f9() {
        // (a + b)^3 = a^3 + b^3 in characteristic 3.
        let f = construct_field(3, 2).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.pow(f.add(a, b), 3), f.add(f.pow(a, 3), f.pow(b, 3)));
            }
        }
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let f = construct_field(5, 2).unwrap();
        for a in f.elements() {
            let mut acc = f.one();
            for e in 0..10u64 {
                assert_eq!(f.pow(a, e), acc);
                acc = f.mul(acc, a);
            }
        }
    }

    #[test]
    fn coeff_round_trip_and_subfield() {
        let f = construct_field(3, 3).unwrap();
        for a in f.elements() {
            assert_eq!(f.from_coeffs(&f.coeffs(a)), a);
        }
        assert!(f.in_prime_subfield(f.from_int(2)));
        assert!(!f.in_prime_subfield(f.element(5).unwrap()));
        assert_eq!(f.from_int(-1), f.element(2).unwrap());
    }

    #[test]
    fn trace_is_linear_surjective_and_frobenius_invariant() {
        for (p, k) in [(5, 1), (3, 2), (5, 2), (3, 3)] {
            let f = construct_field(p, k).unwrap();
            let mut hit = vec![0usize; p as usize];
            for a in f.elements() {
                hit[f.trace(a) as usize] += 1;
                assert_eq!(f.trace(a), f.trace(f.pow(a, p)));
                for b in f.elements() {
                    let lhs = f.trace(f.add(a, b));
                    let rhs = (f.trace(a) + f.trace(b)) % p;
                    assert_eq!(lhs, rhs);
                }
            }
            // Each trace value is hit by exactly q/p elements.
            assert!(hit.iter().all(|&c| c == (f.q() / p) as usize));
            if k == 1 {
                for a in f.elements() {
                    assert_eq!(f.trace(a), a.index() as u64);
                }
            }
        }
    }

    #[test]
    fn chi_is_a_nontrivial_character() {
        for (p, k) in [(7, 1), (3, 2), (5, 2)] {
            let f = construct_field(p, k).unwrap();
            let mut total = Complex64::new(0.0, 0.0);
            let mut nontrivial = false;
            for a in f.elements() {
                total += f.chi(a);
                if (f.chi(a) - Complex64::new(1.0, 0.0)).norm() > TOL {
                    nontrivial = true;
                }
                for b in f.elements() {
                    let lhs = f.chi(f.add(a, b));
                    let rhs = f.chi(a) * f.chi(b);
                    assert!((lhs - rhs).norm() < TOL);
                }
            }
            assert!(total.norm() < TOL, "characters must sum to zero");
            assert!(nontrivial);
        }
    }

    #[test]
    fn eta_counts_squares_and_is_multiplicative() {
        for (p, k) in [(5, 1), (13, 1), (3, 2), (5, 2)] {
            let f = construct_field(p, k).unwrap();
            let q = f.q();
            let squares = f.elements().filter(|&a| f.eta(a) == 1).count() as u64;
            assert_eq!(squares, (q - 1) / 2);
            assert_eq!(f.eta(f.zero()), 0);
            for a in f.elements().skip(1) {
                assert_eq!(f.eta(f.mul(a, a)), 1);
                for b in f.elements().skip(1) {
                    assert_eq!(f.eta(f.mul(a, b)), f.eta(a) * f.eta(b));
                }
            }
            // eta(-1) is -1 exactly in the q = 3 mod 4 residue class.
            let expected = if q % 4 == 3 { -1 } else { 1 };
            assert_eq!(f.eta(f.from_int(-1)), expected);
        }
    }

    #[test]
    fn gauss_sum_direct_matches_closed_form_on_small_fields() {
        for (p, k) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3), (7, 2)] {
            let f = construct_field(p, k).unwrap();
            let direct = f.gauss_sum();
            let closed = f.gauss_sum_closed_form();
            assert!(
                (direct - closed).norm() < 1e-8,
                "q={}: direct={direct} closed={closed}",
                f.q()
            );
            // The square is eta(-1) * q on the nose.
            let sq = direct * direct;
            let expected = f.eta(f.from_int(-1)) as f64 * f.q() as f64;
            assert!((sq - Complex64::new(expected, 0.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn gauss_sum_f9_is_exactly_three() {
        let f = construct_field(3, 2).unwrap();
        assert!((f.gauss_sum() - Complex64::new(3.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn prime_power_split_recognizes_orders() {
        assert_eq!(prime_power_split(121), Some((11, 2)));
        assert_eq!(prime_power_split(27), Some((3, 3)));
        assert_eq!(prime_power_split(7), Some((7, 1)));
        assert_eq!(prime_power_split(12), None);
        assert_eq!(prime_power_split(1), None);
    }

    #[test]
    fn render_shows_residues_and_coordinates() {
        let f5 = construct_field(5, 1).unwrap();
        assert_eq!(f5.render(f5.from_int(3)), "3");
        let f9 = construct_field(3, 2).unwrap();
        assert_eq!(f9.render(f9.element(5).unwrap()), "[2,1]");
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn f25() -> Field {
        construct_field(5, 2).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms_hold_in_the_extension_field(
            a in 0usize..25, b in 0usize..25, c in 0usize..25,
        ) {
            let f = f25();
            let a = f.element(a).unwrap();
            let b = f.element(b).unwrap();
            let c = f.element(c).unwrap();
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
        }

        #[test]
        fn inverses_and_characters_are_homomorphic(a in 0usize..25, b in 0usize..25) {
            let f = f25();
            let a = f.element(a).unwrap();
            let b = f.element(b).unwrap();
            if a != f.zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
                if b != f.zero() {
                    prop_assert_eq!(f.eta(f.mul(a, b)), f.eta(a) * f.eta(b));
                }
            }
            let additive = (f.chi(f.add(a, b)) - f.chi(a) * f.chi(b)).norm();
            prop_assert!(additive < 1e-12, "chi broke additivity by {additive}");
            let traces = (f.trace(a) + f.trace(b)) % f.p();
            prop_assert_eq!(f.trace(f.add(a, b)), traces);
        }
    }
}
