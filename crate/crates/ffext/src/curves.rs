//! Bivariate polynomials over F_q and their zero sets in the plane.
//!
//! Polynomials are sparse maps from exponent pairs (i, j) to nonzero
//! coefficients, with total degree strictly below the characteristic p.
//! Keeping the degree under p makes the zero-set size bound deg * q
//! meaningful at every q and keeps restrictions of a polynomial to a line
//! nonzero as univariate polynomials of degree below q.
//!
//! Two independent routes decide whether a polynomial has a linear factor:
//!
//! * [`contains_line`] walks all q^2 + q affine lines and tests whether
//!   the polynomial vanishes at all q points of one of them. Because line
//!   restrictions have degree below q, vanishing everywhere on a line is
//!   equivalent to the corresponding linear form dividing the polynomial.
//! * [`linear_factor_by_division`] substitutes each of the q^2 + q
//!   normalized linear forms symbolically and checks for the zero
//!   remainder, never evaluating at a point.
//!
//! The two must agree; the check suites compare them on random inputs.

use crate::field::{Field, FieldElement};
use crate::fourier::{dot, plane_points, PlanePoint};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from polynomial construction, parsing, and variety operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("total degree {degree} must be less than the characteristic {characteristic}")]
    DegreeExceedsCharacteristic { degree: u64, characteristic: u64 },
    #[error("the zero polynomial has no variety")]
    ZeroPolynomial,
    #[error("operands belong to different fields")]
    FieldMismatch,
}

/// A nonzero bivariate polynomial with total degree below p.
#[derive(Clone)]
pub struct BivariatePoly {
    field: Field,
    /// Exponent pair (i, j) -> nonzero coefficient of x1^i x2^j.
    terms: BTreeMap<(u32, u32), FieldElement>,
}

impl std::fmt::Debug for BivariatePoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BivariatePoly({} over F_{})", self.to_text(), self.field.q())
    }
}

impl BivariatePoly {
    /// Builds a polynomial from terms, dropping zero coefficients and
    /// rejecting the zero polynomial and degrees reaching p.
    pub fn from_terms<I>(field: &Field, terms: I) -> Result<Self, CurveError>
    where
        I: IntoIterator<Item = ((u32, u32), FieldElement)>,
    {
        let mut map: BTreeMap<(u32, u32), FieldElement> = BTreeMap::new();
        for ((i, j), c) in terms {
            if c == field.zero() {
                continue;
            }
            let slot = map.entry((i, j)).or_insert_with(|| field.zero());
            *slot = field.add(*slot, c);
            if *slot == field.zero() {
                map.remove(&(i, j));
            }
        }
        if map.is_empty() {
            return Err(CurveError::ZeroPolynomial);
        }
        let degree = map.keys().map(|&(i, j)| (i + j) as u64).max().unwrap();
        if degree >= field.p() {
            return Err(CurveError::DegreeExceedsCharacteristic {
                degree,
                characteristic: field.p(),
            });
        }
        Ok(BivariatePoly { field: field.clone(), terms: map })
    }

    /// The distance polynomial x1^d + x2^d (with unit coefficients).
    pub fn norm_poly(field: &Field, d: u32) -> Result<Self, CurveError> {
        let one = field.one();
        BivariatePoly::from_terms(field, [((d, 0), one), ((0, d), one)])
    }

    #[must_use]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[must_use]
    pub fn terms(&self) -> &BTreeMap<(u32, u32), FieldElement> {
        &self.terms
    }

    #[must_use]
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    /// Recognizes the diagonal shape a1 x1^d + a2 x2^d with d >= 1 and
    /// both coefficients nonzero.
    #[must_use]
    pub fn diagonal_shape(&self) -> Option<(u32, FieldElement, FieldElement)> {
        if self.terms.len() != 2 {
            return None;
        }
        let mut it = self.terms.iter();
        let (&(i1, j1), &c1) = it.next().unwrap();
        let (&(i2, j2), &c2) = it.next().unwrap();
        // BTreeMap order puts (0, d) before (d, 0).
        if i1 == 0 && j2 == 0 && j1 == i2 && j1 >= 1 {
            Some((j1, c2, c1))
        } else {
            None
        }
    }

    #[must_use]
    pub fn eval(&self, x1: FieldElement, x2: FieldElement) -> FieldElement {
        let f = &self.field;
        let d = self.degree() as usize;
        let mut pow1 = Vec::with_capacity(d + 1);
        let mut pow2 = Vec::with_capacity(d + 1);
        let mut a = f.one();
        let mut b = f.one();
        for _ in 0..=d {
            pow1.push(a);
            pow2.push(b);
            a = f.mul(a, x1);
            b = f.mul(b, x2);
        }
        let mut acc = f.zero();
        for (&(i, j), &c) in &self.terms {
            acc = f.add(acc, f.mul(c, f.mul(pow1[i as usize], pow2[j as usize])));
        }
        acc
    }

    #[must_use]
    pub fn eval_point(&self, pt: PlanePoint) -> FieldElement {
        self.eval(pt.x1, pt.x2)
    }

    /// P - t, shifting the constant term.
    pub fn shift_constant(&self, t: FieldElement) -> Result<Self, CurveError> {
        let f = &self.field;
        let mut terms: Vec<((u32, u32), FieldElement)> =
            self.terms.iter().map(|(&k, &v)| (k, v)).collect();
        terms.push(((0, 0), f.neg(t)));
        BivariatePoly::from_terms(f, terms)
    }

    /// Canonical text form, parseable back by `parse_poly` whenever every
    /// coefficient lies in the prime subfield; other coefficients are
    /// rendered as `#index` markers.
    #[must_use]
    pub fn to_text(&self) -> String {
        let f = &self.field;
        let mut parts = Vec::new();
        // Highest total degree first, then higher x1 exponent first.
        let mut keys: Vec<(u32, u32)> = self.terms.keys().copied().collect();
        keys.sort_by_key(|&(i, j)| (std::cmp::Reverse(i + j), std::cmp::Reverse(i)));
        for (i, j) in keys {
            let c = self.terms[&(i, j)];
            let mut factors = Vec::new();
            let coeff_one = c == f.one();
            if !coeff_one || (i == 0 && j == 0) {
                if f.in_prime_subfield(c) {
                    factors.push(c.index().to_string());
                } else {
                    factors.push(format!("#{}", c.index()));
                }
            }
            for (var, e) in [("x1", i), ("x2", j)] {
                match e {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    _ => factors.push(format!("{var}^{e}")),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

// --- parser ---

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Int(u64),
    Var1,
    Var2,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    end: usize,
}

fn err(position: usize, message: impl Into<String>) -> CurveError {
    CurveError::Parse { position, message: message.into() }
}

impl Lexer {
    fn new(text: &str) -> Result<Self, CurveError> {
        let bytes = text.as_bytes();
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '+' => { tokens.push((i, Token::Plus)); i += 1; }
                '-' => { tokens.push((i, Token::Minus)); i += 1; }
                '*' => { tokens.push((i, Token::Star)); i += 1; }
                '^' => { tokens.push((i, Token::Caret)); i += 1; }
                '(' => { tokens.push((i, Token::LParen)); i += 1; }
                ')' => { tokens.push((i, Token::RParen)); i += 1; }
                '0'..='9' => {
                    let start = i;
                    let mut value: u64 = 0;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        value = value
                            .saturating_mul(10)
                            .saturating_add((bytes[i] - b'0') as u64);
                        i += 1;
                    }
                    tokens.push((start, Token::Int(value)));
                }
                'x' => {
                    let start = i;
                    if i + 1 < bytes.len() && (bytes[i + 1] == b'1' || bytes[i + 1] == b'2') {
                        // x1/x2 must not run into further digits ("x12").
                        if i + 2 < bytes.len() && bytes[i + 2].is_ascii_digit() {
                            return Err(err(start, "only the variables x1 and x2 exist"));
                        }
                        tokens.push((start, if bytes[i + 1] == b'1' { Token::Var1 } else { Token::Var2 }));
                        i += 2;
                    } else {
                        return Err(err(start, "only the variables x1 and x2 exist"));
                    }
                }
                other => return Err(err(i, format!("unexpected character {other:?}"))),
            }
        }
        Ok(Lexer { tokens, cursor: 0, end: text.len() })
    }

    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.cursor).map(|&(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |&(p, _)| p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.peek();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }
}

/// Sparse polynomial under construction: unvalidated terms (may be empty,
/// degree not yet checked). Validation happens once at the end so that
/// cancellations like `x1 - x1 + 1` do not trip intermediate checks.
type RawPoly = BTreeMap<(u32, u32), FieldElement>;

struct Parser<'a> {
    field: &'a Field,
    lexer: Lexer,
}

impl<'a> Parser<'a> {
    fn raw_add(&self, a: &mut RawPoly, key: (u32, u32), c: FieldElement) {
        let f = self.field;
        let slot = a.entry(key).or_insert_with(|| f.zero());
        *slot = f.add(*slot, c);
        if *slot == f.zero() {
            a.remove(&key);
        }
    }

    fn raw_mul(&self, a: &RawPoly, b: &RawPoly) -> RawPoly {
        let f = self.field;
        let mut out = RawPoly::new();
        for (&(i1, j1), &c1) in a {
            for (&(i2, j2), &c2) in b {
                self.raw_add(&mut out, (i1 + i2, j1 + j2), f.mul(c1, c2));
            }
        }
        out
    }

    fn raw_degree(a: &RawPoly) -> u64 {
        a.keys().map(|&(i, j)| (i + j) as u64).max().unwrap_or(0)
    }

    fn expr(&mut self) -> Result<RawPoly, CurveError> {
        let mut negate_first = false;
        if self.lexer.peek() == Some(Token::Minus) {
            self.lexer.bump();
            negate_first = true;
        }
        let mut acc = self.term()?;
        if negate_first {
            acc = self.negate(acc);
        }
        while let Some(t) = self.lexer.peek() {
            match t {
                Token::Plus | Token::Minus => {
                    self.lexer.bump();
                    let rhs = self.term()?;
                    let rhs = if t == Token::Minus { self.negate(rhs) } else { rhs };
                    for (k, c) in rhs {
                        self.raw_add(&mut acc, k, c);
                    }
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn negate(&self, a: RawPoly) -> RawPoly {
        a.into_iter().map(|(k, c)| (k, self.field.neg(c))).collect()
    }

    fn term(&mut self) -> Result<RawPoly, CurveError> {
        let mut acc = self.factor()?;
        while self.lexer.peek() == Some(Token::Star) {
            self.lexer.bump();
            let rhs = self.factor()?;
            acc = self.raw_mul(&acc, &rhs);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RawPoly, CurveError> {
        let base = self.atom()?;
        if self.lexer.peek() != Some(Token::Caret) {
            return Ok(base);
        }
        self.lexer.bump();
        let pos = self.lexer.pos();
        let e = match self.lexer.bump() {
            Some(Token::Int(e)) => e,
            _ => return Err(err(pos, "expected an integer exponent after ^")),
        };
        let base_degree = Self::raw_degree(&base);
        // A positive-degree base raised to e reaches degree base_degree * e;
        // refuse before expanding anything that already violates deg < p.
        if base_degree > 0 && base_degree.saturating_mul(e) >= self.field.p() {
            return Err(CurveError::DegreeExceedsCharacteristic {
                degree: base_degree.saturating_mul(e),
                characteristic: self.field.p(),
            });
        }
        if base.len() == 1 {
            // Single term: exponentiate directly.
            let (&(i, j), &c) = base.iter().next().unwrap();
            let mut out = RawPoly::new();
            let ie = i as u64 * e;
            let je = j as u64 * e;
            self.raw_add(&mut out, (ie as u32, je as u32), self.field.pow(c, e));
            return Ok(out);
        }
        let mut out = RawPoly::new();
        self.raw_add(&mut out, (0, 0), self.field.one());
        for _ in 0..e {
            out = self.raw_mul(&out, &base);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<RawPoly, CurveError> {
        let pos = self.lexer.pos();
        let mut out = RawPoly::new();
        match self.lexer.bump() {
            Some(Token::Int(n)) => {
                let value = self.field.from_int((n % self.field.p()) as i64);
                self.raw_add(&mut out, (0, 0), value);
            }
            Some(Token::Var1) => self.raw_add(&mut out, (1, 0), self.field.one()),
            Some(Token::Var2) => self.raw_add(&mut out, (0, 1), self.field.one()),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                let close = self.lexer.pos();
                if self.lexer.bump() != Some(Token::RParen) {
                    return Err(err(close, "expected a closing parenthesis"));
                }
                return Ok(inner);
            }
            Some(Token::Minus) => {
                // Unary minus directly before an atom, as in `2*-x1`… not
                // part of the grammar: signs belong to +/- chains.
                return Err(err(pos, "expected a number, x1, x2, or a parenthesized expression"));
            }
            _ => return Err(err(pos, "expected a number, x1, x2, or a parenthesized expression")),
        }
        Ok(out)
    }
}

/// Parses the grammar
///
/// ```text
/// expr   := ["-"] term (("+" | "-") term)*
/// term   := factor ("*" factor)*
/// factor := atom ["^" integer]
/// atom   := integer | "x1" | "x2" | "(" expr ")"
/// ```
///
/// over integer coefficients (reduced mod p). Errors carry the byte
/// position of the offending token.
pub fn parse_poly(field: &Field, text: &str) -> Result<BivariatePoly, CurveError> {
    let lexer = Lexer::new(text)?;
    let mut parser = Parser { field, lexer };
    let raw = parser.expr()?;
    if let Some(t) = parser.lexer.peek() {
        return Err(err(parser.lexer.pos(), format!("unexpected trailing {t:?}")));
    }
    BivariatePoly::from_terms(field, raw)
}

/// The zero set of a polynomial, with points in row-major order.
#[derive(Clone)]
pub struct Variety {
    poly: BivariatePoly,
    points: Vec<PlanePoint>,
    indices: Vec<u32>,
}

impl Variety {
    pub(crate) fn from_parts(poly: BivariatePoly, points: Vec<PlanePoint>) -> Self {
        let field = poly.field().clone();
        let indices = points
            .iter()
            .map(|&p| crate::fourier::plane_index(&field, p) as u32)
            .collect();
        Variety { poly, points, indices }
    }

    #[must_use]
    pub fn poly(&self) -> &BivariatePoly {
        &self.poly
    }

    #[must_use]
    pub fn field(&self) -> &Field {
        self.poly.field()
    }

    #[must_use]
    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    /// Row-major plane indices of the points, sorted ascending.
    #[must_use]
    pub fn plane_indices(&self) -> &[u32] {
        &self.indices
    }

    #[must_use]
    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    /// |V| / q, the size of the variety on the scale of a curve.
    #[must_use]
    pub fn size_ratio(&self) -> f64 {
        self.cardinality() as f64 / self.field().q() as f64
    }

    /// |V| / (deg * q): at most 1 by the degree bound on root counts.
    #[must_use]
    pub fn schwartz_zippel_margin(&self) -> f64 {
        self.cardinality() as f64 / (self.poly.degree() as f64 * self.field().q() as f64)
    }

    /// JSON form with the polynomial text, the order, the points as
    /// index pairs, and the line diagnosis.
    #[must_use]
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "poly": self.poly.to_text(),
            "q": self.field().q(),
            "cardinality": self.cardinality(),
            "points": self.points.iter().map(|p| [p.x1.index(), p.x2.index()]).collect::<Vec<_>>(),
            "contains_line": contains_line(&self.poly).map(|w| w.to_json()),
        })
    }
}

/// Enumerates the zero set by evaluating at all q^2 points.
#[must_use]
pub fn variety_of(poly: &BivariatePoly) -> Variety {
    let field = poly.field().clone();
    let zero = field.zero();
    let points: Vec<PlanePoint> = plane_points(&field)
        .filter(|&pt| poly.eval_point(pt) == zero)
        .collect();
    Variety::from_parts(poly.clone(), points)
}

/// An affine line, named by its defining equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineWitness {
    /// x2 = a x1 + b.
    Slope { a: FieldElement, b: FieldElement },
    /// x1 = c.
    Vertical { c: FieldElement },
}

impl LineWitness {
    /// The q points of the line.
    #[must_use]
    pub fn points(&self, field: &Field) -> Vec<PlanePoint> {
        match *self {
            LineWitness::Slope { a, b } => field
                .elements()
                .map(|t| PlanePoint::new(t, field.add(field.mul(a, t), b)))
                .collect(),
            LineWitness::Vertical { c } => {
                field.elements().map(|t| PlanePoint::new(c, t)).collect()
            }
        }
    }

    #[must_use]
    pub fn to_json(&self) -> serde_json::Value {
        match *self {
            LineWitness::Slope { a, b } => {
                serde_json::json!({"kind": "slope", "a": a.index(), "b": b.index()})
            }
            LineWitness::Vertical { c } => {
                serde_json::json!({"kind": "vertical", "c": c.index()})
            }
        }
    }
}

/// All q^2 + q affine lines: slope lines ordered by (a, b), then vertical
/// lines by c.
pub fn all_lines(field: &Field) -> impl Iterator<Item = LineWitness> + '_ {
    let slopes = field
        .elements()
        .flat_map(move |a| field.elements().map(move |b| LineWitness::Slope { a, b }));
    let verticals = field.elements().map(|c| LineWitness::Vertical { c });
    slopes.chain(verticals)
}

/// Finds a line on which the polynomial vanishes identically, if any.
///
/// The restriction of P to a line is a univariate polynomial of degree at
/// most deg(P) < q, so vanishing at all q points of the line forces the
/// restriction to be the zero polynomial, i.e. the line's linear form
/// divides P. The first witness in `all_lines` order is returned.
#[must_use]
pub fn contains_line(poly: &BivariatePoly) -> Option<LineWitness> {
    let field = poly.field();
    let zero = field.zero();
    all_lines(field).find(|line| line.points(field).iter().all(|&pt| poly.eval_point(pt) == zero))
}

/// Decides whether P has a linear factor by symbolic substitution: for
/// each normalized linear form, substituting its zero locus into P must
/// collapse every coefficient. This shares no code with `contains_line`
/// and never evaluates P at a plane point.
#[must_use]
pub fn linear_factor_by_division(poly: &BivariatePoly) -> Option<LineWitness> {
    let field = poly.field();
    all_lines(field).find(|&line| line_divides(poly, line))
}

/// Decides whether the line's linear form divides P, by symbolic
/// substitution of the line's parametrization into P. No plane point is
/// ever evaluated, so the answer is exact even when deg(P) >= q.
#[must_use]
pub fn line_divides(poly: &BivariatePoly, line: LineWitness) -> bool {
    let field = poly.field();
    match line {
        // x2 - (a x1 + b) divides P iff P(x1, a x1 + b) = 0 symbolically.
        LineWitness::Slope { a, b } => univariate_substitution_slope(poly, a, b)
            .iter()
            .all(|&c| c == field.zero()),
        // x1 - c divides P iff P(c, x2) = 0 symbolically.
        LineWitness::Vertical { c } => univariate_substitution_vertical(poly, c)
            .iter()
            .all(|&cf| cf == field.zero()),
    }
}

/// Finds a line whose linear form divides both polynomials, if any.
///
/// A common linear factor is a shared component of the two curves, so a
/// hit certifies that the degree-product intersection bound does not
/// apply to the pair. Random sparse pairs over small fields share a line
/// with non-negligible probability; higher-degree common factors require
/// coefficient-support alignment and are vastly rarer.
#[must_use]
pub fn shared_line(a: &BivariatePoly, b: &BivariatePoly) -> Option<LineWitness> {
    let field = a.field();
    all_lines(field).find(|&line| line_divides(a, line) && line_divides(b, line))
}

/// Coefficients of P(x1, a x1 + b) as a univariate polynomial in x1.
fn univariate_substitution_slope(poly: &BivariatePoly, a: FieldElement, b: FieldElement) -> Vec<FieldElement> {
    let f = poly.field();
    let deg = poly.degree() as usize;
    let mut out = vec![f.zero(); 2 * deg + 1];
    // (a x + b)^j expanded once per needed j, by repeated multiplication.
    let mut lin_pows: Vec<Vec<FieldElement>> = vec![vec![f.one()]];
    for j in 1..=deg {
        let prev = &lin_pows[j - 1];
        let mut next = vec![f.zero(); prev.len() + 1];
        for (idx, &c) in prev.iter().enumerate() {
            next[idx] = f.add(next[idx], f.mul(c, b));
            next[idx + 1] = f.add(next[idx + 1], f.mul(c, a));
        }
        lin_pows.push(next);
    }
    for (&(i, j), &c) in poly.terms() {
        for (idx, &lc) in lin_pows[j as usize].iter().enumerate() {
            let slot = i as usize + idx;
            out[slot] = f.add(out[slot], f.mul(c, lc));
        }
    }
    out
}

/// Coefficients of P(c, x2) as a univariate polynomial in x2.
fn univariate_substitution_vertical(poly: &BivariatePoly, c: FieldElement) -> Vec<FieldElement> {
    let f = poly.field();
    let deg = poly.degree() as usize;
    let mut out = vec![f.zero(); deg + 1];
    for (&(i, j), &coeff) in poly.terms() {
        let v = f.mul(coeff, f.pow(c, i as u64));
        out[j as usize] = f.add(out[j as usize], v);
    }
    out
}

/// Intersection data for two varieties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionReport {
    pub count: usize,
    /// Product of the degrees.
    pub bezout_bound: u64,
    /// Set when the count exceeds the degree product, which for curves
    /// with no common component cannot happen; the flag is inferred from
    /// the count, not from factoring.
    pub shared_component_suspected: bool,
}

/// Counts common points of two varieties over the same field.
pub fn intersect_count(a: &Variety, b: &Variety) -> Result<IntersectionReport, CurveError> {
    if a.field().as_ref() != b.field().as_ref() {
        return Err(CurveError::FieldMismatch);
    }
    let (mut i, mut j) = (0, 0);
    let (ia, ib) = (a.plane_indices(), b.plane_indices());
    let mut count = 0;
    while i < ia.len() && j < ib.len() {
        match ia[i].cmp(&ib[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let bezout_bound = a.poly().degree() as u64 * b.poly().degree() as u64;
    Ok(IntersectionReport {
        count,
        bezout_bound,
        shared_component_suspected: count as u64 > bezout_bound,
    })
}

/// The character sum sum_{x in V} chi(x.m).
#[must_use]
pub fn variety_character_sum(v: &Variety, m: PlanePoint) -> Complex64 {
    let field = v.field();
    let mut acc = Complex64::new(0.0, 0.0);
    for &x in v.points() {
        acc += field.chi(dot(field, x, m));
    }
    acc
}

/// Maximum of |sum_{x in V} chi(x.m)| / sqrt(q) over m != 0, with the
/// frequency achieving it. For a line-free variety this ratio stays
/// bounded by a modest constant.
#[must_use]
pub fn katz_max_ratio(v: &Variety) -> (f64, PlanePoint) {
    let field = v.field();
    let root_q = (field.q() as f64).sqrt();
    let mut best = (-1.0, PlanePoint::new(field.zero(), field.zero()));
    for m in plane_points(field) {
        if m.x1 == field.zero() && m.x2 == field.zero() {
            continue;
        }
        let r = variety_character_sum(v, m).norm() / root_q;
        if r > best.0 {
            best = (r, m);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::construct_field;

    fn poly(field: &Field, text: &str) -> BivariatePoly {
        parse_poly(field, text).unwrap()
    }

    #[test]
    fn parser_builds_expected_terms() {
        let f = construct_field(5, 1).unwrap();
        let p = poly(&f, "x1^2 + x2^2 - 1");
        let want: Vec<((u32, u32), usize)> = vec![((0, 0), 4), ((0, 2), 1), ((2, 0), 1)];
        let got: Vec<((u32, u32), usize)> =
            p.terms().iter().map(|(&k, &c)| (k, c.index())).collect();
        assert_eq!(got, want);
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn parser_expands_products_powers_and_parentheses() {
        let f = construct_field(7, 1).unwrap();
        let a = poly(&f, "(x1 + x2)^2");
        let b = poly(&f, "x1^2 + 2*x1*x2 + x2^2");
        assert_eq!(a.terms(), b.terms());
        let c = poly(&f, "3*(x1 - 2)*(x2 + 1)");
        let d = poly(&f, "3*x1*x2 + 3*x1 - 6*x2 - 6");
        assert_eq!(c.terms(), d.terms());
        // Leading unary minus.
        let e = poly(&f, "-x1 + x2");
        assert_eq!(e.terms().get(&(1, 0)), Some(&f.from_int(-1)));
    }

    #[test]
    fn parser_reduces_huge_coefficients_mod_p() {
        let f = construct_field(13, 1).unwrap();
        let p = poly(&f, "100000000000000003*x1 + 27");
        // 10^17 = 4 mod 13 (the powers of ten cycle with period six), so
        // the x1 coefficient is 4 + 3 = 7; 27 = 1 mod 13.
        assert_eq!(p.terms().get(&(1, 0)), Some(&f.from_int(7)));
        assert_eq!(p.terms().get(&(0, 0)), Some(&f.from_int(1)));
    }

    #[test]
    fn parser_rejects_with_positions() {
        let f = construct_field(5, 1).unwrap();
        match parse_poly(&f, "x1 + y") {
            Err(CurveError::Parse { position, .. }) => assert_eq!(position, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_poly(&f, "x1 ^") {
            Err(CurveError::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_poly(&f, "(x1 + x2") {
            Err(CurveError::Parse { position, .. }) => assert_eq!(position, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_poly(&f, "x1 x2") {
            Err(CurveError::Parse { position, .. }) => assert_eq!(position, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_poly(&f, "x3"), Err(CurveError::Parse { .. })));
    }

    #[test]
    fn degree_and_zero_guards_fire() {
        let f = construct_field(5, 1).unwrap();
        assert_eq!(
            parse_poly(&f, "x1^6").unwrap_err(),
            CurveError::DegreeExceedsCharacteristic { degree: 6, characteristic: 5 }
        );
        // Degree equal to p is also out: deg < p is strict.
        assert!(matches!(
            parse_poly(&f, "x1^5"),
            Err(CurveError::DegreeExceedsCharacteristic { degree: 5, .. })
        ));
        assert_eq!(parse_poly(&f, "0").unwrap_err(), CurveError::ZeroPolynomial);
        assert_eq!(parse_poly(&f, "5*x1").unwrap_err(), CurveError::ZeroPolynomial);
        assert_eq!(parse_poly(&f, "x1 - x1").unwrap_err(), CurveError::ZeroPolynomial);
        // Cancellation of the high-degree part is fine.
        assert_eq!(parse_poly(&f, "x1^4 - x1^4 + x2").unwrap().degree(), 1);
        // A huge exponent on a constant base is legal.
        assert!(parse_poly(&f, "2^1000 + x1").is_ok());
    }

    #[test]
    fn eval_matches_hand_computation() {
        let f = construct_field(13, 1).unwrap();
        let p = poly(&f, "x1^2 + 3*x1*x2 - x2 + 7");
        // At (2, 5): 4 + 30 - 5 + 7 = 36 = 10 mod 13.
        assert_eq!(p.eval(f.from_int(2), f.from_int(5)), f.from_int(10));
    }

    #[test]
    fn f5_circle_has_exactly_the_four_axis_points() {
        let f = construct_field(5, 1).unwrap();
        let v = variety_of(&poly(&f, "x1^2 + x2^2 - 1"));
        let got: Vec<(usize, usize)> = v
            .points()
            .iter()
            .map(|p| (p.x1.index(), p.x2.index()))
            .collect();
        assert_eq!(got, vec![(0, 1), (0, 4), (1, 0), (4, 0)]);
        assert_eq!(v.cardinality(), 4); // q - 1 since 5 = 1 mod 4
        assert!(v.schwartz_zippel_margin() <= 1.0);
    }

    #[test]
    fn circle_sizes_follow_the_residue_class() {
        // |{x1^2 + x2^2 = 1}| = q - eta(-1): q - 1 when q = 1 mod 4, else q + 1.
        for (p, k) in [(5, 1), (13, 1), (3, 2), (7, 1), (11, 1), (3, 3)] {
            let f = construct_field(p, k).unwrap();
            let v = variety_of(&poly(&f, "x1^2 + x2^2 - 1"));
            let expected = if f.q() % 4 == 1 { f.q() - 1 } else { f.q() + 1 };
            assert_eq!(v.cardinality() as u64, expected, "q={}", f.q());
        }
    }

    #[test]
    fn parabola_has_q_points() {
        for q in [5u64, 7, 11] {
            let f = construct_field(q, 1).unwrap();
            let v = variety_of(&poly(&f, "x2 - x1^2"));
            assert_eq!(v.cardinality() as u64, q);
        }
    }

    #[test]
    fn line_detection_finds_the_axes_of_a_hyperbola() {
        let f = construct_field(7, 1).unwrap();
        let p = poly(&f, "x1*x2");
        // First witness in scan order: slope line (a, b) = (0, 0), i.e. x2 = 0.
        assert_eq!(
            contains_line(&p),
            Some(LineWitness::Slope { a: f.zero(), b: f.zero() })
        );
        let sq = poly(&f, "(x1 + x2)^2");
        assert_eq!(
            contains_line(&sq),
            Some(LineWitness::Slope { a: f.from_int(-1), b: f.zero() })
        );
        // x1*(x1 - 1) vanishes on no slope line, so the scan reaches the
        // vertical family and stops at x1 = 0.
        let vertical = poly(&f, "x1^2 - x1");
        assert_eq!(contains_line(&vertical), Some(LineWitness::Vertical { c: f.zero() }));
        assert_eq!(contains_line(&poly(&f, "x1^2 + x2^2 - 1")), None);
    }

    #[test]
    fn the_two_line_detectors_agree_on_fixtures() {
        let f = construct_field(11, 1).unwrap();
        for text in [
            "x1*x2",
            "x1*x2 - 1",
            "x1^2 + x2^2 - 1",
            "x2 - x1^2",
            "(x1 - 3)*(x2 + 2)",
            "x1^3 - x2^3",
            "x1^4 + x2^4 - 1",
            "x1^2 + x2^2",
        ] {
            let p = poly(&f, text);
            assert_eq!(
                contains_line(&p).is_some(),
                linear_factor_by_division(&p).is_some(),
                "disagreement on {text}"
            );
        }
    }

    #[test]
    fn shared_line_certifies_a_common_linear_factor() {
        let f = construct_field(5, 1).unwrap();
        // x1 divides both products.
        let a = poly(&f, "x1*x2");
        let b = poly(&f, "x1*(x1 + x2 - 2)");
        assert_eq!(shared_line(&a, &b), Some(LineWitness::Vertical { c: f.zero() }));
        // (x2 - 1) divides the cubic: its restriction to x2 = 1 is
        // x1 + 1 + 4 x1 + 4 + 3 + 2 = 5 x1 + 10 = 0 in F_5.
        let p = poly(&f, "x1*x2^2 + x2^3 + 4*x1*x2 + 4*x2^2 + 3*x2 + 2");
        let q = poly(&f, "3*x2 + 2");
        let shared = shared_line(&p, &q).expect("the line x2 = 1 is a factor of both");
        assert_eq!(shared, LineWitness::Slope { a: f.zero(), b: f.one() });
        assert!(line_divides(&p, shared) && line_divides(&q, shared));
        // A circle and a parabola carry no line at all.
        let circle = poly(&f, "x1^2 + x2^2 - 1");
        let parabola = poly(&f, "x2 - x1^2");
        assert_eq!(shared_line(&circle, &parabola), None);
        // Both contain lines, but no common one.
        let c = poly(&f, "x1*x2");
        let d = poly(&f, "(x1 - 1)*(x2 - 1)");
        assert!(contains_line(&c).is_some() && contains_line(&d).is_some());
        assert_eq!(shared_line(&c, &d), None);
    }

    #[test]
    fn unit_circles_at_adjacent_centers_meet_twice_over_f13() {
        let f = construct_field(13, 1).unwrap();
        let a = variety_of(&poly(&f, "x1^2 + x2^2 - 1"));
        let b = variety_of(&poly(&f, "(x1 - 1)^2 + x2^2 - 1"));
        let report = intersect_count(&a, &b).unwrap();
        assert_eq!(report.count, 2);
        assert_eq!(report.bezout_bound, 4);
        assert!(!report.shared_component_suspected);
        // The two common points: x1 = 1/2 = 7, x2 = ±2.
        let common: Vec<PlanePoint> = a
            .points()
            .iter()
            .copied()
            .filter(|p| b.plane_indices().binary_search(&(crate::fourier::plane_index(&f, *p) as u32)).is_ok())
            .collect();
        let coords: Vec<(usize, usize)> =
            common.iter().map(|p| (p.x1.index(), p.x2.index())).collect();
        assert_eq!(coords, vec![(7, 2), (7, 11)]);
    }

    #[test]
    fn shared_component_is_flagged() {
        let f = construct_field(7, 1).unwrap();
        // Same zero set on both sides: x1*x2 and 2*x1*x2 share both lines.
        let a = variety_of(&poly(&f, "x1*x2"));
        let b = variety_of(&poly(&f, "2*x1*x2"));
        let report = intersect_count(&a, &b).unwrap();
        assert_eq!(report.count, 13); // 2q - 1
        assert!(report.shared_component_suspected);
    }

    #[test]
    fn parabola_character_sums_have_gauss_modulus() {
        // For the parabola and m with m2 != 0 the sum collapses to a Gauss
        // sum in disguise, so its modulus is exactly sqrt(q).
        let f = construct_field(11, 1).unwrap();
        let v = variety_of(&poly(&f, "x2 - x1^2"));
        let root_q = (f.q() as f64).sqrt();
        for m2 in f.elements().skip(1) {
            for m1 in f.elements() {
                let s = variety_character_sum(&v, PlanePoint::new(m1, m2));
                assert!((s.norm() - root_q).abs() < 1e-9);
            }
        }
        let (ratio, _) = katz_max_ratio(&v);
        // m = (m1, 0) with m1 != 0 gives sum_t chi(t m1) = 0, so the max
        // ratio over m != 0 is exactly 1.
        assert!((ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_shape_is_recognized() {
        let f = construct_field(7, 1).unwrap();
        let p = poly(&f, "x1^2 + x2^2");
        assert_eq!(p.diagonal_shape(), Some((2, f.one(), f.one())));
        let p = poly(&f, "3*x1^4 + 5*x2^4");
        assert_eq!(p.diagonal_shape(), Some((4, f.from_int(3), f.from_int(5))));
        assert_eq!(poly(&f, "x1^2 + x2^3").diagonal_shape(), None);
        assert_eq!(poly(&f, "x1^2 + x2^2 - 1").diagonal_shape(), None);
        assert_eq!(poly(&f, "x1*x2").diagonal_shape(), None);
    }

    #[test]
    fn text_rendering_round_trips_through_the_parser() {
        let f = construct_field(7, 1).unwrap();
        for text in ["x1^2 + x2^2 - 1", "x1*x2", "(x1 + x2)^3 - 5", "x2 - x1^2"] {
            let p = poly(&f, text);
            let again = poly(&f, &p.to_text());
            assert_eq!(p.terms(), again.terms(), "render of {text}: {}", p.to_text());
        }
    }

    #[test]
    fn shift_constant_matches_manual_subtraction() {
        let f = construct_field(5, 1).unwrap();
        let p = poly(&f, "x1^2 + x2^2");
        let shifted = p.shift_constant(f.from_int(1)).unwrap();
        assert_eq!(shifted.terms(), poly(&f, "x1^2 + x2^2 - 1").terms());
    }
}
