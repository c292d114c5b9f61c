//! Numerical lower bounds on the extension operator norm.
//!
//! The quantity of interest is the best constant in
//! ‖(f dσ)^∨‖_{L^r(dm)} ≤ C·‖f‖_{L^p(V,dσ)}, i.e. the supremum of the
//! ratio over nonzero f on V. The supremum is a nonconvex
//! maximization over C^{|V|}; this module attacks it with projected
//! gradient ascent on the unit L^p(dσ) sphere from many deterministic
//! starting points:
//!
//! * the constant function (whose (·→4) ratio is known exactly through
//!   the additive energy),
//! * point masses (closed-form ratio),
//! * indicators of line ∩ V subsets — the blow-up witnesses when V
//!   contains a line,
//! * seeded random functions, half complex and half nonnegative.
//!
//! Every structured start runs both as an unconstrained complex ascent
//! and as a nonnegative-projected ascent. For small fields an exhaustive
//! sweep over {−1, 0, 1}-valued f provides an independent floor that the
//! ascent must reach. All starts run in parallel; the winner is chosen
//! by ratio with start order as the deterministic tie-break, so results
//! are reproducible bit-for-bit for a fixed seed.

use crate::curves::all_lines;
use crate::extension::SurfaceMeasure;
use crate::field::Field;
use crate::fourier::{dot, plane_index, plane_point, LpExponent, PlanePoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashSet;

/// Tuning knobs for [`estimate_rstar`]. `new` supplies the defaults;
/// the caps bound the number of structured starts so large varieties
/// stay tractable (every point mass and every secant subset would be
/// thousands of ascents at q ≈ 100).
#[derive(Debug, Clone)]
pub struct RstarOptions {
    pub p: LpExponent,
    pub r: LpExponent,
    /// Number of seeded random starts.
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Stop when an accepted step improves the ratio by less than this.
    pub convergence: f64,
    /// Evenly spaced point-mass starts, at most this many.
    pub max_point_mass_starts: usize,
    /// Largest line ∩ V subsets, at most this many.
    pub max_line_subset_starts: usize,
    /// Run the exhaustive {−1,0,1} sweep when q is at most this …
    pub exhaustive_max_order: u64,
    /// … and |V| is at most this (the sweep costs 3^|V| evaluations).
    pub exhaustive_max_support: usize,
}

impl RstarOptions {
    #[must_use]
    pub fn new(p: LpExponent, r: LpExponent) -> Self {
        RstarOptions {
            p,
            r,
            restarts: 32,
            seed: 42,
            max_iters: 200,
            initial_step: 0.5,
            min_step: 1e-7,
            convergence: 1e-8,
            max_point_mass_starts: 8,
            max_line_subset_starts: 8,
            exhaustive_max_order: 5,
            exhaustive_max_support: 9,
        }
    }
}

/// Outcome of the multi-start search.
#[derive(Debug, Clone)]
pub struct RstarEstimate {
    /// Best ratio over all ascent starts — a lower bound on the
    /// operator norm.
    pub ratio: f64,
    /// The maximizer, normalized to unit L^p(dσ) norm, ordered like the
    /// variety's points.
    pub witness: Vec<Complex64>,
    /// Which start won, e.g. "constant/complex" or "random(3)/nonneg".
    pub winning_start: String,
    /// Best ratio over the nonnegative-projected starts only.
    pub best_nonnegative: f64,
    pub nonnegative_witness: Vec<Complex64>,
    /// Best ratio over all {−1,0,1}-valued f, when the sweep ran — an
    /// optimizer-independent floor for `ratio`.
    pub exhaustive_floor: Option<f64>,
    pub starts_run: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Complex,
    Nonnegative,
}

impl Mode {
    fn label(self) -> &'static str {
        match self {
            Mode::Complex => "complex",
            Mode::Nonnegative => "nonneg",
        }
    }
}

#[derive(Clone)]
enum StartKind {
    Constant,
    PointMass(usize),
    LineSubset(Vec<usize>),
    Random(u64),
}

impl StartKind {
    fn label(&self) -> String {
        match self {
            StartKind::Constant => "constant".into(),
            StartKind::PointMass(j) => format!("point-mass({j})"),
            StartKind::LineSubset(s) => format!("line-subset({} pts)", s.len()),
            StartKind::Random(i) => format!("random({i})"),
        }
    }
}

/// Dense |V| → q² extension kernel with a cached phase matrix
/// (row m holds χ(m·x_j) for every variety point) when it fits.
struct ExtendKernel {
    field: Field,
    points: Vec<PlanePoint>,
    inv_card: f64,
    phases: Option<Vec<Complex64>>,
}

const PHASE_CACHE_MAX_ENTRIES: usize = 4_000_000;

impl ExtendKernel {
    fn new(sigma: &SurfaceMeasure) -> Self {
        let field = sigma.field().clone();
        let points = sigma.variety().points().to_vec();
        let q2 = (field.q() * field.q()) as usize;
        let card = points.len();
        let phases = (q2 * card <= PHASE_CACHE_MAX_ENTRIES).then(|| {
            let mut table = Vec::with_capacity(q2 * card);
            for idx in 0..q2 {
                let m = plane_point(&field, idx);
                for &x in &points {
                    table.push(field.chi(dot(&field, m, x)));
                }
            }
            table
        });
        ExtendKernel { field, points, inv_card: 1.0 / card as f64, phases }
    }

    fn card(&self) -> usize {
        self.points.len()
    }

    fn output_len(&self) -> usize {
        (self.field.q() * self.field.q()) as usize
    }

    /// g(m) = |V|⁻¹ Σ_j χ(m·x_j) f_j for every m.
    fn apply(&self, f: &[Complex64], out: &mut [Complex64]) {
        let card = self.card();
        match &self.phases {
            Some(table) => {
                for (idx, slot) in out.iter_mut().enumerate() {
                    let row = &table[idx * card..(idx + 1) * card];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (ph, fv) in row.iter().zip(f) {
                        acc += ph * fv;
                    }
                    *slot = acc * self.inv_card;
                }
            }
            None => {
                for (idx, slot) in out.iter_mut().enumerate() {
                    let m = plane_point(&self.field, idx);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (&x, fv) in self.points.iter().zip(f) {
                        acc += self.field.chi(dot(&self.field, m, x)) * fv;
                    }
                    *slot = acc * self.inv_card;
                }
            }
        }
    }

    /// d_j = Σ_m conj(χ(m·x_j))·w(m); zero weights are skipped.
    fn adjoint(&self, w: &[Complex64], out: &mut [Complex64]) {
        let card = self.card();
        out.fill(Complex64::new(0.0, 0.0));
        match &self.phases {
            Some(table) => {
                for (idx, wv) in w.iter().enumerate() {
                    if wv.re == 0.0 && wv.im == 0.0 {
                        continue;
                    }
                    let row = &table[idx * card..(idx + 1) * card];
                    for (slot, ph) in out.iter_mut().zip(row) {
                        *slot += ph.conj() * wv;
                    }
                }
            }
            None => {
                for (idx, wv) in w.iter().enumerate() {
                    if wv.re == 0.0 && wv.im == 0.0 {
                        continue;
                    }
                    let m = plane_point(&self.field, idx);
                    for (slot, &x) in out.iter_mut().zip(&self.points) {
                        *slot += self.field.chi(dot(&self.field, m, x)).conj() * wv;
                    }
                }
            }
        }
    }
}

fn surface_norm(f: &[Complex64], p: LpExponent) -> f64 {
    match p {
        LpExponent::Infinity => f.iter().map(|v| v.norm()).fold(0.0, f64::max),
        LpExponent::Finite(p) => {
            (f.iter().map(|v| v.norm().powf(p)).sum::<f64>() / f.len() as f64).powf(1.0 / p)
        }
    }
}

fn output_norm(g: &[Complex64], r: LpExponent) -> f64 {
    match r {
        LpExponent::Infinity => g.iter().map(|v| v.norm()).fold(0.0, f64::max),
        LpExponent::Finite(r) => g.iter().map(|v| v.norm().powf(r)).sum::<f64>().powf(1.0 / r),
    }
}

fn project(f: &mut [Complex64], mode: Mode) {
    if mode == Mode::Nonnegative {
        for v in f.iter_mut() {
            *v = Complex64::new(v.re.max(0.0), 0.0);
        }
    }
}

/// Projects, then scales to unit L^p(dσ) norm; false when the
/// projection annihilated f.
fn project_and_normalize(f: &mut [Complex64], p: LpExponent, mode: Mode) -> bool {
    project(f, mode);
    let n = surface_norm(f, p);
    if n <= 0.0 || !n.is_finite() {
        return false;
    }
    for v in f.iter_mut() {
        *v /= n;
    }
    true
}

/// The steepest-ascent weight for ∂‖g‖_r^r: |g|^{r−2}·g for finite r,
/// a phase-aligned point mass at the largest entry for r = ∞.
fn ascent_weights(g: &[Complex64], r: LpExponent, w: &mut [Complex64]) {
    match r {
        LpExponent::Finite(r) => {
            for (slot, gv) in w.iter_mut().zip(g) {
                let n = gv.norm();
                *slot = if n == 0.0 { Complex64::new(0.0, 0.0) } else { gv * n.powf(r - 2.0) };
            }
        }
        LpExponent::Infinity => {
            w.fill(Complex64::new(0.0, 0.0));
            let mut best = (0.0f64, 0usize);
            for (idx, gv) in g.iter().enumerate() {
                let n = gv.norm();
                if n > best.0 {
                    best = (n, idx);
                }
            }
            if best.0 > 0.0 {
                w[best.1] = g[best.1] / best.0;
            }
        }
    }
}

struct StartOutcome {
    ratio: f64,
    witness: Vec<Complex64>,
    mode: Mode,
    label: String,
}

fn run_ascent(
    kernel: &ExtendKernel,
    start: &[Complex64],
    mode: Mode,
    opts: &RstarOptions,
) -> Option<(f64, Vec<Complex64>)> {
    let mut f = start.to_vec();
    if !project_and_normalize(&mut f, opts.p, mode) {
        return None;
    }
    let mut g = vec![Complex64::new(0.0, 0.0); kernel.output_len()];
    let mut g_cand = vec![Complex64::new(0.0, 0.0); kernel.output_len()];
    let mut w = vec![Complex64::new(0.0, 0.0); kernel.output_len()];
    let mut d = vec![Complex64::new(0.0, 0.0); kernel.card()];
    kernel.apply(&f, &mut g);
    let mut ratio = output_norm(&g, opts.r);

    for _ in 0..opts.max_iters {
        ascent_weights(&g, opts.r, &mut w);
        kernel.adjoint(&w, &mut d);
        let dn = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if dn == 0.0 || !dn.is_finite() {
            break;
        }
        for v in d.iter_mut() {
            *v /= dn;
        }
        let mut step = opts.initial_step;
        let mut accepted = None;
        while step >= opts.min_step {
            let mut cand: Vec<Complex64> =
                f.iter().zip(&d).map(|(fv, dv)| fv + dv * step).collect();
            if project_and_normalize(&mut cand, opts.p, mode) {
                kernel.apply(&cand, &mut g_cand);
                let cr = output_norm(&g_cand, opts.r);
                if cr > ratio {
                    accepted = Some((cr, cand));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((cr, cand)) => {
                let gain = cr - ratio;
                ratio = cr;
                f = cand;
                std::mem::swap(&mut g, &mut g_cand);
                if gain < opts.convergence {
                    break;
                }
            }
            None => break,
        }
    }
    Some((ratio, f))
}

/// Deterministic list of structured starts: the constant, capped
/// evenly spaced point masses, and the largest distinct line ∩ V
/// subsets (full lines inside V come first, then secants).
fn structured_starts(sigma: &SurfaceMeasure, opts: &RstarOptions) -> Vec<StartKind> {
    let card = sigma.cardinality();
    let mut starts = vec![StartKind::Constant];

    let n_pm = opts.max_point_mass_starts.min(card);
    for i in 0..n_pm {
        starts.push(StartKind::PointMass(i * card / n_pm.max(1)));
    }

    if opts.max_line_subset_starts > 0 {
        let field = sigma.field();
        let v = sigma.variety();
        let mut position_of = vec![usize::MAX; (field.q() * field.q()) as usize];
        for (j, &idx) in v.plane_indices().iter().enumerate() {
            position_of[idx as usize] = j;
        }
        let mut seen = HashSet::new();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        for line in all_lines(field) {
            let mut subset: Vec<usize> = line
                .points(field)
                .iter()
                .map(|&pt| position_of[plane_index(field, pt)])
                .filter(|&j| j != usize::MAX)
                .collect();
            subset.sort_unstable();
            if subset.len() >= 2 && seen.insert(subset.clone()) {
                subsets.push(subset);
            }
        }
        subsets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        subsets.truncate(opts.max_line_subset_starts);
        starts.extend(subsets.into_iter().map(StartKind::LineSubset));
    }
    starts
}

fn materialize(kind: &StartKind, card: usize, seed: u64, mode: Mode) -> Vec<Complex64> {
    match kind {
        StartKind::Constant => vec![Complex64::new(1.0, 0.0); card],
        StartKind::PointMass(j) => {
            let mut f = vec![Complex64::new(0.0, 0.0); card];
            f[*j] = Complex64::new(1.0, 0.0);
            f
        }
        StartKind::LineSubset(subset) => {
            let mut f = vec![Complex64::new(0.0, 0.0); card];
            for &j in subset {
                f[j] = Complex64::new(1.0, 0.0);
            }
            f
        }
        StartKind::Random(stream) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(*stream);
            (0..card)
                .map(|_| match mode {
                    Mode::Complex => {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    }
                    Mode::Nonnegative => Complex64::new(rng.gen::<f64>(), 0.0),
                })
                .collect()
        }
    }
}

/// Best ratio over all nonzero f with entries in {−1, 0, 1}.
fn exhaustive_floor(kernel: &ExtendKernel, opts: &RstarOptions) -> f64 {
    let card = kernel.card();
    let mut trits = vec![0u8; card];
    let mut f = vec![Complex64::new(0.0, 0.0); card];
    let mut g = vec![Complex64::new(0.0, 0.0); kernel.output_len()];
    let mut best = 0.0f64;
    loop {
        // Base-3 odometer; digit 0 moves fastest.
        let mut pos = 0;
        loop {
            if pos == card {
                return best;
            }
            trits[pos] += 1;
            if trits[pos] == 3 {
                trits[pos] = 0;
                pos += 1;
            } else {
                break;
            }
        }
        for (slot, &t) in f.iter_mut().zip(&trits) {
            slot.re = [0.0, 1.0, -1.0][t as usize];
        }
        let denom = surface_norm(&f, opts.p);
        if denom == 0.0 {
            continue;
        }
        kernel.apply(&f, &mut g);
        let ratio = output_norm(&g, opts.r) / denom;
        if ratio > best {
            best = ratio;
        }
    }
}

/// Multi-start lower bound on the extension operator norm of sigma at
/// exponents (p, r). Deterministic for fixed options; starts run in
/// parallel.
#[must_use]
pub fn estimate_rstar(sigma: &SurfaceMeasure, opts: &RstarOptions) -> RstarEstimate {
    let kernel = ExtendKernel::new(sigma);
    let card = kernel.card();

    // (kind, mode) pairs: structured starts in both modes, then random
    // starts alternating complex / nonnegative.
    let mut specs: Vec<(StartKind, Mode)> = Vec::new();
    for kind in structured_starts(sigma, opts) {
        specs.push((kind.clone(), Mode::Complex));
        specs.push((kind, Mode::Nonnegative));
    }
    for i in 0..opts.restarts {
        let mode = if i % 2 == 0 { Mode::Complex } else { Mode::Nonnegative };
        specs.push((StartKind::Random(i as u64), mode));
    }
    let starts_run = specs.len();

    let outcomes: Vec<Option<(usize, StartOutcome)>> = specs
        .par_iter()
        .enumerate()
        .map(|(idx, (kind, mode))| {
            let start = materialize(kind, card, opts.seed, *mode);
            run_ascent(&kernel, &start, *mode, opts).map(|(ratio, witness)| {
                (
                    idx,
                    StartOutcome {
                        ratio,
                        witness,
                        mode: *mode,
                        label: format!("{}/{}", kind.label(), mode.label()),
                    },
                )
            })
        })
        .collect();

    // Deterministic merge: higher ratio wins, earlier start breaks ties.
    let mut best: Option<(usize, &StartOutcome)> = None;
    let mut best_nn: Option<(usize, &StartOutcome)> = None;
    for entry in outcomes.iter().flatten() {
        let (idx, outcome) = (entry.0, &entry.1);
        let better = |cur: &Option<(usize, &StartOutcome)>| match cur {
            None => true,
            Some((ci, c)) => outcome.ratio > c.ratio || (outcome.ratio == c.ratio && idx < *ci),
        };
        if better(&best) {
            best = Some((idx, outcome));
        }
        if outcome.mode == Mode::Nonnegative && better(&best_nn) {
            best_nn = Some((idx, outcome));
        }
    }
    // The constant start always survives normalization, so `best` exists.
    let (_, winner) = best.expect("at least one start must produce a ratio");
    let (_, nn) = best_nn.expect("nonnegative starts always include the constant");

    let floor = (sigma.field().q() <= opts.exhaustive_max_order
        && card <= opts.exhaustive_max_support)
        .then(|| exhaustive_floor(&kernel, opts));

    RstarEstimate {
        ratio: winner.ratio,
        witness: winner.witness.clone(),
        winning_start: winner.label.clone(),
        best_nonnegative: nn.ratio,
        nonnegative_witness: nn.witness.clone(),
        exhaustive_floor: floor,
        starts_run,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{parse_poly, variety_of};
    use crate::extension::{
        line_test_closed_form, point_mass_closed_form, rstar_energy_value, SurfaceMeasure,
    };
    use crate::field::construct_field;

    fn sigma_for(p: u64, k: u32, text: &str) -> SurfaceMeasure {
        let f = construct_field(p, k).unwrap();
        SurfaceMeasure::new(variety_of(&parse_poly(&f, text).unwrap())).unwrap()
    }

    fn opts24() -> RstarOptions {
        RstarOptions::new(LpExponent::new(2.0).unwrap(), LpExponent::new(4.0).unwrap())
    }

    #[test]
    fn ascent_beats_every_analytic_test_function() {
        for (p, k, text) in
            [(5, 1, "x2 - x1^2"), (7, 1, "x1^2 + x2^2 - 1"), (5, 1, "x1^4 + x2^4 - 1")]
        {
            let sigma = sigma_for(p, k, text);
            let est = estimate_rstar(&sigma, &opts24());
            let energy = rstar_energy_value(&sigma);
            let pm = point_mass_closed_form(
                sigma.field().q(),
                sigma.cardinality(),
                LpExponent::new(2.0).unwrap(),
                LpExponent::new(4.0).unwrap(),
            );
            assert!(est.ratio >= energy - 1e-9, "{text}: {} < energy {energy}", est.ratio);
            assert!(est.ratio >= pm - 1e-9, "{text}: {} < point mass {pm}", est.ratio);
        }
    }

    #[test]
    fn ascent_reaches_the_exhaustive_floor_at_small_q() {
        for text in ["x1^2 + x2^2 - 1", "x2 - x1^2", "x1^4 + x2^4 - 1", "x1*x2"] {
            let sigma = sigma_for(5, 1, text);
            let est = estimate_rstar(&sigma, &opts24());
            let floor = est.exhaustive_floor.expect("q = 5 runs the sweep");
            assert!(
                est.ratio >= floor - 1e-6,
                "{text}: ascent {} below exhaustive floor {floor}",
                est.ratio
            );
        }
    }

    #[test]
    fn exhaustive_floor_is_gated_by_order() {
        let sigma = sigma_for(7, 1, "x2 - x1^2");
        let est = estimate_rstar(&sigma, &opts24());
        assert!(est.exhaustive_floor.is_none());
    }

    #[test]
    fn line_variety_estimate_dominates_the_line_witness() {
        let sigma = sigma_for(7, 1, "x1*x2");
        let est = estimate_rstar(&sigma, &opts24());
        let closed = line_test_closed_form(7, sigma.cardinality());
        assert!(
            est.ratio >= closed - 1e-9,
            "line-containing variety: {} < closed form {closed}",
            est.ratio
        );
    }

    #[test]
    fn estimates_are_deterministic() {
        let sigma = sigma_for(7, 1, "x1^2 + x2^2 - 1");
        let a = estimate_rstar(&sigma, &opts24());
        let b = estimate_rstar(&sigma, &opts24());
        assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
        assert_eq!(a.winning_start, b.winning_start);
        assert_eq!(a.witness.len(), b.witness.len());
        for (x, y) in a.witness.iter().zip(&b.witness) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn witness_reproduces_the_reported_ratio() {
        let sigma = sigma_for(3, 2, "x1^2 + x2^2 - 1");
        let opts = opts24();
        let est = estimate_rstar(&sigma, &opts);
        let replay = sigma.rstar_ratio(&est.witness, opts.p, opts.r).unwrap();
        assert!(
            (replay - est.ratio).abs() < 1e-9,
            "witness replay {replay} vs reported {}",
            est.ratio
        );
        let replay_nn = sigma.rstar_ratio(&est.nonnegative_witness, opts.p, opts.r).unwrap();
        assert!((replay_nn - est.best_nonnegative).abs() < 1e-9);
        assert!(est.best_nonnegative <= est.ratio + 1e-12);
    }

    #[test]
    fn sup_norm_target_runs_and_matches_point_mass_theory() {
        // At (1, ∞) the operator norm is exactly 1: |(f dσ)^∨(m)| ≤
        // ‖f‖_{L¹(dσ)} with equality at f = point mass, m = 0.
        let sigma = sigma_for(5, 1, "x1^2 + x2^2 - 1");
        let mut opts =
            RstarOptions::new(LpExponent::new(1.0).unwrap(), LpExponent::Infinity);
        opts.restarts = 8;
        let est = estimate_rstar(&sigma, &opts);
        assert!((est.ratio - 1.0).abs() < 1e-7, "R*(1→∞) should be 1, got {}", est.ratio);
    }
}
