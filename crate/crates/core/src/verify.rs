//! Expectations and executable checks of the product and derivative formulas.
//!
//! Expectations come from either exact enumeration of a box of count vectors
//! or Monte Carlo. Each checker compares an analytic quantity computed from
//! "claimed" kernels against an independent oracle computed from the
//! original kernels; the plain variants pass the same kernels to both sides.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::chaos::{
    diagram_expectation, isometry_value, m2_product_kernels, product_expansion,
    residual_kernels, ChaosExpansion,
};
use crate::combinat::{enumerate_partitions, enumerate_words, factorial, falling_factorial};
use crate::error::{Error, Result};
use crate::math::{abs, exp, ln, powf, sqrt};
use crate::measure::{advance, checked_len, integrate, Kernel, MeasureSpace, Shape};
use crate::path::{
    add_one_cost, iterated_difference, ChaosFunctional, Functional, MultipleIntegral,
    PointConfiguration, PoissonSampler, ProductFunctional, WordSum,
};
use crate::rng::{COPY_STREAM, PRIMARY_STREAM};
use crate::tol::mixed_discrepancy;

/// Largest number of count vectors an exact expectation may enumerate.
pub const EXACT_BOX_BUDGET: usize = 1 << 22;
/// Absolute tolerance of the Last–Penrose comparison before slack.
pub const LAST_PENROSE_TOL: f64 = 1e-7;
/// Absolute tolerance of the word-formula comparison before slack.
pub const WORD_FORMULA_TOL: f64 = 1e-8;
/// Default relative tolerance of the pathwise product identity.
pub const PRODUCT_IDENTITY_TOL: f64 = 1e-8;
/// Tolerance of comparisons between closed forms (no sampling involved).
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Tolerance of the pathwise add-one cost cross-check in Poincaré checks.
pub const ADD_ONE_TOL: f64 = 1e-8;
/// Width, in standard errors, of the statistical buffer.
pub const SIGMA_BUFFER: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectationMethod {
    ExactTruncated,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationResult {
    pub value: f64,
    pub method: ExpectationMethod,
    /// Probability outside the enumerated box (exact only, else 0).
    pub truncation_mass: f64,
    /// Bound on the error caused by truncation (exact only, else 0).
    pub truncation_slack: f64,
    /// Standard error (Monte Carlo only, else 0).
    pub stderr: f64,
    /// Configurations evaluated.
    pub samples: usize,
}

impl ExpectationResult {
    /// Allowed deviation from the true mean: truncation slack or the
    /// statistical buffer, whichever applies.
    pub fn uncertainty(&self) -> f64 {
        match self.method {
            ExpectationMethod::ExactTruncated => self.truncation_slack,
            ExpectationMethod::MonteCarlo => SIGMA_BUFFER * self.stderr,
        }
    }
}

/// One compared quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub label: String,
    pub expected: f64,
    pub actual: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn new(label: String, expected: f64, actual: f64, discrepancy: f64, tolerance: f64) -> Self {
        Self {
            label,
            expected,
            actual,
            discrepancy,
            tolerance,
        }
    }

    /// Row with `discrepancy = |actual - expected|`.
    pub fn absolute(label: String, expected: f64, actual: f64, tolerance: f64) -> Self {
        Self::new(label, expected, actual, abs(actual - expected), tolerance)
    }

    pub fn passed(&self) -> bool {
        self.discrepancy <= self.tolerance
    }
}

/// Verdict of a check. `max_discrepancy` and `tolerance_used` belong to the
/// worst row, the one whose discrepancy exceeds its tolerance the most, so
/// `passed` holds exactly when `max_discrepancy <= tolerance_used`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_discrepancy: f64,
    pub tolerance_used: f64,
    pub details: Vec<CheckRow>,
}

impl CheckReport {
    pub fn from_rows(name: &str, details: Vec<CheckRow>) -> Self {
        let mut worst: Option<&CheckRow> = None;
        for row in &details {
            if row.discrepancy.is_nan() {
                worst = Some(row);
                break;
            }
            let excess = row.discrepancy - row.tolerance;
            if worst.is_none_or(|w| excess > w.discrepancy - w.tolerance) {
                worst = Some(row);
            }
        }
        let (max_discrepancy, tolerance_used) = worst.map_or((0.0, 0.0), |w| (w.discrepancy, w.tolerance));
        Self {
            name: String::from(name),
            passed: max_discrepancy <= tolerance_used,
            max_discrepancy,
            tolerance_used,
            details,
        }
    }
}

fn poisson_pmf(mean: f64, n_max: usize) -> Vec<f64> {
    let mut pmf = Vec::with_capacity(n_max + 1);
    let mut p = exp(-mean);
    for c in 0..=n_max {
        if c > 0 {
            p *= mean / c as f64;
        }
        pmf.push(p);
    }
    pmf
}

/// `E[F]` restricted to count vectors with every count at most `n_max`.
///
/// The slack is the Cauchy–Schwarz bound `sqrt(P(outside)) · (1 + sqrt(E_box F²))`.
pub fn exact_expectation<F: Functional + ?Sized>(
    f: &F,
    space: &MeasureSpace,
    n_max: usize,
) -> Result<ExpectationResult> {
    let n = space.atom_count();
    let size = checked_len(n_max + 1, n)
        .ok()
        .filter(|&s| s <= EXACT_BOX_BUDGET)
        .ok_or(Error::ResourceLimit {
            what: "exact expectation box",
            requested: (n_max + 1).saturating_pow(n as u32),
            cap: EXACT_BOX_BUDGET,
        })?;
    let pmfs: Vec<Vec<f64>> = space.weights().iter().map(|&w| poisson_pmf(w, n_max)).collect();
    let inside: f64 = pmfs.iter().map(|p| p.iter().sum::<f64>()).product();

    let mut idx = vec![0usize; n];
    let (mut value, mut second) = (0.0, 0.0);
    for _ in 0..size {
        let weight: f64 = idx.iter().zip(&pmfs).map(|(&c, p)| p[c]).product();
        let config = PointConfiguration::new(idx.iter().map(|&c| c as u32).collect());
        let v = f.eval(&config);
        value += weight * v;
        second += weight * v * v;
        advance(&mut idx, n_max + 1);
    }
    let truncation_mass = (1.0 - inside).max(0.0);
    let box_second = if inside > 0.0 { second / inside } else { 0.0 };
    Ok(ExpectationResult {
        value,
        method: ExpectationMethod::ExactTruncated,
        truncation_mass,
        truncation_slack: sqrt(truncation_mass) * (1.0 + sqrt(box_second)),
        stderr: 0.0,
        samples: size,
    })
}

/// Running mean and variance.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        sqrt(self.m2 / (self.n - 1) as f64 / self.n as f64)
    }
}

/// Sample mean of `F` over `samples` configurations of the primary stream.
pub fn mc_expectation<F: Functional + ?Sized>(
    f: &F,
    space: &MeasureSpace,
    samples: usize,
    seed: u64,
) -> Result<ExpectationResult> {
    if samples < 2 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: samples,
            min: 2,
            max: usize::MAX,
        });
    }
    let sampler = PoissonSampler::new(seed, PRIMARY_STREAM);
    let mut acc = Welford::default();
    for i in 0..samples {
        acc.push(f.eval(&sampler.sample(space, i as u64)));
    }
    Ok(ExpectationResult {
        value: acc.mean,
        method: ExpectationMethod::MonteCarlo,
        truncation_mass: 0.0,
        truncation_slack: 0.0,
        stderr: acc.stderr(),
        samples,
    })
}

/// Exact expectation when the box fits the budget, Monte Carlo otherwise.
pub fn expectation<F: Functional + ?Sized>(
    f: &F,
    space: &MeasureSpace,
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<ExpectationResult> {
    match exact_expectation(f, space, n_max) {
        Err(Error::ResourceLimit { .. }) => mc_expectation(f, space, samples, seed),
        other => other,
    }
}

/// Every tuple of `q` atoms in lexicographic order.
fn point_tuples(atoms: usize, q: usize) -> Result<Vec<Vec<usize>>> {
    let len = checked_len(atoms, q)?;
    let mut out = Vec::with_capacity(len);
    let mut z = vec![0usize; q];
    for _ in 0..len {
        out.push(z.clone());
        advance(&mut z, atoms);
    }
    Ok(out)
}

fn check_claimed(shape: &Shape, claimed: &ChaosExpansion) -> Result<()> {
    if claimed.top_order() != shape.total() {
        return Err(Error::LengthMismatch {
            what: "claimed chaos kernels",
            expected: shape.total() + 1,
            found: claimed.top_order() + 1,
        });
    }
    Ok(())
}

/// Last–Penrose: `h_q(z) = E[D^{(q)}_z Φ] / q!` on the full atom grid.
pub fn check_last_penrose(
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
    n_max: usize,
) -> Result<CheckReport> {
    let claimed = product_expansion(shape, kernels, space)?;
    check_last_penrose_against(shape, kernels, &claimed, space, n_max)
}

/// Last–Penrose with the analytic side taken from `claimed`.
pub fn check_last_penrose_against(
    shape: &Shape,
    kernels: &[Kernel],
    claimed: &ChaosExpansion,
    space: &MeasureSpace,
    n_max: usize,
) -> Result<CheckReport> {
    check_claimed(shape, claimed)?;
    let phi = ProductFunctional::new(shape, kernels, space)?;
    let mut rows = Vec::new();
    for q in 1..=shape.total() {
        let scale = 1.0 / factorial(q) as f64;
        for z in point_tuples(space.atom_count(), q)? {
            let d = |c: &PointConfiguration| iterated_difference(&phi, c, &z);
            let e = exact_expectation(&d, space, n_max)?;
            rows.push(CheckRow::absolute(
                format!("h{q}{z:?}"),
                scale * e.value,
                claimed.kernel(q).get(&z),
                LAST_PENROSE_TOL + scale * e.truncation_slack,
            ));
        }
    }
    Ok(CheckReport::from_rows("last-penrose", rows))
}

/// `(1/q!) Σ_W Π (k_i)_{(d_i)} E[Π I_{k_i-d_i}(f_i(z_{q(i)}, ·))]` with each
/// expectation taken from the diagram formula. Deterministic.
pub fn word_diagram_sum(
    q: usize,
    points: &[usize],
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
) -> Result<f64> {
    let mut total = 0.0;
    for w in enumerate_words(shape, q)? {
        let (rshape, residual) = residual_kernels(&w, points, shape, kernels)?;
        let mut coef = 1.0;
        for (&k, &d) in shape.orders().iter().zip(&w.multiplicities(shape.factors())) {
            coef *= falling_factorial(k, d)? as f64;
        }
        total += coef * diagram_expectation(&rshape, &residual, space)?;
    }
    Ok(total / factorial(q) as f64)
}

/// Word formula: `h_q`, `E[word sum] / q!` and the deterministic word/diagram
/// double sum agree at every grid tuple; with two factors the contraction
/// closed form joins in.
pub fn check_word_formula(
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
    n_max: usize,
) -> Result<CheckReport> {
    let claimed = product_expansion(shape, kernels, space)?;
    check_word_formula_against(shape, kernels, &claimed, space, n_max)
}

pub fn check_word_formula_against(
    shape: &Shape,
    kernels: &[Kernel],
    claimed: &ChaosExpansion,
    space: &MeasureSpace,
    n_max: usize,
) -> Result<CheckReport> {
    check_claimed(shape, claimed)?;
    let closed = if shape.factors() == 2 {
        Some(m2_product_kernels(&kernels[0], &kernels[1], space)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for q in 1..=shape.total() {
        let scale = 1.0 / factorial(q) as f64;
        for z in point_tuples(space.atom_count(), q)? {
            let words = WordSum::new(q, &z, shape, kernels, space)?;
            let e = exact_expectation(&words, space, n_max)?;
            let sampled = scale * e.value;
            let double_sum = word_diagram_sum(q, &z, shape, kernels, space)?;
            let analytic = claimed.kernel(q).get(&z);
            let mut values = vec![analytic, sampled, double_sum];
            if let Some(c) = &closed {
                values.push(c.kernel(q).get(&z));
            }
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let spread = if values.iter().any(|v| v.is_nan()) { f64::NAN } else { hi - lo };
            rows.push(CheckRow::new(
                format!("h{q}{z:?}"),
                double_sum,
                analytic,
                spread,
                WORD_FORMULA_TOL + scale * e.truncation_slack,
            ));
        }
    }
    Ok(CheckReport::from_rows("word-formula", rows))
}

/// `E[Π I_1(f_i)] = Σ_{σ without singletons} Π_{b∈σ} μ(Π_{i∈b} f_i)`, the
/// moment formula for single integrals.
pub fn single_integral_mean(kernels: &[Kernel], space: &MeasureSpace) -> Result<f64> {
    if kernels.iter().any(|f| f.order() != 1) {
        return Err(Error::InvalidArgument("every kernel must have order 1"));
    }
    for f in kernels {
        f.check_space(space)?;
    }
    if kernels.is_empty() {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for sigma in enumerate_partitions(kernels.len())? {
        if sigma.has_singleton() {
            continue;
        }
        let mut term = 1.0;
        for block in sigma.blocks() {
            let mut mass = 0.0;
            for (a, &w) in space.weights().iter().enumerate() {
                mass += w * block.iter().map(|&i| kernels[i].values()[a]).product::<f64>();
            }
            term *= mass;
        }
        total += term;
    }
    Ok(total)
}

/// Product identity: `Φ(η) = h_0 + Σ I_q(h_q)(η)` on sampled configurations,
/// plus the mean `h_0` against an expectation of `Φ` (and against the closed
/// forms available for two factors or single integrals).
pub fn check_product_identity(
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let claimed = product_expansion(shape, kernels, space)?;
    check_product_identity_against(shape, kernels, &claimed, space, samples, seed, PRODUCT_IDENTITY_TOL)
}

/// Expectation settings used for the mean row of the product identity.
const IDENTITY_N_MAX: usize = 16;

pub fn check_product_identity_against(
    shape: &Shape,
    kernels: &[Kernel],
    claimed: &ChaosExpansion,
    space: &MeasureSpace,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<CheckReport> {
    check_claimed(shape, claimed)?;
    if samples == 0 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let phi = ProductFunctional::new(shape, kernels, space)?;
    let chaos = ChaosFunctional::new(claimed, space)?;
    let sampler = PoissonSampler::new(seed, PRIMARY_STREAM);
    let mut worst = CheckRow::new(String::from("pathwise"), 0.0, 0.0, 0.0, tolerance);
    for i in 0..samples {
        let config = sampler.sample(space, i as u64);
        let (a, b) = (phi.eval(&config), chaos.eval(&config));
        let d = mixed_discrepancy(a, b);
        if d.is_nan() || d > worst.discrepancy || i == 0 {
            worst = CheckRow::new(format!("pathwise sample {i}"), a, b, d, tolerance);
            if d.is_nan() {
                break;
            }
        }
    }
    let mut rows = vec![worst];

    let e = expectation(&phi, space, IDENTITY_N_MAX, samples.max(2), seed)?;
    rows.push(CheckRow::absolute(
        String::from("mean vs expectation"),
        e.value,
        claimed.mean(),
        CLOSED_FORM_TOL * e.value.abs().max(1.0) + e.uncertainty(),
    ));
    if shape.factors() == 2 {
        let iso = isometry_value(&kernels[0], &kernels[1], space)?;
        rows.push(closed_form_row("mean vs isometry", iso, claimed.mean()));
    }
    if shape.orders().iter().all(|&k| k == 1) {
        let moment = single_integral_mean(kernels, space)?;
        rows.push(closed_form_row("mean vs single-integral moments", moment, claimed.mean()));
    }
    Ok(CheckReport::from_rows("product-identity", rows))
}

fn closed_form_row(label: &str, expected: f64, actual: f64) -> CheckRow {
    CheckRow::new(
        String::from(label),
        expected,
        actual,
        mixed_discrepancy(expected, actual),
        CLOSED_FORM_TOL,
    )
}

/// Diagram formula for `E[Φ]` against exact enumeration, and against the
/// isometry when there are two factors.
pub fn check_diagram_expectation(
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
    n_max: usize,
) -> Result<CheckReport> {
    check_diagram_expectation_against(shape, kernels, kernels, space, n_max)
}

/// As [`check_diagram_expectation`], with the diagram sum taken over `claimed`.
pub fn check_diagram_expectation_against(
    shape: &Shape,
    kernels: &[Kernel],
    claimed: &[Kernel],
    space: &MeasureSpace,
    n_max: usize,
) -> Result<CheckReport> {
    let value = diagram_expectation(shape, claimed, space)?;
    let phi = ProductFunctional::new(shape, kernels, space)?;
    let e = exact_expectation(&phi, space, n_max)?;
    let mut rows = vec![CheckRow::absolute(
        String::from("exact enumeration"),
        e.value,
        value,
        CLOSED_FORM_TOL * e.value.abs().max(1.0) + e.truncation_slack,
    )];
    if shape.factors() == 2 {
        let iso = isometry_value(&kernels[0], &kernels[1], space)?;
        rows.push(closed_form_row("isometry", iso, value));
    }
    if shape.orders().iter().all(|&k| k == 1) {
        let moment = single_integral_mean(kernels, space)?;
        rows.push(closed_form_row("single-integral moments", moment, value));
    }
    Ok(CheckReport::from_rows("diagram-expectation", rows))
}

/// Isometry: `E[I_p(f) I_q(g)] = δ_{pq} q! ⟨sym f, sym g⟩` by exact enumeration.
pub fn check_isometry(space: &MeasureSpace, f: &Kernel, g: &Kernel, n_max: usize) -> Result<CheckReport> {
    check_isometry_against(space, f, g, f, g, n_max)
}

/// Isometry with the closed form evaluated on `(claimed_f, claimed_g)`.
pub fn check_isometry_against(
    space: &MeasureSpace,
    f: &Kernel,
    g: &Kernel,
    claimed_f: &Kernel,
    claimed_g: &Kernel,
    n_max: usize,
) -> Result<CheckReport> {
    for k in [f, g] {
        if k.order() > 3 {
            return Err(Error::OutOfRange {
                what: "isometry order",
                value: k.order(),
                min: 0,
                max: 3,
            });
        }
    }
    let (mf, mg) = (MultipleIntegral::new(f, space)?, MultipleIntegral::new(g, space)?);
    let product = |c: &PointConfiguration| mf.eval(c) * mg.eval(c);
    let e = exact_expectation(&product, space, n_max)?;
    let rhs = isometry_value(claimed_f, claimed_g, space)?;
    let rows = vec![CheckRow::absolute(
        format!("E[I{}(f) I{}(g)]", f.order(), g.order()),
        rhs,
        e.value,
        CLOSED_FORM_TOL * rhs.abs().max(1.0) + e.truncation_slack,
    )];
    Ok(CheckReport::from_rows("isometry", rows))
}

/// Accumulators for one exponent `p`.
#[derive(Debug, Clone, Copy, Default)]
struct PoincareAcc {
    copy_lhs: Welford,
    copy_rhs: Welford,
    copy_diff: Welford,
    centered: Welford,
    tara_lhs: Welford,
    tara_rhs: Welford,
    tara_diff: Welford,
}

/// Shared sampling loop. `grad` fills `D_z F(η)` for every atom given `F(η)`.
fn poincare_rows(
    f: &dyn Fn(&PointConfiguration) -> f64,
    grad: &mut dyn FnMut(&PointConfiguration, f64, &mut [f64]),
    space: &MeasureSpace,
    ps: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckRow>> {
    if samples < 2 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: samples,
            min: 2,
            max: usize::MAX,
        });
    }
    if ps.iter().any(|&p| !(1.0..=2.0).contains(&p)) {
        return Err(Error::InvalidArgument("p must lie in [1, 2]"));
    }
    let primary = PoissonSampler::new(seed, PRIMARY_STREAM);
    let copy = PoissonSampler::new(seed, COPY_STREAM);
    // centring constant estimated from the independent copies
    let mut centre = Welford::default();
    for i in 0..samples {
        centre.push(f(&copy.sample(space, i as u64)));
    }
    let c = centre.mean;

    let n = space.atom_count();
    let w = space.weights();
    let mut accs = vec![PoincareAcc::default(); ps.len()];
    let (mut d, mut d_copy) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..samples {
        let (eta, eta_copy) = (primary.sample(space, i as u64), copy.sample(space, i as u64));
        let (fe, fc) = (f(&eta), f(&eta_copy));
        grad(&eta, fe, &mut d);
        grad(&eta_copy, fc, &mut d_copy);
        for (acc, &p) in accs.iter_mut().zip(ps) {
            let grad_mass = |g: &[f64]| g.iter().zip(w).map(|(x, w)| w * powf(abs(*x), p)).sum::<f64>();
            let (r, r_copy) = (grad_mass(&d), grad_mass(&d_copy));

            let lhs = powf(abs(fe - fc), p);
            let rhs = powf(2.0, 3.0 - p) * 0.5 * (r + r_copy);
            acc.copy_lhs.push(lhs);
            acc.copy_rhs.push(rhs);
            acc.copy_diff.push(lhs - rhs);

            let g = fe - c;
            let t_lhs = powf(abs(g), p);
            let t_rhs = powf(2.0, 2.0 - p) * r;
            acc.centered.push(g);
            acc.tara_lhs.push(t_lhs);
            acc.tara_rhs.push(t_rhs);
            acc.tara_diff.push(t_lhs - t_rhs);
        }
    }

    let mut rows = Vec::with_capacity(2 * ps.len());
    for (acc, &p) in accs.iter().zip(ps) {
        rows.push(CheckRow::new(
            format!("copy p={p}"),
            acc.copy_rhs.mean,
            acc.copy_lhs.mean,
            acc.copy_diff.mean,
            SIGMA_BUFFER * acc.copy_diff.stderr(),
        ));
        let m = abs(acc.centered.mean);
        let se = acc.centered.stderr();
        let mean_term = powf(m, p);
        let mean_se = powf(m + se, p) - mean_term;
        let sd = acc.tara_diff.stderr();
        rows.push(CheckRow::new(
            format!("centred p={p}"),
            mean_term + acc.tara_rhs.mean,
            acc.tara_lhs.mean,
            acc.tara_diff.mean - mean_term,
            SIGMA_BUFFER * sqrt(sd * sd + mean_se * mean_se),
        ));
    }
    Ok(rows)
}

/// Both Poincaré inequalities for every `p` in `ps`, on shared samples. The
/// add-one costs are taken by direct differencing of `F`.
pub fn check_poincare_multi<F: Functional + ?Sized>(
    f: &F,
    space: &MeasureSpace,
    ps: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let eval = |c: &PointConfiguration| f.eval(c);
    let mut grad = |c: &PointConfiguration, fc: f64, out: &mut [f64]| {
        for (z, slot) in out.iter_mut().enumerate() {
            *slot = f.eval(&c.with_point(z)) - fc;
        }
    };
    let rows = poincare_rows(&eval, &mut grad, space, ps, samples, seed)?;
    Ok(CheckReport::from_rows("poincare", rows))
}

pub fn check_poincare<F: Functional + ?Sized>(
    f: &F,
    space: &MeasureSpace,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    check_poincare_multi(f, space, &[p], samples, seed)
}

/// Poincaré inequalities for `Φ = Π I_{k_i}(f_i)` with the add-one cost taken
/// from the word formula on `claimed` kernels; every such cost is also
/// compared pathwise against direct differencing of `Φ`.
pub fn check_poincare_product(
    shape: &Shape,
    kernels: &[Kernel],
    claimed: &[Kernel],
    space: &MeasureSpace,
    ps: &[f64],
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let phi = ProductFunctional::new(shape, kernels, space)?;
    let analytic = (0..space.atom_count())
        .map(|z| WordSum::new(1, &[z], shape, claimed, space))
        .collect::<Result<Vec<_>>>()?;
    let eval = |c: &PointConfiguration| phi.eval(c);
    let mut cross = CheckRow::new(String::from("add-one cost"), 0.0, 0.0, 0.0, ADD_ONE_TOL);
    let mut grad = |c: &PointConfiguration, fc: f64, out: &mut [f64]| {
        for (z, slot) in out.iter_mut().enumerate() {
            *slot = analytic[z].eval(c);
            let direct = add_one_cost(&phi, c, z);
            debug_assert!((phi.eval(c) - fc).abs() <= 1e-9 * fc.abs().max(1.0));
            let d = mixed_discrepancy(direct, *slot);
            if d > cross.discrepancy || d.is_nan() {
                cross = CheckRow::new(format!("add-one cost at z={z}"), direct, *slot, d, ADD_ONE_TOL);
            }
        }
    };
    let mut rows = poincare_rows(&eval, &mut grad, space, ps, samples, seed)?;
    rows.push(cross);
    Ok(CheckReport::from_rows("poincare", rows))
}

/// One discretization of `(1, T]` with step `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub upper: f64,
    pub step: f64,
}

/// Atoms allowed in a single witness grid.
pub const WITNESS_ATOM_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessRow {
    pub upper: f64,
    pub step: f64,
    pub atoms: usize,
    /// `∫ |(f_1 ⊗ f_2 ⊗ f_3)_σ| dμ` for `σ = {{1,2,3}}`.
    pub sigma_mass: f64,
    /// L¹ mass of the residual kernel `f_2` after the word `({1})`.
    pub local_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessVerdict {
    /// Successive differences of `sigma_mass`.
    pub increments: Vec<f64>,
    /// `ln(T_{j+1} / T_j)` for the same pairs.
    pub log_ratios: Vec<f64>,
    /// Increasing, with every increment within 5% of its log ratio.
    pub sigma_diverges: bool,
    /// Last local mass within 2% of its limit 1.
    pub local_converges: bool,
}

impl WitnessVerdict {
    pub fn passed(&self) -> bool {
        self.sigma_diverges && self.local_converges
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessTable {
    pub rows: Vec<WitnessRow>,
    pub verdict: Option<WitnessVerdict>,
}

/// Kernels `f(v) = v^{1/2}` on `(1, T]` with `μ(dv) = v^{-5/2} dv`,
/// discretized at midpoints. Condition A fails for the full diagonal, the
/// localized masses stay bounded.
pub fn divergence_witness(truncations: &[GridSpec]) -> Result<WitnessTable> {
    if truncations.is_empty() {
        return Err(Error::InvalidArgument("at least one truncation is required"));
    }
    let mut rows = Vec::with_capacity(truncations.len());
    let mut previous = 1.0;
    for spec in truncations {
        if !(spec.upper > previous && spec.step > 0.0 && spec.step.is_finite()) {
            return Err(Error::InvalidArgument(
                "truncations must increase from 1 and steps must be positive",
            ));
        }
        previous = spec.upper;
        let span = (spec.upper - 1.0) / spec.step;
        if span > WITNESS_ATOM_CAP as f64 {
            return Err(Error::ResourceLimit {
                what: "witness grid atoms",
                requested: span as usize,
                cap: WITNESS_ATOM_CAP,
            });
        }
        let atoms = ((span + 0.5) as usize).max(1);
        let h = (spec.upper - 1.0) / atoms as f64;
        let mid = |a: usize| 1.0 + (a as f64 + 0.5) * h;
        let weights: Vec<f64> = (0..atoms).map(|a| powf(mid(a), -2.5) * h).collect();
        let space = MeasureSpace::new(weights)?;
        let f = Kernel::from_fn(atoms, 1, |z| sqrt(mid(z[0])))?;
        let shape = Shape::new(vec![1, 1, 1])?;
        let kernels = vec![f.clone(), f.clone(), f];

        let sigma = crate::combinat::SetPartition::from_one_based(3, &[&[1, 2, 3]])?;
        let sigma_mass = crate::chaos::integrate_partition(
            &kernels.iter().map(Kernel::abs).collect::<Vec<_>>(),
            &sigma,
            &shape,
            &space,
        )?;
        let word = crate::combinat::Word::new(vec![crate::combinat::FactorSet::from_indices(&[0])?]);
        let (_, residual) = residual_kernels(&word, &[0], &shape, &kernels)?;
        let local_mass = integrate(&residual[1].abs(), &space)?;
        rows.push(WitnessRow {
            upper: spec.upper,
            step: spec.step,
            atoms,
            sigma_mass,
            local_mass,
        });
    }
    let verdict = (rows.len() >= 2).then(|| {
        let increments: Vec<f64> = rows.windows(2).map(|r| r[1].sigma_mass - r[0].sigma_mass).collect();
        let log_ratios: Vec<f64> = rows.windows(2).map(|r| ln(r[1].upper / r[0].upper)).collect();
        let sigma_diverges = increments
            .iter()
            .zip(&log_ratios)
            .all(|(d, l)| *d > 0.0 && abs(d - l) <= 0.05 * l);
        let last = rows[rows.len() - 1].local_mass;
        WitnessVerdict {
            increments,
            log_ratios,
            sigma_diverges,
            local_converges: abs(last - 1.0) <= 0.02,
        }
    });
    Ok(WitnessTable { rows, verdict })
}

/// Copy of `kernel` with the entry at `idx`, and every permutation of it,
/// shifted by `delta`.
pub fn perturb_kernel(kernel: &Kernel, idx: &[usize], delta: f64) -> Result<Kernel> {
    let tuples = vec![idx.to_vec()];
    if kernel.order() == 0 {
        return Ok(Kernel::scalar(kernel.values()[0] + delta));
    }
    let bump = Kernel::indicator(kernel.atoms(), kernel.order(), &tuples)?;
    let mut out = kernel.clone();
    out.add_scaled(delta, &bump)?;
    Ok(out)
}
