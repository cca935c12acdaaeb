//! Pathwise evaluation on finite point configurations.
//!
//! A configuration is a count vector over the atoms. Multiple integrals are
//! computed exactly through factorial measures:
//!
//! `I_q(f)(η) = Σ_j C(q,j) (-1)^{q-j} ∫ g_j dη^{(j)}`,
//!
//! with `g_j` the kernel with its last `q - j` arguments integrated against
//! `μ`. The factorial measure charges a multiset `M` of atoms with weight
//! `(j! / Π m_b!) Π (c_b)_{(m_b)}`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::chaos::{residual_kernels, ChaosExpansion};
use crate::combinat::{binomial, enumerate_words, factorial, falling_factorial, Word};
use crate::error::{Error, Result};
use crate::math::exp;
use crate::measure::{flatten, symmetrize, Kernel, MeasureSpace, Shape};
use crate::rng::{unit_open, PRIMARY_STREAM};

/// Finite counting measure on the atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointConfiguration {
    counts: Vec<u32>,
}

impl PointConfiguration {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    pub fn empty(atoms: usize) -> Self {
        Self {
            counts: vec![0; atoms],
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, atom: usize) -> u32 {
        self.counts[atom]
    }

    pub fn atom_count(&self) -> usize {
        self.counts.len()
    }

    /// Total number of points.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn add_point(&mut self, atom: usize) {
        self.counts[atom] += 1;
    }

    /// `η + δ_atom`.
    pub fn with_point(&self, atom: usize) -> Self {
        let mut out = self.clone();
        out.add_point(atom);
        out
    }
}

/// Largest Poisson mean drawn by a single inversion; larger means are split.
const POISSON_CHUNK: f64 = 30.0;

fn poisson_inversion(mean: f64, u: f64) -> u32 {
    let mut p = exp(-mean);
    let mut cdf = p;
    let mut k = 0u32;
    while u > cdf && k < 10_000 {
        k += 1;
        p *= mean / f64::from(k);
        cdf += p;
        if p == 0.0 && cdf < u {
            // rounding left the tail short of u
            break;
        }
    }
    k
}

/// Deterministic Poisson sampler indexed by `(seed, stream, sample index)`.
/// Each atom draws from its own lanes, so samples are reproducible one by one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoissonSampler {
    pub seed: u64,
    pub stream: u64,
}

impl PoissonSampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn sample(&self, space: &MeasureSpace, index: u64) -> PointConfiguration {
        let counts = space
            .weights()
            .iter()
            .enumerate()
            .map(|(atom, &w)| {
                let mut left = w;
                let mut chunk = 0u64;
                let mut total = 0u32;
                while left > 0.0 {
                    let mean = left.min(POISSON_CHUNK);
                    let lane = ((atom as u64) << 20) | chunk;
                    total += poisson_inversion(mean, unit_open(self.seed, self.stream, index, lane));
                    left -= mean;
                    chunk += 1;
                }
                total
            })
            .collect();
        PointConfiguration::new(counts)
    }
}

/// One Poisson configuration with intensity `μ` from the primary stream.
pub fn sample(space: &MeasureSpace, seed: u64) -> PointConfiguration {
    PoissonSampler::new(seed, PRIMARY_STREAM).sample(space, 0)
}

/// A real function of a configuration.
pub trait Functional {
    fn eval(&self, config: &PointConfiguration) -> f64;
}

impl<F: Fn(&PointConfiguration) -> f64> Functional for F {
    fn eval(&self, config: &PointConfiguration) -> f64 {
        self(config)
    }
}

/// One multiset term of a factorial-measure sum.
#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    mult: Vec<(usize, u32)>,
}

/// `I_q(f)` with its configuration-independent parts precomputed.
#[derive(Debug, Clone)]
pub struct MultipleIntegral {
    order: usize,
    atoms: usize,
    constant: f64,
    terms: Vec<Term>,
}

impl MultipleIntegral {
    /// Non-symmetric kernels are symmetrized first.
    pub fn new(f: &Kernel, space: &MeasureSpace) -> Result<Self> {
        f.check_space(space)?;
        let q = f.order();
        let n = space.atom_count();
        let mut g = if f.is_symmetric() { f.clone() } else { symmetrize(f)? };
        // g_j for j = q, q-1, ..., 0
        let mut contracted = Vec::with_capacity(q + 1);
        for _ in 0..q {
            let next = g.integrate_last(space)?;
            contracted.push(g);
            g = next;
        }
        contracted.push(g);
        contracted.reverse();

        let sign = |j: usize| if (q - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let constant = sign(0) * contracted[0].values()[0];
        let mut terms = Vec::new();
        for (j, gj) in contracted.iter().enumerate().skip(1) {
            let outer = binomial(q, j) as f64 * sign(j) * factorial(j) as f64;
            let mut m = vec![0usize; j];
            loop {
                let value = gj.values()[flatten(&m, n)];
                if value != 0.0 {
                    let mut mult: Vec<(usize, u32)> = Vec::new();
                    let mut denom = 1.0;
                    for &a in &m {
                        match mult.last_mut() {
                            Some((b, c)) if *b == a => {
                                *c += 1;
                                denom *= f64::from(*c);
                            }
                            _ => mult.push((a, 1)),
                        }
                    }
                    terms.push(Term {
                        coef: outer * value / denom,
                        mult,
                    });
                }
                if !next_multiset(&mut m, n) {
                    break;
                }
            }
        }
        Ok(Self {
            order: q,
            atoms: n,
            constant,
            terms,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }
}

/// Next nondecreasing tuple over `0..n`.
fn next_multiset(m: &mut [usize], n: usize) -> bool {
    for i in (0..m.len()).rev() {
        if m[i] + 1 < n {
            let v = m[i] + 1;
            m[i..].iter_mut().for_each(|d| *d = v);
            return true;
        }
    }
    false
}

fn falling(c: u32, m: u32) -> f64 {
    (0..m).map(|i| f64::from(c) - f64::from(i)).product()
}

impl Functional for MultipleIntegral {
    fn eval(&self, config: &PointConfiguration) -> f64 {
        debug_assert_eq!(config.atom_count(), self.atoms);
        let counts = config.counts();
        let mut total = self.constant;
        for t in &self.terms {
            let mut v = t.coef;
            for &(a, m) in &t.mult {
                let c = counts[a];
                if c < m {
                    v = 0.0;
                    break;
                }
                v *= falling(c, m);
            }
            total += v;
        }
        total
    }
}

fn check_config(config: &PointConfiguration, space: &MeasureSpace) -> Result<()> {
    if config.atom_count() != space.atom_count() {
        return Err(Error::LengthMismatch {
            what: "configuration counts",
            expected: space.atom_count(),
            found: config.atom_count(),
        });
    }
    Ok(())
}

/// `I_q(f)(η)` for a finite configuration.
pub fn multiple_integral(config: &PointConfiguration, f: &Kernel, space: &MeasureSpace) -> Result<f64> {
    check_config(config, space)?;
    Ok(MultipleIntegral::new(f, space)?.eval(config))
}

/// `D_z F(η) = F(η + δ_z) - F(η)`.
pub fn add_one_cost<F: Functional + ?Sized>(f: &F, config: &PointConfiguration, z: usize) -> f64 {
    f.eval(&config.with_point(z)) - f.eval(config)
}

/// `D^{(q)}_{z_1..z_q} F(η) = Σ_{J ⊆ [q]} (-1)^{q-|J|} F(η + Σ_{j∈J} δ_{z_j})`.
pub fn iterated_difference<F: Functional + ?Sized>(
    f: &F,
    config: &PointConfiguration,
    points: &[usize],
) -> f64 {
    let q = points.len();
    let mut total = 0.0;
    let mut shifted = config.clone();
    for mask in 0u64..(1u64 << q) {
        shifted.counts.copy_from_slice(config.counts());
        for (j, &z) in points.iter().enumerate() {
            if mask >> j & 1 == 1 {
                shifted.add_point(z);
            }
        }
        let v = f.eval(&shifted);
        if (q - mask.count_ones() as usize).is_multiple_of(2) {
            total += v;
        } else {
            total -= v;
        }
    }
    total
}

/// `Φ = Π I_{k_i}(f_i)`.
#[derive(Debug, Clone)]
pub struct ProductFunctional {
    factors: Vec<MultipleIntegral>,
}

impl ProductFunctional {
    pub fn new(shape: &Shape, kernels: &[Kernel], space: &MeasureSpace) -> Result<Self> {
        shape.check_kernels(kernels)?;
        let factors = kernels
            .iter()
            .map(|f| MultipleIntegral::new(f, space))
            .collect::<Result<_>>()?;
        Ok(Self { factors })
    }
}

impl Functional for ProductFunctional {
    fn eval(&self, config: &PointConfiguration) -> f64 {
        self.factors.iter().map(|f| f.eval(config)).product()
    }
}

pub fn product_functional(shape: &Shape, kernels: &[Kernel], space: &MeasureSpace) -> Result<ProductFunctional> {
    ProductFunctional::new(shape, kernels, space)
}

/// `h_0 + Σ_q I_q(h_q)`.
#[derive(Debug, Clone)]
pub struct ChaosFunctional {
    mean: f64,
    chaoses: Vec<MultipleIntegral>,
}

impl ChaosFunctional {
    pub fn new(expansion: &ChaosExpansion, space: &MeasureSpace) -> Result<Self> {
        let chaoses = expansion
            .kernels()
            .iter()
            .skip(1)
            .map(|h| MultipleIntegral::new(h, space))
            .collect::<Result<_>>()?;
        Ok(Self {
            mean: expansion.mean(),
            chaoses,
        })
    }
}

impl Functional for ChaosFunctional {
    fn eval(&self, config: &PointConfiguration) -> f64 {
        self.mean + self.chaoses.iter().map(|c| c.eval(config)).sum::<f64>()
    }
}

/// `Π_i (k_i)_{(d_i)} I_{k_i-d_i}(f_i(z_{q(i)}, ·))` for a restricted word.
pub fn word_term(
    config: &PointConfiguration,
    word: &Word,
    points: &[usize],
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
) -> Result<f64> {
    check_config(config, space)?;
    let (_, residual) = residual_kernels(word, points, shape, kernels)?;
    let d = word.multiplicities(shape.factors());
    let mut value = 1.0;
    for ((&k, &di), r) in shape.orders().iter().zip(&d).zip(&residual) {
        value *= falling_factorial(k, di)? as f64 * multiple_integral(config, r, space)?;
    }
    Ok(value)
}

type BoxedFunctional = Box<dyn Fn(&PointConfiguration) -> f64>;

/// `Π_i D^{[W]}_{z} F_i` built literally: walking the letters from last to
/// first, each factor named in a letter is replaced by its add-one cost at
/// that letter's point.
pub fn word_term_composed(
    config: &PointConfiguration,
    word: &Word,
    points: &[usize],
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
) -> Result<f64> {
    check_config(config, space)?;
    if word.len() != points.len() {
        return Err(Error::LengthMismatch {
            what: "points for word",
            expected: word.len(),
            found: points.len(),
        });
    }
    shape.check_kernels(kernels)?;
    let mut factors: Vec<BoxedFunctional> = Vec::with_capacity(kernels.len());
    for f in kernels {
        let mi = MultipleIntegral::new(f, space)?;
        factors.push(Box::new(move |c: &PointConfiguration| mi.eval(c)));
    }
    for (letter, &z) in word.letters().iter().zip(points).rev() {
        for i in letter.iter() {
            let inner = core::mem::replace(&mut factors[i], Box::new(|_: &PointConfiguration| 0.0));
            factors[i] = Box::new(move |c: &PointConfiguration| inner(&c.with_point(z)) - inner(c));
        }
    }
    Ok(factors.iter().map(|f| f(config)).product())
}

/// `Σ_{W ∈ W(q)} word_term(W)` at fixed points: the analytic `D^{(q)} Φ`.
#[derive(Debug, Clone)]
pub struct WordSum {
    terms: Vec<(f64, Vec<MultipleIntegral>)>,
}

impl WordSum {
    pub fn new(
        q: usize,
        points: &[usize],
        shape: &Shape,
        kernels: &[Kernel],
        space: &MeasureSpace,
    ) -> Result<Self> {
        if points.len() != q {
            return Err(Error::LengthMismatch {
                what: "points",
                expected: q,
                found: points.len(),
            });
        }
        let mut terms = Vec::new();
        for w in enumerate_words(shape, q)? {
            let (_, residual) = residual_kernels(&w, points, shape, kernels)?;
            let d = w.multiplicities(shape.factors());
            let mut coef = 1.0;
            for (&k, &di) in shape.orders().iter().zip(&d) {
                coef *= falling_factorial(k, di)? as f64;
            }
            let integrals = residual
                .iter()
                .map(|r| MultipleIntegral::new(r, space))
                .collect::<Result<_>>()?;
            terms.push((coef, integrals));
        }
        Ok(Self { terms })
    }
}

impl Functional for WordSum {
    fn eval(&self, config: &PointConfiguration) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| c * f.iter().map(|i| i.eval(config)).product::<f64>())
            .sum()
    }
}

/// Analytic `D^{(q)}_{points} Φ(η)` as a sum over restricted words.
pub fn word_sum(
    config: &PointConfiguration,
    q: usize,
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
    points: &[usize],
) -> Result<f64> {
    check_config(config, space)?;
    Ok(WordSum::new(q, points, shape, kernels, space)?.eval(config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinat::FactorSet;
    use crate::measure::integrate;

    fn space(w: &[f64]) -> MeasureSpace {
        MeasureSpace::new(w.to_vec()).unwrap()
    }

    fn cfg(c: &[u32]) -> PointConfiguration {
        PointConfiguration::new(c.to_vec())
    }

    #[test]
    fn single_integral_is_compensated_sum() {
        let sp = space(&[0.5, 2.0]);
        let f = Kernel::from_values(2, 1, vec![3.0, -1.0]).unwrap();
        let v = multiple_integral(&cfg(&[2, 1]), &f, &sp).unwrap();
        assert!((v - (2.0 * 3.0 - 1.0 - (1.5 - 2.0))).abs() < 1e-15);
    }

    #[test]
    fn double_integral_on_one_atom() {
        // I_2(1) = N(N-1) - 2wN + w^2 on a single atom of mass w
        let sp = space(&[0.7]);
        let f = Kernel::from_values(1, 2, vec![1.0]).unwrap();
        for n in 0..6u32 {
            let nf = f64::from(n);
            let want = nf * (nf - 1.0) - 2.0 * 0.7 * nf + 0.49;
            let got = multiple_integral(&cfg(&[n]), &f, &sp).unwrap();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn order_zero_integral_is_constant() {
        let sp = space(&[1.0]);
        assert_eq!(multiple_integral(&cfg(&[4]), &Kernel::scalar(2.5), &sp).unwrap(), 2.5);
    }

    #[test]
    fn empty_configuration_gives_signed_mass() {
        let sp = space(&[0.3, 0.4]);
        let f = Kernel::random_symmetric(2, 3, 9, -1.0, 1.0).unwrap();
        let mass = integrate(&f, &sp).unwrap();
        let got = multiple_integral(&PointConfiguration::empty(2), &f, &sp).unwrap();
        assert!((got + mass).abs() < 1e-14);
    }

    #[test]
    fn rejects_mismatched_configuration() {
        let sp = space(&[1.0, 1.0]);
        let f = Kernel::from_values(2, 1, vec![1.0, 1.0]).unwrap();
        assert!(multiple_integral(&cfg(&[1]), &f, &sp).is_err());
    }

    #[test]
    fn add_one_cost_of_integral() {
        let sp = space(&[0.5, 1.5, 1.0]);
        let f = Kernel::random_symmetric(3, 2, 4, -1.0, 1.0).unwrap();
        let g = f.fix_leading(&[1]).unwrap();
        let i2 = MultipleIntegral::new(&f, &sp).unwrap();
        let c = cfg(&[1, 0, 2]);
        let want = 2.0 * multiple_integral(&c, &g, &sp).unwrap();
        assert!((add_one_cost(&i2, &c, 1) - want).abs() < 1e-13);
    }

    #[test]
    fn iterated_difference_of_degree_q_is_constant() {
        let sp = space(&[0.5, 1.5]);
        let f = Kernel::random_symmetric(2, 2, 3, -1.0, 1.0).unwrap();
        let i2 = MultipleIntegral::new(&f, &sp).unwrap();
        for c in [cfg(&[0, 0]), cfg(&[3, 1])] {
            let d = iterated_difference(&i2, &c, &[0, 1]);
            assert!((d - 2.0 * f.get(&[0, 1])).abs() < 1e-13);
            assert!(iterated_difference(&i2, &c, &[0, 1, 1]).abs() < 1e-12);
        }
        assert_eq!(iterated_difference(&i2, &cfg(&[1, 1]), &[]), i2.eval(&cfg(&[1, 1])));
    }

    #[test]
    fn sampler_is_deterministic_and_unbiased() {
        let sp = space(&[0.4, 3.0, 45.0]);
        let s = PoissonSampler::new(11, PRIMARY_STREAM);
        assert_eq!(s.sample(&sp, 5), s.sample(&sp, 5));
        let n = 40_000;
        let mut sums = [0.0; 3];
        for i in 0..n {
            let c = s.sample(&sp, i);
            for (a, s) in sums.iter_mut().enumerate() {
                *s += f64::from(c.count(a));
            }
        }
        for (a, w) in sp.weights().iter().enumerate() {
            let mean = sums[a] / n as f64;
            assert!((mean - w).abs() < 5.0 * (w / n as f64).sqrt(), "atom {a}: {mean}");
        }
    }

    #[test]
    fn word_terms_agree() {
        let sp = space(&[0.6, 1.1]);
        let shape = Shape::new(vec![2, 1]).unwrap();
        let kernels = vec![
            Kernel::random_symmetric(2, 2, 1, -1.0, 1.0).unwrap(),
            Kernel::random_symmetric(2, 1, 2, -1.0, 1.0).unwrap(),
        ];
        let c = cfg(&[2, 1]);
        for q in 1..=3 {
            let words = enumerate_words(&shape, q).unwrap();
            let points: Vec<usize> = (0..q).map(|j| j % 2).collect();
            let phi = ProductFunctional::new(&shape, &kernels, &sp).unwrap();
            let mut sum = 0.0;
            for w in &words {
                let a = word_term(&c, w, &points, &shape, &kernels, &sp).unwrap();
                let b = word_term_composed(&c, w, &points, &shape, &kernels, &sp).unwrap();
                assert!((a - b).abs() < 1e-12, "{w}: {a} vs {b}");
                sum += a;
            }
            let direct = iterated_difference(&phi, &c, &points);
            assert!((sum - direct).abs() < 1e-12);
            let ws = word_sum(&c, q, &shape, &kernels, &sp, &points).unwrap();
            assert!((ws - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn word_term_rejects_unrestricted_word() {
        let sp = space(&[1.0]);
        let shape = Shape::new(vec![1, 1]).unwrap();
        let kernels = vec![Kernel::from_values(1, 1, vec![1.0]).unwrap(); 2];
        let a = FactorSet::from_indices(&[0]).unwrap();
        let w = Word::new(vec![a, a]);
        assert!(word_term(&cfg(&[0]), &w, &[0, 0], &shape, &kernels, &sp).is_err());
    }
}
