//! Product formulae for Poisson multiple integrals.
//!
//! For symmetric kernels `f_1, ..., f_m` with orders `shape`, the product
//! `Φ = Π I_{k_i}(f_i)` has chaos expansion `Φ = h_0 + Σ_q I_q(h_q)` where
//! `h_q` is the sum of [`build_h`] over all diagram pairs `(σ, A)` with
//! `|A| + |σ_1| = q`, and `h_0` is the diagram expectation over `Π≥2`.
//!
//! Every kernel here is computed by one routine, [`contract`]: tabulate a
//! product of kernels whose arguments are drawn from a shared pool of
//! variables, integrate some variables against `μ` and keep the rest.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::combinat::{
    binomial, combinations, enumerate_diagram_pairs, enumerate_nonflat, enumerate_words,
    factorial, filter_geq2, DiagramPair, SetPartition, Word,
};
use crate::error::{Error, Result};
use crate::measure::{
    advance, checked_len, common_atoms, integrate, inner_product, symmetrize, Kernel,
    MeasureSpace, Shape,
};

/// Chaos expansion `(h_0, h_1, ..., h_K)` of a product.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosExpansion {
    shape: Shape,
    kernels: Vec<Kernel>,
}

impl ChaosExpansion {
    /// `kernels[q]` must have order `q`; `kernels[0]` is the mean.
    pub fn new(shape: Shape, kernels: Vec<Kernel>) -> Result<Self> {
        if kernels.len() != shape.total() + 1 {
            return Err(Error::LengthMismatch {
                what: "chaos kernels",
                expected: shape.total() + 1,
                found: kernels.len(),
            });
        }
        for (q, h) in kernels.iter().enumerate() {
            if h.order() != q {
                return Err(Error::OrderMismatch {
                    left: q,
                    right: h.order(),
                });
            }
        }
        Ok(Self { shape, kernels })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// `h_0 = E[Φ]`.
    pub fn mean(&self) -> f64 {
        self.kernels[0].values()[0]
    }

    pub fn kernel(&self, q: usize) -> &Kernel {
        &self.kernels[q]
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    pub fn kernels_mut(&mut self) -> &mut [Kernel] {
        &mut self.kernels
    }

    /// Highest chaos order `K`.
    pub fn top_order(&self) -> usize {
        self.kernels.len() - 1
    }
}

/// One recorded L¹ mass in a [`ConditionReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct MassItem {
    pub label: String,
    pub mass: f64,
}

/// Outcome of an integrability check: every mass it looked at.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub satisfied: bool,
    pub items: Vec<MassItem>,
    pub notes: String,
}

impl ConditionReport {
    fn from_items(items: Vec<MassItem>, notes: String) -> Self {
        let satisfied = items.iter().all(|i| i.mass.is_finite());
        Self {
            satisfied,
            items,
            notes,
        }
    }

    pub fn mass(&self, label: &str) -> Option<f64> {
        self.items.iter().find(|i| i.label == label).map(|i| i.mass)
    }

    pub fn total_mass(&self) -> f64 {
        self.items.iter().map(|i| i.mass).sum()
    }
}

/// Tabulates `Π_i f_i(x[slots_i])` over a pool of `vars` variables, keeps
/// the variables listed in `free` (in that order) as output arguments and
/// integrates every other variable against `μ`.
///
/// Without a `space`, no variable may be integrated.
pub fn contract(
    kernels: &[Kernel],
    slots: &[Vec<usize>],
    vars: usize,
    free: &[usize],
    space: Option<&MeasureSpace>,
) -> Result<Kernel> {
    debug_assert_eq!(kernels.len(), slots.len());
    let atoms = match (common_atoms(kernels)?, space) {
        (Some(n), Some(s)) if n != s.atom_count() => {
            return Err(Error::AtomMismatch {
                expected: s.atom_count(),
                found: n,
            })
        }
        (Some(n), _) => n,
        (None, Some(s)) => s.atom_count(),
        (None, None) => 0,
    };
    for (f, s) in kernels.iter().zip(slots) {
        if f.order() != s.len() {
            return Err(Error::OrderMismatch {
                left: f.order(),
                right: s.len(),
            });
        }
    }
    let mut is_free = vec![false; vars];
    for &v in free {
        is_free[v] = true;
    }
    let integrated: Vec<usize> = (0..vars).filter(|&v| !is_free[v]).collect();
    let weights = match space {
        Some(s) => s.weights(),
        None if integrated.is_empty() => &[][..],
        None => return Err(Error::InvalidArgument("integration requires a measure space")),
    };
    if vars > 0 && atoms == 0 {
        return Err(Error::EmptySpace);
    }

    let out_len = checked_len(atoms, free.len())?;
    let total = checked_len(atoms, vars)?;
    let mut out = vec![0.0; out_len];
    let mut x = vec![0usize; vars];
    for _ in 0..total {
        let mut value = 1.0;
        for (f, s) in kernels.iter().zip(slots) {
            let flat = s.iter().fold(0, |acc, &v| acc * atoms + x[v]);
            value *= f.values()[flat];
            if value == 0.0 {
                break;
            }
        }
        if value != 0.0 {
            for &v in &integrated {
                value *= weights[x[v]];
            }
            let o = free.iter().fold(0, |acc, &v| acc * atoms + x[v]);
            out[o] += value;
        }
        advance(&mut x, atoms);
    }
    Kernel::from_values(atoms, free.len(), out)
}

/// Variable slots of each factor when positions are merged along `sigma`.
fn partition_slots(shape: &Shape, sigma: &SetPartition) -> Vec<Vec<usize>> {
    let labels = sigma.labels();
    shape
        .offsets()
        .iter()
        .zip(shape.orders())
        .map(|(&start, &k)| labels[start..start + k].to_vec())
        .collect()
}

fn check_inputs(shape: &Shape, kernels: &[Kernel], sigma: &SetPartition) -> Result<()> {
    shape.check_kernels(kernels)?;
    if !sigma.is_nonflat(shape) {
        return Err(Error::FlatPartition);
    }
    Ok(())
}

fn require_symmetric(kernels: &[Kernel]) -> Result<()> {
    if kernels.iter().all(Kernel::is_symmetric) {
        Ok(())
    } else {
        Err(Error::NotSymmetric)
    }
}

/// `(f_1 ⊗ ... ⊗ f_m)_σ`: variables in a common block of `σ` are identified;
/// block `j` (canonical order) becomes argument `j`.
pub fn apply_partition(kernels: &[Kernel], sigma: &SetPartition, shape: &Shape) -> Result<Kernel> {
    check_inputs(shape, kernels, sigma)?;
    let slots = partition_slots(shape, sigma);
    let free: Vec<usize> = (0..sigma.len()).collect();
    contract(kernels, &slots, sigma.len(), &free, None)
}

/// `∫ (f_1 ⊗ ... ⊗ f_m)_σ dμ^{|σ|}`.
pub fn integrate_partition(
    kernels: &[Kernel],
    sigma: &SetPartition,
    shape: &Shape,
    space: &MeasureSpace,
) -> Result<f64> {
    check_inputs(shape, kernels, sigma)?;
    let slots = partition_slots(shape, sigma);
    let k = contract(kernels, &slots, sigma.len(), &[], Some(space))?;
    Ok(k.values()[0])
}

/// `H(σ, A)` before the final symmetrization.
fn build_h_raw(pair: &DiagramPair, kernels: &[Kernel], space: &MeasureSpace) -> Result<Kernel> {
    check_inputs(pair.shape(), kernels, pair.sigma())?;
    let slots = partition_slots(pair.shape(), pair.sigma());
    contract(kernels, &slots, pair.sigma().len(), &pair.free_blocks(), Some(space))
}

/// `H(σ, A; f_1, ..., f_m)`: identify variables along `σ≥2`, integrate the
/// blocks of `σ≥2 \ A`, then symmetrize over the `|A| + |σ_1|` free
/// variables (labelled by the minimum element of their block).
pub fn build_h(pair: &DiagramPair, kernels: &[Kernel], space: &MeasureSpace) -> Result<Kernel> {
    symmetrize(&build_h_raw(pair, kernels, space)?)
}

/// `h_q = Σ_{(σ,A): |A|+|σ_1|=q} H(σ, A)` for `1 <= q <= K`.
pub fn product_kernel(
    q: usize,
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
) -> Result<Kernel> {
    let k = shape.total();
    if q == 0 || q > k {
        return Err(Error::OutOfRange {
            what: "chaos order q",
            value: q,
            min: 1,
            max: k,
        });
    }
    shape.check_kernels(kernels)?;
    require_symmetric(kernels)?;
    let mut acc = Kernel::zeros(space.atom_count(), q)?;
    // symmetrization is linear, so it is applied once to the sum
    for pair in enumerate_diagram_pairs(shape, q)? {
        acc.add_scaled(1.0, &build_h_raw(&pair, kernels, space)?)?;
    }
    symmetrize(&acc)
}

/// `E[Φ] = Σ_{σ ∈ Π≥2} ∫ (f_1 ⊗ ... ⊗ f_m)_σ dμ^{|σ|}`; the product of the
/// scalars when every order is zero.
pub fn diagram_expectation(shape: &Shape, kernels: &[Kernel], space: &MeasureSpace) -> Result<f64> {
    shape.check_kernels(kernels)?;
    require_symmetric(kernels)?;
    if shape.is_all_zero() {
        return Ok(kernels.iter().map(|f| f.values()[0]).product());
    }
    let mut total = 0.0;
    for sigma in filter_geq2(&enumerate_nonflat(shape)?) {
        total += integrate_partition(kernels, &sigma, shape, space)?;
    }
    Ok(total)
}

/// Contraction `f ⋆_r^l g`: `r` shared variables, `l` of them integrated.
/// Output arguments are `(y_1..y_{r-l}, t_1..t_{k1-r}, s_1..s_{k2-r})`.
pub fn contraction(
    f: &Kernel,
    g: &Kernel,
    r: usize,
    l: usize,
    space: &MeasureSpace,
) -> Result<Kernel> {
    let (k1, k2) = (f.order(), g.order());
    if r > k1.min(k2) {
        return Err(Error::OutOfRange {
            what: "contraction r",
            value: r,
            min: 0,
            max: k1.min(k2),
        });
    }
    if l > r {
        return Err(Error::OutOfRange {
            what: "contraction l",
            value: l,
            min: 0,
            max: r,
        });
    }
    // pool: x = 0..l, y = l..r, t = r..k1, s = k1..k1+k2-r
    let vars = k1 + k2 - r;
    let f_slots: Vec<usize> = (0..k1).collect();
    let g_slots: Vec<usize> = (0..r).chain(k1..vars).collect();
    let free: Vec<usize> = (l..vars).collect();
    contract(
        &[f.clone(), g.clone()],
        &[f_slots, g_slots],
        vars,
        &free,
        Some(space),
    )
}

/// Chaos expansion of `I_{k1}(f1) I_{k2}(f2)` via the contraction formula
/// `h_{k1+k2-s} = Σ_r r! C(k1,r) C(k2,r) C(r,s-r) sym(f1 ⋆_r^{s-r} f2)`.
pub fn m2_product_kernels(f1: &Kernel, f2: &Kernel, space: &MeasureSpace) -> Result<ChaosExpansion> {
    require_symmetric(&[f1.clone(), f2.clone()])?;
    f1.check_space(space)?;
    f2.check_space(space)?;
    let shape = Shape::new(vec![f1.order(), f2.order()])?;
    let (a, b) = if f1.order() <= f2.order() { (f1, f2) } else { (f2, f1) };
    let (k1, k2) = (a.order(), b.order());
    let total = k1 + k2;
    let mut kernels = Vec::with_capacity(total + 1);
    for q in 0..=total {
        let s = total - q;
        let mut h = if q == 0 {
            Kernel::scalar(0.0)
        } else {
            Kernel::zeros(space.atom_count(), q)?
        };
        if s <= 2 * k1 {
            for r in s.div_ceil(2)..=s.min(k1) {
                let coef = factorial(r) as f64
                    * binomial(k1, r) as f64
                    * binomial(k2, r) as f64
                    * binomial(r, s - r) as f64;
                let term = symmetrize(&contraction(a, b, r, s - r, space)?)?;
                h.add_scaled(coef, &term)?;
            }
        }
        kernels.push(symmetrize(&h)?);
    }
    ChaosExpansion::new(shape, kernels)
}

/// Full expansion: `h_0` from the diagram formula, `h_q` from the pair sums.
pub fn product_expansion(
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
) -> Result<ChaosExpansion> {
    shape.check_kernels(kernels)?;
    require_symmetric(kernels)?;
    for f in kernels {
        f.check_space(space)?;
    }
    let k = shape.total();
    let mut acc: Vec<Kernel> = Vec::with_capacity(k + 1);
    acc.push(Kernel::scalar(diagram_expectation(shape, kernels, space)?));
    for q in 1..=k {
        acc.push(Kernel::zeros(space.atom_count(), q)?);
    }
    // one pass over Π(shape), dispatching each (σ, A) to its order
    for sigma in enumerate_nonflat(shape)? {
        let big: Vec<usize> = (0..sigma.len()).filter(|&b| sigma.blocks()[b].len() >= 2).collect();
        let singles = sigma.len() - big.len();
        for size in 0..=big.len() {
            let q = singles + size;
            if q == 0 {
                continue;
            }
            for pick in combinations(big.len(), size) {
                let chosen = pick.iter().map(|&i| big[i]).collect();
                let pair = DiagramPair::new(shape.clone(), sigma.clone(), chosen)?;
                acc[q].add_scaled(1.0, &build_h_raw(&pair, kernels, space)?)?;
            }
        }
    }
    for h in acc.iter_mut().skip(1) {
        *h = symmetrize(h)?;
    }
    ChaosExpansion::new(shape.clone(), acc)
}

/// The kernels `f_i(z_{q(i)}, ·)` left after a word `W` has acted at
/// `points`, together with their orders `k_i - d_i`.
pub fn residual_kernels(
    word: &Word,
    points: &[usize],
    shape: &Shape,
    kernels: &[Kernel],
) -> Result<(Shape, Vec<Kernel>)> {
    if word.len() != points.len() {
        return Err(Error::LengthMismatch {
            what: "points for word",
            expected: word.len(),
            found: points.len(),
        });
    }
    shape.check_kernels(kernels)?;
    if !word.is_restricted(shape) {
        return Err(Error::InvalidArgument("word is not restricted for the shape"));
    }
    let mut orders = Vec::with_capacity(shape.factors());
    let mut out = Vec::with_capacity(shape.factors());
    for (i, f) in kernels.iter().enumerate() {
        let args: Vec<usize> = word.positions(i).iter().map(|&l| points[l]).collect();
        let r = f.fix_leading(&args)?;
        orders.push(r.order());
        out.push(r);
    }
    Ok((Shape::new(orders)?, out))
}

/// Condition A: L¹ masses of every kernel and of every `(f_1 ⊗ ... ⊗ f_m)_σ`,
/// `σ ∈ Π(shape)`. Always computes the masses.
pub fn check_condition_a(
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
) -> Result<ConditionReport> {
    shape.check_kernels(kernels)?;
    if shape.is_all_zero() {
        return Ok(ConditionReport::from_items(
            Vec::new(),
            String::from("all orders are zero"),
        ));
    }
    let abs: Vec<Kernel> = kernels.iter().map(Kernel::abs).collect();
    let mut items = Vec::new();
    for (i, f) in abs.iter().enumerate() {
        items.push(MassItem {
            label: format!("L1(f{})", i + 1),
            mass: integrate(f, space)?,
        });
    }
    for sigma in enumerate_nonflat(shape)? {
        items.push(MassItem {
            label: format!("{sigma}"),
            mass: integrate_partition(&abs, &sigma, shape, space)?,
        });
    }
    Ok(ConditionReport::from_items(items, String::new()))
}

/// Condition A-(loc): Condition A for the residual kernels of every restricted
/// word of length `1..K-1` at every point tuple of the atom grid. One item per
/// `(word, points)` holding the summed residual masses.
pub fn check_condition_a_loc(
    shape: &Shape,
    kernels: &[Kernel],
    space: &MeasureSpace,
) -> Result<ConditionReport> {
    shape.check_kernels(kernels)?;
    if shape.orders().contains(&0) {
        return Err(Error::InvalidArgument("Condition A-(loc) needs every order >= 1"));
    }
    let n = space.atom_count();
    let mut items = Vec::new();
    let mut satisfied = true;
    for q in 1..shape.total() {
        let words = enumerate_words(shape, q)?;
        let tuples = checked_len(n, q)?;
        for w in &words {
            let mut z = vec![0usize; q];
            for _ in 0..tuples {
                let (rshape, rk) = residual_kernels(w, &z, shape, kernels)?;
                let report = check_condition_a(&rshape, &rk, space)?;
                satisfied &= report.satisfied;
                items.push(MassItem {
                    label: format!("W={w} z={z:?}"),
                    mass: report.total_mass(),
                });
                advance(&mut z, n);
            }
        }
    }
    let mut report = ConditionReport::from_items(items, String::new());
    report.satisfied &= satisfied;
    Ok(report)
}

/// `δ_{k1,k2} k1! ⟨f1, f2⟩`, the mean of `I_{k1}(f1) I_{k2}(f2)`.
pub fn isometry_value(f1: &Kernel, f2: &Kernel, space: &MeasureSpace) -> Result<f64> {
    if f1.order() != f2.order() {
        return Ok(0.0);
    }
    let a = symmetrize(f1)?;
    let b = symmetrize(f2)?;
    Ok(factorial(f1.order()) as f64 * inner_product(&a, &b, space)?)
}
