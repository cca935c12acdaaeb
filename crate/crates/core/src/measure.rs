//! Finite measure spaces and dense kernels over them.
//!
//! A [`Kernel`] of order `k` stores `n^k` values in row-major order: the
//! first argument varies slowest. Order-0 kernels are plain scalars and are
//! compatible with every space.

use alloc::vec;
use alloc::vec::Vec;

use crate::combinat::{factorial, permutations};
use crate::error::{Error, Result};
use crate::math::{abs, powf};
use crate::rng;

/// Largest order [`symmetrize`] accepts by default.
pub const SYMMETRIZE_ORDER_CAP: usize = 8;

/// Finite discrete measure: atoms `0..n` with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    weights: Vec<f64>,
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        Ok(Self { weights })
    }

    /// `n` atoms of equal weight.
    pub fn uniform(atoms: usize, weight: f64) -> Result<Self> {
        Self::new(vec![weight; atoms])
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Orders `(k_1, ..., k_m)` of the factors in a product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    orders: Vec<usize>,
}

impl Shape {
    pub fn new(orders: Vec<usize>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::EmptyShape);
        }
        Ok(Self { orders })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// Number of factors `m`.
    pub fn factors(&self) -> usize {
        self.orders.len()
    }

    /// `K = k_1 + ... + k_m`.
    pub fn total(&self) -> usize {
        self.orders.iter().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.orders.iter().all(|&k| k == 0)
    }

    /// First position (0-based, in `0..K`) owned by each factor.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.orders
            .iter()
            .map(|&k| {
                let start = acc;
                acc += k;
                start
            })
            .collect()
    }

    /// For every position in `0..K`, the factor whose argument it belongs to.
    /// Zero-order factors own no positions.
    pub fn owners(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total());
        for (i, &k) in self.orders.iter().enumerate() {
            out.extend(core::iter::repeat_n(i, k));
        }
        out
    }

    /// Checks that `kernels` has one kernel per factor with matching orders.
    pub fn check_kernels(&self, kernels: &[Kernel]) -> Result<()> {
        if kernels.len() != self.factors() {
            return Err(Error::KernelCount {
                expected: self.factors(),
                found: kernels.len(),
            });
        }
        for (k, f) in self.orders.iter().zip(kernels) {
            if f.order() != *k {
                return Err(Error::OrderMismatch {
                    left: *k,
                    right: f.order(),
                });
            }
        }
        Ok(())
    }
}

/// Dense real tensor of order `k` over the atoms of a measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    order: usize,
    atoms: usize,
    values: Vec<f64>,
    symmetric: bool,
}

pub(crate) fn checked_len(atoms: usize, order: usize) -> Result<usize> {
    let mut len: usize = 1;
    for _ in 0..order {
        len = len.checked_mul(atoms).ok_or(Error::ResourceLimit {
            what: "kernel entries",
            requested: usize::MAX,
            cap: usize::MAX,
        })?;
    }
    Ok(len)
}

/// Decodes a row-major flat index into its digits.
pub(crate) fn unflatten(mut flat: usize, atoms: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = flat % atoms;
        flat /= atoms;
    }
}

pub(crate) fn flatten(idx: &[usize], atoms: usize) -> usize {
    idx.iter().fold(0, |acc, &d| acc * atoms + d)
}

/// Advances an odometer over `0..atoms` in every digit; returns `false`
/// after the last index.
pub(crate) fn advance(idx: &mut [usize], atoms: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < atoms {
            return true;
        }
        *d = 0;
    }
    false
}

impl Kernel {
    /// Order-0 kernel holding a constant.
    pub fn scalar(value: f64) -> Self {
        Self {
            order: 0,
            atoms: 0,
            values: vec![value],
            symmetric: true,
        }
    }

    pub fn zeros(atoms: usize, order: usize) -> Result<Self> {
        let len = checked_len(atoms, order)?;
        Ok(Self {
            order,
            atoms: if order == 0 { 0 } else { atoms },
            values: vec![0.0; len],
            symmetric: true,
        })
    }

    /// Wraps raw row-major values. The symmetric flag is set only for orders
    /// 0 and 1; use [`Kernel::symmetric`] to certify higher orders.
    pub fn from_values(atoms: usize, order: usize, values: Vec<f64>) -> Result<Self> {
        if order > 0 && atoms == 0 {
            return Err(Error::EmptySpace);
        }
        let expected = checked_len(atoms, order)?;
        if values.len() != expected {
            return Err(Error::KernelExtent {
                order,
                atoms,
                expected,
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry { index });
        }
        Ok(Self {
            order,
            atoms: if order == 0 { 0 } else { atoms },
            values,
            symmetric: order <= 1,
        })
    }

    /// Like [`Kernel::from_values`] but verifies invariance under every
    /// coordinate permutation (up to `tol`) and sets the symmetric flag.
    pub fn symmetric(atoms: usize, order: usize, values: Vec<f64>, tol: f64) -> Result<Self> {
        let mut k = Self::from_values(atoms, order, values)?;
        if !k.is_symmetric_within(tol) {
            return Err(Error::NotSymmetric);
        }
        k.symmetric = true;
        Ok(k)
    }

    /// Tabulates `f` over every index tuple.
    pub fn from_fn(atoms: usize, order: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = checked_len(atoms, order)?;
        let mut idx = vec![0usize; order];
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f(&idx));
            advance(&mut idx, atoms);
        }
        Self::from_values(atoms, order, values)
    }

    /// Symmetric kernel with entries uniform in `[lo, hi)`, keyed on the
    /// sorted index tuple so permuted arguments share a value.
    pub fn random_symmetric(atoms: usize, order: usize, seed: u64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument("random kernel bounds must satisfy lo <= hi"));
        }
        let mut sorted = vec![0usize; order];
        let mut k = Self::from_fn(atoms, order, |idx| {
            sorted.copy_from_slice(idx);
            sorted.sort_unstable();
            let key = flatten(&sorted, atoms) as u64;
            let u = rng::unit_open(seed, rng::KERNEL_STREAM, key, order as u64);
            lo + (hi - lo) * u
        })?;
        k.symmetric = true;
        Ok(k)
    }

    /// Symmetric 0/1 kernel equal to one on every listed tuple and on all its
    /// permutations.
    pub fn indicator(atoms: usize, order: usize, tuples: &[Vec<usize>]) -> Result<Self> {
        let mut k = Self::zeros(atoms, order)?;
        if order == 0 {
            k.values[0] = if tuples.is_empty() { 0.0 } else { 1.0 };
            return Ok(k);
        }
        let perms = permutations(order);
        let mut permuted = vec![0usize; order];
        for t in tuples {
            if t.len() != order {
                return Err(Error::LengthMismatch {
                    what: "indicator tuple",
                    expected: order,
                    found: t.len(),
                });
            }
            if let Some(&bad) = t.iter().find(|&&a| a >= atoms) {
                return Err(Error::OutOfRange {
                    what: "atom index",
                    value: bad,
                    min: 0,
                    max: atoms - 1,
                });
            }
            for p in &perms {
                for (j, &pj) in p.iter().enumerate() {
                    permuted[j] = t[pj];
                }
                k.values[flatten(&permuted, atoms)] = 1.0;
            }
        }
        k.symmetric = true;
        Ok(k)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Atom count of the underlying space (0 for scalars).
    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// The single value of an order-0 kernel.
    pub fn scalar_value(&self) -> Option<f64> {
        (self.order == 0).then(|| self.values[0])
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.order);
        self.values[flatten(idx, self.atoms)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let flat = flatten(idx, self.atoms);
        self.values[flat] = value;
        if self.order > 1 {
            self.symmetric = false;
        }
    }

    /// Exhaustive check of `f(p(idx)) == f(idx)` over every index and
    /// adjacent transposition (which generate all permutations).
    pub fn is_symmetric_within(&self, tol: f64) -> bool {
        if self.order <= 1 {
            return true;
        }
        let mut idx = vec![0usize; self.order];
        let mut swapped = vec![0usize; self.order];
        for flat in 0..self.values.len() {
            unflatten(flat, self.atoms, &mut idx);
            for j in 0..self.order - 1 {
                swapped.copy_from_slice(&idx);
                swapped.swap(j, j + 1);
                let other = self.values[flatten(&swapped, self.atoms)];
                if abs(other - self.values[flat]) > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Sets the symmetric flag after verifying it.
    pub fn certify_symmetric(mut self, tol: f64) -> Result<Self> {
        if !self.is_symmetric_within(tol) {
            return Err(Error::NotSymmetric);
        }
        self.symmetric = true;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            order: self.order,
            atoms: self.atoms,
            values: self.values.iter().map(|&v| f(v)).collect(),
            symmetric: self.symmetric,
        }
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Self {
        self.map(abs)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &Kernel) -> Result<()> {
        self.check_same_layout(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        self.symmetric = self.symmetric && other.symmetric;
        Ok(())
    }

    fn check_same_layout(&self, other: &Kernel) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        if self.order > 0 && self.atoms != other.atoms {
            return Err(Error::AtomMismatch {
                expected: self.atoms,
                found: other.atoms,
            });
        }
        Ok(())
    }

    pub(crate) fn check_space(&self, space: &MeasureSpace) -> Result<()> {
        if self.order > 0 && self.atoms != space.atom_count() {
            return Err(Error::AtomMismatch {
                expected: space.atom_count(),
                found: self.atoms,
            });
        }
        Ok(())
    }

    /// `f(z_1, ..., z_d, ·)`: fixes the leading `d` arguments.
    pub fn fix_leading(&self, args: &[usize]) -> Result<Kernel> {
        if args.len() > self.order {
            return Err(Error::OutOfRange {
                what: "fixed arguments",
                value: args.len(),
                min: 0,
                max: self.order,
            });
        }
        if let Some(&bad) = args.iter().find(|&&a| a >= self.atoms) {
            return Err(Error::OutOfRange {
                what: "atom index",
                value: bad,
                min: 0,
                max: self.atoms.saturating_sub(1),
            });
        }
        let rest = self.order - args.len();
        let len = checked_len(self.atoms, rest)?;
        let start = flatten(args, self.atoms) * len;
        Ok(Kernel {
            order: rest,
            atoms: if rest == 0 { 0 } else { self.atoms },
            values: self.values[start..start + len].to_vec(),
            symmetric: self.symmetric || rest <= 1,
        })
    }

    /// Integrates the last argument against `μ`.
    pub fn integrate_last(&self, space: &MeasureSpace) -> Result<Kernel> {
        if self.order == 0 {
            return Err(Error::InvalidArgument("cannot integrate an order-0 kernel"));
        }
        self.check_space(space)?;
        let n = self.atoms;
        let w = space.weights();
        let values: Vec<f64> = self
            .values
            .chunks_exact(n)
            .map(|row| row.iter().zip(w).map(|(v, w)| v * w).sum())
            .collect();
        let order = self.order - 1;
        Ok(Kernel {
            order,
            atoms: if order == 0 { 0 } else { n },
            values,
            symmetric: self.symmetric || order <= 1,
        })
    }
}

/// Atom count shared by all non-scalar kernels, if any.
pub(crate) fn common_atoms(kernels: &[Kernel]) -> Result<Option<usize>> {
    let mut atoms = None;
    for k in kernels.iter().filter(|k| k.order > 0) {
        match atoms {
            None => atoms = Some(k.atoms),
            Some(n) if n != k.atoms => {
                return Err(Error::AtomMismatch {
                    expected: n,
                    found: k.atoms,
                })
            }
            _ => {}
        }
    }
    Ok(atoms)
}

/// Symmetrization `(1/K!) Σ_p f∘p` with the default order cap.
pub fn symmetrize(f: &Kernel) -> Result<Kernel> {
    symmetrize_capped(f, SYMMETRIZE_ORDER_CAP)
}

/// Symmetrization with an explicit cap on the order (the cost is `K!·n^K`).
pub fn symmetrize_capped(f: &Kernel, cap: usize) -> Result<Kernel> {
    let k = f.order;
    if k <= 1 {
        let mut out = f.clone();
        out.symmetric = true;
        return Ok(out);
    }
    if k > cap {
        return Err(Error::ResourceLimit {
            what: "symmetrization order",
            requested: k,
            cap,
        });
    }
    let n = f.atoms;
    let strides: Vec<usize> = (0..k).map(|j| n.pow((k - 1 - j) as u32)).collect();
    let mut acc = vec![0.0; f.values.len()];
    let mut source_strides = vec![0usize; k];
    let mut idx = vec![0usize; k];
    for p in permutations(k) {
        // f(z_{p(0)}, ..., z_{p(k-1)}) reads z_i with stride of slot j where p(j) = i
        for (j, &pj) in p.iter().enumerate() {
            source_strides[pj] = strides[j];
        }
        idx.iter_mut().for_each(|d| *d = 0);
        for slot in acc.iter_mut() {
            let src: usize = idx.iter().zip(&source_strides).map(|(d, s)| d * s).sum();
            *slot += f.values[src];
            advance(&mut idx, n);
        }
    }
    let norm = 1.0 / factorial(k) as f64;
    acc.iter_mut().for_each(|v| *v *= norm);
    Ok(Kernel {
        order: k,
        atoms: n,
        values: acc,
        symmetric: true,
    })
}

/// Tensor product `(f_1 ⊗ ... ⊗ f_m)(v_1, ..., v_K) = Π f_i(block i of v)`.
/// Scalars act as multiplicative constants; the empty product is `1`.
pub fn tensor_product(kernels: &[Kernel]) -> Result<Kernel> {
    let atoms = common_atoms(kernels)?;
    let mut out = Kernel::scalar(1.0);
    for f in kernels {
        out = tensor_pair(&out, f, atoms.unwrap_or(0));
    }
    out.symmetric = out.order <= 1;
    Ok(out)
}

fn tensor_pair(a: &Kernel, b: &Kernel, atoms: usize) -> Kernel {
    let mut values = Vec::with_capacity(a.values.len() * b.values.len());
    for &x in &a.values {
        values.extend(b.values.iter().map(|&y| x * y));
    }
    let order = a.order + b.order;
    Kernel {
        order,
        atoms: if order == 0 { 0 } else { atoms },
        values,
        symmetric: false,
    }
}

/// Full integral `∫ f dμ^k`; the scalar itself for order 0.
pub fn integrate(f: &Kernel, space: &MeasureSpace) -> Result<f64> {
    f.check_space(space)?;
    let mut cur = f.clone();
    while cur.order > 0 {
        cur = cur.integrate_last(space)?;
    }
    Ok(cur.values[0])
}

/// `⟨f, g⟩ = ∫ f g dμ^k`.
pub fn inner_product(f: &Kernel, g: &Kernel, space: &MeasureSpace) -> Result<f64> {
    if f.order != g.order {
        return Err(Error::OrderMismatch {
            left: f.order,
            right: g.order,
        });
    }
    f.check_space(space)?;
    g.check_space(space)?;
    let mut product = f.clone();
    for (a, b) in product.values.iter_mut().zip(&g.values) {
        *a *= b;
    }
    integrate(&product, space)
}

/// `(∫ |f|^p dμ^k)^{1/p}` for `p >= 1`.
pub fn lp_norm(f: &Kernel, p: f64, space: &MeasureSpace) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument("lp_norm needs a finite p >= 1"));
    }
    let powered = f.map(|v| powf(abs(v), p));
    Ok(powf(integrate(&powered, space)?, 1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(w: &[f64]) -> MeasureSpace {
        MeasureSpace::new(w.to_vec()).unwrap()
    }

    fn vec1(v: &[f64]) -> Kernel {
        Kernel::from_values(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn space_rejects_bad_weights() {
        assert_eq!(MeasureSpace::new(vec![]), Err(Error::EmptySpace));
        assert!(matches!(
            MeasureSpace::new(vec![1.0, 0.0]),
            Err(Error::InvalidWeight { index: 1, .. })
        ));
        assert!(MeasureSpace::new(vec![f64::INFINITY]).is_err());
        assert_eq!(space(&[1.0, 2.5]).total_mass(), 3.5);
    }

    #[test]
    fn kernel_extent_is_validated() {
        assert!(matches!(
            Kernel::from_values(2, 2, vec![1.0; 3]),
            Err(Error::KernelExtent { expected: 4, found: 3, .. })
        ));
        assert!(matches!(
            Kernel::from_values(2, 1, vec![1.0, f64::NAN]),
            Err(Error::NonFiniteEntry { index: 1 })
        ));
    }

    #[test]
    fn symmetrize_order_one_is_identity() {
        let f = vec1(&[1.0, 2.0]);
        assert_eq!(symmetrize(&f).unwrap().values(), &[1.0, 2.0]);
    }

    #[test]
    fn symmetrize_two_by_two() {
        let t = tensor_product(&[vec1(&[1.0, 2.0]), vec1(&[3.0, 4.0])]).unwrap();
        assert_eq!(t.values(), &[3.0, 4.0, 6.0, 8.0]);
        let s = symmetrize(&t).unwrap();
        assert_eq!(s.values(), &[3.0, 5.0, 5.0, 8.0]);
        assert!(s.is_symmetric());
    }

    #[test]
    fn symmetrize_fixes_symmetric_order_three() {
        let f = Kernel::random_symmetric(3, 3, 11, -1.0, 1.0).unwrap();
        let s = symmetrize(&f).unwrap();
        for (a, b) in f.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetrize_respects_cap() {
        let f = Kernel::zeros(1, 4).unwrap();
        assert!(matches!(
            symmetrize_capped(&f, 3),
            Err(Error::ResourceLimit { requested: 4, cap: 3, .. })
        ));
    }

    #[test]
    fn tensor_with_scalar_and_empty() {
        let t = tensor_product(&[Kernel::scalar(5.0), vec1(&[1.0, 2.0])]).unwrap();
        assert_eq!(t.order(), 1);
        assert_eq!(t.values(), &[5.0, 10.0]);
        let e = tensor_product(&[]).unwrap();
        assert_eq!(e.scalar_value(), Some(1.0));
    }

    #[test]
    fn tensor_is_associative() {
        let f = Kernel::random_symmetric(3, 1, 1, -1.0, 1.0).unwrap();
        let g = Kernel::random_symmetric(3, 1, 2, -1.0, 1.0).unwrap();
        let h = Kernel::random_symmetric(3, 1, 3, -1.0, 1.0).unwrap();
        let left = tensor_product(&[tensor_product(&[f.clone(), g.clone()]).unwrap(), h.clone()]).unwrap();
        let right = tensor_product(&[f.clone(), tensor_product(&[g.clone(), h.clone()]).unwrap()]).unwrap();
        let flat = tensor_product(&[f.clone(), g.clone(), h.clone()]).unwrap();
        // direct evaluation of the definition
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let direct = f.get(&[a]) * g.get(&[b]) * h.get(&[c]);
                    // grouping changes the rounding of the triple product
                    for t in [&left, &right, &flat] {
                        assert!((t.get(&[a, b, c]) - direct).abs() <= 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(integrate(&Kernel::scalar(7.0), &space(&[1.0])).unwrap(), 7.0);
        assert_eq!(integrate(&vec1(&[3.0, 4.0]), &space(&[1.0, 2.0])).unwrap(), 11.0);
        let id = Kernel::from_values(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(integrate(&id, &space(&[1.0, 1.0])).unwrap(), 2.0);
    }

    #[test]
    fn inner_product_and_norm_examples() {
        let s = space(&[1.0, 2.0]);
        let f = vec1(&[3.0, 4.0]);
        assert_eq!(inner_product(&f, &f, &s).unwrap(), 41.0);
        assert_eq!(inner_product(&f, &vec1(&[0.0, 0.0]), &s).unwrap(), 0.0);
        assert_eq!(lp_norm(&vec1(&[1.0, -1.0]), 1.0, &space(&[1.0, 1.0])).unwrap(), 2.0);
        let g = Kernel::zeros(2, 2).unwrap();
        assert_eq!(
            inner_product(&f, &g, &s),
            Err(Error::OrderMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn fix_leading_slices_rows() {
        let f = Kernel::from_values(2, 2, vec![1.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(f.fix_leading(&[1]).unwrap().values(), &[2.0, 5.0]);
        assert_eq!(f.fix_leading(&[1, 1]).unwrap().scalar_value(), Some(5.0));
        assert_eq!(f.fix_leading(&[]).unwrap(), f);
    }

    #[test]
    fn indicator_is_symmetric_closure() {
        let k = Kernel::indicator(3, 2, &[vec![0, 2]]).unwrap();
        assert_eq!(k.get(&[0, 2]), 1.0);
        assert_eq!(k.get(&[2, 0]), 1.0);
        assert_eq!(k.values().iter().sum::<f64>(), 2.0);
        assert!(k.is_symmetric_within(0.0));
    }

    #[test]
    fn symmetric_constructor_rejects_asymmetric_values() {
        assert_eq!(
            Kernel::symmetric(2, 2, vec![1.0, 2.0, 3.0, 4.0], 1e-12),
            Err(Error::NotSymmetric)
        );
        assert!(Kernel::symmetric(2, 2, vec![1.0, 2.0, 2.0, 4.0], 1e-12).is_ok());
    }
}
