//! Small hand-evaluated cases for the pathwise layer and the kernel builders.

use chaoskit::chaos::{
    apply_partition, build_h, check_condition_a, check_condition_a_loc, diagram_expectation,
    product_expansion, product_kernel,
};
use chaoskit::combinat::{enumerate_diagram_pairs, enumerate_nonflat, DiagramPair, FactorSet, SetPartition, Word};
use chaoskit::measure::{symmetrize, tensor_product, Kernel, MeasureSpace, Shape};
use chaoskit::path::{
    add_one_cost, iterated_difference, multiple_integral, word_sum, word_term, Functional,
    MultipleIntegral, PointConfiguration, PoissonSampler, ProductFunctional,
};
use chaoskit::rng::PRIMARY_STREAM;
use chaoskit::Error;

fn rand(n: usize, k: usize, seed: u64) -> Kernel {
    Kernel::random_symmetric(n, k, seed, -1.0, 1.0).unwrap()
}

fn cfg(c: &[u32]) -> PointConfiguration {
    PointConfiguration::new(c.to_vec())
}

fn letters(sets: &[&[usize]]) -> Word {
    Word::new(sets.iter().map(|s| FactorSet::from_indices(s).unwrap()).collect())
}

#[test]
fn double_integral_of_one_on_a_unit_atom() {
    let sp = MeasureSpace::new(vec![1.0]).unwrap();
    let f = Kernel::from_values(1, 2, vec![1.0]).unwrap();
    assert_eq!(multiple_integral(&cfg(&[2]), &f, &sp).unwrap(), -1.0);
}

#[test]
fn first_order_integral_is_compensated_count() {
    let sp = MeasureSpace::new(vec![0.3, 1.7, 0.9]).unwrap();
    let f = rand(3, 1, 1);
    let c = cfg(&[4, 0, 2]);
    let want: f64 = (0..3).map(|a| f.get(&[a]) * (f64::from(c.count(a)) - sp.weight(a))).sum();
    assert!((multiple_integral(&c, &f, &sp).unwrap() - want).abs() < 1e-14);
}

#[test]
fn sampler_means_match_weights() {
    let sp = MeasureSpace::new(vec![1.0, 2.0]).unwrap();
    let s = PoissonSampler::new(42, PRIMARY_STREAM);
    let n = 100_000;
    let mut sums = [0u64; 2];
    for i in 0..n {
        let c = s.sample(&sp, i);
        sums[0] += u64::from(c.count(0));
        sums[1] += u64::from(c.count(1));
    }
    for (a, &w) in sp.weights().iter().enumerate() {
        let mean = sums[a] as f64 / n as f64;
        assert!((mean - w).abs() <= 4.0 * (w / n as f64).sqrt());
    }
    assert!(matches!(MeasureSpace::new(vec![1.0, 0.0]), Err(Error::InvalidWeight { .. })));
}

#[test]
fn add_one_costs_of_integrals() {
    let sp = MeasureSpace::new(vec![0.8, 1.2]).unwrap();
    let f = rand(2, 1, 3);
    let i1 = MultipleIntegral::new(&f, &sp).unwrap();
    let constant = |_: &PointConfiguration| 4.0;
    for c in [cfg(&[0, 0]), cfg(&[3, 1])] {
        for z in 0..2 {
            assert!((add_one_cost(&i1, &c, z) - f.get(&[z])).abs() < 1e-14);
            assert_eq!(add_one_cost(&constant, &c, z), 0.0);
            assert!(iterated_difference(&i1, &c, &[z, 1 - z]).abs() < 1e-14);
        }
    }
}

#[test]
fn product_rule_for_add_one_cost() {
    let sp = MeasureSpace::new(vec![0.8, 1.2, 0.5]).unwrap();
    let f = MultipleIntegral::new(&rand(3, 2, 1), &sp).unwrap();
    let g = MultipleIntegral::new(&rand(3, 1, 2), &sp).unwrap();
    let fg = |c: &PointConfiguration| f.eval(c) * g.eval(c);
    let c = cfg(&[1, 2, 0]);
    for z in 0..3 {
        let (df, dg) = (add_one_cost(&f, &c, z), add_one_cost(&g, &c, z));
        let want = g.eval(&c) * df + f.eval(&c) * dg + df * dg;
        assert!((add_one_cost(&fg, &c, z) - want).abs() < 1e-12);
    }
}

#[test]
fn differences_beyond_total_order_vanish() {
    let sp = MeasureSpace::new(vec![0.8, 1.2]).unwrap();
    let shape = Shape::new(vec![2, 1]).unwrap();
    let phi = ProductFunctional::new(&shape, &[rand(2, 2, 1), rand(2, 1, 2)], &sp).unwrap();
    for c in [cfg(&[0, 1]), cfg(&[2, 2])] {
        for points in [[0, 0, 0, 1], [1, 0, 1, 1]] {
            assert!(iterated_difference(&phi, &c, &points).abs() < 1e-11);
        }
    }
}

#[test]
fn eight_fold_word_term() {
    let sp = MeasureSpace::new(vec![0.6, 1.4]).unwrap();
    let shape = Shape::new(vec![2, 2, 2]).unwrap();
    let k = vec![rand(2, 2, 1), rand(2, 2, 2), rand(2, 2, 3)];
    let w = letters(&[&[0, 1, 2], &[0, 2]]);
    let c = cfg(&[1, 2]);
    for (z1, z2) in [(0, 1), (1, 1), (1, 0)] {
        let residual = k[1].fix_leading(&[z1]).unwrap();
        let want = 8.0 * k[0].get(&[z1, z2]) * k[2].get(&[z1, z2]) * multiple_integral(&c, &residual, &sp).unwrap();
        let got = word_term(&c, &w, &[z1, z2], &shape, &k, &sp).unwrap();
        assert!((got - want).abs() < 1e-13);
    }
}

#[test]
fn full_length_words_give_symmetrized_tensor() {
    let sp = MeasureSpace::new(vec![0.6, 1.4]).unwrap();
    let shape = Shape::new(vec![2, 1]).unwrap();
    let k = vec![rand(2, 2, 5), rand(2, 1, 6)];
    let sym = symmetrize(&tensor_product(&k).unwrap()).unwrap();
    for c in [cfg(&[0, 0]), cfg(&[2, 3])] {
        for z in [[0, 0, 1], [1, 0, 1], [1, 1, 1]] {
            let v = word_sum(&c, 3, &shape, &k, &sp, &z).unwrap() / 6.0;
            assert!((v - sym.get(&z)).abs() < 1e-13);
        }
    }
}

#[test]
fn single_letter_word_on_first_order_factors() {
    let sp = MeasureSpace::new(vec![0.6, 1.4]).unwrap();
    let shape = Shape::new(vec![1, 1, 1]).unwrap();
    let k = vec![rand(2, 1, 1), rand(2, 1, 2), rand(2, 1, 3)];
    let w = letters(&[&[0, 1, 2]]);
    for z in 0..2 {
        let got = word_term(&cfg(&[1, 1]), &w, &[z], &shape, &k, &sp).unwrap();
        let want: f64 = k.iter().map(|f| f.get(&[z])).product();
        assert!((got - want).abs() < 1e-15);
    }
}

#[test]
fn first_order_word_sum_for_two_factors() {
    let sp = MeasureSpace::new(vec![0.6, 1.4]).unwrap();
    let shape = Shape::new(vec![1, 1]).unwrap();
    let k = vec![rand(2, 1, 7), rand(2, 1, 8)];
    let phi = ProductFunctional::new(&shape, &k, &sp).unwrap();
    let c = cfg(&[2, 1]);
    let i = |f: &Kernel| multiple_integral(&c, f, &sp).unwrap();
    for z in 0..2 {
        let (a, b) = (k[0].get(&[z]), k[1].get(&[z]));
        let want = a * i(&k[1]) + b * i(&k[0]) + a * b;
        let got = word_sum(&c, 1, &shape, &k, &sp, &[z]).unwrap();
        assert!((got - want).abs() < 1e-13);
        assert!((add_one_cost(&phi, &c, z) - want).abs() < 1e-13);
    }
    assert_eq!(word_sum(&c, 3, &shape, &k, &sp, &[0, 1, 0]).unwrap(), 0.0);
}

#[test]
fn second_order_word_sum_matches_direct_difference() {
    let sp = MeasureSpace::new(vec![0.9, 0.4, 1.3]).unwrap();
    let shape = Shape::new(vec![2, 1, 2]).unwrap();
    let k = vec![rand(3, 2, 11), rand(3, 1, 12), rand(3, 2, 13)];
    let phi = ProductFunctional::new(&shape, &k, &sp).unwrap();
    let c = cfg(&[1, 3, 0]);
    for z in [[0, 2], [1, 1], [2, 0]] {
        let a = word_sum(&c, 2, &shape, &k, &sp, &z).unwrap();
        let b = iterated_difference(&phi, &c, &z);
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
    }
}

#[test]
fn kernels_of_a_two_by_two_example() {
    let sp = MeasureSpace::new(vec![1.0, 1.0]).unwrap();
    let shape = Shape::new(vec![1, 1]).unwrap();
    let k = vec![
        Kernel::from_values(2, 1, vec![1.0, 2.0]).unwrap(),
        Kernel::from_values(2, 1, vec![3.0, 4.0]).unwrap(),
    ];
    let e = product_expansion(&shape, &k, &sp).unwrap();
    assert_eq!(e.mean(), 11.0);
    assert_eq!(e.kernel(1).values(), &[3.0, 8.0]);
    assert_eq!(e.kernel(2).values(), &[3.0, 5.0, 5.0, 8.0]);
}

#[test]
fn three_factor_second_kernel() {
    let sp = MeasureSpace::new(vec![0.5, 1.5]).unwrap();
    let shape = Shape::new(vec![1, 1, 1]).unwrap();
    let k = vec![rand(2, 1, 21), rand(2, 1, 22), rand(2, 1, 23)];
    let h2 = product_kernel(2, &shape, &k, &sp).unwrap();
    let pointwise = |i: usize, j: usize| Kernel::from_fn(2, 1, |z| k[i].get(z) * k[j].get(z)).unwrap();
    let mut want = tensor_product(&[pointwise(0, 1), k[2].clone()]).unwrap();
    want.add_scaled(1.0, &tensor_product(&[pointwise(0, 2), k[1].clone()]).unwrap()).unwrap();
    want.add_scaled(1.0, &tensor_product(&[pointwise(1, 2), k[0].clone()]).unwrap()).unwrap();
    let want = symmetrize(&want).unwrap();
    for (a, b) in h2.values().iter().zip(want.values()) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn condition_a_implies_local_condition() {
    for seed in 0..5 {
        let sp = MeasureSpace::new(vec![0.5 + 0.1 * seed as f64, 1.0]).unwrap();
        let shape = Shape::new(vec![1, 2, 1]).unwrap();
        let k = vec![rand(2, 1, seed), rand(2, 2, seed + 10), rand(2, 1, seed + 20)];
        let a = check_condition_a(&shape, &k, &sp).unwrap();
        let loc = check_condition_a_loc(&shape, &k, &sp).unwrap();
        assert!(a.satisfied && loc.satisfied);
        assert!(a.items.iter().chain(&loc.items).all(|i| i.mass.is_finite() && i.mass >= 0.0));
    }
}

#[test]
fn absolute_values_pass_through_partitions() {
    let shape = Shape::new(vec![2, 1, 2]).unwrap();
    let k = vec![rand(2, 2, 1), rand(2, 1, 2), rand(2, 2, 3)];
    let abs: Vec<Kernel> = k.iter().map(Kernel::abs).collect();
    for sigma in enumerate_nonflat(&shape).unwrap() {
        let a = apply_partition(&abs, &sigma, &shape).unwrap();
        let b = apply_partition(&k, &sigma, &shape).unwrap().abs();
        assert_eq!(a.values(), b.values());
    }
}

/// Image of position `e` when the factor order is reversed.
fn reversed_position(e: usize, orders: &[usize]) -> usize {
    let mut start = 0;
    for (i, &k) in orders.iter().enumerate() {
        if e < start + k {
            let rev_start: usize = orders[i + 1..].iter().sum();
            return rev_start + (e - start);
        }
        start += k;
    }
    unreachable!()
}

#[test]
fn build_h_is_invariant_under_factor_relabelling() {
    let sp = MeasureSpace::new(vec![0.7, 1.1]).unwrap();
    let orders = [2, 1, 2];
    let shape = Shape::new(orders.to_vec()).unwrap();
    let rev_shape = Shape::new(orders.iter().rev().copied().collect()).unwrap();
    let k = vec![rand(2, 2, 31), rand(2, 1, 32), rand(2, 2, 33)];
    let rev_k: Vec<Kernel> = k.iter().rev().cloned().collect();
    let mut compared = 0;
    for q in 0..=5 {
        for pair in enumerate_diagram_pairs(&shape, q).unwrap() {
            let image: Vec<Vec<usize>> = pair
                .sigma()
                .blocks()
                .iter()
                .map(|b| {
                    let mut v: Vec<usize> = b.iter().map(|&e| reversed_position(e, &orders)).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            let sigma = SetPartition::from_blocks(5, image.clone()).unwrap();
            let chosen = pair
                .chosen()
                .iter()
                .map(|&b| sigma.blocks().iter().position(|blk| *blk == image[b]).unwrap())
                .collect();
            let mirrored = DiagramPair::new(rev_shape.clone(), sigma, chosen).unwrap();
            let a = build_h(&pair, &k, &sp).unwrap();
            let b = build_h(&mirrored, &rev_k, &sp).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-14);
            }
            compared += 1;
        }
    }
    assert!(compared > 0);
    let e = diagram_expectation(&shape, &k, &sp).unwrap();
    let f = diagram_expectation(&rev_shape, &rev_k, &sp).unwrap();
    assert!((e - f).abs() < 1e-14);
}
