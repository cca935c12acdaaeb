//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::panic;
use std::time::{Duration, Instant};

use chaoskit::chaos::product_expansion;
use chaoskit::combinat::{
    enumerate_nonflat, enumerate_partitions, enumerate_words, factorial, filter_geq2,
};
use chaoskit::measure::{symmetrize, tensor_product, Kernel, MeasureSpace, Shape};
use chaoskit::path::MultipleIntegral;
use chaoskit::rng::unit_open;
use chaoskit::verify::{
    check_diagram_expectation, check_diagram_expectation_against, check_isometry,
    check_isometry_against, check_last_penrose, check_last_penrose_against,
    check_poincare_multi, check_poincare_product, check_product_identity,
    check_product_identity_against, check_word_formula, check_word_formula_against,
    divergence_witness, perturb_kernel, GridSpec, PRODUCT_IDENTITY_TOL,
};

const TEST_STREAM: u64 = 0x7e57;

struct Outcome {
    passed: bool,
    summary: String,
    budget: Duration,
}

fn uniform(seed: u64, index: u64, lane: u64) -> f64 {
    unit_open(seed, TEST_STREAM, index, lane)
}

fn pick<T: Copy>(items: &[T], seed: u64, index: u64, lane: u64) -> T {
    items[(uniform(seed, index, lane) * items.len() as f64) as usize]
}

fn random_space(n: usize, seed: u64, index: u64) -> MeasureSpace {
    let w = (0..n).map(|a| 0.5 + uniform(seed, index, 100 + a as u64)).collect();
    MeasureSpace::new(w).unwrap()
}

fn random_kernels(shape: &Shape, n: usize, seed: u64) -> Vec<Kernel> {
    shape
        .orders()
        .iter()
        .enumerate()
        .map(|(i, &k)| Kernel::random_symmetric(n, k, seed * 31 + i as u64, -1.0, 1.0).unwrap())
        .collect()
}

fn shape(orders: &[usize]) -> Shape {
    Shape::new(orders.to_vec()).unwrap()
}

fn pathwise_product_formula() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all = true;
    for i in 0..50u64 {
        let n = pick(&[2, 3], 1, i, 0);
        let m = pick(&[2, 3], 1, i, 1);
        let orders: Vec<usize> = (0..m).map(|j| pick(&[1, 2], 1, i, 2 + j as u64)).collect();
        let s = shape(&orders);
        let sp = random_space(n, 1, i);
        let k = random_kernels(&s, n, 1000 + i);
        let r = check_product_identity(&s, &k, &sp, 1000, i).unwrap();
        all &= r.passed;
        worst = worst.max(r.details[0].discrepancy);
    }
    Outcome {
        passed: all && worst <= 1e-8,
        summary: format!("pathwise product formula, 50 instances x 1000 configurations, max relative discrepancy {worst:.2e}"),
        budget: Duration::from_secs(60),
    }
}

fn last_penrose() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all = true;
    for (i, o) in [&[1, 1][..], &[1, 2], &[1, 1, 1], &[2, 2]].iter().enumerate() {
        let s = shape(o);
        let sp = random_space(2, 2, i as u64);
        let k = random_kernels(&s, 2, 2000 + i as u64);
        let r = check_last_penrose(&s, &k, &sp, 20).unwrap();
        all &= r.passed;
        worst = worst.max(r.max_discrepancy);
    }
    Outcome {
        passed: all,
        summary: format!("Last-Penrose kernels on the full grid, n_max 20, max discrepancy {worst:.2e}"),
        budget: Duration::from_secs(120),
    }
}

const WORD_SHAPES: [&[usize]; 9] = [
    &[1, 1],
    &[2, 1],
    &[1, 2],
    &[2, 2],
    &[3, 1],
    &[1, 1, 1],
    &[2, 1, 1],
    &[1, 1, 2],
    &[1, 1, 1, 1],
];

fn word_formula() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all = true;
    for (i, o) in WORD_SHAPES.iter().enumerate() {
        let s = shape(o);
        let sp = random_space(2, 3, i as u64);
        let k = random_kernels(&s, 2, 3000 + i as u64);
        let r = check_word_formula(&s, &k, &sp, 20).unwrap();
        all &= r.passed && r.max_discrepancy <= 1e-8;
        worst = worst.max(r.max_discrepancy);
    }
    Outcome {
        passed: all,
        summary: format!("word formula and double sum, shapes up to K = 4, max spread {worst:.2e}"),
        budget: Duration::from_secs(120),
    }
}

fn diagram_expectation() -> Outcome {
    let shapes: [&[usize]; 5] = [&[1, 1], &[2, 2], &[1, 2], &[1, 1, 1], &[2, 1, 1]];
    let mut worst: f64 = 0.0;
    let mut all = true;
    for i in 0..20u64 {
        let s = shape(pick(&shapes, 4, i, 0));
        let n = pick(&[2, 3], 4, i, 1);
        let sp = random_space(n, 4, i);
        let k = random_kernels(&s, n, 4000 + i);
        let r = check_diagram_expectation(&s, &k, &sp, 16).unwrap();
        all &= r.passed;
        worst = worst.max(r.max_discrepancy);
    }
    Outcome {
        passed: all,
        summary: format!("diagram expectation vs enumeration and isometry, 20 instances, max discrepancy {worst:.2e}"),
        budget: Duration::from_secs(60),
    }
}

/// Compositions of `k` into positive parts.
fn compositions(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=k {
        for mut rest in compositions(k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Brute-force word count: sequences over `[m]` hitting factor `i` exactly `k_i` times.
fn brute_word_count(orders: &[usize]) -> usize {
    let m = orders.len();
    let k: usize = orders.iter().sum();
    let total = m.pow(k as u32);
    (0..total)
        .filter(|&code| {
            let mut counts = vec![0; m];
            let mut c = code;
            for _ in 0..k {
                counts[c % m] += 1;
                c /= m;
            }
            counts == orders
        })
        .count()
}

/// Brute-force non-flat partitions: all partitions, kept when no block holds
/// two positions of one factor.
fn brute_nonflat(orders: &[usize]) -> (usize, usize) {
    let k: usize = orders.iter().sum();
    let owner: Vec<usize> = orders.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c)).collect();
    let mut nonflat = 0;
    let mut geq2 = 0;
    for p in enumerate_partitions(k).unwrap() {
        let ok = p.blocks().iter().all(|b| {
            let mut seen: Vec<usize> = b.iter().map(|&e| owner[e]).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        });
        if ok {
            nonflat += 1;
            if !p.has_singleton() {
                geq2 += 1;
            }
        }
    }
    (nonflat, geq2)
}

fn combinatorial_counts() -> Outcome {
    let count = |o: &[usize]| enumerate_nonflat(&shape(o)).unwrap().len();
    let geq2 = |o: &[usize]| filter_geq2(&enumerate_nonflat(&shape(o)).unwrap()).len();
    let mut ok = count(&[1, 1]) == 2
        && count(&[2, 2]) == 7
        && geq2(&[2, 2]) == 2
        && geq2(&[1, 2]) == 0
        && enumerate_partitions(4).unwrap().len() == 15;
    let mut shapes = 0;
    for k in 1..=6 {
        for o in compositions(k) {
            let s = shape(&o);
            let formula = factorial(k) / o.iter().map(|&c| factorial(c)).product::<u64>();
            let words = enumerate_words(&s, k).unwrap().len();
            ok &= words as u64 == formula && words == brute_word_count(&o);
            let nonflat = enumerate_nonflat(&s).unwrap();
            ok &= (nonflat.len(), filter_geq2(&nonflat).len()) == brute_nonflat(&o);
            shapes += 1;
        }
    }
    Outcome {
        passed: ok,
        summary: format!("partition, diagram and word counts against brute force ({shapes} shapes with K <= 6)"),
        budget: Duration::from_secs(10),
    }
}

fn poincare() -> Outcome {
    let ps = [1.0, 1.5, 2.0];
    let products: [&[usize]; 4] = [&[1, 1], &[1, 2], &[1, 1, 1], &[2, 2]];
    let mut violations = 0;
    let mut rows = 0;
    for i in 0..20u64 {
        let n = pick(&[2, 3], 6, i, 0);
        let sp = random_space(n, 6, i);
        let report = if i % 2 == 0 {
            let order = pick(&[1, 2, 3], 6, i, 1);
            let f = Kernel::random_symmetric(n, order, 6000 + i, -1.0, 1.0).unwrap();
            let mi = MultipleIntegral::new(&f, &sp).unwrap();
            check_poincare_multi(&mi, &sp, &ps, 100_000, i).unwrap()
        } else {
            let s = shape(pick(&products, 6, i, 1));
            let k = random_kernels(&s, n, 6000 + i);
            check_poincare_product(&s, &k, &k, &sp, &ps, 100_000, i).unwrap()
        };
        violations += report.details.iter().filter(|r| !r.passed()).count();
        rows += report.details.len();
    }
    Outcome {
        passed: violations == 0,
        summary: format!("p-Poincare inequalities, 20 functionals x p in {{1, 1.5, 2}}, {violations} violations in {rows} rows"),
        budget: Duration::from_secs(120),
    }
}

fn witness() -> Outcome {
    let specs: Vec<GridSpec> = [10.0, 100.0, 1000.0].iter().map(|&upper| GridSpec { upper, step: 0.01 }).collect();
    let t = divergence_witness(&specs).unwrap();
    let v = t.verdict.as_ref().unwrap();
    let incs: Vec<String> = v.increments.iter().map(|d| format!("{d:.4}")).collect();
    Outcome {
        passed: v.passed(),
        summary: format!(
            "divergence witness, diagonal mass increments [{}] vs ln 10, local mass {:.4} at T = 1000",
            incs.join(", "),
            t.rows[2].local_mass
        ),
        budget: Duration::from_secs(30),
    }
}

fn wick_projection() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    let extra: [&[usize]; 3] = [&[2, 2, 2], &[3, 2], &[1, 1, 1, 1]];
    for (i, o) in WORD_SHAPES.iter().chain(extra.iter()).enumerate() {
        for n in [2, 3] {
            let s = shape(o);
            let sp = random_space(n, 8, i as u64);
            let k = random_kernels(&s, n, 8000 + i as u64);
            let e = product_expansion(&s, &k, &sp).unwrap();
            let wick = symmetrize(&tensor_product(&k).unwrap()).unwrap();
            let top = e.kernel(s.total());
            for (a, b) in top.values().iter().zip(wick.values()) {
                worst = worst.max((a - b).abs());
            }
            tested += 1;
        }
    }
    Outcome {
        passed: worst <= 1e-12,
        summary: format!("top kernel equals the symmetrized tensor product, {tested} instances, max abs error {worst:.2e}"),
        budget: Duration::from_secs(30),
    }
}

fn negative_controls() -> Outcome {
    let delta = 1e-3;
    let sp = random_space(2, 9, 0);
    let s = shape(&[1, 2]);
    let k = random_kernels(&s, 2, 9000);
    let claimed = product_expansion(&s, &k, &sp).unwrap();
    let corrupt = |q: usize, idx: &[usize]| {
        let mut c = claimed.clone();
        let h = c.kernel(q).clone();
        c.kernels_mut()[q] = perturb_kernel(&h, idx, delta).unwrap();
        c
    };
    let mut failures = Vec::new();
    let mut record = |name: &str, passed_clean: bool, passed_bad: bool| {
        if !passed_clean || passed_bad {
            failures.push(name.to_string());
        }
    };

    let bad = corrupt(2, &[0, 1]);
    record(
        "last-penrose",
        check_last_penrose(&s, &k, &sp, 20).unwrap().passed,
        check_last_penrose_against(&s, &k, &bad, &sp, 20).unwrap().passed,
    );
    let bad = corrupt(1, &[1]);
    record(
        "word-formula",
        check_word_formula(&s, &k, &sp, 20).unwrap().passed,
        check_word_formula_against(&s, &k, &bad, &sp, 20).unwrap().passed,
    );
    let bad = corrupt(3, &[0, 1, 1]);
    record(
        "product-identity",
        check_product_identity(&s, &k, &sp, 1000, 0).unwrap().passed,
        check_product_identity_against(&s, &k, &bad, &sp, 1000, 0, PRODUCT_IDENTITY_TOL).unwrap().passed,
    );

    let s2 = shape(&[2, 2]);
    let k2 = random_kernels(&s2, 2, 9100);
    let bad2 = vec![k2[0].clone(), perturb_kernel(&k2[1], &[1, 1], delta).unwrap()];
    record(
        "diagram-expectation",
        check_diagram_expectation(&s2, &k2, &sp, 20).unwrap().passed,
        check_diagram_expectation_against(&s2, &k2, &bad2, &sp, 20).unwrap().passed,
    );
    record(
        "isometry",
        check_isometry(&sp, &k2[0], &k2[1], 20).unwrap().passed,
        check_isometry_against(&sp, &k2[0], &k2[1], &bad2[0], &bad2[1], 20).unwrap().passed,
    );
    let bad_k = vec![k[0].clone(), perturb_kernel(&k[1], &[0, 0], delta).unwrap()];
    record(
        "poincare",
        check_poincare_product(&s, &k, &k, &sp, &[1.5], 2000, 0).unwrap().passed,
        check_poincare_product(&s, &k, &bad_k, &sp, &[1.5], 2000, 0).unwrap().passed,
    );
    Outcome {
        passed: failures.is_empty(),
        summary: if failures.is_empty() {
            "every checker passes clean input and fails a 1e-3 single-entry corruption".to_string()
        } else {
            format!("negative controls missed by: {}", failures.join(", "))
        },
        budget: Duration::from_secs(60),
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(usize, fn() -> Outcome)> = vec![
        (1, pathwise_product_formula),
        (2, last_penrose),
        (3, word_formula),
        (4, diagram_expectation),
        (5, combinatorial_counts),
        (6, poincare),
        (7, witness),
        (8, wick_projection),
        (9, negative_controls),
    ];
    let mut failed = 0;
    for (id, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(run);
        let elapsed = start.elapsed();
        let line = match outcome {
            Ok(o) => {
                let in_time = elapsed <= o.budget;
                let passed = o.passed && in_time;
                if !passed {
                    failed += 1;
                }
                format!(
                    "[{}] criterion {id}: {} ({:.2}s of {}s{})",
                    if passed { "PASS" } else { "FAIL" },
                    o.summary,
                    elapsed.as_secs_f64(),
                    o.budget.as_secs(),
                    if in_time { "" } else { ", over budget" },
                )
            }
            Err(_) => {
                failed += 1;
                format!("[FAIL] criterion {id}: panicked")
            }
        };
        println!("{line}");
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
