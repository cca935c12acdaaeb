use chaoskit::chaos::{diagram_expectation, isometry_value, product_expansion, product_kernel};
use chaoskit::combinat::{enumerate_diagram_pairs, enumerate_nonflat, enumerate_words, filter_geq2};
use chaoskit::measure::Kernel;
use chaoskit::path::ProductFunctional;
use chaoskit::verify::{
    check_diagram_expectation, check_isometry, check_last_penrose, check_poincare_product,
    check_product_identity_against, check_word_formula, divergence_witness, expectation, CheckReport, CheckRow,
    CLOSED_FORM_TOL,
};
use serde::Serialize;

use crate::config::{Instance, RunConfig};
use crate::error::CliError;
use crate::report::{self, CheckRecord, ExpectationRecord, KernelRecord, Output};

pub const CHECKS: [&str; 6] = [
    "last-penrose",
    "word-formula",
    "product-identity",
    "diagram-expectation",
    "isometry",
    "poincare",
];

#[derive(Serialize)]
struct CountRecord {
    q: usize,
    count: usize,
}

#[derive(Serialize)]
struct EnumerateRecord {
    shape: Vec<usize>,
    total: usize,
    nonflat_count: usize,
    nonflat: Vec<String>,
    geq2_count: usize,
    geq2: Vec<String>,
    diagram_pairs: Vec<CountRecord>,
    words: Vec<CountRecord>,
}

pub fn enumerate(cfg: &RunConfig) -> Result<Output, CliError> {
    let shape = cfg.shape()?;
    let nonflat = enumerate_nonflat(shape)?;
    let geq2 = filter_geq2(&nonflat);
    let k = shape.total();
    let mut diagram_pairs = Vec::new();
    let mut words = Vec::new();
    for q in 0..=k {
        diagram_pairs.push(CountRecord {
            q,
            count: enumerate_diagram_pairs(shape, q)?.len(),
        });
        if q > 0 {
            words.push(CountRecord {
                q,
                count: enumerate_words(shape, q)?.len(),
            });
        }
    }
    let record = EnumerateRecord {
        shape: shape.orders().to_vec(),
        total: k,
        nonflat_count: nonflat.len(),
        nonflat: nonflat.iter().map(ToString::to_string).collect(),
        geq2_count: geq2.len(),
        geq2: geq2.iter().map(ToString::to_string).collect(),
        diagram_pairs,
        words,
    };
    let mut out = Output::new();
    out.line(format!("shape {:?}: K = {k}", shape.orders()));
    out.line(format!("non-flat partitions: {}", record.nonflat_count));
    out.line(format!("non-flat partitions without singletons: {}", record.geq2_count));
    out.file("enumerate.json", report::to_json(&record));
    Ok(out)
}

#[derive(Serialize)]
struct KernelsRecord {
    shape: Vec<usize>,
    weights: Vec<f64>,
    kernels: Vec<KernelRecord>,
}

pub fn kernels(cfg: &RunConfig) -> Result<Output, CliError> {
    let inst = cfg.instance()?;
    let computed: Vec<(usize, Kernel)> = match cfg.params.q {
        Some(q) => vec![(q, product_kernel(q, inst.shape, inst.kernels, inst.space)?)],
        None => product_expansion(inst.shape, inst.kernels, inst.space)?
            .kernels()
            .iter()
            .cloned()
            .enumerate()
            .collect(),
    };
    let record = KernelsRecord {
        shape: inst.shape.orders().to_vec(),
        weights: inst.space.weights().to_vec(),
        kernels: computed.iter().map(|(q, k)| KernelRecord::new(*q, k)).collect(),
    };
    let mut out = Output::new();
    for (q, k) in &computed {
        let l1: f64 = k.values().iter().map(|v| v.abs()).sum();
        out.line(format!("h_{q}: {} entries, sum of |entries| {l1:.6e}", k.values().len()));
    }
    let refs: Vec<(usize, &Kernel)> = computed.iter().map(|(q, k)| (*q, k)).collect();
    out.file("kernels.json", report::to_json(&record));
    out.file("kernels.csv", report::kernels_csv(&refs)?);
    Ok(out)
}

#[derive(Serialize)]
struct ExpectRecord {
    diagram_sum: f64,
    expectation: ExpectationRecord,
    check: CheckRecord,
}

pub fn expect(cfg: &RunConfig) -> Result<Output, CliError> {
    let inst = cfg.instance()?;
    let p = &cfg.params;
    let diagram = diagram_expectation(inst.shape, inst.kernels, inst.space)?;
    let phi = ProductFunctional::new(inst.shape, inst.kernels, inst.space)?;
    let e = expectation(&phi, inst.space, p.n_max, p.samples, p.seed)?;
    let tol = CLOSED_FORM_TOL * diagram.abs().max(1.0) + e.uncertainty();
    let mut rows = vec![CheckRow::absolute("E[product]".into(), diagram, e.value, tol)];
    if let [f, g] = inst.kernels {
        // two factors: the diagram sum reduces to the isometry
        let iso = if f.order() == g.order() {
            isometry_value(f, g, inst.space)?
        } else {
            0.0
        };
        let iso_tol = CLOSED_FORM_TOL * iso.abs().max(1.0);
        rows.push(CheckRow::absolute("isometry".into(), iso, diagram, iso_tol));
    }
    let check = CheckReport::from_rows("expectation", rows);
    let record = ExpectRecord {
        diagram_sum: diagram,
        expectation: ExpectationRecord::from(&e),
        check: CheckRecord::from(&check),
    };
    let mut out = Output::new();
    out.passed = check.passed;
    out.line(format!("diagram sum: {diagram:.12e}"));
    out.line(format!(
        "{}: {:.12e} (uncertainty {:.3e})",
        record.expectation.method,
        e.value,
        e.uncertainty()
    ));
    out.line(status_line(&check));
    out.file("expect.json", report::to_json(&record));
    Ok(out)
}

fn run_check(name: &str, inst: &Instance<'_>, cfg: &RunConfig) -> Result<Option<CheckReport>, CliError> {
    let p = &cfg.params;
    let (shape, kernels, space) = (inst.shape, inst.kernels, inst.space);
    let report = match name {
        "last-penrose" => check_last_penrose(shape, kernels, space, p.n_max)?,
        "word-formula" => check_word_formula(shape, kernels, space, p.n_max)?,
        "product-identity" => {
            let claimed = product_expansion(shape, kernels, space)?;
            check_product_identity_against(shape, kernels, &claimed, space, p.samples, p.seed, p.tolerance)?
        }
        "diagram-expectation" => check_diagram_expectation(shape, kernels, space, p.n_max)?,
        "isometry" => {
            let (f, g) = match kernels {
                [f] => (f, f),
                [f, g, ..] => (f, g),
                [] => return Ok(None),
            };
            if f.order() > 3 || g.order() > 3 {
                return Ok(None);
            }
            check_isometry(space, f, g, p.n_max)?
        }
        "poincare" => check_poincare_product(shape, kernels, kernels, space, &p.p, p.samples, p.seed)?,
        other => return Err(CliError::UnknownCheck(other.to_string())),
    };
    Ok(Some(report))
}

fn status_line(r: &CheckReport) -> String {
    format!(
        "{} {}: max discrepancy {:.3e} (tolerance {:.3e}, {} rows)",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.max_discrepancy,
        r.tolerance_used,
        r.details.len()
    )
}

pub fn verify(cfg: &RunConfig, check: &str) -> Result<Output, CliError> {
    let names: Vec<&str> = if check == "all" {
        CHECKS.to_vec()
    } else if CHECKS.contains(&check) {
        vec![check]
    } else {
        return Err(CliError::UnknownCheck(check.to_string()));
    };
    let inst = cfg.instance()?;
    let mut out = Output::new();
    for name in names {
        match run_check(name, &inst, cfg)? {
            None => out.line(format!("SKIP {name}: not applicable to this shape")),
            Some(report) => {
                out.passed &= report.passed;
                out.line(status_line(&report));
                out.file(format!("{name}.json"), report::to_json(&CheckRecord::from(&report)));
                out.file(format!("{name}.csv"), report::check_csv(&report)?);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct WitnessRowRecord {
    upper: f64,
    step: f64,
    atoms: usize,
    sigma_mass: f64,
    local_mass: f64,
}

#[derive(Serialize)]
struct VerdictRecord {
    increments: Vec<f64>,
    log_ratios: Vec<f64>,
    sigma_diverges: bool,
    local_converges: bool,
    passed: bool,
}

#[derive(Serialize)]
struct WitnessRecord {
    rows: Vec<WitnessRowRecord>,
    verdict: Option<VerdictRecord>,
}

pub fn witness(cfg: &RunConfig) -> Result<Output, CliError> {
    let table = divergence_witness(&cfg.grid_specs())?;
    let record = WitnessRecord {
        rows: table
            .rows
            .iter()
            .map(|r| WitnessRowRecord {
                upper: r.upper,
                step: r.step,
                atoms: r.atoms,
                sigma_mass: r.sigma_mass,
                local_mass: r.local_mass,
            })
            .collect(),
        verdict: table.verdict.as_ref().map(|v| VerdictRecord {
            increments: v.increments.clone(),
            log_ratios: v.log_ratios.clone(),
            sigma_diverges: v.sigma_diverges,
            local_converges: v.local_converges,
            passed: v.passed(),
        }),
    };
    let mut out = Output::new();
    for r in &table.rows {
        out.line(format!(
            "T = {:<10} atoms {:>9}  diagonal mass {:.6}  local mass {:.6}",
            r.upper, r.atoms, r.sigma_mass, r.local_mass
        ));
    }
    match &table.verdict {
        Some(v) => {
            out.passed = v.passed();
            out.line(format!(
                "{} witness: diagonal mass grows like ln T: {}, local mass converges: {}",
                if v.passed() { "PASS" } else { "FAIL" },
                v.sigma_diverges,
                v.local_converges
            ));
        }
        None => out.line("no verdict: at least two truncations are needed"),
    }
    out.file("witness.json", report::to_json(&record));
    out.file("witness.csv", report::witness_csv(&table)?);
    Ok(out)
}
