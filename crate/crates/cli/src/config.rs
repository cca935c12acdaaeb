//! Run configuration: a TOML file with the measure, the shape, the kernels and
//! command parameters.

use std::fmt::Write as _;
use std::path::Path;

use chaoskit::measure::{Kernel, MeasureSpace, Shape};
use chaoskit::verify::GridSpec;
use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::CliError;

/// Tolerance used to certify that a tabulated kernel is symmetric.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub upper: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    pub p: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub n_max: usize,
    pub tolerance: f64,
    pub truncations: Vec<Truncation>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            q: None,
            p: vec![1.0, 1.5, 2.0],
            samples: 100_000,
            seed: 0,
            n_max: 16,
            tolerance: 1e-8,
            truncations: [10.0, 100.0, 1000.0]
                .iter()
                .map(|&upper| Truncation { upper, step: 0.01 })
                .collect(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    weights: Option<Vec<f64>>,
    shape: Option<Vec<usize>>,
    kernels: Option<Vec<Value>>,
    #[serde(default)]
    params: Params,
}

/// A validated configuration. Generators are already materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub space: Option<MeasureSpace>,
    pub shape: Option<Shape>,
    pub kernels: Option<Vec<Kernel>>,
    pub params: Params,
}

/// The problem instance a kernel-based command works on.
pub struct Instance<'a> {
    pub space: &'a MeasureSpace,
    pub shape: &'a Shape,
    pub kernels: &'a [Kernel],
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        let space = raw
            .weights
            .map(|w| MeasureSpace::new(w).map_err(|e| field("weights", e)))
            .transpose()?;
        let shape = raw
            .shape
            .map(|s| Shape::new(s).map_err(|e| field("shape", e)))
            .transpose()?;
        let kernels = match raw.kernels {
            None => None,
            Some(values) => {
                let (Some(space), Some(shape)) = (&space, &shape) else {
                    return Err(CliError::Invalid {
                        field: "kernels".into(),
                        message: "kernels need both `weights` and `shape`".into(),
                    });
                };
                if values.len() != shape.factors() {
                    return Err(CliError::Invalid {
                        field: "kernels".into(),
                        message: format!("expected {} kernels for the shape, found {}", shape.factors(), values.len()),
                    });
                }
                let kernels = values
                    .iter()
                    .zip(shape.orders())
                    .enumerate()
                    .map(|(i, (v, &order))| parse_kernel(v, order, space.atom_count(), &format!("kernels[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Some(kernels)
            }
        };
        validate_params(&raw.params)?;
        Ok(Self {
            space,
            shape,
            kernels,
            params: raw.params,
        })
    }

    pub fn instance(&self) -> Result<Instance<'_>, CliError> {
        match (&self.space, &self.shape, &self.kernels) {
            (Some(space), Some(shape), Some(kernels)) => Ok(Instance { space, shape, kernels }),
            _ => Err(CliError::Invalid {
                field: "config".into(),
                message: "this command needs `weights`, `shape` and `kernels`".into(),
            }),
        }
    }

    pub fn shape(&self) -> Result<&Shape, CliError> {
        self.shape.as_ref().ok_or_else(|| CliError::Invalid {
            field: "shape".into(),
            message: "this command needs `shape`".into(),
        })
    }

    pub fn grid_specs(&self) -> Vec<GridSpec> {
        self.params
            .truncations
            .iter()
            .map(|t| GridSpec { upper: t.upper, step: t.step })
            .collect()
    }

    /// Serializes the configuration with every kernel written out in full.
    pub fn to_toml(&self) -> Result<String, CliError> {
        #[derive(Serialize)]
        struct Dump<'a> {
            #[serde(skip_serializing_if = "Option::is_none")]
            weights: Option<&'a [f64]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            shape: Option<&'a [usize]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            kernels: Option<Vec<Value>>,
            params: &'a Params,
        }
        let dump = Dump {
            weights: self.space.as_ref().map(MeasureSpace::weights),
            shape: self.shape.as_ref().map(Shape::orders),
            kernels: self.kernels.as_ref().map(|ks| ks.iter().map(kernel_to_value).collect()),
            params: &self.params,
        };
        let mut out = String::new();
        writeln!(out, "# chaoskit run configuration").unwrap();
        out.push_str(&toml::to_string(&dump).map_err(|e| CliError::Parse(e.to_string()))?);
        Ok(out)
    }
}

fn field(name: &str, e: chaoskit::Error) -> CliError {
    CliError::Invalid {
        field: name.into(),
        message: e.to_string(),
    }
}

fn invalid(path: &str, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: path.into(),
        message: message.into(),
    }
}

fn validate_params(p: &Params) -> Result<(), CliError> {
    if p.p.iter().any(|&x| !(1.0..=2.0).contains(&x)) {
        return Err(invalid("params.p", "every exponent must lie in [1, 2]"));
    }
    if p.samples < 2 {
        return Err(invalid("params.samples", "at least 2 samples are required"));
    }
    if !(p.tolerance.is_finite() && p.tolerance > 0.0) {
        return Err(invalid("params.tolerance", "must be a positive number"));
    }
    if let Some(q) = p.q {
        if q == 0 {
            return Err(invalid("params.q", "must be at least 1"));
        }
    }
    for (i, t) in p.truncations.iter().enumerate() {
        if !(t.upper.is_finite() && t.upper > 1.0 && t.step.is_finite() && t.step > 0.0) {
            return Err(invalid(&format!("params.truncations[{i}]"), "need upper > 1 and step > 0"));
        }
    }
    Ok(())
}

fn as_number(v: &Value, path: &str) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(invalid(path, format!("expected a number, found {}", other.type_str()))),
    }
}

fn as_index(v: &Value, path: &str) -> Result<usize, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(invalid(path, "expected a non-negative integer")),
    }
}

fn parse_kernel(v: &Value, order: usize, atoms: usize, path: &str) -> Result<Kernel, CliError> {
    if let Value::Table(t) = v {
        return parse_generator(t, order, atoms, path);
    }
    if order == 0 {
        return Ok(Kernel::scalar(as_number(v, path)?));
    }
    let mut values = Vec::new();
    flatten_nested(v, order, atoms, path, &mut values)?;
    Kernel::symmetric(atoms, order, values, SYMMETRY_TOL).map_err(|e| match e {
        chaoskit::Error::NotSymmetric => invalid(path, "kernel is not symmetric in its arguments"),
        other => invalid(path, other.to_string()),
    })
}

fn flatten_nested(v: &Value, depth: usize, atoms: usize, path: &str, out: &mut Vec<f64>) -> Result<(), CliError> {
    if depth == 0 {
        out.push(as_number(v, path)?);
        return Ok(());
    }
    let Value::Array(items) = v else {
        return Err(invalid(path, format!("expected an array nested {depth} more level(s)")));
    };
    if items.len() != atoms {
        return Err(invalid(path, format!("expected {atoms} entries (one per atom), found {}", items.len())));
    }
    for (i, item) in items.iter().enumerate() {
        flatten_nested(item, depth - 1, atoms, &format!("{path}[{i}]"), out)?;
    }
    Ok(())
}

fn parse_generator(t: &toml::Table, order: usize, atoms: usize, path: &str) -> Result<Kernel, CliError> {
    let name = match t.get("generator") {
        Some(Value::String(s)) => s.as_str(),
        _ => return Err(invalid(&format!("{path}.generator"), "expected \"random-uniform\" or \"indicator\"")),
    };
    let allowed: &[&str] = match name {
        "random-uniform" => &["generator", "seed", "lo", "hi"],
        "indicator" => &["generator", "tuples"],
        other => return Err(invalid(&format!("{path}.generator"), format!("unknown generator `{other}`"))),
    };
    if let Some(key) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(invalid(&format!("{path}.{key}"), "unknown field for this generator"));
    }
    let kernel = match name {
        "random-uniform" => {
            let seed = match t.get("seed") {
                None => 0,
                Some(Value::Integer(i)) => *i as u64,
                Some(_) => return Err(invalid(&format!("{path}.seed"), "expected an integer")),
            };
            let lo = t.get("lo").map(|v| as_number(v, &format!("{path}.lo"))).transpose()?.unwrap_or(-1.0);
            let hi = t.get("hi").map(|v| as_number(v, &format!("{path}.hi"))).transpose()?.unwrap_or(1.0);
            Kernel::random_symmetric(atoms, order, seed, lo, hi)
        }
        _ => {
            let Some(Value::Array(rows)) = t.get("tuples") else {
                return Err(invalid(&format!("{path}.tuples"), "expected an array of index tuples"));
            };
            let mut tuples = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                let p = format!("{path}.tuples[{i}]");
                let Value::Array(items) = row else {
                    return Err(invalid(&p, "expected an array of atom indices"));
                };
                tuples.push(
                    items
                        .iter()
                        .enumerate()
                        .map(|(j, x)| as_index(x, &format!("{p}[{j}]")))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            Kernel::indicator(atoms, order, &tuples)
        }
    };
    kernel.map_err(|e| invalid(path, e.to_string()))
}

/// Nested-array form of a kernel; a bare number for order 0.
pub fn kernel_to_value(k: &Kernel) -> Value {
    fn nest(values: &[f64], atoms: usize, depth: usize) -> Value {
        if depth == 0 {
            return Value::Float(values[0]);
        }
        let chunk = values.len() / atoms;
        Value::Array(values.chunks(chunk).map(|c| nest(c, atoms, depth - 1)).collect())
    }
    nest(k.values(), k.atoms(), k.order())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_arrays_and_generators() {
        let cfg = RunConfig::parse(
            r#"
            weights = [1, 0.5]
            shape = [1, 2, 0]
            kernels = [
                [1.0, 2],
                { generator = "indicator", tuples = [[0, 1]] },
                -2.5,
            ]
            [params]
            samples = 10
            "#,
        )
        .unwrap();
        let k = cfg.kernels.unwrap();
        assert_eq!(k[0].values(), &[1.0, 2.0]);
        assert_eq!(k[1].values(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(k[2].scalar_value(), Some(-2.5));
        assert_eq!(cfg.params.samples, 10);
        assert_eq!(cfg.params.n_max, 16);
    }

    #[test]
    fn reports_field_paths() {
        let err = RunConfig::parse("weights = [1, 1]\nshape = [2]\nkernels = [[[1, 2], [3]]]\n").unwrap_err();
        assert!(err.to_string().contains("kernels[0][1]"), "{err}");
        let err = RunConfig::parse("weights = [1, 1]\nshape = [2]\nkernels = [[[1, 2], [3, 4]]]\n").unwrap_err();
        assert!(err.to_string().contains("not symmetric"), "{err}");
        let err = RunConfig::parse("weights = [1, -1]\n").unwrap_err();
        assert!(err.to_string().contains("weights"), "{err}");
        let err = RunConfig::parse("weights = [1]\nbogus = 3\n").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
        let err = RunConfig::parse("[params]\np = [3.0]\n").unwrap_err();
        assert!(err.to_string().contains("params.p"), "{err}");
    }

    #[test]
    fn dump_round_trips() {
        let cfg = RunConfig::parse(
            r#"
            weights = [0.3, 1.7]
            shape = [2, 1]
            kernels = [{ generator = "random-uniform", seed = 4 }, [0.1, -0.2]]
            [params]
            seed = 9
            q = 2
            "#,
        )
        .unwrap();
        let again = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}
