//! Plain-text model persistence.
//!
//! The format is line-oriented and versioned:
//!
//! ```text
//! driftwatch-model 1
//! kind lr                  avg | pl | lr | knn | mlp
//! output p-values          p-values | statistics
//! pc-class no-drift        which class probability the threshold cuts
//! threshold 0.8            ξ for classifiers, α for avg/pl
//! mean m1 m2 m3 m4         standardizer statistics
//! sd s1 s2 s3 s4
//! domain log               log | raw: feature scale the statistics live on
//! ...                      one kind-specific block, documented per writer
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every parameter bit for bit. Only finite
//! values are accepted in either direction.

use std::fmt::Write as _;
use std::path::Path;

use driftwatch_core::detectors::FeatureOutput;
use driftwatch_core::fusion::{
    FusionExample, Mlp, ModelParams, ProbabilityClass, Standardizer, MLP_PARAM_COUNT,
};
use driftwatch_core::scenario::RngSeed;
use driftwatch_core::FusionModel;

use crate::{HarnessError, Result};

const MAGIC: &str = "driftwatch-model";
const VERSION: u32 = 1;

fn invalid(detail: String) -> HarnessError {
    HarnessError::Invalid {
        what: "model file",
        detail,
    }
}

fn push_floats(line: &mut String, values: &[f64]) {
    for v in values {
        let _ = write!(line, " {v}");
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid("non-finite parameter".into()))
    }
}

pub fn model_to_string(model: &FusionModel) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let kind = match &model.params {
        ModelParams::Avg => "avg",
        ModelParams::Pl { .. } => "pl",
        ModelParams::Lr { .. } => "lr",
        ModelParams::Knn { .. } => "knn",
        ModelParams::Mlp(_) => "mlp",
    };
    let _ = writeln!(out, "kind {kind}");
    let output = match model.output_type {
        FeatureOutput::PValues => "p-values",
        FeatureOutput::Statistics => "statistics",
    };
    let _ = writeln!(out, "output {output}");
    let pc = match model.pc_class {
        ProbabilityClass::NoDrift => "no-drift",
        ProbabilityClass::Drift => "drift",
    };
    let _ = writeln!(out, "pc-class {pc}");
    check_finite(&[model.threshold])?;
    let _ = writeln!(out, "threshold {}", model.threshold);

    check_finite(&model.standardizer.mean)?;
    check_finite(&model.standardizer.sd)?;
    let mut line = String::from("mean");
    push_floats(&mut line, &model.standardizer.mean);
    let _ = writeln!(out, "{line}");
    let mut line = String::from("sd");
    push_floats(&mut line, &model.standardizer.sd);
    let _ = writeln!(out, "{line}");
    let domain = if model.standardizer.log_domain {
        "log"
    } else {
        "raw"
    };
    let _ = writeln!(out, "domain {domain}");

    match &model.params {
        ModelParams::Avg => {}
        ModelParams::Pl { w } => {
            check_finite(w)?;
            let mut line = String::from("weights");
            push_floats(&mut line, w);
            let _ = writeln!(out, "{line}");
        }
        ModelParams::Lr { w, bias } => {
            check_finite(w)?;
            check_finite(&[*bias])?;
            let mut line = String::from("weights");
            push_floats(&mut line, w);
            let _ = writeln!(out, "{line}");
            let _ = writeln!(out, "bias {bias}");
        }
        ModelParams::Knn {
            neighbours,
            examples,
        } => {
            let _ = writeln!(out, "neighbours {neighbours}");
            let _ = writeln!(out, "examples {}", examples.len());
            for ex in examples {
                check_finite(&ex.features)?;
                let mut line = String::from("example");
                push_floats(&mut line, &ex.features);
                let _ = writeln!(out, "{line} {}", u8::from(ex.label));
            }
        }
        ModelParams::Mlp(mlp) => {
            let params = mlp.params();
            check_finite(&params)?;
            let mut line = String::from("params");
            push_floats(&mut line, &params);
            let _ = writeln!(out, "{line}");
        }
    }
    Ok(out)
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next line carrying the given key; errors name the line and key.
    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        match self.iter.next() {
            Some((no, line)) => {
                let mut fields = line.split_whitespace();
                match fields.next() {
                    Some(k) if k == key => Ok(fields.collect()),
                    Some(k) => Err(invalid(format!(
                        "line {}: expected {key:?}, found {k:?}",
                        no + 1
                    ))),
                    None => Err(invalid(format!("line {}: blank, expected {key:?}", no + 1))),
                }
            }
            None => Err(invalid(format!("missing {key:?} line"))),
        }
    }
}

fn parse_floats(fields: &[&str], want: usize, key: &str) -> Result<Vec<f64>> {
    if fields.len() != want {
        return Err(invalid(format!(
            "{key}: expected {want} values, found {}",
            fields.len()
        )));
    }
    let mut out = Vec::with_capacity(want);
    for f in fields {
        let v: f64 = f
            .parse()
            .map_err(|_| invalid(format!("{key}: bad number {f:?}")))?;
        if !v.is_finite() {
            return Err(invalid(format!("{key}: non-finite value {f:?}")));
        }
        out.push(v);
    }
    Ok(out)
}

fn four(values: Vec<f64>) -> [f64; 4] {
    [values[0], values[1], values[2], values[3]]
}

pub fn model_from_str(text: &str) -> Result<FusionModel> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
    };

    let head = lines.expect(MAGIC)?;
    if head != [VERSION.to_string().as_str()] {
        return Err(invalid(format!(
            "unsupported version {:?} (this build reads {VERSION})",
            head.join(" ")
        )));
    }
    let kind_field = lines.expect("kind")?;
    let kind = *kind_field
        .first()
        .ok_or_else(|| invalid("kind: missing value".into()))?;
    let output = match lines.expect("output")?.as_slice() {
        ["p-values"] => FeatureOutput::PValues,
        ["statistics"] => FeatureOutput::Statistics,
        other => return Err(invalid(format!("output: unknown {:?}", other.join(" ")))),
    };
    let pc_class = match lines.expect("pc-class")?.as_slice() {
        ["no-drift"] => ProbabilityClass::NoDrift,
        ["drift"] => ProbabilityClass::Drift,
        other => return Err(invalid(format!("pc-class: unknown {:?}", other.join(" ")))),
    };
    let threshold = parse_floats(&lines.expect("threshold")?, 1, "threshold")?[0];
    let mean = four(parse_floats(&lines.expect("mean")?, 4, "mean")?);
    let sd = four(parse_floats(&lines.expect("sd")?, 4, "sd")?);
    let log_domain = match lines.expect("domain")?.as_slice() {
        ["log"] => true,
        ["raw"] => false,
        other => return Err(invalid(format!("domain: unknown {:?}", other.join(" ")))),
    };
    let standardizer = Standardizer {
        mean,
        sd,
        log_domain,
    };

    let params = match kind {
        "avg" => ModelParams::Avg,
        "pl" => ModelParams::Pl {
            w: four(parse_floats(&lines.expect("weights")?, 4, "weights")?),
        },
        "lr" => ModelParams::Lr {
            w: four(parse_floats(&lines.expect("weights")?, 4, "weights")?),
            bias: parse_floats(&lines.expect("bias")?, 1, "bias")?[0],
        },
        "knn" => {
            let neighbours = lines.expect("neighbours")?;
            let neighbours: usize = neighbours
                .first()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| invalid("neighbours: bad count".into()))?;
            let count = lines.expect("examples")?;
            let count: usize = count
                .first()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| invalid("examples: bad count".into()))?;
            let mut examples = Vec::with_capacity(count);
            for _ in 0..count {
                let fields = lines.expect("example")?;
                if fields.len() != 5 {
                    return Err(invalid(format!(
                        "example: expected 4 features and a label, found {} fields",
                        fields.len()
                    )));
                }
                let values = parse_floats(&fields[..4], 4, "example")?;
                let label = match fields[4] {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(invalid(format!("example: bad label {other:?}")));
                    }
                };
                examples.push(FusionExample {
                    features: four(values),
                    label,
                });
            }
            ModelParams::Knn {
                neighbours,
                examples,
            }
        }
        "mlp" => {
            let flat = parse_floats(&lines.expect("params")?, MLP_PARAM_COUNT, "params")?;
            let mut mlp = Mlp::seeded(RngSeed(0));
            mlp.set_params(&flat);
            ModelParams::Mlp(mlp)
        }
        other => return Err(invalid(format!("kind: unknown {other:?}"))),
    };

    Ok(FusionModel {
        output_type: output,
        standardizer,
        threshold,
        pc_class,
        params,
    })
}

pub fn save_model(model: &FusionModel, path: &Path) -> Result<()> {
    let text = model_to_string(model)?;
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<FusionModel> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use driftwatch_core::fusion::{train_classifier, ClassifierKind, TrainingOptions};

    fn awkward_standardizer() -> Standardizer {
        // Values chosen to stress the formatter: a repeating binary fraction,
        // a negative zero, a subnormal, and a huge-but-finite magnitude.
        Standardizer {
            mean: [0.1 + 0.2, -0.0, f64::MIN_POSITIVE / 2.0, 1.0e300],
            sd: [1.0, 0.3333333333333333, 2.0f64.powi(-1060), 9.9e-305],
            log_domain: false,
        }
    }

    fn models() -> Vec<FusionModel> {
        let mut table = Vec::new();
        for i in 0..12 {
            table.push(FusionExample {
                features: [
                    (i as f64).sin(),
                    (i as f64).cos(),
                    1.0 / (i + 1) as f64,
                    (i as f64).sqrt(),
                ],
                label: i % 2 == 0,
            });
        }
        let mut out = vec![FusionModel::avg(0.05)];
        for kind in [ClassifierKind::Lr, ClassifierKind::Knn, ClassifierKind::Mlp] {
            let mut opts = TrainingOptions::default();
            opts.knn_neighbours = 3;
            opts.mlp_epochs = 20;
            out.push(train_classifier(&table, kind, &opts, RngSeed(5)).unwrap());
        }
        let mut pl = FusionModel::avg(0.05);
        pl.params = ModelParams::Pl {
            w: [-0.25, 0.125, -1.5, 0.75],
        };
        pl.standardizer = awkward_standardizer();
        out.push(pl);
        out
    }

    #[test]
    fn round_trip_is_bit_exact_for_every_kind() {
        for model in models() {
            let text = model_to_string(&model).unwrap();
            let reloaded = model_from_str(&text).unwrap();
            assert_eq!(reloaded, model);
            // String-level idempotence pins bit-exactness even where f64
            // comparison is forgiving (e.g. -0.0 == 0.0).
            assert_eq!(model_to_string(&reloaded).unwrap(), text);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        let model = models().pop().unwrap();
        save_model(&model, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
    }

    #[test]
    fn malformed_files_are_named_and_rejected() {
        let good = model_to_string(&FusionModel::avg(0.05)).unwrap();
        assert!(model_from_str(&good.replace("driftwatch-model 1", "driftwatch-model 2")).is_err());
        assert!(model_from_str(&good.replace("kind avg", "kind wavg")).is_err());
        assert!(model_from_str(&good.replace("domain raw", "domain cube")).is_err());
        assert!(model_from_str(&good.replace("threshold 0.05", "threshold inf")).is_err());
        assert!(model_from_str("").is_err());
        let truncated: String = good.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(model_from_str(&truncated).is_err());
    }

    #[test]
    fn rejects_non_finite_parameters_on_save() {
        let mut model = FusionModel::avg(0.05);
        model.threshold = f64::NAN;
        assert!(model_to_string(&model).is_err());
    }
}
