//! Versioned text documents for trained models and calibrated thresholds.
//!
//! Both are line-oriented `key value...` files. Floats carry 17 significant
//! digits so documents round-trip bit-exactly. The model document also
//! embeds the feature schema (names, retained indices, scaler ranges), so a
//! model file is self-contained: it can featurize-transform any raw feature
//! CSV it is pointed at.

use std::fs;
use std::path::PathBuf;

use fedids_core::autoencoder::{AEModel, Activation, LayerParams};
use fedids_core::detector::DetectionThreshold;
use fedids_core::schema::FeatureSchema;

use crate::error::{CliError, CliResult};
use crate::format_f64_exact;

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const THRESHOLD_FORMAT_VERSION: u32 = 1;

/// Serializes a model and its feature schema.
pub fn model_to_string(model: &AEModel, schema: &FeatureSchema) -> String {
    let mut out = String::new();
    out.push_str(&format!("format_version {MODEL_FORMAT_VERSION}\n"));
    out.push_str(&format!("input_dim {}\n", model.input_dim));
    out.push_str(&format!("activation {}\n", model.activation.as_str()));
    out.push_str(&format!(
        "layer_dims {}\n",
        model
            .layer_dims()
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    out.push_str(&format!("feature_names {}\n", schema.names.join(" ")));
    out.push_str(&format!(
        "retained_indices {}\n",
        schema
            .retained_indices
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    let ranges = schema.scaler.as_deref().unwrap_or(&[]);
    out.push_str(&format!("scaler_min {}\n", join_floats(ranges.iter().map(|r| r.0))));
    out.push_str(&format!("scaler_max {}\n", join_floats(ranges.iter().map(|r| r.1))));
    for (idx, layer) in model.layers.iter().enumerate() {
        out.push_str(&format!("layer {} {} {}\n", idx, layer.out_dim, layer.in_dim));
        out.push_str(&format!("weights {}\n", join_floats(layer.weights.iter().copied())));
        out.push_str(&format!("bias {}\n", join_floats(layer.bias.iter().copied())));
    }
    out
}

fn join_floats(values: impl Iterator<Item = f64>) -> String {
    values.map(format_f64_exact).collect::<Vec<_>>().join(" ")
}

struct LineParser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    context: &'a str,
}

impl<'a> LineParser<'a> {
    fn new(text: &'a str, context: &'a str) -> Self {
        LineParser {
            lines: text.lines().enumerate(),
            context,
        }
    }

    fn error(&self, line: usize, message: impl std::fmt::Display) -> CliError {
        CliError::validation(format!("{}: line {}: {message}", self.context, line + 1))
    }

    /// Next non-empty line, split into (key, rest).
    fn next_field(&mut self, expected_key: &str) -> CliResult<(usize, Vec<&'a str>)> {
        for (idx, line) in self.lines.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let key = tokens.next().unwrap_or_default();
            if key != expected_key {
                return Err(self.error(idx, format!("expected field `{expected_key}`, found `{key}`")));
            }
            return Ok((idx, tokens.collect()));
        }
        Err(CliError::validation(format!(
            "{}: missing field `{expected_key}`",
            self.context
        )))
    }
}

fn parse_floats(parser: &LineParser, line: usize, tokens: &[&str]) -> CliResult<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| parser.error(line, format!("invalid number `{t}`")))
        })
        .collect()
}

fn parse_single<T: std::str::FromStr>(
    parser: &LineParser,
    line: usize,
    tokens: &[&str],
    what: &str,
) -> CliResult<T> {
    if tokens.len() != 1 {
        return Err(parser.error(line, format!("expected one value for {what}")));
    }
    tokens[0]
        .parse()
        .map_err(|_| parser.error(line, format!("invalid {what} `{}`", tokens[0])))
}

/// Parses a model document back into the model and its schema.
pub fn model_from_string(text: &str, context: &str) -> CliResult<(AEModel, FeatureSchema)> {
    let mut parser = LineParser::new(text, context);

    let (line, tokens) = parser.next_field("format_version")?;
    let version: u32 = parse_single(&parser, line, &tokens, "format_version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(parser.error(line, format!("unsupported format_version {version}")));
    }

    let (line, tokens) = parser.next_field("input_dim")?;
    let input_dim: usize = parse_single(&parser, line, &tokens, "input_dim")?;

    let (line, tokens) = parser.next_field("activation")?;
    let activation_raw: String = parse_single(&parser, line, &tokens, "activation")?;
    let activation = Activation::parse(&activation_raw)
        .ok_or_else(|| parser.error(line, format!("unknown activation `{activation_raw}`")))?;

    let (line, tokens) = parser.next_field("layer_dims")?;
    let layer_dims: Vec<usize> = tokens
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parser.error(line, format!("invalid dimension `{t}`")))
        })
        .collect::<CliResult<_>>()?;
    if layer_dims.len() != 5 || layer_dims[0] != input_dim || layer_dims[4] != input_dim {
        return Err(parser.error(line, "layer_dims must list 5 widths starting and ending at input_dim"));
    }

    let (_, tokens) = parser.next_field("feature_names")?;
    let names: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();

    let (line, tokens) = parser.next_field("retained_indices")?;
    let retained_indices: Vec<usize> = tokens
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parser.error(line, format!("invalid index `{t}`")))
        })
        .collect::<CliResult<_>>()?;
    if retained_indices.len() != input_dim {
        return Err(parser.error(
            line,
            format!(
                "retained_indices has {} entries but input_dim is {input_dim}",
                retained_indices.len()
            ),
        ));
    }
    if retained_indices.windows(2).any(|w| w[0] >= w[1])
        || retained_indices.iter().any(|&i| i >= names.len())
    {
        return Err(parser.error(line, "retained_indices must be strictly increasing and in range"));
    }

    let (line, tokens) = parser.next_field("scaler_min")?;
    let mins = parse_floats(&parser, line, &tokens)?;
    let (line, tokens) = parser.next_field("scaler_max")?;
    let maxs = parse_floats(&parser, line, &tokens)?;
    if mins.len() != input_dim || maxs.len() != input_dim {
        return Err(parser.error(line, "scaler ranges must match input_dim"));
    }
    if mins.iter().zip(&maxs).any(|(lo, hi)| hi < lo) {
        return Err(parser.error(line, "scaler max must be at least min"));
    }

    let mut layers = Vec::with_capacity(4);
    for idx in 0..4 {
        let (line, tokens) = parser.next_field("layer")?;
        if tokens.len() != 3 {
            return Err(parser.error(line, "layer header needs index, out_dim, in_dim"));
        }
        let declared: usize = tokens[0]
            .parse()
            .map_err(|_| parser.error(line, "invalid layer index"))?;
        if declared != idx {
            return Err(parser.error(line, format!("expected layer {idx}, found {declared}")));
        }
        let out_dim: usize = tokens[1]
            .parse()
            .map_err(|_| parser.error(line, "invalid out_dim"))?;
        let in_dim: usize = tokens[2]
            .parse()
            .map_err(|_| parser.error(line, "invalid in_dim"))?;
        if in_dim != layer_dims[idx] || out_dim != layer_dims[idx + 1] {
            return Err(parser.error(line, "layer dimensions disagree with layer_dims"));
        }

        let (line, tokens) = parser.next_field("weights")?;
        let weights = parse_floats(&parser, line, &tokens)?;
        if weights.len() != in_dim * out_dim {
            return Err(parser.error(
                line,
                format!("expected {} weights, found {}", in_dim * out_dim, weights.len()),
            ));
        }
        let (line, tokens) = parser.next_field("bias")?;
        let bias = parse_floats(&parser, line, &tokens)?;
        if bias.len() != out_dim {
            return Err(parser.error(line, format!("expected {out_dim} bias entries, found {}", bias.len())));
        }
        layers.push(LayerParams {
            in_dim,
            out_dim,
            weights,
            bias,
        });
    }

    let model = AEModel {
        layers,
        activation,
        input_dim,
        latent_dim: layer_dims[2],
    };
    let schema = FeatureSchema {
        names,
        retained_indices,
        scaler: Some(mins.into_iter().zip(maxs).collect()),
    };
    Ok((model, schema))
}

pub fn write_model(path: &PathBuf, model: &AEModel, schema: &FeatureSchema) -> CliResult<()> {
    fs::write(path, model_to_string(model, schema)).map_err(|e| CliError::io(path, "write", e))
}

pub fn read_model(path: &PathBuf) -> CliResult<(AEModel, FeatureSchema)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, "read", e))?;
    model_from_string(&text, &path.display().to_string())
}

pub fn threshold_to_string(threshold: &DetectionThreshold) -> String {
    format!(
        "format_version {THRESHOLD_FORMAT_VERSION}\nalpha {}\nmedian_re {}\nmad {}\nn_validation {}\nmultiplier {}\n",
        format_f64_exact(threshold.alpha),
        format_f64_exact(threshold.median_re),
        format_f64_exact(threshold.mad),
        threshold.n_validation,
        format_f64_exact(threshold.multiplier),
    )
}

pub fn threshold_from_string(text: &str, context: &str) -> CliResult<DetectionThreshold> {
    let mut parser = LineParser::new(text, context);
    let (line, tokens) = parser.next_field("format_version")?;
    let version: u32 = parse_single(&parser, line, &tokens, "format_version")?;
    if version != THRESHOLD_FORMAT_VERSION {
        return Err(parser.error(line, format!("unsupported format_version {version}")));
    }
    let (line, tokens) = parser.next_field("alpha")?;
    let alpha: f64 = parse_single(&parser, line, &tokens, "alpha")?;
    let (line, tokens) = parser.next_field("median_re")?;
    let median_re: f64 = parse_single(&parser, line, &tokens, "median_re")?;
    let (line, tokens) = parser.next_field("mad")?;
    let mad: f64 = parse_single(&parser, line, &tokens, "mad")?;
    let (line, tokens) = parser.next_field("n_validation")?;
    let n_validation: usize = parse_single(&parser, line, &tokens, "n_validation")?;
    let (line, tokens) = parser.next_field("multiplier")?;
    let multiplier: f64 = parse_single(&parser, line, &tokens, "multiplier")?;
    if mad < 0.0 {
        return Err(parser.error(line, "mad must be non-negative"));
    }
    Ok(DetectionThreshold {
        alpha,
        median_re,
        mad,
        n_validation,
        multiplier,
    })
}

pub fn write_threshold(path: &PathBuf, threshold: &DetectionThreshold) -> CliResult<()> {
    fs::write(path, threshold_to_string(threshold)).map_err(|e| CliError::io(path, "write", e))
}

pub fn read_threshold(path: &PathBuf) -> CliResult<DetectionThreshold> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, "read", e))?;
    threshold_from_string(&text, &path.display().to_string())
}
