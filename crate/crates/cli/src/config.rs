//! TOML configuration files: federation hyperparameters (with the legacy
//! hyperparameter names accepted as aliases) and dataset manifests.

use std::path::PathBuf;

use serde::Deserialize;

use fedids_core::autoencoder::Activation;
use fedids_core::fedavg::{FedConfig, ServerRetrain};
use fedids_core::traffic::{DatasetManifest, ManifestEntry, SCHEMA_ID};

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawServerRetrain {
    enabled: Option<bool>,
    sample_size: Option<usize>,
    retrain_epochs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(alias = "Nb_clients")]
    k_clients: Option<usize>,
    c_fraction: Option<f64>,
    #[serde(rename = "Nb_selected")]
    nb_selected: Option<usize>,
    #[serde(alias = "Batch_size")]
    batch_size: Option<usize>,
    #[serde(alias = "Epochs")]
    local_epochs: Option<usize>,
    #[serde(alias = "lr")]
    learning_rate: Option<f64>,
    #[serde(alias = "Nb_rounds")]
    n_rounds: Option<usize>,
    seed: Option<u64>,
    activation: Option<String>,
    #[serde(alias = "Nb_local_epochs")]
    central_epochs: Option<usize>,
    #[serde(alias = "R_samp_sz")]
    r_samp_sz: Option<usize>,
    #[serde(alias = "Nb_retrain_epochs")]
    nb_retrain_epochs: Option<usize>,
    server_retrain: Option<RawServerRetrain>,
}

/// Parses a federation config, filling unset keys from the defaults.
pub fn parse_fed_config(text: &str, context: &str) -> CliResult<FedConfig> {
    let raw: RawConfig = toml::from_str(text)
        .map_err(|e| CliError::validation(format!("{context}: {e}")))?;
    let mut config = FedConfig::default();

    if let Some(k) = raw.k_clients {
        if k == 0 {
            return Err(CliError::validation(format!("{context}: k_clients must be positive")));
        }
        config.k_clients = k;
    }
    match (raw.c_fraction, raw.nb_selected) {
        (Some(_), Some(_)) => {
            return Err(CliError::validation(format!(
                "{context}: give either c_fraction or Nb_selected, not both"
            )))
        }
        (Some(c), None) => config.c_fraction = c,
        (None, Some(m)) => config.c_fraction = m as f64 / config.k_clients as f64,
        (None, None) => {}
    }
    if !(config.c_fraction > 0.0 && config.c_fraction <= 1.0) {
        return Err(CliError::validation(format!(
            "{context}: c_fraction must be in (0, 1], got {}",
            config.c_fraction
        )));
    }
    if let Some(b) = raw.batch_size {
        if b == 0 {
            return Err(CliError::validation(format!("{context}: batch_size must be positive")));
        }
        config.batch_size = b;
    }
    if let Some(e) = raw.local_epochs {
        if e == 0 {
            return Err(CliError::validation(format!("{context}: local_epochs must be positive")));
        }
        config.local_epochs = e;
    }
    if let Some(lr) = raw.learning_rate {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(CliError::validation(format!("{context}: learning_rate must be positive")));
        }
        config.learning_rate = lr;
    }
    if let Some(n) = raw.n_rounds {
        config.n_rounds = n;
    }
    if let Some(seed) = raw.seed {
        config.seed = seed;
    }
    if let Some(name) = raw.activation {
        config.activation = Activation::parse(&name).ok_or_else(|| {
            CliError::validation(format!(
                "{context}: unknown activation `{name}` (expected tanh, relu, or sigmoid)"
            ))
        })?;
    }
    config.central_epochs = raw.central_epochs;

    let mut retrain = ServerRetrain::default();
    if let Some(size) = raw.r_samp_sz {
        retrain.sample_size = size;
    }
    if let Some(epochs) = raw.nb_retrain_epochs {
        retrain.retrain_epochs = epochs;
    }
    if let Some(table) = raw.server_retrain {
        if let Some(enabled) = table.enabled {
            retrain.enabled = enabled;
        }
        if let Some(size) = table.sample_size {
            retrain.sample_size = size;
        }
        if let Some(epochs) = table.retrain_epochs {
            retrain.retrain_epochs = epochs;
        }
    }
    config.server_retrain = retrain;
    Ok(config)
}

pub fn read_fed_config(path: &PathBuf) -> CliResult<FedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, "read", e))?;
    parse_fed_config(&text, &path.display().to_string())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifestEntry {
    environment: Option<String>,
    #[serde(default)]
    benign: usize,
    #[serde(default)]
    synflood: usize,
    #[serde(default)]
    udpflood: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    seed: Option<u64>,
    tw: Option<f64>,
    schema: Option<String>,
    counts: Vec<RawManifestEntry>,
}

/// Parses a dataset manifest. The schema tag, when present, must match the
/// generator's feature schema.
pub fn parse_manifest(text: &str, context: &str) -> CliResult<DatasetManifest> {
    let raw: RawManifest = toml::from_str(text)
        .map_err(|e| CliError::validation(format!("{context}: {e}")))?;
    if let Some(schema) = &raw.schema {
        if schema != SCHEMA_ID {
            return Err(CliError::validation(format!(
                "{context}: manifest schema `{schema}` does not match `{SCHEMA_ID}`"
            )));
        }
    }
    let defaults = DatasetManifest::default();
    let manifest = DatasetManifest {
        entries: raw
            .counts
            .into_iter()
            .map(|e| ManifestEntry {
                environment: e.environment.unwrap_or_else(|| "default".to_string()),
                benign: e.benign,
                synflood: e.synflood,
                udpflood: e.udpflood,
            })
            .collect(),
        seed: raw.seed.unwrap_or(defaults.seed),
        tw: raw.tw.unwrap_or(defaults.tw),
        schema: SCHEMA_ID.to_string(),
    };
    if manifest.entries.is_empty() || manifest.total_flows() == 0 {
        return Err(CliError::validation(format!(
            "{context}: manifest must request at least one flow"
        )));
    }
    if !(manifest.tw > 0.0) {
        return Err(CliError::validation(format!("{context}: tw must be positive")));
    }
    Ok(manifest)
}

pub fn read_manifest(path: &PathBuf) -> CliResult<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, "read", e))?;
    parse_manifest(&text, &path.display().to_string())
}

pub fn manifest_to_string(manifest: &DatasetManifest) -> String {
    let mut out = String::new();
    out.push_str(&format!("seed = {}\n", manifest.seed));
    out.push_str(&format!("tw = {}\n", manifest.tw));
    out.push_str(&format!("schema = \"{}\"\n", manifest.schema));
    for entry in &manifest.entries {
        out.push_str(&format!(
            "\n[[counts]]\nenvironment = \"{}\"\nbenign = {}\nsynflood = {}\nudpflood = {}\n",
            entry.environment, entry.benign, entry.synflood, entry.udpflood
        ));
    }
    out
}
