//! Config documents: a single JSON schema carrying the model sections
//! (`space`, `traits`, `rates`, `scales`, `mutation_kernel`, `options`) plus
//! optional initial densities. Field names are documented in the README's
//! config reference.

use crate::model::{
    DemographicModel, ModelError, ModelOptions, MutationKernel, Rates, Scales, TraitRecord,
    TraitSpace,
};
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Validation(#[from] ModelError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    space: TraitSpace,
    traits: Vec<TraitRecord>,
    rates: Rates,
    scales: Scales,
    mutation_kernel: MutationKernel,
    #[serde(default)]
    options: ModelOptions,
    /// Per-trait initial densities, indexed like `traits`. Defaults to the
    /// monomorphic ancestor state.
    #[serde(default)]
    initial_state: Option<Vec<f64>>,
}

/// Parses and fully validates a config document. The returned model has all
/// structural invariants enforced; the second component is the optional
/// initial state.
pub fn parse_config(text: &str) -> Result<(DemographicModel, Option<Vec<f64>>), ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ConfigFile = serde_path_to_error::deserialize(de)
        .map_err(|e| ConfigError::Schema(format!("{} (at {})", e.inner(), e.path())))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    let model = DemographicModel {
        space: cfg.space,
        traits: cfg.traits,
        rates: cfg.rates,
        scales: cfg.scales,
        mutation_kernel: cfg.mutation_kernel,
        options: cfg.options,
    };
    model.validate()?;
    if let Some(init) = &cfg.initial_state {
        if init.len() != model.traits.len() {
            return Err(ConfigError::Validation(ModelError::Validation {
                field: "initial_state".into(),
                message: format!(
                    "expected {} entries, found {}",
                    model.traits.len(),
                    init.len()
                ),
            }));
        }
        if init.iter().any(|v| *v < 0.0) {
            return Err(ConfigError::Validation(ModelError::Validation {
                field: "initial_state".into(),
                message: "densities must be nonnegative".into(),
            }));
        }
    }
    Ok((model, cfg.initial_state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_assumptions, compute_fitness};

    fn canonical_json() -> String {
        std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/fixtures/canonical_three_trait.json"
        ))
        .unwrap()
    }

    #[test]
    fn canonical_file_loads_and_passes_assumptions() {
        let (model, initial) = parse_config(&canonical_json()).unwrap();
        assert!(initial.is_some());
        let fit = compute_fitness(&model).unwrap();
        assert!(check_assumptions(&model, &fit).passes());
    }

    #[test]
    fn equal_birth_death_is_rejected_with_field_name() {
        let text = canonical_json().replace("\"b\": [2.0, 3.0, 2.0]", "\"b\": [1.0, 3.0, 2.0]");
        match parse_config(&text).unwrap_err() {
            ConfigError::Validation(ModelError::Validation { field, message }) => {
                assert_eq!(field, "rates");
                assert!(message.contains("b(x) - d(x) > 0"), "{message}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unknown_field_is_named() {
        let text = canonical_json().replace("\"schema_version\"", "\"wavelength\": 7, \"schema_version\"");
        match parse_config(&text).unwrap_err() {
            ConfigError::Schema(msg) => assert!(msg.contains("wavelength"), "{msg}"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn version_mismatch_is_schema_error() {
        let text = canonical_json().replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            parse_config(&text).unwrap_err(),
            ConfigError::Schema(_)
        ));
    }
}
