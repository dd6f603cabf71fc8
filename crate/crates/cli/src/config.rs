//! Flag and config-file merging.
//!
//! Every subcommand's arguments are `Option`s that serialize under their
//! kebab-case flag names. The `--config` file is a JSON object with the same
//! keys; flags given on the command line replace config values, and whatever
//! is still unset falls back to the module defaults.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Result<T, CliError> {
    let mut base = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Usage(format!("config {} is not a JSON object", path.display()))),
                Err(e) => return Err(CliError::Usage(format!("config {}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? else {
        unreachable!("argument structs serialize to objects");
    };
    for (k, v) in given {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("config: {e}")))
}

/// Seed from flag or config, then `VESSELMORPH_SEED`, then 0.
pub fn resolve_seed(seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var("VESSELMORPH_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("VESSELMORPH_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

pub fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T, CliError> {
    value.clone().ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

/// Parses `0,5,10` and ranges such as `0-40` (inclusive), or a mix.
pub fn parse_n_values(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse n-values {s:?}; expected e.g. 0-40 or 0,10,40"));
    let mut out = vec![];
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Default, PartialEq, Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case", deny_unknown_fields)]
    struct A {
        #[serde(skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        out_dir: Option<String>,
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"alpha": 3.0, "out-dir": "x"}"#).unwrap();
        let m = merge(&A { alpha: Some(5.0), out_dir: None }, Some(&p)).unwrap();
        assert_eq!(m, A { alpha: Some(5.0), out_dir: Some("x".into()) });
    }

    #[test]
    fn unknown_keys_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"alhpa": 3.0}"#).unwrap();
        assert!(matches!(merge(&A::default(), Some(&p)), Err(CliError::Usage(_))));
    }

    #[test]
    fn n_values() {
        assert_eq!(parse_n_values("0-3,10").unwrap(), [0, 1, 2, 3, 10]);
        assert!(parse_n_values("4-2").is_err());
        assert!(parse_n_values("").is_err());
    }
}
