//! `--config` files: TOML whose keys are long flag names.
//!
//! ```toml
//! eta = 0.05            # applies to whichever subcommand runs
//! [sweep]
//! coarse-theta-step = 0.01
//! ```
//!
//! The keys are turned into extra `--flag value` arguments appended after the
//! command line, so a config value wins over the same flag given directly.

use std::path::Path;

use crate::error::CliError;

pub const SUBCOMMANDS: [&str; 4] = ["smooth", "optimize", "analyze", "sweep"];

fn scalar_to_string(key: &str, value: &toml::Value) -> Result<String, CliError> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Array(items) => items
            .iter()
            .map(|v| scalar_to_string(key, v))
            .collect::<Result<Vec<_>, _>>()
            .map(|parts| parts.join(",")),
        _ => Err(CliError::usage(format!(
            "config key '{key}' has an unsupported value type"
        ))),
    }
}

fn push_flag(out: &mut Vec<String>, key: &str, value: &toml::Value) -> Result<(), CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    if flag == "--config" {
        return Err(CliError::usage(
            "config files cannot name another config file",
        ));
    }
    match value {
        toml::Value::Boolean(true) => out.push(flag),
        toml::Value::Boolean(false) => {}
        other => {
            out.push(flag);
            out.push(scalar_to_string(key, other)?);
        }
    }
    Ok(())
}

/// Extra arguments contributed by the config file for `subcommand`.
pub fn override_args(path: &Path, subcommand: &str) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| lsgd_core::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_overrides(&text, subcommand).map_err(|e| match e {
        CliError::Usage(m) => CliError::usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn parse_overrides(text: &str, subcommand: &str) -> Result<Vec<String>, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::usage(format!("invalid TOML: {}", e.message())))?;
    let mut out = Vec::new();
    for (key, value) in &table {
        if let toml::Value::Table(section) = value {
            if !SUBCOMMANDS.contains(&key.as_str()) {
                return Err(CliError::usage(format!("unknown config section [{key}]")));
            }
            if key == subcommand {
                for (k, v) in section {
                    push_flag(&mut out, k, v)?;
                }
            }
        } else {
            push_flag(&mut out, key, value)?;
        }
    }
    Ok(out)
}
